#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace cholgauss {

// Numeric table with named columns.
class DataTable {
public:
    DataTable() = default;

    void add_column(std::string name, Eigen::VectorXd values);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return names_.size(); }
    [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }
    [[nodiscard]] bool has(std::string_view name) const noexcept;
    // Throws schema_error naming the missing column.
    [[nodiscard]] const Eigen::VectorXd& column(std::string_view name) const;
    [[nodiscard]] const Eigen::VectorXd& column(std::size_t c) const { return columns_.at(c); }

    // Subset of rows, in the given order.
    [[nodiscard]] DataTable select_rows(const std::vector<std::size_t>& rows) const;
    // Row-major n x k matrix of the named columns.
    [[nodiscard]] Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> matrix(
        const std::vector<std::string>& names) const;

private:
    std::vector<std::string> names_;
    std::vector<Eigen::VectorXd> columns_;
    std::size_t rows_ = 0;
};

// Comma-separated with a header row. Empty cells and "NA" read as NaN.
[[nodiscard]] DataTable read_csv(std::istream& in);
[[nodiscard]] DataTable read_csv(const std::filesystem::path& path);
void write_csv(std::ostream& out, const DataTable& table);

// Shortest representation that parses back to the same double.
[[nodiscard]] std::string format_double(double value);

// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace cholgauss
