#include "cholgauss/data_table.hpp"

#include "cholgauss/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace cholgauss {

void DataTable::add_column(std::string name, Eigen::VectorXd values) {
    if (has(name)) throw schema_error("duplicate column '" + name + "'");
    if (!names_.empty() && static_cast<std::size_t>(values.size()) != rows_) {
        throw schema_error("column '" + name + "' has " + std::to_string(values.size()) + " rows, table has " +
                           std::to_string(rows_));
    }
    rows_ = static_cast<std::size_t>(values.size());
    names_.push_back(std::move(name));
    columns_.push_back(std::move(values));
}

bool DataTable::has(std::string_view name) const noexcept {
    for (const auto& n : names_) {
        if (n == name) return true;
    }
    return false;
}

const Eigen::VectorXd& DataTable::column(std::string_view name) const {
    for (std::size_t c = 0; c < names_.size(); ++c) {
        if (names_[c] == name) return columns_[c];
    }
    throw schema_error("missing column '" + std::string(name) + "'");
}

DataTable DataTable::select_rows(const std::vector<std::size_t>& rows) const {
    DataTable out;
    for (std::size_t c = 0; c < names_.size(); ++c) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) v[static_cast<Eigen::Index>(r)] = columns_[c][static_cast<Eigen::Index>(rows[r])];
        out.add_column(names_[c], std::move(v));
    }
    return out;
}

Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> DataTable::matrix(
    const std::vector<std::string>& names) const {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m(static_cast<Eigen::Index>(rows_),
                                                                             static_cast<Eigen::Index>(names.size()));
    for (std::size_t c = 0; c < names.size(); ++c) m.col(static_cast<Eigen::Index>(c)) = column(names[c]);
    return m;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    for (char ch : line) {
        if (ch == '"') {
            quoted = !quoted;
        } else if (ch == ',' && !quoted) {
            out.push_back(cell);
            cell.clear();
        } else if (ch != '\r') {
            cell.push_back(ch);
        }
    }
    out.push_back(cell);
    return out;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

}  // namespace

DataTable read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw schema_error("CSV input is empty");
    std::vector<std::string> header = split_line(line);
    for (auto& h : header) h = trim(h);
    std::vector<std::vector<double>> cols(header.size());
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != header.size()) {
            throw schema_error("CSV line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                               " fields, header has " + std::to_string(header.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string cell = trim(cells[c]);
            double v = std::numeric_limits<double>::quiet_NaN();
            if (!cell.empty() && cell != "NA") {
                const char* first = cell.data();
                const char* last = first + cell.size();
                if (*first == '+') ++first;
                auto [ptr, ec] = std::from_chars(first, last, v);
                if (ec != std::errc() || ptr != last) {
                    throw schema_error("CSV line " + std::to_string(lineno) + ", column '" + header[c] +
                                       "': not a number: " + cell);
                }
            }
            cols[c].push_back(v);
        }
    }
    DataTable table;
    for (std::size_t c = 0; c < header.size(); ++c) {
        table.add_column(header[c], Eigen::Map<Eigen::VectorXd>(cols[c].data(), static_cast<Eigen::Index>(cols[c].size())));
    }
    return table;
}

DataTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw schema_error("cannot open '" + path.string() + "'");
    return read_csv(in);
}

std::string format_double(double value) {
    if (std::isnan(value)) return "NA";
    if (std::isinf(value)) return value > 0 ? "Inf" : "-Inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const DataTable& table) {
    for (std::size_t c = 0; c < table.cols(); ++c) out << (c ? "," : "") << table.names()[c];
    out << '\n';
    for (std::size_t r = 0; r < table.rows(); ++r) {
        for (std::size_t c = 0; c < table.cols(); ++c) {
            out << (c ? "," : "") << format_double(table.column(c)[static_cast<Eigen::Index>(r)]);
        }
        out << '\n';
    }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw schema_error("cannot write '" + tmp.string() + "'");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw schema_error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace cholgauss
