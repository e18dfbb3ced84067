#include <doctest.h>

#include <nlohmann/json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Run {
    int status;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Workdir {
public:
    Workdir() : path_(fs::temp_directory_path() / ("cholgauss_cli_" + std::to_string(::getpid()))) {
        fs::create_directories(path_);
    }
    ~Workdir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

    Run run(const std::string& args) const {
        const fs::path out = path_ / "stdout.txt", err = path_ / "stderr.txt";
        const std::string cmd = std::string(CHOLGAUSS_CLI) + " " + args + " > " + out.string() + " 2> " + err.string();
        const int raw = std::system(cmd.c_str());
        return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(out), slurp(err)};
    }

private:
    fs::path path_;
};

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::vector<std::string> fields(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) out.push_back(f);
    return out;
}

}  // namespace

TEST_CASE("simulate writes data and truth tables and rejects unsupported dimensions") {
    Workdir w;
    const Run bad = w.run("simulate --k 4 --out " + w.path().string());
    CHECK(bad.status == 2);
    CHECK(bad.err.find("k=4") != std::string::npos);

    const Run ok = w.run("simulate --n 300 --k 3 --alpha 1 --seed 7 --out " + w.path().string());
    REQUIRE(ok.status == 0);
    const auto data = lines(slurp(w.path() / "data.csv"));
    CHECK(data.size() == 301);
    CHECK(data[0] == "x,y1,y2,y3");
    const auto truth = lines(slurp(w.path() / "truth.csv"));
    CHECK(truth[0] == "x,mu_1,mu_2,mu_3,psi_1,psi_2,psi_3,phi_1_2,phi_1_3,phi_2_3");
    // Full-precision numbers survive a text round trip.
    const auto row = fields(data[5]);
    std::ostringstream again;
    again.precision(17);
    again << std::stod(row[1]);
    CHECK(std::stod(again.str()) == std::stod(row[1]));
}

TEST_CASE("fit writes a deterministic artifact with every intercept") {
    Workdir w;
    REQUIRE(w.run("simulate --n 200 --k 3 --seed 3 --out " + w.path().string()).status == 0);
    const fs::path spec = w.path() / "icept.json";
    std::ofstream(spec) << R"({"name": "icept", "family": "basic_chol", "k": 3, "formulas": {}})";
    const std::string base = "fit --spec " + spec.string() + " --input " + (w.path() / "data.csv").string();
    REQUIRE(w.run(base + " --out " + (w.path() / "a.json").string()).status == 0);
    REQUIRE(w.run(base + " --out " + (w.path() / "b.json").string()).status == 0);
    const std::string a = slurp(w.path() / "a.json");
    CHECK(a == slurp(w.path() / "b.json"));

    const auto doc = nlohmann::json::parse(a);
    CHECK(doc.at("converged").get<bool>());
    std::size_t intercepts = 0;
    for (const auto& p : doc.at("parameters"))
        for (const auto& t : p.at("terms"))
            if (t.at("kind") == "intercept") ++intercepts;
    CHECK(intercepts == 3 * (3 + 3) / 2);
    CHECK(doc.contains("aic"));
    CHECK(doc.at("parameters")[0].at("terms")[0].contains("smoothing"));
}

TEST_CASE("describe reports covariance parameter counts") {
    Workdir w;
    const Run r = w.run("describe --spec " + std::string(CHOLGAUSS_SPECS_DIR) + "/weather/basic_chol_ad5.json");
    REQUIRE(r.status == 0);
    const auto doc = nlohmann::json::parse(lines(r.out).at(0));
    CHECK(doc.at("flexible") == 45);
    CHECK(doc.at("intercept") == 0);
    CHECK(doc.at("zero") == 10);
}

TEST_CASE("missing columns produce a descriptive error") {
    Workdir w;
    REQUIRE(w.run("simulate --n 100 --k 3 --seed 3 --out " + w.path().string()).status == 0);
    const Run r = w.run("fit --spec " + std::string(CHOLGAUSS_SPECS_DIR) + "/weather/modified_chol.json --input " +
                        (w.path() / "data.csv").string() + " --out " + (w.path() / "f.json").string());
    CHECK(r.status != 0);
    CHECK(r.err.find("obs_1") != std::string::npos);
}

TEST_CASE("score and cv panels") {
    Workdir w;
    REQUIRE(w.run("simulate --n 250 --k 3 --seed 4 --out " + w.path().string()).status == 0);
    const std::string data = (w.path() / "data.csv").string();
    const std::string spec = std::string(CHOLGAUSS_SPECS_DIR) + "/sim/trivariate_linear.json";
    REQUIRE(w.run("fit --spec " + spec + " --input " + data + " --out " + (w.path() / "f.json").string()).status == 0);
    const Run s = w.run("score --fit " + (w.path() / "f.json").string() + " --input " + data + " --vs-draws 50");
    REQUIRE(s.status == 0);
    const auto rows = lines(s.out);
    CHECK(rows.size() == 251);
    const auto header = fields(rows[0]);
    CHECK(header.front() == "row");
    CHECK(header.back() == "loglik");

    const fs::path cv = w.path() / "cv";
    const Run c = w.run("cv --spec " + spec + " --input " + data + " --folds 5 --vs-draws 20 --out " + cv.string());
    REQUIRE(c.status == 0);
    std::set<std::string> folds;
    const auto f = lines(slurp(cv / "folds.csv"));
    for (std::size_t i = 1; i < f.size(); ++i) folds.insert(fields(f[i])[1]);
    CHECK(folds.size() == 5);
    CHECK(lines(slurp(cv / "panel.csv")).size() == 251);
    CHECK(fs::exists(cv / "groups.csv"));
}

TEST_CASE("experiment tables are sized by the protocol") {
    Workdir w;
    const fs::path out = w.path() / "exp";
    const Run r = w.run("experiment rmse_vs_n --reps 2 --ns 100 500 --eval-points 200 --workers 1 --out " + out.string());
    REQUIRE(r.status == 0);
    const auto rows = lines(slurp(out / "rmse.csv"));
    CHECK(rows.size() == 1 + 2 * 2 * 9);
    CHECK(lines(slurp(out / "summary.csv")).size() == 1 + 2 * 9);
}
