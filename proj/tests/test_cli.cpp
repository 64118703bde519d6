#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nmp/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "nmp");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = nmp::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("nmp_cli_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

json read_json(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

std::string first_line(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

}  // namespace

TEST_CASE("missing config file") {
    const Run r = run({"solve", "--config", "/nonexistent/run.json"});
    CHECK(r.code == 2);
    const auto e = json::parse(r.err).at("error");
    CHECK(e.at("field") == "config_path");
    CHECK(e.contains("message"));
}

TEST_CASE("invalid configs are rejected before any work") {
    TempDir dir("invalid");
    CHECK(run({"gen", "--n", "0", "--out", dir.str()}).code == 2);
    CHECK(json::parse(run({"gen", "--manifold", "torus"}).err).at("error").at("field") == "manifold");
    CHECK(run({"gen", "--mode", "grid"}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({}).code == 2);

    std::ofstream(dir.path / "bad.json") << R"({"schema_version": 1, "n": 100, "colour": "red"})";
    const Run unknown = run({"gen", "--config", (dir.path / "bad.json").string()});
    CHECK(unknown.code == 2);
    CHECK(unknown.err.find("colour") != std::string::npos);

    std::ofstream(dir.path / "old.json") << R"({"schema_version": 99})";
    CHECK(run({"gen", "--config", (dir.path / "old.json").string()}).code == 2);

    std::ofstream(dir.path / "broken.json") << "{ not json";
    CHECK(json::parse(run({"gen", "--config", (dir.path / "broken.json").string()}).err).at("error").at("field") ==
          "config_path");
}

TEST_CASE("flags override config file values") {
    TempDir dir("override");
    std::ofstream(dir.path / "run.json") << json{{"schema_version", 1}, {"n", 300}, {"seed", 5}, {"manifold", "disk"}}.dump();
    const Run r = run({"gen", "--config", (dir.path / "run.json").string(), "--n", "200", "--out", dir.str()});
    REQUIRE(r.code == 0);
    const json cloud = read_json(dir.path / "cloud.json");
    CHECK(cloud.at("interior").size() == 200);
    CHECK(cloud.at("seed") == 5);
    CHECK(cloud.at("manifold") == "disk");
    CHECK(cloud.at("config").at("n") == 200);
}

TEST_CASE("gen, assemble, solve and energy artifacts embed the config") {
    TempDir dir("pipeline");
    REQUIRE(run({"gen", "--n", "300", "--seed", "2", "--out", dir.str()}).code == 0);
    CHECK(first_line(dir.path / "cloud.csv").rfind("# config ", 0) == 0);

    const std::string cloud = (dir.path / "cloud.json").string();
    REQUIRE(run({"assemble", "--cloud", cloud, "--problem", "x", "--out", dir.str()}).code == 0);
    CHECK(fs::exists(dir.path / "system" / "L.mtx"));
    CHECK(read_json(dir.path / "system" / "manifest.json").at("config").at("problem") == "x");

    const Run solved = run({"solve", "--cloud", cloud, "--problem", "x", "--out", dir.str()});
    REQUIRE(solved.code == 0);
    const json doc = json::parse(solved.out);
    CHECK(doc.at("e2").get<double>() > 0.0);
    CHECK(doc.at("block_residual").at("interior").get<double>() <= 1e-9);
    CHECK(first_line(dir.path / "solution.csv").rfind("# config ", 0) == 0);
    CHECK(read_json(dir.path / "solve.json").at("config").at("cloud") == cloud);

    const Run energy = run({"energy", "--cloud", cloud, "--draws", "50", "--out", dir.str()});
    REQUIRE(energy.code == 0);
    const json e = read_json(dir.path / "energy.json");
    CHECK(e.at("negative_draws") == 0);
    CHECK(e.at("energy_solution").get<double>() >= 0.0);
    CHECK(e.contains("config"));
}

TEST_CASE("small study through the command line") {
    TempDir dir("study");
    const Run r = run({"study", "--problem", "z2", "--n-list", "512,1250,2592", "--seed", "7", "--out", dir.str()});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out).at("rows") == 3);
    std::ifstream csv(dir.path / "study.csv");
    std::string line;
    int rows = 0;
    while (std::getline(csv, line)) rows += !line.empty() && line[0] != '#' && line[0] != 'n';
    CHECK(rows == 3);
    const json summary = read_json(dir.path / "study_summary.json");
    CHECK(summary.at("run_config").at("seed") == 7);
    CHECK(summary.contains("slope_interior"));
}

TEST_CASE("verify on the disk") {
    TempDir dir("verify");
    const Run r = run({"verify", "--manifold", "disk", "--resolution", "50", "--out", dir.str()});
    REQUIRE(r.code == 0);
    const json report = read_json(dir.path / "verify.json");
    for (const auto& [id, value] : report.at("identity_residuals").items()) CHECK(value.get<double>() <= 1e-4);
    CHECK(report.at("kappa_n").at("min").get<double>() == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(report.at("adjointness_gap").get<double>() <= 1e-10);
    CHECK(report.at("truncation").size() == 2);
    CHECK(report.contains("config"));
}

TEST_CASE("unwritable output directory is an I/O error") {
    const Run r = run({"gen", "--n", "100", "--out", "/proc/nmp_cannot_write"});
    CHECK(r.code == 3);
    CHECK(json::parse(r.err).at("error").contains("path"));
}
