#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "debias/cli.hpp"
#include "debias/export.hpp"

using namespace debias;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("debias_test_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::vector<std::string> kSmallRun = {"--mutation", "best/1", "--crossover", "bin", "--sdis",  "sat",
                                            "--p",        "10",     "--f",         "0.5", "--cr",    "0.9",
                                            "--n",        "4",      "--budget",    "300", "--runs",  "12"};

std::vector<std::string> with(std::vector<std::string> head, const std::vector<std::string>& tail) {
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
}

}  // namespace

TEST_CASE("help exits cleanly") {
    const auto r = cli({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("grid") != std::string::npos);
}

TEST_CASE("paper grid dry run lists every configuration") {
    const auto r = cli({"grid", "--paper", "--dry-run"});
    CHECK(r.code == 0);
    CHECK(r.out.find("10980 configurations") != std::string::npos);
    CHECK(r.out.find("DE/curr-to-rand/1-p5-COTN-F0.050\n") != std::string::npos);
}

TEST_CASE("validation errors name the flag and exit 1") {
    auto r = cli({"run", "--mutation", "curr-to-rand/1", "--sdis", "sat", "--p", "20", "--f", "0.5", "--cr", "0.5"});
    CHECK(r.code == 1);
    CHECK(r.err.find("--cr") != std::string::npos);

    r = cli({"run", "--mutation", "rand/7", "--crossover", "bin", "--sdis", "sat", "--p", "20", "--f", "0.5", "--cr", "0.5"});
    CHECK(r.code == 1);
    CHECK(r.err.find("--mutation") != std::string::npos);

    r = cli({"run", "--mutation", "rand/1", "--crossover", "bin", "--sdis", "clip", "--p", "20", "--f", "0.5", "--cr", "0.5"});
    CHECK(r.code == 1);
    CHECK(r.err.find("--sdis") != std::string::npos);

    r = cli({"run", "--mutation", "rand/1", "--crossover", "bin", "--sdis", "sat", "--p", "3", "--f", "0.5", "--cr", "0.5"});
    CHECK(r.code == 1);
    CHECK(r.err.find("--p") != std::string::npos);

    r = cli({"run", "--mutation", "rand/1", "--crossover", "bin", "--sdis", "sat", "--p", "20", "--f", "0.5", "--cr", "1.5"});
    CHECK(r.code == 1);
    CHECK(r.err.find("--cr") != std::string::npos);

    r = cli({"rank", "--out", "/nonexistent/results"});
    CHECK(r.code == 1);
    CHECK(r.err.find("--out") != std::string::npos);

    r = cli({"frobnicate"});
    CHECK(r.code == 1);
}

TEST_CASE("emit-config writes a file that --config reproduces") {
    const auto dir = fresh_dir("emit");
    fs::create_directories(dir);
    const auto cfg = (dir / "grid.json").string();
    auto r = cli({"grid", "--mutation", "rand/1,best/2", "--crossover", "bin,exp", "--sdis", "sat,COTN", "--p", "20",
                  "--f", "0.5,0.9", "--cr", "0.1", "--emit-config", cfg, "--dry-run"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("16 configurations") != std::string::npos);
    const auto again = cli({"grid", "--config", cfg, "--dry-run"});
    CHECK(again.code == 0);
    CHECK(again.out == r.out);
}

TEST_CASE("run writes report, points and a ledger row") {
    const auto dir = fresh_dir("run");
    const auto r = cli(with({"run", "--out", dir.string()}, kSmallRun));
    REQUIRE(r.code == 0);
    const auto id = "DE/best/1/bin-p10-sat-F0.500-Cr0.900";
    CHECK(r.out.find(id) != std::string::npos);
    const ResultsLayout layout{dir};
    CHECK(fs::exists(layout.report(id)));
    CHECK(read_points_csv(layout.points(id)).rows() == 12);
    CHECK(read_ledger(layout.ledger()).rows.size() == 1);
    // re-running the same configuration replaces, not duplicates, its row
    REQUIRE(cli(with({"run", "--out", dir.string()}, kSmallRun)).code == 0);
    CHECK(read_ledger(layout.ledger()).rows.size() == 1);
}

TEST_CASE("identical invocations produce identical files") {
    const auto a = fresh_dir("det_a");
    const auto b = fresh_dir("det_b");
    REQUIRE(cli(with({"run", "--jobs", "1", "--out", a.string()}, kSmallRun)).code == 0);
    REQUIRE(cli(with({"run", "--jobs", "2", "--out", b.string()}, kSmallRun)).code == 0);
    const auto id = "DE/best/1/bin-p10-sat-F0.500-Cr0.900";
    CHECK(slurp(ResultsLayout{a}.points(id)) == slurp(ResultsLayout{b}.points(id)));
    CHECK(slurp(ResultsLayout{a}.report(id)) == slurp(ResultsLayout{b}.report(id)));
    CHECK(slurp(ResultsLayout{a}.ledger()) == slurp(ResultsLayout{b}.ledger()));
}

TEST_CASE("DEBIAS_OUT overrides --out") {
    const auto env_dir = fresh_dir("env");
    const auto flag_dir = fresh_dir("flag");
    ::setenv("DEBIAS_OUT", env_dir.string().c_str(), 1);
    const auto r = cli(with({"run", "--out", flag_dir.string()}, kSmallRun));
    ::unsetenv("DEBIAS_OUT");
    REQUIRE(r.code == 0);
    CHECK(fs::exists(ResultsLayout{env_dir}.ledger()));
    CHECK_FALSE(fs::exists(flag_dir));
}

TEST_CASE("grid, rank and export work together") {
    const auto dir = fresh_dir("pipeline");
    auto r = cli({"grid", "--out", dir.string(), "--mutation", "best/1,curr-to-rand/1", "--crossover", "bin", "--sdis",
                  "sat", "--p", "10", "--f", "0.483,0.916", "--cr", "0.05,0.99", "--n", "4", "--budget", "300",
                  "--runs", "10", "--jobs", "2"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("6 configurations:") != std::string::npos);

    r = cli({"rank", "--out", dir.string(), "--top", "0"});
    REQUIRE(r.code == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 7);
    CHECK(r.out.starts_with("rank,config_id,p,F,Cr,sb_score,classification\n1,"));

    r = cli({"rank", "--out", dir.string(), "--cr", "0.99", "--top", "0"});
    REQUIRE(r.code == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 3);

    const auto file = (dir / "slice.csv").string();
    r = cli({"export", "--out", dir.string(), "--heatmap", "DE/best/1/bin", "--p", "10", "--sdis", "sat", "--file", file});
    REQUIRE(r.code == 0);
    CHECK(slurp(file).starts_with("F,Cr0.050,Cr0.990\n"));

    r = cli({"export", "--out", dir.string(), "--all-heatmaps"});
    REQUIRE(r.code == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 2);

    r = cli({"export", "--out", dir.string(), "--heatmap", "DE/rand/9/bin", "--p", "10", "--sdis", "sat"});
    CHECK(r.code == 1);
}

TEST_CASE("emergence writes a trace") {
    const auto dir = fresh_dir("emergence");
    const auto r = cli({"emergence", "--out", dir.string(), "--mutation", "best/1", "--crossover", "bin", "--sdis",
                        "sat", "--p", "10", "--f", "0.916", "--cr", "0.99", "--n", "4", "--budget", "500", "--runs",
                        "20", "--stride", "100"});
    REQUIRE(r.code == 0);
    const auto trace = ResultsLayout{dir}.trace("DE/best/1/bin-p10-sat-F0.916-Cr0.990");
    REQUIRE(fs::exists(trace));
    CHECK(slurp(trace).starts_with("evals,sb\n10,"));
}
