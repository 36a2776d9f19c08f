#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "debias/export.hpp"

using namespace debias;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("debias_test_export_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<std::string> lines_of(const fs::path& path) {
    std::ifstream in(path);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return lines;
}

GridRow make_row(Mutation m, Crossover x, double F, std::optional<double> cr, std::size_t p, SdisKind s, double sb) {
    DEConfig c;
    c.mutation = m;
    c.crossover = x;
    c.F = F;
    c.Cr = cr;
    c.population_size = p;
    c.sdis = SdisSpec{s};
    return GridRow{config_id(c), c, 600, sb, classify(sb)};
}

}  // namespace

TEST_CASE("format_double round-trips") {
    RandomStream rng(1);
    for (int i = 0; i < 10000; ++i) {
        const double v = rng.uniform() * std::pow(10.0, double(rng.index(20)) - 10.0);
        CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(0.0) == "0");
}

TEST_CASE("points CSV has one row per final individual") {
    const auto dir = fresh_dir("points");
    RandomStream rng(2);
    PointMatrix m(600, 30);
    for (std::size_t r = 0; r < 600; ++r) {
        for (double& x : m.row(r)) x = rng.uniform();
    }
    m(0, 0) = 0.0;
    m(1, 1) = 1.0;
    const auto path = dir / "p.csv";
    write_points_csv(path, m);
    const auto lines = lines_of(path);
    REQUIRE(lines.size() == 601);
    CHECK(lines[0].starts_with("run_id,x_1,x_2,"));
    CHECK(lines[0].ends_with(",x_30"));
    CHECK(std::count(lines[1].begin(), lines[1].end(), ',') == 30);
    CHECK(read_points_csv(path) == m);
}

TEST_CASE("trace CSV") {
    const auto dir = fresh_dir("trace");
    EmergenceTrace t{"DE/best/1/bin-p20-sat-F0.916-Cr0.990", 100, 2000, {{20, 0.0}, {120, 1.5}, {220, 12.25}}};
    write_trace_csv(dir / "t.csv", t);
    const auto lines = lines_of(dir / "t.csv");
    REQUIRE(lines.size() == 4);
    CHECK(lines[0] == "evals,sb");
    CHECK(lines[1] == "20,0");
    CHECK(lines[3] == "220,12.25");
}

TEST_CASE("ledger line round trip") {
    const auto row = make_row(Mutation::Best1, Crossover::Binomial, 0.916, 0.05, 20, SdisKind::COTN, 3.25);
    const auto line = ledger_line(row);
    CHECK(line.starts_with("DE/best/1/bin-p20-COTN-F0.916-Cr0.050,"));
    const auto back = parse_ledger_line(line);
    REQUIRE(back.has_value());
    CHECK(back->config_id == row.config_id);
    CHECK(back->sb_score == 3.25);
    CHECK(back->classification == BiasClass::Mild);
    CHECK(config_id(back->config) == row.config_id);

    const auto ctr = make_row(Mutation::CurrentToRand1, Crossover::None, 0.05, std::nullopt, 100, SdisKind::Saturate, 0);
    const auto ctr_back = parse_ledger_line(ledger_line(ctr));
    REQUIRE(ctr_back.has_value());
    CHECK_FALSE(ctr_back->config.Cr.has_value());
    CHECK(ctr_back->config_id == "DE/curr-to-rand/1-p100-sat-F0.050");

    CHECK_FALSE(parse_ledger_line("DE/best/1/bin-p20").has_value());
    CHECK_FALSE(parse_ledger_line("").has_value());
}

TEST_CASE("ledger append tolerates a torn tail") {
    const auto dir = fresh_dir("ledger");
    const auto path = dir / "ledger.csv";
    const auto a = make_row(Mutation::Rand1, Crossover::Binomial, 0.5, 0.5, 20, SdisKind::Saturate, 0.0);
    const auto b = make_row(Mutation::Rand1, Crossover::Exponential, 0.5, 0.5, 20, SdisKind::Saturate, 11.0);
    append_ledger_row(path, a);
    {
        std::ofstream out(path, std::ios::app | std::ios::binary);
        out << "DE/rand/1/exp-p20";
    }
    CHECK(read_ledger(path).rows.size() == 1);
    append_ledger_row(path, b);
    const auto rows = read_ledger(path).rows;
    REQUIRE(rows.size() == 2);
    CHECK(rows[1] == b);
    CHECK(lines_of(path)[0] == kLedgerHeader);
}

TEST_CASE("report JSON file round trip") {
    const auto dir = fresh_dir("report");
    RandomStream rng(3);
    PointMatrix m(40, 3);
    for (std::size_t r = 0; r < 40; ++r) {
        for (double& x : m.row(r)) x = rng.uniform();
    }
    const auto rep = sb_score(m);
    write_report_json(dir / "r.json", rep, "X");
    const auto back = read_report_json(dir / "r.json");
    CHECK(back.sb_score == rep.sb_score);
    CHECK(back.per_dim.size() == 3);
    CHECK(back.per_dim[1].p_adj == rep.per_dim[1].p_adj);
}

TEST_CASE("heatmap slice is F rows by Cr columns") {
    GridResult res;
    const auto& Fs = paper_F_values();
    const auto& Crs = paper_Cr_values();
    for (std::size_t i = 0; i < Fs.size(); ++i) {
        for (std::size_t j = 0; j < Crs.size(); ++j) {
            res.rows.push_back(make_row(Mutation::Best1, Crossover::Binomial, Fs[i], Crs[j], 20, SdisKind::Saturate,
                                        double(10 * i + j)));
        }
    }
    res.rows.push_back(make_row(Mutation::Best1, Crossover::Exponential, 0.5, 0.5, 20, SdisKind::Saturate, 99.0));
    const auto map = heatmap_slice(res, "DE/best/1/bin", 20, SdisKind::Saturate);
    REQUIRE(map.F_values.size() == 10);
    REQUIRE(map.Cr_values.size() == 5);
    CHECK(map.cells[3][2] == 32.0);

    const auto dir = fresh_dir("heatmap");
    write_heatmap_csv(dir / "h.csv", map);
    const auto lines = lines_of(dir / "h.csv");
    REQUIRE(lines.size() == 11);
    CHECK(lines[0] == "F,Cr0.050,Cr0.285,Cr0.520,Cr0.755,Cr0.990");
    CHECK(lines[1].starts_with("0.050,0,1,2,3,4"));

    CHECK_THROWS_AS(heatmap_slice(res, "DE/rand/1/bin", 20, SdisKind::Saturate), std::invalid_argument);

    GridResult ctr;
    ctr.rows.push_back(make_row(Mutation::CurrentToRand1, Crossover::None, 0.05, std::nullopt, 100, SdisKind::Saturate, 7));
    const auto cmap = heatmap_slice(ctr, "DE/curr-to-rand/1", 100, SdisKind::Saturate);
    write_heatmap_csv(dir / "c.csv", cmap);
    CHECK(lines_of(dir / "c.csv")[0] == "F,sb");
}

TEST_CASE("I/O failures name the offending path") {
    const fs::path bad = "/proc/definitely/not/writable/x.csv";
    try {
        write_points_csv(bad, PointMatrix(1, 1));
        FAIL("expected ExportError");
    } catch (const ExportError& e) {
        CHECK(std::string(e.what()).find(bad.string()) != std::string::npos);
    }
    CHECK_THROWS_AS(read_points_csv("/nonexistent/points.csv"), ExportError);
}
