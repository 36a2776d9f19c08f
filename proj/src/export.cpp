#include "debias/export.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace debias {

namespace fs = std::filesystem;

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <class T>
std::optional<T> parse_number(std::string_view text) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return value;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ExportError("cannot open " + path.string() + " for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw std::logic_error("format_double failed");
    return std::string(buf, ptr);
}

fs::path ResultsLayout::report(std::string_view config_id) const {
    return root / "reports" / (file_stem(config_id) + ".json");
}
fs::path ResultsLayout::points(std::string_view config_id) const {
    return root / "points" / (file_stem(config_id) + ".csv");
}
fs::path ResultsLayout::trace(std::string_view config_id) const {
    return root / "traces" / (file_stem(config_id) + ".csv");
}

void ResultsLayout::create_directories() const {
    std::error_code ec;
    for (const auto& dir : {root, root / "reports", root / "points", root / "traces"}) {
        fs::create_directories(dir, ec);
        if (ec) throw ExportError("cannot create directory " + dir.string() + ": " + ec.message());
    }
}

void write_file_atomic(const fs::path& path, std::string_view content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ExportError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw ExportError("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw ExportError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string ledger_line(const GridRow& row) {
    const auto& c = row.config;
    std::string line;
    line += row.config_id;
    line += ',';
    line += to_string(c.mutation);
    line += ',';
    line += to_string(c.crossover);
    line += ',' + std::to_string(c.population_size);
    line += ',' + format_double(c.F);
    line += ',';
    if (c.Cr) line += format_double(*c.Cr);
    line += ',';
    line += to_string(c.sdis.kind);
    line += ',' + std::to_string(c.dimension);
    line += ',' + std::to_string(c.budget);
    line += ',' + std::to_string(row.runs);
    line += ',' + format_double(row.sb_score);
    line += ',';
    line += to_string(row.classification);
    return line;
}

std::optional<GridRow> parse_ledger_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto f = split(line, ',');
    if (f.size() != 12) return std::nullopt;
    GridRow row;
    row.config_id = std::string(f[0]);
    const auto mutation = parse_mutation(f[1]);
    const auto crossover = parse_crossover(f[2]);
    const auto p = parse_number<std::size_t>(f[3]);
    const auto F = parse_number<double>(f[4]);
    const auto sdis = parse_sdis(f[6]);
    const auto n = parse_number<std::size_t>(f[7]);
    const auto budget = parse_number<std::size_t>(f[8]);
    const auto runs = parse_number<std::size_t>(f[9]);
    const auto sb = parse_number<double>(f[10]);
    const auto cls = parse_bias_class(f[11]);
    if (!mutation || !crossover || !p || !F || !sdis || !n || !budget || !runs || !sb || !cls) return std::nullopt;
    std::optional<double> Cr;
    if (!f[5].empty()) {
        Cr = parse_number<double>(f[5]);
        if (!Cr) return std::nullopt;
    }
    row.config.mutation = *mutation;
    row.config.crossover = *crossover;
    row.config.population_size = *p;
    row.config.F = *F;
    row.config.Cr = Cr;
    row.config.sdis.kind = *sdis;
    row.config.dimension = *n;
    row.config.budget = *budget;
    row.runs = *runs;
    row.sb_score = *sb;
    row.classification = *cls;
    return row;
}

GridResult read_ledger(const fs::path& path) {
    GridResult result;
    if (!fs::exists(path)) return result;
    const std::string text = read_file(path);
    std::string_view rest(text);
    bool header = true;
    while (!rest.empty()) {
        const auto nl = rest.find('\n');
        if (nl == std::string_view::npos) break;  // partial trailing line
        const auto line = rest.substr(0, nl);
        rest.remove_prefix(nl + 1);
        if (header) {
            header = false;
            if (line.starts_with("config_id,")) continue;
        }
        if (line.empty()) continue;
        if (auto row = parse_ledger_line(line)) result.rows.push_back(std::move(*row));
    }
    return result;
}

void append_ledger_row(const fs::path& path, const GridRow& row) {
    const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
    if (!fresh) {
        char last = '\n';
        {
            std::ifstream in(path, std::ios::binary);
            in.seekg(-1, std::ios::end);
            in.get(last);
        }
        if (last != '\n') {
            // Drop an unterminated tail left by an interrupted write.
            const std::string text = read_file(path);
            const auto nl = text.find_last_of('\n');
            fs::resize_file(path, nl == std::string::npos ? 0 : nl + 1);
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw ExportError("cannot open " + path.string() + " for appending");
    if (fresh || fs::file_size(path) == 0) out << kLedgerHeader << '\n';
    out << ledger_line(row) << '\n';
    out.flush();
    if (!out) throw ExportError("append failed for " + path.string());
}

void write_ledger(const fs::path& path, const GridResult& result) {
    std::string text(kLedgerHeader);
    text += '\n';
    for (const auto& row : result.rows) {
        text += ledger_line(row);
        text += '\n';
    }
    write_file_atomic(path, text);
}

void write_report_json(const fs::path& path, const SBReport& report, std::string_view config_id) {
    write_file_atomic(path, to_json(report, config_id).dump(2) + "\n");
}

SBReport read_report_json(const fs::path& path) {
    try {
        return report_from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::exception& e) {
        throw ExportError("malformed report " + path.string() + ": " + e.what());
    }
}

void write_points_csv(const fs::path& path, const PointMatrix& points) {
    std::string text = "run_id";
    for (std::size_t c = 0; c < points.cols(); ++c) text += ",x_" + std::to_string(c + 1);
    text += '\n';
    for (std::size_t r = 0; r < points.rows(); ++r) {
        text += std::to_string(r);
        for (double v : points.row(r)) {
            text += ',';
            text += format_double(v);
        }
        text += '\n';
    }
    write_file_atomic(path, text);
}

PointMatrix read_points_csv(const fs::path& path) {
    const std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ExportError("empty points file " + path.string());
    PointMatrix points;
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        values.clear();
        for (std::size_t i = 1; i < f.size(); ++i) {
            const auto v = parse_number<double>(f[i]);
            if (!v) throw ExportError("malformed value in " + path.string());
            values.push_back(*v);
        }
        points.append_row(values);
    }
    return points;
}

void write_trace_csv(const fs::path& path, const EmergenceTrace& trace) {
    std::string text = "evals,sb\n";
    for (const auto& cp : trace.checkpoints) {
        text += std::to_string(cp.evaluations) + "," + format_double(cp.sb_score) + "\n";
    }
    write_file_atomic(path, text);
}

Heatmap heatmap_slice(const GridResult& result, std::string_view variant, std::size_t p, SdisKind sdis) {
    std::vector<const GridRow*> slice;
    for (const auto& row : result.rows) {
        if (variant_name(row.config) == variant && row.config.population_size == p && row.config.sdis.kind == sdis) {
            slice.push_back(&row);
        }
    }
    if (slice.empty()) throw std::invalid_argument("no grid rows for slice " + std::string(variant));

    Heatmap map;
    const auto add_unique = [](std::vector<double>& v, double x) {
        if (std::none_of(v.begin(), v.end(), [&](double y) { return std::fabs(x - y) < 5e-4; })) v.push_back(x);
    };
    for (const auto* row : slice) {
        add_unique(map.F_values, row->config.F);
        if (row->config.Cr) add_unique(map.Cr_values, *row->config.Cr);
    }
    std::sort(map.F_values.begin(), map.F_values.end());
    std::sort(map.Cr_values.begin(), map.Cr_values.end());
    const std::size_t cols = std::max<std::size_t>(1, map.Cr_values.size());
    map.cells.assign(map.F_values.size(), std::vector<double>(cols, std::numeric_limits<double>::quiet_NaN()));
    const auto find = [](const std::vector<double>& v, double x) {
        return static_cast<std::size_t>(
            std::find_if(v.begin(), v.end(), [&](double y) { return std::fabs(x - y) < 5e-4; }) - v.begin());
    };
    for (const auto* row : slice) {
        const std::size_t fi = find(map.F_values, row->config.F);
        const std::size_t ci = row->config.Cr ? find(map.Cr_values, *row->config.Cr) : 0;
        map.cells[fi][ci] = row->sb_score;
    }
    return map;
}

void write_heatmap_csv(const fs::path& path, const Heatmap& heatmap) {
    char buf[32];
    std::string text = "F";
    if (heatmap.Cr_values.empty()) {
        text += ",sb";
    } else {
        for (double cr : heatmap.Cr_values) {
            std::snprintf(buf, sizeof buf, ",Cr%.3f", cr);
            text += buf;
        }
    }
    text += '\n';
    for (std::size_t f = 0; f < heatmap.F_values.size(); ++f) {
        std::snprintf(buf, sizeof buf, "%.3f", heatmap.F_values[f]);
        text += buf;
        for (double v : heatmap.cells[f]) {
            text += ',';
            if (!std::isnan(v)) text += format_double(v);
        }
        text += '\n';
    }
    write_file_atomic(path, text);
}

}  // namespace debias
