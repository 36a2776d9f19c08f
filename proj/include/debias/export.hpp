#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "debias/experiment.hpp"
#include "debias/sb_metrics.hpp"

namespace debias {

/// I/O failure carrying the offending path in its message.
class ExportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal representation.
std::string format_double(double v);

/// Standard layout of a results directory.
struct ResultsLayout {
    std::filesystem::path root;

    std::filesystem::path ledger() const { return root / "ledger.csv"; }
    std::filesystem::path report(std::string_view config_id) const;
    std::filesystem::path points(std::string_view config_id) const;
    std::filesystem::path trace(std::string_view config_id) const;
    void create_directories() const;
};

inline constexpr std::string_view kLedgerHeader =
    "config_id,mutation,crossover,p,F,Cr,sdis,n,budget,runs,sb_score,classification";

std::string ledger_line(const GridRow& row);
/// Parses one data line; returns nullopt for malformed or partial lines.
std::optional<GridRow> parse_ledger_line(std::string_view line);

/// Missing file reads as an empty result. A trailing partial line is ignored.
GridResult read_ledger(const std::filesystem::path& path);
void append_ledger_row(const std::filesystem::path& path, const GridRow& row);
void write_ledger(const std::filesystem::path& path, const GridResult& result);

void write_report_json(const std::filesystem::path& path, const SBReport& report, std::string_view config_id);
SBReport read_report_json(const std::filesystem::path& path);

/// run_id,x_1..x_n
void write_points_csv(const std::filesystem::path& path, const PointMatrix& points);
PointMatrix read_points_csv(const std::filesystem::path& path);

/// evals,sb
void write_trace_csv(const std::filesystem::path& path, const EmergenceTrace& trace);

/// F rows x Cr columns of sb_score for one (variant, p, SDIS) slice.
struct Heatmap {
    std::vector<double> F_values;
    std::vector<double> Cr_values;
    /// cells[f][c]; NaN where the grid has no row.
    std::vector<std::vector<double>> cells;
};

/// `variant` is "DE/x/y/z". Throws std::invalid_argument if no row matches.
Heatmap heatmap_slice(const GridResult& result, std::string_view variant, std::size_t p, SdisKind sdis);
/// Header "F,Cr<v>,..."; one line per F. curr-to-rand/1 slices have a single "sb" column.
void write_heatmap_csv(const std::filesystem::path& path, const Heatmap& heatmap);

/// Writes `content` to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace debias
