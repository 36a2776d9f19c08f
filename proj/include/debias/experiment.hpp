#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "debias/de_engine.hpp"
#include "debias/sb_metrics.hpp"

namespace debias {

/// The ten scale factors and five crossover rates of the full study.
const std::vector<double>& paper_F_values();
const std::vector<double>& paper_Cr_values();
const std::vector<std::size_t>& paper_population_sizes();

/// One cartesian block of configurations. curr-to-rand/1 entries ignore
/// `crossovers` and `Cr_values`.
struct GridBlock {
    std::vector<Mutation> mutations;
    std::vector<Crossover> crossovers;
    std::vector<SdisKind> sdis;
    std::vector<std::size_t> p_values;
    std::vector<double> F_values;
    std::vector<double> Cr_values;

    /// |mut_no_cr|·|p|·|sdis|·|F| + |mut_cr|·|crossovers|·|p|·|sdis|·|F|·|Cr|
    std::size_t count() const noexcept;

    bool operator==(const GridBlock&) const = default;
};

struct GridSpec {
    std::vector<GridBlock> blocks;
    std::size_t dimension = 30;
    std::size_t budget = 300000;
    std::size_t runs = 600;
    std::uint64_t base_seed = 0;
    double cotn_sigma = 1.0 / 3.0;
    SBConfig sb{};

    /// 13 variants x 6 SDIS x p{5,20,100} x 10 F x 5 Cr (no Cr for curr-to-rand/1).
    static GridSpec paper();
    /// Reduced-budget grid used for desk-scale replication (12 configurations).
    static GridSpec desk();

    /// Expanded configurations in canonical order, duplicates across blocks removed.
    std::vector<DEConfig> configurations() const;
    /// Sum of the per-block closed-form counts.
    std::size_t count() const noexcept;
    /// Throws ConfigError for any configuration the engine would reject.
    void validate() const;
};

nlohmann::json to_json(const GridSpec& spec);
GridSpec grid_spec_from_json(const nlohmann::json& doc);

struct GridRow {
    std::string config_id;
    DEConfig config;
    std::size_t runs = 0;
    double sb_score = 0.0;
    BiasClass classification = BiasClass::None;

    bool operator==(const GridRow&) const = default;
};

struct GridResult {
    std::vector<GridRow> rows;
};

/// Per-run seed; a pure function of its arguments.
std::uint64_t run_seed(std::uint64_t base_seed, std::string_view config_id, std::size_t run_index) noexcept;

struct ConfigResult {
    std::string config_id;
    PointMatrix final_points;
    std::vector<std::size_t> evaluations_used;
    SBReport report;
};

/// r independent runs on f0, scored with sb_score. `jobs` threads share the runs.
ConfigResult run_config(const DEConfig& config, std::size_t runs, std::uint64_t base_seed,
                        const SBConfig& sb = {}, std::size_t jobs = 1);

struct GridOptions {
    std::filesystem::path out_dir = "results";
    std::size_t jobs = 1;
    bool write_points = true;
    /// Stop after this many newly completed configurations (simulates an interruption).
    std::optional<std::size_t> max_new_configs;
    std::function<void(const GridRow&)> on_row;
};

/// Runs every configuration not yet present in out_dir/ledger.csv, streaming
/// rows, reports and points as they complete. On completion the ledger is
/// rewritten in canonical grid order.
GridResult run_grid(const GridSpec& spec, const GridOptions& options);

struct RankFilter {
    std::vector<Mutation> mutations;
    std::vector<SdisKind> sdis;
    std::vector<double> F_values;
    std::vector<double> Cr_values;
    std::vector<std::size_t> p_values;
};

/// Rows matching every non-empty filter set, by sb_score descending, ties by
/// config_id. A Cr filter excludes rows that have no Cr.
std::vector<GridRow> rank_configs(const GridResult& result, const RankFilter& filter);

struct Checkpoint {
    std::size_t evaluations = 0;
    double sb_score = 0.0;
};

struct EmergenceTrace {
    std::string config_id;
    std::size_t runs_pooled = 0;
    std::size_t sample_size = 0;
    std::vector<Checkpoint> checkpoints;
};

/// Per-run evaluation counts at which the pooled populations are scored:
/// p, p + stride, ..., and budget.
std::vector<std::size_t> checkpoint_schedule(std::size_t population_size, std::size_t budget, std::size_t stride);

/// Advances `runs_pooled` runs in lockstep and scores their pooled active
/// populations (p * runs_pooled points) at each checkpoint.
EmergenceTrace run_emergence(const DEConfig& config, std::size_t runs_pooled, std::size_t stride,
                             std::uint64_t base_seed, const SBConfig& sb = {});

}  // namespace debias
