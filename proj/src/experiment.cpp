#include "debias/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <thread>

#include "debias/export.hpp"

namespace debias {

namespace {

// Runs fn(0..count-1) on up to `jobs` threads; rethrows the first failure.
template <class Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn&& fn) {
    jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> workers;
        workers.reserve(jobs);
        for (std::size_t w = 0; w < jobs; ++w) {
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < count && !failed; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                        failed = true;
                    }
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
}

bool close(double a, double b) { return std::fabs(a - b) < 5e-4; }

template <class T>
bool contains_or_empty(const std::vector<T>& set, const T& value) {
    return set.empty() || std::find(set.begin(), set.end(), value) != set.end();
}

bool contains_close_or_empty(const std::vector<double>& set, double value) {
    return set.empty() || std::any_of(set.begin(), set.end(), [&](double v) { return close(v, value); });
}

template <class T, class Parse>
std::vector<T> parse_names(const nlohmann::json& arr, Parse parse, const char* what) {
    std::vector<T> out;
    for (const auto& item : arr) {
        const auto name = item.get<std::string>();
        const auto value = parse(name);
        if (!value) throw ConfigError(std::string("unknown ") + what + " '" + name + "'");
        out.push_back(*value);
    }
    return out;
}

}  // namespace

const std::vector<double>& paper_F_values() {
    static const std::vector<double> values{0.05, 0.266, 0.483, 0.7, 0.916, 1.133, 1.350, 1.566, 1.783, 2.0};
    return values;
}

const std::vector<double>& paper_Cr_values() {
    static const std::vector<double> values{0.05, 0.285, 0.52, 0.755, 0.99};
    return values;
}

const std::vector<std::size_t>& paper_population_sizes() {
    static const std::vector<std::size_t> values{5, 20, 100};
    return values;
}

std::size_t GridBlock::count() const noexcept {
    const auto no_cr = static_cast<std::size_t>(std::count(mutations.begin(), mutations.end(), Mutation::CurrentToRand1));
    const std::size_t with_cr = mutations.size() - no_cr;
    const auto real_crossovers = static_cast<std::size_t>(
        std::count_if(crossovers.begin(), crossovers.end(), [](Crossover c) { return c != Crossover::None; }));
    const std::size_t base = p_values.size() * sdis.size() * F_values.size();
    return no_cr * base + with_cr * real_crossovers * base * Cr_values.size();
}

GridSpec GridSpec::paper() {
    GridSpec spec;
    spec.blocks.push_back(GridBlock{
        {Mutation::Rand1, Mutation::Rand2, Mutation::Best1, Mutation::Best2, Mutation::CurrentToBest1,
         Mutation::RandToBest2, Mutation::CurrentToRand1},
        {Crossover::Binomial, Crossover::Exponential},
        {SdisKind::COTN, SdisKind::Dismiss, SdisKind::Mirror, SdisKind::Saturate, SdisKind::Toroidal, SdisKind::Uniform},
        paper_population_sizes(),
        paper_F_values(),
        paper_Cr_values(),
    });
    return spec;
}

GridSpec GridSpec::desk() {
    GridSpec spec;
    spec.budget = 10000;
    // F sweep of DE/best/1/bin-p5-sat at Cr = 0.99.
    spec.blocks.push_back(GridBlock{{Mutation::Best1}, {Crossover::Binomial}, {SdisKind::Saturate}, {5},
                                    paper_F_values(), {0.99}});
    // Unbiased and strongly biased exemplars.
    spec.blocks.push_back(GridBlock{{Mutation::Best1}, {Crossover::Binomial}, {SdisKind::COTN}, {20}, {0.916}, {0.05}});
    spec.blocks.push_back(GridBlock{{Mutation::CurrentToRand1}, {}, {SdisKind::Saturate}, {100}, {0.05}, {}});
    return spec;
}

std::vector<DEConfig> GridSpec::configurations() const {
    std::vector<DEConfig> out;
    std::set<std::string> seen;
    const auto emit = [&](DEConfig c) {
        if (seen.insert(config_id(c)).second) out.push_back(std::move(c));
    };
    for (const auto& block : blocks) {
        for (Mutation m : block.mutations) {
            const bool no_cr = m == Mutation::CurrentToRand1;
            std::vector<Crossover> crossovers;
            if (no_cr) {
                crossovers = {Crossover::None};
            } else {
                for (Crossover c : block.crossovers) {
                    if (c != Crossover::None) crossovers.push_back(c);
                }
            }
            for (Crossover x : crossovers) {
                for (std::size_t p : block.p_values) {
                    for (SdisKind s : block.sdis) {
                        for (double F : block.F_values) {
                            DEConfig c;
                            c.mutation = m;
                            c.crossover = x;
                            c.F = F;
                            c.population_size = p;
                            c.sdis = SdisSpec{s, cotn_sigma};
                            c.dimension = dimension;
                            c.budget = budget;
                            if (no_cr) {
                                c.Cr.reset();
                                emit(c);
                            } else {
                                for (double cr : block.Cr_values) {
                                    c.Cr = cr;
                                    emit(c);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

std::size_t GridSpec::count() const noexcept {
    std::size_t total = 0;
    for (const auto& block : blocks) total += block.count();
    return total;
}

void GridSpec::validate() const {
    sb.validate();
    if (runs < kMinSampleForPValue) throw ConfigError("runs: at least 8 runs are needed for scoring");
    for (const auto& c : configurations()) {
        c.validate();
        if (c.budget < c.population_size) {
            throw ConfigError("budget: " + std::to_string(c.budget) + " is smaller than p in " + config_id(c));
        }
    }
}

nlohmann::json to_json(const GridSpec& spec) {
    nlohmann::json blocks = nlohmann::json::array();
    for (const auto& b : spec.blocks) {
        nlohmann::json mutations = nlohmann::json::array(), crossovers = nlohmann::json::array(),
                       sdis = nlohmann::json::array();
        for (auto m : b.mutations) mutations.push_back(to_string(m));
        for (auto c : b.crossovers) crossovers.push_back(to_string(c));
        for (auto s : b.sdis) sdis.push_back(to_string(s));
        blocks.push_back({{"mutations", mutations},
                          {"crossovers", crossovers},
                          {"sdis", sdis},
                          {"p", b.p_values},
                          {"F", b.F_values},
                          {"Cr", b.Cr_values}});
    }
    return {{"dimension", spec.dimension}, {"budget", spec.budget},   {"runs", spec.runs},
            {"base_seed", spec.base_seed}, {"cotn_sigma", spec.cotn_sigma}, {"alpha", spec.sb.alpha},
            {"mild_upper", spec.sb.mild_upper}, {"blocks", blocks}};
}

GridSpec grid_spec_from_json(const nlohmann::json& doc) {
    GridSpec spec;
    spec.dimension = doc.value("dimension", spec.dimension);
    spec.budget = doc.value("budget", spec.budget);
    spec.runs = doc.value("runs", spec.runs);
    spec.base_seed = doc.value("base_seed", spec.base_seed);
    spec.cotn_sigma = doc.value("cotn_sigma", spec.cotn_sigma);
    spec.sb.alpha = doc.value("alpha", spec.sb.alpha);
    spec.sb.mild_upper = doc.value("mild_upper", spec.sb.mild_upper);
    for (const auto& b : doc.at("blocks")) {
        GridBlock block;
        block.mutations = parse_names<Mutation>(b.at("mutations"), parse_mutation, "mutation");
        block.crossovers = parse_names<Crossover>(b.value("crossovers", nlohmann::json::array()), parse_crossover, "crossover");
        block.sdis = parse_names<SdisKind>(b.at("sdis"), parse_sdis, "SDIS");
        block.p_values = b.at("p").get<std::vector<std::size_t>>();
        block.F_values = b.at("F").get<std::vector<double>>();
        block.Cr_values = b.value("Cr", std::vector<double>{});
        spec.blocks.push_back(std::move(block));
    }
    return spec;
}

std::uint64_t run_seed(std::uint64_t base_seed, std::string_view config_id, std::size_t run_index) noexcept {
    return derive_seed(base_seed, fnv1a64(config_id), run_index);
}

ConfigResult run_config(const DEConfig& config, std::size_t runs, std::uint64_t base_seed, const SBConfig& sb,
                        std::size_t jobs) {
    config.validate();
    ConfigResult result;
    result.config_id = config_id(config);
    result.final_points = PointMatrix(runs, config.dimension);
    result.evaluations_used.assign(runs, 0);
    parallel_for(runs, jobs, [&](std::size_t i) {
        DEConfig c = config;
        c.seed = run_seed(base_seed, result.config_id, i);
        const RunResult r = run(c);
        std::copy(r.final_best.begin(), r.final_best.end(), result.final_points.row(i).begin());
        result.evaluations_used[i] = r.evaluations_used;
    });
    result.report = sb_score(result.final_points, sb);
    return result;
}

GridResult run_grid(const GridSpec& spec, const GridOptions& options) {
    spec.validate();
    const ResultsLayout layout{options.out_dir};
    layout.create_directories();

    const auto configs = spec.configurations();
    std::set<std::string> done;
    for (const auto& row : read_ledger(layout.ledger()).rows) done.insert(row.config_id);

    std::vector<const DEConfig*> pending;
    for (const auto& c : configs) {
        if (!done.contains(config_id(c))) pending.push_back(&c);
    }
    if (options.max_new_configs && pending.size() > *options.max_new_configs) {
        pending.resize(*options.max_new_configs);
    }

    std::mutex ledger_mutex;
    const auto process = [&](const DEConfig& c, std::size_t inner_jobs) {
        const auto res = run_config(c, spec.runs, spec.base_seed, spec.sb, inner_jobs);
        write_report_json(layout.report(res.config_id), res.report, res.config_id);
        if (options.write_points) write_points_csv(layout.points(res.config_id), res.final_points);
        const GridRow row{res.config_id, c, spec.runs, res.report.sb_score, res.report.classification};
        std::lock_guard lock(ledger_mutex);
        append_ledger_row(layout.ledger(), row);
        if (options.on_row) options.on_row(row);
    };

    const std::size_t jobs = std::max<std::size_t>(options.jobs, 1);
    if (pending.size() >= jobs) {
        parallel_for(pending.size(), jobs, [&](std::size_t i) { process(*pending[i], 1); });
    } else {
        for (const auto* c : pending) process(*c, jobs);
    }

    const auto ledger = read_ledger(layout.ledger());
    std::map<std::string, const GridRow*> by_id;
    for (const auto& row : ledger.rows) by_id.emplace(row.config_id, &row);

    GridResult result;
    std::set<std::string> in_spec;
    for (const auto& c : configs) {
        const auto id = config_id(c);
        in_spec.insert(id);
        if (auto it = by_id.find(id); it != by_id.end()) {
            GridRow row = *it->second;
            row.config = c;
            result.rows.push_back(std::move(row));
        }
    }
    if (result.rows.size() == configs.size()) {
        GridResult canonical = result;
        std::set<std::string> written = in_spec;
        for (const auto& row : ledger.rows) {
            if (written.insert(row.config_id).second) canonical.rows.push_back(row);
        }
        write_ledger(layout.ledger(), canonical);
    }
    return result;
}

std::vector<GridRow> rank_configs(const GridResult& result, const RankFilter& filter) {
    std::vector<GridRow> out;
    for (const auto& row : result.rows) {
        const auto& c = row.config;
        if (!contains_or_empty(filter.mutations, c.mutation)) continue;
        if (!contains_or_empty(filter.sdis, c.sdis.kind)) continue;
        if (!contains_or_empty(filter.p_values, c.population_size)) continue;
        if (!contains_close_or_empty(filter.F_values, c.F)) continue;
        if (!filter.Cr_values.empty() && (!c.Cr || !contains_close_or_empty(filter.Cr_values, *c.Cr))) continue;
        out.push_back(row);
    }
    std::sort(out.begin(), out.end(), [](const GridRow& a, const GridRow& b) {
        if (a.sb_score != b.sb_score) return a.sb_score > b.sb_score;
        return a.config_id < b.config_id;
    });
    return out;
}

std::vector<std::size_t> checkpoint_schedule(std::size_t population_size, std::size_t budget, std::size_t stride) {
    if (stride == 0) throw std::invalid_argument("checkpoint stride must be >= 1");
    std::vector<std::size_t> out;
    for (std::size_t e = population_size; e <= budget; e += stride) out.push_back(e);
    if (out.empty() || out.back() != budget) out.push_back(budget);
    return out;
}

namespace {

struct PooledRun {
    PooledRun(const DEConfig& config)
        : streams(RunStreams::from_seed(config.seed)),
          objective(ObjectiveSpec::f0(config.dimension), std::move(streams.objective)),
          engine(config, objective, streams.algorithm) {}

    RunStreams streams;
    F0Objective objective;
    DifferentialEvolution engine;
};

}  // namespace

EmergenceTrace run_emergence(const DEConfig& config, std::size_t runs_pooled, std::size_t stride,
                             std::uint64_t base_seed, const SBConfig& sb) {
    config.validate();
    if (runs_pooled == 0) throw std::invalid_argument("runs_pooled must be >= 1");
    if (config.budget < config.population_size) throw BudgetError("budget exhausted during initialization");

    EmergenceTrace trace;
    trace.config_id = config_id(config);
    trace.runs_pooled = runs_pooled;
    trace.sample_size = runs_pooled * config.population_size;

    std::vector<std::unique_ptr<PooledRun>> runs;
    runs.reserve(runs_pooled);
    for (std::size_t i = 0; i < runs_pooled; ++i) {
        DEConfig c = config;
        c.seed = run_seed(base_seed, trace.config_id, i);
        runs.push_back(std::make_unique<PooledRun>(c));
        runs.back()->engine.initialize();
    }

    PointMatrix pooled(trace.sample_size, config.dimension);
    for (std::size_t e : checkpoint_schedule(config.population_size, config.budget, stride)) {
        std::size_t row = 0;
        for (auto& r : runs) {
            r->engine.advance_to(e);
            for (std::size_t m = 0; m < config.population_size; ++m) {
                const auto& pos = r->engine.active_member(m).position;
                std::copy(pos.begin(), pos.end(), pooled.row(row++).begin());
            }
        }
        trace.checkpoints.push_back({e, sb_score(pooled, sb).sb_score});
    }
    return trace;
}

}  // namespace debias
