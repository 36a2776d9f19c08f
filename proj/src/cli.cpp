#include "debias/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <set>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "debias/experiment.hpp"
#include "debias/export.hpp"

namespace debias {

namespace {

struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct Flags {
    std::vector<std::string> mutation;
    std::vector<std::string> crossover;
    std::vector<std::string> sdis;
    std::vector<std::size_t> p;
    std::vector<double> f;
    std::vector<double> cr;
    std::optional<std::size_t> n;
    std::optional<std::size_t> budget;
    std::optional<std::size_t> runs;
    std::optional<double> alpha;
    std::optional<double> sigma;
    std::optional<std::uint64_t> seed;
    std::size_t jobs = 1;
    std::string out = "results";
    std::size_t stride = 100;
    bool paper = false;
    bool desk = false;
    bool dry_run = false;
    std::string emit_config;
    std::string config_file;

    // rank / export
    std::size_t top = 5;
    bool recommended = false;
    std::string heatmap;
    bool all_heatmaps = false;
    std::string file;
};

void add_config_flags(CLI::App& cmd, Flags& f, bool lists) {
    auto* m = cmd.add_option("--mutation", f.mutation, "Mutation x/y, e.g. rand/1, best/2, curr-to-rand/1");
    auto* x = cmd.add_option("--crossover", f.crossover, "Crossover: bin, exp (none for curr-to-rand/1)");
    auto* s = cmd.add_option("--sdis", f.sdis, "Infeasibility strategy: COTN, dis, mir, sat, tor, uni");
    auto* p = cmd.add_option("--p", f.p, "Population size");
    auto* F = cmd.add_option("--f", f.f, "Scale factor F");
    auto* cr = cmd.add_option("--cr", f.cr, "Crossover rate Cr");
    if (lists) {
        for (auto* o : {m, x, s, p, F, cr}) o->delimiter(',');
    }
    cmd.add_option("--n", f.n, "Problem dimension (default 30)");
    cmd.add_option("--budget", f.budget, "Fitness evaluations per run (default 300000)");
    cmd.add_option("--runs", f.runs, "Independent runs per configuration (default 600)");
    cmd.add_option("--alpha", f.alpha, "Significance level (default 0.01)");
    cmd.add_option("--sigma", f.sigma, "COTN scale as a fraction of the domain width (default 1/3)");
    cmd.add_option("--seed", f.seed, "Base seed (default 0)");
    cmd.add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
    cmd.add_option("--out", f.out, "Results directory (DEBIAS_OUT overrides)");
    cmd.add_option("--config", f.config_file, "Read the resolved configuration set from a JSON file");
    cmd.add_flag("--dry-run", f.dry_run, "Print the resolved configurations without executing");
    cmd.add_option("--emit-config", f.emit_config, "Write the resolved configuration set as JSON");
}

template <class T, class Parse>
std::vector<T> parse_list(const std::vector<std::string>& names, Parse parse, const char* flag) {
    std::vector<T> out;
    for (const auto& name : names) {
        const auto v = parse(name);
        if (!v) throw ValidationError(std::string(flag) + ": unknown value '" + name + "'");
        out.push_back(*v);
    }
    return out;
}

GridBlock block_from_flags(const Flags& f) {
    if (f.mutation.empty()) throw ValidationError("--mutation: required");
    GridBlock b;
    b.mutations = parse_list<Mutation>(f.mutation, parse_mutation, "--mutation");
    b.crossovers = parse_list<Crossover>(f.crossover, parse_crossover, "--crossover");
    if (f.sdis.empty()) throw ValidationError("--sdis: required");
    b.sdis = parse_list<SdisKind>(f.sdis, parse_sdis, "--sdis");
    if (f.p.empty()) throw ValidationError("--p: required");
    b.p_values = f.p;
    if (f.f.empty()) throw ValidationError("--f: required");
    b.F_values = f.f;
    b.Cr_values = f.cr;

    const bool any_cr = std::any_of(b.mutations.begin(), b.mutations.end(),
                                    [](Mutation m) { return m != Mutation::CurrentToRand1; });
    if (!any_cr && !b.Cr_values.empty()) {
        throw ValidationError("--cr: curr-to-rand/1 has no crossover parameter");
    }
    const bool real_crossover = std::any_of(b.crossovers.begin(), b.crossovers.end(),
                                            [](Crossover c) { return c != Crossover::None; });
    if (!any_cr && real_crossover) {
        throw ValidationError("--crossover: curr-to-rand/1 takes no crossover operator");
    }
    if (any_cr) {
        if (std::find(b.crossovers.begin(), b.crossovers.end(), Crossover::None) != b.crossovers.end()) {
            throw ValidationError("--crossover: 'none' is only valid with curr-to-rand/1");
        }
        if (b.crossovers.empty()) b.crossovers = {Crossover::Binomial};
        if (b.Cr_values.empty()) throw ValidationError("--cr: required for " + f.mutation.front());
    }
    return b;
}

GridSpec resolve_spec(const Flags& f) {
    const int sources = int(f.paper) + int(f.desk) + int(!f.config_file.empty());
    if (sources > 1) throw ValidationError("--paper, --desk and --config are mutually exclusive");
    const bool config_flags = !f.mutation.empty() || !f.crossover.empty() || !f.sdis.empty() || !f.p.empty() ||
                              !f.f.empty() || !f.cr.empty();
    if (sources == 1 && config_flags) {
        throw ValidationError("--mutation/--crossover/--sdis/--p/--f/--cr cannot be combined with a preset or --config");
    }

    GridSpec spec;
    if (f.paper) {
        spec = GridSpec::paper();
    } else if (f.desk) {
        spec = GridSpec::desk();
    } else if (!f.config_file.empty()) {
        std::ifstream in(f.config_file);
        if (!in) throw ValidationError("--config: cannot read " + f.config_file);
        try {
            spec = grid_spec_from_json(nlohmann::json::parse(in));
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("--config: " + std::string(e.what()));
        }
    } else {
        spec.blocks.push_back(block_from_flags(f));
    }
    if (f.n) spec.dimension = *f.n;
    if (f.budget) spec.budget = *f.budget;
    if (f.runs) spec.runs = *f.runs;
    if (f.alpha) spec.sb.alpha = *f.alpha;
    if (f.sigma) spec.cotn_sigma = *f.sigma;
    if (f.seed) spec.base_seed = *f.seed;

    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ValidationError(std::string("--") + e.what());
    }
    return spec;
}

std::string resolve_out(const Flags& f) {
    if (const char* env = std::getenv("DEBIAS_OUT"); env != nullptr && *env != '\0') return env;
    return f.out;
}

// Handles --dry-run / --emit-config. Returns true when execution should stop.
bool preview(const Flags& f, const GridSpec& spec, std::ostream& out) {
    if (!f.emit_config.empty()) {
        write_file_atomic(f.emit_config, to_json(spec).dump(2) + "\n");
    }
    if (!f.dry_run) return false;
    const auto configs = spec.configurations();
    for (const auto& c : configs) out << config_id(c) << '\n';
    out << "n=" << spec.dimension << " budget=" << spec.budget << " runs=" << spec.runs
        << " alpha=" << spec.sb.alpha << " seed=" << spec.base_seed << '\n';
    out << configs.size() << " configurations\n";
    return true;
}

void print_row(std::ostream& out, const GridRow& row) {
    out << row.config_id << ": sb_score=" << std::fixed << std::setprecision(2) << row.sb_score
        << std::defaultfloat << " classification=" << to_string(row.classification) << '\n';
}

int cmd_run(const Flags& f, std::ostream& out) {
    const auto spec = resolve_spec(f);
    if (preview(f, spec, out)) return kExitOk;
    const auto configs = spec.configurations();
    if (configs.size() != 1) throw ValidationError("run: expected exactly one configuration, got " + std::to_string(configs.size()));

    const ResultsLayout layout{resolve_out(f)};
    layout.create_directories();
    const auto res = run_config(configs.front(), spec.runs, spec.base_seed, spec.sb, f.jobs);
    write_report_json(layout.report(res.config_id), res.report, res.config_id);
    write_points_csv(layout.points(res.config_id), res.final_points);

    const GridRow row{res.config_id, configs.front(), spec.runs, res.report.sb_score, res.report.classification};
    auto ledger = read_ledger(layout.ledger());
    auto it = std::find_if(ledger.rows.begin(), ledger.rows.end(), [&](const GridRow& r) { return r.config_id == row.config_id; });
    if (it != ledger.rows.end()) {
        *it = row;
    } else {
        ledger.rows.push_back(row);
    }
    write_ledger(layout.ledger(), ledger);
    print_row(out, row);
    return kExitOk;
}

int cmd_grid(const Flags& f, std::ostream& out) {
    const auto spec = resolve_spec(f);
    if (preview(f, spec, out)) return kExitOk;
    GridOptions options;
    options.out_dir = resolve_out(f);
    options.jobs = f.jobs;
    options.on_row = [&](const GridRow& row) { print_row(out, row); };
    const auto result = run_grid(spec, options);
    std::size_t counts[3] = {0, 0, 0};
    for (const auto& row : result.rows) ++counts[static_cast<int>(row.classification)];
    out << result.rows.size() << " configurations: " << counts[0] << " none, " << counts[1] << " mild, " << counts[2]
        << " strong\n";
    return kExitOk;
}

int cmd_emergence(Flags f, std::ostream& out) {
    if (!f.runs) f.runs = 100;
    const auto spec = resolve_spec(f);
    if (preview(f, spec, out)) return kExitOk;
    const auto configs = spec.configurations();
    if (configs.size() != 1) throw ValidationError("emergence: expected exactly one configuration");
    if (f.stride == 0) throw ValidationError("--stride: must be >= 1");

    const ResultsLayout layout{resolve_out(f)};
    layout.create_directories();
    const auto trace = run_emergence(configs.front(), spec.runs, f.stride, spec.base_seed, spec.sb);
    write_trace_csv(layout.trace(trace.config_id), trace);
    out << trace.config_id << ": " << trace.checkpoints.size() << " checkpoints, pooled sample " << trace.sample_size
        << ", SB " << trace.checkpoints.front().sb_score << " -> " << trace.checkpoints.back().sb_score << '\n';
    return kExitOk;
}

int cmd_rank(const Flags& f, std::ostream& out) {
    const ResultsLayout layout{resolve_out(f)};
    if (!std::filesystem::exists(layout.ledger())) {
        throw ValidationError("--out: no ledger at " + layout.ledger().string());
    }
    const auto result = read_ledger(layout.ledger());
    RankFilter filter;
    filter.mutations = parse_list<Mutation>(f.mutation, parse_mutation, "--mutation");
    filter.sdis = parse_list<SdisKind>(f.sdis, parse_sdis, "--sdis");
    filter.p_values = f.p;
    filter.F_values = f.f;
    filter.Cr_values = f.cr;
    if (f.recommended) {
        if (filter.F_values.empty()) filter.F_values = {0.483, 0.916};
        if (filter.p_values.empty()) filter.p_values = {20, 100};
        const bool only_ctr = !filter.mutations.empty() &&
                              std::all_of(filter.mutations.begin(), filter.mutations.end(),
                                          [](Mutation m) { return m == Mutation::CurrentToRand1; });
        if (filter.Cr_values.empty() && !only_ctr) filter.Cr_values = {0.05, 0.52, 0.99};
    }
    const auto ranked = rank_configs(result, filter);
    const std::size_t shown = f.top == 0 ? ranked.size() : std::min(f.top, ranked.size());
    out << "rank,config_id,p,F,Cr,sb_score,classification\n";
    for (std::size_t i = 0; i < shown; ++i) {
        const auto& r = ranked[i];
        out << i + 1 << ',' << r.config_id << ',' << r.config.population_size << ',' << format_double(r.config.F) << ','
            << (r.config.Cr ? format_double(*r.config.Cr) : std::string()) << ',' << format_double(r.sb_score) << ','
            << to_string(r.classification) << '\n';
    }
    return kExitOk;
}

std::string canonical_variant(std::string_view text) {
    if (text.starts_with("DE/")) text.remove_prefix(3);
    if (const auto m = parse_mutation(text)) return "DE/" + std::string(to_string(*m));
    const auto slash = text.rfind('/');
    if (slash != std::string_view::npos) {
        const auto m = parse_mutation(text.substr(0, slash));
        const auto x = parse_crossover(text.substr(slash + 1));
        if (m && x) return "DE/" + std::string(to_string(*m)) + "/" + std::string(to_string(*x));
    }
    throw ValidationError("--heatmap: unknown variant '" + std::string(text) + "'");
}

int cmd_export(const Flags& f, std::ostream& out) {
    const ResultsLayout layout{resolve_out(f)};
    if (!std::filesystem::exists(layout.ledger())) {
        throw ValidationError("--out: no ledger at " + layout.ledger().string());
    }
    const auto result = read_ledger(layout.ledger());
    const auto dir = layout.root / "heatmaps";
    std::filesystem::create_directories(dir);

    const auto slice_path = [&](const std::string& variant, std::size_t p, SdisKind s) {
        return dir / (file_stem(variant) + "-p" + std::to_string(p) + "-" + std::string(to_string(s)) + ".csv");
    };

    if (f.all_heatmaps) {
        std::set<std::tuple<std::string, std::size_t, SdisKind>> slices;
        for (const auto& row : result.rows) {
            slices.emplace(variant_name(row.config), row.config.population_size, row.config.sdis.kind);
        }
        for (const auto& [variant, p, s] : slices) {
            const auto path = slice_path(variant, p, s);
            write_heatmap_csv(path, heatmap_slice(result, variant, p, s));
            out << path.string() << '\n';
        }
        return kExitOk;
    }

    if (f.heatmap.empty()) throw ValidationError("export: pass --heatmap VARIANT or --all-heatmaps");
    if (f.p.size() != 1) throw ValidationError("--p: export needs exactly one population size");
    if (f.sdis.size() != 1) throw ValidationError("--sdis: export needs exactly one strategy");
    const auto variant = canonical_variant(f.heatmap);
    const auto s = parse_list<SdisKind>(f.sdis, parse_sdis, "--sdis").front();
    Heatmap map;
    try {
        map = heatmap_slice(result, variant, f.p.front(), s);
    } catch (const std::invalid_argument& e) {
        throw ValidationError(std::string("--heatmap: ") + e.what());
    }
    const std::filesystem::path path = f.file.empty() ? slice_path(variant, f.p.front(), s) : std::filesystem::path(f.file);
    write_heatmap_csv(path, map);
    out << path.string() << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Structural-bias experiments for Differential Evolution on f0", "debias"};
    app.require_subcommand(1);
    Flags f;

    auto* run = app.add_subcommand("run", "Run one configuration r times and score its final points");
    add_config_flags(*run, f, false);

    auto* grid = app.add_subcommand("grid", "Sweep a configuration grid (resumable)");
    add_config_flags(*grid, f, true);
    grid->add_flag("--paper", f.paper, "Full 10980-configuration grid, budget 300000, 600 runs");
    grid->add_flag("--desk", f.desk, "Reduced-budget 12-configuration grid");

    auto* emergence = app.add_subcommand("emergence", "Track SB of pooled active populations over evaluations");
    add_config_flags(*emergence, f, false);
    emergence->add_option("--stride", f.stride, "Evaluations between checkpoints (default 100)");

    auto* rank = app.add_subcommand("rank", "Rank ledger rows by SB score");
    rank->add_option("--out", f.out, "Results directory (DEBIAS_OUT overrides)");
    rank->add_option("--mutation", f.mutation)->delimiter(',');
    rank->add_option("--sdis", f.sdis)->delimiter(',');
    rank->add_option("--p", f.p)->delimiter(',');
    rank->add_option("--f", f.f)->delimiter(',');
    rank->add_option("--cr", f.cr)->delimiter(',');
    rank->add_option("--top", f.top, "Rows to print, 0 for all (default 5)");
    rank->add_flag("--recommended", f.recommended, "F {0.483,0.916}, Cr {0.05,0.52,0.99}, p {20,100}");

    auto* exp = app.add_subcommand("export", "Write heatmap tables (F rows x Cr columns) from the ledger");
    exp->add_option("--out", f.out, "Results directory (DEBIAS_OUT overrides)");
    exp->add_option("--heatmap", f.heatmap, "Variant, e.g. DE/best/1/bin");
    exp->add_option("--p", f.p);
    exp->add_option("--sdis", f.sdis);
    exp->add_option("--file", f.file, "Output path (default <out>/heatmaps/...)");
    exp->add_flag("--all-heatmaps", f.all_heatmaps, "Export every (variant, p, SDIS) slice");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (run->parsed()) return cmd_run(f, out);
        if (grid->parsed()) return cmd_grid(f, out);
        if (emergence->parsed()) return cmd_emergence(f, out);
        if (rank->parsed()) return cmd_rank(f, out);
        if (exp->parsed()) return cmd_export(f, out);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitValidation;
}

}  // namespace debias
