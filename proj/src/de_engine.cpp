#include "debias/de_engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

namespace debias {

std::string_view to_string(Mutation m) noexcept {
    switch (m) {
        case Mutation::Rand1: return "rand/1";
        case Mutation::Rand2: return "rand/2";
        case Mutation::Best1: return "best/1";
        case Mutation::Best2: return "best/2";
        case Mutation::RandToBest2: return "rand-to-best/2";
        case Mutation::CurrentToBest1: return "curr-to-best/1";
        case Mutation::CurrentToRand1: return "curr-to-rand/1";
    }
    return "?";
}

std::string_view to_string(Crossover c) noexcept {
    switch (c) {
        case Crossover::Binomial: return "bin";
        case Crossover::Exponential: return "exp";
        case Crossover::None: return "none";
    }
    return "?";
}

std::optional<Mutation> parse_mutation(std::string_view name) {
    if (name.starts_with("DE/")) name.remove_prefix(3);
    if (name == "rand/1") return Mutation::Rand1;
    if (name == "rand/2") return Mutation::Rand2;
    if (name == "best/1") return Mutation::Best1;
    if (name == "best/2") return Mutation::Best2;
    if (name == "rand-to-best/2") return Mutation::RandToBest2;
    if (name == "current-to-best/1" || name == "curr-to-best/1") return Mutation::CurrentToBest1;
    if (name == "current-to-rand/1" || name == "curr-to-rand/1") return Mutation::CurrentToRand1;
    return std::nullopt;
}

std::optional<Crossover> parse_crossover(std::string_view name) {
    if (name == "bin") return Crossover::Binomial;
    if (name == "exp") return Crossover::Exponential;
    if (name == "none") return Crossover::None;
    return std::nullopt;
}

std::size_t random_indices_required(Mutation m) noexcept {
    switch (m) {
        case Mutation::Rand1: return 3;
        case Mutation::Rand2: return 5;
        case Mutation::Best1: return 2;
        case Mutation::Best2: return 4;
        case Mutation::RandToBest2: return 5;
        case Mutation::CurrentToBest1: return 2;
        case Mutation::CurrentToRand1: return 3;
    }
    return 0;
}

std::size_t minimum_population(Mutation m) noexcept {
    return std::max<std::size_t>(4, random_indices_required(m));
}

void DEConfig::validate() const {
    const bool no_crossover_variant = mutation == Mutation::CurrentToRand1;
    if (no_crossover_variant && crossover != Crossover::None) {
        throw ConfigError("crossover: curr-to-rand/1 recombines internally and takes no crossover");
    }
    if (!no_crossover_variant && crossover == Crossover::None) {
        throw ConfigError("crossover: only curr-to-rand/1 runs without a crossover operator");
    }
    if (no_crossover_variant && Cr.has_value()) {
        throw ConfigError("cr: curr-to-rand/1 has no crossover rate");
    }
    if (!no_crossover_variant) {
        if (!Cr.has_value()) throw ConfigError("cr: crossover rate required for " + std::string(to_string(mutation)));
        if (!(*Cr >= 0.0 && *Cr <= 1.0)) throw ConfigError("cr: crossover rate must lie in [0,1]");
    }
    if (!(F > 0.0) || !std::isfinite(F)) throw ConfigError("f: scale factor must be a finite value > 0");
    if (population_size < minimum_population(mutation)) {
        throw ConfigError("p: population size " + std::to_string(population_size) + " too small for " +
                          std::string(to_string(mutation)) + " (minimum " +
                          std::to_string(minimum_population(mutation)) + ")");
    }
    if (dimension == 0) throw ConfigError("n: dimension must be >= 1");
    if (!(sdis.sigma > 0.0)) throw ConfigError("sdis: COTN sigma must be > 0");
    if (trial_cap_factor == 0) throw ConfigError("trial_cap_factor must be >= 1");
}

std::string variant_name(const DEConfig& config) {
    std::string name = "DE/";
    name += to_string(config.mutation);
    if (config.crossover != Crossover::None) {
        name += '/';
        name += to_string(config.crossover);
    }
    return name;
}

std::string config_id(const DEConfig& config) {
    char buf[64];
    std::string id = variant_name(config);
    id += "-p" + std::to_string(config.population_size);
    id += '-';
    id += to_string(config.sdis.kind);
    std::snprintf(buf, sizeof buf, "-F%.3f", config.F);
    id += buf;
    if (config.Cr) {
        std::snprintf(buf, sizeof buf, "-Cr%.3f", *config.Cr);
        id += buf;
    }
    return id;
}

std::string file_stem(std::string_view config_id) {
    std::string stem(config_id);
    std::replace(stem.begin(), stem.end(), '/', '_');
    return stem;
}

Population::Population(std::vector<Individual> members) : members_(std::move(members)) {
    refresh_best();
}

void Population::replace(std::size_t i, Individual individual) {
    members_.at(i) = std::move(individual);
}

void Population::swap_in(std::size_t i, Individual& individual) {
    std::swap(members_.at(i), individual);
}

void Population::refresh_best() noexcept {
    best_index_ = 0;
    for (std::size_t i = 1; i < members_.size(); ++i) {
        if (members_[i].fitness < members_[best_index_].fitness) best_index_ = i;
    }
}

Population init_population(const DEConfig& config, Objective& objective, RandomStream& rng) {
    config.validate();
    if (config.budget < config.population_size) {
        throw BudgetError("budget exhausted during initialization");
    }
    std::vector<Individual> members(config.population_size);
    for (auto& ind : members) {
        ind.position.resize(config.dimension);
        for (double& x : ind.position) x = rng.uniform();
        ind.fitness = objective.evaluate(ind.position);
    }
    return Population(std::move(members));
}

void draw_distinct_indices(std::size_t population, std::size_t target, RandomStream& rng,
                           std::span<std::size_t> out) {
    const bool exclude_target = population - 1 >= out.size();
    for (std::size_t k = 0; k < out.size(); ++k) {
        std::size_t r;
        bool clash;
        do {
            r = rng.index(population);
            clash = exclude_target && r == target;
            for (std::size_t j = 0; j < k && !clash; ++j) clash = out[j] == r;
        } while (clash);
        out[k] = r;
    }
}

void mutate_into(const DEConfig& config, const Population& pop, std::size_t target,
                 RandomStream& rng, std::span<double> out) {
    std::array<std::size_t, 5> idx{};
    const std::size_t k = random_indices_required(config.mutation);
    draw_distinct_indices(pop.size(), target, rng, std::span(idx.data(), k));

    const double F = config.F;
    const auto x = [&](std::size_t i) -> const std::vector<double>& { return pop[i].position; };
    const auto& best = pop.best().position;
    const auto& cur = x(target);
    const std::size_t n = out.size();

    switch (config.mutation) {
        case Mutation::Rand1: {
            const auto &a = x(idx[0]), &b = x(idx[1]), &c = x(idx[2]);
            for (std::size_t j = 0; j < n; ++j) out[j] = a[j] + F * (b[j] - c[j]);
            break;
        }
        case Mutation::Rand2: {
            const auto &a = x(idx[0]), &b = x(idx[1]), &c = x(idx[2]), &d = x(idx[3]), &e = x(idx[4]);
            for (std::size_t j = 0; j < n; ++j) out[j] = a[j] + F * (b[j] - c[j]) + F * (d[j] - e[j]);
            break;
        }
        case Mutation::Best1: {
            const auto &a = x(idx[0]), &b = x(idx[1]);
            for (std::size_t j = 0; j < n; ++j) out[j] = best[j] + F * (a[j] - b[j]);
            break;
        }
        case Mutation::Best2: {
            const auto &a = x(idx[0]), &b = x(idx[1]), &c = x(idx[2]), &d = x(idx[3]);
            for (std::size_t j = 0; j < n; ++j) out[j] = best[j] + F * (a[j] - b[j]) + F * (c[j] - d[j]);
            break;
        }
        case Mutation::CurrentToBest1: {
            const auto &a = x(idx[0]), &b = x(idx[1]);
            for (std::size_t j = 0; j < n; ++j) out[j] = cur[j] + F * (best[j] - cur[j]) + F * (a[j] - b[j]);
            break;
        }
        case Mutation::RandToBest2: {
            const auto &a = x(idx[0]), &b = x(idx[1]), &c = x(idx[2]), &d = x(idx[3]), &e = x(idx[4]);
            for (std::size_t j = 0; j < n; ++j) {
                out[j] = a[j] + F * (best[j] - a[j]) + F * (b[j] - c[j]) + F * (d[j] - e[j]);
            }
            break;
        }
        case Mutation::CurrentToRand1: {
            const double K = rng.uniform();
            const auto &a = x(idx[0]), &b = x(idx[1]), &c = x(idx[2]);
            for (std::size_t j = 0; j < n; ++j) out[j] = cur[j] + K * (a[j] - cur[j]) + F * (b[j] - c[j]);
            break;
        }
    }
}

std::vector<double> mutate(const DEConfig& config, const Population& pop, std::size_t target,
                           RandomStream& rng) {
    std::vector<double> out(pop[target].position.size());
    mutate_into(config, pop, target, rng, out);
    return out;
}

void crossover_bin_into(std::span<const double> target, std::span<const double> mutant, double cr,
                        RandomStream& rng, std::span<double> out) {
    const std::size_t n = target.size();
    const std::size_t jrand = rng.index(n);
    for (std::size_t j = 0; j < n; ++j) {
        const bool take = rng.uniform_open_closed() <= cr || j == jrand;
        out[j] = take ? mutant[j] : target[j];
    }
}

void crossover_exp_into(std::span<const double> target, std::span<const double> mutant, double cr,
                        RandomStream& rng, std::span<double> out) {
    const std::size_t n = target.size();
    std::copy(target.begin(), target.end(), out.begin());
    std::size_t j = rng.index(n);
    std::size_t copied = 0;
    do {
        out[j] = mutant[j];
        j = (j + 1) % n;
        ++copied;
    } while (copied < n && rng.uniform_open_closed() <= cr);
}

std::vector<double> crossover_bin(std::span<const double> target, std::span<const double> mutant,
                                  double cr, RandomStream& rng) {
    std::vector<double> out(target.size());
    crossover_bin_into(target, mutant, cr, rng, out);
    return out;
}

std::vector<double> crossover_exp(std::span<const double> target, std::span<const double> mutant,
                                  double cr, RandomStream& rng) {
    std::vector<double> out(target.size());
    crossover_exp_into(target, mutant, cr, rng, out);
    return out;
}

DifferentialEvolution::DifferentialEvolution(DEConfig config, Objective& objective, RandomStream& rng)
    : config_(std::move(config)), objective_(objective), rng_(rng) {
    config_.validate();
}

void DifferentialEvolution::initialize() {
    if (initialized_) return;
    population_ = init_population(config_, objective_, rng_);
    evaluations_ = config_.population_size;
    pending_.assign(config_.population_size, Individual{std::vector<double>(config_.dimension), 0.0});
    accepted_.assign(config_.population_size, 0);
    mutant_.assign(config_.dimension, 0.0);
    initialized_ = true;
}

bool DifferentialEvolution::step_trial() {
    if (finished_) return false;
    if (!initialized_) initialize();
    if (evaluations_ >= config_.budget || trials_ >= config_.trial_cap_factor * config_.budget) {
        finish();
        return false;
    }

    const std::size_t i = next_target_;
    const auto& incumbent = population_[i];
    auto& trial = pending_[i];
    mutate_into(config_, population_, i, rng_, mutant_);
    switch (config_.crossover) {
        case Crossover::Binomial:
            crossover_bin_into(incumbent.position, mutant_, *config_.Cr, rng_, trial.position);
            break;
        case Crossover::Exponential:
            crossover_exp_into(incumbent.position, mutant_, *config_.Cr, rng_, trial.position);
            break;
        case Crossover::None:
            std::copy(mutant_.begin(), mutant_.end(), trial.position.begin());
            break;
    }
    ++trials_;

    if (repair_in_place(config_.sdis, trial.position, rng_)) {
        accepted_[i] = 0;
        if (config_.count_dismissed) ++evaluations_;
    } else {
        trial.fitness = objective_.evaluate(trial.position);
        ++evaluations_;
        accepted_[i] = trial.fitness <= incumbent.fitness ? 1 : 0;
    }

    if (++next_target_ == config_.population_size) complete_generation();
    return true;
}

void DifferentialEvolution::advance_to(std::size_t target_evaluations) {
    if (!initialized_) initialize();
    while (!finished_ && evaluations_ < target_evaluations) step_trial();
}

void DifferentialEvolution::complete_generation() {
    for (std::size_t i = 0; i < next_target_; ++i) {
        if (accepted_[i]) {
            population_.swap_in(i, pending_[i]);
            accepted_[i] = 0;
        }
    }
    population_.refresh_best();
    next_target_ = 0;
    ++generations_;
}

void DifferentialEvolution::finish() {
    if (finished_) return;
    if (!initialized_) initialize();
    if (next_target_ > 0) complete_generation();
    finished_ = true;
}

const Individual& DifferentialEvolution::active_member(std::size_t i) const {
    if (i < next_target_ && accepted_[i]) return pending_[i];
    return population_[i];
}

RunResult DifferentialEvolution::result() const {
    const auto& best = population_.best();
    return RunResult{best.position, best.fitness, evaluations_, config_.seed};
}

RunResult run(const DEConfig& config, Objective& objective, RandomStream& rng) {
    DifferentialEvolution engine(config, objective, rng);
    engine.initialize();
    while (engine.step_trial()) {
    }
    return engine.result();
}

RunResult run(const DEConfig& config) {
    config.validate();
    auto streams = RunStreams::from_seed(config.seed);
    F0Objective objective(ObjectiveSpec::f0(config.dimension), std::move(streams.objective));
    return run(config, objective, streams.algorithm);
}

}  // namespace debias
