#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "debias/objective.hpp"
#include "debias/rng.hpp"
#include "debias/sdis.hpp"

namespace debias {

enum class Mutation { Rand1, Rand2, Best1, Best2, RandToBest2, CurrentToBest1, CurrentToRand1 };
enum class Crossover { Binomial, Exponential, None };

std::string_view to_string(Mutation m) noexcept;
std::string_view to_string(Crossover c) noexcept;
/// Accepts the canonical names ("rand/1", "current-to-best/1", ...) and the
/// short "curr-to-" spellings.
std::optional<Mutation> parse_mutation(std::string_view name);
std::optional<Crossover> parse_crossover(std::string_view name);

/// Number of mutually distinct random members the operator draws.
std::size_t random_indices_required(Mutation m) noexcept;
/// Smallest population the operator can run with.
std::size_t minimum_population(Mutation m) noexcept;

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Full algorithm identity of one DE configuration.
struct DEConfig {
    Mutation mutation = Mutation::Rand1;
    Crossover crossover = Crossover::Binomial;
    double F = 0.5;
    /// Absent iff crossover == None.
    std::optional<double> Cr = 0.5;
    std::size_t population_size = 20;
    SdisSpec sdis{};
    std::size_t dimension = 30;
    std::size_t budget = 300000;
    std::uint64_t seed = 0;

    /// When set, a dismissed trial is charged one evaluation without calling
    /// the objective. Off by default: dismissed trials are free.
    bool count_dismissed = false;
    /// Hard stop on trial attempts, as a multiple of the budget. Only reachable
    /// when dismissed trials are free.
    std::size_t trial_cap_factor = 10;

    /// Throws ConfigError naming the offending field.
    void validate() const;

    bool operator==(const DEConfig&) const = default;
};

/// "DE/x/y/z" (or "DE/curr-to-rand/1", which has no crossover part).
std::string variant_name(const DEConfig& config);
/// Canonical id "DE/x/y/z-pN-SDIS-F<v>-Cr<v>", values to 3 decimals. The Cr
/// part is omitted for current-to-rand/1.
std::string config_id(const DEConfig& config);
/// config_id with '/' replaced so it can name a file.
std::string file_stem(std::string_view config_id);

struct Individual {
    std::vector<double> position;
    double fitness = 0.0;
};

class Population {
public:
    Population() = default;
    explicit Population(std::vector<Individual> members);

    std::size_t size() const noexcept { return members_.size(); }
    const Individual& operator[](std::size_t i) const { return members_[i]; }
    std::span<const Individual> members() const noexcept { return members_; }
    /// Minimal fitness, ties to the lowest index.
    std::size_t best_index() const noexcept { return best_index_; }
    const Individual& best() const { return members_[best_index_]; }

    void replace(std::size_t i, Individual individual);
    /// Exchanges member i with `individual`; avoids reallocating positions.
    void swap_in(std::size_t i, Individual& individual);
    void refresh_best() noexcept;

private:
    std::vector<Individual> members_;
    std::size_t best_index_ = 0;
};

struct RunResult {
    std::vector<double> final_best;
    double final_best_fitness = 0.0;
    std::size_t evaluations_used = 0;
    std::uint64_t seed = 0;

    bool operator==(const RunResult&) const = default;
};

/// p i.i.d. uniform points, each evaluated once. Throws BudgetError if budget < p.
Population init_population(const DEConfig& config, Objective& objective, RandomStream& rng);

/// Mutant for `target` (possibly infeasible). Random indices are mutually
/// distinct and distinct from the target whenever the population allows it.
void mutate_into(const DEConfig& config, const Population& pop, std::size_t target,
                 RandomStream& rng, std::span<double> out);
std::vector<double> mutate(const DEConfig& config, const Population& pop, std::size_t target,
                           RandomStream& rng);

/// Draws `count` mutually distinct indices from [0, population), excluding
/// `target` when population - 1 >= count.
void draw_distinct_indices(std::size_t population, std::size_t target, RandomStream& rng,
                           std::span<std::size_t> out);

void crossover_bin_into(std::span<const double> target, std::span<const double> mutant, double cr,
                        RandomStream& rng, std::span<double> out);
void crossover_exp_into(std::span<const double> target, std::span<const double> mutant, double cr,
                        RandomStream& rng, std::span<double> out);
std::vector<double> crossover_bin(std::span<const double> target, std::span<const double> mutant,
                                  double cr, RandomStream& rng);
std::vector<double> crossover_exp(std::span<const double> target, std::span<const double> mutant,
                                  double cr, RandomStream& rng);

/// Resumable DE state machine. One call to step_trial() builds, repairs and
/// (unless dismissed) evaluates the trial for the next target; the population
/// is replaced synchronously once every target of the generation has a trial.
class DifferentialEvolution {
public:
    DifferentialEvolution(DEConfig config, Objective& objective, RandomStream& rng);

    /// Samples and evaluates the initial population.
    void initialize();
    /// Processes one target. Returns false once the run cannot continue.
    bool step_trial();
    /// Runs until evaluations() >= target_evaluations or the run ends.
    void advance_to(std::size_t target_evaluations);
    /// Applies pending replacements of a partial generation and stops.
    void finish();

    bool finished() const noexcept { return finished_; }
    std::size_t evaluations() const noexcept { return evaluations_; }
    std::size_t generations() const noexcept { return generations_; }
    std::size_t trials() const noexcept { return trials_; }
    const DEConfig& config() const noexcept { return config_; }
    /// Population at the last generation boundary.
    const Population& population() const noexcept { return population_; }

    /// Member i as currently active: its trial if already evaluated this
    /// generation and accepted, the incumbent otherwise.
    const Individual& active_member(std::size_t i) const;

    RunResult result() const;

private:
    void complete_generation();

    DEConfig config_;
    Objective& objective_;
    RandomStream& rng_;
    Population population_;
    std::vector<Individual> pending_;
    std::vector<char> accepted_;
    std::vector<double> mutant_;
    std::size_t next_target_ = 0;
    std::size_t evaluations_ = 0;
    std::size_t generations_ = 0;
    std::size_t trials_ = 0;
    bool initialized_ = false;
    bool finished_ = false;
};

/// Complete run on an externally supplied objective and operator stream.
RunResult run(const DEConfig& config, Objective& objective, RandomStream& rng);
/// Complete run on f0 with both streams derived from config.seed.
RunResult run(const DEConfig& config);

}  // namespace debias
