#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "debias/rng.hpp"

namespace debias {

/// Strategies of dealing with infeasible solutions on the unit box.
enum class SdisKind { COTN, Dismiss, Mirror, Saturate, Toroidal, Uniform };

struct SdisSpec {
    SdisKind kind = SdisKind::COTN;
    /// Scale of the one-sided normal used by COTN, in units of the domain width.
    double sigma = 1.0 / 3.0;

    bool operator==(const SdisSpec&) const = default;
};

struct RepairOutcome {
    std::vector<double> vector;
    /// Set only under Dismiss when at least one component was out of [0,1].
    bool dismissed = false;
};

/// Short names used in configuration ids: COTN, dis, mir, sat, tor, uni.
std::string_view to_string(SdisKind kind) noexcept;
std::optional<SdisKind> parse_sdis(std::string_view name);

// Single-component maps. Inputs inside [0,1] are returned unchanged.
double saturate(double x) noexcept;
double toroidal_wrap(double x) noexcept;
double mirror_fold(double x) noexcept;

/// Repairs `candidate` in place. Returns true iff the trial must be dismissed;
/// in that case the contents are left untouched.
bool repair_in_place(const SdisSpec& spec, std::span<double> candidate, RandomStream& rng);

RepairOutcome repair(const SdisSpec& spec, std::span<const double> candidate, RandomStream& rng);

}  // namespace debias
