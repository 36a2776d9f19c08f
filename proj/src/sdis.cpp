#include "debias/sdis.hpp"

#include <cmath>
#include <stdexcept>

namespace debias {

namespace {

bool feasible(double x) noexcept { return x >= 0.0 && x <= 1.0; }

// |N(0, sigma)| measured inward from the violated bound, redrawn until inside.
double cotn_redraw(double x, double sigma, RandomStream& rng) {
    for (;;) {
        const double z = std::fabs(rng.normal(sigma));
        if (z <= 1.0) {
            return x < 0.0 ? z : 1.0 - z;
        }
    }
}

}  // namespace

std::string_view to_string(SdisKind kind) noexcept {
    switch (kind) {
        case SdisKind::COTN: return "COTN";
        case SdisKind::Dismiss: return "dis";
        case SdisKind::Mirror: return "mir";
        case SdisKind::Saturate: return "sat";
        case SdisKind::Toroidal: return "tor";
        case SdisKind::Uniform: return "uni";
    }
    return "?";
}

std::optional<SdisKind> parse_sdis(std::string_view name) {
    if (name == "COTN" || name == "cotn") return SdisKind::COTN;
    if (name == "dis" || name == "dismiss") return SdisKind::Dismiss;
    if (name == "mir" || name == "mirror") return SdisKind::Mirror;
    if (name == "sat" || name == "saturation") return SdisKind::Saturate;
    if (name == "tor" || name == "toroidal") return SdisKind::Toroidal;
    if (name == "uni" || name == "uniform") return SdisKind::Uniform;
    return std::nullopt;
}

double saturate(double x) noexcept {
    if (x < 0.0) return 0.0;
    if (x > 1.0) return 1.0;
    return x;
}

double toroidal_wrap(double x) noexcept {
    if (feasible(x)) return x;
    return x - std::floor(x);
}

double mirror_fold(double x) noexcept {
    if (feasible(x)) return x;
    // One reflection covers [-1, 0) and (1, 2] exactly; beyond that fold the
    // triangular wave of period 2.
    if (x >= -1.0 && x < 0.0) return -x;
    if (x > 1.0 && x <= 2.0) return 2.0 - x;
    double y = std::fmod(x, 2.0);
    if (y < 0.0) y += 2.0;
    return y <= 1.0 ? y : 2.0 - y;
}

bool repair_in_place(const SdisSpec& spec, std::span<double> candidate, RandomStream& rng) {
    switch (spec.kind) {
        case SdisKind::Dismiss:
            for (double x : candidate) {
                if (!feasible(x)) return true;
            }
            return false;
        case SdisKind::Saturate:
            for (double& x : candidate) x = saturate(x);
            return false;
        case SdisKind::Toroidal:
            for (double& x : candidate) x = toroidal_wrap(x);
            return false;
        case SdisKind::Mirror:
            for (double& x : candidate) x = mirror_fold(x);
            return false;
        case SdisKind::Uniform:
            for (double& x : candidate) {
                if (!feasible(x)) x = rng.uniform();
            }
            return false;
        case SdisKind::COTN:
            for (double& x : candidate) {
                if (!feasible(x)) x = cotn_redraw(x, spec.sigma, rng);
            }
            return false;
    }
    throw std::logic_error("unknown SDIS kind");
}

RepairOutcome repair(const SdisSpec& spec, std::span<const double> candidate, RandomStream& rng) {
    RepairOutcome out{std::vector<double>(candidate.begin(), candidate.end()), false};
    out.dismissed = repair_in_place(spec, out.vector, rng);
    return out;
}

}  // namespace debias
