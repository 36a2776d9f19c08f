#include "debias/objective.hpp"

#include <stdexcept>

namespace debias {

ObjectiveSpec ObjectiveSpec::f0(std::size_t dimension) {
    if (dimension == 0) {
        throw std::invalid_argument("objective dimension must be >= 1");
    }
    return ObjectiveSpec{dimension, ObjectiveKind::F0};
}

double evaluate_f0(std::span<const double> /*point*/, RandomStream& rng) noexcept {
    return rng.uniform();
}

}  // namespace debias
