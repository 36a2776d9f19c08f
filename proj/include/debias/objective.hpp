#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "debias/rng.hpp"

namespace debias {

enum class ObjectiveKind { F0 };

/// Problem identity: dimension and box. f0 always lives on [0,1]^n.
struct ObjectiveSpec {
    std::size_t dimension = 30;
    ObjectiveKind kind = ObjectiveKind::F0;

    static constexpr double lower_bound = 0.0;
    static constexpr double upper_bound = 1.0;

    /// Throws std::invalid_argument when dimension == 0.
    static ObjectiveSpec f0(std::size_t dimension);
};

/// One fresh U(0,1) draw; the point is never inspected.
double evaluate_f0(std::span<const double> point, RandomStream& rng) noexcept;

/// Minimisation objective contract consumed by the DE engine.
class Objective {
public:
    virtual ~Objective() = default;
    virtual double evaluate(std::span<const double> point) = 0;
    virtual const ObjectiveSpec& spec() const noexcept = 0;
};

/// f0 bound to its own stream. Values are never memoized: re-evaluating a point redraws.
class F0Objective final : public Objective {
public:
    F0Objective(ObjectiveSpec spec, RandomStream stream) : spec_(spec), stream_(std::move(stream)) {}

    double evaluate(std::span<const double> point) override {
        ++evaluations_;
        return evaluate_f0(point, stream_);
    }
    const ObjectiveSpec& spec() const noexcept override { return spec_; }
    std::uint64_t evaluations() const noexcept { return evaluations_; }

private:
    ObjectiveSpec spec_;
    RandomStream stream_;
    std::uint64_t evaluations_ = 0;
};

}  // namespace debias
