#pragma once

// Reference computations used only by the tests. None of these share code
// with the library paths they check.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

/// m * integral_0^1 (Fhat(t) - t)^2 / (t (1 - t)) dt, integrated piecewise
/// between order statistics (Fhat is constant on each piece).
inline double ad_by_integration(std::vector<double> sample) {
    std::sort(sample.begin(), sample.end());
    const double m = static_cast<double>(sample.size());
    std::vector<double> knots{0.0};
    knots.insert(knots.end(), sample.begin(), sample.end());
    knots.push_back(1.0);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        const double a = knots[k], b = knots[k + 1];
        if (b <= a) continue;
        const double level = static_cast<double>(k) / m;
        auto f = [level](double t) { return (level - t) * (level - t) / (t * (1.0 - t)); };
        total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-11);
    }
    return m * total;
}

/// sup_x |F_n(x) - cdf(x)|.
template <class Cdf>
double ks_distance(std::vector<double> sample, Cdf cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double c = cdf(sample[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - c, c - static_cast<double>(i) / n});
    }
    return d;
}

inline double ks_distance_uniform(std::vector<double> sample) {
    return ks_distance(std::move(sample), [](double x) { return std::clamp(x, 0.0, 1.0); });
}

/// CDF of |N(0, sigma)| conditioned on being <= 1.
inline double truncated_half_normal_cdf(double x, double sigma) {
    const double s = sigma * std::sqrt(2.0);
    return std::erf(std::clamp(x, 0.0, 1.0) / s) / std::erf(1.0 / s);
}

/// BY adjustment straight from the definition, O(n^2).
inline std::vector<double> by_brute_force(const std::vector<double>& p) {
    const std::size_t n = p.size();
    double c = 0.0;
    for (std::size_t k = 1; k <= n; ++k) c += 1.0 / static_cast<double>(k);
    // rank of each element in ascending order, ties broken by input position
    std::vector<std::size_t> rank(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = 1;
        for (std::size_t j = 0; j < n; ++j) {
            if (p[j] < p[i] || (p[j] == p[i] && j < i)) ++r;
        }
        rank[i] = r;
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double best = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (rank[j] >= rank[i]) best = std::min(best, c * static_cast<double>(n) * p[j] / static_cast<double>(rank[j]));
        }
        out[i] = best;
    }
    return out;
}

/// Mean and variance of the exponential-crossover segment length by enumeration.
inline std::pair<double, double> exp_crossover_length_moments(std::size_t n, double cr) {
    double mean = 0.0, second = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        const double pk = k < n ? std::pow(cr, double(k - 1)) * (1.0 - cr) : std::pow(cr, double(n - 1));
        mean += double(k) * pk;
        second += double(k * k) * pk;
    }
    return {mean, second - mean * mean};
}

inline std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = (double(i) + double(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

/// Spearman rank correlation with average ranks for ties.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    const auto rx = ranks(x), ry = ranks(y);
    const double n = double(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace oracle
