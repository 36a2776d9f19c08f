#include "debias/sb_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace debias {

std::vector<double> PointMatrix::column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
}

void PointMatrix::append_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    if (values.size() != cols_) throw std::invalid_argument("append_row: width mismatch");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
}

std::string_view to_string(BiasClass c) noexcept {
    switch (c) {
        case BiasClass::None: return "none";
        case BiasClass::Mild: return "mild";
        case BiasClass::Strong: return "strong";
    }
    return "?";
}

std::optional<BiasClass> parse_bias_class(std::string_view name) {
    if (name == "none") return BiasClass::None;
    if (name == "mild") return BiasClass::Mild;
    if (name == "strong") return BiasClass::Strong;
    return std::nullopt;
}

void SBConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
    if (!(mild_upper > 0.0)) throw std::invalid_argument("mild threshold must be > 0");
}

double ad_statistic_sorted(std::span<const double> u) {
    const std::size_t m = u.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double lo = std::clamp(u[i], kClip, 1.0 - kClip);
        const double hi = std::clamp(u[m - 1 - i], kClip, 1.0 - kClip);
        acc += static_cast<double>(2 * i + 1) * (std::log(lo) + std::log1p(-hi));
    }
    const double md = static_cast<double>(m);
    return -md - acc / md;
}

double ad_statistic(std::span<const double> sample) {
    if (sample.empty()) throw std::invalid_argument("ad_statistic: empty sample");
    std::vector<double> sorted(sample.begin(), sample.end());
    for (double v : sorted) {
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("ad_statistic: value outside [0,1]");
    }
    std::sort(sorted.begin(), sorted.end());
    return ad_statistic_sorted(sorted);
}

// Marsaglia & Marsaglia (2004), "Evaluating the Anderson-Darling Distribution".
double ad_limit_cdf(double z) {
    if (z <= 0.0) return 0.0;
    if (z < 2.0) {
        return std::exp(-1.2337141 / z) / std::sqrt(z) *
               (2.00012 + (.247105 - (.0649821 - (.0347962 - (.011672 - .00168691 * z) * z) * z) * z) * z);
    }
    return std::exp(-std::exp(1.0776 - (2.30695 - (.43424 - (.082433 - (.008056 - .0003146 * z) * z) * z) * z) * z));
}

namespace {

// Upper tail of the limiting law, accurate far into the tail.
double ad_limit_sf(double z) {
    if (z < 2.0) return 1.0 - ad_limit_cdf(z);
    return -std::expm1(-std::exp(1.0776 - (2.30695 - (.43424 - (.082433 - (.008056 - .0003146 * z) * z) * z) * z) * z));
}

// Finite-sample correction to the limiting CDF value x, where u = 1 - x is
// the (accurately computed) upper tail.
double ad_errfix(double n, double x, double u) {
    if (x > 0.8) {
        // The upper-branch polynomial g3(x), re-expanded around x = 1 as
        // g3(1 - u) - g3(1). The published coefficients leave g3(1) = -6e-4
        // rather than 0, which would otherwise put a floor of about 6e-4/n
        // under every p-value; in u the correction also keeps full relative
        // precision far into the tail.
        return u * (-.4717 + (6.531 - (43.05 - (162.562 - 255.7844 * u) * u) * u) * u) / n;
    }
    const double c = .01265 + .1757 / n;
    if (x < c) {
        double t = x / c;
        t = std::sqrt(t) * (1. - t) * (49 * t - 102);
        return t * (.0037 / (n * n) + .00078 / n + .00006) / n;
    }
    double t = (x - c) / (.8 - c);
    t = -.00022633 + (6.54034 - (14.6538 - (14.458 - (8.259 - 1.91864 * t) * t) * t) * t) * t;
    return t * (.04213 / n + .01365 / (n * n)) / n;
}

}  // namespace

double ad_pvalue(double a2, std::size_t m) {
    if (m < kMinSampleForPValue) {
        throw std::invalid_argument("sample too small for p-value approximation");
    }
    if (!(a2 >= 0.0)) throw std::invalid_argument("ad_pvalue: statistic must be >= 0");
    const double x = ad_limit_cdf(a2);
    const double u = ad_limit_sf(a2);
    const double p = u - ad_errfix(static_cast<double>(m), x, u);
    return std::clamp(p, 0.0, 1.0);
}

std::vector<double> by_adjust(std::span<const double> p_values) {
    const std::size_t n = p_values.size();
    if (n == 0) throw std::invalid_argument("by_adjust: empty list");
    for (double p : p_values) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("by_adjust: p-value outside [0,1]");
    }
    double harmonic = 0.0;
    for (std::size_t k = 1; k <= n; ++k) harmonic += 1.0 / static_cast<double>(k);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });

    std::vector<double> adjusted(n);
    double running = 1.0;
    for (std::size_t rank = n; rank-- > 0;) {
        const std::size_t i = order[rank];
        const double scaled = harmonic * static_cast<double>(n) * p_values[i] / static_cast<double>(rank + 1);
        running = std::min(running, scaled);
        adjusted[i] = std::min(1.0, running);
    }
    return adjusted;
}

BiasClass classify(double sb, double mild_upper) {
    if (!(sb >= 0.0) || !std::isfinite(sb)) throw std::invalid_argument("classify: score must be finite and >= 0");
    if (sb == 0.0) return BiasClass::None;
    return sb <= mild_upper ? BiasClass::Mild : BiasClass::Strong;
}

double sb_aggregate(std::span<const DimensionRecord> per_dim, double alpha) {
    if (per_dim.empty()) throw std::invalid_argument("sb_aggregate: no dimensions");
    double total = 0.0;
    for (const auto& d : per_dim) {
        if (d.p_adj <= alpha) total += d.a2;
    }
    return total / static_cast<double>(per_dim.size());
}

SBReport sb_score(const PointMatrix& points, const SBConfig& cfg) {
    cfg.validate();
    const std::size_t r = points.rows();
    const std::size_t n = points.cols();
    if (n == 0) throw std::invalid_argument("sb_score: points have no dimensions");
    if (r < kMinSampleForPValue) throw std::invalid_argument("sb_score: need at least 8 points");
    for (double v : points.data()) {
        if (!std::isfinite(v)) throw std::invalid_argument("sb_score: non-finite coordinate");
    }

    SBReport report;
    report.sample_size = r;
    report.alpha = cfg.alpha;
    report.per_dim.resize(n);
    std::vector<double> raw(n);
    for (std::size_t d = 0; d < n; ++d) {
        auto column = points.column(d);
        const double a2 = ad_statistic(column);
        raw[d] = ad_pvalue(a2, r);
        report.per_dim[d] = DimensionRecord{d, a2, raw[d], 1.0};
    }
    const auto adjusted = by_adjust(raw);
    for (std::size_t d = 0; d < n; ++d) report.per_dim[d].p_adj = adjusted[d];
    report.sb_score = sb_aggregate(report.per_dim, cfg.alpha);
    report.classification = classify(report.sb_score, cfg.mild_upper);
    return report;
}

nlohmann::json to_json(const SBReport& report, std::string_view config_id) {
    nlohmann::json per_dim = nlohmann::json::array();
    for (const auto& d : report.per_dim) {
        per_dim.push_back({{"dim", d.dim}, {"A2", d.a2}, {"p_raw", d.p_raw}, {"p_adj", d.p_adj}});
    }
    return {
        {"config_id", config_id},
        {"sample_size", report.sample_size},
        {"alpha", report.alpha},
        {"per_dim", std::move(per_dim)},
        {"sb_score", report.sb_score},
        {"classification", to_string(report.classification)},
    };
}

SBReport report_from_json(const nlohmann::json& doc) {
    SBReport report;
    report.sample_size = doc.at("sample_size").get<std::size_t>();
    report.alpha = doc.at("alpha").get<double>();
    report.sb_score = doc.at("sb_score").get<double>();
    const auto cls = parse_bias_class(doc.at("classification").get<std::string>());
    if (!cls) throw std::invalid_argument("report: unknown classification");
    report.classification = *cls;
    for (const auto& d : doc.at("per_dim")) {
        report.per_dim.push_back({d.at("dim").get<std::size_t>(), d.at("A2").get<double>(),
                                  d.at("p_raw").get<double>(), d.at("p_adj").get<double>()});
    }
    return report;
}

}  // namespace debias
