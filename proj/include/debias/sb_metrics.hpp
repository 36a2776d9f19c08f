#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace debias {

/// Row-major r x n matrix of points, one row per run.
class PointMatrix {
public:
    PointMatrix() = default;
    PointMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::vector<double> column(std::size_t c) const;
    void append_row(std::span<const double> values);
    std::span<const double> data() const noexcept { return data_; }

    bool operator==(const PointMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

enum class BiasClass { None, Mild, Strong };

std::string_view to_string(BiasClass c) noexcept;
std::optional<BiasClass> parse_bias_class(std::string_view name);

struct SBConfig {
    double alpha = 0.01;
    /// Upper edge of the mild band (0, mild_upper].
    double mild_upper = 10.0;

    void validate() const;
};

struct DimensionRecord {
    std::size_t dim = 0;
    double a2 = 0.0;
    double p_raw = 1.0;
    double p_adj = 1.0;
};

struct SBReport {
    std::vector<DimensionRecord> per_dim;
    double sb_score = 0.0;
    BiasClass classification = BiasClass::None;
    std::size_t sample_size = 0;
    double alpha = 0.01;
};

/// Values are clipped into [kClip, 1 - kClip] before taking logarithms.
inline constexpr double kClip = 1e-12;
/// Smallest sample for which ad_pvalue is defined.
inline constexpr std::size_t kMinSampleForPValue = 8;

/// Anderson-Darling A^2 against U(0,1) for a fully specified null.
/// Throws std::invalid_argument on an empty sample or values outside [0,1].
double ad_statistic(std::span<const double> sample);
/// Same, for a sample already sorted ascending (not re-checked).
double ad_statistic_sorted(std::span<const double> sorted);

/// Asymptotic AD limiting CDF P(A^2 <= z) for m -> infinity.
double ad_limit_cdf(double z);
/// Upper-tail p-value of A^2 for a sample of size m, with a finite-m correction.
/// Throws std::invalid_argument when m < 8 or a2 < 0.
double ad_pvalue(double a2, std::size_t m);

/// Benjamini-Yekutieli step-up adjustment, returned in input order.
std::vector<double> by_adjust(std::span<const double> p_values);

/// Throws std::invalid_argument for negative or non-finite input.
BiasClass classify(double sb, double mild_upper = 10.0);

/// Mean over dimensions of A^2 for those with p_adj <= alpha.
double sb_aggregate(std::span<const DimensionRecord> per_dim, double alpha);

/// Per-column AD tests, BY adjustment across columns, indicator-weighted mean.
SBReport sb_score(const PointMatrix& points, const SBConfig& cfg = {});

nlohmann::json to_json(const SBReport& report, std::string_view config_id);
SBReport report_from_json(const nlohmann::json& doc);

}  // namespace debias
