#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lab/matrix.hpp"

namespace lab {

enum class MetricId { igd, igd_plus, gd, hv };
enum class Direction { minimize, maximize };

std::string_view to_string(MetricId id);
std::string_view to_string(Direction d);
MetricId metric_id_from_string(std::string_view text);

/// Clamp applied to the norm exponent of the distance-based indicators.
double clamp_norm_exponent(double p);

/// Indicator selection. `p` is always stored clamped to [1, 100].
struct MetricSpec {
    MetricId metric_id = MetricId::igd;
    double p = 2.0;
    std::optional<std::vector<double>> ref_point;

    static MetricSpec make(MetricId id, double p = 2.0,
                           std::optional<std::vector<double>> ref_point = std::nullopt);

    Direction direction() const noexcept {
        return metric_id == MetricId::hv ? Direction::maximize : Direction::minimize;
    }
    bool requires_reference_front() const noexcept { return metric_id != MetricId::hv; }
    std::string name() const { return std::string(to_string(metric_id)); }

    friend bool operator==(const MetricSpec&, const MetricSpec&) = default;
};

nlohmann::json to_json(const MetricSpec& spec);
MetricSpec metric_spec_from_json(const nlohmann::json& j);

/// Mean over reference rows of the minimum p-norm distance to the approximation.
/// NaN when either set is empty or the column counts differ. p = 1 and p = 2
/// have dedicated Manhattan/Euclidean paths.
double igd_pnorm(const Matrix& approx, const Matrix& ref, double p);

/// igd_pnorm with the roles of the two sets exchanged.
double gd_pnorm(const Matrix& approx, const Matrix& ref, double p);

/// Mean over reference rows of min over approximation rows of ||max(a - r, 0)||_2.
double igd_plus(const Matrix& approx, const Matrix& ref);

/// Seed and sample count of the Monte-Carlo estimator used for M >= 3.
inline constexpr std::uint64_t kHypervolumeSeed = 0x48595045524D4331ULL;
inline constexpr std::size_t kHypervolumeSamples = 100000;

/// Dominated hypervolume w.r.t. ref_point (minimization). Exact for M = 2;
/// Monte-Carlo for M >= 3. Points that do not strictly dominate ref_point are ignored.
double hypervolume(const Matrix& front, std::span<const double> ref_point);

/// Monte-Carlo estimate for any M over the box [ideal of contributing points, ref].
double hypervolume_monte_carlo(const Matrix& front, std::span<const double> ref_point,
                               std::size_t samples = kHypervolumeSamples,
                               std::uint64_t seed = kHypervolumeSeed);

namespace detail {
enum class NormPath { automatic, generic };
/// Distance kernel shared by IGD/GD; `generic` bypasses the p = 1 and p = 2 shortcuts.
double mean_min_distance(const Matrix& from, const Matrix& to, double p, NormPath path);
}  // namespace detail

/// Typed inputs for binding a metric.
struct MetricContext {
    std::optional<Matrix> reference_front;
    std::optional<std::vector<double>> ref_point;
    std::optional<std::size_t> n_obj;  // checked against the hv ref_point length when set
};

/// A metric bound to its reference data. Immutable and safe to call concurrently.
class BoundMetric {
public:
    using Kernel = std::function<double(const Matrix&)>;

    BoundMetric(std::string name, MetricSpec spec, Matrix reference_front, Kernel kernel)
        : name_(std::move(name)), spec_(std::move(spec)), reference_front_(std::move(reference_front)),
          kernel_(std::move(kernel)) {}

    double operator()(const Matrix& front) const { return kernel_(front); }
    /// A single objective vector is scored as a one-row front.
    double operator()(std::span<const double> point) const { return kernel_(Matrix::row_vector(point)); }

    const std::string& name() const noexcept { return name_; }
    Direction direction() const noexcept { return spec_.direction(); }
    double p() const noexcept { return spec_.p; }
    const MetricSpec& spec() const noexcept { return spec_; }
    const Matrix& reference_front() const noexcept { return reference_front_; }

private:
    std::string name_;
    MetricSpec spec_;
    Matrix reference_front_;
    Kernel kernel_;
};

/// Binds a metric. A missing or empty reference front yields NaN on every call;
/// hv without a ref_point, or with one whose length differs from a known
/// n_obj, raises ConfigurationError.
BoundMetric make_metric(const MetricSpec& spec, const MetricContext& context);

/// JSON context variant: reads an optional nested "config" object, the
/// reference front under the first present key of pareto_front, ref_pf,
/// reference_front, pf, an optional "p" override and an optional "ref_point".
BoundMetric make_metric(const MetricSpec& spec, const nlohmann::json& context);

struct MetricCatalogEntry {
    std::string id;
    Direction direction;
    bool requires_reference_front;
    std::vector<std::string> parameters;
};

std::vector<MetricCatalogEntry> metric_catalog();

}  // namespace lab
