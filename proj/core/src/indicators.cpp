#include "lab/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "lab/dominance.hpp"
#include "lab/errors.hpp"
#include "lab/rng.hpp"

namespace lab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool degenerate_pair(const Matrix& a, const Matrix& b) {
    return a.rows() == 0 || b.rows() == 0 || a.cols() != b.cols();
}

double pnorm(std::span<const double> x, std::span<const double> y, double p, detail::NormPath path) {
    const bool fast = path == detail::NormPath::automatic;
    double acc = 0.0;
    if (fast && p == 2.0) {
        for (std::size_t i = 0; i < x.size(); ++i) acc += (x[i] - y[i]) * (x[i] - y[i]);
        return std::sqrt(acc);
    }
    if (fast && p == 1.0) {
        for (std::size_t i = 0; i < x.size(); ++i) acc += std::abs(x[i] - y[i]);
        return acc;
    }
    for (std::size_t i = 0; i < x.size(); ++i) acc += std::pow(std::abs(x[i] - y[i]), p);
    return std::pow(acc, 1.0 / p);
}

double hypervolume_2d(const Matrix& pts, std::span<const double> ref) {
    auto keep = nondominated_filter(pts);
    std::sort(keep.begin(), keep.end(), [&](std::size_t a, std::size_t b) {
        return pts(a, 0) != pts(b, 0) ? pts(a, 0) < pts(b, 0) : pts(a, 1) < pts(b, 1);
    });
    double volume = 0.0;
    for (std::size_t k = 0; k < keep.size(); ++k) {
        const double next_f1 = k + 1 < keep.size() ? pts(keep[k + 1], 0) : ref[0];
        volume += (next_f1 - pts(keep[k], 0)) * (ref[1] - pts(keep[k], 1));
    }
    return volume;
}

Matrix contributing_points(const Matrix& front, std::span<const double> ref) {
    Matrix out(0, front.cols());
    for (std::size_t r = 0; r < front.rows(); ++r) {
        auto f = front.row(r);
        bool inside = true;
        for (std::size_t m = 0; m < f.size(); ++m) inside = inside && f[m] < ref[m];
        if (inside) out.append_row(f);
    }
    return out;
}

}  // namespace

std::string_view to_string(MetricId id) {
    switch (id) {
        case MetricId::igd: return "igd";
        case MetricId::igd_plus: return "igd_plus";
        case MetricId::gd: return "gd";
        case MetricId::hv: return "hv";
    }
    return "unknown";
}

std::string_view to_string(Direction d) { return d == Direction::minimize ? "minimize" : "maximize"; }

MetricId metric_id_from_string(std::string_view text) {
    if (text == "igd") return MetricId::igd;
    if (text == "igd_plus" || text == "igd+") return MetricId::igd_plus;
    if (text == "gd") return MetricId::gd;
    if (text == "hv") return MetricId::hv;
    throw ConfigurationError(fmt::format("unknown metric '{}'", text), "metric_id");
}

double clamp_norm_exponent(double p) {
    // Same comparison order as max(1.0, min(p, 100.0)) so that NaN maps to 1.
    const double upper = 100.0 < p ? 100.0 : p;
    return upper > 1.0 ? upper : 1.0;
}

MetricSpec MetricSpec::make(MetricId id, double p, std::optional<std::vector<double>> ref_point) {
    return MetricSpec{id, clamp_norm_exponent(p), std::move(ref_point)};
}

nlohmann::json to_json(const MetricSpec& spec) {
    nlohmann::json j;
    j["metric_id"] = spec.name();
    j["p"] = spec.p;
    j["direction"] = std::string(to_string(spec.direction()));
    j["requires_reference_front"] = spec.requires_reference_front();
    if (spec.ref_point) j["ref_point"] = *spec.ref_point;
    return j;
}

MetricSpec metric_spec_from_json(const nlohmann::json& j) {
    if (j.is_string()) return MetricSpec::make(metric_id_from_string(j.get<std::string>()));
    if (!j.is_object() || !j.contains("metric_id") || !j["metric_id"].is_string()) {
        throw ConfigurationError("metric spec needs a metric_id", "metric_id");
    }
    double p = 2.0;
    if (j.contains("p")) {
        if (!j["p"].is_number()) throw ConfigurationError("p must be a number", "p");
        p = j["p"].get<double>();
    }
    std::optional<std::vector<double>> ref_point;
    if (j.contains("ref_point") && !j["ref_point"].is_null()) {
        try {
            ref_point = j["ref_point"].get<std::vector<double>>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigurationError("ref_point must be an array of numbers", "ref_point");
        }
    }
    return MetricSpec::make(metric_id_from_string(j["metric_id"].get<std::string>()), p, std::move(ref_point));
}

namespace detail {

double mean_min_distance(const Matrix& from, const Matrix& to, double p, NormPath path) {
    double total = 0.0;
    for (std::size_t i = 0; i < from.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < to.rows(); ++j) best = std::min(best, pnorm(from.row(i), to.row(j), p, path));
        total += best;
    }
    return total / static_cast<double>(from.rows());
}

}  // namespace detail

double igd_pnorm(const Matrix& approx, const Matrix& ref, double p) {
    if (degenerate_pair(approx, ref)) return kNaN;
    return detail::mean_min_distance(ref, approx, clamp_norm_exponent(p), detail::NormPath::automatic);
}

double gd_pnorm(const Matrix& approx, const Matrix& ref, double p) {
    if (degenerate_pair(approx, ref)) return kNaN;
    return detail::mean_min_distance(approx, ref, clamp_norm_exponent(p), detail::NormPath::automatic);
}

double igd_plus(const Matrix& approx, const Matrix& ref) {
    if (degenerate_pair(approx, ref)) return kNaN;
    double total = 0.0;
    for (std::size_t i = 0; i < ref.rows(); ++i) {
        auto r = ref.row(i);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < approx.rows(); ++j) {
            auto a = approx.row(j);
            double acc = 0.0;
            for (std::size_t m = 0; m < r.size(); ++m) {
                double d = std::max(a[m] - r[m], 0.0);
                acc += d * d;
            }
            best = std::min(best, std::sqrt(acc));
        }
        total += best;
    }
    return total / static_cast<double>(ref.rows());
}

double hypervolume(const Matrix& front, std::span<const double> ref_point) {
    if (front.rows() == 0) return 0.0;
    if (ref_point.size() != front.cols()) throw ContractViolation("hypervolume: ref_point length mismatch");
    Matrix pts = contributing_points(front, ref_point);
    if (pts.rows() == 0) return 0.0;
    if (pts.cols() == 1) {
        double best = pts(0, 0);
        for (std::size_t r = 1; r < pts.rows(); ++r) best = std::min(best, pts(r, 0));
        return ref_point[0] - best;
    }
    if (pts.cols() == 2) return hypervolume_2d(pts, ref_point);
    return hypervolume_monte_carlo(pts, ref_point);
}

double hypervolume_monte_carlo(const Matrix& front, std::span<const double> ref_point, std::size_t samples,
                               std::uint64_t seed) {
    if (front.rows() == 0) return 0.0;
    if (ref_point.size() != front.cols()) throw ContractViolation("hypervolume: ref_point length mismatch");
    Matrix pts = contributing_points(front, ref_point);
    if (pts.rows() == 0 || samples == 0) return 0.0;

    const std::size_t m = pts.cols();
    std::vector<double> lo(ref_point.begin(), ref_point.end());
    for (std::size_t r = 0; r < pts.rows(); ++r) {
        for (std::size_t k = 0; k < m; ++k) lo[k] = std::min(lo[k], pts(r, k));
    }
    double box = 1.0;
    for (std::size_t k = 0; k < m; ++k) box *= ref_point[k] - lo[k];

    Rng rng(seed);
    std::vector<double> u(m);
    std::size_t hits = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        for (std::size_t k = 0; k < m; ++k) u[k] = rng.uniform(lo[k], ref_point[k]);
        for (std::size_t r = 0; r < pts.rows(); ++r) {
            auto f = pts.row(r);
            bool covers = true;
            for (std::size_t k = 0; k < m && covers; ++k) covers = f[k] <= u[k];
            if (covers) {
                ++hits;
                break;
            }
        }
    }
    return box * static_cast<double>(hits) / static_cast<double>(samples);
}

BoundMetric make_metric(const MetricSpec& spec, const MetricContext& context) {
    const std::string name = spec.name();
    if (spec.metric_id == MetricId::hv) {
        auto ref_point = spec.ref_point ? spec.ref_point : context.ref_point;
        if (!ref_point) throw ConfigurationError("hv requires a ref_point", "ref_point");
        if (context.n_obj && ref_point->size() != *context.n_obj) {
            throw ConfigurationError(fmt::format("hv ref_point has {} entries, the problem has {} objectives",
                                                 ref_point->size(), *context.n_obj),
                                     "ref_point");
        }
        MetricSpec bound = spec;
        bound.ref_point = ref_point;
        auto kernel = [ref = *ref_point](const Matrix& front) { return hypervolume(front, ref); };
        return {name, std::move(bound), Matrix(), kernel};
    }

    Matrix ref;
    if (context.reference_front && context.reference_front->rows() > 0) ref = *context.reference_front;
    const double p = clamp_norm_exponent(spec.p);
    MetricSpec bound = spec;
    bound.p = p;

    BoundMetric::Kernel kernel;
    switch (spec.metric_id) {
        case MetricId::igd: kernel = [ref, p](const Matrix& f) { return igd_pnorm(f, ref, p); }; break;
        case MetricId::gd: kernel = [ref, p](const Matrix& f) { return gd_pnorm(f, ref, p); }; break;
        case MetricId::igd_plus: kernel = [ref](const Matrix& f) { return igd_plus(f, ref); }; break;
        case MetricId::hv: break;
    }
    return {name, std::move(bound), std::move(ref), std::move(kernel)};
}

namespace {

std::optional<Matrix> matrix_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.empty()) return std::nullopt;
    Matrix m;
    for (const auto& row : j) {
        if (!row.is_array()) return std::nullopt;
        std::vector<double> values;
        for (const auto& v : row) {
            if (!v.is_number()) return std::nullopt;
            values.push_back(v.get<double>());
        }
        if (m.rows() > 0 && values.size() != m.cols()) return std::nullopt;
        m.append_row(values);
    }
    return m;
}

}  // namespace

BoundMetric make_metric(const MetricSpec& spec, const nlohmann::json& context) {
    const nlohmann::json empty = nlohmann::json::object();
    const nlohmann::json* cfg = &empty;
    if (context.is_object()) {
        cfg = &context;
        if (context.contains("config") && !context["config"].is_null()) cfg = &context["config"];
    }

    MetricContext typed;
    for (const char* key : {"pareto_front", "ref_pf", "reference_front", "pf"}) {
        if (cfg->contains(key) && !(*cfg)[key].is_null()) {
            typed.reference_front = matrix_from_json((*cfg)[key]);
            break;
        }
    }
    if (cfg->contains("ref_point") && (*cfg)["ref_point"].is_array()) {
        typed.ref_point = (*cfg)["ref_point"].get<std::vector<double>>();
    }
    MetricSpec effective = spec;
    if (cfg->contains("p") && (*cfg)["p"].is_number()) effective.p = clamp_norm_exponent((*cfg)["p"].get<double>());
    return make_metric(effective, typed);
}

std::vector<MetricCatalogEntry> metric_catalog() {
    return {
        {"igd", Direction::minimize, true, {"p"}},
        {"igd_plus", Direction::minimize, true, {}},
        {"gd", Direction::minimize, true, {"p"}},
        {"hv", Direction::maximize, false, {"ref_point"}},
    };
}

}  // namespace lab
