#include "lab/benchmarks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "lab/algorithms/weights.hpp"
#include "lab/dominance.hpp"
#include "lab/errors.hpp"

namespace lab {

namespace {

constexpr double kPi = std::numbers::pi;

// f1 range of the ZDT3 and ZDT6 Pareto fronts.
constexpr double kZdt3MaxF1 = 0.8518328654;
constexpr double kZdt6MinF1 = 0.2807753191;

void require_unit_box(const Matrix& X, const char* who) {
    if (X.cols() < 2) throw ContractViolation(fmt::format("{}: needs at least 2 variables", who));
    std::vector<double> lo(X.cols(), 0.0), hi(X.cols(), 1.0);
    require_within_bounds(X, lo, hi, who);
}

ObjectiveBatch make_batch(std::size_t rows, std::size_t n_obj) {
    return {Matrix(rows, n_obj), Matrix(rows, 0), Matrix(rows, 0)};
}

double tail_mean(std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) s += x[i];
    return s / static_cast<double>(x.size() - 1);
}

}  // namespace

ObjectiveBatch evaluate_zdt1(const Matrix& X) {
    require_unit_box(X, "zdt1");
    auto out = make_batch(X.rows(), 2);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        auto x = X.row(r);
        double f1 = x[0];
        double g = 1.0 + 9.0 * tail_mean(x);
        out.F(r, 0) = f1;
        out.F(r, 1) = g * (1.0 - std::sqrt(f1 / g));
    }
    return out;
}

ObjectiveBatch evaluate_zdt2(const Matrix& X) {
    require_unit_box(X, "zdt2");
    auto out = make_batch(X.rows(), 2);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        auto x = X.row(r);
        double f1 = x[0];
        double g = 1.0 + 9.0 * tail_mean(x);
        out.F(r, 0) = f1;
        out.F(r, 1) = g * (1.0 - (f1 / g) * (f1 / g));
    }
    return out;
}

ObjectiveBatch evaluate_zdt3(const Matrix& X) {
    require_unit_box(X, "zdt3");
    auto out = make_batch(X.rows(), 2);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        auto x = X.row(r);
        double f1 = x[0];
        double g = 1.0 + 9.0 * tail_mean(x);
        out.F(r, 0) = f1;
        out.F(r, 1) = g * (1.0 - std::sqrt(f1 / g) - (f1 / g) * std::sin(10.0 * kPi * f1));
    }
    return out;
}

ObjectiveBatch evaluate_zdt4(const Matrix& X) {
    if (X.cols() < 2) throw ContractViolation("zdt4: needs at least 2 variables");
    std::vector<double> lo(X.cols(), -5.0), hi(X.cols(), 5.0);
    lo[0] = 0.0;
    hi[0] = 1.0;
    require_within_bounds(X, lo, hi, "zdt4");
    auto out = make_batch(X.rows(), 2);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        auto x = X.row(r);
        double f1 = x[0];
        double g = 1.0 + 10.0 * static_cast<double>(x.size() - 1);
        for (std::size_t i = 1; i < x.size(); ++i) {
            g += x[i] * x[i] - 10.0 * std::cos(4.0 * kPi * x[i]);
        }
        out.F(r, 0) = f1;
        out.F(r, 1) = g * (1.0 - std::sqrt(f1 / g));
    }
    return out;
}

ObjectiveBatch evaluate_zdt6(const Matrix& X) {
    require_unit_box(X, "zdt6");
    auto out = make_batch(X.rows(), 2);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        auto x = X.row(r);
        double f1 = 1.0 - std::exp(-4.0 * x[0]) * std::pow(std::sin(6.0 * kPi * x[0]), 6.0);
        double g = 1.0 + 9.0 * std::pow(tail_mean(x), 0.25);
        out.F(r, 0) = f1;
        out.F(r, 1) = g * (1.0 - (f1 / g) * (f1 / g));
    }
    return out;
}

ObjectiveBatch evaluate_dtlz1(const Matrix& X, std::size_t n_obj) {
    if (n_obj < 2 || X.cols() < n_obj) throw ContractViolation("dtlz1: need D >= M >= 2");
    require_unit_box(X, "dtlz1");
    auto out = make_batch(X.rows(), n_obj);
    const std::size_t k = X.cols() - n_obj + 1;
    for (std::size_t r = 0; r < X.rows(); ++r) {
        auto x = X.row(r);
        double g = static_cast<double>(k);
        for (std::size_t i = n_obj - 1; i < x.size(); ++i) {
            double d = x[i] - 0.5;
            g += d * d - std::cos(20.0 * kPi * d);
        }
        g *= 100.0;
        for (std::size_t m = 0; m < n_obj; ++m) {
            double f = 0.5 * (1.0 + g);
            for (std::size_t i = 0; i + 1 + m < n_obj; ++i) f *= x[i];
            if (m > 0) f *= 1.0 - x[n_obj - 1 - m];
            out.F(r, m) = f;
        }
    }
    return out;
}

ObjectiveBatch evaluate_dtlz2(const Matrix& X, std::size_t n_obj) {
    if (n_obj < 2 || X.cols() < n_obj) throw ContractViolation("dtlz2: need D >= M >= 2");
    require_unit_box(X, "dtlz2");
    auto out = make_batch(X.rows(), n_obj);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        auto x = X.row(r);
        double g = 0.0;
        for (std::size_t i = n_obj - 1; i < x.size(); ++i) g += (x[i] - 0.5) * (x[i] - 0.5);
        for (std::size_t m = 0; m < n_obj; ++m) {
            double f = 1.0 + g;
            for (std::size_t i = 0; i + 1 + m < n_obj; ++i) f *= std::cos(x[i] * kPi / 2.0);
            if (m > 0) f *= std::sin(x[n_obj - 1 - m] * kPi / 2.0);
            out.F(r, m) = f;
        }
    }
    return out;
}

FrontApproximation analytical_front(std::string_view problem_id, std::size_t n_points,
                                    std::size_t n_obj) {
    if (n_points == 0) throw ContractViolation("analytical_front: n_points must be positive");
    FrontApproximation front;
    front.problem_id = std::string(problem_id);
    front.meta["source"] = "analytical";

    auto sample = [n_points](std::size_t i) {
        return n_points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n_points - 1);
    };
    auto curve = [&](double f1_min, double f1_max, auto&& f2_of) {
        front.F = Matrix(0, 2);
        for (std::size_t i = 0; i < n_points; ++i) {
            double f1 = f1_min + (f1_max - f1_min) * sample(i);
            std::array<double, 2> row{f1, f2_of(f1)};
            front.F.append_row(row);
        }
    };

    const bool zdt = problem_id.starts_with("zdt");
    if (zdt && n_obj != 2) throw UnsupportedError("ZDT fronts are bi-objective");

    if (problem_id == "zdt1" || problem_id == "zdt4") {
        curve(0.0, 1.0, [](double f1) { return 1.0 - std::sqrt(f1); });
    } else if (problem_id == "zdt2") {
        curve(0.0, 1.0, [](double f1) { return 1.0 - f1 * f1; });
    } else if (problem_id == "zdt3") {
        curve(0.0, kZdt3MaxF1, [](double f1) {
            return 1.0 - std::sqrt(f1) - f1 * std::sin(10.0 * kPi * f1);
        });
        auto keep = nondominated_filter(front.F);
        front.F = front.F.select_rows(keep);
    } else if (problem_id == "zdt6") {
        curve(kZdt6MinF1, 1.0, [](double f1) { return 1.0 - f1 * f1; });
    } else if (problem_id == "dtlz1" || problem_id == "dtlz2") {
        const bool linear = problem_id == "dtlz1";
        if (n_obj == 2) {
            if (linear) {
                curve(0.0, 0.5, [](double f1) { return 0.5 - f1; });
            } else {
                curve(0.0, 1.0, [](double f1) { return std::sqrt(std::max(0.0, 1.0 - f1 * f1)); });
            }
        } else {
            Matrix w = das_dennis_weights(n_obj, partitions_for_at_least(n_obj, n_points));
            for (std::size_t r = 0; r < w.rows(); ++r) {
                auto row = w.row(r);
                if (linear) {
                    for (double& v : row) v *= 0.5;
                } else {
                    double norm = 0.0;
                    for (double v : row) norm += v * v;
                    norm = std::sqrt(norm);
                    for (double& v : row) v /= norm;
                }
            }
            front.F = std::move(w);
        }
    } else {
        throw UnsupportedError(fmt::format("no closed-form front for problem '{}'", problem_id));
    }
    return front;
}

std::vector<CatalogEntry> benchmark_catalog() {
    return {
        {"zdt1", "ZDT1", {"bi-objective", "real", "convex", "easy"}, 2, 30, false, "builtin"},
        {"zdt2", "ZDT2", {"bi-objective", "real", "concave", "easy"}, 2, 30, false, "builtin"},
        {"zdt3", "ZDT3", {"bi-objective", "real", "disconnected", "medium"}, 2, 30, false, "builtin"},
        {"zdt4", "ZDT4", {"bi-objective", "real", "multimodal", "hard"}, 2, 10, false, "builtin"},
        {"zdt6", "ZDT6", {"bi-objective", "real", "biased", "hard"}, 2, 10, false, "builtin"},
        {"dtlz1", "DTLZ1", {"scalable", "real", "linear", "multimodal", "hard"}, 3, 7, true, "builtin"},
        {"dtlz2", "DTLZ2", {"scalable", "real", "concave", "easy"}, 3, 7, true, "builtin"},
    };
}

bool is_benchmark(std::string_view id) {
    auto catalog = benchmark_catalog();
    return std::any_of(catalog.begin(), catalog.end(), [&](const auto& e) { return e.id == id; });
}

ProblemPtr make_benchmark(std::string_view id, std::optional<std::size_t> n_obj,
                          std::optional<std::size_t> n_var) {
    auto catalog = benchmark_catalog();
    auto it = std::find_if(catalog.begin(), catalog.end(), [&](const auto& e) { return e.id == id; });
    if (it == catalog.end()) throw UnsupportedError(fmt::format("unknown benchmark '{}'", id));

    ProblemInstance p;
    p.id = it->id;
    p.name = it->name;
    p.tags = it->tags;

    if (it->scalable_objectives) {
        p.n_obj = n_obj.value_or(it->default_n_obj);
        if (p.n_obj < 2) throw ConfigurationError("DTLZ needs at least two objectives", "M");
        p.n_var = n_var.value_or(p.n_obj + 4);
        if (p.n_var < p.n_obj) throw ConfigurationError("DTLZ needs D >= M", "D");
    } else {
        if (n_obj && *n_obj != 2) {
            throw ConfigurationError(fmt::format("{} is bi-objective; M={} requested", p.name, *n_obj), "M");
        }
        p.n_obj = 2;
        p.n_var = n_var.value_or(it->default_n_var);
        if (p.n_var < 2) throw ConfigurationError("ZDT problems need D >= 2", "D");
    }

    p.lower.assign(p.n_var, 0.0);
    p.upper.assign(p.n_var, 1.0);
    if (id == "zdt1") p.evaluator = evaluate_zdt1;
    if (id == "zdt2") p.evaluator = evaluate_zdt2;
    if (id == "zdt3") p.evaluator = evaluate_zdt3;
    if (id == "zdt6") p.evaluator = evaluate_zdt6;
    if (id == "zdt4") {
        p.evaluator = evaluate_zdt4;
        std::fill(p.lower.begin() + 1, p.lower.end(), -5.0);
        std::fill(p.upper.begin() + 1, p.upper.end(), 5.0);
    }
    const std::size_t m = p.n_obj;
    if (id == "dtlz1") p.evaluator = [m](const Matrix& X) { return evaluate_dtlz1(X, m); };
    if (id == "dtlz2") p.evaluator = [m](const Matrix& X) { return evaluate_dtlz2(X, m); };

    p.reference_front = analytical_front(id, kReferenceFrontPoints, p.n_obj);
    validate_problem(p);
    return std::make_shared<const ProblemInstance>(std::move(p));
}

}  // namespace lab
