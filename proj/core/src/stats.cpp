#include "lab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>

#include "lab/errors.hpp"
#include "lab/json_util.hpp"

namespace lab {

using nlohmann::json;

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

SummaryCell summarize_values(std::span<const double> values) {
    SummaryCell cell;
    double sum = 0.0;
    for (double v : values) {
        if (std::isfinite(v)) {
            sum += v;
            ++cell.n;
        } else {
            ++cell.failed;
        }
    }
    if (cell.n == 0) {
        cell.mean = kNaN;
        cell.std = kNaN;
        return cell;
    }
    cell.mean = sum / static_cast<double>(cell.n);
    if (cell.n > 1) {
        double ss = 0.0;
        for (double v : values) {
            if (std::isfinite(v)) ss += (v - cell.mean) * (v - cell.mean);
        }
        cell.std = std::sqrt(ss / static_cast<double>(cell.n - 1));
    }
    return cell;
}

void mark_best(SummaryTable& table) {
    for (auto& row : table.rows) {
        std::optional<double> best;
        for (auto& c : row.cells) {
            c.best = false;
            if (c.missing()) continue;
            if (!best || (table.direction == Direction::minimize ? c.mean < *best : c.mean > *best)) best = c.mean;
        }
        if (!best) continue;
        for (auto& c : row.cells) c.best = !c.missing() && c.mean == *best;
    }
}

SummaryTable summarize(std::span<const RunPayload> payloads, const MetricSpec& metric) {
    SummaryTable table;
    table.metric_id = metric.name();
    table.direction = metric.direction();

    struct RowKey {
        std::string id;
        std::size_t m, d;
        bool operator==(const RowKey&) const = default;
    };
    std::vector<RowKey> rows;
    std::vector<std::vector<std::vector<double>>> values;  // row -> algorithm -> runs

    auto column_of = [&](const std::string& alg) {
        auto it = std::find(table.algorithms.begin(), table.algorithms.end(), alg);
        if (it != table.algorithms.end()) return static_cast<std::size_t>(it - table.algorithms.begin());
        table.algorithms.push_back(alg);
        return table.algorithms.size() - 1;
    };

    for (const auto& p : payloads) {
        const RowKey key{p.problem.id, p.problem.n_obj, p.problem.n_var};
        auto it = std::find(rows.begin(), rows.end(), key);
        const std::size_t r = static_cast<std::size_t>(it - rows.begin());
        if (it == rows.end()) {
            rows.push_back(key);
            values.emplace_back();
        }
        const std::size_t c = column_of(std::string(to_string(p.algorithm.algorithm_id)));
        if (values[r].size() <= c) values[r].resize(c + 1);
        double v = kNaN;
        if (p.completed()) {
            if (const auto* h = p.history(table.metric_id); h != nullptr && !h->points.empty()) v = h->points.back().value;
        }
        values[r][c].push_back(v);
    }

    for (std::size_t r = 0; r < rows.size(); ++r) {
        SummaryRow row{rows[r].id, rows[r].m, rows[r].d, {}};
        values[r].resize(table.algorithms.size());
        for (const auto& runs : values[r]) row.cells.push_back(summarize_values(runs));
        table.rows.push_back(std::move(row));
    }
    mark_best(table);
    return table;
}

json to_json(const SummaryTable& table) {
    json rows = json::array();
    for (const auto& r : table.rows) {
        json cells = json::array();
        for (const auto& c : r.cells) {
            cells.push_back({{"mean", number_to_json(c.mean)},
                             {"std", number_to_json(c.std)},
                             {"n", c.n},
                             {"failed", c.failed},
                             {"best", c.best}});
        }
        rows.push_back({{"problem_id", r.problem_id}, {"M", r.n_obj}, {"D", r.n_var}, {"cells", cells}});
    }
    return {{"metric_id", table.metric_id},
            {"direction", std::string(to_string(table.direction))},
            {"algorithms", table.algorithms},
            {"rows", rows}};
}

std::string_view to_string(TestKind kind) {
    return kind == TestKind::friedman ? "friedman" : "wilcoxon_signed_rank";
}

json to_json(const TestResult& r) {
    return {{"test", std::string(to_string(r.test))},
            {"statistic", number_to_json(r.statistic)},
            {"p_value", number_to_json(r.p_value)},
            {"n", r.n},
            {"method_note", r.method_note}};
}

std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

TestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InputError("wilcoxon_signed_rank needs paired samples of equal length");
    std::vector<double> d;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        if (std::isnan(diff)) throw InputError(fmt::format("wilcoxon_signed_rank: NaN at pair {}", i));
        if (diff != 0.0) d.push_back(diff);
    }
    TestResult result;
    result.test = TestKind::wilcoxon_signed_rank;
    result.n = d.size();
    if (d.empty()) {
        result.statistic = 0.0;
        result.p_value = 1.0;
        result.method_note = "degenerate";
        return result;
    }

    std::vector<double> magnitude(d.size());
    std::transform(d.begin(), d.end(), magnitude.begin(), [](double x) { return std::abs(x); });
    const auto ranks = average_ranks(magnitude);
    double w_plus = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        total += ranks[i];
        if (d[i] > 0.0) w_plus += ranks[i];
    }
    const double w = std::min(w_plus, total - w_plus);
    result.statistic = w;
    const std::size_t n = d.size();

    if (n <= kWilcoxonExactLimit) {
        // Average ranks are multiples of 1/2, so doubled ranks are exact integers.
        std::vector<std::size_t> doubled(n);
        std::size_t doubled_total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            doubled[i] = static_cast<std::size_t>(std::llround(2.0 * ranks[i]));
            doubled_total += doubled[i];
        }
        std::vector<std::uint64_t> count(doubled_total + 1, 0);
        count[0] = 1;
        for (std::size_t r : doubled) {
            for (std::size_t s = doubled_total; s >= r; --s) {
                count[s] += count[s - r];
                if (s == r) break;
            }
        }
        const auto w2 = static_cast<std::size_t>(std::llround(2.0 * w));
        std::uint64_t at_most = 0;
        for (std::size_t s = 0; s <= w2; ++s) at_most += count[s];
        const double p = 2.0 * static_cast<double>(at_most) / std::ldexp(1.0, static_cast<int>(n));
        result.p_value = std::min(1.0, p);
        result.method_note = "exact";
        return result;
    }

    const double nn = static_cast<double>(n);
    const double mean = nn * (nn + 1.0) / 4.0;
    double tie_term = 0.0;
    {
        std::vector<double> sorted = ranks;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < sorted.size();) {
            std::size_t j = i;
            while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
            const double t = static_cast<double>(j - i + 1);
            tie_term += t * t * t - t;
            i = j + 1;
        }
    }
    const double variance = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
    const double z = std::max(0.0, std::abs(w - mean) - 0.5) / std::sqrt(variance);
    result.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    result.method_note = "normal_approximation_tie_continuity";
    return result;
}

double chi_square_sf(double x, unsigned df) {
    if (df == 0) throw InputError("chi_square_sf needs df >= 1");
    if (std::isnan(x)) return kNaN;
    if (x <= 0.0) return 1.0;
    return boost::math::gamma_q(0.5 * static_cast<double>(df), 0.5 * x);
}

TestResult friedman(const Matrix& results, Direction direction) {
    const std::size_t n = results.rows();
    const std::size_t k = results.cols();
    if (n < 2 || k < 2) throw InputError(fmt::format("friedman needs at least 2x2 results, got {}x{}", n, k));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            if (std::isnan(results(i, j))) throw InputError(fmt::format("friedman: NaN at row {}, column {}", i, j));
        }
    }
    std::vector<double> rank_sum(k, 0.0);
    std::vector<double> row(k);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) row[j] = direction == Direction::minimize ? results(i, j) : -results(i, j);
        const auto r = average_ranks(row);
        for (std::size_t j = 0; j < k; ++j) rank_sum[j] += r[j];
    }
    const double nn = static_cast<double>(n);
    const double kk = static_cast<double>(k);
    // Same value as 12/(n k (k+1)) * sum R_j^2 - 3 n (k+1), written around the
    // expected rank sum so tied designs give exactly 0.
    const double expected = nn * (kk + 1.0) / 2.0;
    double ss = 0.0;
    for (double r : rank_sum) ss += (r - expected) * (r - expected);
    TestResult result;
    result.test = TestKind::friedman;
    result.statistic = 12.0 / (nn * kk * (kk + 1.0)) * ss;
    result.p_value = chi_square_sf(result.statistic, static_cast<unsigned>(k - 1));
    result.n = n;
    result.method_note = fmt::format("chi_square_df_{}", k - 1);
    return result;
}

namespace {

std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string number_text(double v, bool full_precision) {
    if (full_precision) return canonical_dump(number_to_json(v));
    return fmt::format("{:.4g}", v);
}

std::string latex_escape(std::string_view text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': case '%': case '$': case '#': case '_': case '{': case '}':
                out += '\\';
                out += c;
                break;
            case '~': out += "\\textasciitilde{}"; break;
            case '^': out += "\\textasciicircum{}"; break;
            case '\\': out += "\\textbackslash{}"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string export_csv(const SummaryTable& table, bool full_precision) {
    std::string out = "problem,M,D";
    for (const auto& a : table.algorithms) out += "," + csv_field(a);
    out += "\r\n";
    for (const auto& r : table.rows) {
        out += csv_field(r.problem_id) + fmt::format(",{},{}", r.n_obj, r.n_var);
        for (const auto& c : r.cells) {
            const std::string cell =
                c.missing() ? "NaN" : number_text(c.mean, full_precision) + "\u00b1" + number_text(c.std, full_precision);
            out += "," + csv_field(cell);
        }
        out += "\r\n";
    }
    return out;
}

std::string export_latex(const SummaryTable& table) {
    std::string out = "\\begin{tabular}{lrr";
    out += std::string(table.algorithms.size(), 'c');
    out += "}\n\\toprule\nProblem & $M$ & $D$";
    for (const auto& a : table.algorithms) out += " & " + latex_escape(a);
    out += " \\\\\n\\midrule\n";
    for (const auto& r : table.rows) {
        out += fmt::format("{} & {} & {}", latex_escape(r.problem_id), r.n_obj, r.n_var);
        for (const auto& c : r.cells) {
            std::string cell = c.missing() ? "--" : fmt::format("{:.4g} $\\pm$ {:.4g}", c.mean, c.std);
            if (c.best) cell = "\\textbf{" + cell + "}";
            out += " & " + cell;
        }
        out += " \\\\\n";
    }
    out += "\\bottomrule\n\\end{tabular}\n";
    return out;
}

}  // namespace lab
