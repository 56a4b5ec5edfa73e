#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lab/indicators.hpp"
#include "lab/matrix.hpp"
#include "lab/orchestrator/payload.hpp"

namespace lab {

struct SummaryCell {
    double mean = 0.0;
    double std = 0.0;
    std::size_t n = 0;  // finite values that entered the mean
    bool best = false;
    std::size_t failed = 0;  // runs that produced no value

    bool missing() const { return n == 0; }
};

struct SummaryRow {
    std::string problem_id;
    std::size_t n_obj = 0;
    std::size_t n_var = 0;
    std::vector<SummaryCell> cells;  // one per algorithm column
};

struct SummaryTable {
    std::string metric_id;
    Direction direction = Direction::minimize;
    std::vector<std::string> algorithms;
    std::vector<SummaryRow> rows;
};

nlohmann::json to_json(const SummaryTable& table);

/// Mean and sample standard deviation (n-1; 0 when n = 1) over the finite
/// values. A cell with no finite value has NaN mean and std.
SummaryCell summarize_values(std::span<const double> values);

/// Marks the extremal mean per row, respecting `direction`; every tied cell is
/// marked and missing cells never are.
void mark_best(SummaryTable& table);

/// Groups payloads by (problem, M, D) rows and algorithm columns, reading each
/// run's final history value for `metric`. Row and column order follow first
/// appearance. Failed payloads count toward `failed`.
SummaryTable summarize(std::span<const RunPayload> payloads, const MetricSpec& metric);

enum class TestKind { wilcoxon_signed_rank, friedman };

std::string_view to_string(TestKind kind);

struct TestResult {
    TestKind test = TestKind::wilcoxon_signed_rank;
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
    std::string method_note;
};

nlohmann::json to_json(const TestResult& result);

inline constexpr std::size_t kWilcoxonExactLimit = 12;

/// Two-sided test on a - b. Zero differences are dropped; ties share average
/// ranks. Effective n <= kWilcoxonExactLimit uses the exact null distribution,
/// larger samples the normal approximation with tie and continuity correction.
TestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

/// Rows are problems, columns algorithms. Lower ranks are better under
/// `direction`. NaN cells raise InputError.
TestResult friedman(const Matrix& results, Direction direction = Direction::minimize);

/// Upper tail of the chi-square distribution.
double chi_square_sf(double x, unsigned df);

/// Within-row average ranks, 1 = smallest.
std::vector<double> average_ranks(std::span<const double> values);

/// Header `problem,M,D,<alg>...`; cells `mean±std` at 4 significant digits.
/// `full_precision` prints round-trip values instead.
std::string export_csv(const SummaryTable& table, bool full_precision = false);

/// booktabs tabular; best cells bold; missing cells `--`.
std::string export_latex(const SummaryTable& table);

}  // namespace lab
