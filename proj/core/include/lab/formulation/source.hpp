#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lab/formulation/ast.hpp"
#include "lab/matrix.hpp"
#include "lab/problem.hpp"
#include "lab/registry.hpp"

namespace lab::dsl {

enum class Provenance { user, llm };

std::string_view to_string(Provenance p);

/// Textual problem document. Scalar bounds are broadcast to n_var.
struct ProblemSource {
    std::string name;
    long n_var = 0;
    long n_obj = 0;
    long n_ieq = 0;
    long n_eq = 0;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<std::string> objectives;
    std::vector<std::string> constraints_ieq;  // g(x) <= 0
    std::vector<std::string> constraints_eq;   // h(x) == 0
    Provenance provenance = Provenance::user;
    std::optional<std::string> raw_prompt;
};

nlohmann::json to_json(const ProblemSource& source);
/// Type-level decoding only; counts and lengths are left for static_check.
/// Throws ConfigurationError naming the offending field.
ProblemSource problem_source_from_json(const nlohmann::json& j);

struct ParsedSource {
    ProblemSource source;
    std::vector<Node> objectives;
    std::vector<Node> constraints_ieq;
    std::vector<Node> constraints_eq;
};

/// Parses every expression; the first failure throws ParseError, with the
/// expression's location prefixed to the message.
ParsedSource parse_source(const ProblemSource& source);

/// Empty result means the source is consistent: counts, bounds, name, index
/// ranges, reduction bounds and identifier scoping.
std::vector<std::string> static_check(const ParsedSource& parsed);

/// Per-row tree walk; the reference semantics for the compiled evaluator.
double interpret(const Node& expr, std::span<const double> x);

/// Column-vectorized program for one expression: sums are unrolled, loop
/// variables substituted and constant subtrees folded at compile time.
class CompiledExpression {
public:
    explicit CompiledExpression(const Node& expr);

    /// One value per row of X.
    std::vector<double> evaluate(const Matrix& X) const;
    std::size_t instruction_count() const noexcept { return code_.size(); }

private:
    enum class Op : std::uint8_t { push_const, push_var, neg, add, sub, mul, div, pow, sqrt, sin, cos, exp, abs, log };
    struct Instruction {
        Op op;
        double value;
        std::size_t index;
    };
    void emit(const Node& n, std::vector<std::pair<std::string, long>>& scope);

    std::vector<Instruction> code_;
    std::size_t max_depth_ = 0;
};

/// Batch evaluator built from a checked source. `interpreted` selects the
/// per-row tree walk instead of the compiled programs.
ProblemInstance compile(const ParsedSource& parsed, bool interpreted = false);

inline constexpr std::size_t kTrialSamples = 64;
inline constexpr std::uint64_t kTrialSeed = 0x5452494131;
inline constexpr std::size_t kMaxBoundaryPoints = 64;
inline constexpr double kBoundaryOffset = 1e-9;

/// Latin hypercube sample followed by boundary points: both exact corners,
/// both corners moved 1e-9 inside, then per axis the exact lower and upper
/// bound (other coordinates at mid-range), then the 1e-9 inside variants;
/// at most kMaxBoundaryPoints of them.
Matrix trial_points(std::span<const double> lower, std::span<const double> upper, std::size_t n_samples,
                    std::uint64_t seed);

/// Evaluates the trial points; reports evaluator exceptions, shape mismatches
/// and non-finite outputs with the offending row. n_samples = 0 raises
/// ConfigurationError.
std::vector<std::string> trial_evaluate(const ProblemInstance& instance, std::size_t n_samples = kTrialSamples,
                                        std::uint64_t seed = kTrialSeed);

enum class Stage { parse, static_check, trial_eval, register_problem };

std::string_view to_string(Stage stage);

struct StageResult {
    Stage stage = Stage::parse;
    bool passed = false;
    std::vector<std::string> diagnostics;
};

struct VerificationReport {
    std::vector<StageResult> stages;
    bool accepted = false;
    std::uint64_t trial_seed = kTrialSeed;
    std::size_t trial_samples = kTrialSamples;
    std::optional<std::string> problem_id;  // set once registered

    const StageResult* stage(Stage s) const;
    /// First stage that did not pass, if any.
    std::optional<Stage> failed_stage() const;
};

nlohmann::json to_json(const VerificationReport& report);

struct VerificationOutcome {
    VerificationReport report;
    std::optional<ParsedSource> parsed;
    std::optional<ProblemInstance> instance;
};

/// Runs parse, static_check and trial_eval in order, stopping at the first
/// failure. `document` is a ProblemSource JSON object.
VerificationOutcome verify(const nlohmann::json& document);
VerificationOutcome verify(const ProblemSource& source);

/// Adds the verified problem to the registry and appends the register stage.
/// Refuses (ConfigurationError carrying the report) unless the report is
/// accepted. Returns the versioned id.
std::string register_problem(VerificationOutcome& outcome, ProblemRegistry& registry);

/// verify followed by register_problem when verification passed.
VerificationOutcome verify_and_register(const nlohmann::json& document, ProblemRegistry& registry);

inline constexpr const char* kProblemSourceExtension = ".problem.json";

/// Writes `<dir>/<versioned_id>.problem.json`.
void save_problem_source(const std::filesystem::path& dir, const std::string& versioned_id, const ProblemSource& source);

/// Re-verifies and registers every stored source in (name, version) order.
/// Returns the ids registered; sources that no longer verify are skipped.
std::vector<std::string> load_problem_directory(const std::filesystem::path& dir, ProblemRegistry& registry);

class RegistrationRefused : public ConfigurationError {
public:
    RegistrationRefused(const std::string& message, VerificationReport report)
        : ConfigurationError(message, "report"), report_(std::move(report)) {}
    const VerificationReport& report() const noexcept { return report_; }

private:
    VerificationReport report_;
};

}  // namespace lab::dsl
