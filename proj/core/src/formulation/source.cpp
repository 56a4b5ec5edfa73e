#include "lab/formulation/source.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "lab/benchmarks.hpp"
#include "lab/errors.hpp"
#include "lab/json_util.hpp"
#include "lab/orchestrator/payload.hpp"
#include "lab/rng.hpp"

namespace lab::dsl {

using nlohmann::json;

std::string_view to_string(Provenance p) { return p == Provenance::llm ? "llm" : "user"; }

json to_json(const ProblemSource& s) {
    json j = {{"name", s.name},
              {"n_var", s.n_var},
              {"n_obj", s.n_obj},
              {"n_ieq", s.n_ieq},
              {"n_eq", s.n_eq},
              {"lower", s.lower},
              {"upper", s.upper},
              {"objectives", s.objectives},
              {"constraints_ieq", s.constraints_ieq},
              {"constraints_eq", s.constraints_eq},
              {"provenance", std::string(to_string(s.provenance))}};
    j["raw_prompt"] = s.raw_prompt ? json(*s.raw_prompt) : json(nullptr);
    return j;
}

namespace {

long read_count(const json& j, const char* key, bool required) {
    if (!j.contains(key)) {
        if (required) throw ConfigurationError(fmt::format("missing field '{}'", key), key);
        return 0;
    }
    if (!j.at(key).is_number_integer()) throw ConfigurationError(fmt::format("'{}' must be an integer", key), key);
    return j.at(key).get<long>();
}

std::vector<double> read_bounds(const json& j, const char* key, long n_var) {
    if (!j.contains(key)) throw ConfigurationError(fmt::format("missing field '{}'", key), key);
    const auto& v = j.at(key);
    if (v.is_number()) return std::vector<double>(static_cast<std::size_t>(std::max(0L, n_var)), v.get<double>());
    if (!v.is_array()) throw ConfigurationError(fmt::format("'{}' must be a number or a list of numbers", key), key);
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw ConfigurationError(fmt::format("'{}' must contain only numbers", key), key);
        out.push_back(e.get<double>());
    }
    return out;
}

std::vector<std::string> read_expressions(const json& j, const char* key, bool required) {
    if (!j.contains(key)) {
        if (required) throw ConfigurationError(fmt::format("missing field '{}'", key), key);
        return {};
    }
    const auto& v = j.at(key);
    if (!v.is_array()) throw ConfigurationError(fmt::format("'{}' must be a list of strings", key), key);
    std::vector<std::string> out;
    for (const auto& e : v) {
        if (!e.is_string()) throw ConfigurationError(fmt::format("'{}' must contain only strings", key), key);
        out.push_back(e.get<std::string>());
    }
    return out;
}

}  // namespace

ProblemSource problem_source_from_json(const json& j) {
    if (!j.is_object()) throw ConfigurationError("problem document must be a JSON object", "document");
    ProblemSource s;
    if (!j.contains("name") || !j.at("name").is_string()) throw ConfigurationError("'name' must be a string", "name");
    s.name = j.at("name").get<std::string>();
    s.n_var = read_count(j, "n_var", true);
    s.n_obj = read_count(j, "n_obj", true);
    s.n_ieq = read_count(j, "n_ieq", false);
    s.n_eq = read_count(j, "n_eq", false);
    s.lower = read_bounds(j, "lower", s.n_var);
    s.upper = read_bounds(j, "upper", s.n_var);
    s.objectives = read_expressions(j, "objectives", true);
    s.constraints_ieq = read_expressions(j, "constraints_ieq", false);
    s.constraints_eq = read_expressions(j, "constraints_eq", false);
    if (j.contains("provenance")) {
        const auto p = j.at("provenance").is_string() ? j.at("provenance").get<std::string>() : std::string();
        if (p == "llm") {
            s.provenance = Provenance::llm;
        } else if (p != "user") {
            throw ConfigurationError("'provenance' must be \"user\" or \"llm\"", "provenance");
        }
    }
    if (j.contains("raw_prompt") && j.at("raw_prompt").is_string()) s.raw_prompt = j.at("raw_prompt").get<std::string>();
    return s;
}

namespace {

std::vector<Node> parse_list(const std::vector<std::string>& exprs, const char* field) {
    std::vector<Node> out;
    for (std::size_t i = 0; i < exprs.size(); ++i) {
        try {
            out.push_back(parse_expression(exprs[i]));
        } catch (const ParseError& e) {
            throw ParseError(e.line(), e.column(), e.expected(), e.found(), fmt::format("in {}[{}]", field, i));
        }
    }
    return out;
}

}  // namespace

ParsedSource parse_source(const ProblemSource& source) {
    ParsedSource p;
    p.source = source;
    p.objectives = parse_list(source.objectives, "objectives");
    p.constraints_ieq = parse_list(source.constraints_ieq, "constraints_ieq");
    p.constraints_eq = parse_list(source.constraints_eq, "constraints_eq");
    return p;
}

namespace {

constexpr long kMaxUnrolledTerms = 1'000'000;

struct Range {
    std::string name;
    long lo, hi;
};

void check_node(const Node& n, long n_var, std::vector<Range>& scope, long multiplicity, const std::string& where,
                std::vector<std::string>& out) {
    auto at = [&] { return fmt::format("{} (line {}, column {})", where, n.line, n.column); };
    auto find = [&](const std::string& name) -> const Range* {
        for (auto it = scope.rbegin(); it != scope.rend(); ++it) {
            if (it->name == name) return &*it;
        }
        return nullptr;
    };
    switch (n.kind) {
        case NodeKind::constant: return;
        case NodeKind::variable: {
            long lo = n.offset;
            long hi = n.offset;
            if (!n.name.empty()) {
                const Range* r = find(n.name);
                if (r == nullptr) {
                    out.push_back(fmt::format("{}: index variable '{}' is not bound by an enclosing sum", at(), n.name));
                    return;
                }
                lo = r->lo + n.offset;
                hi = r->hi + n.offset;
            }
            if (lo < 1 || hi > n_var) {
                out.push_back(fmt::format("{}: variable index {} out of range [1, {}]",
                                          at(), lo == hi ? fmt::format("{}", lo) : fmt::format("{}..{}", lo, hi), n_var));
            }
            return;
        }
        case NodeKind::loop_var:
            if (find(n.name) == nullptr) out.push_back(fmt::format("{}: unknown identifier '{}'", at(), n.name));
            return;
        case NodeKind::sum: {
            bool ok = true;
            if (is_reserved(n.name)) {
                out.push_back(fmt::format("{}: '{}' is reserved and cannot be a sum index", at(), n.name));
                ok = false;
            } else if (find(n.name) != nullptr) {
                out.push_back(fmt::format("{}: sum index '{}' shadows an enclosing index", at(), n.name));
                ok = false;
            }
            if (n.lo > n.hi) {
                out.push_back(fmt::format("{}: sum bounds {}..{} are empty (lower exceeds upper)", at(), n.lo, n.hi));
                ok = false;
            }
            const long terms = ok ? n.hi - n.lo + 1 : 1;
            if (ok && multiplicity * terms > kMaxUnrolledTerms) {
                out.push_back(fmt::format("{}: nested sums expand to more than {} terms", at(), kMaxUnrolledTerms));
                return;
            }
            scope.push_back({n.name, n.lo, std::max(n.lo, n.hi)});
            check_node(n.children[0], n_var, scope, multiplicity * terms, where, out);
            scope.pop_back();
            return;
        }
        default:
            for (const auto& c : n.children) check_node(c, n_var, scope, multiplicity, where, out);
    }
}

void check_list(const std::vector<Node>& nodes, const char* field, long n_var, std::vector<std::string>& out) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        std::vector<Range> scope;
        check_node(nodes[i], n_var, scope, 1, fmt::format("{}[{}]", field, i), out);
    }
}

}  // namespace

std::vector<std::string> static_check(const ParsedSource& p) {
    const auto& s = p.source;
    std::vector<std::string> out;
    if (s.name.empty()) out.push_back("name must not be empty");
    if (s.name.find('@') != std::string::npos) out.push_back(fmt::format("name '{}' must not contain '@'", s.name));
    if (is_benchmark(s.name)) out.push_back(fmt::format("name '{}' collides with a built-in benchmark", s.name));
    if (s.n_var < 1) out.push_back(fmt::format("n_var must be at least 1, got {}", s.n_var));
    if (s.n_obj < 1) out.push_back(fmt::format("n_obj must be at least 1, got {}", s.n_obj));
    if (s.n_ieq < 0) out.push_back(fmt::format("n_ieq must be non-negative, got {}", s.n_ieq));
    if (s.n_eq < 0) out.push_back(fmt::format("n_eq must be non-negative, got {}", s.n_eq));
    auto count = [&](std::size_t have, long want, const char* what, const char* field) {
        if (static_cast<long>(have) != want) {
            out.push_back(fmt::format("{} count mismatch: {} declares {}, {} expression(s) given", what, field, want, have));
        }
    };
    count(s.objectives.size(), s.n_obj, "objective", "n_obj");
    count(s.constraints_ieq.size(), s.n_ieq, "inequality constraint", "n_ieq");
    count(s.constraints_eq.size(), s.n_eq, "equality constraint", "n_eq");
    const auto n = static_cast<std::size_t>(std::max(0L, s.n_var));
    if (s.lower.size() != n) out.push_back(fmt::format("lower has {} entries, n_var is {}", s.lower.size(), s.n_var));
    if (s.upper.size() != n) out.push_back(fmt::format("upper has {} entries, n_var is {}", s.upper.size(), s.n_var));
    if (s.lower.size() == n && s.upper.size() == n) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(s.lower[i]) || !std::isfinite(s.upper[i]) || !(s.lower[i] < s.upper[i])) {
                out.push_back(fmt::format("bounds of x[{}] must be finite with lower < upper, got [{}, {}]", i + 1,
                                          s.lower[i], s.upper[i]));
            }
        }
    }
    check_list(p.objectives, "objectives", s.n_var, out);
    check_list(p.constraints_ieq, "constraints_ieq", s.n_var, out);
    check_list(p.constraints_eq, "constraints_eq", s.n_var, out);
    return out;
}

namespace {

using Scope = std::vector<std::pair<std::string, long>>;

long lookup(const Scope& scope, const std::string& name) {
    for (auto it = scope.rbegin(); it != scope.rend(); ++it) {
        if (it->first == name) return it->second;
    }
    throw ContractViolation(fmt::format("unbound identifier '{}'", name));
}

double apply_function(const std::string& f, double v) {
    if (f == "sqrt") return std::sqrt(v);
    if (f == "sin") return std::sin(v);
    if (f == "cos") return std::cos(v);
    if (f == "exp") return std::exp(v);
    if (f == "abs") return std::abs(v);
    if (f == "log") return std::log(v);
    throw ContractViolation(fmt::format("unknown function '{}'", f));
}

double interpret_in(const Node& n, std::span<const double> x, Scope& scope) {
    switch (n.kind) {
        case NodeKind::constant: return n.value;
        case NodeKind::variable: {
            const long idx = (n.name.empty() ? 0 : lookup(scope, n.name)) + n.offset;
            return x[static_cast<std::size_t>(idx - 1)];
        }
        case NodeKind::loop_var: return static_cast<double>(lookup(scope, n.name));
        case NodeKind::negate: return -interpret_in(n.children[0], x, scope);
        case NodeKind::add: return interpret_in(n.children[0], x, scope) + interpret_in(n.children[1], x, scope);
        case NodeKind::sub: return interpret_in(n.children[0], x, scope) - interpret_in(n.children[1], x, scope);
        case NodeKind::mul: return interpret_in(n.children[0], x, scope) * interpret_in(n.children[1], x, scope);
        case NodeKind::div: return interpret_in(n.children[0], x, scope) / interpret_in(n.children[1], x, scope);
        case NodeKind::pow: {
            const double b = interpret_in(n.children[0], x, scope);
            return std::pow(b, interpret_in(n.children[1], x, scope));
        }
        case NodeKind::call: return apply_function(n.name, interpret_in(n.children[0], x, scope));
        case NodeKind::sum: {
            double acc = 0.0;
            for (long i = n.lo; i <= n.hi; ++i) {
                scope.emplace_back(n.name, i);
                acc = acc + interpret_in(n.children[0], x, scope);
                scope.pop_back();
            }
            return acc;
        }
    }
    return 0.0;
}

bool has_variables(const Node& n) {
    if (n.kind == NodeKind::variable) return true;
    return std::any_of(n.children.begin(), n.children.end(), has_variables);
}

}  // namespace

double interpret(const Node& expr, std::span<const double> x) {
    Scope scope;
    return interpret_in(expr, x, scope);
}

CompiledExpression::CompiledExpression(const Node& expr) {
    std::vector<std::pair<std::string, long>> scope;
    emit(expr, scope);
    std::size_t depth = 0;
    for (const auto& ins : code_) {
        if (ins.op == Op::push_const || ins.op == Op::push_var) {
            max_depth_ = std::max(max_depth_, ++depth);
        } else if (ins.op == Op::add || ins.op == Op::sub || ins.op == Op::mul || ins.op == Op::div || ins.op == Op::pow) {
            --depth;
        }
    }
}

void CompiledExpression::emit(const Node& n, std::vector<std::pair<std::string, long>>& scope) {
    // Variable-free subtrees are evaluated once with the interpreter's arithmetic.
    if (!has_variables(n)) {
        code_.push_back({Op::push_const, interpret_in(n, {}, scope), 0});
        return;
    }
    auto binary = [&](Op op) {
        emit(n.children[0], scope);
        emit(n.children[1], scope);
        code_.push_back({op, 0.0, 0});
    };
    switch (n.kind) {
        case NodeKind::variable: {
            const long idx = (n.name.empty() ? 0 : lookup(scope, n.name)) + n.offset;
            code_.push_back({Op::push_var, 0.0, static_cast<std::size_t>(idx - 1)});
            return;
        }
        case NodeKind::negate:
            emit(n.children[0], scope);
            code_.push_back({Op::neg, 0.0, 0});
            return;
        case NodeKind::add: binary(Op::add); return;
        case NodeKind::sub: binary(Op::sub); return;
        case NodeKind::mul: binary(Op::mul); return;
        case NodeKind::div: binary(Op::div); return;
        case NodeKind::pow: binary(Op::pow); return;
        case NodeKind::call: {
            emit(n.children[0], scope);
            static constexpr std::pair<std::string_view, Op> table[] = {
                {"sqrt", Op::sqrt}, {"sin", Op::sin}, {"cos", Op::cos}, {"exp", Op::exp}, {"abs", Op::abs}, {"log", Op::log}};
            for (const auto& [name, op] : table) {
                if (name == n.name) {
                    code_.push_back({op, 0.0, 0});
                    return;
                }
            }
            throw ContractViolation(fmt::format("unknown function '{}'", n.name));
        }
        case NodeKind::sum:
            // Same accumulation order as the interpreter: 0 + t_lo + ... + t_hi.
            code_.push_back({Op::push_const, 0.0, 0});
            for (long i = n.lo; i <= n.hi; ++i) {
                scope.emplace_back(n.name, i);
                emit(n.children[0], scope);
                scope.pop_back();
                code_.push_back({Op::add, 0.0, 0});
            }
            return;
        default: throw ContractViolation("malformed expression tree");
    }
}

std::vector<double> CompiledExpression::evaluate(const Matrix& X) const {
    const std::size_t n = X.rows();
    const std::size_t d = X.cols();
    std::vector<double> stack(max_depth_ * n);
    std::size_t top = 0;  // number of occupied slots
    auto slot = [&](std::size_t k) { return stack.data() + k * n; };
    const double* xs = X.data().data();
    for (const auto& ins : code_) {
        switch (ins.op) {
            case Op::push_const: std::fill_n(slot(top++), n, ins.value); break;
            case Op::push_var: {
                double* out = slot(top++);
                for (std::size_t r = 0; r < n; ++r) out[r] = xs[r * d + ins.index];
                break;
            }
            case Op::neg: {
                double* a = slot(top - 1);
                for (std::size_t r = 0; r < n; ++r) a[r] = -a[r];
                break;
            }
            case Op::add:
            case Op::sub:
            case Op::mul:
            case Op::div:
            case Op::pow: {
                double* a = slot(top - 2);
                const double* b = slot(top - 1);
                switch (ins.op) {
                    case Op::add: for (std::size_t r = 0; r < n; ++r) a[r] = a[r] + b[r]; break;
                    case Op::sub: for (std::size_t r = 0; r < n; ++r) a[r] = a[r] - b[r]; break;
                    case Op::mul: for (std::size_t r = 0; r < n; ++r) a[r] = a[r] * b[r]; break;
                    case Op::div: for (std::size_t r = 0; r < n; ++r) a[r] = a[r] / b[r]; break;
                    default: for (std::size_t r = 0; r < n; ++r) a[r] = std::pow(a[r], b[r]); break;
                }
                --top;
                break;
            }
            default: {
                double* a = slot(top - 1);
                switch (ins.op) {
                    case Op::sqrt: for (std::size_t r = 0; r < n; ++r) a[r] = std::sqrt(a[r]); break;
                    case Op::sin: for (std::size_t r = 0; r < n; ++r) a[r] = std::sin(a[r]); break;
                    case Op::cos: for (std::size_t r = 0; r < n; ++r) a[r] = std::cos(a[r]); break;
                    case Op::exp: for (std::size_t r = 0; r < n; ++r) a[r] = std::exp(a[r]); break;
                    case Op::abs: for (std::size_t r = 0; r < n; ++r) a[r] = std::abs(a[r]); break;
                    default: for (std::size_t r = 0; r < n; ++r) a[r] = std::log(a[r]); break;
                }
            }
        }
    }
    return {stack.begin(), stack.begin() + static_cast<std::ptrdiff_t>(n)};
}

namespace {

Matrix evaluate_columns(const std::vector<CompiledExpression>& programs, const Matrix& X) {
    Matrix out(X.rows(), programs.size());
    for (std::size_t j = 0; j < programs.size(); ++j) {
        const auto column = programs[j].evaluate(X);
        for (std::size_t r = 0; r < X.rows(); ++r) out(r, j) = column[r];
    }
    return out;
}

Matrix interpret_columns(const std::vector<Node>& exprs, const Matrix& X) {
    Matrix out(X.rows(), exprs.size());
    for (std::size_t r = 0; r < X.rows(); ++r) {
        for (std::size_t j = 0; j < exprs.size(); ++j) out(r, j) = interpret(exprs[j], X.row(r));
    }
    return out;
}

std::vector<CompiledExpression> compile_all(const std::vector<Node>& exprs) {
    std::vector<CompiledExpression> out;
    for (const auto& e : exprs) out.emplace_back(e);
    return out;
}

}  // namespace

ProblemInstance compile(const ParsedSource& parsed, bool interpreted) {
    const auto& s = parsed.source;
    ProblemInstance p;
    p.id = s.name;
    p.name = s.name;
    p.n_var = static_cast<std::size_t>(s.n_var);
    p.n_obj = static_cast<std::size_t>(s.n_obj);
    p.n_ieq = static_cast<std::size_t>(s.n_ieq);
    p.n_eq = static_cast<std::size_t>(s.n_eq);
    p.lower = s.lower;
    p.upper = s.upper;
    p.tags = {"dsl", std::string(to_string(s.provenance))};
    if (p.n_ieq + p.n_eq > 0) p.tags.insert("constrained");
    if (interpreted) {
        p.evaluator = [f = parsed.objectives, g = parsed.constraints_ieq, h = parsed.constraints_eq](const Matrix& X) {
            return ObjectiveBatch{interpret_columns(f, X), interpret_columns(g, X), interpret_columns(h, X)};
        };
    } else {
        p.evaluator = [f = compile_all(parsed.objectives), g = compile_all(parsed.constraints_ieq),
                       h = compile_all(parsed.constraints_eq)](const Matrix& X) {
            return ObjectiveBatch{evaluate_columns(f, X), evaluate_columns(g, X), evaluate_columns(h, X)};
        };
    }
    return p;
}

Matrix trial_points(std::span<const double> lower, std::span<const double> upper, std::size_t n_samples,
                    std::uint64_t seed) {
    const std::size_t d = lower.size();
    Matrix X(n_samples, d);
    Rng rng(seed);
    std::vector<std::size_t> strata(n_samples);
    for (std::size_t j = 0; j < d; ++j) {
        std::iota(strata.begin(), strata.end(), std::size_t{0});
        rng.shuffle(std::span<std::size_t>(strata));
        const double width = upper[j] - lower[j];
        for (std::size_t i = 0; i < n_samples; ++i) {
            const double u = (static_cast<double>(strata[i]) + rng.uniform()) / static_cast<double>(n_samples);
            X(i, j) = lower[j] + u * width;
        }
    }

    std::vector<std::vector<double>> extra;
    auto corner = [&](auto value) {
        std::vector<double> row(d);
        for (std::size_t j = 0; j < d; ++j) row[j] = value(j);
        extra.push_back(std::move(row));
    };
    corner([&](std::size_t j) { return lower[j]; });
    corner([&](std::size_t j) { return upper[j]; });
    corner([&](std::size_t j) { return lower[j] + kBoundaryOffset; });
    corner([&](std::size_t j) { return upper[j] - kBoundaryOffset; });
    auto axis_points = [&](double inset) {
        for (std::size_t a = 0; a < d; ++a) {
            for (bool at_lower : {true, false}) {
                std::vector<double> row(d);
                for (std::size_t j = 0; j < d; ++j) row[j] = 0.5 * (lower[j] + upper[j]);
                row[a] = at_lower ? lower[a] + inset : upper[a] - inset;
                extra.push_back(std::move(row));
            }
        }
    };
    axis_points(0.0);
    axis_points(kBoundaryOffset);
    if (extra.size() > kMaxBoundaryPoints) extra.resize(kMaxBoundaryPoints);
    for (const auto& row : extra) X.append_row(row);
    return X;
}

std::vector<std::string> trial_evaluate(const ProblemInstance& instance, std::size_t n_samples, std::uint64_t seed) {
    if (n_samples == 0) throw ConfigurationError("trial evaluation needs at least one sample", "n_samples");
    const Matrix X = trial_points(instance.lower, instance.upper, n_samples, seed);
    std::vector<std::string> out;
    ObjectiveBatch batch;
    try {
        batch = instance.evaluate(X);
    } catch (const std::exception& e) {
        out.push_back(fmt::format("evaluation failed: {}", e.what()));
        return out;
    }
    auto shape = [&](const Matrix& m, std::size_t cols, const char* what) {
        if (m.rows() != X.rows() || m.cols() != cols) {
            out.push_back(fmt::format("{} has shape {}x{}, expected {}x{}", what, m.rows(), m.cols(), X.rows(), cols));
        }
    };
    shape(batch.F, instance.n_obj, "objective output");
    shape(batch.G, instance.n_ieq, "inequality output");
    shape(batch.H, instance.n_eq, "equality output");
    if (!out.empty()) return out;

    constexpr std::size_t kMaxReported = 5;
    std::size_t offending = 0;
    for (std::size_t r = 0; r < X.rows(); ++r) {
        for (const auto& [m, prefix] : {std::pair{&batch.F, "f"}, std::pair{&batch.G, "g"}, std::pair{&batch.H, "h"}}) {
            for (std::size_t c = 0; c < m->cols(); ++c) {
                const double v = (*m)(r, c);
                if (std::isfinite(v)) continue;
                if (offending++ < kMaxReported) {
                    out.push_back(fmt::format("non-finite output {}{} = {} at trial row {}: x = [{}]", prefix, c + 1, v, r,
                                              fmt::join(X.row(r), ", ")));
                }
            }
        }
    }
    if (offending > kMaxReported) out.push_back(fmt::format("{} further non-finite outputs", offending - kMaxReported));
    return out;
}

std::string_view to_string(Stage stage) {
    switch (stage) {
        case Stage::parse: return "parse";
        case Stage::static_check: return "static_check";
        case Stage::trial_eval: return "trial_eval";
        case Stage::register_problem: return "register";
    }
    return "unknown";
}

const StageResult* VerificationReport::stage(Stage s) const {
    for (const auto& r : stages) {
        if (r.stage == s) return &r;
    }
    return nullptr;
}

std::optional<Stage> VerificationReport::failed_stage() const {
    for (const auto& r : stages) {
        if (!r.passed) return r.stage;
    }
    return std::nullopt;
}

json to_json(const VerificationReport& report) {
    json stages = json::array();
    for (const auto& s : report.stages) {
        stages.push_back({{"stage", std::string(to_string(s.stage))}, {"passed", s.passed}, {"diagnostics", s.diagnostics}});
    }
    json j = {{"stages", stages},
              {"accepted", report.accepted},
              {"trial_seed", report.trial_seed},
              {"trial_samples", report.trial_samples}};
    j["problem_id"] = report.problem_id ? json(*report.problem_id) : json(nullptr);
    return j;
}

namespace {

VerificationOutcome verify_parsed(VerificationOutcome outcome, const ProblemSource& source) {
    auto& report = outcome.report;
    try {
        outcome.parsed = parse_source(source);
        report.stages.push_back({Stage::parse, true, {}});
    } catch (const ParseError& e) {
        report.stages.push_back({Stage::parse, false, {e.what()}});
        return outcome;
    }

    auto diagnostics = static_check(*outcome.parsed);
    const bool clean = diagnostics.empty();
    report.stages.push_back({Stage::static_check, clean, std::move(diagnostics)});
    if (!clean) return outcome;

    outcome.instance = compile(*outcome.parsed);
    diagnostics = trial_evaluate(*outcome.instance, report.trial_samples, report.trial_seed);
    const bool finite = diagnostics.empty();
    report.stages.push_back({Stage::trial_eval, finite, std::move(diagnostics)});
    report.accepted = finite;
    return outcome;
}

}  // namespace

VerificationOutcome verify(const ProblemSource& source) { return verify_parsed({}, source); }

VerificationOutcome verify(const json& document) {
    VerificationOutcome outcome;
    ProblemSource source;
    try {
        source = problem_source_from_json(document);
    } catch (const ConfigurationError& e) {
        outcome.report.stages.push_back({Stage::parse, false, {fmt::format("document field '{}': {}", e.field(), e.what())}});
        return outcome;
    }
    return verify_parsed(std::move(outcome), source);
}

std::string register_problem(VerificationOutcome& outcome, ProblemRegistry& registry) {
    auto& report = outcome.report;
    if (!report.accepted || !outcome.instance || !outcome.parsed) {
        throw RegistrationRefused("registration refused: the verification report is not accepted", report);
    }
    std::string id;
    try {
        id = registry.add(outcome.parsed->source.name, *outcome.instance, to_json(outcome.parsed->source));
    } catch (const ConfigurationError& e) {
        report.stages.push_back({Stage::register_problem, false, {e.what()}});
        report.accepted = false;
        throw RegistrationRefused(e.what(), report);
    }
    report.stages.push_back({Stage::register_problem, true, {}});
    report.problem_id = id;
    return id;
}

VerificationOutcome verify_and_register(const json& document, ProblemRegistry& registry) {
    VerificationOutcome outcome = verify(document);
    if (outcome.report.accepted) {
        try {
            register_problem(outcome, registry);
        } catch (const RegistrationRefused&) {
            // The failed register stage is already on the report.
        }
    }
    return outcome;
}

void save_problem_source(const std::filesystem::path& dir, const std::string& versioned_id, const ProblemSource& source) {
    std::filesystem::create_directories(dir);
    write_file_atomically(dir / (versioned_id + kProblemSourceExtension), canonical_dump(to_json(source)) + "\n");
}

std::vector<std::string> load_problem_directory(const std::filesystem::path& dir, ProblemRegistry& registry) {
    std::vector<std::string> ids;
    if (!std::filesystem::is_directory(dir)) return ids;
    struct Entry {
        std::string name;
        std::size_t version;
        std::filesystem::path path;
    };
    std::vector<Entry> entries;
    const std::string suffix = kProblemSourceExtension;
    for (const auto& f : std::filesystem::directory_iterator(dir)) {
        const std::string file = f.path().filename().string();
        if (file.size() <= suffix.size() || file.compare(file.size() - suffix.size(), suffix.size(), suffix) != 0) continue;
        const auto [name, version] = split_versioned_id(file.substr(0, file.size() - suffix.size()));
        if (version) entries.push_back({name, *version, f.path()});
    }
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return std::tie(a.name, a.version) < std::tie(b.name, b.version); });
    for (const auto& e : entries) {
        try {
            auto outcome = verify(json::parse(read_file(e.path)));
            if (outcome.report.accepted) ids.push_back(register_problem(outcome, registry));
        } catch (const std::exception&) {
            // Unreadable sources stay on disk and are skipped.
        }
    }
    return ids;
}

}  // namespace lab::dsl
