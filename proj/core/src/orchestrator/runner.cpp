#include "lab/orchestrator/runner.hpp"

#include <chrono>
#include <vector>

#include <fmt/format.h>

#include "lab/algorithms/engine.hpp"
#include "lab/dominance.hpp"
#include "lab/errors.hpp"
#include "lab/json_util.hpp"
#include "lab/rng.hpp"

namespace lab {

namespace {

class NonFiniteEvaluation : public Error {
public:
    using Error::Error;
};

/// Copy of the problem whose evaluator rejects non-finite output.
ProblemInstance guarded(const ProblemInstance& problem) {
    ProblemInstance copy = problem;
    copy.evaluator = [inner = problem.evaluator, id = problem.id](const Matrix& X) {
        ObjectiveBatch out = inner(X);
        for (const Matrix* m : {&out.F, &out.G, &out.H}) {
            for (std::size_t r = 0; r < m->rows(); ++r) {
                for (double v : m->row(r)) {
                    if (!std::isfinite(v)) {
                        throw NonFiniteEvaluation(
                            fmt::format("problem '{}' produced a non-finite value for input row {}", id, r));
                    }
                }
            }
        }
        return out;
    };
    return copy;
}

}  // namespace

RunPayload run_single(const ProblemInstance& problem, const AlgorithmConfig& config, std::uint64_t seed,
                      std::size_t fe_budget, std::span<const MetricSpec> metrics, const EventSink& sink,
                      const RunOptions& options) {
    if (fe_budget == 0) throw ConfigurationError("fe_budget must be positive", "fe_budget");
    const AlgorithmConfig resolved = resolve_config(config, problem);

    MetricContext context;
    context.n_obj = problem.n_obj;
    if (problem.reference_front) context.reference_front = problem.reference_front->F;
    std::vector<BoundMetric> bound;
    for (const auto& spec : metrics) bound.push_back(make_metric(spec, context));

    RunPayload payload;
    payload.run_id = options.run_id.empty() ? make_uuid() : options.run_id;
    payload.problem = {problem.id, problem.n_obj, problem.n_var, options.problem_overrides};
    payload.algorithm = resolved;
    payload.seed = seed;
    payload.backend = options.backend;
    payload.fe_budget = fe_budget;
    payload.metrics.assign(metrics.begin(), metrics.end());
    for (const auto& m : bound) payload.metric_histories.push_back({m.name(), {}});
    payload.meta["metric_cadence"] = "per_generation";
    payload.meta["metric_front"] = "nondominated";
    payload.meta["rng"] = "xoshiro256**/splitmix64";
    payload.meta["hv_mc_samples"] = std::to_string(kHypervolumeSamples);
    payload.meta["hv_mc_seed"] = std::to_string(kHypervolumeSeed);
    payload.meta["constraint_handling"] = "feasibility_first";
    payload.meta["eps_eq"] = fmt::format("{}", kEqualityTolerance);

    auto emit = [&](EventKind kind, std::size_t fe, nlohmann::json fragment) {
        if (sink) sink(ProgressEvent{payload.run_id, kind, fe, std::move(fragment)});
    };
    auto log = [&](const std::string& line) { payload.log.push_back(fmt::format("[{}] {}", utc_timestamp(), line)); };

    const auto t0 = std::chrono::steady_clock::now();
    log(fmt::format("start {} on {} (M={}, D={}) seed={} budget={}", to_string(resolved.algorithm_id), problem.id,
                    problem.n_obj, problem.n_var, seed, fe_budget));
    emit(EventKind::started, 0,
         {{"problem", problem.id}, {"algorithm", std::string(to_string(resolved.algorithm_id))}, {"seed", seed}});

    RunState state;
    bool have_state = false;
    auto record = [&](const RunState& s) {
        auto nd = nondominated_filter(s.population.batch.F);
        Matrix front = s.population.batch.F.select_rows(nd);
        nlohmann::json values = nlohmann::json::object();
        for (std::size_t k = 0; k < bound.size(); ++k) {
            double v = bound[k](front);
            payload.metric_histories[k].points.push_back({s.fe_used, v});
            values[bound[k].name()] = number_to_json(v);
        }
        emit(EventKind::generation, s.fe_used, {{"generation", s.generation}, {"front", matrix_to_json(front)}});
        for (std::size_t k = 0; k < bound.size(); ++k) {
            emit(EventKind::metric_point, s.fe_used,
                 {{"metric", bound[k].name()}, {"generation", s.generation}, {"value", values[bound[k].name()]}});
        }
    };

    try {
        const ProblemInstance checked = guarded(problem);
        Rng rng(seed);
        state = initialize_run(checked, resolved, fe_budget, rng);
        have_state = true;
        record(state);
        while (!state.finished) {
            state = step_run(std::move(state), resolved, checked, rng);
            record(state);
        }
        if (resolved.algorithm_id == AlgorithmId::moead) {
            payload.meta["moead_partitions"] = std::to_string(state.decomposition.partitions);
        }
    } catch (const std::exception& e) {
        payload.status = "failed";
        payload.error = e.what();
        log(fmt::format("failed: {}", e.what()));
    }

    if (have_state) {
        payload.fe_used = state.fe_used;
        payload.generations = state.generation;
        payload.final_X = state.population.X;
        payload.final_F = state.population.batch.F;
        payload.final_G = state.population.batch.G;
        payload.final_H = state.population.batch.H;
        payload.nondominated_indices = nondominated_filter(payload.final_F);
    }
    payload.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::steady_clock::now() - t0)
                               .count();

    if (payload.completed()) {
        log(fmt::format("finished after {} generations, {} evaluations", payload.generations, payload.fe_used));
        nlohmann::json final_metrics = nlohmann::json::object();
        for (const auto& h : payload.metric_histories) {
            final_metrics[h.metric_id] = h.points.empty() ? nlohmann::json(nullptr) : number_to_json(h.points.back().value);
        }
        emit(EventKind::finished, payload.fe_used,
             {{"generations", payload.generations}, {"final_metrics", final_metrics},
              {"front", matrix_to_json(payload.nondominated_front())}});
    } else {
        emit(EventKind::failed, payload.fe_used, {{"error", payload.error}, {"log", payload.log}});
    }
    return payload;
}

}  // namespace lab
