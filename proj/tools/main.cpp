#include <cstdlib>
#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "lab/errors.hpp"
#include "lab/formulation/source.hpp"
#include "lab/json_util.hpp"
#include "lab/mcdm.hpp"
#include "lab/orchestrator/experiment.hpp"
#include "lab/orchestrator/recompute.hpp"
#include "lab/orchestrator/runner.hpp"
#include "lab/registry.hpp"
#include "lab/service/http.hpp"
#include "lab/service/service.hpp"
#include "lab/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string default_store() {
    const char* env = std::getenv("LAB_STORE");
    return env != nullptr && *env != '\0' ? env : "lab-store";
}

std::vector<lab::MetricSpec> parse_metrics(const std::vector<std::string>& names, const std::vector<double>& ref_point, double p) {
    std::vector<lab::MetricSpec> out;
    for (const auto& name : names) {
        auto spec = lab::MetricSpec::make(lab::metric_id_from_string(name), p);
        if (spec.metric_id == lab::MetricId::hv && !ref_point.empty()) spec.ref_point = ref_point;
        out.push_back(spec);
    }
    return out;
}

void load_store_problems(lab::ProblemRegistry& registry, const std::string& store) {
    lab::dsl::load_problem_directory(fs::path(store) / "problems", registry);
}

std::string format_value(double v) { return std::isfinite(v) ? fmt::format("{:.6g}", v) : "NaN"; }

void write_output(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
    } else {
        lab::write_file_atomically(path, text);
        std::cerr << "wrote " << path << "\n";
    }
}

std::vector<lab::RunPayload> load_payloads(const std::vector<std::string>& files, const std::string& manifest) {
    std::vector<lab::RunPayload> out;
    if (!manifest.empty()) {
        for (const auto& p : lab::load_manifest(manifest).payload_paths) out.push_back(lab::load(p));
    }
    for (const auto& f : files) out.push_back(lab::load(f));
    return out;
}

int cmd_test(const std::string& problem_id, std::optional<std::size_t> m, std::optional<std::size_t> d,
             const std::string& algorithm, const std::string& config_file, std::optional<std::size_t> pop_size,
             std::uint64_t seed, std::size_t budget, const std::vector<lab::MetricSpec>& metrics, const std::string& store,
             bool quiet) {
    lab::ProblemRegistry registry;
    load_store_problems(registry, store);
    auto problem = registry.resolve(problem_id, m, d);
    lab::AlgorithmConfig config = lab::AlgorithmConfig::defaults(lab::algorithm_id_from_string(algorithm));
    if (!config_file.empty()) {
        json j = json::parse(lab::read_file(config_file));
        if (!j.contains("algorithm_id")) j["algorithm_id"] = algorithm;
        config = lab::algorithm_config_from_json(j);
    }
    if (pop_size) config.pop_size = *pop_size;

    lab::RunOptions options;
    if (m) options.problem_overrides["n_obj"] = *m;
    if (d) options.problem_overrides["n_var"] = *d;
    lab::EventSink sink;
    if (!quiet) {
        sink = [](const lab::ProgressEvent& e) {
            if (e.kind == lab::EventKind::metric_point) {
                std::cerr << fmt::format("fe={:>7} {}={}\n", e.fe_used, e.fragment.at("metric").get<std::string>(),
                                         e.fragment.at("value").is_null() ? std::string("NaN")
                                                                          : format_value(e.fragment.at("value").get<double>()));
            }
        };
    }
    const auto payload = lab::run_single(*problem, config, seed, budget, metrics, sink, options);
    fs::create_directories(store);
    const fs::path path = fs::path(store) / (payload.run_id + lab::kPayloadExtension);
    lab::persist(payload, path);

    std::cout << fmt::format("run_id: {}\nstatus: {}\nproblem: {} (M={}, D={})\nalgorithm: {}\nseed: {}\nfe_used: {}\n",
                             payload.run_id, payload.status, payload.problem.id, payload.problem.n_obj,
                             payload.problem.n_var, lab::to_string(payload.algorithm.algorithm_id), payload.seed,
                             payload.fe_used);
    for (const auto& h : payload.metric_histories) {
        std::cout << fmt::format("{}: {}\n", h.metric_id, h.points.empty() ? "NaN" : format_value(h.points.back().value));
    }
    std::cout << "payload: " << path.string() << "\n";
    if (!payload.completed()) {
        std::cerr << "error: " << payload.error << "\n";
        return 1;
    }
    return 0;
}

int cmd_experiment(const std::string& plan_file, const std::string& store, std::optional<std::size_t> workers, bool quiet) {
    json j = json::parse(lab::read_file(plan_file));
    lab::ExperimentPlan plan = lab::experiment_plan_from_json(j);
    if (workers) plan.max_workers = *workers;
    lab::ProblemRegistry registry;
    load_store_problems(registry, store);
    lab::EventSink sink;
    if (!quiet) {
        sink = [](const lab::ProgressEvent& e) {
            if (e.terminal()) std::cerr << fmt::format("{} {} fe={}\n", e.run_id, lab::to_string(e.kind), e.fe_used);
        };
    }
    const auto result = lab::run_experiment(plan, registry, sink, fs::path(store));
    std::cout << fmt::format("experiment_id: {}\nruns: {} completed, {} failed\nmanifest: {}\n", plan.experiment_id,
                             result.payloads.size(), result.failures.size(),
                             result.manifest_path ? result.manifest_path->string() : "");
    std::vector<lab::RunPayload> all = result.payloads;
    all.insert(all.end(), result.failed_payloads.begin(), result.failed_payloads.end());
    for (const auto& m : plan.metrics) {
        std::cout << "\n" << m.name() << "\n" << lab::export_csv(lab::summarize(all, m));
    }
    for (const auto& f : result.failures) {
        std::cerr << fmt::format("failed: run {} ({} on {}, seed {}): {}\n", f.run_index, f.algorithm, f.problem_id, f.seed,
                                 f.error);
    }
    return result.failures.empty() ? 0 : 1;
}

int cmd_recompute(const std::vector<std::string>& files, const std::string& manifest,
                  const std::vector<lab::MetricSpec>& metrics, const std::string& store, bool as_json) {
    lab::ProblemRegistry registry;
    load_store_problems(registry, store);
    const auto payloads = load_payloads(files, manifest);
    const auto table = lab::recompute_metrics(payloads, metrics, registry);
    bool clean = true;
    if (as_json) {
        std::cout << lab::canonical_dump(lab::to_json(table)) << "\n";
    } else {
        for (const auto& c : table.cells) {
            std::cout << fmt::format("{}\t{}\t{}{}\n", c.run_id, c.metric, format_value(c.value),
                                     c.flag.empty() ? "" : "\t" + c.flag);
        }
    }
    for (const auto& c : table.cells) clean = clean && c.flag.empty();
    return clean ? 0 : 1;
}

int cmd_decide(const std::string& run_file, const std::string& method, const std::vector<double>& weights) {
    const auto payload = lab::load(run_file);
    const auto snapshot =
        lab::decide_and_snapshot(payload, lab::decision_method_from_string(method), weights, fs::path(run_file));
    std::cout << lab::canonical_dump(lab::to_json(snapshot)) << "\n";
    std::cerr << "sidecar: " << lab::sidecar_path(run_file, payload.run_id).string() << "\n";
    return 0;
}

int cmd_export(const std::vector<std::string>& files, const std::string& manifest, const std::string& metric,
               const std::string& format, const std::string& output, bool full_precision) {
    const auto payloads = load_payloads(files, manifest);
    lab::MetricSpec spec = lab::MetricSpec::make(lab::metric_id_from_string(metric));
    const auto table = lab::summarize(payloads, spec);
    if (format == "csv") {
        write_output(lab::export_csv(table, full_precision), output);
    } else if (format == "latex") {
        write_output(lab::export_latex(table), output);
    } else {
        throw lab::ConfigurationError(fmt::format("unknown export format '{}'", format), "format");
    }
    return 0;
}

int cmd_validate(const std::string& source_file, bool do_register, const std::string& store) {
    const json document = json::parse(lab::read_file(source_file));
    lab::ProblemRegistry registry;
    load_store_problems(registry, store);
    auto outcome = do_register ? lab::dsl::verify_and_register(document, registry) : lab::dsl::verify(document);
    for (const auto& s : outcome.report.stages) {
        std::cout << fmt::format("{:<13} {}\n", lab::dsl::to_string(s.stage), s.passed ? "pass" : "FAIL");
        for (const auto& d : s.diagnostics) std::cout << "    " << d << "\n";
    }
    if (do_register && outcome.report.problem_id) {
        lab::dsl::save_problem_source(fs::path(store) / "problems", *outcome.report.problem_id, outcome.parsed->source);
        std::cout << "registered: " << *outcome.report.problem_id << "\n";
        return 0;
    }
    std::cout << (outcome.report.accepted ? "accepted" : "rejected") << "\n";
    return outcome.report.accepted && !do_register ? 0 : 1;
}

lab::service::HttpServer* g_server = nullptr;

int cmd_serve(const std::string& host, std::optional<int> port, const std::string& store) {
    auto config = lab::service::ServiceConfig::from_environment();
    if (!host.empty()) config.host = host;
    if (port) config.port = *port;
    if (!store.empty()) config.store = store;
    lab::service::Service service(config);
    lab::service::HttpServer server(service);
    g_server = &server;
    std::signal(SIGINT, [](int) {
        if (g_server != nullptr) g_server->stop();
    });
    std::signal(SIGTERM, [](int) {
        if (g_server != nullptr) g_server->stop();
    });
    std::cerr << fmt::format("listening on http://{}:{} (store: {})\n", config.host, config.port, config.store.string());
    const bool ok = server.listen(config.host, config.port);
    g_server = nullptr;
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-objective optimization lab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "0.1.0");

    std::string store = default_store();
    std::vector<std::string> metric_names;
    std::vector<double> ref_point;
    double p = 2.0;
    bool quiet = false;

    auto* test = app.add_subcommand("test", "Run one algorithm on one problem and store the payload");
    std::string problem_id;
    std::string algorithm = "nsga2";
    std::string config_file;
    std::optional<std::size_t> n_obj;
    std::optional<std::size_t> n_var;
    std::optional<std::size_t> pop_size;
    std::uint64_t seed = 0;
    std::size_t budget = 0;
    test->add_option("--problem", problem_id, "Problem id (built-in or registered)")->required();
    test->add_option("--algorithm", algorithm, "nsga2 or moead")->capture_default_str();
    test->add_option("--config", config_file, "Algorithm configuration JSON file")->check(CLI::ExistingFile);
    test->add_option("-M,--n-obj", n_obj, "Number of objectives");
    test->add_option("-D,--n-var", n_var, "Number of variables");
    test->add_option("--pop-size", pop_size, "Population size");
    test->add_option("--seed", seed, "Random seed")->capture_default_str();
    test->add_option("--budget", budget, "Function evaluation budget")->required()->check(CLI::PositiveNumber);
    test->add_option("--metric", metric_names, "Metric to track (repeatable)");
    test->add_option("--ref-point", ref_point, "Hypervolume reference point")->delimiter(',');
    test->add_option("--p", p, "Norm exponent for distance metrics")->capture_default_str();
    test->add_option("--store", store, "Payload directory")->capture_default_str();
    test->add_flag("-q,--quiet", quiet, "Suppress progress output");

    auto* experiment = app.add_subcommand("experiment", "Run a campaign described by a plan file");
    std::string plan_file;
    std::optional<std::size_t> workers;
    experiment->add_option("--plan", plan_file, "Experiment plan JSON")->required()->check(CLI::ExistingFile);
    experiment->add_option("--workers", workers, "Override max_workers");
    experiment->add_option("--store", store, "Payload directory")->capture_default_str();
    experiment->add_flag("-q,--quiet", quiet, "Suppress progress output");

    auto* recompute = app.add_subcommand("recompute", "Evaluate metrics on stored payloads without rerunning");
    std::vector<std::string> files;
    std::string manifest;
    bool as_json = false;
    recompute->add_option("payloads", files, "Payload files")->check(CLI::ExistingFile);
    recompute->add_option("--manifest", manifest, "Experiment manifest")->check(CLI::ExistingFile);
    recompute->add_option("--metric", metric_names, "Metric (repeatable)")->required();
    recompute->add_option("--ref-point", ref_point, "Hypervolume reference point")->delimiter(',');
    recompute->add_option("--p", p, "Norm exponent for distance metrics")->capture_default_str();
    recompute->add_option("--store", store, "Store holding registered problems")->capture_default_str();
    recompute->add_flag("--json", as_json, "Print the table as JSON");

    auto* decide = app.add_subcommand("decide", "Select a compromise solution from a stored run");
    std::string run_file;
    std::string method = "topsis";
    std::vector<double> weights;
    decide->add_option("--run", run_file, "Payload file")->required()->check(CLI::ExistingFile);
    decide->add_option("--method", method, "topsis or weighted_sum")->capture_default_str();
    decide->add_option("--weights", weights, "Objective weights")->delimiter(',');

    auto* exporter = app.add_subcommand("export", "Export a summary table as CSV or LaTeX");
    std::string metric = "igd";
    std::string format = "csv";
    std::string output;
    bool full_precision = false;
    exporter->add_option("payloads", files, "Payload files")->check(CLI::ExistingFile);
    exporter->add_option("--manifest", manifest, "Experiment manifest")->check(CLI::ExistingFile);
    exporter->add_option("--metric", metric, "Metric id")->capture_default_str();
    exporter->add_option("--format", format, "csv or latex")->check(CLI::IsMember({"csv", "latex"}))->capture_default_str();
    exporter->add_option("-o,--output", output, "Output file (default stdout)");
    exporter->add_flag("--full-precision", full_precision, "Round-trip numbers in CSV");

    auto* validate = app.add_subcommand("validate", "Run the verification chain on a problem document");
    std::string source_file;
    bool do_register = false;
    validate->add_option("source", source_file, "Problem document JSON")->required()->check(CLI::ExistingFile);
    validate->add_flag("--register", do_register, "Register into the store on success");
    validate->add_option("--store", store, "Store directory")->capture_default_str();

    auto* serve = app.add_subcommand("serve", "Start the HTTP API");
    std::string host;
    std::optional<int> port;
    std::string serve_store;
    serve->add_option("--host", host, "Bind address (default LAB_HOST or 127.0.0.1)");
    serve->add_option("--port", port, "Port (default LAB_PORT or 8080)");
    serve->add_option("--store", serve_store, "Store directory (default LAB_STORE)");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto metrics = parse_metrics(metric_names, ref_point, p);
        if (test->parsed()) {
            return cmd_test(problem_id, n_obj, n_var, algorithm, config_file, pop_size, seed, budget, metrics, store, quiet);
        }
        if (experiment->parsed()) return cmd_experiment(plan_file, store, workers, quiet);
        if (recompute->parsed()) {
            if (files.empty() && manifest.empty()) throw lab::ConfigurationError("give payload files or --manifest", "payloads");
            return cmd_recompute(files, manifest, metrics, store, as_json);
        }
        if (decide->parsed()) return cmd_decide(run_file, method, weights);
        if (exporter->parsed()) {
            if (files.empty() && manifest.empty()) throw lab::ConfigurationError("give payload files or --manifest", "payloads");
            return cmd_export(files, manifest, metric, format, output, full_precision);
        }
        if (validate->parsed()) return cmd_validate(source_file, do_register, store);
        if (serve->parsed()) return cmd_serve(host, port, serve_store);
    } catch (const lab::ConfigurationError& e) {
        std::cerr << "configuration error" << (e.field().empty() ? "" : " (" + e.field() + ")") << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
