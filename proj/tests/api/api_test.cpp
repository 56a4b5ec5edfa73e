#include <gtest/gtest.h>

#include <chrono>
#include <memory>
#include <thread>

#include <httplib.h>

#include "lab/benchmarks.hpp"
#include "lab/json_util.hpp"
#include "lab/mcdm.hpp"
#include "lab/orchestrator/payload.hpp"
#include "lab/orchestrator/runner.hpp"
#include "lab/service/http.hpp"
#include "lab/service/service.hpp"
#include "lab/stats.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using nlohmann::json;

namespace {

std::filesystem::path fixture(const std::string& name) {
    return std::filesystem::path(LAB_TEST_DATA_DIR) / "fixtures" / name;
}

json load_fixture(const std::string& name) { return json::parse(lab::read_file(fixture(name))); }

/// One in-process server on an ephemeral port, shared by the suite.
class Api : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        store_ = std::make_unique<testing_support::TempDir>("api");
        start();
    }

    static void TearDownTestSuite() {
        stop();
        store_.reset();
    }

    static void start() {
        lab::service::ServiceConfig config;
        config.store = store_->path();
        config.workers = 2;
        config.llm_fixture = fixture("llm/valid.json");
        service_ = std::make_unique<lab::service::Service>(config);
        server_ = std::make_unique<lab::service::HttpServer>(*service_);
        port_ = server_->bind_to_any_port("127.0.0.1");
        thread_ = std::thread([] { server_->listen_after_bind(); });
        server_->wait_until_ready();
    }

    static void stop() {
        server_->stop();
        thread_.join();
        server_.reset();
        service_.reset();
    }

    static httplib::Client client() {
        httplib::Client c("127.0.0.1", port_);
        c.set_read_timeout(60, 0);
        return c;
    }

    static json get_json(const std::string& path, int expected_status = 200) {
        auto c = client();
        auto res = c.Get(path.c_str());
        EXPECT_TRUE(res) << path;
        if (!res) return {};
        EXPECT_EQ(res->status, expected_status) << path << ": " << res->body;
        return json::parse(res->body);
    }

    static json problem_list() { return get_json("/api/problems").at("problems"); }

    static std::pair<int, json> post_json(const std::string& path, const json& body) {
        auto c = client();
        auto res = c.Post(path.c_str(), body.dump(), "application/json");
        EXPECT_TRUE(res) << path;
        if (!res) return {0, {}};
        return {res->status, json::parse(res->body)};
    }

    static json wait_for(const std::string& path, const std::string& key = "status") {
        for (int i = 0; i < 600; ++i) {
            auto j = get_json(path);
            const auto status = j.value(key, std::string());
            if (status == "completed" || status == "failed") return j;
            std::this_thread::sleep_for(std::chrono::milliseconds(50));
        }
        ADD_FAILURE() << "timed out waiting for " << path;
        return {};
    }

    static std::string submit_zdt1_run(std::uint64_t seed, std::size_t budget) {
        auto [status, body] = post_json("/api/runs", {{"problem", "zdt1"},
                                                      {"algorithm", "nsga2"},
                                                      {"seed", seed},
                                                      {"fe_budget", budget},
                                                      {"metrics", {"igd"}}});
        EXPECT_EQ(status, 202) << body.dump();
        return body.value("run_id", std::string());
    }

    static inline std::unique_ptr<testing_support::TempDir> store_;
    static inline std::unique_ptr<lab::service::Service> service_;
    static inline std::unique_ptr<lab::service::HttpServer> server_;
    static inline std::thread thread_;
    static inline int port_ = 0;
};

}  // namespace

TEST_F(Api, HealthAndCatalogs) {
    EXPECT_EQ(get_json("/api/health")["status"], "ok");
    auto problems = get_json("/api/problems")["problems"];
    std::vector<std::string> ids;
    for (const auto& p : problems) ids.push_back(p["id"]);
    for (const char* id : {"zdt1", "zdt2", "zdt3", "zdt4", "zdt6", "dtlz1", "dtlz2"}) {
        EXPECT_NE(std::find(ids.begin(), ids.end(), id), ids.end()) << id;
    }
    EXPECT_EQ(get_json("/api/problems"), get_json("/api/problems"));
    EXPECT_EQ(get_json("/api/algorithms")["algorithms"].size(), 2u);
    EXPECT_EQ(get_json("/api/metrics")["metrics"].size(), 4u);
}

TEST_F(Api, UnknownPathsAndMethods) {
    EXPECT_EQ(get_json("/api/nothing-here", 404)["code"], "not_found");
    EXPECT_EQ(get_json("/elsewhere", 404)["code"], "not_found");
    EXPECT_EQ(get_json("/api/runs/unknown-run", 404)["code"], "not_found");
    auto [status, body] = post_json("/api/problems", json::object());
    EXPECT_EQ(status, 405);
    EXPECT_EQ(body["code"], "method_not_allowed");
    auto c = client();
    auto res = c.Post("/api/runs", "{not json", "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 400);
    EXPECT_EQ(json::parse(res->body)["code"], "invalid_request");
}

TEST_F(Api, RunRequestValidation) {
    auto [s1, b1] = post_json("/api/runs", {{"problem", "zdt1"}, {"fe_budget", -5}});
    EXPECT_EQ(s1, 422);
    EXPECT_EQ(b1["code"], "invalid_budget");
    auto [s2, b2] = post_json("/api/runs",
                              {{"problem", "zdt1"}, {"fe_budget", 100}, {"algorithm", {{"algorithm_id", "nsga2"}, {"crossover_prob", 3}}}});
    EXPECT_EQ(s2, 422);
    EXPECT_EQ(b2["code"], "invalid_config");
    EXPECT_EQ(b2["detail"]["field"], "algorithm.crossover_prob");
    auto [s3, b3] = post_json("/api/runs", {{"problem", "nope"}, {"fe_budget", 100}});
    EXPECT_EQ(s3, 422);
    EXPECT_EQ(b3["code"], "unknown_problem");
    auto [s4, b4] = post_json("/api/runs", {{"problem", "zdt1"}, {"fe_budget", 100}, {"metrics", {"r2"}}});
    EXPECT_EQ(s4, 422);
    EXPECT_EQ(b4["code"], "unknown_metric");
    auto [s5, b5] = post_json("/api/runs", {{"problem", {{"id", "dtlz2"}, {"M", 3}}}, {"fe_budget", 100},
                                            {"metrics", {{{"metric_id", "hv"}, {"ref_point", {1.1, 1.1}}}}}});
    EXPECT_EQ(s5, 422);
    EXPECT_EQ(b5["code"], "invalid_config");
    EXPECT_EQ(b5["detail"]["field"], "ref_point");
}

TEST_F(Api, RunMatchesDirectModuleCallAndStreamsEvents) {
    const auto run_id = submit_zdt1_run(42, 2000);
    ASSERT_FALSE(run_id.empty());
    auto payload_json = wait_for("/api/runs/" + run_id);
    ASSERT_EQ(payload_json["status"], "completed");
    auto payload = lab::payload_from_json(payload_json);

    auto problem = lab::make_benchmark("zdt1");
    std::vector<lab::MetricSpec> metrics{lab::MetricSpec::make(lab::MetricId::igd)};
    auto direct = lab::run_single(*problem, lab::AlgorithmConfig::defaults(lab::AlgorithmId::nsga2), 42, 2000, metrics);
    EXPECT_EQ(lab::canonical_dump(lab::matrix_to_json(payload.final_F)),
              lab::canonical_dump(lab::matrix_to_json(direct.final_F)));
    EXPECT_EQ(payload.metric_histories, direct.metric_histories);

    auto c = client();
    auto res = c.Get(("/api/runs/" + run_id + "/events").c_str());
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    const auto& text = res->body;
    const auto first_generation = text.find("event: generation");
    const auto finished = text.find("event: finished");
    ASSERT_NE(first_generation, std::string::npos);
    ASSERT_NE(finished, std::string::npos);
    EXPECT_LT(first_generation, finished);
    // Replay starts at the latest snapshot: one generation event only.
    EXPECT_EQ(text.find("event: generation", first_generation + 1), std::string::npos);
    EXPECT_EQ(text.find("event: finished", finished + 1), std::string::npos);
    EXPECT_EQ(text.find("event: started"), std::string::npos);
}

TEST_F(Api, LiveSubscriberSeesOrderedEventsEndingInOneTerminal) {
    const auto run_id = submit_zdt1_run(7, 3000);
    auto cursor = service_->subscribe(run_id);
    ASSERT_NE(cursor, nullptr);
    std::vector<lab::ProgressEvent> seen;
    while (auto e = cursor->next(std::chrono::seconds(30))) {
        seen.push_back(*e);
        if (e->terminal()) break;
    }
    ASSERT_FALSE(seen.empty());
    std::size_t terminal = 0;
    for (std::size_t i = 0; i < seen.size(); ++i) {
        EXPECT_EQ(seen[i].run_id, run_id);
        if (i > 0) EXPECT_GE(seen[i].fe_used, seen[i - 1].fe_used);
        terminal += seen[i].terminal() ? 1 : 0;
    }
    EXPECT_EQ(terminal, 1u);
    EXPECT_EQ(seen.back().kind, lab::EventKind::finished);
}

TEST_F(Api, DecisionMatchesModuleAndWritesSidecar) {
    const auto run_id = submit_zdt1_run(3, 2000);
    auto payload = lab::payload_from_json(wait_for("/api/runs/" + run_id));
    auto [status, body] = post_json("/api/mcdm/decide", {{"run_id", run_id}, {"method", "topsis"}});
    ASSERT_EQ(status, 200) << body.dump();
    auto expected = oracle::topsis(payload.nondominated_front(), {});
    EXPECT_EQ(body["selected_index"], expected.index);
    EXPECT_EQ(body["highlight_index"], body["selected_index"]);
    EXPECT_NEAR(body["score"].get<double>(), expected.score, 1e-12);
    auto direct = lab::decide_and_snapshot(payload, lab::DecisionMethod::topsis);
    EXPECT_EQ(body["front_hash"], direct.front_hash);
    ASSERT_TRUE(body.contains("sidecar"));
    EXPECT_TRUE(std::filesystem::exists(store_->path() / body["sidecar"].get<std::string>()));

    auto [ws, wb] = post_json("/api/mcdm/decide", {{"run_id", run_id}, {"method", "weighted_sum"}, {"weights", {0.9, 0.1}}});
    ASSERT_EQ(ws, 200);
    auto ws_expected = oracle::weighted_sum(payload.nondominated_front(), {0.9, 0.1});
    EXPECT_EQ(wb["selected_index"], ws_expected.index);

    auto [bs, bb] = post_json("/api/mcdm/decide", {{"run_id", run_id}, {"weights", {1, 2, 3}}});
    EXPECT_EQ(bs, 422);
    EXPECT_EQ(bb["code"], "invalid_weights");
    auto [ns, nb] = post_json("/api/mcdm/decide", {{"run_id", run_id}, {"weights", {-1, 2}}});
    EXPECT_EQ(ns, 422);
    EXPECT_EQ(nb["code"], "invalid_weights");
}

TEST_F(Api, DecisionOnUnfinishedRunIsAConflict) {
    const auto run_id = submit_zdt1_run(11, 60000);
    auto [status, body] = post_json("/api/mcdm/decide", {{"run_id", run_id}});
    EXPECT_EQ(status, 409);
    EXPECT_EQ(body["code"], "run_not_finished");
    wait_for("/api/runs/" + run_id);
}

TEST_F(Api, ExperimentSummaryAndExport) {
    json plan = {{"experiment_id", "api-campaign"},
                 {"algorithms", {{{"algorithm_id", "nsga2"}, {"pop_size", 20}},
                                 {{"algorithm_id", "moead"}, {"pop_size", 20}, {"moead_neighborhood", 5}}}},
                 {"problems", {{{"problem_id", "zdt1"}}, {{"problem_id", "zdt2"}}}},
                 {"n_runs", 3},
                 {"fe_budget", 400},
                 {"seed_plan", {{"policy", "sequence"}, {"base_seed", 1}}},
                 {"max_workers", 2},
                 {"metrics", {"igd"}}};
    auto [status, body] = post_json("/api/experiments", plan);
    ASSERT_EQ(status, 202) << body.dump();
    EXPECT_EQ(body["total_runs"], 12);
    auto exp = wait_for("/api/experiments/api-campaign");
    ASSERT_EQ(exp["status"], "completed");
    ASSERT_EQ(exp["run_ids"].size(), 12u);

    std::vector<lab::RunPayload> payloads;
    for (const auto& id : exp["run_ids"]) payloads.push_back(lab::payload_from_json(get_json("/api/runs/" + id.get<std::string>())));
    auto direct = lab::summarize(payloads, lab::MetricSpec::make(lab::MetricId::igd));

    auto summary = get_json("/api/experiments/api-campaign/summary?metric=igd");
    ASSERT_EQ(summary["rows"].size(), 2u);
    EXPECT_EQ(summary["rows"], lab::to_json(direct)["rows"]);
    EXPECT_TRUE(summary.contains("tests"));

    auto c = client();
    auto latex = c.Get("/api/experiments/api-campaign/export?metric=igd&format=latex");
    ASSERT_TRUE(latex);
    EXPECT_EQ(latex->status, 200);
    EXPECT_EQ(latex->body, lab::export_latex(direct));
    auto csv = c.Get("/api/experiments/api-campaign/export?metric=igd&format=csv");
    ASSERT_TRUE(csv);
    EXPECT_EQ(csv->body, lab::export_csv(direct));
    auto xml = c.Get("/api/experiments/api-campaign/export?metric=igd&format=xml");
    ASSERT_TRUE(xml);
    EXPECT_EQ(xml->status, 422);
    EXPECT_EQ(json::parse(xml->body)["code"], "invalid_format");
    EXPECT_EQ(get_json("/api/experiments/api-campaign/summary?metric=hv", 422)["code"], "unknown_metric");

    auto [again, again_body] = post_json("/api/experiments", plan);
    EXPECT_EQ(again, 409);
    EXPECT_EQ(again_body["code"], "already_exists");
}

TEST_F(Api, FormulationChain) {
    auto [gs, gb] = post_json("/api/formulation/generate", {{"prompt", "Define ZDT1"}});
    ASSERT_EQ(gs, 200) << gb.dump();
    EXPECT_EQ(gb["source"]["name"], "zdt1_llm");
    EXPECT_EQ(gb["source"]["provenance"], "llm");
    EXPECT_EQ(gb["report"]["accepted"], true);
    for (const auto& p : problem_list()) EXPECT_NE(p["id"], "zdt1_llm@v1");

    auto [vs, vb] = post_json("/api/formulation/validate", {{"source", load_fixture("problems/reject_syntax.problem.json")}});
    ASSERT_EQ(vs, 200);
    EXPECT_EQ(vb["accepted"], false);
    EXPECT_EQ(vb["stages"].back()["stage"], "parse");

    auto [rs, rb] = post_json("/api/formulation/register", {{"source", load_fixture("problems/zdt1_dsl.problem.json")}});
    ASSERT_EQ(rs, 201) << rb.dump();
    EXPECT_EQ(rb["problem_id"], "zdt1_dsl@v1");
    bool listed = false;
    for (const auto& p : problem_list()) listed = listed || p["id"] == "zdt1_dsl@v1";
    EXPECT_TRUE(listed);

    auto [xs, xb] = post_json("/api/formulation/register", {{"source", load_fixture("problems/reject_nonfinite.problem.json")}});
    EXPECT_EQ(xs, 422);
    EXPECT_EQ(xb["code"], "registration_refused");
    EXPECT_EQ(xb["detail"]["report"]["stages"].back()["stage"], "trial_eval");

    auto [ps, pb] = post_json("/api/runs", {{"problem", "zdt1_dsl@v1"}, {"fe_budget", 500}, {"seed", 1},
                                            {"metrics", {{{"metric_id", "hv"}, {"ref_point", {1.1, 1.1}}}}}});
    ASSERT_EQ(ps, 202) << pb.dump();
    EXPECT_EQ(wait_for("/api/runs/" + pb["run_id"].get<std::string>())["status"], "completed");
}

TEST_F(Api, RestartKeepsCompletedRunsAndRegisteredProblems) {
    const auto run_id = submit_zdt1_run(21, 500);
    auto before = wait_for("/api/runs/" + run_id);
    post_json("/api/formulation/register", {{"source", load_fixture("problems/constrained.problem.json")}});
    stop();
    start();
    auto after = get_json("/api/runs/" + run_id);
    EXPECT_EQ(after["final_F"], before["final_F"]);
    bool listed = false;
    for (const auto& p : problem_list()) listed = listed || p["id"] == "disc@v1";
    EXPECT_TRUE(listed);
    auto c = client();
    auto events = c.Get(("/api/runs/" + run_id + "/events").c_str());
    ASSERT_TRUE(events);
    EXPECT_NE(events->body.find("event: finished"), std::string::npos);
}
