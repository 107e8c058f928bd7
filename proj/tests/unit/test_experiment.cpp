#include <doctest.h>

#include <stdexcept>

#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "cmix/experiment.hpp"

using namespace cmix;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.signal.kind = SignalKind::LogisticChaotic;
    cfg.signal.length = 2000;
    cfg.signal.seed = 7;
    cfg.filter1 = parse_filter_spec("lms:0.1:4", 1.0);
    cfg.filter2 = parse_filter_spec("constant:0.2", 1.0);
    cfg.epsilon = 1.0;
    return cfg;
}

struct TempFile {
    std::string path;
    explicit TempFile(std::string p) : path(std::move(p)) {}
    ~TempFile() { std::remove(path.c_str()); }
};

} // namespace

TEST_CASE("config validation: epsilon and mu are mutually exclusive") {
    ExperimentConfig cfg = small_config();
    cfg.mu = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.epsilon.reset();
    cfg.mu.reset();
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("full pipeline run verifies the per-step inequality") {
    const ExperimentResult res = run_experiment(small_config());
    CHECK(res.history.samples.size() == 2000);
    CHECK(res.max_slack_violation <= 1e-9);
    if (res.history.clip_events() == 0) CHECK(res.regret.max_violation <= 1e-6);
    CHECK(res.hindsight.loss_best_convex <= res.hindsight.loss_mixture + 1e-12);
}

TEST_CASE("degenerate identical filters report the midpoint convention") {
    ExperimentConfig cfg = small_config();
    cfg.filter1 = parse_filter_spec("constant:0.2", 1.0);
    cfg.filter2 = parse_filter_spec("constant:0.2", 1.0);
    const ExperimentResult res = run_experiment(cfg);
    CHECK(res.hindsight.beta_star == doctest::Approx(0.5));
    CHECK(res.hindsight.loss_mixture ==
          doctest::Approx(res.hindsight.loss_best_convex).epsilon(1e-12));
    CHECK(res.regret.max_violation <= 1e-9);
}

TEST_CASE("trace CSV round-trips into an identical replay") {
    const TempFile trace("test_trace_tmp.csv");
    ExperimentConfig cfg = small_config();
    const ExperimentResult first = run_experiment(cfg);
    write_trace_csv(trace.path, first);

    ExperimentConfig replay = cfg;
    replay.input_csv = trace.path;
    const ExperimentResult second = run_experiment(replay);

    REQUIRE(second.history.samples.size() == first.history.samples.size());
    for (std::size_t i = 0; i < first.history.samples.size(); ++i) {
        CHECK(second.history.samples[i].y == first.history.samples[i].y);
        CHECK(second.history.samples[i].yhat == first.history.samples[i].yhat);
        CHECK(second.history.states[i].lambda == first.history.states[i].lambda);
        CHECK(second.history.clipped[i] == first.history.clipped[i]);
    }
    CHECK(second.hindsight.beta_star == first.hindsight.beta_star);
}

TEST_CASE("trace CSV carries the documented header and row shape") {
    const TempFile trace("test_trace_hdr_tmp.csv");
    ExperimentConfig cfg = small_config();
    cfg.signal.length = 5;
    write_trace_csv(trace.path, run_experiment(cfg));
    std::ifstream in(trace.path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,y,yhat1,yhat2,lambda,yhat,e,cum_loss,cum_loss_beta_star,clipped");
    int rows = 0;
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) ++rows;
    CHECK(rows == 5);
}

TEST_CASE("JSON report exposes the documented keys") {
    const ExperimentResult res = run_experiment(small_config());
    const auto j = nlohmann::json::parse(report_to_json(res));
    for (const char* key :
         {"constants", "hindsight", "max_slack_violation", "regret_gap_by_n", "clip_events"})
        CHECK(j.contains(key));
    CHECK(j["constants"]["mu"].get<double>() == doctest::Approx(64.0 / 21.0));
    CHECK(j["hindsight"].contains("beta_star"));
    CHECK(j["regret_gap_by_n"].is_array());
    CHECK_FALSE(j["regret_gap_by_n"].empty());
}

TEST_CASE("sweep demonstrates the epsilon trade-off") {
    ExperimentConfig base = small_config();
    base.signal.length = 1000;
    const std::vector<SweepRow> rows = run_sweep(base, {0.1, 1.0, 10.0}, {0.25});
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const TheoremConstants lo =
            derive_constants(rows[i - 1].epsilon, 1.0, rows[i - 1].lambda_plus);
        const TheoremConstants hi = derive_constants(rows[i].epsilon, 1.0, rows[i].lambda_plus);
        CHECK(hi.regret_slope > lo.regret_slope);       // slope grows with epsilon
        CHECK(rows[i].bound_rhs < rows[i - 1].bound_rhs); // additive term shrinks
    }
    for (const SweepRow& r : rows) CHECK(r.max_slack_violation <= 1e-9);
}

TEST_CASE("sweep rejects empty parameter lists") {
    CHECK_THROWS_AS(run_sweep(small_config(), {}, {0.25}), std::invalid_argument);
}

TEST_CASE("missing input file raises an I/O error") {
    ExperimentConfig cfg = small_config();
    cfg.input_csv = "does_not_exist_12345.csv";
    CHECK_THROWS_AS(run_experiment(cfg), std::runtime_error);
}
