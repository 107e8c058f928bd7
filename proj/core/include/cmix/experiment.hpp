#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cmix/bounds.hpp"
#include "cmix/filters.hpp"
#include "cmix/hindsight.hpp"
#include "cmix/mixture.hpp"
#include "cmix/signals.hpp"

namespace cmix {

// Full pipeline configuration. Exactly one of `epsilon` and `mu` must be set:
// epsilon derives the learning rate (and the verification constants) through
// derive_constants, mu runs the mixture without the verifier.
struct ExperimentConfig {
    SignalSpec signal;
    FilterSpec filter1;
    FilterSpec filter2;
    MixtureConfig mixture; // learning_rate is filled in from epsilon or mu
    std::optional<double> epsilon;
    std::optional<double> mu;
    std::vector<double> audit_betas = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::string input_csv; // when set, replays (y, yhat1, yhat2) from a trace

    void validate() const;
};

struct ExperimentResult {
    RunHistory history;
    HindsightResult hindsight;
    std::optional<TheoremConstants> constants;
    RegretReport regret;              // meaningful only when constants present
    double max_slack_violation = 0.0; // max over unclipped steps and audit betas of -slack
    std::int64_t audited_steps = 0;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Trace CSV with header
//   t,y,yhat1,yhat2,lambda,yhat,e,cum_loss,cum_loss_beta_star,clipped
// All floating-point fields use 17 significant digits so a round trip
// reproduces the exact doubles.
void write_trace_csv(const std::string& path, const ExperimentResult& result);

struct TraceColumns {
    std::vector<double> y;
    std::vector<double> yhat1;
    std::vector<double> yhat2;
};

TraceColumns read_trace_csv(const std::string& path);

// JSON report with keys: constants, hindsight, max_slack_violation,
// regret_gap_by_n (decimated), clip_events.
std::string report_to_json(const ExperimentResult& result);
void write_report_json(const std::string& path, const ExperimentResult& result);

struct SweepRow {
    double epsilon = 0.0;
    double lambda_plus = 0.0;
    double mu = 0.0;
    double final_regret_gap = 0.0; // L_n/n - slope * L_n(beta*)/n at the final n
    double bound_rhs = 0.0;        // Y^2 (2e+1) ln2 / (n e (1-z^2)) at the final n
    std::int64_t clip_events = 0;
    double max_slack_violation = 0.0;
};

// One run per (epsilon, lambda_plus) pair, same signal and filters.
std::vector<SweepRow> run_sweep(const ExperimentConfig& base,
                                const std::vector<double>& epsilons,
                                const std::vector<double>& lambda_pluses);

// Summary CSV: epsilon,lambda_plus,mu,final_regret_gap,bound_rhs,clip_events
void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

// 17-significant-digit formatting used by all CSV emitters.
std::string format_double(double v);

} // namespace cmix
