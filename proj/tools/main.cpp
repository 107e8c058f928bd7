// Command-line driver for the adaptive convex mixture and its bound verifier.
//
// Subcommands:
//   run     execute one mixture run, emit a trace CSV and a JSON report
//   sweep   grid of runs over (epsilon, lambda_plus), emit a summary CSV
//   lemma   evaluate the tightness counterexamples for given (a, b, mu)
//   verify  re-audit the (y, yhat1, yhat2) columns of an existing trace CSV
//
// Exit codes: 0 success, 1 validation error, 2 I/O error, 3 bound violation.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cmix/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;
constexpr int kExitViolation = 3;

constexpr double kSlackTol = 1e-9;
constexpr double kRegretTol = 1e-6;

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    if (out.empty()) throw std::invalid_argument("empty list: " + text);
    return out;
}

struct CommonOpts {
    std::string signal = "logistic-chaotic";
    std::string input_csv;
    std::string filters = "lms:0.05:4,nlms:0.5:4";
    double epsilon = -1.0;
    double mu = -1.0;
    double lambda_plus = 0.25;
    double y_bound = 1.0;
    double initial_lambda = 0.5;
    long long steps = 10000;
    unsigned long long seed = 1;
    std::string output_csv;
    std::string report_json;
    std::string audit_betas = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
};

void add_common_flags(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--signal", opts.signal,
                    "signal kind: logistic-chaotic|piecewise-ar|sine-drift|adversarial-flip|csv");
    cmd->add_option("--input-csv", opts.input_csv,
                    "replay (y,yhat1,yhat2) from a trace CSV instead of generating");
    cmd->add_option("--filters", opts.filters,
                    "pair of filter specs, e.g. lms:0.05:4,constant:0.3");
    cmd->add_option("--epsilon", opts.epsilon, "epsilon; derives mu and enables verification");
    cmd->add_option("--mu", opts.mu, "explicit learning rate (mutually exclusive with --epsilon)");
    cmd->add_option("--lambda-plus", opts.lambda_plus, "corner parameter in (0, 1/2)");
    cmd->add_option("--y-bound", opts.y_bound, "amplitude bound Y");
    cmd->add_option("--initial-lambda", opts.initial_lambda, "lambda(1)");
    cmd->add_option("--steps", opts.steps, "sequence length n");
    cmd->add_option("--seed", opts.seed, "signal generator seed");
    cmd->add_option("--output-csv", opts.output_csv, "trace CSV path");
    cmd->add_option("--report-json", opts.report_json, "JSON report path");
    cmd->add_option("--audit-betas", opts.audit_betas, "comma list of comparator betas");
}

cmix::ExperimentConfig build_config(const CommonOpts& opts) {
    cmix::ExperimentConfig cfg;
    cfg.input_csv = opts.input_csv;
    cfg.signal.kind = cmix::parse_signal_kind(opts.signal);
    cfg.signal.length = opts.steps;
    cfg.signal.seed = opts.seed;
    cfg.signal.amplitude = opts.y_bound;

    std::stringstream ss(opts.filters);
    std::vector<std::string> parts;
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(item);
    if (parts.size() != 2)
        throw std::invalid_argument("--filters must name exactly two filter specs");
    cfg.filter1 = cmix::parse_filter_spec(parts[0], opts.y_bound);
    cfg.filter2 = cmix::parse_filter_spec(parts[1], opts.y_bound);

    cfg.mixture.y_bound = opts.y_bound;
    cfg.mixture.lambda_plus = opts.lambda_plus;
    cfg.mixture.initial_lambda = opts.initial_lambda;

    if (opts.epsilon > 0.0 && opts.mu > 0.0)
        throw std::invalid_argument("give either --epsilon or --mu, not both");
    if (opts.epsilon > 0.0)
        cfg.epsilon = opts.epsilon;
    else if (opts.mu > 0.0)
        cfg.mu = opts.mu;
    else
        cfg.epsilon = 1.0; // default: verified run with epsilon = 1

    cfg.audit_betas = parse_double_list(opts.audit_betas);
    return cfg;
}

int finish_run(const cmix::ExperimentResult& result, const CommonOpts& opts) {
    if (!opts.output_csv.empty()) cmix::write_trace_csv(opts.output_csv, result);
    if (!opts.report_json.empty()) cmix::write_report_json(opts.report_json, result);

    std::printf("n=%zu beta_star=%.6f loss_mixture=%.6f loss_best_convex=%.6f clip_events=%lld\n",
                result.history.samples.size(), result.hindsight.beta_star,
                result.hindsight.loss_mixture, result.hindsight.loss_best_convex,
                static_cast<long long>(result.history.clip_events()));
    if (result.constants) {
        std::printf("mu=%.9g max_slack_violation=%.3g max_regret_violation=%.3g\n",
                    result.constants->mu, result.max_slack_violation,
                    result.regret.max_violation);
        const bool slack_bad = result.max_slack_violation > kSlackTol;
        const bool regret_bad =
            result.history.clip_events() == 0 && result.regret.max_violation > kRegretTol;
        if (slack_bad || regret_bad) {
            std::fprintf(stderr, "bound violation detected\n");
            return kExitViolation;
        }
    }
    return kExitOk;
}

int cmd_run(const CommonOpts& opts) {
    const cmix::ExperimentConfig cfg = build_config(opts);
    return finish_run(cmix::run_experiment(cfg), opts);
}

int cmd_verify(const CommonOpts& opts) {
    if (opts.input_csv.empty()) throw std::invalid_argument("verify requires --input-csv");
    return cmd_run(opts);
}

int cmd_sweep(const CommonOpts& opts, const std::string& epsilons_text,
              const std::string& lambda_plus_text) {
    CommonOpts base = opts;
    base.epsilon = -1.0;
    base.mu = -1.0;
    cmix::ExperimentConfig cfg = build_config(base);
    const auto rows =
        cmix::run_sweep(cfg, parse_double_list(epsilons_text), parse_double_list(lambda_plus_text));
    if (!opts.output_csv.empty()) cmix::write_sweep_csv(opts.output_csv, rows);
    bool violated = false;
    for (const auto& r : rows) {
        std::printf("epsilon=%g lambda_plus=%g mu=%.9g gap=%.6g bound_rhs=%.6g clips=%lld\n",
                    r.epsilon, r.lambda_plus, r.mu, r.final_regret_gap, r.bound_rhs,
                    static_cast<long long>(r.clip_events));
        violated = violated || r.max_slack_violation > kSlackTol;
    }
    return violated ? kExitViolation : kExitOk;
}

int cmd_lemma(double a, double b, double mu, double lambda_plus, double y_bound) {
    const cmix::LemmaReport report = cmix::lemma_necessity_check(a, b, mu, lambda_plus, y_bound);
    std::printf("corner instance:   lhs=%.9g progress=%.9g %s\n", report.corner_instance.lhs,
                report.corner_instance.progress,
                report.corner_instance.violated ? "VIOLATED" : "ok");
    std::printf("midpoint instance: lhs=%.9g progress=%.9g %s\n", report.midpoint_instance.lhs,
                report.midpoint_instance.progress,
                report.midpoint_instance.violated ? "VIOLATED" : "ok");
    std::printf("necessary: mu >= %.9g (%s), b >= %.9g (%s)\n", report.mu_lower_bound,
                report.mu_necessary_ok ? "holds" : "fails", report.b_lower_bound,
                report.b_necessary_ok ? "holds" : "fails");
    std::printf("%s\n", report.consistent ? "consistent" : "inconsistent");
    return report.consistent ? kExitOk : kExitViolation;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive convex mixture of two filters with deterministic bound verification"};
    app.require_subcommand(1);

    CommonOpts run_opts;
    CLI::App* run = app.add_subcommand("run", "execute one mixture run");
    add_common_flags(run, run_opts);

    CommonOpts verify_opts;
    CLI::App* verify = app.add_subcommand("verify", "re-audit an existing trace CSV");
    add_common_flags(verify, verify_opts);

    CommonOpts sweep_opts;
    std::string epsilons = "0.1,1,10";
    std::string lambda_plus_list = "0.25";
    CLI::App* sweep = app.add_subcommand("sweep", "grid of runs over epsilon and lambda_plus");
    add_common_flags(sweep, sweep_opts);
    sweep->add_option("--epsilons", epsilons, "comma list of epsilon values");
    sweep->add_option("--lambda-plus-list", lambda_plus_list, "comma list of lambda_plus values");

    double la = 0.0, lb = 0.0, lmu = 0.0, llp = 0.25, ly = 1.0;
    CLI::App* lemma = app.add_subcommand("lemma", "evaluate the tightness counterexamples");
    lemma->add_option("--a", la, "constant a")->required();
    lemma->add_option("--b", lb, "constant b")->required();
    lemma->add_option("--mu", lmu, "learning rate mu")->required();
    lemma->add_option("--lambda-plus", llp, "corner parameter");
    lemma->add_option("--y-bound", ly, "amplitude bound Y");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (run->parsed()) return cmd_run(run_opts);
        if (verify->parsed()) return cmd_verify(verify_opts);
        if (sweep->parsed()) return cmd_sweep(sweep_opts, epsilons, lambda_plus_list);
        if (lemma->parsed()) return cmd_lemma(la, lb, lmu, llp, ly);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    }
    return kExitValidation;
}
