#include "cmix/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace cmix {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void ExperimentConfig::validate() const {
    if (epsilon.has_value() == mu.has_value())
        throw std::invalid_argument(
            "ExperimentConfig: exactly one of epsilon and mu must be given");
    if (epsilon && !(*epsilon > 0.0))
        throw std::invalid_argument("ExperimentConfig.epsilon must be positive");
    if (mu && !(*mu > 0.0)) throw std::invalid_argument("ExperimentConfig.mu must be positive");
    for (double b : audit_betas)
        if (!(b >= 0.0 && b <= 1.0))
            throw std::invalid_argument("ExperimentConfig.audit_betas must lie in [0,1]");
    if (input_csv.empty()) {
        signal.validate();
        filter1.validate();
        filter2.validate();
    }
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();

    std::vector<double> ys, yhat1s, yhat2s;
    if (!cfg.input_csv.empty()) {
        TraceColumns cols = read_trace_csv(cfg.input_csv);
        ys = std::move(cols.y);
        yhat1s = std::move(cols.yhat1);
        yhat2s = std::move(cols.yhat2);
    } else {
        ys = generate(cfg.signal);
        yhat1s = run_filter(cfg.filter1, ys);
        yhat2s = run_filter(cfg.filter2, ys);
    }

    ExperimentResult result;
    MixtureConfig mix = cfg.mixture;
    if (cfg.epsilon) {
        result.constants = derive_constants(*cfg.epsilon, mix.y_bound, mix.lambda_plus);
        mix.learning_rate = result.constants->mu;
    } else {
        mix.learning_rate = *cfg.mu;
    }

    result.history = run_mixture(mix, ys, yhat1s, yhat2s);

    std::vector<double> yhats;
    yhats.reserve(result.history.samples.size());
    for (const auto& rec : result.history.samples) yhats.push_back(rec.yhat);
    result.hindsight = best_convex_weight(ys, yhat1s, yhat2s);
    result.hindsight.loss_mixture = accumulated_loss(ys, yhats);

    if (result.constants) {
        std::vector<double> betas = cfg.audit_betas;
        betas.push_back(result.hindsight.beta_star);
        double worst = -std::numeric_limits<double>::infinity();
        for (double beta : betas) {
            for (std::size_t i = 0; i < result.history.samples.size(); ++i) {
                if (result.history.clipped[i]) continue;
                const StepAudit audit =
                    audit_step(result.history.states[i], result.history.states[i + 1],
                               result.history.samples[i], beta, *result.constants);
                worst = std::max(worst, -audit.slack);
                ++result.audited_steps;
            }
        }
        result.max_slack_violation = result.audited_steps > 0 ? worst : 0.0;
        result.regret =
            verify_regret_bound(result.history, result.hindsight.beta_star, *result.constants);
    }
    return result;
}

void write_trace_csv(const std::string& path, const ExperimentResult& result) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output CSV: " + path);
    out << "t,y,yhat1,yhat2,lambda,yhat,e,cum_loss,cum_loss_beta_star,clipped\n";
    const double beta = result.hindsight.beta_star;
    double cum = 0.0, cum_beta = 0.0;
    for (std::size_t i = 0; i < result.history.samples.size(); ++i) {
        const SampleRecord& rec = result.history.samples[i];
        cum += rec.e * rec.e;
        const double eb = rec.y - (beta * rec.yhat1 + (1.0 - beta) * rec.yhat2);
        cum_beta += eb * eb;
        out << rec.t << ',' << format_double(rec.y) << ',' << format_double(rec.yhat1) << ','
            << format_double(rec.yhat2) << ','
            << format_double(result.history.states[i].lambda) << ',' << format_double(rec.yhat)
            << ',' << format_double(rec.e) << ',' << format_double(cum) << ','
            << format_double(cum_beta) << ',' << (result.history.clipped[i] ? 1 : 0) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

TraceColumns read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input CSV: " + path);
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty CSV: " + path);

    std::vector<std::string> names;
    std::stringstream hs(header);
    std::string field;
    while (std::getline(hs, field, ',')) names.push_back(field);
    auto col = [&](const std::string& name) {
        const auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end())
            throw std::runtime_error("CSV " + path + " missing column '" + name + "'");
        return static_cast<std::size_t>(it - names.begin());
    };
    const std::size_t cy = col("y"), c1 = col("yhat1"), c2 = col("yhat2");

    TraceColumns cols;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ls(line);
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() < names.size())
            throw std::runtime_error("CSV " + path + " has a short row");
        cols.y.push_back(std::stod(fields[cy]));
        cols.yhat1.push_back(std::stod(fields[c1]));
        cols.yhat2.push_back(std::stod(fields[c2]));
    }
    if (cols.y.empty()) throw std::runtime_error("CSV " + path + " has no data rows");
    return cols;
}

std::string report_to_json(const ExperimentResult& result) {
    json j;
    if (result.constants) {
        const TheoremConstants& c = *result.constants;
        j["constants"] = {{"epsilon", c.epsilon}, {"y_bound", c.y_bound},
                          {"lambda_plus", c.lambda_plus}, {"z", c.z},
                          {"s", c.s}, {"a", c.a}, {"b", c.b}, {"mu", c.mu},
                          {"regret_slope", c.regret_slope},
                          {"regret_offset", c.regret_offset}};
    } else {
        j["constants"] = nullptr;
    }
    j["hindsight"] = {{"beta_star", result.hindsight.beta_star},
                      {"loss_mixture", result.hindsight.loss_mixture},
                      {"loss_best_convex", result.hindsight.loss_best_convex},
                      {"n", result.hindsight.n}};
    j["max_slack_violation"] = result.max_slack_violation;
    j["audited_steps"] = result.audited_steps;
    j["clip_events"] = result.history.clip_events();
    json gaps = json::array();
    for (std::size_t i = 0; i < result.regret.prefix_ns.size(); ++i)
        gaps.push_back({{"n", result.regret.prefix_ns[i]},
                        {"gap", result.regret.normalized_gaps[i]}});
    j["regret_gap_by_n"] = gaps;
    j["max_regret_violation"] = result.regret.max_violation;
    return j.dump(2);
}

void write_report_json(const std::string& path, const ExperimentResult& result) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open report JSON: " + path);
    out << report_to_json(result) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& base,
                                const std::vector<double>& epsilons,
                                const std::vector<double>& lambda_pluses) {
    if (epsilons.empty() || lambda_pluses.empty())
        throw std::invalid_argument("run_sweep: parameter lists must be non-empty");
    std::vector<SweepRow> rows;
    for (double eps : epsilons) {
        for (double lp : lambda_pluses) {
            ExperimentConfig cfg = base;
            cfg.epsilon = eps;
            cfg.mu.reset();
            cfg.mixture.lambda_plus = lp;
            cfg.mixture.initial_lambda =
                std::clamp(cfg.mixture.initial_lambda, lp, 1.0 - lp);
            const ExperimentResult res = run_experiment(cfg);
            const TheoremConstants& c = *res.constants;
            const double n = static_cast<double>(res.history.samples.size());
            SweepRow row;
            row.epsilon = eps;
            row.lambda_plus = lp;
            row.mu = c.mu;
            row.final_regret_gap = res.regret.normalized_gaps.back();
            row.bound_rhs = c.y_bound * c.y_bound * (2.0 * eps + 1.0) * std::log(2.0) /
                            (n * eps * (1.0 - c.z * c.z));
            row.clip_events = res.history.clip_events();
            row.max_slack_violation = res.max_slack_violation;
            rows.push_back(row);
        }
    }
    return rows;
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open sweep CSV: " + path);
    out << "epsilon,lambda_plus,mu,final_regret_gap,bound_rhs,clip_events\n";
    for (const SweepRow& r : rows)
        out << format_double(r.epsilon) << ',' << format_double(r.lambda_plus) << ','
            << format_double(r.mu) << ',' << format_double(r.final_regret_gap) << ','
            << format_double(r.bound_rhs) << ',' << r.clip_events << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace cmix
