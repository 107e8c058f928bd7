#include "cmix/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cmix {

namespace {
// Safety clamp for the auxiliary variable; the corner constraint keeps any
// reachable rho far inside this range.
constexpr double kRhoClamp = 50.0;

double clamp_rho(double rho) { return std::clamp(rho, -kRhoClamp, kRhoClamp); }
} // namespace

void MixtureConfig::validate() const {
    if (!(y_bound > 0.0) || !std::isfinite(y_bound))
        throw std::invalid_argument("MixtureConfig.y_bound must be positive");
    if (!(lambda_plus > 0.0 && lambda_plus < 0.5))
        throw std::invalid_argument("MixtureConfig.lambda_plus must be in (0, 1/2)");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw std::invalid_argument("MixtureConfig.learning_rate must be positive");
    if (!(initial_lambda >= lambda_plus && initial_lambda <= 1.0 - lambda_plus))
        throw std::invalid_argument("MixtureConfig.initial_lambda outside [lambda_plus, 1-lambda_plus]");
}

double sigmoid(double rho) {
    if (!std::isfinite(rho)) throw std::invalid_argument("sigmoid: non-finite input");
    if (rho >= 0.0) {
        return 1.0 / (1.0 + std::exp(-rho));
    }
    const double z = std::exp(rho);
    return z / (1.0 + z);
}

double logit(double lambda) { return std::log(lambda / (1.0 - lambda)); }

MixtureState make_initial_state(const MixtureConfig& cfg) {
    cfg.validate();
    return MixtureState{logit(cfg.initial_lambda), cfg.initial_lambda, 0};
}

double combine(const MixtureState& state, double yhat1, double yhat2) {
    if (!std::isfinite(yhat1) || !std::isfinite(yhat2))
        throw std::invalid_argument("combine: non-finite filter output");
    return state.lambda * yhat1 + (1.0 - state.lambda) * yhat2;
}

std::pair<MixtureState, bool> clip_lambda(const MixtureState& state, const MixtureConfig& cfg) {
    const double lo = cfg.lambda_plus;
    const double hi = 1.0 - cfg.lambda_plus;
    const double projected = std::clamp(state.lambda, lo, hi);
    const bool moved = projected != state.lambda;
    MixtureState out = state;
    out.lambda = projected;
    out.rho = logit(projected);
    return {out, moved};
}

UpdateResult update_rho(const MixtureState& state, const MixtureConfig& cfg,
                        const SampleRecord& rec) {
    const double grad = cfg.learning_rate * rec.e * state.lambda * (1.0 - state.lambda) *
                        (rec.yhat1 - rec.yhat2);
    if (!std::isfinite(grad)) throw std::invalid_argument("update_rho: non-finite gradient");
    MixtureState next;
    next.rho = clamp_rho(state.rho + grad);
    next.lambda = sigmoid(next.rho);
    next.step_index = state.step_index + 1;
    auto [clipped_state, moved] = clip_lambda(next, cfg);
    return {clipped_state, next.lambda, moved};
}

UpdateResult update_lambda_direct(const MixtureState& state, const MixtureConfig& cfg,
                                  const SampleRecord& rec) {
    const double m = cfg.learning_rate * rec.e * state.lambda * (1.0 - state.lambda);
    const double p1 = m * rec.yhat1;
    const double p2 = m * rec.yhat2;
    if (!std::isfinite(p1) || !std::isfinite(p2))
        throw std::invalid_argument("update_lambda_direct: non-finite exponent");
    // Factor out the larger exponent so neither exp can overflow.
    const double pmax = std::max(p1, p2);
    const double num = state.lambda * std::exp(p1 - pmax);
    const double den = num + (1.0 - state.lambda) * std::exp(p2 - pmax);
    MixtureState next;
    next.lambda = num / den;
    next.rho = clamp_rho(logit(next.lambda));
    next.step_index = state.step_index + 1;
    auto [clipped_state, moved] = clip_lambda(next, cfg);
    return {clipped_state, next.lambda, moved};
}

std::int64_t RunHistory::clip_events() const {
    std::int64_t n = 0;
    for (bool c : clipped) n += c ? 1 : 0;
    return n;
}

RunHistory run_mixture(const MixtureConfig& cfg,
                       const std::vector<double>& ys,
                       const std::vector<double>& yhat1s,
                       const std::vector<double>& yhat2s) {
    cfg.validate();
    if (ys.size() != yhat1s.size() || ys.size() != yhat2s.size() || ys.empty())
        throw std::invalid_argument("run_mixture: sequences must be equal-length and non-empty");

    RunHistory hist;
    hist.cfg = cfg;
    hist.samples.reserve(ys.size());
    hist.states.reserve(ys.size() + 1);
    hist.clipped.reserve(ys.size());

    MixtureState state = make_initial_state(cfg);
    for (std::size_t i = 0; i < ys.size(); ++i) {
        hist.states.push_back(state);
        SampleRecord rec;
        rec.t = static_cast<std::int64_t>(i) + 1;
        rec.y = ys[i];
        rec.yhat1 = yhat1s[i];
        rec.yhat2 = yhat2s[i];
        rec.yhat = combine(state, rec.yhat1, rec.yhat2);
        rec.e = rec.y - rec.yhat;
        const UpdateResult up = update_rho(state, cfg, rec);
        hist.samples.push_back(rec);
        hist.clipped.push_back(up.clipped);
        state = up.state;
    }
    hist.states.push_back(state);
    return hist;
}

} // namespace cmix
