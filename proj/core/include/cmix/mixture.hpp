#pragma once

#include <cstdint>
#include <vector>

namespace cmix {

// Configuration of the two-filter convex mixture.
//
// The combination weight lambda(t) is kept inside [lambda_plus, 1-lambda_plus]
// with 0 < lambda_plus < 1/2, and is parameterized through an auxiliary
// variable rho via the logistic map lambda = 1/(1+exp(-rho)).
struct MixtureConfig {
    double y_bound = 1.0;        // Y, amplitude bound on y and both filter outputs
    double lambda_plus = 0.25;   // corner parameter, in (0, 1/2)
    double learning_rate = 1.0;  // mu
    double initial_lambda = 0.5; // lambda(1), in [lambda_plus, 1-lambda_plus]

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
};

struct MixtureState {
    double rho = 0.0;
    double lambda = 0.5;
    std::int64_t step_index = 0;
};

// One time step of a run.
struct SampleRecord {
    std::int64_t t = 0; // 1-based
    double y = 0.0;
    double yhat1 = 0.0;
    double yhat2 = 0.0;
    double yhat = 0.0; // lambda*yhat1 + (1-lambda)*yhat2
    double e = 0.0;    // y - yhat
};

struct UpdateResult {
    MixtureState state;     // post-clip
    double pre_clip_lambda; // candidate lambda before corner projection
    bool clipped;
};

// Logistic map lambda = 1/(1+exp(-rho)). Throws on non-finite input.
double sigmoid(double rho);

// Inverse of sigmoid; caller guarantees lambda in (0,1).
double logit(double lambda);

MixtureState make_initial_state(const MixtureConfig& cfg);

// Mixture output lambda*yhat1 + (1-lambda)*yhat2.
double combine(const MixtureState& state, double yhat1, double yhat2);

// Gradient step in rho space:
//   rho(t+1) = rho(t) + mu * e(t) * lambda(t) * (1-lambda(t)) * (yhat1 - yhat2)
// followed by the logistic map and corner projection.
UpdateResult update_rho(const MixtureState& state, const MixtureConfig& cfg,
                        const SampleRecord& rec);

// Equivalent multiplicative update applied directly to lambda:
//   lambda(t+1) = lambda*exp(m*yhat1) / (lambda*exp(m*yhat1) + (1-lambda)*exp(m*yhat2))
// with m = mu*e*lambda*(1-lambda). The larger exponent is factored out before
// exponentiating. rho is recomputed from the clipped lambda.
UpdateResult update_lambda_direct(const MixtureState& state, const MixtureConfig& cfg,
                                  const SampleRecord& rec);

// Projects lambda onto [lambda_plus, 1-lambda_plus] and recomputes
// rho = ln(lambda/(1-lambda)) so the two parameterizations stay consistent.
// Second member is true iff the projection moved lambda.
std::pair<MixtureState, bool> clip_lambda(const MixtureState& state, const MixtureConfig& cfg);

// Complete record of a finished mixture run. states[i] is the state used to
// produce samples[i]; states has one extra trailing entry (the post-run state).
struct RunHistory {
    MixtureConfig cfg;
    std::vector<SampleRecord> samples;
    std::vector<MixtureState> states; // size samples.size() + 1
    std::vector<bool> clipped;        // per step
    std::int64_t clip_events() const;
};

// Drives the mixture over aligned (y, yhat1, yhat2) sequences: each step emits
// yhat with the current lambda, computes e, then updates. Uses update_rho.
RunHistory run_mixture(const MixtureConfig& cfg,
                       const std::vector<double>& ys,
                       const std::vector<double>& yhat1s,
                       const std::vector<double>& yhat2s);

} // namespace cmix
