#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cmix/mixture.hpp"

namespace cmix {

// Constants of the deterministic regret guarantee. Given epsilon > 0, the
// amplitude bound Y and the corner parameter lambda_plus, the per-step
// potential argument requires
//
//   a * e(t)^2 - b * e_beta(t)^2  <=  d(u, w(t)) - d(u, w(t+1))
//
// for every comparator weight u = [beta, 1-beta], where d is the KL
// divergence between two points of the 2-simplex. Telescoping this over t
// gives the accumulated-loss bound with slope (2*eps+1)/(1-z^2) and an
// additive term d(u, w(1))/a.
//
// The constants are pinned so the per-step inequality holds with the largest
// admissible learning rate:
//
//   z   = (1 - 4q) / (1 + 4q),          q = lambda_plus*(1 - lambda_plus)
//   b   = eps / Y^2
//   a   = (1 - z^2)*eps / (Y^2*(2*eps + 1))
//   s   = Y^2/2 + 1/(4b)                (so a*s = (1 - z^2)/4 exactly)
//   mu  = (2 + 2*sqrt(1 - 4*a*s))/s  =  (4*eps/(2*eps+1)) * (2 + 2z)/Y^2
struct TheoremConstants {
    double epsilon = 1.0;
    double y_bound = 1.0;
    double lambda_plus = 0.25;
    double z = 0.0;
    double s = 0.0;
    double a = 0.0;
    double b = 0.0;
    double mu = 0.0;
    double regret_slope = 0.0;  // (2*eps+1)/(1-z^2) = b/a
    double regret_offset = 0.0; // ln(2)/a, the additive cap for lambda(1)=1/2
};

// Computes the constants above; both mu formulas are evaluated and must agree
// to 1e-12 relative. Throws std::invalid_argument on out-of-range inputs.
TheoremConstants derive_constants(double epsilon, double y_bound, double lambda_plus);

// KL divergence sum_i u_i*ln(u_i/w_i) on the 2-simplex, with 0*ln(0/w) := 0.
// Returns +infinity when some w_i == 0 while u_i > 0.
double kl_divergence(const std::array<double, 2>& u, const std::array<double, 2>& w);

// Per-step verification record for one comparator beta.
struct StepAudit {
    std::int64_t t = 0;
    double zeta = 1.0;      // exp(mu*e*lambda*(1-lambda))
    double kl_before = 0.0; // d(u, w(t))
    double kl_after = 0.0;  // d(u, w(t+1))
    double lhs = 0.0;       // a*e^2 - b*e_beta^2
    double progress = 0.0;  // kl_before - kl_after
    double slack = 0.0;     // progress - lhs; must be >= -1e-9 when unclipped
    bool clipped = false;
};

// Evaluates both sides of the per-step inequality for one executed step.
// `after` must be the state actually produced from `before` with mu =
// consts.mu; a clipped step is detected by recomputing the unclipped update.
// Throws if a state's lambda disagrees with its rho.
StepAudit audit_step(const MixtureState& before, const MixtureState& after,
                     const SampleRecord& rec, double beta, const TheoremConstants& consts);

struct RegretReport {
    double max_violation = 0.0; // max over prefixes of L_n - (b/a)L_n(beta*) - d(u*,w(1))/a
    std::int64_t clip_events = 0;
    std::vector<std::int64_t> prefix_ns;   // decimated
    std::vector<double> normalized_gaps;   // L_n/n - slope*L_n(beta*)/n at those prefixes
};

// Checks the telescoped bound L_n(yhat,y) <= (b/a)*L_n(yhat_beta*,y) +
// d(u*, w(1))/a for every prefix of the run, with u* = [beta*, 1-beta*].
RegretReport verify_regret_bound(const RunHistory& history, double beta_star,
                                 const TheoremConstants& consts);

// The majorant whose nonpositivity implies the per-step inequality:
//   G = -(yhat_beta + Y)ln z + (yhat + Y)ln z + Y^2 (ln z)^2 / 2
//       + a*(y - yhat)^2 - b*(y - yhat_beta)^2,   z = zeta.
double evaluate_majorant_G(double y, double yhat, double yhat_beta, double zeta,
                           const TheoremConstants& consts);

// Comparator output maximizing G for fixed y, yhat, zeta: y - ln(zeta)/(2b).
double majorant_argmax_yhat_beta(double y, double zeta, const TheoremConstants& consts);

// The convex quadratic controlling the sign of G at its maximizer:
//   H(k) = k^2*mu^2*s - mu*k + a,  k = lambda*(1-lambda).
// H must be <= 0 on [lambda_plus*(1-lambda_plus), 1/4].
double quadratic_H(double k, const TheoremConstants& consts);

struct QuadraticDiagnostics {
    double k1 = 0.0; // larger root, must be >= 1/4
    double k2 = 0.0; // smaller root, must be <= lambda_plus*(1-lambda_plus)
    double h_at_corner = 0.0;
    double h_at_quarter = 0.0;
};

// Roots k = (1 +- sqrt(1 - 4*a*s)) / (2*mu*s) and endpoint values of H.
// Throws on a negative discriminant.
QuadraticDiagnostics quadratic_diagnostics(const TheoremConstants& consts, double lambda_plus);

// Tightness counterexamples: the two single-step instances that force
//   mu >= a / (lambda_plus*(1-lambda_plus))   and   b >= a/4 + mu/16
// for any (a, b, mu) satisfying the per-step inequality universally.
struct LemmaInstance {
    double lhs = 0.0;      // a*e^2 - b*e_beta^2
    double progress = 0.0; // KL progress of the single update
    bool violated = false; // lhs > progress (beyond tolerance)
};

struct LemmaReport {
    LemmaInstance corner_instance;  // y = yhat1 = Y, yhat2 = 0, beta = 1, lambda = lambda_plus
    LemmaInstance midpoint_instance; // yhat1 = Y, y = yhat2 = 0, beta = 1, lambda = 1/2
    double mu_lower_bound = 0.0; // a / (lambda_plus*(1-lambda_plus))
    double b_lower_bound = 0.0;  // a/4 + mu/16, what the instances actually force
    // The alternative reading without the factor a, a/4 + 1/(16*q); reported
    // alongside but not asserted.
    double b_lower_bound_alt = 0.0;
    bool mu_necessary_ok = false; // mu >= mu_lower_bound
    bool b_necessary_ok = false;  // b >= b_lower_bound
    bool consistent = false;      // neither instance violated
};

LemmaReport lemma_necessity_check(double a, double b, double mu, double lambda_plus,
                                  double y_bound);

} // namespace cmix
