#include "cmix/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cmix {

namespace {

constexpr double kStateConsistencyTol = 1e-9;
constexpr double kLemmaTol = 1e-12;

void check_state_integrity(const MixtureState& state, const char* which) {
    if (std::abs(state.lambda - sigmoid(state.rho)) > kStateConsistencyTol)
        throw std::runtime_error(std::string("audit_step: lambda/rho mismatch in ") + which +
                                 " state");
}

// Unclipped multiplicative update, the form the proof analyzes.
double unclipped_next_lambda(const MixtureState& state, double mu, const SampleRecord& rec) {
    const double m = mu * rec.e * state.lambda * (1.0 - state.lambda);
    const double p1 = m * rec.yhat1;
    const double p2 = m * rec.yhat2;
    const double pmax = std::max(p1, p2);
    const double num = state.lambda * std::exp(p1 - pmax);
    return num / (num + (1.0 - state.lambda) * std::exp(p2 - pmax));
}

} // namespace

TheoremConstants derive_constants(double epsilon, double y_bound, double lambda_plus) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw std::invalid_argument("derive_constants: epsilon must be positive");
    if (!(y_bound > 0.0) || !std::isfinite(y_bound))
        throw std::invalid_argument("derive_constants: y_bound must be positive");
    if (!(lambda_plus > 0.0 && lambda_plus < 0.5))
        throw std::invalid_argument("derive_constants: lambda_plus must be in (0, 1/2)");

    TheoremConstants c;
    c.epsilon = epsilon;
    c.y_bound = y_bound;
    c.lambda_plus = lambda_plus;

    const double q = lambda_plus * (1.0 - lambda_plus);
    c.z = (1.0 - 4.0 * q) / (1.0 + 4.0 * q);
    const double y2 = y_bound * y_bound;
    c.b = epsilon / y2;
    c.a = (1.0 - c.z * c.z) * epsilon / (y2 * (2.0 * epsilon + 1.0));
    c.s = y2 / 2.0 + 1.0 / (4.0 * c.b);

    // a is chosen so that 1 - 4*a*s = z^2 identically; computing the
    // discriminant as z^2 avoids the cancellation in 1 - 4*a*s when
    // lambda_plus is close to 1/2.
    const double mu_root = (2.0 + 2.0 * c.z) / c.s;
    const double mu_closed = (4.0 * epsilon / (2.0 * epsilon + 1.0)) * (2.0 + 2.0 * c.z) / y2;
    if (std::abs(mu_root - mu_closed) > 1e-12 * std::abs(mu_closed))
        throw std::runtime_error("derive_constants: mu cross-check failed");
    c.mu = mu_closed;

    c.regret_slope = (2.0 * epsilon + 1.0) / (1.0 - c.z * c.z);
    c.regret_offset = std::log(2.0) / c.a;
    return c;
}

double kl_divergence(const std::array<double, 2>& u, const std::array<double, 2>& w) {
    double d = 0.0;
    for (int i = 0; i < 2; ++i) {
        if (u[i] == 0.0) continue;
        if (u[i] < 0.0 || w[i] < 0.0)
            throw std::invalid_argument("kl_divergence: negative component");
        if (w[i] == 0.0) return std::numeric_limits<double>::infinity();
        d += u[i] * std::log(u[i] / w[i]);
    }
    return d;
}

StepAudit audit_step(const MixtureState& before, const MixtureState& after,
                     const SampleRecord& rec, double beta, const TheoremConstants& consts) {
    check_state_integrity(before, "before");
    check_state_integrity(after, "after");

    StepAudit audit;
    audit.t = rec.t;
    audit.zeta = std::exp(consts.mu * rec.e * before.lambda * (1.0 - before.lambda));

    const double cand = unclipped_next_lambda(before, consts.mu, rec);
    audit.clipped = std::abs(after.lambda - cand) > kStateConsistencyTol;

    const std::array<double, 2> u{beta, 1.0 - beta};
    audit.kl_before = kl_divergence(u, {before.lambda, 1.0 - before.lambda});
    audit.kl_after = kl_divergence(u, {after.lambda, 1.0 - after.lambda});
    audit.progress = audit.kl_before - audit.kl_after;

    const double e_beta = rec.y - (beta * rec.yhat1 + (1.0 - beta) * rec.yhat2);
    audit.lhs = consts.a * rec.e * rec.e - consts.b * e_beta * e_beta;
    audit.slack = audit.progress - audit.lhs;
    return audit;
}

RegretReport verify_regret_bound(const RunHistory& history, double beta_star,
                                 const TheoremConstants& consts) {
    const auto& samples = history.samples;
    if (samples.empty()) throw std::invalid_argument("verify_regret_bound: empty run");

    RegretReport report;
    report.clip_events = history.clip_events();

    const std::array<double, 2> u{beta_star, 1.0 - beta_star};
    const double offset =
        kl_divergence(u, {history.states[0].lambda, 1.0 - history.states[0].lambda}) / consts.a;
    const double slope = consts.b / consts.a;

    const std::int64_t n = static_cast<std::int64_t>(samples.size());
    const std::int64_t stride = std::max<std::int64_t>(1, n / 200);

    double loss_mix = 0.0;
    double loss_beta = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const SampleRecord& rec = samples[static_cast<std::size_t>(i)];
        loss_mix += rec.e * rec.e;
        const double eb = rec.y - (beta_star * rec.yhat1 + (1.0 - beta_star) * rec.yhat2);
        loss_beta += eb * eb;

        const double violation = loss_mix - slope * loss_beta - offset;
        report.max_violation = std::max(report.max_violation, violation);

        if ((i + 1) % stride == 0 || i + 1 == n) {
            const double nn = static_cast<double>(i + 1);
            report.prefix_ns.push_back(i + 1);
            report.normalized_gaps.push_back(loss_mix / nn - slope * loss_beta / nn);
        }
    }
    return report;
}

double evaluate_majorant_G(double y, double yhat, double yhat_beta, double zeta,
                           const TheoremConstants& consts) {
    const double lz = std::log(zeta);
    const double Y = consts.y_bound;
    const double e = y - yhat;
    const double eb = y - yhat_beta;
    return -(yhat_beta + Y) * lz + (yhat + Y) * lz + Y * Y * lz * lz / 2.0 +
           consts.a * e * e - consts.b * eb * eb;
}

double majorant_argmax_yhat_beta(double y, double zeta, const TheoremConstants& consts) {
    return y - std::log(zeta) / (2.0 * consts.b);
}

double quadratic_H(double k, const TheoremConstants& consts) {
    return k * k * consts.mu * consts.mu * consts.s - consts.mu * k + consts.a;
}

QuadraticDiagnostics quadratic_diagnostics(const TheoremConstants& consts, double lambda_plus) {
    double disc = 1.0 - 4.0 * consts.a * consts.s;
    if (disc < -1e-12) throw std::invalid_argument("quadratic_diagnostics: negative discriminant");
    disc = std::max(0.0, disc);
    const double root = std::sqrt(disc);
    QuadraticDiagnostics diag;
    diag.k1 = (1.0 + root) / (2.0 * consts.mu * consts.s);
    diag.k2 = (1.0 - root) / (2.0 * consts.mu * consts.s);
    diag.h_at_corner = quadratic_H(lambda_plus * (1.0 - lambda_plus), consts);
    diag.h_at_quarter = quadratic_H(0.25, consts);
    return diag;
}

namespace {

// Evaluates one single-step instance of the per-step inequality with
// comparator beta = 1 and the given starting lambda.
LemmaInstance eval_lemma_instance(double a, double b, double mu, double lambda0, double y,
                                  double yhat1, double yhat2) {
    MixtureState state{logit(lambda0), lambda0, 0};
    SampleRecord rec;
    rec.t = 1;
    rec.y = y;
    rec.yhat1 = yhat1;
    rec.yhat2 = yhat2;
    rec.yhat = lambda0 * yhat1 + (1.0 - lambda0) * yhat2;
    rec.e = y - rec.yhat;

    const double next = unclipped_next_lambda(state, mu, rec);
    LemmaInstance inst;
    inst.progress = std::log(next / lambda0); // d([1,0], w(t)) - d([1,0], w(t+1))
    const double e_beta = y - yhat1;          // beta = 1
    inst.lhs = a * rec.e * rec.e - b * e_beta * e_beta;
    inst.violated = inst.lhs > inst.progress + kLemmaTol;
    return inst;
}

} // namespace

LemmaReport lemma_necessity_check(double a, double b, double mu, double lambda_plus,
                                  double y_bound) {
    if (a < 0.0 || !(b > 0.0) || !(mu > 0.0))
        throw std::invalid_argument("lemma_necessity_check: a must be >= 0, b and mu positive");
    if (!(lambda_plus > 0.0 && lambda_plus < 0.5))
        throw std::invalid_argument("lemma_necessity_check: lambda_plus must be in (0, 1/2)");
    if (!(y_bound > 0.0))
        throw std::invalid_argument("lemma_necessity_check: y_bound must be positive");

    LemmaReport report;
    const double Y = y_bound;
    report.corner_instance = eval_lemma_instance(a, b, mu, lambda_plus, Y, Y, 0.0);
    report.midpoint_instance = eval_lemma_instance(a, b, mu, 0.5, 0.0, Y, 0.0);

    const double q = lambda_plus * (1.0 - lambda_plus);
    report.mu_lower_bound = a / q;
    report.b_lower_bound = a / 4.0 + mu / 16.0;
    report.b_lower_bound_alt = a / 4.0 + 1.0 / (16.0 * q);
    report.mu_necessary_ok = mu >= report.mu_lower_bound - kLemmaTol;
    report.b_necessary_ok = b >= report.b_lower_bound - kLemmaTol;
    report.consistent = !report.corner_instance.violated && !report.midpoint_instance.violated;
    return report;
}

} // namespace cmix
