#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>
#include <vector>

#include "cmix/bounds.hpp"
#include "cmix/mixture.hpp"
#include "cmix/signals.hpp"
#include "test_rng.hpp"

using namespace cmix;

namespace {

MixtureState state_with_lambda(double lambda) {
    return MixtureState{logit(lambda), lambda, 0};
}

// Executes one mixture step and audits it against the given comparator.
struct SteppedAudit {
    MixtureState before;
    MixtureState after;
    SampleRecord rec;
    StepAudit audit;
};

SteppedAudit step_and_audit(double lambda, double y, double yhat1, double yhat2, double beta,
                            const TheoremConstants& consts) {
    MixtureConfig cfg;
    cfg.y_bound = consts.y_bound;
    cfg.lambda_plus = consts.lambda_plus;
    cfg.learning_rate = consts.mu;
    cfg.initial_lambda = std::clamp(lambda, cfg.lambda_plus, 1.0 - cfg.lambda_plus);

    SteppedAudit out;
    out.before = state_with_lambda(cfg.initial_lambda);
    out.rec.t = 1;
    out.rec.y = y;
    out.rec.yhat1 = yhat1;
    out.rec.yhat2 = yhat2;
    out.rec.yhat = combine(out.before, yhat1, yhat2);
    out.rec.e = y - out.rec.yhat;
    out.after = update_rho(out.before, cfg, out.rec).state;
    out.audit = audit_step(out.before, out.after, out.rec, beta, consts);
    return out;
}

// Independent route to the KL progress, straight from the two weight ratios.
double progress_oracle(double beta, double lam_before, double lam_after) {
    double p = 0.0;
    if (beta > 0.0) p += beta * std::log(lam_after / lam_before);
    if (beta < 1.0) p += (1.0 - beta) * std::log((1.0 - lam_after) / (1.0 - lam_before));
    return p;
}

} // namespace

TEST_CASE("derive_constants reference values at epsilon=1, Y=1, lambda_plus=0.25") {
    const TheoremConstants c = derive_constants(1.0, 1.0, 0.25);
    CHECK(c.z == doctest::Approx(1.0 / 7.0).epsilon(1e-14));
    CHECK(c.a == doctest::Approx(16.0 / 49.0).epsilon(1e-14));
    CHECK(c.b == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(c.s == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(c.mu == doctest::Approx(64.0 / 21.0).epsilon(1e-14));
    CHECK(c.a * c.s == doctest::Approx((1.0 - c.z * c.z) / 4.0).epsilon(1e-14));
    CHECK(c.regret_slope == doctest::Approx(c.b / c.a).epsilon(1e-14));
    CHECK(c.regret_offset == doctest::Approx(std::log(2.0) / c.a).epsilon(1e-14));
}

TEST_CASE("derive_constants at epsilon=0.5, Y=1, lambda_plus=0.1") {
    const TheoremConstants c = derive_constants(0.5, 1.0, 0.1);
    CHECK(c.z == doctest::Approx(0.64 / 1.36).epsilon(1e-14));
    CHECK(c.mu == doctest::Approx(2.0 + 2.0 * 0.64 / 1.36).epsilon(1e-14));
}

TEST_CASE("z vanishes as lambda_plus approaches 1/2") {
    CHECK(std::abs(derive_constants(1.0, 1.0, 0.499999).z) < 1e-5);
}

TEST_CASE("derive_constants cross identities on random inputs") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
        const double eps = std::exp(test_uniform(rng, std::log(0.01), std::log(100.0)));
        const double Y = test_uniform(rng, 0.1, 10.0);
        const double lp = test_uniform(rng, 0.01, 0.49);
        const TheoremConstants c = derive_constants(eps, Y, lp);
        CHECK(c.a * c.s == doctest::Approx((1.0 - c.z * c.z) / 4.0).epsilon(1e-12));
        const double mu_root = (2.0 + 2.0 * std::sqrt(1.0 - 4.0 * c.a * c.s)) / c.s;
        CHECK(c.mu == doctest::Approx(mu_root).epsilon(1e-12));
        CHECK(c.z >= 0.0);
        CHECK(c.z < 1.0);
    }
}

TEST_CASE("derive_constants rejects out-of-range inputs") {
    CHECK_THROWS_AS(derive_constants(0.0, 1.0, 0.25), std::invalid_argument);
    CHECK_THROWS_AS(derive_constants(1.0, -1.0, 0.25), std::invalid_argument);
    CHECK_THROWS_AS(derive_constants(1.0, 1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(derive_constants(1.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("kl_divergence known values") {
    CHECK(kl_divergence({0.3, 0.7}, {0.3, 0.7}) == doctest::Approx(0.0));
    CHECK(kl_divergence({1.0, 0.0}, {0.5, 0.5}) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(kl_divergence({0.5, 0.5}, {0.25, 0.75}) ==
          doctest::Approx(0.14384103622589046).epsilon(1e-14));
    CHECK(std::isinf(kl_divergence({1.0, 0.0}, {0.0, 1.0})));
}

TEST_CASE("kl_divergence is nonnegative and zero iff equal") {
    for (double u0 = 0.0; u0 <= 1.0 + 1e-12; u0 += 0.1) {
        for (double w0 = 0.05; w0 <= 0.95 + 1e-12; w0 += 0.05) {
            const double d = kl_divergence({u0, 1.0 - u0}, {w0, 1.0 - w0});
            CHECK(d >= -1e-15);
            if (std::abs(u0 - w0) > 1e-9) CHECK(d > 0.0);
        }
    }
}

TEST_CASE("audit_step with zero error") {
    const TheoremConstants c = derive_constants(1.0, 1.0, 0.25);
    const SteppedAudit sa = step_and_audit(0.5, 0.0, 0.5, -0.5, 0.8, c);
    CHECK(sa.rec.e == doctest::Approx(0.0));
    CHECK(sa.audit.zeta == doctest::Approx(1.0));
    CHECK(sa.audit.progress == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(sa.audit.lhs <= 0.0);
    CHECK(sa.audit.slack >= 0.0);
    CHECK_FALSE(sa.audit.clipped);
}

TEST_CASE("audit_step cross-checked by independent recomputation") {
    const TheoremConstants c = derive_constants(1.0, 1.0, 0.25);
    const SteppedAudit sa = step_and_audit(0.5, 1.0, 1.0, -1.0, 1.0, c);

    const double progress = progress_oracle(1.0, sa.before.lambda, sa.after.lambda);
    CHECK(sa.audit.progress == doctest::Approx(progress).epsilon(1e-12));

    const double e_beta = sa.rec.y - sa.rec.yhat1; // beta = 1
    CHECK(sa.audit.lhs ==
          doctest::Approx(c.a * sa.rec.e * sa.rec.e - c.b * e_beta * e_beta).epsilon(1e-14));
    CHECK(sa.audit.zeta ==
          doctest::Approx(std::exp(c.mu * sa.rec.e * 0.25)).epsilon(1e-13));
    CHECK(sa.audit.slack >= 0.0);
}

TEST_CASE("audit_step progress matches the zeta form") {
    // The ratio form of progress equals yhat_beta*ln(zeta) -
    // ln(lambda*zeta^yhat1 + (1-lambda)*zeta^yhat2) for unclipped steps.
    const TheoremConstants c = derive_constants(1.0, 1.0, 0.05);
    std::mt19937_64 rng(17);
    for (int i = 0; i < 2000; ++i) {
        const double lam = test_uniform(rng, 0.05, 0.95);
        const double y = test_uniform(rng, -1.0, 1.0);
        const double y1 = test_uniform(rng, -1.0, 1.0);
        const double y2 = test_uniform(rng, -1.0, 1.0);
        const double beta = test_uniform(rng);
        const SteppedAudit sa = step_and_audit(lam, y, y1, y2, beta, c);
        if (sa.audit.clipped) continue;
        const double yb = beta * y1 + (1.0 - beta) * y2;
        const double z = sa.audit.zeta;
        const double zeta_form =
            yb * std::log(z) -
            std::log(sa.before.lambda * std::pow(z, y1) +
                     (1.0 - sa.before.lambda) * std::pow(z, y2));
        CHECK(sa.audit.progress == doctest::Approx(zeta_form).epsilon(1e-10));
        CHECK(sa.audit.slack >= -1e-9);
    }
}

TEST_CASE("audit_step per-step inequality on random admissible steps") {
    std::mt19937_64 rng(19);
    for (int i = 0; i < 5000; ++i) {
        const double eps = std::exp(test_uniform(rng, std::log(0.1), std::log(10.0)));
        const double Y = test_uniform(rng, 0.5, 5.0);
        const double lp = test_uniform(rng, 0.02, 0.48);
        const TheoremConstants c = derive_constants(eps, Y, lp);
        const double lam = test_uniform(rng, lp, 1.0 - lp);
        const double y = test_uniform(rng, -Y, Y);
        const double y1 = test_uniform(rng, -Y, Y);
        const double y2 = test_uniform(rng, -Y, Y);
        const double beta = test_uniform(rng);
        const SteppedAudit sa = step_and_audit(lam, y, y1, y2, beta, c);
        if (!sa.audit.clipped) CHECK(sa.audit.slack >= -1e-9);
    }
}

TEST_CASE("audit_step rejects inconsistent states") {
    const TheoremConstants c = derive_constants(1.0, 1.0, 0.25);
    MixtureState bad{0.0, 0.9, 0};
    MixtureState ok = state_with_lambda(0.5);
    SampleRecord rec;
    rec.e = 0.1;
    CHECK_THROWS_AS(audit_step(bad, ok, rec, 0.5, c), std::runtime_error);
}

TEST_CASE("progress telescopes to the initial-minus-final divergence") {
    const TheoremConstants c = derive_constants(1.0, 1.0, 0.05);
    MixtureConfig cfg;
    cfg.lambda_plus = 0.05;
    cfg.learning_rate = c.mu;

    SignalSpec sig;
    sig.length = 5000;
    sig.seed = 23;
    const std::vector<double> ys = generate(sig);
    std::vector<double> y1(ys.size(), 0.8), y2(ys.size(), 0.2);
    // Telescoping is an identity of the ratio-form progress, so it holds
    // whether or not corner projections fire along the way.
    const RunHistory hist = run_mixture(cfg, ys, y1, y2);

    const double beta = 0.7;
    const std::array<double, 2> u{beta, 1.0 - beta};
    double total = 0.0;
    for (std::size_t i = 0; i < hist.samples.size(); ++i)
        total += audit_step(hist.states[i], hist.states[i + 1], hist.samples[i], beta, c).progress;
    const double direct =
        kl_divergence(u, {hist.states.front().lambda, 1.0 - hist.states.front().lambda}) -
        kl_divergence(u, {hist.states.back().lambda, 1.0 - hist.states.back().lambda});
    CHECK(std::abs(total - direct) < 1e-7 * static_cast<double>(hist.samples.size()));
}

TEST_CASE("verify_regret_bound on a degenerate equal-filter run") {
    const TheoremConstants c = derive_constants(1.0, 1.0, 0.25);
    MixtureConfig cfg;
    cfg.learning_rate = c.mu;
    std::vector<double> ys = {0.3, -0.8, 0.4, 0.0, 0.9};
    std::vector<double> yh(ys.size(), 0.2);
    const RunHistory hist = run_mixture(cfg, ys, yh, yh);
    const RegretReport report = verify_regret_bound(hist, 0.5, c);
    CHECK(report.max_violation <= 1e-9);
    CHECK(report.clip_events == 0);
}

TEST_CASE("verify_regret_bound on a long chaotic run") {
    const TheoremConstants c = derive_constants(1.0, 1.0, 0.25);
    MixtureConfig cfg;
    cfg.learning_rate = c.mu;

    SignalSpec sig;
    sig.length = 10000;
    sig.seed = 101;
    const std::vector<double> ys = generate(sig);
    std::vector<double> y1(ys.size()), y2(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) {
        y1[i] = i == 0 ? 0.0 : ys[i - 1]; // delayed copy
        y2[i] = 0.4;
    }
    const RunHistory hist = run_mixture(cfg, ys, y1, y2);

    // Bound must hold for any comparator beta, not just the minimizer.
    for (double beta : {0.0, 0.3, 0.5, 0.8, 1.0})
        CHECK(verify_regret_bound(hist, beta, c).max_violation <= 1e-6);
}

TEST_CASE("verify_regret_bound with a perfect first filter and adversarial second") {
    // A perfect first filter drives lambda into the upper corner, after which
    // the update is clipped every step. The guarantee only covers unclipped
    // trajectories, so the bound is checked on the prefix before the first
    // clip while the full run reports its clip count.
    const TheoremConstants c = derive_constants(1.0, 1.0, 0.25);
    MixtureConfig cfg;
    cfg.learning_rate = c.mu;
    SignalSpec sig;
    sig.kind = SignalKind::AdversarialFlip;
    sig.length = 4000;
    const std::vector<double> ys = generate(sig);
    // An exactly-opposed second filter clips the very first step; a constant
    // zero keeps several unclipped steps before lambda reaches the corner.
    std::vector<double> y2(ys.size(), 0.0);

    const RunHistory full = run_mixture(cfg, ys, ys, y2);
    CHECK(full.clip_events() > 0);
    CHECK(verify_regret_bound(full, 1.0, c).clip_events == full.clip_events());

    std::size_t first_clip = full.clipped.size();
    for (std::size_t i = 0; i < full.clipped.size(); ++i)
        if (full.clipped[i]) { first_clip = i; break; }
    REQUIRE(first_clip > 0);

    const std::vector<double> yp(ys.begin(), ys.begin() + static_cast<std::ptrdiff_t>(first_clip));
    const std::vector<double> y2p(y2.begin(), y2.begin() + static_cast<std::ptrdiff_t>(first_clip));
    const RunHistory prefix = run_mixture(cfg, yp, yp, y2p);
    REQUIRE(prefix.clip_events() == 0);
    CHECK(verify_regret_bound(prefix, 1.0, c).max_violation <= 1e-6);
}

TEST_CASE("majorant G collapses when zeta is one") {
    const TheoremConstants c = derive_constants(1.0, 1.0, 0.25);
    const double g = evaluate_majorant_G(0.7, 0.2, -0.1, 1.0, c);
    const double e = 0.7 - 0.2, eb = 0.7 + 0.1;
    CHECK(g == doctest::Approx(c.a * e * e - c.b * eb * eb).epsilon(1e-14));
}

TEST_CASE("majorant G is maximized at the stated comparator output") {
    std::mt19937_64 rng(29);
    const TheoremConstants c = derive_constants(1.0, 1.0, 0.25);
    for (int i = 0; i < 50; ++i) {
        const double y = test_uniform(rng, -1.0, 1.0);
        const double yhat = test_uniform(rng, -1.0, 1.0);
        const double k = test_uniform(rng, 0.1875, 0.25);
        const double zeta = std::exp(c.mu * (y - yhat) * k);
        const double yb_star = majorant_argmax_yhat_beta(y, zeta, c);
        const double g_star = evaluate_majorant_G(y, yhat, yb_star, zeta, c);
        for (int j = 0; j < 1000; ++j) {
            const double yb = test_uniform(rng, -1.0, 1.0);
            CHECK(g_star >= evaluate_majorant_G(y, yhat, yb, zeta, c) - 1e-12);
        }
    }
}

TEST_CASE("majorant G at its maximizer reduces to the quadratic form") {
    // With zeta = exp(mu*e*k), G(y, yhat, argmax, zeta) = e^2 * H(k) where
    // H(k) = a - mu*k + mu^2 k^2 (1/(4b) + Y^2/2).
    std::mt19937_64 rng(31);
    const TheoremConstants c = derive_constants(2.0, 1.0, 0.15);
    for (int i = 0; i < 2000; ++i) {
        const double y = test_uniform(rng, -1.0, 1.0);
        const double yhat = test_uniform(rng, -1.0, 1.0);
        const double k = test_uniform(rng, 0.15 * 0.85, 0.25);
        const double e = y - yhat;
        const double zeta = std::exp(c.mu * e * k);
        const double g = evaluate_majorant_G(y, yhat, majorant_argmax_yhat_beta(y, zeta, c),
                                             zeta, c);
        CHECK(g == doctest::Approx(e * e * quadratic_H(k, c)).epsilon(1e-9));
        CHECK(g <= 1e-12);
    }
}

TEST_CASE("quadratic roots at the reference constants") {
    const TheoremConstants c = derive_constants(1.0, 1.0, 0.25);
    const QuadraticDiagnostics diag = quadratic_diagnostics(c, 0.25);
    CHECK(diag.k1 == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(diag.k2 == doctest::Approx(0.1875).epsilon(1e-13));
    CHECK(std::abs(diag.h_at_corner) < 1e-12);
    CHECK(std::abs(diag.h_at_quarter) < 1e-12);
}

TEST_CASE("H is nonpositive across the admissible interval") {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 20; ++trial) {
        const double eps = std::exp(test_uniform(rng, std::log(0.1), std::log(10.0)));
        const double Y = test_uniform(rng, 0.5, 5.0);
        const double lp = test_uniform(rng, 0.02, 0.48);
        const TheoremConstants c = derive_constants(eps, Y, lp);
        const double lo = lp * (1.0 - lp);
        for (int j = 0; j <= 1000; ++j) {
            const double k = lo + (0.25 - lo) * static_cast<double>(j) / 1000.0;
            CHECK(quadratic_H(k, c) <= 1e-12);
        }
        const QuadraticDiagnostics diag = quadratic_diagnostics(c, lp);
        CHECK(diag.k1 >= 0.25 - 1e-12);
        CHECK(diag.k2 <= lo + 1e-12);
        // Strictly positive outside the root interval.
        CHECK(quadratic_H(diag.k2 * 0.9, c) > 0.0);
        CHECK(quadratic_H(diag.k1 * 1.1, c) > 0.0);
    }
}

TEST_CASE("halving mu loosens the upper root") {
    TheoremConstants c = derive_constants(1.0, 1.0, 0.25);
    c.mu /= 2.0;
    const QuadraticDiagnostics diag = quadratic_diagnostics(c, 0.25);
    CHECK(diag.k1 > 0.25 + 1e-6);
}

TEST_CASE("lemma instances accept the derived constants") {
    const TheoremConstants c = derive_constants(1.0, 1.0, 0.25);
    const LemmaReport report = lemma_necessity_check(c.a, c.b, c.mu, 0.25, 1.0);
    CHECK(report.consistent);
    CHECK(report.mu_lower_bound == doctest::Approx((16.0 / 49.0) / 0.1875).epsilon(1e-12));
    CHECK(report.b_lower_bound ==
          doctest::Approx(16.0 / 49.0 / 4.0 + 64.0 / 21.0 / 16.0).epsilon(1e-12));
    CHECK(report.mu_necessary_ok);
    CHECK(report.b_necessary_ok);
}

TEST_CASE("lemma detects an undersized b on the midpoint instance") {
    const TheoremConstants c = derive_constants(1.0, 1.0, 0.25);
    const LemmaReport report = lemma_necessity_check(c.a, 0.2, c.mu, 0.25, 1.0);
    CHECK(report.midpoint_instance.violated);
    CHECK_FALSE(report.consistent);
    CHECK_FALSE(report.b_necessary_ok);
}

TEST_CASE("lemma with a = 0 is trivially consistent") {
    const LemmaReport report = lemma_necessity_check(0.0, 1.0, 1.0, 0.25, 1.0);
    CHECK(report.consistent);
    CHECK(report.mu_lower_bound == doctest::Approx(0.0));
}
