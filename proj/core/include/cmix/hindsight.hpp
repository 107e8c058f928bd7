#pragma once

#include <cstdint>
#include <span>

namespace cmix {

// Best fixed convex combination of the two filter outputs, computable only
// after the whole sequence has been observed.
struct HindsightResult {
    double beta_star = 0.5;        // argmin over [0,1]
    double loss_mixture = 0.0;     // L_n(yhat, y); filled by the caller
    double loss_best_convex = 0.0; // L_n at beta_star
    std::int64_t n = 0;
};

// Sum of squared errors between aligned sequences. Throws on length mismatch
// or empty input.
double accumulated_loss(std::span<const double> ys, std::span<const double> yhats);

// Closed-form minimizer of the quadratic beta -> L_n(yhat_beta, y), projected
// onto [0,1]. When yhat1 == yhat2 everywhere any beta is optimal and 1/2 is
// returned by convention. loss_mixture is left at zero.
HindsightResult best_convex_weight(std::span<const double> ys,
                                   std::span<const double> yhat1s,
                                   std::span<const double> yhat2s);

// Loss of the fixed convex combination beta*yhat1 + (1-beta)*yhat2.
double convex_loss(std::span<const double> ys, std::span<const double> yhat1s,
                   std::span<const double> yhat2s, double beta);

} // namespace cmix
