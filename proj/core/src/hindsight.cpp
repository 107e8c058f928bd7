#include "cmix/hindsight.hpp"

#include <algorithm>
#include <stdexcept>

namespace cmix {

double accumulated_loss(std::span<const double> ys, std::span<const double> yhats) {
    if (ys.size() != yhats.size() || ys.empty())
        throw std::invalid_argument("accumulated_loss: sequences must be equal-length and non-empty");
    double loss = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        const double e = ys[i] - yhats[i];
        loss += e * e;
    }
    return loss;
}

double convex_loss(std::span<const double> ys, std::span<const double> yhat1s,
                   std::span<const double> yhat2s, double beta) {
    if (ys.size() != yhat1s.size() || ys.size() != yhat2s.size() || ys.empty())
        throw std::invalid_argument("convex_loss: sequences must be equal-length and non-empty");
    double loss = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        const double e = ys[i] - (beta * yhat1s[i] + (1.0 - beta) * yhat2s[i]);
        loss += e * e;
    }
    return loss;
}

HindsightResult best_convex_weight(std::span<const double> ys,
                                   std::span<const double> yhat1s,
                                   std::span<const double> yhat2s) {
    if (ys.size() != yhat1s.size() || ys.size() != yhat2s.size() || ys.empty())
        throw std::invalid_argument("best_convex_weight: sequences must be equal-length and non-empty");

    // L_n(beta) is quadratic in beta with curvature sum d^2, d = yhat1 - yhat2.
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        const double d = yhat1s[i] - yhat2s[i];
        num += (ys[i] - yhat2s[i]) * d;
        den += d * d;
    }

    HindsightResult result;
    result.n = static_cast<std::int64_t>(ys.size());
    result.beta_star = den == 0.0 ? 0.5 : std::clamp(num / den, 0.0, 1.0);
    result.loss_best_convex = convex_loss(ys, yhat1s, yhat2s, result.beta_star);
    return result;
}

} // namespace cmix
