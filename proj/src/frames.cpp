#include "blackstart/frames.hpp"

#include <numbers>

namespace blackstart {

namespace {
constexpr double kHalfSqrt3 = std::numbers::sqrt3 / 2.0;
}

AlphaBeta abc_to_alphabeta(const ThreePhase& x) {
    constexpr double k = 2.0 / 3.0;
    return {k * (x.a - 0.5 * x.b - 0.5 * x.c), k * kHalfSqrt3 * (x.b - x.c)};
}

ThreePhase alphabeta_to_abc(const AlphaBeta& x) {
    const double half_alpha = 0.5 * x.alpha;
    const double beta_part = kHalfSqrt3 * x.beta;
    return {x.alpha, -half_alpha + beta_part, -half_alpha - beta_part};
}

}  // namespace blackstart
