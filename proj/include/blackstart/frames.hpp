#pragma once

// Three-phase and stationary-frame vector quantities, and the Clarke
// transform pair that maps between them.

#include <cmath>

namespace blackstart {

/// Per-phase triple of one physical quantity (V, A or Wb).
struct ThreePhase {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    [[nodiscard]] constexpr double sum() const { return a + b + c; }
    [[nodiscard]] constexpr double mean() const { return (a + b + c) / 3.0; }
    [[nodiscard]] double max_abs() const {
        return std::fmax(std::fabs(a), std::fmax(std::fabs(b), std::fabs(c)));
    }
    [[nodiscard]] bool is_finite() const {
        return std::isfinite(a) && std::isfinite(b) && std::isfinite(c);
    }

    /// Removes the zero-sequence component (subtracts the per-phase mean).
    [[nodiscard]] constexpr ThreePhase without_zero_sequence() const {
        const double m = mean();
        return {a - m, b - m, c - m};
    }

    constexpr ThreePhase& operator+=(const ThreePhase& o) {
        a += o.a;
        b += o.b;
        c += o.c;
        return *this;
    }
    constexpr ThreePhase& operator-=(const ThreePhase& o) {
        a -= o.a;
        b -= o.b;
        c -= o.c;
        return *this;
    }
    constexpr ThreePhase& operator*=(double k) {
        a *= k;
        b *= k;
        c *= k;
        return *this;
    }

    friend constexpr ThreePhase operator+(ThreePhase l, const ThreePhase& r) { return l += r; }
    friend constexpr ThreePhase operator-(ThreePhase l, const ThreePhase& r) { return l -= r; }
    friend constexpr ThreePhase operator*(ThreePhase l, double k) { return l *= k; }
    friend constexpr ThreePhase operator*(double k, ThreePhase r) { return r *= k; }
    friend constexpr ThreePhase operator/(ThreePhase l, double k) { return l *= (1.0 / k); }
    friend constexpr bool operator==(const ThreePhase&, const ThreePhase&) = default;
};

/// Stationary-frame (alpha, beta) 2-vector.
struct AlphaBeta {
    double alpha = 0.0;
    double beta = 0.0;

    [[nodiscard]] double norm() const { return std::hypot(alpha, beta); }
    [[nodiscard]] bool is_finite() const { return std::isfinite(alpha) && std::isfinite(beta); }

    /// Rotates by +90 degrees (multiplication by j).
    [[nodiscard]] constexpr AlphaBeta rotated_quarter() const { return {-beta, alpha}; }

    constexpr AlphaBeta& operator+=(const AlphaBeta& o) {
        alpha += o.alpha;
        beta += o.beta;
        return *this;
    }
    constexpr AlphaBeta& operator-=(const AlphaBeta& o) {
        alpha -= o.alpha;
        beta -= o.beta;
        return *this;
    }
    constexpr AlphaBeta& operator*=(double k) {
        alpha *= k;
        beta *= k;
        return *this;
    }

    friend constexpr AlphaBeta operator+(AlphaBeta l, const AlphaBeta& r) { return l += r; }
    friend constexpr AlphaBeta operator-(AlphaBeta l, const AlphaBeta& r) { return l -= r; }
    friend constexpr AlphaBeta operator*(AlphaBeta l, double k) { return l *= k; }
    friend constexpr AlphaBeta operator*(double k, AlphaBeta r) { return r *= k; }
    friend constexpr AlphaBeta operator/(AlphaBeta l, double k) { return l *= (1.0 / k); }
    friend constexpr bool operator==(const AlphaBeta&, const AlphaBeta&) = default;
};

/// Amplitude-invariant Clarke transform. The zero-sequence component is
/// discarded, so a balanced set of peak V maps to a vector of length V.
[[nodiscard]] AlphaBeta abc_to_alphabeta(const ThreePhase& x);

/// Inverse Clarke transform with zero zero-sequence; the result sums to 0.
[[nodiscard]] ThreePhase alphabeta_to_abc(const AlphaBeta& x);

}  // namespace blackstart
