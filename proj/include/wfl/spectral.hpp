#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "wfl/common.hpp"

namespace wfl {

// Spectral weight f_alpha(k) = (1 + k^2)^(-alpha/2) together with its
// truncated midpoint k-grid.  Node j sits at k_j = -K + (j + 1/2)*dk, so the
// grid covers [-K, K] without a node at k = 0.  Objects are immutable after
// construction and safe to share between concurrent paths.
class SpectralDecay {
  public:
    // Degenerate "no noise" grid: zero nodes, every spectral sum is empty.
    static SpectralDecay none() { return SpectralDecay(); }

    SpectralDecay(double alpha, double k_max, double dk) {
        if (!(alpha > 0.0)) throw config_error("SpectralDecay: alpha must be > 0");
        if (!(k_max > 0.0) || !(dk > 0.0))
            throw config_error("SpectralDecay: k_max and dk must be > 0");
        const double ratio = k_max / dk;
        const double rounded = std::round(ratio);
        if (std::abs(ratio - rounded) > 1e-9 * ratio || rounded < 1.0)
            throw config_error("SpectralDecay: k_max/dk must be a positive integer");
        alpha_ = alpha;
        k_max_ = k_max;
        dk_ = dk;
        const std::size_t half = static_cast<std::size_t>(rounded);
        const std::size_t n = 2 * half;
        k_.resize(n);
        f_.resize(n);
        fsq_.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            k_[j] = -k_max + (static_cast<double>(j) + 0.5) * dk;
            f_[j] = eval_f(k_[j]);
            fsq_[j] = f_[j] * f_[j];
        }
    }

    double alpha() const { return alpha_; }
    double k_max() const { return k_max_; }
    double dk() const { return dk_; }
    std::size_t node_count() const { return k_.size(); }
    bool empty() const { return k_.empty(); }

    const std::vector<double>& k_nodes() const { return k_; }
    const std::vector<double>& f_values() const { return f_; }
    const std::vector<double>& f_squared_values() const { return fsq_; }

    // f_alpha(k); even, strictly positive, bounded by 1.
    double eval_f(double k) const {
        return std::pow(1.0 + k * k, -0.5 * alpha_);
    }

    // Discrete squared L2 norm sum_j f(k_j)^2 dk; the variance rate of one
    // unit-mass particle per unit time.
    double norm_sq() const {
        double s = 0.0;
        for (double v : fsq_) s += v;
        return s * dk_;
    }

    // Second spectral moment sum_j k_j^2 f(k_j)^2 dk; sets the Lipschitz scale
    // of the diffusion coefficient, hence the step-size heuristic below.
    double second_moment() const {
        double s = 0.0;
        for (std::size_t j = 0; j < k_.size(); ++j) s += k_[j] * k_[j] * fsq_[j];
        return s * dk_;
    }

    // Explicit Euler stability heuristic: dt <= 0.1 / sum k^2 f^2 dk.
    double stable_dt_bound() const {
        const double m2 = second_moment();
        return m2 > 0.0 ? 0.1 / m2 : std::numeric_limits<double>::infinity();
    }

  private:
    SpectralDecay() = default;

    double alpha_ = 0.0;
    double k_max_ = 0.0;
    double dk_ = 1.0;
    std::vector<double> k_, f_, fsq_;
};

// Smallest K (to within 1%) with the two-sided tail of f^2 below
// tol * ||f||^2.  Default tol 1e-6 matches the library-wide truncation rule.
inline double recommended_k_max(double alpha, double tol = 1e-6) {
    if (!(alpha > 0.5)) throw config_error("recommended_k_max: need alpha > 1/2");
    auto tail_over_norm = [alpha](double kcut) {
        // Two-sided tail of (1+k^2)^(-alpha) by midpoint quadrature on a
        // substitution grid, against the norm computed the same way.
        auto integral = [alpha](double lo, double hi, int steps) {
            double s = 0.0;
            const double h = (hi - lo) / steps;
            for (int i = 0; i < steps; ++i) {
                const double k = lo + (i + 0.5) * h;
                s += std::pow(1.0 + k * k, -alpha);
            }
            return s * h;
        };
        // f^2 <= k^(-2 alpha) for k >= 1 gives a closed tail bound past the
        // numeric window.
        const double window_hi = std::max(10.0 * kcut, 1e3);
        const double tail = 2.0 * integral(kcut, window_hi, 20000) +
                            2.0 * std::pow(window_hi, 1.0 - 2.0 * alpha) /
                                (2.0 * alpha - 1.0);
        const double norm = integral(-window_hi, window_hi, 40000) +
                            2.0 * std::pow(window_hi, 1.0 - 2.0 * alpha) /
                                (2.0 * alpha - 1.0);
        return tail / norm;
    };
    double lo = 0.5, hi = 1.0;
    while (tail_over_norm(hi) >= tol) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e7) throw config_error("recommended_k_max: no K below 1e7");
    }
    for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        (tail_over_norm(mid) < tol ? hi : lo) = mid;
    }
    return hi;
}

// Cosine transform of f^2 at lag x as the raw midpoint Riemann sum
// sum_j f(k_j)^2 cos(k_j x) dk over [-K, K].  This is the covariance kernel of
// the particle increments and deliberately carries no 1/sqrt(2*pi): the same
// dk-sum appears in the increment covariance identity.  The symmetric
// convention lives in fourier.hpp; the two are reconciled in tests by
// raw(x) = sqrt(2*pi) * Re F_sym(f^2)(x).
inline double fourier_f_squared(const SpectralDecay& decay, double x) {
    const auto& k = decay.k_nodes();
    const auto& fsq = decay.f_squared_values();
    double s = 0.0;
    for (std::size_t j = 0; j < k.size(); ++j) s += fsq[j] * std::cos(k[j] * x);
    return s * decay.dk();
}

}  // namespace wfl
