#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "wfl/common.hpp"
#include "wfl/spectral.hpp"

namespace wfl {

// Position-space grid conjugate to a wavenumber grid.  With n nodes on each
// side and dx * dk = 2*pi / n, the midpoint-rule transforms below are exactly
// unitary as linear maps (round trips reproduce the samples and the discrete
// Plancherel identity holds to rounding error), so inversion residuals
// measured on the grid are meaningless -- measure them at off-grid points.
struct FourierGrid {
    std::vector<double> x;
    double dx = 0.0;
    double center = 0.0;
};

inline FourierGrid make_conjugate_grid(const SpectralDecay& decay, double x_center) {
    const std::size_t n = decay.node_count();
    if (n == 0) throw grid_error("make_conjugate_grid: empty wavenumber grid");
    FourierGrid g;
    g.dx = two_pi / (static_cast<double>(n) * decay.dk());
    g.center = x_center;
    g.x.resize(n);
    const double half = 0.5 * static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i)
        g.x[i] = x_center + (static_cast<double>(i) - half) * g.dx;
    return g;
}

// sum_i samples[i] * exp(i * sign * w * node_i) for each output frequency w,
// scaled by `factor`.  Sample nodes must be evenly spaced; the phase marches
// by rotation with periodic resync to bound accumulated drift.
inline std::vector<std::complex<double>> dft_line(const std::vector<double>& eval_freqs,
                                                  const std::vector<double>& sample_nodes,
                                                  const std::vector<std::complex<double>>& samples,
                                                  double sign, double factor) {
    if (samples.size() != sample_nodes.size())
        throw grid_error("dft_line: sample/node size mismatch");
    std::vector<std::complex<double>> out(eval_freqs.size(), {0.0, 0.0});
    const std::size_t n = sample_nodes.size();
    if (n == 0) return out;
    const double h = n > 1 ? sample_nodes[1] - sample_nodes[0] : 0.0;
    for (std::size_t m = 0; m < eval_freqs.size(); ++m) {
        const double w = eval_freqs[m];
        const double step_angle = sign * w * h;
        const std::complex<double> rot(std::cos(step_angle), std::sin(step_angle));
        double a0 = sign * w * sample_nodes[0];
        std::complex<double> phase(std::cos(a0), std::sin(a0));
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if ((i & 127u) == 0 && i > 0) {
                const double a = sign * w * sample_nodes[i];
                phase = {std::cos(a), std::sin(a)};
            }
            acc += samples[i] * phase;
            phase *= rot;
        }
        out[m] = factor * acc;
    }
    return out;
}

// Symmetric-convention pair: forward kernel e^{-ikx} with weight dx/sqrt(2 pi),
// inverse kernel e^{+ikx} with weight dk/sqrt(2 pi).
inline std::vector<std::complex<double>> transform_to_wavenumber(
    const FourierGrid& grid, const std::vector<std::complex<double>>& samples,
    const SpectralDecay& decay) {
    return dft_line(decay.k_nodes(), grid.x, samples, -1.0, grid.dx * inv_sqrt_two_pi);
}

inline std::vector<std::complex<double>> transform_to_wavenumber(
    const FourierGrid& grid, const std::vector<double>& samples, const SpectralDecay& decay) {
    std::vector<std::complex<double>> c(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) c[i] = samples[i];
    return transform_to_wavenumber(grid, c, decay);
}

inline std::vector<std::complex<double>> transform_to_position(
    const FourierGrid& grid, const std::vector<std::complex<double>>& spectrum,
    const SpectralDecay& decay) {
    return dft_line(grid.x, decay.k_nodes(), spectrum, +1.0, decay.dk() * inv_sqrt_two_pi);
}

// Inverse transform evaluated at one (possibly off-grid) point.
inline std::complex<double> inverse_transform_at(const SpectralDecay& decay,
                                                 const std::vector<std::complex<double>>& spectrum,
                                                 double x) {
    if (spectrum.size() != decay.node_count())
        throw grid_error("inverse_transform_at: spectrum/grid size mismatch");
    std::complex<double> acc(0.0, 0.0);
    const auto& k = decay.k_nodes();
    for (std::size_t j = 0; j < spectrum.size(); ++j) {
        const double a = k[j] * x;
        acc += spectrum[j] * std::complex<double>(std::cos(a), std::sin(a));
    }
    return decay.dk() * inv_sqrt_two_pi * acc;
}

// sum |v_i|^2 * weight -- discrete L^2 norm squared for Plancherel checks.
inline double l2_norm_sq(const std::vector<std::complex<double>>& v, double weight) {
    double acc = 0.0;
    for (const auto& z : v) acc += std::norm(z);
    return acc * weight;
}

}  // namespace wfl
