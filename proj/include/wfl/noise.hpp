#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "wfl/common.hpp"
#include "wfl/spectral.hpp"

namespace wfl {

// Counter-based Gaussian noise.  Every draw is a pure function of
// (seed, tag, path, step, node, component), so replays are bitwise
// reproducible regardless of evaluation order and independent streams are
// obtained by varying any key coordinate.  No generator state is shared
// between paths or threads.

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_key(std::uint64_t seed, std::uint64_t tag, std::uint64_t path,
                              std::uint64_t step, std::uint64_t node, std::uint64_t component) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ tag);
    h = mix64(h ^ path);
    h = mix64(h ^ step);
    h = mix64(h ^ node);
    h = mix64(h ^ component);
    return h;
}

// Uniform in the open interval (0,1): 53 mantissa bits, offset by half an ulp
// so 0 and 1 are unreachable (safe inside log / Box-Muller).
inline double uniform_open(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1p-53;
}

// Standard normal draw addressed by key; Box-Muller on two hashed words.
inline double normal_at(std::uint64_t seed, std::uint64_t tag, std::uint64_t path,
                        std::uint64_t step, std::uint64_t node, std::uint64_t component) {
    const double u1 = uniform_open(hash_key(seed, tag, path, step, node, 2 * component));
    const double u2 = uniform_open(hash_key(seed, tag, path, step, node, 2 * component + 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

// Stream tags keep the independent noise families apart even when they share
// a seed and a path index.
namespace noise_tag {
inline constexpr std::uint64_t common = 0;         // sheet shared across particles
inline constexpr std::uint64_t idiosyncratic = 1;  // per-particle extra noise
inline constexpr std::uint64_t coalescing = 2;     // driving the sticky system
inline constexpr std::uint64_t sampling = 3;       // initial conditions, scrambles
}  // namespace noise_tag

struct NoiseStream {
    std::uint64_t seed = 0;
    std::uint64_t tag = noise_tag::common;
    std::uint64_t path_index = 0;
    std::uint64_t step = 0;     // advanced once per sampled increment
    bool antithetic = false;    // negate every draw (variance-reduction pairs)
};

// One time-step of the complex Gaussian sheet on the wavenumber grid: each
// component is N(0, dk * dt), independent across nodes and between the
// cosine and sine channels.
struct SheetIncrement {
    std::vector<double> dw_re;
    std::vector<double> dw_im;
    double dt = 0.0;
};

inline SheetIncrement sample_increment(NoiseStream& stream, const SpectralDecay& decay,
                                       double dt) {
    if (!(dt >= 0.0)) throw config_error("sample_increment: dt must be >= 0");
    const std::size_t n = decay.node_count();
    SheetIncrement inc;
    inc.dt = dt;
    inc.dw_re.assign(n, 0.0);
    inc.dw_im.assign(n, 0.0);
    if (dt > 0.0 && n > 0) {
        const double scale = (stream.antithetic ? -1.0 : 1.0) * std::sqrt(decay.dk() * dt);
        for (std::size_t j = 0; j < n; ++j) {
            inc.dw_re[j] = scale * normal_at(stream.seed, stream.tag, stream.path_index,
                                             stream.step, j, 0);
            inc.dw_im[j] = scale * normal_at(stream.seed, stream.tag, stream.path_index,
                                             stream.step, j, 1);
        }
    }
    ++stream.step;
    return inc;
}

// Single scalar Gaussian increment N(0, dt) from the same keyed family
// (node index is free for the caller; used by the coalescing system and by
// idiosyncratic per-particle noise).
inline double sample_scalar_increment(NoiseStream& stream, std::uint64_t node, double dt) {
    if (!(dt >= 0.0)) throw config_error("sample_scalar_increment: dt must be >= 0");
    if (dt == 0.0) return 0.0;
    const double z = normal_at(stream.seed, stream.tag, stream.path_index, stream.step, node, 0);
    return (stream.antithetic ? -1.0 : 1.0) * std::sqrt(dt) * z;
}

// Martingale part of one particle's move:
//   dM(y) = m^{-1/2} * sum_j f(k_j) [cos(k_j y) dW^re_j + sin(k_j y) dW^im_j].
// Conditional on the current configuration this is Gaussian with variance
//   dt/m * sum_j f(k_j)^2 cos(k_j (y - y')) dk   against a second particle y'.
inline double apply_martingale_increment(double y, double mass, const SpectralDecay& decay,
                                         const SheetIncrement& inc) {
    if (!(mass > 0.0)) throw mass_degeneracy_error("apply_martingale_increment: mass <= 0");
    const std::size_t n = decay.node_count();
    if (inc.dw_re.size() != n || inc.dw_im.size() != n)
        throw grid_error("apply_martingale_increment: increment/grid size mismatch");
    if (n == 0) return 0.0;

    const double* f = decay.f_values().data();
    const double* k = decay.k_nodes().data();
    // March cos/sin along the evenly spaced wavenumbers by angle rotation
    // (two transcendental calls per resync block instead of two per node).
    const double cd = std::cos(decay.dk() * y);
    const double sd = std::sin(decay.dk() * y);
    double c = std::cos(k[0] * y);
    double s = std::sin(k[0] * y);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if ((j & 127u) == 0 && j > 0) {  // resync to cap rotation drift
            c = std::cos(k[j] * y);
            s = std::sin(k[j] * y);
        }
        acc += f[j] * (c * inc.dw_re[j] + s * inc.dw_im[j]);
        const double cn = c * cd - s * sd;
        s = s * cd + c * sd;
        c = cn;
    }
    return acc / std::sqrt(mass);
}

// cos(k_j y), sin(k_j y) tables on the wavenumber grid (same rotation
// recurrence); shared by the flow-derivative integrands and the
// change-of-measure accumulators.
inline void fill_trig_tables(const SpectralDecay& decay, double y, std::vector<double>& cs,
                             std::vector<double>& sn) {
    const std::size_t n = decay.node_count();
    cs.resize(n);
    sn.resize(n);
    if (n == 0) return;
    const double* k = decay.k_nodes().data();
    const double cd = std::cos(decay.dk() * y);
    const double sd = std::sin(decay.dk() * y);
    double c = std::cos(k[0] * y);
    double s = std::sin(k[0] * y);
    for (std::size_t j = 0; j < n; ++j) {
        if ((j & 127u) == 0 && j > 0) {
            c = std::cos(k[j] * y);
            s = std::sin(k[j] * y);
        }
        cs[j] = c;
        sn[j] = s;
        const double cn = c * cd - s * sd;
        s = s * cd + c * sd;
        c = cn;
    }
}

}  // namespace wfl
