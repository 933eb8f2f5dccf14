#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "wfl/common.hpp"
#include "wfl/mass_kernel.hpp"
#include "wfl/stats.hpp"

namespace wfl {

// A measure represented by its quantile function sampled at the midpoints
// u_i = (i + 1/2)/n of a uniform grid on (0,1); the measure is the image of
// Lebesgue measure under u -> y(u), i.e. n equally weighted atoms.  Monotone
// (sorted) values correspond to an actual quantile function; the dynamics can
// leave that cone between repairs, so the invariant is tracked, not enforced.
struct QuantileState {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
};

inline double u_node(std::size_t i, std::size_t n) {
    return (static_cast<double>(i) + 0.5) / static_cast<double>(n);
}

inline QuantileState state_from_quantile_function(std::size_t n,
                                                  const std::function<double(double)>& g) {
    if (n < 1) throw config_error("state_from_quantile_function: need n >= 1");
    QuantileState s;
    s.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.values[i] = g(u_node(i, n));
    return s;
}

inline QuantileState make_uniform_state(std::size_t n, double lo, double hi) {
    if (!(lo < hi)) throw config_error("make_uniform_state: need lo < hi");
    return state_from_quantile_function(n, [=](double u) { return lo + u * (hi - lo); });
}

inline QuantileState make_gaussian_state(std::size_t n, double mean, double sd) {
    if (!(sd > 0.0)) throw config_error("make_gaussian_state: need sd > 0");
    return state_from_quantile_function(
        n, [=](double u) { return mean + sd * normal_quantile(u); });
}

inline double spread(const QuantileState& s) {
    if (s.values.empty()) return 0.0;
    const auto [lo, hi] = std::minmax_element(s.values.begin(), s.values.end());
    return *hi - *lo;
}

inline bool is_nondecreasing(const QuantileState& s) {
    for (std::size_t i = 0; i + 1 < s.size(); ++i)
        if (s.values[i + 1] < s.values[i]) return false;
    return true;
}

inline bool is_strictly_increasing(const QuantileState& s) {
    for (std::size_t i = 0; i + 1 < s.size(); ++i)
        if (!(s.values[i + 1] > s.values[i])) return false;
    return true;
}

// m_i = (1/n) sum_j phi(y_i - y_j): how much total mass particle i feels.
// phi is even, so the pair sum is done once.  Every m_i lies in
// [phi(spread), phi(0)] and the constant kernel gives exactly 1.
inline std::vector<double> mass_function(const QuantileState& s, const MassKernel& kernel) {
    const std::size_t n = s.size();
    if (n == 0) throw config_error("mass_function: empty state");
    if (kernel.is_constant()) return std::vector<double>(n, 1.0);
    std::vector<double> m(n, kernel.eval(0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double p = kernel.eval(s.values[i] - s.values[j]);
            m[i] += p;
            m[j] += p;
        }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (double& v : m) v *= inv_n;
    return m;
}

// D_i = (1/n) sum_j phi'(y_i - y_j), the configuration-gradient of the mass
// felt at particle i (phi' is odd, so the diagonal contributes nothing).
inline std::vector<double> mass_derivative(const QuantileState& s, const MassKernel& kernel) {
    const std::size_t n = s.size();
    if (n == 0) throw config_error("mass_derivative: empty state");
    std::vector<double> d(n, 0.0);
    if (!kernel.is_constant()) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double p = kernel.derivative(s.values[i] - s.values[j]);
                d[i] += p;
                d[j] -= p;  // phi' odd
            }
        const double inv_n = 1.0 / static_cast<double>(n);
        for (double& v : d) v *= inv_n;
    }
    return d;
}

// mass_function and mass_derivative in a single pairwise pass (one kernel
// evaluation per pair); used by the derivative flow where both are needed
// every step.
inline void mass_with_derivative(const QuantileState& s, const MassKernel& kernel,
                                 std::vector<double>& m, std::vector<double>& d) {
    const std::size_t n = s.size();
    if (n == 0) throw config_error("mass_with_derivative: empty state");
    m.assign(n, kernel.eval(0.0));
    d.assign(n, 0.0);
    if (!kernel.is_constant()) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                double p, dp;
                kernel.eval_both(s.values[i] - s.values[j], p, dp);
                m[i] += p;
                m[j] += p;
                d[i] += dp;
                d[j] -= dp;  // phi' odd
            }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (double& v : m) v *= inv_n;
    for (double& v : d) v *= inv_n;
}

// Quadratic transport distance between two measures on the same quantile
// grid: sqrt((1/n) sum (a_i - b_i)^2).  For sorted values this is exactly the
// 2-Wasserstein distance of the two empirical measures.
inline double w2_distance(const QuantileState& a, const QuantileState& b) {
    if (a.size() != b.size()) throw grid_error("w2_distance: size mismatch");
    if (a.size() == 0) throw config_error("w2_distance: empty state");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += sqr(a.values[i] - b.values[i]);
    return std::sqrt(acc / static_cast<double>(a.size()));
}

struct MonotonicityReport {
    std::size_t violation_count = 0;  // adjacent pairs with y_{i+1} < y_i
    double max_violation = 0.0;       // largest drop y_i - y_{i+1} over those pairs
};

inline MonotonicityReport monotonicity_report(const QuantileState& s) {
    MonotonicityReport r;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const double drop = s.values[i] - s.values[i + 1];
        if (drop > 0.0) {
            ++r.violation_count;
            r.max_violation = std::max(r.max_violation, drop);
        }
    }
    return r;
}

// Euclidean projection onto the nondecreasing cone (pool-adjacent-violators,
// equal weights).  Pooled blocks keep their sums, so grid averages of the
// state are unchanged; idempotent; O(n).
inline QuantileState isotonic_project(const QuantileState& s) {
    const std::size_t n = s.size();
    QuantileState out;
    out.values.resize(n);
    if (n == 0) return out;

    struct Block {
        double sum;
        std::size_t count;
    };
    std::vector<Block> stack;
    stack.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Block b{s.values[i], 1};
        while (!stack.empty() &&
               stack.back().sum * static_cast<double>(b.count) >=
                   b.sum * static_cast<double>(stack.back().count)) {
            b.sum += stack.back().sum;
            b.count += stack.back().count;
            stack.pop_back();
        }
        stack.push_back(b);
    }
    std::size_t i = 0;
    for (const Block& b : stack) {
        const double level = b.sum / static_cast<double>(b.count);
        for (std::size_t c = 0; c < b.count; ++c) out.values[i++] = level;
    }
    return out;
}

// Piecewise-constant density recovered from a strictly increasing quantile
// state: each of the n-1 consecutive gaps carries probability 1/(n-1)
// (conditioning the n-atom measure on its range), so cell density is
// (1/(n-1)) / gap and the cdf ramps 0 -> 1 linearly in the node index.
struct DensityEstimate {
    std::vector<double> nodes;      // n sorted support points
    std::vector<double> densities;  // n-1 per-cell values
    std::vector<double> cdf;        // n values, cdf[0] = 0, cdf[n-1] = 1

    double eval_pdf(double x) const {
        if (nodes.size() < 2 || x < nodes.front() || x >= nodes.back()) return 0.0;
        const auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
        const std::size_t cell = static_cast<std::size_t>(it - nodes.begin()) - 1;
        return densities[std::min(cell, densities.size() - 1)];
    }

    double eval_cdf(double x) const {
        if (nodes.empty() || x <= nodes.front()) return 0.0;
        if (x >= nodes.back()) return 1.0;
        const auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
        const std::size_t cell = static_cast<std::size_t>(it - nodes.begin()) - 1;
        const double w = (x - nodes[cell]) / (nodes[cell + 1] - nodes[cell]);
        return cdf[cell] + w * (cdf[cell + 1] - cdf[cell]);
    }
};

inline DensityEstimate density_from_quantile(const QuantileState& s) {
    const std::size_t n = s.size();
    if (n < 2) throw config_error("density_from_quantile: need >= 2 nodes");
    if (!is_strictly_increasing(s))
        throw domain_error("density_from_quantile: values must be strictly increasing");
    DensityEstimate d;
    d.nodes = s.values;
    d.densities.resize(n - 1);
    d.cdf.resize(n);
    const double cell_mass = 1.0 / static_cast<double>(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        d.densities[i] = cell_mass / (s.values[i + 1] - s.values[i]);
        d.cdf[i] = static_cast<double>(i) * cell_mass;
    }
    d.cdf[n - 1] = 1.0;
    return d;
}

// Fixed binning shared by the measures being compared; comparisons require
// identical layouts.
struct HistogramLayout {
    double x_min;
    double x_max;
    std::size_t bins;

    HistogramLayout(double lo, double hi, std::size_t b) : x_min(lo), x_max(hi), bins(b) {
        if (!(lo < hi)) throw config_error("HistogramLayout: need x_min < x_max");
        if (b < 1) throw config_error("HistogramLayout: need >= 1 bin");
    }

    double width() const { return (x_max - x_min) / static_cast<double>(bins); }
    double midpoint(std::size_t b) const {
        return x_min + (static_cast<double>(b) + 0.5) * width();
    }
    std::size_t clamp_bin(double x) const {
        if (x <= x_min) return 0;
        if (x >= x_max) return bins - 1;
        const auto b = static_cast<std::size_t>((x - x_min) / width());
        return std::min(b, bins - 1);
    }
    bool operator==(const HistogramLayout& o) const {
        return x_min == o.x_min && x_max == o.x_max && bins == o.bins;
    }
};

struct HistogramMeasure {
    HistogramLayout layout;
    std::vector<double> probs;  // one weight per bin, summing to 1

    explicit HistogramMeasure(const HistogramLayout& l)
        : layout(l), probs(l.bins, 0.0) {}
};

// Out-of-range samples are clamped into the first/last bin so the result is
// always a probability vector over the layout.
inline HistogramMeasure histogram_from_samples(const std::vector<double>& samples,
                                               const HistogramLayout& layout) {
    if (samples.empty()) throw config_error("histogram_from_samples: no samples");
    HistogramMeasure h(layout);
    const double w = 1.0 / static_cast<double>(samples.size());
    for (double x : samples) {
        if (std::isnan(x)) throw domain_error("histogram_from_samples: NaN sample");
        h.probs[layout.clamp_bin(x)] += w;
    }
    return h;
}

inline HistogramMeasure histogram_from_state(const QuantileState& s,
                                             const HistogramLayout& layout) {
    return histogram_from_samples(s.values, layout);
}

// Total variation distance with the sup-over-sets normalization doubled:
//   d_TV(p, q) = sum_b |p_b - q_b|  in [0, 2].
// The optimal-coupling mismatch probability is d_TV / 2.
inline double tv_distance(const HistogramMeasure& p, const HistogramMeasure& q) {
    if (!(p.layout == q.layout)) throw grid_error("tv_distance: layout mismatch");
    double acc = 0.0;
    for (std::size_t b = 0; b < p.probs.size(); ++b) acc += std::abs(p.probs[b] - q.probs[b]);
    return acc;
}

// Expectation of a(x) under the binned measure (midpoint evaluation).
inline double histogram_mean(const HistogramMeasure& h,
                             const std::function<double(double)>& a) {
    double acc = 0.0;
    for (std::size_t b = 0; b < h.probs.size(); ++b)
        if (h.probs[b] != 0.0) acc += h.probs[b] * a(h.layout.midpoint(b));
    return acc;
}

}  // namespace wfl
