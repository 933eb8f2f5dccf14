#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "wfl/common.hpp"
#include "wfl/noise.hpp"
#include "wfl/state.hpp"

namespace wfl {

// Coalescing reference system: n labels u_i = (i+1/2)/n partitioned into
// ordered clusters of contiguous labels.  Each cluster diffuses with
// variance dt / mass (heavier clusters move less) and clusters merge -- and
// stay merged -- when their order is violated.  Distinct labels are
// independent until they collide, in contrast with the spectral model whose
// covariance decays smoothly with particle distance but never vanishes.
struct CoalescingSystem {
    struct Cluster {
        std::size_t lo;  // first label index in the cluster
        std::size_t hi;  // last label index (inclusive)
        double pos;
        double mass;  // (hi - lo + 1)/n, so cluster masses always sum to 1
    };

    std::size_t n = 0;
    double time = 0.0;
    std::vector<Cluster> clusters;          // strictly ordered by pos
    std::vector<std::vector<double>> tau;   // pairwise collision times, +inf if apart

    std::size_t cluster_of(std::size_t label) const {
        for (std::size_t c = 0; c < clusters.size(); ++c)
            if (label >= clusters[c].lo && label <= clusters[c].hi) return c;
        throw domain_error("CoalescingSystem: label out of range");
    }
};

namespace detail {

inline void record_collision(CoalescingSystem& sys, const CoalescingSystem::Cluster& a,
                             const CoalescingSystem::Cluster& b, double t) {
    for (std::size_t u = a.lo; u <= a.hi; ++u)
        for (std::size_t v = b.lo; v <= b.hi; ++v) {
            sys.tau[u][v] = t;
            sys.tau[v][u] = t;
        }
}

}  // namespace detail

inline CoalescingSystem make_coalescing_system(const QuantileState& initial) {
    const std::size_t n = initial.size();
    if (n < 1) throw config_error("make_coalescing_system: empty initial state");
    if (!is_nondecreasing(initial))
        throw config_error("make_coalescing_system: initial positions must be nondecreasing");
    CoalescingSystem sys;
    sys.n = n;
    sys.tau.assign(n, std::vector<double>(n, std::numeric_limits<double>::infinity()));
    for (std::size_t i = 0; i < n; ++i) sys.tau[i][i] = 0.0;
    const double unit = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        // labels starting at identical positions coalesce at time zero
        if (!sys.clusters.empty() && sys.clusters.back().pos == initial.values[i]) {
            CoalescingSystem::Cluster& c = sys.clusters.back();
            detail::record_collision(sys, c, {i, i, initial.values[i], unit}, 0.0);
            c.hi = i;
            c.mass += unit;
        } else {
            sys.clusters.push_back({i, i, initial.values[i], unit});
        }
    }
    return sys;
}

// One Euler step: every cluster takes an independent N(0, dt/mass) move
// (keyed by its leftmost label, so the keying survives merges
// deterministically), then order violations are resolved by merging,
// left-to-right, position set to the mass-weighted mean.  Simultaneous
// multi-cluster pile-ups therefore resolve leftmost-first.
inline CoalescingSystem step_arratia(const CoalescingSystem& sys, double dt,
                                     NoiseStream& stream) {
    if (!(dt > 0.0)) throw config_error("step_arratia: need dt > 0");
    CoalescingSystem out = sys;
    out.time = sys.time + dt;

    for (auto& c : out.clusters) {
        const double z = normal_at(stream.seed, stream.tag, stream.path_index, stream.step,
                                   c.lo, 0);
        c.pos += (stream.antithetic ? -1.0 : 1.0) * std::sqrt(dt / c.mass) * z;
    }
    ++stream.step;

    std::vector<CoalescingSystem::Cluster> merged;
    merged.reserve(out.clusters.size());
    for (const auto& c : out.clusters) {
        CoalescingSystem::Cluster cur = c;
        while (!merged.empty() && cur.pos <= merged.back().pos) {
            const CoalescingSystem::Cluster& left = merged.back();
            detail::record_collision(out, left, cur, out.time);
            cur.pos = (left.mass * left.pos + cur.mass * cur.pos) / (left.mass + cur.mass);
            cur.mass += left.mass;
            cur.lo = left.lo;
            merged.pop_back();
        }
        merged.push_back(cur);
    }
    out.clusters = std::move(merged);
    return out;
}

struct ArratiaTrajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> positions;  // [time][label]
    std::vector<std::vector<double>> masses;     // [time][label]: the label's cluster mass
    std::vector<std::vector<double>> tau;        // final collision-time matrix
};

inline ArratiaTrajectory run_arratia(const QuantileState& initial, double T, double dt,
                                     std::uint64_t seed, std::uint64_t path_index = 0) {
    if (!(T >= 0.0)) throw config_error("run_arratia: need T >= 0");
    if (!(dt > 0.0)) throw config_error("run_arratia: need dt > 0");
    CoalescingSystem sys = make_coalescing_system(initial);
    NoiseStream stream{seed, noise_tag::coalescing, path_index, 0, false};

    const auto steps = T > 0.0 ? static_cast<std::size_t>(std::llround(T / dt)) : 0;
    const double h = steps > 0 ? T / static_cast<double>(steps) : dt;

    ArratiaTrajectory traj;
    auto record = [&](const CoalescingSystem& s) {
        traj.times.push_back(s.time);
        std::vector<double> pos(s.n), mass(s.n);
        for (const auto& c : s.clusters)
            for (std::size_t u = c.lo; u <= c.hi; ++u) {
                pos[u] = c.pos;
                mass[u] = c.mass;
            }
        traj.positions.push_back(std::move(pos));
        traj.masses.push_back(std::move(mass));
    };

    record(sys);
    for (std::size_t s = 0; s < steps; ++s) {
        sys = step_arratia(sys, h, stream);
        record(sys);
    }
    traj.tau = sys.tau;
    return traj;
}

// Accumulated cross-variation of labels u and v: zero until their collision,
// then dt / (shared cluster mass) per step,
//   <y(u), y(v)>_T = int_0^T 1{s >= tau_{u,v}} / m_s(u) ds.
// For u = v this is the label's own quadratic variation.
inline double covariation_profile(const ArratiaTrajectory& traj, std::size_t u, std::size_t v) {
    if (traj.positions.empty()) throw config_error("covariation_profile: empty trajectory");
    const std::size_t n = traj.positions.front().size();
    if (u >= n || v >= n) throw domain_error("covariation_profile: label out of range");
    const double tau = traj.tau[u][v];
    double acc = 0.0;
    for (std::size_t s = 0; s + 1 < traj.times.size(); ++s) {
        if (traj.times[s] >= tau)
            acc += (traj.times[s + 1] - traj.times[s]) / traj.masses[s][u];
    }
    return acc;
}

}  // namespace wfl
