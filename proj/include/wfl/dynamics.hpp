#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wfl/common.hpp"
#include "wfl/drift.hpp"
#include "wfl/mass_kernel.hpp"
#include "wfl/noise.hpp"
#include "wfl/spectral.hpp"
#include "wfl/state.hpp"

namespace wfl {

// What to do when a step leaves the monotone cone: nothing, project back
// (pool-adjacent-violators), or abort the path.  The continuous flow is
// monotone; the Euler chain is only approximately so, which makes the repair
// a declared modeling choice rather than a hidden fix.
enum class MonotoneRepair { off, project, reject };

struct SimConfig {
    double T = 1.0;
    double dt = 1e-2;
    std::size_t n = 2;  // quantile nodes / particles
    SpectralDecay decay = SpectralDecay::none();
    MassKernel kernel = MassKernel::constant();
    std::optional<double> truncation_M;  // stop once spread reaches M; phi frozen past M
    MonotoneRepair repair = MonotoneRepair::project;
    std::uint64_t seed = 0;
    std::size_t paths = 1;

    void validate() const {
        if (!(T >= 0.0)) throw config_error("SimConfig: need T >= 0");
        if (!(dt > 0.0)) throw config_error("SimConfig: need dt > 0");
        if (T > 0.0 && !(dt <= T)) throw config_error("SimConfig: need dt <= T");
        if (n < 2) throw config_error("SimConfig: need n >= 2");
        if (truncation_M && !(*truncation_M > 0.0))
            throw config_error("SimConfig: truncation level must be > 0");
        if (paths < 1) throw config_error("SimConfig: need paths >= 1");
    }

    std::size_t step_count() const {
        if (T <= 0.0) return 0;
        const auto s = static_cast<std::size_t>(std::llround(T / dt));
        return s > 0 ? s : 1;
    }

    // dt snapped so step_count * dt == T exactly.
    double effective_dt() const {
        const std::size_t s = step_count();
        return s == 0 ? dt : T / static_cast<double>(s);
    }

    MassKernel effective_kernel() const {
        return truncation_M ? kernel.truncated(*truncation_M) : kernel;
    }
};

// Running change-of-measure record: log of the exponential weight and the
// accumulated squared perturbation norm.  exp(int_h_sq / 2) must stay finite
// for the reweighting to be a proper density change; `novikov_bound` is the
// declared ceiling on int_h_sq and `exceeded` flags (without aborting) any
// breach.
struct GirsanovLedger {
    double log_weight = 0.0;
    double int_h_sq = 0.0;
    double novikov_bound = std::numeric_limits<double>::infinity();
    bool exceeded = false;

    double weight() const { return std::exp(log_weight); }
};

struct Trajectory {
    std::vector<double> times;
    std::vector<QuantileState> states;
    std::optional<double> exit_time;  // first grid time with spread >= truncation_M
    std::optional<GirsanovLedger> girsanov;

    const QuantileState& final_state() const { return states.back(); }
};

namespace detail {

inline void check_finite(const QuantileState& s, const char* where) {
    for (double v : s.values)
        if (!std::isfinite(v)) throw blowup_error(std::string(where) + ": non-finite state");
}

inline QuantileState apply_repair(QuantileState s, MonotoneRepair repair) {
    switch (repair) {
        case MonotoneRepair::off:
            return s;
        case MonotoneRepair::project:
            return is_nondecreasing(s) ? s : isotonic_project(s);
        case MonotoneRepair::reject: {
            const auto rep = monotonicity_report(s);
            if (rep.violation_count > 0)
                throw domain_error("step_euler: monotonicity violated (repair = reject)");
            return s;
        }
    }
    throw config_error("step_euler: unknown repair mode");
}

}  // namespace detail

// One explicit Euler step of
//   dy(u) = b(y(u), mu) dt + m(u)^{-1/2} sum_j f_j [cos(k_j y) dW^re
//                                                 + sin(k_j y) dW^im],
// every particle reading the same sheet increment (the noise is common).
// Pass drift = nullptr for the driftless flow.  Uses cfg.kernel as given;
// apply truncation via cfg.effective_kernel() at the call site (run() does).
inline QuantileState step_euler(const QuantileState& y, const SimConfig& cfg,
                                const DriftSpec* drift, NoiseStream& stream) {
    const std::vector<double> m = mass_function(y, cfg.kernel);
    const SheetIncrement inc = sample_increment(stream, cfg.decay, cfg.dt);

    QuantileState out = y;
    if (drift != nullptr && !drift->is_zero()) {
        const auto b = drift->bind(y);
        for (std::size_t i = 0; i < y.size(); ++i) out.values[i] += b(y.values[i]) * cfg.dt;
    }
    for (std::size_t i = 0; i < y.size(); ++i)
        out.values[i] += apply_martingale_increment(y.values[i], m[i], cfg.decay, inc);

    detail::check_finite(out, "step_euler");
    return detail::apply_repair(std::move(out), cfg.repair);
}

// Full path on the uniform time grid.  With a truncation level M the kernel
// is frozen past M and the path is stopped (state held constant) from the
// first grid time at which the spread reaches M.
inline Trajectory run(const SimConfig& cfg, const QuantileState& initial,
                      const DriftSpec* drift = nullptr, std::uint64_t path_index = 0) {
    cfg.validate();
    if (initial.size() != cfg.n) throw config_error("run: initial size != cfg.n");
    if (!is_strictly_increasing(initial))
        throw config_error("run: initial quantile values must be strictly increasing");
    if (cfg.truncation_M && !(*cfg.truncation_M > spread(initial)))
        throw config_error("run: truncation level must exceed the initial spread");

    SimConfig step_cfg = cfg;
    step_cfg.dt = cfg.effective_dt();
    step_cfg.kernel = cfg.effective_kernel();

    NoiseStream stream{cfg.seed, noise_tag::common, path_index, 0, false};

    Trajectory traj;
    const std::size_t steps = cfg.step_count();
    traj.times.reserve(steps + 1);
    traj.states.reserve(steps + 1);
    traj.times.push_back(0.0);
    traj.states.push_back(initial);

    for (std::size_t s = 1; s <= steps; ++s) {
        const double t = static_cast<double>(s) * step_cfg.dt;
        traj.times.push_back(t);
        if (traj.exit_time) {
            traj.states.push_back(traj.states.back());  // stopped
            continue;
        }
        QuantileState next = step_euler(traj.states.back(), step_cfg, drift, stream);
        if (cfg.truncation_M && spread(next) >= *cfg.truncation_M) traj.exit_time = t;
        traj.states.push_back(std::move(next));
    }
    return traj;
}

// Pathwise derivative z_t(u) = d y_t(u) / du of the driftless flow, in the
// exact exponential form
//   z_t = g'(u) exp( int phi^re f dW^re + int phi^im f dW^im
//                    - (1/2) int ((phi^re)^2 + (phi^im)^2) f^2 dk ds ),
//   phi^re(u,k) = -k sin(k y)/sqrt(m) - cos(k y) D / (2 m^{3/2}),
//   phi^im(u,k) =  k cos(k y)/sqrt(m) - sin(k y) D / (2 m^{3/2}),
// with D(u) the pairwise phi'-average; the integrands differentiate the
// martingale coefficient in y and through the mass.  The base path advances
// on the same increments, so z is the coupled linearization of exactly that
// path.  Repair is forced off: the closed form differentiates the raw chain.
struct DerivativeFlow {
    std::vector<double> times;
    std::vector<QuantileState> states;        // coupled base path
    std::vector<std::vector<double>> z;       // z[t][i]
    std::vector<double> stochastic_integral;  // per node: int phi f dW, final
    std::vector<double> bracket_integral;     // per node: int (phi^2) f^2 dk ds, final
};

inline DerivativeFlow run_derivative_flow(const SimConfig& cfg, const QuantileState& initial,
                                          const std::vector<double>& g_prime,
                                          NoiseStream stream) {
    cfg.validate();
    if (initial.size() != cfg.n) throw config_error("run_derivative_flow: initial size != cfg.n");
    if (g_prime.size() != cfg.n)
        throw config_error("run_derivative_flow: g_prime size != cfg.n");
    for (double v : g_prime)
        if (!(v > 0.0)) throw config_error("run_derivative_flow: g_prime must be > 0");
    if (!is_strictly_increasing(initial))
        throw config_error("run_derivative_flow: initial must be strictly increasing");

    const MassKernel kern = cfg.effective_kernel();
    const SpectralDecay& decay = cfg.decay;
    const double dt = cfg.effective_dt();
    const std::size_t steps = cfg.step_count();
    const std::size_t n = cfg.n;
    const std::size_t nk = decay.node_count();
    const auto& kv = decay.k_nodes();
    const auto& fv = decay.f_values();
    const auto& fsq = decay.f_squared_values();

    DerivativeFlow flow;
    flow.times.push_back(0.0);
    flow.states.push_back(initial);
    flow.z.push_back(g_prime);
    flow.stochastic_integral.assign(n, 0.0);
    flow.bracket_integral.assign(n, 0.0);

    QuantileState y = initial;
    std::vector<double> m, d;

    for (std::size_t s = 1; s <= steps; ++s) {
        mass_with_derivative(y, kern, m, d);
        const SheetIncrement inc = sample_increment(stream, decay, dt);

        QuantileState next = y;
        std::vector<double> zs(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (!(m[i] > 0.0)) throw mass_degeneracy_error("run_derivative_flow: mass <= 0");
            const double yi = y.values[i];
            const double inv_sqrt_m = 1.0 / std::sqrt(m[i]);
            const double mass_slope = 0.5 * d[i] / (m[i] * std::sqrt(m[i]));
            // single rotation pass shared by the state update and the
            // derivative integrands
            const double cd = std::cos(decay.dk() * yi);
            const double sd = std::sin(decay.dk() * yi);
            double c = nk > 0 ? std::cos(kv[0] * yi) : 1.0;
            double sn = nk > 0 ? std::sin(kv[0] * yi) : 0.0;
            double dy = 0.0, dexp = 0.0, dbr = 0.0;
            for (std::size_t j = 0; j < nk; ++j) {
                if ((j & 127u) == 0 && j > 0) {
                    c = std::cos(kv[j] * yi);
                    sn = std::sin(kv[j] * yi);
                }
                dy += fv[j] * (c * inc.dw_re[j] + sn * inc.dw_im[j]);
                const double pre = -kv[j] * sn * inv_sqrt_m - c * mass_slope;
                const double pim = kv[j] * c * inv_sqrt_m - sn * mass_slope;
                dexp += fv[j] * (pre * inc.dw_re[j] + pim * inc.dw_im[j]);
                dbr += (pre * pre + pim * pim) * fsq[j];
                const double cn = c * cd - sn * sd;
                sn = sn * cd + c * sd;
                c = cn;
            }
            next.values[i] = yi + dy * inv_sqrt_m;
            flow.stochastic_integral[i] += dexp;
            flow.bracket_integral[i] += dbr * decay.dk() * dt;
            zs[i] = g_prime[i] * std::exp(flow.stochastic_integral[i] -
                                          0.5 * flow.bracket_integral[i]);
            if (!std::isfinite(next.values[i]) || !std::isfinite(zs[i]))
                throw blowup_error("run_derivative_flow: non-finite value");
        }
        y = std::move(next);
        flow.times.push_back(static_cast<double>(s) * dt);
        flow.states.push_back(y);
        flow.z.push_back(std::move(zs));
    }
    return flow;
}

// One Euler step of the constant-mass interpolation model: every copy feels
// the same sheet increment plus its own idiosyncratic Gaussian, and the
// drift reads the externally supplied candidate law, not the ensemble.
inline std::vector<double> step_interpolation(const std::vector<double>& z,
                                              const HistogramMeasure& mu_hist,
                                              const DriftSpec& drift, const SpectralDecay& decay,
                                              const SheetIncrement& common_inc,
                                              const std::vector<double>& idio_inc) {
    if (idio_inc.size() != z.size())
        throw grid_error("step_interpolation: idiosyncratic increment size mismatch");
    const double dt = common_inc.dt;
    const auto b = drift.bind(mu_hist);
    std::vector<double> out(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) {
        out[j] = z[j] + b(z[j]) * dt +
                 apply_martingale_increment(z[j], 1.0, decay, common_inc) + idio_inc[j];
        if (!std::isfinite(out[j])) throw blowup_error("step_interpolation: non-finite value");
    }
    return out;
}

}  // namespace wfl
