#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "wfl/common.hpp"
#include "wfl/drift.hpp"
#include "wfl/dynamics.hpp"
#include "wfl/noise.hpp"
#include "wfl/state.hpp"

namespace wfl {

// A candidate conditional law: one histogram per grid time, conditioned on
// the frozen common-noise path the ensemble below replays.
struct MeasureFlow {
    std::vector<double> times;
    std::vector<HistogramMeasure> hist;
};

inline MeasureFlow make_constant_flow(const std::vector<double>& times,
                                      const HistogramMeasure& h) {
    MeasureFlow f;
    f.times = times;
    f.hist.assign(times.size(), h);
    return f;
}

// J interacting copies sharing one common sheet; each copy carries its own
// idiosyncratic Brownian stream and an initial draw.  Initial positions are
// stratified through the quantile function (copy j sits at the (j+1/2)/J
// quantile), which removes initial-condition sampling noise entirely.
struct EnsembleState {
    std::vector<double> z;
    std::uint64_t seed = 0;
    std::uint64_t idio_tag = noise_tag::idiosyncratic;
};

inline EnsembleState make_ensemble(std::size_t J,
                                   const std::function<double(double)>& initial_quantile,
                                   std::uint64_t seed, std::uint64_t idio_salt) {
    if (J < 1) throw config_error("make_ensemble: need J >= 1");
    if (!initial_quantile) throw config_error("make_ensemble: missing initial quantile");
    EnsembleState e;
    e.seed = seed;
    // salts select independent idiosyncratic families (noise-floor reruns)
    e.idio_tag = noise_tag::idiosyncratic | (idio_salt << 32);
    e.z.resize(J);
    for (std::size_t j = 0; j < J; ++j)
        e.z[j] = initial_quantile((static_cast<double>(j) + 0.5) / static_cast<double>(J));
    return e;
}

// The conditional-law map: freeze the common path, drive J copies with the
// drift read from the candidate flow nu, return the per-time cross-copy
// histogram.  With the common increments pre-sampled the output is a pure
// function of (increment values, seed, drift, nu) -- the stream overload
// below merely samples them first.
inline MeasureFlow phi_map_with_increments(const MeasureFlow& nu,
                                           const std::vector<SheetIncrement>& common_incs,
                                           const DriftSpec& drift, const SimConfig& cfg,
                                           std::size_t J,
                                           const std::function<double(double)>& initial_quantile,
                                           std::uint64_t idio_salt = 0,
                                           std::vector<std::string>* warnings = nullptr) {
    cfg.validate();
    const std::size_t steps = cfg.step_count();
    if (nu.times.size() != steps + 1 || nu.hist.size() != steps + 1)
        throw grid_error("phi_map: candidate flow not on the config time grid");
    if (common_incs.size() != steps)
        throw grid_error("phi_map: common increment count != step count");
    if (J < 100 && warnings != nullptr)
        warnings->push_back("phi_map: ensemble size J < 100, histogram noise will dominate");

    const HistogramLayout layout = nu.hist.front().layout;
    const double dt = cfg.effective_dt();
    EnsembleState ens = make_ensemble(J, initial_quantile, cfg.seed, idio_salt);

    MeasureFlow out;
    out.times = nu.times;
    out.hist.reserve(steps + 1);
    out.hist.push_back(histogram_from_samples(ens.z, layout));

    std::vector<double> idio(J);
    for (std::size_t s = 0; s < steps; ++s) {
        for (std::size_t j = 0; j < J; ++j)
            idio[j] = std::sqrt(dt) * normal_at(ens.seed, ens.idio_tag, j, s, 0, 0);
        ens.z = step_interpolation(ens.z, nu.hist[s], drift, cfg.decay, common_incs[s], idio);
        out.hist.push_back(histogram_from_samples(ens.z, layout));
    }
    return out;
}

inline MeasureFlow phi_map(const MeasureFlow& nu, NoiseStream common, const DriftSpec& drift,
                           const SimConfig& cfg, std::size_t J,
                           const std::function<double(double)>& initial_quantile,
                           std::uint64_t idio_salt = 0,
                           std::vector<std::string>* warnings = nullptr) {
    const std::size_t steps = cfg.step_count();
    const double dt = cfg.effective_dt();
    std::vector<SheetIncrement> incs;
    incs.reserve(steps);
    for (std::size_t s = 0; s < steps; ++s)
        incs.push_back(sample_increment(common, cfg.decay, dt));
    return phi_map_with_increments(nu, incs, drift, cfg, J, initial_quantile, idio_salt,
                                   warnings);
}

struct PicardDiagnostics {
    std::vector<double> sup_tv_gaps;  // sup over grid times of d_TV, per iteration
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<std::string> warnings;
};

inline double sup_tv_gap(const MeasureFlow& a, const MeasureFlow& b) {
    if (a.hist.size() != b.hist.size()) throw grid_error("sup_tv_gap: flow length mismatch");
    double sup = 0.0;
    for (std::size_t t = 0; t < a.hist.size(); ++t)
        sup = std::max(sup, tv_distance(a.hist[t], b.hist[t]));
    return sup;
}

// Fixed-point iteration nu <- phi(nu).  Every iteration replays the same
// common and idiosyncratic draws (the map is deterministic given the noise),
// so successive flows differ only through the drift's measure argument.
inline std::pair<MeasureFlow, PicardDiagnostics> picard_iterate(
    const MeasureFlow& initial, const NoiseStream& common, const DriftSpec& drift,
    const SimConfig& cfg, std::size_t J, const std::function<double(double)>& initial_quantile,
    double tol, std::size_t max_iterations = 20) {
    if (!(tol > 0.0)) throw config_error("picard_iterate: need tol > 0");
    PicardDiagnostics diag;
    MeasureFlow nu = initial;
    for (std::size_t it = 0; it < max_iterations; ++it) {
        MeasureFlow next =
            phi_map(nu, common, drift, cfg, J, initial_quantile, 0, &diag.warnings);
        const double gap = sup_tv_gap(next, nu);
        diag.sup_tv_gaps.push_back(gap);
        nu = std::move(next);
        ++diag.iterations;
        if (gap < tol) {
            diag.converged = true;
            break;
        }
    }
    return {std::move(nu), std::move(diag)};
}

// Relative entropy sum_b p ln(p/q) with 0 ln 0 = 0; +infinity when p charges
// a bin q does not.  Pinsker in the sum-|p-q| convention used throughout:
// (tv/2)^2 <= entropy/2.
inline double entropy_estimate(const HistogramMeasure& p, const HistogramMeasure& q) {
    if (!(p.layout == q.layout)) throw grid_error("entropy_estimate: layout mismatch");
    double acc = 0.0;
    for (std::size_t b = 0; b < p.probs.size(); ++b) {
        if (p.probs[b] == 0.0) continue;
        if (q.probs[b] == 0.0) return std::numeric_limits<double>::infinity();
        acc += p.probs[b] * std::log(p.probs[b] / q.probs[b]);
    }
    return acc;
}

}  // namespace wfl
