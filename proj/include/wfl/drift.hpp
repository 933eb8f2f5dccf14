#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "wfl/common.hpp"
#include "wfl/spectral.hpp"
#include "wfl/state.hpp"

namespace wfl {

// Measure moments used by the drift families.  Variances are population
// variances (the measure is the population).

inline double measure_mean(const HistogramMeasure& mu) {
    return histogram_mean(mu, [](double y) { return y; });
}

inline double measure_variance(const HistogramMeasure& mu) {
    const double m = measure_mean(mu);
    return histogram_mean(mu, [&](double y) { return sqr(y - m); });
}

inline double state_mean(const QuantileState& s) { return mean_of(s.values); }

inline double state_variance(const QuantileState& s) {
    const double m = state_mean(s);
    double acc = 0.0;
    for (double y : s.values) acc += sqr(y - m);
    return s.values.empty() ? 0.0 : acc / static_cast<double>(s.values.size());
}

// ---------------------------------------------------------------------------
// Spectral drift family: B(x, mu) = sum_j <k_j>^{-eta} [cos(k_j x) lr_j(mu)
// + sin(k_j x) li_j(mu)] dk with |lambda| <= Lambda and lambda
// delta-Hoelder in total variation.  The wavenumber grid is shared with the
// driving noise's decay so the drift can later be absorbed into the noise by
// a change of measure.
struct SpectralDriftSpec {
    double eta = 0.0;    // smoothness exponent of x -> B(x, mu)
    double delta = 1.0;  // Hoelder exponent of mu -> lambda(k, mu) in TV
    double alpha = 0.0;  // paired noise-kernel decay
    SpectralDecay decay = SpectralDecay::none();
    std::vector<double> lambda_env;  // Lambda(k_j) >= 0 on the grid
    std::function<double(const HistogramMeasure&)> u_re;  // |u| <= 1, delta-Hoelder
    std::function<double(const HistogramMeasure&)> u_im;  // optional, same class
    std::vector<HistogramMeasure> family;  // inf-convolution candidate measures
    std::optional<HistogramLayout> layout;  // binning for quantile-state queries
    bool regularized = false;  // true: lambda = Lambda * u^{eps(k)}
    std::vector<double> epsilon;  // per-node inf-convolution strength (regularized)
    double theta = 0.0;           // (alpha - eta)/delta (regularized)
};

inline void validate(const SpectralDriftSpec& s) {
    if (!(s.delta > 0.0 && s.delta <= 1.0))
        throw config_error("SpectralDriftSpec: need delta in (0, 1]");
    if (!(s.eta > 1.5 * (1.0 - s.delta)))
        throw config_error("SpectralDriftSpec: need eta > (3/2)(1 - delta)");
    if (!(s.alpha > 1.5))
        throw config_error("SpectralDriftSpec: need alpha > 3/2");
    // Relative slack keeps exact-boundary parameter sets (alpha == eta / (1 - delta)
    // in exact arithmetic, e.g. 3 == 1 / (1 - 2/3)) from being rejected over the
    // rounding of (1 - delta).
    if (!(s.alpha <= s.eta / (1.0 - s.delta) * (1.0 + 1e-12) || s.delta == 1.0))
        throw config_error("SpectralDriftSpec: need alpha <= eta / (1 - delta)");
    if (s.lambda_env.size() != s.decay.node_count())
        throw grid_error("SpectralDriftSpec: envelope/grid size mismatch");
    for (double v : s.lambda_env)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw config_error("SpectralDriftSpec: envelope must be finite and >= 0");
    if (!s.u_re) throw config_error("SpectralDriftSpec: missing u_re functional");
}

// min over nu in {mu} + family of  u(nu) + d_TV(mu, nu)^2 / (8 eps).
// The quadratic transport penalty comes from the mismatch probability of the
// maximal coupling, P[X != Y] = d_TV/2; including the anchor mu guarantees
// the result never exceeds u(mu).  `delta` is the Hoelder class of u -- it
// shapes the approximation guarantees, not the formula, and is kept in the
// signature as documentation of that contract.
inline double holder_infconv(const std::function<double(const HistogramMeasure&)>& u,
                             const std::vector<HistogramMeasure>& family,
                             const HistogramMeasure& mu, double eps,
                             [[maybe_unused]] double delta) {
    if (!u) throw config_error("holder_infconv: missing functional");
    if (!(eps > 0.0)) throw config_error("holder_infconv: need eps > 0");
    if (family.empty()) throw config_error("holder_infconv: empty candidate family");
    double best = u(mu);  // anchor: d_TV(mu, mu) = 0
    const double penalty_scale = 1.0 / (8.0 * eps);
    for (const HistogramMeasure& nu : family) {
        const double d = tv_distance(mu, nu);
        best = std::min(best, u(nu) + penalty_scale * d * d);
    }
    return best;
}

// theta = (alpha - eta)/delta and eps(k) = <k>^{-theta(2-delta)}: the
// per-wavenumber smoothing strength that trades Hoelder roughness of lambda
// for decay, keeping the inverted noise drift square-summable when the
// kernel decays faster than the drift's smoothness alone would allow.
struct RegularizationParams {
    double theta = 0.0;
    std::vector<double> epsilon;
};

inline RegularizationParams make_regularization(const SpectralDriftSpec& spec) {
    if (!(spec.alpha >= spec.eta))
        throw config_error(
            "make_regularization: requires alpha >= eta (no smoothing needed below)");
    RegularizationParams p;
    p.theta = (spec.alpha - spec.eta) / spec.delta;
    const auto& k = spec.decay.k_nodes();
    p.epsilon.resize(k.size());
    const double expo = -p.theta * (2.0 - spec.delta);
    for (std::size_t j = 0; j < k.size(); ++j)
        p.epsilon[j] = std::pow(1.0 + k[j] * k[j], 0.5 * expo);  // <k>^{-theta(2-delta)}
    return p;
}

inline SpectralDriftSpec regularize_lambda(const SpectralDriftSpec& spec) {
    validate(spec);
    if (spec.family.empty())
        throw config_error("regularize_lambda: spec has no candidate family");
    RegularizationParams p = make_regularization(spec);
    SpectralDriftSpec out = spec;
    out.regularized = true;
    out.theta = p.theta;
    out.epsilon = std::move(p.epsilon);
    return out;
}

// lambda^re(k_j, mu) for all j: Lambda_j * u(mu), or the inf-convolution
// smoothed Lambda_j * u^{eps_j}(mu) after regularization.
inline std::vector<double> lambda_values(const SpectralDriftSpec& spec,
                                         const std::function<double(const HistogramMeasure&)>& u,
                                         const HistogramMeasure& mu) {
    const std::size_t n = spec.decay.node_count();
    std::vector<double> out(n, 0.0);
    if (!u) return out;
    if (!spec.regularized) {
        const double v = u(mu);
        for (std::size_t j = 0; j < n; ++j) out[j] = spec.lambda_env[j] * v;
    } else {
        for (std::size_t j = 0; j < n; ++j)
            out[j] = spec.lambda_env[j] *
                     holder_infconv(u, spec.family, mu, spec.epsilon[j], spec.delta);
    }
    return out;
}

inline std::vector<double> lambda_re_values(const SpectralDriftSpec& spec,
                                            const HistogramMeasure& mu) {
    return lambda_values(spec, spec.u_re, mu);
}

inline std::vector<double> lambda_im_values(const SpectralDriftSpec& spec,
                                            const HistogramMeasure& mu) {
    return lambda_values(spec, spec.u_im, mu);
}

// Evaluate the synthesized drift at x given precomputed lambda tables.
inline double synthesize_from_lambda(const SpectralDecay& decay, double eta,
                                     const std::vector<double>& lr,
                                     const std::vector<double>& li, double x) {
    const std::size_t n = decay.node_count();
    if (lr.size() != n || li.size() != n)
        throw grid_error("synthesize_from_lambda: table/grid size mismatch");
    if (n == 0) return 0.0;
    const auto& k = decay.k_nodes();
    const double cd = std::cos(decay.dk() * x);
    const double sd = std::sin(decay.dk() * x);
    double c = std::cos(k[0] * x);
    double s = std::sin(k[0] * x);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if ((j & 127u) == 0 && j > 0) {
            c = std::cos(k[j] * x);
            s = std::sin(k[j] * x);
        }
        const double w = std::pow(1.0 + k[j] * k[j], -0.5 * eta);  // <k>^{-eta}
        acc += w * (c * lr[j] + s * li[j]);
        const double cn = c * cd - s * sd;
        s = s * cd + c * sd;
        c = cn;
    }
    return acc * decay.dk();
}

inline double synthesize_spectral_b(const SpectralDriftSpec& spec, double x,
                                    const HistogramMeasure& mu) {
    return synthesize_from_lambda(spec.decay, spec.eta, lambda_re_values(spec, mu),
                                  lambda_im_values(spec, mu), x);
}

// sum_j <k_j>^{-eta} |k_j|^i Lambda_j dk: bounds the i-th x-derivative of the
// synthesized drift uniformly in the measure.
inline double spectral_derivative_bound(const SpectralDriftSpec& spec, int i) {
    const auto& k = spec.decay.k_nodes();
    double acc = 0.0;
    for (std::size_t j = 0; j < k.size(); ++j)
        acc += std::pow(1.0 + k[j] * k[j], -0.5 * spec.eta) *
               std::pow(std::abs(k[j]), static_cast<double>(i)) * spec.lambda_env[j];
    return acc * spec.decay.dk();
}

// ---------------------------------------------------------------------------
// Tagged drift family b(x, mu).  Evaluation is pure; every variant works on
// both measure representations (quantile states average over particles,
// histograms over bins).
class DriftSpec {
  public:
    enum class Variant { zero, b1, b2, b3, b4, peano, spectral };

    static DriftSpec none() { return DriftSpec(Variant::zero); }

    // b(x, mu) = int a(x, y) dmu(y).  deriv_sup[i] bounds |d^i a / dx^i|;
    // tv_lipschitz is the Lipschitz constant of mu -> b in d_TV = sum|p-q|
    // (osc(a)/2 for x-independent a).  Set x_independent when a ignores x so
    // bound closures can hoist the integral.
    static DriftSpec b1(std::function<double(double, double)> a,
                        std::vector<double> deriv_sup, double tv_lipschitz,
                        bool x_independent = false) {
        DriftSpec d(Variant::b1);
        d.axy_ = std::move(a);
        d.deriv_sup_ = std::move(deriv_sup);
        d.tv_lipschitz_ = tv_lipschitz;
        d.x_independent_ = x_independent;
        d.require_bounds_nonempty();
        return d;
    }

    // b(mu) = a(mean of mu); x-independent by construction.
    static DriftSpec b2(std::function<double(double)> a, double sup_a) {
        DriftSpec d(Variant::b2);
        d.ax_ = std::move(a);
        d.deriv_sup_ = {sup_a};
        d.x_independent_ = true;
        return d;
    }

    // b(x, mu) = a(x, E_mu[psi]).
    static DriftSpec b3(std::function<double(double, double)> a,
                        std::function<double(double)> psi, std::vector<double> deriv_sup) {
        DriftSpec d(Variant::b3);
        d.axy_ = std::move(a);
        d.psi_ = std::move(psi);
        d.deriv_sup_ = std::move(deriv_sup);
        d.require_bounds_nonempty();
        return d;
    }

    // b(x, mu) = a(x) * Var(mu)^eta_hat, eta_hat < 1/2 so the sup bound
    // C_0(M) = sup|a| * M^{2 eta_hat} grows sublinearly in the support size.
    static DriftSpec b4(std::function<double(double)> a, double eta_hat,
                        std::vector<double> deriv_sup) {
        if (!(eta_hat < 0.5 && eta_hat > 0.0))
            throw config_error("DriftSpec: b4 needs eta_hat in (0, 1/2)");
        DriftSpec d(Variant::b4);
        d.ax_ = std::move(a);
        d.eta_hat_ = eta_hat;
        d.deriv_sup_ = std::move(deriv_sup);
        d.require_bounds_nonempty();
        return d;
    }

    // b(mu) = 2 sign(mean) sqrt(|mean|): square-root growth through 0, the
    // classical seed of non-unique deterministic flows.
    static DriftSpec peano() {
        DriftSpec d(Variant::peano);
        d.x_independent_ = true;
        return d;
    }

    static DriftSpec spectral(SpectralDriftSpec spec) {
        validate(spec);
        DriftSpec d(Variant::spectral);
        d.spectral_ = std::move(spec);
        return d;
    }

    Variant variant() const { return variant_; }
    bool is_zero() const { return variant_ == Variant::zero; }
    bool x_independent() const { return x_independent_; }
    double tv_lipschitz() const { return tv_lipschitz_; }
    const SpectralDriftSpec& spectral_spec() const {
        if (variant_ != Variant::spectral)
            throw config_error("DriftSpec: not a spectral drift");
        return spectral_;
    }

    // Highest x-derivative order with a declared uniform bound.  b2 and the
    // zero drift are x-independent, hence smooth to every order; the
    // spectral family inherits any order from the summable envelope.
    int order() const {
        switch (variant_) {
            case Variant::zero:
            case Variant::b2:
            case Variant::spectral:
                return std::numeric_limits<int>::max();
            default:
                return deriv_sup_.empty() ? 0 : static_cast<int>(deriv_sup_.size()) - 1;
        }
    }

    // C_i(M): a bound on |d^i/dx^i b(x, mu)| valid for every x and every mu
    // supported in an interval of length <= M.
    double derivative_bound(int i, double M) const {
        switch (variant_) {
            case Variant::zero:
                return 0.0;
            case Variant::b1:
            case Variant::b3:
                return bound_at(i);
            case Variant::b2:
                return i == 0 ? bound_at(0) : 0.0;
            case Variant::b4:
                return bound_at(i) * std::pow(M, 2.0 * eta_hat_);
            case Variant::spectral:
                return spectral_derivative_bound(spectral_, i);
            case Variant::peano:
                throw config_error(
                    "DriftSpec: no uniform derivative bound for the square-root drift");
        }
        throw config_error("DriftSpec: unknown variant");
    }

    double eval(double x, const HistogramMeasure& mu) const {
        switch (variant_) {
            case Variant::zero:
                return 0.0;
            case Variant::b1:
                return histogram_mean(mu, [&](double y) { return axy_(x, y); });
            case Variant::b2:
                return ax_(measure_mean(mu));
            case Variant::b3:
                return axy_(x, histogram_mean(mu, psi_));
            case Variant::b4:
                return ax_(x) * std::pow(measure_variance(mu), eta_hat_);
            case Variant::peano:
                return peano_value(measure_mean(mu));
            case Variant::spectral:
                return synthesize_spectral_b(spectral_, x, mu);
        }
        throw config_error("DriftSpec: unknown variant");
    }

    double eval(double x, const QuantileState& s) const {
        switch (variant_) {
            case Variant::zero:
                return 0.0;
            case Variant::b1: {
                double acc = 0.0;
                for (double y : s.values) acc += axy_(x, y);
                return s.values.empty() ? 0.0 : acc / static_cast<double>(s.values.size());
            }
            case Variant::b2:
                return ax_(state_mean(s));
            case Variant::b3: {
                double acc = 0.0;
                for (double y : s.values) acc += psi_(y);
                const double m =
                    s.values.empty() ? 0.0 : acc / static_cast<double>(s.values.size());
                return axy_(x, m);
            }
            case Variant::b4:
                return ax_(x) * std::pow(state_variance(s), eta_hat_);
            case Variant::peano:
                return peano_value(state_mean(s));
            case Variant::spectral:
                return synthesize_spectral_b(spectral_, x, to_histogram(s));
        }
        throw config_error("DriftSpec: unknown variant");
    }

    // Freeze the measure-dependent part once so per-particle evaluation is a
    // cheap function of x (scalar statistics for b2/b3/b4/peano and
    // x-independent b1; lambda tables for the spectral family).
    std::function<double(double)> bind(const HistogramMeasure& mu) const {
        switch (variant_) {
            case Variant::zero:
                return [](double) { return 0.0; };
            case Variant::b1:
                if (x_independent_) {
                    const double v = eval(0.0, mu);
                    return [v](double) { return v; };
                }
                return [this, mu](double x) { return eval(x, mu); };
            case Variant::b2:
            case Variant::peano: {
                const double v = eval(0.0, mu);
                return [v](double) { return v; };
            }
            case Variant::b3: {
                const double m = histogram_mean(mu, psi_);
                return [this, m](double x) { return axy_(x, m); };
            }
            case Variant::b4: {
                const double v = std::pow(measure_variance(mu), eta_hat_);
                return [this, v](double x) { return ax_(x) * v; };
            }
            case Variant::spectral: {
                auto lr = lambda_re_values(spectral_, mu);
                auto li = lambda_im_values(spectral_, mu);
                return [this, lr = std::move(lr), li = std::move(li)](double x) {
                    return synthesize_from_lambda(spectral_.decay, spectral_.eta, lr, li, x);
                };
            }
        }
        throw config_error("DriftSpec: unknown variant");
    }

    std::function<double(double)> bind(const QuantileState& s) const {
        if (variant_ == Variant::spectral) return bind(to_histogram(s));
        if (x_independent_ || variant_ == Variant::b2 || variant_ == Variant::peano) {
            const double v = eval(0.0, s);
            return [v](double) { return v; };
        }
        if (variant_ == Variant::zero) return [](double) { return 0.0; };
        if (variant_ == Variant::b3) {
            double acc = 0.0;
            for (double y : s.values) acc += psi_(y);
            const double m = s.values.empty() ? 0.0 : acc / static_cast<double>(s.values.size());
            return [this, m](double x) { return axy_(x, m); };
        }
        if (variant_ == Variant::b4) {
            const double v = std::pow(state_variance(s), eta_hat_);
            return [this, v](double x) { return ax_(x) * v; };
        }
        return [this, s](double x) { return eval(x, s); };  // b1, x-dependent
    }

    static double peano_value(double m) {
        return m == 0.0 ? 0.0 : 2.0 * (m > 0.0 ? 1.0 : -1.0) * std::sqrt(std::abs(m));
    }

  private:
    explicit DriftSpec(Variant v) : variant_(v) {}

    void require_bounds_nonempty() const {
        if (deriv_sup_.empty())
            throw config_error("DriftSpec: need at least the order-0 bound sup|a|");
    }

    double bound_at(int i) const {
        if (i < 0 || static_cast<std::size_t>(i) >= deriv_sup_.size())
            throw config_error("DriftSpec: derivative order beyond declared metadata");
        return deriv_sup_[static_cast<std::size_t>(i)];
    }

    HistogramMeasure to_histogram(const QuantileState& s) const {
        if (!spectral_.layout)
            throw config_error("DriftSpec: spectral drift on a quantile state needs a layout");
        return histogram_from_state(s, *spectral_.layout);
    }

    Variant variant_;
    std::function<double(double, double)> axy_;  // b1 / b3
    std::function<double(double)> ax_;           // b2 / b4
    std::function<double(double)> psi_;          // b3
    SpectralDriftSpec spectral_;
    std::vector<double> deriv_sup_;
    double eta_hat_ = 0.0;
    double tv_lipschitz_ = 0.0;
    bool x_independent_ = false;
};

// ---------------------------------------------------------------------------
// Builders for measure functionals and candidate families.

// u(mu) = scale * |mu(A) - offset|^delta over a fixed bin set A.  Since
// |mu(A) - nu(A)| <= d_TV(mu, nu)/2, u is delta-Hoelder in TV with constant
// |scale| * 2^{-delta}; keep |scale| <= 1 and offset in [0,1] for |u| <= 1.
inline std::function<double(const HistogramMeasure&)> make_bin_mass_functional(
    std::vector<std::size_t> bins, double offset, double scale, double delta) {
    if (!(delta > 0.0 && delta <= 1.0))
        throw config_error("make_bin_mass_functional: need delta in (0, 1]");
    return [bins = std::move(bins), offset, scale, delta](const HistogramMeasure& mu) {
        double mass = 0.0;
        for (std::size_t b : bins) {
            if (b >= mu.probs.size())
                throw grid_error("bin-mass functional: bin outside layout");
            mass += mu.probs[b];
        }
        return scale * std::pow(std::abs(mass - offset), delta);
    };
}

// u(mu) = scale * sin(freq * mean(mu)).  On a layout of width W the mean is
// TV-Lipschitz with constant W/2, so u is TV-Lipschitz with |scale|*freq*W/2.
inline std::function<double(const HistogramMeasure&)> make_mean_wave_functional(double freq,
                                                                                double scale) {
    return [freq, scale](const HistogramMeasure& mu) {
        return scale * std::sin(freq * measure_mean(mu));
    };
}

// Candidate family for the inf-convolution: mixtures (1-s) base + s delta_b
// over the given interpolation weights and spike bins, plus the base itself.
inline std::vector<HistogramMeasure> make_mixture_family(
    const HistogramMeasure& base, const std::vector<double>& weights,
    const std::vector<std::size_t>& spike_bins) {
    std::vector<HistogramMeasure> fam;
    fam.push_back(base);
    for (std::size_t b : spike_bins) {
        if (b >= base.probs.size())
            throw grid_error("make_mixture_family: spike bin outside layout");
        for (double s : weights) {
            if (!(s >= 0.0 && s <= 1.0))
                throw config_error("make_mixture_family: weights must lie in [0, 1]");
            HistogramMeasure m(base.layout);
            for (std::size_t i = 0; i < m.probs.size(); ++i)
                m.probs[i] = (1.0 - s) * base.probs[i];
            m.probs[b] += s;
            fam.push_back(std::move(m));
        }
    }
    return fam;
}

inline HistogramMeasure make_uniform_histogram(const HistogramLayout& layout) {
    HistogramMeasure m(layout);
    const double w = 1.0 / static_cast<double>(layout.bins);
    for (double& p : m.probs) p = w;
    return m;
}

}  // namespace wfl
