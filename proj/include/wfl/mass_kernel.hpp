#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "wfl/common.hpp"

namespace wfl {

// Interaction kernel phi weighting how much of the crowd each particle feels.
// Required shape: even, strictly positive, non-increasing on [0, inf).
// The truncated variant phi_M(x) = phi(min(|x|, M)) freezes the decay past M,
// so masses stay bounded below by phi(M) > 0 no matter how far the
// configuration spreads.
class MassKernel {
  public:
    enum class Variant { constant, gaussian, truncated_gaussian, tabulated };

    static MassKernel constant() { return MassKernel(Variant::constant, 1.0, 0.0); }

    // phi(x) = exp(-x^2 / (2 scale^2)) / (scale sqrt(2 pi))
    static MassKernel gaussian(double scale) {
        if (!(scale > 0.0)) throw config_error("MassKernel: scale must be > 0");
        return MassKernel(Variant::gaussian, scale, 0.0);
    }

    static MassKernel truncated_gaussian(double scale, double M) {
        if (!(scale > 0.0)) throw config_error("MassKernel: scale must be > 0");
        if (!(M > 0.0)) throw config_error("MassKernel: truncation M must be > 0");
        return MassKernel(Variant::truncated_gaussian, scale, M);
    }

    // Samples (x_i, phi_i) on x >= 0, linearly interpolated; queries reflect
    // through |x| and throw past the last sample.
    static MassKernel tabulated(std::vector<double> x, std::vector<double> values) {
        if (x.size() != values.size() || x.size() < 2)
            throw config_error("MassKernel: table needs >= 2 samples");
        for (std::size_t i = 0; i + 1 < x.size(); ++i) {
            if (!(x[i] < x[i + 1]))
                throw config_error("MassKernel: table abscissae must increase");
            if (values[i + 1] > values[i])
                throw config_error("MassKernel: table must be non-increasing");
        }
        if (!(x.front() == 0.0))
            throw config_error("MassKernel: table must start at x = 0");
        if (!(values.back() > 0.0))
            throw config_error("MassKernel: table values must stay positive");
        MassKernel k(Variant::tabulated, 1.0, 0.0);
        k.tx_ = std::move(x);
        k.tv_ = std::move(values);
        return k;
    }

    Variant variant() const { return variant_; }
    double scale() const { return scale_; }
    double truncation() const { return trunc_; }
    bool is_constant() const { return variant_ == Variant::constant; }

    // Derive the truncated version used by the stopped dynamics.
    MassKernel truncated(double M) const {
        if (!(M > 0.0)) throw config_error("MassKernel: truncation M must be > 0");
        switch (variant_) {
            case Variant::constant:
                return *this;  // already bounded below
            case Variant::gaussian:
                return truncated_gaussian(scale_, M);
            case Variant::truncated_gaussian:
                return truncated_gaussian(scale_, std::min(trunc_, M));
            case Variant::tabulated: {
                MassKernel k = *this;
                k.trunc_ = trunc_ > 0.0 ? std::min(trunc_, M) : M;
                return k;
            }
        }
        throw config_error("MassKernel: unknown variant");
    }

    double operator()(double x) const { return eval(x); }

    double eval(double x) const {
        switch (variant_) {
            case Variant::constant:
                return 1.0;
            case Variant::gaussian:
                return gauss(std::abs(x));
            case Variant::truncated_gaussian:
                return gauss(std::min(std::abs(x), trunc_));
            case Variant::tabulated: {
                double a = std::abs(x);
                if (trunc_ > 0.0) a = std::min(a, trunc_);
                return interp(a);
            }
        }
        throw config_error("MassKernel: unknown variant");
    }

    // d phi/dx, needed by the flow-derivative integrands.  For the truncated
    // variants the derivative is 0 past the truncation point (the kernel is
    // constant there); the table uses its interpolation slope.
    double derivative(double x) const {
        switch (variant_) {
            case Variant::constant:
                return 0.0;
            case Variant::gaussian:
                return -x / (scale_ * scale_) * gauss(std::abs(x));
            case Variant::truncated_gaussian:
                if (std::abs(x) >= trunc_) return 0.0;
                return -x / (scale_ * scale_) * gauss(std::abs(x));
            case Variant::tabulated: {
                const double a = std::abs(x);
                if (trunc_ > 0.0 && a >= trunc_) return 0.0;
                const double slope = interp_slope(a);
                return x >= 0.0 ? slope : -slope;
            }
        }
        throw config_error("MassKernel: unknown variant");
    }

    // Value and derivative in one evaluation (the gaussian variants share the
    // exponential between the two).
    void eval_both(double x, double& phi, double& dphi) const {
        switch (variant_) {
            case Variant::constant:
                phi = 1.0;
                dphi = 0.0;
                return;
            case Variant::gaussian:
                phi = gauss(std::abs(x));
                dphi = -x / (scale_ * scale_) * phi;
                return;
            case Variant::truncated_gaussian:
                if (std::abs(x) >= trunc_) {
                    phi = gauss(trunc_);
                    dphi = 0.0;
                } else {
                    phi = gauss(std::abs(x));
                    dphi = -x / (scale_ * scale_) * phi;
                }
                return;
            case Variant::tabulated:
                phi = eval(x);
                dphi = derivative(x);
                return;
        }
        throw config_error("MassKernel: unknown variant");
    }

    // Lower bound for masses while the configuration spread stays below M:
    // pairwise distances never exceed the spread, phi is non-increasing.
    double floor_at(double M) const { return eval(M); }

  private:
    MassKernel(Variant v, double scale, double trunc)
        : variant_(v), scale_(scale), trunc_(trunc) {}

    double gauss(double a) const {
        return inv_sqrt_two_pi / scale_ * std::exp(-0.5 * sqr(a / scale_));
    }

    double interp(double a) const {
        if (a > tx_.back())
            throw domain_error("MassKernel: tabulated query outside sample range");
        const auto it = std::upper_bound(tx_.begin(), tx_.end(), a);
        if (it == tx_.begin()) return tv_.front();
        const std::size_t hi = static_cast<std::size_t>(it - tx_.begin());
        if (hi == tx_.size()) return tv_.back();
        const double w = (a - tx_[hi - 1]) / (tx_[hi] - tx_[hi - 1]);
        return (1.0 - w) * tv_[hi - 1] + w * tv_[hi];
    }

    double interp_slope(double a) const {
        if (a > tx_.back())
            throw domain_error("MassKernel: tabulated query outside sample range");
        const auto it = std::upper_bound(tx_.begin(), tx_.end(), a);
        std::size_t hi = it == tx_.begin() ? 1 : static_cast<std::size_t>(it - tx_.begin());
        if (hi == tx_.size()) hi = tx_.size() - 1;
        return (tv_[hi] - tv_[hi - 1]) / (tx_[hi] - tx_[hi - 1]);
    }

    Variant variant_;
    double scale_;
    double trunc_;  // 0 means untruncated for gaussian/tabulated
    std::vector<double> tx_, tv_;
};

}  // namespace wfl
