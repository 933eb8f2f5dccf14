#pragma once

#include <algorithm>
#include <cmath>

#include "wfl/common.hpp"

namespace wfl {

// Quintic smoothstep: 0 at t <= 0, 1 at t >= 1, C^2 across the joins.
// Psi(t) = 6t^5 - 15t^4 + 10t^3; Psi(1/2) = 1/2 and max slope 15/8 at t = 1/2.
inline double smoothstep(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

inline double smoothstep_derivative(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return t * t * (30.0 + t * (-60.0 + 30.0 * t));
}

// Plateau cutoff: identically 1 on [a, b], ramping smoothly to 0 over a
// unit-width band on each side, identically 0 outside [a-1, b+1].
struct CutoffProfile {
    double a;
    double b;

    CutoffProfile(double a_, double b_) : a(a_), b(b_) {
        if (!(a <= b)) throw config_error("CutoffProfile: need a <= b");
    }
};

inline double eval_cutoff(const CutoffProfile& c, double y) {
    if (y >= c.a && y <= c.b) return 1.0;
    if (y < c.a) return smoothstep(y - (c.a - 1.0));
    return smoothstep((c.b + 1.0) - y);
}

inline double eval_cutoff_derivative(const CutoffProfile& c, double y) {
    if (y >= c.a && y <= c.b) return 0.0;
    if (y < c.a) return smoothstep_derivative(y - (c.a - 1.0));
    return -smoothstep_derivative((c.b + 1.0) - y);
}

}  // namespace wfl
