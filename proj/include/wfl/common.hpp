#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace wfl {

inline constexpr const char* version_string = "0.1.0";

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;
inline constexpr double inv_sqrt_two_pi = 0.39894228040143267794;  // 1/sqrt(2*pi)

// Error taxonomy.  The CLI maps config_error to exit code 2 and every other
// wfl::error to exit code 3 (numerical failure).
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration, schema violation, or a precondition that can only be
// broken by bad user input (e.g. a non-increasing initial profile).
struct config_error : error {
    using error::error;
};

// Mismatched discretization grids (particle counts, histogram bins, k-grids).
struct grid_error : error {
    using error::error;
};

// Query outside a tabulated kernel's sample range.
struct domain_error : error {
    using error::error;
};

// Non-positive mass encountered where the dynamics divide by sqrt(mass).
struct mass_degeneracy_error : error {
    using error::error;
};

// NaN/overflow during time stepping, or a rejected monotonicity violation.
struct blowup_error : error {
    using error::error;
};

// Spectral inversion rejected up front (kernel value below the division floor).
struct inversion_error : error {
    using error::error;
};

inline double sqr(double x) { return x * x; }

}  // namespace wfl
