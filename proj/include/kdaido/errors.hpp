#pragma once

#include <stdexcept>
#include <string>

namespace kdaido {

// Base class for all library failures so callers can catch one type.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Evaluation requested outside the analyticity strip |Im z| < delta.
struct strip_violation : error {
    using error::error;
};

// Adaptive quadrature exhausted its subdivision budget before reaching tolerance.
struct quadrature_failure : error {
    using error::error;
};

// Eigenvalue equation requested for a harmonic with vanishing Fourier coefficient.
struct invalid_harmonic : error {
    using error::error;
};

// Newton iteration failed to reach the residual tolerance.
struct no_convergence : error {
    using error::error;
};

// Two transition roots tie for the density maximum; the critical point is not unique.
struct ambiguous_maximizer : error {
    using error::error;
};

// The transition curve has no root in the search interval.
struct no_roots : error {
    using error::error;
};

// Resolvent evaluated at (numerically) an eigenvalue.
struct at_singularity : error {
    using error::error;
};

// Projection requested where D' vanishes (non-simple eigenvalue).
struct degenerate_eigenvalue : error {
    using error::error;
};

// One of the standing assumptions failed; message names which.
struct assumption_violation : error {
    using error::error;
};

// No bifurcating branch exists at the requested coupling.
struct no_branch : error {
    using error::error;
};

// Truncated mode hierarchy stopped absorbing: the cutoff is too small for this coupling.
struct closure_overflow : error {
    using error::error;
};

// Measurement window holds too few samples.
struct window_too_short : error {
    using error::error;
};

// Simulation state left any plausible range (numerical blow-up).
struct mode_divergence : error {
    using error::error;
};

// Bad configuration file or CLI usage.
struct config_error : error {
    using error::error;
};

} // namespace kdaido
