#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "blowup/expr.hpp"
#include "blowup/problem.hpp"

namespace blowup {

/// Pointwise residual of the equation  lap u + |grad u| = p * f(u)  at a
/// deterministic low-discrepancy sample of the ball, with derivatives taken
/// by Richardson-extrapolated central differences.
struct ResidualReport {
    std::vector<std::vector<double>> sample_points;  // one point per sample
    std::vector<double> residuals;  // raw signed residual at each point
    // max over samples of |residual| / (1 + |p * f(u)|): the residual measured
    // against the equation's own scale at that point.
    double max_abs_relative = 0.0;
};

/// Checks a candidate solution u of the equation against the potential p and
/// nonlinearity f by sampling `samples` points of the ball of radius
/// `ball_radius` (radii from a Halton sequence, directions from the same
/// deterministic family used for envelope extraction).
/// Throws EvalError if u or p cannot be evaluated near a sample point.
ResidualReport verify_explicit_solution(const Expr& u, const Expr& p,
                                        const Nonlinearity& f, int dimension,
                                        std::size_t samples = 64,
                                        double step_scale = 2e-3,
                                        double ball_radius = 2.0);

/// Least-squares fit of log(r * h(r) * Psi(r)) against log r.
struct DecayFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t points = 0;  // grid nodes inside the fit window
    bool pass = false;       // |slope - expected| within the fit tolerance
};

/// Fits the decay exponent of the weighted envelope gap r*h*Psi over the
/// window [window_lo, window_hi] (log-log least squares, computed in log
/// space so exponentially large weights cannot overflow).  `pass` records
/// |slope - expected_exponent| <= 0.3.
/// Throws ModelError("nonpositive-values") when h vanishes somewhere in the
/// window, std::invalid_argument when fewer than two nodes fall inside.
DecayFit verify_decay_rate(const RadialBounds& bounds, double expected_exponent,
                           double window_lo, double window_hi);

/// Generic helper behind verify_decay_rate: least-squares slope of
/// log_values against log(radii) over [window_lo, window_hi].
DecayFit fit_log_log_slope(const std::vector<double>& radii,
                           const std::vector<double>& log_values,
                           double window_lo, double window_hi);

/// Randomized check of the kernel comparison inequality
///   T[g](r) <= (1/(N-2)) int_0^r t g(t) dt
/// over seeded piecewise-linear nonnegative integrands on random domains.
struct HarnessConfig {
    std::size_t node_count = 257;  // grid nodes per trial
    std::size_t knot_count = 8;    // random piecewise-linear knots
    double amplitude = 12.0;       // knot values drawn from [0, amplitude)
    double r_max_min = 1.0;        // domain radius drawn log-uniformly
    double r_max_max = 1000.0;
    double floor_tolerance = 1e-8;  // allowance is max(floor, 3 * eps_quad)
};

struct HarnessReport {
    std::size_t trials = 0;
    std::size_t violations = 0;  // margins beyond the per-trial allowance
    double worst_margin = 0.0;   // max over trials of max_r (T[g] - bound)
    double worst_excess = 0.0;   // max over trials of (margin - allowance)
    std::vector<std::string> failures;  // first few violating trials
};

/// Runs `trials` seeded random trials of the comparison inequality in the
/// given dimension.  Deterministic for a fixed (dimension, trials, seed,
/// config); every margin is measured against max(floor_tolerance,
/// 3 * kernel refinement difference) for that trial's integrand.
HarnessReport inequality_harness(int dimension, std::size_t trials,
                                 std::uint64_t seed,
                                 const HarnessConfig& config = {});

}  // namespace blowup
