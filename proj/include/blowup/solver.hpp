#pragma once

#include <cstddef>
#include <vector>

#include "blowup/grid.hpp"
#include "blowup/problem.hpp"

namespace blowup {

struct PicardConfig {
    /// Stop when no node gains more than tolerance * (1 + value) per sweep.
    double tolerance = 1e-10;
    int max_iterations = 200;
    /// Rerun on the shared-node coarsening and extrapolate the second-order
    /// quadrature error away; the coarse run also yields eps_quad.
    bool richardson = true;
};

struct SolveReport {
    RadialGrid grid;
    /// Richardson-extrapolated values (equals solution_raw when extrapolation
    /// is disabled). Use this as the numerical solution.
    GridFunction solution;
    /// Final fine-grid iterate: the certified end of an exactly nondecreasing
    /// iterate chain, the object the inequality checks run against.
    GridFunction solution_raw;
    std::size_t iterations = 0;
    bool converged = false;
    /// Sup-norm of the increment added by each sweep.
    std::vector<double> sup_norm_trace;
    /// Largest pointwise decrease ever observed between consecutive iterates
    /// (0 when the chain is exactly monotone, as construction guarantees).
    double monotonicity_violation = 0.0;
    /// |fine - coarse| at shared nodes, the quadrature error scale used by
    /// the inequality tolerances.
    double eps_quad = 0.0;
    /// Worst excess of the raw iterate over the growth bound
    /// b * exp(lambda_n * int_0^r t env(t) dt); nonpositive means the bound
    /// holds everywhere it is representable.
    double exp_bound_violation = 0.0;
    double base_value = 0.0;
};

/// Monotone fixed-point iteration for the radial envelope problem
///   v(r) = b + T[env * f(v)](r),
/// the integral form of  v'' + (N-1)/r v' + v' = env(r) f(v), v(0) = b,
/// v'(0) = 0. Starting from v = b, each sweep adds T[env * (f(v_k) -
/// f(v_{k-1}))], a sum of nonnegative terms, so the iterate chain is exactly
/// nondecreasing in floating point. Requires b >= 1 (the growth-cap bound
/// used by the diagnostics needs f(v) <= lambda v, valid from 1 up).
/// Throws ModelError("no-convergence") when max_iterations sweeps do not
/// reach the tolerance and ModelError("threshold-overflow") when values leave
/// double range.
SolveReport picard_iterate(const RadialGrid& grid, const GridFunction& envelope,
                           const Nonlinearity& f, double b, int dimension,
                           double lambda_n, const PicardConfig& config = {});

/// Certified pointwise lower bound for every solution of the envelope
/// problem with base value b: the first iterate b + T[env * f(b)](r).
/// Its value at R grows without bound as R grows exactly when the envelope
/// mass integral diverges, which makes it the quantitative witness of
/// blow-up at infinity.
GridFunction divergence_lower_bound(const RadialGrid& grid, const GridFunction& envelope,
                                    const Nonlinearity& f, double b, int dimension);

/// Ordered pair of radial comparison solutions for a potential with envelopes
/// phi >= psi:
///   sub   solves the phi-problem with base 1        (subsolution of the PDE)
///   super solves the psi-problem with base b_threshold (supersolution)
/// The threshold constants guarantee sub <= super; the pair then sandwiches a
/// genuine solution. build_sub_super_pair verifies the ordering and the
/// amplification bound sub <= k_amplification * Psi numerically and throws
/// ModelError("sandwich-violation") when the ordering fails beyond
/// 3 * eps_quad.
struct SubSuperPair {
    SolveReport sub, super;
    double b_threshold = 0.0;
    /// Worst excess of the sub solution over k_amplification * Psi(r)
    /// (nonpositive = bound holds).
    double weight_bound_violation = 0.0;
    /// max over nodes of (sub - super); nonpositive = ordered.
    double sandwich_violation = 0.0;
    double eps_quad = 0.0;
};

SubSuperPair build_sub_super_pair(const RadialBounds& bounds, const Nonlinearity& f,
                                  const Constants& constants,
                                  const PicardConfig& config = {});

/// Independent reference: integrates the radial initial value problem
///   (e^r r^{N-1} v')' = e^r r^{N-1} env(r) f(v),  v(0) = b, v'(0) = 0
/// as a first-order system in (v, q), q = e^r r^{N-1} v', with classic
/// fourth-order Runge-Kutta, `substeps` steps per grid interval and the
/// envelope interpolated linearly. Leaves the origin on the quadratic profile
/// v = b + env(0) f(b) r^2 / (2N). The flux q overflows for radii in the
/// hundreds; use moderate grids.
GridFunction ode_reference_solution(const RadialGrid& grid, const GridFunction& envelope,
                                    const Nonlinearity& f, double b, int dimension,
                                    int substeps = 2);

}  // namespace blowup
