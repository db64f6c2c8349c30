#pragma once

#include "blowup/grid.hpp"

namespace blowup {

/// Output of the nested radial kernel
///   T[g](r) = int_0^r e^{-t} t^{1-N} int_0^t e^s s^{N-1} g(s) ds dt.
struct KernelResult {
    GridFunction outer;         // T[g] at the grid nodes, outer[0] == 0
    GridFunction inner_scaled;  // I(t) = e^{-t} t^{1-N} * (inner integral), I(0) == 0
};

/// Evaluates T[g] on the grid without ever forming e^t t^{N-1} (which overflows
/// for t beyond ~700). The inner integral is carried as the shifted accumulator
///   I(t) = int_0^t e^{s-t} (s/t)^{N-1} g(s) ds,
/// advanced between nodes by
///   I(t_{i+1}) = e^{t_i - t_{i+1}} (t_i/t_{i+1})^{N-1} I(t_i) + q_i,
/// where q_i integrates the shifted integrand over [t_i, t_{i+1}] exactly
/// against linear interpolation of g (all weights nonnegative, so T is
/// monotone in g). The outer integral is the composite trapezoid of I with
/// I(0) = 0, its analytic limit.
///
/// Requires N >= 3 and g sized like the grid.
KernelResult nested_kernel(const RadialGrid& grid, const GridFunction& g, int dimension);

/// Grid-dependent factors of nested_kernel, precomputed once and reused when
/// the kernel is applied to many integrands on the same grid (fixed-point
/// iterations apply it hundreds of times).
class KernelWorkspace {
public:
    KernelWorkspace(RadialGrid grid, int dimension);

    KernelResult apply(const GridFunction& g) const;
    const RadialGrid& grid() const { return grid_; }
    int dimension() const { return dimension_; }

private:
    RadialGrid grid_;
    int dimension_ = 3;
    double a0_ = 0.0, a1_ = 0.0;  // first-cell exact moments
    // per interior interval [t_i, t_{i+1}], i >= 1
    std::vector<double> decay_, ratio_pow_, e0_, e1_;
};

/// The comparison bound (1/(N-2)) int_0^r t g(t) dt, which dominates T[g]
/// pointwise for nonnegative g.
GridFunction kernel_bound(const RadialGrid& grid, const GridFunction& g, int dimension);

/// Refinement difference |T_n - T_{n/2}| at the final node, evaluated by
/// rerunning on the shared-node coarsening. Used as the quadrature tolerance
/// scale for inequality checks.
double kernel_refinement_difference(const RadialGrid& grid, const GridFunction& g,
                                    int dimension);

}  // namespace blowup
