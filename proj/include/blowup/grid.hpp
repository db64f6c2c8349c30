#pragma once

#include <cstddef>
#include <vector>

namespace blowup {

/// Radial mesh on [0, rMax] with power-law grading: nodes[i] = rMax * (i/(n-1))^gamma.
/// gamma = 1 gives a uniform mesh; gamma > 1 concentrates nodes near the origin,
/// where the kernel integrands have their strongest curvature.
struct RadialGrid {
    std::vector<double> nodes;   // strictly increasing, nodes[0] == 0
    double r_max = 0.0;
    double grading = 1.0;

    std::size_t size() const { return nodes.size(); }
    double operator[](std::size_t i) const { return nodes[i]; }

    /// Same power map restricted to every second node (shared-node coarsening,
    /// used for refinement differences and extrapolation).
    RadialGrid coarsened() const;
};

/// Node values paired with the grid they live on. All values are finite;
/// construction rejects NaN/inf.
struct GridFunction {
    std::vector<double> values;

    GridFunction() = default;
    explicit GridFunction(std::vector<double> v);

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }

    double sup_norm() const;
};

/// Builds the graded mesh. Throws std::invalid_argument unless
/// rMax > 0, nodeCount >= 16 and gradingExponent >= 1.
RadialGrid build_grid(double r_max, std::size_t node_count, double grading_exponent);

/// Composite trapezoid antiderivative: result[0] = 0,
/// result[i+1] = result[i] + (dt/2)(f[i] + f[i+1]).
/// Exact for piecewise-linear integrands; nondecreasing when f >= 0.
GridFunction cumulative_integral(const RadialGrid& grid, const GridFunction& f);

/// Linear interpolation of a grid function at an off-node radius
/// (clamped to the grid range).
double interp_linear(const RadialGrid& grid, const GridFunction& f, double r);

}  // namespace blowup
