#include "blowup/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace blowup {

RadialGrid RadialGrid::coarsened() const {
    RadialGrid g;
    g.r_max = r_max;
    g.grading = grading;
    for (std::size_t i = 0; i < nodes.size(); i += 2) g.nodes.push_back(nodes[i]);
    if (nodes.size() % 2 == 0) g.nodes.push_back(nodes.back());
    return g;
}

GridFunction::GridFunction(std::vector<double> v) : values(std::move(v)) {
    for (double x : values)
        if (!std::isfinite(x)) throw std::invalid_argument("GridFunction: non-finite value");
}

double GridFunction::sup_norm() const {
    double m = 0.0;
    for (double x : values) m = std::max(m, std::fabs(x));
    return m;
}

RadialGrid build_grid(double r_max, std::size_t node_count, double grading_exponent) {
    if (!(r_max > 0.0)) throw std::invalid_argument("build_grid: rMax must be positive");
    if (node_count < 16) throw std::invalid_argument("build_grid: need at least 16 nodes");
    if (!(grading_exponent >= 1.0))
        throw std::invalid_argument("build_grid: grading exponent must be >= 1");

    RadialGrid g;
    g.r_max = r_max;
    g.grading = grading_exponent;
    g.nodes.resize(node_count);
    const double denom = static_cast<double>(node_count - 1);
    for (std::size_t i = 0; i < node_count; ++i)
        g.nodes[i] = r_max * std::pow(static_cast<double>(i) / denom, grading_exponent);
    g.nodes[0] = 0.0;
    g.nodes[node_count - 1] = r_max;
    return g;
}

GridFunction cumulative_integral(const RadialGrid& grid, const GridFunction& f) {
    if (grid.size() != f.size())
        throw std::invalid_argument("cumulative_integral: size mismatch");
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t i = 0; i + 1 < f.size(); ++i) {
        const double dt = grid.nodes[i + 1] - grid.nodes[i];
        out[i + 1] = out[i] + 0.5 * dt * (f[i] + f[i + 1]);
    }
    return GridFunction(std::move(out));
}

double interp_linear(const RadialGrid& grid, const GridFunction& f, double r) {
    const auto& t = grid.nodes;
    if (r <= t.front()) return f[0];
    if (r >= t.back()) return f[f.size() - 1];
    const auto it = std::upper_bound(t.begin(), t.end(), r);
    const std::size_t j = static_cast<std::size_t>(it - t.begin());
    const double w = (r - t[j - 1]) / (t[j] - t[j - 1]);
    return (1.0 - w) * f[j - 1] + w * f[j];
}

}  // namespace blowup
