#include "blowup/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace blowup {

namespace {

// E1(d) = 1 - (1 - e^{-d})/d, the weight of the linear part of g against the
// exponential window. Series below d = 1e-3 to avoid cancellation.
double weight_linear(double d) {
    if (d < 1e-3) return d * (0.5 - d * (1.0 / 6.0 - d * (1.0 / 24.0 - d / 120.0)));
    return 1.0 - (-std::expm1(-d)) / d;
}

// A_m(t) = int_0^t e^{s-t} (s/t)^m ds. Alternating series t*m!*sum (-t)^k/(m+k+1)!
// for small t; closed form via the polynomial antiderivative of s^m e^s otherwise.
double power_moment(int m, double t) {
    if (t < static_cast<double>(m) + 2.0) {
        double term = t / static_cast<double>(m + 1);
        double sum = term;
        for (int k = 1; k < 60; ++k) {
            term *= -t / static_cast<double>(m + k + 1);
            sum += term;
            if (std::fabs(term) < 1e-17 * std::fabs(sum)) break;
        }
        return sum;
    }
    // int_0^t s^m e^s ds = e^t P(t) - P(0), P(t) = sum_{j<=m} (-1)^{m-j} (m!/j!) t^j
    std::vector<double> coeff(static_cast<std::size_t>(m) + 1);
    double c = 1.0;
    for (int j = m; j >= 0; --j) {
        coeff[static_cast<std::size_t>(j)] = ((m - j) % 2 == 0 ? c : -c);
        c *= static_cast<double>(j);
    }
    double p_t = 0.0, tpow = 1.0;
    for (int j = 0; j <= m; ++j) {
        p_t += coeff[static_cast<std::size_t>(j)] * tpow;
        tpow *= t;
    }
    const double inner = p_t - coeff[0] * std::exp(-t);  // = e^{-t} int_0^t s^m e^s ds
    return inner / std::pow(t, m);
}

}  // namespace

KernelWorkspace::KernelWorkspace(RadialGrid grid, int dimension)
    : grid_(std::move(grid)), dimension_(dimension) {
    if (dimension_ < 3)
        throw std::invalid_argument("nested_kernel: dimension must be >= 3");
    if (grid_.size() < 2) throw std::invalid_argument("nested_kernel: need >= 2 nodes");
    const int m = dimension_ - 1;
    const auto& t = grid_.nodes;
    const std::size_t n = t.size();

    // first cell: exact moments of e^{s-t1} (s/t1)^{m} {1, s/t1} against linear g
    a0_ = power_moment(m, t[1]);
    a1_ = power_moment(m + 1, t[1]);

    decay_.assign(n, 0.0);
    ratio_pow_.assign(n, 0.0);
    e0_.assign(n, 0.0);
    e1_.assign(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double d = t[i + 1] - t[i];
        const double ratio = t[i] / t[i + 1];
        ratio_pow_[i] = std::pow(ratio, m);
        decay_[i] = std::exp(-d) * ratio_pow_[i];
        // Stored as the weights of (shifted left value, right value); both are
        // nonnegative, which keeps every cell update a nonnegative-weight sum:
        // the kernel is then exactly monotone in g in floating point.
        e1_[i] = weight_linear(d);
        e0_[i] = -std::expm1(-d) - e1_[i];
    }
}

KernelResult KernelWorkspace::apply(const GridFunction& g) const {
    if (grid_.size() != g.size())
        throw std::invalid_argument("nested_kernel: size mismatch");
    const std::size_t n = grid_.size();
    std::vector<double> inner(n, 0.0);
    inner[1] = g[0] * (a0_ - a1_) + g[1] * a1_;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double g_lo = ratio_pow_[i] * g[i];  // shifted integrand at left node
        inner[i + 1] = decay_[i] * inner[i] + g_lo * e0_[i] + g[i + 1] * e1_[i];
    }
    KernelResult res;
    res.inner_scaled = GridFunction(std::move(inner));
    res.outer = cumulative_integral(grid_, res.inner_scaled);
    return res;
}

KernelResult nested_kernel(const RadialGrid& grid, const GridFunction& g, int dimension) {
    return KernelWorkspace(grid, dimension).apply(g);
}

GridFunction kernel_bound(const RadialGrid& grid, const GridFunction& g, int dimension) {
    if (dimension < 3) throw std::invalid_argument("kernel_bound: dimension must be >= 3");
    if (grid.size() != g.size()) throw std::invalid_argument("kernel_bound: size mismatch");
    std::vector<double> tg(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) tg[i] = grid.nodes[i] * g[i];
    GridFunction cumulative = cumulative_integral(grid, GridFunction(std::move(tg)));
    const double scale = 1.0 / static_cast<double>(dimension - 2);
    for (auto& v : cumulative.values) v *= scale;
    return cumulative;
}

double kernel_refinement_difference(const RadialGrid& grid, const GridFunction& g,
                                    int dimension) {
    const RadialGrid coarse = grid.coarsened();
    std::vector<double> gc;
    gc.reserve(coarse.size());
    for (double r : coarse.nodes) gc.push_back(interp_linear(grid, g, r));
    const KernelResult fine = nested_kernel(grid, g, dimension);
    const KernelResult half = nested_kernel(coarse, GridFunction(std::move(gc)), dimension);
    return std::fabs(fine.outer[fine.outer.size() - 1] - half.outer[half.outer.size() - 1]);
}

}  // namespace blowup
