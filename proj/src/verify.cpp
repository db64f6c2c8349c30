#include "blowup/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "blowup/kernel.hpp"

namespace blowup {

namespace {

constexpr unsigned kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                                43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101};

double vector_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

ResidualReport verify_explicit_solution(const Expr& u, const Expr& p,
                                        const Nonlinearity& f, int dimension,
                                        std::size_t samples, double step_scale,
                                        double ball_radius) {
    if (u.dimension() != dimension || p.dimension() != dimension)
        throw std::invalid_argument("verify_explicit_solution: dimension mismatch");
    if (samples == 0)
        throw std::invalid_argument("verify_explicit_solution: no samples");
    // Radii come from the Halton base just past the ones unit_directions uses
    // for this dimension, so radius and direction stay independent.
    const std::size_t pairs = (static_cast<std::size_t>(dimension) + 1) / 2;
    if (2 * pairs >= std::size(kPrimes))
        throw ModelError("invalid-dimension", "ball sampling dimension out of range");
    const unsigned radius_base = kPrimes[2 * pairs];

    const auto dirs = unit_directions(samples, dimension);
    std::vector<double> x(static_cast<std::size_t>(dimension));
    ResidualReport rep;
    rep.sample_points.reserve(samples);
    rep.residuals.reserve(samples);
    for (std::size_t k = 1; k <= samples; ++k) {
        // u^{1/N} radius law: uniform over the ball's volume.
        const double rho =
            ball_radius * std::pow(halton(k, radius_base), 1.0 / dimension);
        for (std::size_t j = 0; j < x.size(); ++j) x[j] = rho * dirs[k - 1][j];

        const Derivatives d = numeric_derivatives(u, x, step_scale);
        const double grad_norm = vector_norm(d.gradient);
        const double u_val = u.eval(x, rho);
        const double rhs = p.eval(x, rho) * f.eval(u_val);
        const double residual = d.laplacian + grad_norm - rhs;
        rep.sample_points.push_back(x);
        rep.residuals.push_back(residual);
        rep.max_abs_relative = std::max(
            rep.max_abs_relative, std::fabs(residual) / (1.0 + std::fabs(rhs)));
    }
    return rep;
}

DecayFit fit_log_log_slope(const std::vector<double>& radii,
                           const std::vector<double>& log_values,
                           double window_lo, double window_hi) {
    if (radii.size() != log_values.size())
        throw std::invalid_argument("fit_log_log_slope: size mismatch");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (radii[i] < window_lo || radii[i] > window_hi) continue;
        if (!std::isfinite(log_values[i]))
            throw ModelError("nonpositive-values",
                             "log-log fit fed a vanishing value at r = " +
                                 std::to_string(radii[i]));
        lx.push_back(std::log(radii[i]));
        ly.push_back(log_values[i]);
    }
    if (lx.size() < 2)
        throw std::invalid_argument(
            "fit_log_log_slope: window holds fewer than two nodes");

    const double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    DecayFit out;
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    out.points = lx.size();
    return out;
}

DecayFit verify_decay_rate(const RadialBounds& bounds, double expected_exponent,
                           double window_lo, double window_hi) {
    const std::size_t n = bounds.grid.size();
    if (bounds.h.size() != n || bounds.log_psi_weight.size() != n)
        throw std::invalid_argument("verify_decay_rate: inconsistent bounds");
    std::vector<double> log_vals(n);
    for (std::size_t i = 0; i < n; ++i) {
        // log(r * h * Psi); log(0) = -inf marks vanishing gaps, rejected by
        // the fit when they fall inside the window.
        log_vals[i] = std::log(bounds.grid[i]) + std::log(bounds.h[i]) +
                      bounds.log_psi_weight[i];
    }
    DecayFit out =
        fit_log_log_slope(bounds.grid.nodes, log_vals, window_lo, window_hi);
    out.pass = std::fabs(out.slope - expected_exponent) <= 0.3;
    return out;
}

HarnessReport inequality_harness(int dimension, std::size_t trials,
                                 std::uint64_t seed, const HarnessConfig& config) {
    if (dimension < 3)
        throw ModelError("invalid-dimension",
                         "the comparison inequality needs dimension >= 3");
    if (config.knot_count < 2 || config.node_count < 32)
        throw std::invalid_argument("inequality_harness: config too small");

    std::mt19937_64 rng(seed);
    const auto uniform = [&rng] {
        return static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };

    HarnessReport rep;
    rep.trials = trials;
    double worst_margin = std::numeric_limits<double>::lowest();
    double worst_excess = std::numeric_limits<double>::lowest();

    for (std::size_t trial = 0; trial < trials; ++trial) {
        const double r_max =
            config.r_max_min *
            std::pow(config.r_max_max / config.r_max_min, uniform());
        const std::size_t kc = config.knot_count;
        std::vector<double> knots(kc);
        for (auto& v : knots) v = config.amplitude * uniform();
        // Every fourth trial zeroes the first half of the knots, exercising
        // integrands that vanish identically near the origin.
        if (trial % 4 == 0)
            for (std::size_t j = 0; j < kc / 2; ++j) knots[j] = 0.0;
        const double grading = 1.0 + uniform();

        const RadialGrid grid = build_grid(r_max, config.node_count, grading);
        const std::size_t n = grid.size();
        std::vector<double> g_vals(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double pos =
                grid[i] / r_max * static_cast<double>(kc - 1);
            const std::size_t j = std::min(static_cast<std::size_t>(pos), kc - 2);
            const double w = pos - static_cast<double>(j);
            g_vals[i] = knots[j] * (1.0 - w) + knots[j + 1] * w;
        }
        const GridFunction g(std::move(g_vals));

        const KernelResult kr = nested_kernel(grid, g, dimension);
        const GridFunction bound = kernel_bound(grid, g, dimension);
        double margin = std::numeric_limits<double>::lowest();
        for (std::size_t i = 0; i < n; ++i)
            margin = std::max(margin, kr.outer[i] - bound[i]);

        const double eps = kernel_refinement_difference(grid, g, dimension);
        const double allowance = std::max(config.floor_tolerance, 3.0 * eps);
        worst_margin = std::max(worst_margin, margin);
        worst_excess = std::max(worst_excess, margin - allowance);
        if (margin > allowance) {
            ++rep.violations;
            if (rep.failures.size() < 10) {
                std::ostringstream os;
                os << "trial " << trial << ": margin " << margin
                   << " exceeds allowance " << allowance << " (r_max " << r_max
                   << ", N " << dimension << ")";
                rep.failures.push_back(os.str());
            }
        }
    }
    rep.worst_margin = trials > 0 ? worst_margin : 0.0;
    rep.worst_excess = trials > 0 ? worst_excess : 0.0;
    return rep;
}

}  // namespace blowup
