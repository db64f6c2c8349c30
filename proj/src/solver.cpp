#include "blowup/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "blowup/kernel.hpp"

namespace blowup {

namespace {

constexpr double kLogDoubleMax = 709.0;

struct RunResult {
    std::vector<double> v;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> trace;
    double monotonicity_violation = 0.0;
};

double eval_f(const CompiledExpr& cf, double s) {
    const double point[1] = {s};
    return cf.eval(std::span<const double>(point, 1));
}

RunResult run_sweeps(const RadialGrid& grid, const GridFunction& env,
                     const CompiledExpr& cf, double b, int dimension,
                     const PicardConfig& config) {
    const KernelWorkspace ws(grid, dimension);
    const std::size_t n = grid.size();
    RunResult out;
    out.v.assign(n, b);
    std::vector<double> g_prev(n, 0.0), g_cur(n), delta(n);

    for (int iter = 1; iter <= config.max_iterations; ++iter) {
        try {
            for (std::size_t i = 0; i < n; ++i) g_cur[i] = env[i] * eval_f(cf, out.v[i]);
        } catch (const EvalError& e) {
            throw ModelError("threshold-overflow",
                             std::string("nonlinearity evaluation failed during the "
                                         "fixed-point sweep: ") +
                                 e.what());
        }
        // f(v) is finite (the evaluator throws otherwise), but the product
        // with a large envelope can still overflow on its own
        for (std::size_t i = 0; i < n; ++i)
            if (!std::isfinite(g_cur[i]))
                throw ModelError("threshold-overflow",
                                 "source term p * f(v) left double range during "
                                 "the fixed-point sweep; shrink the domain");
        for (std::size_t i = 0; i < n; ++i)
            delta[i] = std::max(0.0, g_cur[i] - g_prev[i]);
        const KernelResult inc = ws.apply(GridFunction(delta));

        double sup = 0.0, rel = 0.0, worst_drop = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double step = inc.outer[i];
            worst_drop = std::max(worst_drop, -step);
            out.v[i] += step;
            sup = std::max(sup, step);
            rel = std::max(rel, step / (1.0 + out.v[i]));
        }
        out.monotonicity_violation = std::max(out.monotonicity_violation, worst_drop);
        out.trace.push_back(sup);
        out.iterations = static_cast<std::size_t>(iter);
        std::swap(g_prev, g_cur);

        if (!std::isfinite(out.v.back()))
            throw ModelError("threshold-overflow",
                             "fixed-point values left double range at the outer "
                             "radius; shrink the domain");
        if (rel <= config.tolerance) {
            out.converged = true;
            break;
        }
    }
    if (!out.converged) {
        std::ostringstream os;
        os << "fixed-point iteration missed tolerance " << config.tolerance << " after "
           << config.max_iterations << " sweeps (last increment "
           << (out.trace.empty() ? 0.0 : out.trace.back()) << ")";
        throw ModelError("no-convergence", os.str());
    }
    return out;
}

/// Coarse-grid index -> fine-grid index under RadialGrid::coarsened().
std::size_t fine_index(std::size_t coarse_index, std::size_t fine_size) {
    const std::size_t direct = 2 * coarse_index;
    return direct < fine_size ? direct : fine_size - 1;
}

}  // namespace

SolveReport picard_iterate(const RadialGrid& grid, const GridFunction& envelope,
                           const Nonlinearity& f, double b, int dimension,
                           double lambda_n, const PicardConfig& config) {
    if (grid.size() != envelope.size())
        throw std::invalid_argument("picard_iterate: envelope size mismatch");
    if (!(b >= 1.0))
        throw ModelError("invalid-base", "base value must satisfy b >= 1");
    for (double e : envelope.values)
        if (e < 0.0)
            throw ModelError("invalid-envelope", "envelope must be nonnegative");

    const CompiledExpr cf(f.body);
    RunResult fine = run_sweeps(grid, envelope, cf, b, dimension, config);

    SolveReport rep;
    rep.grid = grid;
    rep.iterations = fine.iterations;
    rep.converged = fine.converged;
    rep.sup_norm_trace = std::move(fine.trace);
    rep.monotonicity_violation = fine.monotonicity_violation;
    rep.base_value = b;

    if (config.richardson && grid.size() >= 17) {
        const RadialGrid coarse_grid = grid.coarsened();
        std::vector<double> env_c(coarse_grid.size());
        for (std::size_t j = 0; j < coarse_grid.size(); ++j)
            env_c[j] = envelope[fine_index(j, grid.size())];
        const RunResult coarse = run_sweeps(coarse_grid, GridFunction(std::move(env_c)),
                                            cf, b, dimension, config);

        std::vector<double> correction(grid.size(),
                                       std::numeric_limits<double>::quiet_NaN());
        double eps = 0.0;
        for (std::size_t j = 0; j < coarse_grid.size(); ++j) {
            const std::size_t i = fine_index(j, grid.size());
            const double diff = fine.v[i] - coarse.v[j];
            eps = std::max(eps, std::fabs(diff));
            correction[i] = diff / 3.0;
        }
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (std::isnan(correction[i]))
                correction[i] = 0.5 * (correction[i - 1] + correction[i + 1]);
        rep.eps_quad = eps;

        std::vector<double> extrapolated(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            extrapolated[i] = fine.v[i] + correction[i];
        rep.solution = GridFunction(std::move(extrapolated));
    } else {
        rep.eps_quad = 0.0;
        rep.solution = GridFunction(fine.v);
    }
    rep.solution_raw = GridFunction(std::move(fine.v));

    // Growth bound b * exp(lambda_n int_0^r t env dt), checked in log space so
    // envelopes whose bound overflows double range pass trivially there.
    GridFunction t_env;
    t_env.values.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        t_env.values[i] = grid.nodes[i] * envelope[i];
    const GridFunction cum = cumulative_integral(grid, t_env);
    double violation = std::numeric_limits<double>::lowest();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double log_bound = std::log(b) + lambda_n * cum[i];
        if (log_bound <= kLogDoubleMax)
            violation = std::max(violation, rep.solution_raw[i] - std::exp(log_bound));
    }
    rep.exp_bound_violation = violation;
    return rep;
}

GridFunction divergence_lower_bound(const RadialGrid& grid, const GridFunction& envelope,
                                    const Nonlinearity& f, double b, int dimension) {
    if (grid.size() != envelope.size())
        throw std::invalid_argument("divergence_lower_bound: envelope size mismatch");
    const double fb = f.eval(b);
    std::vector<double> g(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) g[i] = envelope[i] * fb;
    const KernelResult first = nested_kernel(grid, GridFunction(std::move(g)), dimension);
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] = b + first.outer[i];
    return GridFunction(std::move(out));
}

SubSuperPair build_sub_super_pair(const RadialBounds& bounds, const Nonlinearity& f,
                                  const Constants& constants,
                                  const PicardConfig& config) {
    SubSuperPair pair;
    pair.b_threshold = constants.b_threshold;
    pair.sub = picard_iterate(bounds.grid, bounds.phi, f, 1.0, bounds.dimension,
                              bounds.lambda_n, config);
    pair.super = picard_iterate(bounds.grid, bounds.psi, f, constants.b_threshold,
                                bounds.dimension, bounds.lambda_n, config);
    pair.eps_quad = std::max(pair.sub.eps_quad, pair.super.eps_quad);

    // Amplification bound: sub <= k_amplification * Psi(r), checked in log space.
    const double log_k = std::log(constants.k_amplification);
    double weight_violation = std::numeric_limits<double>::lowest();
    for (std::size_t i = 0; i < bounds.grid.size(); ++i) {
        const double log_bound = log_k + bounds.log_psi_weight[i];
        if (log_bound <= kLogDoubleMax)
            weight_violation = std::max(
                weight_violation, pair.sub.solution_raw[i] - std::exp(log_bound));
    }
    pair.weight_bound_violation = weight_violation;

    double sandwich = std::numeric_limits<double>::lowest();
    double scale = 0.0;
    for (std::size_t i = 0; i < bounds.grid.size(); ++i) {
        sandwich = std::max(sandwich, pair.sub.solution[i] - pair.super.solution[i]);
        scale = std::max(scale, std::fabs(pair.super.solution[i]));
    }
    pair.sandwich_violation = sandwich;
    if (sandwich > 3.0 * pair.eps_quad + 1e-12 * (1.0 + scale)) {
        std::ostringstream os;
        os << "comparison solutions are not ordered: the base-1 solution exceeds the "
              "threshold solution by "
           << sandwich << " (allowance " << 3.0 * pair.eps_quad + 1e-12 * (1.0 + scale)
           << ")";
        throw ModelError("sandwich-violation", os.str());
    }
    return pair;
}

GridFunction ode_reference_solution(const RadialGrid& grid, const GridFunction& envelope,
                                    const Nonlinearity& f, double b, int dimension,
                                    int substeps) {
    if (grid.size() != envelope.size())
        throw std::invalid_argument("ode_reference_solution: envelope size mismatch");
    if (grid.size() < 2 || substeps < 1)
        throw std::invalid_argument("ode_reference_solution: bad arguments");
    const CompiledExpr cf(f.body);
    const double nd = static_cast<double>(dimension);
    const std::size_t n = grid.size();
    const auto& t = grid.nodes;

    std::vector<double> v(n, b);

    // Leave the origin on the quadratic profile (the 1/r terms are singular).
    const double c0 = envelope[0] * eval_f(cf, b);
    double v_cur = b + c0 * t[1] * t[1] / (2.0 * nd);
    double q_cur = std::exp(t[1]) * std::pow(t[1], nd) * c0 / nd;
    v[1] = v_cur;

    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h_total = t[i + 1] - t[i];
        const double h = h_total / substeps;
        const double env_lo = envelope[i], env_hi = envelope[i + 1];
        const auto env_at = [&](double r) {
            const double w = (r - t[i]) / h_total;
            return env_lo + w * (env_hi - env_lo);
        };
        const auto v_dot = [&](double r, double q) {
            return q * std::exp(-r) * std::pow(r, 1.0 - nd);
        };
        const auto q_dot = [&](double r, double vv) {
            return std::exp(r) * std::pow(r, nd - 1.0) * env_at(r) * eval_f(cf, vv);
        };
        try {
            for (int s = 0; s < substeps; ++s) {
                const double r0 = t[i] + h * s;
                const double k1v = v_dot(r0, q_cur);
                const double k1q = q_dot(r0, v_cur);
                const double k2v = v_dot(r0 + 0.5 * h, q_cur + 0.5 * h * k1q);
                const double k2q = q_dot(r0 + 0.5 * h, v_cur + 0.5 * h * k1v);
                const double k3v = v_dot(r0 + 0.5 * h, q_cur + 0.5 * h * k2q);
                const double k3q = q_dot(r0 + 0.5 * h, v_cur + 0.5 * h * k2v);
                const double k4v = v_dot(r0 + h, q_cur + h * k3q);
                const double k4q = q_dot(r0 + h, v_cur + h * k3v);
                v_cur += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
                q_cur += (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
            }
        } catch (const EvalError& e) {
            // an overflowed stage value reached the nonlinearity
            throw ModelError("step-failure",
                             std::string("reference integration left double range "
                                         "inside a stage evaluation: ") +
                                 e.what());
        }
        if (!std::isfinite(v_cur) || !std::isfinite(q_cur))
            throw ModelError("step-failure",
                             "reference integration left double range; shrink the "
                             "domain");
        v[i + 1] = v_cur;
    }
    return GridFunction(std::move(v));
}

}  // namespace blowup
