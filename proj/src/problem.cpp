#include "blowup/problem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace blowup {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool node_references_coordinates(const Expr::Node* n) {
    if (!n) return false;
    if (n->kind == Expr::Kind::variable) return true;
    return node_references_coordinates(n->a.get()) ||
           node_references_coordinates(n->b.get());
}

bool references_coordinates(const Expr& e) {
    return node_references_coordinates(e.root());
}

std::string fmt_num(double v) {
    for (int prec = 1; prec <= 17; ++prec) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == v) return buf;
    }
    return "0";
}

constexpr unsigned kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                                43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101};

/// Refines sign * p(r u) around a seed direction: each pass evaluates a cap of
/// candidate directions of shrinking angular radius around the running best,
/// re-centering between passes. Runs at least min_rounds passes and up to four
/// more while the improvement per pass stays above the stabilization
/// tolerance 1e-6 * (1 + |value|); throws when it never stabilizes.
double refine_extreme(const CompiledExpr& ce, double r,
                      const std::vector<std::vector<double>>& dirs, std::size_t seed,
                      double sign, double start_value, int min_rounds) {
    const std::size_t dim = dirs[0].size();
    const std::size_t cap = std::min<std::size_t>(dirs.size(), 128);
    std::vector<double> center = dirs[seed];
    std::vector<double> best_dir = center;
    std::vector<double> cand(dim), point(dim);

    double best = sign * start_value;
    double rho = 8.0 / std::sqrt(static_cast<double>(dirs.size()));
    double change = kInf;
    const int max_rounds = min_rounds + 4;
    int round = 0;
    for (; round < max_rounds; ++round) {
        if (round >= min_rounds && change <= 1e-6 * (1.0 + std::fabs(best))) break;
        const double round_start = best;
        for (std::size_t j = 0; j < cap; ++j) {
            const std::vector<double>& d = dirs[j];
            double dot = 0.0;
            for (std::size_t k = 0; k < dim; ++k) dot += d[k] * center[k];
            double norm2 = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                cand[k] = center[k] + rho * (d[k] - dot * center[k]);
                norm2 += cand[k] * cand[k];
            }
            if (norm2 < 1e-24) continue;
            const double inv = 1.0 / std::sqrt(norm2);
            for (std::size_t k = 0; k < dim; ++k) {
                cand[k] *= inv;
                point[k] = r * cand[k];
            }
            const double v = sign * ce.eval(point, r);
            if (v > best) {
                best = v;
                best_dir = cand;
            }
        }
        center = best_dir;
        change = best - round_start;
        rho *= 0.25;
    }
    if (round >= max_rounds && change > 1e-6 * (1.0 + std::fabs(best))) {
        std::ostringstream os;
        os << "spherical " << (sign > 0 ? "maximum" : "minimum") << " at radius " << r
           << " kept moving by " << change << " per refinement pass after "
           << max_rounds << " passes";
        throw ModelError("sampling-failure", os.str());
    }
    return sign * best;
}

}  // namespace

double Nonlinearity::eval(double s) const {
    const double point[1] = {s};
    return body.eval(std::span<const double>(point, 1));
}

Nonlinearity make_nonlinearity(const std::string& body,
                               std::optional<double> lambda_override) {
    Nonlinearity f{parse_scalar_function(body), lambda_override};
    try {
        const double f0 = f.eval(0.0);
        if (std::fabs(f0) > 1e-9)
            throw ModelError("invalid-nonlinearity",
                             "f(0) must vanish; got f(0) = " + fmt_num(f0));
        double prev = 0.0;
        bool have_prev = false;
        for (int k = 0; k <= 256; ++k) {
            const double s = std::pow(10.0, -6.0 + 14.0 * k / 256.0);
            const double v = f.eval(s);
            if (!(v > 0.0))
                throw ModelError("invalid-nonlinearity",
                                 "f must be positive on (0, inf); f(" + fmt_num(s) +
                                     ") = " + fmt_num(v));
            if (have_prev && v < prev * (1.0 - 1e-12) - 1e-15)
                throw ModelError("invalid-nonlinearity",
                                 "f must be nondecreasing; it drops near s = " +
                                     fmt_num(s));
            prev = v;
            have_prev = true;
        }
    } catch (const EvalError& e) {
        throw ModelError("invalid-nonlinearity",
                         std::string("nonlinearity evaluation failed: ") + e.what());
    }
    if (lambda_override && !(*lambda_override > 0.0))
        throw ModelError("invalid-nonlinearity", "lambda override must be positive");
    return f;
}

LambdaEstimate estimate_lambda(const Nonlinearity& f) {
    if (f.lambda_override) return LambdaEstimate{*f.lambda_override, false};
    constexpr int kCount = 1024;
    constexpr double kRatioCap = 1e12;
    double max_ratio = -kInf;
    double max_low = -kInf;  // over s <= 1e7
    double argmax_s = 1.0;
    for (int i = 0; i < kCount; ++i) {
        const double s = std::pow(10.0, 8.0 * i / (kCount - 1));
        double ratio = 0.0;
        try {
            ratio = f.eval(s) / s;
        } catch (const EvalError& e) {
            throw ModelError("unbounded-ratio",
                             "f(s)/s overflowed at s = " + fmt_num(s) + ": " + e.what());
        }
        if (!std::isfinite(ratio) || ratio > kRatioCap)
            throw ModelError("unbounded-ratio",
                             "f(s)/s exceeds " + fmt_num(kRatioCap) + " at s = " +
                                 fmt_num(s) + "; the growth cap lambda is unbounded");
        if (ratio > max_ratio) {
            max_ratio = ratio;
            argmax_s = s;
        }
        if (s <= 1e7 && ratio > max_low) max_low = ratio;
    }
    if (max_ratio > 2.0 * max_low)
        throw ModelError("unbounded-ratio",
                         "the running maximum of f(s)/s more than doubles over the "
                         "last sampled decade (" +
                             fmt_num(max_low) + " -> " + fmt_num(max_ratio) +
                             "); the growth cap lambda appears unbounded");
    return LambdaEstimate{max_ratio, argmax_s > 1e7};
}

double halton(std::size_t index, unsigned base) {
    double f = 1.0, result = 0.0;
    while (index > 0) {
        f /= static_cast<double>(base);
        result += f * static_cast<double>(index % base);
        index /= base;
    }
    return result;
}

std::vector<std::vector<double>> unit_directions(std::size_t count, int dimension) {
    if (dimension < 2)
        throw ModelError("invalid-dimension", "direction sampling needs dimension >= 2");
    const std::size_t pairs = (static_cast<std::size_t>(dimension) + 1) / 2;
    if (2 * pairs > std::size(kPrimes))
        throw ModelError("invalid-dimension",
                         "direction sampling supports dimension <= " +
                             std::to_string(std::size(kPrimes) - 1));
    std::vector<std::vector<double>> dirs;
    dirs.reserve(count);
    std::vector<double> g(static_cast<std::size_t>(dimension));
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    for (std::size_t i = 1; i <= count; ++i) {
        for (std::size_t p = 0; p < pairs; ++p) {
            const double u1 = halton(i, kPrimes[2 * p]);
            const double u2 = halton(i, kPrimes[2 * p + 1]);
            const double rho = std::sqrt(-2.0 * std::log(u1));
            g[2 * p] = rho * std::cos(kTwoPi * u2);
            if (2 * p + 1 < static_cast<std::size_t>(dimension))
                g[2 * p + 1] = rho * std::sin(kTwoPi * u2);
        }
        double norm2 = 0.0;
        for (double x : g) norm2 += x * x;
        std::vector<double> d(static_cast<std::size_t>(dimension), 0.0);
        if (norm2 < 1e-24) {
            d[0] = 1.0;
        } else {
            const double inv = 1.0 / std::sqrt(norm2);
            for (std::size_t k = 0; k < d.size(); ++k) d[k] = g[k] * inv;
        }
        dirs.push_back(std::move(d));
    }
    return dirs;
}

RadialBounds extract_radial_bounds(const PotentialSpec& spec, const RadialGrid& grid,
                                   double lambda_n) {
    if (spec.dimension < 3)
        throw ModelError("invalid-dimension", "the problem class needs dimension >= 3");
    if (grid.size() < 2) throw std::invalid_argument("grid needs at least two nodes");
    if (spec.radial && references_coordinates(spec.body))
        throw ModelError("invalid-potential",
                         "a potential marked radial must not reference coordinates");
    if (!spec.radial && spec.sphere_samples < 8)
        throw ModelError("invalid-potential", "sphere sampling needs at least 8 points");

    const std::size_t n = grid.size();
    const std::size_t dim = static_cast<std::size_t>(spec.dimension);
    std::vector<double> phi(n), psi(n);
    const CompiledExpr ce(spec.body);

    try {
        if (spec.radial) {
            std::vector<double> x(dim, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                x[0] = grid[i];
                const double v = ce.eval(x, grid[i]);
                phi[i] = psi[i] = v;
            }
        } else {
            const auto dirs =
                unit_directions(static_cast<std::size_t>(spec.sphere_samples),
                                spec.dimension);
            std::vector<double> point(dim, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const double r = grid[i];
                if (r == 0.0) {
                    std::fill(point.begin(), point.end(), 0.0);
                    phi[i] = psi[i] = ce.eval(point, 0.0);
                    continue;
                }
                double vmax = -kInf, vmin = kInf;
                std::size_t arg_max = 0, arg_min = 0;
                for (std::size_t j = 0; j < dirs.size(); ++j) {
                    for (std::size_t k = 0; k < dim; ++k) point[k] = r * dirs[j][k];
                    const double v = ce.eval(point, r);
                    if (v > vmax) {
                        vmax = v;
                        arg_max = j;
                    }
                    if (v < vmin) {
                        vmin = v;
                        arg_min = j;
                    }
                }
                // a raw sample below zero already proves the potential
                // invalid; report that rather than refining extrema whose
                // stabilization may fail on an ill-posed input
                if (vmin < -1e-12 * (1.0 + std::fabs(vmax)))
                    throw ModelError(
                        "negative-potential",
                        "potential is negative on the sphere of radius " +
                            fmt_num(r) + " (sampled value " + fmt_num(vmin) + ")");
                if (spec.refinement_rounds > 0) {
                    vmax = refine_extreme(ce, r, dirs, arg_max, 1.0, vmax,
                                          spec.refinement_rounds);
                    vmin = refine_extreme(ce, r, dirs, arg_min, -1.0, vmin,
                                          spec.refinement_rounds);
                }
                phi[i] = vmax;
                psi[i] = vmin;
            }
        }
    } catch (const EvalError& e) {
        throw ModelError("invalid-potential",
                         std::string("potential evaluation failed: ") + e.what());
    }

    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (psi[i] < 0.0) {
            if (psi[i] >= -1e-12 * (1.0 + std::fabs(phi[i]))) {
                psi[i] = 0.0;  // roundoff at a touch point of zero
            } else {
                throw ModelError("negative-potential",
                                 "potential is negative on the sphere of radius " +
                                     fmt_num(grid[i]) + " (min " + fmt_num(psi[i]) +
                                     ")");
            }
        }
        h[i] = std::max(0.0, phi[i] - psi[i]);
    }

    RadialBounds out;
    out.grid = grid;
    out.lambda_n = lambda_n;
    out.dimension = spec.dimension;
    GridFunction t_psi;
    t_psi.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) t_psi.values[i] = grid[i] * psi[i];
    const GridFunction cum = cumulative_integral(grid, t_psi);
    std::vector<double> log_weight(n);
    for (std::size_t i = 0; i < n; ++i) log_weight[i] = lambda_n * cum[i];
    out.phi = GridFunction(std::move(phi));
    out.psi = GridFunction(std::move(psi));
    out.h = GridFunction(std::move(h));
    out.log_psi_weight = GridFunction(std::move(log_weight));
    return out;
}

double Constants::growth_rate(double R) const {
    if (nodes.empty()) return 0.0;
    if (R <= nodes.front()) return lambda_n * prefix_max_t_psi.front();
    if (R >= nodes.back()) return lambda_n * prefix_max_t_psi.back();
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), R);
    const std::size_t hi = static_cast<std::size_t>(it - nodes.begin());
    const std::size_t lo = hi - 1;
    const double w = (R - nodes[lo]) / (nodes[hi] - nodes[lo]);
    return lambda_n *
           (prefix_max_t_psi[lo] + w * (prefix_max_t_psi[hi] - prefix_max_t_psi[lo]));
}

Constants compute_constants(const RadialBounds& bounds, double lambda,
                            const ClassifierConfig& config) {
    const std::vector<double>& nodes = bounds.grid.nodes;
    const std::size_t n = nodes.size();
    std::vector<double> log_osc(n), log_gap(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double lr = std::log(nodes[i]);
        const double lh = std::log(bounds.h[i]);
        log_gap[i] = lr + lh;
        log_osc[i] = lr + lh + bounds.log_psi_weight[i];
    }

    const ConditionVerdict osc =
        classify_improper_integral(nodes, log_osc, 0.0, config);
    if (osc.verdict != IntegralVerdict::convergent)
        throw ModelError("divergent-h-integral",
                         "the weighted envelope-gap integral must converge to form "
                         "the threshold constants; " +
                             osc.rationale);
    const ConditionVerdict gap =
        classify_improper_integral(nodes, log_gap, 0.0, config);
    if (!osc.total || !gap.total)
        throw ModelError("threshold-overflow",
                         "an envelope-gap integral overflows double range");

    const double osc_value = *osc.total + osc.tail_estimate.value_or(0.0);
    const double gap_value = *gap.total + gap.tail_estimate.value_or(0.0);

    Constants c;
    c.lambda = lambda;
    c.lambda_n = bounds.lambda_n;
    c.gap_integral = gap_value;
    c.weighted_gap_integral = osc_value;
    c.k_amplification = std::exp(bounds.lambda_n * gap_value);
    c.b_threshold =
        1.05 * (1.0 + c.k_amplification * bounds.lambda_n * osc_value);
    if (!std::isfinite(c.k_amplification) || !std::isfinite(c.b_threshold))
        throw ModelError("threshold-overflow",
                         "threshold constants overflow double range");

    c.nodes = nodes;
    c.prefix_max_t_psi.resize(n);
    double running = -kInf;
    for (std::size_t i = 0; i < n; ++i) {
        running = std::max(running, nodes[i] * bounds.psi[i]);
        c.prefix_max_t_psi[i] = running;
    }
    return c;
}

const std::vector<FixtureInfo>& fixture_catalog() {
    static const std::vector<FixtureInfo> catalog = [] {
        std::vector<FixtureInfo> v;
        v.push_back({"constant",
                     "spatially constant potential p(x) = c; the radial parameter "
                     "(default 1) selects direct radial evaluation over sphere "
                     "sampling",
                     "1", {{"c", 1.0}, {"radial", 1.0}}, "", "s", "", true});
        v.push_back({"paper-example-1",
                     "bounded anisotropic potential (1 + x1^2)/((1 + x1^2)*(1 + r^2) "
                     "+ 1) whose envelope gap decays like 1/r^2, just inside the "
                     "convergent regime",
                     "(1 + x1^2)/((1 + x1^2)*(1 + r^2) + 1)", {}, "", "s", "", false});
        v.push_back({"remark1-i",
                     "growing potential 1 + r^m plus an anisotropic ridge "
                     "|x1|*exp(-r^(m+2)) that dies super-exponentially",
                     "1 + r^1 + abs(x1)*exp(-r^3)", {{"m", 1.0}}, "", "s", "", false});
        v.push_back({"remark1-ii",
                     "decaying potential (1 + |x1|*g(r)*exp(-r))/(1 + r) with a "
                     "configurable radial anisotropy profile g",
                     "(1 + abs(x1)*(1/(1 + r^2))*exp(-r))/(1 + r)", {},
                     "1/(1 + r^2)", "s", "", false});
        v.push_back({"remark2",
                     "quadratically growing anisotropic potential 2*r^2 + 6*x1^2 + "
                     "sqrt(r^2 + 3*x1^2) + N + 1; with f(s) = 2*s the function "
                     "exp(r^2 + x1^2) solves the equation exactly",
                     "2*r^2 + 6*x1^2 + sqrt(r^2 + 3*x1^2) + N + 1", {}, "", "2*s",
                     "exp(r^2 + x1^2)", false});
        return v;
    }();
    return catalog;
}

PotentialSpec make_fixture(const std::string& tag, int dimension,
                           const std::map<std::string, double>& params,
                           const std::string& g_text) {
    if (dimension < 3)
        throw ModelError("invalid-dimension", "the problem class needs dimension >= 3");
    const FixtureInfo* info = nullptr;
    for (const FixtureInfo& f : fixture_catalog())
        if (f.tag == tag) {
            info = &f;
            break;
        }
    if (!info)
        throw ModelError("unknown-fixture", "no fixture is tagged '" + tag + "'");

    std::map<std::string, double> merged = info->default_params;
    for (const auto& [key, value] : params) {
        if (!merged.count(key))
            throw ModelError("invalid-potential", "fixture '" + tag +
                                                      "' has no parameter '" + key +
                                                      "'");
        merged[key] = value;
    }
    if (!g_text.empty() && info->default_g.empty())
        throw ModelError("invalid-potential",
                         "fixture '" + tag + "' has no anisotropy profile parameter");

    std::string body;
    bool radial = info->radial;
    if (tag == "constant") {
        body = fmt_num(merged.at("c"));
        radial = merged.at("radial") != 0.0;
    } else if (tag == "paper-example-1" || tag == "remark2") {
        body = info->default_potential;
    } else if (tag == "remark1-i") {
        const double m = merged.at("m");
        if (!(m > 0.0))
            throw ModelError("invalid-potential",
                             "fixture 'remark1-i' needs parameter m > 0");
        body = "1 + r^" + fmt_num(m) + " + abs(x1)*exp(-r^" + fmt_num(m + 2.0) + ")";
    } else if (tag == "remark1-ii") {
        const std::string g = g_text.empty() ? info->default_g : g_text;
        const Expr ge = parse_expression(g, dimension);
        if (references_coordinates(ge))
            throw ModelError("invalid-potential",
                             "the anisotropy profile g must depend on r only");
        body = "(1 + abs(x1)*(" + g + ")*exp(-r))/(1 + r)";
    }

    PotentialSpec out;
    out.dimension = dimension;
    out.body = parse_expression(body, dimension);
    out.radial = radial;
    out.tag = tag;
    out.description = info->description;
    out.default_nonlinearity = info->default_nonlinearity;
    if (!info->explicit_solution.empty())
        out.explicit_solution = parse_expression(info->explicit_solution, dimension);
    return out;
}

}  // namespace blowup
