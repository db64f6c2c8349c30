#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "blowup/convergence.hpp"
#include "blowup/expr.hpp"
#include "blowup/grid.hpp"

namespace blowup {

/// Model-level failure carrying a stable machine-readable code next to the
/// human-readable message. Codes in use:
///   "invalid-dimension"      dimension below 3 or beyond the sampler's range
///   "invalid-potential"      expression rejected (coordinates under a radial
///                            flag, evaluation failure, bad fixture parameter)
///   "negative-potential"     a sampled potential value is negative
///   "sampling-failure"       spherical max/min did not stabilize
///   "invalid-nonlinearity"   f(0) != 0, f nonpositive, or f decreasing
///   "unbounded-ratio"        f(s)/s grows without bound on s >= 1
///   "unknown-fixture"        fixture tag not in the catalog
///   "divergent-h-integral"   the envelope-gap integrals needed by the
///                            threshold constants do not converge
///   "threshold-overflow"     amplification constants or solution values
///                            overflow double range
///   "invalid-base"           fixed-point base value below 1
///   "invalid-envelope"       fixed-point iteration fed a negative envelope
///   "no-convergence"         fixed-point iteration missed its tolerance
///   "sandwich-violation"     ordered solution pair failed its ordering
///   "bound-violation"        certified lower bound exceeded the solution
///   "step-failure"           reference ODE integration left double range
///   "nonpositive-values"     log-log slope fit fed nonpositive samples
struct ModelError : std::runtime_error {
    std::string code;
    ModelError(std::string c, const std::string& msg)
        : std::runtime_error(msg), code(std::move(c)) {}
};

/// A potential p(x) on R^N: the expression, how to bound it over spheres, and
/// optional fixture metadata.
struct PotentialSpec {
    int dimension = 3;
    Expr body;  // evaluated at points x; may reference x1..xN, r, N
    /// Radial potentials are evaluated once per radius instead of sampled.
    bool radial = false;
    /// Base number of sphere directions for the max/min envelopes.
    int sphere_samples = 512;
    /// Local cap-refinement passes around the running max/min (0 disables
    /// refinement and the stabilization check).
    int refinement_rounds = 3;
    std::string tag = "custom";
    std::string description;
    /// Known closed-form solution of the full equation, when the fixture
    /// carries one (for residual verification).
    std::optional<Expr> explicit_solution;
    /// Suggested nonlinearity body f(s) for this potential, may be empty.
    std::string default_nonlinearity;
};

/// Nonlinearity f(s): continuous, f(0) = 0, positive and nondecreasing on
/// (0, inf). Construction via make_nonlinearity validates these numerically.
struct Nonlinearity {
    Expr body;  // one free variable
    std::optional<double> lambda_override;

    double eval(double s) const;
};

Nonlinearity make_nonlinearity(const std::string& body,
                               std::optional<double> lambda_override = {});

struct LambdaEstimate {
    double value = 0.0;
    /// True when the ratio f(s)/s was still climbing at the top of the sample
    /// range; the estimate is then a lower bound.
    bool still_increasing = false;
};

/// Estimates lambda = sup_{s >= 1} f(s)/s over log-spaced samples up to 1e8.
/// Throws ModelError("unbounded-ratio") when the ratio exceeds 1e12 or its
/// running maximum more than doubles over the last sampled decade.
/// A lambda_override on f short-circuits the sampling and is returned as-is.
LambdaEstimate estimate_lambda(const Nonlinearity& f);

/// Radial envelopes of a potential on a grid:
///   phi(r) = max_{|x|=r} p(x),  psi(r) = min_{|x|=r} p(x),  h = phi - psi,
/// plus the logarithm of the comparison weight
///   Psi(r) = exp(lambda_n * int_0^r s psi(s) ds),
/// kept in log form because Psi itself overflows double range for growing
/// potentials well inside the grids used here.
struct RadialBounds {
    RadialGrid grid;
    GridFunction phi, psi, h;
    GridFunction log_psi_weight;
    double lambda_n = 0.0;
    int dimension = 3;
};

/// Computes the envelopes by deterministic low-discrepancy sphere sampling
/// (or direct evaluation for radial potentials) and integrates the weight.
RadialBounds extract_radial_bounds(const PotentialSpec& spec, const RadialGrid& grid,
                                   double lambda_n);

/// Threshold constants of the comparison framework:
///   k_amplification = exp(lambda_n * int_0^inf t h(t) dt)
///   b_threshold     = 1.05 * (1 + k_amplification * lambda_n *
///                              int_0^inf s h(s) Psi(s) ds)
/// Central values of both improper integrals are partial integral plus
/// geometric tail estimate from the truncation-window classifier.
struct Constants {
    double lambda = 0.0;
    double lambda_n = 0.0;
    double k_amplification = 1.0;
    double b_threshold = 1.0;
    double gap_integral = 0.0;          // int t h dt
    double weighted_gap_integral = 0.0; // int s h Psi ds

    /// Nodes and running max of t*psi(t), for the growth envelope
    /// growth_rate(R) = lambda_n * max_{t <= R} t psi(t).
    std::vector<double> nodes;
    std::vector<double> prefix_max_t_psi;

    double growth_rate(double R) const;
};

/// Requires the weighted envelope-gap integral to classify convergent on
/// `bounds`; throws ModelError("divergent-h-integral") otherwise.
Constants compute_constants(const RadialBounds& bounds, double lambda,
                            const ClassifierConfig& config = {});

/// Van der Corput radical inverse in the given base, index >= 1.
double halton(std::size_t index, unsigned base);

/// Deterministic unit vectors on S^{N-1}: Halton points mapped through
/// Box-Muller to Gaussians, then normalized. The first k vectors of a longer
/// set are exactly the k-vector set (prefix property).
std::vector<std::vector<double>> unit_directions(std::size_t count, int dimension);

struct FixtureInfo {
    std::string tag;
    std::string description;
    std::string default_potential;  // body rendered with default parameters
    std::map<std::string, double> default_params;
    std::string default_g;  // anisotropy profile parameter, where applicable
    std::string default_nonlinearity;
    std::string explicit_solution;  // empty when no closed form is known
    bool radial = false;
};

const std::vector<FixtureInfo>& fixture_catalog();

/// Builds a fixture potential. `params` override the fixture's numeric
/// defaults; `g_text` overrides the anisotropy profile where the fixture has
/// one. Unknown tags or parameters throw ModelError.
PotentialSpec make_fixture(const std::string& tag, int dimension,
                           const std::map<std::string, double>& params = {},
                           const std::string& g_text = "");

}  // namespace blowup
