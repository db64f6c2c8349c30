#pragma once

#include <string>

#include "blowup/convergence.hpp"
#include "blowup/problem.hpp"

namespace blowup {

/// Hypothesis integral of the existence theory: the weighted envelope-gap mass
///   int_0^inf r h(r) Psi(r) dr,   h = phi - psi,  Psi = exp(lambda_n int s psi).
/// Convergence of this integral is what licenses the comparison argument at
/// all; it is evaluated fully in log space because Psi overflows double range
/// for growing potentials.
ConditionVerdict classify_oscillation_integral(const RadialBounds& bounds,
                                               const ClassifierConfig& config = {});

/// Dichotomy integral: the mass that the radial comparison solutions absorb,
///   int_1^inf e^{-t} t^{1-N} int_0^t e^s s^{N-1} psi(s) ds dt.
/// Divergence makes every comparison solution blow up at infinity (large
/// solutions); convergence keeps them bounded (no large solution).
ConditionVerdict classify_envelope_mass_integral(const RadialBounds& bounds,
                                                 const ClassifierConfig& config = {});

struct ExistenceReport {
    ConditionVerdict oscillation;
    ConditionVerdict envelope_mass;
    std::string verdict;  // one of the fixed verdict strings below
    std::string note;
};

/// Combines the two classifications into the existence verdict. The verdict
/// strings are stable output contract:
///   "entire large solution EXISTS (Theorem 2)"
///   "NO entire large solution (Theorem 2)"
///   "Theorem 2 undecided (criterion (4) inconclusive at this truncation)"
///   "Theorem 2 inapplicable (hypothesis (2) not established)"
ExistenceReport existence_verdict(const RadialBounds& bounds,
                                  const ClassifierConfig& config = {});

}  // namespace blowup
