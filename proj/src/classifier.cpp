#include "blowup/classifier.hpp"

#include <cmath>

#include "blowup/kernel.hpp"

namespace blowup {

ConditionVerdict classify_oscillation_integral(const RadialBounds& bounds,
                                               const ClassifierConfig& config) {
    const std::vector<double>& nodes = bounds.grid.nodes;
    std::vector<double> log_integrand(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
        log_integrand[i] =
            std::log(nodes[i]) + std::log(bounds.h[i]) + bounds.log_psi_weight[i];
    return classify_improper_integral(nodes, log_integrand, 0.0, config);
}

ConditionVerdict classify_envelope_mass_integral(const RadialBounds& bounds,
                                                 const ClassifierConfig& config) {
    const KernelResult k = nested_kernel(bounds.grid, bounds.psi, bounds.dimension);
    std::vector<double> log_integrand(k.inner_scaled.size());
    for (std::size_t i = 0; i < k.inner_scaled.size(); ++i)
        log_integrand[i] = std::log(k.inner_scaled[i]);
    return classify_improper_integral(bounds.grid.nodes, log_integrand, 1.0, config);
}

ExistenceReport existence_verdict(const RadialBounds& bounds,
                                  const ClassifierConfig& config) {
    ExistenceReport r;
    r.oscillation = classify_oscillation_integral(bounds, config);
    r.envelope_mass = classify_envelope_mass_integral(bounds, config);

    if (r.oscillation.verdict != IntegralVerdict::convergent) {
        r.verdict = "Theorem 2 inapplicable (hypothesis (2) not established)";
        r.note =
            "an entire large solution may exist even if condition (2) fails; the "
            "hypothesis is sufficient, not necessary";
        return r;
    }
    switch (r.envelope_mass.verdict) {
        case IntegralVerdict::divergent:
            r.verdict = "entire large solution EXISTS (Theorem 2)";
            r.note =
                "the comparison solutions absorb unbounded mass, so every radial "
                "solution trapped between them blows up at infinity";
            break;
        case IntegralVerdict::convergent:
            r.verdict = "NO entire large solution (Theorem 2)";
            r.note =
                "the comparison solutions stay bounded, so no solution of the "
                "radial envelope problems can blow up at infinity";
            break;
        case IntegralVerdict::inconclusive:
            r.verdict =
                "Theorem 2 undecided (criterion (4) inconclusive at this truncation)";
            r.note =
                "raise the truncation window ceiling or loosen the classifier "
                "thresholds to separate the dichotomy";
            break;
    }
    return r;
}

}  // namespace blowup
