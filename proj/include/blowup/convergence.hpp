#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "blowup/grid.hpp"

namespace blowup {

// Verdict for an improper integral over [lower, infinity).
enum class IntegralVerdict { convergent, divergent, inconclusive };

// One dyadic truncation window record: the integral increment gained between
// the previous truncation radius and this one, kept in log space so that
// integrands whose values overflow double (log-integrands up to ~1e17) can
// still be classified.
struct WindowRecord {
    double truncation = 0.0;     // upper limit R of this partial integral
    double log_increment = 0.0;  // log of the mass added over the last window
    double log_partial = 0.0;    // log of the partial integral up to R
};

struct ConditionVerdict {
    IntegralVerdict verdict = IntegralVerdict::inconclusive;
    std::vector<WindowRecord> windows;
    // Partial integral at the final truncation, as a plain number when it is
    // representable; infinite log-partials are reported via log_partial only.
    std::optional<double> total;
    double log_total = 0.0;
    // Geometric tail extrapolation, present only for the convergent verdict.
    std::optional<double> tail_estimate;
    std::string rationale;
};

struct ClassifierConfig {
    // Truncation radii are 2^k for k in [window_start_exponent, window_ceiling_exponent].
    int window_start_exponent = 4;
    int window_ceiling_exponent = 14;
    // Declared convergent when successive window increments decay at least
    // this fast (ratio below the threshold) over the last windows.
    double convergent_ratio = 0.75;
    // Declared divergent when increments stop decaying (ratio above this).
    double divergent_ratio = 0.98;
    // Declared convergent outright when the extrapolated tail is below
    // tail_epsilon * (1 + partial integral).
    double tail_epsilon = 1e-3;
    // Increments with log below this floor are treated as exhausted mass
    // (the integrand has decayed past double underflow): convergent.
    double log_increment_floor = -690.0;
    // A single window increment with log above this ceiling certifies
    // divergence (the integrand grows explosively).
    double log_increment_overflow = 230.0;
    // Number of trailing windows whose ratios must agree for a verdict.
    int ratio_window_count = 3;
    // Nodes per dyadic octave in the classifier grid (resolution knob for
    // stability checks that re-run the classification on a refined grid).
    std::size_t steps_per_octave = 128;
};

// log(exp(a) + exp(b)) without overflow.
double log_add_exp(double a, double b);

// log(sum exp(v_i)) without overflow; -inf for an empty list.
double log_sum_exp(const std::vector<double>& v);

// Classifies the improper integral of exp(log_integrand(r)) dr over
// [lower_limit, infinity), given the log-integrand sampled on `nodes`
// (which must extend at least to 2^window_ceiling_exponent).  Values of
// -infinity denote exact zeros of the integrand.  Integration uses the
// trapezoid rule in linear space, evaluated via log-sum-exp so that the
// partial integrals remain meaningful even when they exceed double range.
ConditionVerdict classify_improper_integral(const std::vector<double>& nodes,
                                            const std::vector<double>& log_integrand,
                                            double lower_limit,
                                            const ClassifierConfig& config = {});

// Grid used by the classifier: geometric refinement near zero, spacing that
// grows toward the tail, final node at 2^window_ceiling_exponent.
std::vector<double> classifier_nodes(const ClassifierConfig& config = {});

}  // namespace blowup
