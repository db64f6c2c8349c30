#include "blowup/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace blowup {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string format_radius(double r) {
    std::ostringstream os;
    os << r;
    return os.str();
}

}  // namespace

double log_add_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

double log_sum_exp(const std::vector<double>& v) {
    double m = kNegInf;
    for (double x : v) m = std::max(m, x);
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

std::vector<double> classifier_nodes(const ClassifierConfig& config) {
    if (config.window_ceiling_exponent <= config.window_start_exponent)
        throw std::invalid_argument("window ceiling must exceed window start");

    constexpr int kFirstOctave = -4;  // octaves start at 2^-4
    const int steps = static_cast<int>(std::max<std::size_t>(config.steps_per_octave, 8));
    const int prelude = std::max(8, steps / 4);  // equal-width steps on [0, 2^-4]

    std::vector<double> nodes;
    nodes.reserve(static_cast<std::size_t>(
        prelude + steps * (config.window_ceiling_exponent - kFirstOctave) + 1));

    const double first = std::ldexp(1.0, kFirstOctave);
    for (int i = 0; i < prelude; ++i)
        nodes.push_back(first * static_cast<double>(i) / prelude);
    for (int k = kFirstOctave; k < config.window_ceiling_exponent; ++k) {
        const double lo = std::ldexp(1.0, k);
        const double hi = std::ldexp(1.0, k + 1);
        for (int i = 0; i < steps; ++i)
            nodes.push_back(lo + (hi - lo) * static_cast<double>(i) / steps);
    }
    nodes.push_back(std::ldexp(1.0, config.window_ceiling_exponent));
    return nodes;
}

ConditionVerdict classify_improper_integral(const std::vector<double>& nodes,
                                            const std::vector<double>& log_integrand,
                                            double lower_limit,
                                            const ClassifierConfig& config) {
    if (nodes.size() != log_integrand.size())
        throw std::invalid_argument("nodes and log-integrand size mismatch");
    if (nodes.size() < 2) throw std::invalid_argument("need at least two nodes");
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (!(nodes[i] > nodes[i - 1]))
            throw std::invalid_argument("nodes must be strictly increasing");
    const double ceiling = std::ldexp(1.0, config.window_ceiling_exponent);
    if (nodes.back() < ceiling * (1.0 - 1e-12))
        throw std::invalid_argument("nodes do not reach the final truncation radius");

    std::size_t start = 0;
    while (start + 1 < nodes.size() && nodes[start] < lower_limit * (1.0 - 1e-12))
        ++start;

    ConditionVerdict out;
    double log_partial = kNegInf;
    std::vector<double> window_terms;
    int next_exponent = config.window_start_exponent;

    for (std::size_t i = start; i + 1 < nodes.size(); ++i) {
        const double width = nodes[i + 1] - nodes[i];
        const double term =
            std::log(0.5 * width) + log_add_exp(log_integrand[i], log_integrand[i + 1]);
        window_terms.push_back(term);

        const double next_radius = std::ldexp(1.0, next_exponent);
        if (next_exponent <= config.window_ceiling_exponent &&
            nodes[i + 1] >= next_radius * (1.0 - 1e-12)) {
            const double log_inc = log_sum_exp(window_terms);
            log_partial = log_add_exp(log_partial, log_inc);
            out.windows.push_back({next_radius, log_inc, log_partial});
            window_terms.clear();
            ++next_exponent;
        }
    }

    if (out.windows.empty())
        throw std::invalid_argument("no truncation window was completed");

    out.log_total = log_partial;
    if (log_partial < 709.0) out.total = std::exp(log_partial);

    // Rule 1: any single window increment past the overflow guard certifies
    // divergence (the integrand's mass grows explosively with the radius).
    for (const WindowRecord& w : out.windows) {
        if (w.log_increment > config.log_increment_overflow) {
            out.verdict = IntegralVerdict::divergent;
            std::ostringstream os;
            os << "divergent: window increment at R=" << format_radius(w.truncation)
               << " has log " << w.log_increment << ", above the overflow guard "
               << config.log_increment_overflow;
            out.rationale = os.str();
            return out;
        }
    }

    // Rule 2: the final increment has decayed past the representable floor —
    // the tail carries no measurable mass.
    const double last_inc = out.windows.back().log_increment;
    if (last_inc <= config.log_increment_floor) {
        out.verdict = IntegralVerdict::convergent;
        out.tail_estimate = 0.0;
        std::ostringstream os;
        os << "convergent: final window increment has log "
           << (last_inc == kNegInf ? "-inf" : std::to_string(last_inc))
           << ", below the floor " << config.log_increment_floor
           << "; the tail mass is exhausted";
        out.rationale = os.str();
        return out;
    }

    const int needed = config.ratio_window_count;
    if (static_cast<int>(out.windows.size()) < needed + 1) {
        out.verdict = IntegralVerdict::inconclusive;
        out.rationale = "inconclusive: not enough truncation windows to measure decay";
        return out;
    }

    // Trailing increment ratios, oldest first.
    std::vector<double> ratios;
    for (std::size_t j = out.windows.size() - static_cast<std::size_t>(needed);
         j < out.windows.size(); ++j) {
        const double prev = out.windows[j - 1].log_increment;
        const double cur = out.windows[j].log_increment;
        ratios.push_back(std::exp(cur - prev));
    }
    const double max_ratio = *std::max_element(ratios.begin(), ratios.end());
    const double min_ratio = *std::min_element(ratios.begin(), ratios.end());

    // Rule 3: increments stopped decaying across all trailing windows.
    if (min_ratio >= config.divergent_ratio) {
        out.verdict = IntegralVerdict::divergent;
        std::ostringstream os;
        os << "divergent: trailing window increment ratios stay at or above "
           << config.divergent_ratio << " (min " << min_ratio
           << "); doubling the truncation keeps adding mass";
        out.rationale = os.str();
        return out;
    }

    // Geometric tail extrapolation with the worst trailing ratio.
    std::optional<double> tail;
    if (max_ratio < 1.0) {
        const double log_tail =
            last_inc + std::log(max_ratio) - std::log1p(-max_ratio);
        tail = std::exp(log_tail);
    }

    // Rule 4: geometric decay certified across all trailing windows AND the
    // extrapolated tail already negligible next to the accumulated mass
    // (a convergent verdict always carries a defensible tail estimate).
    if (max_ratio <= config.convergent_ratio) {
        if (tail && out.total &&
            *tail <= config.tail_epsilon * (1.0 + *out.total)) {
            out.verdict = IntegralVerdict::convergent;
            out.tail_estimate = tail;
            std::ostringstream os;
            os << "convergent: trailing window increment ratios stay at or below "
               << config.convergent_ratio << " (max " << max_ratio
               << ") and the geometric tail estimate " << *tail
               << " is below " << config.tail_epsilon << " * (1 + partial integral)";
            out.rationale = os.str();
            return out;
        }
        out.verdict = IntegralVerdict::inconclusive;
        std::ostringstream os;
        os << "inconclusive: increments decay geometrically (max trailing ratio "
           << max_ratio << ") but the extrapolated tail "
           << (tail ? std::to_string(*tail) : std::string("n/a"))
           << " is not yet negligible at this truncation";
        out.rationale = os.str();
        return out;
    }

    // Rule 5: ratios sit between the thresholds, but the extrapolated tail is
    // negligible next to the accumulated mass.
    if (tail && out.total && *tail <= config.tail_epsilon * (1.0 + *out.total)) {
        out.verdict = IntegralVerdict::convergent;
        out.tail_estimate = tail;
        std::ostringstream os;
        os << "convergent: extrapolated tail " << *tail << " is below "
           << config.tail_epsilon << " * (1 + partial integral)";
        out.rationale = os.str();
        return out;
    }

    out.verdict = IntegralVerdict::inconclusive;
    {
        std::ostringstream os;
        os << "inconclusive: trailing increment ratios lie between the convergence "
              "threshold "
           << config.convergent_ratio << " and the divergence threshold "
           << config.divergent_ratio << " (range [" << min_ratio << ", " << max_ratio
           << "]) and the extrapolated tail is not negligible";
        out.rationale = os.str();
    }
    return out;
}

}  // namespace blowup
