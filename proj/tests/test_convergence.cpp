#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "blowup/convergence.hpp"
#include "doctest.h"

using namespace blowup;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Samples log(f(r)) on the classifier grid, forcing exact zeros below `lower`.
template <typename F>
std::vector<double> sample_log(const std::vector<double>& nodes, double lower, F&& log_f) {
    std::vector<double> out(nodes.size(), kNegInf);
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i] >= lower) out[i] = log_f(nodes[i]);
    return out;
}

}  // namespace

TEST_CASE("log-space accumulation helpers") {
    CHECK(log_add_exp(std::log(2.0), std::log(3.0)) ==
          doctest::Approx(std::log(5.0)).epsilon(1e-14));
    CHECK(log_add_exp(1000.0, 1000.0) ==
          doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-14));
    CHECK(log_add_exp(kNegInf, 5.0) == 5.0);
    CHECK(log_add_exp(5.0, kNegInf) == 5.0);
    CHECK(log_add_exp(kNegInf, kNegInf) == kNegInf);

    CHECK(log_sum_exp({}) == kNegInf);
    CHECK(log_sum_exp({700.0, 700.0, 700.0}) ==
          doctest::Approx(700.0 + std::log(3.0)).epsilon(1e-14));
    CHECK(log_sum_exp({0.0, -800.0}) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("classifier grid covers the dyadic truncation radii") {
    const ClassifierConfig config;
    const std::vector<double> nodes = classifier_nodes(config);
    CHECK(nodes.front() == 0.0);
    CHECK(nodes.back() == std::ldexp(1.0, config.window_ceiling_exponent));
    for (std::size_t i = 1; i < nodes.size(); ++i) CHECK(nodes[i] > nodes[i - 1]);

    // every dyadic boundary 2^k must be an exact grid node
    for (int k = -4; k <= config.window_ceiling_exponent; ++k) {
        const double target = std::ldexp(1.0, k);
        bool found = false;
        for (double n : nodes)
            if (n == target) {
                found = true;
                break;
            }
        CHECK(found);
    }
}

TEST_CASE("classifier grid resolution follows steps_per_octave") {
    ClassifierConfig coarse;
    coarse.steps_per_octave = 64;
    ClassifierConfig fine;
    fine.steps_per_octave = 128;
    const auto a = classifier_nodes(coarse);
    const auto b = classifier_nodes(fine);
    CHECK(b.size() > a.size());
    CHECK(a.back() == b.back());

    ClassifierConfig bad;
    bad.window_ceiling_exponent = bad.window_start_exponent;
    CHECK_THROWS_AS(classifier_nodes(bad), std::invalid_argument);
}

TEST_CASE("inverse-square integrand classifies convergent with a defensible tail") {
    const ClassifierConfig config;
    const auto nodes = classifier_nodes(config);
    const auto logf =
        sample_log(nodes, 1.0, [](double r) { return -2.0 * std::log(r); });
    const ConditionVerdict v = classify_improper_integral(nodes, logf, 1.0, config);

    CHECK(v.verdict == IntegralVerdict::convergent);
    REQUIRE(v.total.has_value());
    // int_1^{2^14} r^-2 dr = 1 - 2^-14
    CHECK(*v.total == doctest::Approx(1.0 - std::ldexp(1.0, -14)).epsilon(1e-3));
    REQUIRE(v.tail_estimate.has_value());
    CHECK(*v.tail_estimate > 3e-5);
    CHECK(*v.tail_estimate < 1e-4);  // true tail is 2^-14 ~ 6.1e-5
    CHECK(*v.tail_estimate <= config.tail_epsilon * (1.0 + *v.total));
    CHECK(v.rationale.find("convergent") == 0);
}

TEST_CASE("slow power decay is honestly inconclusive at finite truncation") {
    // r^-1.5 converges, but its tail at R = 2^14 is ~1.6e-2: far above the
    // negligibility threshold, so no convergent verdict may be issued.
    const ClassifierConfig config;
    const auto nodes = classifier_nodes(config);
    const auto logf =
        sample_log(nodes, 1.0, [](double r) { return -1.5 * std::log(r); });
    const ConditionVerdict v = classify_improper_integral(nodes, logf, 1.0, config);

    CHECK(v.verdict == IntegralVerdict::inconclusive);
    CHECK(!v.tail_estimate.has_value());
    CHECK(v.rationale.find("not yet negligible") != std::string::npos);
}

TEST_CASE("harmonic integrand classifies divergent via stalled ratios") {
    const ClassifierConfig config;
    const auto nodes = classifier_nodes(config);
    const auto logf = sample_log(nodes, 1.0, [](double r) { return -std::log(r); });
    const ConditionVerdict v = classify_improper_integral(nodes, logf, 1.0, config);

    CHECK(v.verdict == IntegralVerdict::divergent);
    REQUIRE(v.total.has_value());
    CHECK(*v.total == doctest::Approx(14.0 * std::log(2.0)).epsilon(1e-3));
    CHECK(v.rationale.find("keeps adding mass") != std::string::npos);
}

TEST_CASE("borderline logarithmic integrands stay inconclusive") {
    const ClassifierConfig config;
    const auto nodes = classifier_nodes(config);
    // 1/(r log^2 r): convergent, but octave ratios ~0.86 sit between the
    // thresholds and the extrapolated tail is still large.
    {
        const auto logf = sample_log(nodes, 2.0, [](double r) {
            return -std::log(r) - 2.0 * std::log(std::log(r));
        });
        const ConditionVerdict v = classify_improper_integral(nodes, logf, 2.0, config);
        CHECK(v.verdict == IntegralVerdict::inconclusive);
    }
    // 1/(r log r): divergent, but the increments still decay slowly.
    {
        const auto logf = sample_log(nodes, 2.0, [](double r) {
            return -std::log(r) - std::log(std::log(r));
        });
        const ConditionVerdict v = classify_improper_integral(nodes, logf, 2.0, config);
        CHECK(v.verdict == IntegralVerdict::inconclusive);
    }
}

TEST_CASE("explosive growth trips the overflow guard") {
    const ClassifierConfig config;
    const auto nodes = classifier_nodes(config);
    const auto logf = sample_log(nodes, 0.0, [](double r) { return r; });  // e^r
    const ConditionVerdict v = classify_improper_integral(nodes, logf, 0.0, config);
    CHECK(v.verdict == IntegralVerdict::divergent);
    CHECK(v.rationale.find("overflow guard") != std::string::npos);
}

TEST_CASE("superexponential decay certifies an exhausted tail") {
    const ClassifierConfig config;
    const auto nodes = classifier_nodes(config);
    const auto logf = sample_log(nodes, 1.0, [](double r) { return -r; });  // e^-r
    const ConditionVerdict v = classify_improper_integral(nodes, logf, 1.0, config);
    CHECK(v.verdict == IntegralVerdict::convergent);
    REQUIRE(v.tail_estimate.has_value());
    CHECK(*v.tail_estimate == 0.0);
    REQUIRE(v.total.has_value());
    CHECK(*v.total == doctest::Approx(std::exp(-1.0)).epsilon(1e-3));
    CHECK(v.rationale.find("exhausted") != std::string::npos);
}

TEST_CASE("identically zero integrand is convergent with zero mass") {
    const ClassifierConfig config;
    const auto nodes = classifier_nodes(config);
    const std::vector<double> logf(nodes.size(), kNegInf);
    const ConditionVerdict v = classify_improper_integral(nodes, logf, 0.0, config);
    CHECK(v.verdict == IntegralVerdict::convergent);
    REQUIRE(v.total.has_value());
    CHECK(*v.total == 0.0);
    CHECK(v.tail_estimate.has_value());
}

TEST_CASE("mid-range ratios with a negligible tail still classify convergent") {
    // A small-amplitude power law r^-1.152 has octave ratio 2^-0.152 ~ 0.90:
    // between the thresholds, but the absolute tail is tiny.
    const ClassifierConfig config;
    const auto nodes = classifier_nodes(config);
    const auto logf = sample_log(nodes, 1.0, [](double r) {
        return std::log(1e-6) - 1.152 * std::log(r);
    });
    const ConditionVerdict v = classify_improper_integral(nodes, logf, 1.0, config);
    CHECK(v.verdict == IntegralVerdict::convergent);
    REQUIRE(v.tail_estimate.has_value());
    REQUIRE(v.total.has_value());
    CHECK(*v.tail_estimate <= config.tail_epsilon * (1.0 + *v.total));
}

TEST_CASE("mid-range ratios with heavy tail stay inconclusive") {
    const ClassifierConfig config;
    const auto nodes = classifier_nodes(config);
    const auto logf =
        sample_log(nodes, 1.0, [](double r) { return -1.05 * std::log(r); });
    const ConditionVerdict v = classify_improper_integral(nodes, logf, 1.0, config);
    CHECK(v.verdict == IntegralVerdict::inconclusive);
    CHECK(v.rationale.find("between the convergence") != std::string::npos);
}

TEST_CASE("window records carry consistent partial integrals") {
    const ClassifierConfig config;
    const auto nodes = classifier_nodes(config);
    const auto logf =
        sample_log(nodes, 1.0, [](double r) { return -2.0 * std::log(r); });
    const ConditionVerdict v = classify_improper_integral(nodes, logf, 1.0, config);

    REQUIRE(v.windows.size() ==
            static_cast<std::size_t>(config.window_ceiling_exponent -
                                     config.window_start_exponent + 1));
    for (std::size_t i = 0; i < v.windows.size(); ++i) {
        const int k = config.window_start_exponent + static_cast<int>(i);
        CHECK(v.windows[i].truncation == std::ldexp(1.0, k));
        if (i > 0) CHECK(v.windows[i].log_partial >= v.windows[i - 1].log_partial);
    }
    CHECK(v.log_total == v.windows.back().log_partial);
}

TEST_CASE("too few truncation windows yield an inconclusive verdict") {
    ClassifierConfig config;
    config.window_start_exponent = 13;
    config.window_ceiling_exponent = 14;
    const auto nodes = classifier_nodes(config);
    const auto logf =
        sample_log(nodes, 1.0, [](double r) { return -2.0 * std::log(r); });
    const ConditionVerdict v = classify_improper_integral(nodes, logf, 1.0, config);
    CHECK(v.verdict == IntegralVerdict::inconclusive);
    CHECK(v.rationale.find("not enough truncation windows") != std::string::npos);
}

TEST_CASE("classifier validates its inputs") {
    const ClassifierConfig config;
    const auto nodes = classifier_nodes(config);
    CHECK_THROWS_AS(
        classify_improper_integral(nodes, std::vector<double>(3, 0.0), 0.0, config),
        std::invalid_argument);
    CHECK_THROWS_AS(
        classify_improper_integral({0.0, 1.0, 1.0}, std::vector<double>(3, 0.0), 0.0,
                                   config),
        std::invalid_argument);
    CHECK_THROWS_AS(
        classify_improper_integral({0.0, 1.0, 2.0}, std::vector<double>(3, 0.0), 0.0,
                                   config),
        std::invalid_argument);  // never reaches 2^14
}
