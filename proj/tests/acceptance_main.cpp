// Acceptance harness: exercises the end-to-end guarantees of the library and
// prints exactly one PASS/FAIL line per criterion. Exit code 0 iff all pass.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "blowup/classifier.hpp"
#include "blowup/convergence.hpp"
#include "blowup/grid.hpp"
#include "blowup/job.hpp"
#include "blowup/kernel.hpp"
#include "blowup/problem.hpp"
#include "blowup/solver.hpp"
#include "blowup/verify.hpp"

using namespace blowup;
using clock_type = std::chrono::steady_clock;

namespace {

int g_failures = 0;

double seconds_since(clock_type::time_point start) {
    return std::chrono::duration<double>(clock_type::now() - start).count();
}

void report(int index, const std::string& label, bool pass,
            const std::string& detail) {
    std::printf("criterion %d (%s): %s%s%s\n", index, label.c_str(),
                pass ? "PASS" : "FAIL", detail.empty() ? "" : " -- ",
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

void report_error(int index, const std::string& label, const std::exception& e) {
    report(index, label, false, std::string("threw: ") + e.what());
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

RadialGrid classifier_grid(const ClassifierConfig& config = {}) {
    RadialGrid g;
    g.nodes = classifier_nodes(config);
    g.r_max = g.nodes.back();
    g.grading = 1.0;
    return g;
}

struct FixtureModel {
    PotentialSpec spec;
    Nonlinearity f;
    double lambda = 0.0;
    double lambda_n = 0.0;
};

FixtureModel fixture_model(const std::string& tag, int dimension) {
    FixtureModel m{make_fixture(tag, dimension),
                   make_nonlinearity("s"), 0.0, 0.0};
    if (!m.spec.default_nonlinearity.empty())
        m.f = make_nonlinearity(m.spec.default_nonlinearity);
    m.lambda = estimate_lambda(m.f).value;
    m.lambda_n = m.lambda / (dimension - 2);
    return m;
}

std::size_t node_at(const RadialGrid& grid, double r) {
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (std::fabs(grid[i] - r) < 1e-9) return i;
    throw std::runtime_error("acceptance: grid is missing node " + std::to_string(r));
}

// --- criterion 1: kernel comparison inequality on random integrands --------

void criterion_1() {
    const std::string label = "kernel comparison inequality, 500 trials per dimension";
    try {
        const auto t0 = clock_type::now();
        std::size_t violations = 0;
        double worst_excess = -std::numeric_limits<double>::infinity();
        for (int dimension : {3, 4, 5, 10}) {
            const HarnessReport rep = inequality_harness(dimension, 500, 7);
            violations += rep.violations;
            worst_excess = std::max(worst_excess, rep.worst_excess);
        }
        const double secs = seconds_since(t0);
        const bool pass = violations == 0 && secs < 30.0;
        report(1, label, pass,
               "2000 trials, violations " + std::to_string(violations) +
                   ", worst excess " + num(worst_excess) + ", " + num(secs) + "s" +
                   (secs < 30.0 ? "" : " (budget 30s exceeded)"));
    } catch (const std::exception& e) {
        report_error(1, label, e);
    }
}

// --- criterion 2: explicit solution residual --------------------------------

void criterion_2() {
    const std::string label = "explicit solution residual <= 1e-7 in N = 3, 4, 5";
    try {
        double worst = 0.0;
        for (int dimension : {3, 4, 5}) {
            const FixtureModel m = fixture_model("remark2", dimension);
            const ResidualReport rep = verify_explicit_solution(
                *m.spec.explicit_solution, m.spec.body, m.f, dimension, 64, 2e-3, 2.0);
            worst = std::max(worst, rep.max_abs_relative);
        }
        report(2, label, worst <= 1e-7, "max relative residual " + num(worst));
    } catch (const std::exception& e) {
        report_error(2, label, e);
    }
}

// --- criterion 3: envelopes and decay rate of the rational model ------------

void criterion_3() {
    const std::string label = "rational-model envelopes, decay slope, hypothesis";
    try {
        const FixtureModel m = fixture_model("paper-example-1", 3);
        const RadialBounds bounds =
            extract_radial_bounds(m.spec, classifier_grid(), m.lambda_n);

        double worst_rel = 0.0;
        for (std::size_t i = 0; i < bounds.grid.size(); ++i) {
            const double r2 = bounds.grid[i] * bounds.grid[i];
            const double phi_exact = (1.0 + r2) / ((1.0 + r2) * (1.0 + r2) + 1.0);
            const double psi_exact = 1.0 / (2.0 + r2);
            worst_rel = std::max(worst_rel,
                                 std::fabs(bounds.phi[i] - phi_exact) / phi_exact);
            worst_rel = std::max(worst_rel,
                                 std::fabs(bounds.psi[i] - psi_exact) / psi_exact);
        }

        const DecayFit fit = verify_decay_rate(bounds, -2.0, 1e2, 1e4);
        const ConditionVerdict osc = classify_oscillation_integral(bounds);
        const bool pass = worst_rel <= 1e-4 && fit.slope >= -2.3 &&
                          fit.slope <= -1.7 &&
                          osc.verdict == IntegralVerdict::convergent;
        report(3, label, pass,
               "envelope error " + num(worst_rel) + ", slope " + num(fit.slope) +
                   ", oscillation integral " + osc.rationale.substr(0, 10));
    } catch (const std::exception& e) {
        report_error(3, label, e);
    }
}

// --- criterion 4: envelope gap of the exponential fixture -------------------

void criterion_4() {
    const std::string label = "exponential-fixture gap 6r^2 + r, hypothesis failure";
    try {
        const FixtureModel m = fixture_model("remark2", 3);
        const RadialBounds bounds =
            extract_radial_bounds(m.spec, classifier_grid(), m.lambda_n);

        double worst_rel = 0.0;
        for (std::size_t i = 0; i < bounds.grid.size(); ++i) {
            const double r = bounds.grid[i];
            if (r < 0.1 || r > 10.0) continue;
            const double exact = 6.0 * r * r + r;
            worst_rel = std::max(worst_rel, std::fabs(bounds.h[i] - exact) / exact);
        }
        const ConditionVerdict osc = classify_oscillation_integral(bounds);
        const bool pass =
            worst_rel <= 1e-3 && osc.verdict == IntegralVerdict::divergent;
        report(4, label, pass,
               "gap error " + num(worst_rel) + " on [0.1, 10], oscillation " +
                   (osc.verdict == IntegralVerdict::divergent ? "divergent"
                                                              : "not divergent"));
    } catch (const std::exception& e) {
        report_error(4, label, e);
    }
}

// --- criterion 5: existence verdicts, stable under refinement ---------------

void criterion_5() {
    const std::string label = "existence verdicts stable under doubled resolution";
    try {
        const struct {
            const char* tag;
            const char* expected;
        } table[] = {
            {"remark1-i", "entire large solution EXISTS (Theorem 2)"},
            {"remark1-ii", "entire large solution EXISTS (Theorem 2)"},
            {"paper-example-1", "NO entire large solution (Theorem 2)"},
        };
        ClassifierConfig finer_steps;
        finer_steps.steps_per_octave = 256;
        ClassifierConfig higher_ceiling;
        higher_ceiling.window_ceiling_exponent = 15;
        const ClassifierConfig configs[] = {{}, finer_steps, higher_ceiling};

        bool pass = true;
        std::string detail;
        for (const auto& row : table) {
            const FixtureModel m = fixture_model(row.tag, 3);
            for (const ClassifierConfig& config : configs) {
                const RadialBounds bounds = extract_radial_bounds(
                    m.spec, classifier_grid(config), m.lambda_n);
                const ExistenceReport rep = existence_verdict(bounds, config);
                if (rep.verdict != row.expected) {
                    pass = false;
                    detail += std::string(row.tag) + " gave \"" + rep.verdict + "\"; ";
                }
            }
        }
        if (pass) detail = "3 fixtures x 3 classifier resolutions all agree";
        report(5, label, pass, detail);
    } catch (const std::exception& e) {
        report_error(5, label, e);
    }
}

// --- criterion 6: certified inequalities of the comparison pair -------------

void criterion_6() {
    const std::string label = "comparison-pair inequalities on classifiable fixtures";
    try {
        bool pass = true;
        std::string detail;
        double worst_ratio = -std::numeric_limits<double>::infinity();
        for (const char* tag :
             {"constant", "paper-example-1", "remark1-i", "remark1-ii"}) {
            const FixtureModel m = fixture_model(tag, 3);
            const RadialBounds wide =
                extract_radial_bounds(m.spec, classifier_grid(), m.lambda_n);
            const Constants constants = compute_constants(wide, m.lambda);
            const RadialBounds bounds = extract_radial_bounds(
                m.spec, build_grid(20.0, 1025, 2.0), m.lambda_n);
            const SubSuperPair pair = build_sub_super_pair(bounds, m.f, constants);

            const double allowance = std::max(1e-8, 3.0 * pair.eps_quad);
            const double growth = constants.growth_rate(20.0);
            double uniform_excess = -std::numeric_limits<double>::infinity();
            const double log_b = std::log(pair.super.base_value);
            for (std::size_t i = 0; i < bounds.grid.size(); ++i) {
                const double log_bound = log_b + growth * bounds.grid[i];
                if (log_bound > 709.0) continue;
                uniform_excess =
                    std::max(uniform_excess,
                             pair.super.solution_raw[i] - std::exp(log_bound));
            }
            const double mono_tol_sub =
                1e-12 * (1.0 + pair.sub.solution_raw.sup_norm());
            const double mono_tol_super =
                1e-12 * (1.0 + pair.super.solution_raw.sup_norm());
            const double sandwich_allowance =
                3.0 * pair.eps_quad +
                1e-12 * (1.0 + pair.super.solution_raw.sup_norm());

            const struct {
                const char* name;
                double excess;
                double bound;
            } checks[] = {
                {"sub iterates nondecreasing", pair.sub.monotonicity_violation,
                 mono_tol_sub},
                {"super iterates nondecreasing", pair.super.monotonicity_violation,
                 mono_tol_super},
                {"super <= b e^{Mr}", uniform_excess, allowance},
                {"sub <= Gronwall cap", pair.sub.exp_bound_violation, allowance},
                {"super <= Gronwall cap", pair.super.exp_bound_violation, allowance},
                {"sub <= K Psi", pair.weight_bound_violation, allowance},
                {"sub <= super", pair.sandwich_violation, sandwich_allowance},
            };
            for (const auto& c : checks) {
                if (c.bound > 0.0)
                    worst_ratio = std::max(worst_ratio, c.excess / c.bound);
                if (c.excess > c.bound) {
                    pass = false;
                    detail += std::string(tag) + ": " + c.name + " excess " +
                              num(c.excess) + " > " + num(c.bound) + "; ";
                }
            }
        }
        if (pass)
            detail = "4 fixtures, 7 inequalities each, worst excess/allowance " +
                     num(worst_ratio);
        report(6, label, pass, detail);
    } catch (const std::exception& e) {
        report_error(6, label, e);
    }
}

// --- criterion 7: fixed point vs Runge-Kutta reference ----------------------

void criterion_7() {
    const std::string label = "fixed point vs reference integrator <= 1e-5";
    try {
        const Nonlinearity f = make_nonlinearity("s");
        bool pass = true;
        std::string detail;
        for (const char* tag : {"constant", "paper-example-1", "remark1-i"}) {
            const auto t0 = clock_type::now();
            const PotentialSpec spec = make_fixture(tag, 3);
            const RadialGrid grid = build_grid(20.0, 4096, 1.0);
            const RadialBounds bounds = extract_radial_bounds(spec, grid, 1.0);

            const SolveReport rep = picard_iterate(grid, bounds.psi, f, 1.0, 3, 1.0);
            const GridFunction ode =
                ode_reference_solution(grid, bounds.psi, f, 1.0, 3);
            double worst = 0.0;
            for (std::size_t i = 0; i < grid.size(); ++i)
                worst = std::max(worst,
                                 std::fabs(rep.solution[i] - ode[i]) / std::fabs(ode[i]));
            const double secs = seconds_since(t0);
            if (worst > 1e-5 || secs >= 10.0) pass = false;
            detail += std::string(tag) + " " + num(worst) + " in " + num(secs) + "s; ";
        }
        report(7, label, pass, detail);
    } catch (const std::exception& e) {
        report_error(7, label, e);
    }
}

// --- criterion 8: divergence witness grows with the truncation --------------

void criterion_8() {
    const std::string label = "divergence lower bound doubles from R = 128 to 1024";
    try {
        const FixtureModel m = fixture_model("remark1-i", 3);
        const RadialGrid grid = build_grid(1024.0, 4097, 1.0);
        const RadialBounds bounds = extract_radial_bounds(m.spec, grid, m.lambda_n);
        const GridFunction lower =
            divergence_lower_bound(grid, bounds.psi, m.f, 1.0, 3);
        const double at_128 = lower[node_at(grid, 128.0)];
        const double at_1024 = lower[node_at(grid, 1024.0)];
        const bool pass = at_1024 >= 2.0 * at_128;
        report(8, label, pass,
               "bound(1024) / bound(128) = " + num(at_1024 / at_128));
    } catch (const std::exception& e) {
        report_error(8, label, e);
    }
}

// --- criterion 9: deterministic reports --------------------------------------

void criterion_9() {
    const std::string label = "reports byte-identical across reruns modulo timing";
    try {
        nlohmann::json doc = {
            {"potential",
             {{"fixture", "remark2"}, {"sphereSamples", 64}, {"refinementRounds", 2}}},
            {"tasks", {"classify", "solve", "verify-explicit", "property-check"}},
            {"propertyCheck", {{"trials", 25}, {"seed", 7}}}};

        JobOutcome a = run_job_document(parse_job(doc));
        JobOutcome b = run_job_document(parse_job(doc));
        a.report.erase("timing");
        b.report.erase("timing");
        bool pass = a.exit_code == b.exit_code &&
                    a.report.dump(2) == b.report.dump(2) &&
                    a.csv_files.size() == b.csv_files.size();
        for (std::size_t i = 0; pass && i < a.csv_files.size(); ++i)
            pass = a.csv_files[i].first == b.csv_files[i].first &&
                   a.csv_files[i].second == b.csv_files[i].second;
        report(9, label, pass,
               pass ? "two runs of a 4-task job agree byte for byte"
                    : "reruns differ outside the timing section");
    } catch (const std::exception& e) {
        report_error(9, label, e);
    }
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    std::printf("acceptance: %d of 9 criteria passed\n", 9 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
