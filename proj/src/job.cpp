#include "blowup/job.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

#include "blowup/classifier.hpp"
#include "blowup/solver.hpp"
#include "blowup/verify.hpp"

namespace blowup {

namespace {

using nlohmann::json;

constexpr double kLogDoubleMax = 709.0;

/// JSON has no inf/nan literals; non-finite diagnostics serialize as null.
json json_num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

[[noreturn]] void bad_input(const std::string& msg) {
    throw std::invalid_argument(msg);
}

void expect_keys(const json& obj, const char* where,
                 std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known)
            bad_input(std::string("unknown key \"") + it.key() + "\" in " + where);
    }
}

double get_num(const json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number()) bad_input(std::string(key) + " must be a number");
    return obj.at(key).get<double>();
}

std::int64_t get_int(const json& obj, const char* key, std::int64_t fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number_integer())
        bad_input(std::string(key) + " must be an integer");
    return obj.at(key).get<std::int64_t>();
}

bool get_bool(const json& obj, const char* key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_boolean()) bad_input(std::string(key) + " must be a boolean");
    return obj.at(key).get<bool>();
}

std::string get_str(const json& obj, const char* key, const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_string()) bad_input(std::string(key) + " must be a string");
    return obj.at(key).get<std::string>();
}

const char* verdict_name(IntegralVerdict v) {
    switch (v) {
        case IntegralVerdict::convergent: return "convergent";
        case IntegralVerdict::divergent: return "divergent";
        default: return "inconclusive";
    }
}

json verdict_json(const ConditionVerdict& v) {
    json windows = json::array();
    json partials = json::array();
    for (const WindowRecord& w : v.windows) {
        const bool representable = w.log_partial < kLogDoubleMax;
        const json partial =
            representable ? json(std::exp(w.log_partial)) : json(nullptr);
        windows.push_back({{"truncation", w.truncation},
                           {"logIncrement", json_num(w.log_increment)},
                           {"logPartial", json_num(w.log_partial)},
                           {"partial", partial}});
        partials.push_back(json::array({w.truncation, partial}));
    }
    json out = {{"verdict", verdict_name(v.verdict)},
                {"partialValues", partials},
                {"windows", windows},
                {"total", v.total ? json(*v.total) : json(nullptr)},
                {"logTotal", json_num(v.log_total)},
                {"rationale", v.rationale}};
    if (v.tail_estimate) out["tailEstimate"] = *v.tail_estimate;
    return out;
}

/// Exit-code class for a model error: input errors dominate numerical ones,
/// numerical dominate failed mathematical checks.
int error_exit_class(const std::string& code) {
    static const std::set<std::string> input = {
        "invalid-dimension", "invalid-potential",    "unknown-fixture",
        "invalid-nonlinearity", "unbounded-ratio",   "negative-potential",
        "invalid-base",      "invalid-envelope"};
    static const std::set<std::string> math = {"sandwich-violation",
                                               "bound-violation"};
    if (input.count(code)) return 2;
    if (math.count(code)) return 1;
    return 3;  // sampling-failure, threshold-overflow, no-convergence,
               // step-failure, divergent-h-integral, nonpositive-values
}

json error_json(const ModelError& e) {
    return {{"code", e.code}, {"message", e.what()}};
}

const FixtureInfo* find_fixture(const std::string& tag) {
    for (const FixtureInfo& f : fixture_catalog())
        if (f.tag == tag) return &f;
    return nullptr;
}

/// Deep copy; PotentialSpec is move-only because it owns expression trees.
PotentialSpec clone_spec(const PotentialSpec& s) {
    PotentialSpec c;
    c.dimension = s.dimension;
    c.body = s.body.clone();
    c.radial = s.radial;
    c.sphere_samples = s.sphere_samples;
    c.refinement_rounds = s.refinement_rounds;
    c.tag = s.tag;
    c.description = s.description;
    if (s.explicit_solution) c.explicit_solution = s.explicit_solution->clone();
    c.default_nonlinearity = s.default_nonlinearity;
    return c;
}

struct csv_builder {
    std::string text = "r,value\n";
    void row(double r, double v) {
        text += fmt17(r);
        text += ',';
        text += fmt17(v);
        text += '\n';
    }
};

std::string solution_csv(const RadialGrid& grid, const GridFunction& v) {
    csv_builder csv;
    for (std::size_t i = 0; i < grid.size(); ++i) csv.row(grid[i], v[i]);
    return csv.text;
}

/// Worst excess of the raw iterate over the uniform growth envelope
/// b * e^{M r}; nodes where the envelope exceeds double range cannot be
/// violated by a finite iterate and are skipped.
double exponential_bound_excess(const SolveReport& rep, double growth_rate) {
    double worst = std::numeric_limits<double>::lowest();
    const double log_b = std::log(rep.base_value);
    for (std::size_t i = 0; i < rep.grid.size(); ++i) {
        const double log_bound = log_b + growth_rate * rep.grid[i];
        if (log_bound > kLogDoubleMax) continue;
        worst = std::max(worst, rep.solution_raw[i] - std::exp(log_bound));
    }
    return worst;
}

json bound_check(double max_excess, double allowance) {
    return {{"maxExcess", json_num(max_excess)},
            {"allowance", allowance},
            {"pass", max_excess <= allowance}};
}

json solve_report_json(const SolveReport& rep, json bound_checks,
                       std::optional<double> oracle_err) {
    json trace = json::array();
    for (double t : rep.sup_norm_trace) trace.push_back(t);
    json out = {{"baseValue", rep.base_value},
                {"iterations", rep.iterations},
                {"converged", rep.converged},
                {"supNormTrace", trace},
                {"epsQuad", rep.eps_quad},
                {"boundChecks", std::move(bound_checks)},
                {"finalValue", rep.solution[rep.grid.size() - 1]}};
    if (oracle_err) out["oracleMaxRelError"] = *oracle_err;
    return out;
}

bool all_pass(const json& bound_checks) {
    for (auto it = bound_checks.begin(); it != bound_checks.end(); ++it)
        if (it.value().contains("pass") && !it.value().at("pass").get<bool>())
            return false;
    return true;
}

}  // namespace

JobFile parse_job(const json& doc) {
    if (!doc.is_object()) bad_input("job document must be a JSON object");
    expect_keys(doc, "the job document",
                {"dimension", "potential", "nonlinearity", "grid", "classifier",
                 "solver", "verify", "propertyCheck", "tasks"});

    JobFile job;
    job.dimension = static_cast<int>(get_int(doc, "dimension", 3));
    if (job.dimension < 3)
        throw ModelError("invalid-dimension", "the problem class needs dimension >= 3");

    if (!doc.contains("potential") || !doc.at("potential").is_object())
        bad_input("job needs a \"potential\" object");
    const json& pot = doc.at("potential");
    expect_keys(pot, "potential",
                {"fixture", "expression", "params", "g", "radial", "sphereSamples",
                 "refinementRounds", "explicitSolution"});
    job.fixture = get_str(pot, "fixture", "");
    job.expression = get_str(pot, "expression", "");
    if (job.fixture.empty() == job.expression.empty())
        bad_input("potential needs exactly one of \"fixture\" or \"expression\"");
    if (pot.contains("params")) {
        if (!job.expression.empty())
            bad_input("\"params\" applies to fixture potentials only");
        if (!pot.at("params").is_object()) bad_input("params must be an object");
        for (auto it = pot.at("params").begin(); it != pot.at("params").end(); ++it) {
            if (!it.value().is_number())
                bad_input("fixture parameter \"" + it.key() + "\" must be a number");
            job.params[it.key()] = it.value().get<double>();
        }
    }
    job.g_text = get_str(pot, "g", "");
    if (!job.g_text.empty() && !job.expression.empty())
        bad_input("\"g\" applies to fixture potentials only");
    job.radial = get_bool(pot, "radial", false);
    if (pot.contains("radial") && !job.fixture.empty())
        bad_input("\"radial\" applies to expression potentials only");
    job.sphere_samples = static_cast<int>(get_int(pot, "sphereSamples", 512));
    if (job.sphere_samples < 8) bad_input("sphereSamples must be at least 8");
    job.refinement_rounds =
        static_cast<int>(get_int(pot, "refinementRounds", 3));
    if (job.refinement_rounds < 0) bad_input("refinementRounds must be >= 0");
    job.explicit_solution = get_str(pot, "explicitSolution", "");

    if (doc.contains("nonlinearity")) {
        const json& nl = doc.at("nonlinearity");
        if (!nl.is_object()) bad_input("nonlinearity must be an object");
        expect_keys(nl, "nonlinearity", {"expression", "lambdaOverride"});
        job.f_text = get_str(nl, "expression", "");
        if (nl.contains("lambdaOverride")) {
            const double lo = get_num(nl, "lambdaOverride", 0.0);
            job.lambda_override = lo;
        }
    } else {
        job.f_text.clear();
    }

    if (doc.contains("grid")) {
        const json& g = doc.at("grid");
        if (!g.is_object()) bad_input("grid must be an object");
        expect_keys(g, "grid", {"rMax", "nodeCount", "gradingExponent"});
        job.r_max = get_num(g, "rMax", job.r_max);
        job.node_count = static_cast<std::size_t>(
            get_int(g, "nodeCount", static_cast<std::int64_t>(job.node_count)));
        job.grading_exponent = get_num(g, "gradingExponent", job.grading_exponent);
    }

    if (doc.contains("classifier")) {
        const json& c = doc.at("classifier");
        if (!c.is_object()) bad_input("classifier must be an object");
        expect_keys(c, "classifier",
                    {"windowStartExponent", "windowCeilingExponent",
                     "convergentRatio", "divergentRatio", "tailEpsilon",
                     "ratioWindowCount", "stepsPerOctave"});
        ClassifierConfig& cc = job.classifier;
        cc.window_start_exponent = static_cast<int>(
            get_int(c, "windowStartExponent", cc.window_start_exponent));
        cc.window_ceiling_exponent = static_cast<int>(
            get_int(c, "windowCeilingExponent", cc.window_ceiling_exponent));
        cc.convergent_ratio = get_num(c, "convergentRatio", cc.convergent_ratio);
        cc.divergent_ratio = get_num(c, "divergentRatio", cc.divergent_ratio);
        cc.tail_epsilon = get_num(c, "tailEpsilon", cc.tail_epsilon);
        cc.ratio_window_count = static_cast<int>(
            get_int(c, "ratioWindowCount", cc.ratio_window_count));
        cc.steps_per_octave = static_cast<std::size_t>(
            get_int(c, "stepsPerOctave",
                    static_cast<std::int64_t>(cc.steps_per_octave)));
        if (cc.window_ceiling_exponent <= cc.window_start_exponent)
            bad_input("windowCeilingExponent must exceed windowStartExponent");
        if (cc.ratio_window_count < 1) bad_input("ratioWindowCount must be >= 1");
    }

    if (doc.contains("solver")) {
        const json& s = doc.at("solver");
        if (!s.is_object()) bad_input("solver must be an object");
        expect_keys(s, "solver", {"b", "tol", "maxIterations", "richardson"});
        if (s.contains("b")) {
            const double b = get_num(s, "b", 0.0);
            if (!(b >= 1.0))
                throw ModelError("invalid-base", "base value must satisfy b >= 1");
            job.b_override = b;
        }
        job.tolerance = get_num(s, "tol", job.tolerance);
        if (!(job.tolerance > 0.0)) bad_input("tol must be positive");
        job.max_iterations = static_cast<int>(
            get_int(s, "maxIterations", job.max_iterations));
        if (job.max_iterations < 1) bad_input("maxIterations must be >= 1");
        job.richardson = get_bool(s, "richardson", job.richardson);
    }

    if (doc.contains("verify")) {
        const json& v = doc.at("verify");
        if (!v.is_object()) bad_input("verify must be an object");
        expect_keys(v, "verify",
                    {"samples", "residualTolerance", "stepScale", "ballRadius"});
        job.residual_samples = static_cast<std::size_t>(get_int(
            v, "samples", static_cast<std::int64_t>(job.residual_samples)));
        if (job.residual_samples == 0) bad_input("samples must be >= 1");
        job.residual_tolerance =
            get_num(v, "residualTolerance", job.residual_tolerance);
        job.step_scale = get_num(v, "stepScale", job.step_scale);
        job.ball_radius = get_num(v, "ballRadius", job.ball_radius);
        if (!(job.residual_tolerance > 0.0) || !(job.step_scale > 0.0) ||
            !(job.ball_radius > 0.0))
            bad_input("verify parameters must be positive");
    }

    if (doc.contains("propertyCheck")) {
        const json& p = doc.at("propertyCheck");
        if (!p.is_object()) bad_input("propertyCheck must be an object");
        expect_keys(p, "propertyCheck", {"trials", "seed"});
        const std::int64_t trials = get_int(
            p, "trials", static_cast<std::int64_t>(job.harness_trials));
        if (trials < 1) bad_input("trials must be >= 1");
        job.harness_trials = static_cast<std::size_t>(trials);
        job.harness_seed = static_cast<std::uint64_t>(
            get_int(p, "seed", static_cast<std::int64_t>(job.harness_seed)));
    }

    if (doc.contains("tasks")) {
        if (!doc.at("tasks").is_array()) bad_input("tasks must be an array");
        job.tasks.clear();
        for (const json& t : doc.at("tasks")) {
            if (!t.is_string()) bad_input("tasks must be strings");
            job.tasks.push_back(t.get<std::string>());
        }
        if (job.tasks.empty()) bad_input("tasks must not be empty");
    }
    static const std::set<std::string> known_tasks = {
        "classify", "solve", "verify-explicit", "property-check"};
    for (const std::string& t : job.tasks)
        if (!known_tasks.count(t)) bad_input("unknown task \"" + t + "\"");

    // Resolve fixture defaults into the job so the echo is self-contained.
    if (!job.fixture.empty()) {
        const FixtureInfo* info = find_fixture(job.fixture);
        if (info == nullptr)
            throw ModelError("unknown-fixture",
                             "no builtin fixture is tagged \"" + job.fixture + "\"");
        for (const auto& [k, v] : info->default_params)
            if (!job.params.count(k)) job.params[k] = v;
        if (job.g_text.empty()) job.g_text = info->default_g;
        if (job.f_text.empty()) job.f_text = info->default_nonlinearity;
        if (job.explicit_solution.empty())
            job.explicit_solution = info->explicit_solution;
    }
    if (job.f_text.empty()) job.f_text = "s";

    // Eager validation: expressions must parse, the nonlinearity must satisfy
    // its standing assumptions, grid parameters must be buildable.
    if (!job.expression.empty()) {
        Expr p = parse_expression(job.expression, job.dimension);
        (void)p;
    }
    if (!job.explicit_solution.empty()) {
        Expr u = parse_expression(job.explicit_solution, job.dimension);
        (void)u;
    }
    if (job.lambda_override && !(*job.lambda_override > 0.0))
        throw ModelError("invalid-nonlinearity", "lambdaOverride must be positive");
    (void)make_nonlinearity(job.f_text, job.lambda_override);
    (void)build_grid(job.r_max, job.node_count, job.grading_exponent);
    return job;
}

json job_echo(const JobFile& job) {
    json pot;
    if (!job.fixture.empty()) {
        pot["fixture"] = job.fixture;
        json params = json::object();
        for (const auto& [k, v] : job.params) params[k] = v;
        pot["params"] = params;
    } else {
        pot["expression"] = job.expression;
        pot["radial"] = job.radial;
    }
    if (!job.g_text.empty() && !job.fixture.empty()) pot["g"] = job.g_text;
    pot["sphereSamples"] = job.sphere_samples;
    pot["refinementRounds"] = job.refinement_rounds;
    if (!job.explicit_solution.empty())
        pot["explicitSolution"] = job.explicit_solution;

    json nl = {{"expression", job.f_text}};
    if (job.lambda_override) nl["lambdaOverride"] = *job.lambda_override;

    json solver = {{"tol", job.tolerance},
                   {"maxIterations", job.max_iterations},
                   {"richardson", job.richardson}};
    if (job.b_override) solver["b"] = *job.b_override;

    return {{"dimension", job.dimension},
            {"potential", pot},
            {"nonlinearity", nl},
            {"grid",
             {{"rMax", job.r_max},
              {"nodeCount", job.node_count},
              {"gradingExponent", job.grading_exponent}}},
            {"classifier",
             {{"windowStartExponent", job.classifier.window_start_exponent},
              {"windowCeilingExponent", job.classifier.window_ceiling_exponent},
              {"convergentRatio", job.classifier.convergent_ratio},
              {"divergentRatio", job.classifier.divergent_ratio},
              {"tailEpsilon", job.classifier.tail_epsilon},
              {"ratioWindowCount", job.classifier.ratio_window_count},
              {"stepsPerOctave", job.classifier.steps_per_octave}}},
            {"solver", solver},
            {"verify",
             {{"samples", job.residual_samples},
              {"residualTolerance", job.residual_tolerance},
              {"stepScale", job.step_scale},
              {"ballRadius", job.ball_radius}}},
            {"propertyCheck",
             {{"trials", job.harness_trials}, {"seed", job.harness_seed}}},
            {"tasks", job.tasks}};
}

JobOutcome run_job_document(const JobFile& job) {
    using clock = std::chrono::steady_clock;
    const auto t_start = clock::now();
    const auto seconds_since = [](clock::time_point a, clock::time_point b) {
        return std::chrono::duration<double>(b - a).count();
    };

    JobOutcome out;
    bool math_fail = false;
    bool numerical_fail = false;
    json results = json::object();
    json task_timing = json::object();

    // --- model resolution (shared by every task) -------------------------
    PotentialSpec spec =
        !job.fixture.empty()
            ? make_fixture(job.fixture, job.dimension, job.params, job.g_text)
            : [&] {
                  PotentialSpec s;
                  s.dimension = job.dimension;
                  s.body = parse_expression(job.expression, job.dimension);
                  s.radial = job.radial;
                  s.tag = "custom";
                  return s;
              }();
    spec.sphere_samples = job.sphere_samples;
    spec.refinement_rounds = job.refinement_rounds;
    if (!job.explicit_solution.empty())
        spec.explicit_solution = parse_expression(job.explicit_solution, job.dimension);

    const Nonlinearity f = make_nonlinearity(job.f_text, job.lambda_override);
    const LambdaEstimate lambda = estimate_lambda(f);
    const double lambda_n = lambda.value / (job.dimension - 2);
    results["model"] = {{"lambda", lambda.value},
                        {"lambdaN", lambda_n},
                        {"lambdaStillIncreasing", lambda.still_increasing}};

    // Dependency order, deduplicated; a requested solve implies classify.
    std::vector<std::string> order;
    const auto wants = [&](const char* t) {
        return std::find(job.tasks.begin(), job.tasks.end(), t) != job.tasks.end();
    };
    if (wants("classify") || wants("solve")) order.push_back("classify");
    if (wants("solve")) order.push_back("solve");
    if (wants("verify-explicit")) order.push_back("verify-explicit");
    if (wants("property-check")) order.push_back("property-check");

    // Classification artifacts shared between the classify and solve tasks.
    std::optional<RadialBounds> class_bounds;
    std::optional<ExistenceReport> existence;
    const auto classification = [&]() -> const ExistenceReport& {
        if (!existence) {
            RadialGrid cgrid;
            cgrid.nodes = classifier_nodes(job.classifier);
            cgrid.r_max = cgrid.nodes.back();
            cgrid.grading = 1.0;
            class_bounds = extract_radial_bounds(spec, cgrid, lambda_n);
            existence = existence_verdict(*class_bounds, job.classifier);
        }
        return *existence;
    };

    for (const std::string& task : order) {
        const auto t_task = clock::now();
        try {
            if (task == "classify") {
                const ExistenceReport& rep = classification();
                results["classify"] = {{"status", "ok"},
                                       {"doi", verdict_json(rep.oscillation)},
                                       {"apatru", verdict_json(rep.envelope_mass)},
                                       {"theoremTwoVerdict", rep.verdict},
                                       {"note", rep.note}};
            } else if (task == "solve") {
                const ExistenceReport& rep = classification();
                if (rep.oscillation.verdict != IntegralVerdict::convergent) {
                    results["solve"] = {
                        {"status", "not-applicable"},
                        {"note",
                         "the weighted envelope-gap integral did not classify "
                         "convergent, so the threshold constants and the "
                         "comparison pair are undefined for this potential"}};
                } else {
                    Constants constants =
                        compute_constants(*class_bounds, lambda.value, job.classifier);
                    if (job.b_override) constants.b_threshold = *job.b_override;

                    const RadialGrid grid =
                        build_grid(job.r_max, job.node_count, job.grading_exponent);
                    const RadialBounds bounds =
                        extract_radial_bounds(spec, grid, lambda_n);
                    PicardConfig pc;
                    pc.tolerance = job.tolerance;
                    pc.max_iterations = job.max_iterations;
                    pc.richardson = job.richardson;
                    const SubSuperPair pair =
                        build_sub_super_pair(bounds, f, constants, pc);

                    const double allowance =
                        std::max(1e-8, 3.0 * pair.eps_quad);
                    const auto monotonicity = [&](const SolveReport& r) {
                        const double scale = r.solution_raw.sup_norm();
                        return bound_check(r.monotonicity_violation,
                                           1e-12 * (1.0 + scale));
                    };
                    const double growth = constants.growth_rate(job.r_max);

                    json sub_checks = {
                        {"monotonicity", monotonicity(pair.sub)},
                        {"gronwallBound",
                         bound_check(pair.sub.exp_bound_violation, allowance)},
                        {"amplificationBound",
                         bound_check(pair.weight_bound_violation, allowance)}};

                    const GridFunction lower = divergence_lower_bound(
                        grid, bounds.psi, f, pair.super.base_value, job.dimension);
                    double lower_excess = std::numeric_limits<double>::lowest();
                    for (std::size_t i = 0; i < grid.size(); ++i)
                        lower_excess = std::max(
                            lower_excess, lower[i] - pair.super.solution_raw[i]);
                    json super_checks = {
                        {"monotonicity", monotonicity(pair.super)},
                        {"exponentialBound",
                         bound_check(exponential_bound_excess(pair.super, growth),
                                     allowance)},
                        {"gronwallBound",
                         bound_check(pair.super.exp_bound_violation, allowance)},
                        {"divergenceLowerBound",
                         bound_check(lower_excess, allowance)}};

                    std::optional<double> sub_oracle, super_oracle;
                    if (job.r_max <= 50.0) {
                        const auto rel_error = [&](const SolveReport& r,
                                                   const GridFunction& env) {
                            const GridFunction ode = ode_reference_solution(
                                grid, env, f, r.base_value, job.dimension);
                            double worst = 0.0;
                            for (std::size_t i = 0; i < grid.size(); ++i)
                                worst = std::max(
                                    worst, std::fabs(r.solution[i] - ode[i]) /
                                               std::fabs(ode[i]));
                            return worst;
                        };
                        sub_oracle = rel_error(pair.sub, bounds.phi);
                        super_oracle = rel_error(pair.super, bounds.psi);
                    }

                    const bool pass = all_pass(sub_checks) && all_pass(super_checks);
                    if (!pass) math_fail = true;
                    results["solve"] = {
                        {"status", pass ? "ok" : "math-check-failed"},
                        {"constants",
                         {{"lambda", constants.lambda},
                          {"lambdaN", constants.lambda_n},
                          {"K", constants.k_amplification},
                          {"bThreshold", constants.b_threshold},
                          {"gapIntegral", constants.gap_integral},
                          {"weightedGapIntegral", constants.weighted_gap_integral},
                          {"M", growth}}},
                        {"sub",
                         solve_report_json(pair.sub, std::move(sub_checks),
                                           sub_oracle)},
                        {"super",
                         solve_report_json(pair.super, std::move(super_checks),
                                           super_oracle)},
                        {"sandwich",
                         {{"maxExcess", json_num(pair.sandwich_violation)},
                          {"allowance",
                           3.0 * pair.eps_quad +
                               1e-12 * (1.0 + pair.super.solution_raw.sup_norm())},
                          {"pass", true}}},
                        {"csv", {{"sub", "solve-sub.csv"}, {"super", "solve-super.csv"}}}};
                    out.csv_files.emplace_back(
                        "solve-sub.csv", solution_csv(grid, pair.sub.solution));
                    out.csv_files.emplace_back(
                        "solve-super.csv", solution_csv(grid, pair.super.solution));
                }
            } else if (task == "verify-explicit") {
                if (!spec.explicit_solution)
                    throw ModelError(
                        "invalid-potential",
                        "verify-explicit requested, but neither the job nor the "
                        "fixture provides an explicit solution");
                const ResidualReport rep = verify_explicit_solution(
                    *spec.explicit_solution, spec.body, f, job.dimension,
                    job.residual_samples, job.step_scale, job.ball_radius);
                const bool pass = rep.max_abs_relative <= job.residual_tolerance;
                if (!pass) math_fail = true;
                json points = json::array();
                for (const auto& p : rep.sample_points) {
                    json pt = json::array();
                    for (double c : p) pt.push_back(c);
                    points.push_back(pt);
                }
                json residuals = json::array();
                for (double r : rep.residuals) residuals.push_back(json_num(r));
                results["verifyExplicit"] = {
                    {"status", pass ? "ok" : "math-check-failed"},
                    {"maxAbsRelative", rep.max_abs_relative},
                    {"tolerance", job.residual_tolerance},
                    {"pass", pass},
                    {"samples", job.residual_samples},
                    {"samplePoints", points},
                    {"residuals", residuals}};
            } else if (task == "property-check") {
                const HarnessReport h =
                    inequality_harness(job.dimension, job.harness_trials,
                                       job.harness_seed);
                json failures = json::array();
                for (const std::string& s : h.failures) failures.push_back(s);
                const bool harness_pass = h.violations == 0;

                PotentialSpec base = clone_spec(spec);
                base.refinement_rounds = 0;
                PotentialSpec doubled = clone_spec(base);
                doubled.sphere_samples = 2 * base.sphere_samples;
                const RadialGrid pgrid =
                    build_grid(std::min(job.r_max, 20.0), 129, 1.5);
                const RadialBounds b1 = extract_radial_bounds(base, pgrid, lambda_n);
                const RadialBounds b2 =
                    extract_radial_bounds(doubled, pgrid, lambda_n);
                double phi_margin = std::numeric_limits<double>::lowest();
                double psi_margin = std::numeric_limits<double>::lowest();
                for (std::size_t i = 0; i < pgrid.size(); ++i) {
                    phi_margin = std::max(phi_margin, b1.phi[i] - b2.phi[i]);
                    psi_margin = std::max(psi_margin, b2.psi[i] - b1.psi[i]);
                }
                const bool sphere_pass = phi_margin <= 0.0 && psi_margin <= 0.0;
                if (!harness_pass || !sphere_pass) math_fail = true;
                results["propertyCheck"] = {
                    {"status",
                     harness_pass && sphere_pass ? "ok" : "math-check-failed"},
                    {"harness",
                     {{"dimension", job.dimension},
                      {"trials", h.trials},
                      {"seed", job.harness_seed},
                      {"violations", h.violations},
                      {"worstMargin", json_num(h.worst_margin)},
                      {"worstExcess", json_num(h.worst_excess)},
                      {"failures", failures},
                      {"pass", harness_pass}}},
                    {"sphereSampling",
                     {{"baseSamples", base.sphere_samples},
                      {"phiMargin", json_num(phi_margin)},
                      {"psiMargin", json_num(psi_margin)},
                      {"pass", sphere_pass}}}};
            }
        } catch (const ModelError& e) {
            const int cls = error_exit_class(e.code);
            if (cls == 2) throw;  // input errors abort the run
            if (cls == 3)
                numerical_fail = true;
            else
                math_fail = true;
            json key_result = {
                {"status", cls == 3 ? "numerical-error" : "math-check-failed"},
                {"error", error_json(e)}};
            const char* key = task == "verify-explicit"  ? "verifyExplicit"
                              : task == "property-check" ? "propertyCheck"
                                                         : task.c_str();
            results[key] = std::move(key_result);
        }
        task_timing[task] =
            seconds_since(t_task, clock::now());
    }

    out.exit_code = numerical_fail ? 3 : (math_fail ? 1 : 0);
    out.report = {{"echo", job_echo(job)},
                  {"results", results},
                  {"versions",
                   {{"blowupLab", "1.0.0"}, {"reportSchema", "1"}}},
                  {"timing",
                   {{"totalSeconds", seconds_since(t_start, clock::now())},
                    {"tasks", task_timing}}}};
    return out;
}

int run_job(const std::string& job_path, const std::string& out_dir) {
    try {
        std::ifstream in(job_path);
        if (!in) {
            std::cerr << "cannot open job file: " << job_path << "\n";
            return 2;
        }
        const json doc = json::parse(in);
        const JobFile job = parse_job(doc);
        const JobOutcome outcome = run_job_document(job);

        std::filesystem::create_directories(out_dir);
        const auto write_file = [&](const std::string& name,
                                    const std::string& contents) {
            const std::filesystem::path path =
                std::filesystem::path(out_dir) / name;
            std::ofstream f(path, std::ios::binary);
            f << contents;
            if (!f) throw std::runtime_error("cannot write " + path.string());
        };
        write_file("report.json", outcome.report.dump(2) + "\n");
        for (const auto& [name, contents] : outcome.csv_files)
            write_file(name, contents);
        return outcome.exit_code;
    } catch (const ModelError& e) {
        std::cerr << "error [" << e.code << "]: " << e.what() << "\n";
        return error_exit_class(e.code);
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    }
}

std::string fixture_listing() {
    std::ostringstream os;
    for (const FixtureInfo& f : fixture_catalog()) {
        os << f.tag << "\n";
        os << "  potential: p(x) = " << f.default_potential << "\n";
        if (!f.default_params.empty()) {
            os << "  parameters:";
            for (const auto& [k, v] : f.default_params)
                os << " " << k << " = " << v;
            os << "\n";
        }
        if (!f.default_g.empty()) os << "  profile: g(r) = " << f.default_g << "\n";
        os << "  nonlinearity: f(s) = " << f.default_nonlinearity << "\n";
        if (!f.explicit_solution.empty())
            os << "  explicit solution: u(x) = " << f.explicit_solution << "\n";
        os << "  " << f.description << "\n\n";
    }
    return os.str();
}

}  // namespace blowup
