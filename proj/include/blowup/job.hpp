#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "blowup/convergence.hpp"
#include "json.hpp"

namespace blowup {

/// A fully resolved job: every optional input filled with its default, so the
/// echo section of a report reproduces the run exactly.
struct JobFile {
    int dimension = 3;

    // Potential: exactly one of fixture / expression is nonempty.
    std::string fixture;
    std::string expression;
    std::map<std::string, double> params;  // fixture parameter overrides
    std::string g_text;                    // anisotropy profile override
    bool radial = false;                   // expression potentials only
    int sphere_samples = 512;
    int refinement_rounds = 3;
    std::string explicit_solution;  // candidate solution for verify-explicit

    // Nonlinearity.
    std::string f_text = "s";
    std::optional<double> lambda_override;

    // Solve grid.
    double r_max = 20.0;
    std::size_t node_count = 1024;
    double grading_exponent = 2.0;

    ClassifierConfig classifier;

    // Fixed-point solver.
    std::optional<double> b_override;  // super-solution base, else threshold
    double tolerance = 1e-10;
    int max_iterations = 200;
    bool richardson = true;

    // verify-explicit task.
    std::size_t residual_samples = 64;
    double residual_tolerance = 1e-7;
    double step_scale = 2e-3;
    double ball_radius = 2.0;

    // property-check task.
    std::size_t harness_trials = 200;
    std::uint64_t harness_seed = 7;

    // Subset of {classify, solve, verify-explicit, property-check},
    // deduplicated into dependency order.
    std::vector<std::string> tasks = {"classify"};
};

/// Parses and validates a job document. Unknown keys, missing potential,
/// unknown fixtures or tasks, malformed expressions and out-of-range values
/// all throw (std::invalid_argument, ModelError, ParseError or
/// nlohmann::json::exception); run_job maps every parse failure to the
/// input-error exit code.
JobFile parse_job(const nlohmann::json& doc);

/// The resolved job as JSON: the report's echo section. parse_job(job_echo(j))
/// resolves to the same job.
nlohmann::json job_echo(const JobFile& job);

struct JobOutcome {
    nlohmann::json report;
    /// 0 = all tasks ran and every asserted bound held; 1 = a mathematical
    /// check failed; 2 = input/validation error; 3 = numerical failure.
    /// Precedence when several tasks fail: 2 > 3 > 1.
    int exit_code = 0;
    /// CSV exports (file name, contents); written next to report.json.
    std::vector<std::pair<std::string, std::string>> csv_files;
};

/// Runs the job's tasks in dependency order (classification gates the solve)
/// and assembles the deterministic report; the only run-to-run variation is
/// the top-level "timing" object.
JobOutcome run_job_document(const JobFile& job);

/// CLI entry: reads and validates the job file, runs it, writes report.json
/// and the CSV exports under out_dir (created if needed). Returns the exit
/// code; diagnostics for input errors go to stderr.
int run_job(const std::string& job_path, const std::string& out_dir);

/// Human-readable listing of the builtin fixtures: tags, formulas, defaults.
std::string fixture_listing();

}  // namespace blowup
