#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "blowup/expr.hpp"
#include "blowup/job.hpp"
#include "blowup/problem.hpp"
#include "blowup/verify.hpp"
#include "json.hpp"

namespace py = pybind11;

PYBIND11_MODULE(_core, m) {
    m.doc() =
        "Comparison solutions and existence classification for the radial "
        "blow-up problem laplace(u) + |grad u| = p(x) f(u).";

    py::register_exception<blowup::ModelError>(m, "ModelError");

    m.def(
        "run_job_json",
        [](const std::string& job_json) {
            const nlohmann::json doc = nlohmann::json::parse(job_json);
            const blowup::JobFile job = blowup::parse_job(doc);
            const blowup::JobOutcome outcome = blowup::run_job_document(job);
            py::dict result;
            result["report_json"] = outcome.report.dump(2);
            result["exit_code"] = outcome.exit_code;
            py::dict csv;
            for (const auto& [name, contents] : outcome.csv_files)
                csv[py::str(name)] = contents;
            result["csv"] = csv;
            return result;
        },
        py::arg("job_json"),
        "Run a job document given as JSON text. Returns a dict with the "
        "report as JSON text, the process exit code, and the CSV exports.");

    m.def("fixture_listing", &blowup::fixture_listing,
          "Human-readable catalog of the builtin potential fixtures.");

    m.def(
        "fixture_tags",
        [] {
            std::vector<std::string> tags;
            for (const blowup::FixtureInfo& f : blowup::fixture_catalog())
                tags.push_back(f.tag);
            return tags;
        },
        "Tags of the builtin potential fixtures.");

    m.def(
        "eval_expression",
        [](const std::string& text, int dimension,
           const std::vector<double>& point) {
            const blowup::Expr e = blowup::parse_expression(text, dimension);
            return e.eval(point);
        },
        py::arg("text"), py::arg("dimension"), py::arg("point"),
        "Parse an expression over x1..xN, r, N and evaluate it at a point.");

    m.def(
        "kernel_check",
        [](int dimension, std::size_t trials, std::uint64_t seed) {
            const blowup::HarnessReport rep =
                blowup::inequality_harness(dimension, trials, seed);
            py::dict d;
            d["trials"] = rep.trials;
            d["violations"] = rep.violations;
            d["worst_margin"] = rep.worst_margin;
            d["worst_excess"] = rep.worst_excess;
            d["failures"] = rep.failures;
            return d;
        },
        py::arg("dimension") = 3, py::arg("trials") = 50, py::arg("seed") = 7,
        "Randomized check that the nested kernel stays below its closed-form "
        "bound; returns trial statistics (violations must be zero).");
}
