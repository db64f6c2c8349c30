#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "blowup/job.hpp"
#include "blowup/verify.hpp"

int main(int argc, char** argv) {
    CLI::App app{
        "blowup-lab: comparison solutions and existence classification for\n"
        "the radial blow-up problem  laplace(u) + |grad u| = p(x) f(u)"};
    app.require_subcommand(1);

    std::string job_path;
    std::string out_dir = ".";
    CLI::App* run = app.add_subcommand("run", "execute a job file and write report.json");
    run->add_option("job", job_path, "path to the job JSON document")
        ->required()
        ->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "output directory for report.json and CSV exports");

    CLI::App* fixtures =
        app.add_subcommand("fixtures", "list the builtin potential fixtures");

    std::size_t trials = 500;
    std::uint64_t seed = 7;
    std::vector<int> dimensions;
    CLI::App* check = app.add_subcommand(
        "check", "randomized kernel-domination check across dimensions");
    check->add_option("--trials", trials, "random potentials per dimension")
        ->check(CLI::PositiveNumber);
    check->add_option("--seed", seed, "base seed for the trial generator");
    check->add_option("--dimension", dimensions,
                      "dimension to check (repeatable; default 3 4 5 10)");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return blowup::run_job(job_path, out_dir);

    if (fixtures->parsed()) {
        std::cout << blowup::fixture_listing();
        return 0;
    }

    if (check->parsed()) {
        if (dimensions.empty()) dimensions = {3, 4, 5, 10};
        bool all_clean = true;
        for (int n : dimensions) {
            try {
                const blowup::HarnessReport rep =
                    blowup::inequality_harness(n, trials, seed);
                std::printf(
                    "N=%-3d trials=%zu violations=%zu worstMargin=%.3e worstExcess=%.3e\n",
                    n, rep.trials, rep.violations, rep.worst_margin,
                    rep.worst_excess);
                for (const std::string& f : rep.failures)
                    std::cout << "    " << f << "\n";
                if (rep.violations != 0) all_clean = false;
            } catch (const blowup::ModelError& e) {
                std::cerr << "N=" << n << " error [" << e.code << "]: " << e.what()
                          << "\n";
                all_clean = false;
            }
        }
        return all_clean ? 0 : 1;
    }
    return 0;
}
