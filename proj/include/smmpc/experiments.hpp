#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smmpc/harness.hpp"

namespace smmpc {

struct ConfigResult {
    ScenarioConfig cfg;
    std::vector<RunResult> runs;
    McSummary summary;
};

struct ExampleReport {
    int id = 0;
    int n_runs = 0;
    std::uint64_t seed = 0;
    std::vector<ConfigResult> configs;
    bool pass = false;
    std::string detail;

    const ConfigResult* find(const std::string& name) const;
};

// Shared parameter block of the benchmark study: fourth-order plant,
// Q = R = 1, horizon 10, L0 = 4, task length 120, sinusoidal reference.
ScenarioConfig study_defaults(std::uint64_t seed);

// Monte Carlo run counts used when none are requested explicitly.
int default_runs(int example_id);

// The nine-point logarithmic grid on [10, 1000] used to oracle-tune DeePC.
std::vector<double> deepc_lambda_grid();

// Run one of the six benchmark studies. All configurations of a study share
// seeds run-by-run, so comparisons are paired. The report carries the
// outcome of the study's acceptance check.
ExampleReport run_example(int example_id, int n_runs, std::uint64_t seed, int jobs = 1);

}  // namespace smmpc
