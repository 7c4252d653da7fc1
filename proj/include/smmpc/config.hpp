#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "smmpc/harness.hpp"

namespace smmpc::config {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// A declarative experiment: one base scenario plus optional sweep grids.
struct Experiment {
    ScenarioConfig base;
    int runs = 1;
    std::vector<double> sweep_zeta;
    std::vector<double> sweep_gamma;
    std::vector<double> sweep_lambda_g;
    std::vector<int> sweep_L0;

    // Cartesian expansion of the sweep axes (the base alone when no sweep
    // is declared); scenario names carry the grid point.
    std::vector<ScenarioConfig> expand() const;
};

// Parses the experiment file format: TOML-style sections [plant], [data],
// [online], [controller], [task], [sweep] with key = value lines; values
// are strings, booleans, numbers (inf allowed for bounds) and single-line
// arrays. Unknown sections or keys are rejected with their path.
Experiment parse_string(const std::string& text, const std::string& origin = "<string>");
Experiment parse_file(const std::string& path);

// Canonical re-serialization; parsing it again yields an identical
// experiment.
std::string serialize(const Experiment& exp);

}  // namespace smmpc::config
