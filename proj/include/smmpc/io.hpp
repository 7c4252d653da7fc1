#pragma once

#include <string>
#include <vector>

#include "smmpc/experiments.hpp"
#include "smmpc/harness.hpp"
#include "smmpc/plant.hpp"
#include "smmpc/signal_matrix.hpp"

namespace smmpc::io {

// Deterministic double formatting used in all text outputs.
std::string format_double(double v, int precision = 12);

// Closed-loop trajectories, one row per timestep:
// t,r,u,y,y0,J_t,E,dev (E and dev are nan where not evaluated).
void write_run_csv(const std::string& path, const RunResult& r);

// Envelope over successful runs: per-step mean and sample standard
// deviation of u, y and y0.
void write_envelope_csv(const std::string& path, const std::vector<RunResult>& runs);

// Debug round-trips.
void write_data_record_csv(const std::string& path, const DataRecord& rec);
DataRecord read_data_record_csv(const std::string& path);
void write_signal_matrix_csv(const std::string& path, const SignalMatrix& sm);
SignalMatrix read_signal_matrix_csv(const std::string& path);

std::string summary_json(const std::vector<McSummary>& summaries);
std::string example_json(const ExampleReport& report);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace smmpc::io
