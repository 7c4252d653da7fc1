// End-to-end checks of the command-line tool: exit codes, no partial output
// on validation errors, and deterministic rendering.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "smmpc/io.hpp"

#ifndef SMMPC_CLI_PATH
#define SMMPC_CLI_PATH "smmpc"
#endif

namespace fs = std::filesystem;

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", what.c_str());
    if (!ok) ++failures;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(SMMPC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
}

const char* kConfig = R"([data]
N = 50
sigma2 = 0.1

[online]
sigma2_p = 0.1

[task]
name = "smoke"
Nc = 40
runs = 3
)";

}  // namespace

int main() {
    const fs::path base = fs::temp_directory_path() / "smmpc_cli_checks";
    std::error_code ec;
    fs::remove_all(base, ec);
    fs::create_directories(base);

    // A valid config runs and writes trajectories, envelope and summary.
    const fs::path cfg_path = base / "smoke.toml";
    smmpc::io::write_text_file(cfg_path.string(), kConfig);
    const fs::path out1 = base / "out1";
    check(run_cli("run --config " + cfg_path.string() + " --seed 5 --out " + out1.string()) == 0,
          "run exits zero on a valid config");
    check(fs::exists(out1 / "trajectories_smoke.csv"), "run writes trajectories csv");
    check(fs::exists(out1 / "envelope_smoke.csv"), "run writes envelope csv");
    check(fs::exists(out1 / "summary.json"), "run writes summary json");

    // Determinism of run outputs.
    const fs::path out2 = base / "out2";
    run_cli("run --config " + cfg_path.string() + " --seed 5 --out " + out2.string());
    check(smmpc::io::read_text_file((out1 / "trajectories_smoke.csv").string()) ==
              smmpc::io::read_text_file((out2 / "trajectories_smoke.csv").string()),
          "run outputs are byte-identical for the same seed");

    // Malformed config: nonzero exit and no partial output.
    const fs::path bad_path = base / "bad.toml";
    smmpc::io::write_text_file(bad_path.string(), "[data]\nenn = 50\n");
    const fs::path out_bad = base / "out_bad";
    check(run_cli("run --config " + bad_path.string() + " --out " + out_bad.string()) != 0,
          "malformed key exits nonzero");
    check(!fs::exists(out_bad / "summary.json"), "no partial output on a malformed config");

    // Plot: renders SVGs deterministically; empty directory is an error.
    check(run_cli("plot " + out1.string()) == 0, "plot exits zero on results");
    const fs::path svg = out1 / "smoke_traj.svg";
    check(fs::exists(svg), "plot writes trajectory svg");
    check(fs::exists(out1 / "J_tot_box.svg"), "plot writes box-plot svg");
    const std::string first = smmpc::io::read_text_file(svg.string());
    run_cli("plot " + out1.string());
    check(first == smmpc::io::read_text_file(svg.string()), "plot output is byte-identical");
    const fs::path empty_dir = base / "empty";
    fs::create_directories(empty_dir);
    check(run_cli("plot " + empty_dir.string()) != 0, "plot of an empty directory exits nonzero");

    // Unknown reproduce id is rejected.
    check(run_cli("reproduce 9 --out " + (base / "out9").string()) != 0,
          "unknown study id exits nonzero");

    // A sweep expands into one output set per grid point.
    const fs::path sweep_path = base / "sweep.toml";
    smmpc::io::write_text_file(sweep_path.string(),
                               std::string(kConfig) + "\n[sweep]\nzeta = [0.0, 10.0]\n");
    const fs::path out3 = base / "out3";
    check(run_cli("run --config " + sweep_path.string() + " --seed 5 --out " + out3.string()) == 0,
          "sweep config runs");
    check(fs::exists(out3 / "trajectories_smoke_zeta0.csv") &&
              fs::exists(out3 / "trajectories_smoke_zeta10.csv"),
          "sweep writes one trajectory file per grid point");

    fs::remove_all(base, ec);
    return failures;
}
