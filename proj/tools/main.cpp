#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "smmpc/config.hpp"
#include "smmpc/experiments.hpp"
#include "smmpc/io.hpp"
#include "smmpc/svg.hpp"

namespace fs = std::filesystem;
using namespace smmpc;

namespace {

void write_scenario_outputs(const fs::path& out_dir, const std::string& name,
                            const std::vector<RunResult>& runs) {
    for (const RunResult& r : runs) {
        if (!r.failed) {
            io::write_run_csv((out_dir / ("trajectories_" + name + ".csv")).string(), r);
            break;
        }
    }
    if (runs.size() > 1) {
        io::write_envelope_csv((out_dir / ("envelope_" + name + ".csv")).string(), runs);
    }
}

int cmd_run(const std::string& config_path, std::uint64_t seed, const std::string& out,
            int jobs) {
    config::Experiment exp;
    try {
        exp = config::parse_file(config_path);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
    const fs::path out_dir(out);
    fs::create_directories(out_dir);

    std::vector<McSummary> summaries;
    bool any_scenario_dead = false;
    for (ScenarioConfig cfg : exp.expand()) {
        cfg.seed = seed;
        const std::vector<RunResult> runs = run_batch(cfg, exp.runs, jobs);
        const McSummary summary = summarize_batch(cfg.name, runs);
        summaries.push_back(summary);
        write_scenario_outputs(out_dir, cfg.name, runs);
        if (summary.failures == summary.runs) {
            any_scenario_dead = true;
            for (const RunResult& r : runs) {
                if (r.failed) {
                    std::cerr << "scenario " << cfg.name << " failed: " << r.failure << "\n";
                    break;
                }
            }
        }
        std::cout << cfg.name << ": median J_tot = "
                  << io::format_double(summary.J_tot.median, 6) << " (" << summary.runs
                  << " runs, " << summary.failures << " failures)\n";
    }
    io::write_text_file((out_dir / "summary.json").string(), io::summary_json(summaries));
    return any_scenario_dead ? 1 : 0;
}

int cmd_reproduce(int id, int runs, std::uint64_t seed, const std::string& out, int jobs) {
    if (runs <= 0) runs = default_runs(id);
    ExampleReport report;
    try {
        report = run_example(id, runs, seed, jobs);
    } catch (const std::exception& e) {
        std::cerr << "reproduce failed: " << e.what() << "\n";
        return 1;
    }
    const fs::path out_dir(out);
    fs::create_directories(out_dir);
    for (const ConfigResult& cr : report.configs) {
        write_scenario_outputs(out_dir, cr.cfg.name, cr.runs);
    }
    io::write_text_file((out_dir / "summary.json").string(), io::example_json(report));

    std::cout << "example " << id << " (" << runs << " runs, seed " << seed << ")\n";
    for (const ConfigResult& cr : report.configs) {
        std::cout << "  " << cr.summary.name << ": median J_tot = "
                  << io::format_double(cr.summary.J_tot.median, 6);
        if (cr.summary.E_pooled.count > 0) {
            std::cout << ", median E = " << io::format_double(cr.summary.E_pooled.median, 6);
        }
        if (cr.summary.failures > 0) {
            std::cout << " [" << cr.summary.failures << " failed]";
        }
        std::cout << "\n";
    }
    std::cout << (report.pass ? "[PASS] " : "[FAIL] ") << report.detail << "\n";
    return 0;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    const std::vector<double>& col(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return columns[i];
        }
        throw std::runtime_error("csv column not found: " + name);
    }
};

CsvTable read_csv(const fs::path& path) {
    std::istringstream in(io::read_text_file(path.string()));
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path.string());
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) t.header.push_back(cell);
    t.columns.resize(t.header.size());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream rs(line);
        std::size_t i = 0;
        while (std::getline(rs, cell, ',') && i < t.columns.size()) {
            t.columns[i++].push_back(std::stod(cell));
        }
    }
    return t;
}

int cmd_plot(const std::string& dir, const std::string& format) {
    if (format != "svg") {
        std::cerr << "unsupported format: " << format << "\n";
        return 1;
    }
    const fs::path root(dir);
    if (!fs::is_directory(root)) {
        std::cerr << "not a directory: " << dir << "\n";
        return 1;
    }
    std::vector<fs::path> traj_files;
    for (const auto& entry : fs::directory_iterator(root)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("trajectories_", 0) == 0 && entry.path().extension() == ".csv") {
            traj_files.push_back(entry.path());
        }
    }
    std::sort(traj_files.begin(), traj_files.end());
    bool wrote = false;
    for (const fs::path& p : traj_files) {
        const CsvTable t = read_csv(p);
        const std::string stem = p.stem().string().substr(std::string("trajectories_").size());
        svg::Series ref{"r", "#888888", t.col("t"), t.col("r")};
        svg::Series y0{"y0", "#1f77b4", t.col("t"), t.col("y0")};
        svg::Series u{"u", "#d62728", t.col("t"), t.col("u")};
        io::write_text_file((root / (stem + "_traj.svg")).string(),
                            svg::line_plot(stem + " trajectories", "t", "", {ref, y0, u}));
        svg::Series jt{"J_t", "#2ca02c", t.col("t"), t.col("J_t")};
        io::write_text_file((root / (stem + "_cost.svg")).string(),
                            svg::line_plot(stem + " stage cost", "t", "J_t", {jt}));
        wrote = true;
    }

    const fs::path summary = root / "summary.json";
    if (fs::exists(summary)) {
        // Box data comes straight from the summary statistics.
        const std::string text = io::read_text_file(summary.string());
        const auto j = nlohmann::json::parse(text);
        std::vector<svg::Box> boxes;
        for (const auto& c : j["configs"]) {
            const auto& s = c["J_tot"];
            if (s["count"].get<int>() == 0) continue;
            svg::Box b;
            b.label = c["name"].get<std::string>();
            b.stat.median = s["median"].get<double>();
            b.stat.q1 = s["q1"].get<double>();
            b.stat.q3 = s["q3"].get<double>();
            b.stat.min = s["min"].get<double>();
            b.stat.max = s["max"].get<double>();
            b.stat.count = s["count"].get<int>();
            boxes.push_back(b);
        }
        if (!boxes.empty()) {
            io::write_text_file((root / "J_tot_box.svg").string(),
                                svg::box_plot("total cost", "J_tot", boxes));
            wrote = true;
        }
    }
    if (!wrote) {
        std::cerr << "no results found in " << dir << "\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Signal-matrix-model predictive control experiments"};
    app.require_subcommand(1);

    std::uint64_t seed = 1;
    int jobs = 1;
    std::string out = "results";

    auto* run = app.add_subcommand("run", "Run an experiment config");
    std::string config_path;
    run->add_option("--config", config_path, "Experiment file")->required();
    run->add_option("--seed", seed, "Master seed")->envname("SMMPC_SEED");
    run->add_option("--out", out, "Output directory");
    run->add_option("--jobs", jobs, "Worker threads");

    auto* rep = app.add_subcommand("reproduce", "Run a built-in benchmark study (1-6)");
    int example_id = 0;
    int runs = 0;
    rep->add_option("id", example_id, "Study id in 1..6")->required()->check(CLI::Range(1, 6));
    rep->add_option("--runs", runs, "Monte Carlo runs (0 = study default)");
    rep->add_option("--seed", seed, "Master seed")->envname("SMMPC_SEED");
    rep->add_option("--out", out, "Output directory");
    rep->add_option("--jobs", jobs, "Worker threads");

    auto* plot = app.add_subcommand("plot", "Render SVG plots from a results directory");
    std::string plot_dir;
    std::string format = "svg";
    plot->add_option("dir", plot_dir, "Results directory")->required();
    plot->add_option("--format", format, "Output format (svg)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, seed, out, jobs);
        if (rep->parsed()) return cmd_reproduce(example_id, runs, seed, out, jobs);
        if (plot->parsed()) return cmd_plot(plot_dir, format);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
