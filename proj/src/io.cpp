#include "smmpc/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace smmpc::io {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s) {
    return std::stod(s);
}

ordered_json stat_json(const SummaryStat& s) {
    ordered_json j;
    j["median"] = s.median;
    j["q1"] = s.q1;
    j["q3"] = s.q3;
    j["mean"] = s.mean;
    j["stddev"] = s.stddev;
    j["min"] = s.min;
    j["max"] = s.max;
    j["count"] = s.count;
    return j;
}

ordered_json mc_json(const McSummary& s) {
    ordered_json j;
    j["name"] = s.name;
    j["runs"] = s.runs;
    j["failures"] = s.failures;
    j["J_tot"] = stat_json(s.J_tot);
    j["J_tot_u"] = stat_json(s.J_tot_u);
    j["mean_g_sq"] = stat_json(s.mean_g_sq);
    j["dev_mean"] = stat_json(s.dev_mean);
    j["E"] = stat_json(s.E_pooled);
    j["frac_E_below_0.10"] = s.frac_E_below;
    return j;
}

}  // namespace

std::string format_double(double v, int precision) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw std::runtime_error("cannot open for writing: " + path);
    }
    f << content;
    if (!f) {
        throw std::runtime_error("write failed: " + path);
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw std::runtime_error("cannot open for reading: " + path);
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_run_csv(const std::string& path, const RunResult& r) {
    std::ostringstream out;
    out << "t,r,u,y,y0,J_t,E,dev\n";
    for (Eigen::Index t = 0; t < r.u.size(); ++t) {
        const double dev = r.deviation.size() > t ? r.deviation(t)
                                                  : std::numeric_limits<double>::quiet_NaN();
        out << t << ',' << format_double(r.r(t)) << ',' << format_double(r.u(t)) << ','
            << format_double(r.y(t)) << ',' << format_double(r.y0(t)) << ','
            << format_double(r.stage_cost(t)) << ',' << format_double(r.E(t)) << ','
            << format_double(dev) << '\n';
    }
    write_text_file(path, out.str());
}

void write_envelope_csv(const std::string& path, const std::vector<RunResult>& runs) {
    Eigen::Index Nc = 0;
    for (const RunResult& r : runs) {
        if (!r.failed) {
            Nc = r.u.size();
            break;
        }
    }
    std::ostringstream out;
    out << "t,r,u_mean,u_std,y_mean,y_std,y0_mean,y0_std\n";
    for (Eigen::Index t = 0; t < Nc; ++t) {
        std::vector<double> us, ys, y0s;
        double rt = 0.0;
        for (const RunResult& r : runs) {
            if (r.failed) continue;
            us.push_back(r.u(t));
            ys.push_back(r.y(t));
            y0s.push_back(r.y0(t));
            rt = r.r(t);
        }
        const SummaryStat su = summarize(us), sy = summarize(ys), sy0 = summarize(y0s);
        out << t << ',' << format_double(rt) << ',' << format_double(su.mean) << ','
            << format_double(su.stddev) << ',' << format_double(sy.mean) << ','
            << format_double(sy.stddev) << ',' << format_double(sy0.mean) << ','
            << format_double(sy0.stddev) << '\n';
    }
    write_text_file(path, out.str());
}

void write_data_record_csv(const std::string& path, const DataRecord& rec) {
    std::ostringstream out;
    out << "# seed=" << rec.seed << " run=" << rec.run_index
        << " sigma2=" << format_double(rec.noise.sigma2, 17)
        << " sigma2_p=" << format_double(rec.noise.sigma2_p, 17) << " x_final=";
    for (Eigen::Index i = 0; i < rec.x_final.size(); ++i) {
        if (i) out << ';';
        out << format_double(rec.x_final(i), 17);
    }
    out << "\ni,u,y,y0\n";
    for (Eigen::Index i = 0; i < rec.u.size(); ++i) {
        out << i << ',' << format_double(rec.u(i), 17) << ',' << format_double(rec.y(i), 17)
            << ',' << format_double(rec.y0(i), 17) << '\n';
    }
    write_text_file(path, out.str());
}

DataRecord read_data_record_csv(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
        throw std::runtime_error("data record csv: missing metadata line in " + path);
    }
    DataRecord rec;
    {
        std::istringstream meta(line.substr(2));
        std::string tok;
        while (meta >> tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = tok.substr(0, eq);
            const std::string val = tok.substr(eq + 1);
            if (key == "seed") rec.seed = std::stoull(val);
            else if (key == "run") rec.run_index = std::stoull(val);
            else if (key == "sigma2") rec.noise.sigma2 = parse_double(val);
            else if (key == "sigma2_p") rec.noise.sigma2_p = parse_double(val);
            else if (key == "x_final") {
                const auto parts = split(val, ';');
                rec.x_final.resize(static_cast<Eigen::Index>(parts.size()));
                for (std::size_t i = 0; i < parts.size(); ++i) {
                    rec.x_final(static_cast<Eigen::Index>(i)) = parse_double(parts[i]);
                }
            }
        }
    }
    std::getline(in, line);  // header
    std::vector<double> u, y, y0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != 4) {
            throw std::runtime_error("data record csv: malformed row: " + line);
        }
        u.push_back(parse_double(cells[1]));
        y.push_back(parse_double(cells[2]));
        y0.push_back(parse_double(cells[3]));
    }
    rec.u = Eigen::Map<Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
    rec.y = Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    rec.y0 = Eigen::Map<Eigen::VectorXd>(y0.data(), static_cast<Eigen::Index>(y0.size()));
    return rec;
}

void write_signal_matrix_csv(const std::string& path, const SignalMatrix& sm) {
    std::ostringstream out;
    out << "# L0=" << sm.L0 << " Lp=" << sm.Lp << " gamma=" << format_double(sm.gamma, 17)
        << " compressed=" << (sm.compressed ? 1 : 0) << '\n';
    for (int c = 0; c < sm.cols(); ++c) {
        if (c) out << ',';
        out << 'c' << c;
    }
    out << '\n';
    auto write_rows = [&](const Eigen::MatrixXd& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                if (j) out << ',';
                out << format_double(m(i, j), 17);
            }
            out << '\n';
        }
    };
    write_rows(sm.U);
    write_rows(sm.Y);
    write_text_file(path, out.str());
}

SignalMatrix read_signal_matrix_csv(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
        throw std::runtime_error("signal matrix csv: missing metadata line in " + path);
    }
    SignalMatrix sm;
    {
        std::istringstream meta(line.substr(2));
        std::string tok;
        while (meta >> tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = tok.substr(0, eq);
            const std::string val = tok.substr(eq + 1);
            if (key == "L0") sm.L0 = std::stoi(val);
            else if (key == "Lp") sm.Lp = std::stoi(val);
            else if (key == "gamma") sm.gamma = parse_double(val);
            else if (key == "compressed") sm.compressed = val == "1";
        }
    }
    std::getline(in, line);  // header with column indices
    const int M = static_cast<int>(split(line, ',').size());
    const int L = sm.L0 + sm.Lp;
    sm.U.resize(L, M);
    sm.Y.resize(L, M);
    for (int i = 0; i < 2 * L; ++i) {
        if (!std::getline(in, line)) {
            throw std::runtime_error("signal matrix csv: truncated file " + path);
        }
        const auto cells = split(line, ',');
        if (static_cast<int>(cells.size()) != M) {
            throw std::runtime_error("signal matrix csv: malformed row: " + line);
        }
        for (int j = 0; j < M; ++j) {
            (i < L ? sm.U(i, j) : sm.Y(i - L, j)) = parse_double(cells[static_cast<std::size_t>(j)]);
        }
    }
    return sm;
}

std::string summary_json(const std::vector<McSummary>& summaries) {
    ordered_json j;
    j["configs"] = ordered_json::array();
    for (const McSummary& s : summaries) {
        j["configs"].push_back(mc_json(s));
    }
    return j.dump(2) + "\n";
}

std::string example_json(const ExampleReport& report) {
    ordered_json j;
    j["example"] = report.id;
    j["runs"] = report.n_runs;
    j["seed"] = report.seed;
    j["criterion"] = {{"pass", report.pass}, {"detail", report.detail}};
    j["configs"] = ordered_json::array();
    for (const ConfigResult& cr : report.configs) {
        j["configs"].push_back(mc_json(cr.summary));
    }
    return j.dump(2) + "\n";
}

}  // namespace smmpc::io
