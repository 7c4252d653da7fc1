#include "smmpc/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "smmpc/io.hpp"

namespace smmpc::config {

namespace {

struct Value {
    enum class Kind { Boolean, Number, String, NumberArray };
    Kind kind = Kind::Number;
    bool boolean = false;
    double number = 0.0;
    std::string text;
    std::vector<double> numbers;
    int line = 0;
};

using Section = std::map<std::string, Value>;
using Document = std::map<std::string, Section>;

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

std::optional<double> parse_number(const std::string& tok) {
    if (tok == "inf" || tok == "+inf") return std::numeric_limits<double>::infinity();
    if (tok == "-inf") return -std::numeric_limits<double>::infinity();
    if (tok == "nan") return std::numeric_limits<double>::quiet_NaN();
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) return std::nullopt;
        return v;
    } catch (...) {
        return std::nullopt;
    }
}

Value parse_value(const std::string& origin, int line_no, const std::string& raw) {
    Value v;
    v.line = line_no;
    const std::string tok = trim(raw);
    if (tok.empty()) fail(origin, line_no, "empty value");
    if (tok == "true" || tok == "false") {
        v.kind = Value::Kind::Boolean;
        v.boolean = tok == "true";
        return v;
    }
    if (tok.front() == '"') {
        if (tok.size() < 2 || tok.back() != '"') {
            fail(origin, line_no, "unterminated string");
        }
        v.kind = Value::Kind::String;
        v.text = tok.substr(1, tok.size() - 2);
        return v;
    }
    if (tok.front() == '[') {
        if (tok.back() != ']') fail(origin, line_no, "unterminated array");
        v.kind = Value::Kind::NumberArray;
        const std::string inner = trim(tok.substr(1, tok.size() - 2));
        if (inner.empty()) return v;
        std::stringstream ss(inner);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto num = parse_number(trim(item));
            if (!num) fail(origin, line_no, "array element is not a number: '" + trim(item) + "'");
            v.numbers.push_back(*num);
        }
        return v;
    }
    const auto num = parse_number(tok);
    if (!num) fail(origin, line_no, "cannot parse value '" + tok + "'");
    v.kind = Value::Kind::Number;
    v.number = *num;
    return v;
}

Document parse_document(const std::string& text, const std::string& origin) {
    Document doc;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(origin, line_no, "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) fail(origin, line_no, "empty section name");
            doc[section];  // sections may appear empty
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(origin, line_no, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) fail(origin, line_no, "empty key");
        if (section.empty()) fail(origin, line_no, "key '" + key + "' outside of any section");
        if (doc[section].count(key)) {
            fail(origin, line_no, section + "." + key + ": duplicate key");
        }
        doc[section][key] = parse_value(origin, line_no, line.substr(eq + 1));
    }
    return doc;
}

// Typed accessors with path-qualified errors.
class SectionReader {
  public:
    SectionReader(const std::string& origin, const std::string& name, const Section* sec)
        : origin_(origin), name_(name), sec_(sec) {}

    bool present() const { return sec_ != nullptr; }

    std::optional<double> number(const std::string& key) {
        const Value* v = fetch(key);
        if (v == nullptr) return std::nullopt;
        if (v->kind != Value::Kind::Number) {
            fail(origin_, v->line, path(key) + ": expected a number");
        }
        return v->number;
    }

    std::optional<int> integer(const std::string& key) {
        const auto v = number(key);
        if (!v) return std::nullopt;
        const double rounded = std::round(*v);
        if (!std::isfinite(*v) || rounded != *v) {
            fail(origin_, sec_->at(key).line, path(key) + ": expected an integer");
        }
        return static_cast<int>(rounded);
    }

    std::optional<bool> boolean(const std::string& key) {
        const Value* v = fetch(key);
        if (v == nullptr) return std::nullopt;
        if (v->kind != Value::Kind::Boolean) {
            fail(origin_, v->line, path(key) + ": expected true or false");
        }
        return v->boolean;
    }

    std::optional<std::string> string(const std::string& key) {
        const Value* v = fetch(key);
        if (v == nullptr) return std::nullopt;
        if (v->kind != Value::Kind::String) {
            fail(origin_, v->line, path(key) + ": expected a quoted string");
        }
        return v->text;
    }

    std::optional<std::vector<double>> number_array(const std::string& key) {
        const Value* v = fetch(key);
        if (v == nullptr) return std::nullopt;
        if (v->kind != Value::Kind::NumberArray) {
            fail(origin_, v->line, path(key) + ": expected an array of numbers");
        }
        return v->numbers;
    }

    void finish() const {
        if (sec_ == nullptr) return;
        for (const auto& [key, value] : *sec_) {
            if (!used_.count(key)) {
                fail(origin_, value.line, path(key) + ": unknown key");
            }
        }
    }

  private:
    std::string path(const std::string& key) const { return name_ + "." + key; }

    const Value* fetch(const std::string& key) {
        if (sec_ == nullptr) return nullptr;
        const auto it = sec_->find(key);
        if (it == sec_->end()) return nullptr;
        used_.insert(key);
        return &it->second;
    }

    std::string origin_;
    std::string name_;
    const Section* sec_;
    std::set<std::string> used_;
};

// Bounds are carried as plain doubles with an infinite sentinel, so a
// missing key and an explicit inf both mean "unbounded".
Eigen::VectorXd broadcast_bound(double v, int Lp) {
    if (std::isinf(v)) return Eigen::VectorXd();
    return Eigen::VectorXd::Constant(Lp, v);
}

std::string fmt_toml(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    const std::string s = io::format_double(v, 17);
    // Keep numbers recognizable as floats where possible.
    return s;
}

}  // namespace

std::vector<ScenarioConfig> Experiment::expand() const {
    auto axis = [](const std::vector<double>& v) {
        return v.empty() ? std::vector<double>{std::numeric_limits<double>::quiet_NaN()} : v;
    };
    std::vector<int> l0_axis = sweep_L0;
    if (l0_axis.empty()) l0_axis.push_back(-1);

    std::vector<ScenarioConfig> out;
    for (double z : axis(sweep_zeta)) {
        for (double g : axis(sweep_gamma)) {
            for (double lg : axis(sweep_lambda_g)) {
                for (int l0 : l0_axis) {
                    ScenarioConfig cfg = base;
                    std::string name = base.name;
                    if (!std::isnan(z)) {
                        cfg.cost.zeta = z;
                        name += "_zeta" + io::format_double(z, 6);
                    }
                    if (!std::isnan(g)) {
                        cfg.gamma = g;
                        name += "_gamma" + io::format_double(g, 6);
                    }
                    if (!std::isnan(lg)) {
                        cfg.lambda_g = lg;
                        name += "_lg" + io::format_double(lg, 6);
                    }
                    if (l0 >= 0) {
                        cfg.L0 = l0;
                        name += "_L" + std::to_string(l0);
                    }
                    cfg.name = name;
                    out.push_back(std::move(cfg));
                }
            }
        }
    }
    return out;
}

Experiment parse_string(const std::string& text, const std::string& origin) {
    const Document doc = parse_document(text, origin);
    static const std::set<std::string> known = {"plant", "data", "online",
                                                "controller", "task", "sweep"};
    for (const auto& [name, sec] : doc) {
        if (!known.count(name)) {
            throw ConfigError(origin + ": unknown section [" + name + "]");
        }
        (void)sec;
    }
    auto section = [&](const char* name) {
        const auto it = doc.find(name);
        return SectionReader(origin, name, it == doc.end() ? nullptr : &it->second);
    };

    Experiment exp;
    ScenarioConfig& cfg = exp.base;
    cfg.plant_tf = benchmark_plant();

    {
        SectionReader plant = section("plant");
        const auto num = plant.number_array("num");
        const auto den = plant.number_array("den");
        if (num.has_value() != den.has_value()) {
            throw ConfigError(origin + ": plant.num and plant.den must be given together");
        }
        if (num) {
            cfg.plant_tf.num = *num;
            cfg.plant_tf.den = *den;
        }
        const auto idx = plant.integer("drift_index");
        const auto th0 = plant.number("drift_theta0");
        const auto tau = plant.number("drift_tau");
        const int have = int(idx.has_value()) + int(th0.has_value()) + int(tau.has_value());
        if (have != 0 && have != 3) {
            throw ConfigError(origin +
                              ": plant.drift_index, drift_theta0, drift_tau must appear together");
        }
        if (have == 3) {
            cfg.drift = DriftSpec{*idx, *th0, *tau};
        }
        plant.finish();
    }
    {
        SectionReader data = section("data");
        if (const auto v = data.integer("N")) cfg.N = *v;
        if (const auto v = data.number("sigma2")) cfg.noise.sigma2 = *v;
        data.finish();
    }
    {
        SectionReader online = section("online");
        if (const auto v = online.number("sigma2_p")) cfg.noise.sigma2_p = *v;
        if (const auto v = online.boolean("adaptation")) cfg.adaptation = *v;
        if (const auto v = online.number("gamma")) cfg.gamma = *v;
        if (const auto v = online.boolean("compression")) cfg.compression = *v;
        online.finish();
    }
    const double inf = std::numeric_limits<double>::infinity();
    double u_min = -inf, u_max = inf, y_min = -inf, y_max = inf;
    {
        SectionReader ctrl = section("controller");
        if (const auto v = ctrl.string("type")) {
            const auto kind = controller_kind_from_string(*v);
            if (!kind) {
                throw ConfigError(origin + ": controller.type: unknown controller '" + *v +
                                  "' (expected smmpc, deepc, ideal_mpc or impulse_mpc)");
            }
            cfg.controller = *kind;
        }
        if (const auto v = ctrl.integer("L0")) cfg.L0 = *v;
        if (const auto v = ctrl.integer("horizon")) cfg.cost.Lp = *v;
        if (const auto v = ctrl.number("Q")) cfg.cost.Q = *v;
        if (const auto v = ctrl.number("R")) cfg.cost.R = *v;
        if (const auto v = ctrl.number("zeta")) cfg.cost.zeta = *v;
        if (const auto v = ctrl.number("lambda_g")) cfg.lambda_g = *v;
        if (const auto v = ctrl.number("lambda_y")) cfg.lambda_y = *v;
        if (const auto v = ctrl.number("u_min")) u_min = *v;
        if (const auto v = ctrl.number("u_max")) u_max = *v;
        if (const auto v = ctrl.number("y_min")) y_min = *v;
        if (const auto v = ctrl.number("y_max")) y_max = *v;
        if (const auto v = ctrl.boolean("evaluate_iterated")) cfg.evaluate_iterated = *v;
        ctrl.finish();
    }
    {
        SectionReader task = section("task");
        if (const auto v = task.integer("Nc")) cfg.cost.Nc = *v;
        if (const auto v = task.integer("runs")) exp.runs = *v;
        if (const auto v = task.string("name")) cfg.name = *v;
        if (const auto v = task.string("reference")) {
            if (*v == "sinusoid") cfg.reference.kind = ReferenceSpec::Kind::Sinusoid;
            else if (*v == "constant") cfg.reference.kind = ReferenceSpec::Kind::Constant;
            else if (*v == "step") cfg.reference.kind = ReferenceSpec::Kind::Step;
            else {
                throw ConfigError(origin + ": task.reference: unknown kind '" + *v +
                                  "' (expected sinusoid, constant or step)");
            }
        }
        if (const auto v = task.number("amplitude")) cfg.reference.amplitude = *v;
        if (const auto v = task.number("period")) cfg.reference.period = *v;
        if (const auto v = task.number("level")) cfg.reference.level = *v;
        if (const auto v = task.integer("step_time")) cfg.reference.step_time = *v;
        task.finish();
    }
    {
        SectionReader sweep = section("sweep");
        auto finite_axis = [&](const char* key) -> std::vector<double> {
            const auto v = sweep.number_array(key);
            if (!v) return {};
            for (double d : *v) {
                if (!std::isfinite(d)) {
                    throw ConfigError(origin + ": sweep." + key + ": entries must be finite");
                }
            }
            return *v;
        };
        exp.sweep_zeta = finite_axis("zeta");
        exp.sweep_gamma = finite_axis("gamma");
        exp.sweep_lambda_g = finite_axis("lambda_g");
        if (const auto v = sweep.number_array("L0")) {
            for (double d : *v) {
                if (std::round(d) != d) {
                    throw ConfigError(origin + ": sweep.L0: entries must be integers");
                }
                exp.sweep_L0.push_back(static_cast<int>(d));
            }
        }
        sweep.finish();
    }

    cfg.constraints.u_min = broadcast_bound(u_min, cfg.cost.Lp);
    cfg.constraints.u_max = broadcast_bound(u_max, cfg.cost.Lp);
    cfg.constraints.y_min = broadcast_bound(y_min, cfg.cost.Lp);
    cfg.constraints.y_max = broadcast_bound(y_max, cfg.cost.Lp);

    if (exp.runs < 1) {
        throw ConfigError(origin + ": task.runs must be positive");
    }
    try {
        for (const ScenarioConfig& scenario : exp.expand()) {
            scenario.validate();
            tf_to_ss(scenario.plant_tf);  // realizability check
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return exp;
}

Experiment parse_file(const std::string& path) {
    return parse_string(io::read_text_file(path), path);
}

std::string serialize(const Experiment& exp) {
    const ScenarioConfig& cfg = exp.base;
    std::ostringstream out;
    auto arr = [](const std::vector<double>& v) {
        std::string s = "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += ", ";
            s += fmt_toml(v[i]);
        }
        return s + "]";
    };
    out << "[plant]\n";
    out << "num = " << arr(cfg.plant_tf.num) << "\n";
    out << "den = " << arr(cfg.plant_tf.den) << "\n";
    if (cfg.drift) {
        out << "drift_index = " << cfg.drift->den_index << "\n";
        out << "drift_theta0 = " << fmt_toml(cfg.drift->theta0) << "\n";
        out << "drift_tau = " << fmt_toml(cfg.drift->tau) << "\n";
    }
    out << "\n[data]\n";
    out << "N = " << cfg.N << "\n";
    out << "sigma2 = " << fmt_toml(cfg.noise.sigma2) << "\n";
    out << "\n[online]\n";
    out << "sigma2_p = " << fmt_toml(cfg.noise.sigma2_p) << "\n";
    out << "adaptation = " << (cfg.adaptation ? "true" : "false") << "\n";
    out << "gamma = " << fmt_toml(cfg.gamma) << "\n";
    out << "compression = " << (cfg.compression ? "true" : "false") << "\n";
    out << "\n[controller]\n";
    out << "type = \"" << to_string(cfg.controller) << "\"\n";
    out << "L0 = " << cfg.L0 << "\n";
    out << "horizon = " << cfg.cost.Lp << "\n";
    out << "Q = " << fmt_toml(cfg.cost.Q) << "\n";
    out << "R = " << fmt_toml(cfg.cost.R) << "\n";
    out << "zeta = " << fmt_toml(cfg.cost.zeta) << "\n";
    out << "lambda_g = " << fmt_toml(cfg.lambda_g) << "\n";
    out << "lambda_y = " << fmt_toml(cfg.lambda_y) << "\n";
    if (cfg.constraints.u_min.size() > 0) out << "u_min = " << fmt_toml(cfg.constraints.u_min(0)) << "\n";
    if (cfg.constraints.u_max.size() > 0) out << "u_max = " << fmt_toml(cfg.constraints.u_max(0)) << "\n";
    if (cfg.constraints.y_min.size() > 0) out << "y_min = " << fmt_toml(cfg.constraints.y_min(0)) << "\n";
    if (cfg.constraints.y_max.size() > 0) out << "y_max = " << fmt_toml(cfg.constraints.y_max(0)) << "\n";
    out << "evaluate_iterated = " << (cfg.evaluate_iterated ? "true" : "false") << "\n";
    out << "\n[task]\n";
    out << "name = \"" << cfg.name << "\"\n";
    out << "Nc = " << cfg.cost.Nc << "\n";
    out << "runs = " << exp.runs << "\n";
    const char* ref = cfg.reference.kind == ReferenceSpec::Kind::Sinusoid ? "sinusoid"
                      : cfg.reference.kind == ReferenceSpec::Kind::Constant ? "constant"
                                                                            : "step";
    out << "reference = \"" << ref << "\"\n";
    out << "amplitude = " << fmt_toml(cfg.reference.amplitude) << "\n";
    out << "period = " << fmt_toml(cfg.reference.period) << "\n";
    out << "level = " << fmt_toml(cfg.reference.level) << "\n";
    out << "step_time = " << cfg.reference.step_time << "\n";
    if (!exp.sweep_zeta.empty() || !exp.sweep_gamma.empty() || !exp.sweep_lambda_g.empty() ||
        !exp.sweep_L0.empty()) {
        out << "\n[sweep]\n";
        if (!exp.sweep_zeta.empty()) out << "zeta = " << arr(exp.sweep_zeta) << "\n";
        if (!exp.sweep_gamma.empty()) out << "gamma = " << arr(exp.sweep_gamma) << "\n";
        if (!exp.sweep_lambda_g.empty()) out << "lambda_g = " << arr(exp.sweep_lambda_g) << "\n";
        if (!exp.sweep_L0.empty()) {
            out << "L0 = [";
            for (std::size_t i = 0; i < exp.sweep_L0.size(); ++i) {
                if (i) out << ", ";
                out << exp.sweep_L0[i];
            }
            out << "]\n";
        }
    }
    return out.str();
}

}  // namespace smmpc::config
