#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "hetero_rd/coefficients.hpp"
#include "hetero_rd/error.hpp"
#include "hetero_rd/experiment.hpp"
#include "hetero_rd/grid.hpp"
#include "json.hpp"

namespace hetero_rd {

using nlohmann::json;

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {
        "fig2_snapshots", "fig3_limit_comparison", "fig4_gradient_decay",
        "fig5_longtime",  "delta_convergence",     "ode_limit_check",
        "custom",
    };
    return names;
}

namespace {

std::vector<double> exp_minus(std::initializer_list<int> powers) {
    std::vector<double> out;
    for (int j : powers) out.push_back(std::exp(-static_cast<double>(j)));
    return out;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

}  // namespace

SpecValidationError::SpecValidationError(std::vector<std::string> problems)
    : Error(ErrorCode::ValidationError, join(problems, "; ")), problems_(std::move(problems)) {}

ExperimentSpec preset_spec(const std::string& name) {
    ExperimentSpec s;
    s.preset = name;
    if (name == "fig2_snapshots" || name == "fig3_limit_comparison") {
        s.epsilons = exp_minus({1, 2, 4, 8});
        s.t_end = 0.1;
        s.snapshot_times = {0.0, 0.1};
        s.notes.push_back("epsilon set {e^-1, e^-2, e^-4, e^-8} is a preset choice");
    } else if (name == "fig4_gradient_decay") {
        s.epsilons = exp_minus({0, 1, 2, 3, 4, 5, 6, 7, 8});
        s.t_end = 0.09;
        s.snapshot_times = {0.0, 0.01, 0.04, 0.09};
        s.report_times = {0.01, 0.04, 0.09};
        s.notes.push_back("gradient report times 0.01, 0.04, 0.09 follow the fitted times");
    } else if (name == "fig5_longtime") {
        s.epsilons = exp_minus({16});
        s.t_end = 100.0;
        s.snapshot_times = {0.0, 0.1, 1.0, 10.0, 40.0, 100.0};
        s.dt_changes = {{1.0, 1e-3}};
        s.notes.push_back("snapshot times {0, 0.1, 1, 10, 40, 100} are a preset choice");
        s.notes.push_back("dt = 1e-4 up to t = 1, then dt = 1e-3");
    } else if (name == "delta_convergence") {
        s.epsilons = exp_minus({4});
        s.delta_cells = {8.0, 4.0, 2.0};
        s.t_end = 0.1;
        for (int k = 0; k <= 10; ++k) s.snapshot_times.push_back(0.01 * k);
        s.snapshot_times.back() = 0.1;
        s.notes.push_back("space-time norms use snapshots every 0.01");
    } else if (name == "ode_limit_check") {
        s.epsilons = exp_minus({8});
        s.t_end = 0.1;
        s.snapshot_times = {0.0, 0.1};
    } else if (name == "custom") {
        s.epsilons = exp_minus({4});
        s.t_end = 0.1;
        s.snapshot_times = {0.0, 0.1};
    } else {
        throw Error(ErrorCode::ValidationError,
                    "unknown preset '" + name + "' (expected one of: " + join(preset_names(), ", ") + ")");
    }
    return s;
}

void apply_overrides(ExperimentSpec& spec, const SpecOverrides& o) {
    if (o.epsilons) {
        spec.epsilons = *o.epsilons;
        std::vector<std::string> tags;
        for (double e : spec.epsilons) tags.push_back(epsilon_tag(e));
        spec.notes.push_back("override: epsilons = {" + join(tags, ", ") + "}");
    }
    if (o.n_cells) {
        spec.n_cells = *o.n_cells;
        spec.notes.push_back("override: n_cells = " + std::to_string(*o.n_cells));
    }
    if (o.dt) {
        // A dt override rescales any later dt phases by the same factor.
        const double ratio = *o.dt / spec.dt;
        spec.dt = *o.dt;
        for (auto& c : spec.dt_changes) c.dt *= ratio;
        spec.notes.push_back("override: dt = " + fmt(*o.dt));
    }
    if (o.t_end) {
        const double t_end = *o.t_end;
        spec.t_end = t_end;
        auto beyond = [t_end](double t) { return t > t_end * (1.0 + 1e-12); };
        std::erase_if(spec.snapshot_times, beyond);
        std::erase_if(spec.report_times, beyond);
        std::erase_if(spec.dt_changes, [t_end](const DtChange& c) { return c.from_time >= t_end; });
        if (spec.snapshot_times.empty() || spec.snapshot_times.back() < t_end * (1.0 - 1e-12)) {
            spec.snapshot_times.push_back(t_end);
        }
        spec.notes.push_back("override: t_end = " + fmt(t_end) + " (later snapshot/report times dropped)");
    }
    if (o.workers) {
        spec.workers = *o.workers;
        spec.notes.push_back("override: workers = " + std::to_string(*o.workers));
    }
    if (o.output_dir) spec.output_dir = *o.output_dir;
}

FaceAveraging parse_averaging(const std::string& name) {
    if (name == "harmonic") return FaceAveraging::Harmonic;
    if (name == "arithmetic") return FaceAveraging::Arithmetic;
    throw Error(ErrorCode::ValidationError, "averaging must be 'harmonic' or 'arithmetic', got '" + name + "'");
}

std::string averaging_name(FaceAveraging averaging) {
    return averaging == FaceAveraging::Harmonic ? "harmonic" : "arithmetic";
}

std::vector<std::string> validate_spec(const ExperimentSpec& s) {
    std::vector<std::string> errors;
    const auto& names = preset_names();
    if (std::find(names.begin(), names.end(), s.preset) == names.end()) {
        errors.push_back("preset: unknown preset '" + s.preset + "'");
    }

    bool grid_ok = false;
    if (!(s.length > 0.0)) errors.push_back("grid.length must be > 0");
    if (s.n_cells < 2) errors.push_back("grid.n_cells must be >= 2");
    if (s.length > 0.0 && s.n_cells >= 2) {
        try {
            (void)build_grid(s.length, s.n_cells, s.interfaces);
            grid_ok = true;
        } catch (const Error& e) {
            errors.push_back(std::string("grid: ") + e.what());
        }
    }

    if (s.epsilons.empty()) errors.push_back("epsilons must not be empty");
    for (double e : s.epsilons) {
        if (!(e > 0.0 && e <= 1.0)) errors.push_back("epsilon must be in (0,1], got " + fmt(e));
    }
    for (double d : s.delta_cells) {
        if (!(d > 0.0) || !std::isfinite(d)) errors.push_back("delta_cells entries must be > 0, got " + fmt(d));
    }
    if (s.preset == "delta_convergence" && s.delta_cells.empty()) {
        errors.push_back("delta_convergence needs at least one delta_cells entry");
    }
    if ((s.preset == "fig3_limit_comparison" || s.preset == "fig4_gradient_decay" ||
         s.preset == "delta_convergence" || s.preset == "ode_limit_check" ||
         s.preset == "fig2_snapshots" || s.preset == "fig5_longtime") &&
        s.interfaces.size() != 2) {
        errors.push_back("preset '" + s.preset + "' needs two interfaces");
    }
    if (s.preset == "fig4_gradient_decay" && s.epsilons.size() < 3) {
        errors.push_back("fig4_gradient_decay needs at least 3 epsilons for the power-law fit");
    }

    if (s.upper_bound < 1.0) errors.push_back("reaction.upper_bound must be >= 1");
    try {
        BistableReaction r(s.alpha, s.reaction_scale, std::max(1.0, s.upper_bound));
        (void)validate_bistable(r, 10000);
    } catch (const Error& e) {
        errors.push_back(std::string("reaction: ") + e.what());
    }

    try {
        const auto datum = parse_datum(s.initial_datum);
        if (grid_ok) {
            const auto g = build_grid(s.length, s.n_cells, s.interfaces);
            const auto u0 = initial_field(g, datum);
            const auto [lo, hi] = std::minmax_element(u0.values.begin(), u0.values.end());
            if (*lo < 0.0 || *hi > s.upper_bound) {
                errors.push_back("initial_datum leaves [0, upper_bound] on the grid");
            }
        }
    } catch (const Error& e) {
        errors.push_back(std::string("initial_datum: ") + e.what());
    }

    TimeStepConfig cfg;
    cfg.dt = s.dt;
    cfg.theta = s.theta;
    cfg.newton = {s.newton_tol, s.newton_max_iter};
    cfg.snapshot_times = s.snapshot_times;
    cfg.t_end = s.t_end;
    cfg.dt_changes = s.dt_changes;
    if (!(s.t_end > 0.0)) errors.push_back("time.t_end must be > 0");
    try {
        cfg.validate();
    } catch (const Error& e) {
        errors.push_back(std::string("time: ") + e.what());
    }
    for (double t : s.report_times) {
        const bool found = std::any_of(s.snapshot_times.begin(), s.snapshot_times.end(), [t](double x) {
            return std::abs(x - t) <= 1e-12 * std::max(1.0, t);
        });
        if (!found) errors.push_back("report time " + fmt(t) + " is not a snapshot time");
    }

    try {
        (void)parse_averaging(s.averaging);
    } catch (const Error& e) {
        errors.push_back(e.what());
    }
    if (!(s.ode_exclusion >= 0.0)) errors.push_back("analysis.ode_exclusion must be >= 0");
    if (s.jump_exclusion_cells < 0) errors.push_back("analysis.jump_exclusion_cells must be >= 0");
    if (s.workers < 1) errors.push_back("workers must be >= 1");
    if (s.output_dir.empty()) errors.push_back("output_dir must not be empty");
    return errors;
}

double parse_epsilon(const std::string& token) {
    std::string t;
    for (char c : token) {
        if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    }
    auto number = [&](const std::string& text) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(text, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != text.size()) {
            throw Error(ErrorCode::ValidationError, "cannot parse epsilon '" + token + "'");
        }
        return v;
    };
    if (t.rfind("exp(", 0) == 0 && t.size() > 5 && t.back() == ')') {
        return std::exp(number(t.substr(4, t.size() - 5)));
    }
    if (t.rfind("e^", 0) == 0) return std::exp(number(t.substr(2)));
    return number(t);
}

std::vector<double> parse_epsilon_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(parse_epsilon(item));
    }
    if (out.empty()) throw Error(ErrorCode::ValidationError, "empty epsilon list");
    return out;
}

std::string epsilon_tag(double epsilon) {
    if (epsilon > 0.0) {
        const double j = -std::log(epsilon);
        const double rounded = std::round(j);
        if (std::abs(j - rounded) < 1e-9 && std::exp(-rounded) == epsilon) {
            return rounded == 0.0 ? "e-0" : "e-" + std::to_string(static_cast<long>(rounded));
        }
    }
    std::ostringstream s;
    s.precision(6);
    s << epsilon;
    return s.str();
}

namespace {

struct Reader {
    std::vector<std::string>& errors;

    void unknown_keys(const json& obj, const std::string& where, std::set<std::string> allowed) {
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            if (!allowed.count(it.key())) {
                errors.push_back("unknown key '" + (where.empty() ? "" : where + ".") + it.key() + "'");
            }
        }
    }

    template <class T>
    void get(const json& obj, const char* key, const std::string& where, T& out) {
        if (!obj.contains(key)) return;
        try {
            out = obj.at(key).get<T>();
        } catch (const json::exception&) {
            errors.push_back("field '" + (where.empty() ? "" : where + ".") + key + "' has the wrong type");
        }
    }

    void epsilons(const json& obj, std::vector<double>& out) {
        if (!obj.contains("epsilons")) return;
        const auto& arr = obj.at("epsilons");
        if (!arr.is_array()) {
            errors.push_back("field 'epsilons' must be an array");
            return;
        }
        out.clear();
        for (const auto& v : arr) {
            if (v.is_number()) {
                out.push_back(v.get<double>());
            } else if (v.is_string()) {
                try {
                    out.push_back(parse_epsilon(v.get<std::string>()));
                } catch (const Error& e) {
                    errors.push_back(std::string("epsilons: ") + e.what());
                }
            } else {
                errors.push_back("field 'epsilons' entries must be numbers or strings");
            }
        }
    }
};

std::pair<std::size_t, std::size_t> line_and_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace

ExperimentSpec parse_spec(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_and_column(text, e.byte);
        std::ostringstream msg;
        msg << "line " << line << ", column " << col << ": " << e.what();
        throw Error(ErrorCode::ParseError, msg.str());
    }
    if (!root.is_object()) throw Error(ErrorCode::ParseError, "line 1, column 1: config must be a JSON object");

    std::vector<std::string> errors;
    Reader rd{errors};
    std::string preset = "custom";
    rd.get(root, "preset", "", preset);
    ExperimentSpec s;
    try {
        s = preset_spec(preset);
    } catch (const Error& e) {
        s.preset = preset;
    }

    rd.unknown_keys(root, "", {"preset", "grid", "epsilons", "delta_cells", "reaction", "initial_datum",
                               "time", "analysis", "output_dir", "workers"});
    if (root.contains("grid")) {
        const auto& g = root.at("grid");
        rd.unknown_keys(g, "grid", {"length", "n_cells", "interfaces"});
        rd.get(g, "length", "grid", s.length);
        rd.get(g, "n_cells", "grid", s.n_cells);
        rd.get(g, "interfaces", "grid", s.interfaces);
    }
    rd.epsilons(root, s.epsilons);
    rd.get(root, "delta_cells", "", s.delta_cells);
    if (root.contains("reaction")) {
        const auto& r = root.at("reaction");
        rd.unknown_keys(r, "reaction", {"alpha", "scale", "upper_bound"});
        rd.get(r, "alpha", "reaction", s.alpha);
        rd.get(r, "scale", "reaction", s.reaction_scale);
        rd.get(r, "upper_bound", "reaction", s.upper_bound);
    }
    rd.get(root, "initial_datum", "", s.initial_datum);
    if (root.contains("time")) {
        const auto& t = root.at("time");
        rd.unknown_keys(t, "time", {"dt", "theta", "newton_tol", "newton_max_iter", "t_end", "snapshot_times",
                                    "report_times", "dt_changes"});
        rd.get(t, "dt", "time", s.dt);
        rd.get(t, "theta", "time", s.theta);
        rd.get(t, "newton_tol", "time", s.newton_tol);
        rd.get(t, "newton_max_iter", "time", s.newton_max_iter);
        rd.get(t, "t_end", "time", s.t_end);
        rd.get(t, "snapshot_times", "time", s.snapshot_times);
        rd.get(t, "report_times", "time", s.report_times);
        if (t.contains("dt_changes")) {
            s.dt_changes.clear();
            const auto& arr = t.at("dt_changes");
            if (!arr.is_array()) {
                errors.push_back("field 'time.dt_changes' must be an array");
            } else {
                for (const auto& c : arr) {
                    DtChange change{0.0, 0.0};
                    if (!c.is_object()) {
                        errors.push_back("field 'time.dt_changes' entries must be objects");
                        continue;
                    }
                    rd.unknown_keys(c, "time.dt_changes[]", {"from_time", "dt"});
                    rd.get(c, "from_time", "time.dt_changes[]", change.from_time);
                    rd.get(c, "dt", "time.dt_changes[]", change.dt);
                    s.dt_changes.push_back(change);
                }
            }
        }
    }
    if (root.contains("analysis")) {
        const auto& a = root.at("analysis");
        rd.unknown_keys(a, "analysis", {"averaging", "ode_exclusion", "jump_exclusion_cells"});
        rd.get(a, "averaging", "analysis", s.averaging);
        rd.get(a, "ode_exclusion", "analysis", s.ode_exclusion);
        rd.get(a, "jump_exclusion_cells", "analysis", s.jump_exclusion_cells);
    }
    rd.get(root, "output_dir", "", s.output_dir);
    rd.get(root, "workers", "", s.workers);

    for (auto& e : validate_spec(s)) {
        if (std::find(errors.begin(), errors.end(), e) == errors.end()) errors.push_back(std::move(e));
    }
    if (!errors.empty()) throw SpecValidationError(std::move(errors));
    return s;
}

ExperimentSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_spec(buf.str());
}

}  // namespace hetero_rd
