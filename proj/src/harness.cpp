#include "hetero_rd/harness.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "hetero_rd/error.hpp"
#include "hetero_rd/limit_solvers.hpp"

namespace hetero_rd {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string time_key(double t) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", t);
    return buf;
}

std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

TimeStepConfig time_config(const ExperimentSpec& s) {
    TimeStepConfig cfg;
    cfg.dt = s.dt;
    cfg.theta = s.theta;
    cfg.newton = {s.newton_tol, s.newton_max_iter};
    cfg.snapshot_times = s.snapshot_times;
    cfg.t_end = s.t_end;
    cfg.dt_changes = s.dt_changes;
    return cfg;
}

Grid1D spec_grid(const ExperimentSpec& s) { return build_grid(s.length, s.n_cells, s.interfaces); }

BistableReaction spec_reaction(const ExperimentSpec& s) {
    return BistableReaction(s.alpha, s.reaction_scale, s.upper_bound);
}

const char* kind_name(RunKind k) {
    switch (k) {
        case RunKind::Full: return "full";
        case RunKind::Neumann: return "neumann";
        case RunKind::OdeLimit: return "ode_limit";
    }
    return "?";
}

}  // namespace

json spec_to_json(const ExperimentSpec& s) {
    json dt_changes = json::array();
    for (const auto& c : s.dt_changes) dt_changes.push_back({{"from_time", c.from_time}, {"dt", c.dt}});
    return {
        {"preset", s.preset},
        {"grid", {{"length", s.length}, {"n_cells", s.n_cells}, {"interfaces", s.interfaces}}},
        {"epsilons", s.epsilons},
        {"delta_cells", s.delta_cells},
        {"reaction", {{"alpha", s.alpha}, {"scale", s.reaction_scale}, {"upper_bound", s.upper_bound}}},
        {"initial_datum", s.initial_datum},
        {"time",
         {{"dt", s.dt},
          {"theta", s.theta},
          {"newton_tol", s.newton_tol},
          {"newton_max_iter", s.newton_max_iter},
          {"t_end", s.t_end},
          {"snapshot_times", s.snapshot_times},
          {"report_times", s.report_times},
          {"dt_changes", dt_changes}}},
        {"analysis",
         {{"averaging", s.averaging},
          {"ode_exclusion", s.ode_exclusion},
          {"jump_exclusion_cells", s.jump_exclusion_cells}}},
        {"output_dir", s.output_dir},
        {"workers", s.workers},
    };
}

json RunManifest::to_json() const {
    json files_json = json::array();
    for (const auto& f : files) files_json.push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    return {{"software", kSoftwareVersion}, {"spec", spec}, {"notes", notes}, {"runs", runs}, {"files", files_json}};
}

bool PresetResult::all_ok() const {
    return std::all_of(runs.begin(), runs.end(), [](const RunRecord& r) { return r.ok(); });
}

const RunRecord& PresetResult::run(const std::string& tag) const {
    for (const auto& r : runs) {
        if (r.plan.tag == tag) return r;
    }
    throw Error(ErrorCode::InvalidArgument, "no run tagged '" + tag + "'");
}

std::vector<RunPlan> plan_runs(const ExperimentSpec& s) {
    std::vector<RunPlan> plans;
    for (double eps : s.epsilons) {
        plans.push_back({"eps_" + epsilon_tag(eps), RunKind::Full, eps, 0.0});
        for (double d : s.delta_cells) {
            std::ostringstream tag;
            tag << "eps_" << epsilon_tag(eps) << "_delta_" << d << "dx";
            plans.push_back({tag.str(), RunKind::Full, eps, d});
        }
    }
    if (s.preset == "fig3_limit_comparison") plans.push_back({"neumann", RunKind::Neumann, 0.0, 0.0});
    if (s.preset == "ode_limit_check") plans.push_back({"ode_limit", RunKind::OdeLimit, 0.0, 0.0});
    return plans;
}

RunRecord execute_run(const ExperimentSpec& s, const RunPlan& plan) {
    RunRecord rec;
    rec.plan = plan;
    const auto start = std::chrono::steady_clock::now();
    try {
        const Grid1D grid = spec_grid(s);
        const auto reaction = spec_reaction(s);
        const auto bounds = validate_bistable(reaction);
        const Field u0 = initial_field(grid, parse_datum(s.initial_datum));
        const auto cfg = time_config(s);
        const auto averaging = parse_averaging(s.averaging);

        switch (plan.kind) {
            case RunKind::Full: {
                const auto profile = plan.delta_cells > 0.0
                                         ? DiffusivityProfile::smoothed(grid, plan.epsilon, plan.delta_cells * grid.dx())
                                         : DiffusivityProfile::sharp(grid, plan.epsilon);
                EnergyAccumulator acc(grid, profile, reaction, bounds, averaging);
                SolveOptions opts;
                opts.averaging = averaging;
                opts.observer = [&acc](const Field& f) { acc.add(f); };
                rec.trajectory = solve(grid, profile, reaction, u0, cfg, opts);
                rec.energy = acc.report();
                break;
            }
            case RunKind::Neumann: {
                const Grid1D sub = grid.subgrid(grid.inner_cells());
                const auto unit = DiffusivityProfile::sharp(sub, 1.0);
                EnergyAccumulator acc(sub, unit, reaction, bounds, averaging);
                SolveOptions opts;
                opts.averaging = averaging;
                opts.observer = [&acc](const Field& f) { acc.add(f); };
                rec.trajectory = solve_neumann_limit(grid, reaction, u0, cfg, opts);
                rec.energy = acc.report();
                break;
            }
            case RunKind::OdeLimit: {
                std::vector<double> times;
                for (double t : s.snapshot_times) {
                    if (t > 0.0) times.push_back(t);
                }
                rec.trajectory = solve_ode_limit(grid, u0, reaction, times, {1e-4, 1});
                break;
            }
        }
        rec.bounds = audit_bounds(*rec.trajectory);
    } catch (const std::exception& e) {
        rec.error = e.what();
        rec.trajectory.reset();
        rec.energy.reset();
    }
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

double step_profile_distance(const Field& state, const Grid1D& grid, double left_cut, double right_cut,
                             int exclusion_cells) {
    const double band = exclusion_cells * grid.dx();
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.n_cells(); ++i) {
        const double x = grid.center(i);
        if (std::abs(x - left_cut) < band || std::abs(x - right_cut) < band) continue;
        const double target = (x > left_cut && x < right_cut) ? 1.0 : 0.0;
        worst = std::max(worst, std::abs(state.values[i] - target));
    }
    return worst;
}

namespace {

json energy_json(const EnergyReport& e) {
    return {{"lhs", e.lhs},
            {"rhs", e.rhs},
            {"identity_residual", e.identity_residual},
            {"relative_residual", e.relative_residual()},
            {"bound_inner", e.bound_inner},
            {"c1_bound", e.c1_bound},
            {"final_time", e.final_time}};
}

void add_energy_metrics(const RunRecord& r, std::vector<MetricRow>& rows) {
    if (!r.energy) return;
    const auto& e = *r.energy;
    const double t = e.final_time;
    rows.push_back({r.plan.tag, "energy_lhs", t, e.lhs});
    rows.push_back({r.plan.tag, "energy_rhs", t, e.rhs});
    rows.push_back({r.plan.tag, "energy_identity_residual", t, e.identity_residual});
    rows.push_back({r.plan.tag, "energy_bound_inner", t, e.bound_inner});
    rows.push_back({r.plan.tag, "energy_c1_bound", t, e.c1_bound});
}

void fig2_metrics(PresetResult& res, const Grid1D& grid) {
    json grads = json::object();
    for (const auto& r : res.runs) {
        if (!r.ok() || r.plan.kind != RunKind::Full) continue;
        const auto& last = r.trajectory->final();
        const double inner = interface_gradient(last, grid, InterfaceSelector::Left, InterfaceSide::InnerSide);
        const double outer = interface_gradient(last, grid, InterfaceSelector::Left, InterfaceSide::OuterSide);
        grads[r.plan.tag] = {{"epsilon", r.plan.epsilon}, {"time", last.time}, {"inner", inner}, {"outer", outer},
                             {"flux_ratio", std::abs(inner) > 0 ? r.plan.epsilon * std::abs(outer) / std::abs(inner) : 0.0}};
        res.metrics.push_back({r.plan.tag, "grad_inner_left", last.time, inner});
        res.metrics.push_back({r.plan.tag, "grad_outer_left", last.time, outer});
    }
    res.summary["interface_gradients"] = grads;
}

void fig3_metrics(PresetResult& res) {
    const RunRecord* neumann = nullptr;
    for (const auto& r : res.runs) {
        if (r.plan.kind == RunKind::Neumann && r.ok()) neumann = &r;
    }
    json gaps = json::array();
    if (neumann == nullptr) {
        res.summary["neumann_gap"] = gaps;
        return;
    }
    const auto& ref_traj = *neumann->trajectory;
    const auto inner = ref_traj.grid;
    for (const auto& r : res.runs) {
        if (!r.ok() || r.plan.kind != RunKind::Full) continue;
        const auto& grid = r.trajectory->grid;
        const auto range = grid.inner_cells();
        const double t = res.spec.t_end;
        const Field restricted = restrict_field(r.trajectory->at(t), range);
        const Field& ref = ref_traj.at(t);
        double excess = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < ref.values.size(); ++i) {
            excess = std::max(excess, restricted.values[i] - ref.values[i]);
        }
        const double sup = sup_distance(inner, restricted, ref);
        const double l2 = l2_space(inner, restricted, ref);
        gaps.push_back({{"run", r.plan.tag}, {"epsilon", r.plan.epsilon}, {"time", t}, {"sup_gap", sup},
                        {"l2_gap", l2}, {"max_excess", excess}});
        res.metrics.push_back({r.plan.tag, "neumann_sup_gap", t, sup});
        res.metrics.push_back({r.plan.tag, "neumann_l2_gap", t, l2});
        res.metrics.push_back({r.plan.tag, "neumann_max_excess", t, excess});
    }
    res.summary["neumann_gap"] = gaps;
}

void gradient_metrics(PresetResult& res, const Grid1D& grid) {
    json table = json::object();
    json fits = json::object();
    for (double t : res.spec.report_times) {
        std::vector<double> eps, grads;
        for (const auto& r : res.runs) {
            if (!r.ok() || r.plan.kind != RunKind::Full || r.plan.delta_cells > 0.0) continue;
            const double g = std::abs(
                interface_gradient(r.trajectory->at(t), grid, InterfaceSelector::Left, InterfaceSide::InnerSide));
            table[r.plan.tag][time_key(t)] = g;
            res.metrics.push_back({r.plan.tag, "grad_inner_left_abs", t, g});
            eps.push_back(r.plan.epsilon);
            grads.push_back(g);
        }
        if (eps.size() >= 3) {
            try {
                const auto fit = fit_power_law(eps, grads);
                fits[time_key(t)] = {{"a", fit.a}, {"b", fit.b}, {"residual", fit.residual}};
                res.metrics.push_back({"fit", "a", t, fit.a});
                res.metrics.push_back({"fit", "b", t, fit.b});
                res.metrics.push_back({"fit", "residual", t, fit.residual});
            } catch (const Error& e) {
                res.manifest.notes.push_back("fit at t = " + time_key(t) + " skipped: " + e.what());
            }
        }
    }
    res.summary["gradient_table"] = table;
    res.summary["fits"] = fits;
}

void fig5_metrics(PresetResult& res, const Grid1D& grid) {
    const auto reaction = spec_reaction(res.spec);
    const auto datum = parse_datum(res.spec.initial_datum);
    auto u0 = [&](double x) { return evaluate_datum(datum, x); };
    const double left_cut = threshold_crossing(u0, reaction.alpha(), grid.origin(), grid.interface_positions()[0]);
    const double right_cut = threshold_crossing(u0, reaction.alpha(), grid.interface_positions()[1], grid.end());
    res.summary["expected_jumps"] = {left_cut, right_cut};
    json per_time = json::array();
    for (const auto& r : res.runs) {
        if (!r.ok() || r.plan.kind != RunKind::Full) continue;
        for (const auto& snap : r.trajectory->snapshots) {
            json jumps = json::array();
            for (const auto& j : detect_jump(snap, grid)) jumps.push_back({{"x", j.x}, {"height", j.height}});
            const double dist =
                step_profile_distance(snap, grid, left_cut, right_cut, res.spec.jump_exclusion_cells);
            per_time.push_back({{"run", r.plan.tag}, {"time", snap.time}, {"jumps", jumps}, {"step_distance", dist}});
            res.metrics.push_back({r.plan.tag, "step_profile_distance", snap.time, dist});
            res.metrics.push_back({r.plan.tag, "jump_count", snap.time, static_cast<double>(jumps.size())});
        }
    }
    res.summary["jumps"] = per_time;
}

void delta_metrics(PresetResult& res) {
    json out = json::array();
    for (const auto& sharp : res.runs) {
        if (!sharp.ok() || sharp.plan.kind != RunKind::Full || sharp.plan.delta_cells > 0.0) continue;
        for (const auto& r : res.runs) {
            if (!r.ok() || r.plan.delta_cells <= 0.0 || r.plan.epsilon != sharp.plan.epsilon) continue;
            const double d = l2_space_time(*r.trajectory, *sharp.trajectory);
            out.push_back({{"run", r.plan.tag},
                           {"epsilon", r.plan.epsilon},
                           {"delta_cells", r.plan.delta_cells},
                           {"delta", r.plan.delta_cells * r.trajectory->grid.dx()},
                           {"l2_qt_distance", d}});
            res.metrics.push_back({r.plan.tag, "l2_qt_distance_to_sharp", res.spec.t_end, d});
        }
    }
    res.summary["delta_distances"] = out;
}

void ode_metrics(PresetResult& res) {
    const RunRecord* ode = nullptr;
    for (const auto& r : res.runs) {
        if (r.plan.kind == RunKind::OdeLimit && r.ok()) ode = &r;
    }
    json out = json::array();
    if (ode != nullptr) {
        for (const auto& r : res.runs) {
            if (!r.ok() || r.plan.kind != RunKind::Full) continue;
            const auto& grid = r.trajectory->grid;
            const double t = res.spec.t_end;
            const auto& u = r.trajectory->at(t).values;
            const auto& v = ode->trajectory->at(t).values;
            double worst = 0.0;
            std::size_t count = 0;
            for (auto i : cells_in(grid, RegionSelector::Outer)) {
                if (grid.distance_to_interface(grid.center(i)) <= res.spec.ode_exclusion) continue;
                worst = std::max(worst, std::abs(u[i] - v[i]));
                ++count;
            }
            out.push_back({{"run", r.plan.tag}, {"epsilon", r.plan.epsilon}, {"time", t}, {"max_difference", worst},
                           {"cells_compared", count}});
            res.metrics.push_back({r.plan.tag, "ode_limit_max_difference", t, worst});
        }
    }
    res.summary["ode_limit"] = out;
}

}  // namespace

PresetResult execute(const ExperimentSpec& spec) {
    auto problems = validate_spec(spec);
    if (!problems.empty()) throw SpecValidationError(std::move(problems));

    PresetResult res;
    res.spec = spec;
    const auto plans = plan_runs(spec);
    res.runs.resize(plans.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < plans.size(); k = next++) res.runs[k] = execute_run(spec, plans[k]);
    };
    const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(spec.workers), plans.size());
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    }

    const Grid1D grid = spec_grid(spec);
    const auto bounds = validate_bistable(spec_reaction(spec));
    res.manifest.spec = spec_to_json(spec);
    res.manifest.notes = spec.notes;
    res.summary = {{"preset", spec.preset},
                   {"software", kSoftwareVersion},
                   {"reaction_bounds", {{"max_abs_f", bounds.max_abs_f}, {"max_fprime", bounds.max_fprime}}}};

    json runs = json::array();
    for (const auto& r : res.runs) {
        json entry = {{"tag", r.plan.tag},
                      {"kind", kind_name(r.plan.kind)},
                      {"epsilon", r.plan.epsilon},
                      {"delta_cells", r.plan.delta_cells},
                      {"status", r.ok() ? "ok" : "failed"}};
        if (!r.ok()) entry["error"] = r.error;
        if (r.bounds) {
            entry["bounds"] = {{"min", r.bounds->min_value}, {"max", r.bounds->max_value}};
            res.metrics.push_back({r.plan.tag, "min_u", r.trajectory->final().time, r.bounds->min_value});
            res.metrics.push_back({r.plan.tag, "max_u", r.trajectory->final().time, r.bounds->max_value});
        }
        if (r.energy) entry["energy"] = energy_json(*r.energy);
        add_energy_metrics(r, res.metrics);
        runs.push_back(entry);
        res.manifest.runs.push_back({{"tag", r.plan.tag},
                                     {"status", r.ok() ? "ok" : "failed"},
                                     {"wall_seconds", r.wall_seconds},
                                     {"error", r.error}});
    }
    res.summary["runs"] = runs;

    const std::string& p = spec.preset;
    if (p == "fig2_snapshots" || p == "fig3_limit_comparison") fig2_metrics(res, grid);
    if (p == "fig3_limit_comparison") fig3_metrics(res);
    if (!spec.report_times.empty() && grid.has_inner_region()) gradient_metrics(res, grid);
    if (p == "fig5_longtime") fig5_metrics(res, grid);
    if (p == "delta_convergence") delta_metrics(res);
    if (p == "ode_limit_check") ode_metrics(res);
    return res;
}

std::string snapshot_file_name(const RunPlan& plan) { return "snapshots_" + plan.tag + ".csv"; }

PresetResult run_experiment(const ExperimentSpec& spec) {
    PresetResult res = execute(spec);
    const fs::path dir(spec.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create '" + dir.string() + "': " + ec.message());

    std::vector<std::string> written;
    for (const auto& r : res.runs) {
        if (!r.ok()) continue;
        const auto name = snapshot_file_name(r.plan);
        std::vector<std::size_t> cells;
        if (r.plan.kind == RunKind::OdeLimit) cells = cells_in(r.trajectory->grid, RegionSelector::Outer);
        emit_snapshot_csv(*r.trajectory, (dir / name).string(), cells);
        written.push_back(name);
    }
    emit_metrics(res.metrics, (dir / "metrics.csv").string());
    written.push_back("metrics.csv");
    emit_json(res.summary, (dir / "summary.json").string());
    written.push_back("summary.json");

    for (const auto& name : written) {
        const auto path = (dir / name).string();
        res.manifest.files.push_back({name, sha256_file(path), fs::file_size(path)});
    }
    emit_json(res.manifest.to_json(), (dir / "manifest.json").string());
    return res;
}

PresetResult run_preset(const std::string& name, const SpecOverrides& overrides) {
    ExperimentSpec spec = preset_spec(name);
    apply_overrides(spec, overrides);
    return run_experiment(spec);
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    return out;
}

void close_checked(std::ofstream& out, const std::string& path) {
    out.close();
    if (!out) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

}  // namespace

void emit_snapshot_csv(const Trajectory& traj, const std::string& path, const std::vector<std::size_t>& cells) {
    if (traj.snapshots.empty()) throw Error(ErrorCode::InvalidArgument, "empty trajectory");
    auto out = open_out(path);
    out << "t,x,u\n";
    std::string line;
    auto row = [&](double t, std::size_t i, const Field& s) {
        line = g17(t);
        line += ',';
        line += g17(traj.grid.center(i));
        line += ',';
        line += g17(s.values[i]);
        line += '\n';
        out << line;
    };
    for (const auto& s : traj.snapshots) {
        if (cells.empty()) {
            for (std::size_t i = 0; i < s.values.size(); ++i) row(s.time, i, s);
        } else {
            for (auto i : cells) row(s.time, i, s);
        }
    }
    close_checked(out, path);
}

SnapshotTable read_snapshot_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != "t,x,u") {
        throw Error(ErrorCode::ParseError, "'" + path + "' does not start with the t,x,u header");
    }
    SnapshotTable table;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        double v[3];
        const char* p = line.c_str();
        for (int k = 0; k < 3; ++k) {
            char* end = nullptr;
            v[k] = std::strtod(p, &end);
            if (end == p || (k < 2 && *end != ',') || (k == 2 && *end != '\0')) {
                throw Error(ErrorCode::ParseError, path + ": malformed row at line " + std::to_string(line_no));
            }
            p = end + 1;
        }
        table.t.push_back(v[0]);
        table.x.push_back(v[1]);
        table.u.push_back(v[2]);
    }
    return table;
}

void emit_metrics(const std::vector<MetricRow>& rows, const std::string& path) {
    auto out = open_out(path);
    out << "run,metric,time,value\n";
    for (const auto& r : rows) out << r.run << ',' << r.metric << ',' << g17(r.time) << ',' << g17(r.value) << '\n';
    close_checked(out, path);
}

void emit_json(const json& doc, const std::string& path) {
    auto out = open_out(path);
    out << doc.dump(2) << '\n';
    close_checked(out, path);
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorCode::IoError, "SHA-256 initialisation failed");
    }
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        const auto got = in.gcount();
        if (got > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(got));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

}  // namespace hetero_rd
