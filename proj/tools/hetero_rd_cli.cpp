// hetero-rd: run experiment presets and validate experiment configs.
//
//   hetero-rd run --preset fig4_gradient_decay --out results/fig4 --workers 8
//   hetero-rd validate --config my_experiment.json
//
// Exit codes: 0 success, 2 invalid spec/config, 1 run or I/O failure.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "hetero_rd/error.hpp"
#include "hetero_rd/experiment.hpp"
#include "hetero_rd/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRunFailure = 1;
constexpr int kExitInvalid = 2;

void print_problems(const hetero_rd::Error& e) {
    if (const auto* v = dynamic_cast<const hetero_rd::SpecValidationError*>(&e)) {
        std::cerr << "invalid experiment spec:\n";
        for (const auto& p : v->problems()) std::cerr << "  - " << p << '\n';
    } else {
        std::cerr << e.what() << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    using namespace hetero_rd;

    CLI::App app{"Heterogeneous bistable reaction-diffusion experiments"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run a preset (optionally customised by a config file)");
    std::string preset;
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::string> eps_list;
    std::optional<std::size_t> nx;
    std::optional<double> dt;
    std::optional<double> t_end;
    std::optional<int> workers;
    run->add_option("--preset", preset, "Preset name")
        ->check(CLI::IsMember(preset_names()));
    run->add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--eps", eps_list, "Comma-separated epsilons, e.g. 'exp(-1),exp(-2),0.01'");
    run->add_option("--nx", nx, "Number of cells")->check(CLI::PositiveNumber);
    run->add_option("--dt", dt, "Time step")->check(CLI::PositiveNumber);
    run->add_option("--t-end", t_end, "Final time")->check(CLI::PositiveNumber);
    run->add_option("--workers", workers, "Concurrent runs")->check(CLI::PositiveNumber);

    auto* validate = app.add_subcommand("validate", "Validate an experiment config");
    std::string validate_path;
    validate->add_option("--config", validate_path, "JSON experiment config")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    if (validate->parsed()) {
        try {
            const auto spec = load_spec(validate_path);
            std::cout << "ok: preset '" << spec.preset << "', " << plan_runs(spec).size() << " run(s)\n";
            return kExitOk;
        } catch (const Error& e) {
            print_problems(e);
            return e.code() == ErrorCode::IoError ? kExitRunFailure : kExitInvalid;
        }
    }

    ExperimentSpec spec;
    try {
        if (!config_path.empty()) {
            spec = load_spec(config_path);
            if (!preset.empty() && preset != spec.preset) {
                std::cerr << "--preset '" << preset << "' conflicts with config preset '" << spec.preset << "'\n";
                return kExitInvalid;
            }
        } else if (!preset.empty()) {
            spec = preset_spec(preset);
        } else {
            std::cerr << "run needs --preset or --config\n";
            return kExitInvalid;
        }
        SpecOverrides overrides;
        if (eps_list) overrides.epsilons = parse_epsilon_list(*eps_list);
        overrides.n_cells = nx;
        overrides.dt = dt;
        overrides.t_end = t_end;
        overrides.workers = workers;
        overrides.output_dir = out_dir;
        apply_overrides(spec, overrides);
        auto problems = validate_spec(spec);
        if (!problems.empty()) throw SpecValidationError(std::move(problems));
    } catch (const Error& e) {
        print_problems(e);
        return e.code() == ErrorCode::IoError ? kExitRunFailure : kExitInvalid;
    }

    try {
        const auto result = run_experiment(spec);
        for (const auto& r : result.runs) {
            std::cout << (r.ok() ? "ok     " : "FAILED ") << r.plan.tag << "  (" << r.wall_seconds << " s)";
            if (!r.ok()) std::cout << "  " << r.error;
            std::cout << '\n';
        }
        std::cout << "artifacts written to " << spec.output_dir << '\n';
        return result.all_ok() ? kExitOk : kExitRunFailure;
    } catch (const Error& e) {
        print_problems(e);
        return e.code() == ErrorCode::ValidationError ? kExitInvalid : kExitRunFailure;
    }
}
