#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hetero_rd/error.hpp"
#include "hetero_rd/pde_solver.hpp"

namespace hetero_rd {

inline constexpr const char* kSoftwareVersion = "hetero-rd 1.0.0";

/// Names accepted by run_preset().
const std::vector<std::string>& preset_names();

/**
 * Declarative description of an experiment. Every field has a JSON key of
 * the same name, grouped as documented in README.md.
 */
struct ExperimentSpec {
    std::string preset;

    double length = 4.0;
    std::size_t n_cells = 4000;
    std::vector<double> interfaces = {1.0, 3.0};

    std::vector<double> epsilons;
    /// Smoothing collar widths in units of dx (delta_convergence only).
    std::vector<double> delta_cells;

    double alpha = 1.0 / 3.0;
    double reaction_scale = 1.0;
    double upper_bound = 1.0;
    std::string initial_datum = "sin_quarter";

    double dt = 1e-4;
    double theta = 1.0;
    double newton_tol = 1e-10;
    int newton_max_iter = 25;
    std::vector<DtChange> dt_changes;
    double t_end = 0.1;
    std::vector<double> snapshot_times;
    /// Times at which interface gradients are tabulated (fig4).
    std::vector<double> report_times;

    std::string averaging = "harmonic";
    /// Cells of the outer region closer than this to an interface are
    /// ignored by the ODE-limit comparison.
    double ode_exclusion = 0.1;
    /// Cells on each side of a jump ignored by the step-profile comparison.
    int jump_exclusion_cells = 3;

    std::string output_dir = "out";
    int workers = 1;

    /// Human-readable record of applied overrides and preset choices.
    std::vector<std::string> notes;
};

/// Command-line overrides; unset members leave the spec untouched.
struct SpecOverrides {
    std::optional<std::vector<double>> epsilons;
    std::optional<std::size_t> n_cells;
    std::optional<double> dt;
    std::optional<double> t_end;
    std::optional<int> workers;
    std::optional<std::string> output_dir;
};

/// Defaults of a named preset; throws ValidationError for unknown names.
ExperimentSpec preset_spec(const std::string& name);

void apply_overrides(ExperimentSpec& spec, const SpecOverrides& overrides);

/// Every violation found, in a stable order; empty means valid.
std::vector<std::string> validate_spec(const ExperimentSpec& spec);

/// ValidationError carrying every individual violation.
class SpecValidationError : public Error {
public:
    explicit SpecValidationError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

/// Parses and validates a JSON config. A config naming only a preset yields that preset's
/// defaults. Throws ParseError (with line and column) on malformed text and
/// SpecValidationError listing every problem (unknown keys, bad types and
/// everything validate_spec reports).
ExperimentSpec load_spec(const std::string& path);
ExperimentSpec parse_spec(const std::string& text);

/// Parses "0.5", "exp(-4)" or "e^-4" style epsilon tokens.
double parse_epsilon(const std::string& token);
/// Comma-separated list of parse_epsilon tokens.
std::vector<double> parse_epsilon_list(const std::string& text);

/// "e-4" for exp(-4) (integer exponents), otherwise a compact decimal.
std::string epsilon_tag(double epsilon);

FaceAveraging parse_averaging(const std::string& name);
std::string averaging_name(FaceAveraging averaging);

}  // namespace hetero_rd
