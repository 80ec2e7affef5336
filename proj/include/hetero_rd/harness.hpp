#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hetero_rd/analysis.hpp"
#include "hetero_rd/experiment.hpp"
#include "json.hpp"

namespace hetero_rd {

enum class RunKind { Full, Neumann, OdeLimit };

/// One independent solve within an experiment.
struct RunPlan {
    std::string tag;
    RunKind kind = RunKind::Full;
    double epsilon = 1.0;
    double delta_cells = 0.0;  ///< 0 = sharp profile
};

struct RunRecord {
    RunPlan plan;
    std::optional<Trajectory> trajectory;
    std::optional<EnergyReport> energy;
    std::optional<BoundsAudit> bounds;
    double wall_seconds = 0.0;
    std::string error;  ///< empty on success

    bool ok() const { return error.empty(); }
};

struct MetricRow {
    std::string run;
    std::string metric;
    double time;
    double value;
};

struct FileEntry {
    std::string name;
    std::string sha256;
    std::uintmax_t bytes = 0;
};

struct RunManifest {
    nlohmann::json spec;
    std::vector<std::string> notes;
    std::vector<FileEntry> files;
    nlohmann::json runs = nlohmann::json::array();

    nlohmann::json to_json() const;
};

struct PresetResult {
    ExperimentSpec spec;
    std::vector<RunRecord> runs;
    std::vector<MetricRow> metrics;
    nlohmann::json summary;
    RunManifest manifest;

    bool all_ok() const;
    const RunRecord& run(const std::string& tag) const;
};

nlohmann::json spec_to_json(const ExperimentSpec& spec);

std::vector<RunPlan> plan_runs(const ExperimentSpec& spec);

/// Executes one plan; solver failures are captured in the record.
RunRecord execute_run(const ExperimentSpec& spec, const RunPlan& plan);

/// Runs every plan (up to spec.workers concurrently) and computes the
/// preset's metrics and summary. Writes nothing.
PresetResult execute(const ExperimentSpec& spec);

/// execute() followed by writing snapshots, metrics.csv, summary.json and
/// manifest.json into spec.output_dir. Throws SpecValidationError before any
/// run starts when the spec is invalid, IoError on write failures.
PresetResult run_experiment(const ExperimentSpec& spec);

PresetResult run_preset(const std::string& name, const SpecOverrides& overrides = {});

// Artifacts -----------------------------------------------------------------

/// `t,x,u` rows, one per (snapshot, cell), 17 significant digits. When
/// `cells` is non-empty only those cells are written.
void emit_snapshot_csv(const Trajectory& traj, const std::string& path,
                       const std::vector<std::size_t>& cells = {});

struct SnapshotTable {
    std::vector<double> t;
    std::vector<double> x;
    std::vector<double> u;
};

SnapshotTable read_snapshot_csv(const std::string& path);

/// `run,metric,time,value` rows.
void emit_metrics(const std::vector<MetricRow>& rows, const std::string& path);

void emit_json(const nlohmann::json& doc, const std::string& path);

std::string sha256_file(const std::string& path);

std::string snapshot_file_name(const RunPlan& plan);

/// Distance of `state` to the step profile (1 between the cuts, 0 outside),
/// ignoring `exclusion_cells` cells on both sides of each cut.
double step_profile_distance(const Field& state, const Grid1D& grid, double left_cut,
                             double right_cut, int exclusion_cells);

}  // namespace hetero_rd
