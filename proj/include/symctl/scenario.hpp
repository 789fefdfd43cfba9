#pragma once

// Scenario presets and batch machinery: named multi-run comparisons, CSV and
// metrics emission, alpha sweeps, and gnuplot script generation.

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "symctl/config.hpp"

namespace symctl {

struct ComparisonSpec {
  std::string label;
  std::map<std::string, std::string> overrides;  // applied onto the scenario base config
};

/// A base run configuration plus labeled comparison runs. Every scenario
/// implicitly starts with a "nominal" run of the base plant/gains/reference.
struct Scenario {
  std::string name;
  ParsedConfig base;
  std::vector<ComparisonSpec> comparisons;
};

/// Built-in presets: "parametric-fig2" and "nonparametric-fig3".
Scenario preset_scenario(const std::string& name);
std::vector<std::string> preset_names();

/// Preset name or scenario file path. Scenario files are flat configs whose
/// `run.<k>.label` / `run.<k>.<key>` entries define the comparisons.
Scenario load_scenario(const std::string& name_or_path);

struct RunRecord {
  std::string scenario;
  std::string label;
  RunMetrics run_metrics;
  bool diverged = false;
  std::string csv_path;
  double wall_seconds = 0.0;
  std::string config_hash;
};

/// Runs nominal + comparisons (comparisons concurrently), writes one CSV per
/// run, a metrics summary, and a gnuplot script into out_dir.
std::vector<RunRecord> run_scenario(const Scenario& sc, const std::filesystem::path& out_dir,
                                    bool full_rate = false);

struct SweepRow {
  double alpha = 0.0;
  RunMetrics run_metrics;
  bool diverged = false;
};

/// Re-runs the scenario base config across alpha values (>= 2 required);
/// rows come back sorted by alpha.
std::vector<SweepRow> sweep_alpha(const ParsedConfig& base, const std::vector<double>& alphas);

/// Fig-2/3-style overlay script: one panel per state plus a control panel,
/// nominal trace emphasized. Throws ValidationError on an empty record list.
void emit_plot_script(const std::vector<RunRecord>& records, const std::filesystem::path& out);

/// Column schema: t, x1..xn, xn1..xnn, e_norm, u..., un..., uf..., ua...,
/// ug..., V (control blocks expand to <name>1..<name>m when m > 1).
std::string trajectory_csv_header(std::size_t n, std::size_t m);
void write_trajectory_csv(const Trajectory& tr, std::size_t n, std::size_t m, std::ostream& os);

void write_composite_csv(const CompositeFn& f, double z_max, std::size_t points, std::ostream& os);
void emit_composite_plot_script(const std::string& csv_name, std::ostream& os);

}  // namespace symctl
