// Command-line front end: scenario batches, alpha sweeps, composite-function
// dumps, config validation.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "symctl/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitDiverged = 2;
constexpr int kExitIo = 3;

std::string default_out_dir() {
  const char* env = std::getenv("SYMCTL_OUT");
  return env != nullptr && *env != '\0' ? std::string(env) : std::string(".");
}

int cmd_run(const std::string& scenario_arg, const std::string& out_dir, bool full_rate) {
  const symctl::Scenario sc = symctl::load_scenario(scenario_arg);
  const auto records = symctl::run_scenario(sc, out_dir, full_rate);
  bool any_diverged = false;
  std::cout << "scenario " << sc.name << " -> " << out_dir << "\n";
  for (const auto& r : records) {
    std::cout << "  " << r.label << ": ";
    if (r.diverged) {
      std::cout << "DIVERGED";
      any_diverged = true;
    } else {
      std::cout << "ise=" << r.run_metrics.ise << " sup_err=" << r.run_metrics.sup_err
                << " effort=" << r.run_metrics.control_effort;
    }
    std::cout << " (" << r.wall_seconds << " s, hash " << r.config_hash << ")\n";
  }
  return any_diverged ? kExitDiverged : kExitOk;
}

int cmd_sweep(const std::string& scenario_arg, const std::vector<double>& alphas,
              const std::string& out_dir) {
  const symctl::Scenario sc = symctl::load_scenario(scenario_arg);
  const auto rows = symctl::sweep_alpha(sc.base, alphas);
  std::cout << "alpha,ise,sup_err\n";
  bool any_diverged = false;
  for (const auto& row : rows) {
    if (row.diverged) {
      std::cout << row.alpha << ",diverged,diverged\n";
      any_diverged = true;
    } else {
      std::cout << row.alpha << ',' << row.run_metrics.ise << ',' << row.run_metrics.sup_err << "\n";
    }
  }
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream os(std::filesystem::path(out_dir) / (sc.name + "-sweep.csv"));
    if (!os) throw std::runtime_error("cannot write sweep table");
    os << "alpha,ise,sup_err,diverged\n";
    for (const auto& row : rows)
      os << row.alpha << ',' << row.run_metrics.ise << ',' << row.run_metrics.sup_err << ','
         << (row.diverged ? 1 : 0) << "\n";
  }
  return any_diverged ? kExitDiverged : kExitOk;
}

int cmd_composite(double a, double b, double rho, bool identity, const std::string& out_path,
                  double z_max, std::size_t points, const std::string& plot_path) {
  const symctl::CompositeFn f =
      identity ? symctl::CompositeFn::identity() : symctl::CompositeFn::build(a, b, rho);
  const double zm = z_max > 0.0 ? z_max : (identity ? 4.0 : 2.0 * b);
  if (out_path.empty()) {
    symctl::write_composite_csv(f, zm, points, std::cout);
  } else {
    std::ofstream os(out_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + out_path);
    symctl::write_composite_csv(f, zm, points, os);
  }
  if (!plot_path.empty()) {
    std::ofstream os(plot_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + plot_path);
    const std::string csv_name =
        out_path.empty() ? "composite.csv" : std::filesystem::path(out_path).filename().string();
    symctl::emit_composite_plot_script(csv_name, os);
  }
  return kExitOk;
}

int cmd_validate(const std::string& config_path) {
  const symctl::ParsedConfig pc = symctl::load_config_file(config_path);
  if (pc.kv.count("variant") != 0) {
    symctl::build_sim_config(pc);
    std::cout << "ok: " << config_path << " (hash " << symctl::config_hash_hex(pc) << ")\n";
    return kExitOk;
  }
  // scenario file: validate the implicit nominal run and every override set
  const symctl::Scenario sc = symctl::load_scenario(config_path);
  {
    symctl::ParsedConfig nominal = sc.base;
    nominal.kv["variant"] = "nominal";
    symctl::build_sim_config(nominal);
  }
  for (const auto& spec : sc.comparisons) {
    symctl::ParsedConfig merged = sc.base;
    for (const auto& [k, v] : spec.overrides) {
      if (v.empty())
        merged.kv.erase(k);
      else
        merged.kv[k] = v;
    }
    symctl::build_sim_config(merged);
  }
  std::cout << "ok: scenario " << sc.name << " with " << sc.comparisons.size() << " runs\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"symbiotic fixed-gain + adaptive control simulator"};
  app.require_subcommand(1);

  std::string scenario_arg;
  std::string out_dir = default_out_dir();
  bool full_rate = false;
  auto* run = app.add_subcommand("run", "run a scenario (preset name or scenario file)");
  run->add_option("--scenario", scenario_arg, "preset name or scenario file")->required();
  run->add_option("--out", out_dir, "output directory (default $SYMCTL_OUT or .)");
  run->add_flag("--full-rate", full_rate, "record every integration step");

  std::string sweep_scenario;
  std::vector<double> alphas;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "alpha sweep over a scenario base config");
  sweep->add_option("--scenario", sweep_scenario, "preset name or scenario file")->required();
  sweep->add_option("--alphas", alphas, "alpha values (need >= 2)")->required()->delimiter(',');
  sweep->add_option("--out", sweep_out, "optional output directory for the sweep table");

  double ca = 1.0, cb = 2.0, crho = 0.1, czmax = 0.0;
  std::size_t cpoints = 1000;
  bool cidentity = false;
  std::string cout_path, cplot_path;
  auto* composite = app.add_subcommand("composite", "dump (z, kappa, kappa', kappa'') as CSV");
  composite->add_option("--a", ca, "lower transition point");
  composite->add_option("--b", cb, "upper transition point");
  composite->add_option("--rho", crho, "small-signal slope");
  composite->add_flag("--identity", cidentity, "identity composite");
  composite->add_option("--out", cout_path, "CSV output path (stdout when omitted)");
  composite->add_option("--zmax", czmax, "grid end (default 2b)");
  composite->add_option("--points", cpoints, "grid intervals");
  composite->add_option("--plot", cplot_path, "also emit a gnuplot script");

  std::string config_path;
  auto* validate = app.add_subcommand("validate", "validate a run config or scenario file");
  validate->add_option("--config", config_path, "config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(scenario_arg, out_dir, full_rate);
    if (sweep->parsed()) return cmd_sweep(sweep_scenario, alphas, sweep_out);
    if (composite->parsed())
      return cmd_composite(ca, cb, crho, cidentity, cout_path, czmax, cpoints, cplot_path);
    if (validate->parsed()) return cmd_validate(config_path);
  } catch (const symctl::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const symctl::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const symctl::CompositeError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const symctl::PlantError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const symctl::LinalgError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}
