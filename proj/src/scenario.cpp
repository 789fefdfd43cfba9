#include "symctl/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <future>

namespace symctl {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::string(buf);
}

ParsedConfig merged(const ParsedConfig& base, const std::map<std::string, std::string>& overrides,
                    const std::string& label) {
  ParsedConfig out = base;
  out.source_name = base.source_name + ":" + label;
  for (const auto& [k, v] : overrides) out.kv[k] = v;
  return out;
}

void append_block(std::string& header, const char* name, std::size_t m) {
  if (m == 1) {
    header += ',';
    header += name;
  } else {
    for (std::size_t i = 1; i <= m; ++i) header += "," + std::string(name) + std::to_string(i);
  }
}

void write_vector_cells(std::string& line, const Vector& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    line += ',';
    line += fmt(v[i]);
  }
}

struct RunOutput {
  Trajectory trajectory;
  std::string hash;
  double wall_seconds = 0.0;
};

RunOutput execute(const ParsedConfig& pc) {
  const auto start = std::chrono::steady_clock::now();
  RunOutput out;
  out.hash = config_hash_hex(pc);
  const SimConfig cfg = build_sim_config(pc);
  out.trajectory = simulate(cfg);
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace

std::string trajectory_csv_header(std::size_t n, std::size_t m) {
  std::string header = "t";
  for (std::size_t i = 1; i <= n; ++i) header += ",x" + std::to_string(i);
  for (std::size_t i = 1; i <= n; ++i) header += ",xn" + std::to_string(i);
  header += ",e_norm";
  append_block(header, "u", m);
  append_block(header, "un", m);
  append_block(header, "uf", m);
  append_block(header, "ua", m);
  append_block(header, "ug", m);
  header += ",V";
  return header;
}

void write_trajectory_csv(const Trajectory& tr, std::size_t n, std::size_t m, std::ostream& os) {
  (void)n;
  (void)m;
  os << trajectory_csv_header(n, m) << '\n';
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    std::string line = fmt(tr.times[k]);
    write_vector_cells(line, tr.states[k].x);
    write_vector_cells(line, tr.states[k].x_n);
    line += ',';
    line += fmt(tr.signals[k].e.norm2());
    write_vector_cells(line, tr.signals[k].u);
    write_vector_cells(line, tr.signals[k].u_n);
    write_vector_cells(line, tr.signals[k].u_f);
    write_vector_cells(line, tr.signals[k].u_a);
    write_vector_cells(line, tr.signals[k].u_g);
    line += ',';
    line += fmt(tr.signals[k].V);
    os << line << '\n';
  }
}

Scenario preset_scenario(const std::string& name) {
  Scenario sc;
  sc.name = name;
  sc.base.source_name = name;

  auto& kv = sc.base.kv;
  kv["sim.dt"] = "1e-3";
  kv["sim.t_final"] = "100";
  kv["sim.record_stride"] = "10";
  kv["plant.A"] = "0 1; 0 0";
  kv["plant.B"] = "0; 1";
  kv["gains.K1"] = "0.16 0.57";
  kv["gains.K2"] = "0.16";
  kv["reference.amplitude"] = "1";
  kv["reference.period"] = "40";
  kv["reference.tau"] = "1";

  if (name == "parametric-fig2") {
    kv["variant"] = "symbiotic_parametric";
    kv["plant.lambda"] = "0.9";
    kv["plant.delta.ch1"] = "0.2:1 0, 0.2:0 1, 0.8:1 1, 0.1:3 0, 0.1:0 2";
    kv["basis.kind"] = "poly";
    kv["basis.monomials"] = "1 0; 0 1; 1 1; 3 0; 0 2";
    kv["params.alpha"] = "1";
    kv["params.beta1"] = "1";
    kv["params.beta2"] = "1";
    kv["params.gamma1"] = "1";
    kv["params.kappa.a"] = "1";
    kv["params.kappa.b"] = "2";
    kv["params.kappa.rho"] = "0.1";
    sc.comparisons = {
        {"adaptive", {{"variant", "adaptive"}}},
        {"symbiotic-identity-a1",
         {{"params.kappa", "identity"},
          {"params.kappa.a", ""},
          {"params.kappa.b", ""},
          {"params.kappa.rho", ""}}},
        {"symbiotic-a1", {}},
        {"symbiotic-a3", {{"params.alpha", "3"}}},
    };
  } else if (name == "nonparametric-fig3") {
    kv["variant"] = "symbiotic_nonparametric";
    kv["plant.lambda"] = "0.8";
    kv["plant.delta.ch1"] = "0.4:1 0, 0.4:0 1, 1.6:1 1, 0.2:3 0, 0.2:0 2";
    kv["basis.kind"] = "rbf";
    kv["basis.rbf.coords"] = "1 1 2 2";
    kv["basis.rbf.centers"] = "1 -1 1 -1";
    kv["basis.rbf.width"] = "1";
    kv["domain.lo"] = "-4 -4";
    kv["domain.hi"] = "4 4";
    kv["domain.points"] = "41";
    kv["params.alpha"] = "3";
    kv["params.beta1"] = "1";
    kv["params.beta2"] = "1";
    kv["params.beta3"] = "2";
    kv["params.gamma1"] = "1";
    kv["params.gamma2"] = "2";
    kv["params.kappa.a"] = "1";
    kv["params.kappa.b"] = "2";
    kv["params.kappa.rho"] = "0.1";
    sc.comparisons = {
        {"adaptive-leakage-b2-1", {{"variant", "adaptive_leakage"}, {"params.beta2", "1"}}},
        {"adaptive-leakage-b2-2", {{"variant", "adaptive_leakage"}, {"params.beta2", "2"}}},
        {"symbiotic-thm3", {}},
        {"fixed-gain-a9", {{"variant", "fixed_gain"}, {"params.alpha", "9"}}},
    };
  } else {
    throw ValidationError("unknown scenario preset '" + name + "'");
  }
  return sc;
}

std::vector<std::string> preset_names() { return {"parametric-fig2", "nonparametric-fig3"}; }

Scenario load_scenario(const std::string& name_or_path) {
  for (const auto& preset : preset_names())
    if (name_or_path == preset) return preset_scenario(preset);
  if (!std::filesystem::exists(name_or_path))
    throw ValidationError("scenario '" + name_or_path + "' is neither a preset nor a file");

  const ParsedConfig raw = load_config_file(name_or_path);
  Scenario sc;
  sc.name = raw.kv.count("scenario.name") ? raw.kv.at("scenario.name")
                                          : std::filesystem::path(name_or_path).stem().string();
  sc.base.source_name = sc.name;

  std::map<int, ComparisonSpec> runs;
  for (const auto& [key, value] : raw.kv) {
    if (key == "scenario.name") continue;
    if (key.rfind("run.", 0) == 0) {
      const std::size_t dot = key.find('.', 4);
      if (dot == std::string::npos)
        throw ValidationError("scenario key '" + key + "': expected run.<k>.<field>");
      int idx = 0;
      try {
        idx = std::stoi(key.substr(4, dot - 4));
      } catch (const std::exception&) {
        throw ValidationError("scenario key '" + key + "': run index must be an integer");
      }
      const std::string field = key.substr(dot + 1);
      if (field == "label")
        runs[idx].label = value;
      else
        runs[idx].overrides[field] = value;
    } else {
      sc.base.kv[key] = value;
    }
  }
  for (auto& [idx, spec] : runs) {
    if (spec.label.empty()) spec.label = "run-" + std::to_string(idx);
    sc.comparisons.push_back(std::move(spec));
  }
  return sc;
}

std::vector<RunRecord> run_scenario(const Scenario& sc, const std::filesystem::path& out_dir,
                                    bool full_rate) {
  std::filesystem::create_directories(out_dir);

  auto run_config = [&](const ComparisonSpec& spec) {
    ParsedConfig pc = merged(sc.base, spec.overrides, spec.label);
    // empty-valued overrides delete base keys
    for (auto it = pc.kv.begin(); it != pc.kv.end();) {
      if (it->second.empty())
        it = pc.kv.erase(it);
      else
        ++it;
    }
    if (full_rate) pc.kv["sim.record_stride"] = "1";
    return pc;
  };

  const ComparisonSpec nominal_spec{"nominal", {{"variant", "nominal"}}};
  const ParsedConfig nominal_cfg = run_config(nominal_spec);
  const RunOutput nominal = execute(nominal_cfg);

  std::vector<std::future<RunOutput>> futures;
  for (const auto& spec : sc.comparisons) {
    const ParsedConfig pc = run_config(spec);
    futures.push_back(std::async(std::launch::async, [pc]() { return execute(pc); }));
  }

  std::vector<RunRecord> records;
  std::vector<Trajectory> trajectories;
  auto add_record = [&](const std::string& label, RunOutput&& out, const std::string& hash) {
    RunRecord rec;
    rec.scenario = sc.name;
    rec.label = label;
    rec.diverged = out.trajectory.diverged_at.has_value();
    rec.wall_seconds = out.wall_seconds;
    rec.config_hash = hash;
    rec.csv_path = (out_dir / (sc.name + "-" + label + ".csv")).string();
    records.push_back(rec);
    trajectories.push_back(std::move(out.trajectory));
  };

  RunOutput nominal_copy = nominal;
  add_record("nominal", std::move(nominal_copy), nominal.hash);
  for (std::size_t i = 0; i < sc.comparisons.size(); ++i) {
    RunOutput out = futures[i].get();
    const std::string hash = out.hash;
    add_record(sc.comparisons[i].label, std::move(out), hash);
  }

  const SimConfig base_cfg = build_sim_config(run_config(nominal_spec));
  const std::size_t n = base_cfg.plant.n(), m = base_cfg.plant.m();
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].diverged && trajectories[i].times.size() == nominal.trajectory.times.size())
      records[i].run_metrics = metrics(trajectories[i], nominal.trajectory);
    std::ofstream os(records[i].csv_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + records[i].csv_path);
    write_trajectory_csv(trajectories[i], n, m, os);
  }

  std::ofstream ms(out_dir / (sc.name + "-metrics.csv"), std::ios::binary);
  if (!ms) throw std::runtime_error("cannot write metrics summary");
  ms << "scenario,label,ise,sup_err,control_effort,diverged,csv,config_hash,wall_s\n";
  for (const auto& r : records)
    ms << r.scenario << ',' << r.label << ',' << fmt(r.run_metrics.ise) << ','
       << fmt(r.run_metrics.sup_err) << ',' << fmt(r.run_metrics.control_effort) << ','
       << (r.diverged ? 1 : 0) << ',' << std::filesystem::path(r.csv_path).filename().string() << ','
       << r.config_hash << ',' << fmt(r.wall_seconds) << '\n';

  emit_plot_script(records, out_dir / (sc.name + "-plot.gp"));
  return records;
}

std::vector<SweepRow> sweep_alpha(const ParsedConfig& base, const std::vector<double>& alphas) {
  if (alphas.size() < 2) throw ValidationError("sweep_alpha: need at least 2 alpha values");

  ParsedConfig nominal_pc = base;
  nominal_pc.kv["variant"] = "nominal";
  const RunOutput nominal = execute(nominal_pc);

  std::vector<std::future<RunOutput>> futures;
  for (double a : alphas) {
    ParsedConfig pc = base;
    pc.kv["params.alpha"] = fmt(a);
    futures.push_back(std::async(std::launch::async, [pc]() { return execute(pc); }));
  }

  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    RunOutput out = futures[i].get();
    SweepRow row;
    row.alpha = alphas[i];
    row.diverged = out.trajectory.diverged_at.has_value();
    if (!row.diverged && out.trajectory.times.size() == nominal.trajectory.times.size())
      row.run_metrics = metrics(out.trajectory, nominal.trajectory);
    rows.push_back(row);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const SweepRow& a, const SweepRow& b) { return a.alpha < b.alpha; });
  return rows;
}

void emit_plot_script(const std::vector<RunRecord>& records, const std::filesystem::path& out) {
  if (records.empty()) throw ValidationError("emit_plot_script: no run records");

  std::ofstream os(out, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + out.string());

  // State count read back from the first CSV header so the script stays in
  // sync with dimension expansion.
  std::ifstream first(records.front().csv_path);
  std::string header;
  std::getline(first, header);
  std::size_t n = 0;
  {
    std::size_t pos = 0;
    std::vector<std::string> cols;
    while (pos <= header.size()) {
      const std::size_t c = header.find(',', pos);
      cols.push_back(header.substr(pos, c == std::string::npos ? std::string::npos : c - pos));
      if (c == std::string::npos) break;
      pos = c + 1;
    }
    while (1 + n < cols.size() && cols[1 + n].rfind("xn", 0) != 0) ++n;
  }

  os << "# gnuplot overlay for scenario '" << records.front().scenario << "'\n";
  os << "set datafile separator ','\n";
  os << "set key outside right\n";
  os << "set xlabel 't [s]'\n";
  os << "set terminal pngcairo size 1200," << 300 * (n + 1) << "\n";
  os << "set output '" << records.front().scenario << ".png'\n";
  os << "set multiplot layout " << n + 1 << ",1\n";
  for (std::size_t state = 1; state <= n; ++state) {
    os << "set ylabel 'x" << state << "'\n";
    os << "plot ";
    for (std::size_t r = 0; r < records.size(); ++r) {
      const auto& rec = records[r];
      const std::string file = std::filesystem::path(rec.csv_path).filename().string();
      const bool nominal = rec.label == "nominal";
      os << "'" << file << "' using 1:" << 1 + state << " with lines lw " << (nominal ? 4 : 1)
         << " title '" << rec.label << "'";
      os << (r + 1 < records.size() ? ", " : "\n");
    }
  }
  os << "set ylabel 'u'\n";
  os << "plot ";
  const std::size_t u_col = 1 + 2 * n + 1 + 1;  // t, states, e_norm, first u column
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::string file = std::filesystem::path(rec.csv_path).filename().string();
    const bool nominal = rec.label == "nominal";
    os << "'" << file << "' using 1:" << u_col << " with lines lw " << (nominal ? 4 : 1)
       << " title '" << rec.label << "'";
    os << (r + 1 < records.size() ? ", " : "\n");
  }
  os << "unset multiplot\n";
}

void write_composite_csv(const CompositeFn& f, double z_max, std::size_t points, std::ostream& os) {
  os << "z,kappa,kappa_prime,kappa_double_prime\n";
  for (std::size_t i = 0; i <= points; ++i) {
    const double z = z_max * static_cast<double>(i) / static_cast<double>(points);
    const KappaValue kv = f.eval(z);
    os << fmt(z) << ',' << fmt(kv.value) << ',' << fmt(kv.prime) << ',' << fmt(kv.double_prime)
       << '\n';
  }
}

void emit_composite_plot_script(const std::string& csv_name, std::ostream& os) {
  os << "set datafile separator ','\n";
  os << "set xlabel 'z'\n";
  os << "set terminal pngcairo size 900,900\n";
  os << "set output 'composite.png'\n";
  os << "set multiplot layout 3,1\n";
  const char* cols[3] = {"kappa", "kappa'", "kappa''"};
  for (int i = 0; i < 3; ++i) {
    os << "set ylabel '" << cols[i] << "'\n";
    os << "plot '" << csv_name << "' using 1:" << i + 2 << " with lines lw 2 notitle\n";
  }
  os << "unset multiplot\n";
}

}  // namespace symctl
