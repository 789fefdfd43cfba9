#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "symctl/scenario.hpp"

using namespace symctl;

namespace {

ParsedConfig tiny_run_config() {
  ParsedConfig pc = preset_scenario("parametric-fig2").base;
  pc.kv["sim.t_final"] = "2";
  return pc;
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config parser: comments, blank lines, values") {
  const ParsedConfig pc = parse_config_text(
      "# heading\n"
      "\n"
      "variant = nominal   # trailing comment\n"
      "sim.dt = 1e-3\n"
      "plant.A = 0 1; 0 0\n",
      "inline");
  CHECK(pc.kv.at("variant") == "nominal");
  CHECK(pc.kv.at("sim.dt") == "1e-3");
  CHECK(pc.kv.at("plant.A") == "0 1; 0 0");
}

TEST_CASE("config parser reports the offending line") {
  try {
    parse_config_text("variant = nominal\nnot a key value line\n", "bad.cfg");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("bad.cfg:2") != std::string::npos);
  }

  try {
    parse_config_text("a = 1\na = 2\n", "dup.cfg");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
  }
}

TEST_CASE("preset configs build into valid simulations") {
  for (const auto& name : preset_names()) {
    const Scenario sc = preset_scenario(name);
    ParsedConfig pc = sc.base;
    CHECK_NOTHROW(build_sim_config(pc));
  }
}

TEST_CASE("parametric preset values match the published study") {
  const Scenario sc = preset_scenario("parametric-fig2");
  const auto& kv = sc.base.kv;
  CHECK(kv.at("plant.A") == "0 1; 0 0");
  CHECK(kv.at("plant.B") == "0; 1");
  CHECK(kv.at("gains.K1") == "0.16 0.57");
  CHECK(kv.at("gains.K2") == "0.16");
  CHECK(kv.at("plant.lambda") == "0.9");
  CHECK(kv.at("plant.delta.ch1") == "0.2:1 0, 0.2:0 1, 0.8:1 1, 0.1:3 0, 0.1:0 2");
  CHECK(kv.at("params.kappa.a") == "1");
  CHECK(kv.at("params.kappa.b") == "2");
  CHECK(kv.at("params.kappa.rho") == "0.1");
  CHECK(kv.at("params.beta1") == "1");
  CHECK(kv.at("params.beta2") == "1");
  CHECK(kv.at("params.gamma1") == "1");
  REQUIRE(sc.comparisons.size() == 4);
  CHECK(sc.comparisons[0].label == "adaptive");
  CHECK(sc.comparisons[3].overrides.at("params.alpha") == "3");
}

TEST_CASE("nonparametric preset values match the published study") {
  const Scenario sc = preset_scenario("nonparametric-fig3");
  const auto& kv = sc.base.kv;
  CHECK(kv.at("plant.lambda") == "0.8");
  CHECK(kv.at("plant.delta.ch1") == "0.4:1 0, 0.4:0 1, 1.6:1 1, 0.2:3 0, 0.2:0 2");
  CHECK(kv.at("basis.kind") == "rbf");
  CHECK(kv.at("basis.rbf.coords") == "1 1 2 2");
  CHECK(kv.at("basis.rbf.centers") == "1 -1 1 -1");
  CHECK(kv.at("domain.lo") == "-4 -4");
  CHECK(kv.at("domain.hi") == "4 4");
  CHECK(kv.at("params.alpha") == "3");
  CHECK(kv.at("params.beta3") == "2");
  CHECK(kv.at("params.gamma2") == "2");
  REQUIRE(sc.comparisons.size() == 4);
  CHECK(sc.comparisons[3].overrides.at("params.alpha") == "9");
  CHECK(sc.comparisons[3].overrides.at("variant") == "fixed_gain");
}

TEST_CASE("missing required parameters are named in the error") {
  ParsedConfig pc = tiny_run_config();
  pc.kv.erase("params.beta1");
  try {
    build_sim_config(pc);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("beta1") != std::string::npos);
  }
}

TEST_CASE("rho = 0 is rejected for the nonparametric symbiotic variant") {
  ParsedConfig pc = preset_scenario("nonparametric-fig3").base;
  pc.kv["sim.t_final"] = "2";
  pc.kv["params.kappa.rho"] = "0";
  try {
    build_sim_config(pc);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("rho") != std::string::npos);
  }
}

TEST_CASE("unknown keys are rejected") {
  ParsedConfig pc = tiny_run_config();
  pc.kv["params.bogus"] = "1";
  try {
    build_sim_config(pc);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("params.bogus") != std::string::npos);
  }
}

TEST_CASE("non-Hurwitz gains are rejected") {
  ParsedConfig pc = tiny_run_config();
  pc.kv["gains.K1"] = "-1 -1";
  CHECK_THROWS_AS(build_sim_config(pc), ValidationError);
}

TEST_CASE("stiffness guard on dt for large alpha") {
  ParsedConfig pc = tiny_run_config();
  pc.kv["sim.dt"] = "0.02";
  CHECK_THROWS_AS(build_sim_config(pc), ValidationError);
  pc.kv["sim.dt"] = "0.01";
  CHECK_NOTHROW(build_sim_config(pc));
}

TEST_CASE("config hash is canonical") {
  ParsedConfig a = parse_config_text("x = 1\ny = 2\n", "a");
  ParsedConfig b = parse_config_text("y = 2\nx = 1\n", "b");
  CHECK(config_hash_hex(a) == config_hash_hex(b));

  ParsedConfig c = parse_config_text("x = 1\ny = 3\n", "c");
  CHECK(config_hash_hex(a) != config_hash_hex(c));
}

TEST_CASE("csv schema header") {
  CHECK(trajectory_csv_header(2, 1) == "t,x1,x2,xn1,xn2,e_norm,u,un,uf,ua,ug,V");
  CHECK(trajectory_csv_header(3, 2) ==
        "t,x1,x2,x3,xn1,xn2,xn3,e_norm,u1,u2,un1,un2,uf1,uf2,ua1,ua2,ug1,ug2,V");
}

TEST_CASE("identical configs produce byte-identical csv output") {
  const ParsedConfig pc = tiny_run_config();
  auto render = [&]() {
    const SimConfig cfg = build_sim_config(pc);
    const Trajectory tr = simulate(cfg);
    std::ostringstream os;
    write_trajectory_csv(tr, cfg.plant.n(), cfg.plant.m(), os);
    return os.str();
  };
  const std::string one = render();
  const std::string two = render();
  CHECK(one == two);
  CHECK(one.substr(0, one.find('\n')) == trajectory_csv_header(2, 1));
}

TEST_CASE("run_scenario writes csv, metrics, and plot script") {
  Scenario sc = preset_scenario("parametric-fig2");
  sc.name = "tiny";
  sc.base.kv["sim.t_final"] = "2";
  sc.comparisons = {{"adaptive", {{"variant", "adaptive"}}}, {"symbiotic", {}}};

  const auto dir = fresh_dir("symctl_test_scenario");
  const auto records = run_scenario(sc, dir);
  REQUIRE(records.size() == 3);
  CHECK(records[0].label == "nominal");
  CHECK(records[0].run_metrics.ise == doctest::Approx(0.0));
  CHECK(records[0].run_metrics.control_effort > 0.0);
  for (const auto& r : records) {
    CHECK_FALSE(r.diverged);
    CHECK(std::filesystem::exists(r.csv_path));
    CHECK(r.config_hash.size() == 16);
  }
  CHECK(records[1].run_metrics.ise > records[0].run_metrics.ise);
  CHECK(std::filesystem::exists(dir / "tiny-metrics.csv"));
  CHECK(std::filesystem::exists(dir / "tiny-plot.gp"));

  std::ifstream gp(dir / "tiny-plot.gp");
  std::stringstream ss;
  ss << gp.rdbuf();
  CHECK(ss.str().find("tiny-nominal.csv") != std::string::npos);
  CHECK(ss.str().find("lw 4") != std::string::npos);  // nominal emphasized

  std::filesystem::remove_all(dir);
}

TEST_CASE("both presets expand to five runs") {
  for (const auto& name : preset_names()) {
    Scenario sc = preset_scenario(name);
    sc.base.kv["sim.t_final"] = "2";
    const auto dir = fresh_dir("symctl_test_preset_" + name);
    const auto records = run_scenario(sc, dir);
    REQUIRE(records.size() == 5);
    CHECK(records[0].label == "nominal");
    for (const auto& r : records) CHECK_FALSE(r.diverged);
    std::filesystem::remove_all(dir);
  }
}

TEST_CASE("full-rate recording densifies the csv output") {
  Scenario sc = preset_scenario("parametric-fig2");
  sc.name = "rate";
  sc.base.kv["sim.t_final"] = "1";
  sc.comparisons.clear();

  auto row_count = [&](bool full_rate) {
    const auto dir = fresh_dir("symctl_test_rate");
    const auto records = run_scenario(sc, dir, full_rate);
    std::ifstream in(records[0].csv_path);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    std::filesystem::remove_all(dir);
    return rows;
  };
  CHECK(row_count(false) == 1 + 101);  // header + stride-10 samples
  CHECK(row_count(true) == 1 + 1001);
}

TEST_CASE("empty comparison list still runs the nominal trace") {
  Scenario sc = preset_scenario("parametric-fig2");
  sc.name = "nominal-only";
  sc.base.kv["sim.t_final"] = "2";
  sc.comparisons.clear();

  const auto dir = fresh_dir("symctl_test_nominal_only");
  const auto records = run_scenario(sc, dir);
  REQUIRE(records.size() == 1);
  CHECK(records[0].label == "nominal");
  std::filesystem::remove_all(dir);
}

TEST_CASE("sweep_alpha requires at least two values and is deterministic") {
  ParsedConfig pc = tiny_run_config();
  CHECK_THROWS_AS(sweep_alpha(pc, {3.0}), ValidationError);

  const auto rows = sweep_alpha(pc, {3.0, 3.0});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].run_metrics.ise == rows[1].run_metrics.ise);
  CHECK(rows[0].run_metrics.sup_err == rows[1].run_metrics.sup_err);

  const auto sorted = sweep_alpha(pc, {3.0, 1.0});
  CHECK(sorted[0].alpha == 1.0);
  CHECK(sorted[1].alpha == 3.0);
}

TEST_CASE("emit_plot_script refuses an empty record list") {
  CHECK_THROWS_AS(emit_plot_script({}, std::filesystem::temp_directory_path() / "none.gp"),
                  ValidationError);
}

TEST_CASE("scenario files parse into base + labeled overrides") {
  const auto dir = fresh_dir("symctl_test_scn");
  const auto path = dir / "custom.cfg";
  {
    std::ofstream os(path);
    os << "scenario.name = custom\n";
    os << "variant = symbiotic_parametric\n";
    os << "sim.t_final = 2\n";
    ParsedConfig base = preset_scenario("parametric-fig2").base;
    for (const auto& [k, v] : base.kv)
      if (k != "sim.t_final" && k != "variant") os << k << " = " << v << "\n";
    os << "run.1.label = fast\n";
    os << "run.1.params.alpha = 3\n";
    os << "run.2.variant = adaptive\n";
  }
  const Scenario sc = load_scenario(path.string());
  CHECK(sc.name == "custom");
  REQUIRE(sc.comparisons.size() == 2);
  CHECK(sc.comparisons[0].label == "fast");
  CHECK(sc.comparisons[0].overrides.at("params.alpha") == "3");
  CHECK(sc.comparisons[1].label == "run-2");
  CHECK(sc.comparisons[1].overrides.at("variant") == "adaptive");
  std::filesystem::remove_all(dir);
}

TEST_CASE("composite csv dump") {
  std::ostringstream os;
  write_composite_csv(CompositeFn::build(1.0, 2.0, 0.1), 4.0, 4, os);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "z,kappa,kappa_prime,kappa_double_prime");
  std::getline(in, line);
  CHECK(line == "0,0,0.1,0");
  int rows = 2;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 6);  // header + 5 grid rows
}
