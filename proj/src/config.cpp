#include "symctl/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

namespace symctl {

namespace {

std::string trim(std::string_view sv) {
  std::size_t b = 0, e = sv.size();
  while (b < e && std::isspace(static_cast<unsigned char>(sv[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(sv[e - 1]))) --e;
  return std::string(sv.substr(b, e - b));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& why) {
  throw ValidationError("config key '" + key + "': cannot parse '" + value + "' (" + why + ")");
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size() || !std::isfinite(v)) bad_value(key, value, "expected a finite number");
    return v;
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception&) {
    bad_value(key, value, "expected a number");
  }
}

long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) bad_value(key, value, "expected an integer");
    return v;
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception&) {
    bad_value(key, value, "expected an integer");
  }
}

Vector parse_vector(const std::string& key, const std::string& value) {
  const auto toks = split_ws(value);
  if (toks.empty()) bad_value(key, value, "expected numbers");
  std::vector<double> xs;
  for (const auto& t : toks) xs.push_back(parse_double(key, t));
  return Vector(std::move(xs));
}

// rows separated by ';', entries by whitespace
Matrix parse_matrix(const std::string& key, const std::string& value) {
  const auto rows = split(value, ';');
  std::vector<std::vector<double>> grid;
  for (const auto& r : rows) {
    const auto toks = split_ws(r);
    if (toks.empty()) bad_value(key, value, "empty matrix row");
    std::vector<double> row;
    for (const auto& t : toks) row.push_back(parse_double(key, t));
    if (!grid.empty() && row.size() != grid.front().size())
      bad_value(key, value, "ragged matrix rows");
    grid.push_back(std::move(row));
  }
  Matrix m(grid.size(), grid.front().size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t j = 0; j < grid[i].size(); ++j) m(i, j) = grid[i][j];
  return m;
}

// terms separated by ',', each `coeff : e1 e2 ... en`
std::vector<MonomialTerm> parse_terms(const std::string& key, const std::string& value,
                                      std::size_t n) {
  std::vector<MonomialTerm> terms;
  for (const auto& part : split(value, ',')) {
    if (part.empty()) continue;
    const auto halves = split(part, ':');
    if (halves.size() != 2) bad_value(key, part, "expected coeff:exponents");
    MonomialTerm term;
    term.coeff = parse_double(key, halves[0]);
    const auto exps = split_ws(halves[1]);
    if (exps.size() != n) bad_value(key, part, "need one exponent per state");
    for (const auto& e : exps) {
      const long v = parse_int(key, e);
      if (v < 0) bad_value(key, part, "exponents must be nonnegative");
      term.exponents.push_back(static_cast<unsigned>(v));
    }
    terms.push_back(std::move(term));
  }
  return terms;
}

}  // namespace

ParsedConfig parse_config_text(std::string_view text, const std::string& source_name) {
  ParsedConfig cfg;
  cfg.source_name = source_name;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    std::string line = trim(raw);
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(source_name + ":" + std::to_string(line_no) + ": expected 'key = value'",
                       line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ParseError(source_name + ":" + std::to_string(line_no) + ": empty key or value", line_no);
    if (cfg.kv.count(key))
      throw ParseError(source_name + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'",
                       line_no);
    cfg.kv[key] = value;
  }
  return cfg;
}

ParsedConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.filename().string());
}

std::string canonical_config_text(const ParsedConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : cfg.kv) {  // std::map iterates in key order
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  }
  return out;
}

std::string config_hash_hex(const ParsedConfig& cfg) {
  const std::string text = canonical_config_text(cfg);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

SimConfig build_sim_config(const ParsedConfig& cfg) {
  std::set<std::string> seen;
  auto get = [&](const std::string& key) -> const std::string& {
    seen.insert(key);
    auto it = cfg.kv.find(key);
    if (it == cfg.kv.end()) throw ValidationError("missing required config key '" + key + "'");
    return it->second;
  };
  auto get_or = [&](const std::string& key, const std::string& fallback) -> std::string {
    seen.insert(key);
    auto it = cfg.kv.find(key);
    return it == cfg.kv.end() ? fallback : it->second;
  };
  auto maybe = [&](const std::string& key) -> const std::string* {
    seen.insert(key);
    auto it = cfg.kv.find(key);
    return it == cfg.kv.end() ? nullptr : &it->second;
  };

  SimConfig out;
  out.variant = parse_variant(get("variant"));
  out.dt = parse_double("sim.dt", get_or("sim.dt", "1e-3"));
  out.t_final = parse_double("sim.t_final", get_or("sim.t_final", "100"));
  const long stride = parse_int("sim.record_stride", get_or("sim.record_stride", "10"));
  if (stride < 1) throw ValidationError("sim.record_stride must be >= 1");
  out.record_stride = static_cast<std::size_t>(stride);

  out.plant.A = parse_matrix("plant.A", get("plant.A"));
  out.plant.B = parse_matrix("plant.B", get("plant.B"));
  const std::size_t n = out.plant.A.rows();
  const std::size_t m = out.plant.B.cols();
  out.plant.lambda_diag = parse_vector("plant.lambda", get("plant.lambda"));
  if (const std::string* v = maybe("plant.x0"))
    out.plant.x0 = parse_vector("plant.x0", *v);
  else
    out.plant.x0 = Vector(n);

  std::vector<std::vector<MonomialTerm>> channels(m);
  for (std::size_t c = 0; c < m; ++c) {
    const std::string key = "plant.delta.ch" + std::to_string(c + 1);
    if (const std::string* v = maybe(key)) channels[c] = parse_terms(key, *v, n);
  }
  try {
    out.plant.delta = TrueUncertainty(n, std::move(channels));
  } catch (const PlantError& e) {
    throw ValidationError(e.what());
  }

  out.gains.K1 = parse_matrix("gains.K1", get("gains.K1"));
  out.gains.K2 = parse_matrix("gains.K2", get("gains.K2"));

  const std::string basis_kind = get_or("basis.kind", "none");
  try {
    if (basis_kind == "none") {
      out.basis = RegressorBasis::none();
    } else if (basis_kind == "poly") {
      const Matrix mono = parse_matrix("basis.monomials", get("basis.monomials"));
      std::vector<std::vector<unsigned>> rows;
      for (std::size_t i = 0; i < mono.rows(); ++i) {
        std::vector<unsigned> row;
        for (std::size_t j = 0; j < mono.cols(); ++j) {
          const double v = mono(i, j);
          if (v < 0.0 || v != std::floor(v))
            throw ValidationError("basis.monomials entries must be nonnegative integers");
          row.push_back(static_cast<unsigned>(v));
        }
        rows.push_back(std::move(row));
      }
      out.basis = RegressorBasis::polynomial(n, std::move(rows));
    } else if (basis_kind == "rbf") {
      const Vector coords = parse_vector("basis.rbf.coords", get("basis.rbf.coords"));
      const Vector centers = parse_vector("basis.rbf.centers", get("basis.rbf.centers"));
      if (coords.size() != centers.size())
        throw ValidationError("basis.rbf.coords and basis.rbf.centers must have equal length");
      std::vector<RbfUnit> units;
      for (std::size_t i = 0; i < coords.size(); ++i) {
        const double c = coords[i];
        if (c < 1.0 || c != std::floor(c))
          throw ValidationError("basis.rbf.coords entries are 1-based coordinate indices");
        units.push_back(RbfUnit{static_cast<std::size_t>(c) - 1, centers[i]});
      }
      const double width = parse_double("basis.rbf.width", get_or("basis.rbf.width", "1"));
      out.basis = RegressorBasis::rbf_with_bias(n, std::move(units), width);
    } else {
      throw ValidationError("basis.kind must be none, poly, or rbf");
    }
  } catch (const PlantError& e) {
    throw ValidationError(e.what());
  }

  auto opt_param = [&](const char* key) {
    const std::string* v = maybe(key);
    return v == nullptr ? 0.0 : parse_double(key, *v);
  };
  out.params.alpha = opt_param("params.alpha");
  out.params.beta1 = opt_param("params.beta1");
  out.params.beta2 = opt_param("params.beta2");
  out.params.beta3 = opt_param("params.beta3");
  out.params.gamma1 = opt_param("params.gamma1");
  out.params.gamma2 = opt_param("params.gamma2");
  if (const std::string* v = maybe("params.R")) out.params.R = parse_matrix("params.R", *v);

  const std::string kappa_id = get_or("params.kappa", "");
  if (!kappa_id.empty() && kappa_id != "identity")
    throw ValidationError("params.kappa accepts only 'identity'; use params.kappa.{a,b,rho} otherwise");
  const std::string* ka = maybe("params.kappa.a");
  const std::string* kb = maybe("params.kappa.b");
  const std::string* kr = maybe("params.kappa.rho");
  if (kappa_id == "identity") {
    if (ka || kb || kr)
      throw ValidationError("params.kappa = identity conflicts with params.kappa.{a,b,rho}");
    out.params.kappa = CompositeFn::identity();
  } else if (ka || kb || kr) {
    if (!(ka && kb && kr))
      throw ValidationError("params.kappa.a, .b, .rho must be given together");
    try {
      out.params.kappa = CompositeFn::build(parse_double("params.kappa.a", *ka),
                                            parse_double("params.kappa.b", *kb),
                                            parse_double("params.kappa.rho", *kr));
    } catch (const CompositeError& e) {
      throw ValidationError(e.what());
    }
  } else if (variant_is_symbiotic(out.variant)) {
    throw ValidationError("missing required config key 'params.kappa.a' (or params.kappa = identity)");
  }

  out.reference.amplitude = parse_double("reference.amplitude", get_or("reference.amplitude", "1"));
  out.reference.period = parse_double("reference.period", get_or("reference.period", "40"));
  out.reference.filter_time_constant = parse_double("reference.tau", get_or("reference.tau", "1"));

  if (const std::string* v = maybe("domain.lo")) out.domain.lo = parse_vector("domain.lo", *v);
  if (const std::string* v = maybe("domain.hi")) out.domain.hi = parse_vector("domain.hi", *v);
  const long pts = parse_int("domain.points", get_or("domain.points", "41"));
  if (pts < 2) throw ValidationError("domain.points must be >= 2");
  out.domain.points_per_axis = static_cast<std::size_t>(pts);

  for (const auto& [key, value] : cfg.kv) {
    (void)value;
    if (!seen.count(key)) throw ValidationError("unknown config key '" + key + "'");
  }

  validate_and_prepare(out);  // full semantic validation
  return out;
}

}  // namespace symctl
