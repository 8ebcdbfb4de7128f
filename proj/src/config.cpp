#include "mrca/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "mrca/errors.hpp"

namespace mrca {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

double number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(key + ": expected a number");
  return v.get<double>();
}

std::vector<double> grid(const json& v, const std::string& key, bool increasing_only) {
  if (!v.is_array() || v.empty()) throw ConfigError(key + ": expected a non-empty array");
  std::vector<double> out;
  for (const auto& x : v) {
    const double d = number(x, key);
    if (!(d > 0.0) || !std::isfinite(d)) throw ConfigError(key + ": values must be positive and finite");
    out.push_back(d);
  }
  const bool up = std::adjacent_find(out.begin(), out.end(), std::greater_equal<>()) == out.end();
  const bool down = std::adjacent_find(out.begin(), out.end(), std::less_equal<>()) == out.end();
  if (!(up || (!increasing_only && down))) {
    throw ConfigError(key + (increasing_only ? ": must be strictly increasing" : ": must be strictly monotone"));
  }
  return out;
}

MechanismSpec parse_mechanism(const json& m) {
  if (!m.is_object() || !m.contains("kind") || !m["kind"].is_string()) {
    throw ConfigError("mechanism.kind: expected a string");
  }
  const auto kind = m["kind"].get<std::string>();
  auto get = [&](const char* key) {
    if (!m.contains(key)) throw ConfigError(std::string("mechanism.") + key + ": missing");
    return number(m[key], std::string("mechanism.") + key);
  };
  MechanismSpec spec;
  if (kind == "quadratic") {
    reject_unknown(m, "mechanism", {"kind", "beta", "theta"});
    spec = Quadratic{get("beta"), get("theta")};
  } else if (kind == "stable") {
    reject_unknown(m, "mechanism", {"kind", "alpha", "c0", "alpha0"});
    spec = Stable{get("alpha"), get("c0"), get("alpha0")};
  } else if (kind == "custom") {
    reject_unknown(m, "mechanism", {"kind", "alpha", "beta", "atoms"});
    Custom c{get("alpha"), get("beta"), {}};
    if (m.contains("atoms")) {
      if (!m["atoms"].is_array()) throw ConfigError("mechanism.atoms: expected an array of [mass, size] pairs");
      for (const auto& a : m["atoms"]) {
        if (!a.is_array() || a.size() != 2) throw ConfigError("mechanism.atoms: expected [mass, size] pairs");
        c.atoms.push_back(Atom{number(a[0], "mechanism.atoms"), number(a[1], "mechanism.atoms")});
      }
    }
    spec = c;
  } else {
    throw ConfigError("mechanism.kind: unknown kind '" + kind + "'");
  }
  const auto report = validate(spec);
  if (!report.ok()) {
    std::string why;
    for (const auto& r : report.reasons) why += " " + r + ";";
    throw ConfigError("mechanism: invalid:" + why);
  }
  return spec;
}

}  // namespace

std::uint64_t parse_seed(const std::string& text) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used, 0);
    if (used != text.size() || text.starts_with('-')) throw ConfigError("seed: '" + text + "' is not an unsigned integer");
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("seed: '" + text + "' is not an unsigned integer");
  }
}

StudyConfig parse_config(const json& doc) {
  reject_unknown(doc, "config", {"mechanism", "numerics", "grids", "mc", "output", "verify"});
  StudyConfig cfg;
  if (doc.contains("mechanism")) cfg.mechanism = parse_mechanism(doc["mechanism"]);

  if (doc.contains("numerics")) {
    const auto& n = doc["numerics"];
    reject_unknown(n, "numerics", {"rel_quad", "rel_root"});
    if (n.contains("rel_quad")) cfg.numerics.rel_quad = number(n["rel_quad"], "numerics.rel_quad");
    if (n.contains("rel_root")) cfg.numerics.rel_root = number(n["rel_root"], "numerics.rel_root");
    if (!(cfg.numerics.rel_quad > 0.0 && cfg.numerics.rel_quad < 1.0) ||
        !(cfg.numerics.rel_root > 0.0 && cfg.numerics.rel_root < 1.0)) {
      throw ConfigError("numerics: tolerances must lie in (0, 1)");
    }
  }

  if (doc.contains("grids")) {
    const auto& g = doc["grids"];
    reject_unknown(g, "grids", {"t_grid", "lambda_grid", "s_grid", "a_grid", "n_grid"});
    if (g.contains("t_grid")) cfg.t_grid = grid(g["t_grid"], "grids.t_grid", true);
    if (g.contains("lambda_grid")) cfg.lambda_grid = grid(g["lambda_grid"], "grids.lambda_grid", true);
    if (g.contains("s_grid")) cfg.s_grid = grid(g["s_grid"], "grids.s_grid", false);
    if (g.contains("a_grid")) {
      cfg.a_grid = grid(g["a_grid"], "grids.a_grid", true);
      if (cfg.a_grid.back() > 1.0) throw ConfigError("grids.a_grid: values must lie in (0, 1]");
    }
    if (g.contains("n_grid")) {
      const auto& ng = g["n_grid"];
      if (!ng.is_array() || ng.empty()) throw ConfigError("grids.n_grid: expected a non-empty array");
      cfg.n_grid.clear();
      for (const auto& x : ng) {
        if (!x.is_number_integer() || x.get<long long>() < 1) throw ConfigError("grids.n_grid: expected integers >= 1");
        cfg.n_grid.push_back(x.get<int>());
      }
      if (std::adjacent_find(cfg.n_grid.begin(), cfg.n_grid.end(), std::greater_equal<>()) != cfg.n_grid.end()) {
        throw ConfigError("grids.n_grid: must be strictly increasing");
      }
    }
  }
  // the convergence study walks s downwards
  cfg.plan.s_grid = cfg.s_grid;
  std::sort(cfg.plan.s_grid.begin(), cfg.plan.s_grid.end(), std::greater<>());

  if (doc.contains("mc")) {
    const auto& mc = doc["mc"];
    reject_unknown(mc, "mc", {"n", "seed"});
    if (mc.contains("n")) {
      if (!mc["n"].is_number_integer() || mc["n"].get<long long>() < 1) throw ConfigError("mc.n: expected an integer >= 1");
      cfg.mc_n = mc["n"].get<std::size_t>();
    }
    if (mc.contains("seed")) {
      const auto& s = mc["seed"];
      if (s.is_number_unsigned()) {
        cfg.seed = s.get<std::uint64_t>();
      } else if (s.is_string()) {
        cfg.seed = parse_seed(s.get<std::string>());
      } else {
        throw ConfigError("mc.seed: expected an unsigned integer or a string");
      }
    }
  }

  if (doc.contains("output")) {
    const auto& o = doc["output"];
    reject_unknown(o, "output", {"dir", "format"});
    if (o.contains("dir")) {
      if (!o["dir"].is_string()) throw ConfigError("output.dir: expected a string");
      cfg.output_dir = o["dir"].get<std::string>();
    }
    if (o.contains("format")) {
      const auto f = o["format"].is_string() ? o["format"].get<std::string>() : std::string();
      if (f == "csv") {
        cfg.format = OutputFormat::csv;
      } else if (f == "json") {
        cfg.format = OutputFormat::json;
      } else {
        throw ConfigError("output.format: expected \"csv\" or \"json\"");
      }
    }
  }

  if (doc.contains("verify")) {
    const auto& v = doc["verify"];
    reject_unknown(v, "verify", {"studies", "transform_s", "convergence_cap", "fluctuation_s", "window_d", "alpha0",
                                 "quad_tol"});
    if (v.contains("studies")) {
      if (!v["studies"].is_array()) throw ConfigError("verify.studies: expected an array of names");
      const auto known = known_studies();
      for (const auto& s : v["studies"]) {
        if (!s.is_string()) throw ConfigError("verify.studies: expected strings");
        const auto name = s.get<std::string>();
        if (std::find(known.begin(), known.end(), name) == known.end()) {
          throw ConfigError("verify.studies: unknown study '" + name + "'");
        }
        cfg.studies.push_back(name);
      }
    }
    auto positive = [&](const char* key, double& slot) {
      if (!v.contains(key)) return;
      slot = number(v[key], std::string("verify.") + key);
      if (!(slot > 0.0) || !std::isfinite(slot)) throw ConfigError(std::string("verify.") + key + ": must be positive");
    };
    positive("transform_s", cfg.plan.transform_s);
    positive("convergence_cap", cfg.plan.convergence_cap);
    positive("fluctuation_s", cfg.plan.fluctuation_s);
    positive("window_d", cfg.plan.window_d);
    positive("alpha0", cfg.plan.alpha0);
    positive("quad_tol", cfg.plan.quad_tol);
    if (cfg.plan.alpha0 > 1.0) throw ConfigError("verify.alpha0: must lie in (0, 1]");
  }
  return cfg;
}

StudyConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
  return parse_config(doc);
}

}  // namespace mrca
