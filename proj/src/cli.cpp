#include "mrca/cli.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "mrca/config.hpp"
#include "mrca/errors.hpp"
#include "mrca/sampler.hpp"
#include "mrca/verify.hpp"

namespace mrca::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct Options {
  std::string config_path;
  std::string out_dir;
  unsigned threads = 0;
  std::optional<std::string> seed_text;
  std::optional<std::size_t> n;
  bool record_timing = false;
  std::string quantity;
  std::optional<double> s;
  std::optional<double> d;
  std::optional<double> alpha0;
};

struct Context {
  Options opt;
  StudyConfig cfg;
  std::uint64_t seed = kDefaultSeed;
  fs::path out_dir;
  std::vector<fs::path> outputs;
};

std::string real(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw NumericError("sha256 failed");
  }
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(Context& ctx, const std::string& name, const std::string& content) {
  fs::create_directories(ctx.out_dir);
  const fs::path p = ctx.out_dir / name;
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot write '" + p.string() + "'");
  f << content;
  ctx.outputs.push_back(p);
}

/// Rows of named cells; written as CSV or as a JSON array of objects.
class Table {
public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}
  void add(std::vector<std::optional<std::string>> cells) { rows_.push_back(std::move(cells)); }
  [[nodiscard]] std::size_t size() const { return rows_.size(); }

  [[nodiscard]] std::string csv() const {
    std::string s;
    for (std::size_t i = 0; i < columns_.size(); ++i) s += (i ? "," : "") + columns_[i];
    s += '\n';
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) s += ',';
        if (r[i]) s += *r[i];
      }
      s += '\n';
    }
    return s;
  }

  // numeric cells are emitted as JSON numbers, the rest as strings
  [[nodiscard]] std::string json() const {
    ordered_json arr = ordered_json::array();
    for (const auto& r : rows_) {
      ordered_json o;
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (!r[i]) {
          o[columns_[i]] = nullptr;
          continue;
        }
        double v = 0.0;
        const auto& text = *r[i];
        const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (res.ec == std::errc() && res.ptr == text.data() + text.size() && std::isfinite(v)) {
          o[columns_[i]] = v;
        } else {
          o[columns_[i]] = text;
        }
      }
      arr.push_back(std::move(o));
    }
    return arr.dump(2) + "\n";
  }

private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::optional<std::string>>> rows_;
};

void write_table(Context& ctx, const std::string& stem, const Table& t) {
  if (ctx.cfg.format == OutputFormat::json) {
    write_file(ctx, stem + ".json", t.json());
  } else {
    write_file(ctx, stem + ".csv", t.csv());
  }
}

void write_manifest(Context& ctx, const std::string& subcommand, const std::vector<std::string>& args) {
  ordered_json m;
  m["tool"] = "mrca-lab";
  m["subcommand"] = subcommand;
  ordered_json argv = ordered_json::array();
  std::string command = "mrca-lab";
  for (std::size_t i = 1; i < args.size(); ++i) {
    argv.push_back(args[i]);
    command += " " + args[i];
  }
  m["argv"] = argv;
  m["regenerate"] = command;
  m["seed"] = ctx.seed;
  if (ctx.opt.config_path.empty()) {
    m["config"] = nullptr;
  } else {
    m["config"] = {{"path", ctx.opt.config_path}, {"sha256", sha256_hex(read_file(ctx.opt.config_path))}};
  }
  ordered_json outs = ordered_json::array();
  for (const auto& p : ctx.outputs) {
    const auto bytes = read_file(p);
    outs.push_back({{"file", p.filename().string()}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}});
  }
  m["outputs"] = outs;
  const fs::path p = ctx.out_dir / ("manifest-" + subcommand + ".json");
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f << m.dump(2) << "\n";
}

StationaryLaw make_law(const Context& ctx) { return StationaryLaw::make(ctx.cfg.mechanism, ctx.cfg.numerics); }

// ---- eval ----

enum Axis : unsigned { kNone = 0, kT = 1, kLambda = 2, kA = 4, kN = 8 };

struct Point {
  double t = 0.0;
  double lambda = 0.0;
  double a = 0.0;
  int n = 0;
};

struct Quantity {
  unsigned axes;
  std::function<double(const StationaryLaw&, const Point&)> eval;
};

const std::map<std::string, Quantity>& quantities() {
  static const std::map<std::string, Quantity> table = {
      {"mean_Z", {kNone, [](const StationaryLaw& l, const Point&) { return l.mean_Z(); }}},
      {"kappa", {kNone, [](const StationaryLaw& l, const Point&) { return l.cumulant().kappa(); }}},
      {"laplace_Z", {kLambda, [](const StationaryLaw& l, const Point& p) { return l.laplace_Z(p.lambda); }}},
      {"mean_Z_tilted", {kLambda, [](const StationaryLaw& l, const Point& p) { return l.mean_Z_tilted(p.lambda); }}},
      {"G", {kLambda, [](const StationaryLaw& l, const Point& p) { return l.cumulant().big_g(p.lambda); }}},
      {"c", {kT, [](const StationaryLaw& l, const Point& p) { return l.cumulant().c_of(p.t); }}},
      {"u", {kT | kLambda, [](const StationaryLaw& l, const Point& p) { return l.cumulant().u_of(p.lambda, p.t); }}},
      {"lambda_window", {kT, [](const StationaryLaw& l, const Point& p) { return l.cumulant().lambda_window(p.t); }}},
      {"cdf_A", {kT, [](const StationaryLaw& l, const Point& p) { return l.cdf_A(p.t); }}},
      {"pdf_A", {kT, [](const StationaryLaw& l, const Point& p) { return l.pdf_A(p.t); }}},
      {"laplace_ZA_given_A",
       {kT | kLambda, [](const StationaryLaw& l, const Point& p) { return l.laplace_ZA_given_A(p.lambda, p.t); }}},
      {"mean_ZA_given_A", {kT, [](const StationaryLaw& l, const Point& p) { return l.mean_ZA_given_A(p.t); }}},
      {"laplace_ZI_given_A",
       {kT | kLambda, [](const StationaryLaw& l, const Point& p) { return l.laplace_ZI_given_A(p.lambda, p.t); }}},
      {"laplace_ZO_given_A",
       {kT | kLambda, [](const StationaryLaw& l, const Point& p) { return l.laplace_ZO_given_A(p.lambda, p.t); }}},
      {"laplace_ZAplus_given_A",
       {kT | kLambda, [](const StationaryLaw& l, const Point& p) { return l.laplace_ZAplus_given_A(p.lambda, p.t); }}},
      {"pmf_NA_given_A",
       {kT | kN, [](const StationaryLaw& l, const Point& p) { return l.pmf_NA_given_A(p.n, p.t); }}},
      {"pgf_NA_given_A",
       {kT | kA, [](const StationaryLaw& l, const Point& p) { return l.pgf_NA_given_A(p.a, p.t); }}},
      {"mean_NA_given_A", {kT, [](const StationaryLaw& l, const Point& p) { return l.mean_NA_given_A(p.t); }}},
      {"moment_An",
       {kT | kLambda | kN, [](const StationaryLaw& l, const Point& p) { return l.moment_An(p.n, p.lambda, p.t); }}},
      {"cdf_A1", {kT, [](const StationaryLaw& l, const Point& p) { return l.cdf_A1_quadratic(p.t); }}},
  };
  return table;
}

std::vector<Point> points(const StudyConfig& cfg, unsigned axes) {
  auto pick = [](bool use, const auto& grid) {
    using V = typename std::decay_t<decltype(grid)>::value_type;
    return use ? grid : std::vector<V>{V{}};
  };
  std::vector<Point> out;
  for (double t : pick(axes & kT, cfg.t_grid)) {
    for (int n : pick(axes & kN, cfg.n_grid)) {
      for (double a : pick(axes & kA, cfg.a_grid)) {
        for (double l : pick(axes & kLambda, cfg.lambda_grid)) out.push_back(Point{t, l, a, n});
      }
    }
  }
  return out;
}

int cmd_eval(Context& ctx, std::ostream& out, std::ostream& err) {
  const auto law = make_law(ctx);
  std::vector<std::string> names;
  if (ctx.opt.quantity.empty() || ctx.opt.quantity == "all") {
    for (const auto& [name, q] : quantities()) names.push_back(name);
  } else {
    if (!quantities().contains(ctx.opt.quantity)) {
      throw ConfigError("eval: unknown quantity '" + ctx.opt.quantity + "'");
    }
    names.push_back(ctx.opt.quantity);
  }
  const bool explicit_quantity = names.size() == 1;
  Table table({"quantity", "t", "lambda", "a", "n", "value"});
  for (const auto& name : names) {
    const auto& q = quantities().at(name);
    std::vector<std::vector<std::optional<std::string>>> rows;
    try {
      for (const auto& p : points(ctx.cfg, q.axes)) {
        rows.push_back({name, (q.axes & kT) ? std::optional(real(p.t)) : std::nullopt,
                        (q.axes & kLambda) ? std::optional(real(p.lambda)) : std::nullopt,
                        (q.axes & kA) ? std::optional(real(p.a)) : std::nullopt,
                        (q.axes & kN) ? std::optional(std::to_string(p.n)) : std::nullopt, real(q.eval(law, p))});
      }
    } catch (const std::exception& e) {
      if (explicit_quantity) throw;
      err << "eval: skipping " << name << ": " << e.what() << "\n";
      continue;
    }
    for (auto& r : rows) table.add(std::move(r));
  }
  write_table(ctx, "eval", table);
  out << "eval: " << table.size() << " rows\n";
  return kExitOk;
}

// ---- sample ----

int cmd_sample(Context& ctx, std::ostream& out) {
  const auto law = make_law(ctx);
  const std::size_t n = ctx.opt.n.value_or(ctx.cfg.mc_n.value_or(1000));
  if (n == 0) throw DomainError("sample: n must be >= 1");
  const double s = ctx.opt.s.value_or(0.5);
  const double d = ctx.opt.d.value_or(1.0);
  const auto* st = std::get_if<Stable>(&ctx.cfg.mechanism);
  const double alpha0 = ctx.opt.alpha0.value_or(st ? st->alpha0 : ctx.cfg.plan.alpha0);
  const auto& qn = ctx.opt.quantity;

  std::vector<std::string> columns;
  std::function<std::vector<std::optional<std::string>>(RngStream&)> draw;
  if (qn == "Z") {
    columns = {"Z"};
    draw = [&](RngStream& r) { return std::vector<std::optional<std::string>>{real(sample_Z_quadratic(law, r))}; };
  } else if (qn == "mrca") {
    columns = {"A", "Z", "Z_A", "Z_I", "Z_O"};
    draw = [&](RngStream& r) {
      const auto m = sample_mrca_quadratic(law, r);
      return std::vector<std::optional<std::string>>{real(m.A), real(m.Z), real(m.Z_A), real(m.Z_I), real(m.Z_O)};
    };
  } else if (qn == "ancestors") {
    if (!(s > 0.0)) throw DomainError("sample: s must be > 0");
    columns = {"s", "Z_past", "M", "Z_now"};
    draw = [&](RngStream& r) {
      const auto a = sample_ancestors_quadratic(law, s, r);
      return std::vector<std::optional<std::string>>{real(a.s), real(a.Z_past), std::to_string(a.M), real(a.Z_now)};
    };
  } else if (qn == "window") {
    if (!(d > 0.0)) throw DomainError("sample: d must be > 0");
    columns = {"d", "count"};
    draw = [&](RngStream& r) {
      return std::vector<std::optional<std::string>>{real(d), std::to_string(sample_window_count(law, d, r))};
    };
  } else if (qn == "na-stable") {
    columns = {"alpha0", "N"};
    draw = [&](RngStream& r) {
      return std::vector<std::optional<std::string>>{real(alpha0), std::to_string(sample_NA_stable(alpha0, r))};
    };
  } else {
    throw ConfigError("sample: --quantity must be one of Z, mrca, ancestors, window, na-stable");
  }
  std::vector<std::vector<std::optional<std::string>>> rows(n);
  for_each_block(n, ctx.seed, ctx.opt.threads, [&](std::size_t b, std::size_t e, RngStream& rng) {
    for (std::size_t i = b; i < e; ++i) rows[i] = draw(rng);
  });
  Table table(columns);
  for (auto& r : rows) table.add(std::move(r));
  write_table(ctx, "sample_" + qn, table);
  out << "sample: " << n << " draws of " << qn << "\n";
  return kExitOk;
}

// ---- verify / study ----

StudyPlan plan_for(const Context& ctx) {
  StudyPlan p = ctx.cfg.plan;
  p.n = ctx.opt.n ? ctx.opt.n : ctx.cfg.mc_n;
  p.seed = ctx.seed;
  p.threads = ctx.opt.threads;
  p.record_timing = ctx.opt.record_timing;
  return p;
}

std::string summary_csv(const std::vector<McReport>& reports) {
  Table t({"study_name", "estimate", "std_error", "target", "tolerance", "n", "seed", "verdict", "runtime_ms", "note"});
  for (const auto& r : reports) {
    // names contain commas; quote them
    t.add({"\"" + r.study_name + "\"", real(r.estimate), real(r.std_error), real(r.target), real(r.tolerance),
           std::to_string(r.n), std::to_string(r.seed), std::string(r.pass ? "pass" : "fail"),
           std::to_string(r.runtime_ms), r.note.empty() ? std::nullopt : std::optional("\"" + r.note + "\"")});
  }
  return t.csv();
}

std::string reports_json(const std::vector<McReport>& reports) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : reports) arr.push_back(to_json(r));
  return arr.dump(2) + "\n";
}

int report_outcome(const std::vector<McReport>& reports, std::ostream& out, std::ostream& err, bool timing) {
  bool all = true;
  for (const auto& r : reports) {
    all = all && r.pass;
    out << (r.pass ? "PASS " : "FAIL ") << r.study_name << " estimate=" << real(r.estimate)
        << " target=" << real(r.target) << " tolerance=" << real(r.tolerance);
    if (!r.note.empty()) out << " (" << r.note << ")";
    out << "\n";
    if (timing) err << "timing " << r.study_name << " " << r.runtime_ms << " ms\n";
  }
  return all ? kExitOk : kExitStudyFailed;
}

int cmd_verify(Context& ctx, std::ostream& out, std::ostream& err) {
  const auto law = make_law(ctx);
  const auto names = ctx.cfg.studies.empty() ? default_study_list(law) : ctx.cfg.studies;
  const auto plan = plan_for(ctx);
  std::vector<McReport> reports;
  for (const auto& name : names) {
    auto r = run_study(name, law, plan);
    reports.insert(reports.end(), r.begin(), r.end());
  }
  write_file(ctx, "verify_reports.json", reports_json(reports));
  write_file(ctx, "verify_summary.csv", summary_csv(reports));
  return report_outcome(reports, out, err, ctx.opt.record_timing);
}

int cmd_study(Context& ctx, std::ostream& out, std::ostream& err) {
  const auto law = make_law(ctx);
  auto plan = plan_for(ctx);
  McOptions o;
  o.n = plan.n.value_or(100'000);
  o.seed = plan.seed;
  o.threads = plan.threads;
  o.record_timing = plan.record_timing;
  const auto& grid = plan.s_grid;
  auto reports = study_ancestor_convergence(law, grid, o, plan.convergence_cap);
  Table table({"s", "c", "mean_M_over_c", "abs_dev", "abs_dev_bound", "fluct_mean", "fluct_variance"});
  for (std::size_t k = 0; k < grid.size(); ++k) {
    auto [var, mean] = study_fluctuations(law, grid[k], o);
    const auto& m = reports[2 * k];
    const auto& a = reports[2 * k + 1];
    table.add({real(grid[k]), real(law.cumulant().c_of(grid[k])), real(m.estimate), real(a.estimate),
               real(a.tolerance), real(mean.estimate), real(var.estimate)});
    reports.push_back(var);
    reports.push_back(mean);
  }
  write_table(ctx, "study", table);
  write_file(ctx, "study_reports.json", reports_json(reports));
  return report_outcome(reports, out, err, ctx.opt.record_timing);
}

void add_common(CLI::App* app, Options& o) {
  app->add_option("--config", o.config_path, "JSON study config (default: quadratic, beta = theta = 1)");
  app->add_option("--out", o.out_dir, "output directory (default: output.dir or ./out)");
  app->add_option("--threads", o.threads, "worker threads, 0 = all cores; never changes results");
  app->add_option("--seed", o.seed_text, "64-bit seed, decimal or 0x-hex");
  app->add_option("--n", o.n, "replicate count")->check(CLI::PositiveNumber);
  app->add_flag("--record-timing", o.record_timing, "record runtime_ms in reports (breaks byte identity)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"mrca-lab: stationary branching populations, TMRCA laws and Monte Carlo checks", "mrca-lab"};
  app.require_subcommand(1, 1);
  Options o;
  auto* eval = app.add_subcommand("eval", "evaluate analytic laws on the config grids");
  add_common(eval, o);
  eval->add_option("--quantity", o.quantity, "quantity to evaluate (default: all)");
  auto* sample = app.add_subcommand("sample", "draw exact samples");
  add_common(sample, o);
  sample->add_option("--quantity", o.quantity, "Z | mrca | ancestors | window | na-stable")->required();
  sample->add_option("--s", o.s, "look-back time for ancestors");
  sample->add_option("--d", o.d, "window length");
  sample->add_option("--alpha0", o.alpha0, "stable index for na-stable");
  auto* verify = app.add_subcommand("verify", "run the configured verification studies");
  add_common(verify, o);
  auto* study = app.add_subcommand("study", "ancestor convergence and fluctuation sweeps over s_grid");
  add_common(study, o);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  Context ctx;
  ctx.opt = o;
  try {
    ctx.cfg = o.config_path.empty() ? StudyConfig{} : load_config(o.config_path);
    ctx.seed = ctx.cfg.seed;
    if (const char* env = std::getenv("MRCA_LAB_SEED"); env != nullptr && *env != '\0') ctx.seed = parse_seed(env);
    if (o.seed_text) ctx.seed = parse_seed(*o.seed_text);
    ctx.out_dir = !o.out_dir.empty() ? fs::path(o.out_dir) : fs::path(ctx.cfg.output_dir.value_or("out"));

    const auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    int code = kExitOk;
    if (name == "eval") {
      code = cmd_eval(ctx, out, err);
    } else if (name == "sample") {
      code = cmd_sample(ctx, out);
    } else if (name == "verify") {
      code = cmd_verify(ctx, out, err);
    } else {
      code = cmd_study(ctx, out, err);
    }
    write_manifest(ctx, name, args);
    return code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace mrca::cli
