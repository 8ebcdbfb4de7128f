#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "mrca/cli.hpp"
#include "mrca/config.hpp"
#include "mrca/errors.hpp"

namespace fs = std::filesystem;
using namespace mrca;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mrca-lab");
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mrca_lab_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.json";
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

StudyConfig parse(const std::string& text) { return parse_config(nlohmann::json::parse(text)); }

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("defaults and full document") {
    const auto d = parse("{}");
    CHECK(std::holds_alternative<Quadratic>(d.mechanism));
    CHECK(d.seed == kDefaultSeed);
    CHECK(d.format == OutputFormat::csv);

    const auto c = parse(R"({
      "mechanism": {"kind": "custom", "alpha": 1, "beta": 0.5, "atoms": [[1, 1], [0.5, 2]]},
      "numerics": {"rel_quad": 1e-9, "rel_root": 1e-11},
      "grids": {"t_grid": [0.5, 1], "lambda_grid": [1, 2, 3], "s_grid": [0.01, 0.1, 1], "a_grid": [0.5], "n_grid": [1, 4]},
      "mc": {"n": 500, "seed": "0x2A"},
      "output": {"dir": "somewhere", "format": "json"},
      "verify": {"studies": ["window_count"], "window_d": 2, "convergence_cap": 0.3}
    })");
    const auto& cm = std::get<Custom>(c.mechanism);
    CHECK(cm.atoms.size() == 2);
    CHECK(cm.atoms[1].size == 2.0);
    CHECK(c.numerics.rel_root == 1e-11);
    CHECK(c.t_grid == std::vector<double>{0.5, 1.0});
    CHECK(c.n_grid == std::vector<int>{1, 4});
    CHECK(c.mc_n == 500);
    CHECK(c.seed == 42);
    CHECK(c.output_dir == "somewhere");
    CHECK(c.format == OutputFormat::json);
    CHECK(c.studies == std::vector<std::string>{"window_count"});
    CHECK(c.plan.window_d == 2.0);
    CHECK(c.plan.s_grid == std::vector<double>{1.0, 0.1, 0.01});

    const auto s = parse(R"({"mechanism": {"kind": "stable", "alpha": 1, "c0": 2, "alpha0": 0.25}})");
    CHECK(std::get<Stable>(s.mechanism).alpha0 == 0.25);
  }

  TEST_CASE("rejections") {
    CHECK_THROWS_AS(parse(R"({"bogus": 1})"), ConfigError);
    CHECK_THROWS_AS(parse(R"({"mechanism": {"kind": "quadratic", "beta": 1, "theta": 1, "extra": 2}})"), ConfigError);
    CHECK_THROWS_AS(parse(R"({"mechanism": {"kind": "quadratic", "beta": 1}})"), ConfigError);
    CHECK_THROWS_AS(parse(R"({"mechanism": {"kind": "weird"}})"), ConfigError);
    CHECK_THROWS_AS(parse(R"({"mechanism": {"kind": "quadratic", "beta": "x", "theta": 1}})"), ConfigError);
    CHECK_THROWS_AS(parse(R"({"mechanism": {"kind": "custom", "alpha": 1, "beta": 0, "atoms": [[1, 1]]}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse(R"({"mechanism": {"kind": "stable", "alpha": 1, "c0": 1, "alpha0": 1.5}})"), ConfigError);
    CHECK_THROWS_AS(parse(R"({"grids": {"t_grid": [1, 0.5]}})"), ConfigError);
    CHECK_THROWS_AS(parse(R"({"grids": {"t_grid": [0, 1]}})"), ConfigError);
    CHECK_THROWS_AS(parse(R"({"grids": {"lambda_grid": []}})"), ConfigError);
    CHECK_THROWS_AS(parse(R"({"grids": {"a_grid": [0.5, 1.5]}})"), ConfigError);
    CHECK_THROWS_AS(parse(R"({"grids": {"s_grid": [1, 0.1, 0.5]}})"), ConfigError);
    CHECK_THROWS_AS(parse(R"({"grids": {"n_grid": [2, 1]}})"), ConfigError);
    CHECK_THROWS_AS(parse(R"({"mc": {"n": 0}})"), ConfigError);
    CHECK_THROWS_AS(parse(R"({"mc": {"seed": "banana"}})"), ConfigError);
    CHECK_THROWS_AS(parse(R"({"output": {"format": "xml"}})"), ConfigError);
    CHECK_THROWS_AS(parse(R"({"numerics": {"rel_quad": -1}})"), ConfigError);
    CHECK_THROWS_AS(parse(R"({"verify": {"studies": ["nope"]}})"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
  }

  TEST_CASE("seed parsing") {
    CHECK(parse_seed("12") == 12);
    CHECK(parse_seed("0xC0FFEE") == 0xC0FFEE);
    CHECK(parse_seed("18446744073709551615") == 18446744073709551615ULL);
    CHECK_THROWS_AS((void)parse_seed("-1"), ConfigError);
    CHECK_THROWS_AS((void)parse_seed("12abc"), ConfigError);
    CHECK_THROWS_AS((void)parse_seed(""), ConfigError);
  }
}

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit with 2") {
    CHECK(run_cli({}).code == cli::kExitUsage);
    const auto bogus = run_cli({"frobnicate"});
    CHECK(bogus.code == cli::kExitUsage);
    CHECK(bogus.err.find("Usage") != std::string::npos);
    CHECK(run_cli({"eval", "--no-such-flag"}).code == cli::kExitUsage);
    CHECK(run_cli({"sample"}).code == cli::kExitUsage);
    CHECK(run_cli({"eval", "--config", "/nonexistent.json"}).code == cli::kExitUsage);
    const auto dir = scratch("bad_cfg");
    const auto cfg = write_config(dir, R"({"grids": {"t_grid": [2, 1]}})");
    CHECK(run_cli({"eval", "--config", cfg.string(), "--out", dir.string()}).code == cli::kExitUsage);
    CHECK(run_cli({"sample", "--quantity", "Z", "--seed", "nope", "--out", dir.string()}).code == cli::kExitUsage);
    CHECK(run_cli({"--help"}).code == cli::kExitOk);
  }

  TEST_CASE("eval single quantity") {
    const auto dir = scratch("eval");
    const auto r = run_cli({"eval", "--quantity", "cdf_A", "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto rows = lines(slurp(dir / "eval.csv"));
    REQUIRE(rows.size() == 6);
    CHECK(rows[0] == "quantity,t,lambda,a,n,value");
    CHECK(rows[3].rfind("cdf_A,1,,,,", 0) == 0);
    const double v = std::stod(rows[3].substr(rows[3].rfind(',') + 1));
    CHECK(v == doctest::Approx(std::pow(1.0 - std::exp(-2.0), 2)).epsilon(1e-15));
    CHECK(fs::exists(dir / "manifest-eval.json"));
    CHECK(run_cli({"eval", "--quantity", "nonsense", "--out", dir.string()}).code == cli::kExitUsage);
  }

  TEST_CASE("eval json format and all quantities") {
    const auto dir = scratch("eval_json");
    const auto cfg = write_config(dir, R"({"mechanism": {"kind": "stable", "alpha": 1, "c0": 1, "alpha0": 0.5},
                                           "output": {"format": "json"}})");
    const auto r = run_cli({"eval", "--config", cfg.string(), "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto doc = nlohmann::json::parse(slurp(dir / "eval.json"));
    REQUIRE(doc.is_array());
    bool found_kappa = false;
    for (const auto& row : doc) {
      if (row["quantity"] == "kappa") {
        found_kappa = true;
        CHECK(row["value"].get<double>() == doctest::Approx(1.0).epsilon(1e-8));
      }
    }
    CHECK(found_kappa);
    CHECK_FALSE(fs::exists(dir / "eval.csv"));
  }

  TEST_CASE("sample is deterministic and thread independent") {
    const auto a = scratch("sample_a");
    const auto b = scratch("sample_b");
    REQUIRE(run_cli({"sample", "--quantity", "mrca", "--n", "10000", "--seed", "7", "--out", a.string(),
                     "--threads", "1"}).code == 0);
    REQUIRE(run_cli({"sample", "--quantity", "mrca", "--n", "10000", "--seed", "7", "--out", b.string(),
                     "--threads", "4"}).code == 0);
    const auto text = slurp(a / "sample_mrca.csv");
    CHECK(text == slurp(b / "sample_mrca.csv"));
    const auto rows = lines(text);
    CHECK(rows.size() == 10001);
    CHECK(rows[0] == "A,Z,Z_A,Z_I,Z_O");
    CHECK(text.find('\r') == std::string::npos);
    REQUIRE(run_cli({"sample", "--quantity", "mrca", "--n", "10000", "--seed", "8", "--out", b.string()}).code == 0);
    CHECK(text != slurp(b / "sample_mrca.csv"));
  }

  TEST_CASE("sample quantities and capability errors") {
    const auto dir = scratch("sample_kinds");
    for (const std::string q : {"Z", "ancestors", "window", "na-stable"}) {
      CAPTURE(q);
      CHECK(run_cli({"sample", "--quantity", q, "--n", "50", "--out", dir.string()}).code == 0);
    }
    CHECK(lines(slurp(dir / "sample_ancestors.csv"))[0] == "s,Z_past,M,Z_now");
    const auto cfg = write_config(dir, R"({"mechanism": {"kind": "stable", "alpha": 1, "c0": 1, "alpha0": 0.5}})");
    CHECK(run_cli({"sample", "--config", cfg.string(), "--quantity", "Z", "--n", "5", "--out", dir.string()}).code ==
          cli::kExitUsage);
    CHECK(run_cli({"sample", "--config", cfg.string(), "--quantity", "window", "--n", "5", "--out", dir.string()})
              .code == 0);
    CHECK(run_cli({"sample", "--quantity", "ancestors", "--s", "-1", "--out", dir.string()}).code == cli::kExitUsage);
  }

  TEST_CASE("seed precedence") {
    const auto dir = scratch("seed");
    const auto cfg = write_config(dir, R"({"mc": {"seed": 5}})");
    auto seed_of = [&](const std::vector<std::string>& extra) {
      std::vector<std::string> args{"sample", "--quantity", "Z", "--n", "3", "--config", cfg.string(), "--out",
                                    dir.string()};
      args.insert(args.end(), extra.begin(), extra.end());
      REQUIRE(run_cli(args).code == 0);
      return nlohmann::json::parse(slurp(dir / "manifest-sample.json"))["seed"].get<std::uint64_t>();
    };
    ::unsetenv("MRCA_LAB_SEED");
    CHECK(seed_of({}) == 5);
    ::setenv("MRCA_LAB_SEED", "0x10", 1);
    CHECK(seed_of({}) == 16);
    CHECK(seed_of({"--seed", "99"}) == 99);
    ::unsetenv("MRCA_LAB_SEED");
  }

  TEST_CASE("manifest lists outputs with hashes") {
    const auto dir = scratch("manifest");
    REQUIRE(run_cli({"sample", "--quantity", "Z", "--n", "20", "--out", dir.string()}).code == 0);
    const auto m = nlohmann::json::parse(slurp(dir / "manifest-sample.json"));
    CHECK(m["tool"] == "mrca-lab");
    CHECK(m["subcommand"] == "sample");
    CHECK(m["config"].is_null());
    REQUIRE(m["outputs"].size() == 1);
    CHECK(m["outputs"][0]["file"] == "sample_Z.csv");
    CHECK(m["outputs"][0]["bytes"].get<std::size_t>() == fs::file_size(dir / "sample_Z.csv"));
    CHECK(m["outputs"][0]["sha256"].get<std::string>().size() == 64);
    CHECK(m["regenerate"].get<std::string>().rfind("mrca-lab sample", 0) == 0);
  }

  TEST_CASE("verify exit codes") {
    const auto dir = scratch("verify");
    const auto ok_cfg = write_config(dir, R"({"verify": {"studies": ["transform_identities", "window_count"]}})");
    const auto ok = run_cli({"verify", "--config", ok_cfg.string(), "--n", "20000", "--out", dir.string()});
    CHECK(ok.code == cli::kExitOk);
    const auto reports = nlohmann::json::parse(slurp(dir / "verify_reports.json"));
    REQUIRE(reports.is_array());
    CHECK(reports.size() > 5);
    for (const auto& r : reports) {
      CHECK(r.size() == 9);
      CHECK(r["verdict"] == "pass");
    }
    const auto summary = lines(slurp(dir / "verify_summary.csv"));
    CHECK(summary.size() == reports.size() + 1);

    const auto bad_cfg = write_config(dir, R"({"verify": {"studies": ["tmrca_law_negative_control"]}})");
    CHECK(run_cli({"verify", "--config", bad_cfg.string(), "--n", "100000", "--out", dir.string()}).code ==
          cli::kExitStudyFailed);
  }

  TEST_CASE("study subcommand") {
    const auto dir = scratch("study");
    const auto r = run_cli({"study", "--n", "20000", "--out", dir.string()});
    CHECK(r.code == cli::kExitOk);
    const auto rows = lines(slurp(dir / "study.csv"));
    REQUIRE(rows.size() == 5);
    CHECK(rows[0] == "s,c,mean_M_over_c,abs_dev,abs_dev_bound,fluct_mean,fluct_variance");
    CHECK(fs::exists(dir / "study_reports.json"));
  }
}
