#ifndef MRCA_CONFIG_HPP
#define MRCA_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mrca/cumulant.hpp"
#include "mrca/verify.hpp"

namespace mrca {

enum class OutputFormat { csv, json };

struct StudyConfig {
  MechanismSpec mechanism = Quadratic{1.0, 1.0};
  Tolerances numerics;
  std::vector<double> t_grid{0.1, 0.5, 1.0, 2.0, 5.0};
  std::vector<double> lambda_grid{0.1, 0.5, 1.0, 2.0, 5.0};
  std::vector<double> s_grid{1.0, 0.5, 0.1, 0.01};
  std::vector<double> a_grid{0.25, 0.5, 0.75};
  std::vector<int> n_grid{1, 2, 3};
  std::optional<std::size_t> mc_n;
  std::uint64_t seed = kDefaultSeed;
  std::optional<std::string> output_dir;
  OutputFormat format = OutputFormat::csv;
  std::vector<std::string> studies;  // empty: the default list for the mechanism
  StudyPlan plan;                    // study parameters; n, seed, threads are filled in by the caller
};

/// Parses and validates a config document. Unknown keys, bad types,
/// unsorted or non-positive grids and invalid mechanisms raise ConfigError.
StudyConfig parse_config(const nlohmann::json& doc);
StudyConfig load_config(const std::filesystem::path& path);

/// Accepts decimal or 0x-prefixed hexadecimal.
std::uint64_t parse_seed(const std::string& text);

}  // namespace mrca

#endif  // MRCA_CONFIG_HPP
