#pragma once

// Plain-text `key = value` run configuration with command-line overrides.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "alforge/al_loop.hpp"
#include "alforge/dataset.hpp"

namespace alforge::config {

using KeyValues = std::map<std::string, std::string>;

/// Parses `key = value` lines; '#' starts a comment, blank lines are ignored.
KeyValues parse_key_values(const std::string& text);
KeyValues load_key_values(const std::filesystem::path& path);

/// Synthetic or file-backed data source for a run.
struct DataConfig {
  std::string kind = "two_moons";  // two_moons | blobs | grid_patterns | csv
  std::size_t n_train = 500;
  std::size_t n_test = 1000;
  double noise = 0.1;
  int classes = 2;
  double spread = 1.0;
  std::uint64_t centers_seed = 0;
  std::size_t grid_dim = 8;
  std::uint64_t seed = 0;
  std::string train_csv;
  std::string test_csv;
};

struct RunConfig {
  DataConfig data;
  al::ALConfig al;
  int trials = 1;
  std::vector<std::string> strategies{"consistency"};
};

/// Applies recognised keys; unknown keys and malformed values are collected
/// into the returned error list rather than thrown one at a time.
std::vector<std::string> apply(RunConfig& cfg, const KeyValues& kv);

/// Every key with its resolved value.
KeyValues to_key_values(const RunConfig& cfg);
std::string to_text(const RunConfig& cfg);
nlohmann::json to_json(const RunConfig& cfg);

/// Builds (or loads) the train/test datasets described by `cfg`.
data::DatasetPair make_datasets(const DataConfig& cfg);

}  // namespace alforge::config
