#pragma once
// Subcommands of the alforge tool. Each returns the process exit code:
// 0 success, 1 runtime or check failure, 2 usage or validation error.
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "alforge/config.hpp"

namespace alforge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Configuration sources shared by run, sweep and diagnose. Later sources
/// win: defaults, manifest, config file, --set pairs.
struct ConfigSources {
  std::filesystem::path manifest;
  std::filesystem::path config_file;
  std::vector<std::string> sets;  // "key=value"
};

struct GenerateOptions {
  std::string kind = "two_moons";
  std::size_t n = 500;
  std::size_t n_test = 0;
  double noise = 0.1;
  int classes = 2;
  double spread = 1.0;
  std::uint64_t centers_seed = 0;
  std::size_t grid_dim = 8;
  std::uint64_t seed = 0;
  std::filesystem::path out;  // defaults to <kind>.csv
};

struct RunOptions {
  ConfigSources sources;
  std::optional<std::string> strategy;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = "alforge_run";
  unsigned threads = 1;
};

struct SweepOptions {
  ConfigSources sources;
  std::vector<std::size_t> sizes{4, 10, 20, 40, 100};
  std::size_t seeds = 5;
  double epsilon = 0.0;
  bool supervised = false;
  std::filesystem::path out = "alforge_sweep";
  unsigned threads = 1;
};

struct DiagnoseOptions {
  ConfigSources sources;
  std::filesystem::path model;
  std::filesystem::path pool;
  std::string strategy = "consistency";
  double top_frac = 0.01;
  std::vector<double> thresholds{0.6, 0.7, 0.8, 0.9, 0.95};
  std::size_t groups = 100;
  std::filesystem::path out = "alforge_diag";
};

struct VerifyOptions {
  std::uint64_t seed = 0;
  bool corrupt_gradient = false;
};

int cmd_generate(const GenerateOptions& opt, std::ostream& out, std::ostream& err);
int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& err);
int cmd_diagnose(const DiagnoseOptions& opt, std::ostream& out, std::ostream& err);
int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& err);

/// Resolves a RunConfig from its sources. Returns every problem found
/// (unknown keys, bad values, unreadable files) instead of stopping at the first.
std::vector<std::string> resolve_config(const ConfigSources& src, config::RunConfig& cfg);

/// ALFORGE_THREADS when set to a positive integer, otherwise the hardware
/// concurrency (at least 1).
unsigned threads_from_env();

}  // namespace alforge::cli
