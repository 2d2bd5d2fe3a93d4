#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "alforge/al_loop.hpp"
#include "alforge/coldstart.hpp"
#include "alforge/diagnostics.hpp"
#include "alforge/error.hpp"
#include "alforge/io.hpp"
#include "alforge/oracles.hpp"
#include "alforge/version.hpp"

namespace alforge::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

json fingerprints(const data::DatasetPair& d) {
  return {{"train", hex64(d.train.fingerprint())}, {"test", hex64(d.test.fingerprint())}};
}

void write_json(const fs::path& path, const json& j) { io::write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  try {
    return json::parse(io::read_text(path));
  } catch (const json::parse_error& e) {
    throw IoError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

json manifest_json(const config::RunConfig& cfg, const data::DatasetPair& d, const fs::path& out,
                   const std::string& command) {
  json m;
  m["command"] = command;
  m["version"] = kVersion;
  m["seed"] = cfg.al.seed;
  m["dataset_fingerprint"] = fingerprints(d);
  m["output_dir"] = out.string();
  m["config"] = config::to_json(cfg);
  return m;
}

void print_errors(std::ostream& err, const std::string& head, const std::vector<std::string>& errors) {
  err << head << "\n";
  for (const auto& e : errors) err << "  - " << e << "\n";
}

// Checks the regenerated data against the manifest it was resolved from.
std::vector<std::string> check_fingerprint(const ConfigSources& src, const data::DatasetPair& d) {
  if (src.manifest.empty()) return {};
  const json m = read_json(src.manifest);
  if (!m.contains("dataset_fingerprint")) return {};
  if (m["dataset_fingerprint"] != fingerprints(d)) {
    return {"dataset fingerprint differs from manifest " + src.manifest.string()};
  }
  return {};
}

std::string records_name(const std::string& strategy) { return "records_" + strategy + ".csv"; }

}  // namespace

unsigned threads_from_env() {
  if (const char* env = std::getenv("ALFORGE_THREADS")) {
    unsigned v = 0;
    const char* end = env + std::char_traits<char>::length(env);
    const auto [ptr, ec] = std::from_chars(env, end, v);
    if (ec == std::errc() && ptr == end && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::string> resolve_config(const ConfigSources& src, config::RunConfig& cfg) {
  std::vector<std::string> errors;
  auto merge = [&](const config::KeyValues& kv) {
    const auto e = config::apply(cfg, kv);
    errors.insert(errors.end(), e.begin(), e.end());
  };
  try {
    if (!src.manifest.empty()) {
      const json m = read_json(src.manifest);
      if (!m.contains("config") || !m["config"].is_object()) {
        errors.push_back("manifest " + src.manifest.string() + " has no config object");
      } else {
        config::KeyValues kv;
        for (const auto& [k, v] : m["config"].items()) kv[k] = v.get<std::string>();
        merge(kv);
      }
    }
    if (!src.config_file.empty()) merge(config::load_key_values(src.config_file));
  } catch (const std::exception& e) {
    errors.emplace_back(e.what());
  }
  config::KeyValues overrides;
  for (const auto& s : src.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      errors.push_back("--set expects key=value, got '" + s + "'");
      continue;
    }
    auto parsed = config::parse_key_values(s);
    overrides.insert(parsed.begin(), parsed.end());
  }
  merge(overrides);
  return errors;
}

int cmd_generate(const GenerateOptions& opt, std::ostream& out, std::ostream& err) {
  data::DatasetPair d;
  try {
    require(opt.n >= 1, "--n must be positive");
    // A small placeholder split keeps the pair generators usable when no test file is requested.
    const std::size_t n_test = opt.n_test > 0 ? opt.n_test : 2 * static_cast<std::size_t>(std::max(opt.classes, 2));
    if (opt.kind == "two_moons") {
      require(opt.n % 2 == 0, "--n must be even for two_moons");
      d = data::make_two_moons(opt.n, n_test, opt.noise, opt.seed);
    } else if (opt.kind == "blobs") {
      d = data::make_blobs(opt.n, n_test, opt.classes, opt.centers_seed, opt.spread, opt.seed);
    } else if (opt.kind == "grid_patterns") {
      d = data::make_grid_patterns(opt.n, n_test, opt.classes, opt.grid_dim, opt.noise, opt.seed);
    } else {
      throw ContractError("--kind must be two_moons, blobs or grid_patterns, got '" + opt.kind + "'");
    }
  } catch (const ContractError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  const fs::path csv = opt.out.empty() ? fs::path(opt.kind + ".csv") : opt.out;
  if (csv.has_parent_path()) fs::create_directories(csv.parent_path());
  io::save_dataset_csv(csv, d.train);
  json meta{{"kind", opt.kind},
            {"n", opt.n},
            {"noise", opt.noise},
            {"classes", d.train.classes()},
            {"spread", opt.spread},
            {"centers_seed", opt.centers_seed},
            {"grid_dim", opt.grid_dim},
            {"seed", opt.seed},
            {"input_dim", d.train.input_dim()},
            {"version", kVersion},
            {"train", {{"path", csv.filename().string()}, {"rows", d.train.size()},
                       {"fingerprint", hex64(d.train.fingerprint())}}}};
  if (opt.n_test > 0) {
    fs::path test_csv = csv;
    test_csv.replace_filename(csv.stem().string() + "_test" + csv.extension().string());
    io::save_dataset_csv(test_csv, d.test);
    meta["test"] = {{"path", test_csv.filename().string()}, {"rows", d.test.size()},
                    {"fingerprint", hex64(d.test.fingerprint())}};
  }
  fs::path meta_path = csv;
  meta_path.replace_extension(".json");
  write_json(meta_path, meta);
  out << "wrote " << csv.string() << " (" << d.train.size() << " rows)\n";
  return kExitOk;
}

int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  config::RunConfig cfg;
  auto errors = resolve_config(opt.sources, cfg);
  config::KeyValues flags;
  if (opt.strategy) flags["strategy"] = *opt.strategy;
  if (opt.trials) flags["trials"] = std::to_string(*opt.trials);
  if (opt.seed) flags["seed"] = std::to_string(*opt.seed);
  const auto flag_errors = config::apply(cfg, flags);
  errors.insert(errors.end(), flag_errors.begin(), flag_errors.end());
  if (cfg.trials < 1) errors.push_back("trials must be >= 1");

  data::DatasetPair d;
  {
    try {
      d = config::make_datasets(cfg.data);
      const auto v = cfg.al.violations(d.train.size());
      errors.insert(errors.end(), v.begin(), v.end());
      const auto f = check_fingerprint(opt.sources, d);
      errors.insert(errors.end(), f.begin(), f.end());
    } catch (const std::exception& e) {
      errors.emplace_back(e.what());
    }
  }
  if (!errors.empty()) {
    print_errors(err, "invalid run configuration:", errors);
    return kExitUsage;
  }

  fs::create_directories(opt.out);
  json summary;
  summary["version"] = kVersion;
  summary["config"] = config::to_json(cfg);
  summary["dataset_fingerprint"] = fingerprints(d);
  for (const auto& name : cfg.strategies) {
    al::ALConfig al = cfg.al;
    al.strategy = select::parse_strategy(name);
    const auto set = al::run_trials(d.train, d.test, al, cfg.trials, opt.threads);

    std::ofstream csv(opt.out / records_name(name), std::ios::binary);
    if (!csv) throw IoError("cannot write " + (opt.out / records_name(name)).string());
    io::write_records_header(csv);
    std::vector<bool> truncated;
    for (std::size_t t = 0; t < set.runs.size(); ++t) {
      io::write_records(csv, static_cast<int>(t), set.runs[t].records);
      truncated.push_back(set.runs[t].truncated);
    }
    io::save_model(opt.out / ("model_" + name + ".alfg"), set.runs.front().final_params);
    write_json(opt.out / ("pool_" + name + ".json"), io::pool_to_json(set.runs.front().final_pool));
    summary["strategies"][name] = {{"records", records_name(name)},
                                   {"curves", io::curves_to_json(set.curves)},
                                   {"truncated", truncated}};
    const auto& last = set.curves.back();
    out << name << ": final acc " << last.acc_mean << " +/- " << last.acc_std << " at "
        << last.labeled_mean << " labels (" << cfg.trials << " trials)\n";
  }
  write_json(opt.out / "summary.json", summary);
  write_json(opt.out / "manifest.json", manifest_json(cfg, d, opt.out, "run"));
  return kExitOk;
}

int cmd_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& err) {
  config::RunConfig cfg;
  auto errors = resolve_config(opt.sources, cfg);
  if (opt.supervised) cfg.al.loss.unsup_weight = 0.0;
  if (opt.sizes.size() < 2) errors.push_back("--sizes needs at least two sizes for the start-size rule");
  if (!std::is_sorted(opt.sizes.begin(), opt.sizes.end()) ||
      std::adjacent_find(opt.sizes.begin(), opt.sizes.end()) != opt.sizes.end()) {
    errors.push_back("--sizes must be strictly increasing");
  }
  if (opt.seeds < 1) errors.push_back("--seeds must be >= 1");
  if (!(opt.epsilon >= 0.0)) errors.push_back("--epsilon must be >= 0");

  data::DatasetPair d;
  if (!opt.sizes.empty()) {
    try {
      d = config::make_datasets(cfg.data);
      if (opt.sizes.back() > d.train.size()) errors.push_back("largest size exceeds the training pool");
      const auto f = check_fingerprint(opt.sources, d);
      errors.insert(errors.end(), f.begin(), f.end());
    } catch (const std::exception& e) {
      errors.emplace_back(e.what());
    }
  }
  if (!errors.empty()) {
    print_errors(err, "invalid sweep configuration:", errors);
    return kExitUsage;
  }

  // One worker per seed slot; results are placed by seed so order is fixed.
  std::vector<std::vector<coldstart::MeasureRecord>> per_seed(opt.seeds);
  const unsigned workers = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(opt.seeds)));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t s = w; s < opt.seeds; s += workers) {
          const std::uint64_t seed = cfg.al.seed + s;
          per_seed[s] = coldstart::sweep_start_sizes(d.train, opt.sizes, cfg.al,
                                                     std::span<const std::uint64_t>(&seed, 1));
        }
      });
    }
  }
  std::vector<coldstart::MeasureRecord> records;
  for (auto& r : per_seed) records.insert(records.end(), r.begin(), r.end());

  fs::create_directories(opt.out);
  {
    std::ofstream csv(opt.out / "sweep.csv", std::ios::binary);
    csv << "size,seed,measure_H,target_loss\n";
    for (const auto& r : records) {
      csv << r.labeled_count << ',' << r.seed << ',' << io::format_double(r.measure_h) << ','
          << io::format_double(r.target_loss) << '\n';
    }
  }
  const auto means = coldstart::mean_by_size(records);
  const auto decision = coldstart::start_size_rule(means, opt.epsilon);
  std::vector<double> h, loss;
  for (const auto& m : means) {
    h.push_back(m.measure_h);
    loss.push_back(m.target_loss);
  }
  const auto r = coldstart::pearson(h, loss);
  json rec{{"epsilon", opt.epsilon},
           {"recommended_size", decision.size},
           {"converged", decision.converged},
           {"sizes", opt.sizes},
           {"mean_measure_H", h},
           {"mean_target_loss", loss},
           {"delta_H", decision.delta_h},
           {"pearson", r ? json(*r) : json(nullptr)},
           {"mode", cfg.al.loss.unsup_weight > 0.0 ? "ssl" : "supervised"},
           {"seeds", opt.seeds}};
  write_json(opt.out / "recommendation.json", rec);
  write_json(opt.out / "manifest.json", manifest_json(cfg, d, opt.out, "sweep"));
  out << "recommended start size " << decision.size << (decision.converged ? "" : " (not converged)")
      << ", pearson " << (r ? std::to_string(*r) : std::string("undefined")) << "\n";
  return kExitOk;
}

int cmd_diagnose(const DiagnoseOptions& opt, std::ostream& out, std::ostream& err) {
  for (const auto& p : {opt.model, opt.pool}) {
    if (p.empty() || !fs::is_regular_file(p)) {
      err << "error: missing snapshot file: " << p.string() << "\n";
      return kExitFailure;
    }
  }
  config::RunConfig cfg;
  auto errors = resolve_config(opt.sources, cfg);
  if (!(opt.top_frac > 0.0 && opt.top_frac <= 1.0)) errors.push_back("--top-frac must lie in (0, 1]");
  for (double t : opt.thresholds) {
    if (!(t > 0.0 && t < 1.0)) errors.push_back("thresholds must lie in (0, 1)");
  }
  try {
    cfg.al.strategy = select::parse_strategy(opt.strategy);
  } catch (const std::exception& e) {
    errors.emplace_back(e.what());
  }
  if (!errors.empty()) {
    print_errors(err, "invalid diagnose configuration:", errors);
    return kExitUsage;
  }

  const auto d = config::make_datasets(cfg.data);
  const auto params = io::load_model(opt.model);
  const auto pool = io::pool_from_json(read_json(opt.pool));
  require(params.shape().input_dim == d.train.input_dim() && params.shape().classes == static_cast<std::size_t>(d.train.classes()),
          "model snapshot does not match the dataset shape");
  data::check_pool(pool, d.train);
  require(!pool.unlabeled.empty(), "pool snapshot has no unlabeled samples to rank");

  const std::size_t k = std::min(cfg.al.k, pool.unlabeled.size());
  const auto table = al::score_pool(params, d.train, pool, cfg.al, k, pool.cycle);
  const auto batch = select::select_topk(table, k);

  fs::create_directories(opt.out);
  {
    std::ofstream f(opt.out / "overconfident.csv", std::ios::binary);
    f << "threshold,count\n";
    for (const auto& tc : diag::overconfident_miscount(params, d.train, table, opt.top_frac, opt.thresholds)) {
      f << io::format_double(tc.threshold) << ',' << tc.count << '\n';
    }
  }
  {
    std::ofstream f(opt.out / "group_entropy.csv", std::ios::binary);
    f << "group,size,mean_entropy\n";
    for (const auto& g : diag::rank_group_entropy(params, d.train, table, opt.groups)) {
      f << g.group << ',' << g.size << ',' << io::format_double(g.mean_entropy) << '\n';
    }
  }
  const std::size_t top = diag::top_count(table.size(), opt.top_frac);
  std::optional<double> diversity;
  if (top >= 2) diversity = diag::top_frac_diversity(params, d.train, table, opt.top_frac);
  {
    std::ofstream f(opt.out / "diversity.csv", std::ios::binary);
    f << "top_frac,top_count,mean_pairwise_distance\n";
    f << io::format_double(opt.top_frac) << ',' << top << ','
      << (diversity ? io::format_double(*diversity) : std::string("nan")) << '\n';
  }
  const auto cd = diag::class_dist_vs_error(params, d.test, batch, d.train);
  {
    std::ofstream f(opt.out / "class_dist.csv", std::ios::binary);
    f << "class,selected_fraction,test_error\n";
    for (std::size_t c = 0; c < cd.class_hist.size(); ++c) {
      f << c << ',' << io::format_double(cd.class_hist[c]) << ',' << io::format_double(cd.class_error[c])
        << '\n';
    }
  }
  std::vector<int> flags(d.train.size(), 0);
  for (auto i : batch) flags[i] = 1;
  const auto pca = diag::pca_project(select::embed(params, d.train), params.shape().hidden_dim, flags);
  {
    std::ofstream f(opt.out / "pca.csv", std::ios::binary);
    f << "x,y,true_class,selected\n";
    for (std::size_t i = 0; i < d.train.size(); ++i) {
      f << io::format_double(pca.coords[2 * i]) << ',' << io::format_double(pca.coords[2 * i + 1]) << ','
        << d.train.true_labels()[i] << ',' << flags[i] << '\n';
    }
  }

  double lo = table.scores.front(), hi = lo, sum = 0.0;
  for (double s : table.scores) {
    lo = std::min(lo, s);
    hi = std::max(hi, s);
    sum += s;
  }
  json index{{"version", kVersion},
             {"strategy", opt.strategy},
             {"model", opt.model.string()},
             {"pool", opt.pool.string()},
             {"cycle", pool.cycle},
             {"top_frac", opt.top_frac},
             {"batch", batch},
             {"scores", {{"count", table.size()}, {"min", lo}, {"max", hi},
                         {"mean", sum / static_cast<double>(table.size())}}},
             {"top_frac_diversity", diversity ? json(*diversity) : json(nullptr)},
             {"class_rank_correlation", cd.rank_correlation ? json(*cd.rank_correlation) : json(nullptr)},
             {"pca_variance", {pca.variance[0], pca.variance[1]}},
             {"pca_rank_deficient", pca.rank_deficient},
             {"files", {"overconfident.csv", "group_entropy.csv", "diversity.csv", "class_dist.csv", "pca.csv"}}};
  write_json(opt.out / "diagnostics.json", index);
  out << "wrote diagnostics for " << opt.strategy << " to " << opt.out.string() << "\n";
  return kExitOk;
}

int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& err) {
  oracle::SuiteOptions so;
  so.seed = opt.seed;
  so.corrupt_gradient = opt.corrupt_gradient;
  const auto results = oracle::run_suite(so);
  out << std::left << std::setw(38) << "check" << std::setw(12) << "instances" << std::setw(16)
      << "max_error" << "status\n";
  bool ok = true;
  for (const auto& r : results) {
    out << std::setw(38) << r.name << std::setw(12) << r.instances << std::setw(16)
        << std::setprecision(6) << r.max_error << (r.passed ? "PASS" : "FAIL") << "\n";
    ok = ok && r.passed;
  }
  if (!ok) {
    for (const auto& r : results) {
      if (!r.passed) err << "failing instance for " << r.name << ":\n" << r.failing_instance.dump(2) << "\n";
    }
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace alforge::cli
