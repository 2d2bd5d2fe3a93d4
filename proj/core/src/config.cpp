#include "alforge/config.hpp"

#include <charconv>
#include <functional>
#include <sstream>

#include "alforge/error.hpp"
#include "alforge/io.hpp"

namespace alforge::config {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool parse_bool(const std::string& s, bool& out) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") {
    out = true;
    return true;
  }
  if (s == "false" || s == "0" || s == "no" || s == "off") {
    out = false;
    return true;
  }
  return false;
}

std::string fmt(double v) { return io::format_double(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

struct Field {
  std::function<bool(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T, typename Access>
Field number_field(Access access) {
  return {[access](RunConfig& c, const std::string& v) { return parse_number<T>(v, access(c)); },
          [access](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              return fmt(access(c));
            } else {
              return std::to_string(access(c));
            }
          }};
}

template <typename Access>
Field bool_field(Access access) {
  return {[access](RunConfig& c, const std::string& v) { return parse_bool(v, access(c)); },
          [access](const RunConfig& c) { return fmt(access(c)); }};
}

template <typename Access>
Field string_field(Access access) {
  return {[access](RunConfig& c, const std::string& v) {
            access(c) = v;
            return true;
          },
          [access](const RunConfig& c) { return access(c); }};
}

template <typename Parse, typename Show>
Field enum_field(Parse parse, Show show) {
  return {[parse](RunConfig& c, const std::string& v) {
            try {
              parse(c, v);
              return true;
            } catch (const ContractError&) {
              return false;
            }
          },
          show};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> f = {
      {"dataset", string_field([](auto& c) -> auto& { return c.data.kind; })},
      {"n_train", number_field<std::size_t>([](auto& c) -> auto& { return c.data.n_train; })},
      {"n_test", number_field<std::size_t>([](auto& c) -> auto& { return c.data.n_test; })},
      {"noise", number_field<double>([](auto& c) -> auto& { return c.data.noise; })},
      {"classes", number_field<int>([](auto& c) -> auto& { return c.data.classes; })},
      {"spread", number_field<double>([](auto& c) -> auto& { return c.data.spread; })},
      {"centers_seed", number_field<std::uint64_t>([](auto& c) -> auto& { return c.data.centers_seed; })},
      {"grid_dim", number_field<std::size_t>([](auto& c) -> auto& { return c.data.grid_dim; })},
      {"data_seed", number_field<std::uint64_t>([](auto& c) -> auto& { return c.data.seed; })},
      {"train_csv", string_field([](auto& c) -> auto& { return c.data.train_csv; })},
      {"test_csv", string_field([](auto& c) -> auto& { return c.data.test_csv; })},
      {"k0", number_field<std::size_t>([](auto& c) -> auto& { return c.al.k0; })},
      {"k", number_field<std::size_t>([](auto& c) -> auto& { return c.al.k; })},
      {"doubling", bool_field([](auto& c) -> auto& { return c.al.doubling; })},
      {"doubling_threshold", number_field<std::size_t>([](auto& c) -> auto& { return c.al.doubling_threshold; })},
      {"cycles", number_field<int>([](auto& c) -> auto& { return c.al.cycles; })},
      {"balanced_start", bool_field([](auto& c) -> auto& { return c.al.balanced_start; })},
      {"hidden_dim", number_field<std::size_t>([](auto& c) -> auto& { return c.al.hidden_dim; })},
      {"activation", enum_field([](RunConfig& c, const std::string& v) { c.al.activation = nn::parse_activation(v); },
                                [](const RunConfig& c) { return std::string(nn::to_string(c.al.activation)); })},
      {"init_scale", number_field<double>([](auto& c) -> auto& { return c.al.init_scale; })},
      {"epochs", number_field<int>([](auto& c) -> auto& { return c.al.epochs_per_cycle; })},
      {"lr", number_field<double>([](auto& c) -> auto& { return c.al.lr; })},
      {"momentum", number_field<double>([](auto& c) -> auto& { return c.al.momentum; })},
      {"batch_size", number_field<std::size_t>([](auto& c) -> auto& { return c.al.batch_size; })},
      {"unlabeled_batch", number_field<std::size_t>([](auto& c) -> auto& { return c.al.unlabeled_batch; })},
      {"warm_start", bool_field([](auto& c) -> auto& { return c.al.warm_start; })},
      {"distance", enum_field([](RunConfig& c, const std::string& v) { c.al.loss.distance = nn::parse_distance(v); },
                              [](const RunConfig& c) { return std::string(nn::to_string(c.al.loss.distance)); })},
      {"unsup_weight", number_field<double>([](auto& c) -> auto& { return c.al.loss.unsup_weight; })},
      {"n_train_augs", number_field<int>([](auto& c) -> auto& { return c.al.loss.n_train_augs; })},
      {"aug_kind", enum_field([](RunConfig& c, const std::string& v) { c.al.aug.kind = data::parse_augment_kind(v); },
                              [](const RunConfig& c) { return std::string(data::to_string(c.al.aug.kind)); })},
      {"aug_sigma", number_field<double>([](auto& c) -> auto& { return c.al.aug.sigma; })},
      {"aug_max_shift", number_field<int>([](auto& c) -> auto& { return c.al.aug.max_shift; })},
      {"aug_flip", bool_field([](auto& c) -> auto& { return c.al.aug.flip; })},
      {"n_eval_augs", number_field<int>([](auto& c) -> auto& { return c.al.aug.n_eval_augs; })},
      {"prior", enum_field(
                    [](RunConfig& c, const std::string& v) {
                      if (v == "uniform") c.al.prior = al::PriorKind::uniform;
                      else if (v == "start_set") c.al.prior = al::PriorKind::start_set;
                      else throw ContractError("unknown prior");
                    },
                    [](const RunConfig& c) {
                      return std::string(c.al.prior == al::PriorKind::uniform ? "uniform" : "start_set");
                    })},
      {"seed", number_field<std::uint64_t>([](auto& c) -> auto& { return c.al.seed; })},
      {"record_wallclock", bool_field([](auto& c) -> auto& { return c.al.record_wallclock; })},
      {"trials", number_field<int>([](auto& c) -> auto& { return c.trials; })},
      {"strategy", enum_field(
                       [](RunConfig& c, const std::string& v) {
                         std::vector<std::string> out;
                         if (v == "all") {
                           for (auto s : select::kAllStrategies) out.emplace_back(select::to_string(s));
                         } else {
                           std::istringstream ss(v);
                           std::string item;
                           while (std::getline(ss, item, ',')) {
                             out.emplace_back(select::to_string(select::parse_strategy(trim(item))));
                           }
                         }
                         if (out.empty()) throw ContractError("empty strategy list");
                         c.strategies = out;
                         c.al.strategy = select::parse_strategy(out.front());
                       },
                       [](const RunConfig& c) {
                         std::string s;
                         for (const auto& x : c.strategies) s += (s.empty() ? "" : ",") + x;
                         return s;
                       })},
  };
  return f;
}

}  // namespace

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ContractError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValues load_key_values(const std::filesystem::path& path) {
  return parse_key_values(io::read_text(path));
}

std::vector<std::string> apply(RunConfig& cfg, const KeyValues& kv) {
  std::vector<std::string> errors;
  const auto& f = fields();
  for (const auto& [key, value] : kv) {
    const auto it = f.find(key);
    if (it == f.end()) {
      errors.push_back("unknown config key '" + key + "'");
    } else if (!it->second.set(cfg, value)) {
      errors.push_back("invalid value '" + value + "' for '" + key + "'");
    }
  }
  return errors;
}

KeyValues to_key_values(const RunConfig& cfg) {
  KeyValues kv;
  for (const auto& [key, field] : fields()) kv[key] = field.get(cfg);
  return kv;
}

std::string to_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : to_key_values(cfg)) out += k + " = " + v + "\n";
  return out;
}

nlohmann::json to_json(const RunConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : to_key_values(cfg)) j[k] = v;
  return j;
}

data::DatasetPair make_datasets(const DataConfig& cfg) {
  if (cfg.kind == "two_moons") {
    return data::make_two_moons(cfg.n_train, cfg.n_test, cfg.noise, cfg.seed);
  }
  if (cfg.kind == "blobs") {
    return data::make_blobs(cfg.n_train, cfg.n_test, cfg.classes, cfg.centers_seed, cfg.spread, cfg.seed);
  }
  if (cfg.kind == "grid_patterns") {
    return data::make_grid_patterns(cfg.n_train, cfg.n_test, cfg.classes, cfg.grid_dim, cfg.noise, cfg.seed);
  }
  if (cfg.kind == "csv") {
    require(!cfg.train_csv.empty() && !cfg.test_csv.empty(), "csv dataset needs train_csv and test_csv");
    auto train = io::load_dataset_csv(cfg.train_csv, data::Split::train);
    auto test = io::load_dataset_csv(cfg.test_csv, data::Split::test, train.classes());
    return {std::move(train), std::move(test)};
  }
  throw ContractError("unknown dataset kind '" + cfg.kind + "'");
}

}  // namespace alforge::config
