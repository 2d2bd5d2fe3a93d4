#include "alforge/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "alforge/error.hpp"

namespace alforge::io {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_dataset_csv(std::ostream& os, const data::Dataset& ds) {
  for (std::size_t d = 0; d < ds.input_dim(); ++d) os << 'f' << d << ',';
  os << "label\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.row(i)) os << format_double(v) << ',';
    os << ds.true_labels()[i] << '\n';
  }
}

void save_dataset_csv(const std::filesystem::path& path, const data::Dataset& ds) {
  std::ostringstream os;
  write_dataset_csv(os, ds);
  write_text(path, os.str());
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw IoError(path.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

data::Dataset load_dataset_csv(const std::filesystem::path& path, data::Split split, int classes) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_commas(line);
  if (header.size() < 2 || header.back() != "label") {
    throw IoError(path.string() + ": header must be f0,...,fD,label");
  }
  const std::size_t dim = header.size() - 1;
  std::vector<double> x;
  std::vector<int> y;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != dim + 1) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                    std::to_string(dim + 1) + " columns");
    }
    for (std::size_t d = 0; d < dim; ++d) x.push_back(parse_double(cells[d], path, lineno));
    int label = 0;
    const auto& lc = cells.back();
    const auto res = std::from_chars(lc.data(), lc.data() + lc.size(), label);
    if (res.ec != std::errc() || res.ptr != lc.data() + lc.size() || label < 0) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": bad label '" + lc + "'");
    }
    y.push_back(label);
  }
  if (classes == 0) {
    for (int v : y) classes = std::max(classes, v + 1);
  }
  return data::Dataset(path.stem().string(), split, dim, classes, std::move(x), std::move(y));
}

nlohmann::json pool_to_json(const data::PoolState& pool) {
  nlohmann::json j;
  j["cycle"] = pool.cycle;
  j["labeled"] = nlohmann::json::array();
  for (const auto& [idx, label] : pool.labeled) j["labeled"].push_back({{"idx", idx}, {"label", label}});
  j["unlabeled"] = pool.unlabeled;
  return j;
}

data::PoolState pool_from_json(const nlohmann::json& j) {
  try {
    data::PoolState pool;
    pool.cycle = j.at("cycle").get<int>();
    for (const auto& e : j.at("labeled")) {
      pool.labeled.emplace(e.at("idx").get<std::size_t>(), e.at("label").get<int>());
    }
    pool.unlabeled = j.at("unlabeled").get<std::vector<std::size_t>>();
    return pool;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed pool snapshot: ") + e.what());
  }
}

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& os, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw IoError("truncated model snapshot");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw IoError("truncated model snapshot");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

}  // namespace

void write_model(std::ostream& os, const nn::ModelParams& params) {
  os.write("ALFG", 4);
  put_u32(os, kSnapshotVersion);
  put_u32(os, static_cast<std::uint32_t>(params.shape().input_dim));
  put_u32(os, static_cast<std::uint32_t>(params.shape().hidden_dim));
  put_u32(os, static_cast<std::uint32_t>(params.shape().classes));
  put_u32(os, static_cast<std::uint32_t>(params.activation()));
  for (double v : params.values()) put_f64(os, v);
}

nn::ModelParams read_model(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "ALFG", 4) != 0) {
    throw IoError("not a model snapshot (bad magic)");
  }
  const auto version = get_u32(is);
  if (version != kSnapshotVersion) {
    throw IoError("unsupported model snapshot version " + std::to_string(version));
  }
  nn::Shape shape;
  shape.input_dim = get_u32(is);
  shape.hidden_dim = get_u32(is);
  shape.classes = get_u32(is);
  const auto act = get_u32(is);
  if (act > 1) throw IoError("unknown activation code in model snapshot");
  if (shape.input_dim == 0 || shape.hidden_dim == 0 || shape.classes == 0) {
    throw IoError("model snapshot has a zero dimension");
  }
  nn::ModelParams p(shape, static_cast<nn::Activation>(act));
  for (double& v : p.values()) v = get_f64(is);
  return p;
}

void save_model(const std::filesystem::path& path, const nn::ModelParams& params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  write_model(os, params);
}

nn::ModelParams load_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open model snapshot " + path.string());
  return read_model(is);
}

void write_score_table_csv(std::ostream& os, const select::ScoreTable& table) {
  const auto r = select::ranks(table);
  os << "idx,score,rank\n";
  for (std::size_t i = 0; i < table.size(); ++i) {
    os << table.indices[i] << ',' << format_double(table.scores[i]) << ',' << r[i] << '\n';
  }
}

void write_records_header(std::ostream& os) {
  os << "trial,cycle,labeled,acc,target_loss,measure_H,ms\n";
}

void write_records(std::ostream& os, int trial, const std::vector<al::CycleRecord>& records) {
  for (const auto& r : records) {
    os << trial << ',' << r.cycle << ',' << r.labeled_count << ',' << format_double(r.test_accuracy)
       << ',' << format_double(r.target_loss) << ',' << format_double(r.measure_h) << ','
       << format_double(r.wallclock_ms) << '\n';
  }
}

nlohmann::json curves_to_json(const std::vector<al::CycleStats>& curves) {
  auto arr = nlohmann::json::array();
  for (const auto& c : curves) {
    arr.push_back({{"cycle", c.cycle},
                   {"trials", c.trials},
                   {"labeled_mean", c.labeled_mean},
                   {"acc_mean", c.acc_mean},
                   {"acc_std", c.acc_std},
                   {"target_loss_mean", c.target_loss_mean},
                   {"target_loss_std", c.target_loss_std},
                   {"measure_H_mean", c.measure_h_mean},
                   {"measure_H_std", c.measure_h_std}});
  }
  return arr;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  os << text;
  if (!os) throw IoError("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace alforge::io
