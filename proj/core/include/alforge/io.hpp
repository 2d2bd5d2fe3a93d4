#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "alforge/al_loop.hpp"
#include "alforge/dataset.hpp"
#include "alforge/nn.hpp"
#include "alforge/pool.hpp"
#include "alforge/selection.hpp"

namespace alforge::io {

/// 17 significant digits, '.' decimal separator, locale independent.
std::string format_double(double v);

// Dataset CSV: header `f0,...,fD,label`, one sample per row, integer labels.
void write_dataset_csv(std::ostream& os, const data::Dataset& ds);
void save_dataset_csv(const std::filesystem::path& path, const data::Dataset& ds);
/// Reads a dataset CSV. When `classes` is 0, J = max label + 1.
data::Dataset load_dataset_csv(const std::filesystem::path& path, data::Split split,
                               int classes = 0);

// Pool snapshot JSON: {cycle, labeled:[{idx,label}], unlabeled:[idx]}.
nlohmann::json pool_to_json(const data::PoolState& pool);
data::PoolState pool_from_json(const nlohmann::json& j);

// Model snapshot: "ALFG", u32 version, u32 input_dim, u32 hidden_dim,
// u32 classes, u32 activation, then W1, b1, W2, b2 as little-endian f64.
inline constexpr std::uint32_t kSnapshotVersion = 1;
void write_model(std::ostream& os, const nn::ModelParams& params);
nn::ModelParams read_model(std::istream& is);
void save_model(const std::filesystem::path& path, const nn::ModelParams& params);
nn::ModelParams load_model(const std::filesystem::path& path);

/// `idx,score,rank` in pool order; rank 1 is the top-ranked sample.
void write_score_table_csv(std::ostream& os, const select::ScoreTable& table);

/// `trial,cycle,labeled,acc,target_loss,measure_H,ms`.
void write_records_header(std::ostream& os);
void write_records(std::ostream& os, int trial, const std::vector<al::CycleRecord>& records);

nlohmann::json curves_to_json(const std::vector<al::CycleStats>& curves);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace alforge::io
