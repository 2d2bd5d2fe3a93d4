#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "alforge/config.hpp"
#include "alforge/error.hpp"
#include "alforge/io.hpp"

using namespace alforge;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "alforge_unit";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(FormatDouble, SeventeenDigits) {
  EXPECT_EQ(io::format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(io::format_double(1.0), "1");
  EXPECT_EQ(io::format_double(-2.5), "-2.5");
  EXPECT_EQ(io::format_double(1e-20), "9.9999999999999995e-21");
  for (double v : {M_PI, 1.0 / 3.0, -7.123456789012345e10, 5e-324}) {
    EXPECT_EQ(std::strtod(io::format_double(v).c_str(), nullptr), v);
  }
}

TEST(DatasetCsv, RoundTripBitExact) {
  const auto d = data::make_two_moons(40, 10, 0.1, 2);
  const auto path = scratch("moons.csv");
  io::save_dataset_csv(path, d.train);
  const auto text = io::read_text(path);
  EXPECT_EQ(text.find('\r'), std::string::npos);
  EXPECT_EQ(text.substr(0, 12), "f0,f1,label\n");
  const auto back = io::load_dataset_csv(path, data::Split::train);
  EXPECT_EQ(back.input_dim(), 2u);
  EXPECT_EQ(back.classes(), 2);
  ASSERT_EQ(back.size(), d.train.size());
  for (std::size_t i = 0; i < back.features().size(); ++i) EXPECT_EQ(back.features()[i], d.train.features()[i]);
  for (std::size_t i = 0; i < back.size(); ++i) EXPECT_EQ(back.true_labels()[i], d.train.true_labels()[i]);
}

TEST(DatasetCsv, Errors) {
  const auto bad = scratch("bad.csv");
  io::write_text(bad, "f0,f1,label\n1.0,abc,0\n");
  EXPECT_THROW(io::load_dataset_csv(bad, data::Split::train), IoError);
  io::write_text(bad, "x,y\n1,0\n");
  EXPECT_THROW(io::load_dataset_csv(bad, data::Split::train), IoError);
  io::write_text(bad, "f0,f1,label\n1.0,0\n");
  EXPECT_THROW(io::load_dataset_csv(bad, data::Split::train), IoError);
  EXPECT_THROW(io::load_dataset_csv(scratch("absent.csv"), data::Split::train), IoError);
}

TEST(PoolJson, RoundTrip) {
  data::PoolState p;
  p.cycle = 3;
  p.labeled = {{4, 1}, {9, 0}};
  p.unlabeled = {0, 1, 2, 3, 5};
  const auto j = io::pool_to_json(p);
  EXPECT_EQ(j["labeled"][0]["idx"], 4);
  const auto q = io::pool_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(q.cycle, 3);
  EXPECT_EQ(q.labeled, p.labeled);
  EXPECT_EQ(q.unlabeled, p.unlabeled);
  EXPECT_THROW(io::pool_from_json(nlohmann::json{{"cycle", 1}}), IoError);
}

TEST(ModelSnapshot, RoundTripBitExact) {
  auto p = nn::init_params(3, nn::Shape{5, 7, 3}, 0.4, nn::Activation::tanh);
  p.b2()[0] = std::numeric_limits<double>::denorm_min();
  p.b2()[1] = -0.0;
  std::stringstream ss;
  io::write_model(ss, p);
  const auto bytes = ss.str();
  EXPECT_EQ(bytes.substr(0, 4), "ALFG");
  EXPECT_EQ(bytes.size(), 4 + 5 * 4 + p.shape().parameter_count() * 8);
  const auto q = io::read_model(ss);
  EXPECT_EQ(q.shape(), p.shape());
  EXPECT_EQ(q.activation(), nn::Activation::tanh);
  for (std::size_t i = 0; i < p.values().size(); ++i) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>(q.values()[i]), std::bit_cast<std::uint64_t>(p.values()[i]));
  }
}

TEST(ModelSnapshot, RejectsCorruptInput) {
  std::stringstream bad_magic("ALFX\x01\0\0\0");
  EXPECT_THROW(io::read_model(bad_magic), IoError);
  std::stringstream ss;
  io::write_model(ss, nn::init_params(1, nn::Shape{2, 3, 2}, 0.1));
  const auto full = ss.str();
  std::stringstream truncated(full.substr(0, full.size() - 3));
  EXPECT_THROW(io::read_model(truncated), IoError);
  auto wrong_version = full;
  wrong_version[4] = 9;
  std::stringstream wv(wrong_version);
  EXPECT_THROW(io::read_model(wv), IoError);
  EXPECT_THROW(io::load_model(scratch("absent.alfg")), IoError);
}

TEST(ModelSnapshot, FileRoundTrip) {
  const auto p = nn::init_params(8, nn::Shape{2, 16, 2}, 0.3);
  const auto path = scratch("m.alfg");
  io::save_model(path, p);
  EXPECT_EQ(io::load_model(path), p);
}

TEST(InitParams, MatchesGoldenFile) {
  const auto p = nn::init_params(7, nn::Shape{2, 16, 2}, 0.3);
  std::ifstream in(fs::path(ALFORGE_TEST_DATA_DIR) / "init_params_seed7_2x16x2.txt");
  ASSERT_TRUE(in) << "golden file missing";
  std::string line;
  std::size_t i = 0;
  while (std::getline(in, line)) {
    ASSERT_LT(i, p.values().size());
    EXPECT_EQ(io::format_double(p.values()[i]), line) << "parameter " << i;
    ++i;
  }
  EXPECT_EQ(i, p.values().size());
}

TEST(Records, CsvLayout) {
  al::CycleRecord r;
  r.cycle = 2;
  r.labeled_count = 30;
  r.test_accuracy = 0.875;
  r.target_loss = 0.1;
  r.measure_h = 0.5;
  std::ostringstream os;
  io::write_records_header(os);
  io::write_records(os, 1, {r});
  EXPECT_EQ(os.str(), "trial,cycle,labeled,acc,target_loss,measure_H,ms\n1,2,30,0.875,0.10000000000000001,0.5,0\n");
}

TEST(ScoreTableCsv, RanksFromOne) {
  select::ScoreTable t;
  t.indices = {5, 2, 9};
  t.scores = {0.1, 0.7, 0.1};
  std::ostringstream os;
  io::write_score_table_csv(os, t);
  EXPECT_EQ(os.str(), "idx,score,rank\n5,0.10000000000000001,2\n2,0.69999999999999996,1\n9,0.10000000000000001,3\n");
}

TEST(Config, ParseKeyValues) {
  const auto kv = config::parse_key_values("# run\nk0 = 10\n\n  k=5   # batch\nstrategy = entropy\n");
  EXPECT_EQ(kv.size(), 3u);
  EXPECT_EQ(kv.at("k0"), "10");
  EXPECT_EQ(kv.at("k"), "5");
  EXPECT_THROW(config::parse_key_values("just words\n"), ContractError);
}

TEST(Config, ApplyAndRoundTrip) {
  config::RunConfig c;
  const auto errs = config::apply(c, {{"k0", "12"}, {"lr", "0.01"}, {"doubling", "yes"},
                                      {"strategy", "entropy,kcenter"}, {"distance", "kl"}});
  EXPECT_TRUE(errs.empty()) << errs.front();
  EXPECT_EQ(c.al.k0, 12u);
  EXPECT_EQ(c.al.lr, 0.01);
  EXPECT_TRUE(c.al.doubling);
  EXPECT_EQ(c.al.strategy, select::Strategy::entropy);
  EXPECT_EQ(c.strategies, (std::vector<std::string>{"entropy", "kcenter"}));
  EXPECT_EQ(c.al.loss.distance, nn::Distance::kl_divergence);
  config::RunConfig d;
  EXPECT_TRUE(config::apply(d, config::to_key_values(c)).empty());
  EXPECT_EQ(config::to_text(d), config::to_text(c));
}

TEST(Config, AllErrorsCollected) {
  config::RunConfig c;
  const auto errs = config::apply(c, {{"bogus", "1"}, {"k0", "ten"}, {"activation", "sigmoid"}, {"k", "-1"}});
  ASSERT_EQ(errs.size(), 4u);
  std::string all;
  for (const auto& e : errs) all += e + "\n";
  EXPECT_NE(all.find("bogus"), std::string::npos);
  EXPECT_NE(all.find("k0"), std::string::npos);
  EXPECT_NE(all.find("activation"), std::string::npos);
}

TEST(Config, MakeDatasets) {
  config::DataConfig dc;
  dc.kind = "blobs";
  dc.n_train = 30;
  dc.n_test = 9;
  dc.classes = 3;
  const auto d = config::make_datasets(dc);
  EXPECT_EQ(d.train.size(), 30u);
  EXPECT_EQ(d.test.classes(), 3);
  dc.kind = "spirals";
  EXPECT_THROW(config::make_datasets(dc), ContractError);
  dc.kind = "csv";
  EXPECT_THROW(config::make_datasets(dc), ContractError);
}
