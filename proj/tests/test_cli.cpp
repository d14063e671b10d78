#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "gspn/inference.hpp"
#include "gspn_cli/commands.hpp"
#include "gspn_cli/dataset.hpp"
#include "gspn_cli/toy.hpp"
#include "oracles.hpp"

using namespace gspn;
using namespace gspn::cli;

namespace {

const std::filesystem::path kData = GSPN_TEST_DATA;

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "gspn_test_cli";
  std::filesystem::create_directories(dir);
  return dir / name;
}

Dataset csv(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in, "mem.csv");
}

Dataset toy_dataset(std::size_t n, std::uint64_t seed) {
  Dataset d;
  d.rows = generate_toy(n, seed);
  d.names = {"x1", "x2", "x3"};
  return d;
}

LearnerConfig toy_config() {
  LearnerConfig cfg;
  cfg.max_leaf_vars = 1;
  cfg.component_mean = ComponentMean::kParent;
  return cfg;
}

double mean_toy_density(const Eigen::MatrixXd& rows) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const Eigen::RowVector3d r = rows.row(i);
    total += toy_log_density(std::span<const double>(r.data(), 3));
  }
  return total / static_cast<double>(rows.rows());
}

}  // namespace

TEST(Csv, HeaderIsDetected) {
  const auto d = csv("a,b\n1,2\n3.5,-4e2\n");
  EXPECT_EQ(d.names, (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.rows(1, 1), -400.0);
}

TEST(Csv, HeaderlessAndBlankLines) {
  const auto d = csv("1,2\n\n3,4\n");
  EXPECT_TRUE(d.names.empty());
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d.rows(1, 0), 3.0);
}

TEST(Csv, RaggedRowNamesItsLine) {
  try {
    read_csv(kData / "ragged.csv");
    FAIL();
  } catch (const CsvError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("ragged.csv:3: expected 2 columns, found 1"), std::string::npos);
  }
}

TEST(Csv, NonNumberAfterHeader) {
  try {
    csv("a,b\n1,2\n1,zz\n");
    FAIL();
  } catch (const CsvError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("column 2 is not a number"), std::string::npos);
  }
  EXPECT_THROW(csv("1,nan\n"), CsvError);
  EXPECT_THROW(csv("1,inf\n"), CsvError);
}

TEST(Csv, MissingFile) { EXPECT_THROW(read_csv("/nonexistent/file.csv"), CsvError); }

TEST(Csv, WriteReadRoundTripIsExact) {
  const auto rows = generate_toy(50, 3);
  std::ostringstream out;
  write_csv(out, rows);
  const auto back = csv(out.str());
  EXPECT_EQ(back.names, (std::vector<std::string>{"x0", "x1", "x2"}));
  EXPECT_EQ(back.rows, rows);
}

TEST(Toy, MomentsOfGenerator) {
  const auto rows = generate_toy(100000, 11);
  EXPECT_NEAR(rows.col(0).mean(), 16.0, 0.15);
  EXPECT_NEAR(rows.col(1).mean(), 17.0, 0.15);
  EXPECT_NEAR(rows.col(2).mean(), 3.0, 0.05);
  const auto m = oracle::batch_moments(rows);
  EXPECT_NEAR(m.cov(0, 1) / std::sqrt(m.cov(0, 0) * m.cov(1, 1)), 125.0 / std::sqrt(126.0 * 127.0), 0.002);
  EXPECT_NEAR(m.cov(2, 2), 3.0, 0.05);
}

TEST(Toy, DensityAtACentre) {
  const double row[] = {1.0, 2.0, 3.0};
  const double near = -std::log(4.0) - 0.5 * std::log(2 * M_PI) - 0.5 * std::log(2 * M_PI * 2) -
                      0.5 * std::log(2 * M_PI * 3);
  EXPECT_NEAR(toy_log_density(row), near, 1e-9);
}

TEST(Toy, SeedDeterminesStream) {
  EXPECT_EQ(generate_toy(20, 5), generate_toy(20, 5));
  EXPECT_NE(generate_toy(20, 5), generate_toy(20, 6));
}

TEST(Eval, SingleLeafFixture) {
  std::ostringstream out;
  const auto ll = cmd_eval(kData / "single_leaf.spn", kData / "zero.csv", out);
  EXPECT_NEAR(ll.mean, -0.9189385, 1e-4);
  EXPECT_EQ(ll.rows, 1u);
  EXPECT_NE(out.str().find("avg log-likelihood: -0.91898"), std::string::npos) << out.str();
}

TEST(Eval, WidthMismatchIsRejected) {
  const auto path = scratch("wide.csv");
  write_csv(path, Eigen::MatrixXd::Zero(2, 3));
  std::ostringstream out;
  EXPECT_THROW(cmd_eval(kData / "single_leaf.spn", path, out), std::exception);
}

TEST(Eval, TrainingStreamNearTrueDensity) {
  const auto data = toy_dataset(10000, 21);
  const auto model = train_model(data, toy_config());
  const auto ll = average_log_likelihood(model.pool, data.rows);
  EXPECT_NEAR(ll.mean, mean_toy_density(data.rows), 0.15);
  EXPECT_GT(ll.std_error, 0.0);
  EXPECT_EQ(average_log_likelihood(model.pool, data.rows).mean, ll.mean);
}

TEST(Train, ThresholdOneKeepsInitialStructure) {
  auto cfg = toy_config();
  cfg.correlation_threshold = 1.0;
  TrainSummary s;
  const auto model = train_model(toy_dataset(2000, 1), cfg, &s);
  EXPECT_EQ(s.nodes, 4u);
  EXPECT_EQ(s.rows, 2000u);
  EXPECT_EQ(summarize(model.pool).products, 1u);
}

TEST(Train, DeterministicForSeed) {
  const auto data = toy_dataset(1500, 2);
  const auto a = train_model(data, toy_config());
  const auto b = train_model(data, toy_config());
  EXPECT_EQ(to_text(a.pool, a.config), to_text(b.pool, b.config));
}

TEST(Train, EarlyStopFreezesStructure) {
  const auto data = toy_dataset(2000, 3);
  auto cfg = toy_config();
  cfg.early_stop_fraction = 0.1;
  const auto stopped = train_model(data, cfg);

  Dataset head;
  head.rows = data.rows.topRows(200);
  const auto early = train_model(head, toy_config());
  EXPECT_EQ(stopped.pool.ids(), early.pool.ids());
}

TEST(Train, WritesLoadableModelAndReport) {
  const auto data_path = scratch("train.csv");
  const auto model_path = scratch("train.spn");
  write_csv(data_path, generate_toy(500, 4), std::vector<std::string>{"a", "b", "c"});
  std::ostringstream log;
  cmd_train(data_path, model_path, toy_config(), log);
  const auto model = load(model_path);
  EXPECT_EQ(model.variable_names, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_NE(log.str().find("rows: 500"), std::string::npos) << log.str();
}

TEST(CrossValidation, FoldsAndDeterminism) {
  const auto rows = generate_toy(600, 5);
  const auto a = cross_validate(rows, 3, toy_config(), 9);
  const auto b = cross_validate(rows, 3, toy_config(), 9);
  ASSERT_EQ(a.fold_log_likelihood.size(), 3u);
  EXPECT_EQ(a.fold_log_likelihood, b.fold_log_likelihood);
  EXPECT_EQ(a.fold_nodes, b.fold_nodes);
  double mean = 0.0;
  for (double v : a.fold_log_likelihood) mean += v / 3.0;
  EXPECT_NEAR(a.mean, mean, 1e-12);
  EXPECT_GE(a.std_error, 0.0);
}

TEST(CrossValidation, DifferentSplitSeedChangesFolds) {
  const auto rows = generate_toy(600, 5);
  EXPECT_NE(cross_validate(rows, 2, toy_config(), 1).fold_log_likelihood,
            cross_validate(rows, 2, toy_config(), 2).fold_log_likelihood);
}

TEST(CrossValidation, RejectsBadFoldCounts) {
  const auto rows = generate_toy(5, 1);
  EXPECT_THROW(cross_validate(rows, 1, toy_config(), 0), std::invalid_argument);
  EXPECT_THROW(cross_validate(rows, 6, toy_config(), 0), std::invalid_argument);
}

TEST(CrossValidation, ToyTenFold) {
  const auto rows = generate_toy(10000, 12);
  const auto r = cross_validate(rows, 10, toy_config(), 0);
  EXPECT_NEAR(r.mean, mean_toy_density(rows), 0.2);
  std::ostringstream out;
  print_report(out, r);
  EXPECT_NE(out.str().find("fold 10"), std::string::npos);
  EXPECT_NE(out.str().find("mean test log-likelihood"), std::string::npos);
}

TEST(Sample, ZeroRowsIsHeaderOnly) {
  const auto path = scratch("sample0.spn");
  save(init_factored_model(2), {}, path);
  std::ostringstream out;
  cmd_sample(path, 0, 1, out);
  EXPECT_EQ(out.str(), "x0,x1\n");
}

TEST(Sample, DeterministicAndNamed) {
  const auto path = scratch("sample.spn");
  const std::vector<std::string> names{"u", "v", "w"};
  save(train_model(toy_dataset(800, 6), toy_config()).pool, {}, path, names);
  std::ostringstream a;
  std::ostringstream b;
  cmd_sample(path, 30, 4, a);
  cmd_sample(path, 30, 4, b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().rfind("u,v,w\n", 0), 0u);
  EXPECT_EQ(csv(a.str()).size(), 30u);
}

TEST(Sample, MeansMatchModel) {
  const auto model = train_model(toy_dataset(3000, 7), toy_config());
  const auto rows = sample_rows(model.pool, 40000, 3);
  const auto want = oracle::mixture_mean(oracle::expand(model.pool), 3);
  const auto got = oracle::batch_moments(rows);
  for (int j = 0; j < 3; ++j) {
    const double se = std::sqrt(got.cov(j, j) / static_cast<double>(rows.rows()));
    EXPECT_NEAR(got.mean(j), want(j), 4.0 * se) << j;
  }
}

TEST(Sample, RetrainingOnSamplesRecoversDensity) {
  const auto model = train_model(toy_dataset(5000, 8), toy_config());
  Dataset samples;
  samples.rows = sample_rows(model.pool, 20000, 5);
  const auto again = train_model(samples, toy_config());
  const auto test = generate_toy(5000, 99);
  EXPECT_NEAR(average_log_likelihood(again.pool, test).mean, average_log_likelihood(model.pool, test).mean, 0.3);
}

TEST(GenToy, WritesHeaderAndRows) {
  std::ostringstream out;
  cmd_gen_toy(25, 3, out);
  const auto d = csv(out.str());
  EXPECT_EQ(d.names, (std::vector<std::string>{"x1", "x2", "x3"}));
  EXPECT_EQ(d.rows, generate_toy(25, 3));
  std::ostringstream none;
  EXPECT_THROW(cmd_gen_toy(0, 3, none), std::invalid_argument);
}

TEST(Inspect, InitialModel) {
  const auto path = scratch("inspect.spn");
  save(init_factored_model(3), {}, path);
  std::ostringstream out;
  const auto dot = scratch("inspect.dot");
  cmd_inspect(path, dot, out);
  EXPECT_NE(out.str().find("4 nodes: 0 sums, 1 product, 3 leaves, depth 2"), std::string::npos) << out.str();
  EXPECT_NE(out.str().find("leaf scope sizes: 1x3"), std::string::npos);
  std::ifstream in(dot);
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first, "digraph spn {");
}

TEST(Inspect, MoreDataMoreComponents) {
  const auto rows = generate_toy(500, 0);
  Dataset small;
  small.rows = rows.topRows(200);
  Dataset large;
  large.rows = rows;
  auto cfg = toy_config();
  cfg.component_mean = ComponentMean::kZero;
  const auto a = summarize(train_model(small, cfg).pool);
  const auto b = summarize(train_model(large, cfg).pool);
  EXPECT_GT(b.leaves, a.leaves);
  EXPECT_GE(b.depth, 2u);
}
