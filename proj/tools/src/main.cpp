#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gspn_cli/commands.hpp"

namespace {

void add_learner_flags(CLI::App& cmd, gspn::LearnerConfig& cfg) {
  static const std::map<std::string, gspn::WeightMode> kModes{{"laplace", gspn::WeightMode::kLaplace},
                                                               {"mle", gspn::WeightMode::kMle}};
  static const std::map<std::string, gspn::ComponentMean> kMeans{{"zero", gspn::ComponentMean::kZero},
                                                                  {"parent", gspn::ComponentMean::kParent}};
  cmd.add_option("--batch-size", cfg.batch_size, "Rows per update")->capture_default_str()->check(CLI::PositiveNumber);
  cmd.add_option("--correlation-threshold", cfg.correlation_threshold, "Correlation that triggers a merge")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--max-leaf-vars", cfg.max_leaf_vars, "Joint scopes below this size become multivariate leaves")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd.add_option_function<std::string>(
         "--weight-mode", [&cfg](const std::string& v) { cfg.weight_mode = kModes.at(v); }, "laplace or mle")
      ->check(CLI::IsMember({"laplace", "mle"}))
      ->default_str("laplace");
  cmd.add_option("--early-stop-fraction", cfg.early_stop_fraction, "Freeze structure after this fraction of rows")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--variance-floor", cfg.variance_floor, "Added to leaf variances")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd.add_option("--correlation-confidence", cfg.correlation_confidence,
                 "z-score of the correlation lower bound (0 uses the raw coefficient)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cmd.add_option("--reexamine-growth", cfg.reexamine_growth,
                 "Growth of a product's row count between structure checks (1 checks every batch)")
      ->capture_default_str()
      ->check(CLI::Range(1.0, 1e300));
  cmd.add_option_function<std::string>(
         "--component-mean", [&cfg](const std::string& v) { cfg.component_mean = kMeans.at(v); },
         "Centre of new mixture components: zero or parent")
      ->check(CLI::IsMember({"zero", "parent"}))
      ->default_str("zero");
  cmd.add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
}

template <typename F>
void with_output(const std::optional<std::string>& path, F&& write) {
  if (!path) {
    write(std::cout);
    return;
  }
  std::ofstream out(*path);
  if (!out) throw std::runtime_error("cannot write " + *path);
  write(out);
  if (!out) throw std::runtime_error("error while writing " + *path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online structure learning for Gaussian sum-product networks"};
  app.require_subcommand(1);

  gspn::LearnerConfig train_cfg;
  std::string train_data;
  std::string train_out = "model.spn";
  auto* train = app.add_subcommand("train", "Learn a model from a CSV file in one pass");
  train->add_option("data", train_data, "Training CSV")->required()->check(CLI::ExistingFile);
  train->add_option("-o,--out", train_out, "Model file to write")->capture_default_str();
  add_learner_flags(*train, train_cfg);

  std::string eval_model;
  std::string eval_data;
  auto* eval = app.add_subcommand("eval", "Average log-likelihood of a CSV file under a model");
  eval->add_option("model", eval_model, "Model file")->required()->check(CLI::ExistingFile);
  eval->add_option("data", eval_data, "CSV file")->required()->check(CLI::ExistingFile);

  gspn::LearnerConfig cv_cfg;
  std::string cv_data;
  std::size_t folds = 10;
  auto* cv = app.add_subcommand("cv", "k-fold cross validation");
  cv->add_option("data", cv_data, "CSV file")->required()->check(CLI::ExistingFile);
  cv->add_option("-k,--folds", folds, "Number of folds")->capture_default_str()->check(CLI::Range(2, 1 << 30));
  add_learner_flags(*cv, cv_cfg);

  std::string sample_model;
  std::size_t sample_n = 1000;
  std::uint64_t sample_seed = 0;
  std::optional<std::string> sample_out;
  auto* samp = app.add_subcommand("sample", "Draw samples from a model as CSV");
  samp->add_option("model", sample_model, "Model file")->required()->check(CLI::ExistingFile);
  samp->add_option("-n,--count", sample_n, "Number of samples")->capture_default_str();
  samp->add_option("--seed", sample_seed, "Random seed")->capture_default_str();
  samp->add_option("-o,--out", sample_out, "Output CSV (default: stdout)");

  std::size_t toy_n = 1000;
  std::uint64_t toy_seed = 0;
  std::optional<std::string> toy_out;
  auto* toy = app.add_subcommand("gen-toy", "Generate the three-variable toy dataset");
  toy->add_option("-n,--count", toy_n, "Number of rows")->capture_default_str()->check(CLI::PositiveNumber);
  toy->add_option("--seed", toy_seed, "Random seed")->capture_default_str();
  toy->add_option("-o,--out", toy_out, "Output CSV (default: stdout)");

  std::string inspect_model;
  std::optional<std::string> dot_out;
  auto* inspect = app.add_subcommand("inspect", "Summarize a model's structure");
  inspect->add_option("model", inspect_model, "Model file")->required()->check(CLI::ExistingFile);
  inspect->add_option("--dot", dot_out, "Also write a Graphviz rendering to this path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      train_cfg.check();
      gspn::cli::cmd_train(train_data, train_out, train_cfg, std::cout);
    } else if (eval->parsed()) {
      gspn::cli::cmd_eval(eval_model, eval_data, std::cout);
    } else if (cv->parsed()) {
      cv_cfg.check();
      gspn::cli::cmd_cv(cv_data, folds, cv_cfg, std::cout);
    } else if (samp->parsed()) {
      with_output(sample_out, [&](std::ostream& out) { gspn::cli::cmd_sample(sample_model, sample_n, sample_seed, out); });
    } else if (toy->parsed()) {
      with_output(toy_out, [&](std::ostream& out) { gspn::cli::cmd_gen_toy(toy_n, toy_seed, out); });
    } else if (inspect->parsed()) {
      std::optional<std::filesystem::path> dot;
      if (dot_out) dot = *dot_out;
      gspn::cli::cmd_inspect(inspect_model, dot, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "gspn: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
