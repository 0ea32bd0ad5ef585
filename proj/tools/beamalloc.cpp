#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "beamalloc/error.hpp"
#include "beamalloc/experiment.hpp"
#include "beamalloc/surrogate.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

void ensure_parent(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace beamalloc;

  CLI::App app{"Power allocation with congestion control for precoded multibeam downlinks"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> threads;
  bool timing = false;
  std::string model_path;

  auto* run = app.add_subcommand("run", "Monte Carlo campaign; writes trials.csv and summary.csv");
  run->add_option("--config", config_path, "Config file")->required();
  run->add_option("--trials", trials, "Override run.n_trials")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Override run.base_seed");
  run->add_option("--out", out_dir, "Override run.out_dir");
  run->add_option("--threads", threads, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
  run->add_flag("--timing", timing, "Record allocator wall-clock in runtime_ms");

  auto* gen = app.add_subcommand("gen-data", "Write labelled train and test sets as JSON lines");
  gen->add_option("--config", config_path, "Config file")->required();
  gen->add_option("--threads", threads, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);

  auto* train_cmd = app.add_subcommand("train", "Fit the surrogate on the training set");
  train_cmd->add_option("--config", config_path, "Config file")->required();

  auto* eval = app.add_subcommand("eval", "Compare the surrogate with the model-based solver");
  eval->add_option("--model", model_path, "Model file")->required();
  eval->add_option("--config", config_path, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
    if (trials) cfg.n_trials = *trials;
    if (seed) cfg.base_seed = *seed;
    if (out_dir) cfg.out_dir = *out_dir;
    if (threads) cfg.threads = *threads;
    if (timing) cfg.timing = true;
    cfg.validate();
  } catch (const InvalidConfig& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (*run) {
      const CampaignResult result = run_campaign(cfg);
      write_campaign(cfg, result);
      std::cout << "wrote " << result.rows.size() << " trial rows and " << result.summary.size()
                << " summary rows to " << cfg.out_dir << '\n';
    } else if (*gen) {
      const auto& s = cfg.surrogate;
      for (auto [split, path] : {std::pair{DatasetSplit::Train, s.dataset_path},
                                 std::pair{DatasetSplit::Test, s.testset_path}}) {
        const auto records = gen_dataset(cfg, split);
        ensure_parent(path);
        write_dataset(path, records);
        std::cout << "wrote " << records.size() << " records to " << path << '\n';
      }
    } else if (*train_cmd) {
      const auto data = read_dataset(cfg.surrogate.dataset_path);
      TrainReport report;
      const SurrogateModel model = train(data, cfg.surrogate.train, &report);
      ensure_parent(cfg.surrogate.model_path);
      save_model(model, cfg.surrogate.model_path);
      std::cout << "trained " << report.train_loss.size() << " epochs, best validation loss "
                << report.best_val_loss << " at epoch " << report.best_epoch << "; model written to "
                << cfg.surrogate.model_path << '\n';
    } else if (*eval) {
      const SurrogateModel model = load_model(model_path);
      const auto test = read_dataset(cfg.surrogate.testset_path);
      const EvalReport report = evaluate_surrogate(cfg, model, test);
      ensure_parent(cfg.surrogate.eval_path);
      std::ofstream out(cfg.surrogate.eval_path);
      if (!out) throw Error("cannot open '" + cfg.surrogate.eval_path + "' for writing");
      write_eval_csv(out, report);
      write_eval_csv(std::cout, report);
      std::cout << "normalized MSE " << report.normalized_mse << " over " << report.n_samples
                << " samples\n";
    }
  } catch (const InvalidConfig& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
