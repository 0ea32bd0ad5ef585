#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "beamalloc/allocators.hpp"
#include "beamalloc/channel.hpp"
#include "beamalloc/metrics.hpp"
#include "beamalloc/precoding.hpp"
#include "beamalloc/surrogate.hpp"

namespace beamalloc {

/// One point of the demand sweep. `label_mbps` is the uniform demand, or the
/// mean demand for a per-user list.
struct QoSPoint {
  double label_mbps = 0.0;
  Vector demands_mbps;  // empty: uniform label_mbps for every user
};

struct SurrogateSettings {
  std::string dataset_path = "results/train.jsonl";
  std::string testset_path = "results/test.jsonl";
  std::string model_path = "results/model.json";
  std::string eval_path = "results/eval.csv";
  int n_train = 25000;
  int n_test = 10000;
  PrecoderKind precoder = PrecoderKind::ZF;
  double xi_mbps = 250.0;
  TrainOptions train{};
};

struct ExperimentConfig {
  SystemConfig system{};
  double cond_cap = kDefaultConditionCap;
  std::vector<QoSPoint> sweep;
  double omega_frac = QoSProfile::kDefaultToleranceFraction;
  std::vector<Strategy> strategies{Strategy::Equal, Strategy::SumOpt, Strategy::SatisSet,
                                   Strategy::Joint};
  std::vector<PrecoderKind> precoders{PrecoderKind::ZF, PrecoderKind::RZF};
  int n_trials = 200;
  std::uint64_t base_seed = 1;
  std::string out_dir = "results";
  int threads = 0;  // 0: hardware concurrency
  bool timing = false;
  SurrogateSettings surrogate{};

  /// Throws InvalidConfig.
  void validate() const;
  QoSProfile qos(const QoSPoint& point) const;
};

/// Parses `section.key = value` lines; '#' starts a comment. Errors carry
/// "<source>:<line>:".
ExperimentConfig parse_config(std::istream& in, const std::string& source = "config");
ExperimentConfig load_config(const std::string& path);

/// Channel realisation of a trial. Draws whose ZF Gram matrix breaks the
/// conditioning cap are replaced by a redraw from a derived seed.
struct TrialChannel {
  UserDrop drop;
  ChannelMatrix channel;
  AtmosphereState atmosphere;
  std::uint64_t draw_seed = 0;
  int redraws = 0;
};

TrialChannel draw_trial_channel(const ExperimentConfig& cfg, std::uint64_t seed);

Precoder make_precoder(PrecoderKind kind, const CMatrix& h, const ExperimentConfig& cfg);

struct TrialRow {
  int trial = 0;
  std::uint64_t seed = 0;
  PrecoderKind precoder = PrecoderKind::ZF;
  Strategy strategy = Strategy::Equal;
  double xi_mbps = 0.0;
  TrialRecord metrics;
  bool congested = false;
  double runtime_ms = 0.0;
  int iterations = 0;
  bool converged = true;
  std::vector<IterationRecord> trace;
};

struct SummaryRow {
  PrecoderKind precoder = PrecoderKind::ZF;
  Strategy strategy = Strategy::Equal;
  double xi_mbps = 0.0;
  MetricsSummary summary;
};

struct CampaignResult {
  std::vector<TrialRow> rows;  // trial-major, then precoder, demand point, strategy
  std::vector<SummaryRow> summary;
};

/// Runs every (trial, precoder, demand point, strategy) combination. Trial t
/// uses seed base_seed + t and one channel for all combinations.
CampaignResult run_campaign(const ExperimentConfig& cfg);

/// The rows of a single trial; what run_campaign computes per seed.
std::vector<TrialRow> run_trial(const ExperimentConfig& cfg, int trial);

void write_trials_csv(std::ostream& out, const std::vector<TrialRow>& rows);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
/// Writes trials.csv and summary.csv under cfg.out_dir.
void write_campaign(const ExperimentConfig& cfg, const CampaignResult& result);

enum class DatasetSplit { Train, Test };

/// Seed of record i in a split; the test split is offset far from training.
std::uint64_t dataset_seed(const ExperimentConfig& cfg, DatasetSplit split, int index);

/// Channel features labelled with the JointOpt powers of the configured precoder.
std::vector<DatasetRecord> gen_dataset(const ExperimentConfig& cfg, DatasetSplit split);

struct EvalRow {
  std::string method;
  double qos_mbps = 0.0;
  double time_ms = 0.0;  // mean per sample
  double sum_rate = 0.0;
  double satisfaction_pct = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> rows;  // model_based, surrogate
  double normalized_mse = 0.0;
  int n_samples = 0;
  int n_fallbacks = 0;
};

/// Replays each test record's channel from its seed (rejecting records whose
/// stored features disagree) and compares the model-based solver with the
/// surrogate on it.
EvalReport evaluate_surrogate(const ExperimentConfig& cfg, const SurrogateModel& model,
                              const std::vector<DatasetRecord>& test);

void write_eval_csv(std::ostream& out, const EvalReport& report);

}  // namespace beamalloc
