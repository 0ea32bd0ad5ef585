#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "beamalloc/allocators.hpp"
#include "beamalloc/channel.hpp"
#include "beamalloc/precoding.hpp"
#include "beamalloc/types.hpp"

namespace beamalloc {

/// Channel magnitudes |h_kn| flattened user-major: [|h_11| .. |h_1N|, |h_21| ..].
Vector channel_features(const CMatrix& h);

/// Per-coordinate min-max scaling for inputs and labels.
struct NormStats {
  Vector x_min, x_max;
  Vector p_min, p_max;

  /// Columns of `x` and `p` are samples.
  static NormStats fit(const Matrix& x, const Matrix& p);

  Vector normalize_x(const Vector& x) const;
  Vector normalize_p(const Vector& p) const;
  Vector denormalize_p(const Vector& p_in) const;
};

/// Min-max map onto [0, 1]; coordinates with max == min go to 0.
Vector normalize(const Vector& v, const Vector& lo, const Vector& hi);

struct DenseLayer {
  Matrix w;  // out x in
  Vector b;  // out
};

/// Fully connected network, rectifier on hidden layers and identity output.
struct Mlp {
  std::vector<DenseLayer> layers;

  /// He-initialized weights, zero biases.
  static Mlp init(const std::vector<int>& sizes, std::uint64_t seed);

  std::vector<int> sizes() const;
  int n_inputs() const { return static_cast<int>(layers.front().w.cols()); }
  int n_outputs() const { return static_cast<int>(layers.back().w.rows()); }
  std::size_t n_params() const;

  Vector forward(const Vector& x) const;
  /// Columns are samples.
  Matrix forward(const Matrix& x) const;

  bool all_finite() const;
};

struct MlpGradient {
  std::vector<Matrix> dw;
  std::vector<Vector> db;
};

/// Mean squared error over every element of the batch, mean(|net(x) - y|^2),
/// with its gradient when `grad` is given.
double mse_loss(const Mlp& net, const Matrix& x, const Matrix& y, MlpGradient* grad = nullptr);

/// Clips negatives and rescales so the powers sum to p_max. An all-zero
/// prediction becomes equal power and sets `fallback`.
Vector project_budget(const Vector& p_hat, double p_max, bool* fallback = nullptr);

struct DatasetRecord {
  Vector x;
  Vector p_star;
  std::uint64_t seed = 0;
  std::string strategy;
  double xi = 0.0;
};

void write_dataset(const std::string& path, const std::vector<DatasetRecord>& records);
std::vector<DatasetRecord> read_dataset(const std::string& path);

struct TrainOptions {
  std::vector<int> hidden{128, 64};
  int batch_size = 256;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int max_epochs = 200;
  int patience = 10;
  double val_fraction = 0.1;
  std::uint64_t seed = 1;
};

struct TrainReport {
  std::vector<double> train_loss;  // per epoch, full training split
  std::vector<double> val_loss;
  int best_epoch = -1;
  double best_val_loss = 0.0;
  bool early_stopped = false;
};

struct SurrogateModel {
  static constexpr int kFormatVersion = 1;

  Mlp net;
  NormStats stats;

  /// Raw network output mapped back to watts, before projection.
  Vector raw_powers(const Vector& x) const;
  /// Budget-tight nonnegative powers for the feature vector `x`.
  Vector predict_powers(const Vector& x, double p_max, bool* fallback = nullptr) const;
};

SurrogateModel train(const std::vector<DatasetRecord>& data, const TrainOptions& opts,
                     TrainReport* report = nullptr);

/// Normalized-space MSE of the network on the given records.
double normalized_mse(const SurrogateModel& model, const std::vector<DatasetRecord>& data);

struct SurrogatePrediction {
  AllocationResult allocation;
  bool equal_power_fallback = false;
};

/// Powers from the network, rates and satisfied set from the real link gains.
SurrogatePrediction predict(const SurrogateModel& model, const CMatrix& h,
                            const Precoder& precoder, const SystemConfig& cfg,
                            const QoSProfile& qos);

void save_model(const SurrogateModel& model, const std::string& path);
SurrogateModel load_model(const std::string& path);

}  // namespace beamalloc
