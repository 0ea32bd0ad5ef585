#include "beamalloc/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "beamalloc/error.hpp"
#include "beamalloc/metrics.hpp"
#include "beamalloc/rng.hpp"

namespace beamalloc {

using nlohmann::json;

Vector channel_features(const CMatrix& h) {
  // Column-major |h| (N x K) is already user-major.
  const Matrix mag = h.cwiseAbs();
  return Eigen::Map<const Vector>(mag.data(), mag.size());
}

Vector normalize(const Vector& v, const Vector& lo, const Vector& hi) {
  if (v.size() != lo.size() || v.size() != hi.size()) {
    throw InvalidInput("normalize: length mismatch");
  }
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double span = hi(i) - lo(i);
    out(i) = span > 0.0 ? (v(i) - lo(i)) / span : 0.0;
  }
  return out;
}

NormStats NormStats::fit(const Matrix& x, const Matrix& p) {
  if (x.cols() == 0 || x.cols() != p.cols()) throw InvalidInput("NormStats::fit: bad sample count");
  NormStats s;
  s.x_min = x.rowwise().minCoeff();
  s.x_max = x.rowwise().maxCoeff();
  s.p_min = p.rowwise().minCoeff();
  s.p_max = p.rowwise().maxCoeff();
  return s;
}

Vector NormStats::normalize_x(const Vector& x) const { return normalize(x, x_min, x_max); }
Vector NormStats::normalize_p(const Vector& p) const { return normalize(p, p_min, p_max); }

Vector NormStats::denormalize_p(const Vector& p_in) const {
  if (p_in.size() != p_min.size()) throw InvalidInput("denormalize: length mismatch");
  return (p_min.array() + p_in.array() * (p_max - p_min).array()).matrix();
}

Mlp Mlp::init(const std::vector<int>& sizes, std::uint64_t seed) {
  if (sizes.size() < 2) throw InvalidInput("network needs at least an input and an output size");
  for (int s : sizes) {
    if (s <= 0) throw InvalidInput("layer sizes must be positive");
  }
  Rng rng(mix_seed(seed, 0x5eed));
  Mlp net;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    DenseLayer layer;
    const double sd = std::sqrt(2.0 / sizes[l]);
    layer.w.resize(sizes[l + 1], sizes[l]);
    for (Eigen::Index j = 0; j < layer.w.cols(); ++j) {
      for (Eigen::Index i = 0; i < layer.w.rows(); ++i) layer.w(i, j) = rng.normal(0.0, sd);
    }
    layer.b = Vector::Zero(sizes[l + 1]);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

std::vector<int> Mlp::sizes() const {
  std::vector<int> s;
  if (layers.empty()) return s;
  s.push_back(n_inputs());
  for (const auto& l : layers) s.push_back(static_cast<int>(l.w.rows()));
  return s;
}

std::size_t Mlp::n_params() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.w.size() + l.b.size());
  return n;
}

Vector Mlp::forward(const Vector& x) const {
  if (layers.empty() || x.size() != n_inputs()) throw InvalidInput("forward: input length mismatch");
  Vector a = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Vector z = layers[l].w * a + layers[l].b;
    if (l + 1 < layers.size()) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

Matrix Mlp::forward(const Matrix& x) const {
  if (layers.empty() || x.rows() != n_inputs()) throw InvalidInput("forward: input length mismatch");
  Matrix a = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Matrix z = layers[l].w * a;
    z.colwise() += layers[l].b;
    if (l + 1 < layers.size()) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

bool Mlp::all_finite() const {
  return std::all_of(layers.begin(), layers.end(),
                     [](const DenseLayer& l) { return l.w.allFinite() && l.b.allFinite(); });
}

double mse_loss(const Mlp& net, const Matrix& x, const Matrix& y, MlpGradient* grad) {
  if (x.cols() != y.cols() || y.rows() != net.n_outputs() || x.rows() != net.n_inputs()) {
    throw InvalidInput("mse_loss: shape mismatch");
  }
  const std::size_t n_layers = net.layers.size();
  std::vector<Matrix> acts;  // acts[l] feeds layer l
  acts.reserve(n_layers + 1);
  acts.push_back(x);
  for (std::size_t l = 0; l < n_layers; ++l) {
    Matrix z = net.layers[l].w * acts.back();
    z.colwise() += net.layers[l].b;
    if (l + 1 < n_layers) z = z.cwiseMax(0.0);
    acts.push_back(std::move(z));
  }
  const Matrix diff = acts.back() - y;
  const double scale = 1.0 / static_cast<double>(diff.size());
  const double loss = diff.squaredNorm() * scale;
  if (!grad) return loss;

  grad->dw.assign(n_layers, Matrix());
  grad->db.assign(n_layers, Vector());
  Matrix delta = 2.0 * scale * diff;
  for (std::size_t l = n_layers; l-- > 0;) {
    if (l + 1 < n_layers) {
      // Post-activation > 0 exactly where the rectifier passed.
      delta = (acts[l + 1].array() > 0.0).select(delta, 0.0);
    }
    grad->dw[l] = delta * acts[l].transpose();
    grad->db[l] = delta.rowwise().sum();
    if (l > 0) delta = net.layers[l].w.transpose() * delta;
  }
  return loss;
}

Vector project_budget(const Vector& p_hat, double p_max, bool* fallback) {
  if (p_hat.size() == 0) throw InvalidInput("project_budget: empty prediction");
  Vector p = p_hat.cwiseMax(0.0);
  const double total = p.sum();
  const bool flat = !(total > 0.0) || !std::isfinite(total);
  if (fallback) *fallback = flat;
  if (flat) return Vector::Constant(p.size(), p_max / static_cast<double>(p.size()));
  return p * (p_max / total);
}

namespace {

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix stack_columns(const std::vector<DatasetRecord>& data, const std::vector<std::size_t>& idx,
                     bool labels) {
  const auto rows = labels ? data[idx.front()].p_star.size() : data[idx.front()].x.size();
  Matrix m(rows, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const Vector& v = labels ? data[idx[i]].p_star : data[idx[i]].x;
    if (v.size() != rows) throw FormatError("dataset records have inconsistent lengths");
    m.col(static_cast<Eigen::Index>(i)) = v;
  }
  return m;
}

Matrix normalize_columns(const Matrix& m, const Vector& lo, const Vector& hi) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) out.col(j) = normalize(m.col(j), lo, hi);
  return out;
}

struct AdamState {
  std::vector<Matrix> mw, vw;
  std::vector<Vector> mb, vb;
  long step = 0;

  explicit AdamState(const Mlp& net) {
    for (const auto& l : net.layers) {
      mw.push_back(Matrix::Zero(l.w.rows(), l.w.cols()));
      vw.push_back(Matrix::Zero(l.w.rows(), l.w.cols()));
      mb.push_back(Vector::Zero(l.b.size()));
      vb.push_back(Vector::Zero(l.b.size()));
    }
  }

  void apply(Mlp& net, const MlpGradient& g, const TrainOptions& o) {
    ++step;
    const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(step));
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      mw[l] = o.beta1 * mw[l] + (1.0 - o.beta1) * g.dw[l];
      vw[l] = o.beta2 * vw[l] + (1.0 - o.beta2) * g.dw[l].cwiseAbs2();
      mb[l] = o.beta1 * mb[l] + (1.0 - o.beta1) * g.db[l];
      vb[l] = o.beta2 * vb[l] + (1.0 - o.beta2) * g.db[l].cwiseAbs2();
      net.layers[l].w.array() -=
          o.learning_rate * (mw[l].array() / c1) / ((vw[l].array() / c2).sqrt() + o.epsilon);
      net.layers[l].b.array() -=
          o.learning_rate * (mb[l].array() / c1) / ((vb[l].array() / c2).sqrt() + o.epsilon);
    }
  }
};

}  // namespace

Vector SurrogateModel::raw_powers(const Vector& x) const {
  return stats.denormalize_p(net.forward(stats.normalize_x(x)));
}

Vector SurrogateModel::predict_powers(const Vector& x, double p_max, bool* fallback) const {
  return project_budget(raw_powers(x), p_max, fallback);
}

SurrogateModel train(const std::vector<DatasetRecord>& data, const TrainOptions& opts,
                     TrainReport* report) {
  if (data.empty()) throw TrainingError("training set is empty");
  if (opts.batch_size <= 0 || opts.max_epochs <= 0 || opts.patience <= 0 ||
      !(opts.learning_rate > 0.0) || !(opts.val_fraction >= 0.0 && opts.val_fraction < 1.0)) {
    throw InvalidInput("invalid training options");
  }

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix_seed(opts.seed, 0x7a11));
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  auto n_val = static_cast<std::size_t>(std::floor(opts.val_fraction * static_cast<double>(data.size())));
  if (n_val >= data.size()) n_val = data.size() - 1;
  const std::vector<std::size_t> val_idx(order.begin(), order.begin() + static_cast<long>(n_val));
  const std::vector<std::size_t> train_idx(order.begin() + static_cast<long>(n_val), order.end());

  const Matrix x_train_raw = stack_columns(data, train_idx, false);
  const Matrix p_train_raw = stack_columns(data, train_idx, true);

  SurrogateModel model;
  model.stats = NormStats::fit(x_train_raw, p_train_raw);
  const Matrix x_train = normalize_columns(x_train_raw, model.stats.x_min, model.stats.x_max);
  const Matrix y_train = normalize_columns(p_train_raw, model.stats.p_min, model.stats.p_max);
  Matrix x_val, y_val;
  if (!val_idx.empty()) {
    x_val = normalize_columns(stack_columns(data, val_idx, false), model.stats.x_min, model.stats.x_max);
    y_val = normalize_columns(stack_columns(data, val_idx, true), model.stats.p_min, model.stats.p_max);
  }

  std::vector<int> sizes{static_cast<int>(x_train.rows())};
  sizes.insert(sizes.end(), opts.hidden.begin(), opts.hidden.end());
  sizes.push_back(static_cast<int>(y_train.rows()));
  model.net = Mlp::init(sizes, opts.seed);

  TrainReport local;
  TrainReport& rep = report ? *report : local;
  rep = TrainReport{};
  AdamState adam(model.net);
  Mlp best = model.net;
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;
  const auto n_train = static_cast<std::size_t>(x_train.cols());
  std::vector<std::size_t> perm(n_train);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  MlpGradient grad;

  for (int epoch = 0; epoch < opts.max_epochs; ++epoch) {
    for (std::size_t i = n_train; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    for (std::size_t start = 0; start < n_train; start += static_cast<std::size_t>(opts.batch_size)) {
      const std::size_t end = std::min(n_train, start + static_cast<std::size_t>(opts.batch_size));
      const auto m = static_cast<Eigen::Index>(end - start);
      Matrix xb(x_train.rows(), m), yb(y_train.rows(), m);
      for (Eigen::Index j = 0; j < m; ++j) {
        const auto src = static_cast<Eigen::Index>(perm[start + static_cast<std::size_t>(j)]);
        xb.col(j) = x_train.col(src);
        yb.col(j) = y_train.col(src);
      }
      const double loss = mse_loss(model.net, xb, yb, &grad);
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "training loss became " << loss << " at epoch " << epoch << ", batch starting "
            << start << " (learning rate " << opts.learning_rate << ")";
        throw TrainingError(msg.str());
      }
      adam.apply(model.net, grad, opts);
    }
    if (!model.net.all_finite()) {
      throw TrainingError("non-finite parameters after epoch " + std::to_string(epoch));
    }
    rep.train_loss.push_back(mse_loss(model.net, x_train, y_train));
    const double val = val_idx.empty() ? rep.train_loss.back() : mse_loss(model.net, x_val, y_val);
    rep.val_loss.push_back(val);
    if (val < best_val) {
      best_val = val;
      best = model.net;
      rep.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= opts.patience) {
      rep.early_stopped = true;
      break;
    }
  }
  model.net = std::move(best);
  rep.best_val_loss = best_val;
  return model;
}

double normalized_mse(const SurrogateModel& model, const std::vector<DatasetRecord>& data) {
  if (data.empty()) throw InvalidInput("normalized_mse: no records");
  double acc = 0.0;
  std::size_t count = 0;
  for (const auto& r : data) {
    const Vector err = model.net.forward(model.stats.normalize_x(r.x)) - model.stats.normalize_p(r.p_star);
    acc += err.squaredNorm();
    count += static_cast<std::size_t>(err.size());
  }
  return acc / static_cast<double>(count);
}

SurrogatePrediction predict(const SurrogateModel& model, const CMatrix& h,
                            const Precoder& precoder, const SystemConfig& cfg,
                            const QoSProfile& qos) {
  const Vector x = channel_features(h);
  if (x.size() != model.net.n_inputs() || h.cols() != model.net.n_outputs()) {
    throw InvalidInput("predict: channel shape does not match the model");
  }
  SurrogatePrediction out;
  const AllocationProblem prob = AllocationProblem::from(h, precoder, cfg);
  AllocationResult& res = out.allocation;
  res.powers = model.predict_powers(x, cfg.p_max_w, &out.equal_power_fallback);
  res.rates = prob.rates(res.powers);
  res.satisfied = satisfied_set(res.rates, qos.demands_mbps);
  res.congested = res.n_satisfied() < prob.n_users();
  res.strategy = Strategy::Joint;
  res.iterations = 1;
  res.trace.push_back({res.n_satisfied(), res.sum_rate()});
  return out;
}

void write_dataset(const std::string& path, const std::vector<DatasetRecord>& records) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  for (const auto& r : records) {
    json j;
    j["x"] = to_std(r.x);
    j["p_star"] = to_std(r.p_star);
    j["seed"] = r.seed;
    j["strategy"] = r.strategy;
    j["xi"] = r.xi;
    out << j.dump() << '\n';
  }
  if (!out) throw Error("write to '" + path + "' failed");
}

std::vector<DatasetRecord> read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset '" + path + "'");
  std::vector<DatasetRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      DatasetRecord r;
      r.x = from_json(j.at("x"));
      r.p_star = from_json(j.at("p_star"));
      r.seed = j.at("seed").get<std::uint64_t>();
      r.strategy = j.at("strategy").get<std::string>();
      r.xi = j.at("xi").get<double>();
      if ((r.x.array() < 0.0).any()) throw FormatError("negative channel gain");
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void save_model(const SurrogateModel& model, const std::string& path) {
  json j;
  j["version"] = SurrogateModel::kFormatVersion;
  j["sizes"] = model.net.sizes();
  j["layers"] = json::array();
  for (const auto& l : model.net.layers) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(l.w.size()));
    for (Eigen::Index r = 0; r < l.w.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.w.cols(); ++c) w.push_back(l.w(r, c));
    }
    j["layers"].push_back({{"rows", l.w.rows()}, {"cols", l.w.cols()}, {"weights", w}, {"bias", to_std(l.b)}});
  }
  j["norm_stats"] = {{"x_min", to_std(model.stats.x_min)},
                     {"x_max", to_std(model.stats.x_max)},
                     {"p_min", to_std(model.stats.p_min)},
                     {"p_max", to_std(model.stats.p_max)}};
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << j.dump(1) << '\n';
  if (!out) throw Error("write to '" + path + "' failed");
}

SurrogateModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model '" + path + "'");
  SurrogateModel m;
  try {
    const json j = json::parse(in);
    if (j.at("version").get<int>() != SurrogateModel::kFormatVersion) {
      throw FormatError("unsupported model version " + j.at("version").dump());
    }
    for (const auto& jl : j.at("layers")) {
      DenseLayer l;
      const auto rows = jl.at("rows").get<Eigen::Index>();
      const auto cols = jl.at("cols").get<Eigen::Index>();
      const auto w = jl.at("weights").get<std::vector<double>>();
      if (rows <= 0 || cols <= 0 || static_cast<Eigen::Index>(w.size()) != rows * cols) {
        throw FormatError("layer weight count does not match its shape");
      }
      l.w = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          w.data(), rows, cols);
      l.b = from_json(jl.at("bias"));
      if (l.b.size() != rows) throw FormatError("bias length does not match layer rows");
      if (!m.net.layers.empty() && m.net.layers.back().w.rows() != cols) {
        throw FormatError("consecutive layer shapes do not chain");
      }
      m.net.layers.push_back(std::move(l));
    }
    if (m.net.layers.empty()) throw FormatError("model has no layers");
    const auto& ns = j.at("norm_stats");
    m.stats.x_min = from_json(ns.at("x_min"));
    m.stats.x_max = from_json(ns.at("x_max"));
    m.stats.p_min = from_json(ns.at("p_min"));
    m.stats.p_max = from_json(ns.at("p_max"));
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  if (m.stats.x_min.size() != m.net.n_inputs() || m.stats.x_max.size() != m.net.n_inputs() ||
      m.stats.p_min.size() != m.net.n_outputs() || m.stats.p_max.size() != m.net.n_outputs()) {
    throw FormatError(path + ": norm_stats lengths do not match the network");
  }
  if (!m.net.all_finite()) throw FormatError(path + ": non-finite parameters");
  return m;
}

}  // namespace beamalloc
