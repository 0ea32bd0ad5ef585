#include "beamalloc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "beamalloc/error.hpp"
#include "beamalloc/rng.hpp"
#include "beamalloc/waterfill.hpp"

namespace beamalloc {

namespace {

constexpr int kMaxRedraws = 16;
constexpr std::uint64_t kRedrawTag = 0x4ed0;
constexpr std::uint64_t kTestSeedOffset = 1ULL << 32;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(d)) {
    throw InvalidConfig("'" + v + "' is not a finite number");
  }
  return d;
}

long long to_int(const std::string& v) {
  char* end = nullptr;
  const long long i = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size()) throw InvalidConfig("'" + v + "' is not an integer");
  return i;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw InvalidConfig("'" + v + "' is not a boolean");
}

std::vector<double> to_doubles(const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split(v, ',')) out.push_back(to_double(item));
  if (out.empty()) throw InvalidConfig("empty list");
  return out;
}

int positive_int(const std::string& v) {
  const long long i = to_int(v);
  if (i < 1 || i > 1'000'000'000) throw InvalidConfig("expected a positive integer, got " + v);
  return static_cast<int>(i);
}

double positive(const std::string& v) {
  const double d = to_double(v);
  if (!(d > 0.0)) throw InvalidConfig("expected a positive value, got " + v);
  return d;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

template <class T>
void push_unique(std::vector<T>& v, T x) {
  if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
}

}  // namespace

void ExperimentConfig::validate() const {
  try {
    system.validate();
  } catch (const Error& e) {
    throw InvalidConfig(e.what());
  }
  if (n_trials < 1) throw InvalidConfig("run.n_trials must be >= 1");
  if (strategies.empty()) throw InvalidConfig("run.strategies must name at least one strategy");
  if (precoders.empty()) throw InvalidConfig("run.precoders must name at least one precoder");
  if (sweep.empty()) throw InvalidConfig("qos.xi_mbps or qos.per_user must give at least one point");
  if (!(cond_cap > 1.0)) throw InvalidConfig("system.cond_cap must exceed 1");
  if (!(omega_frac >= 0.0)) throw InvalidConfig("qos.omega_frac must be >= 0");
  for (const auto& p : sweep) {
    if (!(p.label_mbps > 0.0)) throw InvalidConfig("demands must be positive");
    if (p.demands_mbps.size() != 0 && p.demands_mbps.size() != system.n_users) {
      throw InvalidConfig("per-user demand list length differs from system.n_users");
    }
  }
  if (threads < 0) throw InvalidConfig("run.threads must be >= 0");
}

QoSProfile ExperimentConfig::qos(const QoSPoint& point) const {
  if (point.demands_mbps.size() == 0) {
    return QoSProfile::uniform(system.n_users, point.label_mbps, omega_frac);
  }
  return QoSProfile::from_demands(point.demands_mbps, omega_frac);
}

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
  ExperimentConfig cfg;
  cfg.sweep.clear();
  SystemConfig& s = cfg.system;
  bool noise_temp_set = false;
  int line_no = 0;

  using Setter = std::function<void(const std::string&)>;
  const std::map<std::string, Setter> keys{
      {"system.n_beams", [&](const std::string& v) { s.n_beams = positive_int(v); }},
      {"system.n_users", [&](const std::string& v) { s.n_users = positive_int(v); }},
      {"system.bandwidth_mhz", [&](const std::string& v) { s.bandwidth_mhz = positive(v); }},
      {"system.carrier_freq_ghz", [&](const std::string& v) { s.carrier_freq_ghz = positive(v); }},
      {"system.sat_height_km", [&](const std::string& v) { s.sat_height_km = positive(v); }},
      {"system.p_max_dbw", [&](const std::string& v) { s.p_max_w = db_to_linear(to_double(v)); }},
      {"system.noise_power_dbw", [&](const std::string& v) { s.noise_power_w = db_to_linear(to_double(v)); }},
      {"system.rx_gain_dbi", [&](const std::string& v) { s.rx_gain = db_to_linear(to_double(v)); }},
      {"system.noise_temp_k", [&](const std::string& v) { s.noise_temp_k = positive(v); noise_temp_set = true; }},
      {"system.peak_beam_gain_dbi", [&](const std::string& v) { s.peak_beam_gain = db_to_linear(to_double(v)); }},
      {"system.beam_radius_km", [&](const std::string& v) { s.beam_radius_km = positive(v); }},
      {"system.atmospherics", [&](const std::string& v) { s.atmospherics_enabled = to_bool(v); }},
      {"system.rain_mean_db", [&](const std::string& v) { s.atmosphere.rain_mean_db = to_double(v); }},
      {"system.rain_var_db", [&](const std::string& v) { s.atmosphere.rain_var_db = to_double(v); }},
      {"system.w_red", [&](const std::string& v) { s.atmosphere.w_red = to_double(v); }},
      {"system.cloud_temp_k", [&](const std::string& v) { s.atmosphere.cloud_temp_k = positive(v); }},
      {"system.cond_cap", [&](const std::string& v) { cfg.cond_cap = positive(v); }},
      {"qos.xi_mbps",
       [&](const std::string& v) {
         for (double xi : to_doubles(v)) {
           if (!(xi > 0.0)) throw InvalidConfig("demands must be positive");
           cfg.sweep.push_back({xi, Vector{}});
         }
       }},
      {"qos.per_user",
       [&](const std::string& v) {
         for (const auto& group : split(v, '|')) {
           const auto d = to_doubles(group);
           QoSPoint p;
           p.demands_mbps = Eigen::Map<const Vector>(d.data(), static_cast<Eigen::Index>(d.size()));
           if ((p.demands_mbps.array() <= 0.0).any()) throw InvalidConfig("demands must be positive");
           p.label_mbps = p.demands_mbps.mean();
           cfg.sweep.push_back(std::move(p));
         }
       }},
      {"qos.omega_frac", [&](const std::string& v) { cfg.omega_frac = to_double(v); }},
      {"run.strategies",
       [&](const std::string& v) {
         cfg.strategies.clear();
         for (const auto& name : split(v, ',')) push_unique(cfg.strategies, parse_strategy(name));
       }},
      {"run.precoders",
       [&](const std::string& v) {
         cfg.precoders.clear();
         for (const auto& name : split(v, ',')) push_unique(cfg.precoders, parse_precoder_kind(name));
       }},
      {"run.n_trials", [&](const std::string& v) { cfg.n_trials = positive_int(v); }},
      {"run.base_seed",
       [&](const std::string& v) {
         const long long x = to_int(v);
         if (x < 0) throw InvalidConfig("run.base_seed must be >= 0");
         cfg.base_seed = static_cast<std::uint64_t>(x);
       }},
      {"run.out_dir", [&](const std::string& v) { cfg.out_dir = v; }},
      {"run.threads",
       [&](const std::string& v) {
         const long long x = to_int(v);
         if (x < 0 || x > 4096) throw InvalidConfig("run.threads out of range");
         cfg.threads = static_cast<int>(x);
       }},
      {"run.timing", [&](const std::string& v) { cfg.timing = to_bool(v); }},
      {"surrogate.dataset_path", [&](const std::string& v) { cfg.surrogate.dataset_path = v; }},
      {"surrogate.testset_path", [&](const std::string& v) { cfg.surrogate.testset_path = v; }},
      {"surrogate.model_path", [&](const std::string& v) { cfg.surrogate.model_path = v; }},
      {"surrogate.eval_path", [&](const std::string& v) { cfg.surrogate.eval_path = v; }},
      {"surrogate.n_train", [&](const std::string& v) { cfg.surrogate.n_train = positive_int(v); }},
      {"surrogate.n_test", [&](const std::string& v) { cfg.surrogate.n_test = positive_int(v); }},
      {"surrogate.precoder", [&](const std::string& v) { cfg.surrogate.precoder = parse_precoder_kind(v); }},
      {"surrogate.xi_mbps", [&](const std::string& v) { cfg.surrogate.xi_mbps = positive(v); }},
      {"surrogate.epochs", [&](const std::string& v) { cfg.surrogate.train.max_epochs = positive_int(v); }},
      {"surrogate.batch", [&](const std::string& v) { cfg.surrogate.train.batch_size = positive_int(v); }},
      {"surrogate.learning_rate", [&](const std::string& v) { cfg.surrogate.train.learning_rate = positive(v); }},
      {"surrogate.patience", [&](const std::string& v) { cfg.surrogate.train.patience = positive_int(v); }},
      {"surrogate.val_fraction",
       [&](const std::string& v) {
         const double f = to_double(v);
         if (!(f >= 0.0 && f < 1.0)) throw InvalidConfig("surrogate.val_fraction must be in [0, 1)");
         cfg.surrogate.train.val_fraction = f;
       }},
      {"surrogate.seed",
       [&](const std::string& v) {
         const long long x = to_int(v);
         if (x < 0) throw InvalidConfig("surrogate.seed must be >= 0");
         cfg.surrogate.train.seed = static_cast<std::uint64_t>(x);
       }},
      {"surrogate.hidden",
       [&](const std::string& v) {
         cfg.surrogate.train.hidden.clear();
         for (const auto& item : split(v, ',')) cfg.surrogate.train.hidden.push_back(positive_int(item));
       }},
  };

  std::map<std::string, int> seen;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw InvalidConfig(where + "expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    const auto it = keys.find(key);
    if (it == keys.end()) throw InvalidConfig(where + "unknown key '" + key + "'");
    if (auto [pos, fresh] = seen.emplace(key, line_no); !fresh) {
      throw InvalidConfig(where + "duplicate key '" + key + "' (first set on line " +
                          std::to_string(pos->second) + ")");
    }
    try {
      it->second(value);
    } catch (const Error& e) {
      throw InvalidConfig(where + key + ": " + e.what());
    }
  }

  if (!noise_temp_set) s.noise_temp_k = s.noise_power_w / (s.boltzmann * s.bandwidth_mhz * 1e6);
  if (cfg.sweep.empty()) cfg.sweep.push_back({cfg.surrogate.xi_mbps, Vector{}});
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw InvalidConfig(source + ": " + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open config '" + path + "'");
  return parse_config(in, path);
}

TrialChannel draw_trial_channel(const ExperimentConfig& cfg, std::uint64_t seed) {
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    TrialChannel tc;
    tc.draw_seed = attempt == 0 ? seed : mix_seed(seed, kRedrawTag + static_cast<std::uint64_t>(attempt));
    tc.redraws = attempt;
    tc.drop = drop_users(cfg.system, tc.draw_seed);
    auto [ch, atm] = apply_atmosphere(build_channel(tc.drop, cfg.system, tc.draw_seed), tc.drop,
                                      cfg.system, tc.draw_seed);
    if (gram_condition(ch.h) <= cfg.cond_cap) {
      tc.channel = std::move(ch);
      tc.atmosphere = std::move(atm);
      return tc;
    }
  }
  throw DegenerateChannel("no well-conditioned channel within " + std::to_string(kMaxRedraws) +
                          " draws for seed " + std::to_string(seed));
}

Precoder make_precoder(PrecoderKind kind, const CMatrix& h, const ExperimentConfig& cfg) {
  if (kind == PrecoderKind::ZF) return make_zf(h, cfg.cond_cap);
  return make_rzf(h, cfg.system.normalized_noise(), cfg.system.p_max_w);
}

std::vector<TrialRow> run_trial(const ExperimentConfig& cfg, int trial) {
  using Clock = std::chrono::steady_clock;
  const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(trial);
  const TrialChannel tc = draw_trial_channel(cfg, seed);
  const CMatrix& h = tc.channel.h;
  const int k = cfg.system.n_users;
  std::vector<TrialRow> rows;

  for (PrecoderKind kind : cfg.precoders) {
    const Precoder pre = make_precoder(kind, h, cfg);
    const AllocationProblem prob = AllocationProblem::from(h, pre, cfg.system);
    const double sumopt_rate = prob.rates(waterfill(prob.inverse_gains(), prob.p_max)).sum();
    for (const QoSPoint& point : cfg.sweep) {
      const QoSProfile qos = cfg.qos(point);
      for (Strategy strategy : cfg.strategies) {
        const auto t0 = Clock::now();
        const AllocationResult res = allocate(strategy, prob, qos);
        const auto t1 = Clock::now();

        TrialRow row;
        row.trial = trial;
        row.seed = seed;
        row.precoder = kind;
        row.strategy = strategy;
        row.xi_mbps = point.label_mbps;
        row.congested = res.congested;
        row.iterations = res.iterations;
        row.converged = res.converged;
        row.trace = res.trace;
        if (cfg.timing) row.runtime_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

        TrialRecord& m = row.metrics;
        m.n_users = k;
        m.n_satisfied = res.n_satisfied();
        m.sum_rate = res.sum_rate();
        for (int i : res.satisfied) m.sum_rate_satisfied += res.rates(i);
        try {
          m.jain = jain((res.rates.array() / qos.demands_mbps.array()).matrix());
        } catch (const UndefinedMetric&) {
          m.jain = std::nan("");
        }
        m.lambda_obj = sumopt_rate > 0.0
                           ? lambda_objective(m.n_satisfied, k, m.sum_rate, sumopt_rate)
                           : std::nan("");
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

CampaignResult run_campaign(const ExperimentConfig& cfg) {
  cfg.validate();
  const int n = cfg.n_trials;
  std::vector<std::vector<TrialRow>> per_trial(static_cast<std::size_t>(n));
  int n_threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::clamp(n_threads, 1, n);

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int t = next++; t < n; t = next++) {
      try {
        per_trial[static_cast<std::size_t>(t)] = run_trial(cfg, t);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  CampaignResult out;
  for (auto& rows : per_trial) {
    for (auto& r : rows) out.rows.push_back(std::move(r));
  }

  // Group keys in first-appearance order, which is config order.
  std::vector<SummaryRow> groups;
  std::vector<std::vector<TrialRecord>> members;
  for (const auto& r : out.rows) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const SummaryRow& g) {
      return g.precoder == r.precoder && g.strategy == r.strategy && g.xi_mbps == r.xi_mbps;
    });
    if (it == groups.end()) {
      groups.push_back({r.precoder, r.strategy, r.xi_mbps, {}});
      members.emplace_back();
      it = groups.end() - 1;
    }
    members[static_cast<std::size_t>(it - groups.begin())].push_back(r.metrics);
  }
  for (std::size_t i = 0; i < groups.size(); ++i) {
    groups[i].summary = aggregate(members[i]);
    groups[i].summary.rows.clear();
  }
  out.summary = std::move(groups);
  return out;
}

void write_trials_csv(std::ostream& out, const std::vector<TrialRow>& rows) {
  out << "trial,seed,precoder,strategy,xi_mbps,sum_rate_mbps,n_satisfied,congested,jain,"
         "lambda_obj,runtime_ms\n";
  for (const auto& r : rows) {
    out << r.trial << ',' << r.seed << ',' << to_string(r.precoder) << ',' << to_string(r.strategy)
        << ',' << fmt(r.xi_mbps) << ',' << fmt(r.metrics.sum_rate) << ',' << r.metrics.n_satisfied
        << ',' << (r.congested ? 1 : 0) << ',' << fmt(r.metrics.jain) << ','
        << fmt(r.metrics.lambda_obj) << ',' << fmt(r.runtime_ms) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "precoder,strategy,xi_mbps,n_trials,congestion_prob,satisfaction_prob,mean_sum_rate_mbps,"
         "mean_sum_rate_satisfied_mbps,mean_sum_rate_unsatisfied_mbps,jain_index,lambda_obj\n";
  for (const auto& r : rows) {
    const MetricsSummary& s = r.summary;
    out << to_string(r.precoder) << ',' << to_string(r.strategy) << ',' << fmt(r.xi_mbps) << ','
        << s.n_trials << ',' << fmt(s.congestion_prob) << ',' << fmt(s.satisfaction_prob) << ','
        << fmt(s.mean_sum_rate) << ',' << fmt(s.mean_sum_rate_satisfied) << ','
        << fmt(s.mean_sum_rate_unsatisfied) << ',' << fmt(s.jain_index) << ','
        << fmt(s.lambda_obj) << '\n';
  }
}

void write_campaign(const ExperimentConfig& cfg, const CampaignResult& result) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw Error("cannot create output directory '" + cfg.out_dir + "': " + ec.message());
  const auto write = [](const fs::path& path, auto&& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    body(out);
    if (!out) throw Error("write to '" + path.string() + "' failed");
  };
  write(fs::path(cfg.out_dir) / "trials.csv", [&](std::ostream& o) { write_trials_csv(o, result.rows); });
  write(fs::path(cfg.out_dir) / "summary.csv",
        [&](std::ostream& o) { write_summary_csv(o, result.summary); });
}

std::uint64_t dataset_seed(const ExperimentConfig& cfg, DatasetSplit split, int index) {
  const std::uint64_t offset = split == DatasetSplit::Test ? kTestSeedOffset : 0;
  return cfg.base_seed + offset + static_cast<std::uint64_t>(index);
}

std::vector<DatasetRecord> gen_dataset(const ExperimentConfig& cfg, DatasetSplit split) {
  cfg.validate();
  const int n = split == DatasetSplit::Train ? cfg.surrogate.n_train : cfg.surrogate.n_test;
  const QoSProfile qos = QoSProfile::uniform(cfg.system.n_users, cfg.surrogate.xi_mbps, cfg.omega_frac);
  const std::string label = "joint_" + std::string(to_string(cfg.surrogate.precoder));
  std::vector<DatasetRecord> out(static_cast<std::size_t>(n));

  int n_threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::clamp(n_threads, 1, std::max(n, 1));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        DatasetRecord& r = out[static_cast<std::size_t>(i)];
        r.seed = dataset_seed(cfg, split, i);
        const TrialChannel tc = draw_trial_channel(cfg, r.seed);
        const Precoder pre = make_precoder(cfg.surrogate.precoder, tc.channel.h, cfg);
        const AllocationProblem prob = AllocationProblem::from(tc.channel.h, pre, cfg.system);
        r.x = channel_features(tc.channel.h);
        r.p_star = allocate(Strategy::Joint, prob, qos).powers;
        r.strategy = label;
        r.xi = cfg.surrogate.xi_mbps;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

EvalReport evaluate_surrogate(const ExperimentConfig& cfg, const SurrogateModel& model,
                              const std::vector<DatasetRecord>& test) {
  using Clock = std::chrono::steady_clock;
  if (test.empty()) throw InvalidInput("test set is empty");
  const int k = cfg.system.n_users;
  const std::string label = "joint_" + std::string(to_string(cfg.surrogate.precoder));
  if (model.net.n_outputs() != k || model.net.n_inputs() != k * cfg.system.n_beams) {
    throw FormatError("model shape does not match the configured system");
  }

  std::vector<CMatrix> channels;
  channels.reserve(test.size());
  for (const auto& r : test) {
    if (r.strategy != label) {
      throw FormatError("test record labelled '" + r.strategy + "' but config expects '" + label + "'");
    }
    const TrialChannel tc = draw_trial_channel(cfg, r.seed);
    const Vector x = channel_features(tc.channel.h);
    if (x.size() != r.x.size() ||
        (x - r.x).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, r.x.cwiseAbs().maxCoeff())) {
      throw FormatError("test record with seed " + std::to_string(r.seed) +
                        " does not match the configured channel model");
    }
    channels.push_back(tc.channel.h);
  }
  const QoSProfile qos = QoSProfile::uniform(k, cfg.surrogate.xi_mbps, cfg.omega_frac);
  const auto n = static_cast<double>(test.size());

  // Timed passes cover only the solvers; rates are scored afterwards.
  std::vector<Vector> model_powers(test.size()), net_powers(test.size());
  std::vector<Precoder> precoders(test.size());
  const auto t0 = Clock::now();
  for (std::size_t i = 0; i < test.size(); ++i) {
    precoders[i] = make_precoder(cfg.surrogate.precoder, channels[i], cfg);
    model_powers[i] = allocate(Strategy::Joint, AllocationProblem::from(channels[i], precoders[i], cfg.system), qos).powers;
  }
  const auto t1 = Clock::now();
  EvalReport rep;
  for (std::size_t i = 0; i < test.size(); ++i) {
    bool fallback = false;
    net_powers[i] = model.predict_powers(channel_features(channels[i]), cfg.system.p_max_w, &fallback);
    rep.n_fallbacks += fallback ? 1 : 0;
  }
  const auto t2 = Clock::now();

  EvalRow model_row{"model_based", cfg.surrogate.xi_mbps,
                    std::chrono::duration<double, std::milli>(t1 - t0).count() / n, 0.0, 0.0};
  EvalRow net_row{"surrogate", cfg.surrogate.xi_mbps,
                  std::chrono::duration<double, std::milli>(t2 - t1).count() / n, 0.0, 0.0};
  for (std::size_t i = 0; i < test.size(); ++i) {
    const AllocationProblem prob = AllocationProblem::from(channels[i], precoders[i], cfg.system);
    for (auto [row, powers] : {std::pair{&model_row, &model_powers[i]}, std::pair{&net_row, &net_powers[i]}}) {
      const Vector r = prob.rates(*powers);
      row->sum_rate += r.sum() / n;
      row->satisfaction_pct +=
          100.0 * static_cast<double>(satisfied_set(r, qos.demands_mbps).size()) / (k * n);
    }
  }
  rep.rows = {model_row, net_row};
  rep.normalized_mse = normalized_mse(model, test);
  rep.n_samples = static_cast<int>(test.size());
  return rep;
}

void write_eval_csv(std::ostream& out, const EvalReport& report) {
  out << "method,qos,time_ms,sum_rate,satisfaction_pct\n";
  for (const auto& r : report.rows) {
    out << r.method << ',' << fmt(r.qos_mbps) << ',' << fmt(r.time_ms) << ',' << fmt(r.sum_rate)
        << ',' << fmt(r.satisfaction_pct) << '\n';
  }
}

}  // namespace beamalloc
