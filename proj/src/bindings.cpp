#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "beamalloc/allocators.hpp"
#include "beamalloc/channel.hpp"
#include "beamalloc/error.hpp"
#include "beamalloc/experiment.hpp"
#include "beamalloc/feasibility.hpp"
#include "beamalloc/metrics.hpp"
#include "beamalloc/precoding.hpp"
#include "beamalloc/surrogate.hpp"
#include "beamalloc/waterfill.hpp"

namespace py = pybind11;
using namespace beamalloc;

namespace {

py::dict summary_dict(const SummaryRow& s) {
  py::dict d;
  d["precoder"] = std::string(to_string(s.precoder));
  d["strategy"] = std::string(to_string(s.strategy));
  d["xi_mbps"] = s.xi_mbps;
  d["n_trials"] = s.summary.n_trials;
  d["congestion_prob"] = s.summary.congestion_prob;
  d["satisfaction_prob"] = s.summary.satisfaction_prob;
  d["mean_sum_rate_mbps"] = s.summary.mean_sum_rate;
  d["jain_index"] = s.summary.jain_index;
  d["lambda_obj"] = s.summary.lambda_obj;
  return d;
}

}  // namespace

PYBIND11_MODULE(_beamalloc, m) {
  m.doc() = "Joint power allocation for multibeam satellite downlinks";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidConfig>(m, "InvalidConfig", base.ptr());
  py::register_exception<InvalidInput>(m, "InvalidInput", base.ptr());
  py::register_exception<PrecoderSingular>(m, "PrecoderSingular", base.ptr());
  py::register_exception<DegenerateChannel>(m, "DegenerateChannel", base.ptr());
  py::register_exception<UndefinedMetric>(m, "UndefinedMetric", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<TrainingError>(m, "TrainingError", base.ptr());

  py::class_<SystemConfig>(m, "SystemConfig")
      .def(py::init<>())
      .def_readwrite("n_beams", &SystemConfig::n_beams)
      .def_readwrite("n_users", &SystemConfig::n_users)
      .def_readwrite("bandwidth_mhz", &SystemConfig::bandwidth_mhz)
      .def_readwrite("carrier_freq_ghz", &SystemConfig::carrier_freq_ghz)
      .def_readwrite("sat_height_km", &SystemConfig::sat_height_km)
      .def_readwrite("p_max_w", &SystemConfig::p_max_w)
      .def_readwrite("noise_power_w", &SystemConfig::noise_power_w)
      .def_readwrite("noise_temp_k", &SystemConfig::noise_temp_k)
      .def_readwrite("beam_radius_km", &SystemConfig::beam_radius_km)
      .def_readwrite("atmospherics_enabled", &SystemConfig::atmospherics_enabled)
      .def("validate", &SystemConfig::validate)
      .def("normalized_noise", &SystemConfig::normalized_noise);

  m.def(
      "channel",
      [](const SystemConfig& cfg, std::uint64_t seed) {
        return build_channel(drop_users(cfg, seed), cfg, seed).h;
      },
      py::arg("cfg"), py::arg("seed"), "Channel matrix H (beams x users) of one user drop.");

  py::enum_<PrecoderKind>(m, "PrecoderKind").value("ZF", PrecoderKind::ZF).value("RZF", PrecoderKind::RZF);
  py::class_<Precoder>(m, "Precoder")
      .def_readonly("w", &Precoder::w)
      .def_readonly("raw_norms", &Precoder::raw_norms)
      .def_readonly("kind", &Precoder::kind);
  m.def("make_zf", &make_zf, py::arg("h"), py::arg("condition_cap") = kDefaultConditionCap);
  m.def("make_rzf", &make_rzf, py::arg("h"), py::arg("sigma2"), py::arg("p_max"));
  m.def("gram_condition", &gram_condition);

  m.def("waterfill", py::overload_cast<const Vector&, double>(&waterfill), py::arg("inverse_gains"),
        py::arg("budget"));

  py::class_<FeasibilityReport>(m, "FeasibilityReport")
      .def_readonly("spectral_radius", &FeasibilityReport::spectral_radius)
      .def_readonly("min_powers", &FeasibilityReport::min_powers)
      .def_readonly("total_min_power", &FeasibilityReport::total_min_power)
      .def_readonly("lower_bound", &FeasibilityReport::lower_bound)
      .def_property_readonly("feasible", &FeasibilityReport::feasible);
  m.def(
      "check_feasible",
      [](const Matrix& gains, const Vector& demands, double sigma2, double bw, double p_max) {
        return check_feasible(build_demand_system(gains, demands, sigma2, bw), p_max);
      },
      py::arg("gains"), py::arg("demands_mbps"), py::arg("sigma2"), py::arg("bandwidth_mhz"),
      py::arg("p_max"));

  py::class_<AllocationProblem>(m, "AllocationProblem")
      .def(py::init([](const CMatrix& h, const Precoder& pre, const SystemConfig& cfg) {
             return AllocationProblem::from(h, pre, cfg);
           }),
           py::arg("h"), py::arg("precoder"), py::arg("cfg"))
      .def_readonly("gains", &AllocationProblem::gains)
      .def_readonly("p_max", &AllocationProblem::p_max)
      .def("rates", &AllocationProblem::rates);

  py::class_<AllocationResult>(m, "AllocationResult")
      .def_readonly("powers", &AllocationResult::powers)
      .def_readonly("rates", &AllocationResult::rates)
      .def_readonly("satisfied", &AllocationResult::satisfied)
      .def_readonly("congested", &AllocationResult::congested)
      .def_readonly("iterations", &AllocationResult::iterations)
      .def_property_readonly("sum_rate", &AllocationResult::sum_rate);

  m.def(
      "allocate",
      [](const std::string& strategy, const AllocationProblem& prob, const Vector& demands,
         double omega_frac) {
        return allocate(parse_strategy(strategy), prob, QoSProfile::from_demands(demands, omega_frac));
      },
      py::arg("strategy"), py::arg("problem"), py::arg("demands_mbps"),
      py::arg("omega_frac") = QoSProfile::kDefaultToleranceFraction);

  m.def("rates", &rates, py::arg("gains"), py::arg("powers"), py::arg("sigma2"), py::arg("bandwidth_mhz"));
  m.def("jain", &jain);
  m.def("lambda_objective", &lambda_objective);

  m.def(
      "run_campaign",
      [](const std::string& config_path, std::optional<std::string> out_dir) {
        ExperimentConfig cfg = load_config(config_path);
        CampaignResult res;
        {
          py::gil_scoped_release release;
          res = run_campaign(cfg);
        }
        if (out_dir) {
          cfg.out_dir = *out_dir;
          write_campaign(cfg, res);
        }
        py::list out;
        for (const auto& s : res.summary) out.append(summary_dict(s));
        return out;
      },
      py::arg("config_path"), py::arg("out_dir") = py::none(),
      "Runs a campaign from a config file; returns the summary rows.");

  py::class_<SurrogateModel>(m, "SurrogateModel")
      .def("predict_powers",
           [](const SurrogateModel& s, const Vector& x, double p_max) { return s.predict_powers(x, p_max); })
      .def_property_readonly("sizes", [](const SurrogateModel& s) { return s.net.sizes(); });
  m.def("load_model", &load_model);
  m.def("channel_features", &channel_features);
}
