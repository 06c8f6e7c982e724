// Thin pybind11 layer over the C++ library. Matrices cross the boundary as
// float64 numpy arrays (1-D arrays are treated as 1×n).

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>
#include <vector>

#include "lmo_optim/config.hpp"
#include "lmo_optim/diagnostics.hpp"
#include "lmo_optim/flops.hpp"
#include "lmo_optim/harness.hpp"
#include "lmo_optim/linalg.hpp"
#include "lmo_optim/optim.hpp"
#include "lmo_optim/theory.hpp"

namespace py = pybind11;
using namespace lmo;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() == 1) {
    const auto n = static_cast<std::size_t>(a.shape(0));
    return Matrix(1, n, std::vector<double>(a.data(), a.data() + n));
  }
  if (a.ndim() != 2) throw InvalidArgument("expected a 1-D or 2-D array");
  const auto r = static_cast<std::size_t>(a.shape(0)), c = static_cast<std::size_t>(a.shape(1));
  return Matrix(r, c, std::vector<double>(a.data(), a.data() + r * c));
}

Array to_array(const Matrix& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

Period to_period(const py::object& p) {
  if (py::isinstance<py::str>(p)) return Period::parse(p.cast<std::string>());
  return Period::finite(p.cast<long>());
}

py::dict summary_dict(const RunRecord& r) {
  py::dict d;
  const auto& s = r.summary;
  d["initial_loss"] = s.initial_loss;
  d["best_loss"] = s.best_loss;
  d["final_loss"] = s.final_loss;
  d["total_flops"] = s.total_flops;
  d["steps_completed"] = s.steps_completed;
  d["muon_steps"] = s.muon_steps;
  d["lion_steps"] = s.lion_steps;
  d["running_min_metric"] = s.running_min_metric;
  d["ok"] = r.ok();
  if (r.failure) d["failure"] = py::make_tuple(r.failure->step, r.failure->reason);
  py::list losses;
  for (const auto& row : r.rows) losses.append(py::make_tuple(row.step, row.loss, row.branch));
  d["rows"] = losses;
  return d;
}

// Stateful optimizer over a fixed, ordered set of named parameters. 2-D
// arrays take the alternating rule, 1-D arrays go to AdamW.
class PyOptimizer {
 public:
  PyOptimizer(OptimConfig cfg, const std::vector<std::pair<std::string, Array>>& params)
      : cfg_(std::move(cfg)) {
    cfg_.validate();
    for (const auto& [id, a] : params) {
      ParamGroup g;
      g.id = id;
      g.kind = a.ndim() == 1 ? ParamKind::vector1d : ParamKind::matrix2d;
      g.value = to_matrix(a);
      params_.push_back(std::move(g));
    }
    state_ = init_state(params_);
  }

  std::vector<std::string> step(const std::map<std::string, Array>& grads) {
    for (auto& p : params_) {
      auto it = grads.find(p.id);
      if (it == grads.end()) throw InvalidArgument("missing gradient for '" + p.id + "'");
      p.grad = to_matrix(it->second);
    }
    const StepReport rep = lmo::step(state_, params_, cfg_);
    std::vector<std::string> out;
    for (Branch b : rep.branches) out.push_back(to_string(b));
    return out;
  }

  py::dict params() const {
    py::dict d;
    for (const auto& p : params_) {
      Array a = to_array(p.value);
      if (p.kind == ParamKind::vector1d) a = a.reshape({static_cast<py::ssize_t>(p.value.size())});
      d[py::str(p.id)] = a;
    }
    return d;
  }

  long step_count() const { return state_.step; }

 private:
  OptimConfig cfg_;
  std::vector<ParamGroup> params_;
  OptimState state_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

  m.def("newton_schulz",
        [](const Array& x, const std::string& preset, std::optional<int> steps) {
          const NsPreset p = NsPreset::by_name(preset);
          return to_array(newton_schulz(to_matrix(x), p, steps.value_or(p.default_iterations)));
        },
        py::arg("x"), py::arg("preset") = "muon-quintic", py::arg("steps") = py::none());
  m.def("msign", [](const Array& x) { return to_array(msign(to_matrix(x))); });
  m.def("sign_elem", [](const Array& x) { return to_array(sign_elem(to_matrix(x))); });
  m.def("singular_values", [](const Array& x) { return singular_values(to_matrix(x)); });
  m.def("matrix_norm", [](const Array& x, const std::string& which) {
    return matrix_norm(to_matrix(x), norm_from_string(which));
  }, py::arg("x"), py::arg("norm"));
  m.def("lmo", [](const Array& g, const std::string& which, double radius) {
    return to_array(lmo::lmo(to_matrix(g), norm_from_string(which), radius));
  }, py::arg("g"), py::arg("norm"), py::arg("radius") = 1.0);
  m.def("alpha_ratio", [](const Array& g) { return alpha_ratio(to_matrix(g)); });
  m.def("lr_multiplier", [](long warmup, long total, double floor_fraction, long t) {
    ScheduleSpec s{warmup, total, floor_fraction};
    s.validate();
    return lr_multiplier(s, t);
  }, py::arg("warmup_steps"), py::arg("total_steps"), py::arg("floor_fraction"), py::arg("t"));
  m.def("hb_equivalent_lr", &hb_equivalent_lr, py::arg("eta_ema"), py::arg("beta"));

  m.def("phi_exact", &theory::phi_exact, py::arg("P"), py::arg("rL"), py::arg("rRho"),
        py::arg("kappa"), py::arg("K_NS") = 5);
  m.def("phi_approx", &theory::phi_approx, py::arg("P"), py::arg("rL"), py::arg("rRho"),
        py::arg("kappa"));
  m.def("scan_optimal_P",
        [](double rL, double rRho, double kappa, int K, long P_max, const std::string& form) {
          const auto s = theory::scan_optimal_P(rL, rRho, kappa, K, P_max,
                                                theory::phi_form_from_string(form));
          py::dict d;
          d["P_star"] = s.P_star;
          d["label"] = theory::to_string(s.label);
          d["phi"] = s.phi;
          d["phi_limit"] = s.phi_limit;
          return d;
        },
        py::arg("rL"), py::arg("rRho"), py::arg("kappa"), py::arg("K_NS") = 5,
        py::arg("P_max") = 20, py::arg("form") = "exact");

  m.def("matmul_flops", &flops::matmul_flops);
  m.def("ns_flops", &flops::ns_flops, py::arg("m"), py::arg("n"), py::arg("K"));
  m.def("train_step_flops", [](const std::string& shape) {
    return flops::train_step_flops(flops::shape_by_name(shape));
  });
  m.def("ns_share", [](const std::string& shape, int K) {
    return flops::ns_share(flops::shape_by_name(shape), K);
  }, py::arg("shape"), py::arg("K") = 5);
  m.def("optimizer_amortized_flops", [](const std::string& shape, const py::object& period, int K) {
    return flops::optimizer_amortized_flops(flops::shape_by_name(shape), to_period(period), K);
  }, py::arg("shape"), py::arg("period"), py::arg("K") = 5);

  m.def("config_reference", &config_reference);
  m.def("theory_report_json", [](const std::string& text) {
    const ConfigDoc doc = parse_config_text(text);
    if (doc.kind != ConfigKind::theory) throw InvalidArgument("config kind is not theory");
    return theory_report_json(doc.theory);
  });
  m.def("flops_report_json", [](const std::string& text) {
    const ConfigDoc doc = parse_config_text(text);
    if (doc.kind != ConfigKind::flops) throw InvalidArgument("config kind is not flops");
    return flops_report_json(doc.flops);
  });
  m.def("run", [](const std::string& text) {
    const ConfigDoc doc = parse_config_text(text);
    if (doc.kind != ConfigKind::run) throw InvalidArgument("config kind is not run");
    RunRecord rec;
    {
      py::gil_scoped_release release;
      rec = run_training(doc.run);
    }
    return summary_dict(rec);
  }, py::arg("config_text"), "Run a training config given as JSON text; returns a summary dict.");

  py::class_<PyOptimizer>(m, "LionMuon")
      .def(py::init([](const std::vector<std::pair<std::string, Array>>& params,
                       const py::object& period, double eta_muon, double eta_lion, double beta1,
                       double beta2, double weight_decay, const std::string& ns_preset,
                       std::optional<int> ns_steps, double adamw_lr, long total_steps) {
             OptimConfig c;
             c.period = to_period(period);
             c.eta_muon = eta_muon;
             c.eta_lion = eta_lion;
             c.beta1 = beta1;
             c.beta2 = beta2;
             c.weight_decay = weight_decay;
             c.ns_preset = NsPreset::by_name(ns_preset);
             c.ns_steps = ns_steps.value_or(c.ns_preset.default_iterations);
             c.adamw.lr = adamw_lr;
             c.schedule = ScheduleSpec::constant(total_steps);
             return PyOptimizer(c, params);
           }),
           py::arg("params"), py::arg("period") = 1, py::arg("eta_muon") = 1e-2,
           py::arg("eta_lion") = 1e-4, py::arg("beta1") = 0.9, py::arg("beta2") = 0.99,
           py::arg("weight_decay") = 0.0, py::arg("ns_preset") = "muon-quintic",
           py::arg("ns_steps") = py::none(), py::arg("adamw_lr") = 1e-3,
           py::arg("total_steps") = 1000000)
      .def("step", &PyOptimizer::step, py::arg("grads"),
           "Apply one step; returns the branch taken per parameter.")
      .def_property_readonly("params", &PyOptimizer::params)
      .def_property_readonly("step_count", &PyOptimizer::step_count);
}
