#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "poisonbench/environments.hpp"
#include "poisonbench/harness.hpp"
#include "poisonbench/serialization.hpp"

namespace py = pybind11;
using namespace poisonbench;
using nlohmann::json;

namespace {

py::array_t<double> rewards_array(const MdpSpec& spec) {
  py::array_t<double> out({spec.horizon(), spec.num_states(), spec.num_actions()});
  auto view = out.mutable_unchecked<3>();
  for (int h = 0; h < spec.horizon(); ++h)
    for (int s = 0; s < spec.num_states(); ++s)
      for (int a = 0; a < spec.num_actions(); ++a) view(h, s, a) = spec.reward(h, s, a);
  return out;
}

py::array_t<double> transitions_array(const MdpSpec& spec) {
  const int S = spec.num_states();
  py::array_t<double> out({spec.horizon(), S, spec.num_actions(), S});
  auto view = out.mutable_unchecked<4>();
  for (int h = 0; h < spec.horizon(); ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < spec.num_actions(); ++a) {
        const auto row = spec.transition(h, s, a);
        for (int n = 0; n < S; ++n) view(h, s, a, n) = row[static_cast<std::size_t>(n)];
      }
  return out;
}

py::array_t<int> policy_array(const Policy& pi) {
  if (!pi.is_deterministic()) throw py::value_error("expected a deterministic policy");
  py::array_t<int> out({pi.horizon(), pi.num_states()});
  auto view = out.mutable_unchecked<2>();
  for (int h = 0; h < pi.horizon(); ++h)
    for (int s = 0; s < pi.num_states(); ++s) view(h, s) = pi.action(h, s);
  return out;
}

Policy policy_from_array(const MdpSpec& spec, const py::array_t<int, py::array::c_style | py::array::forcecast>& arr) {
  if (arr.ndim() != 2 || arr.shape(0) != spec.horizon() || arr.shape(1) != spec.num_states()) {
    throw py::value_error("policy array must have shape (H, S)");
  }
  auto view = arr.unchecked<2>();
  Policy pi = Policy::deterministic(spec.horizon(), spec.num_states(), spec.num_actions());
  for (int h = 0; h < spec.horizon(); ++h)
    for (int s = 0; s < spec.num_states(); ++s) {
      const int a = view(h, s);
      if (a < 0 || a >= spec.num_actions()) throw py::value_error("policy action out of range");
      pi.set_action(h, s, a);
    }
  return pi;
}

py::dict tables_dict(const ValueTables& t) {
  py::array_t<double> v({t.horizon() + 1, t.num_states()});
  py::array_t<double> q({t.horizon(), t.num_states(), t.num_actions()});
  auto vv = v.mutable_unchecked<2>();
  auto qv = q.mutable_unchecked<3>();
  for (int h = 0; h <= t.horizon(); ++h)
    for (int s = 0; s < t.num_states(); ++s) vv(h, s) = t.v(h, s);
  for (int h = 0; h < t.horizon(); ++h)
    for (int s = 0; s < t.num_states(); ++s)
      for (int a = 0; a < t.num_actions(); ++a) qv(h, s, a) = t.q(h, s, a);
  py::dict d;
  d["V"] = v;
  d["Q"] = q;
  return d;
}

py::object json_to_python(const json& doc) {
  return py::module_::import("json").attr("loads")(doc.dump());
}

json python_to_json(const py::object& obj) {
  if (py::isinstance<py::str>(obj)) return json::parse(obj.cast<std::string>());
  return json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Action-poisoning attack simulator core";

  py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<MdpSpec>(m, "MdpSpec")
      .def(py::init<int, int, int>(), py::arg("num_states"), py::arg("num_actions"), py::arg("horizon"))
      .def_property_readonly("num_states", &MdpSpec::num_states)
      .def_property_readonly("num_actions", &MdpSpec::num_actions)
      .def_property_readonly("horizon", &MdpSpec::horizon)
      .def_property_readonly("rewards", &rewards_array)
      .def_property_readonly("transitions", &transitions_array)
      .def_property_readonly("initial_dist",
                             [](const MdpSpec& s) {
                               const auto d = s.initial_dist();
                               return py::array_t<double>(static_cast<py::ssize_t>(d.size()), d.data());
                             })
      .def("to_json", [](const MdpSpec& s) { return mdp_to_json(s).dump(); })
      .def_static("from_json", [](const std::string& text) { return mdp_from_json(json::parse(text)); })
      .def("validate",
           [](const MdpSpec& s) {
             std::vector<std::string> out;
             for (const auto& issue : validate_mdp(s)) out.push_back(issue.message);
             return out;
           })
      .def("__eq__", [](const MdpSpec& a, const MdpSpec& b) { return a == b; });

  m.def(
      "gen_periodic_1d",
      [](int num_states, int num_actions, int horizon, std::uint64_t seed) {
        Grid1dParams p;
        p.num_states = num_states;
        p.num_actions = num_actions;
        p.horizon = horizon;
        p.seed = seed;
        return gen_periodic_1d(p);
      },
      py::arg("num_states") = 10, py::arg("num_actions") = 5, py::arg("horizon") = 10, py::arg("seed") = 0);
  m.def("gen_gridworld_2d", &gen_gridworld_2d);
  m.def("gen_random_mdp", &gen_random_mdp, py::arg("num_states"), py::arg("num_actions"), py::arg("horizon"),
        py::arg("seed"));
  m.def("two_state_fixture", &two_state_fixture);
  m.def(
      "gen_target_policy", [](const MdpSpec& spec, std::uint64_t seed) { return policy_array(gen_target_policy(spec, seed)); },
      py::arg("spec"), py::arg("seed"));
  m.def("gridworld_2d_target_policy", [] { return policy_array(gridworld_2d_target_policy()); });

  m.def("solve_optimal", [](const MdpSpec& spec) {
    const auto sol = solve_optimal(spec);
    py::dict d = tables_dict(sol.values);
    d["policy"] = policy_array(sol.policy);
    return d;
  });
  m.def("evaluate_policy", [](const MdpSpec& spec, const py::array_t<int, py::array::c_style | py::array::forcecast>& pi) {
    return tables_dict(evaluate_policy(spec, policy_from_array(spec, pi)));
  });
  m.def("minimum_gap", [](const MdpSpec& spec, const py::array_t<int, py::array::c_style | py::array::forcecast>& pi) {
    return minimum_gap(spec, policy_from_array(spec, pi));
  });
  m.def("check_target_admissible",
        [](const MdpSpec& spec, const py::array_t<int, py::array::c_style | py::array::forcecast>& pi) {
          return check_target_admissible(spec, policy_from_array(spec, pi));
        });
  m.def("build_alpha_attacked_mdp",
        [](const MdpSpec& spec, const py::array_t<int, py::array::c_style | py::array::forcecast>& pi, double alpha) {
          return build_alpha_attacked_mdp(spec, policy_from_array(spec, pi), alpha);
        });

  m.def(
      "run_experiment",
      [](const py::object& config, const std::string& run_id) {
        const ExperimentConfig cfg = experiment_from_json(python_to_json(config));
        RunResult result;
        {
          py::gil_scoped_release release;
          result = execute_experiment(cfg, nullptr, run_id);
        }
        const MetricsSeries& series = result.series;
        py::dict out;
        py::list checkpoints;
        for (const auto& c : series.checkpoints) {
          py::dict row;
          row["episodes"] = c.episodes;
          row["steps"] = c.steps;
          row["loss"] = c.loss;
          row["cost"] = c.cost;
          row["nonopt_pulls"] = c.nonopt;
          row["cum_return"] = c.cum_return;
          row["cum_optimal_value"] = c.cum_optimal_value;
          checkpoints.append(row);
        }
        out["checkpoints"] = checkpoints;
        out["sidecar"] = json_to_python(metrics_sidecar(cfg, series));
        std::ostringstream csv;
        write_metrics_csv(series, csv);
        out["csv"] = csv.str();
        if (const auto* lcbh = dynamic_cast<const LcbhAttack*>(result.attacker.get())) {
          out["lcbh_tables"] = json_to_python(lcbh_tables_to_json(lcbh->state()));
        }
        return out;
      },
      py::arg("config"), py::arg("run_id") = "run",
      "Run one experiment from a config dict or JSON string; returns checkpoints, sidecar and CSV text.");
  m.def("resolve_config", [](const py::object& config) {
    return json_to_python(experiment_to_json(experiment_from_json(python_to_json(config))));
  });
}
