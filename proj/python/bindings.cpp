#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "dodtel/experiments.hpp"
#include "dodtel/models.hpp"
#include "dodtel/sbp_verify.hpp"
#include "dodtel/time_integration.hpp"

namespace py = pybind11;
using namespace dodtel;

namespace {

std::vector<Cut> to_cuts(const std::vector<std::tuple<int, double, std::string>>& cuts) {
  std::vector<Cut> out;
  for (const auto& [index, alpha, side] : cuts) {
    if (side != "left" && side != "right") throw py::value_error("cut side must be 'left' or 'right'");
    out.push_back({index, alpha, side == "left" ? CutSide::SmallLeft : CutSide::SmallRight});
  }
  return out;
}

py::dict table_to_dict(const ResultTable& t) {
  py::dict d;
  d["experiment"] = t.experiment;
  d["columns"] = t.columns;
  py::list rows;
  for (const auto& row : t.rows) {
    py::dict r;
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::visit([&](const auto& v) { r[py::str(t.columns[c])] = v; }, row[c]);
    }
    rows.append(r);
  }
  d["rows"] = rows;
  d["metadata"] = t.metadata;
  py::list verdicts;
  for (const auto& v : t.verdicts) {
    verdicts.append(py::dict(py::arg("name") = v.name, py::arg("passed") = v.passed,
                             py::arg("detail") = v.detail));
  }
  d["verdicts"] = verdicts;
  d["passed"] = t.passed();
  std::ostringstream csv;
  t.write_csv(csv);
  d["csv"] = csv.str();
  return d;
}

}  // namespace

PYBIND11_MODULE(_dodtel, m) {
  m.doc() = "DoD-stabilized cut-cell DG operators for the telegraph equation";

  py::enum_<Pairing>(m, "Pairing")
      .value("MinusPlus", Pairing::MinusPlus)
      .value("PlusMinus", Pairing::PlusMinus)
      .value("Central", Pairing::Central);
  py::enum_<FluxKind>(m, "FluxKind")
      .value("Upwind", FluxKind::Upwind)
      .value("Downwind", FluxKind::Downwind)
      .value("Central", FluxKind::Central);
  m.def("parse_pairing", [](const std::string& s) { return parse_pairing(s); });

  py::class_<CutCellMesh>(m, "CutCellMesh")
      .def_static(
          "build",
          [](double left, double right, int n, const std::vector<std::tuple<int, double, std::string>>& cuts) {
            return CutCellMesh::build(left, right, n, to_cuts(cuts));
          },
          py::arg("left"), py::arg("right"), py::arg("n_background"),
          py::arg("cuts") = std::vector<std::tuple<int, double, std::string>>{},
          "cuts: list of (background index, alpha, 'left'|'right')")
      .def_property_readonly("vertices", &CutCellMesh::vertices)
      .def_property_readonly("cell_sizes", &CutCellMesh::cell_sizes)
      .def_property_readonly("small_cells", &CutCellMesh::small_cells)
      .def_property_readonly("background_dx", &CutCellMesh::background_dx)
      .def_property_readonly("num_cells", &CutCellMesh::num_cells)
      .def_property_readonly("length", &CutCellMesh::length);

  m.def("experiment_mesh",
        [](int n, const std::vector<double>& alphas) { return experiment_mesh(n, alphas); },
        py::arg("n_background"), py::arg("alphas"));

  py::class_<DGSpace>(m, "DGSpace")
      .def(py::init<CutCellMesh, int>(), py::arg("mesh"), py::arg("degree"))
      .def_property_readonly("degree", &DGSpace::degree)
      .def_property_readonly("num_dofs", &DGSpace::num_dofs)
      .def_property_readonly("mass", &DGSpace::mass_diagonal)
      .def("nodes", &DGSpace::physical_nodes)
      .def("project", &DGSpace::project)
      .def("l2_error", &DGSpace::l2_error, py::arg("u"), py::arg("exact"), py::arg("quad_boost") = 4)
      .def("evaluate_extension", &DGSpace::evaluate_extension)
      .def("jump_and_mean", &DGSpace::jump_and_mean);

  py::class_<OperatorSet>(m, "OperatorSet")
      .def_readonly("mass", &OperatorSet::mass)
      .def_readonly("M", &OperatorSet::M)
      .def_readonly("Dz", &OperatorSet::Dz)
      .def_readonly("Dp_symm", &OperatorSet::Dp_symm)
      .def_readonly("Dm_symm", &OperatorSet::Dm_symm)
      .def_readonly("Dp_naive", &OperatorSet::Dp_naive)
      .def_readonly("Dm_naive", &OperatorSet::Dm_naive)
      .def_readonly("Ddiss", &OperatorSet::Ddiss)
      .def_readonly("eta", &OperatorSet::eta)
      .def("pair", [](const OperatorSet& ops, Pairing p) {
        const auto pair = operator_pair(ops, p);
        return py::make_tuple(Matrix(pair.d_rho), Matrix(pair.d_g));
      });

  m.def("default_eta", &default_eta);
  m.def(
      "build_operator_set",
      [](const DGSpace& space, std::optional<EtaMap> eta) {
        return eta ? build_operator_set(space, *eta) : build_operator_set(space);
      },
      py::arg("space"), py::arg("eta") = std::nullopt);
  m.def("assemble_background", &assemble_background);

  m.def("check_periodic_sbp", py::overload_cast<const Matrix&, const Matrix&>(&check_periodic_sbp));
  m.def("check_upwind_sbp",
        py::overload_cast<const Matrix&, const Matrix&, const Matrix&>(&check_upwind_sbp));
  m.def("check_energy_decay", &check_energy_decay, py::arg("ops"), py::arg("pairing"),
        py::arg("epsilon"), py::arg("trials"), py::arg("seed"));
  m.def("check_p0_closed_form", &check_p0_closed_form);

  py::class_<ImexTableau>(m, "ImexTableau")
      .def_readonly("name", &ImexTableau::name)
      .def_readonly("stages", &ImexTableau::stages)
      .def_readonly("a_expl", &ImexTableau::a_expl)
      .def_readonly("a_impl", &ImexTableau::a_impl)
      .def_readonly("b_expl", &ImexTableau::b_expl)
      .def_readonly("b_impl", &ImexTableau::b_impl)
      .def_readonly("gsa", &ImexTableau::gsa)
      .def_property_readonly("type", [](const ImexTableau& t) { return std::string(to_string(t.type)); });
  m.def("builtin_tableau", [](const std::string& name) { return builtin_tableau(name); });

  py::class_<State>(m, "State")
      .def(py::init([](Vector rho, Vector g, double eps) { return State{rho, g, eps}; }),
           py::arg("rho"), py::arg("gtilde"), py::arg("epsilon"))
      .def_readwrite("rho", &State::rho)
      .def_readwrite("gtilde", &State::gtilde)
      .def_readwrite("epsilon", &State::epsilon);

  py::class_<TelegraphSystem>(m, "TelegraphSystem")
      .def_readonly("epsilon", &TelegraphSystem::epsilon)
      .def("rhs", &TelegraphSystem::rhs)
      .def("imex_step", [](const TelegraphSystem& s, const ImexTableau& t, const State& u,
                           double dt) { return imex_step(s.split, t, u, dt); })
      .def("stable_ars_step", [](const TelegraphSystem& s, const ImexTableau& t, const State& u,
                                 double dt) { return stable_ars_step(s.split, t, u, dt); });
  m.def("telegraph_system", &telegraph_system);
  m.def("heat_operator", [](const OperatorSet& ops, Pairing p) { return heat_system(ops, p).L; });
  m.def("explicit_limit_step",
        py::overload_cast<const Matrix&, const ImexTableau&, const Vector&, double>(&explicit_limit_step));
  m.def("implicit_euler_heat_step", &implicit_euler_heat_step);
  m.def("implicit_midpoint_heat_step", &implicit_midpoint_heat_step);
  m.def("well_prepared_init", &well_prepared_init);
  m.def("energy", &energy);
  m.def("exact_telegraph", [](double eps) {
    const auto ex = exact_telegraph(eps);
    return py::make_tuple(ex.r, py::cpp_function([ex](double x, double t) { return ex.rho(x, t); }),
                          py::cpp_function([ex](double x, double t) { return ex.gtilde(x, t); }));
  });

  m.def("weighted_condition_number",
        py::overload_cast<const Matrix&, const Matrix&>(&weighted_condition_number));

  m.def(
      "run_experiment",
      [](const std::string& kind, py::kwargs kwargs) {
        ExperimentConfig c = default_config(parse_experiment(kind));
        for (auto item : kwargs) {
          const auto key = item.first.cast<std::string>();
          const auto value = py::reinterpret_borrow<py::object>(item.second);
          if (key == "degrees") c.degrees = value.cast<std::vector<int>>();
          else if (key == "pairings") {
            c.pairings.clear();
            for (const auto& s : value.cast<std::vector<std::string>>()) c.pairings.push_back(parse_pairing(s));
          } else if (key == "cells") c.cells = value.cast<std::vector<int>>();
          else if (key == "alphas") c.alphas = value.cast<std::vector<double>>();
          else if (key == "epsilons") c.epsilons = value.cast<std::vector<double>>();
          else if (key == "tableaux") c.tableaux = value.cast<std::vector<std::string>>();
          else if (key == "t_final") c.t_final = value.cast<double>();
          else if (key == "seed") c.seed = value.cast<std::uint64_t>();
          else if (key == "heat_limit") c.heat_limit = value.cast<bool>();
          else if (key == "energy_trials") c.energy_trials = value.cast<int>();
          else throw py::key_error("unknown option '" + key + "'");
        }
        ResultTable table;
        {
          py::gil_scoped_release release;
          table = run_experiment(c);
        }
        return table_to_dict(table);
      },
      py::arg("kind"));
}
