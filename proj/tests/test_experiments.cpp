#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <sstream>

#include "dodtel/experiments.hpp"
#include "dodtel/models.hpp"

using namespace dodtel;

TEST_CASE("weighted condition number against a direct SVD") {
  Matrix a(3, 3);
  a << 2, -1, 0, -1, 2, -1, 0.5, -1, 3;
  Vector m(3);
  m << 0.1, 1.0, 2.5;
  const Vector s = m.cwiseSqrt();
  const Matrix b = s.asDiagonal() * a * s.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Matrix> svd(b);
  const double ref = svd.singularValues()(0) / svd.singularValues()(2);
  CHECK(weighted_condition_number(a, m) == doctest::Approx(ref).epsilon(1e-12));
  CHECK(weighted_condition_number(a, Matrix(m.asDiagonal())) == doctest::Approx(ref).epsilon(1e-12));
  CHECK(std::isinf(weighted_condition_number(Matrix::Zero(3, 3), m)));
}

TEST_CASE("reference condition numbers") {
  CHECK(reference_condition_number("background", Pairing::MinusPlus, 0) == 1.0318);
  CHECK(reference_condition_number("dod", Pairing::MinusPlus, 0) == 1.0579);
  CHECK(reference_condition_number("unstabilized", Pairing::MinusPlus, 1) == 3.5257e12);
  CHECK(reference_condition_number("unstabilized", Pairing::Central, 1) == 7.9578e12);
  CHECK(reference_condition_number("dod", Pairing::Central, 1) == 1.0891);
}

TEST_CASE("step-size rules") {
  CHECK(heat_implicit_dt(1, 0.3) == doctest::Approx(0.01));
  CHECK(condition_dt(0, 0.1, 1.0) == doctest::Approx(0.01 / 20.0));
  CHECK(condition_dt(2, 0.1, 2.0) == doctest::Approx(0.01 / 200.0));
  CHECK(parabolic_dt(1, 0.1) < parabolic_dt(0, 0.1));
  CHECK(convergence_dt(0, 1e-3, 0.1) < convergence_dt(0, 1e-1, 0.1));
}

TEST_CASE("config validation") {
  ExperimentConfig c = default_config(ExperimentKind::Convergence);
  CHECK_NOTHROW(validate(c));
  c.alphas = {0.5};
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
  c = default_config(ExperimentKind::Asymptotic);
  c.cells = {2};
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
  c = default_config(ExperimentKind::Asymptotic);
  c.tableaux = {"nope"};
  CHECK_THROWS(validate(c));
  CHECK(parse_experiment("heat-implicit") == ExperimentKind::HeatImplicit);
  CHECK(to_string(ExperimentKind::SbpCheck) == "sbp-check");
}

TEST_CASE("result table CSV and JSON") {
  ResultTable t;
  t.experiment = "demo";
  t.columns = {"name", "n", "x"};
  t.add_row({std::string("a"), std::int64_t{3}, 0.1});
  t.add_row({std::string("b"), std::int64_t{4}, std::nan("")});
  t.verdicts.push_back({"check", true, ""});
  CHECK(t.passed());
  CHECK(t.number(0, "x") == 0.1);
  CHECK(t.text(1, "name") == "b");
  CHECK_THROWS_AS(t.column("missing"), std::out_of_range);
  CHECK_THROWS(t.add_row({0.0}));

  std::ostringstream csv;
  t.write_csv(csv);
  CHECK(csv.str().find("name,n,x\n") == 0);
  CHECK(csv.str().find("a,3,0.10000000000000001") != std::string::npos);

  std::ostringstream js;
  t.write_json(js);
  const auto j = nlohmann::json::parse(js.str());
  CHECK(j["experiment"] == "demo");
  CHECK(j["rows"][0]["x"].get<double>() == 0.1);
  CHECK(j["rows"][1]["x"].is_string());
  CHECK(j["verdicts"][0]["passed"] == true);

  t.verdicts.push_back({"other", false, ""});
  CHECK_FALSE(t.passed());
}

TEST_CASE("sbp sweep passes and is deterministic") {
  ExperimentConfig c = default_config(ExperimentKind::SbpCheck);
  c.degrees = {0, 2};
  c.energy_trials = 10;
  const ResultTable a = run_experiment(c);
  const ResultTable b = run_experiment(c);
  CHECK(a.passed());
  REQUIRE(a.rows.size() == b.rows.size());
  // bitwise, NaN included
  auto same = [](const Cell& x, const Cell& y) {
    if (x.index() != y.index()) return false;
    if (const double* d = std::get_if<double>(&x))
      return std::memcmp(d, &std::get<double>(y), sizeof(double)) == 0;
    return x == y;
  };
  for (std::size_t r = 0; r < a.rows.size(); ++r)
    for (std::size_t c = 0; c < a.rows[r].size(); ++c) CHECK(same(a.rows[r][c], b.rows[r][c]));
}

TEST_CASE("small asymptotic sweep decreases with eps") {
  ExperimentConfig c = default_config(ExperimentKind::Asymptotic);
  c.degrees = {1};
  c.pairings = {Pairing::MinusPlus};
  c.epsilons = {1e-1, 1e-2, 1e-3};
  c.tableaux = {"ARS443"};
  const ResultTable t = run_asymptotic(c);
  CHECK(t.passed());
}

TEST_CASE("heat convergence variant") {
  ExperimentConfig c = default_config(ExperimentKind::Convergence);
  c.heat_limit = true;
  c.degrees = {1};
  c.pairings = {Pairing::MinusPlus};
  c.cells = {16, 32};
  c.t_final = 0.1;
  const ResultTable t = run_convergence(c);
  CHECK(t.passed());
  CHECK(t.number(1, "eoc_rho") >= 1.8);
}

TEST_CASE("operator dump") {
  const auto mesh = CutCellMesh::build(0.0, 1.0, 4, {{1, 0.2}});
  const OperatorSet ops = build_operator_set(DGSpace(mesh, 1));
  const auto dir = std::filesystem::temp_directory_path() / "dodtel_dump_test";
  std::filesystem::remove_all(dir);
  dump_operators(ops, dir.string());
  std::ifstream in(dir / "Dz.csv");
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 10);
  CHECK(std::filesystem::exists(dir / "M.csv"));
  CHECK(std::filesystem::exists(dir / "Ddiss.csv"));
  std::filesystem::remove_all(dir);
}
