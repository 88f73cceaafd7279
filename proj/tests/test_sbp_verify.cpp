#include <doctest.h>

#include <numbers>

#include "dodtel/models.hpp"
#include "dodtel/sbp_verify.hpp"

using namespace dodtel;

TEST_CASE("background DG operators are periodic SBP") {
  const auto mesh = CutCellMesh::build(0.0, 1.0, 8);
  for (int p = 0; p <= 3; ++p) {
    const DGSpace space(mesh, p);
    const Matrix dz = assemble_background(space, FluxKind::Central);
    const Matrix dp = assemble_background(space, FluxKind::Downwind);
    const Matrix dm = assemble_background(space, FluxKind::Upwind);
    CHECK(check_periodic_sbp(space.mass_diagonal(), dz) <= kSbpTolerance);
    CHECK(check_periodic_sbp(assemble_mass(space), dz) <= kSbpTolerance);
    const auto [dual, lam] = check_upwind_sbp(space.mass_diagonal(), dp, dm);
    CHECK(dual <= kSbpTolerance);
    CHECK(lam <= kSbpTolerance);
    // the upwind operator alone is not skew
    CHECK(check_periodic_sbp(space.mass_diagonal(), dm) > 1e-3);
  }
}

TEST_CASE("naive DoD pair is not dual for p >= 1, symmetrized pair is") {
  const auto mesh = CutCellMesh::build(0.0, 1.0, 8, {{3, 0.1}});
  const DGSpace space(mesh, 1);
  const OperatorSet ops = build_operator_set(space);
  CHECK(check_upwind_sbp(ops.M, ops.Dp_naive, ops.Dm_naive).first > 1e-6);
  CHECK(check_upwind_sbp(ops.M, ops.Dp_symm, ops.Dm_symm).first <= kSbpTolerance);
}

TEST_CASE("energy derivative agrees with the semidiscrete right-hand side") {
  const auto mesh = CutCellMesh::build(-std::numbers::pi, std::numbers::pi, 8, {{2, 1e-3}, {6, 0.3}});
  const DGSpace space(mesh, 2);
  const OperatorSet ops = build_operator_set(space);
  const int n = space.num_dofs();
  const Vector rho = Vector::LinSpaced(n, 0.0, 3.0).array().cos();
  const Vector g = Vector::LinSpaced(n, 1.0, -2.0).array().sin();
  for (Pairing pr : {Pairing::MinusPlus, Pairing::PlusMinus, Pairing::Central}) {
    for (double eps : {1.0, 0.1}) {
      const TelegraphSystem sys = telegraph_system(ops, pr, eps);
      const State d = sys.rhs(State{rho, g, eps});
      const Vector& m = ops.mass;
      const double ref = 2.0 * rho.dot(m.cwiseProduct(d.rho)) +
                         2.0 * eps * eps * g.dot(m.cwiseProduct(d.gtilde));
      CHECK(energy_derivative(ops, pr, eps, rho, g) == doctest::Approx(ref).epsilon(1e-12));
      CHECK(energy_derivative(ops, pr, eps, rho, g) <= 0.0);
    }
  }
}

TEST_CASE("energy decay over random states is deterministic") {
  const auto mesh = CutCellMesh::build(0.0, 1.0, 8, {{1, 1e-7}, {5, 0.49}});
  const OperatorSet ops = build_operator_set(DGSpace(mesh, 2));
  const double a = check_energy_decay(ops, Pairing::MinusPlus, 1e-3, 50, 7);
  const double b = check_energy_decay(ops, Pairing::MinusPlus, 1e-3, 50, 7);
  CHECK(a == b);
  CHECK(a <= kEnergyTolerance);
  const SBPReport r = sbp_report(ops, Pairing::Central, 1.0, 20, 1);
  CHECK(r.passed());
}

TEST_CASE("p = 0 closed form") {
  for (auto [alpha, eta] : {std::pair{0.3, 0.7}, std::pair{1e-3, 1.0 - 1e-3}, std::pair{0.2, 0.0}}) {
    const auto mesh = CutCellMesh::build(0.0, 1.0, 10, {{4, alpha}});
    const DGSpace space(mesh, 0);
    CHECK(check_p0_closed_form(space, eta) <= 1e-14);
  }
  const auto two = CutCellMesh::build(0.0, 1.0, 10, {{2, 0.3}, {6, 0.3}});
  CHECK_THROWS(check_p0_closed_form(DGSpace(two, 0), 0.5));
  const auto one = CutCellMesh::build(0.0, 1.0, 10, {{2, 0.3}});
  CHECK_THROWS(check_p0_closed_form(DGSpace(one, 1), 0.5));
}
