#include <doctest.h>

#include <numbers>

#include "dodtel/models.hpp"
#include "dodtel/time_integration.hpp"

using namespace dodtel;

namespace {

struct Setup {
  CutCellMesh mesh;
  DGSpace space;
  OperatorSet ops;
  Setup(int n, int p, std::vector<Cut> cuts = {})
      : mesh(CutCellMesh::build(-std::numbers::pi, std::numbers::pi, n, std::move(cuts))),
        space(mesh, p),
        ops(build_operator_set(space)) {}
};

// Dense stage-by-stage IMEX update of y' = F y + G y with y = (rho, g);
// every implicit stage is a full linear solve.
Vector dense_imex(const Matrix& f, const Matrix& g, const Matrix& ae, const Vector& be,
                  const Matrix& ai, const Vector& bi, const Vector& y, double dt) {
  const int s = static_cast<int>(be.size());
  const int n = static_cast<int>(y.size());
  std::vector<Vector> k;
  for (int i = 0; i < s; ++i) {
    Vector rhs = y;
    for (int j = 0; j < i; ++j) rhs += dt * (ae(i, j) * f + ai(i, j) * g) * k[j];
    const Matrix a = Matrix::Identity(n, n) - dt * ai(i, i) * g;
    k.push_back(a.partialPivLu().solve(rhs));
  }
  Vector out = y;
  for (int j = 0; j < s; ++j) out += dt * (be[j] * f + bi[j] * g) * k[j];
  return out;
}

void split_matrices(const OperatorSet& ops, Pairing pr, double eps, Matrix& f, Matrix& g) {
  const auto pair = operator_pair(ops, pr);
  const int n = static_cast<int>(ops.mass.size());
  f = Matrix::Zero(2 * n, 2 * n);
  g = Matrix::Zero(2 * n, 2 * n);
  f.topRightCorner(n, n) = -pair.d_rho;
  f.bottomRightCorner(n, n) = (0.5 / eps) * (ops.Dp_symm - ops.Dm_symm);
  g.bottomLeftCorner(n, n) = -pair.d_g / (eps * eps);
  g.bottomRightCorner(n, n) = -Matrix::Identity(n, n) / (eps * eps);
}

Vector stack(const State& s) {
  Vector y(2 * s.rho.size());
  y << s.rho, s.gtilde;
  return y;
}

}  // namespace

TEST_CASE("tableau classification") {
  const ImexTableau ars = builtin_tableau("ARS443");
  CHECK(ars.stages == 5);
  CHECK(ars.type == TableauType::ARS);
  CHECK(ars.gsa);
  CHECK(ars.c_expl[2] == doctest::Approx(2.0 / 3.0));
  CHECK(ars.c_impl[2] == doctest::Approx(2.0 / 3.0));
  const ImexTableau ssp = builtin_tableau("SSP2-332");
  CHECK(ssp.type == TableauType::TypeI);
  CHECK_FALSE(ssp.gsa);
  CHECK(ssp.c_impl[1] == doctest::Approx(0.25));
  CHECK_THROWS_AS(builtin_tableau("RK4"), std::invalid_argument);
  // explicit part not strictly lower triangular
  CHECK_THROWS_AS(make_tableau("bad", Matrix::Identity(2, 2), Vector::Ones(2), Matrix::Zero(2, 2),
                               Vector::Ones(2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_tableau("bad", Matrix::Zero(2, 2), Vector::Ones(3), Matrix::Zero(2, 2),
                               Vector::Ones(2)),
                  std::invalid_argument);
}

TEST_CASE("one SSP2 step matches a dense stage-by-stage oracle") {
  // N = 4, p = 0, eps = 1, dt = 0.1
  const Setup s(4, 0);
  const ImexTableau tab = builtin_tableau("SSP2-332");
  const TelegraphSystem sys = telegraph_system(s.ops, Pairing::MinusPlus, 1.0);
  State u{Vector::LinSpaced(4, 1.0, -0.5), Vector::LinSpaced(4, 0.2, 0.9), 1.0};
  Matrix f, g;
  split_matrices(s.ops, Pairing::MinusPlus, 1.0, f, g);
  // hand-written SSP2(3,3,2) coefficients
  Matrix ae(3, 3), ai(3, 3);
  ae << 0, 0, 0, 0.5, 0, 0, 0.5, 0.5, 0;
  ai << 0.25, 0, 0, 0, 0.25, 0, 1.0 / 3, 1.0 / 3, 1.0 / 3;
  const Vector b = Vector::Constant(3, 1.0 / 3);
  const Vector ref = dense_imex(f, g, ae, b, ai, b, stack(u), 0.1);
  const State out = imex_step(sys.split, tab, u, 0.1);
  CHECK((stack(out) - ref).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("ARS443 step matches the dense oracle on a cut mesh") {
  const Setup s(8, 2, {{1, 1e-3}, {5, 0.3}});
  const ImexTableau tab = builtin_tableau("ARS443");
  const int n = s.space.num_dofs();
  for (double eps : {1.0, 0.1, 1e-3}) {
    for (Pairing pr : {Pairing::MinusPlus, Pairing::Central}) {
      const TelegraphSystem sys = telegraph_system(s.ops, pr, eps);
      const State u{Vector::LinSpaced(n, -1.0, 1.0).array().sin(),
                    Vector::LinSpaced(n, 0.0, 2.0).array().cos(), eps};
      Matrix f, g;
      split_matrices(s.ops, pr, eps, f, g);
      const Vector ref = dense_imex(f, g, tab.a_expl, tab.b_expl, tab.a_impl, tab.b_impl, stack(u), 1e-3);
      const double scale = ref.cwiseAbs().maxCoeff();
      CHECK((stack(imex_step(sys.split, tab, u, 1e-3)) - ref).cwiseAbs().maxCoeff() <= 1e-11 * scale);
      CHECK((stack(stable_ars_step(sys.split, tab, u, 1e-3)) - ref).cwiseAbs().maxCoeff() <= 1e-11 * scale);
    }
  }
}

TEST_CASE("ARS443 is third order at eps = 1") {
  const Setup s(4, 1);
  const ImexTableau tab = builtin_tableau("ARS443");
  const TelegraphSystem sys = telegraph_system(s.ops, Pairing::MinusPlus, 1.0);
  const int n = s.space.num_dofs();
  const State u0{Vector::LinSpaced(n, -1.0, 1.0), Vector::LinSpaced(n, 1.0, 0.0), 1.0};
  // classical RK4 with a tiny step as reference
  Matrix f, g;
  split_matrices(s.ops, Pairing::MinusPlus, 1.0, f, g);
  const Matrix a = f + g;
  Vector y = stack(u0);
  const int fine = 4000;
  const double h = 0.4 / fine;
  for (int k = 0; k < fine; ++k) {
    const Vector k1 = a * y, k2 = a * (y + 0.5 * h * k1), k3 = a * (y + 0.5 * h * k2), k4 = a * (y + h * k3);
    y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  double err[2];
  for (int r = 0; r < 2; ++r) {
    const int steps = 10 << r;
    State u = u0;
    for (int k = 0; k < steps; ++k) u = imex_step(sys.split, tab, u, 0.4 / steps);
    err[r] = (stack(u) - y).norm();
  }
  CHECK(std::log2(err[0] / err[1]) >= 2.7);
}

TEST_CASE("stable ARS formulation equals the textbook one") {
  const Setup s(16, 1, {{3, 1e-7}, {10, 0.3}});
  const ImexTableau tab = builtin_tableau("ARS443");
  const int n = s.space.num_dofs();
  for (double eps : {1.0, 1e-2, 1e-4, 1e-6}) {
    const TelegraphSystem sys = telegraph_system(s.ops, Pairing::MinusPlus, eps);
    State a = well_prepared_init(s.space, s.ops, Pairing::MinusPlus, [](double x) { return std::cos(x); }, eps);
    State b = a;
    for (int k = 0; k < 5; ++k) {
      a = imex_step(sys.split, tab, a, 1e-3);
      b = stable_ars_step(sys.split, tab, b, 1e-3);
    }
    CHECK((a.rho - b.rho).norm() <= 1e-11 * a.rho.norm());
    CHECK((a.gtilde - b.gtilde).norm() <= 1e-11 * a.gtilde.norm());
  }
  (void)n;
  CHECK_THROWS_AS(stable_ars_step(telegraph_system(s.ops, Pairing::MinusPlus, 1.0).split,
                                  builtin_tableau("SSP2-332"), State{}, 0.1),
                  std::invalid_argument);
}

TEST_CASE("GSA: the update satisfies the last implicit stage") {
  // GSA: b equals the last row of A in both tableaux, so u^{n+1} = U_s
  const Setup s(4, 1);
  const ImexTableau tab = builtin_tableau("ARS443");
  CHECK((tab.b_expl.transpose() - tab.a_expl.row(tab.stages - 1)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((tab.b_impl.transpose() - tab.a_impl.row(tab.stages - 1)).cwiseAbs().maxCoeff() == 0.0);
  const TelegraphSystem sys = telegraph_system(s.ops, Pairing::PlusMinus, 1.0);
  const int n = s.space.num_dofs();
  const State u{Vector::LinSpaced(n, -1.0, 1.0), Vector::LinSpaced(n, 1.0, 0.0), 1.0};
  Matrix f, g;
  split_matrices(s.ops, Pairing::PlusMinus, 1.0, f, g);
  // last stage of the oracle, computed without the b-weights
  const int st = tab.stages;
  std::vector<Vector> k;
  Vector y = stack(u), last;
  for (int i = 0; i < st; ++i) {
    Vector rhs = y;
    for (int j = 0; j < i; ++j) rhs += 0.05 * (tab.a_expl(i, j) * f + tab.a_impl(i, j) * g) * k[j];
    last = (Matrix::Identity(2 * n, 2 * n) - 0.05 * tab.a_impl(i, i) * g).partialPivLu().solve(rhs);
    k.push_back(last);
  }
  CHECK((stack(imex_step(sys.split, tab, u, 0.05)) - last).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("explicit limit step is the stability polynomial") {
  const Setup s(8, 1, {{2, 0.2}});
  const HeatSystem heat = heat_system(s.ops, Pairing::MinusPlus);
  const Vector u = s.space.project([](double x) { return std::sin(x); });
  const double dt = 1e-3;
  for (const char* name : {"ARS443", "SSP2-332"}) {
    const ImexTableau tab = builtin_tableau(name);
    // R(z) = 1 + sum_k z^k b^T A^{k-1} 1
    Vector ref = u, zu = u;
    Vector apow = Vector::Ones(tab.stages);
    for (int k = 1; k <= tab.stages; ++k) {
      zu = dt * (heat.L * zu);
      ref += tab.b_expl.dot(apow) * zu;
      apow = tab.a_expl * apow;
    }
    CHECK((explicit_limit_step(heat.L, tab, u, dt) - ref).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK((explicit_limit_step(heat.L_sparse, tab, u, dt) - ref).cwiseAbs().maxCoeff() <= 1e-13);
  }
}

TEST_CASE("implicit heat steppers") {
  const Setup s(8, 1, {{2, 0.05}});
  const Vector u = s.space.project([](double x) { return std::cos(x); });
  const int n = s.space.num_dofs();
  const HeatSystem heat = heat_system(s.ops, Pairing::MinusPlus);
  const double dt = 0.1;
  const Vector e = implicit_euler_heat_step(heat.L, u, dt);
  CHECK(((Matrix::Identity(n, n) - dt * heat.L) * e - u).cwiseAbs().maxCoeff() <= 1e-12);
  const Vector m = implicit_midpoint_heat_step(heat.L, u, dt);
  CHECK(((Matrix::Identity(n, n) - 0.5 * dt * heat.L) * m - (u + 0.5 * dt * heat.L * u))
            .cwiseAbs().maxCoeff() <= 1e-12);
  const ImplicitHeatStepper stepper(heat.L, dt, ImplicitHeatStepper::Method::Midpoint);
  CHECK((stepper.step(u) - m).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(stepper.rcond() > 0.0);
  CHECK(implicit_euler_heat_step(heat.L, u, 0.0) == u);

  // midpoint conserves the M-norm for an M-skew operator
  const Vector w = implicit_midpoint_heat_step(s.ops.Dz, u, 0.3);
  const Vector& mass = s.ops.mass;
  CHECK(w.dot(mass.cwiseProduct(w)) == doctest::Approx(u.dot(mass.cwiseProduct(u))).epsilon(1e-12));
}

TEST_CASE("invalid step parameters") {
  const Setup s(4, 0);
  const TelegraphSystem sys = telegraph_system(s.ops, Pairing::MinusPlus, 1.0);
  const State u{Vector::Ones(4), Vector::Zero(4), 1.0};
  const ImexTableau tab = builtin_tableau("ARS443");
  CHECK_THROWS_AS(imex_step(sys.split, tab, u, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(imex_step(sys.split, tab, u, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(telegraph_system(s.ops, Pairing::MinusPlus, 0.0), std::invalid_argument);
}
