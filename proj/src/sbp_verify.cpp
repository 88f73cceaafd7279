#include "dodtel/sbp_verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace dodtel {

namespace {

void require_square(const Matrix& m, const Matrix& d, const char* what) {
  if (d.rows() != d.cols() || m.rows() != d.rows() || m.cols() != d.cols()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
  }
}

void require_mass(const Vector& mass, const Matrix& d, const char* what) {
  if (d.rows() != d.cols() || mass.size() != d.rows()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
  }
}

}  // namespace

double check_periodic_sbp(const Matrix& m, const Matrix& d) {
  require_square(m, d, "check_periodic_sbp");
  const Matrix md = m * d;
  return max_abs(md + md.transpose());
}

double check_periodic_sbp(const Vector& mass, const Matrix& d) {
  require_mass(mass, d, "check_periodic_sbp");
  const Matrix md = mass.asDiagonal() * d;
  return max_abs(md + md.transpose());
}

std::pair<double, double> check_upwind_sbp(const Matrix& m, const Matrix& dp,
                                           const Matrix& dm) {
  require_square(m, dp, "check_upwind_sbp");
  require_square(m, dm, "check_upwind_sbp");
  const double duality = max_abs(m * dp + dm.transpose() * m);
  return {duality, max_symmetric_eigenvalue(m * (dp - dm))};
}

std::pair<double, double> check_upwind_sbp(const Vector& mass, const Matrix& dp,
                                           const Matrix& dm) {
  require_mass(mass, dp, "check_upwind_sbp");
  require_mass(mass, dm, "check_upwind_sbp");
  const auto m = mass.asDiagonal();
  const double duality = max_abs(m * dp + dm.transpose() * m);
  return {duality, max_symmetric_eigenvalue(m * (dp - dm))};
}

double energy_derivative(const OperatorSet& ops, Pairing pairing, double epsilon,
                         const Vector& rho, const Vector& gtilde) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("energy_derivative: need epsilon > 0");
  const auto [d_rho, d_g] = operator_pair(ops, pairing);
  const Vector rho_dot = -d_rho * gtilde;
  // eps^2 g_t = -D^g rho - (eps/2)(D- - D+) g - g
  const Vector eps2_g_dot = -(d_g * rho) -
                            (0.5 * epsilon) * ((ops.Dm_symm - ops.Dp_symm) * gtilde) -
                            gtilde;
  const Vector& m = ops.mass;
  return 2.0 * rho.dot(m.cwiseProduct(rho_dot)) +
         2.0 * gtilde.dot(m.cwiseProduct(eps2_g_dot));
}

double check_energy_decay(const OperatorSet& ops, Pairing pairing, double epsilon,
                          int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Index n = ops.mass.size();
  const double eps2 = epsilon * epsilon;
  double worst = -std::numeric_limits<double>::infinity();
  Vector rho(n), g(n);
  for (int t = 0; t < trials; ++t) {
    for (Eigen::Index i = 0; i < n; ++i) rho[i] = normal(rng);
    for (Eigen::Index i = 0; i < n; ++i) g[i] = normal(rng);
    const double e = rho.dot(ops.mass.cwiseProduct(rho)) +
                     eps2 * g.dot(ops.mass.cwiseProduct(g));
    worst = std::max(worst, energy_derivative(ops, pairing, epsilon, rho, g) / e);
  }
  return trials > 0 ? worst : 0.0;
}

double check_p0_closed_form(const DGSpace& space, double eta) {
  if (space.degree() != 0) throw std::invalid_argument("check_p0_closed_form: requires p = 0");
  const CutCellMesh& mesh = space.mesh();
  if (mesh.small_cells().size() != 1) {
    throw std::invalid_argument("check_p0_closed_form: requires exactly one small cell");
  }
  const int c = mesh.small_cells().front();
  const int n = mesh.num_cells();
  const double dx = mesh.background_dx();
  const double alpha = mesh.fraction(c);
  // The closed form assumes the partner of the cut sits downstream (c+1).
  if (std::abs(mesh.cell_size(c + 1) - (1.0 - alpha) * dx) > 1e-12 * dx) {
    throw std::invalid_argument("check_p0_closed_form: small cell must precede its partner");
  }

  EtaMap eta_map{{c, eta}};
  const OperatorSet ops = build_operator_set(space, eta_map);

  // Closed forms, rows in units of 1/dx. Upwind D^-: u_t + D^- u = 0 moves right.
  Matrix dm = Matrix::Zero(n, n);
  Matrix dp = Matrix::Zero(n, n);
  Vector mass = Vector::Constant(n, dx);
  mass[c] = alpha * dx;
  mass[mesh.wrap(c + 1)] = (1.0 - alpha) * dx;
  for (int i = 0; i < n; ++i) {
    dm(i, i) = 1.0 / dx;
    dm(i, mesh.wrap(i - 1)) = -1.0 / dx;
    dp(i, i) = -1.0 / dx;
    dp(i, mesh.wrap(i + 1)) = 1.0 / dx;
  }
  const int cm = mesh.wrap(c - 1);
  const int c1 = mesh.wrap(c + 1);
  const int c2 = mesh.wrap(c + 2);
  // D^- rows c, c+1
  dm.row(c).setZero();
  dm(c, cm) = (eta - 1.0) / (alpha * dx);
  dm(c, c) = (1.0 - eta) / (alpha * dx);
  dm.row(c1).setZero();
  dm(c1, cm) = -eta / ((1.0 - alpha) * dx);
  dm(c1, c) = (eta - 1.0) / ((1.0 - alpha) * dx);
  dm(c1, c1) = 1.0 / ((1.0 - alpha) * dx);
  // D^+ rows c-1, c, c+1
  dp.row(cm).setZero();
  dp(cm, cm) = -1.0 / dx;
  dp(cm, c) = (1.0 - eta) / dx;
  dp(cm, c1) = eta / dx;
  dp.row(c).setZero();
  dp(c, c) = (eta - 1.0) / (alpha * dx);
  dp(c, c1) = (1.0 - eta) / (alpha * dx);
  dp.row(c1).setZero();
  dp(c1, c1) = -1.0 / ((1.0 - alpha) * dx);
  dp(c1, c2) = 1.0 / ((1.0 - alpha) * dx);

  auto rel = [](const Matrix& got, const Matrix& want) {
    double worst = 0.0;
    const double floor = want.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < want.rows(); ++i) {
      for (Eigen::Index j = 0; j < want.cols(); ++j) {
        const double scale = want(i, j) != 0.0 ? std::abs(want(i, j)) : floor;
        worst = std::max(worst, std::abs(got(i, j) - want(i, j)) / scale);
      }
    }
    return worst;
  };
  return std::max({rel(ops.Dm_naive, dm), rel(ops.Dp_naive, dp),
                   rel(Matrix(ops.mass.asDiagonal()), Matrix(mass.asDiagonal()))});
}

SBPReport sbp_report(const OperatorSet& ops, Pairing pairing, double epsilon,
                     int trials, std::uint64_t seed) {
  SBPReport report;
  report.skew_residual = check_periodic_sbp(ops.mass, ops.Dz);
  const auto [duality, eig] = check_upwind_sbp(ops.mass, ops.Dp_symm, ops.Dm_symm);
  report.duality_residual = duality;
  report.max_dissipation_eigenvalue = eig;
  report.energy_derivative_bound = check_energy_decay(ops, pairing, epsilon, trials, seed);
  return report;
}

}  // namespace dodtel
