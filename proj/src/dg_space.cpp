#include "dodtel/dg_space.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dodtel {

namespace {

// Legendre P_n(x) and its derivative by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0;
  double p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  const double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

}  // namespace

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need n >= 1");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  if (n == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = 2.0;
    return rule;
  }
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const auto [p, dp] = legendre(n, x);
    (void)p;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // ascending order
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

double lagrange(std::span<const double> nodes, int j, double xi) {
  double value = 1.0;
  for (int m = 0; m < static_cast<int>(nodes.size()); ++m) {
    if (m == j) continue;
    value *= (xi - nodes[m]) / (nodes[j] - nodes[m]);
  }
  return value;
}

double lagrange_derivative(std::span<const double> nodes, int j, double xi) {
  const int n = static_cast<int>(nodes.size());
  double sum = 0.0;
  for (int m = 0; m < n; ++m) {
    if (m == j) continue;
    double term = 1.0 / (nodes[j] - nodes[m]);
    for (int k = 0; k < n; ++k) {
      if (k == j || k == m) continue;
      term *= (xi - nodes[k]) / (nodes[j] - nodes[k]);
    }
    sum += term;
  }
  return sum;
}

DGSpace::DGSpace(CutCellMesh mesh, int degree)
    : mesh_(std::move(mesh)), degree_(degree) {
  if (degree < 0) throw std::invalid_argument("DGSpace: degree must be >= 0");
  if (degree > 10) throw std::invalid_argument("DGSpace: degree above 10 is not supported");
  rule_ = gauss_legendre(degree + 1);
  const int n = nodes_per_cell();
  reference_derivative_.resize(n, n);
  for (int q = 0; q < n; ++q) {
    for (int j = 0; j < n; ++j) {
      reference_derivative_(q, j) = lagrange_derivative(rule_.nodes, j, rule_.nodes[q]);
    }
  }
  mass_.resize(num_dofs());
  for (int c = 0; c < num_cells(); ++c) {
    const double half = 0.5 * mesh_.cell_size(c);
    for (int k = 0; k < n; ++k) mass_[dof(c, k)] = half * rule_.weights[k];
  }
}

DGSpace build_space(const CutCellMesh& mesh, int degree) {
  return DGSpace(mesh, degree);
}

double DGSpace::physical_node(int cell, int k) const {
  return mesh_.cell_center(cell) + 0.5 * mesh_.cell_size(cell) * rule_.nodes[k];
}

Vector DGSpace::physical_nodes() const {
  Vector x(num_dofs());
  for (int c = 0; c < num_cells(); ++c) {
    for (int k = 0; k < nodes_per_cell(); ++k) x[dof(c, k)] = physical_node(c, k);
  }
  return x;
}

double DGSpace::to_reference(int cell, double x) const {
  const double center = mesh_.cell_center(cell);
  const double length = mesh_.length();
  const double shift = std::round((center - x) / length) * length;
  return 2.0 * (x + shift - center) / mesh_.cell_size(cell);
}

Vector DGSpace::basis_values(double xi) const {
  Vector v(nodes_per_cell());
  for (int j = 0; j < nodes_per_cell(); ++j) v[j] = lagrange(rule_.nodes, j, xi);
  return v;
}

Vector DGSpace::basis_derivatives(int cell, double xi) const {
  const double scale = 2.0 / mesh_.cell_size(cell);
  Vector v(nodes_per_cell());
  for (int j = 0; j < nodes_per_cell(); ++j) {
    v[j] = scale * lagrange_derivative(rule_.nodes, j, xi);
  }
  return v;
}

double DGSpace::evaluate_extension(const Vector& coeffs, int cell,
                                   double x) const {
  const double xi = 2.0 * (x - mesh_.cell_center(cell)) / mesh_.cell_size(cell);
  const Vector phi = basis_values(xi);
  return phi.dot(coeffs.segment(dof(cell, 0), nodes_per_cell()));
}

std::pair<double, double> DGSpace::jump_and_mean(const Vector& u,
                                                 int interface) const {
  const int left = mesh_.wrap(interface);
  const int right = mesh_.wrap(interface + 1);
  const double ul = basis_values(1.0).dot(u.segment(dof(left, 0), nodes_per_cell()));
  const double ur = basis_values(-1.0).dot(u.segment(dof(right, 0), nodes_per_cell()));
  return {ul - ur, 0.5 * (ul + ur)};
}

Vector DGSpace::project(const std::function<double(double)>& f) const {
  Vector u(num_dofs());
  for (int c = 0; c < num_cells(); ++c) {
    for (int k = 0; k < nodes_per_cell(); ++k) u[dof(c, k)] = f(physical_node(c, k));
  }
  return u;
}

double DGSpace::l2_error(const Vector& u,
                         const std::function<double(double)>& exact,
                         int quad_boost) const {
  if (quad_boost < 2) throw std::invalid_argument("l2_error: quad_boost must be >= 2");
  const QuadratureRule fine = gauss_legendre(degree_ + quad_boost);
  const int n = nodes_per_cell();
  Matrix interp(fine.nodes.size(), n);
  for (std::size_t q = 0; q < fine.nodes.size(); ++q) {
    interp.row(q) = basis_values(fine.nodes[q]).transpose();
  }
  double sum = 0.0;
  for (int c = 0; c < num_cells(); ++c) {
    const double half = 0.5 * mesh_.cell_size(c);
    const Vector uq = interp * u.segment(dof(c, 0), n);
    for (std::size_t q = 0; q < fine.nodes.size(); ++q) {
      const double x = mesh_.cell_center(c) + half * fine.nodes[q];
      const double e = uq[q] - exact(x);
      sum += half * fine.weights[q] * e * e;
    }
  }
  return std::sqrt(sum);
}

}  // namespace dodtel
