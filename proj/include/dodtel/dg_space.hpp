#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "dodtel/linalg.hpp"
#include "dodtel/mesh.hpp"

namespace dodtel {

/// Gauss-Legendre rule on [-1, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule, exact for polynomials of degree <= 2n-1.
QuadratureRule gauss_legendre(int n);

/// j-th Lagrange polynomial through `nodes`, evaluated at xi.
double lagrange(std::span<const double> nodes, int j, double xi);
double lagrange_derivative(std::span<const double> nodes, int j, double xi);

/// Piecewise polynomials of degree p on a CutCellMesh, represented by nodal
/// values at the p+1 Gauss-Legendre points of every cell (cell-major layout).
class DGSpace {
 public:
  DGSpace(CutCellMesh mesh, int degree);

  const CutCellMesh& mesh() const { return mesh_; }
  int degree() const { return degree_; }
  int nodes_per_cell() const { return degree_ + 1; }
  int num_cells() const { return mesh_.num_cells(); }
  int num_dofs() const { return num_cells() * nodes_per_cell(); }
  int dof(int cell, int k) const {
    return mesh_.wrap(cell) * nodes_per_cell() + k;
  }

  const QuadratureRule& reference_rule() const { return rule_; }
  std::span<const double> reference_nodes() const { return rule_.nodes; }
  /// Derivative matrix on the reference cell: entry (q, j) = l_j'(xi_q).
  const Matrix& reference_derivative() const { return reference_derivative_; }

  double physical_node(int cell, int k) const;
  Vector physical_nodes() const;

  /// Reference coordinate of x with respect to `cell`. The point is first
  /// shifted by a multiple of the domain length so that it lies as close
  /// as possible to the cell, which makes neighbor extensions across the
  /// periodic seam behave like interior ones.
  double to_reference(int cell, double x) const;

  /// Lagrange basis of a cell (values / physical derivatives) at the
  /// reference coordinate xi.
  Vector basis_values(double xi) const;
  Vector basis_derivatives(int cell, double xi) const;

  /// Polynomial of cell j evaluated at x, extrapolated when x lies outside
  /// E_j. No periodic shift is applied to x.
  double evaluate_extension(const Vector& coeffs, int cell, double x) const;

  /// (jump, mean) at interface i+1/2, i.e. between cells i and i+1 (wrapped).
  std::pair<double, double> jump_and_mean(const Vector& u, int interface) const;

  /// Nodal interpolation of f.
  Vector project(const std::function<double(double)>& f) const;

  /// Discrete L2 distance to `exact` using (p + quad_boost)-point Gauss
  /// quadrature per cell.
  double l2_error(const Vector& u, const std::function<double(double)>& exact,
                  int quad_boost = 4) const;

  /// Diagonal of the (exact) mass matrix.
  const Vector& mass_diagonal() const { return mass_; }

 private:
  CutCellMesh mesh_;
  int degree_;
  QuadratureRule rule_;
  Matrix reference_derivative_;
  Vector mass_;
};

DGSpace build_space(const CutCellMesh& mesh, int degree);

/// Coefficient pair of the split telegraph system on one DGSpace.
struct State {
  Vector rho;
  Vector gtilde;
  double epsilon = 1.0;
};

}  // namespace dodtel
