#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace dodtel {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Largest absolute entry; 0 for empty matrices.
inline double max_abs(const Matrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

/// Largest eigenvalue of (a + a^T)/2.
double max_symmetric_eigenvalue(const Matrix& a);

/// Drops exact zeros from a dense operator.
SparseMatrix to_sparse(const Matrix& a);

}  // namespace dodtel
