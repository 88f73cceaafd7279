#include "dodtel/linalg.hpp"

#include <Eigen/Eigenvalues>

namespace dodtel {

double max_symmetric_eigenvalue(const Matrix& a) {
  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

SparseMatrix to_sparse(const Matrix& a) {
  return a.sparseView(0.0, 0.0);
}

}  // namespace dodtel
