#pragma once

#include <string>
#include <string_view>

#include <Eigen/LU>

#include "dodtel/dg_space.hpp"
#include "dodtel/linalg.hpp"

namespace dodtel {

enum class TableauType { TypeI, TypeII, ARS, Other };

std::string_view to_string(TableauType type);

/// Paired explicit / implicit Butcher tableaux of an s-stage IMEX-RK method.
struct ImexTableau {
  std::string name;
  int stages = 0;
  Matrix a_expl;  ///< strictly lower triangular
  Matrix a_impl;  ///< lower triangular
  Vector b_expl;
  Vector b_impl;
  Vector c_expl;
  Vector c_impl;
  TableauType type = TableauType::Other;
  bool gsa = false;
};

/// Validates shapes and triangularity, fills abscissae (row sums) and the
/// classification. Throws std::invalid_argument on malformed input.
ImexTableau make_tableau(std::string name, Matrix a_expl, Vector b_expl,
                         Matrix a_impl, Vector b_impl);

TableauType classify(const Matrix& a_impl, const Vector& b_impl);
bool is_gsa(const Matrix& a_expl, const Vector& b_expl, const Matrix& a_impl,
            const Vector& b_impl);

/// "ARS443" or "SSP2-332".
ImexTableau builtin_tableau(std::string_view name);

/// Telegraph right side split into a non-stiff part f and the stiff
/// relaxation part g:
///   f(rho, g) = (-D^rho g, (1/(2 eps)) (D+ - D-) g)
///   g(rho, g) = (0, -(1/eps^2) (D^g rho + g))
struct SplitSystem {
  SparseMatrix d_rho;
  SparseMatrix d_g;
  SparseMatrix d_diff;  ///< D+ - D- of the symmetrized pair
  double epsilon = 1.0;

  State explicit_rhs(const State& u) const;
  State implicit_rhs(const State& u) const;
};

/// One step of the IMEX-RK scheme in its textbook form; every g-stage is a
/// pointwise division by 1 + dt a_kk / eps^2. Throws std::invalid_argument
/// for eps <= 0 or dt <= 0, std::runtime_error when the result is not finite.
State imex_step(const SplitSystem& system, const ImexTableau& tab,
                const State& state, double dt);

/// Same update for ARS-type GSA tableaux, computed on rescaled stages so that
/// no quantity is ever divided by eps.
State stable_ars_step(const SplitSystem& system, const ImexTableau& tab,
                      const State& state, double dt);

/// Explicit part of `tab` applied to u' = L u.
Vector explicit_limit_step(const SparseMatrix& l, const ImexTableau& tab,
                           const Vector& u, double dt);
Vector explicit_limit_step(const Matrix& l, const ImexTableau& tab,
                           const Vector& u, double dt);

/// Implicit Euler / midpoint rule for u' = L u with a cached LU factorization
/// of (I - theta dt L).
class ImplicitHeatStepper {
 public:
  enum class Method { Euler, Midpoint };

  /// Throws std::runtime_error when the system matrix is numerically singular.
  ImplicitHeatStepper(const Matrix& l, double dt, Method method);

  Vector step(const Vector& u) const;
  double dt() const { return dt_; }
  /// Reciprocal condition estimate of the factorized matrix.
  double rcond() const { return rcond_; }

 private:
  Matrix l_;
  double dt_;
  Method method_;
  Eigen::PartialPivLU<Matrix> lu_;
  double rcond_ = 1.0;
};

/// Solves (I - dt L) u_new = u.
Vector implicit_euler_heat_step(const Matrix& l, const Vector& u, double dt);
/// u_new = (I - dt/2 L)^{-1} (I + dt/2 L) u.
Vector implicit_midpoint_heat_step(const Matrix& l, const Vector& u, double dt);

}  // namespace dodtel
