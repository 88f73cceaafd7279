#pragma once

#include <functional>

#include "dodtel/dg_space.hpp"
#include "dodtel/operators.hpp"
#include "dodtel/time_integration.hpp"

namespace dodtel {

/// Split telegraph system for one operator set, pairing and eps > 0.
struct TelegraphSystem {
  Pairing pairing = Pairing::MinusPlus;
  double epsilon = 1.0;
  SplitSystem split;

  State f(const State& u) const { return split.explicit_rhs(u); }
  State g(const State& u) const { return split.implicit_rhs(u); }
  /// f + g: rho' = -D^rho g, g' = -(1/eps^2) D^g rho - (1/(2 eps))(D- - D+) g - g / eps^2
  State rhs(const State& u) const;
};

/// The (D+ - D-) block always uses the symmetrized pair, whatever the pairing.
TelegraphSystem telegraph_system(const OperatorSet& ops, Pairing pairing, double epsilon);

/// Limit operator L = D^rho D^g of rho' = L rho.
struct HeatSystem {
  Pairing pairing = Pairing::MinusPlus;
  Matrix L;
  SparseMatrix L_sparse;
};

HeatSystem heat_system(const OperatorSet& ops, Pairing pairing);

/// Decaying Fourier mode solving the telegraph system on [-pi, pi]:
/// rho = e^{rt} sin(x) / r, g = e^{rt} cos(x), r = -2 / (1 + sqrt(1 - 4 eps^2)).
struct ExactTelegraph {
  double epsilon = 0.0;
  double r = -1.0;

  double rho(double x, double t) const;
  double gtilde(double x, double t) const;
};

/// Throws std::invalid_argument unless 0 <= eps <= 1/2 (eps = 0 gives the heat limit).
ExactTelegraph exact_telegraph(double epsilon);

/// rho = project(rho0), g = -D^g rho.
State well_prepared_init(const DGSpace& space, const OperatorSet& ops, Pairing pairing,
                         const std::function<double(double)>& rho0, double epsilon);

/// rho^T M rho + eps^2 g^T M g.
double energy(const OperatorSet& ops, const State& state);

}  // namespace dodtel
