#include "dodtel/models.hpp"

#include <cmath>
#include <stdexcept>

namespace dodtel {

State TelegraphSystem::rhs(const State& u) const {
  State out = f(u);
  out.gtilde += g(u).gtilde;
  return out;
}

TelegraphSystem telegraph_system(const OperatorSet& ops, Pairing pairing, double epsilon) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("telegraph_system: epsilon must be positive");
  }
  const auto [d_rho, d_g] = operator_pair(ops, pairing);
  TelegraphSystem sys;
  sys.pairing = pairing;
  sys.epsilon = epsilon;
  sys.split.d_rho = to_sparse(d_rho);
  sys.split.d_g = to_sparse(d_g);
  sys.split.d_diff = to_sparse(ops.Dp_symm - ops.Dm_symm);
  sys.split.epsilon = epsilon;
  return sys;
}

HeatSystem heat_system(const OperatorSet& ops, Pairing pairing) {
  const auto [d_rho, d_g] = operator_pair(ops, pairing);
  HeatSystem heat;
  heat.pairing = pairing;
  heat.L = d_rho * d_g;
  heat.L_sparse = to_sparse(heat.L);
  return heat;
}

double ExactTelegraph::rho(double x, double t) const {
  return std::exp(r * t) * std::sin(x) / r;
}

double ExactTelegraph::gtilde(double x, double t) const {
  return std::exp(r * t) * std::cos(x);
}

ExactTelegraph exact_telegraph(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 0.5)) {
    throw std::invalid_argument("exact_telegraph: need 0 <= epsilon <= 1/2 (r is complex otherwise)");
  }
  ExactTelegraph ex;
  ex.epsilon = epsilon;
  ex.r = -2.0 / (1.0 + std::sqrt(1.0 - 4.0 * epsilon * epsilon));
  return ex;
}

State well_prepared_init(const DGSpace& space, const OperatorSet& ops, Pairing pairing,
                         const std::function<double(double)>& rho0, double epsilon) {
  State s;
  s.epsilon = epsilon;
  s.rho = space.project(rho0);
  s.gtilde = -(operator_pair(ops, pairing).d_g * s.rho);
  return s;
}

double energy(const OperatorSet& ops, const State& state) {
  const double eps2 = state.epsilon * state.epsilon;
  return state.rho.dot(ops.mass.cwiseProduct(state.rho)) +
         eps2 * state.gtilde.dot(ops.mass.cwiseProduct(state.gtilde));
}

}  // namespace dodtel
