#pragma once

#include <cstdint>
#include <utility>

#include "dodtel/linalg.hpp"
#include "dodtel/operators.hpp"

namespace dodtel {

/// Verdict thresholds.
inline constexpr double kSbpTolerance = 1e-11;
inline constexpr double kEnergyTolerance = 1e-9;

struct SBPReport {
  double skew_residual = 0.0;               ///< max|M Dz + Dz^T M|
  double duality_residual = 0.0;            ///< max|M D+ + (D-)^T M|
  double max_dissipation_eigenvalue = 0.0;  ///< lambda_max sym(M (D+ - D-))
  double energy_derivative_bound = 0.0;     ///< max dE/dt / E over random states

  bool passed() const {
    return skew_residual <= kSbpTolerance && duality_residual <= kSbpTolerance &&
           max_dissipation_eigenvalue <= kSbpTolerance &&
           energy_derivative_bound <= kEnergyTolerance;
  }
};

/// max|M D + D^T M|. M may be passed as a full matrix or by its diagonal.
double check_periodic_sbp(const Matrix& m, const Matrix& d);
double check_periodic_sbp(const Vector& mass, const Matrix& d);

/// (max|M Dp + Dm^T M|, lambda_max of sym(M (Dp - Dm))).
std::pair<double, double> check_upwind_sbp(const Matrix& m, const Matrix& dp,
                                           const Matrix& dm);
std::pair<double, double> check_upwind_sbp(const Vector& mass, const Matrix& dp,
                                           const Matrix& dm);

/// d/dt (rho^T M rho + eps^2 g^T M g) of the telegraph semidiscretization
/// at one state.
double energy_derivative(const OperatorSet& ops, Pairing pairing, double epsilon,
                         const Vector& rho, const Vector& gtilde);

/// Largest energy derivative over `trials` standard-normal random states,
/// each divided by the state energy. Deterministic in `seed`.
double check_energy_decay(const OperatorSet& ops, Pairing pairing, double epsilon,
                          int trials, std::uint64_t seed);

/// Max relative entry deviation of the assembled p = 0 pair and mass matrix
/// from the closed-form DoD matrices. Requires p = 0 and exactly one small
/// cell; alpha is the realized |E_c| / dx.
double check_p0_closed_form(const DGSpace& space, double eta);

/// All four checks for one operator set.
SBPReport sbp_report(const OperatorSet& ops, Pairing pairing, double epsilon,
                     int trials, std::uint64_t seed);

}  // namespace dodtel
