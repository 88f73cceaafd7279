#pragma once

#include <map>
#include <string_view>
#include <utility>

#include "dodtel/dg_space.hpp"
#include "dodtel/linalg.hpp"

namespace dodtel {

/// Numerical flux H^delta used at interfaces and inside the DoD terms.
enum class FluxKind {
  Upwind,    ///< left state, delta = '-'
  Downwind,  ///< right state, delta = '+'
  Central,   ///< arithmetic mean, delta = 'z'
};

/// Volume redistribution weights (L_c, R_c) of the J^1 term.
enum class VolumeWeights {
  Symmetric,  ///< L_c = R_c = 1/2 for every flux
  FlowBased,  ///< (1, 0) for upwind, (0, 1) for downwind, (1/2, 1/2) central
};

/// Flux pairing (D^rho, D^gtilde) of the telegraph system.
enum class Pairing {
  MinusPlus,  ///< (D^-, D^+)
  PlusMinus,  ///< (D^+, D^-)
  Central,    ///< (D^z, D^z)
};

std::string_view to_string(FluxKind kind);
std::string_view to_string(Pairing pairing);
Pairing parse_pairing(std::string_view name);

/// Stabilization strength per small cell.
using EtaMap = std::map<int, double>;

/// Reduced stabilization parameter lambda_c(p); 0.45 for every p >= 2.
double stabilization_lambda(int degree);

/// eta_c = 1 - alpha_c / lambda_c(p), clipped to [0, 1], for every small cell.
EtaMap default_eta(const DGSpace& space);
EtaMap constant_eta(const CutCellMesh& mesh, double eta);

/// Every matrix D below is the derivative operator of a bilinear form
/// a(u, w) = w^T M D u. The *_form variants return M D directly, which
/// is the quantity built from exact integrals.
Matrix assemble_mass(const DGSpace& space);

Matrix background_form(const DGSpace& space, FluxKind kind);
Matrix assemble_background(const DGSpace& space, FluxKind kind);

/// Interface term J^{0,c,delta}. Throws if c is not a small cell or eta is
/// outside [0, 1].
Matrix dod_flux_form(const DGSpace& space, int c, FluxKind kind, double eta);
Matrix assemble_dod_flux(const DGSpace& space, int c, FluxKind kind, double eta);

/// Volume term J^{1,c,delta} for linear flux with weights K(c-1) = left,
/// K(c) = -1, K(c+1) = right. Throws unless left + right == 1.
Matrix dod_volume_form(const DGSpace& space, int c, FluxKind kind, double eta,
                       double left, double right);
Matrix assemble_dod_volume(const DGSpace& space, int c, FluxKind kind,
                           double eta, double left, double right);

/// D_bg + sum over small cells of (J0_c + J1_c).
Matrix stabilized_form(const DGSpace& space, FluxKind kind, const EtaMap& eta,
                       VolumeWeights weights = VolumeWeights::Symmetric);
Matrix assemble_stabilized(const DGSpace& space, FluxKind kind,
                           const EtaMap& eta,
                           VolumeWeights weights = VolumeWeights::Symmetric);

/// (D_naive^- - D_naive^+) / 2.
Matrix split_dissipation(const Matrix& d_naive_plus, const Matrix& d_naive_minus);

/// Same, verifying D_naive^-/+ = Dz +/- Ddiss. The residual is measured as
/// max|M (Dz +/- Ddiss - D_naive^-/+)|, since small-cell rows of D carry
/// rounding noise of order eps / |E_c|. Throws std::runtime_error above 1e-10.
Matrix split_dissipation(const Matrix& d_naive_plus, const Matrix& d_naive_minus,
                         const Matrix& dz, const Vector& mass);

/// Symmetrized dual pair: S = sym(M Ddiss), D+ = Dz - M^{-1} S,
/// D- = Dz + M^{-1} S. Throws when ||M D+ + D-^T M||_max > 1e-10.
std::pair<Matrix, Matrix> symmetrize_upwind_pair(const Matrix& dz,
                                                 const Matrix& ddiss,
                                                 const Vector& mass);

struct OperatorSet {
  Vector mass;  ///< diagonal of M
  Matrix M;
  Matrix Dz;
  Matrix Dp_symm;
  Matrix Dm_symm;
  Matrix Dp_naive;
  Matrix Dm_naive;
  Matrix Ddiss;
  EtaMap eta;
  int degree = 0;
  /// True when Dp/Dm_symm are the unmodified naive pair (p = 0).
  bool classic_pair = false;
};

/// The naive operators always use L_c = R_c = 1/2, which the dissipation
/// splitting requires. Flow-based weights are only available through
/// assemble_stabilized (for p = 0 they coincide, J^1 being zero there).
struct OperatorOptions {
  /// For p = 0 use the classic DoD pair directly instead of symmetrizing.
  bool classic_for_p0 = true;
};

OperatorSet build_operator_set(const DGSpace& space, const EtaMap& eta,
                               const OperatorOptions& options = {});
OperatorSet build_operator_set(const DGSpace& space);

/// Pair (D^rho, D^gtilde) for a flux pairing.
struct OperatorPair {
  const Matrix& d_rho;
  const Matrix& d_g;
};
OperatorPair operator_pair(const OperatorSet& ops, Pairing pairing);

}  // namespace dodtel
