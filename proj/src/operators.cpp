#include "dodtel/operators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace dodtel {

namespace {

struct FluxWeights {
  double a;  // dH/d(left state)
  double b;  // dH/d(right state)
};

FluxWeights flux_weights(FluxKind kind) {
  switch (kind) {
    case FluxKind::Upwind: return {1.0, 0.0};
    case FluxKind::Downwind: return {0.0, 1.0};
    case FluxKind::Central: return {0.5, 0.5};
  }
  throw std::logic_error("unknown FluxKind");
}

std::pair<double, double> volume_weights(FluxKind kind, VolumeWeights weights) {
  if (weights == VolumeWeights::Symmetric || kind == FluxKind::Central) {
    return {0.5, 0.5};
  }
  return kind == FluxKind::Upwind ? std::pair{1.0, 0.0} : std::pair{0.0, 1.0};
}

Matrix apply_inverse_mass(const Vector& mass, const Matrix& form) {
  return mass.cwiseInverse().asDiagonal() * form;
}

// Local patch {c-1, c, c+1} around a small cell. Functionals are dense
// vectors over the 3(p+1) patch dofs; block 0 = c-1, 1 = c, 2 = c+1.
class Patch {
 public:
  Patch(const DGSpace& space, int c)
      : space_(space),
        n_(space.nodes_per_cell()),
        cells_{space.mesh().wrap(c - 1), space.mesh().wrap(c), space.mesh().wrap(c + 1)},
        h_{space.mesh().cell_size(c - 1), space.mesh().cell_size(c),
           space.mesh().cell_size(c + 1)} {}

  int size() const { return 3 * n_; }

  // Point inside (or on the boundary of) E_c given by its reference
  // coordinate xi_c, expressed in the reference frame of patch block `blk`.
  double xi_in_block(int blk, double xi_c) const {
    switch (blk) {
      case 0: return 1.0 + h_[1] * (1.0 + xi_c) / h_[0];
      case 1: return xi_c;
      default: return -1.0 - h_[1] * (1.0 - xi_c) / h_[2];
    }
  }

  Vector value(int blk, double xi_c) const {
    Vector f = Vector::Zero(size());
    f.segment(blk * n_, n_) = space_.basis_values(xi_in_block(blk, xi_c));
    return f;
  }

  Vector derivative(int blk, double xi_c) const {
    Vector f = Vector::Zero(size());
    f.segment(blk * n_, n_) = space_.basis_derivatives(cells_[blk], xi_in_block(blk, xi_c));
    return f;
  }

  void scatter(const Matrix& local, Matrix& global) const {
    for (int bi = 0; bi < 3; ++bi) {
      for (int bj = 0; bj < 3; ++bj) {
        global.block(space_.dof(cells_[bi], 0), space_.dof(cells_[bj], 0), n_, n_) +=
            local.block(bi * n_, bj * n_, n_, n_);
      }
    }
  }

  double small_size() const { return h_[1]; }

 private:
  const DGSpace& space_;
  int n_;
  int cells_[3];
  double h_[3];
};

void require_small(const DGSpace& space, int c, double eta) {
  if (!space.mesh().is_small(c)) {
    std::ostringstream msg;
    msg << "DoD term requested for cell " << c << " which is not a small cell";
    throw std::invalid_argument(msg.str());
  }
  if (!(eta >= 0.0 && eta <= 1.0)) {
    std::ostringstream msg;
    msg << "DoD parameter eta = " << eta << " for cell " << c << " outside [0, 1]";
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

std::string_view to_string(FluxKind kind) {
  switch (kind) {
    case FluxKind::Upwind: return "upwind";
    case FluxKind::Downwind: return "downwind";
    case FluxKind::Central: return "central";
  }
  return "?";
}

std::string_view to_string(Pairing pairing) {
  switch (pairing) {
    case Pairing::MinusPlus: return "mp";
    case Pairing::PlusMinus: return "pm";
    case Pairing::Central: return "central";
  }
  return "?";
}

Pairing parse_pairing(std::string_view name) {
  if (name == "mp") return Pairing::MinusPlus;
  if (name == "pm") return Pairing::PlusMinus;
  if (name == "central" || name == "zz") return Pairing::Central;
  throw std::invalid_argument("unknown pairing '" + std::string(name) +
                              "' (expected mp, pm or central)");
}

double stabilization_lambda(int degree) {
  if (degree <= 0) return 1.0;
  if (degree == 1) return 0.55;
  return 0.45;
}

EtaMap default_eta(const DGSpace& space) {
  const double lambda = stabilization_lambda(space.degree());
  EtaMap eta;
  for (int c : space.mesh().small_cells()) {
    eta[c] = std::clamp(1.0 - space.mesh().fraction(c) / lambda, 0.0, 1.0);
  }
  return eta;
}

EtaMap constant_eta(const CutCellMesh& mesh, double value) {
  EtaMap eta;
  for (int c : mesh.small_cells()) eta[c] = value;
  return eta;
}

Matrix assemble_mass(const DGSpace& space) {
  return space.mass_diagonal().asDiagonal();
}

Matrix background_form(const DGSpace& space, FluxKind kind) {
  const int n = space.nodes_per_cell();
  const int ndofs = space.num_dofs();
  const auto& weights = space.reference_rule().weights;
  const Matrix& dref = space.reference_derivative();
  Matrix form = Matrix::Zero(ndofs, ndofs);

  // -int u dw/dx: exact with p+1 Gauss points, independent of the cell size.
  for (int c = 0; c < space.num_cells(); ++c) {
    const int base = space.dof(c, 0);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) form(base + a, base + b) -= weights[b] * dref(b, a);
    }
  }

  const FluxWeights h = flux_weights(kind);
  const Vector right_trace = space.basis_values(1.0);
  const Vector left_trace = space.basis_values(-1.0);
  for (int i = 0; i < space.num_cells(); ++i) {
    const int l = space.dof(i, 0);
    const int r = space.dof(i + 1, 0);
    // H(u_i, u_{i+1}) [w] with [w] = w_i(x+) - w_{i+1}(x-)
    form.block(l, l, n, n) += h.a * right_trace * right_trace.transpose();
    form.block(l, r, n, n) += h.b * right_trace * left_trace.transpose();
    form.block(r, l, n, n) -= h.a * left_trace * right_trace.transpose();
    form.block(r, r, n, n) -= h.b * left_trace * left_trace.transpose();
  }
  return form;
}

Matrix assemble_background(const DGSpace& space, FluxKind kind) {
  return apply_inverse_mass(space.mass_diagonal(), background_form(space, kind));
}

Matrix dod_flux_form(const DGSpace& space, int c, FluxKind kind, double eta) {
  require_small(space, c, eta);
  const Patch patch(space, c);
  const FluxWeights h = flux_weights(kind);
  Matrix local = Matrix::Zero(patch.size(), patch.size());

  // x_{c-1/2}: H(u_{c-1}, u_{c+1}) - H(u_{c-1}, u_c), tested with [w]_{c-1/2}
  {
    const Vector u_left = patch.value(0, -1.0);
    const Vector u_small = patch.value(1, -1.0);
    const Vector u_right = patch.value(2, -1.0);
    const Vector flux = (h.a * u_left + h.b * u_right) - (h.a * u_left + h.b * u_small);
    const Vector jump = u_left - u_small;
    local += eta * jump * flux.transpose();
  }
  // x_{c+1/2}: H(u_{c-1}, u_{c+1}) - H(u_c, u_{c+1}), tested with [w]_{c+1/2}
  {
    const Vector u_left = patch.value(0, 1.0);
    const Vector u_small = patch.value(1, 1.0);
    const Vector u_right = patch.value(2, 1.0);
    const Vector flux = (h.a * u_left + h.b * u_right) - (h.a * u_small + h.b * u_right);
    const Vector jump = u_small - u_right;
    local += eta * jump * flux.transpose();
  }

  Matrix form = Matrix::Zero(space.num_dofs(), space.num_dofs());
  patch.scatter(local, form);
  return form;
}

Matrix assemble_dod_flux(const DGSpace& space, int c, FluxKind kind, double eta) {
  return apply_inverse_mass(space.mass_diagonal(), dod_flux_form(space, c, kind, eta));
}

Matrix dod_volume_form(const DGSpace& space, int c, FluxKind kind, double eta,
                       double left, double right) {
  require_small(space, c, eta);
  if (std::abs(left + right - 1.0) > 1e-14) {
    std::ostringstream msg;
    msg << "DoD volume weights must satisfy L + R = 1, got " << left << " + " << right;
    throw std::invalid_argument(msg.str());
  }
  Matrix form = Matrix::Zero(space.num_dofs(), space.num_dofs());
  if (space.degree() == 0 || eta == 0.0) return form;

  const Patch patch(space, c);
  const FluxWeights h = flux_weights(kind);
  const double k_weight[3] = {left, -1.0, right};
  const auto& rule = space.reference_rule();
  Matrix local = Matrix::Zero(patch.size(), patch.size());

  // Integrand degree is 2p-1, so the p+1 point rule is exact.
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double xi = rule.nodes[q];
    const double jac = 0.5 * patch.small_size() * rule.weights[q];
    Vector u[3];
    Vector dw[3];
    for (int blk = 0; blk < 3; ++blk) {
      u[blk] = patch.value(blk, xi);
      dw[blk] = patch.derivative(blk, xi);
    }
    const Vector flux = h.a * u[0] + h.b * u[2];
    for (int j = 0; j < 3; ++j) {
      Matrix term = dw[j] * (flux - u[j]).transpose();
      term += h.a * dw[0] * u[j].transpose();
      term += h.b * dw[2] * u[j].transpose();
      local += (eta * k_weight[j] * jac) * term;
    }
  }
  patch.scatter(local, form);
  return form;
}

Matrix assemble_dod_volume(const DGSpace& space, int c, FluxKind kind,
                           double eta, double left, double right) {
  return apply_inverse_mass(space.mass_diagonal(),
                            dod_volume_form(space, c, kind, eta, left, right));
}

Matrix stabilized_form(const DGSpace& space, FluxKind kind, const EtaMap& eta,
                       VolumeWeights weights) {
  Matrix form = background_form(space, kind);
  const auto [left, right] = volume_weights(kind, weights);
  for (int c : space.mesh().small_cells()) {
    const auto it = eta.find(c);
    if (it == eta.end()) {
      throw std::invalid_argument("stabilization parameter missing for small cell " +
                                  std::to_string(c));
    }
    form += dod_flux_form(space, c, kind, it->second);
    form += dod_volume_form(space, c, kind, it->second, left, right);
  }
  return form;
}

Matrix assemble_stabilized(const DGSpace& space, FluxKind kind,
                           const EtaMap& eta, VolumeWeights weights) {
  return apply_inverse_mass(space.mass_diagonal(),
                            stabilized_form(space, kind, eta, weights));
}

Matrix split_dissipation(const Matrix& d_naive_plus, const Matrix& d_naive_minus) {
  if (d_naive_plus.rows() != d_naive_minus.rows() ||
      d_naive_plus.cols() != d_naive_minus.cols()) {
    throw std::invalid_argument("split_dissipation: dimension mismatch");
  }
  return 0.5 * (d_naive_minus - d_naive_plus);
}

Matrix split_dissipation(const Matrix& d_naive_plus, const Matrix& d_naive_minus,
                         const Matrix& dz, const Vector& mass) {
  Matrix ddiss = split_dissipation(d_naive_plus, d_naive_minus);
  const auto m = mass.asDiagonal();
  const double residual = std::max(max_abs(m * (dz + ddiss - d_naive_minus)),
                                   max_abs(m * (dz - ddiss - d_naive_plus)));
  if (residual > 1e-10) {
    std::ostringstream msg;
    msg << "split_dissipation: central/dissipation decomposition residual "
        << residual << " (operators not assembled with matching weights?)";
    throw std::runtime_error(msg.str());
  }
  return ddiss;
}

std::pair<Matrix, Matrix> symmetrize_upwind_pair(const Matrix& dz,
                                                 const Matrix& ddiss,
                                                 const Vector& mass) {
  if (dz.rows() != mass.size() || ddiss.rows() != mass.size()) {
    throw std::invalid_argument("symmetrize_upwind_pair: dimension mismatch");
  }
  if ((mass.array() <= 0.0).any()) {
    throw std::invalid_argument("symmetrize_upwind_pair: mass matrix not positive definite");
  }
  const Matrix form = mass.asDiagonal() * ddiss;
  const Matrix sym = 0.5 * (form + form.transpose());
  const Matrix correction = apply_inverse_mass(mass, sym);
  std::pair<Matrix, Matrix> pair{dz - correction, dz + correction};

  const Matrix residual = mass.asDiagonal() * pair.first +
                          pair.second.transpose() * mass.asDiagonal();
  const double r = max_abs(residual);
  if (r > 1e-10) {
    std::ostringstream msg;
    msg << "symmetrize_upwind_pair: duality residual " << r
        << " (is Dz skew-symmetric under M?)";
    throw std::runtime_error(msg.str());
  }
  return pair;
}

OperatorSet build_operator_set(const DGSpace& space, const EtaMap& eta,
                               const OperatorOptions& options) {
  OperatorSet ops;
  ops.degree = space.degree();
  ops.eta = eta;
  ops.mass = space.mass_diagonal();
  ops.M = assemble_mass(space);
  ops.Dz = assemble_stabilized(space, FluxKind::Central, eta);
  ops.Dp_naive = assemble_stabilized(space, FluxKind::Downwind, eta);
  ops.Dm_naive = assemble_stabilized(space, FluxKind::Upwind, eta);
  ops.Ddiss = split_dissipation(ops.Dp_naive, ops.Dm_naive, ops.Dz, ops.mass);
  if (space.degree() == 0 && options.classic_for_p0) {
    ops.Dp_symm = ops.Dp_naive;
    ops.Dm_symm = ops.Dm_naive;
    ops.classic_pair = true;
  } else {
    auto [dp, dm] = symmetrize_upwind_pair(ops.Dz, ops.Ddiss, ops.mass);
    ops.Dp_symm = std::move(dp);
    ops.Dm_symm = std::move(dm);
  }
  return ops;
}

OperatorSet build_operator_set(const DGSpace& space) {
  return build_operator_set(space, default_eta(space));
}

OperatorPair operator_pair(const OperatorSet& ops, Pairing pairing) {
  switch (pairing) {
    case Pairing::MinusPlus: return {ops.Dm_symm, ops.Dp_symm};
    case Pairing::PlusMinus: return {ops.Dp_symm, ops.Dm_symm};
    case Pairing::Central: return {ops.Dz, ops.Dz};
  }
  throw std::logic_error("unknown Pairing");
}

}  // namespace dodtel
