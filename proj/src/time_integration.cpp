#include "dodtel/time_integration.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace dodtel {

namespace {

void require_finite(const State& s, const char* where) {
  if (!s.rho.allFinite() || !s.gtilde.allFinite()) {
    throw std::runtime_error(std::string(where) + ": non-finite state (unstable step?)");
  }
}

void check_step_args(const SplitSystem& system, const State& state, double dt,
                     const char* where) {
  if (!(system.epsilon > 0.0)) {
    throw std::invalid_argument(std::string(where) +
                                ": epsilon must be positive (use the heat path for eps = 0)");
  }
  if (!(dt > 0.0)) throw std::invalid_argument(std::string(where) + ": dt must be positive");
  if (state.rho.size() != system.d_rho.cols() || state.gtilde.size() != system.d_g.cols()) {
    throw std::invalid_argument(std::string(where) + ": state size mismatch");
  }
}

// ds{k,l} = prod_{j=k}^{l} (eps^2 + dt a_jj), 1-based stage indices.
class DiagonalProducts {
 public:
  DiagonalProducts(const Matrix& a_impl, double eps2, double dt)
      : factor_(a_impl.rows() + 1) {
    for (int j = 1; j <= a_impl.rows(); ++j) factor_[j] = eps2 + dt * a_impl(j - 1, j - 1);
  }
  double operator()(int k, int l) const {
    double p = 1.0;
    for (int j = k; j <= l; ++j) p *= factor_[j];
    return p;
  }

 private:
  std::vector<double> factor_;
};

}  // namespace

std::string_view to_string(TableauType type) {
  switch (type) {
    case TableauType::TypeI: return "I";
    case TableauType::TypeII: return "II";
    case TableauType::ARS: return "ARS";
    case TableauType::Other: return "other";
  }
  return "?";
}

TableauType classify(const Matrix& a, const Vector& b) {
  const int s = static_cast<int>(a.rows());
  bool all_nonzero = true;
  for (int i = 0; i < s; ++i) all_nonzero = all_nonzero && a(i, i) != 0.0;
  if (all_nonzero) return TableauType::TypeI;

  if (a(0, 0) != 0.0) return TableauType::Other;
  for (int i = 1; i < s; ++i) {
    if (a(i, i) == 0.0) return TableauType::Other;
  }
  bool ars = b[0] == 0.0;
  for (int i = 1; i < s; ++i) ars = ars && a(i, 0) == 0.0;
  return ars ? TableauType::ARS : TableauType::TypeII;
}

bool is_gsa(const Matrix& a_expl, const Vector& b_expl, const Matrix& a_impl,
            const Vector& b_impl) {
  const Eigen::Index last = a_impl.rows() - 1;
  return a_impl.row(last).transpose() == b_impl && a_expl.row(last).transpose() == b_expl;
}

ImexTableau make_tableau(std::string name, Matrix a_expl, Vector b_expl,
                         Matrix a_impl, Vector b_impl) {
  const Eigen::Index s = a_expl.rows();
  if (s < 1 || a_expl.cols() != s || a_impl.rows() != s || a_impl.cols() != s ||
      b_expl.size() != s || b_impl.size() != s) {
    throw std::invalid_argument("tableau '" + name + "': inconsistent dimensions");
  }
  for (Eigen::Index i = 0; i < s; ++i) {
    for (Eigen::Index j = i; j < s; ++j) {
      if (a_expl(i, j) != 0.0) {
        throw std::invalid_argument("tableau '" + name +
                                    "': explicit part must be strictly lower triangular");
      }
      if (j > i && a_impl(i, j) != 0.0) {
        throw std::invalid_argument("tableau '" + name +
                                    "': implicit part must be lower triangular");
      }
    }
  }
  if (!a_expl.allFinite() || !a_impl.allFinite() || !b_expl.allFinite() || !b_impl.allFinite()) {
    throw std::invalid_argument("tableau '" + name + "': non-finite coefficient");
  }
  ImexTableau tab;
  tab.name = std::move(name);
  tab.stages = static_cast<int>(s);
  tab.c_expl = a_expl.rowwise().sum();
  tab.c_impl = a_impl.rowwise().sum();
  tab.type = classify(a_impl, b_impl);
  tab.gsa = is_gsa(a_expl, b_expl, a_impl, b_impl);
  tab.a_expl = std::move(a_expl);
  tab.a_impl = std::move(a_impl);
  tab.b_expl = std::move(b_expl);
  tab.b_impl = std::move(b_impl);
  return tab;
}

ImexTableau builtin_tableau(std::string_view name) {
  if (name == "ARS443") {
    Matrix ae = Matrix::Zero(5, 5);
    ae(1, 0) = 1.0 / 2.0;
    ae(2, 0) = 11.0 / 18.0;
    ae(2, 1) = 1.0 / 18.0;
    ae(3, 0) = 5.0 / 6.0;
    ae(3, 1) = -5.0 / 6.0;
    ae(3, 2) = 1.0 / 2.0;
    ae(4, 0) = 1.0 / 4.0;
    ae(4, 1) = 7.0 / 4.0;
    ae(4, 2) = 3.0 / 4.0;
    ae(4, 3) = -7.0 / 4.0;
    Matrix ai = Matrix::Zero(5, 5);
    ai(1, 1) = 1.0 / 2.0;
    ai(2, 1) = 1.0 / 6.0;
    ai(2, 2) = 1.0 / 2.0;
    ai(3, 1) = -1.0 / 2.0;
    ai(3, 2) = 1.0 / 2.0;
    ai(3, 3) = 1.0 / 2.0;
    ai(4, 1) = 3.0 / 2.0;
    ai(4, 2) = -3.0 / 2.0;
    ai(4, 3) = 1.0 / 2.0;
    ai(4, 4) = 1.0 / 2.0;
    Vector be = ae.row(4).transpose();
    Vector bi = ai.row(4).transpose();
    return make_tableau("ARS443", ae, be, ai, bi);
  }
  if (name == "SSP2-332") {
    Matrix ae = Matrix::Zero(3, 3);
    ae(1, 0) = 1.0 / 2.0;
    ae(2, 0) = 1.0 / 2.0;
    ae(2, 1) = 1.0 / 2.0;
    Matrix ai = Matrix::Zero(3, 3);
    ai(0, 0) = 1.0 / 4.0;
    ai(1, 1) = 1.0 / 4.0;
    ai(2, 0) = 1.0 / 3.0;
    ai(2, 1) = 1.0 / 3.0;
    ai(2, 2) = 1.0 / 3.0;
    const Vector b = Vector::Constant(3, 1.0 / 3.0);
    return make_tableau("SSP2-332", ae, b, ai, b);
  }
  throw std::invalid_argument("unknown tableau '" + std::string(name) +
                              "' (expected ARS443 or SSP2-332)");
}

State SplitSystem::explicit_rhs(const State& u) const {
  State f;
  f.epsilon = epsilon;
  f.rho = -(d_rho * u.gtilde);
  f.gtilde = (0.5 / epsilon) * (d_diff * u.gtilde);
  return f;
}

State SplitSystem::implicit_rhs(const State& u) const {
  State g;
  g.epsilon = epsilon;
  g.rho = Vector::Zero(u.rho.size());
  g.gtilde = -(1.0 / (epsilon * epsilon)) * (d_g * u.rho + u.gtilde);
  return g;
}

State imex_step(const SplitSystem& system, const ImexTableau& tab,
                const State& state, double dt) {
  check_step_args(system, state, dt, "imex_step");
  const int s = tab.stages;
  const double eps = system.epsilon;
  const double inv_eps2 = 1.0 / (eps * eps);
  std::vector<Vector> f_rho(s), f_g(s), g_g(s);

  for (int k = 0; k < s; ++k) {
    Vector rho = state.rho;
    Vector g = state.gtilde;
    for (int i = 0; i < k; ++i) {
      const double ae = tab.a_expl(k, i);
      const double ai = tab.a_impl(k, i);
      if (ae != 0.0) {
        rho.noalias() += (dt * ae) * f_rho[i];
        g.noalias() += (dt * ae) * f_g[i];
      }
      if (ai != 0.0) g.noalias() += (dt * ai) * g_g[i];
    }
    // g = known + dt a_kk * (-(1/eps^2)(D^g rho + g)), i.e. a division by
    // 1 + dt a_kk / eps^2. The stage derivative is taken from the solved
    // equation: evaluating -(D^g rho + g) / eps^2 afterwards would cancel
    // catastrophically once eps^2 << dt.
    const double akk = dt * tab.a_impl(k, k);
    const Vector dg_rho = system.d_g * rho;
    if (akk != 0.0) {
      g_g[k] = -(dg_rho + g) / (eps * eps + akk);
      g.noalias() += akk * g_g[k];
    } else {
      g_g[k] = -inv_eps2 * (dg_rho + g);
    }
    f_rho[k] = -(system.d_rho * g);
    f_g[k] = (0.5 / eps) * (system.d_diff * g);
  }

  State out;
  out.epsilon = eps;
  out.rho = state.rho;
  out.gtilde = state.gtilde;
  for (int i = 0; i < s; ++i) {
    if (tab.b_expl[i] != 0.0) {
      out.rho.noalias() += (dt * tab.b_expl[i]) * f_rho[i];
      out.gtilde.noalias() += (dt * tab.b_expl[i]) * f_g[i];
    }
    if (tab.b_impl[i] != 0.0) out.gtilde.noalias() += (dt * tab.b_impl[i]) * g_g[i];
  }
  require_finite(out, "imex_step");
  return out;
}

State stable_ars_step(const SplitSystem& system, const ImexTableau& tab,
                      const State& state, double dt) {
  check_step_args(system, state, dt, "stable_ars_step");
  if (tab.type != TableauType::ARS || !tab.gsa) {
    throw std::invalid_argument("stable_ars_step: tableau '" + tab.name +
                                "' is not of ARS type with the GSA property");
  }
  const int s = tab.stages;
  const double eps = system.epsilon;
  const DiagonalProducts ds(tab.a_impl, eps * eps, dt);

  // 1-based stage storage; rho_hat(k) = ds{2,k-1} rho(k), g_hat(k) = ds{2,k} g(k)
  std::vector<Vector> rho_hat(s + 1), g_hat(s + 1);
  rho_hat[1] = state.rho;
  g_hat[1] = state.gtilde;
  const Eigen::Index n = state.rho.size();

  for (int k = 2; k <= s; ++k) {
    Vector expl_sum = Vector::Zero(n);
    for (int i = 1; i < k; ++i) {
      const double ae = tab.a_expl(k - 1, i - 1);
      if (ae != 0.0) expl_sum.noalias() += (ae * ds(i + 1, k - 1)) * g_hat[i];
    }
    rho_hat[k] = ds(2, k - 1) * state.rho - dt * (system.d_rho * expl_sum);

    Vector rho_sum = Vector::Zero(n);
    Vector g_sum = Vector::Zero(n);
    for (int i = 2; i <= k; ++i) {
      const double ai = tab.a_impl(k - 1, i - 1);
      if (ai == 0.0) continue;
      rho_sum.noalias() += (ai * ds(i, k - 1)) * rho_hat[i];
      if (i < k) g_sum.noalias() += (ai * ds(i + 1, k - 1)) * g_hat[i];
    }
    g_hat[k] = (eps * eps * ds(2, k - 1)) * state.gtilde +
               dt * ((0.5 * eps) * (system.d_diff * expl_sum) -
                     system.d_g * rho_sum - g_sum);
  }

  State out;
  out.epsilon = eps;
  out.rho = rho_hat[s] / ds(2, s - 1);
  out.gtilde = g_hat[s] / ds(2, s);
  require_finite(out, "stable_ars_step");
  return out;
}

namespace {

template <class Op>
Vector explicit_rk(const Op& l, const ImexTableau& tab, const Vector& u, double dt) {
  const int s = tab.stages;
  std::vector<Vector> k(s);
  Vector out = u;
  for (int j = 0; j < s; ++j) {
    Vector stage = u;
    for (int i = 0; i < j; ++i) {
      if (tab.a_expl(j, i) != 0.0) stage.noalias() += (dt * tab.a_expl(j, i)) * k[i];
    }
    k[j] = l * stage;
    if (tab.b_expl[j] != 0.0) out.noalias() += (dt * tab.b_expl[j]) * k[j];
  }
  return out;
}

}  // namespace

Vector explicit_limit_step(const SparseMatrix& l, const ImexTableau& tab,
                           const Vector& u, double dt) {
  return explicit_rk(l, tab, u, dt);
}

Vector explicit_limit_step(const Matrix& l, const ImexTableau& tab,
                           const Vector& u, double dt) {
  return explicit_rk(l, tab, u, dt);
}

ImplicitHeatStepper::ImplicitHeatStepper(const Matrix& l, double dt, Method method)
    : l_(l), dt_(dt), method_(method) {
  if (l.rows() != l.cols()) throw std::invalid_argument("ImplicitHeatStepper: L must be square");
  const double theta = method == Method::Euler ? 1.0 : 0.5;
  const Matrix a = Matrix::Identity(l.rows(), l.cols()) - (theta * dt) * l;
  lu_.compute(a);
  rcond_ = lu_.rcond();
  if (!(rcond_ > std::numeric_limits<double>::epsilon())) {
    std::ostringstream msg;
    msg << "ImplicitHeatStepper: (I - " << theta << " dt L) is numerically singular"
        << " (rcond estimate " << rcond_ << ", dt = " << dt << ")";
    throw std::runtime_error(msg.str());
  }
}

Vector ImplicitHeatStepper::step(const Vector& u) const {
  if (method_ == Method::Euler) return lu_.solve(u);
  return lu_.solve(u + (0.5 * dt_) * (l_ * u));
}

Vector implicit_euler_heat_step(const Matrix& l, const Vector& u, double dt) {
  if (dt == 0.0) return u;
  return ImplicitHeatStepper(l, dt, ImplicitHeatStepper::Method::Euler).step(u);
}

Vector implicit_midpoint_heat_step(const Matrix& l, const Vector& u, double dt) {
  if (dt == 0.0) return u;
  return ImplicitHeatStepper(l, dt, ImplicitHeatStepper::Method::Midpoint).step(u);
}

}  // namespace dodtel
