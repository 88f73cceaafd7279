#include "dodtel/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <Eigen/SVD>
#include <json.hpp>

#include "dodtel/sbp_verify.hpp"
#include "dodtel/time_integration.hpp"

#ifndef DODTEL_VERSION
#define DODTEL_VERSION "unknown"
#endif

namespace dodtel {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

template <class T, class F>
std::string join(const std::vector<T>& values, F&& f) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += f(values[i]);
  }
  return out;
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ResultTable make_table(const ExperimentConfig& config, std::vector<std::string> columns) {
  ResultTable t;
  t.experiment = std::string(to_string(config.kind));
  t.columns = std::move(columns);
  auto& md = t.metadata;
  md["experiment"] = t.experiment;
  md["version"] = DODTEL_VERSION;
  md["timestamp"] = timestamp();
  md["degrees"] = join(config.degrees, [](int p) { return std::to_string(p); });
  md["pairings"] = join(config.pairings, [](Pairing p) { return std::string(to_string(p)); });
  md["cells"] = join(config.cells, [](int n) { return std::to_string(n); });
  md["alphas"] = join(config.alphas, fmt17);
  md["epsilons"] = join(config.epsilons, fmt17);
  md["tableaux"] = join(config.tableaux, [](const std::string& s) { return s; });
  md["t_final"] = fmt17(config.t_final);
  md["seed"] = std::to_string(config.seed);
  md["cut_side"] = config.side == CutSide::SmallLeft ? "small-left" : "small-right";
  md["placement_offset"] = std::to_string(config.placement_offset);
  md["domain"] = "[-pi, pi]";
  md["cut_placement"] = "evenly spaced background indices floor(k n / m) + offset";
  md["lambda_c"] = "p=0: 1.0, p=1: 0.55, p>=2: 0.45 (values for p>=3 extrapolated)";
  md["eta_c"] = "clip(1 - alpha / lambda_c(p), 0, 1)";
  return t;
}

void add_check(ResultTable& t, std::string name, bool ok, std::string detail) {
  t.verdicts.push_back({std::move(name), ok, std::move(detail)});
}

bool is_alternating(Pairing p) { return p != Pairing::Central; }

double m_norm(const Vector& u, const Vector& mass) {
  return std::sqrt(u.dot(mass.cwiseProduct(u)));
}

// One IMEX step choosing the round-off-stable formulation where it applies.
State telegraph_step(const SplitSystem& sys, const ImexTableau& tab, const State& u, double dt) {
  if (tab.type == TableauType::ARS && tab.gsa) return stable_ars_step(sys, tab, u, dt);
  return imex_step(sys, tab, u, dt);
}

int steps_for(double t_final, double dt_max) {
  return std::max(1, static_cast<int>(std::ceil(t_final / dt_max - 1e-12)));
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Convergence: return "convergence";
    case ExperimentKind::Asymptotic: return "asymptotic";
    case ExperimentKind::Condition: return "condition";
    case ExperimentKind::HeatImplicit: return "heat-implicit";
    case ExperimentKind::SbpCheck: return "sbp-check";
  }
  return "?";
}

ExperimentKind parse_experiment(std::string_view name) {
  for (auto k : {ExperimentKind::Convergence, ExperimentKind::Asymptotic,
                 ExperimentKind::Condition, ExperimentKind::HeatImplicit,
                 ExperimentKind::SbpCheck}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown experiment '" + std::string(name) + "'");
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.tableaux = {"ARS443"};
  switch (kind) {
    case ExperimentKind::Convergence:
      c.degrees = {0, 1, 2};
      c.pairings = {Pairing::MinusPlus, Pairing::Central};
      c.cells = {16, 32, 64, 128};
      c.alphas = {1e-7, 1e-3, 1e-1, 0.3, 0.49};
      c.epsilons = {1e-1, 1e-3};
      c.t_final = 1.0;
      break;
    case ExperimentKind::Asymptotic:
      c.degrees = {0, 1, 2};
      c.pairings = {Pairing::MinusPlus, Pairing::Central};
      c.cells = {16};
      c.alphas = {1e-7, 1e-3, 1e-1, 0.3, 0.49};
      c.epsilons = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-10};
      c.tableaux = {"ARS443", "SSP2-332"};
      c.t_final = 0.5;
      break;
    case ExperimentKind::Condition:
      c.degrees = {0, 1, 2, 3, 4, 5};
      c.pairings = {Pairing::MinusPlus, Pairing::Central};
      c.cells = {128};
      c.alphas = {1e-7, 1e-3, 1e-1, 0.25, 0.4, 0.49};
      c.t_final = 0.0;
      break;
    case ExperimentKind::HeatImplicit:
      c.degrees = {0, 1, 2};
      c.pairings = {Pairing::MinusPlus, Pairing::Central};
      c.cells = {32};
      c.alphas = {1e-7, 1e-3, 1e-1, 0.25, 0.4, 0.49};
      c.t_final = 5.0;
      break;
    case ExperimentKind::SbpCheck:
      c.degrees = {0, 1, 2, 3, 4};
      c.pairings = {Pairing::MinusPlus, Pairing::PlusMinus, Pairing::Central};
      c.cells = {16};
      c.alphas = {1e-7, 1e-3, 0.3, 0.49};
      c.epsilons = {1.0, 1e-3};
      c.t_final = 0.0;
      break;
  }
  return c;
}

void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (c.degrees.empty()) fail("at least one polynomial degree is required");
  for (int p : c.degrees) {
    if (p < 0 || p > 10) fail("polynomial degree " + std::to_string(p) + " outside [0, 10]");
  }
  if (c.pairings.empty()) fail("at least one flux pairing is required");
  if (c.cells.empty()) fail("at least one background cell count is required");
  for (int n : c.cells) {
    if (n < 4) fail("background cell count " + std::to_string(n) + " below 4");
  }
  for (double a : c.alphas) {
    if (!(a > 0.0 && a < 0.5)) fail("cut fraction " + fmt_short(a) + " outside (0, 1/2)");
  }
  for (int n : c.cells) {
    if (static_cast<std::size_t>(2 * c.alphas.size()) > static_cast<std::size_t>(n)) {
      fail(std::to_string(c.alphas.size()) + " cuts do not fit on " + std::to_string(n) +
           " background cells without touching");
    }
  }
  const bool needs_eps = c.kind == ExperimentKind::Asymptotic || c.kind == ExperimentKind::SbpCheck ||
                         (c.kind == ExperimentKind::Convergence && !c.heat_limit);
  if (needs_eps && c.epsilons.empty()) fail("at least one epsilon is required");
  for (double e : c.epsilons) {
    if (!(e > 0.0)) fail("epsilon must be positive");
    if ((c.kind == ExperimentKind::Convergence || c.kind == ExperimentKind::Asymptotic) && e > 0.5) {
      fail("epsilon " + fmt_short(e) + " > 1/2: the reference solution is not real");
    }
  }
  if (c.kind == ExperimentKind::Convergence || c.kind == ExperimentKind::Asymptotic ||
      c.kind == ExperimentKind::HeatImplicit) {
    if (!(c.t_final > 0.0)) fail("final time must be positive");
    if (c.tableaux.empty() && c.kind != ExperimentKind::HeatImplicit) fail("a tableau is required");
    for (const auto& name : c.tableaux) builtin_tableau(name);
  }
  if (c.energy_trials < 1) fail("energy trials must be positive");
  if (c.condition_dt_divisor < 0.0) fail("condition dt divisor must be non-negative");
  if (c.history_samples < 1) fail("history samples must be positive");
}

double convergence_dt(int p, double epsilon, double dx) {
  static constexpr double c_pre[] = {0.5, 0.3, 0.15};
  const double c = c_pre[std::min(p, 2)];
  return c / (2 * p + 1) * epsilon * dx;
}

double parabolic_dt(int p, double dx) {
  static constexpr double c_par[] = {0.08, 0.03, 0.006};
  const double c = c_par[std::min(p, 2)];
  return c / (2 * p + 1) * dx * dx;
}

double condition_dt(int p, double dx, double divisor) {
  return dx * dx / (20.0 * (2 * p + 1) * divisor);
}

double heat_implicit_dt(int p, double dx) { return dx / (10.0 * (2 * p + 1)); }

CutCellMesh experiment_mesh(int n_background, const std::vector<double>& alphas, CutSide side,
                            int offset) {
  return CutCellMesh::build(-kPi, kPi, n_background,
                            evenly_spaced_cuts(n_background, alphas, side, offset));
}

// ---------------------------------------------------------------------------
// ResultTable

void ResultTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw std::logic_error("ResultTable: row width does not match the column set");
  }
  rows.push_back(std::move(row));
}

bool ResultTable::passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
}

std::size_t ResultTable::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::out_of_range("no column '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

double ResultTable::number(std::size_t row, const std::string& name) const {
  const Cell& c = rows.at(row).at(column(name));
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  throw std::invalid_argument("column '" + name + "' is not numeric");
}

std::string ResultTable::text(std::size_t row, const std::string& name) const {
  const Cell& c = rows.at(row).at(column(name));
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* d = std::get_if<double>(&c)) return fmt17(*d);
  return std::to_string(std::get<std::int64_t>(c));
}

void ResultTable::write_csv(std::ostream& out) const {
  for (std::size_t j = 0; j < columns.size(); ++j) out << (j ? "," : "") << columns[j];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ",";
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              out << fmt17(v);
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
              out << v;
            } else {
              out << v;
            }
          },
          row[j]);
    }
    out << "\n";
  }
}

void ResultTable::write_json(std::ostream& out) const {
  using nlohmann::ordered_json;
  ordered_json j;
  j["experiment"] = experiment;
  j["metadata"] = ordered_json::object();
  for (const auto& [k, v] : metadata) j["metadata"][k] = v;
  j["columns"] = columns;
  j["rows"] = ordered_json::array();
  for (const auto& row : rows) {
    ordered_json r = ordered_json::object();
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              // JSON has no NaN / inf: emit them as strings.
              if (std::isfinite(v)) {
                r[columns[c]] = v;
              } else {
                r[columns[c]] = fmt17(v);
              }
            } else {
              r[columns[c]] = v;
            }
          },
          row[c]);
    }
    j["rows"].push_back(std::move(r));
  }
  j["verdicts"] = ordered_json::array();
  for (const auto& v : verdicts) {
    j["verdicts"].push_back({{"name", v.name}, {"passed", v.passed}, {"detail", v.detail}});
  }
  j["passed"] = passed();
  out << std::setprecision(17) << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// condition numbers

double weighted_condition_number(const Matrix& a, const Vector& mass) {
  if (a.rows() != a.cols() || a.rows() != mass.size()) {
    throw std::invalid_argument("weighted_condition_number: dimension mismatch");
  }
  if ((mass.array() <= 0.0).any()) {
    throw std::invalid_argument("weighted_condition_number: M must be positive definite");
  }
  const Vector s = mass.cwiseSqrt();
  const Matrix b = s.asDiagonal() * a * s.cwiseInverse().asDiagonal();
  Eigen::BDCSVD<Matrix> svd(b);
  const Vector& sv = svd.singularValues();
  const double smin = sv[sv.size() - 1];
  if (!(smin > 0.0)) return kInf;
  return sv[0] / smin;
}

double weighted_condition_number(const Matrix& a, const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() != a.rows()) {
    throw std::invalid_argument("weighted_condition_number: dimension mismatch");
  }
  const Matrix off = m - Matrix(m.diagonal().asDiagonal());
  if (max_abs(off) == 0.0) return weighted_condition_number(a, Vector(m.diagonal()));
  // General SPD weight: similarity with the symmetric square root.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    throw std::invalid_argument("weighted_condition_number: M must be positive definite");
  }
  const Matrix half = eig.operatorSqrt();
  const Matrix half_inv = eig.operatorInverseSqrt();
  Eigen::BDCSVD<Matrix> svd(Matrix(half * a * half_inv));
  const Vector& sv = svd.singularValues();
  const double smin = sv[sv.size() - 1];
  if (!(smin > 0.0)) return kInf;
  return sv[0] / smin;
}

double reference_condition_number(const std::string& variant, Pairing pairing, int p) {
  // rows p = 0..5; columns (alternating, central)
  static constexpr double background[6][2] = {{1.0318, 1.0080}, {1.0955, 1.0424},
                                              {1.236, 1.1039},  {1.4990, 1.2004},
                                              {1.9242, 1.3424}, {2.5501, 1.5402}};
  static constexpr double unstabilized[6][2] = {
      {7.9578e11, 3.9790e4},  {3.5257e12, 7.9578e12}, {7.668e12, 2.8648e12},
      {1.4353e13, 5.9011e12}, {2.4982e13, 9.9692e12}, {4.0679e13, 1.5298e13}};
  static constexpr double dod[6][2] = {{1.0579, 1.0095}, {1.3269, 1.0891},
                                       {2.1555, 1.4514}, {4.5745, 2.1256},
                                       {12.0600, 4.9771}, {31.2335, 9.4726}};
  if (p < 0 || p > 5) return kNaN;
  // The (D+, D-) ordering is not tabulated separately; it shares the column.
  const int col = pairing == Pairing::Central ? 1 : 0;
  if (variant == "background") return background[p][col];
  if (variant == "unstabilized") return unstabilized[p][col];
  if (variant == "dod") return dod[p][col];
  return kNaN;
}

// ---------------------------------------------------------------------------
// experiments

ResultTable run_convergence(const ExperimentConfig& config) {
  validate(config);
  ResultTable t = make_table(
      config, {"model", "tableau", "pairing", "p", "epsilon", "N", "dx", "dt", "steps",
               "err_rho", "err_g", "eoc_rho", "eoc_g", "status"});
  t.metadata["dt_rule"] = config.heat_limit ? "C_par(p)/(2p+1) dx^2, C_par = 0.08, 0.03, 0.006"
                                            : "C_pre(p)/(2p+1) eps dx, C_pre = 0.5, 0.3, 0.15";
  t.metadata["model"] = config.heat_limit ? "heat" : "telegraph";
  t.metadata["l2_quadrature"] = "p+4 Gauss points per cell";

  const std::vector<double> eps_list =
      config.heat_limit ? std::vector<double>{0.0} : config.epsilons;
  std::vector<int> cells = config.cells;
  std::sort(cells.begin(), cells.end());

  for (const auto& tab_name : config.tableaux) {
    const ImexTableau tab = builtin_tableau(tab_name);
    for (Pairing pairing : config.pairings) {
      for (int p : config.degrees) {
        for (double eps : eps_list) {
          double prev_rho = kNaN, prev_g = kNaN;
          double eoc_last = kNaN;
          bool all_ok = true;
          for (int n : cells) {
            const CutCellMesh mesh =
                experiment_mesh(n, config.alphas, config.side, config.placement_offset);
            const DGSpace space(mesh, p);
            const OperatorSet ops = build_operator_set(space);
            const ExactTelegraph exact = exact_telegraph(eps);
            const double dx = mesh.background_dx();
            const double dt_max = config.heat_limit ? parabolic_dt(p, dx) : convergence_dt(p, eps, dx);
            const int steps = steps_for(config.t_final, dt_max);
            const double dt = config.t_final / steps;
            const double tf = config.t_final;

            std::string status = "ok";
            double err_rho = kNaN, err_g = kNaN;
            try {
              if (config.heat_limit) {
                const HeatSystem heat = heat_system(ops, pairing);
                Vector u = space.project([&](double x) { return exact.rho(x, 0.0); });
                for (int k = 0; k < steps; ++k) {
                  u = explicit_limit_step(heat.L_sparse, tab, u, dt);
                }
                if (!u.allFinite()) throw std::runtime_error("non-finite state");
                const Vector g = -(operator_pair(ops, pairing).d_g * u);
                err_rho = space.l2_error(u, [&](double x) { return exact.rho(x, tf); });
                err_g = space.l2_error(g, [&](double x) { return exact.gtilde(x, tf); });
              } else {
                const TelegraphSystem sys = telegraph_system(ops, pairing, eps);
                State u;
                u.epsilon = eps;
                u.rho = space.project([&](double x) { return exact.rho(x, 0.0); });
                u.gtilde = space.project([&](double x) { return exact.gtilde(x, 0.0); });
                for (int k = 0; k < steps; ++k) u = telegraph_step(sys.split, tab, u, dt);
                err_rho = space.l2_error(u.rho, [&](double x) { return exact.rho(x, tf); });
                err_g = space.l2_error(u.gtilde, [&](double x) { return exact.gtilde(x, tf); });
              }
              if (!std::isfinite(err_rho) || !std::isfinite(err_g)) status = "unstable";
            } catch (const std::runtime_error&) {
              status = "unstable";
              err_rho = err_g = kNaN;
            }
            all_ok = all_ok && status == "ok";
            const double eoc_rho = std::log2(prev_rho / err_rho);
            const double eoc_g = std::log2(prev_g / err_g);
            eoc_last = eoc_rho;
            t.add_row({config.heat_limit ? "heat" : "telegraph", tab.name,
                       std::string(to_string(pairing)), std::int64_t{p}, eps, std::int64_t{n}, dx,
                       dt, std::int64_t{steps}, err_rho, err_g, eoc_rho, eoc_g, status});
            prev_rho = err_rho;
            prev_g = err_g;
          }
          if (is_alternating(pairing) && cells.size() >= 2) {
            const double need = p + 0.8;
            std::ostringstream name;
            name << (config.heat_limit ? "heat" : "telegraph") << " " << tab.name << " "
                 << to_string(pairing) << " p=" << p;
            if (!config.heat_limit) name << " eps=" << eps;
            name << ": EOC(rho) on finest pair >= " << need;
            add_check(t, name.str(), all_ok && eoc_last >= need,
                      "measured " + fmt_short(eoc_last));
          }
        }
      }
    }
  }
  return t;
}

ResultTable run_asymptotic(const ExperimentConfig& config) {
  validate(config);
  ResultTable t = make_table(config, {"tableau", "formulation", "pairing", "p", "epsilon", "N",
                                      "dt", "steps", "diff_l2", "rho_norm", "ap_residual",
                                      "status"});
  t.metadata["dt_rule"] = "C_par(p)/(2p+1) dx^2, C_par = 0.08, 0.03, 0.006";
  t.metadata["initial_data"] = "rho0 = sin(x)/r at the nodes, g0 = -D^g rho0";
  t.metadata["limit_scheme"] = "explicit part of the same tableau applied to L = D^rho D^g";

  for (const auto& tab_name : config.tableaux) {
    const ImexTableau tab = builtin_tableau(tab_name);
    const bool stable = tab.type == TableauType::ARS && tab.gsa;
    for (Pairing pairing : config.pairings) {
      for (int p : config.degrees) {
        for (int n : config.cells) {
          const CutCellMesh mesh =
              experiment_mesh(n, config.alphas, config.side, config.placement_offset);
          const DGSpace space(mesh, p);
          const OperatorSet ops = build_operator_set(space);
          const HeatSystem heat = heat_system(ops, pairing);
          const double dx = mesh.background_dx();
          const int steps = steps_for(config.t_final, parabolic_dt(p, dx));
          const double dt = config.t_final / steps;

          std::vector<std::pair<double, double>> series;  // (eps, diff)
          for (double eps : config.epsilons) {
            const ExactTelegraph exact = exact_telegraph(eps);
            const auto rho0 = [&](double x) { return std::sin(x) / exact.r; };
            State u = well_prepared_init(space, ops, pairing, rho0, eps);
            Vector h = space.project(rho0);
            const TelegraphSystem sys = telegraph_system(ops, pairing, eps);
            std::string status = "ok";
            double diff = kNaN, residual = kNaN;
            try {
              for (int k = 0; k < steps; ++k) {
                u = telegraph_step(sys.split, tab, u, dt);
                h = explicit_limit_step(heat.L_sparse, tab, h, dt);
              }
              if (!h.allFinite()) throw std::runtime_error("non-finite heat state");
              diff = m_norm(u.rho - h, ops.mass);
              residual = (u.gtilde + sys.split.d_g * u.rho).norm() / u.rho.norm();
            } catch (const std::runtime_error&) {
              status = "unstable";
            }
            series.emplace_back(eps, diff);
            t.add_row({tab.name, stable ? "stable-ars" : "imex", std::string(to_string(pairing)),
                       std::int64_t{p}, eps, std::int64_t{n}, dt, std::int64_t{steps}, diff,
                       m_norm(u.rho, ops.mass), residual, status});
          }

          std::ostringstream key;
          key << tab.name << " " << to_string(pairing) << " p=" << p << " N=" << n;
          // Monotone decrease over the regular sweep eps >= 1e-6 (in list order).
          std::vector<std::pair<double, double>> regular;
          for (const auto& e : series) {
            if (e.first >= 1e-6 * (1 - 1e-12)) regular.push_back(e);
          }
          bool monotone = regular.size() >= 2;
          std::string detail;
          for (std::size_t i = 0; i < regular.size(); ++i) {
            if (i) detail += " ";
            detail += fmt_short(regular[i].second);
            if (i > 0 && !(regular[i].first < regular[i - 1].first &&
                           regular[i].second < regular[i - 1].second)) {
              monotone = false;
            }
          }
          add_check(t, key.str() + ": difference decreases monotonically for eps >= 1e-6",
                    monotone, detail);

          if (stable) {
            double at6 = kNaN, tiny = kNaN, tiny_eps = kNaN;
            for (const auto& [e, d] : series) {
              if (std::abs(e - 1e-6) <= 1e-18) at6 = d;
              if (e < 1e-6 * (1 - 1e-12) && !(tiny_eps <= e)) {
                tiny = d;
                tiny_eps = e;
              }
            }
            if (std::isfinite(at6) && !std::isnan(tiny_eps)) {
              add_check(t, key.str() + ": eps=" + fmt_short(tiny_eps) + " value <= 2x eps=1e-6 value",
                        tiny <= 2.0 * at6, fmt_short(tiny) + " vs " + fmt_short(at6));
            }
          }
        }
      }
    }
  }
  return t;
}

ResultTable run_condition(const ExperimentConfig& config) {
  validate(config);
  ResultTable t = make_table(config, {"variant", "pairing", "p", "N", "dt", "kappa",
                                      "kappa_literal_dt", "reference", "rel_dev",
                                      "placement_spread"});
  const double length = 2.0 * kPi;
  const double divisor = config.condition_dt_divisor > 0.0 ? config.condition_dt_divisor : length;
  t.metadata["dt_rule"] = "dx^2 / (20 (2p+1) * " + fmt17(divisor) + ")";
  t.metadata["kappa_literal_dt"] = "same matrix with dt = dx^2 / (20 (2p+1))";
  t.metadata["placements"] = "offsets 0..4 of the evenly spaced cut indices";

  struct Variant {
    const char* name;
    bool cuts;
    bool stabilized;
  };
  const Variant variants[] = {{"background", false, false},
                              {"unstabilized", true, false},
                              {"dod", true, true}};
  constexpr int kPlacements = 5;

  for (const Variant& v : variants) {
    for (Pairing pairing : config.pairings) {
      for (int p : config.degrees) {
        for (int n : config.cells) {
          auto kappa_for = [&](int offset, double div) {
            const CutCellMesh mesh =
                v.cuts ? experiment_mesh(n, config.alphas, config.side, offset)
                       : CutCellMesh::build(-kPi, kPi, n);
            const DGSpace space(mesh, p);
            const EtaMap eta = v.stabilized ? default_eta(space) : constant_eta(mesh, 0.0);
            const OperatorSet ops = build_operator_set(space, eta);
            const auto [d_rho, d_g] = operator_pair(ops, pairing);
            const double dt = condition_dt(p, mesh.background_dx(), div);
            const Matrix a = Matrix::Identity(space.num_dofs(), space.num_dofs()) - dt * (d_rho * d_g);
            return std::pair{weighted_condition_number(a, ops.mass), dt};
          };
          const auto [kappa, dt] = kappa_for(config.placement_offset, divisor);
          const double kappa_literal = kappa_for(config.placement_offset, 1.0).first;
          double lo = kappa, hi = kappa;
          if (v.cuts) {
            for (int k = 1; k < kPlacements; ++k) {
              const double kk = kappa_for(config.placement_offset + k, divisor).first;
              lo = std::min(lo, kk);
              hi = std::max(hi, kk);
            }
          }
          const double spread = (hi - lo) / kappa;
          const double ref = n == 128 ? reference_condition_number(v.name, pairing, p) : kNaN;
          const double rel = kappa / ref - 1.0;
          t.add_row({std::string(v.name), std::string(to_string(pairing)), std::int64_t{p},
                     std::int64_t{n}, dt, kappa, kappa_literal, ref, rel, spread});

          if (p <= 2 && std::isfinite(ref)) {
            std::ostringstream name;
            name << v.name << " " << to_string(pairing) << " p=" << p << ": kappa ";
            std::ostringstream detail;
            detail << "measured " << fmt_short(kappa) << ", reference " << fmt_short(ref);
            if (std::string(v.name) == "unstabilized") {
              const double orders = std::abs(std::log10(kappa / ref));
              name << "within one order of magnitude of the reference";
              detail << ", log10 ratio " << fmt_short(orders);
              add_check(t, name.str(), orders <= 1.0, detail.str());
            } else {
              const double tol = spread > 0.01 ? 0.10 : 0.01;
              name << "within " << tol * 100 << "% of the reference";
              detail << ", deviation " << fmt_short(100 * rel) << "%, placement spread "
                     << fmt_short(100 * spread) << "%";
              add_check(t, name.str(), std::abs(rel) <= tol, detail.str());
            }
          }
        }
      }
    }
  }
  return t;
}

ResultTable run_heat_implicit(const ExperimentConfig& config) {
  validate(config);
  ResultTable t = make_table(config, {"variant", "pairing", "p", "kind", "step", "t", "x",
                                      "value", "max_abs", "norm_m", "status"});
  t.metadata["dt_rule"] = "dx / (10 (2p+1))";
  t.metadata["initial_data"] = "rho(x, 0) = cos(x)";
  t.metadata["stepper"] = "implicit midpoint";

  struct Variant {
    const char* name;
    bool cuts;
    bool stabilized;
  };
  const Variant variants[] = {{"background", false, false},
                              {"unstabilized", true, false},
                              {"dod", true, true}};

  for (const Variant& v : variants) {
    for (Pairing pairing : config.pairings) {
      for (int p : config.degrees) {
        for (int n : config.cells) {
          const CutCellMesh mesh = v.cuts ? experiment_mesh(n, config.alphas, config.side,
                                                            config.placement_offset)
                                          : CutCellMesh::build(-kPi, kPi, n);
          const DGSpace space(mesh, p);
          const EtaMap eta = v.stabilized ? default_eta(space) : constant_eta(mesh, 0.0);
          const OperatorSet ops = build_operator_set(space, eta);
          const HeatSystem heat = heat_system(ops, pairing);
          const int steps = steps_for(config.t_final, heat_implicit_dt(p, mesh.background_dx()));
          const double dt = config.t_final / steps;

          Vector u = space.project([](double x) { return std::cos(x); });
          const double norm0 = m_norm(u, ops.mass);
          double max_abs_seen = u.cwiseAbs().maxCoeff();
          double max_norm_seen = norm0;
          std::string status = "ok";
          const int stride = std::max(1, steps / config.history_samples);
          auto record = [&](int k) {
            t.add_row({std::string(v.name), std::string(to_string(pairing)), std::int64_t{p},
                       "history", std::int64_t{k}, k * dt, kNaN, kNaN,
                       u.cwiseAbs().maxCoeff(), m_norm(u, ops.mass), status});
          };
          record(0);
          int k = 0;
          try {
            const ImplicitHeatStepper stepper(heat.L, dt, ImplicitHeatStepper::Method::Midpoint);
            for (k = 1; k <= steps; ++k) {
              u = stepper.step(u);
              if (!u.allFinite()) {
                status = "overflow";
                break;
              }
              max_abs_seen = std::max(max_abs_seen, u.cwiseAbs().maxCoeff());
              max_norm_seen = std::max(max_norm_seen, m_norm(u, ops.mass));
              if (k % stride == 0 || k == steps) record(k);
            }
          } catch (const std::runtime_error&) {
            status = "singular";
          }
          if (status != "ok") record(k);

          if (status == "ok") {
            for (int c = 0; c < space.num_cells(); ++c) {
              for (int j = 0; j < space.nodes_per_cell(); ++j) {
                t.add_row({std::string(v.name), std::string(to_string(pairing)),
                           std::int64_t{p}, "profile", std::int64_t{steps}, config.t_final,
                           space.physical_node(c, j), u[space.dof(c, j)], kNaN, kNaN, status});
              }
            }
          }

          std::ostringstream key;
          key << v.name << " " << to_string(pairing) << " p=" << p << " N=" << n;
          const std::string name(v.name);
          if (name == "dod") {
            add_check(t, key.str() + ": max|rho| <= 1 + 1e-6 throughout",
                      status == "ok" && max_abs_seen <= 1.0 + 1e-6,
                      "max " + fmt17(max_abs_seen));
          } else if (name == "unstabilized") {
            add_check(t, key.str() + ": ||rho||_M exceeds 1e3 before the final time",
                      status == "overflow" || max_norm_seen > 1e3,
                      "max ||rho||_M " + fmt_short(max_norm_seen) + " (initial " +
                          fmt_short(norm0) + ")");
          } else {
            const double ratio = m_norm(u, ops.mass) / (std::exp(-config.t_final) * norm0);
            add_check(t, key.str() + ": ||rho(T)||_M within 5% of e^{-T} ||rho(0)||_M",
                      status == "ok" && std::abs(ratio - 1.0) <= 0.05,
                      "ratio " + fmt_short(ratio));
          }
        }
      }
    }
  }
  return t;
}

ResultTable run_sbp_report(const ExperimentConfig& config) {
  validate(config);
  ResultTable t = make_table(config, {"p", "alpha", "eta_mode", "eta", "weights", "pairing",
                                      "epsilon", "skew", "duality", "dissipation_eig",
                                      "energy_bound", "verdict"});
  t.metadata["thresholds"] = "skew, duality, eigenvalue <= 1e-11; energy <= 1e-9 relative";
  t.metadata["energy_trials"] = std::to_string(config.energy_trials);

  const int n = config.cells.front();
  std::size_t failures = 0, checked = 0;
  std::string first_failure;
  for (int p : config.degrees) {
    for (double alpha : config.alphas) {
      const std::vector<double> one{alpha};
      const CutCellMesh mesh = experiment_mesh(n, one, config.side, config.placement_offset);
      const DGSpace space(mesh, p);
      const int c = mesh.small_cells().front();
      const double eta_default = default_eta(space).at(c);
      const std::pair<const char*, double> etas[] = {
          {"zero", 0.0}, {"half", 0.5}, {"default", eta_default}};
      for (const auto& [mode, eta_value] : etas) {
        const EtaMap eta = constant_eta(mesh, eta_value);
        const OperatorSet ops = build_operator_set(space, eta);
        const double skew = check_periodic_sbp(ops.mass, ops.Dz);
        const auto [duality, eig] = check_upwind_sbp(ops.mass, ops.Dp_symm, ops.Dm_symm);
        for (Pairing pairing : config.pairings) {
          for (double eps : config.epsilons) {
            const double energy =
                check_energy_decay(ops, pairing, eps, config.energy_trials, config.seed);
            const bool ok = skew <= kSbpTolerance && duality <= kSbpTolerance &&
                            eig <= kSbpTolerance && energy <= kEnergyTolerance;
            ++checked;
            if (!ok) {
              ++failures;
              if (first_failure.empty()) {
                first_failure = "p=" + std::to_string(p) + " alpha=" + fmt_short(alpha) +
                                " eta=" + mode + " " + std::string(to_string(pairing));
              }
            }
            t.add_row({std::int64_t{p}, alpha, std::string(mode), eta_value, "symmetric",
                       std::string(to_string(pairing)), eps, skew, duality, eig, energy,
                       ok ? "pass" : "fail"});
          }
        }
        // Flow-based volume weights without symmetrization: diagnostic only.
        if (eta_value > 0.0) {
          const Matrix dp = assemble_stabilized(space, FluxKind::Downwind, eta, VolumeWeights::FlowBased);
          const Matrix dm = assemble_stabilized(space, FluxKind::Upwind, eta, VolumeWeights::FlowBased);
          const auto [fd, fe] = check_upwind_sbp(ops.mass, dp, dm);
          t.add_row({std::int64_t{p}, alpha, std::string(mode), eta_value, "flow-based", "-",
                     kNaN, skew, fd, fe, kNaN, "diagnostic"});
        }
      }
    }
  }
  add_check(t, "all symmetrized rows satisfy the SBP, duality, dissipation and energy bounds",
            failures == 0,
            std::to_string(checked - failures) + "/" + std::to_string(checked) + " pass" +
                (first_failure.empty() ? "" : ", first failure: " + first_failure));
  return t;
}

ResultTable run_experiment(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::Convergence: return run_convergence(config);
    case ExperimentKind::Asymptotic: return run_asymptotic(config);
    case ExperimentKind::Condition: return run_condition(config);
    case ExperimentKind::HeatImplicit: return run_heat_implicit(config);
    case ExperimentKind::SbpCheck: return run_sbp_report(config);
  }
  throw std::logic_error("unknown experiment kind");
}

void write_matrix_csv(std::ostream& out, const Matrix& a) {
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out << (j ? "," : "") << fmt17(a(i, j));
    out << "\n";
  }
}

void dump_operators(const OperatorSet& ops, const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  const std::pair<const char*, const Matrix*> items[] = {
      {"M", &ops.M},         {"Dz", &ops.Dz},           {"Dp_symm", &ops.Dp_symm},
      {"Dm_symm", &ops.Dm_symm}, {"Dp_naive", &ops.Dp_naive}, {"Dm_naive", &ops.Dm_naive},
      {"Ddiss", &ops.Ddiss}};
  for (const auto& [name, m] : items) {
    const fs::path path = fs::path(directory) / (std::string(name) + ".csv");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_matrix_csv(out, *m);
  }
}

}  // namespace dodtel
