#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "dodtel/mesh.hpp"
#include "dodtel/models.hpp"
#include "dodtel/operators.hpp"

namespace dodtel {

enum class ExperimentKind { Convergence, Asymptotic, Condition, HeatImplicit, SbpCheck };

std::string_view to_string(ExperimentKind kind);
ExperimentKind parse_experiment(std::string_view name);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Convergence;
  std::vector<int> degrees;
  std::vector<Pairing> pairings;
  std::vector<int> cells;        ///< background cell counts (refinement sequence)
  std::vector<double> alphas;    ///< cut fractions, one cut each
  std::vector<double> epsilons;
  std::vector<std::string> tableaux;
  double t_final = 1.0;
  std::uint64_t seed = 20250101;
  CutSide side = CutSide::SmallLeft;
  int placement_offset = 0;
  /// Convergence only: integrate the heat limit with the explicit tableau.
  bool heat_limit = false;
  /// Condition study: dt = dx^2 / (20 (2p+1) * divisor). The reference values
  /// are reproduced with divisor = |Omega| (see README).
  double condition_dt_divisor = 0.0;  ///< 0 -> domain length
  /// Random states per energy check.
  int energy_trials = 200;
  /// Heat-implicit: history rows per variant (final state always recorded).
  int history_samples = 50;
};

/// Defaults reproducing the reference settings of each experiment.
ExperimentConfig default_config(ExperimentKind kind);

/// Throws std::invalid_argument when a parameter violates a module precondition.
void validate(const ExperimentConfig& config);

/// Step-size rules.
double convergence_dt(int p, double epsilon, double dx);
/// Parabolic, eps-independent rule dt = C_par(p) dx^2 / (2p+1).
double parabolic_dt(int p, double dx);
double condition_dt(int p, double dx, double divisor);
double heat_implicit_dt(int p, double dx);

/// Reference domain [-pi, pi].
CutCellMesh experiment_mesh(int n_background, const std::vector<double>& alphas,
                            CutSide side = CutSide::SmallLeft, int offset = 0);

using Cell = std::variant<double, std::int64_t, std::string>;

struct Verdict {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ResultTable {
  std::string experiment;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::map<std::string, std::string> metadata;
  std::vector<Verdict> verdicts;

  void add_row(std::vector<Cell> row);
  bool passed() const;
  /// Column index; throws std::out_of_range for unknown names.
  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
  std::string text(std::size_t row, const std::string& name) const;

  /// Header row plus one line per row; reals with 17 significant digits.
  void write_csv(std::ostream& out) const;
  /// {"experiment", "metadata", "columns", "rows": [{...}], "verdicts": [...]}.
  void write_json(std::ostream& out) const;
};

/// kappa = ||A||_M ||A^{-1}||_M for diagonal M given by `mass`; infinity when
/// A is singular.
double weighted_condition_number(const Matrix& a, const Vector& mass);
double weighted_condition_number(const Matrix& a, const Matrix& m);

ResultTable run_convergence(const ExperimentConfig& config);
ResultTable run_asymptotic(const ExperimentConfig& config);
ResultTable run_condition(const ExperimentConfig& config);
ResultTable run_heat_implicit(const ExperimentConfig& config);
ResultTable run_sbp_report(const ExperimentConfig& config);
ResultTable run_experiment(const ExperimentConfig& config);

/// Reference condition numbers; NaN where none is known.
double reference_condition_number(const std::string& variant, Pairing pairing, int p);

/// Dense row-major CSV, 17 significant digits, no header.
void write_matrix_csv(std::ostream& out, const Matrix& a);
/// Writes M.csv, Dz.csv, Dp_symm.csv, ... into `directory` (created if needed).
void dump_operators(const OperatorSet& ops, const std::string& directory);

}  // namespace dodtel
