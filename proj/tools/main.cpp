// Command line front end for the experiment runners.
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dodtel/experiments.hpp"

namespace {

struct Options {
  std::vector<int> degrees;
  std::vector<std::string> pairings;
  std::vector<double> epsilons;
  std::vector<int> cells;
  std::vector<double> alphas;
  double t_final = -1.0;
  std::vector<std::string> tableaux;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  std::string format = "csv";
  std::string side = "left";
  int offset = 0;
  bool heat = false;
  bool literal_dt = false;
  std::string dump;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--p", o.degrees, "Polynomial degree(s)")->delimiter(',');
  cmd->add_option("--pairing", o.pairings, "Flux pairing(s): mp, pm, central")
      ->delimiter(',')
      ->check(CLI::IsMember({"mp", "pm", "central"}));
  cmd->add_option("--epsilon", o.epsilons, "Relaxation parameter(s), repeatable")->delimiter(',');
  cmd->add_option("--cells", o.cells, "Background cell count(s)")->delimiter(',');
  cmd->add_option("--alphas", o.alphas, "Cut fractions, comma separated")->delimiter(',');
  cmd->add_option("--tfinal", o.t_final, "Final time");
  cmd->add_option("--tableau", o.tableaux, "IMEX tableau(s): ARS443, SSP2-332")
      ->delimiter(',')
      ->check(CLI::IsMember({"ARS443", "SSP2-332"}));
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&o](const std::uint64_t& s) { o.seed = s; o.seed_set = true; }, "RNG seed");
  cmd->add_option("--out", o.out, "Output file (default: stdout)");
  cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--side", o.side, "Position of the small cell inside a cut background cell")
      ->check(CLI::IsMember({"left", "right"}));
  cmd->add_option("--offset", o.offset, "Shift of the evenly spaced cut indices");
  cmd->add_flag("--quiet", o.quiet, "Do not print verdicts to stderr");
}

dodtel::ExperimentConfig build_config(dodtel::ExperimentKind kind, const Options& o) {
  auto c = dodtel::default_config(kind);
  if (!o.degrees.empty()) c.degrees = o.degrees;
  if (!o.pairings.empty()) {
    c.pairings.clear();
    for (const auto& p : o.pairings) c.pairings.push_back(dodtel::parse_pairing(p));
  }
  if (!o.epsilons.empty()) c.epsilons = o.epsilons;
  if (!o.cells.empty()) c.cells = o.cells;
  if (!o.alphas.empty()) c.alphas = o.alphas;
  if (o.t_final >= 0.0) c.t_final = o.t_final;
  if (!o.tableaux.empty()) c.tableaux = o.tableaux;
  if (o.seed_set) c.seed = o.seed;
  c.side = o.side == "right" ? dodtel::CutSide::SmallRight : dodtel::CutSide::SmallLeft;
  c.placement_offset = o.offset;
  c.heat_limit = o.heat;
  if (o.literal_dt) c.condition_dt_divisor = 1.0;
  return c;
}

int emit(const dodtel::ResultTable& table, const Options& o) {
  std::ostringstream buffer;
  if (o.format == "json") {
    table.write_json(buffer);
  } else {
    table.write_csv(buffer);
  }
  if (o.out.empty()) {
    std::cout << buffer.str();
  } else {
    std::ofstream file(o.out);
    if (!file) {
      std::cerr << "error: cannot write " << o.out << "\n";
      return 2;
    }
    file << buffer.str();
  }
  if (!o.quiet) {
    for (const auto& v : table.verdicts) {
      std::cerr << (v.passed ? "PASS " : "FAIL ") << v.name << " [" << v.detail << "]\n";
    }
  }
  return table.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DoD-stabilized cut-cell DG for the telegraph equation and its heat limit"};
  app.require_subcommand(1);
  Options o;

  struct Sub {
    dodtel::ExperimentKind kind;
    const char* description;
  };
  const Sub subs[] = {
      {dodtel::ExperimentKind::Convergence, "L2 errors and EOC under mesh refinement"},
      {dodtel::ExperimentKind::Asymptotic, "telegraph vs heat-limit difference as eps -> 0"},
      {dodtel::ExperimentKind::Condition, "condition numbers of I - dt D^rho D^g"},
      {dodtel::ExperimentKind::HeatImplicit, "implicit midpoint heat simulation"},
      {dodtel::ExperimentKind::SbpCheck, "SBP / duality / energy verification sweep"},
  };
  std::vector<std::pair<CLI::App*, dodtel::ExperimentKind>> commands;
  for (const auto& s : subs) {
    CLI::App* cmd = app.add_subcommand(std::string(dodtel::to_string(s.kind)), s.description);
    add_common(cmd, o);
    if (s.kind == dodtel::ExperimentKind::Convergence) {
      cmd->add_flag("--heat", o.heat, "Integrate the heat limit with the explicit tableau");
    }
    if (s.kind == dodtel::ExperimentKind::Condition) {
      cmd->add_flag("--literal-dt", o.literal_dt, "Use dt = dx^2/(20(2p+1)) without the 1/|Omega| factor");
    }
    if (s.kind == dodtel::ExperimentKind::SbpCheck) {
      cmd->add_option("--dump", o.dump, "Write the assembled operators as CSV into this directory");
    }
    commands.emplace_back(cmd, s.kind);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // help and version exit 0, usage errors exit 2
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (const auto& [cmd, kind] : commands) {
      if (!cmd->parsed()) continue;
      const auto config = build_config(kind, o);
      if (!o.dump.empty()) {
        // One cut per fraction on the first cell count, default eta.
        const auto mesh = dodtel::experiment_mesh(config.cells.front(), config.alphas,
                                                  config.side, config.placement_offset);
        for (int p : config.degrees) {
          const dodtel::DGSpace space(mesh, p);
          dodtel::dump_operators(dodtel::build_operator_set(space),
                                 o.dump + "/p" + std::to_string(p));
        }
      }
      return emit(dodtel::run_experiment(config), o);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
