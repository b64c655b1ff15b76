#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "scogce/care.hpp"
#include "scogce/certify.hpp"
#include "scogce/equilibrium.hpp"
#include "scogce/json_io.hpp"
#include "scogce/linalg.hpp"
#include "scogce/simulate.hpp"

namespace {

using nlohmann::json;
using namespace scogce;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
}

StrategyProfile gains_from_file(const GameDefinition& game,
                                const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open gains file '" + path + "'");
  json j = json::parse(in);
  StrategyProfile profile;
  profile.mode = (j.value("mode", "output") == "state")
                     ? FeedbackMode::StateFeedback
                     : FeedbackMode::OutputFeedback;
  for (const auto& gj : j.at("gains")) {
    Eigen::MatrixXd f(gj.size(), gj[0].size());
    for (size_t r = 0; r < gj.size(); ++r)
      for (size_t c = 0; c < gj[r].size(); ++c)
        f(r, c) = gj[r][c].get<double>();
    profile.gains.push_back(f);
  }
  check_profile_dims(game, profile);
  return profile;
}

// Resolves --profile {zero, scfne} / --gains FILE into a strategy profile.
StrategyProfile resolve_profile(const GameDefinition& game,
                                const std::string& profile_kind,
                                const std::string& gains_file) {
  if (!gains_file.empty()) return gains_from_file(game, gains_file);
  if (profile_kind == "zero")
    return StrategyProfile::zeros(game, game.is_state_feedback_capable()
                                            ? FeedbackMode::StateFeedback
                                            : FeedbackMode::OutputFeedback);
  if (profile_kind == "scfne") {
    ScfneResult scfne = solve_scfne(game);
    if (!scfne.converged)
      throw std::runtime_error("SCFNE iteration did not converge");
    return scfne.profile;
  }
  throw std::runtime_error("unknown profile kind '" + profile_kind + "'");
}

// Grid spec: "delta=LO:HI:STEP" applies one budget to every player;
// "d1=LO:HI:STEP;d2=..." sweeps players independently. Ties like
// "d3=d1" (given via --tie) copy one coordinate from another.
std::vector<Eigen::VectorXd> build_grid(int n_players,
                                        const std::string& spec,
                                        const std::string& tie) {
  struct Axis {
    std::vector<int> players;
    std::vector<double> values;
  };
  std::vector<Axis> axes;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ';')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("bad grid segment '" + part + "'");
    const std::string name = part.substr(0, eq);
    double lo, hi, step;
    if (std::sscanf(part.c_str() + eq + 1, "%lf:%lf:%lf", &lo, &hi, &step) !=
        3)
      throw std::runtime_error("bad grid range in '" + part + "'");
    Axis axis;
    if (name == "delta") {
      for (int i = 0; i < n_players; ++i) axis.players.push_back(i);
    } else if (name.size() > 1 && name[0] == 'd') {
      axis.players.push_back(std::stoi(name.substr(1)) - 1);
    } else {
      throw std::runtime_error("unknown grid axis '" + name + "'");
    }
    for (double v = lo; v <= hi + 1e-12; v += step) axis.values.push_back(v);
    axes.push_back(std::move(axis));
  }
  if (axes.empty()) throw std::runtime_error("empty grid spec");

  std::vector<std::pair<int, int>> ties;  // (target, source)
  if (!tie.empty()) {
    std::stringstream ts(tie);
    std::string t;
    while (std::getline(ts, t, ',')) {
      const auto eq = t.find('=');
      if (eq == std::string::npos || t[0] != 'd' || t[eq + 1] != 'd')
        throw std::runtime_error("bad tie '" + t + "'");
      ties.emplace_back(std::stoi(t.substr(1, eq - 1)) - 1,
                        std::stoi(t.substr(eq + 2)) - 1);
    }
  }

  std::vector<Eigen::VectorXd> grid;
  std::vector<size_t> idx(axes.size(), 0);
  while (true) {
    Eigen::VectorXd deltas = Eigen::VectorXd::Zero(n_players);
    for (size_t a = 0; a < axes.size(); ++a)
      for (int p : axes[a].players) deltas(p) = axes[a].values[idx[a]];
    for (auto [dst, src] : ties) deltas(dst) = deltas(src);
    grid.push_back(deltas);
    size_t a = 0;
    while (a < axes.size() && ++idx[a] == axes[a].values.size())
      idx[a++] = 0;
    if (a == axes.size()) break;
  }
  return grid;
}

DisturbanceSignal resolve_disturbance(const GameDefinition& game,
                                      const StrategyProfile& profile,
                                      const std::string& src) {
  const int q = game.disturbance_dim();
  if (src == "zero" || src.empty()) return zero_disturbance(q);
  if (src.rfind("worst_case:", 0) == 0) {
    const int player = std::stoi(src.substr(11)) - 1;
    auto d = worst_case_disturbance(game, profile, player);
    if (!d)
      throw std::runtime_error(
          "worst-case disturbance undefined (loop not stabilizable)");
    return *d;
  }
  if (src.rfind("expr:", 0) == 0) {
    std::vector<std::string> exprs;
    std::stringstream ss(src.substr(5));
    std::string part;
    while (std::getline(ss, part, ';')) exprs.push_back(part);
    if (static_cast<int>(exprs.size()) == 1 && q > 1)
      exprs.assign(q, exprs[0]);
    if (static_cast<int>(exprs.size()) != q)
      throw std::runtime_error("expression count does not match channels");
    return parse_disturbance(exprs);
  }
  if (src.rfind("file:", 0) == 0) {
    // CSV with columns t, d_1..d_q; zero-order hold between samples.
    std::ifstream in(src.substr(5));
    if (!in) throw std::runtime_error("cannot open disturbance file");
    std::vector<double> times;
    std::vector<Eigen::VectorXd> values;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      std::stringstream ls(line);
      std::string cell;
      std::vector<double> row;
      while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
      if (static_cast<int>(row.size()) != q + 1)
        throw std::runtime_error("disturbance file has wrong column count");
      times.push_back(row[0]);
      values.push_back(to_vector({row.begin() + 1, row.end()}));
    }
    return [times, values, q](double t) {
      if (times.empty()) return Eigen::VectorXd::Zero(q).eval();
      auto it = std::upper_bound(times.begin(), times.end(), t);
      size_t k = it == times.begin() ? 0 : (it - times.begin() - 1);
      return values[k];
    };
  }
  throw std::runtime_error("unknown disturbance source '" + src + "'");
}

std::string out_path(const std::string& dir, const std::string& name) {
  return dir.empty() ? name : dir + "/" + name;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Soft-constrained guaranteed cost equilibria for uncertain "
               "linear-quadratic differential games"};
  app.require_subcommand(1);

  std::string game_path, output_dir = ".";
  std::string deltas_arg, gamma_arg, grid_arg, tie_arg, mode_arg =
                                                            "full_information";
  std::string profile_kind = "zero", gains_file, disturbance_arg = "zero";
  double eps = 1e-6, t_final = -1.0, dt = -1.0, x0_free_alpha = 0.0;
  int max_rounds = 0, workers = 1;
  unsigned seed = 0;
  bool state_feedback = false;

  auto add_game = [&](CLI::App* cmd) {
    cmd->add_option("game", game_path, "game JSON file")->required();
    cmd->add_option("-o,--output-dir", output_dir, "artifact directory");
  };

  auto* validate = app.add_subcommand("validate", "check model assumptions");
  add_game(validate);

  auto* verify = app.add_subcommand(
      "verify", "certify a strategy profile as an equilibrium");
  add_game(verify);
  verify->add_option("--gains", gains_file, "gains JSON file");
  verify->add_option("--profile", profile_kind, "zero|scfne");
  verify->add_option("--deltas", deltas_arg, "comma-separated budgets");
  verify->add_option("--eps", eps);

  auto* synth = app.add_subcommand("synthesize",
                                   "sequential guaranteed cost responses");
  add_game(synth);
  synth->add_flag("--state-feedback", state_feedback);
  synth->add_option("--deltas", deltas_arg);
  synth->add_option("--eps", eps);
  synth->add_option("--gamma-grid", gamma_arg, "comma-separated gammas");
  synth->add_option("--max-rounds", max_rounds);
  synth->add_option("--seed", seed);
  synth->add_option("--x0-free", x0_free_alpha,
                    "bound P < (delta/ALPHA) I instead of using x0");

  auto* scfne = app.add_subcommand("scfne",
                                   "coupled-Riccati feedback Nash solve");
  add_game(scfne);

  auto* coop = app.add_subcommand("cooperative-cost",
                                  "total cost under cooperation");
  add_game(coop);
  coop->add_option("--mode", mode_arg,
                   "full_information|structured_bisection");

  auto* pos = app.add_subcommand("pos", "price of stability of a profile");
  add_game(pos);
  pos->add_option("--profile", profile_kind, "zero|scfne");
  pos->add_option("--gains", gains_file);
  pos->add_option("--mode", mode_arg);

  auto* sweep = app.add_subcommand("sweep", "cost-profile grid sweep");
  add_game(sweep);
  sweep->add_option("--grid", grid_arg, "e.g. delta=1.1:6:0.05")->required();
  std::vector<std::string> tie_args;
  sweep->add_option("--tie", tie_args, "e.g. d1=d3 (repeatable)");
  sweep->add_option("--workers", workers);
  sweep->add_flag("--state-feedback", state_feedback);
  sweep->add_option("--eps", eps);

  auto* sim = app.add_subcommand("simulate", "closed-loop integration");
  add_game(sim);
  sim->add_option("--disturbance", disturbance_arg,
                  "zero|worst_case:I|expr:EXPR|file:CSV");
  sim->add_option("--t-final", t_final);
  sim->add_option("--dt", dt);
  sim->add_option("--profile", profile_kind, "zero|scfne");
  sim->add_option("--gains", gains_file);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  GameFile file;
  try {
    file = load_game_file(game_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  const GameDefinition& game = file.game;

  try {
    if (*validate) {
      const auto violations = validate_game(game);
      json j;
      j["violations"] = violations;
      std::cout << j.dump(2) << "\n";
      return violations.empty() ? kExitOk : kExitValidation;
    }

    const auto violations = validate_game(game);
    if (!violations.empty()) {
      for (const auto& v : violations) std::cerr << "invalid game: " << v
                                                 << "\n";
      return kExitValidation;
    }

    Eigen::VectorXd deltas;
    if (!deltas_arg.empty())
      deltas = to_vector(parse_double_list(deltas_arg));
    else if (file.deltas)
      deltas = *file.deltas;

    if (*verify) {
      if (deltas.size() != game.n_players) {
        std::cerr << "error: verify needs per-player deltas\n";
        return kExitUsage;
      }
      StrategyProfile profile =
          resolve_profile(game, profile_kind, gains_file);
      VerificationReport report = verify_scogce(game, profile, deltas, eps);
      const std::string text = report_to_json(report, game, profile);
      write_text_file(out_path(output_dir, "verify.json"), text);
      std::cout << text << "\n";
      return kExitOk;
    }

    if (*synth) {
      if (deltas.size() != game.n_players) {
        std::cerr << "error: synthesize needs per-player deltas\n";
        return kExitUsage;
      }
      EquilibriumOptions opts;
      opts.eps = eps;
      opts.max_rounds = max_rounds;
      opts.seed = seed;
      if (x0_free_alpha > 0.0) opts.x0_free_alpha = x0_free_alpha;
      if (!gamma_arg.empty()) opts.gamma_grid = parse_double_list(gamma_arg);
      const FeedbackMode mode = state_feedback
                                    ? FeedbackMode::StateFeedback
                                    : FeedbackMode::OutputFeedback;
      EquilibriumRun run;
      try {
        run = run_sequential(game, deltas, mode, opts);
      } catch (const std::runtime_error& e) {
        std::cerr << "solver abort: " << e.what() << "\n";
        return kExitSolver;
      }
      const std::string text = run_to_json(run);
      write_text_file(out_path(output_dir, "synthesis.json"), text);
      if (!run.nslpmm_traces.empty())
        write_text_file(out_path(output_dir, "nslpmm_traces.csv"),
                        nslpmm_trace_csv(run.nslpmm_traces));
      std::cout << text << "\n";
      return kExitOk;
    }

    if (*scfne) {
      ScfneResult result = solve_scfne(game);
      json j;
      j["converged"] = result.converged;
      j["sweeps"] = result.sweeps;
      if (result.converged) {
        j["costs"] = std::vector<double>(
            result.costs.data(), result.costs.data() + result.costs.size());
        j["total_cost"] = result.costs.sum();
        j["stability_abscissas"] = result.stability_abscissas;
        j["structural_residuals"] = result.structural_residuals;
      }
      write_text_file(out_path(output_dir, "scfne.json"), j.dump(2));
      std::cout << j.dump(2) << "\n";
      return result.converged ? kExitOk : kExitSolver;
    }

    if (*coop || *pos) {
      const CooperativeMode mode = mode_arg == "structured_bisection"
                                       ? CooperativeMode::StructuredBisection
                                       : CooperativeMode::FullInformation;
      auto jco = cooperative_cost(game, mode);
      if (!jco) {
        std::cerr << "solver abort: no cooperative solution\n";
        return kExitSolver;
      }
      if (*coop) {
        json j;
        j["mode"] = mode_arg;
        j["cooperative_cost"] = *jco;
        std::cout << j.dump(2) << "\n";
        return kExitOk;
      }
      StrategyProfile profile =
          resolve_profile(game, profile_kind, gains_file);
      auto ratio = price_of_stability(game, profile, *jco);
      if (!ratio) {
        std::cerr << "solver abort: profile has unbounded worst-case cost\n";
        return kExitSolver;
      }
      json j;
      j["cooperative_cost"] = *jco;
      j["price_of_stability"] = *ratio;
      std::cout << j.dump(2) << "\n";
      return kExitOk;
    }

    if (*sweep) {
      for (const auto& t : tie_args) {
        if (!tie_arg.empty()) tie_arg += ',';
        tie_arg += t;
      }
      const auto grid = build_grid(game.n_players, grid_arg, tie_arg);
      EquilibriumOptions opts;
      opts.eps = eps;
      const FeedbackMode mode = state_feedback
                                    ? FeedbackMode::StateFeedback
                                    : FeedbackMode::OutputFeedback;
      auto jco = cooperative_cost(game, CooperativeMode::FullInformation);
      SweepResult result = delta_sweep(game, grid, mode, workers, jco, opts);
      const std::string text = sweep_csv(result, game.n_players);
      write_text_file(out_path(output_dir, "sweep.csv"), text);
      std::cout << "wrote " << result.points.size() << " grid points\n";
      return kExitOk;
    }

    if (*sim) {
      StrategyProfile profile =
          resolve_profile(game, profile_kind, gains_file);
      if (!is_stable(closed_loop_matrix(game, profile)))
        std::cerr << "warning: closed loop is unstable\n";
      DisturbanceSignal d =
          resolve_disturbance(game, profile, disturbance_arg);
      SimulationResult result = simulate(game, profile, d, t_final, dt);
      if (!result.states.allFinite()) {
        std::cerr << "error: state trajectory diverged\n";
        return kExitSolver;
      }
      const std::string text = trajectory_csv(result);
      write_text_file(out_path(output_dir, "trajectory.csv"), text);
      std::cout << "final costs:";
      for (int i = 0; i < game.n_players; ++i)
        std::cout << " " << result.final_costs(i);
      std::cout << "\n";
      return kExitOk;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitUsage;
}
