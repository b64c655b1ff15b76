#pragma once

#include <functional>
#include <string>
#include <vector>

#include "scogce/game.hpp"

namespace scogce {

/// Time-domain disturbance d : [0, T] -> R^q.
using DisturbanceSignal = std::function<Eigen::VectorXd(double)>;

DisturbanceSignal zero_disturbance(int q);

/// Parses one scalar expression per disturbance channel. Grammar: sums,
/// differences and products of numbers, t, powers t^k, parentheses and
/// sin/cos/exp calls — enough for signals like "10*sin(t)*exp(-t)".
DisturbanceSignal parse_disturbance(const std::vector<std::string>& exprs);

/// Scalar expression evaluator used by parse_disturbance, exposed for
/// testing.
std::function<double(double)> parse_time_expression(const std::string& s);

struct SimulationResult {
  std::vector<double> times;
  Eigen::MatrixXd states;        // state_dim x n_steps+1
  Eigen::MatrixXd running_cost;  // n_players x n_steps+1 (cost-to-date)
  Eigen::VectorXd final_costs;   // per-player accumulated cost at T
  /// Consensus errors per step when the game carries error selectors;
  /// empty otherwise. Row k is |e_i(t_k)| stacked over players/channels.
  Eigen::MatrixXd error_norms;   // n_players x n_steps+1
};

/// Integrates the closed loop xdot = (A + sum B_i F_i C_i) x + E d(t)
/// with classical fourth-order Runge-Kutta at fixed step, accumulating
/// each player's soft-constrained cost integrand
///   y_i' Q_i y_i + u_i' R_i u_i - d' D_i d
/// with the same scheme. Non-positive t_final or dt select defaults from
/// the closed-loop spectral abscissa (T = 20/|alpha|, dt = min(0.01,
/// 0.1/|alpha|)).
SimulationResult simulate(const GameDefinition& game,
                          const StrategyProfile& profile,
                          const DisturbanceSignal& disturbance,
                          double t_final = -1.0, double dt = -1.0);

}  // namespace scogce
