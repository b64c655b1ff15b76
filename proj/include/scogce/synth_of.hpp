#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scogce/game.hpp"

namespace scogce {

struct OfSynthOptions {
  double eps = 1e-6;
  std::vector<double> gamma_grid = {1e-2, 1e-1, 1.0, 1e1, 1e2};
  int max_iterations = 200;
  /// Relative stationarity tolerance of the nested trace minimization.
  double stationarity_tol = 1e-6;
  /// Relative gap to the lower bound tr(PW) = n accepted as "boundary".
  double boundary_tol = 1e-4;
  /// When set, replaces the x0-dependent cost bound x0'P x0 < delta by
  /// P < (delta/alpha) I, valid for every x0 with |x0|^2 < alpha.
  std::optional<double> x0_free_alpha;

  /// Overrides for team-cost responses: a factor L with L L' equal to the
  /// desired quadratic state weight (default C_i' sqrt(Q_i)), and a
  /// replacement disturbance weight.
  std::optional<Eigen::MatrixXd> state_cost_factor;
  std::optional<Eigen::MatrixXd> d_override;
};

/// Iteration record of one trace-minimization stage, for plotting and for
/// the monotonicity invariants (values nonincreasing and >= n).
struct NslpmmTrace {
  std::string stage;                 // "P" or "M"
  std::vector<double> trace_values;  // tr(P^k W^k) per iterate
  std::vector<double> step_lengths;  // line-search alpha per step taken
  std::string terminal_status;  // boundary_hit | stalled | infeasible_init
};

/// CSV serialization (stage, iteration, trace value, step length).
std::string nslpmm_trace_csv(const std::vector<NslpmmTrace>& traces);

struct OfResponse {
  bool found = false;
  Eigen::MatrixXd gain;  // m_i x s_i
  Eigen::MatrixXd p;
  Eigen::MatrixXd m;
  double gamma = 1.0;
  double cost_bound = 0.0;
  int p_iterations = 0;
  int m_iterations = 0;
  std::vector<NslpmmTrace> traces;
};

/// Player i's guaranteed cost response under static output feedback with
/// the other players fixed. Non-convexity of the P and M sets is handled
/// by the nested sequential trace-minimization method: the inverse
/// coupling P W = I is relaxed to [[P, I], [I, W]] >= 0 and tr(PW) is
/// driven to its lower bound n by linearized SDP steps with a closed-form
/// line search; the M stage repeats the scheme at fixed P over a gamma
/// grid. A boundary pair (P, M) is followed by an affine gain-recovery
/// solve.
OfResponse of_guaranteed_cost_response(const GameDefinition& game,
                                       const StrategyProfile& profile,
                                       int player_index, double delta,
                                       const OfSynthOptions& opts = {});

}  // namespace scogce
