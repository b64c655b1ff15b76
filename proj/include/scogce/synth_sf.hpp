#pragma once

#include <optional>
#include <vector>

#include "scogce/game.hpp"

namespace scogce {

struct SfSynthOptions {
  double eps = 1e-6;
  std::vector<double> gamma_grid = {1e-2, 1e-1, 1.0, 1e1, 1e2};
};

struct SfResponse {
  bool found = false;
  Eigen::MatrixXd gain;  // m_i x n
  Eigen::MatrixXd p;     // certified cost matrix, P = Y^{-1}
  Eigen::MatrixXd m;     // stability witness, M = V^{-1}
  double gamma = 1.0;
  double cost_bound = 0.0;  // x0' P x0 < delta
};

/// Player i's guaranteed cost response under full state information and a
/// fixed profile of the other players: two sequential LMI feasibility
/// problems in Y = P^{-1} and V = M^{-1} (convex, no relaxation needed),
/// followed by an affine gain-recovery solve with (P, M) fixed.
SfResponse sf_guaranteed_cost_response(const GameDefinition& game,
                                       const StrategyProfile& profile,
                                       int player_index, double delta,
                                       const SfSynthOptions& opts = {});

}  // namespace scogce
