#pragma once

#include <vector>

#include "scogce/game.hpp"

namespace scogce {

/// Soft-constrained feedback Nash equilibrium data: stabilizing solutions
/// P_1..P_N of the coupled Riccati system
///   (A - sum_{j!=i} S_j P_j)' P_i + P_i (A - sum_{j!=i} S_j P_j)
///     + C_i' Q_i C_i + P_i (G_i - S_i) P_i = 0,
/// with S_j = B_j R_j^{-1} B_j' and G_i = E D_i^{-1} E'.
struct ScfneResult {
  bool converged = false;
  int sweeps = 0;
  std::vector<Eigen::MatrixXd> p;
  /// Feedback gains realizing u_i = -R_i^{-1} B_i' P_i x through the
  /// available outputs (exact when the realizability residual vanishes).
  StrategyProfile profile;
  Eigen::VectorXd costs;  // x0' P_i x0
  /// Spectral abscissas of the N+1 required stable matrices: the nominal
  /// loop A - sum_j S_j P_j followed by its shift by G_i P_i per player.
  std::vector<double> stability_abscissas;
  /// || B_i' P_i (I - C_i'(C_i C_i')^{-1} C_i) || per player; zero means
  /// the state-feedback equilibrium is output-feedback realizable.
  std::vector<double> structural_residuals;
};

/// Residual of player i's coupled Riccati equation at candidate P_1..P_N.
Eigen::MatrixXd care_residual(const GameDefinition& game, int player_index,
                              const std::vector<Eigen::MatrixXd>& p);

/// Checks symmetry, Riccati residuals and the N+1 stability conditions.
bool verify_care_stabilizing(const GameDefinition& game,
                             const std::vector<Eigen::MatrixXd>& p,
                             double tol = 1e-7);

/// Gauss-Seidel fixed point over per-player soft Riccati solves.
ScfneResult solve_scfne(const GameDefinition& game, double tol = 1e-9,
                        int max_sweeps = 500);

}  // namespace scogce
