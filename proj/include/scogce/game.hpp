#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace scogce {

enum class FeedbackMode { OutputFeedback, StateFeedback };

/// Uncertain N-player linear-quadratic differential game:
///   xdot = A x + sum_i B_i u_i + E d,   y_i = C_i x,
/// with per-player output weight Q_i >= 0, control weight R_i > 0 and
/// disturbance weight D_i > 0. Immutable after construction.
struct GameDefinition {
  int n_players = 0;
  int state_dim = 0;
  Eigen::MatrixXd a;                    // n x n drift
  std::vector<Eigen::MatrixXd> b;       // b[i] is n x m_i
  std::vector<Eigen::MatrixXd> c;       // c[i] is s_i x n, full row rank
  Eigen::MatrixXd e;                    // n x q disturbance channel
  std::vector<Eigen::MatrixXd> q_weight;
  std::vector<Eigen::MatrixXd> r_weight;
  std::vector<Eigen::MatrixXd> d_weight;
  Eigen::VectorXd x0;

  // Optional maps from y_i to consensus error e_i, used by the simulator
  // for networked fixtures. Empty when not applicable.
  std::vector<Eigen::MatrixXd> error_selectors;

  int input_dim(int i) const { return static_cast<int>(b.at(i).cols()); }
  int output_dim(int i) const { return static_cast<int>(c.at(i).rows()); }
  int disturbance_dim() const { return static_cast<int>(e.cols()); }

  bool is_state_feedback_capable() const;
};

struct StrategyProfile {
  std::vector<Eigen::MatrixXd> gains;   // gains[i] is m_i x s_i
  FeedbackMode mode = FeedbackMode::OutputFeedback;

  static StrategyProfile zeros(const GameDefinition& game, FeedbackMode mode);
};

struct CostProfile {
  Eigen::VectorXd deltas;
};

/// Returns a description of every violated standing assumption (empty on a
/// valid game). Violations are data, not errors.
std::vector<std::string> validate_game(const GameDefinition& game);

/// A + sum_i B_i F_i C_i
Eigen::MatrixXd closed_loop_matrix(const GameDefinition& game,
                                   const StrategyProfile& profile);

/// A + sum_{j != i} B_j F_j C_j
Eigen::MatrixXd residual_loop_matrix(const GameDefinition& game,
                                     const StrategyProfile& profile,
                                     int player_index);

/// G_i = E D_i^{-1} E'
Eigen::MatrixXd disturbance_gram(const GameDefinition& game, int player_index);

void check_profile_dims(const GameDefinition& game,
                        const StrategyProfile& profile);

}  // namespace scogce
