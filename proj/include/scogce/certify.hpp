#pragma once

#include <optional>
#include <vector>

#include "scogce/game.hpp"
#include "scogce/simulate.hpp"

namespace scogce {

/// Lyapunov-type guaranteed-cost certificate for one player at a fixed
/// strategy profile: P > 0 bounds the worst-case cost by x0'P x0 < delta
/// and M > 0 witnesses stability of the worst-case loop A + G_i P.
struct PlayerCertificate {
  bool certified = false;
  Eigen::MatrixXd p;
  Eigen::MatrixXd m;
  double gamma = 1.0;       // scaling at which the M-inequality closed
  double cost_bound = 0.0;  // x0' P x0
};

struct VerificationReport {
  bool loop_stable = false;
  bool all_certified = false;
  std::vector<PlayerCertificate> players;
};

inline std::vector<double> default_gamma_grid() {
  return {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
}

/// Direct (solver-free) evaluation of a candidate certificate: checks
/// P, M > 0, both matrix inequalities at the given gamma with slack eps,
/// and x0'P x0 <= delta - 1e-9 * max(1, delta).
bool check_certificate(const GameDefinition& game,
                       const StrategyProfile& profile, int player_index,
                       const Eigen::MatrixXd& p, const Eigen::MatrixXd& m,
                       double gamma, double delta, double eps = 0.0);

/// Searches for one player's certificate by joint (P, M) LMI feasibility,
/// sweeping the gamma grid until one closes.
PlayerCertificate certify_player(
    const GameDefinition& game, const StrategyProfile& profile,
    int player_index, double delta, double eps = 1e-6,
    const std::vector<double>& gamma_grid = default_gamma_grid());

/// Searches for per-player certificates by LMI feasibility, sweeping the
/// gamma grid until one closes.
VerificationReport verify_scogce(
    const GameDefinition& game, const StrategyProfile& profile,
    const Eigen::VectorXd& deltas, double eps = 1e-6,
    const std::vector<double>& gamma_grid = default_gamma_grid());

/// Exact worst-case cost of player i under the fixed profile: x0'P* x0
/// where P* is the stabilizing solution of the single-player Riccati
/// equation at the closed loop. Empty when the worst-case loop cannot be
/// stabilized (infinite exposure).
std::optional<double> exact_worst_case_cost(const GameDefinition& game,
                                            const StrategyProfile& profile,
                                            int player_index);

/// All players at once; any missing entry is reported as +infinity.
Eigen::VectorXd exact_worst_case_costs(const GameDefinition& game,
                                       const StrategyProfile& profile);

/// The cost-maximizing disturbance dbar(t) = D_i^{-1} E' P* exp((Acl +
/// G_i P*) t) x0 realizing the exact worst-case cost.
std::optional<DisturbanceSignal> worst_case_disturbance(
    const GameDefinition& game, const StrategyProfile& profile,
    int player_index);

/// Empirical supremacy check: simulates the player's cost under sampled
/// piecewise-constant disturbances and returns max_d J_i(d) - J_i^wc,
/// which is nonpositive up to quadrature error when the worst-case cost
/// is correct.
double sample_disturbance_supremacy(const GameDefinition& game,
                                    const StrategyProfile& profile,
                                    int player_index, int n_samples,
                                    unsigned seed);

}  // namespace scogce
