#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scogce/certify.hpp"
#include "scogce/game.hpp"
#include "scogce/synth_of.hpp"
#include "scogce/synth_sf.hpp"

namespace scogce {

enum class RunStatus {
  ScogceFound,
  StoppedAllPlayersFailed,
  IterationLimit,
};

std::string to_string(RunStatus status);

struct RoundRecord {
  int player = 0;
  bool response_found = false;
  Eigen::VectorXd worst_case_costs;  // exact costs after the update
};

struct EquilibriumRun {
  RunStatus status = RunStatus::IterationLimit;
  StrategyProfile profile;
  VerificationReport certificates;
  Eigen::VectorXd worst_case_costs;
  std::vector<RoundRecord> history;
  /// Trace-minimization iteration records from every output-feedback
  /// response attempted during the run.
  std::vector<NslpmmTrace> nslpmm_traces;
  int rounds = 0;
};

struct EquilibriumOptions {
  double eps = 1e-6;
  int max_rounds = 0;  // 0 means 50 * n_players
  unsigned seed = 0;
  std::optional<double> x0_free_alpha;
  std::vector<double> gamma_grid = {1e-2, 1e-1, 1.0, 1e1, 1e2};
  /// Warm start; when absent the run begins from initialize_stabilizing.
  std::optional<StrategyProfile> initial_profile;
};

/// Jointly stabilizing static gains: solves the Lyapunov LMI
/// (A + sum B_i F_i C_i)'P + P(...) < 0 in all gains at once for P drawn
/// from a schedule {I, solutions of shifted Lyapunov equations}. Throws
/// when no profile in the schedule stabilizes with the requested margin.
StrategyProfile initialize_stabilizing(const GameDefinition& game,
                                       FeedbackMode mode,
                                       double margin = 0.0);

/// Sequential guaranteed cost response: round-robin over players, each
/// attempting a guaranteed cost response at its delta; stops when the
/// profile verifies as an equilibrium, when all N players fail
/// consecutively, or at the round limit.
EquilibriumRun run_sequential(const GameDefinition& game,
                              const Eigen::VectorXd& deltas,
                              FeedbackMode mode,
                              const EquilibriumOptions& opts = {});

enum class CooperativeMode { FullInformation, StructuredBisection };

/// Total cooperative worst-case cost J_co. full_information solves the
/// joint-input soft Riccati equation (centralized state feedback);
/// structured_bisection descends the total cost budget over team
/// responses with block-structured output-feedback gains and returns the
/// least certified upper bound at the final profile.
std::optional<double> cooperative_cost(const GameDefinition& game,
                                       CooperativeMode mode,
                                       const EquilibriumOptions& opts = {});

/// Sum of exact worst-case costs at the profile divided by the
/// cooperative cost.
std::optional<double> price_of_stability(const GameDefinition& game,
                                         const StrategyProfile& profile,
                                         double coop_cost);

struct SweepPoint {
  Eigen::VectorXd deltas;
  RunStatus status = RunStatus::IterationLimit;
  int rounds = 0;
  Eigen::VectorXd worst_case_costs;
  double pos = 0.0;  // PoS when found and a cooperative cost was given
  bool reused_certificate = false;
};

struct SweepResult {
  std::vector<SweepPoint> points;
};

/// Runs run_sequential on every cost profile in the grid. Points are
/// processed in the given order per worker; a successful bundle is reused
/// on componentwise-larger profiles via direct certificate checks
/// (monotonicity of the equilibrium set in the cost profile).
SweepResult delta_sweep(const GameDefinition& game,
                        const std::vector<Eigen::VectorXd>& grid,
                        FeedbackMode mode, int workers = 1,
                        std::optional<double> coop_cost = std::nullopt,
                        const EquilibriumOptions& opts = {});

}  // namespace scogce
