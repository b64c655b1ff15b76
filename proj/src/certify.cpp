#include "scogce/certify.hpp"

#include <cmath>
#include <random>

#include "scogce/linalg.hpp"
#include "scogce/lmi.hpp"

namespace scogce {
namespace {

// Quadratic state weight of player i under its own strategy:
//   C_i'(Q_i + F_i' R_i F_i) C_i.
Eigen::MatrixXd own_state_cost(const GameDefinition& game,
                               const StrategyProfile& profile, int i) {
  const Eigen::MatrixXd fc = profile.gains[i] * game.c[i];
  return game.c[i].transpose() * game.q_weight[i] * game.c[i] +
         fc.transpose() * game.r_weight[i] * fc;
}

// Dissipation block [[Acl'P + P Acl + W, P E], [E' P, -D]].
Eigen::MatrixXd cost_lmi(const GameDefinition& game, int i,
                         const Eigen::MatrixXd& acl,
                         const Eigen::MatrixXd& w, const Eigen::MatrixXd& p) {
  const int n = game.state_dim;
  const int q = game.disturbance_dim();
  Eigen::MatrixXd out(n + q, n + q);
  out.topLeftCorner(n, n) = acl.transpose() * p + p * acl + w;
  out.topRightCorner(n, q) = p * game.e;
  out.bottomLeftCorner(q, n) = game.e.transpose() * p;
  out.bottomRightCorner(q, q) = -game.d_weight[i];
  return out;
}

// Stability block for the worst-case loop, affine in (P, M) at fixed
// gamma: [[Acl'M + M Acl, P E, M E], [E'P, -D/gamma, 0], [E'M, 0,
// -gamma D]].
Eigen::MatrixXd stability_lmi(const GameDefinition& game, int i,
                              const Eigen::MatrixXd& acl, double gamma,
                              const Eigen::MatrixXd& p,
                              const Eigen::MatrixXd& m) {
  const int n = game.state_dim;
  const int q = game.disturbance_dim();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n + 2 * q, n + 2 * q);
  out.topLeftCorner(n, n) = acl.transpose() * m + m * acl;
  out.block(0, n, n, q) = p * game.e;
  out.block(n, 0, q, n) = game.e.transpose() * p;
  out.block(0, n + q, n, q) = m * game.e;
  out.block(n + q, 0, q, n) = game.e.transpose() * m;
  out.block(n, n, q, q) = -game.d_weight[i] / gamma;
  out.block(n + q, n + q, q, q) = -gamma * game.d_weight[i];
  return out;
}

}  // namespace

bool check_certificate(const GameDefinition& game,
                       const StrategyProfile& profile, int player_index,
                       const Eigen::MatrixXd& p, const Eigen::MatrixXd& m,
                       double gamma, double delta, double eps) {
  const Eigen::MatrixXd acl = closed_loop_matrix(game, profile);
  if (!is_positive_definite(p, eps) || !is_positive_definite(m, eps))
    return false;
  const Eigen::MatrixXd w = own_state_cost(game, profile, player_index);
  if (min_symmetric_eigenvalue(
          -cost_lmi(game, player_index, acl, w, p)) <= eps)
    return false;
  if (min_symmetric_eigenvalue(
          -stability_lmi(game, player_index, acl, gamma, p, m)) <= eps)
    return false;
  return game.x0.dot(p * game.x0) <=
         delta - 1e-9 * std::max(1.0, delta);
}

PlayerCertificate certify_player(const GameDefinition& game,
                                 const StrategyProfile& profile,
                                 int player_index, double delta, double eps,
                                 const std::vector<double>& gamma_grid) {
  PlayerCertificate cert;
  const int i = player_index;
  const Eigen::MatrixXd acl = closed_loop_matrix(game, profile);
  if (!is_stable(acl)) return cert;

  const int n = game.state_dim;
  const Eigen::MatrixXd w = own_state_cost(game, profile, i);
  const double delta_slack = 1e-9 * std::max(1.0, delta);

  for (double gamma : gamma_grid) {
    LmiProblem lmi;
    MatExpr p = lmi.symmetric(n, "P");
    MatExpr m = lmi.symmetric(n, "M");
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
    lmi.require_psd(p - MatExpr(eps * eye));
    lmi.require_psd(m - MatExpr(eps * eye));

    // Symbolic versions of the two matrix inequalities (negated so the
    // solver sees >= 0 constraints).
    const int q = game.disturbance_dim();
    MatExpr pa = (acl.transpose() * p + p * acl) + MatExpr(w);
    MatExpr pe = p * game.e;
    MatExpr cost_block = MatExpr::blocks(
        {{pa, pe},
         {pe.transpose(), MatExpr(-game.d_weight[i])}});
    lmi.require_nsd(cost_block +
                    MatExpr(eps * Eigen::MatrixXd::Identity(n + q, n + q)));

    MatExpr ma = acl.transpose() * m + m * acl;
    MatExpr me = m * game.e;
    MatExpr zq = MatExpr::zero(q, q);
    MatExpr stab_block = MatExpr::blocks(
        {{ma, pe, me},
         {pe.transpose(), MatExpr(-game.d_weight[i] / gamma), zq},
         {me.transpose(), zq, MatExpr(-gamma * game.d_weight[i])}});
    lmi.require_nsd(stab_block + MatExpr(eps * Eigen::MatrixXd::Identity(
                                     n + 2 * q, n + 2 * q)));

    // delta_i - x0' P x0 >= slack.
    MatExpr bound =
        MatExpr(Eigen::MatrixXd::Constant(1, 1, delta - delta_slack)) -
        p.pre_post(game.x0.transpose(), game.x0);
    lmi.require_psd(bound);

    SdpResult sol = lmi.solve_feasibility(0.0);
    if (sol.status == SdpStatus::Feasible) {
      Eigen::MatrixXd pv = LmiProblem::value(p, sol.y);
      Eigen::MatrixXd mv = LmiProblem::value(m, sol.y);
      if (check_certificate(game, profile, i, pv, mv, gamma, delta, 0.0)) {
        cert.certified = true;
        cert.p = pv;
        cert.m = mv;
        cert.gamma = gamma;
        cert.cost_bound = game.x0.dot(pv * game.x0);
        break;
      }
    }
  }
  return cert;
}

VerificationReport verify_scogce(const GameDefinition& game,
                                 const StrategyProfile& profile,
                                 const Eigen::VectorXd& deltas, double eps,
                                 const std::vector<double>& gamma_grid) {
  VerificationReport report;
  report.loop_stable = is_stable(closed_loop_matrix(game, profile));
  report.players.resize(game.n_players);
  if (!report.loop_stable) return report;

  bool all = true;
  for (int i = 0; i < game.n_players; ++i) {
    report.players[i] =
        certify_player(game, profile, i, deltas(i), eps, gamma_grid);
    all = all && report.players[i].certified;
  }
  report.all_certified = all;
  return report;
}

std::optional<double> exact_worst_case_cost(const GameDefinition& game,
                                            const StrategyProfile& profile,
                                            int player_index) {
  const Eigen::MatrixXd acl = closed_loop_matrix(game, profile);
  if (!is_stable(acl)) return std::nullopt;
  auto p = solve_soft_riccati(acl, disturbance_gram(game, player_index),
                              own_state_cost(game, profile, player_index));
  if (!p) return std::nullopt;
  return game.x0.dot(*p * game.x0);
}

Eigen::VectorXd exact_worst_case_costs(const GameDefinition& game,
                                       const StrategyProfile& profile) {
  Eigen::VectorXd costs(game.n_players);
  for (int i = 0; i < game.n_players; ++i) {
    auto c = exact_worst_case_cost(game, profile, i);
    costs(i) = c ? *c : std::numeric_limits<double>::infinity();
  }
  return costs;
}

std::optional<DisturbanceSignal> worst_case_disturbance(
    const GameDefinition& game, const StrategyProfile& profile,
    int player_index) {
  const Eigen::MatrixXd acl = closed_loop_matrix(game, profile);
  if (!is_stable(acl)) return std::nullopt;
  const Eigen::MatrixXd g = disturbance_gram(game, player_index);
  auto p = solve_soft_riccati(acl, g,
                              own_state_cost(game, profile, player_index));
  if (!p) return std::nullopt;
  const Eigen::MatrixXd loop = acl + g * *p;
  const Eigen::MatrixXd gain =
      game.d_weight[player_index].ldlt().solve(game.e.transpose() * *p);
  const Eigen::VectorXd x0 = game.x0;
  return DisturbanceSignal([loop, gain, x0](double t) {
    return (gain * matrix_exp(loop, t) * x0).eval();
  });
}

double sample_disturbance_supremacy(const GameDefinition& game,
                                    const StrategyProfile& profile,
                                    int player_index, int n_samples,
                                    unsigned seed) {
  auto wc = exact_worst_case_cost(game, profile, player_index);
  if (!wc) return std::numeric_limits<double>::quiet_NaN();

  const Eigen::MatrixXd acl = closed_loop_matrix(game, profile);
  const double horizon = 20.0 / std::abs(spectral_abscissa(acl));
  const int q = game.disturbance_dim();
  constexpr int kSegments = 64;

  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> amp(0.0, 2.0);

  double worst_gap = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < n_samples; ++s) {
    Eigen::MatrixXd levels(q, kSegments);
    const double scale = amp(rng);
    for (int j = 0; j < q; ++j)
      for (int k = 0; k < kSegments; ++k) levels(j, k) = scale * gauss(rng);
    const double seg = horizon / kSegments;
    DisturbanceSignal d = [levels, seg](double t) {
      int k = std::min(static_cast<int>(t / seg), kSegments - 1);
      return Eigen::VectorXd(levels.col(std::max(k, 0)));
    };
    SimulationResult sim = simulate(game, profile, d, horizon);
    worst_gap = std::max(worst_gap, sim.final_costs(player_index) - *wc);
  }
  return worst_gap;
}

}  // namespace scogce
