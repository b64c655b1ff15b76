#include "scogce/care.hpp"

#include <Eigen/Cholesky>

#include "scogce/linalg.hpp"

namespace scogce {
namespace {

Eigen::MatrixXd control_gram(const GameDefinition& game, int i) {
  Eigen::LLT<Eigen::MatrixXd> llt(game.r_weight[i]);
  return game.b[i] * llt.solve(game.b[i].transpose());
}

}  // namespace

Eigen::MatrixXd care_residual(const GameDefinition& game, int player_index,
                              const std::vector<Eigen::MatrixXd>& p) {
  const int i = player_index;
  Eigen::MatrixXd a_cl = game.a;
  for (int j = 0; j < game.n_players; ++j)
    if (j != i) a_cl -= control_gram(game, j) * p[j];
  const Eigen::MatrixXd g =
      disturbance_gram(game, i) - control_gram(game, i);
  const Eigen::MatrixXd q =
      game.c[i].transpose() * game.q_weight[i] * game.c[i];
  return a_cl.transpose() * p[i] + p[i] * a_cl + q + p[i] * g * p[i];
}

bool verify_care_stabilizing(const GameDefinition& game,
                             const std::vector<Eigen::MatrixXd>& p,
                             double tol) {
  if (static_cast<int>(p.size()) != game.n_players) return false;
  double scale = 1.0;
  for (const auto& pi : p) scale = std::max(scale, pi.cwiseAbs().maxCoeff());
  Eigen::MatrixXd nominal = game.a;
  for (int j = 0; j < game.n_players; ++j)
    nominal -= control_gram(game, j) * p[j];
  if (!is_stable(nominal)) return false;
  for (int i = 0; i < game.n_players; ++i) {
    if ((p[i] - p[i].transpose()).cwiseAbs().maxCoeff() > tol * scale)
      return false;
    if (care_residual(game, i, p).cwiseAbs().maxCoeff() > tol * scale)
      return false;
    if (!is_stable(nominal + disturbance_gram(game, i) * p[i]))
      return false;
  }
  return true;
}

ScfneResult solve_scfne(const GameDefinition& game, double tol,
                        int max_sweeps) {
  ScfneResult res;
  const int n = game.state_dim;
  const int nn = game.n_players;

  std::vector<Eigen::MatrixXd> s(nn), g(nn), q(nn);
  for (int i = 0; i < nn; ++i) {
    s[i] = control_gram(game, i);
    g[i] = disturbance_gram(game, i) - s[i];
    q[i] = game.c[i].transpose() * game.q_weight[i] * game.c[i];
  }

  res.p.assign(nn, Eigen::MatrixXd::Zero(n, n));
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double delta = 0.0;
    for (int i = 0; i < nn; ++i) {
      Eigen::MatrixXd a_cl = game.a;
      for (int j = 0; j < nn; ++j)
        if (j != i) a_cl -= s[j] * res.p[j];
      auto pi = solve_soft_riccati(a_cl, g[i], q[i]);
      if (!pi) return res;  // converged=false
      delta = std::max(delta, (*pi - res.p[i]).cwiseAbs().maxCoeff());
      res.p[i] = *pi;
    }
    res.sweeps = sweep + 1;
    if (delta < tol) {
      res.converged = true;
      break;
    }
  }
  if (!res.converged) return res;

  Eigen::MatrixXd nominal = game.a;
  for (int j = 0; j < nn; ++j) nominal -= s[j] * res.p[j];
  res.stability_abscissas.push_back(spectral_abscissa(nominal));
  for (int i = 0; i < nn; ++i)
    res.stability_abscissas.push_back(
        spectral_abscissa(nominal + disturbance_gram(game, i) * res.p[i]));

  res.costs.resize(nn);
  res.profile.mode = game.is_state_feedback_capable()
                         ? FeedbackMode::StateFeedback
                         : FeedbackMode::OutputFeedback;
  for (int i = 0; i < nn; ++i) {
    res.costs(i) = game.x0.dot(res.p[i] * game.x0);
    const Eigen::MatrixXd& ci = game.c[i];
    Eigen::MatrixXd cct_inv =
        (ci * ci.transpose()).ldlt().solve(
            Eigen::MatrixXd::Identity(ci.rows(), ci.rows()));
    Eigen::MatrixXd bpi = game.b[i].transpose() * res.p[i];
    Eigen::MatrixXd proj =
        Eigen::MatrixXd::Identity(n, n) - ci.transpose() * cct_inv * ci;
    res.structural_residuals.push_back((bpi * proj).cwiseAbs().maxCoeff());
    Eigen::LLT<Eigen::MatrixXd> llt(game.r_weight[i]);
    res.profile.gains.push_back(-llt.solve(bpi * ci.transpose() * cct_inv));
  }
  return res;
}

}  // namespace scogce
