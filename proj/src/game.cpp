#include "scogce/game.hpp"

#include <complex>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace scogce {
namespace {

constexpr double kRelTol = 1e-9;

bool symmetric(const Eigen::MatrixXd& m, double tol = 1e-9) {
  return (m - m.transpose()).cwiseAbs().maxCoeff() <=
         tol * (1.0 + m.cwiseAbs().maxCoeff());
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

int numeric_rank(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double cut = kRelTol * sv(0);
  int r = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv(k) > cut) ++r;
  return r;
}

// PBH test: rank [A - lambda I, B] = n at every eigenvalue with
// Re(lambda) >= -1e-9. Detectability of (A, C) is PBH on (A', C').
bool pbh_stabilizable(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::Index n = a.rows();
  Eigen::EigenSolver<Eigen::MatrixXd> es(a);
  for (Eigen::Index k = 0; k < n; ++k) {
    const std::complex<double> lam = es.eigenvalues()(k);
    if (lam.real() < -1e-9) continue;
    Eigen::MatrixXcd pencil(n, n + b.cols());
    pencil.leftCols(n) =
        a.cast<std::complex<double>>() -
        lam * Eigen::MatrixXcd::Identity(n, n);
    pencil.rightCols(b.cols()) = b.cast<std::complex<double>>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pencil);
    const auto& sv = svd.singularValues();
    int r = 0;
    for (Eigen::Index j = 0; j < sv.size(); ++j)
      if (sv(j) > kRelTol * sv(0)) ++r;
    if (r < n) return false;
  }
  return true;
}

}  // namespace

bool GameDefinition::is_state_feedback_capable() const {
  for (int i = 0; i < n_players; ++i) {
    if (c[i].rows() != state_dim) return false;
    if (!c[i].isApprox(Eigen::MatrixXd::Identity(state_dim, state_dim), 1e-12))
      return false;
  }
  return true;
}

StrategyProfile StrategyProfile::zeros(const GameDefinition& game,
                                       FeedbackMode mode) {
  StrategyProfile p;
  p.mode = mode;
  for (int i = 0; i < game.n_players; ++i)
    p.gains.push_back(
        Eigen::MatrixXd::Zero(game.input_dim(i), game.output_dim(i)));
  return p;
}

std::vector<std::string> validate_game(const GameDefinition& game) {
  std::vector<std::string> out;
  const int n = game.state_dim;
  auto fail = [&](const std::string& msg) { out.push_back(msg); };

  if (game.n_players <= 0) fail("n_players must be positive");
  if (n <= 0) fail("state_dim must be positive");
  if (game.a.rows() != n || game.a.cols() != n) fail("A must be n x n");
  if (game.e.rows() != n) fail("E must have n rows");
  if (game.x0.size() != n) fail("x0 must have length n");
  if (static_cast<int>(game.b.size()) != game.n_players ||
      static_cast<int>(game.c.size()) != game.n_players ||
      static_cast<int>(game.q_weight.size()) != game.n_players ||
      static_cast<int>(game.r_weight.size()) != game.n_players ||
      static_cast<int>(game.d_weight.size()) != game.n_players) {
    fail("per-player matrix lists must all have length N");
    return out;
  }
  if (!out.empty()) return out;

  const int q = game.disturbance_dim();
  for (int i = 0; i < game.n_players; ++i) {
    std::ostringstream who;
    who << "player " << i;
    const auto& bi = game.b[i];
    const auto& ci = game.c[i];
    if (bi.rows() != n) fail(who.str() + ": B_i must have n rows");
    if (ci.cols() != n) fail(who.str() + ": C_i must have n columns");
    const int si = static_cast<int>(ci.rows());
    const int mi = static_cast<int>(bi.cols());
    if (si > n) fail(who.str() + ": C_i has more rows than states");
    if (numeric_rank(ci) < si) fail(who.str() + ": C_i is not full row rank");
    const auto& qi = game.q_weight[i];
    const auto& ri = game.r_weight[i];
    const auto& di = game.d_weight[i];
    if (qi.rows() != si || qi.cols() != si)
      fail(who.str() + ": Q_i must be s_i x s_i");
    else if (!symmetric(qi) || min_eigenvalue(qi) < -1e-9)
      fail(who.str() + ": q_weight[" + std::to_string(i) +
           "] is not symmetric positive semidefinite");
    if (ri.rows() != mi || ri.cols() != mi)
      fail(who.str() + ": R_i must be m_i x m_i");
    else if (!symmetric(ri) || min_eigenvalue(ri) <= 1e-9)
      fail(who.str() + ": r_weight[" + std::to_string(i) +
           "] is not symmetric positive definite");
    if (di.rows() != q || di.cols() != q)
      fail(who.str() + ": D_i must be q x q");
    else if (!symmetric(di) || min_eigenvalue(di) <= 1e-9)
      fail(who.str() + ": d_weight[" + std::to_string(i) +
           "] is not symmetric positive definite");
  }

  // Stabilizability and detectability are collective properties of the game:
  // the closed loop is driven by all inputs and observed through all outputs,
  // so the PBH tests run on the stacked input and output matrices.
  int total_inputs = 0;
  int total_outputs = 0;
  bool dims_ok = true;
  for (int i = 0; i < game.n_players; ++i) {
    if (game.b[i].rows() != n || game.c[i].cols() != n) dims_ok = false;
    total_inputs += static_cast<int>(game.b[i].cols());
    total_outputs += static_cast<int>(game.c[i].rows());
  }
  if (dims_ok && game.n_players > 0) {
    Eigen::MatrixXd b_all(n, total_inputs);
    Eigen::MatrixXd c_all(total_outputs, n);
    int bc = 0, cr = 0;
    for (int i = 0; i < game.n_players; ++i) {
      b_all.middleCols(bc, game.b[i].cols()) = game.b[i];
      c_all.middleRows(cr, game.c[i].rows()) = game.c[i];
      bc += static_cast<int>(game.b[i].cols());
      cr += static_cast<int>(game.c[i].rows());
    }
    if (!pbh_stabilizable(game.a, b_all))
      fail("(A, [B_1 ... B_N]) is not stabilizable");
    if (!pbh_stabilizable(game.a.transpose(), c_all.transpose()))
      fail("(A, stacked C_i) is not detectable");
  }
  return out;
}

void check_profile_dims(const GameDefinition& game,
                        const StrategyProfile& profile) {
  if (static_cast<int>(profile.gains.size()) != game.n_players)
    throw std::invalid_argument("profile has wrong number of gains");
  for (int i = 0; i < game.n_players; ++i) {
    const auto& f = profile.gains[i];
    if (f.rows() != game.input_dim(i) || f.cols() != game.output_dim(i))
      throw std::invalid_argument("gain " + std::to_string(i) +
                                  " has wrong dimensions");
  }
  if (profile.mode == FeedbackMode::StateFeedback &&
      !game.is_state_feedback_capable())
    throw std::invalid_argument(
        "state-feedback profile on a game whose outputs are not the "
        "identity");
}

Eigen::MatrixXd closed_loop_matrix(const GameDefinition& game,
                                   const StrategyProfile& profile) {
  check_profile_dims(game, profile);
  Eigen::MatrixXd acl = game.a;
  for (int i = 0; i < game.n_players; ++i)
    acl += game.b[i] * profile.gains[i] * game.c[i];
  return acl;
}

Eigen::MatrixXd residual_loop_matrix(const GameDefinition& game,
                                     const StrategyProfile& profile,
                                     int player_index) {
  check_profile_dims(game, profile);
  Eigen::MatrixXd acl = game.a;
  for (int i = 0; i < game.n_players; ++i)
    if (i != player_index) acl += game.b[i] * profile.gains[i] * game.c[i];
  return acl;
}

Eigen::MatrixXd disturbance_gram(const GameDefinition& game,
                                 int player_index) {
  const auto& d = game.d_weight.at(player_index);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(d);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw std::invalid_argument("D_i is singular or indefinite");
  Eigen::MatrixXd g = game.e * ldlt.solve(game.e.transpose());
  return 0.5 * (g + g.transpose());
}

}  // namespace scogce
