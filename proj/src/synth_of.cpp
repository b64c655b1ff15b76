#include "scogce/synth_of.hpp"

#include <functional>
#include <sstream>

#include <Eigen/Cholesky>

#include "scogce/linalg.hpp"
#include "scogce/lmi.hpp"

namespace scogce {
namespace {

struct TraceMinOutcome {
  bool boundary = false;
  Eigen::MatrixXd first;   // P (or M)
  Eigen::MatrixXd second;  // W (or N), relaxed inverse
  int iterations = 0;
  NslpmmTrace trace;
};

// Linearized trace minimization over a relaxed inverse pair: minimizes
// tr(AB) subject to A, B >= eps I, [[A, I], [I, B]] >= 0 and the
// caller-supplied convex constraints, by iterating the linearization
// min tr(A B_k + A_k B) with a closed-form line search. Success means the
// lower bound tr(AB) = n is reached, which forces B = A^{-1}.
TraceMinOutcome nested_trace_min(
    int n, double eps,
    const std::function<void(LmiProblem&, const MatExpr&, const MatExpr&)>&
        add_constraints,
    int max_iterations, double stationarity_tol, double boundary_tol,
    const std::string& stage) {
  TraceMinOutcome out;
  out.trace.stage = stage;
  out.trace.terminal_status = "infeasible_init";
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);

  auto build = [&](LmiProblem& lmi, MatExpr& a, MatExpr& b) {
    a = lmi.symmetric(n, "A");
    b = lmi.symmetric(n, "B");
    lmi.require_psd(a - MatExpr(eps * eye));
    lmi.require_psd(b - MatExpr(eps * eye));
    lmi.require_psd(MatExpr::blocks(
        {{a, MatExpr(eye)}, {MatExpr(eye), b}}));
    add_constraints(lmi, a, b);
  };

  Eigen::MatrixXd pk, wk;
  {
    LmiProblem lmi;
    MatExpr a, b;
    build(lmi, a, b);
    SdpResult init = lmi.solve_feasibility(0.0);
    if (init.status != SdpStatus::Feasible) return out;
    pk = LmiProblem::value(a, init.y);
    wk = LmiProblem::value(b, init.y);
  }

  out.trace.terminal_status = "stalled";
  for (int k = 0; k < max_iterations; ++k) {
    out.iterations = k + 1;
    const double cur = (pk.cwiseProduct(wk)).sum();  // tr(P_k W_k)
    out.trace.trace_values.push_back(cur);
    if (cur - n <= boundary_tol * n) break;          // boundary reached

    LmiProblem lmi;
    MatExpr a, b;
    build(lmi, a, b);
    MatExpr objective = (a * wk).trace() + (b * pk).trace();
    SdpResult step = lmi.minimize(objective);
    if (step.status != SdpStatus::Optimal &&
        step.status != SdpStatus::Feasible)
      return out;
    const Eigen::MatrixXd s = LmiProblem::value(a, step.y);
    const Eigen::MatrixXd t = LmiProblem::value(b, step.y);

    const double lin = (s.cwiseProduct(wk)).sum() + (pk.cwiseProduct(t)).sum();
    if (lin >= 2.0 * cur - stationarity_tol * (1.0 + cur))
      break;  // stationary point of the linearization

    // Exact minimizer of the quadratic tr((P + a dP)(W + a dW)) on [0, 1].
    const double c1 = lin - 2.0 * cur;
    const double c2 = ((s - pk).cwiseProduct(t - wk)).sum();
    const double alpha =
        c2 > 0.0 ? std::clamp(-c1 / (2.0 * c2), 0.0, 1.0) : 1.0;
    out.trace.step_lengths.push_back(alpha);
    pk += alpha * (s - pk);
    wk += alpha * (t - wk);
  }

  out.first = pk;
  out.second = wk;
  out.boundary = (pk.cwiseProduct(wk)).sum() - n <= boundary_tol * n;
  if (out.boundary) out.trace.terminal_status = "boundary_hit";
  return out;
}

// Recovers the gain from the certificate pair. Passing m == nullptr drops
// the disturbance-loop stability inequality; the cost inequality's (1,1)
// block A_cl'P + P A_cl + LL' < 0 with P > 0 still forces a stable loop.
std::optional<Eigen::MatrixXd> recover_of_gain(
    const GameDefinition& game, int i, const Eigen::MatrixXd& a_res,
    const Eigen::MatrixXd& state_cost, const Eigen::MatrixXd& d,
    const Eigen::MatrixXd& g, const Eigen::MatrixXd& p,
    const Eigen::MatrixXd* m, double margin) {
  const int n = game.state_dim;
  const int mi = game.input_dim(i);
  const int si = game.output_dim(i);
  const int q = game.disturbance_dim();
  const Eigen::MatrixXd& b = game.b[i];
  const Eigen::MatrixXd& c = game.c[i];
  const Eigen::MatrixXd r_inv = game.r_weight[i].llt().solve(
      Eigen::MatrixXd::Identity(mi, mi));

  for (double marg : {margin, margin * 1e-3}) {
    LmiProblem lmi;
    MatExpr f = lmi.rectangular(mi, si, "F");
    MatExpr fc = f * c;

    MatExpr top = MatExpr(a_res.transpose() * p + p * a_res + state_cost) +
                  ((p * b) * fc).sym();
    MatExpr cost_block = MatExpr::blocks(
        {{top, fc.transpose(), MatExpr(p * game.e)},
         {fc, MatExpr(-r_inv), MatExpr::zero(mi, q)},
         {MatExpr(game.e.transpose() * p), MatExpr::zero(q, mi),
          MatExpr(-d)}});
    lmi.require_nsd(cost_block + MatExpr(marg * Eigen::MatrixXd::Identity(
                                     n + mi + q, n + mi + q)));

    if (m != nullptr) {
      const Eigen::MatrixXd loop = a_res + g * p;
      MatExpr stab = MatExpr(loop.transpose() * (*m) + (*m) * loop) +
                     (((*m) * b) * fc).sym();
      lmi.require_nsd(stab +
                      MatExpr(marg * Eigen::MatrixXd::Identity(n, n)));
    }

    SdpResult sol = lmi.solve_feasibility(0.0);
    if (sol.status == SdpStatus::Feasible)
      return LmiProblem::value(f, sol.y);
  }
  return std::nullopt;
}

Eigen::MatrixXd safe_inverse(const Eigen::MatrixXd& y) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(y);
  return ldlt.solve(Eigen::MatrixXd::Identity(y.rows(), y.cols()));
}

struct CertifiedGain {
  Eigen::MatrixXd gain, p, m;
  double gamma = 1.0;
  double cost_bound = 0.0;
};

// Certifies a fixed recovered gain from scratch by joint LMI feasibility
// in a fresh (P, M) pair, per gamma.
std::optional<CertifiedGain> certify_fixed_gain(
    const GameDefinition& game, int i, const Eigen::MatrixXd& a_res,
    const Eigen::MatrixXd& l, const Eigen::MatrixXd& d,
    const Eigen::MatrixXd& f, double delta, double eps,
    const OfSynthOptions& opts) {
  const int n = game.state_dim;
  const int q = game.disturbance_dim();
  const Eigen::MatrixXd& b = game.b[i];
  const Eigen::MatrixXd& c = game.c[i];
  const Eigen::MatrixXd& e = game.e;

  const Eigen::MatrixXd a_cl = a_res + b * f * c;
  const Eigen::MatrixXd fc_fixed = f * c;
  const Eigen::MatrixXd state_cost =
      l * l.transpose() +
      fc_fixed.transpose() * game.r_weight[i] * fc_fixed;
  const double delta_slack = 1e-9 * std::max(1.0, delta);
  for (double gamma : opts.gamma_grid) {
    LmiProblem lmi;
    MatExpr pv = lmi.symmetric(n, "P");
    MatExpr mv = lmi.symmetric(n, "M");
    lmi.require_psd(pv - MatExpr(eps * Eigen::MatrixXd::Identity(n, n)));
    lmi.require_psd(mv - MatExpr(eps * Eigen::MatrixXd::Identity(n, n)));

    MatExpr cost_block = MatExpr::blocks(
        {{(a_cl.transpose() * pv).sym() + MatExpr(state_cost), pv * e},
         {(pv * e).transpose(), MatExpr(-d)}});
    lmi.require_nsd(cost_block + MatExpr(eps * Eigen::MatrixXd::Identity(
                                     n + q, n + q)));

    if (opts.x0_free_alpha) {
      lmi.require_nsd(pv -
                      MatExpr((delta / *opts.x0_free_alpha - eps) *
                              Eigen::MatrixXd::Identity(n, n)));
    } else {
      lmi.require_nsd(pv.pre_post(game.x0.transpose(), game.x0) -
                      MatExpr(Eigen::MatrixXd::Constant(
                          1, 1, delta - delta_slack)));
    }

    MatExpr zqq = MatExpr::zero(q, q);
    MatExpr gamma_block = MatExpr::blocks(
        {{(a_cl.transpose() * mv).sym(), pv * e, mv * e},
         {(pv * e).transpose(), MatExpr(-d / gamma), zqq},
         {(mv * e).transpose(), zqq, MatExpr(-gamma * d)}});
    lmi.require_nsd(gamma_block + MatExpr(eps * Eigen::MatrixXd::Identity(
                                      n + 2 * q, n + 2 * q)));

    SdpResult sol = lmi.solve_feasibility(0.0);
    if (sol.status != SdpStatus::Feasible) continue;
    CertifiedGain out;
    out.gain = f;
    out.p = LmiProblem::value(pv, sol.y);
    out.m = LmiProblem::value(mv, sol.y);
    out.gamma = gamma;
    out.cost_bound = game.x0.dot(out.p * game.x0);
    return out;
  }
  return std::nullopt;
}

// Recovers a gain from the cost inequality alone (solvable whenever the
// first-stage projections hold at P) and certifies it from scratch at the
// fixed gain. The first-stage P need not itself admit an M, but the loop
// the recovered gain produces often does. Adding 2*beta*P to the state
// cost forces the recovered loop's spectral abscissa below -beta, so the
// schedule prefers well-damped loops and only falls back to the plain
// inequality when no damped candidate certifies.
std::optional<CertifiedGain> certify_recovered_gain(
    const GameDefinition& game, int i, const Eigen::MatrixXd& a_res,
    const Eigen::MatrixXd& l, const Eigen::MatrixXd& d,
    const Eigen::MatrixXd& p, double delta, double eps,
    const OfSynthOptions& opts) {
  const Eigen::MatrixXd& e = game.e;
  const Eigen::MatrixXd g = e * d.ldlt().solve(e.transpose());

  for (double beta : {2.0, 1.0, 0.5, 0.0}) {
    auto f = recover_of_gain(game, i, a_res,
                             l * l.transpose() + 2.0 * beta * p, d, g, p,
                             nullptr, eps);
    if (!f) continue;
    if (auto out =
            certify_fixed_gain(game, i, a_res, l, d, *f, delta, eps, opts))
      return out;
  }
  return std::nullopt;
}

}  // namespace

std::string nslpmm_trace_csv(const std::vector<NslpmmTrace>& traces) {
  std::ostringstream out;
  out << "stage,iteration,trace_value,step_length,terminal_status\n";
  out.precision(12);
  for (size_t t = 0; t < traces.size(); ++t) {
    const NslpmmTrace& tr = traces[t];
    for (size_t k = 0; k < tr.trace_values.size(); ++k) {
      out << tr.stage << ',' << k << ',' << tr.trace_values[k] << ',';
      if (k < tr.step_lengths.size()) out << tr.step_lengths[k];
      out << ',' << tr.terminal_status << '\n';
    }
  }
  return out.str();
}

OfResponse of_guaranteed_cost_response(const GameDefinition& game,
                                       const StrategyProfile& profile,
                                       int player_index, double delta,
                                       const OfSynthOptions& opts) {
  OfResponse res;
  const int i = player_index;
  const int n = game.state_dim;
  const int mi = game.input_dim(i);
  const int si = game.output_dim(i);
  const int q = game.disturbance_dim();
  const double eps = opts.eps;

  const Eigen::MatrixXd a_res = residual_loop_matrix(game, profile, i);
  const Eigen::MatrixXd& b = game.b[i];
  const Eigen::MatrixXd& c = game.c[i];
  const Eigen::MatrixXd& e = game.e;
  const Eigen::MatrixXd d = opts.d_override.value_or(game.d_weight[i]);
  const Eigen::MatrixXd g =
      e * d.ldlt().solve(e.transpose());
  const Eigen::MatrixXd l = opts.state_cost_factor.value_or(
      (c.transpose() * sqrt_psd(game.q_weight[i])).eval());
  const int r = static_cast<int>(l.cols());
  const Eigen::MatrixXd r_inv = game.r_weight[i].llt().solve(
      Eigen::MatrixXd::Identity(mi, mi));

  // Annihilators for the projected first-stage inequalities (dimension
  // n + r + m_i + q).
  Eigen::MatrixXd c1 = Eigen::MatrixXd::Zero(si, n + r + mi + q);
  c1.leftCols(n) = c;
  const Eigen::MatrixXd nc1 = null_space_basis(c1);
  Eigen::MatrixXd b1 = Eigen::MatrixXd::Zero(mi, n + r + mi + q);
  b1.leftCols(n) = b.transpose();
  b1.block(0, n + r, mi, mi) = Eigen::MatrixXd::Identity(mi, mi);
  const Eigen::MatrixXd nb1 = null_space_basis(b1);

  auto p_constraints = [&](LmiProblem& lmi, const MatExpr& p,
                           const MatExpr& w) {
    MatExpr zrm = MatExpr::zero(r, mi);
    MatExpr zrq = MatExpr::zero(r, q);
    MatExpr zmq = MatExpr::zero(mi, q);
    MatExpr neg_ir = MatExpr(-Eigen::MatrixXd::Identity(r, r));
    MatExpr neg_rinv = MatExpr(-r_inv);
    MatExpr neg_d = MatExpr(-d);

    MatExpr omega1 = MatExpr::blocks(
        {{(a_res.transpose() * p).sym(), MatExpr(l), MatExpr::zero(n, mi),
          p * e},
         {MatExpr(l.transpose()), neg_ir, zrm, zrq},
         {MatExpr::zero(mi, n), zrm.transpose(), neg_rinv, zmq},
         {(p * e).transpose(), zrq.transpose(), zmq.transpose(), neg_d}});
    MatExpr proj1 = omega1.pre_post(nc1.transpose(), nc1);
    lmi.require_nsd(proj1 + MatExpr(eps * Eigen::MatrixXd::Identity(
                                nc1.cols(), nc1.cols())));

    MatExpr omega2 = MatExpr::blocks(
        {{(a_res * w).sym(), w * l, MatExpr::zero(n, mi), MatExpr(e)},
         {(w * l).transpose(), neg_ir, zrm, zrq},
         {MatExpr::zero(mi, n), zrm.transpose(), neg_rinv, zmq},
         {MatExpr(e.transpose()), zrq.transpose(), zmq.transpose(), neg_d}});
    MatExpr proj2 = omega2.pre_post(nb1.transpose(), nb1);
    lmi.require_nsd(proj2 + MatExpr(eps * Eigen::MatrixXd::Identity(
                                nb1.cols(), nb1.cols())));

    if (opts.x0_free_alpha) {
      // x0-independent bound: P < (delta/alpha) I covers all |x0|^2 <
      // alpha.
      lmi.require_psd(
          MatExpr((delta / *opts.x0_free_alpha) *
                  Eigen::MatrixXd::Identity(n, n)) -
          p - MatExpr(eps * Eigen::MatrixXd::Identity(n, n)));
    } else {
      MatExpr bound = MatExpr::blocks(
          {{MatExpr(Eigen::MatrixXd::Constant(1, 1, delta)),
            MatExpr(game.x0.transpose())},
           {MatExpr(game.x0), w}});
      lmi.require_psd(bound - MatExpr(eps * Eigen::MatrixXd::Identity(
                                  n + 1, n + 1)));
    }
  };

  TraceMinOutcome p_stage =
      nested_trace_min(n, eps, p_constraints, opts.max_iterations,
                       opts.stationarity_tol, opts.boundary_tol, "P");
  res.p_iterations = p_stage.iterations;
  res.traces.push_back(p_stage.trace);
  if (!p_stage.boundary) return res;
  const Eigen::MatrixXd p = p_stage.first;

  // Cheap path first: recover the gain from the cost inequality alone
  // (the first-stage projections certify its solvability) and certify it
  // from scratch with a fresh (P, M) pair. Only when that fails does the
  // more expensive linearized second stage run.
  if (auto direct = certify_recovered_gain(game, i, a_res, l, d, p, delta,
                                           eps, opts)) {
    res.found = true;
    res.gain = direct->gain;
    res.p = direct->p;
    res.m = direct->m;
    res.gamma = direct->gamma;
    res.cost_bound = direct->cost_bound;
    return res;
  }

  // Second stage at fixed P over the gamma grid (dimension n + 2q).
  Eigen::MatrixXd c2 = Eigen::MatrixXd::Zero(si, n + 2 * q);
  c2.leftCols(n) = c;
  const Eigen::MatrixXd nc2 = null_space_basis(c2);
  Eigen::MatrixXd b2 = Eigen::MatrixXd::Zero(mi, n + 2 * q);
  b2.leftCols(n) = b.transpose();
  const Eigen::MatrixXd nb2 = null_space_basis(b2);
  const Eigen::MatrixXd pe = p * e;

  for (double gamma : opts.gamma_grid) {
    auto m_constraints = [&](LmiProblem& lmi, const MatExpr& m,
                             const MatExpr& nvar) {
      MatExpr zqq = MatExpr::zero(q, q);
      MatExpr omega3 = MatExpr::blocks(
          {{(a_res.transpose() * m).sym(), MatExpr(pe), m * e},
           {MatExpr(pe.transpose()), MatExpr(-d / gamma), zqq},
           {(m * e).transpose(), zqq, MatExpr(-gamma * d)}});
      MatExpr proj3 = omega3.pre_post(nc2.transpose(), nc2);
      lmi.require_nsd(proj3 + MatExpr(eps * Eigen::MatrixXd::Identity(
                                  nc2.cols(), nc2.cols())));

      MatExpr omega4 = MatExpr::blocks(
          {{(a_res * nvar).sym(), nvar * pe, MatExpr(e)},
           {(nvar * pe).transpose(), MatExpr(-d / gamma), zqq},
           {MatExpr(e.transpose()), zqq, MatExpr(-gamma * d)}});
      MatExpr proj4 = omega4.pre_post(nb2.transpose(), nb2);
      lmi.require_nsd(proj4 + MatExpr(eps * Eigen::MatrixXd::Identity(
                                  nb2.cols(), nb2.cols())));
    };

    TraceMinOutcome m_stage =
        nested_trace_min(n, eps, m_constraints, opts.max_iterations,
                         opts.stationarity_tol, opts.boundary_tol, "M");
    res.m_iterations += m_stage.iterations;
    res.traces.push_back(m_stage.trace);
    if (!m_stage.boundary) continue;
    const Eigen::MatrixXd m = m_stage.first;

    auto f = recover_of_gain(game, i, a_res, l * l.transpose(), d, g, p, &m,
                             eps);
    if (!f) {
      // One perturbed restart: re-derive M from the relaxed inverse and
      // try the recovery once more.
      const Eigen::MatrixXd m_alt = safe_inverse(m_stage.second);
      f = recover_of_gain(game, i, a_res, l * l.transpose(), d, g, p, &m_alt,
                          eps);
      if (!f) continue;
    }
    res.found = true;
    res.gain = *f;
    res.p = p;
    res.m = m;
    res.gamma = gamma;
    res.cost_bound = game.x0.dot(p * game.x0);
    return res;
  }

  return res;
}

}  // namespace scogce
