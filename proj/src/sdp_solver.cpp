#include "scogce/sdp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace scogce {
namespace {

double lambda_min(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Eigen::MatrixXd assemble(const SdpBlock& blk, const Eigen::VectorXd& y) {
  Eigen::MatrixXd f = blk.constant;
  for (const auto& t : blk.terms) f += y(t.var) * t.coeff;
  return 0.5 * (f + f.transpose()).eval();
}

// Largest step alpha with X + alpha * dX staying positive definite, via
// the generalized eigenvalue lambda_min(L^{-1} dX L^{-T}).
double max_step(const Eigen::MatrixXd& x, const Eigen::MatrixXd& dx) {
  Eigen::LLT<Eigen::MatrixXd> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  Eigen::MatrixXd l = llt.matrixL();
  Eigen::MatrixXd w =
      l.triangularView<Eigen::Lower>().solve(dx).transpose();
  w = l.triangularView<Eigen::Lower>().solve(w);
  const double lmin = lambda_min(w);
  if (lmin >= -1e-14) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

struct IpmOutcome {
  bool converged = false;
  Eigen::VectorXd y;
  std::vector<Eigen::MatrixXd> x;  // primal blocks, original problem order
  double objective = 0.0;
  int iterations = 0;
  double gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

// Core infeasible-start primal-dual interior-point method with the HKM
// search direction and a Mehrotra predictor-corrector step. The problem
// passed in is assumed to already include any auxiliary bound blocks.
IpmOutcome run_ipm(const SdpProblem& prob, const SdpOptions& opts,
                   const std::function<bool(const Eigen::VectorXd&)>& accept) {
  IpmOutcome out;
  const int m = prob.n_vars;
  const int nb = static_cast<int>(prob.blocks.size());
  Eigen::VectorXd c = prob.objective.size() == m
                          ? prob.objective
                          : Eigen::VectorXd::Zero(m);

  double data_norm = 1.0;
  int total_dim = 0;
  for (const auto& blk : prob.blocks) {
    data_norm = std::max(data_norm, blk.constant.cwiseAbs().maxCoeff());
    for (const auto& t : blk.terms)
      data_norm = std::max(data_norm, t.coeff.cwiseAbs().maxCoeff());
    total_dim += static_cast<int>(blk.constant.rows());
  }

  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  std::vector<Eigen::MatrixXd> x(nb), s(nb);
  const double eta = 10.0 * data_norm;
  for (int j = 0; j < nb; ++j) {
    const Eigen::Index n = prob.blocks[j].constant.rows();
    x[j] = eta * Eigen::MatrixXd::Identity(n, n);
    s[j] = eta * Eigen::MatrixXd::Identity(n, n);
  }

  double best_merit = std::numeric_limits<double>::infinity();
  int stall = 0;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    out.iterations = iter;
    // Residuals and barrier parameter.
    std::vector<Eigen::MatrixXd> rd(nb), sinv(nb);
    Eigen::VectorXd rp = c;
    double gap = 0.0;
    for (int j = 0; j < nb; ++j) {
      rd[j] = assemble(prob.blocks[j], y) - s[j];
      for (const auto& t : prob.blocks[j].terms)
        rp(t.var) -= (t.coeff.cwiseProduct(x[j])).sum();
      gap += (x[j].cwiseProduct(s[j])).sum();
    }
    const double mu = gap / std::max(1, total_dim);
    double rd_norm = 0.0;
    for (int j = 0; j < nb; ++j)
      rd_norm = std::max(rd_norm, rd[j].cwiseAbs().maxCoeff());

    out.y = y;
    out.gap = gap;
    out.primal_residual = rp.cwiseAbs().maxCoeff() / (1.0 + c.cwiseAbs().sum());
    out.dual_residual = rd_norm / data_norm;
    out.objective = c.dot(y);

    if (accept && accept(y)) {
      out.converged = true;
      break;
    }
    const double rel_gap = gap / (1.0 + std::abs(c.dot(y)));
    if (rel_gap < opts.tolerance && out.primal_residual < opts.tolerance &&
        out.dual_residual < opts.tolerance) {
      out.converged = true;
      break;
    }
    const double merit = rel_gap + out.primal_residual + out.dual_residual;
    if (merit < 0.999 * best_merit) {
      best_merit = merit;
      stall = 0;
    } else if (++stall > 15) {
      break;  // numerical stagnation; caller validates what we have
    }

    // Factorizations.
    bool factor_ok = true;
    for (int j = 0; j < nb; ++j) {
      Eigen::LLT<Eigen::MatrixXd> llt(s[j]);
      if (llt.info() != Eigen::Success) {
        factor_ok = false;
        break;
      }
      const Eigen::Index n = s[j].rows();
      sinv[j] = llt.solve(Eigen::MatrixXd::Identity(n, n));
    }
    if (!factor_ok) break;

    // Schur complement M_kl = sum_j tr(S^-1 G_jk X G_jl).
    Eigen::MatrixXd schur = Eigen::MatrixXd::Zero(m, m);
    std::vector<std::vector<Eigen::MatrixXd>> w(nb);
    for (int j = 0; j < nb; ++j) {
      const auto& terms = prob.blocks[j].terms;
      w[j].resize(terms.size());
      for (size_t k = 0; k < terms.size(); ++k)
        w[j][k] = sinv[j] * terms[k].coeff * x[j];
      for (size_t k = 0; k < terms.size(); ++k)
        for (size_t l = 0; l < terms.size(); ++l)
          schur(terms[k].var, terms[l].var) +=
              (w[j][k].cwiseProduct(terms[l].coeff)).sum();
    }
    schur = 0.5 * (schur + schur.transpose()).eval();

    auto solve_schur = [&](const Eigen::VectorXd& rhs) -> Eigen::VectorXd {
      double ridge = 0.0;
      for (int attempt = 0; attempt < 6; ++attempt) {
        Eigen::MatrixXd reg =
            schur + ridge * Eigen::MatrixXd::Identity(m, m);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(reg);
        if (ldlt.info() == Eigen::Success) {
          Eigen::VectorXd dy = ldlt.solve(rhs);
          if (dy.allFinite() &&
              (reg * dy - rhs).cwiseAbs().maxCoeff() <=
                  1e-6 * (1.0 + rhs.cwiseAbs().maxCoeff()))
            return dy;
        }
        ridge = ridge == 0.0 ? 1e-12 * (1.0 + schur.trace() / m)
                             : 10.0 * ridge;
      }
      Eigen::LDLT<Eigen::MatrixXd> ldlt(
          schur + ridge * Eigen::MatrixXd::Identity(m, m));
      return ldlt.solve(rhs);
    };

    // One Newton direction for a given complementarity target.
    auto direction = [&](const std::vector<Eigen::MatrixXd>& rc,
                         Eigen::VectorXd& dy,
                         std::vector<Eigen::MatrixXd>& dx,
                         std::vector<Eigen::MatrixXd>& ds) {
      Eigen::VectorXd rhs = -rp;
      for (int j = 0; j < nb; ++j) {
        Eigen::MatrixXd t = (rc[j] - x[j] * rd[j]) * sinv[j];
        for (const auto& term : prob.blocks[j].terms)
          rhs(term.var) += (term.coeff.cwiseProduct(t.transpose())).sum();
      }
      dy = solve_schur(rhs);
      dx.resize(nb);
      ds.resize(nb);
      for (int j = 0; j < nb; ++j) {
        ds[j] = rd[j];
        for (const auto& term : prob.blocks[j].terms)
          ds[j] += dy(term.var) * term.coeff;
        Eigen::MatrixXd d = (rc[j] - x[j] * ds[j]) * sinv[j];
        dx[j] = 0.5 * (d + d.transpose());
      }
    };

    // Predictor (sigma = 0).
    std::vector<Eigen::MatrixXd> rc(nb);
    for (int j = 0; j < nb; ++j) rc[j] = -x[j] * s[j];
    Eigen::VectorXd dy_a;
    std::vector<Eigen::MatrixXd> dx_a, ds_a;
    direction(rc, dy_a, dx_a, ds_a);

    double ap = 1.0, ad = 1.0;
    for (int j = 0; j < nb; ++j) {
      ap = std::min(ap, max_step(x[j], dx_a[j]));
      ad = std::min(ad, max_step(s[j], ds_a[j]));
    }
    double gap_aff = 0.0;
    for (int j = 0; j < nb; ++j)
      gap_aff += ((x[j] + ap * dx_a[j]).cwiseProduct(s[j] + ad * ds_a[j]))
                     .sum();
    const double sigma = std::clamp(
        std::pow(std::max(gap_aff, 0.0) / std::max(gap, 1e-300), 3.0), 1e-8,
        1.0);

    // Corrector.
    for (int j = 0; j < nb; ++j) {
      const Eigen::Index n = x[j].rows();
      rc[j] = sigma * mu * Eigen::MatrixXd::Identity(n, n) - x[j] * s[j] -
              dx_a[j] * ds_a[j];
    }
    Eigen::VectorXd dy;
    std::vector<Eigen::MatrixXd> dx, ds;
    direction(rc, dy, dx, ds);

    ap = std::numeric_limits<double>::infinity();
    ad = std::numeric_limits<double>::infinity();
    for (int j = 0; j < nb; ++j) {
      ap = std::min(ap, max_step(x[j], dx[j]));
      ad = std::min(ad, max_step(s[j], ds[j]));
    }
    ap = std::min(1.0, opts.step_fraction * ap);
    ad = std::min(1.0, opts.step_fraction * ad);
    if (!(ap > 0.0) || !(ad > 0.0)) break;

    for (int j = 0; j < nb; ++j) {
      x[j] += ap * dx[j];
      s[j] += ad * ds[j];
      x[j] = 0.5 * (x[j] + x[j].transpose()).eval();
      s[j] = 0.5 * (s[j] + s[j].transpose()).eval();
    }
    y += ad * dy;
  }

  out.y = y;
  out.x = std::move(x);
  return out;
}

SdpProblem with_bounds(const SdpProblem& prob, const SdpOptions& opts) {
  SdpProblem p = prob;
  if (!opts.add_variable_bounds) return p;
  for (int k = 0; k < p.n_vars; ++k) {
    for (double sgn : {1.0, -1.0}) {
      SdpBlock box;
      box.constant = Eigen::MatrixXd::Constant(1, 1, opts.variable_bound);
      box.terms.push_back({k, Eigen::MatrixXd::Constant(1, 1, sgn)});
      p.blocks.push_back(std::move(box));
    }
  }
  return p;
}

}  // namespace

double evaluate_margin(const SdpProblem& problem, const Eigen::VectorXd& y) {
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& blk : problem.blocks)
    margin = std::min(margin, lambda_min(assemble(blk, y)));
  return margin;
}

SdpResult solve_sdp(const SdpProblem& problem, const SdpOptions& opts) {
  SdpResult res;
  if (problem.n_vars == 0) {
    res.y = Eigen::VectorXd::Zero(0);
    res.feasibility_margin = evaluate_margin(problem, res.y);
    res.status = res.feasibility_margin >= 0.0 ? SdpStatus::Optimal
                                               : SdpStatus::Infeasible;
    return res;
  }
  SdpProblem boxed = with_bounds(problem, opts);
  IpmOutcome out = run_ipm(boxed, opts, nullptr);
  res.y = out.y;
  res.objective = out.objective;
  res.iterations = out.iterations;
  res.duality_gap = out.gap;
  res.primal_residual = out.primal_residual;
  res.dual_residual = out.dual_residual;
  res.feasibility_margin = evaluate_margin(problem, out.y);
  const double feas_tol = -1e-7 * (1.0 + res.y.cwiseAbs().maxCoeff());
  if (out.converged && res.feasibility_margin >= feas_tol)
    res.status = SdpStatus::Optimal;
  else if (res.feasibility_margin >= feas_tol)
    res.status = SdpStatus::Feasible;
  else
    res.status = SdpStatus::Inconclusive;
  return res;
}

SdpResult solve_strict_feasibility(const SdpProblem& problem, double margin,
                                   const SdpOptions& opts) {
  SdpResult res;
  const int m = problem.n_vars;
  const int t_var = m;

  SdpProblem aug;
  aug.n_vars = m + 1;
  aug.objective = Eigen::VectorXd::Zero(m + 1);
  aug.objective(t_var) = 1.0;
  for (const auto& blk : problem.blocks) {
    SdpBlock b = blk;
    const Eigen::Index n = blk.constant.rows();
    b.terms.push_back({t_var, Eigen::MatrixXd::Identity(n, n)});
    aug.blocks.push_back(std::move(b));
  }
  // Cap the shift from below so the phase-I objective stays bounded.
  SdpBlock cap;
  cap.constant = Eigen::MatrixXd::Constant(1, 1, 1.0);
  cap.terms.push_back({t_var, Eigen::MatrixXd::Constant(1, 1, 1.0)});
  aug.blocks.push_back(std::move(cap));

  SdpProblem boxed = with_bounds(aug, opts);

  auto early_accept = [&](const Eigen::VectorXd& y) {
    if (y(t_var) >= -margin) return false;
    return evaluate_margin(problem, y.head(m)) >= margin;
  };

  IpmOutcome out = run_ipm(boxed, opts, early_accept);
  res.y = out.y.head(m);
  res.iterations = out.iterations;
  res.duality_gap = out.gap;
  res.primal_residual = out.primal_residual;
  res.dual_residual = out.dual_residual;
  res.feasibility_margin = evaluate_margin(problem, res.y);
  res.objective = out.objective;
  if (res.feasibility_margin >= margin) {
    res.status = SdpStatus::Feasible;
    return res;
  }

  // Not feasible at the requested margin: claim infeasibility only with a
  // verified Farkas certificate taken from the phase-I primal blocks.
  if (out.converged && static_cast<int>(out.x.size()) >= 1 &&
      out.objective > 1e-8) {
    const int nb = static_cast<int>(problem.blocks.size());
    double z_scale = 0.0;
    for (int j = 0; j < nb && j < static_cast<int>(out.x.size()); ++j)
      z_scale += out.x[j].trace();
    if (z_scale > 0.0) {
      bool certified = true;
      for (int j = 0; j < nb; ++j)
        if (lambda_min(out.x[j]) < -1e-7 * z_scale) certified = false;
      Eigen::VectorXd ray = Eigen::VectorXd::Zero(m);
      double value = 0.0;
      for (int j = 0; j < nb; ++j) {
        value += (problem.blocks[j].constant.cwiseProduct(out.x[j])).sum();
        for (const auto& t : problem.blocks[j].terms)
          ray(t.var) += (t.coeff.cwiseProduct(out.x[j])).sum();
      }
      double data_norm = 1.0;
      for (const auto& blk : problem.blocks)
        data_norm = std::max(data_norm, blk.constant.cwiseAbs().maxCoeff());
      if (ray.cwiseAbs().maxCoeff() > 1e-6 * z_scale * data_norm)
        certified = false;
      if (value > -1e-8 * z_scale * data_norm) certified = false;
      if (certified) {
        res.status = SdpStatus::Infeasible;
        res.message = "Farkas certificate verified";
        return res;
      }
    }
  }
  res.status = SdpStatus::Inconclusive;
  res.message = "no strictly feasible point found";
  return res;
}

}  // namespace scogce
