#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace scogce {

/// One affine symmetric block constraint
///   F_j(y) = constant + sum_k y_{terms[k].var} * terms[k].coeff  >= 0.
struct SdpTerm {
  int var = 0;
  Eigen::MatrixXd coeff;
};

struct SdpBlock {
  Eigen::MatrixXd constant;
  std::vector<SdpTerm> terms;
};

/// Linear SDP in dual form:  minimize c'y  subject to  F_j(y) >= 0 for all
/// blocks j. Feasibility problems use c = 0 together with solve_strict.
struct SdpProblem {
  int n_vars = 0;
  Eigen::VectorXd objective;  // length n_vars; empty means zero
  std::vector<SdpBlock> blocks;
};

enum class SdpStatus { Optimal, Feasible, Infeasible, Inconclusive };

struct SdpResult {
  SdpStatus status = SdpStatus::Inconclusive;
  Eigen::VectorXd y;
  double objective = 0.0;
  int iterations = 0;
  double duality_gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  /// Smallest eigenvalue over all blocks at the returned y.
  double feasibility_margin = 0.0;
  std::string message;
};

struct SdpOptions {
  int max_iterations = 120;
  double tolerance = 1e-9;        // relative gap + residual target
  double variable_bound = 1e7;    // |y_k| box added internally
  double step_fraction = 0.98;    // fraction of max step to the boundary
  bool add_variable_bounds = true;
};

/// Primal-dual interior-point solver (HKM direction, Mehrotra
/// predictor-corrector) for small dense SDPs. Every reported feasible or
/// optimal point is re-validated by a direct eigenvalue check of F_j(y).
SdpResult solve_sdp(const SdpProblem& problem, const SdpOptions& opts = {});

/// Strict feasibility: minimizes an auxiliary shift t with F_j(y) + t I
/// >= 0 and returns a point with F_j(y) >= margin * I when one is found.
/// Reports Infeasible only with a numerically verified Farkas certificate
/// (Z_j >= 0, sum_j tr(Z_j F_jk) ~ 0, sum_j tr(Z_j F_j0) < 0); otherwise
/// an unsuccessful search is Inconclusive.
SdpResult solve_strict_feasibility(const SdpProblem& problem, double margin,
                                   const SdpOptions& opts = {});

/// Direct eigenvalue check of min_j lambda_min(F_j(y)).
double evaluate_margin(const SdpProblem& problem, const Eigen::VectorXd& y);

}  // namespace scogce
