#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scogce/sdp_solver.hpp"

namespace scogce {

/// Matrix expression affine in a pool of scalar decision variables:
///   E(y) = constant + sum_k y_k * coeff_k.
/// Supports the block-matrix calculus needed to state Lyapunov and Riccati
/// type inequalities directly.
class MatExpr {
 public:
  MatExpr() = default;
  explicit MatExpr(const Eigen::MatrixXd& constant) : constant_(constant) {}

  static MatExpr zero(Eigen::Index rows, Eigen::Index cols) {
    return MatExpr(Eigen::MatrixXd::Zero(rows, cols));
  }
  static MatExpr identity(Eigen::Index n) {
    return MatExpr(Eigen::MatrixXd::Identity(n, n));
  }

  Eigen::Index rows() const { return constant_.rows(); }
  Eigen::Index cols() const { return constant_.cols(); }

  MatExpr operator+(const MatExpr& other) const;
  MatExpr operator-(const MatExpr& other) const;
  MatExpr operator-() const;
  MatExpr transpose() const;
  MatExpr scaled(double a) const;
  /// l * (*this) * r with constant matrices (pass identity to skip a side).
  MatExpr pre_post(const Eigen::MatrixXd& l, const Eigen::MatrixXd& r) const;
  MatExpr pre(const Eigen::MatrixXd& l) const;
  MatExpr post(const Eigen::MatrixXd& r) const;
  /// Symmetric part (E + E') of a square expression.
  MatExpr sym() const { return *this + transpose(); }
  /// tr(*this) as a 1x1 expression.
  MatExpr trace() const;

  /// Dense block assembly; every row of the grid must agree on heights,
  /// every column on widths.
  static MatExpr blocks(const std::vector<std::vector<MatExpr>>& grid);

  Eigen::MatrixXd evaluate(const Eigen::VectorXd& y) const;

  const Eigen::MatrixXd& constant() const { return constant_; }
  const std::map<int, Eigen::MatrixXd>& coefficients() const {
    return coeffs_;
  }

  // Used by LmiProblem when minting variables.
  void add_coefficient(int var, const Eigen::MatrixXd& coeff);

 private:
  Eigen::MatrixXd constant_{Eigen::MatrixXd::Zero(0, 0)};
  std::map<int, Eigen::MatrixXd> coeffs_;
};

/// t * m for a scalar (1x1) expression t and a constant matrix m.
inline MatExpr scalar_times(const MatExpr& t, const Eigen::MatrixXd& m) {
  MatExpr out(t.constant()(0, 0) * m);
  for (const auto& [var, coeff] : t.coefficients())
    out.add_coefficient(var, coeff(0, 0) * m);
  return out;
}

inline MatExpr operator*(double a, const MatExpr& e) { return e.scaled(a); }
inline MatExpr operator*(const Eigen::MatrixXd& l, const MatExpr& e) {
  return e.pre(l);
}
inline MatExpr operator*(const MatExpr& e, const Eigen::MatrixXd& r) {
  return e.post(r);
}

/// A semidefinite feasibility/optimization problem stated through MatExpr
/// constraints; compiles to SdpProblem blocks for the interior-point
/// backend.
class LmiProblem {
 public:
  /// Symmetric n x n matrix variable (n(n+1)/2 scalars).
  MatExpr symmetric(int n, const std::string& name = "");
  /// Rectangular r x c matrix variable (r*c scalars).
  MatExpr rectangular(int r, int c, const std::string& name = "");
  /// Scalar variable as a 1x1 expression.
  MatExpr scalar(const std::string& name = "");

  /// Adds the constraint E(y) >= 0 (in the semidefinite order).
  void require_psd(const MatExpr& e);
  /// Adds E(y) <= 0.
  void require_nsd(const MatExpr& e) { require_psd(-e); }

  int n_vars() const { return n_vars_; }

  SdpProblem compile(const Eigen::VectorXd& objective = {}) const;

  /// Strictly feasible point with every constraint >= margin * I.
  SdpResult solve_feasibility(double margin,
                              const SdpOptions& opts = {}) const;
  /// Minimizes a scalar (1x1) affine expression subject to the
  /// constraints; the expression's constant offset is added back into the
  /// reported objective.
  SdpResult minimize(const MatExpr& scalar_objective,
                     const SdpOptions& opts = {}) const;

  /// Value of an expression at a solver point.
  static Eigen::MatrixXd value(const MatExpr& e, const Eigen::VectorXd& y) {
    return e.evaluate(y);
  }

  /// Machine-readable dump of the compiled problem (block sizes, variable
  /// names, nonzero pattern) for diagnostics.
  std::string describe() const;

 private:
  int n_vars_ = 0;
  std::vector<std::string> var_names_;
  std::vector<MatExpr> constraints_;
};

}  // namespace scogce
