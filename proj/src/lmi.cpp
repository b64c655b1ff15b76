#include "scogce/lmi.hpp"

#include <sstream>
#include <stdexcept>

namespace scogce {

void MatExpr::add_coefficient(int var, const Eigen::MatrixXd& coeff) {
  auto it = coeffs_.find(var);
  if (it == coeffs_.end())
    coeffs_.emplace(var, coeff);
  else
    it->second += coeff;
}

MatExpr MatExpr::operator+(const MatExpr& other) const {
  if (rows() != other.rows() || cols() != other.cols())
    throw std::invalid_argument("MatExpr shape mismatch in +");
  MatExpr out(constant_ + other.constant_);
  out.coeffs_ = coeffs_;
  for (const auto& [var, coeff] : other.coeffs_)
    out.add_coefficient(var, coeff);
  return out;
}

MatExpr MatExpr::operator-(const MatExpr& other) const {
  return *this + other.scaled(-1.0);
}

MatExpr MatExpr::operator-() const { return scaled(-1.0); }

MatExpr MatExpr::scaled(double a) const {
  MatExpr out(a * constant_);
  for (const auto& [var, coeff] : coeffs_) out.coeffs_[var] = a * coeff;
  return out;
}

MatExpr MatExpr::transpose() const {
  MatExpr out(constant_.transpose());
  for (const auto& [var, coeff] : coeffs_)
    out.coeffs_[var] = coeff.transpose();
  return out;
}

MatExpr MatExpr::pre_post(const Eigen::MatrixXd& l,
                          const Eigen::MatrixXd& r) const {
  if (l.cols() != rows() || cols() != r.rows())
    throw std::invalid_argument("MatExpr shape mismatch in pre_post");
  MatExpr out(l * constant_ * r);
  for (const auto& [var, coeff] : coeffs_)
    out.coeffs_[var] = l * coeff * r;
  return out;
}

MatExpr MatExpr::pre(const Eigen::MatrixXd& l) const {
  return pre_post(l, Eigen::MatrixXd::Identity(cols(), cols()));
}

MatExpr MatExpr::post(const Eigen::MatrixXd& r) const {
  return pre_post(Eigen::MatrixXd::Identity(rows(), rows()), r);
}

MatExpr MatExpr::trace() const {
  if (rows() != cols())
    throw std::invalid_argument("trace of non-square MatExpr");
  MatExpr out(Eigen::MatrixXd::Constant(1, 1, constant_.trace()));
  for (const auto& [var, coeff] : coeffs_)
    out.coeffs_[var] = Eigen::MatrixXd::Constant(1, 1, coeff.trace());
  return out;
}

MatExpr MatExpr::blocks(const std::vector<std::vector<MatExpr>>& grid) {
  if (grid.empty()) return MatExpr();
  Eigen::Index total_rows = 0, total_cols = 0;
  std::vector<Eigen::Index> row_off, col_off;
  for (const auto& row : grid) {
    row_off.push_back(total_rows);
    total_rows += row.front().rows();
  }
  for (const auto& cell : grid.front()) {
    col_off.push_back(total_cols);
    total_cols += cell.cols();
  }
  MatExpr out(Eigen::MatrixXd::Zero(total_rows, total_cols));
  for (size_t i = 0; i < grid.size(); ++i) {
    if (grid[i].size() != grid.front().size())
      throw std::invalid_argument("ragged MatExpr block grid");
    for (size_t j = 0; j < grid[i].size(); ++j) {
      const MatExpr& cell = grid[i][j];
      if (cell.rows() != grid[i].front().rows() ||
          cell.cols() != grid.front()[j].cols())
        throw std::invalid_argument("inconsistent MatExpr block sizes");
      out.constant_.block(row_off[i], col_off[j], cell.rows(), cell.cols()) =
          cell.constant_;
      for (const auto& [var, coeff] : cell.coeffs_) {
        auto it = out.coeffs_.find(var);
        if (it == out.coeffs_.end())
          it = out.coeffs_
                   .emplace(var,
                            Eigen::MatrixXd::Zero(total_rows, total_cols))
                   .first;
        it->second.block(row_off[i], col_off[j], cell.rows(), cell.cols()) +=
            coeff;
      }
    }
  }
  return out;
}

Eigen::MatrixXd MatExpr::evaluate(const Eigen::VectorXd& y) const {
  Eigen::MatrixXd out = constant_;
  for (const auto& [var, coeff] : coeffs_) out += y(var) * coeff;
  return out;
}

MatExpr LmiProblem::symmetric(int n, const std::string& name) {
  MatExpr e(Eigen::MatrixXd::Zero(n, n));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(n, n);
      basis(i, j) = 1.0;
      basis(j, i) = 1.0;
      e.add_coefficient(n_vars_, basis);
      var_names_.push_back(name + "(" + std::to_string(i) + "," +
                           std::to_string(j) + ")");
      ++n_vars_;
    }
  return e;
}

MatExpr LmiProblem::rectangular(int r, int c, const std::string& name) {
  MatExpr e(Eigen::MatrixXd::Zero(r, c));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) {
      Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(r, c);
      basis(i, j) = 1.0;
      e.add_coefficient(n_vars_, basis);
      var_names_.push_back(name + "(" + std::to_string(i) + "," +
                           std::to_string(j) + ")");
      ++n_vars_;
    }
  return e;
}

MatExpr LmiProblem::scalar(const std::string& name) {
  MatExpr e(Eigen::MatrixXd::Zero(1, 1));
  e.add_coefficient(n_vars_, Eigen::MatrixXd::Constant(1, 1, 1.0));
  var_names_.push_back(name);
  ++n_vars_;
  return e;
}

void LmiProblem::require_psd(const MatExpr& e) {
  if (e.rows() != e.cols())
    throw std::invalid_argument("semidefinite constraint must be square");
  constraints_.push_back(e);
}

SdpProblem LmiProblem::compile(const Eigen::VectorXd& objective) const {
  SdpProblem p;
  p.n_vars = n_vars_;
  p.objective = objective;
  for (const auto& c : constraints_) {
    SdpBlock blk;
    blk.constant = 0.5 * (c.constant() + c.constant().transpose());
    for (const auto& [var, coeff] : c.coefficients())
      blk.terms.push_back({var, 0.5 * (coeff + coeff.transpose())});
    p.blocks.push_back(std::move(blk));
  }
  return p;
}

SdpResult LmiProblem::solve_feasibility(double margin,
                                        const SdpOptions& opts) const {
  return solve_strict_feasibility(compile(), margin, opts);
}

SdpResult LmiProblem::minimize(const MatExpr& scalar_objective,
                               const SdpOptions& opts) const {
  if (scalar_objective.rows() != 1 || scalar_objective.cols() != 1)
    throw std::invalid_argument("objective must be a 1x1 expression");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n_vars_);
  for (const auto& [var, coeff] : scalar_objective.coefficients())
    c(var) = coeff(0, 0);
  SdpResult res = solve_sdp(compile(c), opts);
  res.objective += scalar_objective.constant()(0, 0);
  return res;
}

std::string LmiProblem::describe() const {
  std::ostringstream os;
  os << "{\"n_vars\":" << n_vars_ << ",\"constraints\":[";
  for (size_t k = 0; k < constraints_.size(); ++k) {
    if (k) os << ",";
    os << "{\"size\":" << constraints_[k].rows() << ",\"n_terms\":"
       << constraints_[k].coefficients().size() << "}";
  }
  os << "]}";
  return os.str();
}

}  // namespace scogce
