#include "scogce/linalg.hpp"

#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace scogce {

Eigen::MatrixXd null_space_basis(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cut = sv.size() ? 1e-9 * sv(0) : 0.0;
  int rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv(k) > cut) ++rank;
  return svd.matrixV().rightCols(m.cols() - rank);
}

double spectral_abscissa(const Eigen::MatrixXd& a) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  return es.eigenvalues().real().maxCoeff();
}

bool is_stable(const Eigen::MatrixXd& a, double margin) {
  return spectral_abscissa(a) < -margin;
}

double min_symmetric_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool is_positive_definite(const Eigen::MatrixXd& m, double tol) {
  if ((m - m.transpose()).cwiseAbs().maxCoeff() >
      1e-9 * (1.0 + m.cwiseAbs().maxCoeff()))
    return false;
  return min_symmetric_eigenvalue(m) > tol;
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a,
                               const Eigen::MatrixXd& w) {
  const Eigen::Index n = a.rows();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd k =
      Eigen::kroneckerProduct(eye, a.transpose()).eval() +
      Eigen::kroneckerProduct(a.transpose(), eye).eval();
  Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(w.data(), n * n);
  Eigen::VectorXd xv = k.fullPivLu().solve(rhs);
  Eigen::MatrixXd x = Eigen::Map<Eigen::MatrixXd>(xv.data(), n, n);
  return 0.5 * (x + x.transpose());
}

std::optional<Eigen::MatrixXd> solve_soft_riccati(const Eigen::MatrixXd& a,
                                                  const Eigen::MatrixXd& g,
                                                  const Eigen::MatrixXd& q) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd ham(2 * n, 2 * n);
  ham << a, g, -q, -a.transpose();

  Eigen::EigenSolver<Eigen::MatrixXd> es(ham);
  if (es.info() != Eigen::Success) return std::nullopt;

  // Collect the eigenvectors of the n strictly stable eigenvalues.
  Eigen::MatrixXcd basis(2 * n, n);
  Eigen::Index taken = 0;
  for (Eigen::Index k = 0; k < 2 * n; ++k) {
    const double re = es.eigenvalues()(k).real();
    if (re < -1e-10) {
      if (taken == n) return std::nullopt;
      basis.col(taken++) = es.eigenvectors().col(k);
    }
  }
  if (taken != n) return std::nullopt;

  Eigen::MatrixXcd x1 = basis.topRows(n);
  Eigen::MatrixXcd x2 = basis.bottomRows(n);
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(x1);
  if (lu.rank() < n) return std::nullopt;
  Eigen::MatrixXcd pc = x2 * lu.inverse();
  if (pc.imag().cwiseAbs().maxCoeff() >
      1e-6 * (1.0 + pc.real().cwiseAbs().maxCoeff()))
    return std::nullopt;
  Eigen::MatrixXd p = 0.5 * (pc.real() + pc.real().transpose());

  // Newton polish: one-two steps of the Lyapunov iteration sharpen the
  // residual from eigenvector conditioning down to machine level.
  for (int it = 0; it < 3; ++it) {
    Eigen::MatrixXd acl = a + g * p;
    Eigen::MatrixXd res =
        a.transpose() * p + p * a + q + p * g * p;
    if (res.cwiseAbs().maxCoeff() <= 1e-13 * (1.0 + p.cwiseAbs().maxCoeff()))
      break;
    if (spectral_abscissa(acl) >= 0.0) break;
    p += solve_lyapunov(acl, res);
    p = 0.5 * (p + p.transpose()).eval();
  }

  if (!is_stable(a + g * p)) return std::nullopt;
  Eigen::MatrixXd res = a.transpose() * p + p * a + q + p * g * p;
  if (res.cwiseAbs().maxCoeff() > 1e-7 * (1.0 + p.cwiseAbs().maxCoeff()))
    return std::nullopt;
  return p;
}

Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 *
                                                    (m + m.transpose()));
  Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

double cross_bound_violation(const Eigen::MatrixXd& p, int draws,
                             unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Eigen::Index n = p.rows();
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < draws; ++k) {
    Eigen::VectorXd x(n), y(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      x(j) = gauss(rng);
      y(j) = gauss(rng);
    }
    const double cross = x.dot(p * y) + y.dot(p * x);
    const double diag = x.dot(p * x) + y.dot(p * y);
    worst = std::max(worst, cross - diag);
  }
  return worst;
}

Eigen::MatrixXd matrix_exp(const Eigen::MatrixXd& a, double t) {
  return (a * t).exp();
}

}  // namespace scogce
