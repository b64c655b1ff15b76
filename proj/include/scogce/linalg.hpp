#pragma once

#include <optional>

#include <Eigen/Dense>

namespace scogce {

/// Orthonormal basis for the right null space of m (columns). Singular
/// values below 1e-9 * sigma_max are treated as zero. Returns an n x 0
/// matrix when m has full column rank.
Eigen::MatrixXd null_space_basis(const Eigen::MatrixXd& m);

/// Spectral abscissa max_k Re(lambda_k(a)).
double spectral_abscissa(const Eigen::MatrixXd& a);

/// True iff every eigenvalue of a has real part < -margin.
bool is_stable(const Eigen::MatrixXd& a, double margin = 0.0);

/// Smallest eigenvalue of the symmetric part of m.
double min_symmetric_eigenvalue(const Eigen::MatrixXd& m);

/// True iff m is symmetric and its eigenvalues are all > tol (absolute).
bool is_positive_definite(const Eigen::MatrixXd& m, double tol = 0.0);

/// Solves a' x + x a + w = 0 by Kronecker vectorization. Requires a to
/// have no eigenvalue pair summing to zero; for stable a the solution is
/// the usual observability Gramian of (a, w).
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a,
                               const Eigen::MatrixXd& w);

/// Stabilizing solution of the algebraic Riccati equation
///   a' p + p a + q + p g p = 0
/// via the stable invariant subspace of the Hamiltonian [[a, g], [-q, -a']].
/// g may be indefinite (soft-constrained games take g = E D^{-1} E' -
/// B R^{-1} B'). Returns nullopt when the Hamiltonian has eigenvalues on
/// the imaginary axis or the subspace does not yield a symmetric solution
/// with stable a + g p.
std::optional<Eigen::MatrixXd> solve_soft_riccati(const Eigen::MatrixXd& a,
                                                  const Eigen::MatrixXd& g,
                                                  const Eigen::MatrixXd& q);

/// Symmetric positive semidefinite square root.
Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& m);

/// Checks the coupling bound x' p y + y' p x <= x' p x + y' p y pointwise
/// on random draws; returns the worst violation (<= 0 when the bound
/// holds). Used as a property oracle for the cross-term estimates behind
/// the guaranteed-cost inequalities.
double cross_bound_violation(const Eigen::MatrixXd& p, int draws,
                             unsigned seed);

/// Matrix exponential e^{a t}.
Eigen::MatrixXd matrix_exp(const Eigen::MatrixXd& a, double t);

}  // namespace scogce
