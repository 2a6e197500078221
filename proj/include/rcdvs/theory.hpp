#pragma once

#include <span>
#include <vector>

#include "rcdvs/linalg.hpp"

namespace rcdvs {

/// Elementary symmetric polynomial sigma_m(x) by the O(n m) prefix
/// recurrence; sigma_0 = 1 and sigma_m = 0 for m > n.
double elementary_symmetric(std::span<const double> x, int m);
/// sigma_0 .. sigma_max_m in one pass.
std::vector<double> elementary_symmetric_all(std::span<const double> x, int max_m);

/// Sum of all tau x tau principal minors by enumeration (general LU
/// determinants). Limited to n <= 20 and C(n, tau) <= 1e5.
double sum_principal_minors(const DenseSymmetric& b, int tau);

/// sum_S I_S Adj(B_SS) I_S^T by enumeration; n <= 12.
Matrix sum_adjugates_bruteforce(const DenseSymmetric& b, int tau);
/// Q Diag(sigma_{tau-1}(lambda without i)) Q^T from a full spectrum.
Matrix sum_adjugates_spectral(const Spectrum& spectrum, int tau);

/// tau-coordinate approximation: same eigenvectors as B, eigenvalues
/// s_i = lambda_i + sum_{j > tau} lambda_j for i <= tau and
/// s_i = sum_{j >= tau} lambda_j beyond.
struct TauApprox {
  int tau = 0;
  Vector eigenvalues;  // s, aligned with the source spectrum's order
  Matrix vectors;
  Matrix matrix;

  Matrix inverse() const;
};

/// Throws DegenerateApprox when tau exceeds the numerical rank.
TauApprox b_tau(const Spectrum& spectrum, int tau);

/// R(tau1, tau2) = sum_{i >= tau1} lambda_i / sum_{i >= tau2} lambda_i for
/// descending lambda, 1 <= tau1 <= tau2 <= n.
double acceleration_ratio(std::span<const double> lambda, int tau1, int tau2);
double acceleration_ratio(const Vector& lambda, int tau1, int tau2);

/// E[I_S (B_SS)^{-1} I_S^T] under tau-element volume sampling, enumerating
/// nondegenerate subsets only; n <= 12.
Matrix expected_step_matrix(const DenseSymmetric& b, int tau);

/// Strong-convexity modulus in the B_tau norm of f = 1/2 x^T B x - b^T x:
/// min_i lambda_i / s_i. Throws DegenerateApprox for singular B.
double modulus_quadratic(const Spectrum& spectrum, int tau);

/// Squared B_tau-radius of the sublevel set {f <= f* + gap0} of a convex
/// quadratic with Hessian A, measured to the solution set (min-norm
/// convention along null directions of A).
double d_tau_squared_quadratic(const Spectrum& a, const TauApprox& approx, double gap0);
double d_tau_quadratic(const Spectrum& a, const TauApprox& approx, double gap0);

}  // namespace rcdvs
