#include "rcdvs/theory.hpp"

#include <algorithm>
#include <cmath>

#include "rcdvs/error.hpp"
#include "rcdvs/sampling.hpp"

namespace rcdvs {

namespace {

constexpr double kRankTol = 1e-10;

void check_enumeration(int n, int tau, int max_n, std::uint64_t max_subsets) {
  if (tau < 1 || tau > n) throw Error(ErrorKind::Domain, "tau outside [1, n]");
  if (n > max_n || binomial(n, tau) > max_subsets) {
    throw Error(ErrorKind::CombinatorialBlowup,
                "enumeration limited to n <= " + std::to_string(max_n) + " and " +
                    std::to_string(max_subsets) + " subsets");
  }
}

// Descending eigenvalues with roundoff-level negatives set to zero.
Vector psd_eigenvalues(const Spectrum& s) {
  Vector lam = s.values;
  const double scale = lam.size() ? lam.cwiseAbs().maxCoeff() : 0.0;
  for (auto& v : lam) {
    if (v < -kRankTol * scale) throw Error(ErrorKind::Domain, "matrix is not positive semidefinite");
    v = std::max(v, 0.0);
  }
  return lam;
}

}  // namespace

std::vector<double> elementary_symmetric_all(std::span<const double> x, int max_m) {
  if (max_m < 0) throw Error(ErrorKind::Domain, "negative degree");
  std::vector<double> e(max_m + 1, 0.0);
  e[0] = 1.0;
  int seen = 0;
  for (double v : x) {
    ++seen;
    for (int k = std::min(seen, max_m); k >= 1; --k) e[k] += v * e[k - 1];
  }
  return e;
}

double elementary_symmetric(std::span<const double> x, int m) {
  if (m < 0) throw Error(ErrorKind::Domain, "negative degree");
  if (m > static_cast<int>(x.size())) return 0.0;
  return elementary_symmetric_all(x, m)[m];
}

double sum_principal_minors(const DenseSymmetric& b, int tau) {
  check_enumeration(b.n(), tau, 20, 100'000);
  double total = 0;
  for_each_subset(b.n(), tau, [&](const std::vector<int>& s) {
    total += determinant(principal_submatrix(b, IndexSet(s)));
  });
  return total;
}

Matrix sum_adjugates_bruteforce(const DenseSymmetric& b, int tau) {
  check_enumeration(b.n(), tau, 12, 100'000);
  Matrix total = Matrix::Zero(b.n(), b.n());
  for_each_subset(b.n(), tau, [&](const std::vector<int>& s) {
    const Matrix adj = adjugate(principal_submatrix(b, IndexSet(s))).matrix();
    for (int a = 0; a < tau; ++a) {
      for (int c = 0; c < tau; ++c) total(s[a], s[c]) += adj(a, c);
    }
  });
  return total;
}

Matrix sum_adjugates_spectral(const Spectrum& spectrum, int tau) {
  const int n = spectrum.n();
  if (tau < 1 || tau > n) throw Error(ErrorKind::Domain, "tau outside [1, n]");
  if (!spectrum.vectors) throw Error(ErrorKind::Domain, "spectrum needs eigenvectors");
  Vector d(n);
  std::vector<double> rest(n - 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0, k = 0; j < n; ++j) {
      if (j != i) rest[k++] = spectrum.values(j);
    }
    d(i) = elementary_symmetric(rest, tau - 1);
  }
  const Matrix& q = *spectrum.vectors;
  return q * d.asDiagonal() * q.transpose();
}

Matrix TauApprox::inverse() const {
  return vectors * eigenvalues.cwiseInverse().asDiagonal() * vectors.transpose();
}

TauApprox b_tau(const Spectrum& spectrum, int tau) {
  const int n = spectrum.n();
  if (tau < 1 || tau > n) throw Error(ErrorKind::Domain, "tau outside [1, n]");
  if (!spectrum.vectors) throw Error(ErrorKind::Domain, "spectrum needs eigenvectors");
  const Vector lam = psd_eigenvalues(spectrum);
  if (tau > spectrum.rank(kRankTol)) {
    throw Error(ErrorKind::DegenerateApprox,
                "tau = " + std::to_string(tau) + " exceeds rank " +
                    std::to_string(spectrum.rank(kRankTol)));
  }
  // tail(k) = sum of lambda_j for 0-based j >= k
  Vector tail = Vector::Zero(n + 1);
  for (int j = n - 1; j >= 0; --j) tail(j) = tail(j + 1) + lam(j);

  TauApprox out;
  out.tau = tau;
  out.eigenvalues.resize(n);
  for (int i = 0; i < n; ++i) {
    out.eigenvalues(i) = i < tau ? lam(i) + tail(tau) : tail(tau - 1);
  }
  out.vectors = *spectrum.vectors;
  out.matrix = out.vectors * out.eigenvalues.asDiagonal() * out.vectors.transpose();
  out.matrix = (0.5 * (out.matrix + out.matrix.transpose())).eval();
  return out;
}

double acceleration_ratio(std::span<const double> lambda, int tau1, int tau2) {
  const int n = static_cast<int>(lambda.size());
  if (tau1 < 1 || tau1 > tau2 || tau2 > n) {
    throw Error(ErrorKind::Domain, "need 1 <= tau1 <= tau2 <= n");
  }
  double num = 0, den = 0, scale = 0;
  for (int i = 0; i < n; ++i) {
    scale = std::max(scale, std::abs(lambda[i]));
    if (i >= tau1 - 1) num += lambda[i];
    if (i >= tau2 - 1) den += lambda[i];
  }
  if (!(den > kRankTol * scale)) {
    throw Error(ErrorKind::DegenerateApprox, "eigenvalue tail sum vanishes (tau2 exceeds rank)");
  }
  return num / den;
}

double acceleration_ratio(const Vector& lambda, int tau1, int tau2) {
  return acceleration_ratio(std::span<const double>(lambda.data(), lambda.size()), tau1, tau2);
}

Matrix expected_step_matrix(const DenseSymmetric& b, int tau) {
  const int n = b.n();
  check_enumeration(n, tau, 12, 100'000);
  Matrix acc = Matrix::Zero(n, n);
  double mass = 0;
  for_each_subset(n, tau, [&](const std::vector<int>& s) {
    const IndexSet set(s);
    const DenseSymmetric sub = principal_submatrix(b, set);
    const double det = psd_determinant(sub);
    if (det == 0) return;
    mass += det;
    const Matrix inv = sub.matrix().llt().solve(Matrix::Identity(tau, tau));
    for (int a = 0; a < tau; ++a) {
      for (int c = 0; c < tau; ++c) acc(s[a], s[c]) += det * inv(a, c);
    }
  });
  if (!(mass > 0)) throw Error(ErrorKind::EmptySupport, "all principal minors vanish");
  return acc / mass;
}

double modulus_quadratic(const Spectrum& spectrum, int tau) {
  const Vector lam = psd_eigenvalues(spectrum);
  if (spectrum.rank(kRankTol) < spectrum.n()) {
    throw Error(ErrorKind::DegenerateApprox, "strong convexity needs a nonsingular matrix");
  }
  const TauApprox approx = b_tau(spectrum, tau);
  return (lam.array() / approx.eigenvalues.array()).minCoeff();
}

double d_tau_squared_quadratic(const Spectrum& a, const TauApprox& approx, double gap0) {
  if (!(gap0 >= 0)) throw Error(ErrorKind::Domain, "initial gap must be nonnegative");
  if (!a.vectors) throw Error(ErrorKind::Domain, "spectrum needs eigenvectors");
  const int n = a.n();
  if (approx.matrix.rows() != n) throw Error(ErrorKind::Domain, "dimension mismatch");
  if (gap0 == 0) return 0.0;

  const Vector lam = psd_eigenvalues(a);
  const double scale = lam.maxCoeff();
  std::vector<int> range, null;
  for (int i = 0; i < n; ++i) (lam(i) > kRankTol * scale ? range : null).push_back(i);
  if (range.empty()) throw Error(ErrorKind::Unbounded, "zero Hessian: sublevel set is unbounded");

  const Matrix& q = *a.vectors;
  Matrix u(n, range.size());
  Vector lu(range.size());
  for (std::size_t k = 0; k < range.size(); ++k) {
    u.col(k) = q.col(range[k]);
    lu(k) = lam(range[k]);
  }
  // Distance to x* + span(N) in the B_tau norm is the Schur complement of
  // B_tau on the null block.
  Matrix schur = approx.matrix;
  if (!null.empty()) {
    Matrix nb(n, null.size());
    for (std::size_t k = 0; k < null.size(); ++k) nb.col(k) = q.col(null[k]);
    const Matrix bn = approx.matrix * nb;
    const Matrix gram = nb.transpose() * bn;
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success || min_eigenvalue(gram) <= kRankTol * gram.norm()) {
      throw Error(ErrorKind::Unbounded, "B_tau is degenerate on the null space of A");
    }
    schur -= bn * llt.solve(bn.transpose());
  }
  const Vector inv_sqrt = lu.cwiseSqrt().cwiseInverse();
  Matrix w = inv_sqrt.asDiagonal() * (u.transpose() * schur * u) * inv_sqrt.asDiagonal();
  w = (0.5 * (w + w.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(w, Eigen::EigenvaluesOnly);
  return 2.0 * gap0 * es.eigenvalues().maxCoeff();
}

double d_tau_quadratic(const Spectrum& a, const TauApprox& approx, double gap0) {
  return std::sqrt(d_tau_squared_quadratic(a, approx, gap0));
}

}  // namespace rcdvs
