#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "rcdvs/error.hpp"
#include "rcdvs/theory.hpp"

using namespace rcdvs;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(v.size());
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Spectrum diag_spectrum(const Vector& lam) {
  return Spectrum{lam, Matrix(Matrix::Identity(lam.size(), lam.size()))};
}

// PSD matrix with a prescribed spectrum and random eigenvectors.
Matrix with_spectrum(const std::vector<double>& lam, std::mt19937_64& g) {
  const int n = static_cast<int>(lam.size());
  const Matrix q = oracle::random_orthogonal(n, g);
  Matrix b = q * Eigen::Map<const Vector>(lam.data(), n).asDiagonal() * q.transpose();
  return 0.5 * (b + b.transpose());
}

std::vector<double> random_spectrum(int n, int rank, std::mt19937_64& g) {
  std::uniform_real_distribution<double> u(0.1, 10);
  std::vector<double> lam(n, 0.0);
  for (int i = 0; i < rank; ++i) lam[i] = u(g);
  std::sort(lam.begin(), lam.end(), std::greater<>());
  return lam;
}

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::Numeric;
}

}  // namespace

TEST_CASE("elementary symmetric polynomials") {
  const std::vector<double> x{1, 2, 3};
  CHECK(elementary_symmetric(x, 0) == 1);
  CHECK(elementary_symmetric(x, 2) == 11);
  CHECK(elementary_symmetric(x, 3) == 6);
  CHECK(elementary_symmetric(x, 4) == 0);
  CHECK(elementary_symmetric(std::vector<double>{}, 0) == 1);

  std::mt19937_64 g(1);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(2 + trial % 9);
    for (auto& e : v) e = nd(g);
    const auto all = elementary_symmetric_all(v, static_cast<int>(v.size()));
    for (int m = 0; m <= static_cast<int>(v.size()); ++m) {
      const double ref = oracle::elementary_symmetric(v, m);
      CHECK(std::abs(all[m] - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST_CASE("sum of principal minors examples") {
  CHECK(sum_principal_minors(DenseSymmetric::diagonal(vec({1, 2, 3})), 2) == doctest::Approx(11));
  Matrix t(3, 3);
  t << 2, 1, 0, 1, 2, 1, 0, 1, 2;
  CHECK(sum_principal_minors(DenseSymmetric(t), 2) == doctest::Approx(10));
  CHECK(sum_principal_minors(DenseSymmetric(t), 3) == doctest::Approx(t.determinant()));
}

TEST_CASE("sum of principal minors equals sigma of the spectrum") {
  std::mt19937_64 g(2);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 9;
    const Matrix b = oracle::random_symmetric(n, g);
    const std::vector<double> lam = oracle::eigenvalues(b);
    std::vector<double> abs_lam(lam);
    for (auto& v : abs_lam) v = std::abs(v);
    for (int tau = 1; tau <= n; ++tau) {
      const double got = sum_principal_minors(DenseSymmetric(b), tau);
      const double ref = oracle::elementary_symmetric(lam, tau);
      // indefinite input can cancel; measure against the magnitude scale
      const double scale = std::max(std::abs(ref), oracle::elementary_symmetric(abs_lam, tau));
      CHECK(std::abs(got - ref) <= 1e-8 * scale);
    }
  }
}

TEST_CASE("sum of adjugates: examples and both evaluation paths") {
  const DenseSymmetric d = DenseSymmetric::diagonal(vec({1, 2, 3}));
  CHECK(sum_adjugates_bruteforce(d, 2).isApprox(Matrix(vec({5, 4, 3}).asDiagonal())));
  CHECK(sum_adjugates_bruteforce(d, 1).isApprox(Matrix::Identity(3, 3)));
  CHECK(sum_adjugates_spectral(eigendecompose(d), 2).isApprox(Matrix(vec({5, 4, 3}).asDiagonal())));

  std::mt19937_64 g(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 9;
    const Matrix b = oracle::random_symmetric(n, g);
    const Spectrum spec = eigendecompose(DenseSymmetric(b));
    for (int tau = 1; tau <= n; ++tau) {
      const Matrix brute = sum_adjugates_bruteforce(DenseSymmetric(b), tau);
      const Matrix spectral = sum_adjugates_spectral(spec, tau);
      const double scale = std::max(1e-300, brute.norm());
      CHECK((brute - spectral).norm() <= 1e-8 * std::max(scale, 1e-8 * std::pow(b.norm(), tau - 1)));
      if (tau == n) {
        // Adj(B) = det(B) B^{-1} for the single full subset
        const double det = static_cast<double>(oracle::det(b));
        const Matrix adj = det * b.inverse();
        CHECK((brute - adj).norm() <= 1e-6 * std::max(1.0, adj.norm()));
      }
    }
  }
}

TEST_CASE("tau-coordinate approximation examples") {
  const Spectrum s = diag_spectrum(vec({4, 2, 1, 1}));
  const TauApprox b2 = b_tau(s, 2);
  CHECK(b2.matrix.isApprox(Matrix(vec({6, 4, 4, 4}).asDiagonal())));
  CHECK(b2.inverse().isApprox(Matrix(vec({6, 4, 4, 4}).asDiagonal()).inverse()));
  CHECK(b_tau(s, 1).matrix.isApprox(8 * Matrix::Identity(4, 4)));
  CHECK(b_tau(s, 4).matrix.isApprox(Matrix(vec({4, 2, 1, 1}).asDiagonal())));

  CHECK(kind_of([] { b_tau(diag_spectrum(vec({3, 1, 0})), 3); }) == ErrorKind::DegenerateApprox);
  CHECK_NOTHROW(b_tau(diag_spectrum(vec({3, 1, 0})), 2));
}

TEST_CASE("tau-coordinate approximation does not depend on the eigenbasis") {
  std::mt19937_64 g(4);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 3 + trial % 6;
    // repeated eigenvalues make the eigenbasis non-unique
    std::vector<double> lam = random_spectrum(n, n, g);
    lam[n - 1] = lam[n - 2];
    const Matrix b = with_spectrum(lam, g);
    const Matrix q = oracle::random_orthogonal(n, g);
    const Matrix conj = q * b * q.transpose();
    for (int tau = 1; tau <= n; ++tau) {
      const Matrix bt = b_tau(eigendecompose(DenseSymmetric(b, 1e-8)), tau).matrix;
      const Matrix ct = b_tau(eigendecompose(DenseSymmetric(0.5 * (conj + conj.transpose()), 1e-8)), tau).matrix;
      CHECK((ct - q * bt * q.transpose()).norm() <= 1e-8 * bt.norm());
    }
  }
}

TEST_CASE("sandwich between tau approximations") {
  std::mt19937_64 g(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 9;
    const int rank = trial < 10 ? std::max(1, n - 1 - trial % 2) : n;
    const std::vector<double> lam = random_spectrum(n, rank, g);
    const Spectrum spec = eigendecompose(DenseSymmetric(with_spectrum(lam, g), 1e-8));
    for (int t1 = 1; t1 <= rank; ++t1) {
      const TauApprox a1 = b_tau(spec, t1);
      for (int t2 = t1; t2 <= rank; ++t2) {
        const TauApprox a2 = b_tau(spec, t2);
        const double r = acceleration_ratio(lam, t1, t2);
        const double scale = a1.matrix.norm();
        CHECK(oracle::min_eigenvalue(a1.matrix - a2.matrix) >= -1e-10 * scale);
        CHECK(oracle::min_eigenvalue(r * a2.matrix - a1.matrix) >= -1e-10 * scale);
      }
    }
  }
}

TEST_CASE("acceleration ratio") {
  const std::vector<double> lam{4, 2, 1, 1};
  CHECK(acceleration_ratio(lam, 1, 2) == 2);
  CHECK(acceleration_ratio(lam, 3, 3) == 1);

  std::vector<double> big(400, 1.0);
  big[0] = 400;
  big[1] = 100;
  CHECK(acceleration_ratio(big, 1, 2) == doctest::Approx(898.0 / 498.0).epsilon(1e-14));

  CHECK(kind_of([] { acceleration_ratio(std::vector<double>{2, 1, 0}, 1, 3); }) == ErrorKind::DegenerateApprox);
  CHECK(kind_of([&] { acceleration_ratio(lam, 2, 1); }) == ErrorKind::Domain);

  std::mt19937_64 g(6);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + trial % 20;
    const std::vector<double> l = random_spectrum(n, n, g);
    for (int t1 = 1; t1 <= n; ++t1) {
      for (int t2 = t1; t2 <= n; t2 += 2) {
        const double r12 = acceleration_ratio(l, t1, t2);
        CHECK(r12 >= 1);
        for (int t3 = t2; t3 <= n; t3 += 3) {
          const double lhs = acceleration_ratio(l, t1, t3);
          const double rhs = r12 * acceleration_ratio(l, t2, t3);
          CHECK(std::abs(lhs - rhs) <= 4 * std::numeric_limits<double>::epsilon() * lhs);
        }
      }
    }
  }
}

TEST_CASE("expected step matrix") {
  const DenseSymmetric d = DenseSymmetric::diagonal(vec({1, 2, 3}));
  CHECK(expected_step_matrix(d, 1).isApprox(Matrix::Identity(3, 3) / 6));
  CHECK(b_tau(eigendecompose(d), 1).inverse().isApprox(Matrix::Identity(3, 3) / 6));
  CHECK(expected_step_matrix(d, 3).isApprox(Matrix(vec({1, 0.5, 1.0 / 3}).asDiagonal())));

  std::mt19937_64 g(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 7;
    const int rank = trial < 10 ? std::max(1, n - 1) : n;
    const Matrix b = with_spectrum(random_spectrum(n, rank, g), g);
    const Spectrum spec = eigendecompose(DenseSymmetric(b, 1e-8));
    for (int tau = 1; tau <= rank; ++tau) {
      const Matrix e = expected_step_matrix(DenseSymmetric(b, 1e-8), tau);
      // independent enumeration over nondegenerate subsets
      Matrix ref = Matrix::Zero(n, n);
      double mass = 0;
      for (const auto& s : oracle::subsets(n, tau)) {
        const Matrix sub = oracle::sub(b, s);
        const double det = static_cast<double>(oracle::det(sub));
        if (det <= 1e-12 * std::pow(b.norm(), tau)) continue;
        const Matrix inv = sub.inverse();
        for (int a = 0; a < tau; ++a)
          for (int c = 0; c < tau; ++c) ref(s[a], s[c]) += det * inv(a, c);
        mass += det;
      }
      ref /= mass;
      CHECK((e - ref).norm() <= 1e-7 * ref.norm());
      const Matrix inv_bt = b_tau(spec, tau).inverse();
      CHECK(oracle::min_eigenvalue(e - inv_bt) >= -1e-10 * std::max(1.0, inv_bt.norm()));
    }
  }
}

TEST_CASE("strong convexity modulus") {
  const Spectrum s = diag_spectrum(vec({4, 2, 1, 1}));
  CHECK(modulus_quadratic(s, 2) == doctest::Approx(0.25));
  CHECK(modulus_quadratic(s, 1) == doctest::Approx(1.0 / 8));
  CHECK(modulus_quadratic(s, 4) == doctest::Approx(1));
  CHECK(kind_of([] { modulus_quadratic(diag_spectrum(vec({2, 1, 0})), 1); }) == ErrorKind::DegenerateApprox);

  std::mt19937_64 g(8);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 12;
    const std::vector<double> lam = random_spectrum(n, n, g);
    const Spectrum spec = diag_spectrum(Eigen::Map<const Vector>(lam.data(), n));
    for (int t1 = 1; t1 <= n; ++t1) {
      const double m1 = modulus_quadratic(spec, t1);
      for (int t2 = t1; t2 <= n; ++t2) {
        const double m2 = modulus_quadratic(spec, t2);
        CHECK(m1 <= m2 * (1 + 1e-12));
        CHECK(m2 <= acceleration_ratio(lam, t1, t2) * m1 * (1 + 1e-12));
      }
    }
  }
}

TEST_CASE("sublevel radius examples") {
  const Spectrum two = diag_spectrum(vec({2, 2}));
  CHECK(d_tau_squared_quadratic(two, b_tau(two, 2), 1) == doctest::Approx(2));
  const Spectrum s = diag_spectrum(vec({4, 2, 1, 1}));
  CHECK(d_tau_squared_quadratic(s, b_tau(s, 2), 1) == doctest::Approx(8));
  CHECK(d_tau_quadratic(s, b_tau(s, 2), 0) == 0);
  CHECK(d_tau_quadratic(s, b_tau(s, 2), 4) == doctest::Approx(std::sqrt(32.0)));

  const Spectrum zero = diag_spectrum(vec({0, 0}));
  CHECK(kind_of([&] { d_tau_squared_quadratic(zero, b_tau(two, 1), 1); }) == ErrorKind::Unbounded);
}

TEST_CASE("sublevel radius is attained by sampled boundary points") {
  std::mt19937_64 g(9);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + trial % 3;
    const int rank = trial % 2 ? n - 1 : n;
    const std::vector<double> lam = random_spectrum(n, rank, g);
    const Matrix a = with_spectrum(lam, g);
    const Spectrum spec = eigendecompose(DenseSymmetric(a, 1e-8));
    // curvature B differs from A: a PSD perturbation keeps it nonsingular on null(A)
    const Matrix b = a + oracle::random_psd(n, n, g) * 0.1;
    const Spectrum bspec = eigendecompose(DenseSymmetric(0.5 * (b + b.transpose()), 1e-8));
    const TauApprox approx = b_tau(bspec, 1);
    const double gap = 0.7;
    const double d2 = d_tau_squared_quadratic(spec, approx, gap);

    // directions of the solution set
    std::vector<int> null;
    for (int i = 0; i < n; ++i)
      if (spec.values(i) <= 1e-10 * spec.values.maxCoeff()) null.push_back(i);
    Matrix nb(n, null.size());
    for (std::size_t j = 0; j < null.size(); ++j) nb.col(j) = spec.vectors->col(null[j]);
    // squared B_tau distance from the scaled boundary point to span(null)
    auto distance2 = [&](Vector d) {
      const double q = 0.5 * d.dot(a * d);
      if (q <= 0) return 0.0;
      d *= std::sqrt(gap / q);
      if (!null.empty()) {
        const Vector z = (nb.transpose() * approx.matrix * nb).ldlt().solve(nb.transpose() * approx.matrix * d);
        d -= nb * z;
      }
      return d.dot(approx.matrix * d);
    };
    double best = 0;
    Vector arg = Vector::Zero(n);
    for (int k = 0; k < 20000; ++k) {
      Vector d(n);
      for (auto& v : d) v = nd(g);
      const double dist2 = distance2(d);
      CHECK(dist2 <= d2 * (1 + 1e-9));
      if (dist2 > best) {
        best = dist2;
        arg = d;
      }
    }
    // random-search refinement around the best direction
    for (int k = 0; k < 5000; ++k) {
      Vector d = arg;
      for (auto& v : d) v += 0.05 * arg.norm() * nd(g);
      const double dist2 = distance2(d);
      CHECK(dist2 <= d2 * (1 + 1e-9));
      if (dist2 > best) {
        best = dist2;
        arg = d;
      }
    }
    CHECK(best >= 0.99 * d2);
  }
}
