#pragma once
// Independent reference computations for the test suites. Nothing here calls
// into the library under test.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline long double det(const Mat& m) {
  const int n = static_cast<int>(m.rows());
  std::vector<std::vector<long double>> a(n, std::vector<long double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[i][j] = m(i, j);
  long double d = 1;
  for (int c = 0; c < n; ++c) {
    int p = c;
    for (int r = c + 1; r < n; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[p][c])) p = r;
    if (a[p][c] == 0) return 0;
    if (p != c) {
      std::swap(a[p], a[c]);
      d = -d;
    }
    d *= a[c][c];
    for (int r = c + 1; r < n; ++r) {
      const long double f = a[r][c] / a[c][c];
      for (int k = c; k < n; ++k) a[r][k] -= f * a[c][k];
    }
  }
  return d;
}

inline std::vector<std::vector<int>> subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> s;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(s.size()) == k) {
      out.push_back(s);
      return;
    }
    for (int i = start; i < n; ++i) {
      s.push_back(i);
      rec(i + 1);
      s.pop_back();
    }
  };
  rec(0);
  return out;
}

inline Mat sub(const Mat& b, const std::vector<int>& s) {
  Mat out(s.size(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j) out(i, j) = b(s[i], s[j]);
  return out;
}

/// Definition-level volume sampling probabilities in lexicographic order.
inline std::vector<double> volume_probabilities(const Mat& b, int tau) {
  std::vector<double> w;
  double total = 0;
  for (const auto& s : subsets(static_cast<int>(b.rows()), tau)) {
    const double d = std::max(0.0L, det(sub(b, s)));
    w.push_back(d);
    total += d;
  }
  for (auto& v : w) v /= total;
  return w;
}

/// sigma_m by summing products over all m-subsets.
inline double elementary_symmetric(const std::vector<double>& x, int m) {
  if (m == 0) return 1;
  double total = 0;
  for (const auto& s : subsets(static_cast<int>(x.size()), m)) {
    double p = 1;
    for (int i : s) p *= x[i];
    total += p;
  }
  return total;
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix, sorted descending.
inline std::vector<double> eigenvalues(Mat a) {
  const int n = static_cast<int>(a.rows());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off <= 1e-30 * std::max(1.0, a.squaredNorm())) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (a(p, q) == 0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2 * a(p, q));
        const double t = (theta >= 0 ? 1 : -1) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end(), std::greater<>());
  return ev;
}

inline double min_eigenvalue(const Mat& a) { return eigenvalues(0.5 * (a + a.transpose())).back(); }

inline Mat random_symmetric(int n, std::mt19937_64& g) {
  std::normal_distribution<double> nd;
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = nd(g);
  return 0.5 * (a + a.transpose());
}

inline Mat random_psd(int n, int rank, std::mt19937_64& g) {
  std::normal_distribution<double> nd;
  Mat x(n, rank);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < rank; ++j) x(i, j) = nd(g);
  Mat b = x * x.transpose();
  return 0.5 * (b + b.transpose());
}

/// Orthogonal matrix by Gram-Schmidt on a Gaussian matrix.
inline Mat random_orthogonal(int n, std::mt19937_64& g) {
  std::normal_distribution<double> nd;
  Mat q(n, n);
  for (int j = 0; j < n; ++j) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = nd(g);
    for (int k = 0; k < j; ++k) v -= q.col(k).dot(v) * q.col(k);
    for (int k = 0; k < j; ++k) v -= q.col(k).dot(v) * q.col(k);
    q.col(j) = v / v.norm();
  }
  return q;
}

inline Vec central_difference(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  Vec g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Vec a = x, b = x;
    a(i) += h;
    b(i) -= h;
    g(i) = (f(a) - f(b)) / (2 * h);
  }
  return g;
}

/// Root of a continuous function with a sign change on [lo, hi].
inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace oracle
