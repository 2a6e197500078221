#include "rcdvs/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rcdvs/error.hpp"

namespace rcdvs {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::SingularSubmatrix: return "singular submatrix";
    case ErrorKind::ZeroDiagonalNonzeroRow: return "zero diagonal in nonzero row";
    case ErrorKind::EmptySupport: return "empty support";
    case ErrorKind::CombinatorialBlowup: return "combinatorial blowup";
    case ErrorKind::DegenerateApprox: return "degenerate approximation";
    case ErrorKind::Unbounded: return "unbounded";
    case ErrorKind::Numeric: return "numeric failure";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Config: return "configuration error";
    case ErrorKind::InvariantViolation: return "internal invariant violation";
  }
  return "error";
}

// ---------------------------------------------------------------- IndexSet

IndexSet::IndexSet(std::vector<int> indices) : idx_(std::move(indices)) {
  if (idx_.empty()) throw Error(ErrorKind::Domain, "index set must be nonempty");
  if (idx_.front() < 0) throw Error(ErrorKind::Domain, "negative coordinate index");
  for (std::size_t k = 1; k < idx_.size(); ++k) {
    if (idx_[k] <= idx_[k - 1]) {
      throw Error(ErrorKind::Domain, "index set must be strictly increasing");
    }
  }
}

IndexSet IndexSet::full(int n) {
  if (n < 1) throw Error(ErrorKind::Domain, "dimension must be positive");
  std::vector<int> v(n);
  std::iota(v.begin(), v.end(), 0);
  return IndexSet(std::move(v));
}

bool IndexSet::contains(int i) const { return std::binary_search(idx_.begin(), idx_.end(), i); }

void IndexSet::check_dimension(int n) const {
  if (idx_.empty()) throw Error(ErrorKind::Domain, "empty index set");
  if (idx_.back() >= n) {
    throw Error(ErrorKind::Domain, "index " + std::to_string(idx_.back() + 1) +
                                       " out of range for dimension " + std::to_string(n));
  }
}

std::string IndexSet::to_string() const {
  std::string out = "{";
  for (std::size_t k = 0; k < idx_.size(); ++k) {
    if (k) out += ',';
    out += std::to_string(idx_[k] + 1);
  }
  return out + "}";
}

// ---------------------------------------------------------- DenseSymmetric

DenseSymmetric::DenseSymmetric(Matrix m, double symmetry_tol) : m_(std::move(m)) {
  if (m_.rows() < 1 || m_.rows() != m_.cols()) {
    throw Error(ErrorKind::Domain, "symmetric matrix must be square with n >= 1");
  }
  if (!m_.allFinite()) throw Error(ErrorKind::Domain, "matrix has non-finite entries");
  const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
  const double asym = (m_ - m_.transpose()).cwiseAbs().maxCoeff();
  if (asym > symmetry_tol * scale) {
    throw Error(ErrorKind::Domain, "matrix is not symmetric");
  }
  m_ = 0.5 * (m_ + m_.transpose()).eval();
}

DenseSymmetric DenseSymmetric::diagonal(const Vector& d) {
  return DenseSymmetric(Matrix(d.asDiagonal()));
}

DenseSymmetric DenseSymmetric::identity(int n) {
  return DenseSymmetric(Matrix::Identity(n, n));
}

double DenseSymmetric::max_diagonal() const { return m_.diagonal().maxCoeff(); }

// ------------------------------------------------------- CsrSymmetricUpper

CsrSymmetricUpper::CsrSymmetricUpper(int n, std::vector<std::int64_t> row_ptr,
                                     std::vector<int> cols, std::vector<double> values)
    : n_(n), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)), values_(std::move(values)) {
  if (n_ < 1) throw Error(ErrorKind::Domain, "dimension must be positive");
  if (row_ptr_.size() != static_cast<std::size_t>(n_) + 1 || row_ptr_.front() != 0 ||
      row_ptr_.back() != static_cast<std::int64_t>(cols_.size()) ||
      cols_.size() != values_.size()) {
    throw Error(ErrorKind::Domain, "inconsistent CSR arrays");
  }
  std::vector<double> diag(n_, 0.0);
  for (int i = 0; i < n_; ++i) {
    const auto b = row_ptr_[i], e = row_ptr_[i + 1];
    if (e < b) throw Error(ErrorKind::Domain, "row pointers must be nondecreasing");
    if (b == e) continue;
    if (cols_[b] != i) {
      throw Error(ErrorKind::ZeroDiagonalNonzeroRow,
                  "row " + std::to_string(i + 1) + " has entries but no diagonal");
    }
    for (auto k = b; k < e; ++k) {
      if (!std::isfinite(values_[k])) throw Error(ErrorKind::Domain, "non-finite entry");
      if (k > b && cols_[k] <= cols_[k - 1]) {
        throw Error(ErrorKind::Domain,
                    "column indices must increase in row " + std::to_string(i + 1));
      }
      if (cols_[k] >= n_) throw Error(ErrorKind::Domain, "column index out of range");
    }
    if (values_[b] < 0) {
      throw Error(ErrorKind::Domain, "negative diagonal in row " + std::to_string(i + 1));
    }
    if (values_[b] == 0 && e - b > 1) {
      throw Error(ErrorKind::ZeroDiagonalNonzeroRow,
                  "row " + std::to_string(i + 1) + " has zero diagonal and off-diagonal entries");
    }
    diag[i] = values_[b];
  }
  // A zero diagonal also forbids nonzeros in the column above it.
  for (int i = 0; i < n_; ++i) {
    for (auto k = row_ptr_[i] + 1; k < row_ptr_[i + 1]; ++k) {
      if (diag[cols_[k]] == 0 && values_[k] != 0) {
        throw Error(ErrorKind::ZeroDiagonalNonzeroRow,
                    "row " + std::to_string(cols_[k] + 1) +
                        " has zero diagonal and off-diagonal entries");
      }
    }
  }
}

CsrSymmetricUpper CsrSymmetricUpper::from_triplets(int n, std::span<const Triplet> entries) {
  std::vector<Triplet> t;
  t.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.row < 0 || e.col < 0 || e.row >= n || e.col >= n) {
      throw Error(ErrorKind::Domain, "triplet index out of range");
    }
    t.push_back(e.row <= e.col ? e : Triplet{e.col, e.row, e.value});
  }
  std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<std::int64_t> row_ptr(n + 1, 0);
  std::vector<int> cols;
  std::vector<double> vals;
  cols.reserve(t.size());
  vals.reserve(t.size());
  std::size_t k = 0;
  for (int i = 0; i < n; ++i) {
    while (k < t.size() && t[k].row == i) {
      const int j = t[k].col;
      double v = 0;
      while (k < t.size() && t[k].row == i && t[k].col == j) v += t[k++].value;
      if (v != 0) {
        cols.push_back(j);
        vals.push_back(v);
      }
    }
    row_ptr[i + 1] = static_cast<std::int64_t>(cols.size());
  }
  return CsrSymmetricUpper(n, std::move(row_ptr), std::move(cols), std::move(vals));
}

CsrSymmetricUpper CsrSymmetricUpper::from_dense(const DenseSymmetric& m) {
  const int n = m.n();
  std::vector<std::int64_t> row_ptr(n + 1, 0);
  std::vector<int> cols;
  std::vector<double> vals;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      if (m(i, j) != 0) {
        cols.push_back(j);
        vals.push_back(m(i, j));
      }
    }
    row_ptr[i + 1] = static_cast<std::int64_t>(cols.size());
  }
  return CsrSymmetricUpper(n, std::move(row_ptr), std::move(cols), std::move(vals));
}

CsrSymmetricUpper CsrSymmetricUpper::from_sparse(const SparseColMatrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::Domain, "matrix must be square");
  std::vector<Triplet> t;
  t.reserve(m.nonZeros());
  for (int c = 0; c < m.outerSize(); ++c) {
    for (SparseColMatrix::InnerIterator it(m, c); it; ++it) {
      if (it.row() <= c) t.push_back({static_cast<int>(it.row()), c, it.value()});
    }
  }
  return from_triplets(static_cast<int>(m.rows()), t);
}

std::size_t CsrSymmetricUpper::nnz() const {
  std::size_t diag = 0;
  for (int i = 0; i < n_; ++i) diag += row_size(i) > 0 ? 1 : 0;
  return 2 * values_.size() - diag;
}

std::span<const int> CsrSymmetricUpper::row_indices(int i) const {
  return {cols_.data() + row_ptr_[i], static_cast<std::size_t>(row_size(i))};
}

std::span<const double> CsrSymmetricUpper::row_values(int i) const {
  return {values_.data() + row_ptr_[i], static_cast<std::size_t>(row_size(i))};
}

double CsrSymmetricUpper::diagonal(int i) const {
  return row_size(i) > 0 ? values_[row_ptr_[i]] : 0.0;
}

double CsrSymmetricUpper::entry(int i, int j) const {
  if (i > j) std::swap(i, j);
  const auto idx = row_indices(i);
  const auto it = std::lower_bound(idx.begin(), idx.end(), j);
  if (it == idx.end() || *it != j) return 0.0;
  return values_[row_ptr_[i] + (it - idx.begin())];
}

DenseSymmetric CsrSymmetricUpper::to_dense() const {
  Matrix m = Matrix::Zero(n_, n_);
  for (int i = 0; i < n_; ++i) {
    for (auto k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      m(i, cols_[k]) = values_[k];
      m(cols_[k], i) = values_[k];
    }
  }
  return DenseSymmetric(std::move(m));
}

SparseColMatrix CsrSymmetricUpper::to_full_sparse() const {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(nnz());
  for (int i = 0; i < n_; ++i) {
    for (auto k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      t.emplace_back(i, cols_[k], values_[k]);
      if (cols_[k] != i) t.emplace_back(cols_[k], i, values_[k]);
    }
  }
  SparseColMatrix m(n_, n_);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

std::vector<Triplet> CsrSymmetricUpper::to_triplets() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (int i = 0; i < n_; ++i) {
    for (auto k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) t.push_back({i, cols_[k], values_[k]});
  }
  return t;
}

// ---------------------------------------------------------------- Spectrum

Matrix Spectrum::reconstruct() const {
  if (!vectors) throw Error(ErrorKind::Domain, "spectrum has no eigenvectors");
  return *vectors * values.asDiagonal() * vectors->transpose();
}

int Spectrum::rank(double rel_tol) const {
  if (values.size() == 0) return 0;
  const double scale = values.cwiseAbs().maxCoeff();
  if (scale == 0) return 0;
  int r = 0;
  for (double v : values) r += v > rel_tol * scale ? 1 : 0;
  return r;
}

// -------------------------------------------------------------- operations

DenseSymmetric principal_submatrix(const DenseSymmetric& b, const IndexSet& s) {
  s.check_dimension(b.n());
  const int t = s.size();
  Matrix m(t, t);
  for (int a = 0; a < t; ++a) {
    for (int c = 0; c < t; ++c) m(a, c) = b(s[a], s[c]);
  }
  return DenseSymmetric(std::move(m), 0.0);
}

DenseSymmetric principal_submatrix(const CsrSymmetricUpper& b, const IndexSet& s) {
  s.check_dimension(b.n());
  const int t = s.size();
  Matrix m(t, t);
  for (int a = 0; a < t; ++a) {
    m(a, a) = b.diagonal(s[a]);
    for (int c = a + 1; c < t; ++c) m(a, c) = m(c, a) = b.entry(s[a], s[c]);
  }
  return DenseSymmetric(std::move(m), 0.0);
}

namespace {

// In-place lower Cholesky. False on a pivot at or below the relative
// singularity threshold.
bool cholesky_lower(Matrix& a) {
  const Eigen::Index n = a.rows();
  const double threshold = kSingularRelTol * std::max(0.0, a.diagonal().maxCoeff());
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= a(j, k) * a(j, k);
    if (!(pivot > threshold)) return false;
    const double l = std::sqrt(pivot);
    a(j, j) = l;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
      a(i, j) = s / l;
    }
  }
  return true;
}

}  // namespace

Vector spd_solve(const DenseSymmetric& m, const Vector& rhs) {
  if (rhs.size() != m.n()) throw Error(ErrorKind::Domain, "right-hand side size mismatch");
  Matrix l = m.matrix();
  if (!cholesky_lower(l)) {
    throw Error(ErrorKind::SingularSubmatrix, "non-positive Cholesky pivot");
  }
  const Eigen::Index n = l.rows();
  Vector y = rhs;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < i; ++k) y(i) -= l(i, k) * y(k);
    y(i) /= l(i, i);
  }
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    for (Eigen::Index k = i + 1; k < n; ++k) y(i) -= l(k, i) * y(k);
    y(i) /= l(i, i);
  }
  return y;
}

Vector pseudo_solve(const DenseSymmetric& m, const Vector& rhs) {
  if (rhs.size() != m.n()) throw Error(ErrorKind::Domain, "right-hand side size mismatch");
  if (m.n() == 1) {
    const double d = m(0, 0);
    return Vector::Constant(1, d != 0 ? rhs(0) / d : 0.0);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.matrix());
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::Numeric, "eigensolver failed in pseudo_solve");
  }
  const Vector& lam = es.eigenvalues();
  const double cut = 1e-12 * std::max(lam.cwiseAbs().maxCoeff(), 0.0);
  Vector proj = es.eigenvectors().transpose() * rhs;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    proj(i) = std::abs(lam(i)) > cut ? proj(i) / lam(i) : 0.0;
  }
  return es.eigenvectors() * proj;
}

Spectrum eigendecompose(const DenseSymmetric& b, bool with_vectors) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(
      b.matrix(), with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::Numeric, "symmetric eigensolver did not converge (n = " +
                                        std::to_string(b.n()) + ")");
  }
  Spectrum s;
  s.values = es.eigenvalues().reverse();
  if (with_vectors) s.vectors = es.eigenvectors().rowwise().reverse();
  return s;
}

double determinant(const DenseSymmetric& m) {
  if (m.n() == 1) return m(0, 0);
  if (m.n() == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  return m.matrix().partialPivLu().determinant();
}

double psd_determinant(const DenseSymmetric& m) {
  const int n = m.n();
  const double dmax = m.max_diagonal();
  if (!(dmax > 0)) return 0.0;
  double det;
  if (n == 1) {
    det = m(0, 0);
  } else if (n == 2) {
    det = m(0, 0) * m(1, 1) - m(0, 1) * m(0, 1);
  } else {
    Matrix l = m.matrix();
    if (!cholesky_lower(l)) return 0.0;
    det = 1.0;
    for (int i = 0; i < n; ++i) det *= l(i, i) * l(i, i);
  }
  return det < kSingularRelTol * std::pow(dmax, n) ? 0.0 : det;
}

DenseSymmetric adjugate(const DenseSymmetric& m) {
  const int n = m.n();
  if (n == 1) return DenseSymmetric(Matrix::Ones(1, 1));
  if (n > 3) {
    Eigen::PartialPivLU<Matrix> lu(m.matrix());
    if (lu.rcond() > 1e-8) {
      return DenseSymmetric(Matrix(lu.determinant() * lu.inverse()), 1e-8);
    }
  }
  // Cofactor expansion: Adj(M)_{ji} = (-1)^{i+j} det(M without row i, col j).
  Matrix adj(n, n);
  Matrix minor(n - 1, n - 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int r = 0, rr = 0; r < n; ++r) {
        if (r == i) continue;
        for (int c = 0, cc = 0; c < n; ++c) {
          if (c == j) continue;
          minor(rr, cc++) = m(r, c);
        }
        ++rr;
      }
      const double d = n - 1 == 1   ? minor(0, 0)
                       : n - 1 == 2 ? minor(0, 0) * minor(1, 1) - minor(0, 1) * minor(1, 0)
                                    : minor.partialPivLu().determinant();
      adj(j, i) = ((i + j) % 2 == 0 ? 1.0 : -1.0) * d;
    }
  }
  return DenseSymmetric(std::move(adj), 1e-8);
}

double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::Numeric, "eigensolver failed");
  return es.eigenvalues()(0);
}

Matrix reflector(const Vector& u) {
  const double nrm = u.norm();
  if (!(nrm > 0)) throw Error(ErrorKind::Domain, "reflection direction must be nonzero");
  const Vector v = u / nrm;
  return Matrix::Identity(u.size(), u.size()) - 2.0 * v * v.transpose();
}

}  // namespace rcdvs
