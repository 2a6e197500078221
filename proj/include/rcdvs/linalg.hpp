#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace rcdvs {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

/// Relative pivot threshold below which a Cholesky factorization is declared
/// singular. Minors below the same fraction of (max diagonal)^tau are treated
/// as exactly zero, so a subset with positive sampling mass always factors.
inline constexpr double kSingularRelTol = 1e-14;

/// Sorted set of distinct 0-based coordinates.
class IndexSet {
 public:
  IndexSet() = default;
  explicit IndexSet(std::vector<int> indices);
  IndexSet(std::initializer_list<int> indices) : IndexSet(std::vector<int>(indices)) {}

  static IndexSet full(int n);

  int size() const { return static_cast<int>(idx_.size()); }
  bool empty() const { return idx_.empty(); }
  int operator[](std::size_t k) const { return idx_[k]; }
  std::span<const int> indices() const { return idx_; }
  auto begin() const { return idx_.begin(); }
  auto end() const { return idx_.end(); }

  bool contains(int i) const;

  /// Throws Domain unless every index is < n.
  void check_dimension(int n) const;

  /// 1-based rendering, e.g. "{1,3}".
  std::string to_string() const;

  auto operator<=>(const IndexSet&) const = default;
  bool operator==(const IndexSet&) const = default;

 private:
  std::vector<int> idx_;
};

/// Symmetric dense matrix. The full square is stored; construction validates
/// squareness, finiteness and symmetry, then symmetrizes exactly.
class DenseSymmetric {
 public:
  explicit DenseSymmetric(Matrix m, double symmetry_tol = 1e-10);

  static DenseSymmetric diagonal(const Vector& d);
  static DenseSymmetric identity(int n);

  int n() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }
  double max_diagonal() const;

 private:
  Matrix m_;
};

struct Triplet {
  int row;
  int col;
  double value;
};

/// Upper triangle of a sparse symmetric PSD matrix in CSR layout. Each
/// nonempty row starts with its diagonal entry; column indices strictly
/// increase along a row.
class CsrSymmetricUpper {
 public:
  CsrSymmetricUpper(int n, std::vector<std::int64_t> row_ptr, std::vector<int> cols,
                    std::vector<double> values);

  /// Entries below the diagonal are mirrored, duplicates summed and exact
  /// zeros dropped before validation.
  static CsrSymmetricUpper from_triplets(int n, std::span<const Triplet> entries);
  static CsrSymmetricUpper from_dense(const DenseSymmetric& m);
  static CsrSymmetricUpper from_sparse(const SparseColMatrix& m);

  int n() const { return n_; }
  std::size_t nnz_upper() const { return values_.size(); }
  /// Nonzeros of the full symmetric matrix.
  std::size_t nnz() const;

  int row_size(int i) const { return static_cast<int>(row_ptr_[i + 1] - row_ptr_[i]); }
  std::span<const int> row_indices(int i) const;
  std::span<const double> row_values(int i) const;
  std::int64_t row_begin(int i) const { return row_ptr_[i]; }
  /// 0 for a structurally empty row.
  double diagonal(int i) const;
  double entry(int i, int j) const;

  const std::vector<std::int64_t>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& cols() const { return cols_; }
  const std::vector<double>& values() const { return values_; }

  DenseSymmetric to_dense() const;
  /// Both triangles, column-major.
  SparseColMatrix to_full_sparse() const;
  std::vector<Triplet> to_triplets() const;

 private:
  int n_;
  std::vector<std::int64_t> row_ptr_;
  std::vector<int> cols_;
  std::vector<double> values_;
};

/// Eigenvalues in descending order, optional matching eigenvectors (columns).
struct Spectrum {
  Vector values;
  std::optional<Matrix> vectors;

  int n() const { return static_cast<int>(values.size()); }
  Matrix reconstruct() const;
  /// Number of eigenvalues above rel_tol * max(|lambda|).
  int rank(double rel_tol = 1e-10) const;
};

DenseSymmetric principal_submatrix(const DenseSymmetric& b, const IndexSet& s);
DenseSymmetric principal_submatrix(const CsrSymmetricUpper& b, const IndexSet& s);

/// Solves M h = rhs by Cholesky. Throws SingularSubmatrix on a pivot at or
/// below kSingularRelTol * max diagonal.
Vector spd_solve(const DenseSymmetric& m, const Vector& rhs);

/// Minimum-norm least-squares solution M^+ rhs.
Vector pseudo_solve(const DenseSymmetric& m, const Vector& rhs);

Spectrum eigendecompose(const DenseSymmetric& b, bool with_vectors = true);

/// General determinant (LU); valid for indefinite input.
double determinant(const DenseSymmetric& m);

/// Determinant of a PSD matrix via Cholesky pivots. Returns exactly 0 when
/// the factorization breaks down or the value is below
/// kSingularRelTol * (max diagonal)^n.
double psd_determinant(const DenseSymmetric& m);

DenseSymmetric adjugate(const DenseSymmetric& m);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& m);

/// Householder-style reflection (I - 2 u u^T) with u normalized internally.
Matrix reflector(const Vector& u);

}  // namespace rcdvs
