#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "rcdvs/linalg.hpp"

namespace rcdvs {

/// Curvature matrix B certifying f(y) <= f(x) + <grad f(x), y - x> + 1/2 |y - x|_B^2.
using CurvatureMatrix = std::variant<DenseSymmetric, CsrSymmetricUpper>;

int dimension(const CurvatureMatrix& b);
DenseSymmetric to_dense(const CurvatureMatrix& b);
DenseSymmetric principal_submatrix(const CurvatureMatrix& b, const IndexSet& s);

enum class LossKind { Square, Logistic, Huber, LogSumExp, SqrtNorm };

struct Loss {
  LossKind kind = LossKind::Square;
  double mu = 0;  // smoothing parameter for Huber, LogSumExp, SqrtNorm

  static Loss square() { return {LossKind::Square, 0}; }
  static Loss logistic() { return {LossKind::Logistic, 0}; }
  static Loss huber(double mu) { return {LossKind::Huber, mu}; }
  static Loss log_sum_exp(double mu) { return {LossKind::LogSumExp, mu}; }
  static Loss sqrt_norm(double mu) { return {LossKind::SqrtNorm, mu}; }

  /// True for losses applied row by row to <a_i, x>.
  bool separable() const;
  /// Smoothness constant L of the scalar loss (1/mu for the smoothed norms).
  double smoothness() const;
};

/// H_mu(t): t^2 / (2 mu) for |t| <= mu, |t| - mu / 2 otherwise.
double huber(double t, double mu);
double huber_derivative(double t, double mu);

/// Scalar loss g(t) with label or offset `label` (b_i) and its derivative.
double loss_value(const Loss& loss, double t, double label);
double loss_derivative(const Loss& loss, double t, double label);
double loss_second_derivative(const Loss& loss, double t, double label);

/// Mutable per-run iterate with cached residuals, so that partial gradients
/// and coordinate steps cost time proportional to the touched columns.
class GradientState {
 public:
  /// Maintained residuals are recomputed from x after this many
  /// single-coordinate updates.
  static constexpr std::int64_t kRefreshInterval = 1'000'000;

  virtual ~GradientState() = default;

  virtual const Vector& x() const = 0;
  virtual double value() const = 0;
  virtual Vector partial_gradient(const IndexSet& s) const = 0;
  virtual Vector full_gradient() const;
  /// x_S <- x_S - h, with incremental residual maintenance.
  virtual void apply_step(const IndexSet& s, const Vector& h) = 0;
  /// Recompute all maintained quantities from x.
  virtual void refresh() = 0;
  /// Largest relative discrepancy between maintained and recomputed residuals.
  virtual double drift() const = 0;
};

class Objective {
 public:
  virtual ~Objective() = default;

  virtual int dimension() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  virtual std::unique_ptr<GradientState> make_state(const Vector& x0) const = 0;
  /// Exact Hessian when the objective has a cheap closed form.
  virtual std::optional<Matrix> hessian(const Vector&) const { return std::nullopt; }

  virtual DenseSymmetric curvature_dense() const = 0;
  virtual CsrSymmetricUpper curvature_sparse() const = 0;
};

/// f(x) = 1/2 <Ax, x> - <b, x> with B = A.
class QuadraticObjective final : public Objective {
 public:
  QuadraticObjective(DenseSymmetric a, Vector b);
  QuadraticObjective(const CsrSymmetricUpper& a, Vector b);

  int dimension() const override { return static_cast<int>(b_.size()); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  std::unique_ptr<GradientState> make_state(const Vector& x0) const override;
  std::optional<Matrix> hessian(const Vector& x) const override;
  DenseSymmetric curvature_dense() const override;
  CsrSymmetricUpper curvature_sparse() const override;

  const Vector& b() const { return b_; }
  bool is_sparse() const { return sparse_.has_value(); }
  Vector multiply(const Vector& x) const;

 private:
  friend class QuadraticState;
  std::optional<Matrix> dense_;
  std::optional<SparseColMatrix> sparse_;
  Vector b_;
};

/// f(x) = sum_i g_i(<a_i, x>) with B = sum_i L_i a_i a_i^T. Rows are stored
/// column-major so that a coordinate touches only its column's nonzeros.
class SeparableObjective final : public Objective {
 public:
  SeparableObjective(SparseColMatrix a, Vector labels, std::vector<Loss> losses);
  SeparableObjective(SparseColMatrix a, Vector labels, Loss loss);
  SeparableObjective(const Matrix& a, Vector labels, Loss loss);

  int dimension() const override { return static_cast<int>(a_.cols()); }
  int rows() const { return static_cast<int>(a_.rows()); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  std::unique_ptr<GradientState> make_state(const Vector& x0) const override;
  std::optional<Matrix> hessian(const Vector& x) const override;
  DenseSymmetric curvature_dense() const override;
  CsrSymmetricUpper curvature_sparse() const override;

  const SparseColMatrix& data() const { return a_; }
  const Vector& labels() const { return labels_; }
  const Loss& loss(int i) const { return losses_.size() == 1 ? losses_[0] : losses_[i]; }

 private:
  friend class SeparableState;
  double row_loss(int i, double r) const { return loss_value(loss(i), r, labels_(i)); }
  double row_derivative(int i, double r) const { return loss_derivative(loss(i), r, labels_(i)); }
  Vector row_weights() const;

  SparseColMatrix a_;
  Vector labels_;
  std::vector<Loss> losses_;
};

/// f(x) = phi(Ax - b) for phi a smoothed max (LogSumExp) or smoothed
/// Euclidean norm (SqrtNorm); B = (1/mu) A^T A.
class SmoothedNormObjective final : public Objective {
 public:
  SmoothedNormObjective(SparseColMatrix a, Vector b, Loss loss);
  SmoothedNormObjective(const Matrix& a, Vector b, Loss loss);

  int dimension() const override { return static_cast<int>(a_.cols()); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  std::unique_ptr<GradientState> make_state(const Vector& x0) const override;
  DenseSymmetric curvature_dense() const override;
  CsrSymmetricUpper curvature_sparse() const override;

  /// phi(y) and its gradient.
  double outer_value(const Vector& y) const;
  Vector outer_gradient(const Vector& y) const;

  const SparseColMatrix& data() const { return a_; }
  const Vector& offset() const { return b_; }
  const Loss& loss() const { return loss_; }

 private:
  friend class SmoothedNormState;
  SparseColMatrix a_;
  Vector b_;
  Loss loss_;
};

/// inner(x) + (gamma / 2) |x|^2 with B = B_inner + gamma I.
class RegularizedObjective final : public Objective {
 public:
  RegularizedObjective(std::shared_ptr<const Objective> inner, double gamma);

  int dimension() const override { return inner_->dimension(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  std::unique_ptr<GradientState> make_state(const Vector& x0) const override;
  std::optional<Matrix> hessian(const Vector& x) const override;
  DenseSymmetric curvature_dense() const override;
  CsrSymmetricUpper curvature_sparse() const override;

  const Objective& inner() const { return *inner_; }
  double gamma() const { return gamma_; }

 private:
  std::shared_ptr<const Objective> inner_;
  double gamma_;
};

/// Weighted Gram matrix sum_i w_i a_i a_i^T of the rows of a.
DenseSymmetric weighted_gram_dense(const SparseColMatrix& a, const Vector& w);
CsrSymmetricUpper weighted_gram_sparse(const SparseColMatrix& a, const Vector& w);

}  // namespace rcdvs
