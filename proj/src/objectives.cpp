#include "rcdvs/objectives.hpp"

#include <algorithm>
#include <cmath>

#include "rcdvs/error.hpp"

namespace rcdvs {

// ------------------------------------------------------------ curvature

int dimension(const CurvatureMatrix& b) {
  return std::visit([](const auto& m) { return m.n(); }, b);
}

DenseSymmetric to_dense(const CurvatureMatrix& b) {
  if (const auto* d = std::get_if<DenseSymmetric>(&b)) return *d;
  return std::get<CsrSymmetricUpper>(b).to_dense();
}

DenseSymmetric principal_submatrix(const CurvatureMatrix& b, const IndexSet& s) {
  return std::visit([&](const auto& m) { return principal_submatrix(m, s); }, b);
}

// ----------------------------------------------------------------- losses

bool Loss::separable() const {
  return kind == LossKind::Square || kind == LossKind::Logistic || kind == LossKind::Huber;
}

double Loss::smoothness() const {
  switch (kind) {
    case LossKind::Square: return 1.0;
    case LossKind::Logistic: return 0.25;
    case LossKind::Huber:
    case LossKind::LogSumExp:
    case LossKind::SqrtNorm: return 1.0 / mu;
  }
  return 1.0;
}

double huber(double t, double mu) {
  const double a = std::abs(t);
  return a <= mu ? t * t / (2 * mu) : a - mu / 2;
}

double huber_derivative(double t, double mu) {
  if (t > mu) return 1.0;
  if (t < -mu) return -1.0;
  return t / mu;
}

double loss_value(const Loss& loss, double t, double label) {
  switch (loss.kind) {
    case LossKind::Square: return 0.5 * (t - label) * (t - label);
    case LossKind::Logistic: {
      // ln(1 + e^{-z}) = max(0, -z) + ln(1 + e^{-|z|})
      const double z = label * t;
      return std::max(0.0, -z) + std::log1p(std::exp(-std::abs(z)));
    }
    case LossKind::Huber: return huber(t - label, loss.mu);
    default: throw Error(ErrorKind::Domain, "loss is not separable");
  }
}

double loss_derivative(const Loss& loss, double t, double label) {
  switch (loss.kind) {
    case LossKind::Square: return t - label;
    case LossKind::Logistic: {
      // d/dt ln(1 + e^{-b t}) = -b / (1 + e^{b t})
      const double z = label * t;
      if (z >= 0) {
        const double e = std::exp(-z);
        return -label * e / (1 + e);
      }
      return -label / (1 + std::exp(z));
    }
    case LossKind::Huber: return huber_derivative(t - label, loss.mu);
    default: throw Error(ErrorKind::Domain, "loss is not separable");
  }
}

double loss_second_derivative(const Loss& loss, double t, double label) {
  switch (loss.kind) {
    case LossKind::Square: return 1.0;
    case LossKind::Logistic: {
      const double e = std::exp(-std::abs(label * t));
      return label * label * e / ((1 + e) * (1 + e));
    }
    case LossKind::Huber: return std::abs(t - label) <= loss.mu ? 1.0 / loss.mu : 0.0;
    default: throw Error(ErrorKind::Domain, "loss is not separable");
  }
}

// ------------------------------------------------------------- helpers

namespace {

void check_step(const GradientState& st, const IndexSet& s, const Vector& h) {
  s.check_dimension(static_cast<int>(st.x().size()));
  if (h.size() != s.size()) throw Error(ErrorKind::Domain, "step length differs from subset size");
}

double relative_gap(const Vector& maintained, const Vector& fresh) {
  if (fresh.size() == 0) return 0.0;
  const double scale = std::max(1.0, fresh.cwiseAbs().maxCoeff());
  return (maintained - fresh).cwiseAbs().maxCoeff() / scale;
}

SparseColMatrix to_sparse(const Matrix& a) {
  SparseColMatrix s = a.sparseView();
  s.makeCompressed();
  return s;
}

}  // namespace

Vector GradientState::full_gradient() const {
  return partial_gradient(IndexSet::full(static_cast<int>(x().size())));
}

DenseSymmetric weighted_gram_dense(const SparseColMatrix& a, const Vector& w) {
  const double density =
      static_cast<double>(a.nonZeros()) / std::max<double>(1.0, double(a.rows()) * double(a.cols()));
  Matrix g;
  if (density > 0.05) {
    const Matrix ad(a);
    g = ad.transpose() * (w.asDiagonal() * ad);
  } else {
    const SparseColMatrix wa = w.asDiagonal() * a;
    const SparseColMatrix at = a.transpose();
    g = Matrix(at * wa);
  }
  return DenseSymmetric(0.5 * (g + g.transpose()), 1e-8);
}

CsrSymmetricUpper weighted_gram_sparse(const SparseColMatrix& a, const Vector& w) {
  const SparseColMatrix wa = w.asDiagonal() * a;
  const SparseColMatrix at = a.transpose();
  const SparseColMatrix g = at * wa;
  return CsrSymmetricUpper::from_sparse(g);
}

// ------------------------------------------------------------ quadratic

class QuadraticState final : public GradientState {
 public:
  QuadraticState(const QuadraticObjective& obj, const Vector& x0) : obj_(obj), x_(x0) { refresh(); }

  const Vector& x() const override { return x_; }
  double value() const override { return f_; }

  Vector partial_gradient(const IndexSet& s) const override {
    s.check_dimension(static_cast<int>(x().size()));
    Vector out(s.size());
    for (int k = 0; k < s.size(); ++k) out(k) = g_(s[k]);
    return out;
  }

  Vector full_gradient() const override { return g_; }

  void apply_step(const IndexSet& s, const Vector& h) override {
    check_step(*this, s, h);
    // delta = A[:, S] h; f(x - I_S h) = f - <g_S, h> + 1/2 <h, delta_S>
    Vector delta = Vector::Zero(x_.size());
    if (obj_.dense_) {
      for (int k = 0; k < s.size(); ++k) delta.noalias() += h(k) * obj_.dense_->col(s[k]);
    } else {
      for (int k = 0; k < s.size(); ++k) {
        for (SparseColMatrix::InnerIterator it(*obj_.sparse_, s[k]); it; ++it) {
          delta(it.row()) += it.value() * h(k);
        }
      }
    }
    double lin = 0, quad = 0;
    for (int k = 0; k < s.size(); ++k) {
      lin += g_(s[k]) * h(k);
      quad += h(k) * delta(s[k]);
      x_(s[k]) -= h(k);
    }
    f_ += -lin + 0.5 * quad;
    g_ -= delta;
    updates_ += s.size();
    if (updates_ >= kRefreshInterval) refresh();
  }

  void refresh() override {
    g_ = obj_.multiply(x_) - obj_.b();
    f_ = 0.5 * x_.dot(g_ - obj_.b());
    updates_ = 0;
  }

  double drift() const override { return relative_gap(g_, obj_.multiply(x_) - obj_.b()); }

 private:
  const QuadraticObjective& obj_;
  Vector x_;
  Vector g_;
  double f_ = 0;
  std::int64_t updates_ = 0;
};

QuadraticObjective::QuadraticObjective(DenseSymmetric a, Vector b)
    : dense_(a.matrix()), b_(std::move(b)) {
  if (b_.size() != a.n()) throw Error(ErrorKind::Domain, "b has wrong length");
}

QuadraticObjective::QuadraticObjective(const CsrSymmetricUpper& a, Vector b)
    : sparse_(a.to_full_sparse()), b_(std::move(b)) {
  if (b_.size() != a.n()) throw Error(ErrorKind::Domain, "b has wrong length");
}

Vector QuadraticObjective::multiply(const Vector& x) const {
  if (dense_) return *dense_ * x;
  return *sparse_ * x;
}

double QuadraticObjective::value(const Vector& x) const {
  return 0.5 * x.dot(multiply(x)) - b_.dot(x);
}

Vector QuadraticObjective::gradient(const Vector& x) const { return multiply(x) - b_; }

std::unique_ptr<GradientState> QuadraticObjective::make_state(const Vector& x0) const {
  if (x0.size() != b_.size()) throw Error(ErrorKind::Domain, "start point has wrong length");
  return std::make_unique<QuadraticState>(*this, x0);
}

std::optional<Matrix> QuadraticObjective::hessian(const Vector&) const {
  if (dense_) return *dense_;
  return Matrix(*sparse_);
}

DenseSymmetric QuadraticObjective::curvature_dense() const {
  if (dense_) return DenseSymmetric(*dense_);
  return DenseSymmetric(Matrix(*sparse_));
}

CsrSymmetricUpper QuadraticObjective::curvature_sparse() const {
  if (sparse_) return CsrSymmetricUpper::from_sparse(*sparse_);
  return CsrSymmetricUpper::from_dense(DenseSymmetric(*dense_));
}

// ------------------------------------------------------------ separable

class SeparableState final : public GradientState {
 public:
  SeparableState(const SeparableObjective& obj, const Vector& x0)
      : obj_(obj), x_(x0), stamp_(obj.rows(), 0) {
    refresh();
  }

  const Vector& x() const override { return x_; }
  double value() const override { return f_; }

  Vector partial_gradient(const IndexSet& s) const override {
    s.check_dimension(static_cast<int>(x().size()));
    Vector out(s.size());
    for (int k = 0; k < s.size(); ++k) {
      double acc = 0;
      for (SparseColMatrix::InnerIterator it(obj_.a_, s[k]); it; ++it) {
        acc += it.value() * obj_.row_derivative(static_cast<int>(it.row()), r_(it.row()));
      }
      out(k) = acc;
    }
    return out;
  }

  Vector full_gradient() const override { return obj_.gradient(x_); }

  void apply_step(const IndexSet& s, const Vector& h) override {
    check_step(*this, s, h);
    ++step_;
    touched_.clear();
    for (int k = 0; k < s.size(); ++k) {
      x_(s[k]) -= h(k);
      for (SparseColMatrix::InnerIterator it(obj_.a_, s[k]); it; ++it) {
        const auto i = it.row();
        r_(i) -= it.value() * h(k);
        if (stamp_[i] != step_) {
          stamp_[i] = step_;
          touched_.push_back(static_cast<int>(i));
        }
      }
    }
    for (int i : touched_) {
      const double v = obj_.row_loss(i, r_(i));
      f_ += v - row_value_(i);
      row_value_(i) = v;
    }
    updates_ += s.size();
    if (updates_ >= kRefreshInterval) refresh();
  }

  void refresh() override {
    r_ = obj_.a_ * x_;
    row_value_.resize(r_.size());
    for (Eigen::Index i = 0; i < r_.size(); ++i) {
      row_value_(i) = obj_.row_loss(static_cast<int>(i), r_(i));
    }
    f_ = row_value_.sum();
    updates_ = 0;
  }

  double drift() const override { return relative_gap(r_, obj_.a_ * x_); }

 private:
  const SeparableObjective& obj_;
  Vector x_;
  Vector r_;
  Vector row_value_;
  double f_ = 0;
  std::vector<std::uint64_t> stamp_;
  std::vector<int> touched_;
  std::uint64_t step_ = 0;
  std::int64_t updates_ = 0;
};

SeparableObjective::SeparableObjective(SparseColMatrix a, Vector labels, std::vector<Loss> losses)
    : a_(std::move(a)), labels_(std::move(labels)), losses_(std::move(losses)) {
  a_.makeCompressed();
  if (labels_.size() != a_.rows()) throw Error(ErrorKind::Domain, "label count differs from rows");
  if (losses_.size() != 1 && losses_.size() != static_cast<std::size_t>(a_.rows())) {
    throw Error(ErrorKind::Domain, "need one loss or one loss per row");
  }
  for (const auto& l : losses_) {
    if (!l.separable()) throw Error(ErrorKind::Domain, "loss is not separable");
    if (l.kind == LossKind::Huber && !(l.mu > 0)) throw Error(ErrorKind::Domain, "mu must be > 0");
  }
}

SeparableObjective::SeparableObjective(SparseColMatrix a, Vector labels, Loss loss)
    : SeparableObjective(std::move(a), std::move(labels), std::vector<Loss>{loss}) {}

SeparableObjective::SeparableObjective(const Matrix& a, Vector labels, Loss loss)
    : SeparableObjective(to_sparse(a), std::move(labels), std::vector<Loss>{loss}) {}

double SeparableObjective::value(const Vector& x) const {
  const Vector r = a_ * x;
  double f = 0;
  for (Eigen::Index i = 0; i < r.size(); ++i) f += row_loss(static_cast<int>(i), r(i));
  return f;
}

Vector SeparableObjective::gradient(const Vector& x) const {
  Vector r = a_ * x;
  for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = row_derivative(static_cast<int>(i), r(i));
  return a_.transpose() * r;
}

std::unique_ptr<GradientState> SeparableObjective::make_state(const Vector& x0) const {
  if (x0.size() != a_.cols()) throw Error(ErrorKind::Domain, "start point has wrong length");
  return std::make_unique<SeparableState>(*this, x0);
}

Vector SeparableObjective::row_weights() const {
  Vector w(a_.rows());
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = loss(static_cast<int>(i)).smoothness();
  return w;
}

std::optional<Matrix> SeparableObjective::hessian(const Vector& x) const {
  const Vector r = a_ * x;
  Vector w(a_.rows());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    w(i) = loss_second_derivative(loss(static_cast<int>(i)), r(i), labels_(i));
  }
  return weighted_gram_dense(a_, w).matrix();
}

DenseSymmetric SeparableObjective::curvature_dense() const {
  return weighted_gram_dense(a_, row_weights());
}

CsrSymmetricUpper SeparableObjective::curvature_sparse() const {
  return weighted_gram_sparse(a_, row_weights());
}

// ------------------------------------------------------- smoothed norms

class SmoothedNormState final : public GradientState {
 public:
  SmoothedNormState(const SmoothedNormObjective& obj, const Vector& x0) : obj_(obj), x_(x0) {
    refresh();
  }

  const Vector& x() const override { return x_; }
  double value() const override { return f_; }

  Vector partial_gradient(const IndexSet& s) const override {
    s.check_dimension(static_cast<int>(x().size()));
    Vector out(s.size());
    for (int k = 0; k < s.size(); ++k) out(k) = obj_.a_.col(s[k]).dot(w_);
    return out;
  }

  void apply_step(const IndexSet& s, const Vector& h) override {
    check_step(*this, s, h);
    for (int k = 0; k < s.size(); ++k) {
      x_(s[k]) -= h(k);
      for (SparseColMatrix::InnerIterator it(obj_.a_, s[k]); it; ++it) {
        r_(it.row()) -= it.value() * h(k);
      }
    }
    f_ = obj_.outer_value(r_);
    w_ = obj_.outer_gradient(r_);
    updates_ += s.size();
    if (updates_ >= kRefreshInterval) refresh();
  }

  void refresh() override {
    r_ = obj_.a_ * x_ - obj_.b_;
    f_ = obj_.outer_value(r_);
    w_ = obj_.outer_gradient(r_);
    updates_ = 0;
  }

  double drift() const override { return relative_gap(r_, obj_.a_ * x_ - obj_.b_); }

 private:
  const SmoothedNormObjective& obj_;
  Vector x_;
  Vector r_;
  Vector w_;
  double f_ = 0;
  std::int64_t updates_ = 0;
};

SmoothedNormObjective::SmoothedNormObjective(SparseColMatrix a, Vector b, Loss loss)
    : a_(std::move(a)), b_(std::move(b)), loss_(loss) {
  a_.makeCompressed();
  if (b_.size() != a_.rows()) throw Error(ErrorKind::Domain, "offset length differs from rows");
  if (loss_.kind != LossKind::LogSumExp && loss_.kind != LossKind::SqrtNorm) {
    throw Error(ErrorKind::Domain, "expected a LogSumExp or SqrtNorm loss");
  }
  if (!(loss_.mu > 0)) throw Error(ErrorKind::Domain, "mu must be > 0");
}

SmoothedNormObjective::SmoothedNormObjective(const Matrix& a, Vector b, Loss loss)
    : SmoothedNormObjective(to_sparse(a), std::move(b), loss) {}

double SmoothedNormObjective::outer_value(const Vector& y) const {
  const double mu = loss_.mu;
  if (loss_.kind == LossKind::SqrtNorm) return std::sqrt(y.squaredNorm() + mu * mu) - mu;
  const double top = y.maxCoeff();
  const double s = ((y.array() - top) / mu).exp().sum();
  return top + mu * std::log(s) - mu * std::log(static_cast<double>(y.size()));
}

Vector SmoothedNormObjective::outer_gradient(const Vector& y) const {
  const double mu = loss_.mu;
  if (loss_.kind == LossKind::SqrtNorm) return y / std::sqrt(y.squaredNorm() + mu * mu);
  const double top = y.maxCoeff();
  Vector e = ((y.array() - top) / mu).exp().matrix();
  return e / e.sum();
}

double SmoothedNormObjective::value(const Vector& x) const { return outer_value(a_ * x - b_); }

Vector SmoothedNormObjective::gradient(const Vector& x) const {
  return a_.transpose() * outer_gradient(a_ * x - b_);
}

std::unique_ptr<GradientState> SmoothedNormObjective::make_state(const Vector& x0) const {
  if (x0.size() != a_.cols()) throw Error(ErrorKind::Domain, "start point has wrong length");
  return std::make_unique<SmoothedNormState>(*this, x0);
}

DenseSymmetric SmoothedNormObjective::curvature_dense() const {
  return weighted_gram_dense(a_, Vector::Constant(a_.rows(), 1.0 / loss_.mu));
}

CsrSymmetricUpper SmoothedNormObjective::curvature_sparse() const {
  return weighted_gram_sparse(a_, Vector::Constant(a_.rows(), 1.0 / loss_.mu));
}

// ---------------------------------------------------------- regularized

namespace {

class RegularizedState final : public GradientState {
 public:
  RegularizedState(std::unique_ptr<GradientState> inner, double gamma)
      : inner_(std::move(inner)), gamma_(gamma) {
    refresh();
  }

  const Vector& x() const override { return inner_->x(); }
  double value() const override { return inner_->value() + 0.5 * gamma_ * sq_; }

  Vector partial_gradient(const IndexSet& s) const override {
    Vector g = inner_->partial_gradient(s);
    for (int k = 0; k < s.size(); ++k) g(k) += gamma_ * x()(s[k]);
    return g;
  }

  void apply_step(const IndexSet& s, const Vector& h) override {
    double before = 0;
    for (int j : s) before += x()(j) * x()(j);
    inner_->apply_step(s, h);
    double after = 0;
    for (int j : s) after += x()(j) * x()(j);
    sq_ += after - before;
    updates_ += s.size();
    if (updates_ >= kRefreshInterval) refresh();
  }

  void refresh() override {
    inner_->refresh();
    sq_ = x().squaredNorm();
    updates_ = 0;
  }

  double drift() const override {
    return std::max(inner_->drift(), std::abs(sq_ - x().squaredNorm()) / std::max(1.0, sq_));
  }

 private:
  std::unique_ptr<GradientState> inner_;
  double gamma_;
  double sq_ = 0;
  std::int64_t updates_ = 0;
};

}  // namespace

RegularizedObjective::RegularizedObjective(std::shared_ptr<const Objective> inner, double gamma)
    : inner_(std::move(inner)), gamma_(gamma) {
  if (!inner_) throw Error(ErrorKind::Domain, "null inner objective");
  if (!(gamma_ > 0)) throw Error(ErrorKind::Domain, "ridge weight must be > 0");
}

double RegularizedObjective::value(const Vector& x) const {
  return inner_->value(x) + 0.5 * gamma_ * x.squaredNorm();
}

Vector RegularizedObjective::gradient(const Vector& x) const {
  return inner_->gradient(x) + gamma_ * x;
}

std::unique_ptr<GradientState> RegularizedObjective::make_state(const Vector& x0) const {
  return std::make_unique<RegularizedState>(inner_->make_state(x0), gamma_);
}

std::optional<Matrix> RegularizedObjective::hessian(const Vector& x) const {
  auto h = inner_->hessian(x);
  if (h) h->diagonal().array() += gamma_;
  return h;
}

DenseSymmetric RegularizedObjective::curvature_dense() const {
  Matrix b = inner_->curvature_dense().matrix();
  b.diagonal().array() += gamma_;
  return DenseSymmetric(std::move(b));
}

CsrSymmetricUpper RegularizedObjective::curvature_sparse() const {
  auto t = inner_->curvature_sparse().to_triplets();
  const int n = dimension();
  for (int i = 0; i < n; ++i) t.push_back({i, i, gamma_});
  return CsrSymmetricUpper::from_triplets(n, t);
}

}  // namespace rcdvs
