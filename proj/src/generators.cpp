#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>

#include "rcdvs/bench.hpp"
#include "rcdvs/error.hpp"
#include "rcdvs/rng.hpp"
#include "rcdvs/sampling.hpp"

namespace rcdvs {

std::string to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::Quadratic: return "quadratic";
    case ProblemKind::Huber: return "huber";
    case ProblemKind::Logistic: return "logistic";
  }
  return "?";
}

ProblemKind parse_problem_kind(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "quadratic") return ProblemKind::Quadratic;
  if (s == "huber") return ProblemKind::Huber;
  if (s == "logistic") return ProblemKind::Logistic;
  throw Error(ErrorKind::Config, "unknown problem kind '" + name + "'");
}

void ProblemSpec::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::Config, msg); };
  if (kind == ProblemKind::Logistic) {
    if (dataset.empty()) fail("logistic problems need a dataset path");
    if (!(gamma > 0)) fail("gamma must be > 0");
    return;
  }
  if (n < 2) fail("n must be >= 2");
  if (m < 0) fail("m must be >= 0");
  if (kind == ProblemKind::Huber && std::min(rows(), n) < 2) fail("min(m, n) must be >= 2");
  if (!(lambda2 > 0) || !(lambda1 >= lambda2) || !std::isfinite(lambda1)) {
    fail("spectrum needs lambda1 >= lambda2 > 0");
  }
  if (kind == ProblemKind::Huber && !(mu > 0)) fail("mu must be > 0");
  if (reflections < 0) fail("reflections must be >= 0");
  if (sparsity && *sparsity < 1) fail("sparsity must be >= 1");
}

namespace {

// Seed diagonal (lambda1, lambda2, 1, ..., 1) of length k.
Vector seed_spectrum(const ProblemSpec& spec, int k) {
  Vector d = Vector::Ones(k);
  d(0) = spec.lambda1;
  d(1) = spec.lambda2;
  return d;
}

Vector descending(Vector v) {
  std::sort(v.data(), v.data() + v.size(), std::greater<>());
  return v;
}

// Unit vector, uniform on the sphere of R^dim or of a random p-subspace of
// coordinates.
Vector random_direction(int dim, std::optional<int> p, RngStream& rng) {
  Vector u = Vector::Zero(dim);
  for (;;) {
    if (p && *p < dim) {
      const IndexSet idx = tau_nice_sample(dim, *p, rng);
      for (int i : idx) u(i) = rng.normal();
    } else {
      for (int i = 0; i < dim; ++i) u(i) = rng.normal();
    }
    const double norm = u.norm();
    if (norm > 0) return u / norm;
    u.setZero();
  }
}

Vector uniform_cube(int n, RngStream& rng) {
  Vector x(n);
  for (int i = 0; i < n; ++i) x(i) = 2 * rng.uniform() - 1;
  return x;
}

SparseColMatrix sparse_vector(const Vector& u) {
  SparseColMatrix s = u.sparseView();
  s.makeCompressed();
  return s;
}

}  // namespace

Problem gen_quadratic(const ProblemSpec& spec) {
  spec.validate();
  const int n = spec.n;
  RngStream refl(mix_seed(spec.seed, 1));
  RngStream point(mix_seed(spec.seed, 2));

  const Vector lam = seed_spectrum(spec, n);
  Matrix a = lam.asDiagonal();
  for (int r = 0; r < spec.reflections; ++r) {
    // (I - 2uu^T) A (I - 2uu^T) = A - 2uw^T - 2wu^T + 4(u^T w) uu^T, w = Au
    const Vector u = random_direction(n, std::nullopt, refl);
    const Vector w = a * u;
    const double c = u.dot(w);
    a.noalias() -= 2 * u * w.transpose();
    a.noalias() -= 2 * w * u.transpose();
    a.noalias() += 4 * c * u * u.transpose();
  }
  a = (0.5 * (a + a.transpose())).eval();

  Problem p;
  p.x_star = uniform_cube(n, point);
  const Vector b = a * p.x_star;
  DenseSymmetric am(std::move(a));
  p.f_star = -0.5 * b.dot(p.x_star);
  p.objective = std::make_shared<QuadraticObjective>(am, b);
  p.curvature = std::move(am);
  p.spectrum = descending(lam);
  return p;
}

Problem gen_huber(const ProblemSpec& spec) {
  spec.validate();
  const int n = spec.n;
  const int m = spec.rows();
  const int k = std::min(m, n);
  if (spec.sparsity && *spec.sparsity > k) {
    throw Error(ErrorKind::Domain, "sparsity p = " + std::to_string(*spec.sparsity) +
                                       " exceeds min(m, n) = " + std::to_string(k));
  }
  RngStream refl(mix_seed(spec.seed, 1));
  RngStream point(mix_seed(spec.seed, 2));

  // A = D with D_ii = sqrt(mu lambda_i), so (1/mu) A^T A = Diag(lambda, 0).
  const Vector lam = seed_spectrum(spec, k);
  const Vector diag = (spec.mu * lam).cwiseSqrt();

  Problem p;
  std::shared_ptr<SeparableObjective> obj;
  Vector b;
  if (spec.sparsity) {
    std::vector<Eigen::Triplet<double>> t;
    for (int i = 0; i < k; ++i) t.emplace_back(i, i, diag(i));
    SparseColMatrix a(m, n);
    a.setFromTriplets(t.begin(), t.end());
    for (int r = 0; r < spec.reflections; ++r) {
      const SparseColMatrix u = sparse_vector(random_direction(m, spec.sparsity, refl));
      const SparseColMatrix v = sparse_vector(random_direction(n, spec.sparsity, refl));
      const SparseColMatrix ut = u.transpose();
      const SparseColMatrix uta = ut * a;
      a = a - 2.0 * SparseColMatrix(u * uta);
      const SparseColMatrix av = a * v;
      const SparseColMatrix vt = v.transpose();
      a = a - 2.0 * SparseColMatrix(av * vt);
      a.prune(0.0);
    }
    a.makeCompressed();
    p.x_star = uniform_cube(n, point);
    b = a * p.x_star;
    obj = std::make_shared<SeparableObjective>(std::move(a), b, Loss::huber(spec.mu));
    p.curvature = obj->curvature_sparse();
  } else {
    Matrix a = Matrix::Zero(m, n);
    for (int i = 0; i < k; ++i) a(i, i) = diag(i);
    for (int r = 0; r < spec.reflections; ++r) {
      const Vector u = random_direction(m, std::nullopt, refl);
      const Vector v = random_direction(n, std::nullopt, refl);
      const Eigen::RowVectorXd uta = u.transpose() * a;
      a.noalias() -= 2 * u * uta;
      const Vector av = a * v;
      a.noalias() -= 2 * av * v.transpose();
    }
    p.x_star = uniform_cube(n, point);
    b = a * p.x_star;
    obj = std::make_shared<SeparableObjective>(a, b, Loss::huber(spec.mu));
    p.curvature = obj->curvature_dense();
  }
  p.objective = obj;
  p.f_star = 0;
  Vector full = Vector::Zero(n);
  full.head(k) = lam;
  p.spectrum = descending(full);
  return p;
}

DenseSymmetric random_psd(int n, int rank, RngStream& rng) {
  if (n < 1 || rank < 0) throw Error(ErrorKind::Domain, "need n >= 1 and rank >= 0");
  Matrix g(n, rank);
  for (int j = 0; j < rank; ++j) {
    for (int i = 0; i < n; ++i) g(i, j) = rng.normal();
  }
  return DenseSymmetric(g * g.transpose(), 1e-8);
}

CsrSymmetricUpper random_sparse_psd(int n, std::int64_t nnz_upper, RngStream& rng) {
  if (n < 1) throw Error(ErrorKind::Domain, "need n >= 1");
  const std::int64_t off = std::max<std::int64_t>(0, nnz_upper - n);
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(off + n));
  Vector rowsum = Vector::Zero(n);
  if (n > 1) {
    for (std::int64_t k = 0; k < off; ++k) {
      const int i = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));
      if (j >= i) ++j;
      const double v = 2 * rng.uniform() - 1;
      t.push_back({std::min(i, j), std::max(i, j), v});
      rowsum(i) += std::abs(v);
      rowsum(j) += std::abs(v);
    }
  }
  for (int i = 0; i < n; ++i) t.push_back({i, i, rowsum(i) + 1.0});
  return CsrSymmetricUpper::from_triplets(n, t);
}

}  // namespace rcdvs
