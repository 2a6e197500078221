#include "rcdvs/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rcdvs/error.hpp"

namespace rcdvs {

// ------------------------------------------------------------------ RngStream

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RngStream RngStream::split(std::uint64_t key) const { return RngStream(mix_seed(seed_, key)); }

double RngStream::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

// ------------------------------------------------------------ CumulativeTable

CumulativeTable::CumulativeTable(std::span<const double> weights) {
  if (weights.empty()) throw Error(ErrorKind::EmptySupport, "no outcomes");
  cumulative_.resize(weights.size());
  double acc = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!(weights[k] >= 0) || !std::isfinite(weights[k])) {
      throw Error(ErrorKind::Domain, "weights must be finite and nonnegative");
    }
    acc += weights[k];
    cumulative_[k] = acc;
  }
  if (!(acc > 0)) throw Error(ErrorKind::EmptySupport, "all weights are zero");
  total_ = acc;
  // Dividing the running sum by its own final value makes every entry after
  // the last positive weight exactly 1.
  for (auto& c : cumulative_) c /= acc;
}

double CumulativeTable::probability(std::size_t k) const {
  return k == 0 ? cumulative_[0] : cumulative_[k] - cumulative_[k - 1];
}

std::size_t CumulativeTable::sample(double u) const {
  const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) return cumulative_.size() - 1;
  return static_cast<std::size_t>(it - cumulative_.begin());
}

// ----------------------------------------------------------------- helpers

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    const std::uint64_t num = static_cast<std::uint64_t>(n - k + i);
    if (r > std::numeric_limits<std::uint64_t>::max() / num) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    r = r * num / static_cast<std::uint64_t>(i);
  }
  return r;
}

namespace {

double clamped_minor2(double a, double c, double b) {
  const double dmax = std::max(a, c);
  if (!(dmax > 0)) return 0.0;
  const double det = a * c - b * b;
  return det < kSingularRelTol * dmax * dmax ? 0.0 : det;
}

void check_tau(int n, int tau) {
  if (tau < 1 || tau > n) {
    throw Error(ErrorKind::Domain, "subset size " + std::to_string(tau) +
                                       " outside [1, " + std::to_string(n) + "]");
  }
  if (binomial(n, tau) > VolumeSampler::kMaxOutcomes) {
    throw Error(ErrorKind::CombinatorialBlowup,
                "C(" + std::to_string(n) + "," + std::to_string(tau) + ") exceeds 1e8 subsets");
  }
}

}  // namespace

// ------------------------------------------------------------ VolumeSampler

template <class MinorFn>
std::pair<std::vector<int>, CumulativeTable> VolumeSampler::enumerate(int n, int tau,
                                                                      MinorFn&& minor) {
  check_tau(n, tau);
  const auto count = binomial(n, tau);
  std::vector<int> subsets;
  subsets.reserve(count * tau);
  std::vector<double> weights;
  weights.reserve(count);
  for_each_subset(n, tau, [&](const std::vector<int>& s) {
    subsets.insert(subsets.end(), s.begin(), s.end());
    weights.push_back(minor(s));
  });
  try {
    return {std::move(subsets), CumulativeTable(weights)};
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::EmptySupport) {
      throw Error(ErrorKind::EmptySupport,
                  "every " + std::to_string(tau) + "x" + std::to_string(tau) +
                      " principal minor vanishes (subset size exceeds rank)");
    }
    throw;
  }
}

VolumeSampler::VolumeSampler(const DenseSymmetric& b, int tau)
    : n_(b.n()), tau_(tau), table_(std::vector<double>{1.0}) {
  const Matrix& m = b.matrix();
  Matrix sub(tau, tau);
  auto result = enumerate(n_, tau, [&](const std::vector<int>& s) -> double {
    if (tau == 1) return std::max(0.0, m(s[0], s[0]));
    if (tau == 2) return clamped_minor2(m(s[0], s[0]), m(s[1], s[1]), m(s[0], s[1]));
    for (int a = 0; a < tau; ++a) {
      for (int c = 0; c < tau; ++c) sub(a, c) = m(s[a], s[c]);
    }
    return psd_determinant(DenseSymmetric(sub, 0.0));
  });
  subsets_ = std::move(result.first);
  table_ = std::move(result.second);
}

VolumeSampler::VolumeSampler(const CsrSymmetricUpper& b, int tau)
    : n_(b.n()), tau_(tau), table_(std::vector<double>{1.0}) {
  Matrix sub(tau, tau);
  auto result = enumerate(n_, tau, [&](const std::vector<int>& s) -> double {
    if (tau == 1) return b.diagonal(s[0]);
    if (tau == 2) return clamped_minor2(b.diagonal(s[0]), b.diagonal(s[1]), b.entry(s[0], s[1]));
    for (int a = 0; a < tau; ++a) {
      sub(a, a) = b.diagonal(s[a]);
      for (int c = a + 1; c < tau; ++c) sub(a, c) = sub(c, a) = b.entry(s[a], s[c]);
    }
    return psd_determinant(DenseSymmetric(sub, 0.0));
  });
  subsets_ = std::move(result.first);
  table_ = std::move(result.second);
}

IndexSet VolumeSampler::subset(std::size_t k) const {
  const auto first = subsets_.begin() + static_cast<std::ptrdiff_t>(k * tau_);
  return IndexSet(std::vector<int>(first, first + tau_));
}

// --------------------------------------------------------- SparseTwoSampler

namespace {

constexpr int kGuideStride = 32;

// Smallest x in [lo, hi] with pred(x), else hi; pred is monotone. guide(m)
// must equal pred(m * kGuideStride + off) and keeps the first probes in a
// small cache-resident array.
template <class Pred, class Guide>
int guided_first_true(int lo, int hi, int off, Pred&& pred, Guide&& guide) {
  const int mlo = (lo - off + kGuideStride - 1) / kGuideStride;
  const int mhi = (hi - off) / kGuideStride;
  if (mlo <= mhi) {
    int a = mlo, b = mhi + 1;
    while (a < b) {
      const int mid = a + (b - a) / 2;
      if (guide(mid)) b = mid; else a = mid + 1;
    }
    if (a <= mhi) hi = a * kGuideStride + off;
    if (a > mlo) lo = (a - 1) * kGuideStride + off + 1;
  }
  while (lo < hi) {
    const int mid = lo + (hi - lo) / 2;
    if (pred(mid)) hi = mid; else lo = mid + 1;
  }
  return lo;
}

}  // namespace

SparseTwoSampler::SparseTwoSampler(std::shared_ptr<const CsrSymmetricUpper> b) : b_(std::move(b)) {
  if (!b_) throw Error(ErrorKind::Domain, "null matrix");
  const int n = b_->n();
  if (n < 2) throw Error(ErrorKind::EmptySupport, "two-element sampling needs n >= 2");
  const auto& vals = b_->values();

  h_.resize(static_cast<std::size_t>(b_->row_begin(n - 1)));
  for (int i = 0; i + 1 < n; ++i) {
    double acc = 0;
    for (auto k = b_->row_begin(i); k < b_->row_begin(i + 1); ++k) {
      acc += vals[k] * vals[k];
      h_[k] = acc;
    }
  }

  t_.assign(n + 1, 0.0);
  for (int i = n - 1; i >= 0; --i) t_[i] = t_[i + 1] + b_->diagonal(i);

  q_.resize(n - 1);
  double acc = 0;
  for (int i = 0; i + 1 < n; ++i) {
    // Roundoff can push an exactly-zero row mass slightly negative.
    acc += std::max(0.0, row_mass(i));
    q_[i] = acc;
  }
  if (!(acc > 0)) {
    throw Error(ErrorKind::EmptySupport, "all 2x2 principal minors vanish (rank < 2)");
  }

  for (std::size_t k = 0; k < q_.size(); k += kGuideStride) q_guide_.push_back(q_[k]);
  for (std::size_t k = 0; k < t_.size(); k += kGuideStride) t_guide_.push_back(t_[k]);
}

std::span<const double> SparseTwoSampler::h_row(int i) const {
  return {h_.data() + b_->row_begin(i), static_cast<std::size_t>(b_->row_size(i))};
}

double SparseTwoSampler::partial_mass(int i, int j, int k) const {
  const auto b = b_->row_begin(i);
  return b_->values()[b] * (t_[i] - t_[j + 1]) - h_[b + k];
}

double SparseTwoSampler::row_mass(int i) const {
  const int r = b_->row_size(i);
  return r == 0 ? 0.0 : partial_mass(i, b_->n() - 1, r - 1);
}

IndexSet SparseTwoSampler::sample(double u1, double u2) const {
  const int n = b_->n();
  const double total = q_.back();

  // i0 = min { i : u1 <= q_i / q_{n-1} }
  const int i0 = guided_first_true(
      0, n - 2, 0, [&](int i) { return u1 <= q_[i] / total; },
      [&](int m) { return u1 <= q_guide_[m] / total; });

  const auto cols = b_->row_indices(i0);
  const int r = static_cast<int>(cols.size());
  if (r == 0) throw Error(ErrorKind::InvariantViolation, "selected an empty row");
  const double row_total = row_mass(i0);
  // First column of stored entry k, with the k = r sentinel at n.
  auto col_start = [&](int k) { return k < r ? cols[k] : n; };

  // k_l = min { k : u2 <= P(i0, J(k+1) - 1, k) / P(i0, n, r) }
  int lo = 0, hi = r - 1;
  while (lo < hi) {
    const int mid = lo + (hi - lo) / 2;
    if (u2 <= partial_mass(i0, col_start(mid + 1) - 1, mid) / row_total) hi = mid; else lo = mid + 1;
  }
  const int kl = lo;

  // j0 = min { J(kl) <= j <= J(kl+1) - 1 : u2 <= P(i0, j, kl) / P(i0, n, r) }.
  // The lower end is raised past i0, whose own mass is zero in exact arithmetic.
  const auto row = b_->row_begin(i0);
  const double v1 = b_->values()[row];
  const double ti = t_[i0];
  const double hk = h_[row + kl];
  lo = guided_first_true(
      std::max(col_start(kl), i0 + 1), col_start(kl + 1) - 1, -1,
      [&](int j) { return u2 <= partial_mass(i0, j, kl) / row_total; },
      [&](int m) { return u2 <= (v1 * (ti - t_guide_[m]) - hk) / row_total; });
  return IndexSet{i0, lo};
}

IndexSet SparseTwoSampler::draw(RngStream& rng) const {
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  return sample(u1, u2);
}

// ------------------------------------------------------------ TauNiceSampler

TauNiceSampler::TauNiceSampler(int n, int tau) : n_(n), tau_(tau) {
  if (tau < 1 || tau > n) throw Error(ErrorKind::Domain, "subset size outside [1, n]");
}

IndexSet TauNiceSampler::draw(RngStream& rng) const { return tau_nice_sample(n_, tau_, rng); }

IndexSet tau_nice_sample(int n, int tau, RngStream& rng) {
  if (tau < 1 || tau > n) throw Error(ErrorKind::Domain, "subset size outside [1, n]");
  // Floyd's algorithm: tau draws, uniform over all C(n, tau) subsets.
  std::vector<int> s;
  s.reserve(tau);
  for (int j = n - tau; j < n; ++j) {
    const int t = static_cast<int>(rng.below(static_cast<std::uint64_t>(j) + 1));
    s.push_back(std::find(s.begin(), s.end(), t) == s.end() ? t : j);
  }
  std::sort(s.begin(), s.end());
  return IndexSet(std::move(s));
}

// -------------------------------------------------------------- oracles

std::vector<std::pair<IndexSet, double>> exact_probabilities(const DenseSymmetric& b, int tau) {
  const int n = b.n();
  if (tau < 1 || tau > n) throw Error(ErrorKind::Domain, "subset size outside [1, n]");
  if (binomial(n, tau) > 10'000'000) {
    throw Error(ErrorKind::CombinatorialBlowup, "too many subsets to enumerate");
  }
  std::vector<std::pair<IndexSet, double>> out;
  double total = 0;
  for_each_subset(n, tau, [&](const std::vector<int>& s) {
    IndexSet set(s);
    const double d = std::max(0.0, determinant(principal_submatrix(b, set)));
    total += d;
    out.emplace_back(std::move(set), d);
  });
  if (!(total > 0)) throw Error(ErrorKind::EmptySupport, "all principal minors vanish");
  for (auto& [s, p] : out) p /= total;
  return out;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw Error(ErrorKind::Domain, "distribution sizes differ");
  double acc = 0;
  for (std::size_t k = 0; k < p.size(); ++k) acc += std::abs(p[k] - q[k]);
  return 0.5 * acc;
}

}  // namespace rcdvs
