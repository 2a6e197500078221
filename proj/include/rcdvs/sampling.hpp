#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "rcdvs/linalg.hpp"
#include "rcdvs/rng.hpp"

namespace rcdvs {

/// Cumulative probabilities P_1 <= ... <= P_N = 1 over N outcomes.
class CumulativeTable {
 public:
  /// Throws EmptySupport for an all-zero weight vector and Domain for a
  /// negative or non-finite weight.
  explicit CumulativeTable(std::span<const double> weights);

  std::size_t size() const { return cumulative_.size(); }
  std::span<const double> cumulative() const { return cumulative_; }
  double total_weight() const { return total_; }
  double probability(std::size_t k) const;

  /// Smallest k (0-based) with u <= P_k, by binary search.
  std::size_t sample(double u) const;

 private:
  std::vector<double> cumulative_;
  double total_ = 0;
};

/// Anything that draws a coordinate subset per call.
class SubsetSampler {
 public:
  virtual ~SubsetSampler() = default;
  virtual int dimension() const = 0;
  virtual int subset_size() const = 0;
  virtual IndexSet draw(RngStream& rng) const = 0;
};

/// Exact tau-element volume sampling by enumerating every principal minor in
/// lexicographic subset order.
class VolumeSampler final : public SubsetSampler {
 public:
  static constexpr std::uint64_t kMaxOutcomes = 100'000'000;

  VolumeSampler(const DenseSymmetric& b, int tau);
  VolumeSampler(const CsrSymmetricUpper& b, int tau);

  int dimension() const override { return n_; }
  int subset_size() const override { return tau_; }
  std::size_t outcomes() const { return table_.size(); }
  IndexSet subset(std::size_t k) const;
  double probability(std::size_t k) const { return table_.probability(k); }
  /// Sum of all tau x tau principal minors (after clamping).
  double total_mass() const { return table_.total_weight(); }
  const CumulativeTable& table() const { return table_; }

  IndexSet sample(double u) const { return subset(table_.sample(u)); }
  IndexSet draw(RngStream& rng) const override { return sample(rng.uniform()); }

 private:
  template <class MinorFn>
  static std::pair<std::vector<int>, CumulativeTable> enumerate(int n, int tau, MinorFn&& minor);

  int n_;
  int tau_;
  std::vector<int> subsets_;  // outcomes() * tau, flattened
  CumulativeTable table_;
};

/// Two-element volume sampling over a sparse CSR matrix with O(nnz + n)
/// preprocessing and three binary searches per sample.
class SparseTwoSampler final : public SubsetSampler {
 public:
  explicit SparseTwoSampler(std::shared_ptr<const CsrSymmetricUpper> b);

  int dimension() const override { return b_->n(); }
  int subset_size() const override { return 2; }
  const CsrSymmetricUpper& matrix() const { return *b_; }

  /// Prefix sums of squared row values, aligned with the CSR value array
  /// for rows 0..n-2.
  std::span<const double> h() const { return h_; }
  std::span<const double> h_row(int i) const;
  /// Suffix sums of the diagonal, length n + 1 with t[n] = 0.
  std::span<const double> t() const { return t_; }
  /// Cumulative row masses, length n - 1.
  std::span<const double> q() const { return q_; }

  /// v_1 (t_i - t_{j+1}) - h_k for row i, last column j (inclusive), and
  /// k-th stored entry of row i (all 0-based).
  double partial_mass(int i, int j, int k) const;
  /// Sum of all 2x2 principal minors containing i as the smaller index.
  double row_mass(int i) const;
  double total_mass() const { return q_.back(); }

  IndexSet sample(double u1, double u2) const;
  IndexSet draw(RngStream& rng) const override;

 private:
  std::shared_ptr<const CsrSymmetricUpper> b_;
  std::vector<double> h_;
  std::vector<double> t_;
  std::vector<double> q_;
  // every kGuideStride-th entry of q_ and t_
  std::vector<double> q_guide_;
  std::vector<double> t_guide_;
};

/// Uniform tau-subsets without replacement.
class TauNiceSampler final : public SubsetSampler {
 public:
  TauNiceSampler(int n, int tau);

  int dimension() const override { return n_; }
  int subset_size() const override { return tau_; }
  IndexSet draw(RngStream& rng) const override;

 private:
  int n_;
  int tau_;
};

IndexSet tau_nice_sample(int n, int tau, RngStream& rng);

std::uint64_t binomial(int n, int k);

/// Calls fn(const std::vector<int>&) for every k-subset of [0, n) in
/// lexicographic order.
template <class Fn>
void for_each_subset(int n, int k, Fn&& fn) {
  if (k < 0 || k > n) return;
  std::vector<int> c(k);
  for (int i = 0; i < k; ++i) c[i] = i;
  while (true) {
    fn(static_cast<const std::vector<int>&>(c));
    int i = k - 1;
    while (i >= 0 && c[i] == n - k + i) --i;
    if (i < 0) return;
    ++c[i];
    for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
  }
}

/// Brute-force Definition of volume sampling: every tau-subset with its
/// normalized principal minor, lexicographic order. Minors come from a
/// general LU determinant, independent of the samplers' Cholesky path.
std::vector<std::pair<IndexSet, double>> exact_probabilities(const DenseSymmetric& b, int tau);

/// Half the L1 distance between two distributions over the same outcomes.
double total_variation(std::span<const double> p, std::span<const double> q);

}  // namespace rcdvs
