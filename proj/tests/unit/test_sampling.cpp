#include <doctest.h>

#include <map>
#include <random>

#include "oracles.hpp"
#include "rcdvs/error.hpp"
#include "rcdvs/sampling.hpp"

using namespace rcdvs;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(v.size());
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Matrix tridiag() {
  Matrix m(3, 3);
  m << 2, 1, 0, 1, 2, 1, 0, 1, 2;
  return m;
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

// Empirical subset frequencies in lexicographic order of `tau`-subsets of [n].
std::vector<double> frequencies(const SubsetSampler& s, int draws, std::uint64_t seed) {
  const int n = s.dimension(), tau = s.subset_size();
  std::map<std::vector<int>, std::size_t> slot;
  const auto all = oracle::subsets(n, tau);
  for (std::size_t k = 0; k < all.size(); ++k) slot[all[k]] = k;
  std::vector<double> f(all.size(), 0.0);
  RngStream rng(seed);
  for (int d = 0; d < draws; ++d) {
    const IndexSet set = s.draw(rng);
    f[slot.at(std::vector<int>(set.begin(), set.end()))] += 1.0 / draws;
  }
  return f;
}

}  // namespace

TEST_CASE("RngStream uniforms are open-interval and reproducible") {
  RngStream a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 10000; ++i) {
    const double u = a.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    CHECK(u == b.uniform());
    differs |= u != c.uniform();
  }
  CHECK(differs);
  RngStream s1 = RngStream(7).split(3), s2 = RngStream(7).split(3), s3 = RngStream(7).split(4);
  const double x = s1.uniform();
  CHECK(x == s2.uniform());
  CHECK(x != s3.uniform());
  for (int i = 0; i < 1000; ++i) CHECK(a.below(5) < 5);
}

TEST_CASE("cumulative table construction") {
  const std::vector<double> w{2, 3, 5};
  const CumulativeTable t(w);
  CHECK(t.cumulative()[0] == doctest::Approx(0.2));
  CHECK(t.cumulative()[1] == doctest::Approx(0.5));
  CHECK(t.cumulative()[2] == 1.0);

  const std::vector<double> z{0, 1, 0};
  const CumulativeTable tz(z);
  CHECK(tz.cumulative()[0] == 0.0);
  CHECK(tz.cumulative()[1] == 1.0);
  CHECK(tz.cumulative()[2] == 1.0);

  const std::vector<double> ones(8, 1.0);
  const CumulativeTable tu(ones);
  for (int k = 0; k < 8; ++k) CHECK(tu.cumulative()[k] == doctest::Approx((k + 1) / 8.0));

  const std::vector<double> zeros(3, 0.0), neg{1, -1};
  CHECK(kind_of([&] { CumulativeTable{zeros}; }) == ErrorKind::EmptySupport);
  CHECK(kind_of([&] { CumulativeTable{neg}; }) == ErrorKind::Domain);
}

TEST_CASE("cumulative sampling takes the smallest index with u <= P_k") {
  const std::vector<double> w{2, 3, 5};
  const CumulativeTable t(w);
  CHECK(t.sample(0.25) == 1);
  CHECK(t.sample(t.cumulative()[0]) == 0);
  CHECK(t.sample(0.999) == 2);
  const std::vector<double> z{0, 1, 0};
  const CumulativeTable tz(z);
  for (double u : {1e-12, 0.3, 0.999999}) CHECK(tz.sample(u) == 1);
}

TEST_CASE("volume sampler probabilities") {
  const auto d = DenseSymmetric::diagonal(vec({1, 2, 3}));
  const VolumeSampler v1(d, 1);
  CHECK(v1.probability(0) == doctest::Approx(1.0 / 6));
  CHECK(v1.probability(1) == doctest::Approx(2.0 / 6));
  CHECK(v1.probability(2) == doctest::Approx(3.0 / 6));

  const VolumeSampler v2(d, 2);
  REQUIRE(v2.outcomes() == 3);
  CHECK(v2.subset(0) == IndexSet{0, 1});
  CHECK(v2.subset(2) == IndexSet{1, 2});
  CHECK(v2.probability(0) == doctest::Approx(2.0 / 11));
  CHECK(v2.probability(1) == doctest::Approx(3.0 / 11));
  CHECK(v2.probability(2) == doctest::Approx(6.0 / 11));
  CHECK(v2.sample(0.1) == IndexSet{0, 1});
  CHECK(v2.sample(0.99) == IndexSet{1, 2});

  const VolumeSampler vt(DenseSymmetric(tridiag()), 2);
  CHECK(vt.probability(0) == doctest::Approx(0.3));
  CHECK(vt.probability(1) == doctest::Approx(0.4));
  CHECK(vt.probability(2) == doctest::Approx(0.3));
  CHECK(vt.total_mass() == doctest::Approx(10));

  // The same probabilities from the CSR path.
  const VolumeSampler vc(CsrSymmetricUpper::from_dense(DenseSymmetric(tridiag())), 2);
  for (std::size_t k = 0; k < 3; ++k) CHECK(vc.probability(k) == doctest::Approx(vt.probability(k)));
}

TEST_CASE("volume sampler errors") {
  std::mt19937_64 g(1);
  const DenseSymmetric rank2(oracle::random_psd(5, 2, g), 1e-8);
  CHECK(kind_of([&] { VolumeSampler(rank2, 3); }) == ErrorKind::EmptySupport);
  CHECK(kind_of([] { VolumeSampler(DenseSymmetric::identity(3), 4); }) == ErrorKind::Domain);
  CHECK(kind_of([] { VolumeSampler(DenseSymmetric::identity(200), 10); }) ==
        ErrorKind::CombinatorialBlowup);
}

TEST_CASE("volume sampler matches the definition (statistical)") {
  const auto f = frequencies(VolumeSampler(DenseSymmetric::diagonal(vec({1, 2, 3})), 2), 100000, 9);
  CHECK(oracle::total_variation(f, {2.0 / 11, 3.0 / 11, 6.0 / 11}) <= 0.02);

  std::mt19937_64 g(21);
  for (int trial = 0; trial < 3; ++trial) {
    const Matrix b = oracle::random_psd(5, 5, g);
    for (int tau = 1; tau <= 3; ++tau) {
      const auto emp = frequencies(VolumeSampler(DenseSymmetric(b, 1e-8), tau), 100000, trial);
      CHECK(oracle::total_variation(emp, oracle::volume_probabilities(b, tau)) <= 0.02);
    }
  }
}

TEST_CASE("exact_probabilities agrees with the oracle") {
  std::mt19937_64 g(8);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + trial % 4;
    const Matrix b = oracle::random_psd(n, n - trial % 2, g);
    for (int tau = 1; tau <= n - 1; ++tau) {
      const auto exact = exact_probabilities(DenseSymmetric(b, 1e-8), tau);
      const auto ref = oracle::volume_probabilities(b, tau);
      REQUIRE(exact.size() == ref.size());
      for (std::size_t k = 0; k < ref.size(); ++k) CHECK(std::abs(exact[k].second - ref[k]) < 1e-9);
    }
  }
}

TEST_CASE("sparse two-element preprocessing examples") {
  const SparseTwoSampler s(
      std::make_shared<const CsrSymmetricUpper>(CsrSymmetricUpper::from_dense(DenseSymmetric(tridiag()))));
  CHECK(std::vector<double>(s.h_row(0).begin(), s.h_row(0).end()) == std::vector<double>{4, 5});
  CHECK(std::vector<double>(s.h_row(1).begin(), s.h_row(1).end()) == std::vector<double>{4, 5});
  CHECK(std::vector<double>(s.t().begin(), s.t().end()) == std::vector<double>{6, 4, 2, 0});
  CHECK(std::vector<double>(s.q().begin(), s.q().end()) == std::vector<double>{7, 10});

  const SparseTwoSampler d(std::make_shared<const CsrSymmetricUpper>(
      CsrSymmetricUpper::from_dense(DenseSymmetric::identity(2))));
  CHECK(std::vector<double>(d.h_row(0).begin(), d.h_row(0).end()) == std::vector<double>{1});
  CHECK(std::vector<double>(d.t().begin(), d.t().end()) == std::vector<double>{2, 1, 0});
  CHECK(std::vector<double>(d.q().begin(), d.q().end()) == std::vector<double>{1});

  // A zero row contributes no mass.
  const SparseTwoSampler z(std::make_shared<const CsrSymmetricUpper>(
      CsrSymmetricUpper(3, {0, 1, 1, 2}, {0, 2}, {1.0, 1.0})));
  CHECK(z.row_mass(1) == 0);
  CHECK(z.row_mass(0) == 1);
  CHECK(z.total_mass() == 1);
}

TEST_CASE("sparse two-element sampling traces") {
  const SparseTwoSampler s(
      std::make_shared<const CsrSymmetricUpper>(CsrSymmetricUpper::from_dense(DenseSymmetric(tridiag()))));
  CHECK(s.sample(0.65, 0.5) == IndexSet{0, 2});
  for (double u2 : {1e-9, 0.3, 0.5, 0.999999}) CHECK(s.sample(0.75, u2) == IndexSet{1, 2});
  const auto f = frequencies(s, 100000, 4);
  CHECK(oracle::total_variation(f, {0.3, 0.4, 0.3}) <= 0.02);
}

TEST_CASE("sparse two-element sampler errors") {
  CHECK(kind_of([] {
          SparseTwoSampler(std::make_shared<const CsrSymmetricUpper>(
              CsrSymmetricUpper::from_dense(DenseSymmetric::identity(1))));
        }) == ErrorKind::EmptySupport);
  Matrix r1(2, 2);
  r1 << 1, 1, 1, 1;
  CHECK(kind_of([&] {
          SparseTwoSampler(std::make_shared<const CsrSymmetricUpper>(
              CsrSymmetricUpper::from_dense(DenseSymmetric(r1))));
        }) == ErrorKind::EmptySupport);
}

TEST_CASE("sparse normalization equals the sum of 2x2 minors and sigma_2") {
  std::mt19937_64 g(12);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + trial % 6;
    Matrix b = oracle::random_psd(n, std::max(2, n - trial % 3), g);
    // Sparsify by zeroing a few symmetric pairs of a diagonally dominant matrix.
    if (trial % 2) {
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
          if ((i + j + trial) % 3 == 0) b(i, j) = b(j, i) = 0;
      b.diagonal().array() += b.cwiseAbs().rowwise().sum().array();
    }
    const DenseSymmetric d(b, 1e-8);
    const SparseTwoSampler s(std::make_shared<const CsrSymmetricUpper>(CsrSymmetricUpper::from_dense(d)));
    double minors = 0;
    for (const auto& sub : oracle::subsets(n, 2)) minors += static_cast<double>(oracle::det(oracle::sub(b, sub)));
    CHECK(oracle::rel_err(s.total_mass(), minors) <= 1e-8);
    CHECK(oracle::rel_err(s.total_mass(), oracle::elementary_symmetric(oracle::eigenvalues(b), 2)) <= 1e-8);
    for (int i = 1; i < n - 1; ++i) CHECK(s.q()[i] >= s.q()[i - 1]);

    const auto emp = frequencies(s, 20000, trial);
    CHECK(oracle::total_variation(emp, oracle::volume_probabilities(b, 2)) <= 0.03);
  }
}

TEST_CASE("volume samplers never select a degenerate submatrix") {
  std::mt19937_64 g(31);
  // Rank 3 in dimension 6 with a duplicated column pair: many singular 2x2 and 3x3 minors.
  Matrix x = Matrix::Zero(6, 3);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 3; ++j) x(i, j) = nd(g);
  x.row(1) = x.row(0);
  x.row(4) = 2 * x.row(3);
  const DenseSymmetric b(x * x.transpose(), 1e-8);
  RngStream rng(5);
  for (int tau = 1; tau <= 3; ++tau) {
    const VolumeSampler v(b, tau);
    for (int d = 0; d < 10000; ++d) {
      const IndexSet s = v.draw(rng);
      CHECK_NOTHROW(spd_solve(principal_submatrix(b, s), Vector::Ones(tau)));
    }
  }
  const SparseTwoSampler s(std::make_shared<const CsrSymmetricUpper>(CsrSymmetricUpper::from_dense(b)));
  for (int d = 0; d < 10000; ++d) {
    const IndexSet set = s.draw(rng);
    CHECK(set[0] < set[1]);
    CHECK_NOTHROW(spd_solve(principal_submatrix(b, set), Vector::Ones(2)));
  }
}

TEST_CASE("sampling is deterministic per seed") {
  std::mt19937_64 g(4);
  const DenseSymmetric b(oracle::random_psd(6, 6, g), 1e-8);
  const VolumeSampler v(b, 3);
  const SparseTwoSampler s(std::make_shared<const CsrSymmetricUpper>(CsrSymmetricUpper::from_dense(b)));
  RngStream r1(77), r2(77);
  for (int d = 0; d < 1000; ++d) {
    CHECK(v.draw(r1) == v.draw(r2));
    CHECK(s.draw(r1) == s.draw(r2));
  }
}

TEST_CASE("tau-nice sampling is uniform") {
  const auto f = frequencies(TauNiceSampler(3, 2), 100000, 1);
  CHECK(oracle::total_variation(f, {1.0 / 3, 1.0 / 3, 1.0 / 3}) <= 0.02);
  RngStream rng(3);
  for (int d = 0; d < 100; ++d) CHECK(tau_nice_sample(5, 5, rng) == IndexSet::full(5));
  const auto f1 = frequencies(TauNiceSampler(4, 1), 100000, 2);
  CHECK(oracle::total_variation(f1, std::vector<double>(4, 0.25)) <= 0.02);
  const auto f3 = frequencies(TauNiceSampler(6, 3), 100000, 3);
  CHECK(oracle::total_variation(f3, std::vector<double>(20, 0.05)) <= 0.02);
  CHECK(kind_of([] { TauNiceSampler(3, 4); }) == ErrorKind::Domain);
}

TEST_CASE("binomial and total variation helpers") {
  CHECK(binomial(5, 2) == 10);
  CHECK(binomial(5, 0) == 1);
  CHECK(binomial(5, 6) == 0);
  CHECK(binomial(400, 2) == 79800);
  CHECK(binomial(1000, 500) == std::numeric_limits<std::uint64_t>::max());
  const std::vector<double> p{0.5, 0.5}, q{1, 0};
  CHECK(total_variation(p, q) == doctest::Approx(0.5));
}

TEST_CASE("sparse two-element search equals a linear scan") {
  std::mt19937_64 g(41);
  std::uniform_real_distribution<double> ud;
  const int n = 3000;
  std::vector<Triplet> t;
  std::vector<double> rowsum(n, 0.0);
  for (int k = 0; k < 4 * n; ++k) {
    const int i = static_cast<int>(g() % n), j = static_cast<int>(g() % n);
    if (i == j) continue;
    const double v = 2 * ud(g) - 1;
    t.push_back({std::min(i, j), std::max(i, j), v});
    rowsum[i] += std::abs(v);
    rowsum[j] += std::abs(v);
  }
  for (int i = 0; i < n; ++i) t.push_back({i, i, rowsum[i] + 0.5});
  const auto b = std::make_shared<const CsrSymmetricUpper>(CsrSymmetricUpper::from_triplets(n, t));
  const SparseTwoSampler s(b);
  const auto q = s.q();
  for (int trial = 0; trial < 300; ++trial) {
    const double u1 = ud(g), u2 = ud(g);
    int i0 = 0;
    while (i0 < n - 2 && !(u1 <= q[i0] / s.total_mass())) ++i0;
    const auto cols = b->row_indices(i0);
    const double row_total = s.row_mass(i0);
    int j0 = n - 1;
    int k = 0;
    for (int j = i0 + 1; j < n; ++j) {
      while (k + 1 < static_cast<int>(cols.size()) && cols[k + 1] <= j) ++k;
      if (u2 <= s.partial_mass(i0, j, k) / row_total) {
        j0 = j;
        break;
      }
    }
    CHECK(s.sample(u1, u2) == IndexSet{i0, j0});
  }
}
