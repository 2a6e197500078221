#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rcdvs/objectives.hpp"
#include "rcdvs/rng.hpp"
#include "rcdvs/solvers.hpp"

namespace rcdvs {

enum class ProblemKind { Quadratic, Huber, Logistic };

std::string to_string(ProblemKind k);
ProblemKind parse_problem_kind(const std::string& name);

struct ProblemSpec {
  ProblemKind kind = ProblemKind::Quadratic;
  int n = 400;
  /// Rows of the data matrix (huber); 0 means m = n.
  int m = 0;
  double lambda1 = 400;
  double lambda2 = 100;
  double mu = 0.01;
  double gamma = 1;
  /// Nonzeros per reflection direction (sparse huber).
  std::optional<int> sparsity;
  /// Number of random reflections; 0 keeps the diagonal seed matrix.
  int reflections = 10;
  std::uint64_t seed = 0;
  /// LIBSVM file for logistic problems.
  std::string dataset;

  int rows() const { return m > 0 ? m : n; }
  /// Throws Config on violated invariants.
  void validate() const;
};

/// A generated or loaded instance with everything the runner needs.
struct Problem {
  std::shared_ptr<const Objective> objective;
  CurvatureMatrix curvature = DenseSymmetric::identity(1);
  /// Known minimizer, empty when only f* is known.
  Vector x_star;
  double f_star = 0;
  /// Eigenvalues of B, descending.
  Vector spectrum;
};

/// A = Q Diag(lambda1, lambda2, 1, ..., 1) Q^T, Q a product of random
/// reflections; b = A x* with x* uniform on [-1, 1]^n.
Problem gen_quadratic(const ProblemSpec& spec);

/// Huber regression sum_i H_mu(<a_i, x> - b_i) with B = (1/mu) A^T A whose
/// nonzero spectrum is (lambda1, lambda2, 1, ..., 1); b = A x*, so f* = 0.
/// With a sparsity p, reflection directions carry p nonzeros and B is sparse.
Problem gen_huber(const ProblemSpec& spec);

/// G G^T for an n x rank standard-normal G.
DenseSymmetric random_psd(int n, int rank, RngStream& rng);

/// Symmetric diagonally dominant (hence PSD) matrix with about `nnz_upper`
/// upper-triangle entries at uniformly random positions.
CsrSymmetricUpper random_sparse_psd(int n, std::int64_t nnz_upper, RngStream& rng);

struct LibsvmData {
  SparseColMatrix a;  // m x n
  Vector labels;      // in {-1, +1}
};

/// "label idx:val ..." lines with 1-based feature indices. Two distinct
/// labels map to -1 (smaller) and +1 (larger); a single label keeps its sign.
LibsvmData parse_libsvm(std::istream& in);
LibsvmData load_libsvm(const std::filesystem::path& path);

/// Ridge-regularized logistic regression on the data.
std::shared_ptr<const Objective> logistic_objective(const LibsvmData& data, double gamma);

struct ReferenceOptions {
  double gradient_tol = 1e-10;
  int max_iterations = 100'000;
};

/// Minimum value of a strongly convex or quadratic objective. Quadratics are
/// solved in closed form; otherwise x <- x - B^{-1} grad f(x) is iterated,
/// taking damped Newton steps instead whenever the objective exposes its
/// Hessian and the Newton point is lower. Throws Numeric on budget exhaustion.
double reference_min(const Objective& obj, const ReferenceOptions& options = {});

/// reference_min cached in `cache_dir` under a hash of the dataset bytes
/// and gamma.
double cached_reference_min(const Objective& obj, const std::filesystem::path& dataset,
                            double gamma, const std::filesystem::path& cache_dir);

/// Loads (logistic) or generates (quadratic, huber) the instance for a spec.
Problem make_problem(const ProblemSpec& spec, const std::filesystem::path& cache_dir = {});

struct MethodSpec {
  Method method = Method::RCDVS;
  int tau = 2;

  auto operator<=>(const MethodSpec&) const = default;
};

std::string to_string(const MethodSpec& m);
/// "RCDVS:2", "SDNA:3", "RCD" (tau 1).
MethodSpec parse_method_spec(const std::string& text);

struct ExperimentConfig {
  ProblemSpec problem;
  std::vector<MethodSpec> methods{{Method::RCDVS, 2}};
  double epsilon = 0.01;
  int repetitions = 10;
  /// Budget in single-coordinate updates; a tau-method gets cap / tau steps.
  std::int64_t max_updates = 100'000'000;
  std::uint64_t seed = 0;
  int threads = 1;
  /// Wall-clock columns; off makes the table a pure function of the config.
  bool timing = true;
  /// Sidecar location for cached logistic optima; empty disables caching.
  std::filesystem::path cache_dir;

  void validate() const;
};

struct RepetitionRecord {
  int repetition = 0;
  MethodSpec method;
  std::int64_t iterations = 0;
  double seconds = 0;
  bool capped = false;
  /// It_RCD / It_method for this repetition, when both finished.
  std::optional<double> acc;

  bool operator==(const RepetitionRecord&) const = default;
};

struct ResultRow {
  MethodSpec method;
  std::optional<double> median_iterations;
  std::optional<double> median_seconds;
  std::optional<double> acc;
  /// 100 Acc / R(1, tau) for volume-sampling rows.
  std::optional<double> percent;
  /// R(1, tau) for volume-sampling rows.
  std::optional<double> theory_acc;
  int completed = 0;
  int capped = 0;

  bool operator==(const ResultRow&) const = default;
};

struct ResultTable {
  std::string title;
  std::vector<ResultRow> rows;
  std::vector<RepetitionRecord> records;
  std::vector<std::string> warnings;

  bool operator==(const ResultTable&) const = default;
};

/// Runs every method on `repetitions` fresh instances. RCD always runs and
/// is listed first.
ResultTable run_experiment(const ExperimentConfig& config);

enum class TableFormat { Csv, Json, Markdown };

TableFormat parse_table_format(const std::string& name);

std::string emit_table(const ResultTable& table, TableFormat format);
/// Inverse of the JSON emitter.
ResultTable table_from_json(const std::string& text);

/// CSV or aligned markdown for a string grid; absent cells hold "-" and
/// are left empty in CSV. The markdown title, if any, precedes the table.
std::string render_grid(const std::vector<std::string>& header,
                        const std::vector<std::vector<std::string>>& rows, TableFormat format,
                        const std::string& title = {});

/// Number rendered with 6 significant digits, "-" when absent.
std::string format_number(std::optional<double> v);

}  // namespace rcdvs
