#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rcdvs/objectives.hpp"
#include "rcdvs/sampling.hpp"

namespace rcdvs {

enum class Method { RCDVS, RCD, SDNA };

std::string to_string(Method m);
Method parse_method(const std::string& name);

struct SolverConfig {
  Method method = Method::RCDVS;
  int tau = 2;
  /// Empty means the origin.
  Vector x0;
  std::int64_t max_iterations = 100'000'000;
  /// Stop once f(x_k) - f* <= epsilon; requires f* at run time.
  std::optional<double> epsilon;
  std::uint64_t seed = 0;
  /// Record f every `trace_every` iterations (0 disables the trace).
  std::int64_t trace_every = 0;
  bool log_subsets = false;
  /// Replaces random sampling with this subset sequence (cycled); for tests.
  std::vector<IndexSet> forced_subsets;
};

struct TracePoint {
  std::int64_t iteration;
  double value;
};

struct SolverReport {
  Method method = Method::RCDVS;
  int tau = 0;
  std::int64_t iterations = 0;
  double initial_value = 0;
  double final_value = 0;
  bool reached_target = false;
  /// True when the iteration cap ended an epsilon-mode run.
  bool capped = false;
  std::vector<TracePoint> trace;
  double wall_seconds = 0;
  std::uint64_t seed = 0;
  std::vector<IndexSet> subsets;
  Vector x;
};

/// True iff f - f* <= epsilon (epsilon mode) or k >= K. Throws Config when
/// epsilon is set but f* is not.
bool check_stop(std::int64_t k, double f, const SolverConfig& config, std::optional<double> f_star);

/// Builds the subset sampler a method uses on B: volume sampling (sparse
/// two-element sampler for sparse B with tau = 2, enumeration otherwise) for
/// RCDVS and RCD, uniform tau-subsets for SDNA.
std::unique_ptr<SubsetSampler> make_sampler(Method method, int tau, const CurvatureMatrix& b);

/// Runs config.method. `sampler` may be supplied to reuse preprocessing across
/// runs on the same B; it must match the method.
SolverReport solve(const Objective& obj, const CurvatureMatrix& b, const SolverConfig& config,
                   std::optional<double> f_star = std::nullopt,
                   const SubsetSampler* sampler = nullptr);

SolverReport rcdvs_run(const Objective& obj, const CurvatureMatrix& b, SolverConfig config,
                       std::optional<double> f_star = std::nullopt);
/// RCDVS with tau = 1 (coordinates drawn proportionally to B_ii).
SolverReport rcd_run(const Objective& obj, const CurvatureMatrix& b, SolverConfig config,
                     std::optional<double> f_star = std::nullopt);
/// Uniform tau-subsets with pseudoinverse steps.
SolverReport sdna_run(const Objective& obj, const CurvatureMatrix& b, SolverConfig config,
                      std::optional<double> f_star = std::nullopt);

/// "k,f" lines for every trace point.
void write_trace(std::ostream& out, const SolverReport& report);

}  // namespace rcdvs
