#include "rcdvs/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <ostream>

#include "rcdvs/error.hpp"

namespace rcdvs {

std::string to_string(Method m) {
  switch (m) {
    case Method::RCDVS: return "RCDVS";
    case Method::RCD: return "RCD";
    case Method::SDNA: return "SDNA";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "rcdvs") return Method::RCDVS;
  if (s == "rcd") return Method::RCD;
  if (s == "sdna") return Method::SDNA;
  throw Error(ErrorKind::Config, "unknown method '" + name + "'");
}

bool check_stop(std::int64_t k, double f, const SolverConfig& config, std::optional<double> f_star) {
  if (config.epsilon) {
    if (!f_star) throw Error(ErrorKind::Config, "target gap requested without a known optimum");
    if (f - *f_star <= *config.epsilon) return true;
  }
  return k >= config.max_iterations;
}

std::unique_ptr<SubsetSampler> make_sampler(Method method, int tau, const CurvatureMatrix& b) {
  const int n = dimension(b);
  if (method == Method::RCD) tau = 1;
  if (method == Method::SDNA) return std::make_unique<TauNiceSampler>(n, tau);
  if (const auto* csr = std::get_if<CsrSymmetricUpper>(&b)) {
    if (tau == 2) {
      return std::make_unique<SparseTwoSampler>(std::make_shared<const CsrSymmetricUpper>(*csr));
    }
    return std::make_unique<VolumeSampler>(*csr, tau);
  }
  return std::make_unique<VolumeSampler>(std::get<DenseSymmetric>(b), tau);
}

SolverReport solve(const Objective& obj, const CurvatureMatrix& b, const SolverConfig& config,
                   std::optional<double> f_star, const SubsetSampler* sampler) {
  const int n = obj.dimension();
  if (dimension(b) != n) throw Error(ErrorKind::Domain, "curvature matrix dimension mismatch");
  const int tau = config.method == Method::RCD ? 1 : config.tau;
  if (tau < 1 || tau > n) throw Error(ErrorKind::Config, "tau must lie in [1, n]");
  if (config.epsilon && !(*config.epsilon > 0)) throw Error(ErrorKind::Config, "epsilon must be > 0");
  if (config.max_iterations < 0) throw Error(ErrorKind::Config, "negative iteration cap");
  if (config.trace_every < 0) throw Error(ErrorKind::Config, "negative trace cadence");
  if (config.x0.size() != 0 && config.x0.size() != n) {
    throw Error(ErrorKind::Config, "start point has wrong length");
  }

  std::unique_ptr<SubsetSampler> owned;
  const bool forced = !config.forced_subsets.empty();
  if (!forced) {
    if (!sampler) {
      owned = make_sampler(config.method, tau, b);
      sampler = owned.get();
    }
    if (sampler->dimension() != n || sampler->subset_size() != tau) {
      throw Error(ErrorKind::Config, "sampler does not match the problem");
    }
  }

  const auto start = std::chrono::steady_clock::now();
  auto state = obj.make_state(config.x0.size() ? config.x0 : Vector(Vector::Zero(n)));
  RngStream rng(config.seed);

  SolverReport rep;
  rep.method = config.method;
  rep.tau = tau;
  rep.seed = config.seed;
  rep.initial_value = state->value();
  double f = rep.initial_value;
  std::int64_t k = 0;
  if (config.trace_every > 0) rep.trace.push_back({0, f});

  while (!check_stop(k, f, config, f_star)) {
    const IndexSet s = forced ? config.forced_subsets[k % config.forced_subsets.size()]
                              : sampler->draw(rng);
    const DenseSymmetric m = principal_submatrix(b, s);
    const Vector g = state->partial_gradient(s);
    Vector h;
    if (config.method == Method::SDNA) {
      h = pseudo_solve(m, g);
    } else {
      try {
        h = spd_solve(m, g);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::SingularSubmatrix || forced) throw;
        throw Error(ErrorKind::InvariantViolation,
                    "volume sampling selected singular submatrix " + s.to_string());
      }
    }
    state->apply_step(s, h);
    ++k;
    f = state->value();
    if (config.trace_every > 0 && k % config.trace_every == 0) rep.trace.push_back({k, f});
    if (config.log_subsets) rep.subsets.push_back(s);
  }
  if (config.trace_every > 0 && rep.trace.back().iteration != k) rep.trace.push_back({k, f});

  rep.iterations = k;
  rep.final_value = f;
  if (config.epsilon) {
    rep.reached_target = f - *f_star <= *config.epsilon;
    rep.capped = !rep.reached_target;
  }
  rep.x = state->x();
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

SolverReport rcdvs_run(const Objective& obj, const CurvatureMatrix& b, SolverConfig config,
                       std::optional<double> f_star) {
  config.method = Method::RCDVS;
  return solve(obj, b, config, f_star);
}

SolverReport rcd_run(const Objective& obj, const CurvatureMatrix& b, SolverConfig config,
                     std::optional<double> f_star) {
  config.method = Method::RCD;
  config.tau = 1;
  return solve(obj, b, config, f_star);
}

SolverReport sdna_run(const Objective& obj, const CurvatureMatrix& b, SolverConfig config,
                      std::optional<double> f_star) {
  config.method = Method::SDNA;
  return solve(obj, b, config, f_star);
}

void write_trace(std::ostream& out, const SolverReport& report) {
  const auto prec = out.precision();
  out << std::setprecision(17);
  for (const auto& p : report.trace) out << p.iteration << ',' << p.value << '\n';
  out.precision(prec);
}

}  // namespace rcdvs
