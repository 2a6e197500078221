#include "rcdvs/bench.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

#include "rcdvs/error.hpp"
#include "rcdvs/rng.hpp"
#include "rcdvs/theory.hpp"

namespace rcdvs {

// ---------------------------------------------------------------- LIBSVM

namespace {

[[noreturn]] void parse_error(int line, const std::string& msg) {
  throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + msg);
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  const std::string tmp(s);
  char* end = nullptr;
  out = std::strtod(tmp.c_str(), &end);
  return end == tmp.c_str() + tmp.size() && std::isfinite(out);
}

}  // namespace

LibsvmData parse_libsvm(std::istream& in) {
  std::vector<Eigen::Triplet<double>> entries;
  std::vector<double> raw_labels;
  int cols = 0;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok)) continue;
    double label;
    if (!parse_double(tok, label)) parse_error(lineno, "bad label '" + tok + "'");
    const int row = static_cast<int>(raw_labels.size());
    raw_labels.push_back(label);
    while (ss >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) parse_error(lineno, "expected idx:val, got '" + tok + "'");
      int idx = 0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + colon, idx);
      if (ec != std::errc() || ptr != tok.data() + colon || idx < 1) {
        parse_error(lineno, "bad feature index in '" + tok + "'");
      }
      double val;
      if (!parse_double(std::string_view(tok).substr(colon + 1), val)) {
        parse_error(lineno, "bad feature value in '" + tok + "'");
      }
      cols = std::max(cols, idx);
      if (val != 0) entries.emplace_back(row, idx - 1, val);
    }
  }
  if (raw_labels.empty()) throw Error(ErrorKind::Parse, "no data lines");

  std::vector<double> distinct = raw_labels;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() > 2) {
    throw Error(ErrorKind::Domain,
                "labels are not binary (" + std::to_string(distinct.size()) + " distinct values)");
  }

  LibsvmData d;
  d.labels.resize(static_cast<Eigen::Index>(raw_labels.size()));
  for (std::size_t i = 0; i < raw_labels.size(); ++i) {
    const double v = raw_labels[i];
    d.labels(static_cast<Eigen::Index>(i)) =
        distinct.size() == 2 ? (v == distinct[0] ? -1.0 : 1.0) : (v > 0 ? 1.0 : -1.0);
  }
  d.a.resize(static_cast<Eigen::Index>(raw_labels.size()), cols);
  d.a.setFromTriplets(entries.begin(), entries.end());
  d.a.makeCompressed();
  return d;
}

LibsvmData load_libsvm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open dataset " + path.string());
  return parse_libsvm(in);
}

std::shared_ptr<const Objective> logistic_objective(const LibsvmData& data, double gamma) {
  auto inner = std::make_shared<SeparableObjective>(data.a, data.labels, Loss::logistic());
  return std::make_shared<RegularizedObjective>(std::move(inner), gamma);
}

// ------------------------------------------------------ reference minimum

double reference_min(const Objective& obj, const ReferenceOptions& options) {
  const int n = obj.dimension();
  if (const auto* q = dynamic_cast<const QuadraticObjective*>(&obj)) {
    const Matrix a = *q->hessian(Vector::Zero(n));
    const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
    const Vector x = cod.solve(q->b());
    if ((a * x - q->b()).norm() > 1e-8 * std::max(1.0, q->b().norm())) {
      throw Error(ErrorKind::Unbounded, "b is not in the range of A");
    }
    return -0.5 * q->b().dot(x);
  }

  const Matrix b = obj.curvature_dense().matrix();
  const Eigen::LLT<Matrix> bchol(b);
  if (bchol.info() != Eigen::Success || min_eigenvalue(b) <= 0) {
    throw Error(ErrorKind::Domain, "reference minimum needs a positive definite curvature matrix");
  }
  Vector x = Vector::Zero(n);
  double f = obj.value(x);
  double gnorm = 0;
  for (int it = 0; it < options.max_iterations; ++it) {
    const Vector g = obj.gradient(x);
    gnorm = g.norm();
    if (!std::isfinite(gnorm)) throw Error(ErrorKind::Numeric, "gradient is not finite");
    if (gnorm <= options.gradient_tol) return f;

    Vector next = x - bchol.solve(g);
    double f_next = obj.value(next);
    if (const auto h = obj.hessian(x)) {
      const Eigen::LDLT<Matrix> hf(*h);
      if (hf.info() == Eigen::Success) {
        const Vector xn = x - hf.solve(g);
        const double fn = obj.value(xn);
        if (std::isfinite(fn) && fn <= f_next + 1e-14 * (1 + std::abs(f))) {
          next = xn;
          f_next = fn;
        }
      }
    }
    x = std::move(next);
    f = f_next;
  }
  std::ostringstream msg;
  msg << "reference minimum did not converge: gradient norm " << std::setprecision(3) << gnorm
      << " after " << options.max_iterations << " iterations (target " << options.gradient_tol
      << ")";
  throw Error(ErrorKind::Numeric, msg.str());
}

double cached_reference_min(const Objective& obj, const std::filesystem::path& dataset,
                            double gamma, const std::filesystem::path& cache_dir) {
  std::ifstream in(dataset, std::ios::binary);
  if (!in) throw Error(ErrorKind::Config, "cannot open dataset " + dataset.string());
  // FNV-1a over the file bytes and gamma's bit pattern.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) mix(static_cast<unsigned char>(buf[i]));
  }
  const auto gbits = std::bit_cast<std::uint64_t>(gamma);
  for (int s = 0; s < 64; s += 8) mix(static_cast<unsigned char>(gbits >> s));

  std::ostringstream name;
  name << "fstar-" << std::hex << std::setw(16) << std::setfill('0') << h << ".txt";
  const auto file = cache_dir / name.str();
  if (std::ifstream cached(file); cached) {
    double v;
    if (cached >> v && std::isfinite(v)) return v;
  }
  const double v = reference_min(obj);
  std::filesystem::create_directories(cache_dir);
  std::ofstream out(file);
  out << std::setprecision(17) << v << '\n';
  return v;
}

Problem make_problem(const ProblemSpec& spec, const std::filesystem::path& cache_dir) {
  spec.validate();
  switch (spec.kind) {
    case ProblemKind::Quadratic: return gen_quadratic(spec);
    case ProblemKind::Huber: return gen_huber(spec);
    case ProblemKind::Logistic: break;
  }
  const LibsvmData data = load_libsvm(spec.dataset);
  Problem p;
  p.objective = logistic_objective(data, spec.gamma);
  const DenseSymmetric b = p.objective->curvature_dense();
  p.spectrum = eigendecompose(b, false).values;
  p.curvature = b;
  p.f_star = cache_dir.empty() ? reference_min(*p.objective)
                               : cached_reference_min(*p.objective, spec.dataset, spec.gamma,
                                                      cache_dir);
  return p;
}

// ------------------------------------------------------------ experiments

std::string to_string(const MethodSpec& m) {
  return to_string(m.method) + ":" + std::to_string(m.tau);
}

MethodSpec parse_method_spec(const std::string& text) {
  const auto colon = text.find(':');
  MethodSpec m;
  m.method = parse_method(text.substr(0, colon));
  if (colon == std::string::npos) {
    m.tau = m.method == Method::RCD ? 1 : 2;
  } else {
    const std::string t = text.substr(colon + 1);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), m.tau);
    if (ec != std::errc() || ptr != t.data() + t.size() || m.tau < 1) {
      throw Error(ErrorKind::Config, "bad tau in method '" + text + "'");
    }
  }
  if (m.method == Method::RCD && m.tau != 1) {
    throw Error(ErrorKind::Config, "RCD is the tau = 1 method");
  }
  return m;
}

void ExperimentConfig::validate() const {
  problem.validate();
  if (repetitions < 1) throw Error(ErrorKind::Config, "repetitions must be >= 1");
  if (!(epsilon > 0)) throw Error(ErrorKind::Config, "epsilon must be > 0");
  if (max_updates < 1) throw Error(ErrorKind::Config, "iteration cap must be >= 1");
  if (threads < 1) throw Error(ErrorKind::Config, "threads must be >= 1");
  for (const auto& m : methods) {
    if (m.tau < 1) throw Error(ErrorKind::Config, "tau must be >= 1");
    if (problem.kind != ProblemKind::Logistic && m.tau > problem.n) {
      throw Error(ErrorKind::Config, "tau exceeds n");
    }
  }
}

namespace {

std::optional<double> median(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

std::vector<MethodSpec> method_list(const std::vector<MethodSpec>& requested) {
  std::vector<MethodSpec> out{{Method::RCD, 1}};
  for (auto m : requested) {
    if (m.method == Method::RCD) m.tau = 1;
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  return out;
}

}  // namespace

ResultTable run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto methods = method_list(config.methods);
  const int reps = config.repetitions;
  const int nm = static_cast<int>(methods.size());

  std::shared_ptr<const Problem> shared;
  if (config.problem.kind == ProblemKind::Logistic) {
    shared = std::make_shared<const Problem>(make_problem(config.problem, config.cache_dir));
  }

  std::vector<std::vector<RepetitionRecord>> by_rep(reps);
  std::vector<Vector> spectra(reps);
  std::vector<std::exception_ptr> errors(reps);

  auto job = [&](int r) {
    ProblemSpec ps = config.problem;
    ps.seed = mix_seed(config.seed, 2 * static_cast<std::uint64_t>(r));
    const std::uint64_t run_seed = mix_seed(config.seed, 2 * static_cast<std::uint64_t>(r) + 1);
    const Problem problem = shared ? *shared : make_problem(ps, config.cache_dir);
    spectra[r] = problem.spectrum;
    const int n = problem.objective->dimension();
    for (int j = 0; j < nm; ++j) {
      const auto& m = methods[j];
      if (m.tau > n) throw Error(ErrorKind::Config, "tau exceeds n");
      SolverConfig sc;
      sc.method = m.method;
      sc.tau = m.tau;
      sc.epsilon = config.epsilon;
      sc.max_iterations = std::max<std::int64_t>(1, config.max_updates / m.tau);
      sc.seed = mix_seed(run_seed, static_cast<std::uint64_t>(j));
      const SolverReport rep = solve(*problem.objective, problem.curvature, sc, problem.f_star);
      RepetitionRecord rec;
      rec.repetition = r;
      rec.method = m;
      rec.iterations = rep.iterations;
      rec.seconds = config.timing ? rep.wall_seconds : 0.0;
      rec.capped = rep.capped;
      by_rep[r].push_back(rec);
    }
    const auto& base = by_rep[r][0];
    for (auto& rec : by_rep[r]) {
      if (!base.capped && !rec.capped && rec.iterations > 0) {
        rec.acc = static_cast<double>(base.iterations) / static_cast<double>(rec.iterations);
      }
    }
  };

  const int workers = std::min(config.threads, reps);
  if (workers <= 1) {
    for (int r = 0; r < reps; ++r) {
      try {
        job(r);
      } catch (...) {
        errors[r] = std::current_exception();
        break;
      }
    }
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int r; (r = next.fetch_add(1)) < reps;) {
          try {
            job(r);
          } catch (...) {
            errors[r] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ResultTable table;
  std::ostringstream title;
  title << to_string(config.problem.kind);
  if (config.problem.kind == ProblemKind::Logistic) {
    title << " " << std::filesystem::path(config.problem.dataset).filename().string()
          << " gamma=" << config.problem.gamma;
  } else {
    title << " n=" << config.problem.n;
    if (config.problem.kind == ProblemKind::Huber) title << " m=" << config.problem.rows();
    title << " lambda1/lambda2=" << config.problem.lambda1 / config.problem.lambda2;
  }
  title << " eps=" << config.epsilon << " reps=" << reps;
  table.title = title.str();

  for (int j = 0; j < nm; ++j) {
    ResultRow row;
    row.method = methods[j];
    std::vector<double> its, secs, accs;
    for (int r = 0; r < reps; ++r) {
      const auto& rec = by_rep[r][j];
      table.records.push_back(rec);
      if (rec.capped) {
        ++row.capped;
        table.warnings.push_back(to_string(rec.method) + " repetition " + std::to_string(r) +
                                 " hit the iteration cap; excluded from medians");
        continue;
      }
      ++row.completed;
      its.push_back(static_cast<double>(rec.iterations));
      secs.push_back(rec.seconds);
      if (rec.acc) accs.push_back(*rec.acc);
    }
    row.median_iterations = median(its);
    if (config.timing) row.median_seconds = median(secs);
    row.acc = median(accs);
    const Vector& lam = spectra[0];
    if (row.method.method != Method::SDNA && lam.size() >= row.method.tau) {
      try {
        row.theory_acc = acceleration_ratio(lam, 1, row.method.tau);
      } catch (const Error&) {
        row.theory_acc.reset();
      }
      if (row.theory_acc && row.acc) row.percent = 100.0 * *row.acc / *row.theory_acc;
    }
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace rcdvs
