#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rcdvs/bench.hpp"
#include "rcdvs/error.hpp"
#include "rcdvs/sampling.hpp"
#include "rcdvs/solvers.hpp"
#include "rcdvs/theory.hpp"

namespace py = pybind11;
using namespace rcdvs;

namespace {

DenseSymmetric dense(const Matrix& m) { return DenseSymmetric(m, 1e-8); }

Loss make_loss(const std::string& name, double mu) {
  if (name == "square") return Loss::square();
  if (name == "logistic") return Loss::logistic();
  if (name == "huber") return Loss::huber(mu);
  if (name == "logsumexp") return Loss::log_sum_exp(mu);
  if (name == "sqrtnorm") return Loss::sqrt_norm(mu);
  throw Error(ErrorKind::Config, "unknown loss '" + name + "'");
}

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Domain: return "Domain";
    case ErrorKind::SingularSubmatrix: return "SingularSubmatrix";
    case ErrorKind::ZeroDiagonalNonzeroRow: return "ZeroDiagonalNonzeroRow";
    case ErrorKind::EmptySupport: return "EmptySupport";
    case ErrorKind::CombinatorialBlowup: return "CombinatorialBlowup";
    case ErrorKind::DegenerateApprox: return "DegenerateApprox";
    case ErrorKind::Unbounded: return "Unbounded";
    case ErrorKind::Numeric: return "Numeric";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::Config: return "Config";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

py::dict report_dict(const SolverReport& r) {
  py::dict d;
  d["method"] = to_string(r.method);
  d["tau"] = r.tau;
  d["iterations"] = r.iterations;
  d["initial_value"] = r.initial_value;
  d["final_value"] = r.final_value;
  d["reached_target"] = r.reached_target;
  d["capped"] = r.capped;
  d["x"] = r.x;
  std::vector<std::int64_t> ks;
  std::vector<double> fs;
  for (const auto& p : r.trace) {
    ks.push_back(p.iteration);
    fs.push_back(p.value);
  }
  d["trace_iterations"] = ks;
  d["trace_values"] = fs;
  return d;
}

py::dict problem_dict(const Problem& p) {
  py::dict d;
  d["curvature"] = std::visit(
      [](const auto& b) -> Matrix {
        if constexpr (std::is_same_v<std::decay_t<decltype(b)>, DenseSymmetric>) return b.matrix();
        else return b.to_dense().matrix();
      },
      p.curvature);
  d["x_star"] = p.x_star;
  d["f_star"] = p.f_star;
  d["spectrum"] = p.spectrum;
  d["objective"] = std::const_pointer_cast<Objective>(p.objective);
  return d;
}

}  // namespace

PYBIND11_MODULE(_rcdvs, m) {
  m.doc() = "Randomized coordinate descent with volume sampling";

  static py::exception<Error> exc(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = py::handle(exc.ptr())(e.what());
      err.attr("kind") = kind_name(e.kind());
      PyErr_SetObject(exc.ptr(), err.ptr());
    }
  });

  // sampling
  m.def(
      "volume_probabilities",
      [](const Matrix& b, int tau) {
        std::vector<std::vector<int>> subsets;
        std::vector<double> probs;
        for (const auto& [s, p] : exact_probabilities(dense(b), tau)) {
          subsets.emplace_back(s.begin(), s.end());
          probs.push_back(p);
        }
        return py::make_tuple(subsets, probs);
      },
      py::arg("b"), py::arg("tau"), "Every tau-subset (lexicographic) with its volume-sampling probability.");
  m.def(
      "volume_sample",
      [](const Matrix& b, int tau, int draws, std::uint64_t seed) {
        const VolumeSampler s(dense(b), tau);
        RngStream rng(seed);
        std::vector<std::vector<int>> out;
        out.reserve(draws);
        for (int k = 0; k < draws; ++k) {
          const IndexSet set = s.draw(rng);
          out.emplace_back(set.begin(), set.end());
        }
        return out;
      },
      py::arg("b"), py::arg("tau"), py::arg("draws"), py::arg("seed") = 0);
  m.def(
      "sparse2_sample",
      [](const Matrix& b, int draws, std::uint64_t seed) {
        const SparseTwoSampler s(std::make_shared<const CsrSymmetricUpper>(CsrSymmetricUpper::from_dense(dense(b))));
        RngStream rng(seed);
        std::vector<std::pair<int, int>> out;
        out.reserve(draws);
        for (int k = 0; k < draws; ++k) {
          const IndexSet set = s.draw(rng);
          out.emplace_back(set[0], set[1]);
        }
        return out;
      },
      py::arg("b"), py::arg("draws"), py::arg("seed") = 0,
      "Two-element volume sampling through the sparse sampler.");

  // theory
  m.def("elementary_symmetric", [](const std::vector<double>& x, int k) { return elementary_symmetric(x, k); },
        py::arg("x"), py::arg("m"));
  m.def("sum_principal_minors", [](const Matrix& b, int tau) { return sum_principal_minors(DenseSymmetric(b), tau); },
        py::arg("b"), py::arg("tau"));
  m.def(
      "b_tau",
      [](const Matrix& b, int tau) {
        const TauApprox a = b_tau(eigendecompose(dense(b)), tau);
        return py::make_tuple(a.matrix, a.eigenvalues);
      },
      py::arg("b"), py::arg("tau"), "tau-coordinate approximation: (matrix, eigenvalues).");
  m.def("acceleration_ratio",
        [](const std::vector<double>& lam, int t1, int t2) { return acceleration_ratio(lam, t1, t2); },
        py::arg("eigenvalues"), py::arg("tau1"), py::arg("tau2"));
  m.def("expected_step_matrix", [](const Matrix& b, int tau) { return expected_step_matrix(dense(b), tau); },
        py::arg("b"), py::arg("tau"));
  m.def("modulus_quadratic", [](const Matrix& a, int tau) { return modulus_quadratic(eigendecompose(dense(a)), tau); },
        py::arg("a"), py::arg("tau"));

  // objectives
  py::class_<Objective, std::shared_ptr<Objective>>(m, "Objective")
      .def_property_readonly("dimension", &Objective::dimension)
      .def("value", &Objective::value, py::arg("x"))
      .def("gradient", &Objective::gradient, py::arg("x"))
      .def("curvature", [](const Objective& o) { return o.curvature_dense().matrix(); });
  m.def(
      "quadratic",
      [](const Matrix& a, const Vector& b) -> std::shared_ptr<Objective> {
        return std::make_shared<QuadraticObjective>(dense(a), b);
      },
      py::arg("a"), py::arg("b"), "f(x) = x^T A x / 2 - b^T x");
  m.def(
      "separable",
      [](const Matrix& a, const Vector& labels, const std::string& loss, double mu) -> std::shared_ptr<Objective> {
        return std::make_shared<SeparableObjective>(a, labels, make_loss(loss, mu));
      },
      py::arg("a"), py::arg("labels"), py::arg("loss"), py::arg("mu") = 0.0,
      "sum_i g(<a_i, x>) for loss in square, logistic, huber.");
  m.def(
      "smoothed_norm",
      [](const Matrix& a, const Vector& b, const std::string& loss, double mu) -> std::shared_ptr<Objective> {
        return std::make_shared<SmoothedNormObjective>(a, b, make_loss(loss, mu));
      },
      py::arg("a"), py::arg("b"), py::arg("loss"), py::arg("mu"), "phi_mu(Ax - b) for loss in logsumexp, sqrtnorm.");
  m.def(
      "ridge",
      [](std::shared_ptr<Objective> inner, double gamma) -> std::shared_ptr<Objective> {
        return std::make_shared<RegularizedObjective>(inner, gamma);
      },
      py::arg("inner"), py::arg("gamma"));
  m.def(
      "reference_min", [](const Objective& o) { return reference_min(o); }, py::arg("objective"));

  // solvers
  m.def(
      "solve",
      [](const Objective& obj, std::optional<Matrix> curvature, const std::string& method, int tau,
         std::int64_t max_iterations, std::optional<double> epsilon, std::optional<double> f_star,
         std::uint64_t seed, std::int64_t trace_every, std::optional<Vector> x0) {
        SolverConfig c;
        c.method = parse_method(method);
        c.tau = tau;
        c.max_iterations = max_iterations;
        c.epsilon = epsilon;
        c.seed = seed;
        c.trace_every = trace_every;
        if (x0) c.x0 = *x0;
        const CurvatureMatrix b = curvature ? CurvatureMatrix(dense(*curvature)) : CurvatureMatrix(obj.curvature_dense());
        SolverReport r;
        {
          py::gil_scoped_release release;
          r = solve(obj, b, c, f_star);
        }
        return report_dict(r);
      },
      py::arg("objective"), py::arg("curvature") = py::none(), py::arg("method") = "RCDVS", py::arg("tau") = 2,
      py::arg("max_iterations") = 100'000, py::arg("epsilon") = py::none(), py::arg("f_star") = py::none(),
      py::arg("seed") = 0, py::arg("trace_every") = 0, py::arg("x0") = py::none());

  // generators and experiments
  m.def(
      "gen_quadratic",
      [](int n, double lambda1, double lambda2, int reflections, std::uint64_t seed) {
        ProblemSpec s;
        s.n = n;
        s.lambda1 = lambda1;
        s.lambda2 = lambda2;
        s.reflections = reflections;
        s.seed = seed;
        s.validate();
        return problem_dict(gen_quadratic(s));
      },
      py::arg("n"), py::arg("lambda1") = 400.0, py::arg("lambda2") = 100.0, py::arg("reflections") = 10,
      py::arg("seed") = 0);
  m.def(
      "gen_huber",
      [](int n, int m_rows, double lambda1, double lambda2, double mu, std::optional<int> sparsity,
         std::uint64_t seed) {
        ProblemSpec s;
        s.kind = ProblemKind::Huber;
        s.n = n;
        s.m = m_rows;
        s.lambda1 = lambda1;
        s.lambda2 = lambda2;
        s.mu = mu;
        s.sparsity = sparsity;
        s.seed = seed;
        s.validate();
        return problem_dict(gen_huber(s));
      },
      py::arg("n"), py::arg("m") = 0, py::arg("lambda1") = 400.0, py::arg("lambda2") = 100.0,
      py::arg("mu") = 0.01, py::arg("sparsity") = py::none(), py::arg("seed") = 0);
  m.def(
      "run_experiment",
      [](const std::string& kind, int n, double lambda1, double lambda2, const std::vector<std::string>& methods,
         double epsilon, int repetitions, std::uint64_t seed, const std::string& dataset, double gamma,
         bool timing, const std::string& format) {
        ExperimentConfig c;
        c.problem.kind = parse_problem_kind(kind);
        c.problem.n = n;
        c.problem.lambda1 = lambda1;
        c.problem.lambda2 = lambda2;
        c.problem.dataset = dataset;
        c.problem.gamma = gamma;
        c.methods.clear();
        for (const auto& s : methods) c.methods.push_back(parse_method_spec(s));
        c.epsilon = epsilon;
        c.repetitions = repetitions;
        c.seed = seed;
        c.timing = timing;
        c.validate();
        ResultTable t;
        {
          py::gil_scoped_release release;
          t = run_experiment(c);
        }
        return emit_table(t, parse_table_format(format));
      },
      py::arg("kind") = "quadratic", py::arg("n") = 400, py::arg("lambda1") = 400.0, py::arg("lambda2") = 100.0,
      py::arg("methods") = std::vector<std::string>{"RCDVS:2"}, py::arg("epsilon") = 0.01,
      py::arg("repetitions") = 10, py::arg("seed") = 0, py::arg("dataset") = "", py::arg("gamma") = 1.0,
      py::arg("timing") = true, py::arg("format") = "json",
      "Runs the benchmark protocol and returns the rendered table.");
}
