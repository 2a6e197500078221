// rcdvs: problem generation, experiments, spectral tables and sampler checks.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rcdvs/bench.hpp"
#include "rcdvs/error.hpp"
#include "rcdvs/matrix_io.hpp"
#include "rcdvs/sampling.hpp"
#include "rcdvs/theory.hpp"

namespace {

using namespace rcdvs;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config:
    case ErrorKind::Parse:
    case ErrorKind::Domain:
    case ErrorKind::ZeroDiagonalNonzeroRow: return kExitConfig;
    default: return kExitNumeric;
  }
}

struct Output {
  std::string format = "markdown";
  std::string path;

  void write(const std::string& text) const {
    if (path.empty()) {
      std::cout << text;
      return;
    }
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Config, "cannot write " + path);
    out << text;
  }
};

void add_output(CLI::App* app, Output& out, const std::string& formats) {
  app->add_option("--format", out.format, "Output format: " + formats)->capture_default_str();
  app->add_option("--out", out.path, "Write to this file instead of stdout");
}

void add_problem_options(CLI::App* app, ProblemSpec& p, std::string& kind,
                         std::optional<double>& ratio, std::optional<int>& sparsity) {
  app->add_option("--kind", kind, "quadratic | huber | logistic")->capture_default_str();
  app->add_option("--n", p.n, "Dimension")->capture_default_str();
  app->add_option("--m", p.m, "Rows of the data matrix (huber; 0 means n)")->capture_default_str();
  app->add_option("--lambda1", p.lambda1, "Largest seed eigenvalue")->capture_default_str();
  app->add_option("--lambda2", p.lambda2, "Second seed eigenvalue")->capture_default_str();
  app->add_option("--ratio", ratio, "Sets lambda1 = ratio * lambda2");
  app->add_option("--mu", p.mu, "Huber smoothing")->capture_default_str();
  app->add_option("--gamma", p.gamma, "Ridge weight (logistic)")->capture_default_str();
  app->add_option("--sparsity", sparsity, "Nonzeros per reflection direction (sparse huber)");
  app->add_option("--reflections", p.reflections, "Random reflections")->capture_default_str();
  app->add_option("--dataset", p.dataset, "LIBSVM file (logistic)");
}

void finish_problem(ProblemSpec& p, const std::string& kind, const std::optional<double>& ratio,
                    const std::optional<int>& sparsity) {
  p.kind = parse_problem_kind(kind);
  if (ratio) p.lambda1 = *ratio * p.lambda2;
  p.sparsity = sparsity;
}

std::string num17(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// ------------------------------------------------------------------ gen

std::vector<Triplet> upper_triplets(const CurvatureMatrix& b) {
  if (const auto* csr = std::get_if<CsrSymmetricUpper>(&b)) return csr->to_triplets();
  const auto& d = std::get<DenseSymmetric>(b);
  std::vector<Triplet> out;
  for (int i = 0; i < d.n(); ++i) {
    for (int k = i; k < d.n(); ++k) {
      if (d(i, k) != 0) out.push_back({i, k, d(i, k)});
    }
  }
  return out;
}

int cmd_gen(const ProblemSpec& spec, const Output& out) {
  if (spec.kind == ProblemKind::Logistic) {
    throw Error(ErrorKind::Config, "gen builds quadratic or huber instances");
  }
  const Problem p = make_problem(spec);
  if (out.format == "triples") {
    std::ostringstream s;
    s << "# kind " << to_string(spec.kind) << " n " << spec.n << " seed " << spec.seed << '\n';
    s << "# f_star " << num17(p.f_star) << '\n';
    std::visit([&](const auto& b) { write_triplets(s, b); }, p.curvature);
    out.write(s.str());
    return kExitOk;
  }
  if (out.format != "json") throw Error(ErrorKind::Config, "gen formats: triples | json");
  json j;
  j["kind"] = to_string(spec.kind);
  j["n"] = spec.n;
  j["seed"] = spec.seed;
  j["f_star"] = p.f_star;
  j["x_star"] = vector_json(p.x_star);
  j["spectrum"] = vector_json(p.spectrum);
  json entries = json::array();
  for (const auto& t : upper_triplets(p.curvature)) entries.push_back({t.row + 1, t.col + 1, t.value});
  j["curvature"] = entries;
  if (const auto* q = dynamic_cast<const QuadraticObjective*>(p.objective.get())) {
    j["b"] = vector_json(q->b());
  } else if (const auto* s = dynamic_cast<const SeparableObjective*>(p.objective.get())) {
    j["m"] = s->rows();
    j["b"] = vector_json(s->labels());
    json data = json::array();
    const auto& a = s->data();
    for (int c = 0; c < a.outerSize(); ++c) {
      for (SparseColMatrix::InnerIterator it(a, c); it; ++it) {
        data.push_back({it.row() + 1, it.col() + 1, it.value()});
      }
    }
    j["data"] = data;
  }
  out.write(j.dump(2) + "\n");
  return kExitOk;
}

// ------------------------------------------------------------------ run

int cmd_run(ExperimentConfig config, const std::vector<std::string>& methods, const Output& out) {
  config.methods.clear();
  for (const auto& m : methods) config.methods.push_back(parse_method_spec(m));
  const auto format = parse_table_format(out.format);
  const ResultTable table = run_experiment(config);
  for (const auto& w : table.warnings) std::cerr << "warning: " << w << '\n';
  out.write(emit_table(table, format));
  return kExitOk;
}

// --------------------------------------------------------------- theory

DenseSymmetric load_matrix(const std::string& path) {
  if (path.empty()) throw Error(ErrorKind::Config, "--matrix is required");
  return load_dense(path);
}

int cmd_theory(const std::string& matrix, int tau_max, const Output& out) {
  const DenseSymmetric b = load_matrix(matrix);
  const Spectrum sp = eigendecompose(b, true);
  const int n = b.n();
  const int rank = sp.rank();
  if (tau_max <= 0) tau_max = std::min(n, 8);
  tau_max = std::min({tau_max, n, std::max(rank, 1)});

  std::vector<TauApprox> approx;
  for (int t = 1; t <= tau_max; ++t) approx.push_back(b_tau(sp, t));
  std::vector<std::vector<std::optional<double>>> ratio(tau_max);
  for (int t1 = 1; t1 <= tau_max; ++t1) {
    for (int t2 = 1; t2 <= tau_max; ++t2) {
      ratio[t1 - 1].push_back(t2 >= t1 ? std::optional(acceleration_ratio(sp.values, t1, t2))
                                       : std::nullopt);
    }
  }
  std::vector<std::optional<double>> modulus(tau_max);
  if (rank == n) {
    for (int t = 1; t <= tau_max; ++t) modulus[t - 1] = modulus_quadratic(sp, t);
  }

  if (out.format == "json") {
    json j;
    j["n"] = n;
    j["rank"] = rank;
    j["eigenvalues"] = vector_json(sp.values);
    j["b_tau"] = json::object();
    for (const auto& a : approx) j["b_tau"][std::to_string(a.tau)] = vector_json(a.eigenvalues);
    j["ratio"] = json::array();
    for (const auto& row : ratio) {
      json r = json::array();
      for (const auto& v : row) r.push_back(v ? json(*v) : json(nullptr));
      j["ratio"].push_back(r);
    }
    j["modulus"] = json::array();
    for (const auto& v : modulus) j["modulus"].push_back(v ? json(*v) : json(nullptr));
    out.write(j.dump(2) + "\n");
    return kExitOk;
  }
  const auto format = parse_table_format(out.format);
  std::vector<std::string> header{"i", "lambda"};
  for (int t = 1; t <= tau_max; ++t) header.push_back("s(tau=" + std::to_string(t) + ")");
  std::vector<std::vector<std::string>> rows;
  for (int i = 0; i < n; ++i) {
    std::vector<std::string> r{std::to_string(i + 1), format_number(sp.values(i))};
    for (const auto& a : approx) r.push_back(format_number(a.eigenvalues(i)));
    rows.push_back(r);
  }
  std::string text = render_grid(header, rows, format, "spectrum and B_tau eigenvalues");
  text += "\n";

  std::vector<std::string> rh{"tau1\\tau2"};
  for (int t = 1; t <= tau_max; ++t) rh.push_back(std::to_string(t));
  rh.push_back("mu");
  std::vector<std::vector<std::string>> rr;
  for (int t1 = 1; t1 <= tau_max; ++t1) {
    std::vector<std::string> r{std::to_string(t1)};
    for (const auto& v : ratio[t1 - 1]) r.push_back(format_number(v));
    r.push_back(format_number(modulus[t1 - 1]));
    rr.push_back(r);
  }
  text += render_grid(rh, rr, format, "acceleration ratio R(tau1, tau2)");
  out.write(text);
  return kExitOk;
}

// ---------------------------------------------------------- sample-test

struct SampleTestArgs {
  std::string matrix;
  int random_n = 0;
  int rank = 0;
  int tau = 2;
  std::int64_t draws = 100'000;
  std::string sampler = "volume";
  std::uint64_t seed = 0;
  std::optional<double> max_tv;
};

int cmd_sample_test(const SampleTestArgs& a, const Output& out) {
  if (a.matrix.empty() && a.random_n < 1) {
    throw Error(ErrorKind::Config, "give --matrix or --random N");
  }
  RngStream rng(a.seed);
  const DenseSymmetric b = a.matrix.empty()
                               ? random_psd(a.random_n, a.rank > 0 ? a.rank : a.random_n, rng)
                               : load_matrix(a.matrix);
  if (a.draws < 1) throw Error(ErrorKind::Config, "--draws must be >= 1");
  const int n = b.n();
  const auto exact = exact_probabilities(b, a.tau);
  std::map<IndexSet, std::size_t> slot;
  for (std::size_t k = 0; k < exact.size(); ++k) slot[exact[k].first] = k;

  std::vector<double> counts(exact.size(), 0.0);
  RngStream draw_rng = rng.split(1);
  if (a.sampler == "volume") {
    const VolumeSampler vs(b, a.tau);
    for (std::int64_t d = 0; d < a.draws; ++d) counts[slot.at(vs.draw(draw_rng))] += 1;
  } else if (a.sampler == "sparse2") {
    if (a.tau != 2) throw Error(ErrorKind::Config, "sparse2 samples pairs; use --tau 2");
    const SparseTwoSampler ss(std::make_shared<const CsrSymmetricUpper>(
        CsrSymmetricUpper::from_dense(b)));
    for (std::int64_t d = 0; d < a.draws; ++d) counts[slot.at(ss.draw(draw_rng))] += 1;
  } else {
    throw Error(ErrorKind::Config, "unknown sampler '" + a.sampler + "' (volume | sparse2)");
  }
  std::vector<double> p, q;
  for (std::size_t k = 0; k < exact.size(); ++k) {
    p.push_back(exact[k].second);
    q.push_back(counts[k] / static_cast<double>(a.draws));
  }
  const double tv = total_variation(p, q);

  if (out.format == "json") {
    json j;
    j["n"] = n;
    j["tau"] = a.tau;
    j["sampler"] = a.sampler;
    j["draws"] = a.draws;
    j["total_variation"] = tv;
    j["subsets"] = json::array();
    for (std::size_t k = 0; k < exact.size(); ++k) {
      j["subsets"].push_back({{"subset", exact[k].first.to_string()},
                              {"exact", p[k]},
                              {"empirical", q[k]}});
    }
    out.write(j.dump(2) + "\n");
  } else {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < exact.size(); ++k) {
      rows.push_back({exact[k].first.to_string(), format_number(p[k]), format_number(q[k])});
    }
    std::ostringstream title;
    title << a.sampler << " sampler, n=" << n << " tau=" << a.tau << " draws=" << a.draws
          << " TV=" << format_number(tv);
    out.write(render_grid({"subset", "exact", "empirical"}, rows, parse_table_format(out.format),
                          title.str()));
  }
  std::cerr << "total variation " << format_number(tv) << '\n';
  if (a.max_tv && tv > *a.max_tv) {
    std::cerr << "error: total variation exceeds " << *a.max_tv << '\n';
    return kExitNumeric;
  }
  return kExitOk;
}

// `--config FILE` may follow the verb; CLI11 reads it at the top level.
std::vector<std::string> hoist_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::vector<std::string> front, rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      front.push_back(args[i]);
      front.push_back(args[++i]);
    } else if (args[i].rfind("--config=", 0) == 0) {
      front.push_back(args[i]);
    } else {
      rest.push_back(args[i]);
    }
  }
  front.insert(front.end(), rest.begin(), rest.end());
  // App::parse(vector) consumes arguments from the back.
  std::reverse(front.begin(), front.end());
  return front;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized coordinate descent with volume sampling"};
  app.set_config("--config", "", "Config file: one [section] per verb, keys named as its flags");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Emit a generated problem");
  ProblemSpec gen_spec;
  std::string gen_kind = "quadratic";
  std::optional<double> gen_ratio;
  std::optional<int> gen_sparsity;
  Output gen_out{"triples", ""};
  add_problem_options(gen, gen_spec, gen_kind, gen_ratio, gen_sparsity);
  gen->add_option("--seed", gen_spec.seed, "Generator seed")->capture_default_str();
  add_output(gen, gen_out, "triples | json");

  // run
  auto* run = app.add_subcommand("run", "Run an experiment and print the result table");
  ExperimentConfig cfg;
  std::string run_kind = "quadratic";
  std::optional<double> run_ratio;
  std::optional<int> run_sparsity;
  std::vector<std::string> methods{"RCDVS:2"};
  std::string cache_dir;
  bool no_timing = false;
  Output run_out;
  add_problem_options(run, cfg.problem, run_kind, run_ratio, run_sparsity);
  run->add_option("--methods", methods, "Methods as NAME:tau, e.g. RCDVS:2 SDNA:3 (RCD always runs)")
      ->capture_default_str();
  run->add_option("--epsilon", cfg.epsilon, "Target gap f - f*")->capture_default_str();
  run->add_option("--repetitions", cfg.repetitions, "Fresh instances per method")->capture_default_str();
  run->add_option("--max-updates", cfg.max_updates, "Budget in single-coordinate updates")
      ->capture_default_str();
  run->add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
  run->add_option("--threads", cfg.threads, "Concurrent repetitions")->capture_default_str();
  run->add_option("--cache-dir", cache_dir, "Sidecar directory for logistic optima");
  run->add_flag("--no-timing", no_timing, "Omit wall-clock columns");
  add_output(run, run_out, "csv | json | markdown");

  // theory
  auto* theory = app.add_subcommand("theory", "Spectrum, B_tau eigenvalues and R table of a matrix");
  std::string theory_matrix;
  int tau_max = 0;
  Output theory_out;
  theory->add_option("--matrix", theory_matrix, "Matrix in triple format")->required();
  theory->add_option("--tau-max", tau_max, "Largest tau (default min(n, 8))");
  add_output(theory, theory_out, "csv | json | markdown");

  // sample-test
  auto* sample = app.add_subcommand("sample-test", "Empirical vs exact sampler distribution");
  SampleTestArgs st;
  Output sample_out;
  sample->add_option("--matrix", st.matrix, "PSD matrix in triple format");
  sample->add_option("--random", st.random_n, "Use a random PSD matrix of this size");
  sample->add_option("--rank", st.rank, "Rank of the random matrix (default full)");
  sample->add_option("--tau", st.tau, "Subset size")->capture_default_str();
  sample->add_option("--draws", st.draws, "Number of draws")->capture_default_str();
  sample->add_option("--sampler", st.sampler, "volume | sparse2")->capture_default_str();
  sample->add_option("--seed", st.seed, "Seed")->capture_default_str();
  sample->add_option("--max-tv", st.max_tv, "Exit 3 when the total variation exceeds this");
  add_output(sample, sample_out, "csv | json | markdown");

  try {
    app.parse(hoist_config(argc, argv));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*gen) {
      finish_problem(gen_spec, gen_kind, gen_ratio, gen_sparsity);
      return cmd_gen(gen_spec, gen_out);
    }
    if (*run) {
      finish_problem(cfg.problem, run_kind, run_ratio, run_sparsity);
      cfg.cache_dir = cache_dir;
      cfg.timing = !no_timing;
      return cmd_run(cfg, methods, run_out);
    }
    if (*theory) return cmd_theory(theory_matrix, tau_max, theory_out);
    if (*sample) return cmd_sample_test(st, sample_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitOk;
}
