#include "asdca/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "asdca/costmodel.hpp"
#include "asdca/theory.hpp"

namespace asdca::cli {

namespace {

using nlohmann::json;

std::string format_real(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    parts.push_back(b == std::string::npos ? std::string() : item.substr(b, e - b + 1));
  }
  return parts;
}

double to_real(const std::string& s) {
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("malformed number '" + s + "'");
  return v;
}

std::size_t to_count(const std::string& s) {
  std::size_t pos = 0;
  if (!s.empty() && s.front() == '-') throw std::invalid_argument("negative count '" + s + "'");
  const auto v = std::stoull(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("malformed count '" + s + "'");
  return static_cast<std::size_t>(v);
}

// Dataset source shared by run and sweep.
struct DataOptions {
  std::string data_path;
  std::string synthetic;
  std::string test_path;
  std::string loss = "smoothed-hinge";
  std::optional<double> lambda;

  void attach(CLI::App* app) {
    app->add_option("--data", data_path, "Training set in libsvm format");
    app->add_option("--synthetic", synthetic, "Synthetic set n,d,sparsity,noise,seed[,margin]");
    app->add_option("--test-data", test_path, "Held-out libsvm set for test-loss columns");
    app->add_option("--loss", loss, "smoothed-hinge | squared | logistic");
    app->add_option("--lambda", lambda, "Regularization (default 1/n)");
  }

  std::shared_ptr<const Dataset> load() const {
    if (data_path.empty() == synthetic.empty()) {
      throw std::invalid_argument("exactly one of --data or --synthetic is required");
    }
    if (!data_path.empty()) return std::make_shared<const Dataset>(load_libsvm(data_path));
    return std::make_shared<const Dataset>(generate_synthetic(parse_synthetic(synthetic)));
  }

  std::optional<Dataset> load_test() const {
    if (test_path.empty()) return std::nullopt;
    return load_libsvm(test_path);
  }
};

class OutputSink {
 public:
  OutputSink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot write '" + path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

struct TracedRun {
  SolverTrace trace;
  std::vector<TestMetrics> metrics;
};

TracedRun traced_solve(const Problem& problem, const SolverConfig& config,
                       std::optional<double> dual_optimum, const std::optional<Dataset>& test) {
  TracedRun run;
  RunOptions options;
  options.dual_optimum = dual_optimum;
  if (test) {
    options.observer = [&](const TraceRecord&, std::span<const double> x) {
      run.metrics.push_back(evaluate_test_set(*test, x));
    };
  }
  run.trace = run_solver(problem, config, options);
  return run;
}

// ---------------------------------------------------------------- run

struct RunCommand {
  DataOptions data;
  std::string algorithm = "asdca";
  std::size_t m = 1;
  std::optional<double> theta;
  double epsilon = 1e-6;
  std::size_t max_iters = 1000000;
  std::uint64_t seed = 0;
  std::size_t checkpoint_every = 0;
  std::string out = "-";
  bool reference = false;

  void attach(CLI::App* app) {
    data.attach(app);
    app->add_option("--algorithm", algorithm, "asdca | sdca | agd");
    app->add_option("--m", m, "Mini-batch size (asdca)");
    app->add_option("--theta", theta, "Override the default step theta");
    app->add_option("--epsilon", epsilon, "Stop once the duality gap is below this");
    app->add_option("--max-iters", max_iters, "Iteration cap");
    app->add_option("--seed", seed, "Sampling seed");
    app->add_option("--checkpoint-every", checkpoint_every, "Iterations between trace rows (0: every n examples)");
    app->add_option("--out", out, "Trace CSV path ('-' for stdout)");
    app->add_flag("--reference", reference, "Solve to 1e-12 first and report gaps against D*");
  }

  int execute(std::ostream& out_stream, std::ostream& err) const {
    const auto dataset = data.load();
    const auto test = data.load_test();
    const auto problem = make_problem(dataset, loss_from_name(data.loss), data.lambda);
    SolverConfig config;
    config.algorithm = algorithm_from_name(algorithm);
    config.batch_size = m;
    config.theta_override = theta;
    config.gap_tolerance = epsilon;
    config.max_iterations = max_iters;
    config.seed = seed;
    config.checkpoint_every = checkpoint_every;
    config.validate(problem.n());

    std::optional<double> dual_optimum;
    if (reference) dual_optimum = solve_reference(problem).dual;
    const auto run = traced_solve(problem, config, dual_optimum, test);
    OutputSink sink(out, out_stream);
    write_trace_csv(sink.get(), run.trace, std::nullopt, test ? &run.metrics : nullptr);
    if (!run.trace.converged) {
      err << "warning: gap " << run.trace.records.back().gap << " above epsilon after "
          << run.trace.records.back().iteration << " iterations\n";
      return kNotConverged;
    }
    return kSuccess;
  }
};

// ---------------------------------------------------------------- sweep

struct SweepCommand {
  DataOptions data;
  std::string m_fractions = "1e-4,1e-3,1e-2";
  std::string m_list;
  double budget_epochs = 50.0;
  double epsilon = 1e-6;
  std::uint64_t seed = 0;
  std::string out = "sweep";
  std::string manifest_in;

  void attach(CLI::App* app) {
    data.attach(app);
    app->add_option("--m-fractions", m_fractions, "Batch sizes as fractions of n");
    app->add_option("--m", m_list, "Explicit batch sizes (overrides --m-fractions)");
    app->add_option("--budget-epochs", budget_epochs, "Examples budget in multiples of n");
    app->add_option("--epsilon", epsilon, "Stopping gap");
    app->add_option("--seed", seed, "Shared sampling seed");
    app->add_option("--out", out, "Output directory");
    app->add_option("--manifest", manifest_in, "Re-run the sweep described by a manifest");
  }

  void load_manifest() {
    std::ifstream in(manifest_in);
    if (!in) throw std::runtime_error("cannot open manifest '" + manifest_in + "'");
    const json j = json::parse(in);
    const auto& ds = j.at("dataset");
    data.data_path = ds.value("data", std::string());
    data.synthetic = ds.value("synthetic", std::string());
    data.test_path = ds.value("test_data", std::string());
    data.loss = j.at("loss").get<std::string>();
    data.lambda = j.at("lambda").get<double>();
    seed = j.at("seed").get<std::uint64_t>();
    epsilon = j.at("epsilon").get<double>();
    budget_epochs = j.at("budget_epochs").get<double>();
    std::string ms;
    for (const auto& m : j.at("batch_sizes")) {
      if (!ms.empty()) ms += ',';
      ms += std::to_string(m.get<std::size_t>());
    }
    m_list = ms;
  }

  int execute(std::ostream& out_stream, std::ostream& err) {
    if (!manifest_in.empty()) load_manifest();
    const auto dataset = data.load();
    const auto test = data.load_test();
    const auto problem = make_problem(dataset, loss_from_name(data.loss), data.lambda);
    const std::size_t n = problem.n();
    std::vector<std::size_t> ms;
    if (!m_list.empty()) {
      ms = parse_count_list(m_list);
      std::sort(ms.begin(), ms.end());
      ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
      for (auto m : ms) {
        if (m == 0 || m > n) throw std::invalid_argument("batch size out of range [1, n]");
      }
    } else {
      ms = resolve_batch_sizes(parse_real_list(m_fractions), n);
    }
    if (ms.empty()) throw std::invalid_argument("no batch sizes to sweep");
    if (!(budget_epochs > 0.0)) throw std::invalid_argument("--budget-epochs must be positive");

    const auto reference = solve_reference(problem);
    const auto budget = static_cast<std::size_t>(std::ceil(budget_epochs * static_cast<double>(n)));

    std::filesystem::create_directories(out);
    json manifest;
    json ds;
    if (!data.data_path.empty()) ds["data"] = data.data_path;
    if (!data.synthetic.empty()) ds["synthetic"] = data.synthetic;
    if (!data.test_path.empty()) ds["test_data"] = data.test_path;
    manifest["dataset"] = ds;
    manifest["loss"] = data.loss;
    manifest["lambda"] = problem.lambda;
    manifest["gamma"] = problem.gamma;
    manifest["n"] = n;
    manifest["dim"] = problem.dim();
    manifest["seed"] = seed;
    manifest["epsilon"] = epsilon;
    manifest["budget_epochs"] = budget_epochs;
    manifest["batch_sizes"] = ms;
    manifest["reference_primal"] = reference.primal;
    manifest["reference_dual"] = reference.dual;
    manifest["runs"] = json::array();

    struct Job {
      SolverConfig config;
      std::string file;
    };
    std::vector<Job> jobs;
    auto base = [&](Algorithm a) {
      SolverConfig c;
      c.algorithm = a;
      c.gap_tolerance = epsilon;
      c.seed = seed;
      return c;
    };
    {
      auto c = base(Algorithm::SDCA);
      c.max_iterations = budget;
      jobs.push_back({c, "sdca.csv"});
    }
    for (auto m : ms) {
      auto c = base(Algorithm::ASDCA);
      c.batch_size = m;
      c.max_iterations = (budget + m - 1) / m;
      jobs.push_back({c, "asdca_m" + std::to_string(m) + ".csv"});
    }
    {
      auto c = base(Algorithm::AGD);
      c.max_iterations = (budget + n - 1) / n;
      jobs.push_back({c, "agd.csv"});
    }

    bool all_converged = true;
    for (const auto& job : jobs) {
      const auto run = traced_solve(problem, job.config, reference.dual, test);
      const auto path = std::filesystem::path(out) / job.file;
      std::ofstream file(path);
      if (!file) throw std::runtime_error("cannot write '" + path.string() + "'");
      write_trace_csv(file, run.trace, reference.dual, test ? &run.metrics : nullptr);
      all_converged = all_converged && run.trace.converged;
      json entry;
      entry["algorithm"] = std::string(algorithm_name(job.config.algorithm));
      entry["m"] = run.trace.batch_size;
      entry["file"] = job.file;
      entry["max_iterations"] = job.config.max_iterations;
      entry["converged"] = run.trace.converged;
      entry["final_examples_processed"] = run.trace.records.back().examples_processed;
      if (job.config.algorithm == Algorithm::ASDCA) entry["theta"] = run.trace.theta;
      manifest["runs"].push_back(entry);
    }
    std::ofstream mf(std::filesystem::path(out) / "manifest.json");
    mf << manifest.dump(2) << '\n';
    out_stream << "wrote " << jobs.size() << " traces and manifest.json to " << out << '\n';
    if (!all_converged) err << "note: some runs stopped at the examples budget\n";
    return kSuccess;
  }
};

// ---------------------------------------------------------------- verify

struct VerifyCommand {
  std::size_t seeds = 200;
  std::optional<double> theta;
  bool inject_corruption = false;
  std::string out = "-";

  void attach(CLI::App* app) {
    app->add_option("--seeds", seeds, "Runs averaged by the potential-decay check");
    app->add_option("--theta", theta, "Step override for all ASDCA checks");
    app->add_flag("--inject-corruption", inject_corruption,
                  "Offset alpha_bar in the lemma states (self-test; must fail)");
    app->add_option("--out", out, "Report CSV path ('-' for stdout)");
  }

  int execute(std::ostream& out_stream, std::ostream& err) const {
    VerificationReport report;
    for (auto kind : {LossKind::SmoothedHinge, LossKind::Squared, LossKind::Logistic}) {
      const ScalarLoss loss(kind);
      report.add(verify_conjugate_oracle(loss));
      report.add(verify_fenchel_young(loss));
    }

    {
      SyntheticSpec spec;
      spec.n = 6;
      spec.d = 3;
      spec.label_noise = 0.2;
      spec.seed = 11;
      const auto data = std::make_shared<const Dataset>(generate_synthetic(spec));
      const auto problem = make_problem(data, ScalarLoss(LossKind::SmoothedHinge));
      for (std::size_t m : {1, 2, 3}) {
        const double step = theta.value_or(compute_theta(problem.gamma, problem.lambda, problem.n(), m));
        AsdcaIterate it(problem);
        SubsetSampler sampler(problem.n(), m);
        Rng rng(100 + m);
        for (std::size_t t = 0; t <= 30; ++t) {
          if (t > 0) it.step(step, sampler.draw(rng));
          if (t != 0 && t != 5 && t != 30) continue;
          AsdcaIterate state = it;
          if (inject_corruption) {
            state.corrupt_alpha_bar(std::vector<double>(problem.dim(), 0.1));
          }
          auto l1 = verify_lemma1(state, step, m);
          l1.name += "_t" + std::to_string(t);
          report.add(l1);
          auto l2 = verify_lemma2(state, step, m);
          l2.name += "_t" + std::to_string(t);
          report.add(l2);
        }
      }
    }

    {
      SyntheticSpec spec;
      spec.n = 32;
      spec.d = 8;
      spec.label_noise = 0.1;
      spec.seed = 3;
      const auto data = std::make_shared<const Dataset>(generate_synthetic(spec));
      const auto problem = make_problem(data, ScalarLoss(LossKind::SmoothedHinge));
      const auto ref = solve_reference(problem);
      Theorem1Options options;
      options.seeds = seeds;
      for (std::size_t m : {1, 4, 8}) {
        for (auto& e : verify_theorem1(problem, m, theta, ref.dual, options)) {
          if (e.skipped) {
            err << "warning: skipping " << e.name << " (theta " << e.measured
                << " exceeds the bound " << e.bound << ")\n";
          }
          report.add(std::move(e));
        }
      }
    }

    {
      Rng rng(5);
      std::uniform_real_distribution<double> logu(-6.0, 2.0);
      double worst = 0.0;
      for (int k = 0; k < 1000; ++k) {
        const std::size_t n = 1 + static_cast<std::size_t>(std::pow(10.0, 1.0 + 4.0 * std::generate_canonical<double, 53>(rng)));
        const std::size_t m = 1 + static_cast<std::size_t>(std::generate_canonical<double, 53>(rng) * static_cast<double>(n - 1));
        const double gamma = std::pow(10.0, logu(rng));
        const double lambda = std::pow(10.0, logu(rng));
        const double prod = dominating_factor(n, m, gamma, lambda) * compute_theta(gamma, lambda, n, m) *
                            static_cast<double>(m) / static_cast<double>(n);
        worst = std::max(worst, std::abs(prod - 0.25));
      }
      VerificationEntry e;
      e.name = "dominating_factor_theta_identity";
      e.measured = worst;
      e.tolerance = 1e-12;
      e.passed = worst <= e.tolerance;
      e.note = "1000 random draws";
      report.add(e);
    }

    OutputSink sink(out, out_stream);
    write_report_csv(sink.get(), report);
    return report.all_passed() ? kSuccess : kInputError;
  }
};

// ---------------------------------------------------------------- cost

struct CostCommand {
  std::string mode = "table";
  std::size_t s = 1;
  std::size_t d = 1;
  double d_bar = 1.0;
  std::size_t n = 1;
  std::size_t m = 1;
  double channel_overhead = 0.0;
  double gamma = 1.0;
  std::optional<double> lambda;
  double epsilon = 1e-3;
  std::string m_grid = "1,10,100";
  std::string out = "-";

  void attach(CLI::App* app) {
    app->add_option("--mode", mode, "table | recommend");
    app->add_option("--s", s, "Node count");
    app->add_option("--d", d, "Feature dimension");
    app->add_option("--d-bar", d_bar, "Average nonzeros per example");
    app->add_option("--n", n, "Number of examples");
    app->add_option("--m", m, "Mini-batch size for table mode");
    app->add_option("--channel-overhead", channel_overhead, "Cost of opening channels per iteration");
    app->add_option("--gamma", gamma, "Loss smoothness gamma (recommend)");
    app->add_option("--lambda", lambda, "Regularization (recommend, default 1/n)");
    app->add_option("--epsilon", epsilon, "Target accuracy (recommend)");
    app->add_option("--m-grid", m_grid, "Candidate batch sizes (recommend)");
    app->add_option("--out", out, "CSV path ('-' for stdout)");
  }

  int execute(std::ostream& out_stream, std::ostream&) const {
    ClusterSpec cluster{s, d, d_bar, n, channel_overhead};
    std::vector<CostEstimate> rows;
    if (mode == "table") {
      rows = cost_table(cluster, m);
    } else if (mode == "recommend") {
      RecommendQuery q;
      q.gamma = gamma;
      q.lambda = lambda.value_or(1.0 / static_cast<double>(n));
      q.epsilon = epsilon;
      q.batch_grid = parse_count_list(m_grid);
      rows = recommend(cluster, q);
    } else {
      throw std::invalid_argument("unknown --mode '" + mode + "' (expected table or recommend)");
    }
    OutputSink sink(out, out_stream);
    write_cost_csv(sink.get(), rows);
    return kSuccess;
  }
};

}  // namespace

SyntheticSpec parse_synthetic(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 5 && parts.size() != 6) {
    throw std::invalid_argument("--synthetic expects n,d,sparsity,noise,seed[,margin]");
  }
  SyntheticSpec spec;
  spec.n = to_count(parts[0]);
  spec.d = to_count(parts[1]);
  spec.sparsity = to_real(parts[2]);
  spec.label_noise = to_real(parts[3]);
  spec.seed = to_count(parts[4]);
  if (parts.size() == 6) spec.margin = to_real(parts[5]);
  spec.validate();
  return spec;
}

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& p : split(text, ',')) out.push_back(to_real(p));
  return out;
}

std::vector<std::size_t> parse_count_list(const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& p : split(text, ',')) out.push_back(to_count(p));
  return out;
}

std::vector<std::size_t> resolve_batch_sizes(const std::vector<double>& fractions, std::size_t n) {
  std::vector<std::size_t> ms;
  for (double f : fractions) ms.push_back(batch_from_fraction(f, n));
  std::sort(ms.begin(), ms.end());
  ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
  return ms;
}

TestMetrics evaluate_test_set(const Dataset& test, std::span<const double> x) {
  const ScalarLoss hinge(LossKind::SmoothedHinge);
  double loss = 0.0;
  double errors = 0.0;
  for (const auto& ex : test.examples()) {
    const double z = dot_truncated(x, ex.features);
    loss += hinge.value(z, ex.label);
    if (ex.label * z <= 0.0) errors += 1.0;
  }
  const double n = static_cast<double>(test.size());
  return TestMetrics{loss / n, errors / n};
}

void write_trace_csv(std::ostream& out, const SolverTrace& trace, std::optional<double> dual_optimum,
                     const std::vector<TestMetrics>* test_metrics) {
  out << "iteration,examples_processed,primal,dual,gap";
  if (dual_optimum) out << ",primal_subopt";
  if (test_metrics) out << ",test_smoothed_hinge,test_01";
  out << '\n';
  for (std::size_t k = 0; k < trace.records.size(); ++k) {
    const auto& r = trace.records[k];
    out << r.iteration << ',' << r.examples_processed << ',' << format_real(r.primal) << ','
        << format_real(r.dual) << ',' << format_real(r.gap);
    if (dual_optimum) out << ',' << format_real(r.primal - *dual_optimum);
    if (test_metrics && k < test_metrics->size()) {
      out << ',' << format_real((*test_metrics)[k].smoothed_hinge) << ','
          << format_real((*test_metrics)[k].zero_one);
    }
    out << '\n';
  }
}

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Accelerated mini-batch SDCA with SDCA and AGD baselines"};
  app.require_subcommand(1);

  RunCommand run_cmd;
  SweepCommand sweep_cmd;
  VerifyCommand verify_cmd;
  CostCommand cost_cmd;
  auto* run = app.add_subcommand("run", "Run one solver and write its trace as CSV");
  auto* sweep = app.add_subcommand("sweep", "Run SDCA, AGD and ASDCA over a range of batch sizes");
  auto* verify = app.add_subcommand("verify", "Check the convergence lemmas and theorem on built-in instances");
  auto* cost = app.add_subcommand("cost", "Query the parallel cost model");
  run_cmd.attach(run);
  sweep_cmd.attach(sweep);
  verify_cmd.attach(verify);
  cost_cmd.attach(cost);

  std::vector<const char*> argv{"asdca"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kInputError;
  }

  try {
    if (*run) return run_cmd.execute(out, err);
    if (*sweep) return sweep_cmd.execute(out, err);
    if (*verify) return verify_cmd.execute(out, err);
    if (*cost) return cost_cmd.execute(out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace asdca::cli
