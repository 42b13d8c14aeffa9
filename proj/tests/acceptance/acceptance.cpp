#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "asdca/costmodel.hpp"
#include "asdca/solvers.hpp"
#include "asdca/theory.hpp"
#include "oracles.hpp"

using namespace asdca;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

const LossKind kLosses[] = {LossKind::SmoothedHinge, LossKind::Squared, LossKind::Logistic};

// 1. Conjugates vs grid search, Fenchel-Young equality at gradients.
Outcome conjugate_correctness() {
  double worst_grid = 0.0, worst_fy = 0.0;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> zdist(-20.0, 20.0);
  std::uniform_real_distribution<double> ydist(-2.0, 2.0);
  for (auto kind : kLosses) {
    const ScalarLoss loss(kind);
    for (double y : {1.0, -1.0}) {
      for (int k = 0; k <= 20; ++k) {
        const double s = loss.is_margin_loss() ? -y * k / 20.0 : -8.0 + 0.8 * k;
        const double grid = static_cast<double>(oracle::grid_conjugate(kind, s, y));
        worst_grid = std::max(worst_grid, std::abs(loss.conjugate(s, y) - grid));
      }
    }
    for (int k = 0; k < 10000; ++k) {
      const double z = zdist(rng);
      const double y = loss.is_margin_loss() ? ((rng() & 1) ? 1.0 : -1.0) : ydist(rng);
      const double g = loss.derivative(z, y);
      worst_fy = std::max(worst_fy, std::abs(loss.conjugate(g, y) - (g * z - loss.value(z, y))));
    }
  }
  return {worst_grid <= 2e-4 && worst_fy <= 1e-10,
          fmt("grid max err %.2e (tol 2e-4), Fenchel-Young max err %.2e (tol 1e-10)", worst_grid, worst_fy)};
}

struct LemmaState {
  std::shared_ptr<const Dataset> data;
  Problem problem;
  AsdcaIterate iterate;
  std::size_t m;
  double theta;
};

// 20 mid-optimization states, n = 6, d = 3, smoothed hinge.
std::vector<LemmaState> lemma_states() {
  std::vector<LemmaState> out;
  for (std::uint64_t k = 0; k < 20; ++k) {
    auto data = std::make_shared<const Dataset>(generate_synthetic({6, 3, 1.0, 0.2, 0.0, 50 + k / 3}));
    auto problem = make_problem(data, ScalarLoss(LossKind::SmoothedHinge));
    const std::size_t m = 1 + k % 3;
    const double theta = compute_theta(problem.gamma, problem.lambda, 6, m);
    out.push_back({data, problem, AsdcaIterate(problem), m, theta});
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    auto& s = out[k];
    s.iterate = AsdcaIterate(s.problem);
    SubsetSampler sampler(6, s.m);
    Rng rng(900 + k);
    for (std::size_t t = 0; t < 1 + 3 * k; ++t) s.iterate.step(s.theta, sampler.draw(rng));
  }
  return out;
}

// 2. Expected drift identity by exhaustive enumeration.
Outcome lemma1_exact() {
  double worst_oracle = 0.0, worst_harness = 0.0;
  for (auto& s : lemma_states()) {
    const auto ref = oracle::from_scalar_state(s.data, LossKind::SmoothedHinge, s.problem.lambda, s.iterate.x(),
                                               s.iterate.dual());
    worst_oracle = std::max(worst_oracle, oracle::measure_lemmas(ref, s.theta, s.m).drift_error);
    worst_harness = std::max(worst_harness, verify_lemma1(s.iterate, s.theta, s.m).measured);
  }
  return {worst_oracle <= 1e-12 && worst_harness <= 1e-12,
          fmt("20 states, max |E drift - prediction| oracle %.2e, harness %.2e (tol 1e-12)", worst_oracle,
              worst_harness)};
}

// 3. Variance bound on the same states.
Outcome lemma2_exact() {
  double min_slack = INFINITY;
  bool harness_ok = true;
  for (auto& s : lemma_states()) {
    const auto ref = oracle::from_scalar_state(s.data, LossKind::SmoothedHinge, s.problem.lambda, s.iterate.x(),
                                               s.iterate.dual());
    const auto meas = oracle::measure_lemmas(ref, s.theta, s.m);
    min_slack = std::min(min_slack, meas.variance_bound - meas.variance);
    harness_ok = harness_ok && verify_lemma2(s.iterate, s.theta, s.m).passed;
  }
  return {min_slack >= -1e-12 && harness_ok, fmt("20 states, min slack (bound - variance) %.3e (tol -1e-12)", min_slack)};
}

// 4. Mean potential decay over 200 seeds.
Outcome theorem1_decay() {
  const auto data = std::make_shared<const Dataset>(generate_synthetic({32, 8, 1.0, 0.1, 0.0, 3}));
  const auto problem = make_problem(data, ScalarLoss(LossKind::SmoothedHinge));
  const auto ref = solve_reference(problem, 1e-12);
  const double dstar = ref.dual;
  const std::vector<std::size_t> checkpoints{10, 20, 40};
  bool ok = true;
  double worst_ratio = 0.0;
  for (std::size_t m : {1, 4, 8}) {
    const double theta = compute_theta(problem.gamma, problem.lambda, 32, m);
    auto potential = [&](const AsdcaIterate& it) {
      const auto x = it.x();
      return double(m) * static_cast<double>(oracle::primal(*data, LossKind::SmoothedHinge, problem.lambda, x) - dstar) +
             32.0 * (dstar - dual_value(problem, it.dual()));
    };
    const double initial = potential(AsdcaIterate(problem));
    std::vector<double> sums(checkpoints.size(), 0.0);
    for (std::size_t seed = 0; seed < 200; ++seed) {
      AsdcaIterate it(problem);
      SubsetSampler sampler(32, m);
      Rng rng(5000 + seed);
      for (std::size_t t = 1; t <= checkpoints.back(); ++t) {
        it.step(theta, sampler.draw(rng));
        for (std::size_t k = 0; k < checkpoints.size(); ++k) {
          if (checkpoints[k] == t) sums[k] += potential(it);
        }
      }
    }
    for (std::size_t k = 0; k < checkpoints.size(); ++k) {
      const double bound = std::pow(1.0 - theta * double(m) / 32.0, double(checkpoints[k])) * initial;
      const double ratio = sums[k] / 200.0 / bound;
      worst_ratio = std::max(worst_ratio, ratio);
      ok = ok && ratio <= 1.2;
    }
    for (const auto& e : verify_theorem1(problem, m, std::nullopt, dstar)) ok = ok && e.passed;
  }
  return {ok, fmt("m in {1,4,8}, t in {10,20,40}: max mean potential / decay bound %.3f (limit 1.2); reference gap %.1e",
                  worst_ratio, ref.primal - ref.dual)};
}

struct SweepData {
  std::shared_ptr<const Dataset> data;
  Problem problem;
  double dstar = 0.0;
  std::vector<SolverTrace> asdca;  // m = 1, 20, 200
  SolverTrace sdca;
  SolverTrace agd;
  double seconds_asdca = 0.0;
};

const std::vector<std::size_t> kSweepBatches{1, 20, 200};

const SweepData& sweep() {
  static const SweepData s = [] {
    SweepData out;
    out.data = std::make_shared<const Dataset>(generate_synthetic({2000, 50, 0.5, 0.0, 0.0, 42}));
    out.problem = make_problem(out.data, ScalarLoss(LossKind::SmoothedHinge));
    out.dstar = solve_reference(out.problem, 1e-12).dual;
    const RunOptions opts{out.dstar, {}};
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t m : kSweepBatches) {
      SolverConfig cfg;
      cfg.batch_size = m;
      cfg.gap_tolerance = 1e-6;
      cfg.max_iterations = 100000000;
      out.asdca.push_back(run_asdca(out.problem, cfg, opts));
    }
    out.seconds_asdca = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    SolverConfig sc;
    sc.algorithm = Algorithm::SDCA;
    sc.max_iterations = 100000000;
    out.sdca = run_sdca(out.problem, sc, opts);
    SolverConfig ac;
    ac.algorithm = Algorithm::AGD;
    out.agd = run_agd(out.problem, ac, opts);
    return out;
  }();
  return s;
}

// 5. ASDCA linear convergence within the iteration bound.
Outcome linear_convergence() {
  const auto& s = sweep();
  const double n = 2000.0;
  bool ok = s.seconds_asdca < 120.0;
  std::string detail;
  for (std::size_t k = 0; k < kSweepBatches.size(); ++k) {
    const auto& tr = s.asdca[k];
    const double m = double(kSweepBatches[k]);
    const double pot0 = tr.records.front().potential;
    const double bound = 50.0 * (n / m) / tr.theta * std::log(pot0 / (m * 1e-6));
    const double used = double(tr.records.back().iteration);
    const bool this_ok = tr.converged && tr.records.back().gap <= 1e-6 && used <= bound;
    ok = ok && this_ok;
    detail += fmt("m=%g: %g iters (bound %.3g) gap %.1e; ", m, used, bound, tr.records.back().gap);
  }
  detail += fmt("ASDCA runtime %.2fs (limit 120s)", s.seconds_asdca);
  return {ok, detail};
}

// 6. SDCA coordinate maximizer and dual monotonicity.
Outcome sdca_update() {
  double worst = 0.0;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto kind : kLosses) {
    const ScalarLoss loss(kind);
    for (int k = 0; k < 1000; ++k) {
      const double y = kind == LossKind::Squared ? u(rng) * 4 - 2 : (u(rng) < 0.5 ? 1.0 : -1.0);
      const double c0 = kind == LossKind::Squared ? u(rng) * 6 - 3 : y * u(rng);
      const double margin = (u(rng) * 2 - 1) * 3;
      const double curv = std::pow(10.0, u(rng) * 4 - 2);
      const double got = sdca_coordinate_maximizer(loss, c0, margin, curv, y);
      worst = std::max(worst, std::abs(got - static_cast<double>(oracle::sdca_coordinate_oracle(kind, c0, margin, curv, y))));
    }
  }
  double worst_drop = 0.0;
  std::size_t steps = 0;
  const auto data = std::make_shared<const Dataset>(generate_synthetic({200, 20, 0.5, 0.1, 0.0, 8}));
  for (auto kind : kLosses) {
    const auto problem = make_problem(data, ScalarLoss(kind));
    SolverConfig cfg;
    cfg.algorithm = Algorithm::SDCA;
    cfg.checkpoint_every = 1;
    cfg.max_iterations = 20000;
    cfg.gap_tolerance = 1e-13;
    const auto tr = run_sdca(problem, cfg);
    for (std::size_t k = 1; k < tr.records.size(); ++k) {
      worst_drop = std::min(worst_drop, tr.records[k].dual - tr.records[k - 1].dual);
      ++steps;
    }
  }
  return {worst <= 1e-8 && worst_drop >= -1e-12,
          fmt("max |closed form - golden section| %.2e (tol 1e-8) over 3000 states; min dD %.2e over %g steps (tol -1e-12)",
              worst, worst_drop, double(steps))};
}

// 7. Interpolation ordering at the final common checkpoint.
Outcome interpolation_ordering() {
  const auto& s = sweep();
  const std::vector<const SolverTrace*> chain{&s.sdca, &s.asdca[1], &s.asdca[2], &s.agd};
  std::size_t common = SIZE_MAX;
  for (const auto* tr : chain) common = std::min(common, tr->records.back().examples_processed);
  std::vector<double> subopt;
  for (const auto* tr : chain) {
    const TraceRecord* hit = nullptr;
    for (const auto& r : tr->records) {
      if (r.examples_processed == common) hit = &r;
    }
    if (!hit) return {false, fmt("no record at examples_processed %g", double(common))};
    subopt.push_back(hit->primal - s.dstar);
  }
  bool ok = true;
  for (std::size_t k = 0; k + 1 < subopt.size(); ++k) ok = ok && subopt[k] <= 1.1 * subopt[k + 1];
  return {ok, fmt("at %g examples: SDCA %.2e <= ASDCA(20) %.2e <= ASDCA(200) %.2e", double(common), subopt[0],
                  subopt[1], subopt[2]) +
                  fmt(" <= AGD %.2e (10%% slack)", subopt[3])};
}

// 8. Scalar-coefficient ASDCA vs the full-vector pseudocode.
Outcome reference_equivalence() {
  double worst = 0.0;
  int instances = 0;
  for (auto kind : kLosses) {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      const std::size_t n = 3 + seed % 6;
      const std::size_t d = 1 + seed % 4;
      const auto data = oracle::random_dataset(n, d, kind, 700 + seed);
      const auto problem = make_problem(data, ScalarLoss(kind), 0.05 + 0.1 * double(seed));
      const std::size_t m = 1 + seed % n;
      const double theta = compute_theta(problem.gamma, problem.lambda, n, m);
      AsdcaIterate it(problem);
      oracle::FullVectorAsdca ref(data, kind, problem.lambda);
      SubsetSampler sampler(n, m);
      Rng rng(seed);
      for (int t = 0; t < 100; ++t) {
        const auto b = sampler.draw(rng);
        const std::vector<std::size_t> batch(b.begin(), b.end());
        it.step(theta, batch);
        ref.step(theta, batch);
        const auto x = it.x();
        for (std::size_t j = 0; j < d; ++j) {
          worst = std::max(worst, std::abs(x[j] - ref.x[j]));
          worst = std::max(worst, std::abs(it.dual().alpha_bar[j] - ref.alpha_bar[j]));
        }
        for (std::size_t i = 0; i < n; ++i) {
          const auto v = ref.dense(i);
          for (std::size_t j = 0; j < d; ++j) worst = std::max(worst, std::abs(it.dual().coeffs[i] * v[j] - ref.alpha[i][j]));
        }
      }
      ++instances;
    }
  }
  return {worst <= 1e-12, fmt("%g instances x 100 steps, max entrywise diff %.2e (tol 1e-12)", double(instances), worst)};
}

// 9. Cost-model cells, s = 1, dominating-factor identity.
Outcome cost_model_table() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_cell = 0.0;
  for (int k = 0; k < 10; ++k) {
    const std::size_t s = 2 + rng() % 127;
    const std::size_t d = 100 + rng() % 100000;
    const double dbar = 1.0 + u(rng) * 99.0;
    const std::size_t n = 1000 + rng() % 1000000;
    const std::size_t m = 1 + rng() % 1000;
    const ClusterSpec c{s, d, dbar, n, 0.0};
    const double S = double(s), l = std::log2(S), l2 = l * l;
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
    const auto e1 = iteration_cost(Algorithm::SDCA, Partition::Features, c);
    const auto e2 = iteration_cost(Algorithm::ASDCA, Partition::Features, c, m);
    const auto e3 = iteration_cost(Algorithm::ASDCA, Partition::Examples, c, m);
    const auto e4 = iteration_cost(Algorithm::AGD, Partition::Examples, c);
    for (double e : {rel(e1.runtime_units, dbar / S), rel(e1.comm_units, S * l2), rel(e2.runtime_units, dbar * m / S),
                     rel(e2.comm_units, m * S * l2), rel(e3.runtime_units, dbar * m / S), rel(e3.comm_units, d * l),
                     rel(e4.runtime_units, dbar * n / S), rel(e4.comm_units, d * l)}) {
      worst_cell = std::max(worst_cell, e);
    }
  }
  double single_comm = 0.0;
  for (const auto& row : cost_table({1, 1000, 10, 10000, 0}, 32)) single_comm = std::max(single_comm, row.comm_units);
  double worst_identity = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = 1 + static_cast<std::size_t>(std::pow(10.0, 6 * u(rng)));
    const std::size_t m = 1 + static_cast<std::size_t>(u(rng) * double(n - 1));
    const double gamma = std::pow(10.0, 8 * u(rng) - 4);
    const double lambda = std::pow(10.0, 8 * u(rng) - 6);
    const double prod = dominating_factor(n, m, gamma, lambda) * compute_theta(gamma, lambda, n, m) * double(m) / double(n);
    worst_identity = std::max(worst_identity, std::abs(prod - 0.25));
  }
  return {worst_cell <= 1e-12 && single_comm == 0.0 && worst_identity <= 1e-12,
          fmt("max rel cell err %.2e at 10 settings; comm at s=1 %g; max |factor*theta*m/n - 1/4| %.2e (tol 1e-12)",
              worst_cell, single_comm, worst_identity)};
}

// 10. n / sqrt(m) law of the complexity tables at gamma lambda n = 1.
Outcome table_ratios() {
  double worst_it = 0.0, worst_ex = 0.0;
  for (std::size_t n : {1000, 100000, 10000000}) {
    for (std::size_t m = 1; 4 * m <= n; m *= 3) {
      const auto a = iteration_table({n, m, 1.0});
      const auto b = iteration_table({n, 4 * m, 1.0});
      worst_it = std::max(worst_it, std::abs(a.asdca / b.asdca - 2.0));
      const auto ea = examples_processed_table({n, m, 1.0});
      const auto eb = examples_processed_table({n, 4 * m, 1.0});
      worst_ex = std::max(worst_ex, std::abs(ea.asdca / eb.asdca - 0.5));
    }
  }
  return {worst_it <= 1e-9 && worst_ex <= 1e-9,
          fmt("max |iter(m)/iter(4m) - 2| %.2e, max |examples(m)/examples(4m) - 1/2| %.2e (tol 1e-9)", worst_it,
              worst_ex)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double time_limit;  // seconds, 0 for none
    std::function<Outcome()> fn;
  };
  const std::vector<Criterion> criteria{
      {1, "conjugate correctness", 5.0, conjugate_correctness},
      {2, "expected drift identity", 1.0, lemma1_exact},
      {3, "variance bound", 1.0, lemma2_exact},
      {4, "potential decay", 60.0, theorem1_decay},
      {5, "linear convergence", 0.0, linear_convergence},
      {6, "SDCA update correctness", 0.0, sdca_update},
      {7, "interpolation ordering", 0.0, interpolation_ordering},
      {8, "reference-implementation equivalence", 0.0, reference_equivalence},
      {9, "cost-model table", 0.0, cost_model_table},
      {10, "complexity table ratios", 0.0, table_ratios},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.time_limit > 0.0 && secs >= c.time_limit) {
      o.passed = false;
      o.detail += fmt(" [runtime %.2fs exceeds %gs]", secs, c.time_limit);
    }
    if (!o.passed) ++failures;
    std::printf("%s criterion %d (%s): %s (%.2fs)\n", o.passed ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu acceptance criteria passed\n", int(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
