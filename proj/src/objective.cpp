#include "asdca/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace asdca {

void CompensatedSum::add(double v) {
  const double t = sum_ + v;
  if (std::abs(sum_) >= std::abs(v)) {
    carry_ += (sum_ - t) + v;
  } else {
    carry_ += (v - t) + sum_;
  }
  sum_ = t;
}

Problem make_problem(std::shared_ptr<const Dataset> data, ScalarLoss loss,
                     std::optional<double> lambda) {
  if (!data) throw std::invalid_argument("make_problem: null dataset");
  const double lam = lambda.value_or(1.0 / static_cast<double>(data->size()));
  if (!(lam > 0.0) || !std::isfinite(lam)) {
    throw std::invalid_argument("make_problem: lambda must be positive and finite");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < data->size(); ++i) {
    const auto& ex = (*data)[i];
    if (!loss.label_valid(ex.label)) {
      throw std::invalid_argument("make_problem: label of example " + std::to_string(i) +
                                  " is not valid for the " + std::string(loss.name()) + " loss");
    }
    worst = std::max(worst, smoothness_inverse_gamma(loss, ex));
  }
  if (worst == 0.0) {
    throw std::invalid_argument("make_problem: every example is the zero vector");
  }
  return Problem{std::move(data), loss, lam, 1.0 / worst};
}

DualState DualState::zeros(const Problem& problem) {
  return DualState{std::vector<double>(problem.n(), 0.0),
                   std::vector<double>(problem.dim(), 0.0)};
}

DualState DualState::from_coeffs(const Problem& problem, std::vector<double> coeffs) {
  if (coeffs.size() != problem.n()) {
    throw std::invalid_argument("DualState: need one coefficient per example");
  }
  DualState dual{std::move(coeffs), std::vector<double>(problem.dim(), 0.0)};
  recompute_alpha_bar(problem, dual);
  return dual;
}

double primal_value(const Problem& problem, std::span<const double> x) {
  const auto& data = *problem.data;
  CompensatedSum loss_sum;
  for (const auto& ex : data.examples()) {
    loss_sum.add(problem.loss.value(dot(x, ex.features), ex.label));
  }
  CompensatedSum sq;
  for (double v : x) sq.add(v * v);
  return loss_sum.value() / static_cast<double>(data.size()) +
         0.5 * problem.lambda * sq.value();
}

double dual_value(const Problem& problem, const DualState& dual) {
  const auto& data = *problem.data;
  CompensatedSum conj_sum;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& ex = data[i];
    if (ex.features.empty()) {
      conj_sum.add(problem.loss.value(0.0, ex.label));
      continue;
    }
    const double c = problem.loss.conjugate(-dual.coeffs[i], ex.label);
    if (!std::isfinite(c)) return -std::numeric_limits<double>::infinity();
    conj_sum.add(-c);
  }
  CompensatedSum sq;
  for (double v : dual.alpha_bar) sq.add(v * v);
  return conj_sum.value() / static_cast<double>(data.size()) -
         sq.value() / (2.0 * problem.lambda);
}

double duality_gap(const Problem& problem, std::span<const double> x, const DualState& dual) {
  const double d = dual_value(problem, dual);
  if (d == -std::numeric_limits<double>::infinity()) {
    return std::numeric_limits<double>::infinity();
  }
  return primal_value(problem, x) - d;
}

bool dual_feasible(const Problem& problem, const DualState& dual) {
  const auto& data = *problem.data;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!problem.loss.conjugate_domain(data[i].label).contains(-dual.coeffs[i])) return false;
  }
  return true;
}

double recompute_alpha_bar(const Problem& problem, DualState& dual) {
  const auto& data = *problem.data;
  const double inv_n = 1.0 / static_cast<double>(data.size());
  std::vector<double> exact(problem.dim(), 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (dual.coeffs[i] != 0.0) axpy_sparse(dual.coeffs[i] * inv_n, data[i].features, exact);
  }
  double drift = 0.0;
  if (dual.alpha_bar.size() == exact.size()) {
    for (std::size_t j = 0; j < exact.size(); ++j) {
      drift = std::max(drift, std::abs(exact[j] - dual.alpha_bar[j]));
    }
  } else {
    drift = std::numeric_limits<double>::infinity();
  }
  dual.alpha_bar = std::move(exact);
  return drift;
}

std::vector<double> loss_gradient(const Problem& problem, std::span<const double> x) {
  const auto& data = *problem.data;
  const double inv_n = 1.0 / static_cast<double>(data.size());
  std::vector<double> grad(problem.dim(), 0.0);
  for (const auto& ex : data.examples()) {
    const double g = problem.loss.derivative(dot(x, ex.features), ex.label);
    if (g != 0.0) axpy_sparse(g * inv_n, ex.features, grad);
  }
  return grad;
}

std::vector<double> primal_gradient(const Problem& problem, std::span<const double> x) {
  auto grad = loss_gradient(problem, x);
  for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += problem.lambda * x[j];
  return grad;
}

}  // namespace asdca
