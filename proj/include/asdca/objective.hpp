#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "asdca/data.hpp"
#include "asdca/losses.hpp"

namespace asdca {

/// Regularized loss minimization instance
///   P(x) = (1/n) sum_i l(<x, v_i>, y_i) + (lambda/2) ||x||^2.
struct Problem {
  std::shared_ptr<const Dataset> data;
  ScalarLoss loss;
  double lambda = 0.0;
  double gamma = 0.0;  // 1 / max_i (L ||v_i||^2)

  std::size_t n() const { return data->size(); }
  std::size_t dim() const { return data->dim(); }
};

/// Validates labels against the loss and derives gamma. lambda defaults to
/// 1/n. Throws std::invalid_argument on bad labels, lambda <= 0, or when
/// every example is the zero vector.
Problem make_problem(std::shared_ptr<const Dataset> data, ScalarLoss loss,
                     std::optional<double> lambda = std::nullopt);

/// Dual columns alpha_i = c_i v_i stored through their scalar coefficients,
/// with the running average alpha_bar = (1/n) sum_i alpha_i.
struct DualState {
  std::vector<double> coeffs;
  std::vector<double> alpha_bar;

  static DualState zeros(const Problem& problem);
  /// alpha_bar computed exactly from the coefficients.
  static DualState from_coeffs(const Problem& problem, std::vector<double> coeffs);
};

double primal_value(const Problem& problem, std::span<const double> x);

/// (1/n) sum_i -l*(-c_i, y_i) - ||alpha_bar||^2 / (2 lambda). Zero examples
/// contribute l(0, y_i) since their conjugate is an indicator at the origin.
/// Returns -infinity when some -c_i leaves the conjugate domain.
double dual_value(const Problem& problem, const DualState& dual);

double duality_gap(const Problem& problem, std::span<const double> x, const DualState& dual);

bool dual_feasible(const Problem& problem, const DualState& dual);

/// Replaces alpha_bar with (1/n) sum_i c_i v_i; returns the infinity-norm of
/// the correction.
double recompute_alpha_bar(const Problem& problem, DualState& dual);

/// grad f(x) = (1/n) sum_i l'(<x, v_i>, y_i) v_i (loss part only).
std::vector<double> loss_gradient(const Problem& problem, std::span<const double> x);

/// grad P(x) = grad f(x) + lambda x.
std::vector<double> primal_gradient(const Problem& problem, std::span<const double> x);

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v);
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace asdca
