#pragma once

#include <string>
#include <string_view>

#include "asdca/data.hpp"

namespace asdca {

enum class LossKind { SmoothedHinge, Squared, Logistic };

/// Interval of s where the conjugate is finite.
struct ConjugateDomain {
  double lower;
  double upper;
  bool lower_closed = true;
  bool upper_closed = true;

  bool contains(double s, double slack = 0.0) const;
  /// Nearest point of the closed interval.
  double clamp(double s) const;
};

/// Scalar loss l(z, y) of a linear margin z = <x, v>.
///
/// Margin losses (smoothed hinge, logistic) expect y in {-1, +1} and fold
/// the label through l_y(z) = l_1(y z), so l_y*(s) = l_1*(y s). The squared
/// loss is (z - y)^2 for any real y.
class ScalarLoss {
 public:
  constexpr explicit ScalarLoss(LossKind kind = LossKind::SmoothedHinge) : kind_(kind) {}

  LossKind kind() const { return kind_; }
  std::string_view name() const;
  bool is_margin_loss() const { return kind_ != LossKind::Squared; }
  bool label_valid(double y) const;

  double value(double z, double y) const;
  double derivative(double z, double y) const;

  /// Fenchel conjugate in the scalar argument; +infinity outside the domain.
  double conjugate(double s, double y) const;
  ConjugateDomain conjugate_domain(double y) const;

  /// Scalar second-derivative bound L (l is L-smooth in z).
  double smoothness() const;

  bool operator==(const ScalarLoss&) const = default;

 private:
  LossKind kind_;
};

/// "smoothed-hinge" | "squared" | "logistic". Throws std::invalid_argument.
ScalarLoss loss_from_name(std::string_view name);

/// L * ||v||^2, the reciprocal of the per-example smoothness gamma_i of
/// phi_i(x) = l(<x, v>, y) in the Euclidean norm.
double smoothness_inverse_gamma(const ScalarLoss& loss, const Example& example);

}  // namespace asdca
