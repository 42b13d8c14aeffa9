#include "asdca/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace asdca {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// t log t with the continuous extension at 0.
double xlogx(double t) { return t == 0.0 ? 0.0 : t * std::log(t); }

}  // namespace

bool ConjugateDomain::contains(double s, double slack) const {
  const bool above = lower_closed ? s >= lower - slack : s > lower - slack;
  const bool below = upper_closed ? s <= upper + slack : s < upper + slack;
  return above && below;
}

double ConjugateDomain::clamp(double s) const { return std::clamp(s, lower, upper); }

std::string_view ScalarLoss::name() const {
  switch (kind_) {
    case LossKind::SmoothedHinge: return "smoothed-hinge";
    case LossKind::Squared: return "squared";
    case LossKind::Logistic: return "logistic";
  }
  return "unknown";
}

bool ScalarLoss::label_valid(double y) const {
  if (!std::isfinite(y)) return false;
  return !is_margin_loss() || y == 1.0 || y == -1.0;
}

double ScalarLoss::value(double z, double y) const {
  switch (kind_) {
    case LossKind::SmoothedHinge: {
      const double t = y * z;
      if (t > 1.0) return 0.0;
      if (t < 0.0) return 0.5 - t;
      return 0.5 * (1.0 - t) * (1.0 - t);
    }
    case LossKind::Squared: return (z - y) * (z - y);
    case LossKind::Logistic: {
      const double m = -y * z;
      return m > 0.0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
    }
  }
  return 0.0;
}

double ScalarLoss::derivative(double z, double y) const {
  switch (kind_) {
    case LossKind::SmoothedHinge: {
      const double t = y * z;
      if (t > 1.0) return 0.0;
      if (t < 0.0) return -y;
      return -y * (1.0 - t);
    }
    case LossKind::Squared: return 2.0 * (z - y);
    case LossKind::Logistic: {
      const double t = y * z;
      if (t >= 0.0) {
        const double e = std::exp(-t);
        return -y * e / (1.0 + e);
      }
      return -y / (1.0 + std::exp(t));
    }
  }
  return 0.0;
}

double ScalarLoss::conjugate(double s, double y) const {
  switch (kind_) {
    case LossKind::SmoothedHinge: {
      const double t = y * s;
      if (t < -1.0 || t > 0.0) return kInf;
      return t + 0.5 * t * t;
    }
    case LossKind::Squared: return s * y + 0.25 * s * s;
    case LossKind::Logistic: {
      const double t = y * s;
      if (t < -1.0 || t > 0.0) return kInf;
      return xlogx(-t) + xlogx(1.0 + t);
    }
  }
  return kInf;
}

ConjugateDomain ScalarLoss::conjugate_domain(double y) const {
  if (kind_ == LossKind::Squared) return ConjugateDomain{-kInf, kInf, false, false};
  return y > 0.0 ? ConjugateDomain{-1.0, 0.0} : ConjugateDomain{0.0, 1.0};
}

double ScalarLoss::smoothness() const {
  switch (kind_) {
    case LossKind::SmoothedHinge: return 1.0;
    case LossKind::Squared: return 2.0;
    case LossKind::Logistic: return 0.25;
  }
  return 0.0;
}

ScalarLoss loss_from_name(std::string_view name) {
  if (name == "smoothed-hinge") return ScalarLoss(LossKind::SmoothedHinge);
  if (name == "squared") return ScalarLoss(LossKind::Squared);
  if (name == "logistic") return ScalarLoss(LossKind::Logistic);
  throw std::invalid_argument("unknown loss '" + std::string(name) +
                              "' (expected smoothed-hinge, squared or logistic)");
}

double smoothness_inverse_gamma(const ScalarLoss& loss, const Example& example) {
  return loss.smoothness() * example.features.squared_norm();
}

}  // namespace asdca
