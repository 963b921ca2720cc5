#include "dualcast/utility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dualcast/errors.hpp"

namespace dualcast {

LogUtility::LogUtility(double a, double b) : a_(a), b_(b) {
  if (!(a > 0.0) || !std::isfinite(a))
    throw std::invalid_argument("LogUtility: scale a must be positive");
  if (!(b > 0.0) || !std::isfinite(b))
    throw std::invalid_argument("LogUtility: shift b must be positive");
}

double LogUtility::value(Power q) const { return a_ * std::log(b_ + q); }

Price LogUtility::derivative(Power q) const { return a_ / (b_ + q); }

Power LogUtility::inverse_derivative(Price p) const { return a_ / p - b_; }

std::optional<Curvature> LogUtility::closed_form_curvature(Power m,
                                                           Power M) const {
  // -U''(q) = a/(b+q)^2 is decreasing in q, so the extremes sit at the
  // interval endpoints.
  const double mu = a_ / ((b_ + M) * (b_ + M));
  const double ls = a_ / ((b_ + m) * (b_ + m));
  return Curvature{mu, ls};
}

CallableUtility::CallableUtility(Fn value, Fn derivative,
                                 Fn inverse_derivative, bool twice_diff)
    : value_(std::move(value)),
      derivative_(std::move(derivative)),
      inverse_(std::move(inverse_derivative)),
      twice_diff_(twice_diff) {}

Curvature curvature_on_interval(const UtilityModel& model, Power m, Power M) {
  if (!(m < M))
    throw std::invalid_argument(
        "curvature_on_interval: interval must satisfy m < M");
  if (auto closed = model.closed_form_curvature(m, M)) return *closed;
  if (!model.twice_differentiable())
    throw UnsupportedError(
        "curvature_on_interval: model is not twice differentiable on the "
        "interval");

  // Grid estimate of -U'' via central differences of U'. The stencil stays
  // inside [m, M] by half a step at each end.
  constexpr int kGridPoints = 100000;
  const double h = (M - m) * 1e-6;
  double mu = std::numeric_limits<double>::infinity();
  double ls = 0.0;
  for (int j = 0; j < kGridPoints; ++j) {
    const double q =
        m + h + (M - m - 2.0 * h) * static_cast<double>(j) / (kGridPoints - 1);
    const double second = (model.derivative(q + h) - model.derivative(q - h)) /
                          (2.0 * h);
    const double neg_second = -second;
    mu = std::min(mu, neg_second);
    ls = std::max(ls, neg_second);
  }
  if (!(mu > 0.0) || !(mu <= ls))
    throw UnsupportedError(
        "curvature_on_interval: model is not strongly concave on the "
        "interval");
  return Curvature{mu, ls};
}

UserProfile::UserProfile(int id, std::shared_ptr<const UtilityModel> utility,
                         Power m, Power M)
    : id_(id), utility_(std::move(utility)), m_(m), M_(M) {
  if (!utility_) throw std::invalid_argument("UserProfile: null utility");
  if (!(m >= 0.0))
    throw std::invalid_argument("UserProfile: lower bound m must be >= 0");
  if (!(m < M) || !std::isfinite(M))
    throw std::invalid_argument("UserProfile: bounds must satisfy m < M");
  p_lo_ = utility_->derivative(M_);
  p_hi_ = utility_->derivative(m_);
  if (!(p_lo_ < p_hi_))
    throw std::invalid_argument(
        "UserProfile: derivative must be strictly decreasing on [m, M]");
  curvature_ = curvature_on_interval(*utility_, m_, M_);
}

Power demand(const UserProfile& user, Price p) {
  if (p < 0.0 || std::isnan(p))
    throw std::domain_error("demand: price must be >= 0");
  // Saturated regions are answered from the stored breakpoints so they are
  // exactly flat; this also covers the p = 0 limit convention (p_lo > 0).
  if (p <= user.p_lo()) return user.M();
  if (p >= user.p_hi()) return user.m();
  const Power unclamped = user.utility().inverse_derivative(p);
  return std::clamp(unclamped, user.m(), user.M());
}

std::pair<Price, Price> breakpoints(const UserProfile& user) {
  return {user.p_lo(), user.p_hi()};
}

UserProfile make_log_user(int id, double a, double b, Power m, Power M) {
  return UserProfile(id, std::make_shared<LogUtility>(a, b), m, M);
}

}  // namespace dualcast
