#ifndef DUALCAST_UTILITY_HPP
#define DUALCAST_UTILITY_HPP

#include <functional>
#include <memory>
#include <optional>
#include <utility>

namespace dualcast {

using Price = double;
using Power = double;

// Curvature bounds of a utility on an interval: mu is the strong-concavity
// modulus (min of -U''), lsmooth the gradient Lipschitz constant (max of
// -U''). Always 0 < mu <= lsmooth.
struct Curvature {
  double mu = 0.0;
  double lsmooth = 0.0;
};

// A user's private utility over its allocation q >= 0. Implementations must
// be strictly increasing with strictly decreasing derivative on their stated
// domain, so the inverse derivative is well defined for prices in
// (0, derivative(domain minimum)]. inverse_derivative may return +infinity
// for prices below the derivative's infimum; callers clamp.
//
// Instances are immutable after construction and safe to share across
// threads.
class UtilityModel {
 public:
  virtual ~UtilityModel() = default;

  virtual double value(Power q) const = 0;
  virtual Price derivative(Power q) const = 0;
  virtual Power inverse_derivative(Price p) const = 0;

  // Closed-form curvature bounds on [m, M] when the family has them.
  virtual std::optional<Curvature> closed_form_curvature(Power /*m*/,
                                                         Power /*M*/) const {
    return std::nullopt;
  }

  // Models that cannot expose a second derivative (even numerically) return
  // false and are rejected by curvature estimation.
  virtual bool twice_differentiable() const { return true; }
};

// U(q) = a*log(b + q) with a > 0, b > 0. Increasing and strongly concave on
// q > -b; on [m, M] the curvature extremes are mu = a/(b+M)^2 and
// lsmooth = a/(b+m)^2.
class LogUtility final : public UtilityModel {
 public:
  LogUtility(double a, double b);

  double value(Power q) const override;
  Price derivative(Power q) const override;      // a/(b+q)
  Power inverse_derivative(Price p) const override;  // a/p - b
  std::optional<Curvature> closed_form_curvature(Power m,
                                                 Power M) const override;

  double a() const { return a_; }
  double b() const { return b_; }

 private:
  double a_;
  double b_;
};

// Adapter for ad-hoc twice-differentiable models given as callables. Has no
// closed-form curvature, so curvature_on_interval falls back to the grid
// estimate; mainly used to exercise that path.
class CallableUtility final : public UtilityModel {
 public:
  using Fn = std::function<double(double)>;
  CallableUtility(Fn value, Fn derivative, Fn inverse_derivative,
                  bool twice_diff = true);

  double value(Power q) const override { return value_(q); }
  Price derivative(Power q) const override { return derivative_(q); }
  Power inverse_derivative(Price p) const override { return inverse_(p); }
  bool twice_differentiable() const override { return twice_diff_; }

 private:
  Fn value_, derivative_, inverse_;
  bool twice_diff_;
};

// Curvature bounds of -U'' on [m, M]: the model's closed form when provided,
// otherwise central finite differences of U' over a uniform grid
// (1e5 points, step (M-m)*1e-6). Requires m < M and a twice-differentiable
// model.
Curvature curvature_on_interval(const UtilityModel& model, Power m, Power M);

// One user's private data: utility, allocation bounds [m, M] with m < M,
// and the derived price breakpoints p_lo = U'(M), p_hi = U'(m) at which the
// demand saturates. Immutable after construction.
class UserProfile {
 public:
  UserProfile(int id, std::shared_ptr<const UtilityModel> utility, Power m,
              Power M);

  int id() const { return id_; }
  const UtilityModel& utility() const { return *utility_; }
  std::shared_ptr<const UtilityModel> utility_ptr() const { return utility_; }
  Power m() const { return m_; }
  Power M() const { return M_; }
  Price p_lo() const { return p_lo_; }
  Price p_hi() const { return p_hi_; }
  const Curvature& curvature() const { return curvature_; }

 private:
  int id_;
  std::shared_ptr<const UtilityModel> utility_;
  Power m_;
  Power M_;
  Price p_lo_;
  Price p_hi_;
  Curvature curvature_;
};

// Demand response: the allocation in [m, M] maximizing U(q) - p*q, i.e.
// clamp((U')^-1(p), m, M). Nonincreasing in p; equals M for p <= p_lo and
// m for p >= p_hi. p must be >= 0; p = 0 returns M (limit convention: the
// inverse derivative diverges as p -> 0+, so the clamp at M is forced).
Power demand(const UserProfile& user, Price p);

// The saturation prices (p_lo, p_hi) = (U'(M), U'(m)), p_lo < p_hi.
std::pair<Price, Price> breakpoints(const UserProfile& user);

// Convenience: profile with a LogUtility.
UserProfile make_log_user(int id, double a, double b, Power m, Power M);

}  // namespace dualcast

#endif  // DUALCAST_UTILITY_HPP
