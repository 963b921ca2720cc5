#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "dualcast/analysis.hpp"
#include "dualcast/dual.hpp"
#include "dualcast/errors.hpp"
#include "dualcast/oracle.hpp"
#include "test_helpers.hpp"

using namespace dualcast;

namespace {

ProblemInstance two_user_preset_instance() {
  std::vector<UserProfile> users;
  users.push_back(make_log_user(0, 20.0, 1.0, 0.0, 4.0));
  users.push_back(make_log_user(1, 20.0, 1.0, 0.0, 4.0));
  return ProblemInstance(std::move(users), 1.6);
}

}  // namespace

TEST_CASE("instance validation") {
  std::vector<UserProfile> users;
  users.push_back(make_log_user(0, 20.0, 1.0, 1.0, 4.0));
  users.push_back(make_log_user(1, 20.0, 1.0, 1.0, 4.0));

  CHECK_THROWS_AS(ProblemInstance(users, 1.0), InfeasibleInstanceError);
  CHECK_THROWS_AS(ProblemInstance(users, 9.0), InfeasibleInstanceError);
  CHECK_NOTHROW(ProblemInstance(users, 2.0));   // boundary: sum of m
  CHECK_NOTHROW(ProblemInstance(users, 8.0));   // boundary: sum of M
  CHECK_THROWS_AS(ProblemInstance({}, 1.0), std::invalid_argument);

  users.push_back(make_log_user(1, 5.0, 1.0, 0.0, 1.0));  // duplicate id
  CHECK_THROWS_AS(ProblemInstance(users, 3.0), std::invalid_argument);
}

TEST_CASE("instance curvature aggregates over users") {
  std::vector<UserProfile> users;
  users.push_back(make_log_user(0, 20.0, 1.0, 0.0, 4.0));  // mu 0.8, L 20
  users.push_back(make_log_user(1, 5.0, 1.0, 0.0, 4.0));   // mu 0.2, L 5
  const ProblemInstance instance(std::move(users), 2.0);
  CHECK(instance.mu() == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(instance.lsmooth() == doctest::Approx(20.0).epsilon(1e-14));
}

TEST_CASE("dual gradient at the worked prices") {
  const ProblemInstance instance = two_user_preset_instance();
  // Stationarity at the optimum.
  CHECK(std::abs(dual_gradient(instance, 100.0 / 9.0)) < 1e-9);
  // Above every upper breakpoint all demand saturates at m = 0.
  CHECK(dual_gradient(instance, 20.0) == 1.6);
  // Below every lower breakpoint all demand saturates at M = 4.
  CHECK(dual_gradient(instance, 4.0) == 1.6 - 8.0);
}

TEST_CASE("dual gradient is nondecreasing in price") {
  auto g = testing::rng(707);
  for (int trial = 0; trial < 50; ++trial) {
    const ProblemInstance instance =
        testing::random_instance(g, testing::uniform_int(g, 1, 8));
    double p1 = testing::uniform(g, 0.0, 1.2 * instance.max_p_hi());
    double p2 = testing::uniform(g, 0.0, 1.2 * instance.max_p_hi());
    if (p1 > p2) std::swap(p1, p2);
    CHECK(dual_gradient(instance, p1) <= dual_gradient(instance, p2));
  }
}

TEST_CASE("dual gradient difference quotients respect N/mu smoothness") {
  auto g = testing::rng(808);
  for (int trial = 0; trial < 30; ++trial) {
    const ProblemInstance instance =
        testing::random_instance(g, testing::uniform_int(g, 1, 8));
    const double lipschitz = instance.size() / instance.mu();
    for (int pair = 0; pair < 40; ++pair) {
      const double p1 = testing::uniform(g, 0.0, 1.2 * instance.max_p_hi());
      double p2 = testing::uniform(g, 0.0, 1.2 * instance.max_p_hi());
      if (std::abs(p2 - p1) < 1e-4) p2 += 1e-3;
      const double diff =
          std::abs(dual_gradient(instance, p2) - dual_gradient(instance, p1));
      CHECK(diff <= lipschitz * std::abs(p2 - p1) + 1e-8);
    }
  }
}

TEST_CASE("dual is strongly convex on the merged saturation interval") {
  auto g = testing::rng(909);
  for (int trial = 0; trial < 30; ++trial) {
    const ProblemInstance instance =
        testing::random_connected_instance(g, testing::uniform_int(g, 2, 6));
    const auto merged = std::get<PriceInterval>(check_connectivity(instance));
    const double inv_l = 1.0 / instance.lsmooth();
    for (int pair = 0; pair < 20; ++pair) {
      const double p1 = testing::uniform(g, merged.lo, merged.hi);
      const double p2 = testing::uniform(g, merged.lo, merged.hi);
      const double lhs =
          (dual_gradient(instance, p2) - dual_gradient(instance, p1)) *
          (p2 - p1);
      CHECK(lhs >= inv_l * (p2 - p1) * (p2 - p1) - 1e-9);
    }
  }
}

TEST_CASE("dual value at a single-user optimum") {
  std::vector<UserProfile> users;
  users.push_back(make_log_user(0, 1.0, 1.0, 0.0, 1.0));
  const ProblemInstance instance(std::move(users), 1.0);
  // U'(1) = 0.5 clears the market exactly; D(0.5) = U(1) = log 2.
  CHECK(dual_value(instance, 0.5) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("strong duality at the oracle optimum") {
  auto g = testing::rng(1010);
  for (int trial = 0; trial < 25; ++trial) {
    const ProblemInstance instance =
        testing::random_instance(g, testing::uniform_int(g, 1, 6));
    const OracleSolution sol = solve(instance);
    CHECK(std::abs(sol.primal_value - sol.dual_value_at_pstar) <=
          1e-8 * (1.0 + std::abs(sol.primal_value)));
  }
}

TEST_CASE("weak duality against random feasible allocations") {
  auto g = testing::rng(1111);
  for (int trial = 0; trial < 25; ++trial) {
    const ProblemInstance instance =
        testing::random_instance(g, testing::uniform_int(g, 1, 6));
    // Random box point, pulled toward the lower bounds until it fits the
    // capacity.
    double sum_q = 0.0, sum_m = 0.0;
    std::vector<double> q;
    for (const auto& u : instance.users()) {
      q.push_back(testing::uniform(g, u.m(), u.M()));
      sum_q += q.back();
      sum_m += u.m();
    }
    if (sum_q > instance.capacity()) {
      const double shrink = (instance.capacity() - sum_m) / (sum_q - sum_m);
      for (std::size_t i = 0; i < q.size(); ++i) {
        const double m = instance.users()[i].m();
        q[i] = m + shrink * (q[i] - m);
      }
    }
    double primal = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i)
      primal += instance.users()[i].utility().value(q[i]);

    for (int k = 0; k < 5; ++k) {
      const double p = testing::uniform(g, 0.0, 1.2 * instance.max_p_hi());
      CHECK(dual_value(instance, p) >=
            primal - 1e-9 * (1.0 + std::abs(primal)));
    }
  }
}

TEST_CASE("dual components sum to the dual value") {
  auto g = testing::rng(1212);
  for (int trial = 0; trial < 100; ++trial) {
    const ProblemInstance instance =
        testing::random_instance(g, testing::uniform_int(g, 1, 10));
    const double p = testing::uniform(g, 0.0, 1.2 * instance.max_p_hi());
    double sum = 0.0;
    for (const auto& u : instance.users())
      sum += dual_component(u, instance.capacity(), instance.size(), p);
    const double whole = dual_value(instance, p);
    CHECK(std::abs(sum - whole) <= 1e-10 * std::abs(whole));
  }
}

TEST_CASE("dual component derivative is constant on the saturated regions") {
  auto g = testing::rng(1313);
  for (int trial = 0; trial < 40; ++trial) {
    const ProblemInstance instance =
        testing::random_instance(g, testing::uniform_int(g, 1, 6));
    const double Q = instance.capacity();
    const int n = instance.size();
    const double h = 1e-6;
    for (const auto& u : instance.users()) {
      // Below the lower breakpoint: slope Q/N - M.
      const double p_low = testing::uniform(g, 0.3, 0.7) * u.p_lo();
      if (p_low > h) {
        const double fd = (dual_component(u, Q, n, p_low + h) -
                           dual_component(u, Q, n, p_low - h)) /
                          (2.0 * h);
        CHECK(fd == doctest::Approx(Q / n - u.M()).epsilon(1e-6));
      }
      // Above the upper breakpoint: slope Q/N - m.
      const double p_high = u.p_hi() * testing::uniform(g, 1.1, 2.0);
      const double fd = (dual_component(u, Q, n, p_high + h) -
                         dual_component(u, Q, n, p_high - h)) /
                        (2.0 * h);
      CHECK(fd == doctest::Approx(Q / n - u.m()).epsilon(1e-6));
    }
  }
}

TEST_CASE("dual gradient matches finite differences away from breakpoints") {
  auto g = testing::rng(1414);
  for (int trial = 0; trial < 30; ++trial) {
    const ProblemInstance instance =
        testing::random_instance(g, testing::uniform_int(g, 1, 6));
    std::vector<double> kinks;
    for (const auto& u : instance.users()) {
      kinks.push_back(u.p_lo());
      kinks.push_back(u.p_hi());
    }
    const double h = 1e-6;
    int checked = 0;
    while (checked < 10) {
      const double p = testing::uniform(g, 0.01, 1.2 * instance.max_p_hi());
      // D' is continuous but kinked at user breakpoints; keep clear of them.
      const bool near_kink =
          std::any_of(kinks.begin(), kinks.end(),
                      [&](double bp) { return std::abs(p - bp) < 1e-3; });
      if (near_kink) continue;
      ++checked;
      const double fd =
          (dual_value(instance, p + h) - dual_value(instance, p - h)) /
          (2.0 * h);
      const double grad = dual_gradient(instance, p);
      CHECK(std::abs(fd - grad) <= 1e-4 * std::max(1.0, std::abs(grad)));
    }
  }
}

TEST_CASE("price step") {
  SUBCASE("zero gradient is a fixed point") {
    const DualState next = price_step({7.25, 3}, 0.0, 0.5);
    CHECK(next.p == 7.25);
    CHECK(next.t == 4);
  }
  SUBCASE("projection clips at zero") {
    const DualState next = price_step({1.0, 0}, 4.0, 0.5);
    CHECK(next.p == 0.0);
  }
  SUBCASE("gamma must be positive") {
    CHECK_THROWS_AS(price_step({1.0, 0}, 1.0, 0.0), std::invalid_argument);
  }
}

TEST_CASE("max feasible step") {
  SUBCASE("identical users") {
    CHECK(max_feasible_step(two_user_preset_instance()) ==
          doctest::Approx(0.4).epsilon(1e-14));
    CHECK(max_feasible_step(testing::identical_instance(5)) ==
          doctest::Approx(0.16).epsilon(1e-14));
  }
  SUBCASE("instance-wide minimum over mixed users") {
    std::vector<UserProfile> users;
    users.push_back(make_log_user(0, 20.0, 1.0, 0.0, 4.0));  // mu 0.8
    users.push_back(make_log_user(1, 5.0, 1.0, 0.0, 4.0));   // mu 0.2
    const ProblemInstance instance(std::move(users), 2.0);
    CHECK(max_feasible_step(instance) == doctest::Approx(0.1).epsilon(1e-14));
  }
}

TEST_CASE("step size policy windows") {
  const ProblemInstance instance = two_user_preset_instance();  // cap 0.4
  CHECK(StepSizePolicy::feasible_optimal().resolve(instance) ==
        doctest::Approx(0.4).epsilon(1e-14));
  CHECK(StepSizePolicy::feasible_custom(0.4).resolve(instance) == 0.4);
  CHECK_THROWS_AS(StepSizePolicy::feasible_custom(0.41).resolve(instance),
                  std::invalid_argument);
  CHECK_THROWS_AS(StepSizePolicy::feasible_custom(0.0).resolve(instance),
                  std::invalid_argument);
  CHECK(StepSizePolicy::convergent_only(0.79).resolve(instance) == 0.79);
  CHECK_THROWS_AS(StepSizePolicy::convergent_only(0.8).resolve(instance),
                  std::invalid_argument);
}
