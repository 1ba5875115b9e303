#include <doctest.h>

#include <stdexcept>

#include <random>

#include "chosim/cho_engine.hpp"

using namespace chosim;

namespace {

// Inequalities written out per kind, independent of trigger_satisfied.
bool holds(TriggerKind k, double s, double t, double o) {
  if (k == TriggerKind::exec) return t - o > s;
  if (k == TriggerKind::release) return s - o > t;
  return t + o > s;
}

std::vector<double> l3_of(std::initializer_list<double> v) { return v; }

}  // namespace

TEST_CASE("window condition agrees with a brute-force re-scan") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> level(-100.0, -70.0);
  std::uniform_int_distribution<int> pick(0, 3);
  std::uniform_int_distribution<int> win(0, 10);
  const SimTime period = SimTime::ms(20);
  for (int trace = 0; trace < 1000; ++trace) {
    const auto kind = static_cast<TriggerKind>(pick(rng));
    const double offset = std::uniform_real_distribution<double>(0.0, 6.0)(rng);
    const SimTime window = SimTime::ms(10) * win(rng);
    TriggerCondition cond(kind, offset, window, period);
    const int need = std::max<int>(1, static_cast<int>((window.count_us() + period.count_us() - 1) / period.count_us()));
    CHECK(cond.required_samples() == need);

    // Slowly drifting pair so the condition toggles.
    std::vector<bool> sat;
    double s = level(rng);
    double t = level(rng);
    for (int m = 0; m < 200; ++m) {
      s += std::normal_distribution<double>(0.0, 1.5)(rng);
      t += std::normal_distribution<double>(0.0, 1.5)(rng);
      sat.push_back(holds(kind, s, t, offset));
      bool oracle = m + 1 >= need;
      for (int j = m; oracle && j > m - need; --j) oracle = sat[static_cast<std::size_t>(j)];
      CHECK(eval_condition(cond, s, t) == oracle);
    }
  }
}

TEST_CASE("execution fires on the 4th sample for an 80 ms window") {
  TriggerCondition exec(TriggerKind::exec, 3.0, SimTime::ms(80), SimTime::ms(20));
  for (int k = 1; k <= 3; ++k) CHECK_FALSE(exec.evaluate(-90.0, -86.0));
  CHECK(exec.evaluate(-90.0, -86.0));
  CHECK(exec.evaluate(-90.0, -86.0));  // keeps firing while satisfied
  CHECK_FALSE(exec.evaluate(-90.0, -88.0));
  CHECK(exec.counter() == 0);

  TriggerCondition acq(TriggerKind::acq, 2.0, SimTime::ms(20), SimTime::ms(20));
  CHECK(acq.evaluate(-90.0, -91.0));
  // Strict inequality at the boundary.
  TriggerCondition edge(TriggerKind::acq, 2.0, SimTime::ms(20), SimTime::ms(20));
  CHECK_FALSE(edge.evaluate(-90.0, -92.0));
}

TEST_CASE("preparation set admission and eviction") {
  ChoParams p;
  ChoEngine e(p);
  ChoState s = e.make_state(6, 0);
  const auto l3 = l3_of({-80.0, -85.0, -84.0, -83.0, -82.0, -81.0});
  for (CellId c : {1, 2, 3, 4}) CHECK_FALSE(e.on_prepared(s, c, l3, SimTime::ms(50)).has_value());
  CHECK(s.prepared.size() == 4);
  CHECK(s.find(1)->prepared_at == SimTime::ms(50));

  // Stronger newcomer evicts the weakest (cell 1 at -85).
  auto dropped = e.on_prepared(s, 5, l3, SimTime::ms(60));
  REQUIRE(dropped.has_value());
  CHECK(*dropped == 1);
  CHECK(s.prepared.size() == 4);
  CHECK(s.is_prepared(5));
  CHECK_FALSE(s.is_prepared(1));

  // A newcomer weaker than everything is rejected.
  const auto weak = l3_of({-80.0, -99.0, -84.0, -83.0, -82.0, -81.0});
  dropped = e.on_prepared(s, 1, weak, SimTime::ms(70));
  REQUIRE(dropped.has_value());
  CHECK(*dropped == 1);
  CHECK_FALSE(s.is_prepared(1));
  CHECK(s.prepared.size() == 4);
}

TEST_CASE("engine emits preparation, TA acquisition and execution in order") {
  ChoParams p;
  ChoEngine e(p);
  ChoState s = e.make_state(3, 0);
  const auto near = l3_of({-80.0, -77.0, -120.0});  // target within o_prep but not o_exec
  std::vector<ChoAction> a;
  for (int k = 0; k < 4; ++k) a = e.on_measurement(s, near, Scheme::rach_less, SimTime::ms(20 * k));
  REQUIRE(a.size() == 1);
  CHECK(a[0].kind == ChoActionKind::start_preparation);
  CHECK(a[0].cell == 1);
  // In flight: no duplicate preparation.
  CHECK(e.on_measurement(s, near, Scheme::rach_less, SimTime::ms(80)).empty());

  e.on_prepared(s, 1, near, SimTime::ms(110));
  a = e.on_measurement(s, near, Scheme::rach_less, SimTime::ms(120));
  REQUIRE(a.size() == 1);
  CHECK(a[0].kind == ChoActionKind::start_ta_acquisition);
  CHECK(s.find(1)->ta.in_progress);
  CHECK(e.on_measurement(s, near, Scheme::rach_less, SimTime::ms(140)).empty());

  // RACH-aided scheme never acquires TA.
  ChoState s2 = e.make_state(3, 0);
  e.on_prepared(s2, 1, near, SimTime::ms(0));
  CHECK(e.on_measurement(s2, near, Scheme::rach_aided, SimTime::ms(20)).empty());

  const auto far = l3_of({-80.0, -70.0, -71.0});
  for (int k = 0; k < 3; ++k) e.on_measurement(s, far, Scheme::rach_less, SimTime::ms(160 + 20 * k));
  a = e.on_measurement(s, far, Scheme::rach_less, SimTime::ms(220));
  REQUIRE(a.size() == 1);
  CHECK(a[0].kind == ChoActionKind::execute);
  CHECK(a[0].cell == 1);
}

TEST_CASE("execution picks the strongest firing prepared cell") {
  ChoEngine e(ChoParams{});
  ChoState s = e.make_state(4, 0);
  const auto l3 = l3_of({-90.0, -80.0, -75.0, -85.0});
  for (CellId c : {1, 2, 3}) e.on_prepared(s, c, l3, SimTime{});
  std::vector<ChoAction> a;
  for (int k = 0; k < 4; ++k) a = e.on_measurement(s, l3, Scheme::rach_less, SimTime::ms(20 * k));
  REQUIRE(a.size() == 1);
  CHECK(a[0].kind == ChoActionKind::execute);
  CHECK(a[0].cell == 2);
}

TEST_CASE("release when the target falls far below the serving cell") {
  ChoEngine e(ChoParams{});
  ChoState s = e.make_state(2, 0);
  const auto l3 = l3_of({-70.0, -80.0});
  e.on_prepared(s, 1, l3, SimTime{});
  std::vector<ChoAction> a;
  for (int k = 0; k < 4; ++k) a = e.on_measurement(s, l3, Scheme::rach_aided, SimTime::ms(20 * k));
  REQUIRE(a.size() == 1);
  CHECK(a[0].kind == ChoActionKind::release);
  e.release(s, 1);
  CHECK(s.prepared.empty());
}

TEST_CASE("mode decision and access outcome") {
  ChoEngine e(ChoParams{});
  ChoState s = e.make_state(2, 0);
  CHECK_THROWS_AS(e.decide_mode(s, 1, Scheme::rach_less, SimTime{}), std::logic_error);
  e.on_prepared(s, 1, l3_of({-80.0, -79.0}), SimTime{});
  CHECK(e.decide_mode(s, 1, Scheme::rach_less, SimTime{}).reason == FallbackReason::no_ta);
  s.find(1)->ta.phase = TaPhase::acquired;
  s.find(1)->ta.t_acq = SimTime::ms(100);
  CHECK(e.decide_mode(s, 1, Scheme::rach_less, SimTime::ms(200)).mode == HandoverMode::rach_less);
  CHECK(e.decide_mode(s, 1, Scheme::rach_aided, SimTime::ms(200)).mode == HandoverMode::rach_aided);

  const AccessAttempt at{1, HandoverMode::rach_aided, SimTime::ms(1000)};
  const SimTime hof = SimTime::ms(200);
  CHECK(handover_failure_check(at, -12.0, SimTime::ms(1000), -8.0, hof) == AccessStatus::pending);
  CHECK(handover_failure_check(at, -12.0, SimTime::ms(1190), -8.0, hof) == AccessStatus::pending);
  CHECK(handover_failure_check(at, -12.0, SimTime::ms(1200), -8.0, hof) == AccessStatus::hof);
  CHECK(handover_failure_check(at, -8.0, SimTime::ms(1100), -8.0, hof) == AccessStatus::success);
}

TEST_CASE("re-establishment picks the strongest cell") {
  CHECK(reestablishment_target(l3_of({-90.0, -70.0, -70.0, -80.0})) == 1);
  CHECK_THROWS(reestablishment_target(std::span<const double>{}));
}
