#include <doctest.h>

#include <stdexcept>

#include "chosim/kpi.hpp"

using namespace chosim;

TEST_CASE("outage percentage") {
  OutageLedger one;
  one.add(SimTime::ms(5000), SimTime::ms(6080), OutageCause::other_mobility);
  const std::vector<OutageLedger> a{one};
  CHECK(outage_percent(a, SimTime{}, SimTime::s(30)) == doctest::Approx(3.6));

  const std::vector<OutageLedger> empty(3);
  CHECK(outage_percent(empty, SimTime{}, SimTime::s(30)) == 0.0);

  OutageLedger u1;
  OutageLedger u2;
  u1.add(SimTime::s(1), SimTime::ms(1300), OutageCause::handover_interruption);
  u2.add(SimTime::s(2), SimTime::ms(2300), OutageCause::other_mobility);
  const std::vector<OutageLedger> two{u1, u2};
  CHECK(outage_percent(two, SimTime{}, SimTime::s(30)) == doctest::Approx(1.0));

  CHECK_THROWS(outage_percent(SimTime{}, 1, SimTime{}));
  CHECK_THROWS(outage_percent(SimTime{}, 0, SimTime::s(1)));
}

TEST_CASE("per UE per minute normalisation") {
  CHECK(normalize(3633.0, 420, SimTime::s(30)) == doctest::Approx(17.3));
  CHECK(normalize(0.0, 420, SimTime::s(30)) == 0.0);
  CHECK(normalize(100.0, 10, SimTime::s(60)) == doctest::Approx(2.0 * normalize(100.0, 10, SimTime::s(120))));
  CHECK_THROWS(normalize(1.0, 10, SimTime{}));
}

TEST_CASE("ledger keeps disjoint intervals and clips to the window") {
  OutageLedger l;
  l.open(SimTime::ms(100), OutageCause::other_mobility);
  CHECK(l.is_open());
  CHECK(l.open_cause() == OutageCause::other_mobility);
  CHECK_THROWS(l.open(SimTime::ms(150), OutageCause::other_mobility));
  const auto iv = l.close(SimTime::ms(300));
  CHECK(iv.end - iv.start == SimTime::ms(200));
  CHECK_THROWS(l.close(SimTime::ms(400)));
  CHECK_THROWS(l.add(SimTime::ms(250), SimTime::ms(400), OutageCause::handover_interruption));
  l.add(SimTime::ms(300), SimTime::ms(354) + SimTime::us(375), OutageCause::handover_interruption);
  CHECK(l.disjoint());
  CHECK(l.duration(OutageCause::other_mobility, SimTime::ms(200), SimTime::s(1)) == SimTime::ms(100));
  CHECK(l.duration(OutageCause::handover_interruption, SimTime{}, SimTime::s(1)) == SimTime::us(54375));
  CHECK(l.duration(OutageCause::handover_interruption, SimTime::ms(320), SimTime::ms(330)) == SimTime::ms(10));
}

TEST_CASE("report identities and CSV round trip") {
  KpiCounts c;
  c.successful_handovers = 30;
  c.rach_less = 28;
  c.rach_aided = 2;
  c.handover_failures = 1;
  c.radio_link_failures = 2;
  c.radio_msgs = 400;
  c.xn_msgs = 300;
  c.outage_ho = SimTime::us(1'631'250);
  c.outage_other = SimTime::us(700'000);
  const KpiReport r = KpiReport::build("rach_less", "abc", 4, SimTime::s(30), c);
  CHECK(r.successful_handovers == doctest::Approx(15.0));
  CHECK(r.mobility_failures == doctest::Approx(1.5));
  CHECK(r.outage_total_pct == r.outage_ho_pct + r.outage_other_pct);
  CHECK(r.outage_ho_pct == doctest::Approx(100.0 * 1.63125 / 120.0));

  const std::string csv = r.to_csv();
  CHECK(csv.starts_with("kpi,value\nscheme,rach_less\nscenario,abc\n"));
  const KpiReport back = KpiReport::from_csv(csv);
  CHECK(back.counts == c);
  CHECK(back.to_csv() == csv);
  for (const auto& [k, v] : r.rows()) CHECK(*back.value(k) == v);
  CHECK_FALSE(r.value("nope").has_value());
  CHECK_THROWS(KpiReport::from_csv("kpi,value\nscheme,x\n"));
  CHECK_THROWS(KpiReport::from_csv("wrong\n"));
}

TEST_CASE("scheme comparison") {
  KpiReport a;
  a.scheme = "rach_aided";
  a.scenario = "s";
  a.n_ue = 1;
  a.simulated_time = SimTime::s(30);
  KpiReport b = a;
  b.scheme = "rach_less";
  a.outage_ho_pct = 1.0;
  b.outage_ho_pct = 0.568;
  a.outage_total_pct = 3.6;
  b.outage_total_pct = 2.93;
  a.radio_msgs = 10.0;
  b.radio_msgs = 12.7;
  const SchemeComparison cmp = compare_schemes(a, b);
  CHECK(*cmp.delta("outage_ho_pct") == doctest::Approx(0.432));
  CHECK(*cmp.delta("outage_total_pct") == doctest::Approx(0.187).epsilon(0.01));
  CHECK(*cmp.delta("radio_msgs") == doctest::Approx(-0.27));
  CHECK(*cmp.delta("xn_msgs") == 0.0);  // both zero

  b.rach_less = 5.0;
  CHECK_FALSE(compare_schemes(a, b).delta("rach_less_handovers").has_value());

  const SchemeComparison same = compare_schemes(a, a);
  for (const auto& [k, d] : same.deltas) CHECK(*d == 0.0);

  KpiReport other = b;
  other.scenario = "t";
  CHECK_THROWS_AS(compare_schemes(a, other), std::invalid_argument);
}

TEST_CASE("mean report pools counts") {
  KpiCounts c1;
  c1.successful_handovers = 10;
  c1.outage_ho = SimTime::ms(300);
  KpiCounts c2;
  c2.successful_handovers = 20;
  c2.outage_ho = SimTime::ms(900);
  const std::vector<KpiReport> rs{KpiReport::build("x", "s", 2, SimTime::s(30), c1),
                                  KpiReport::build("x", "s", 2, SimTime::s(30), c2)};
  const KpiReport m = mean_report(rs);
  CHECK(m.successful_handovers == doctest::Approx((rs[0].successful_handovers + rs[1].successful_handovers) / 2.0));
  CHECK(m.outage_ho_pct == doctest::Approx((rs[0].outage_ho_pct + rs[1].outage_ho_pct) / 2.0));
  CHECK_THROWS(mean_report(std::span<const KpiReport>{}));
}

TEST_CASE("counts are recomputable from the event log") {
  std::vector<EventRecord> ev{
      {SimTime::ms(500), 0, "signal", "procedure=preparation;msg=m;iface=radio;target=3;lost=0"},
      {SimTime::ms(1500), 0, "signal", "procedure=preparation;msg=m;iface=radio;target=3;lost=1"},
      {SimTime::ms(1600), 1, "signal", "procedure=preparation;msg=m;iface=xn;target=3;lost=0"},
      {SimTime::ms(1700), 1, "ho_complete", "source=0;target=3;mode=rach_less;reason=none"},
      {SimTime::ms(1800), 1, "ho_complete", "source=3;target=4;mode=rach_aided;reason=no_ta"},
      {SimTime::ms(1900), 2, "hof", "source=0;target=1"},
      {SimTime::ms(2000), 2, "rlf", "cell=1"},
      {SimTime::ms(900), 2, "outage", "start=0.900000;end=1.100000;cause=other_mobility"},
      {SimTime::ms(1700), 1, "outage", "start=1.700000;end=1.754375;cause=handover_interruption"},
      {SimTime::ms(3000), 1, "ho_complete", "source=4;target=5;mode=rach_less;reason=none"},
  };
  const std::string csv = events_to_csv(ev);
  const auto back = events_from_csv(csv);
  REQUIRE(back.size() == ev.size());
  CHECK(events_to_csv(back) == csv);

  const KpiCounts c = counts_from_events(back, SimTime::s(1), SimTime::s(3));
  CHECK(c.radio_msgs == 1);
  CHECK(c.xn_msgs == 1);
  CHECK(c.successful_handovers == 2);
  CHECK(c.rach_less == 1);
  CHECK(c.rach_aided == 1);
  CHECK(c.handover_failures == 1);
  CHECK(c.radio_link_failures == 1);
  CHECK(c.outage_other == SimTime::ms(100));
  CHECK(c.outage_ho == SimTime::us(54375));

  const auto kv = parse_detail("a=1;b=x=y;;c=");
  CHECK(kv.at("a") == "1");
  CHECK(kv.at("b") == "x=y");
  CHECK(kv.at("c").empty());
  CHECK_THROWS(events_from_csv("bad header\n"));
}
