#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "chain.hpp"
#include "helpers.hpp"
#include "wsn/errors.hpp"
#include "wsn/rl.hpp"

using namespace wsn;

TEST_SUITE("rl") {

TEST_CASE("state keys are a bijection") {
  CHECK(StateVector::state_space_size() == 67500u);
  std::set<StateKey> seen;
  Rng rng(1);
  for (StateKey k = 0; k < StateVector::state_space_size(); ++k) {
    const auto v = StateVector::from_key(k);
    CHECK(v.key() == k);
  }
  for (int t = 0; t < 2000; ++t) {
    StateVector v;
    v.soc = static_cast<SocLevel>(uniform_index(rng, 5));
    v.dist_sink = static_cast<std::uint8_t>(uniform_index(rng, kDistanceBins));
    v.dist_tx = static_cast<std::uint8_t>(uniform_index(rng, kDistanceBins));
    v.queue = static_cast<std::uint8_t>(uniform_index(rng, kQueueBins));
    v.hops_est = static_cast<std::uint8_t>(uniform_index(rng, kHopBins));
    v.hotspot = static_cast<std::uint8_t>(uniform_index(rng, kHotspotBins));
    v.neigh_energy = static_cast<SocLevel>(uniform_index(rng, 5));
    v.role = static_cast<Role>(uniform_index(rng, kRoles));
    CHECK(StateVector::from_key(v.key()) == v);
    CHECK(v.key() < StateVector::state_space_size());
  }
}

TEST_CASE("bins") {
  CHECK(distance_bin(0.0) == 0);
  CHECK(distance_bin(0.19) == 0);
  CHECK(distance_bin(0.2) == 1);
  CHECK(distance_bin(1.0) == 4);
  CHECK(distance_bin(3.0) == 4);
  CHECK(queue_bin(0.0) == 0);
  CHECK(queue_bin(0.3) == 1);
  CHECK(queue_bin(0.9) == 2);
  CHECK(hop_bin(1) == 0);
  CHECK(hop_bin(3) == 2);
  CHECK(hop_bin(7) == 3);
  CHECK(hop_bin(-1) == 3);
  CHECK(hotspot_bin(0) == 0);
  CHECK(hotspot_bin(3) == 1);
  CHECK(hotspot_bin(4) == 2);
}

TEST_CASE("observation fixtures") {
  const auto g = testutil::graph_of({{5, 5, 0}, {6, 5, 0}, {7, 5, 0}}, 1.0);
  EnergyLedger l(3);
  std::vector<Role> roles(3, Role::Sensor);
  std::vector<int> hops{0, 1, 2};
  std::vector<int> buf(3, 0);
  ObservationContext ctx{g, l, roles, hops, buf, 2, {5, 5, 0}, Region::square(10).diagonal(), 10};
  auto s = observe_state(0, ctx);
  CHECK(s.dist_sink == 0);
  CHECK(s.soc == SocLevel::VeryHigh);
  CHECK(s.role == Role::Sensor);

  l.set_soc(0, 50);
  l.set_soc(1, 50);
  l.set_soc(2, 50);
  s = observe_state(1, ctx);
  CHECK(s.soc == SocLevel::Medium);
  CHECK(s.neigh_energy == SocLevel::Medium);

  roles[2] = Role::Transmitter;
  CHECK(observe_state(2, ctx).role == Role::Transmitter);
  l.set_soc(2, 0);
  CHECK_THROWS_AS(observe_state(2, ctx), SimulationError);
}

TEST_CASE("feasible actions") {
  // isolated node
  const auto g = testutil::graph_of({{0, 0, 0}, {5, 5, 0}}, 1.0);
  EnergyLedger l2(2);
  auto acts = feasible_actions(0, testutil::fused_of(g, l2), l2);
  // both nodes at 100 sit at the 70th percentile, so a request is offered
  CHECK(std::count_if(acts.begin(), acts.end(), [](const RoutingAction& a) { return a.kind == RoutingAction::Kind::TransmitTo; }) == 0);
  CHECK(std::find(acts.begin(), acts.end(), RoutingAction::sleep()) != acts.end());
  CHECK(std::find(acts.begin(), acts.end(), RoutingAction::drop()) != acts.end());

  // star: node 0 with 3 neighbours
  const auto star = testutil::graph_of({{5, 5, 0}, {6, 5, 0}, {4, 5, 0}, {5, 6, 0}}, 1.0);
  EnergyLedger l4(4);
  acts = feasible_actions(0, testutil::fused_of(star, l4), l4);
  CHECK(std::count_if(acts.begin(), acts.end(), [](const RoutingAction& a) { return a.kind == RoutingAction::Kind::TransmitTo; }) == 3);
  CHECK(std::is_sorted(acts.begin(), acts.end()));

  // 10-node fixture: the 70th percentile of {10..100} is 70
  std::vector<Point> pts;
  for (int i = 0; i < 10; ++i) pts.push_back({static_cast<double>(i), 0, 0});
  const auto line = testutil::graph_of(pts, 1.0, 20.0);
  EnergyLedger l10(10);
  for (int i = 0; i < 10; ++i) l10.set_soc(i, 10.0 * (i + 1));
  const auto fg = testutil::fused_of(line, l10);
  const auto has_request = [&](NodeId n) {
    const auto a = feasible_actions(n, fg, l10);
    return std::find(a.begin(), a.end(), RoutingAction::request_transmitter()) != a.end();
  };
  CHECK(has_request(6));   // exactly 70
  CHECK(has_request(9));
  CHECK_FALSE(has_request(5));
}

TEST_CASE("action codes round-trip") {
  for (const auto& a : {RoutingAction::transmit_to(0), RoutingAction::transmit_to(17), RoutingAction::sleep(),
                        RoutingAction::drop(), RoutingAction::request_transmitter()}) {
    CHECK(RoutingAction::from_code(a.code()) == a);
  }
  CHECK(RoutingAction::sleep().code() == -1);
  CHECK(RoutingAction::drop().code() == -2);
  CHECK(RoutingAction::request_transmitter().code() == -3);
}

TEST_CASE("greedy selection and ties") {
  QStore q;
  Rng rng(1);
  const StateVector s;
  const std::vector<RoutingAction> acts{RoutingAction::transmit_to(2), RoutingAction::transmit_to(5),
                                        RoutingAction::sleep(), RoutingAction::drop()};
  CHECK(select_action(q, s, acts, 0.0, rng) == acts[0]);
  CHECK(select_action(q, s, acts, 0.0, rng, RoutingAction::transmit_to(5)) == acts[1]);
  q.set(s.key(), RoutingAction::sleep(), 5.0);
  for (int i = 0; i < 100; ++i) CHECK(select_action(q, s, acts, 0.0, rng) == RoutingAction::sleep());
  // the preferred action only wins among maximisers
  CHECK(select_action(q, s, acts, 0.0, rng, RoutingAction::transmit_to(5)) == RoutingAction::sleep());
}

TEST_CASE("uniform exploration passes a chi-square test") {
  QStore q;
  const StateVector s;
  q.set(s.key(), RoutingAction::drop(), 100.0);
  const std::vector<RoutingAction> acts{RoutingAction::transmit_to(1), RoutingAction::transmit_to(2),
                                        RoutingAction::transmit_to(3), RoutingAction::sleep(),
                                        RoutingAction::drop()};
  Rng rng(42);
  std::vector<int> counts(acts.size(), 0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const auto a = select_action(q, s, acts, 1.0, rng);
    counts[static_cast<std::size_t>(std::find(acts.begin(), acts.end(), a) - acts.begin())]++;
  }
  const double expect = static_cast<double>(draws) / static_cast<double>(acts.size());
  double chi2 = 0;
  for (int c : counts) chi2 += (c - expect) * (c - expect) / expect;
  CHECK(chi2 < 18.47);  // df = 4, p = 0.001
}

TEST_CASE("reward composition") {
  using E = RewardEvent;
  const RewardSchedule r;
  const std::vector<E> tx{E::DeliveredToSink, E::NoNodeFailure, E::VarianceDecreased, E::HighAverageEnergy};
  CHECK(compute_reward(tx, r) == 17.0);
  CHECK(compute_reward(std::vector<E>{E::Dropped}, r) == 0.0);
  CHECK(compute_reward(std::vector<E>{E::Forwarded, E::OverusedNode, E::NoNodeFailure, E::HighAverageEnergy}, r) == 6.0);
  CHECK(compute_reward(std::vector<E>{E::Slept}, r) == 1.0);
  CHECK(compute_reward(std::vector<E>{E::SensedAndSent, E::AvoidedHighCentrality}, r) == 5.0);
  RewardSchedule nonneg;
  nonneg.overuse_penalty = 0.0;
  CHECK(compute_reward(std::vector<E>{E::Forwarded, E::OverusedNode}, nonneg) == 5.0);
  CHECK(r.max_abs_step_reward() == 19.0);
}

TEST_CASE("value update") {
  QStore q;
  RlParams p;
  const StateVector s, s2 = StateVector::from_key(1);
  const std::vector<RoutingAction> next{RoutingAction::sleep()};
  q_update(q, s, RoutingAction::drop(), 5.0, s2, next, p);
  CHECK(q.value(s.key(), RoutingAction::drop()) == doctest::Approx(0.5).epsilon(1e-12));

  // bootstrap from the next state's best action
  q.set(s2.key(), RoutingAction::sleep(), 10.0);
  QStore q2;
  q_update(q2, s, RoutingAction::drop(), 1.0, s2, next, p);
  q2.set(s2.key(), RoutingAction::sleep(), 10.0);
  q_update(q2, s, RoutingAction::drop(), 1.0, s2, next, p);
  const double first = 0.1 * 1.0;
  CHECK(q2.value(s.key(), RoutingAction::drop()) == doctest::Approx(first + 0.1 * (1.0 + 0.9 * 10.0 - first)).epsilon(1e-12));

  // terminal successor: no bootstrap
  QStore q3;
  q3.set(s2.key(), RoutingAction::sleep(), 10.0);
  q_update(q3, s, RoutingAction::drop(), 1.0, s2, {}, p);
  CHECK(q3.value(s.key(), RoutingAction::drop()) == doctest::Approx(0.1).epsilon(1e-12));

  RlParams frozen;
  frozen.alpha = 0.0;
  QStore q4;
  q4.set(s.key(), RoutingAction::drop(), 3.25);
  q_update(q4, s, RoutingAction::drop(), 100.0, s2, next, frozen);
  CHECK(q4.value(s.key(), RoutingAction::drop()) == 3.25);

  // hand-computed cases
  struct Case { double q0, r, next_max, alpha, gamma, expect; };
  const Case cases[] = {{0, 5, 0, 0.1, 0.9, 0.5},
                        {2, 3, 4, 0.5, 0.9, 2 + 0.5 * (3 + 3.6 - 2)},
                        {-1, 0, 10, 0.25, 0.5, -1 + 0.25 * (5 + 1)},
                        {10, -4, 0, 1.0, 0.9, -4},
                        {1.5, 17, 2, 0.3, 0.99, 1.5 + 0.3 * (17 + 1.98 - 1.5)}};
  for (const auto& c : cases) {
    QStore qc;
    RlParams pc;
    pc.alpha = c.alpha;
    pc.gamma = c.gamma;
    qc.set(s.key(), RoutingAction::drop(), c.q0);
    qc.set(s2.key(), RoutingAction::sleep(), c.next_max);
    q_update(qc, s, RoutingAction::drop(), c.r, s2, next, pc);
    CHECK(qc.value(s.key(), RoutingAction::drop()) == doctest::Approx(c.expect).epsilon(1e-9));
  }
}

TEST_CASE("one-armed bandit follows the closed form") {
  QStore q;
  RlParams p;
  p.alpha = 0.5;
  p.gamma = 0.0;
  const StateVector s;
  const double c = 7.0;
  const std::vector<RoutingAction> acts{RoutingAction::sleep()};
  for (int k = 1; k <= 1000; ++k) {
    q_update(q, s, RoutingAction::sleep(), c, s, acts, p);
    if (k <= 40) {
      CHECK(q.value(s.key(), RoutingAction::sleep()) ==
            doctest::Approx(c * (1 - std::pow(1 - p.alpha, k))).epsilon(1e-12));
    }
  }
  CHECK(std::abs(q.value(s.key(), RoutingAction::sleep()) - c) < 1e-6);
}

TEST_CASE("epsilon schedule") {
  RlParams p;
  CHECK(p.decayed(0.3) == doctest::Approx(0.294));
  CHECK(p.decayed(0.05) == 0.05);
  RlParams bad;
  bad.gamma = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("q store persistence") {
  QStore q(4);
  q.set(10, RoutingAction::transmit_to(3), 1.25);
  q.set(2, RoutingAction::sleep(), -0.5);
  std::stringstream ss;
  q.save(ss);
  const auto back = QStore::load(ss, 4);
  CHECK(back == q);
  CHECK(q.max_abs() == 1.25);
}

TEST_CASE("three-state chain reaches the value-iteration policy") {
  const auto oracle = chain::optimal_policy(0.9);
  CHECK(oracle == std::array<bool, 3>{true, true, true});
  for (std::uint64_t seed = 1; seed <= 10; ++seed) CHECK(chain::learn(seed, 500) == oracle);
}

TEST_CASE("zero-epsilon policy is deterministic") {
  QStore q;
  Rng a(1), b(999);
  const StateVector s;
  const std::vector<RoutingAction> acts{RoutingAction::transmit_to(1), RoutingAction::sleep()};
  q.set(s.key(), RoutingAction::transmit_to(1), 0.3);
  for (int i = 0; i < 50; ++i) CHECK(select_action(q, s, acts, 0.0, a) == select_action(q, s, acts, 0.0, b));
}

}
