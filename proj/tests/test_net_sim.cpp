#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "ehaoi/net_sim.hpp"

using namespace ehaoi;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

PhyConfig ideal_phy(double theta = 1.0) { return {3.8, 3.0, kInf, theta, 0.0}; }

SimConfig single(long long slots, std::uint64_t seed = 7) {
  SimConfig s;
  s.single_link = true;
  s.slots = slots;
  s.realizations = 1;
  s.seed = seed;
  return s;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sd(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

TEST_CASE("generator substreams are reproducible and distinct") {
  Rng a = Rng::substream(1, 0), b = Rng::substream(1, 0), c = Rng::substream(1, 1);
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
  }
  Rng u(3);
  double s = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double v = u.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    s += v;
  }
  CHECK(s / 1e5 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("topology sampling") {
  Rng rng(11);
  double total = 0.0;
  const int draws = 1000;
  for (int d = 0; d < draws; ++d) {
    const Topology t = sample_topology(0.01, 100.0, 3.0, rng);
    REQUIRE(t.sources.size() == t.receivers.size());
    total += static_cast<double>(t.sources.size());
    for (std::size_t i = 0; i < t.sources.size(); ++i) {
      CHECK(distance(t.sources[i], t.receivers[i], 100.0, Boundary::Torus) == doctest::Approx(3.0).epsilon(1e-12));
      CHECK(t.receivers[i].x >= 0.0);
      CHECK(t.receivers[i].x < 100.0);
    }
  }
  CHECK(std::abs(total / draws - 100.0) < 3.0 * std::sqrt(100.0 / draws));
  Rng r2(5);
  try {
    sample_topology(1e-7, 10.0, 3.0, r2);
    FAIL("expected EmptyRealization");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyRealization);
  }
}

TEST_CASE("sources pass a Ripley K test for complete spatial randomness") {
  Rng rng(99);
  const double side = 100.0;
  const std::vector<double> radii{5.0, 10.0, 20.0};
  std::vector<std::vector<double>> k(radii.size());
  for (int d = 0; d < 200; ++d) {
    const Topology t = sample_topology(0.01, side, 3.0, rng);
    const std::size_t n = t.sources.size();
    if (n < 2) continue;
    std::vector<double> cnt(radii.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double dist = distance(t.sources[i], t.sources[j], side, Boundary::Torus);
        for (std::size_t q = 0; q < radii.size(); ++q)
          if (dist <= radii[q]) cnt[q] += 1.0;
      }
    for (std::size_t q = 0; q < radii.size(); ++q)
      k[q].push_back(side * side * cnt[q] / (static_cast<double>(n) * (n - 1.0)));
  }
  for (std::size_t q = 0; q < radii.size(); ++q) {
    const double expected = std::numbers::pi * radii[q] * radii[q];
    const double se = sd(k[q]) / std::sqrt(static_cast<double>(k[q].size()));
    CHECK(std::abs(mean(k[q]) - expected) < 3.0 * se);
  }
}

TEST_CASE("one slot follows the buffer rules") {
  const NetworkConfig net{0.0, 2, 6, 1.0, 1.0};
  Topology topo;
  topo.sources = {{0, 0}};
  topo.receivers = {{3, 0}};
  SimConfig sim = single(10);
  const SlotContext ctx = make_slot_context(topo, ideal_phy(), net, sim);
  Rng rng(1);
  SlotOutcome out;
  std::vector<NodeState> nodes(1);
  nodes[0].kappa = 6;
  step(nodes, 0, ctx, rng, out);
  CHECK(out.active[0] == 1);
  CHECK(out.arrivals[0] == 1);
  CHECK(nodes[0].kappa == 5);
  CHECK(nodes[0].aoi == 1);

  sim.update = UpdatePattern::periodic(100);
  const SlotContext idle = make_slot_context(topo, ideal_phy(), net, sim);
  nodes[0].kappa = 6;
  nodes[0].aoi = 4;
  nodes[0].next_period_slot = 50;
  step(nodes, 0, idle, rng, out);
  CHECK(out.active[0] == 0);
  CHECK(nodes[0].kappa == 6);
  CHECK(nodes[0].aoi == 5);
}

TEST_CASE("energy is conserved slot by slot") {
  const NetworkConfig net{0.02, 3, 7, 0.6, 0.4};
  Rng rng(5);
  const Topology topo = sample_topology(net.lambda, 50.0, 3.0, rng);
  SimConfig sim;
  sim.side = 50.0;
  const SlotContext ctx = make_slot_context(topo, ideal_phy(), net, sim);
  auto nodes = initial_nodes(ctx.n, ctx, rng);
  SlotOutcome out;
  for (long long t = 0; t < 2000; ++t) {
    const auto before = nodes;
    step(nodes, t, ctx, rng, out);
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      const int expect = std::min(before[j].kappa - net.N * out.active[j] + out.arrivals[j], net.B);
      CHECK(nodes[j].kappa == expect);
      CHECK(nodes[j].kappa >= 0);
      if (out.active[j]) CHECK(before[j].kappa >= net.N);
      CHECK(nodes[j].aoi == (out.success[j] ? 1 : before[j].aoi + 1));
    }
  }
}

TEST_CASE("isolated link reference values") {
  const auto perfect = run(single(5000), ideal_phy(), {0.0, 1, 1, 1.0, 1.0});
  CHECK(perfect.network_aoi == 1.0);
  CHECK(perfect.ci_halfwidth == 0.0);
  CHECK(perfect.empirical_mu == 1.0);

  SimConfig s = single(400000);
  s.realizations = 4;
  const auto micro = run(s, ideal_phy(), {0.0, 1, 1, 0.5, 1.0});
  CHECK(std::abs(micro.network_aoi - 2.0) < std::max(micro.ci_halfwidth, 0.01));
  CHECK(micro.empirical_ET == doctest::Approx(2.0).epsilon(0.01));
  CHECK(micro.empirical_ET2 == doctest::Approx(6.0).epsilon(0.02));
}

TEST_CASE("runs are bit-identical across thread counts") {
  SimConfig s;
  s.slots = 3000;
  s.realizations = 5;
  s.side = 40.0;
  const NetworkConfig net{0.02, 2, 6, 0.6, 0.5};
  const PhyConfig phy{3.8, 3.0, db_to_linear(13.0), 1.2, 1e-6};
  const auto a = run(s, phy, net);
  s.threads = 3;
  const auto b = run(s, phy, net);
  CHECK(a.network_aoi == b.network_aoi);
  CHECK(a.ci_halfwidth == b.ci_halfwidth);
  CHECK(a.per_link_aoi == b.per_link_aoi);
  CHECK(a.buffer_counts == b.buffer_counts);
  CHECK(a.empirical_ET2 == b.empirical_ET2);
  s.seed = 2;
  CHECK(run(s, phy, net).network_aoi != a.network_aoi);
}

TEST_CASE("empirical buffer law") {
  SimConfig s = single(200000);
  const auto greedy = measure_empirical_chain(run(s, ideal_phy(), {0.0, 2, 4, 0.5, 1.0}));
  double sum = 0.0;
  for (double v : greedy) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(greedy[0] == doctest::Approx(0.25).epsilon(0.03));
  CHECK(greedy[1] == doctest::Approx(0.5).epsilon(0.03));
  CHECK(greedy[2] == doctest::Approx(0.25).epsilon(0.03));
  CHECK(greedy[3] == 0.0);

  const NetworkConfig net{0.0, 2, 8, 0.5, 0.5};
  const auto exact = steady_closed_large_buffer(net.chain()).probs;
  std::vector<std::vector<double>> runs(exact.size());
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const auto h = measure_empirical_chain(run(single(50000, seed), ideal_phy(), net));
    for (std::size_t i = 0; i < h.size(); ++i) runs[i].push_back(h[i]);
  }
  for (std::size_t i = 0; i < exact.size(); ++i) {
    const double se = sd(runs[i]) / std::sqrt(static_cast<double>(runs[i].size()));
    CHECK(std::abs(mean(runs[i]) - exact[i]) < 3.0 * se + 1e-4);
  }
}

TEST_CASE("attempt intervals match the renewal moments") {
  const NetworkConfig net{0.0, 2, 8, 0.5, 0.5};
  SimConfig s = single(400000);
  s.realizations = 4;
  const auto rep = run(s, ideal_phy(), net);
  const auto m = interval_moments(steady_state(net.chain()), net.chain());
  CHECK(rep.empirical_ET == doctest::Approx(m.mean_T).epsilon(0.01));
  CHECK(rep.empirical_ET2 == doctest::Approx(m.second_T).epsilon(0.02));
}

TEST_CASE("field success rate and the renewal identity") {
  const NetworkConfig net{0.01, 1, 1, 1.0, 0.2};
  const PhyConfig phy{3.8, 3.0, kInf, 1.784, 0.0};
  SimConfig s;
  s.slots = 20000;
  s.realizations = 8;
  s.side = 100.0;
  const auto rep = run(s, phy, net);
  const double exact = inv_success_moment(phy, net.lambda, 0.2);
  CHECK(std::abs(rep.inv_mu_links - exact) < rep.inv_mu_ci + 0.01 * exact);
  CHECK(rep.empirical_EX == doctest::Approx(rep.empirical_ET / rep.empirical_mu).epsilon(0.02));
  CHECK(rep.empirical_mu >= 0.0);
  CHECK(rep.empirical_mu <= 1.0);
}

TEST_CASE("arrival and update patterns") {
  CHECK(ArrivalPattern::bernoulli(0.3).mean_rate() == 0.3);
  CHECK(ArrivalPattern::binomial(10, 0.05).mean_rate() == doctest::Approx(0.5));
  CHECK(ArrivalPattern::markov(0.9, 0.1, 0.1, 0.3).mean_rate() == doctest::Approx(0.7));
  const NetworkConfig net{0.0, 2, 10, 0.5, 0.5};
  SimConfig s = single(200000);
  s.arrival = ArrivalPattern::markov(0.9, 0.1, 0.1, 0.3);
  s.update = UpdatePattern::bernoulli(1.0);
  const auto rep = run(s, ideal_phy(), net);
  // Every unit is spent in pairs, so the attempt rate is half the arrival rate.
  CHECK(1.0 / rep.empirical_ET == doctest::Approx(0.35).epsilon(0.02));
  SimConfig p = single(200000);
  p.update = UpdatePattern::periodic(4);
  const auto per = run(p, ideal_phy(), {0.0, 1, 20, 0.5, 0.5});
  CHECK(per.empirical_ET == doctest::Approx(4.0).epsilon(1e-3));
  CHECK(per.empirical_ET2 == doctest::Approx(16.0).epsilon(1e-3));
}

TEST_CASE("invalid simulation settings") {
  SimConfig s = single(100);
  s.warmup = 100;
  CHECK_THROWS_AS(run(s, ideal_phy(), {0.0, 1, 1, 0.5, 0.5}), Error);
  s.warmup = 10;
  s.census = 0.0;
  CHECK_THROWS_AS(run(s, ideal_phy(), {0.0, 1, 1, 0.5, 0.5}), Error);
  s.census = 1.0;
  s.realizations = 0;
  CHECK_THROWS_AS(run(s, ideal_phy(), {0.0, 1, 1, 0.5, 0.5}), Error);
}

TEST_CASE("confidence half-width") {
  CHECK(ci95_halfwidth({1.0, 2.0, 3.0, 4.0, 5.0}) == doctest::Approx(1.9632).epsilon(1e-4));
  CHECK(ci95_halfwidth({4.0}) == 0.0);
  CHECK(ci95_halfwidth({2.0, 2.0, 2.0}) == 0.0);
}
