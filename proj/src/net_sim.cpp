#include "ehaoi/net_sim.hpp"

#include <algorithm>
#include <atomic>
#include <numbers>
#include <random>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

namespace ehaoi {

double distance(const Vec2& a, const Vec2& b, double side, Boundary boundary) {
  double dx = std::abs(a.x - b.x), dy = std::abs(a.y - b.y);
  if (boundary == Boundary::Torus) {
    dx = std::min(dx, side - dx);
    dy = std::min(dy, side - dy);
  }
  return std::hypot(dx, dy);
}

Topology sample_topology(double lambda, double side, double r, Rng& rng, Boundary boundary) {
  if (!(lambda > 0.0) || !(side > 0.0)) throw Error(ErrorKind::BadConfig, "lambda and side must be positive");
  std::poisson_distribution<long long> count(lambda * side * side);
  const long long n = count(rng);
  if (n == 0) throw Error(ErrorKind::EmptyRealization, "no sources drawn");
  Topology t;
  t.side = side;
  t.sources.resize(n);
  t.receivers.resize(n);
  const auto wrap = [&](double v) {
    if (boundary == Boundary::Planar) return v;
    v = std::fmod(v, side);
    return v < 0.0 ? v + side : v;
  };
  for (long long i = 0; i < n; ++i) {
    const Vec2 s{rng.uniform() * side, rng.uniform() * side};
    const double a = 2.0 * std::numbers::pi * rng.uniform();
    t.sources[i] = s;
    t.receivers[i] = {wrap(s.x + r * std::cos(a)), wrap(s.y + r * std::sin(a))};
  }
  return t;
}

ArrivalPattern ArrivalPattern::bernoulli(double xi) {
  ArrivalPattern p;
  p.kind = ArrivalKind::Bernoulli;
  p.xi = xi;
  return p;
}

ArrivalPattern ArrivalPattern::binomial(int e_max, double xi_hat) {
  ArrivalPattern p;
  p.kind = ArrivalKind::Binomial;
  p.e_max = e_max;
  p.xi_hat = xi_hat;
  return p;
}

ArrivalPattern ArrivalPattern::markov(double xi_good, double xi_bad, double p_gb, double p_bg) {
  ArrivalPattern p;
  p.kind = ArrivalKind::TwoStateMarkov;
  p.xi_good = xi_good;
  p.xi_bad = xi_bad;
  p.p_gb = p_gb;
  p.p_bg = p_bg;
  return p;
}

double ArrivalPattern::mean_rate() const {
  switch (kind) {
    case ArrivalKind::Bernoulli: return xi;
    case ArrivalKind::Binomial: return e_max * xi_hat;
    case ArrivalKind::TwoStateMarkov: return (p_bg * xi_good + p_gb * xi_bad) / (p_gb + p_bg);
  }
  return 0.0;
}

UpdatePattern UpdatePattern::bernoulli(double eta) {
  UpdatePattern u;
  u.kind = UpdateKind::Bernoulli;
  u.eta = eta;
  return u;
}

UpdatePattern UpdatePattern::periodic(int period) {
  UpdatePattern u;
  u.kind = UpdateKind::Periodic;
  u.period = period;
  return u;
}

SlotContext make_slot_context(const Topology& topo, const PhyConfig& phy, const NetworkConfig& net,
                              const SimConfig& sim) {
  SlotContext c;
  c.N = net.N;
  c.B = net.B;
  c.theta = phy.theta;
  c.inv_snr = std::isinf(phy.tx_snr) ? 0.0 : 1.0 / phy.tx_snr;
  c.eps = phy.eps;
  c.arrival = sim.arrival.value_or(ArrivalPattern::bernoulli(net.xi));
  c.update = sim.update.value_or(UpdatePattern::bernoulli(net.eta));
  c.n = topo.sources.size();
  c.gain.assign(c.n * c.n, 0.0);
  for (std::size_t i = 0; i < c.n; ++i)
    for (std::size_t j = 0; j < c.n; ++j) {
      const double d = i == j ? phy.r : distance(topo.sources[i], topo.receivers[j], topo.side, sim.boundary);
      if (i != j && sim.cutoff > 0.0 && d > sim.cutoff) continue;
      c.gain[i * c.n + j] = std::pow(d, -phy.alpha);
    }
  return c;
}

std::vector<NodeState> initial_nodes(std::size_t n, const SlotContext& ctx, Rng& rng) {
  std::vector<NodeState> nodes(n);
  const ArrivalPattern& a = ctx.arrival;
  for (auto& s : nodes) {
    if (a.kind == ArrivalKind::TwoStateMarkov) s.markov_good = rng.bernoulli(a.p_bg / (a.p_gb + a.p_bg));
    if (ctx.update.kind == UpdateKind::Periodic)
      s.next_period_slot = static_cast<long long>(rng.uniform() * ctx.update.period);
  }
  return nodes;
}

void step(std::vector<NodeState>& nodes, long long t, const SlotContext& ctx, Rng& rng,
          SlotOutcome& out) {
  const std::size_t n = nodes.size();
  out.arrivals.assign(n, 0);
  out.active.assign(n, 0);
  out.success.assign(n, 0);
  const ArrivalPattern& ap = ctx.arrival;
  for (std::size_t j = 0; j < n; ++j) {
    NodeState& s = nodes[j];
    switch (ap.kind) {
      case ArrivalKind::Bernoulli: out.arrivals[j] = rng.bernoulli(ap.xi); break;
      case ArrivalKind::Binomial:
        for (int e = 0; e < ap.e_max; ++e) out.arrivals[j] += rng.bernoulli(ap.xi_hat);
        break;
      case ArrivalKind::TwoStateMarkov:
        out.arrivals[j] = rng.bernoulli(s.markov_good ? ap.xi_good : ap.xi_bad);
        s.markov_good = s.markov_good ? !rng.bernoulli(ap.p_gb) : rng.bernoulli(ap.p_bg);
        break;
    }
  }
  std::vector<std::size_t> act;
  for (std::size_t j = 0; j < n; ++j) {
    NodeState& s = nodes[j];
    bool v = false;
    if (ctx.update.kind == UpdateKind::Bernoulli) {
      v = s.kappa >= ctx.N && rng.bernoulli(ctx.update.eta);
    } else if (t == s.next_period_slot) {
      v = s.kappa >= ctx.N;
      s.next_period_slot += ctx.update.period;
    }
    if (v) {
      out.active[j] = 1;
      act.push_back(j);
    }
  }
  for (std::size_t j : act) {
    const double signal = rng.exponential() * ctx.gain[j * ctx.n + j];
    double interference = 0.0;
    for (std::size_t i : act)
      if (i != j) interference += rng.exponential() * ctx.gain[i * ctx.n + j];
    const bool decoded = signal > ctx.theta * (interference + ctx.inv_snr);
    out.success[j] = decoded && !rng.bernoulli(ctx.eps);
  }
  for (std::size_t j = 0; j < n; ++j) {
    NodeState& s = nodes[j];
    s.kappa = std::min(s.kappa - ctx.N * out.active[j] + out.arrivals[j], ctx.B);
    s.aoi = out.success[j] ? 1 : s.aoi + 1;
  }
}

double ci95_halfwidth(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(n - 1);
  const boost::math::students_t dist(static_cast<double>(n - 1));
  return boost::math::quantile(boost::math::complement(dist, 0.025)) * std::sqrt(var / n);
}

namespace {

constexpr int kBatches = 20;

struct RealizationResult {
  std::vector<double> link_aoi;
  std::vector<double> link_inv_mu;
  std::vector<double> batch_aoi;
  std::vector<double> hist;
  double attempts = 0, successes = 0;
  double T_sum = 0, T2_sum = 0, T_n = 0;
  double X_sum = 0, X_n = 0;
};

RealizationResult simulate_one(const SimConfig& sim, const PhyConfig& phy, const NetworkConfig& net,
                               long long warmup, std::uint64_t index) {
  Rng rng = Rng::substream(sim.seed, index);
  Topology topo;
  if (sim.single_link) {
    topo.side = sim.side;
    topo.sources = {{0.5 * sim.side, 0.5 * sim.side}};
    topo.receivers = {{0.5 * sim.side + phy.r, 0.5 * sim.side}};
  } else {
    for (int attempt = 0;; ++attempt) {
      try {
        topo = sample_topology(net.lambda, sim.side, phy.r, rng, sim.boundary);
        break;
      } catch (const Error&) {
        if (attempt >= 100) throw;
      }
    }
  }
  const SlotContext ctx = make_slot_context(topo, phy, net, sim);
  std::vector<NodeState> nodes = initial_nodes(ctx.n, ctx, rng);

  const double half = 0.5 * sim.side * std::sqrt(sim.census);
  std::vector<std::size_t> census;
  for (std::size_t j = 0; j < ctx.n; ++j) {
    const Vec2& p = topo.receivers[j];
    if (sim.census >= 1.0 ||
        (std::abs(p.x - 0.5 * sim.side) <= half && std::abs(p.y - 0.5 * sim.side) <= half))
      census.push_back(j);
  }

  const std::size_t m = census.size();
  std::vector<double> aoi_sum(m, 0.0), batch_sum(m, 0.0), att(m, 0.0), suc(m, 0.0);
  std::vector<long long> last_att(m, -1), last_suc(m, -1);
  RealizationResult res;
  res.hist.assign(net.B + 1, 0.0);
  const long long span = sim.slots - warmup;
  const long long batch_len = std::max<long long>(1, span / kBatches);
  long long in_batch = 0;

  SlotOutcome out;
  for (long long t = 0; t < sim.slots; ++t) {
    const bool rec = t >= warmup;
    if (rec)
      for (const auto& s : nodes) res.hist[s.kappa] += 1.0;
    step(nodes, t, ctx, rng, out);
    for (std::size_t c = 0; c < m; ++c) {
      const std::size_t j = census[c];
      if (out.active[j]) {
        if (rec) {
          att[c] += 1.0;
          if (last_att[c] >= warmup) {
            const double T = static_cast<double>(t - last_att[c]);
            res.T_sum += T;
            res.T2_sum += T * T;
            res.T_n += 1.0;
          }
        }
        last_att[c] = t;
      }
      if (out.success[j]) {
        if (rec) {
          suc[c] += 1.0;
          if (last_suc[c] >= warmup) {
            res.X_sum += static_cast<double>(t - last_suc[c]);
            res.X_n += 1.0;
          }
        }
        last_suc[c] = t;
      }
      if (rec) {
        aoi_sum[c] += static_cast<double>(nodes[j].aoi);
        batch_sum[c] += static_cast<double>(nodes[j].aoi);
      }
    }
    if (rec && ++in_batch == batch_len && static_cast<long long>(res.batch_aoi.size()) < kBatches) {
      double acc = 0.0;
      for (double& b : batch_sum) {
        acc += b / static_cast<double>(batch_len);
        b = 0.0;
      }
      if (m > 0) res.batch_aoi.push_back(acc / static_cast<double>(m));
      in_batch = 0;
    }
  }
  for (std::size_t c = 0; c < m; ++c) {
    res.link_aoi.push_back(aoi_sum[c] / static_cast<double>(span));
    if (suc[c] > 0.0) res.link_inv_mu.push_back(att[c] / suc[c]);
    res.attempts += att[c];
    res.successes += suc[c];
  }
  return res;
}

double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

}  // namespace

SimReport run(const SimConfig& sim, const PhyConfig& phy, const NetworkConfig& net) {
  validate(net.chain());
  if (sim.slots < 1 || sim.realizations < 1) throw Error(ErrorKind::BadConfig, "slots and realizations must be positive");
  if (!(sim.census > 0.0 && sim.census <= 1.0)) throw Error(ErrorKind::BadConfig, "census must lie in (0,1]");
  if (!sim.single_link && !(net.lambda > 0.0)) throw Error(ErrorKind::BadConfig, "lambda must be positive");
  const ArrivalPattern ap = sim.arrival.value_or(ArrivalPattern::bernoulli(net.xi));
  const UpdatePattern up = sim.update.value_or(UpdatePattern::bernoulli(net.eta));
  if (up.kind == UpdateKind::Periodic && up.period < 1) throw Error(ErrorKind::BadConfig, "period must be >= 1");
  if (!(ap.mean_rate() > 0.0)) throw Error(ErrorKind::BadConfig, "arrival rate must be positive");
  long long warmup = sim.warmup;
  if (warmup < 0) {
    const double access = up.kind == UpdateKind::Bernoulli ? 1.0 / up.eta : up.period;
    warmup = static_cast<long long>(std::ceil(10.0 * std::max(net.N / ap.mean_rate(), access)));
  }
  if (warmup >= sim.slots) throw Error(ErrorKind::BadConfig, "warmup must be shorter than the horizon");

  std::vector<RealizationResult> results(sim.realizations);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (int i = next++; i < sim.realizations; i = next++) {
      try {
        results[i] = simulate_one(sim, phy, net, warmup, static_cast<std::uint64_t>(i));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int nthreads = std::clamp(sim.threads, 1, sim.realizations);
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < nthreads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  SimReport rep;
  rep.warmup = warmup;
  rep.buffer_counts.assign(net.B + 1, 0.0);
  double att = 0, suc = 0, Ts = 0, T2s = 0, Tn = 0, Xs = 0, Xn = 0;
  std::vector<double> inv_mu_real, inv_mu_all;
  for (const auto& r : results) {
    if (!r.link_aoi.empty()) rep.realization_aoi.push_back(mean(r.link_aoi));
    rep.per_link_aoi.insert(rep.per_link_aoi.end(), r.link_aoi.begin(), r.link_aoi.end());
    inv_mu_all.insert(inv_mu_all.end(), r.link_inv_mu.begin(), r.link_inv_mu.end());
    if (!r.link_inv_mu.empty()) inv_mu_real.push_back(mean(r.link_inv_mu));
    for (std::size_t k = 0; k < r.hist.size(); ++k) rep.buffer_counts[k] += r.hist[k];
    att += r.attempts;
    suc += r.successes;
    Ts += r.T_sum;
    T2s += r.T2_sum;
    Tn += r.T_n;
    Xs += r.X_sum;
    Xn += r.X_n;
  }
  rep.links = static_cast<long long>(rep.per_link_aoi.size());
  rep.network_aoi = mean(rep.realization_aoi);
  rep.ci_halfwidth = rep.realization_aoi.size() >= 2 ? ci95_halfwidth(rep.realization_aoi)
                                                     : ci95_halfwidth(results.front().batch_aoi);
  rep.empirical_mu = att > 0 ? suc / att : 0.0;
  rep.empirical_ET = Tn > 0 ? Ts / Tn : 0.0;
  rep.empirical_ET2 = Tn > 0 ? T2s / Tn : 0.0;
  rep.empirical_EX = Xn > 0 ? Xs / Xn : 0.0;
  rep.inv_mu_links = mean(inv_mu_all);
  rep.inv_mu_ci = inv_mu_real.size() >= 2 ? ci95_halfwidth(inv_mu_real) : ci95_halfwidth(inv_mu_all);
  return rep;
}

std::vector<double> measure_empirical_chain(const SimReport& report) {
  std::vector<double> h = report.buffer_counts;
  double total = 0.0;
  for (double v : h) total += v;
  if (total > 0.0)
    for (double& v : h) v /= total;
  return h;
}

}  // namespace ehaoi
