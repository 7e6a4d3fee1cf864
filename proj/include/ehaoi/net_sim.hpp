#pragma once

// Slotted Monte Carlo simulator of energy-harvesting links on a square torus.

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "ehaoi/aoi_formulas.hpp"

namespace ehaoi {

// Counter-based generator: output n is a bijective hash of (key, n), so every
// (seed, realization) pair owns an independent, reproducible stream.
class Rng {
 public:
  using result_type = std::uint64_t;
  explicit Rng(std::uint64_t key) : key_(mix(key)) {}
  static Rng substream(std::uint64_t seed, std::uint64_t index) {
    return Rng(mix(seed) ^ mix(index + 0x632BE59BD9B4E019ULL));
  }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return mix(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL); }
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  double exponential() { return -std::log1p(-uniform()); }
  bool bernoulli(double p) { return uniform() < p; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Topology {
  std::vector<Vec2> sources;
  std::vector<Vec2> receivers;
  double side = 100.0;
};

enum class Boundary { Torus, Planar };

// Receivers sit at distance r from their source in a uniform direction.
// Throws EmptyRealization when no source is drawn.
Topology sample_topology(double lambda, double side, double r, Rng& rng,
                         Boundary boundary = Boundary::Torus);
double distance(const Vec2& a, const Vec2& b, double side, Boundary boundary);

enum class ArrivalKind { Bernoulli, Binomial, TwoStateMarkov };

struct ArrivalPattern {
  ArrivalKind kind = ArrivalKind::Bernoulli;
  double xi = 0.5;
  int e_max = 1;
  double xi_hat = 0.5;
  double xi_good = 0.0, xi_bad = 0.0, p_gb = 0.0, p_bg = 0.0;

  static ArrivalPattern bernoulli(double xi);
  static ArrivalPattern binomial(int e_max, double xi_hat);
  static ArrivalPattern markov(double xi_good, double xi_bad, double p_gb, double p_bg);
  double mean_rate() const;
};

enum class UpdateKind { Bernoulli, Periodic };

struct UpdatePattern {
  UpdateKind kind = UpdateKind::Bernoulli;
  double eta = 0.5;
  int period = 1;

  static UpdatePattern bernoulli(double eta);
  static UpdatePattern periodic(int period);
};

struct SimConfig {
  long long slots = 100000;
  long long warmup = -1;  // < 0: 10 max(N / rate, 1 / eta or period)
  int realizations = 20;
  std::uint64_t seed = 1;
  std::optional<ArrivalPattern> arrival;  // default Bernoulli(net.xi)
  std::optional<UpdatePattern> update;    // default Bernoulli(net.eta)
  double census = 1.0;                    // area fraction of the centred square
  double side = 100.0;
  Boundary boundary = Boundary::Torus;
  double cutoff = 0.0;                    // > 0 drops interferers beyond it
  int threads = 1;
  bool single_link = false;               // one isolated link, no interference
};

struct NodeState {
  int kappa = 0;
  long long aoi = 1;
  bool markov_good = true;
  long long next_period_slot = 0;
};

// Static per-realization inputs of one slot.
struct SlotContext {
  int N = 1;
  int B = 1;
  double theta = 1.0;
  double inv_snr = 0.0;
  double eps = 0.0;
  ArrivalPattern arrival;
  UpdatePattern update;
  std::size_t n = 0;
  std::vector<double> gain;  // gain[i * n + j]: source i to receiver j
};

SlotContext make_slot_context(const Topology& topo, const PhyConfig& phy, const NetworkConfig& net,
                              const SimConfig& sim);

struct SlotOutcome {
  std::vector<int> arrivals;
  std::vector<char> active;
  std::vector<char> success;
};

// Advances every node by one slot.
void step(std::vector<NodeState>& nodes, long long t, const SlotContext& ctx, Rng& rng,
          SlotOutcome& out);

// Fresh nodes: empty buffers, arrival state and periodic phase drawn from rng.
std::vector<NodeState> initial_nodes(std::size_t n, const SlotContext& ctx, Rng& rng);

struct SimReport {
  double network_aoi = 0.0;
  double ci_halfwidth = 0.0;
  double empirical_mu = 0.0;
  double empirical_ET = 0.0;
  double empirical_ET2 = 0.0;
  double empirical_EX = 0.0;    // mean interval between deliveries
  double inv_mu_links = 0.0;    // mean over links of attempts / successes
  double inv_mu_ci = 0.0;
  std::vector<double> per_link_aoi;
  std::vector<double> realization_aoi;
  std::vector<double> buffer_counts;  // occupancy of each level, all nodes
  long long links = 0;
  long long warmup = 0;
};

SimReport run(const SimConfig& sim, const PhyConfig& phy, const NetworkConfig& net);

// Normalized buffer occupancy from a report.
std::vector<double> measure_empirical_chain(const SimReport& report);

// Half-width of a two-sided 95% Student interval for the mean of xs.
double ci95_halfwidth(const std::vector<double>& xs);

}  // namespace ehaoi
