#pragma once

// Network-average AoI of a Poisson field of energy-harvesting links.

#include <limits>

#include "ehaoi/energy_chain.hpp"
#include "ehaoi/error.hpp"

namespace ehaoi {

double db_to_linear(double db);

// Link-level parameters that do not depend on the blocklength.
struct LinkConfig {
  double alpha = 3.8;
  double r = 3.0;
  double tx_snr = 19.952623149688797;  // P_tx / sigma^2, linear (13 dB)
  double R_t = 0.825;
  double eps = 1e-6;
  int k = 100;
  bool approx_threshold = false;
  double theta = 0.0;  // > 0 fixes the threshold instead of deriving it
};

struct PhyConfig {
  double alpha = 3.8;
  double r = 3.0;
  double tx_snr = std::numeric_limits<double>::infinity();
  double theta = 1.0;
  double eps = 0.0;
};

struct NetworkConfig {
  double lambda = 0.01;
  int N = 1;
  int B = 1;
  double xi = 0.5;
  double eta = 0.5;
  EnergyChainConfig chain() const { return {N, B, xi, eta}; }
};

// Threshold for blocklength N k, exact unless link.approx_threshold.
double threshold_for(const LinkConfig& link, int N);
PhyConfig resolve_phy(const LinkConfig& link, int N);

double omega(double theta, double alpha);

// E[1/mu] for a node active with probability p_active.
double inv_success_moment(const PhyConfig& phy, double lambda, double p_active);

struct IntervalMoments {
  double mean_T = 0.0;
  double second_T = 0.0;
};

IntervalMoments interval_moments(const SteadyState& ss, const EnergyChainConfig& cfg);

double network_aoi_general(const SteadyState& ss, const PhyConfig& phy, const NetworkConfig& net);

// The same quantity written as one fraction over the steady state.
double network_aoi_expanded(const SteadyState& ss, const PhyConfig& phy, const NetworkConfig& net);

// Slotted ALOHA without energy limits at access probability p.
double aoi_slotted_aloha(const PhyConfig& phy, double lambda, double p);

struct SmallBufferAoi {
  double total = 0.0;
  double slotted_aloha = 0.0;  // aoi_slotted_aloha at the active probability
  double rectification = 0.0;  // total - slotted_aloha
  double active_prob = 0.0;
};

SmallBufferAoi network_aoi_small_buffer(const PhyConfig& phy, const NetworkConfig& net);
double network_aoi_greedy(const PhyConfig& phy, const NetworkConfig& net);
double network_aoi_large_buffer(const PhyConfig& phy, const NetworkConfig& net);
double aoi_scaling_large_n(const LinkConfig& link, int N, double xi);
double zeta_rectification(int N, double eta, double xi, double z);

}  // namespace ehaoi
