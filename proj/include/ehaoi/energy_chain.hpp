#pragma once

// Energy buffer of one node: a bulk-service Markov chain on levels 0..B.
// A slot adds one unit with probability xi; a node holding at least N units
// transmits with probability eta and spends N units.

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ehaoi/error.hpp"

namespace ehaoi {

struct EnergyChainConfig {
  int N = 1;
  int B = 1;
  double xi = 0.5;
  double eta = 0.5;
};

void validate(const EnergyChainConfig& cfg);

// eta / (xi (1 - eta)); infinite when eta = 1.
double phi(const EnergyChainConfig& cfg);

enum class SteadyRegime {
  NumericOracle,
  ClosedN1,
  ClosedSmallBuffer,
  ClosedLargeBuffer,
  GreedyEta1,
  InfiniteBuffer,
};

const char* to_string(SteadyRegime r);

struct SteadyState {
  std::vector<double> probs;
  SteadyRegime regime = SteadyRegime::NumericOracle;
  std::optional<double> char_root;
  // InfiniteBuffer only: mass of the geometric tail beyond probs.back().
  double tail_mass = 0.0;
};

Eigen::MatrixXd build_transition_matrix(const EnergyChainConfig& cfg);

// Dense LU on the transposed balance equations with one row replaced by the
// normalization constraint. Throws NonConvergence if ||S P - S|| > tol.
SteadyState solve_steady_numeric(const Eigen::MatrixXd& P, double tol = 1e-12);

// N = 1, xi != eta, eta < 1.
SteadyState steady_closed_n1(const EnergyChainConfig& cfg);

// B = N, any N >= 1.
SteadyState steady_closed_unit_buffer(const EnergyChainConfig& cfg);

// N >= 2, N <= B <= 2N.
SteadyState steady_closed_small_buffer(const EnergyChainConfig& cfg);

// N >= 2, B >= 3N+1. Exact for finite B: the distribution is generated by
// the level-crossing equations from the top level downward. The
// characteristic root z is stored for the geometric middle band.
SteadyState steady_closed_large_buffer(const EnergyChainConfig& cfg);

// Single geometric-mode expression for B >= 3N+1. It ignores the boundary
// modes excited at the top of the buffer, so it is exact only as B grows;
// the error decays geometrically in B. Kept for comparison studies.
SteadyState steady_single_mode_large_buffer(const EnergyChainConfig& cfg);

// eta = 1, any B >= N. Levels above N are never occupied.
SteadyState steady_greedy(const EnergyChainConfig& cfg);

// Unbounded buffer, N >= 2, N eta > xi. Levels 0..level are stored and the
// tail beyond is summed analytically. level < 0 picks the level at which the
// tail drops below 1e-12.
SteadyState steady_infinite_buffer(const EnergyChainConfig& cfg, int level = -1);

// Picks the closed form for the regime, or the numeric solve where none applies.
SteadyState steady_state(const EnergyChainConfig& cfg);

// (1-xi) eta z^{N+1} + xi eta z^N - (1 - (1-xi)(1-eta)) z + xi (1-eta)
double char_poly(int N, double xi, double eta, double z);

// Positive root other than z = 1. Returns exactly 1 when N eta == xi.
double solve_char_root(int N, double xi, double eta);

// Explicit approximation: exact for N in {1, 2}.
double approx_char_root(int N, double xi, double eta);

double prob_energy_sufficient(const SteadyState& ss, int N);

}  // namespace ehaoi
