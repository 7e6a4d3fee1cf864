#include "ehaoi/aoi_formulas.hpp"

#include <cmath>
#include <numbers>

#include "ehaoi/fbl_coding.hpp"

namespace ehaoi {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double threshold_for(const LinkConfig& link, int N) {
  if (link.theta > 0.0) return link.theta;
  const double c = static_cast<double>(N) * link.k;
  return link.approx_threshold ? effective_threshold_approx(c, link.R_t, link.eps)
                               : effective_threshold_exact(c, link.R_t, link.eps);
}

PhyConfig resolve_phy(const LinkConfig& link, int N) {
  return {link.alpha, link.r, link.tx_snr, threshold_for(link, N), link.eps};
}

double omega(double theta, double alpha) {
  if (!(alpha > 2.0)) throw Error(ErrorKind::BadConfig, "alpha must exceed 2");
  if (!(theta >= 0.0)) throw Error(ErrorKind::BadConfig, "theta must be non-negative");
  return 2.0 * std::numbers::pi * std::numbers::pi * std::pow(theta, 2.0 / alpha) /
         (alpha * std::sin(2.0 * std::numbers::pi / alpha));
}

double inv_success_moment(const PhyConfig& phy, double lambda, double p) {
  if (!(p >= 0.0)) throw Error(ErrorKind::BadConfig, "active probability must be >= 0");
  if (!(lambda >= 0.0)) throw Error(ErrorKind::BadConfig, "lambda must be non-negative");
  // Without interferers every node may transmit in every slot.
  if (p >= 1.0 && lambda > 0.0) throw Error(ErrorKind::SaturatedAccess, "active probability reaches 1");
  const double noise = std::isinf(phy.tx_snr) ? 0.0
                                              : std::pow(phy.r, phy.alpha) * phy.theta / phy.tx_snr;
  const double field = lambda > 0.0 ? lambda * omega(phy.theta, phy.alpha) * phy.r * phy.r * p /
                                          std::pow(1.0 - p, 1.0 - 2.0 / phy.alpha)
                                    : 0.0;
  return std::exp(field + noise) / (1.0 - phy.eps);
}

namespace {

struct BandSums {
  double P = 0.0;   // mass at levels >= N
  double A = 0.0;   // sum (N - i - xi) S_{N+i}, i < N
  double C = 0.0;   // sum (N - i)(N - i + 1 - 3 xi) S_{N+i}
  double D = 0.0;   // sum S_{N+i}
  double C2 = 0.0;  // sum (N - i)(N - i + 1 - 2 xi) S_{N+i}
};

BandSums band_sums(const SteadyState& ss, int N, double xi) {
  BandSums b;
  b.P = prob_energy_sufficient(ss, N);
  const int top = static_cast<int>(ss.probs.size()) - 1;
  for (int i = 0; i < N && N + i <= top; ++i) {
    const double s = ss.probs[N + i], m = N - i;
    b.A += (m - xi) * s;
    b.C += m * (m + 1.0 - 3.0 * xi) * s;
    b.C2 += m * (m + 1.0 - 2.0 * xi) * s;
    b.D += s;
  }
  return b;
}

}  // namespace

IntervalMoments interval_moments(const SteadyState& ss, const EnergyChainConfig& cfg) {
  const double xi = cfg.xi, eta = cfg.eta;
  const BandSums b = band_sums(ss, cfg.N, xi);
  if (!(b.P > 0.0)) throw Error(ErrorKind::NeverSufficient, "no mass at levels >= N");
  IntervalMoments m;
  m.mean_T = 1.0 / eta + b.A / (xi * b.P);
  m.second_T = (2.0 - eta) / (eta * eta) + b.C / (xi * xi * b.P) +
               2.0 * b.A / (xi * eta * b.P) + b.D / b.P;
  return m;
}

double network_aoi_general(const SteadyState& ss, const PhyConfig& phy, const NetworkConfig& net) {
  const IntervalMoments m = interval_moments(ss, net.chain());
  const double p = net.eta * prob_energy_sufficient(ss, net.N);
  const double inv_mu = inv_success_moment(phy, net.lambda, p);
  return m.second_T / (2.0 * m.mean_T) + (inv_mu - 1.0) * m.mean_T + 0.5;
}

double network_aoi_expanded(const SteadyState& ss, const PhyConfig& phy, const NetworkConfig& net) {
  const double xi = net.xi, eta = net.eta;
  const BandSums b = band_sums(ss, net.N, xi);
  if (!(b.P > 0.0)) throw Error(ErrorKind::NeverSufficient, "no mass at levels >= N");
  const double inv_mu = inv_success_moment(phy, net.lambda, eta * b.P);
  const double num = 0.5 * eta * b.C2 - xi * b.A - eta / b.P * b.A * b.A;
  return inv_mu * (1.0 / eta + b.A / (xi * b.P)) + num / (xi * xi * b.P + xi * eta * b.A);
}

double aoi_slotted_aloha(const PhyConfig& phy, double lambda, double p) {
  return inv_success_moment(phy, lambda, p) / p;
}

SmallBufferAoi network_aoi_small_buffer(const PhyConfig& phy, const NetworkConfig& net) {
  if (net.B != net.N) throw Error(ErrorKind::OutOfRegime, "B must equal N");
  const double xi = net.xi, eta = net.eta;
  const int N = net.N;
  SmallBufferAoi out;
  out.active_prob = xi * eta / (N * eta + xi * (1.0 - eta));
  out.slotted_aloha = aoi_slotted_aloha(phy, net.lambda, out.active_prob);
  out.rectification = 1.0 - (1.0 / eta + (N - 1.0) / (2.0 * xi)) * N * out.active_prob / xi;
  out.total = out.slotted_aloha + out.rectification;
  return out;
}

double network_aoi_greedy(const PhyConfig& phy, const NetworkConfig& net) {
  if (net.eta != 1.0) throw Error(ErrorKind::OutOfRegime, "eta must be 1");
  const double p = net.xi / net.N;
  return net.N * inv_success_moment(phy, net.lambda, p) / net.xi - (net.N - 1.0) / (2.0 * net.xi);
}

double network_aoi_large_buffer(const PhyConfig& phy, const NetworkConfig& net) {
  const double xi = net.xi, eta = net.eta;
  const int N = net.N;
  if (!(xi > 0.0 && xi <= 1.0) || !(eta > 0.0 && eta <= 1.0))
    throw Error(ErrorKind::BadConfig, "xi and eta must lie in (0,1]");
  if (N * eta <= xi) return inv_success_moment(phy, net.lambda, eta) / eta;
  const double z = solve_char_root(N, xi, eta);
  return N * inv_success_moment(phy, net.lambda, xi / N) / xi - (N - 1.0) / (2.0 * xi) +
         zeta_rectification(N, eta, xi, z);
}

double aoi_scaling_large_n(const LinkConfig& link, int N, double xi) {
  const double noise = std::isinf(link.tx_snr)
                           ? 0.0
                           : std::pow(link.r, link.alpha) * (std::exp2(link.R_t) - 1.0) / link.tx_snr;
  return N / (2.0 * xi) * (2.0 * std::exp(noise) / (1.0 - link.eps) - 1.0);
}

double zeta_rectification(int N, double eta, double xi, double z) {
  return -z / (xi * (1.0 - z)) + z / (N * eta * (1.0 - z)) + 1.0 / eta - 1.0;
}

}  // namespace ehaoi
