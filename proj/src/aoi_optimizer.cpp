#include "ehaoi/aoi_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

namespace ehaoi {

const char* to_string(Regime r) { return r == Regime::ESR ? "ESR" : "ECR"; }

double optimal_eta_esr(double lambda, double omega_n, double r, double alpha) {
  if (!(alpha > 2.0)) throw Error(ErrorKind::BadConfig, "alpha must exceed 2");
  const double K = lambda * omega_n * r * r;
  if (!(K > 0.0)) return 1.0;
  // K eta (1 - 2 eta/alpha)(1-eta)^{2/alpha - 2} rises from 0 to infinity on
  // (0, min(1, alpha/2)), so the crossing with 1 is unique.
  const auto g = [&](double e) {
    return K * e * (1.0 - 2.0 * e / alpha) * std::pow(1.0 - e, 2.0 / alpha - 2.0) - 1.0;
  };
  double lo = 0.0, hi = std::min(1.0, alpha / 2.0);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (g(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

double optimal_eta_esr_cubic(double lambda, double omega_n, double r, double alpha) {
  using cd = std::complex<double>;
  const double K = lambda * omega_n * r * r;
  if (!(K > 0.0)) return 1.0;
  const double a = alpha, a2 = a * a, a3 = a2 * a, a4 = a3 * a;
  const double X = 432 * K * K * a2 - 288 * K * K * a3 - 16 * K * K * K * a3 - 72 * K * a4 +
                   60 * K * K * a4 + 24 * K * a4 * a + 2 * a4 * a2;
  const double Y = a2 * (12 * K * (K + 2) - (4 * K + a) * (4 * K + a));
  const cd R = std::pow(cd(X) + std::sqrt(cd(X * X + 4 * Y * Y * Y)), 1.0 / 3.0);
  const cd i3(0.0, std::sqrt(3.0));
  const cd eta = a * (4 * K + a) / (12 * K) + std::cbrt(2.0) * Y * (1.0 + i3) / (24 * K * R) -
                 (1.0 - i3) * R / (std::cbrt(2.0) * 24 * K);
  return eta.real();
}

double clamp_eta_esr(double eta_hat, double xi, int n) { return std::min(eta_hat, xi / n); }

int optimal_n_esr(double xi, double eta) {
  // The guard keeps floor(xi / (xi / N)) at N under rounding.
  return std::max(1, static_cast<int>(std::floor(xi / eta * (1.0 + 1e-12))));
}

double esr_objective(const LinkConfig& link, double lambda, double eta, int n) {
  const PhyConfig phy = resolve_phy(link, n);
  return inv_success_moment(phy, lambda, eta) / eta;
}

double ecr_objective(const LinkConfig& link, double lambda, double xi, int n) {
  NetworkConfig net{lambda, n, n, xi, 1.0};
  return network_aoi_greedy(resolve_phy(link, n), net);
}

EsrResult esr_search(const LinkConfig& link, double lambda, double xi, const OptimizerSettings& s) {
  EsrResult out;
  int n = 1;
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= s.max_iter; ++it) {
    const PhyConfig phy = resolve_phy(link, n);
    const double eta =
        clamp_eta_esr(optimal_eta_esr(lambda, omega(phy.theta, phy.alpha), phy.r, phy.alpha), xi, n);
    const double aoi = inv_success_moment(phy, lambda, eta) / eta;
    out.trace.push_back({it, eta, n, aoi});
    if (aoi < out.aoi || it == 1) {
      out.aoi = aoi;
      out.eta = eta;
      out.n = n;
    }
    if (std::abs(aoi - prev) < s.tol) return out;
    prev = aoi;
    n = optimal_n_esr(xi, eta);
  }
  throw Error(ErrorKind::IterationBudgetExceeded, "ESR alternation did not settle");
}

EcrResult ecr_search(const LinkConfig& link, double lambda, double xi, const OptimizerSettings& s) {
  if (s.n_upper < 1) throw Error(ErrorKind::BadConfig, "n_upper must be >= 1");
  // With eta = 1 the regime needs N > xi.
  const int n0 = static_cast<int>(std::floor(xi)) + 1;
  EcrResult out;
  out.n = n0;
  out.aoi = ecr_objective(link, lambda, xi, n0);
  for (int n = n0 + 1; n <= s.n_upper; ++n) {
    const double aoi = ecr_objective(link, lambda, xi, n);
    if (aoi > out.aoi) return out;
    out.aoi = aoi;
    out.n = n;
  }
  out.upper_bound_hit = true;
  return out;
}

OptimumResult optimize(const LinkConfig& link, double lambda, double xi, const OptimizerSettings& s) {
  const EsrResult esr = esr_search(link, lambda, xi, s);
  const EcrResult ecr = ecr_search(link, lambda, xi, s);
  OptimumResult out;
  out.trace = esr.trace;
  out.upper_bound_hit = ecr.upper_bound_hit;
  // Equal values within rounding count as a tie, and ties go to ESR.
  if (esr.aoi <= ecr.aoi * (1.0 + 1e-12)) {
    out.aoi_star = esr.aoi;
    out.eta_star = esr.eta;
    out.n_star = esr.n;
    out.regime = Regime::ESR;
  } else {
    out.aoi_star = ecr.aoi;
    out.eta_star = 1.0;
    out.n_star = ecr.n;
    out.regime = Regime::ECR;
  }
  return out;
}

}  // namespace ehaoi
