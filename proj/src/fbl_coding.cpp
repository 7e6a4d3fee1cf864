#include "ehaoi/fbl_coding.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/erf.hpp>

namespace ehaoi {

namespace {

constexpr double kGammaLo = 0.1;

void check(double c_N, double R_t, double eps) {
  if (!(c_N >= 1.0)) throw Error(ErrorKind::BadConfig, "blocklength must be >= 1");
  if (!(R_t > 0.0)) throw Error(ErrorKind::BadConfig, "target rate must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorKind::BadConfig, "eps must lie in (0,1)");
}

}  // namespace

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double q_inverse(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::BadConfig, "q_inverse needs p in (0,1)");
  return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double max_coding_rate(double gamma, double c_N, double eps) {
  const double s = 1.0 - 1.0 / ((1.0 + gamma) * (1.0 + gamma));
  return std::log2(1.0 + gamma) + std::log2(c_N) / (2.0 * c_N) -
         std::numbers::log2e * q_inverse(eps) / std::sqrt(c_N) * std::sqrt(s);
}

double effective_threshold_approx(double c_N, double R_t, double eps) {
  check(c_N, R_t, eps);
  return std::exp2(R_t + std::numbers::log2e * q_inverse(eps) / std::sqrt(c_N) -
                   std::log2(c_N) / (2.0 * c_N)) - 1.0;
}

double effective_threshold_exact(double c_N, double R_t, double eps) {
  check(c_N, R_t, eps);
  if (R_t <= max_coding_rate(kGammaLo, c_N, eps))
    throw Error(ErrorKind::TargetRateTooLow,
                "target rate " + std::to_string(R_t) + " below the rate at SINR 0.1");
  double lo = kGammaLo;
  double hi = std::max(2.0 * effective_threshold_approx(c_N, R_t, eps), 2.0 * kGammaLo);
  while (max_coding_rate(hi, c_N, eps) < R_t) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (max_coding_rate(mid, c_N, eps) < R_t ? lo : hi) = mid;
  }
  const double dlo = std::abs(max_coding_rate(lo, c_N, eps) - R_t);
  const double dhi = std::abs(max_coding_rate(hi, c_N, eps) - R_t);
  return dlo <= dhi ? lo : hi;
}

double effective_threshold_exact(const CodingConfig& c) {
  return effective_threshold_exact(c.c_N(), c.R_t, c.eps);
}

double effective_threshold_approx(const CodingConfig& c) {
  return effective_threshold_approx(c.c_N(), c.R_t, c.eps);
}

}  // namespace ehaoi
