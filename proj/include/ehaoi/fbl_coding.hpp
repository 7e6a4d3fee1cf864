#pragma once

// Normal-approximation coding rate over a blocklength of c_N channel uses and
// the SINR threshold that makes this rate equal to a target.

#include "ehaoi/error.hpp"

namespace ehaoi {

struct CodingConfig {
  int k = 100;        // bits per energy unit
  int N = 1;          // energy units per packet
  double R_t = 0.825; // bits per channel use
  double eps = 1e-6;  // frame error rate
  double c_N() const { return static_cast<double>(N) * k; }
};

double q_function(double x);
double q_inverse(double p);

double max_coding_rate(double gamma, double c_N, double eps);

// Bisection on [0.1, 2 x approx]; residual below 1e-12.
// Throws TargetRateTooLow if R_t <= max_coding_rate(0.1).
double effective_threshold_exact(double c_N, double R_t, double eps);
double effective_threshold_exact(const CodingConfig& cfg);

// Closed form with the dispersion factor set to one. Never below the exact value.
double effective_threshold_approx(double c_N, double R_t, double eps);
double effective_threshold_approx(const CodingConfig& cfg);

}  // namespace ehaoi
