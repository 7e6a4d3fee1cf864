#pragma once

// Joint choice of update rate eta and packet energy N for an unbounded buffer.
// Energy-sufficient regime (ESR): N eta <= xi. Energy-constrained (ECR): N eta > xi.

#include <vector>

#include "ehaoi/aoi_formulas.hpp"

namespace ehaoi {

enum class Regime { ESR, ECR };
const char* to_string(Regime r);

struct OptimizerSettings {
  double tol = 1e-6;
  int max_iter = 50;
  int n_upper = 200;
};

struct TraceEntry {
  int iteration = 0;
  double eta = 0.0;
  int n = 0;
  double aoi = 0.0;
};

struct OptimumResult {
  double aoi_star = 0.0;
  double eta_star = 0.0;
  int n_star = 1;
  Regime regime = Regime::ESR;
  std::vector<TraceEntry> trace;
  bool upper_bound_hit = false;
};

// Stationary point of the ESR objective in eta, from the exact first-order condition.
double optimal_eta_esr(double lambda, double omega_n, double r, double alpha);

// Root in (0,1) of the cubic obtained with (1-eta)^{2/alpha} ~ 1 - 2 eta / alpha,
// from the explicit radical form with principal complex branches.
double optimal_eta_esr_cubic(double lambda, double omega_n, double r, double alpha);

double clamp_eta_esr(double eta_hat, double xi, int n);
int optimal_n_esr(double xi, double eta);

// Objective in each regime for an unbounded buffer.
double esr_objective(const LinkConfig& link, double lambda, double eta, int n);
double ecr_objective(const LinkConfig& link, double lambda, double xi, int n);

struct EsrResult {
  double aoi = 0.0;
  double eta = 0.0;
  int n = 1;
  std::vector<TraceEntry> trace;
};

struct EcrResult {
  double aoi = 0.0;
  int n = 1;
  bool upper_bound_hit = false;
};

EsrResult esr_search(const LinkConfig& link, double lambda, double xi,
                     const OptimizerSettings& s = {});
EcrResult ecr_search(const LinkConfig& link, double lambda, double xi,
                     const OptimizerSettings& s = {});
OptimumResult optimize(const LinkConfig& link, double lambda, double xi,
                       const OptimizerSettings& s = {});

}  // namespace ehaoi
