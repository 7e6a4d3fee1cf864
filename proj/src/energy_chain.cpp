#include "ehaoi/energy_chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace ehaoi {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::BadConfig: return "bad-config";
    case ErrorKind::OutOfRegime: return "out-of-regime";
    case ErrorKind::DegenerateRatio: return "degenerate-ratio";
    case ErrorKind::NotRecurrent: return "not-recurrent";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::NeverSufficient: return "never-sufficient";
    case ErrorKind::SaturatedAccess: return "saturated-access";
    case ErrorKind::TargetRateTooLow: return "target-rate-too-low";
    case ErrorKind::IterationBudgetExceeded: return "iteration-budget-exceeded";
    case ErrorKind::EmptyRealization: return "empty-realization";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

const char* to_string(SteadyRegime r) {
  switch (r) {
    case SteadyRegime::NumericOracle: return "numeric";
    case SteadyRegime::ClosedN1: return "closed_n1";
    case SteadyRegime::ClosedSmallBuffer: return "closed_small_buffer";
    case SteadyRegime::ClosedLargeBuffer: return "closed_large_buffer";
    case SteadyRegime::GreedyEta1: return "greedy_eta1";
    case SteadyRegime::InfiniteBuffer: return "infinite_buffer";
  }
  return "unknown";
}

void validate(const EnergyChainConfig& c) {
  if (c.N < 1) throw Error(ErrorKind::BadConfig, "N must be >= 1");
  if (c.B < c.N) throw Error(ErrorKind::BadConfig, "B must be >= N");
  if (!(c.xi > 0.0 && c.xi <= 1.0)) throw Error(ErrorKind::BadConfig, "xi must lie in (0,1]");
  if (!(c.eta > 0.0 && c.eta <= 1.0)) throw Error(ErrorKind::BadConfig, "eta must lie in (0,1]");
}

double phi(const EnergyChainConfig& c) {
  if (c.eta >= 1.0) return std::numeric_limits<double>::infinity();
  return c.eta / (c.xi * (1.0 - c.eta));
}

namespace {

void require_open_unit(const EnergyChainConfig& c) {
  if (!(c.xi < 1.0 && c.eta < 1.0))
    throw Error(ErrorKind::OutOfRegime, "closed form needs xi < 1 and eta < 1");
}

// Renormalizes closed-form output; a sum far from 1 means the formula broke.
SteadyState finish(std::vector<double> s, SteadyRegime regime,
                   std::optional<double> z = std::nullopt, double tail = 0.0) {
  double total = std::accumulate(s.begin(), s.end(), 0.0) + tail;
  if (!std::isfinite(total) || std::abs(total - 1.0) > 1e-9)
    throw Error(ErrorKind::NonConvergence,
                "closed form mass " + std::to_string(total) + " is not 1");
  for (double& v : s) v = std::max(v, 0.0) / total;
  return {std::move(s), regime, z, tail / total};
}

}  // namespace

Eigen::MatrixXd build_transition_matrix(const EnergyChainConfig& c) {
  validate(c);
  const int N = c.N, B = c.B;
  const double xi = c.xi, eta = c.eta;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(B + 1, B + 1);
  for (int k = 0; k <= B; ++k) {
    if (k < N) {
      P(k, k) += 1.0 - xi;
      P(k, k + 1) += xi;  // k + 1 <= N <= B
    } else if (k < B) {
      P(k, k) += (1.0 - eta) * (1.0 - xi);
      P(k, k + 1) += (1.0 - eta) * xi;
      P(k, k - N) += eta * (1.0 - xi);
      P(k, k - N + 1) += eta * xi;
    } else {
      P(k, k) += 1.0 - eta;
      P(k, k - N) += eta * (1.0 - xi);
      P(k, k - N + 1) += eta * xi;
    }
  }
  return P;
}

SteadyState solve_steady_numeric(const Eigen::MatrixXd& P, double tol) {
  const Eigen::Index n = P.rows();
  if (n == 0 || P.cols() != n) throw Error(ErrorKind::BadConfig, "matrix must be square");
  Eigen::MatrixXd A = P.transpose() - Eigen::MatrixXd::Identity(n, n);
  A.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  Eigen::VectorXd s = A.fullPivLu().solve(b);
  for (Eigen::Index i = 0; i < n; ++i)
    if (s(i) < 0.0 && s(i) > -tol) s(i) = 0.0;
  s /= s.sum();
  const double residual = (P.transpose() * s - s).cwiseAbs().maxCoeff();
  if (!std::isfinite(residual) || residual > tol || s.minCoeff() < 0.0)
    throw Error(ErrorKind::NonConvergence,
                "steady-state residual " + std::to_string(residual));
  return {std::vector<double>(s.data(), s.data() + n), SteadyRegime::NumericOracle,
          std::nullopt, 0.0};
}

SteadyState steady_closed_n1(const EnergyChainConfig& c) {
  validate(c);
  if (c.N != 1) throw Error(ErrorKind::OutOfRegime, "N must be 1");
  require_open_unit(c);
  if (c.xi == c.eta) throw Error(ErrorKind::DegenerateRatio, "xi == eta");
  const int B = c.B;
  const double xi = c.xi, eta = c.eta;
  const double rho = (1.0 - eta) * xi / ((1.0 - xi) * eta);
  std::vector<double> s(B + 1);
  if (rho <= 1.0) {
    s[0] = (eta - xi) / (eta - xi * std::pow(rho, B));
    for (int i = 1; i <= B; ++i) s[i] = std::pow(rho, i) * s[0] / (1.0 - eta);
  } else {
    // Same expression divided through by rho^B so large B cannot overflow.
    const double den = eta * std::pow(rho, -B) - xi;
    s[0] = (eta - xi) * std::pow(rho, -B) / den;
    for (int i = 1; i <= B; ++i)
      s[i] = std::pow(rho, i - B) * (eta - xi) / ((1.0 - eta) * den);
  }
  return finish(std::move(s), SteadyRegime::ClosedN1);
}

SteadyState steady_closed_unit_buffer(const EnergyChainConfig& c) {
  validate(c);
  if (c.B != c.N) throw Error(ErrorKind::OutOfRegime, "B must equal N");
  const int N = c.N;
  const double xi = c.xi, eta = c.eta;
  const double d = N * eta + xi * (1.0 - eta);
  std::vector<double> s(N + 1, eta / d);
  s[0] = eta * (1.0 - xi) / d;
  s[N] = xi / d;
  return finish(std::move(s), SteadyRegime::ClosedSmallBuffer);
}

SteadyState steady_closed_small_buffer(const EnergyChainConfig& c) {
  validate(c);
  if (c.B < c.N || c.B > 2 * c.N) throw Error(ErrorKind::OutOfRegime, "B must lie in [N, 2N]");
  if (c.B == c.N) return steady_closed_unit_buffer(c);
  if (c.N < 2) throw Error(ErrorKind::OutOfRegime, "N must be >= 2");
  require_open_unit(c);
  const int N = c.N, B = c.B;
  const double xi = c.xi, eta = c.eta, f = phi(c), g = 1.0 + f;
  std::vector<double> s(B + 1);
  if (B < 2 * N) {
    const double sb = 1.0 / ((1.0 - eta) * (1.0 + N * f * std::pow(g, B - N)));
    const double flat = (1.0 - eta) * std::pow(g, B - N) * f * sb;
    for (int i = 0; i <= B; ++i) {
      if (i <= B - N - 1)
        s[i] = (1.0 - eta - std::pow(g, -i - 1)) * std::pow(g, B - N) * f * sb;
      else if (i == B - N)
        s[i] = flat - eta * sb;
      else if (i <= N - 1)
        s[i] = flat;
      else if (i <= B - 1)
        s[i] = std::pow(g, B - i - 1) * f * sb;
      else
        s[i] = sb;
    }
  } else {
    const double sb = 1.0 / ((1.0 - eta) * (1.0 + N * f * std::pow(g, N)) - N * eta * f);
    for (int i = 0; i <= B; ++i) {
      if (i == 0)
        s[i] = (1.0 - xi) * eta / xi * (std::pow(g, N - 1) * f - eta / (1.0 - eta)) * sb;
      else if (i <= N - 1)
        s[i] = (eta / xi * std::pow(g, N) - eta * f - f * std::pow(g, N - 1 - i)) * sb;
      else if (i == N)
        s[i] = f * (std::pow(g, N - 1) - xi) * sb;
      else if (i <= B - 1)
        s[i] = std::pow(g, B - i - 1) * f * sb;
      else
        s[i] = sb;
    }
  }
  return finish(std::move(s), SteadyRegime::ClosedSmallBuffer);
}

SteadyState steady_closed_large_buffer(const EnergyChainConfig& c) {
  validate(c);
  if (c.N < 2 || c.B < 3 * c.N + 1)
    throw Error(ErrorKind::OutOfRegime, "needs N >= 2 and B >= 3N+1");
  require_open_unit(c);
  const int N = c.N, B = c.B;
  const double xi = c.xi, eta = c.eta;
  // Flow up across the cut between j and j+1 equals flow down:
  //   u_j S_j = eta * sum_{k=max(j+1,N)}^{j+N-1} S_k + eta (1-xi) S_{j+N}.
  // Every term is non-negative, so the downward sweep is free of cancellation.
  std::vector<double> s(B + 1, 0.0);
  s[B] = 1.0;
  for (int j = B - 1; j >= 0; --j) {
    double down = 0.0;
    for (int k = std::max(j + 1, N); k <= std::min(j + N - 1, B); ++k) down += s[k];
    down *= eta;
    if (j + N <= B) down += eta * (1.0 - xi) * s[j + N];
    const double up = j < N ? xi : (1.0 - eta) * xi;
    s[j] = down / up;
    if (s[j] > 1e250)
      for (int k = j; k <= B; ++k) s[k] *= 1e-250;
  }
  const double total = std::accumulate(s.begin(), s.end(), 0.0);
  for (double& v : s) v /= total;
  return finish(std::move(s), SteadyRegime::ClosedLargeBuffer, solve_char_root(N, xi, eta));
}

SteadyState steady_single_mode_large_buffer(const EnergyChainConfig& c) {
  validate(c);
  if (c.N < 2 || c.B < 3 * c.N + 1)
    throw Error(ErrorKind::OutOfRegime, "needs N >= 2 and B >= 3N+1");
  require_open_unit(c);
  const int N = c.N, B = c.B;
  const double xi = c.xi, eta = c.eta, f = phi(c), g = 1.0 + f;
  const double z = solve_char_root(N, xi, eta);
  if (z == 1.0) throw Error(ErrorKind::DegenerateRatio, "N eta == xi");
  const int m = B - 2 * N - 1;
  // Everything is carried relative to z^m when z > 1 to keep z^m finite.
  const double scale_log = z > 1.0 ? m * std::log(z) : 0.0;
  const double zm = std::exp(m * std::log(z) - scale_log);
  const double top = f * (std::pow(g, N) - (1.0 + eta) / (1.0 - eta));
  const double den = N * eta * std::exp(-scale_log) - xi * z * zm +
                     xi * (std::pow(g, N) - xi * f) * (1.0 - z) * zm / top;
  const double s0 = eta * (1.0 - xi) * (1.0 - z) / den;  // S_0 times z^m
  const double sb = xi / (eta * (1.0 - xi)) * zm / top * s0;
  std::vector<double> s(B + 1);
  const double unscale = std::exp(-scale_log);
  for (int i = 0; i <= B; ++i) {
    if (i == 0)
      s[i] = s0 * unscale;
    else if (i <= N - 2)
      s[i] = (1.0 + (xi / (1.0 - xi) + z) / (1.0 - z) * (1.0 - std::pow(z, i))) * s0 * unscale;
    else if (i == N - 1)
      s[i] = xi * (1.0 - eta) / (eta * (1.0 - xi) * z) * s0 * unscale;
    else if (i <= B - N - 1)
      s[i] = xi / (eta * (1.0 - xi)) * std::exp((i - N) * std::log(z) - scale_log) * s0;
    else if (i == B - N)
      s[i] = f * (std::pow(g, N - 1) - xi) * sb;
    else if (i <= B - 1)
      s[i] = f * std::pow(g, B - i - 1) * sb;
    else
      s[i] = sb;
  }
  return finish(std::move(s), SteadyRegime::ClosedLargeBuffer, z);
}

SteadyState steady_greedy(const EnergyChainConfig& c) {
  validate(c);
  if (c.eta != 1.0) throw Error(ErrorKind::OutOfRegime, "eta must be 1");
  const int N = c.N;
  std::vector<double> s(c.B + 1, 0.0);
  for (int i = 1; i < N; ++i) s[i] = 1.0 / N;
  s[0] = (1.0 - c.xi) / N;
  s[N] += c.xi / N;
  return finish(std::move(s), SteadyRegime::GreedyEta1);
}

SteadyState steady_infinite_buffer(const EnergyChainConfig& c, int level) {
  if (c.N < 1 || !(c.xi > 0.0 && c.xi < 1.0) || !(c.eta > 0.0 && c.eta <= 1.0))
    throw Error(ErrorKind::BadConfig, "invalid chain parameters");
  if (c.N < 2) throw Error(ErrorKind::OutOfRegime, "N must be >= 2");
  const int N = c.N;
  const double xi = c.xi, eta = c.eta;
  if (N * eta <= xi) throw Error(ErrorKind::NotRecurrent, "N eta <= xi");
  if (eta == 1.0) {
    EnergyChainConfig g = c;
    g.B = std::max(level, N);
    return steady_greedy(g);
  }
  const double z = solve_char_root(N, xi, eta);
  if (level < 0) level = N + static_cast<int>(std::ceil(std::log(1e-12) / std::log(z)));
  level = std::max(level, N);
  std::vector<double> s(level + 1);
  for (int i = 0; i <= level; ++i) {
    if (i <= N - 2)
      s[i] = (1.0 + (xi / (1.0 - xi) + z) / (1.0 - z) * (1.0 - std::pow(z, i))) *
             (1.0 - xi) * (1.0 - z) / N;
    else if (i == N - 1)
      s[i] = xi * (1.0 - eta) * (1.0 - z) / (N * eta * z);
    else
      s[i] = xi * (1.0 - z) * std::pow(z, i - N) / (N * eta);
  }
  const double tail = xi * std::pow(z, level + 1 - N) / (N * eta);
  return finish(std::move(s), SteadyRegime::InfiniteBuffer, z, tail);
}

SteadyState steady_state(const EnergyChainConfig& c) {
  validate(c);
  if (c.eta == 1.0) return steady_greedy(c);
  const auto numeric = [&] { return solve_steady_numeric(build_transition_matrix(c)); };
  if (c.xi == 1.0) return numeric();
  if (c.N == 1) return c.xi == c.eta ? numeric() : steady_closed_n1(c);
  if (c.B <= 2 * c.N) return steady_closed_small_buffer(c);
  if (c.B >= 3 * c.N + 1) return steady_closed_large_buffer(c);
  return numeric();
}

namespace {

// Coefficients of char_poly / (z - 1), highest degree first.
std::vector<double> deflated(int N, double xi, double eta) {
  std::vector<double> f(N + 2, 0.0);  // f[p] multiplies z^p
  f[N + 1] += (1.0 - xi) * eta;
  f[N] += xi * eta;
  f[1] -= 1.0 - (1.0 - xi) * (1.0 - eta);
  f[0] += xi * (1.0 - eta);
  std::vector<double> q;
  q.reserve(N + 1);
  double acc = 0.0;
  for (int p = N + 1; p >= 1; --p) {
    acc = f[p] + acc;
    q.push_back(acc);
  }
  return q;
}

double horner(const std::vector<double>& q, double z) {
  double v = 0.0;
  for (double a : q) v = v * z + a;
  return v;
}

}  // namespace

double char_poly(int N, double xi, double eta, double z) {
  return (1.0 - xi) * eta * std::pow(z, N + 1) + xi * eta * std::pow(z, N) -
         (1.0 - (1.0 - xi) * (1.0 - eta)) * z + xi * (1.0 - eta);
}

double solve_char_root(int N, double xi, double eta) {
  if (N < 1 || !(xi > 0.0 && xi <= 1.0) || !(eta > 0.0 && eta <= 1.0))
    throw Error(ErrorKind::BadConfig, "invalid root parameters");
  if (eta == 1.0) return 0.0;
  if (N * eta == xi) return 1.0;
  const auto q = deflated(N, xi, eta);
  // The deflated polynomial is negative at 0 and has one positive root.
  double lo = std::numeric_limits<double>::epsilon();
  double hi = xi < 1.0 ? std::max(2.0, 2.0 * xi * (1.0 - eta) / (eta * (1.0 - xi))) : 2.0;
  if (horner(q, lo) > 0.0) return 0.0;
  while (horner(q, hi) <= 0.0) hi *= 2.0;
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (horner(q, mid) > 0.0 ? hi : lo) = mid;
  }
  return std::abs(horner(q, lo)) <= std::abs(horner(q, hi)) ? lo : hi;
}

double approx_char_root(int N, double xi, double eta) {
  if (N == 1) return xi * (1.0 - eta) / (eta * (1.0 - xi));
  if (N == 2) {
    const double d = eta * eta * (1.0 - 2.0 * xi) * (1.0 - 2.0 * xi) + 4.0 * eta * xi * (1.0 - xi);
    return (std::sqrt(d) - eta) / (2.0 * eta * (1.0 - xi));
  }
  return xi * (1.0 - eta) / (1.0 - (1.0 - xi) * (1.0 - eta));
}

double prob_energy_sufficient(const SteadyState& ss, int N) {
  double p = ss.tail_mass;
  for (std::size_t i = static_cast<std::size_t>(N); i < ss.probs.size(); ++i) p += ss.probs[i];
  return std::min(p, 1.0);
}

}  // namespace ehaoi
