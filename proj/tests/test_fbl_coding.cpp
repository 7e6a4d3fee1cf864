#include <doctest.h>

#include <cmath>

#include "ehaoi/fbl_coding.hpp"

using namespace ehaoi;

TEST_CASE("inverse Q function against high-precision values") {
  struct Ref {
    double p, x;
  };
  // Reference values from 40-digit arithmetic.
  const Ref refs[] = {{0.5, 0.0},
                      {0.1, 1.2815515655446005},
                      {1e-2, 2.3263478740408411},
                      {1e-4, 3.7190164854556806},
                      {1e-6, 4.7534243088228989},
                      {1e-10, 6.3613409024040562},
                      {0.3, 0.52440051270804078},
                      {0.9, -1.2815515655446005}};
  for (const auto& r : refs) {
    if (r.x == 0.0)
      CHECK(std::abs(q_inverse(r.p)) < 1e-15);
    else
      CHECK(q_inverse(r.p) == doctest::Approx(r.x).epsilon(1e-12));
  }
  for (double lp = -12.0; lp < -0.31; lp += 0.25) {
    const double p = std::pow(10.0, lp);
    CHECK(q_function(q_inverse(p)) == doctest::Approx(p).epsilon(1e-12));
  }
  CHECK_THROWS_AS(q_inverse(0.0), Error);
  CHECK_THROWS_AS(q_inverse(1.0), Error);
}

TEST_CASE("maximum coding rate examples") {
  for (double c : {100.0, 500.0, 1e4})
    CHECK(max_coding_rate(0.0, c, 1e-6) == doctest::Approx(std::log2(c) / (2.0 * c)).epsilon(1e-14));
  CHECK(max_coding_rate(1.0, 100.0, 0.5) == doctest::Approx(1.0 + std::log2(100.0) / 200.0).epsilon(1e-14));
  CHECK(max_coding_rate(1.0, 100.0, 0.5) == doctest::Approx(1.03322).epsilon(1e-5));
  // Full dispersion factor sqrt(1 - 1/(1+g)^2) included.
  const double r = max_coding_rate(1.784, 100.0, 1e-6);
  CHECK(r == doctest::Approx(0.870371262747).epsilon(1e-11));
  CHECK(r > 0.825);
}

TEST_CASE("exact threshold") {
  const double th = effective_threshold_exact(100.0, 0.825, 1e-6);
  CHECK(th < 1.784);
  CHECK(th > 1.5);
  CHECK(max_coding_rate(th, 100.0, 1e-6) == doctest::Approx(0.825).epsilon(1e-12));
  CHECK(effective_threshold_exact(1e9, 1.0, 1e-6) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(effective_threshold_exact(100.0, 0.825, 0.5) ==
        doctest::Approx(std::exp2(0.825 - std::log2(100.0) / 200.0) - 1.0).epsilon(1e-12));
  try {
    effective_threshold_exact(100.0, 0.1, 0.5);
    FAIL("expected TargetRateTooLow");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TargetRateTooLow);
  }
  const CodingConfig cfg{100, 3, 0.825, 1e-6};
  CHECK(cfg.c_N() == 300.0);
  CHECK(effective_threshold_exact(cfg) == effective_threshold_exact(300.0, 0.825, 1e-6));
}

TEST_CASE("approximate threshold") {
  const double q = q_inverse(1e-6);
  const double expo = 0.825 + std::log2(std::exp(1.0)) / 10.0 * q - std::log2(100.0) / 200.0;
  CHECK(effective_threshold_approx(100.0, 0.825, 1e-6) == doctest::Approx(std::exp2(expo) - 1.0).epsilon(1e-14));
  CHECK(effective_threshold_approx(100.0, 0.825, 1e-6) == doctest::Approx(1.784).epsilon(1e-3));
  CHECK(effective_threshold_approx(1e12, 0.825, 1e-6) == doctest::Approx(std::exp2(0.825) - 1.0).epsilon(1e-5));
}

TEST_CASE("threshold properties over the validity envelope") {
  for (double eps : {1e-2, 1e-4, 1e-6})
    for (double R : {0.5, 0.825, 1.5, 3.0}) {
      double prev = INFINITY;
      double prev_gap = INFINITY;
      for (double c : {100.0, 200.0, 300.0, 500.0, 1000.0, 5000.0, 1e5}) {
        const double ex = effective_threshold_exact(c, R, eps);
        const double ap = effective_threshold_approx(c, R, eps);
        CHECK(ap >= ex);
        CHECK(ex < prev);
        CHECK(max_coding_rate(ex, c, eps) == doctest::Approx(R).epsilon(1e-10));
        // The relative gap can rise slightly between c_N = 100 and 200 at low rates.
        const double gap = (ap - ex) / ex;
        if (c > 200.0) CHECK(gap <= prev_gap);
        prev = ex;
        prev_gap = gap;
      }
      const auto rel_gap = [&](double c) {
        const double ex = effective_threshold_exact(c, R, eps);
        return (effective_threshold_approx(c, R, eps) - ex) / ex;
      };
      CHECK(rel_gap(1000.0) < rel_gap(100.0));
    }
}
