#include <doctest.h>

#include <cmath>
#include <vector>

#include "onearm/rng.hpp"
#include "onearm/stats.hpp"

using namespace onearm;

TEST_CASE("rng streams are deterministic and distinct") {
  Rng a(42, 0), b(42, 0), c(42, 1);
  for (int i = 0; i < 100; ++i) {
    auto x = a.next();
    CHECK(x == b.next());
    CHECK(x != c.next());
  }
}

TEST_CASE("rng u01 moments") {
  Rng rng(7, 3);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double u = rng.u01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    s += u;
    s2 += u * u;
  }
  CHECK(std::fabs(s / n - 0.5) < 0.005);
  CHECK(std::fabs(s2 / n - 1.0 / 3.0) < 0.005);
}

TEST_CASE("rng below respects bounds and is roughly uniform") {
  Rng rng(9, 0);
  std::vector<int> hist(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) ++hist[rng.below(7)];
  for (int h : hist) CHECK(std::fabs(h - n / 7.0) < 5.0 * std::sqrt(n / 7.0));
}

TEST_CASE("pairwise sum is deterministic and accurate") {
  std::vector<double> xs(1000);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = 1.0 / double(i + 1);
  double a = pairwise_sum(xs.data(), xs.size());
  double b = pairwise_sum(xs.data(), xs.size());
  CHECK(a == b);
  Kahan k;
  for (double v : xs) k.add(v);
  CHECK(a == doctest::Approx(k.value()).epsilon(1e-14));
}

TEST_CASE("blocked estimate: constant series has zero error") {
  std::vector<double> xs(512, 3.25);
  Estimate e = blocked_estimate(xs);
  CHECK(e.mean == 3.25);
  CHECK(e.std_err == 0.0);
}

TEST_CASE("blocked estimate tracks autocorrelation") {
  // AR(1) series with known integrated autocorrelation time
  Rng rng(11, 0);
  double phi = 0.8, x = 0;
  std::vector<double> xs;
  for (int i = 0; i < 65536; ++i) {
    double noise = rng.u01() + rng.u01() + rng.u01() - 1.5;  // ~N(0, 1/2)
    x = phi * x + noise;
    xs.push_back(x);
  }
  Estimate e = blocked_estimate(xs);
  // tau_int = (1+phi)/(2(1-phi)) = 4.5
  CHECK(e.tau > 2.0);
  CHECK(e.tau < 12.0);
  CHECK(std::fabs(e.mean) < 4.0 * e.std_err);
}

TEST_CASE("merge is order-fixed and pools counts") {
  Estimate a{1.0, 0.1, 1.0, 100, false};
  Estimate b{2.0, 0.1, 1.0, 100, false};
  Estimate m = merge_estimates({a, b});
  CHECK(m.mean == doctest::Approx(1.5));
  CHECK(m.count == 200);
  CHECK(m.std_err == doctest::Approx(std::sqrt(0.02) / 2.0));
}

TEST_CASE("chi-square survival function reference values") {
  CHECK(chi2_sf(0.0, 3) == doctest::Approx(1.0));
  // known: P(chi2_1 > 3.841) ~ 0.05, P(chi2_5 > 15.086) ~ 0.01
  CHECK(chi2_sf(3.841, 1) == doctest::Approx(0.05).epsilon(0.01));
  CHECK(chi2_sf(15.086, 5) == doctest::Approx(0.01).epsilon(0.01));
  // exponential special case: Q(1, x) = exp(-x)
  CHECK(gamma_q(1.0, 2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
}
