#include "onearm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace onearm {

double pairwise_sum(const double* x, std::size_t n) {
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

static double sample_std_err(const std::vector<double>& xs, double mean) {
  std::size_t n = xs.size();
  if (n < 2) return 0.0;
  double ss = 0.0;
  for (double v : xs) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (double(n) * double(n - 1)));
}

Estimate blocked_estimate(const std::vector<double>& xs, int min_blocks) {
  Estimate e;
  e.count = xs.size();
  if (xs.empty()) return e;
  e.mean = pairwise_sum(xs.data(), xs.size()) / double(xs.size());
  if (xs.size() < 2) return e;

  double naive = sample_std_err(xs, e.mean);
  if (naive == 0.0) {  // all samples equal
    e.std_err = 0.0;
    e.tau = 0.5;
    return e;
  }

  std::vector<double> level = xs;
  double prev = naive;
  double chosen = naive;
  while ((int)level.size() / 2 >= min_blocks) {
    std::vector<double> next(level.size() / 2);
    for (std::size_t i = 0; i < next.size(); ++i)
      next[i] = 0.5 * (level[2 * i] + level[2 * i + 1]);
    level.swap(next);
    double mean_l = pairwise_sum(level.data(), level.size()) / double(level.size());
    double err = sample_std_err(level, mean_l);
    chosen = std::max(chosen, err);
    if (std::fabs(err - prev) <= 0.1 * std::max(err, 1e-300)) {
      chosen = std::max(chosen, err);
      break;
    }
    prev = err;
  }
  e.std_err = chosen;
  double ratio = chosen / naive;
  e.tau = std::max(0.5, 0.5 * ratio * ratio);
  return e;
}

Estimate from_replicates(const std::vector<double>& values) {
  Estimate e;
  e.count = values.size();
  if (values.empty()) return e;
  e.mean = pairwise_sum(values.data(), values.size()) / double(values.size());
  e.std_err = sample_std_err(values, e.mean);
  return e;
}

Estimate merge_estimates(const std::vector<Estimate>& parts) {
  Estimate e;
  if (parts.empty()) return e;
  double m = 0.0, v = 0.0, tau = 0.0;
  for (const auto& p : parts) {
    m += p.mean;
    v += p.std_err * p.std_err;
    tau += p.tau;
    e.count += p.count;
    e.warn_thermalization = e.warn_thermalization || p.warn_thermalization;
  }
  double k = double(parts.size());
  e.mean = m / k;
  e.std_err = std::sqrt(v) / k;
  e.tau = tau / k;
  return e;
}

// Regularized incomplete gamma, series + continued fraction (standard
// numerics, double precision).
static double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

static double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    double an = -double(i) * (double(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) return std::numeric_limits<double>::quiet_NaN();
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi2_sf(double x, int dof) {
  if (dof <= 0) throw std::invalid_argument("chi2_sf: dof must be positive");
  return gamma_q(0.5 * dof, 0.5 * x);
}

}  // namespace onearm
