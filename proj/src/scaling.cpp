#include "onearm/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>

#include "onearm/errors.hpp"
#include "onearm/reference.hpp"

namespace onearm {

double PowerLawKernel::eval_sq(double q) const {
  double qq = std::max(q, 1.0);
  if (exponent == 0.0) return 1.0;
  if (exponent == -3.0) {
    double s = std::sqrt(qq);
    return 1.0 / (qq * s);
  }
  if (exponent == -5.0) {
    double s = std::sqrt(qq);
    return 1.0 / (qq * qq * s);
  }
  if (exponent == -1.0) return 1.0 / std::sqrt(qq);
  if (exponent == -2.0) return 1.0 / qq;
  if (exponent == -4.0) return 1.0 / (qq * qq);
  return std::pow(qq, 0.5 * exponent);
}

double ArmWeight::from_dist(double dist) const {
  if (degenerate_one) return 1.0;
  double d = std::max(dist, 1.0);
  return std::min(1.0, std::pow(d, -(1.0 + eps)));
}

// ---------------------------------------------------------------------------
// RadialTable
// ---------------------------------------------------------------------------

RadialTable::RadialTable(int dim, long long qmax) : dim_(dim), qmax_(qmax) {
  if (dim < 1 || qmax < 0) throw std::invalid_argument("RadialTable: bad arguments");
  f_.assign(dim + 1, std::vector<std::uint64_t>(std::size_t(qmax) + 1, 0));
  f_[0][0] = 1;
  for (int i = 1; i <= dim; ++i) {
    const auto& prev = f_[i - 1];
    auto& cur = f_[i];
#pragma omp parallel for schedule(static)
    for (long long q = 0; q <= qmax; ++q) {
      unsigned __int128 acc = prev[std::size_t(q)];
      for (long long x = 1; x * x <= q; ++x)
        acc += (unsigned __int128)2 * prev[std::size_t(q - x * x)];
      if (acc > ~std::uint64_t(0)) throw BudgetError("RadialTable: count overflow");
      cur[std::size_t(q)] = (std::uint64_t)acc;
    }
  }
  prefix_.assign(std::size_t(qmax) + 2, 0);
  unsigned __int128 run = 0;
  for (long long q = 0; q <= qmax; ++q) {
    run += f_[dim][std::size_t(q)];
    if (run > ~std::uint64_t(0)) throw BudgetError("RadialTable: prefix overflow");
    prefix_[std::size_t(q) + 1] = (std::uint64_t)run;
  }
}

std::uint64_t RadialTable::count_range(long long qlo, long long qhi) const {
  qlo = std::max(qlo, 0ll);
  qhi = std::min(qhi, qmax_ + 1);
  if (qhi <= qlo) return 0;
  return prefix_[std::size_t(qhi)] - prefix_[std::size_t(qlo)];
}

long long RadialTable::sample_q(Rng& rng, long long qlo, long long qhi) const {
  std::uint64_t total = count_range(qlo, qhi);
  if (total == 0) throw std::invalid_argument("sample_q: empty stratum");
  std::uint64_t t = prefix_[std::size_t(qlo)] + rng.below(total);
  // first q with prefix_[q+1] > t
  long long lo = qlo, hi = qhi - 1;
  while (lo < hi) {
    long long mid = (lo + hi) / 2;
    if (prefix_[std::size_t(mid) + 1] > t) hi = mid;
    else lo = mid + 1;
  }
  return lo;
}

void RadialTable::sample_point(Rng& rng, long long q, std::span<int> out) const {
  for (int i = dim_; i >= 1; --i) {
    std::uint64_t total = f_[i][std::size_t(q)];
    std::uint64_t t = rng.below(total);
    long long chosen = 0;
    // scan x = 0, +-1, +-2, ... subtracting weights
    std::uint64_t w = f_[i - 1][std::size_t(q)];
    if (t < w) {
      chosen = 0;
    } else {
      t -= w;
      long long x = 1;
      for (;; ++x) {
        std::uint64_t wx = f_[i - 1][std::size_t(q - x * x)];
        if (t < 2 * wx) {
          chosen = (t & 1) ? -x : x;
          break;
        }
        t -= 2 * wx;
      }
    }
    out[std::size_t(dim_ - i)] = int(chosen);
    q -= chosen * chosen;
  }
}

std::shared_ptr<const RadialTable> RadialTable::shared(int dim, long long qmax) {
  static std::mutex mu;
  static std::map<std::pair<int, long long>, std::shared_ptr<const RadialTable>> cache;
  // round up so nearby radii reuse one table
  long long rounded = 1;
  while (rounded < qmax) rounded <<= 1;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(dim, rounded);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto table = std::make_shared<const RadialTable>(dim, rounded);
  cache[key] = table;
  return table;
}

// ---------------------------------------------------------------------------
// ShellTable
// ---------------------------------------------------------------------------

std::uint64_t& ShellTable::c_at(int i, long long s, int m) {
  return exact_[(std::size_t(i) * (smax_ + 1) + s) * (mmax_ + 1) + m];
}
std::uint64_t& ShellTable::d_at(int i, long long s, int m) {
  return atmost_[(std::size_t(i) * (smax_ + 1) + s) * (mmax_ + 1) + m];
}
std::uint64_t ShellTable::c_val(int i, long long s, int m) const {
  if (s < 0 || m < 0) return 0;
  if (m > mmax_) m = mmax_;
  return exact_[(std::size_t(i) * (smax_ + 1) + s) * (mmax_ + 1) + m];
}
std::uint64_t ShellTable::d_val(int i, long long s, int m) const {
  if (s < 0 || m < 0) return 0;
  if (m > mmax_) m = mmax_;
  return atmost_[(std::size_t(i) * (smax_ + 1) + s) * (mmax_ + 1) + m];
}

ShellTable::ShellTable(int dim, double r) : dim_(dim), r_(r) {
  if (dim < 1 || !(r >= 0)) throw std::invalid_argument("ShellTable: bad arguments");
  smax_ = (long long)std::floor((r + 1.0) * (r + 1.0) + 1e-9);
  mmax_ = int(std::floor(r + 1.0 + 1e-9));
  std::size_t sz = std::size_t(dim + 1) * (smax_ + 1) * (mmax_ + 1);
  exact_.assign(sz, 0);
  atmost_.assign(sz, 0);

  c_at(0, 0, 0) = 1;
  for (int m = 0; m <= mmax_; ++m) d_at(0, 0, m) = 1;

  for (int i = 1; i <= dim; ++i) {
    for (long long s = 0; s <= smax_; ++s) {
      for (int m = 0; m <= mmax_; ++m) {
        unsigned __int128 acc = 0;
        if (m == 0) {
          acc = (s == 0) ? c_val(i - 1, 0, 0) : 0;
        } else {
          // |x| < m: remaining coordinates must still reach max m
          acc = c_val(i - 1, s, m);
          for (long long x = 1; x < m && x * x <= s; ++x)
            acc += (unsigned __int128)2 * c_val(i - 1, s - x * x, m);
          // |x| = m: remaining stay at or below m
          if ((long long)m * m <= s)
            acc += (unsigned __int128)2 * d_val(i - 1, s - (long long)m * m, m);
        }
        if (acc > ~std::uint64_t(0)) throw BudgetError("ShellTable: count overflow");
        c_at(i, s, m) = (std::uint64_t)acc;
      }
      unsigned __int128 run = 0;
      for (int m = 0; m <= mmax_; ++m) {
        run += c_at(i, s, m);
        if (run > ~std::uint64_t(0)) throw BudgetError("ShellTable: prefix overflow");
        d_at(i, s, m) = (std::uint64_t)run;
      }
    }
  }

  double r2 = r * r;
  std::uint64_t cum = 0;
  for (long long s = 0; s <= smax_; ++s) {
    if (!(double(s) > r2)) continue;
    for (int m = 0; m <= mmax_; ++m) {
      if (!(double(s) - 2.0 * m + 1.0 <= r2)) continue;
      std::uint64_t cnt = c_val(dim, s, m);
      if (cnt == 0) continue;
      cum += cnt;
      classes_.push_back({int(s), m, cum});
    }
  }
  total_ = cum;
}

bool ShellTable::contains(std::span<const int> v) const {
  long long s = norm_sq(v);
  int m = 0;
  for (int c : v) m = std::max(m, std::abs(c));
  double r2 = r_ * r_;
  return double(s) > r2 && double(s) - 2.0 * m + 1.0 <= r2;
}

double ShellTable::kernel_sum(const PowerLawKernel& k) const {
  Kahan acc;
  for (auto& cl : classes_) {
    std::uint64_t cnt = c_val(dim_, cl.s, cl.m);
    acc.add(double(cnt) * k.eval_sq(double(cl.s)));
  }
  return acc.value();
}

void ShellTable::sample_point(Rng& rng, std::span<int> out) const {
  if (total_ == 0) throw std::invalid_argument("ShellTable: empty shell");
  std::uint64_t t = rng.below(total_);
  // binary search the (s, m) class
  std::size_t lo = 0, hi = classes_.size() - 1;
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (classes_[mid].cum > t) hi = mid;
    else lo = mid + 1;
  }
  long long s = classes_[lo].s;
  int m = classes_[lo].m;

  bool hit = false;  // has some coordinate already achieved |x| = m?
  for (int i = dim_; i >= 1; --i) {
    std::uint64_t total = hit ? d_val(i, s, m) : c_val(i, s, m);
    std::uint64_t draw = rng.below(total);
    long long chosen = 0;
    bool chosen_hit = hit;
    std::uint64_t w0 = hit ? d_val(i - 1, s, m) : (m > 0 ? c_val(i - 1, s, m) : (s == 0 ? 1 : 0));
    if (m == 0) {
      chosen = 0;
    } else if (draw < w0) {
      chosen = 0;
    } else {
      draw -= w0;
      bool found = false;
      for (long long x = 1; x < m && x * x <= s; ++x) {
        std::uint64_t wx = hit ? d_val(i - 1, s - x * x, m) : c_val(i - 1, s - x * x, m);
        if (draw < 2 * wx) {
          chosen = (draw & 1) ? -x : x;
          found = true;
          break;
        }
        draw -= 2 * wx;
      }
      if (!found) {
        // |x| = m
        chosen = (draw & 1) ? -m : m;
        chosen_hit = true;
      }
    }
    out[std::size_t(dim_ - i)] = int(chosen);
    s -= chosen * chosen;
    hit = chosen_hit;
  }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

namespace {

void check_scaling_inputs(const PowerLawKernel& k, const CouplingSpec& c, double r) {
  if (!c.is_nearest_neighbor())
    throw std::invalid_argument("scaling sums support nearest-neighbor couplings only");
  if (k.dim != c.dim)
    throw std::invalid_argument("scaling: kernel and coupling dimension mismatch");
  if (!(r >= 0.5)) throw std::invalid_argument("scaling: radius too small");
}

double dist_sq(std::span<const int> u, std::span<const int> x) {
  double s = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double d = double(u[i]) - double(x[i]);
    s += d * d;
  }
  return s;
}

// analytic remainder of the u-sum beyond umax: integrand bounded by
// surface(t) * t^a * (Nshell * (g1 t)^a)^2 * (g2 t)^-(1+eps)
double tail_bound_beyond(const PowerLawKernel& k, double r, double ns, double umax,
                         const ArmWeight& arm) {
  int d = k.dim;
  double a = k.exponent;
  double arm_part = arm.degenerate_one ? 0.0 : (1.0 + arm.eps);
  double p = double(d - 1) + 3.0 * a - arm_part;
  if (p >= -1.0) return std::numeric_limits<double>::infinity();
  double g1 = 1.0 - (r + 1.0) / umax;
  double g2 = 1.0 - r / umax;
  if (g1 <= 0 || g2 <= 0) return std::numeric_limits<double>::infinity();
  double surface = double(d) * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
  double c = 2.0 * surface * ns * ns * std::pow(g1, 2.0 * a);
  if (!arm.degenerate_one) c *= std::pow(g2, -(1.0 + arm.eps));
  return c * std::pow(umax, p + 1.0) / (-(p + 1.0));
}

struct Stratum {
  double lo, hi;       // |u| range
  long long qlo, qhi;  // squared-norm range [qlo, qhi)
  std::uint64_t count = 0;
  std::uint64_t draws = 0;
  int case_id = 0;  // 0: |u| < r/2, 1: band, 2: far
};

std::vector<Stratum> build_strata(const RadialTable& radial, double r, double umax) {
  std::set<double> edges{0.0, 1.0};
  for (double e = 2.0; e < r / 2; e *= 2) edges.insert(e);
  edges.insert(r / 2);
  for (double delta = 1.0; delta <= r / 2; delta *= 2) {
    edges.insert(r - delta);
    edges.insert(std::min(r + delta, 1.5 * r));
  }
  edges.insert(r);
  edges.insert(1.5 * r);
  for (double e = 1.5 * r; e < umax; e *= 2) edges.insert(e);
  edges.insert(umax);

  std::vector<double> es;
  for (double e : edges)
    if (e >= 0 && e <= umax) es.push_back(e);
  std::sort(es.begin(), es.end());

  std::vector<Stratum> out;
  for (std::size_t i = 0; i + 1 < es.size(); ++i) {
    Stratum s;
    s.lo = es[i];
    s.hi = es[i + 1];
    if (s.hi - s.lo < 1e-12) continue;
    s.qlo = (long long)std::ceil(s.lo * s.lo - 1e-9);
    s.qhi = (long long)std::ceil(s.hi * s.hi - 1e-9);
    if (i + 2 == es.size()) s.qhi = (long long)std::floor(umax * umax + 1e-9) + 1;
    if (s.qlo == 0) s.qlo = 1;  // the origin is handled exactly
    if (s.qhi <= s.qlo) continue;
    s.count = radial.count_range(s.qlo, s.qhi);
    if (s.count == 0) continue;
    double mid = 0.5 * (s.lo + s.hi);
    s.case_id = mid < r / 2 ? 0 : (mid < 1.5 * r ? 1 : 2);
    out.push_back(s);
  }
  return out;
}

std::vector<int> sample_pool(const ShellTable& shell, int dim, std::uint64_t count,
                             Rng& rng) {
  std::vector<int> pool(count * std::size_t(dim));
  for (std::uint64_t i = 0; i < count; ++i)
    shell.sample_point(rng, {pool.data() + i * std::size_t(dim), std::size_t(dim)});
  return pool;
}

double pool_kernel_sum(const PowerLawKernel& k, std::span<const int> u,
                       const std::vector<int>& pool, int dim) {
  double acc = 0;
  std::size_t n = pool.size() / std::size_t(dim);
  for (std::size_t i = 0; i < n; ++i) {
    double q = 0;
    const int* x = pool.data() + i * std::size_t(dim);
    for (int c = 0; c < dim; ++c) {
      double d = double(u[std::size_t(c)]) - double(x[c]);
      q += d * d;
    }
    acc += k.eval_sq(q);
  }
  return acc;
}

}  // namespace

SumEstimate boundary_kernel_sum(const PowerLawKernel& k, const CouplingSpec& c, double r) {
  check_scaling_inputs(k, c, r);
  ShellTable shell(k.dim, r);
  SumEstimate out;
  out.value = shell.kernel_sum(k);
  out.terms = shell.size();
  return out;
}

SumEstimate numerator_sum(const PowerLawKernel& k, const CouplingSpec& c, double r) {
  SumEstimate out = boundary_kernel_sum(k, c, r);
  out.value = out.value * out.value;
  return out;
}

SumEstimate denominator_term1(const PowerLawKernel& k, const CouplingSpec& c, double r,
                              const ScalingBudget& budget) {
  check_scaling_inputs(k, c, r);
  ShellTable shell(k.dim, r);
  double ns = double(shell.size());
  double box_cost = std::pow(2.0 * r + 5.0, k.dim);

  if (ns * ns <= double(budget.exact_ops) && box_cost <= double(budget.exact_ops)) {
    auto pts = ref::shell_points(k.dim, r);
    if (std::uint64_t(pts.size()) != shell.size())
      throw std::logic_error("shell table and enumeration disagree");
    Kahan acc;
    for (auto& x : pts) {
      double gx = k.eval_sq(double(norm_sq(x)));
      double t = 0;
      for (auto& y : pts) t += k.eval_sq(dist_sq(x, y));
      acc.add(gx * t);
    }
    SumEstimate out;
    out.value = acc.value();
    out.terms = std::uint64_t(pts.size()) * pts.size();
    return out;
  }

  int b_count = budget.replicates;
  std::vector<double> rep_values((std::size_t)b_count, 0.0);
  long long r_key = std::llround(8.0 * r);
#pragma omp parallel for schedule(dynamic) if (budget.policy == ExecPolicy::parallel)
  for (int b = 0; b < b_count; ++b) {
    Rng pool_rng(budget.seed, hash_combine(hash_combine(0x61, r_key), b));
    auto pool = sample_pool(shell, k.dim, budget.xpool, pool_rng);
    Rng x_rng(budget.seed, hash_combine(hash_combine(0x62, r_key), b));
    double scale = ns / double(budget.xpool);
    Kahan acc;
    std::vector<int> x(std::size_t(k.dim));
    for (std::uint64_t j = 0; j < budget.xsamples; ++j) {
      shell.sample_point(x_rng, x);
      double gx = k.eval_sq(double(norm_sq(x)));
      acc.add(gx * scale * pool_kernel_sum(k, x, pool, k.dim));
    }
    rep_values[std::size_t(b)] = ns * acc.value() / double(budget.xsamples);
  }
  Estimate e = from_replicates(rep_values);
  SumEstimate out;
  out.value = e.mean;
  out.std_err = e.std_err;
  out.sampled = true;
  out.terms = std::uint64_t(b_count) * budget.xsamples;
  return out;
}

Term2 denominator_term2(const PowerLawKernel& k, const CouplingSpec& c, double r,
                        const ArmWeight& arm, const ScalingBudget& budget) {
  check_scaling_inputs(k, c, r);
  double umax = budget.umax_factor * r;
  if (budget.umax_factor <= 0) {
    // unbounded request: only meaningful when the far tail converges fast
    double arm_part = arm.degenerate_one ? 0.0 : (1.0 + arm.eps);
    double p = double(k.dim - 1) + 3.0 * k.exponent - arm_part;
    if ((!arm.degenerate_one && arm.eps <= 0) || p >= -1.0)
      throw std::invalid_argument(
          "denominator_term2: divergence risk for an unbounded u-sum (need eps > 0)");
    umax = 16.0 * r;
  }

  ShellTable shell(k.dim, r);
  double ns = double(shell.size());
  double t_origin = shell.kernel_sum(k);

  Term2 out;
  double box_ball = std::pow(2.0 * umax + 3.0, k.dim);
  double ball_est = std::pow(umax, k.dim) * 6.0;

  if (ball_est * ns <= double(budget.exact_ops) &&
      box_ball <= double(budget.exact_ops) &&
      std::pow(2.0 * r + 5.0, k.dim) <= double(budget.exact_ops)) {
    // exact path
    auto shell_pts = ref::shell_points(k.dim, r);
    if (std::uint64_t(shell_pts.size()) != shell.size())
      throw std::logic_error("shell table and enumeration disagree");
    auto ball_pts = ref::ball_points(k.dim, umax);
    Kahan acc[3];
    std::uint64_t terms = 0;
    for (auto& u : ball_pts) {
      double un = std::sqrt(double(norm_sq(u)));
      double gu = k.eval_sq(double(norm_sq(u)));
      double dist;
      if (arm.degenerate_one) {
        dist = 1.0;
      } else if (arm.radial) {
        dist = std::max(std::fabs(r - un), 1.0);
      } else {
        dist = 1e300;
        for (auto& x : shell_pts) dist = std::min(dist, std::sqrt(dist_sq(u, x)));
        dist = std::max(dist, 1.0);
      }
      double w = arm.from_dist(dist);
      double t = 0;
      for (auto& x : shell_pts) t += k.eval_sq(dist_sq(u, x));
      int case_id = un < r / 2 ? 0 : (un < 1.5 * r ? 1 : 2);
      acc[case_id].add(gu * w * t * t);
      ++terms;
    }
    out.case_i.value = acc[0].value();
    out.case_ii.value = acc[1].value();
    out.case_iii.value = acc[2].value();
    out.case_i.terms = out.case_ii.terms = out.case_iii.terms = terms;
    double tail = tail_bound_beyond(k, r, ns, umax, arm);
    out.case_iii.tail_bound = tail;
    out.total.value = out.case_i.value + out.case_ii.value + out.case_iii.value;
    out.total.terms = terms;
    out.total.tail_bound = tail;
    return out;
  }

  if (!arm.radial && !arm.degenerate_one)
    throw std::invalid_argument(
        "denominator_term2: exact-boundary arm distance needs the enumerable path");

  long long qmax = (long long)std::floor(umax * umax + 1e-9);
  auto radial = RadialTable::shared(k.dim, qmax);
  auto strata = build_strata(*radial, r, umax);

  // pilot mass allocation, with a floor per radial regime so every reported
  // case keeps a usable error bar
  std::vector<double> mass(strata.size());
  double mass_case[3] = {0, 0, 0};
  for (std::size_t s = 0; s < strata.size(); ++s) {
    double mid = 0.5 * (strata[s].lo + strata[s].hi);
    double t_typ = std::max(1.0, std::fabs(mid - r));
    double arm_typ = arm.radial ? arm.from_dist(std::max(1.0, std::fabs(r - mid)))
                                : 1.0;
    mass[s] = double(strata[s].count) * k.eval_sq(mid * mid) * arm_typ *
              std::pow(ns * k.eval_sq(t_typ * t_typ + 1.0), 2.0);
    mass_case[strata[s].case_id] += mass[s];
  }
  for (std::size_t s = 0; s < strata.size(); ++s) {
    int case_id = strata[s].case_id;
    double case_share = mass_case[case_id] > 0 ? mass[s] / mass_case[case_id]
                                               : 1.0 / double(strata.size());
    strata[s].draws = std::max<std::uint64_t>(
        24, std::uint64_t(std::llround(double(budget.usamples) / 3.0 * case_share)));
  }

  int b_count = budget.replicates;
  std::vector<double> rep_case(std::size_t(b_count) * 3, 0.0);
  long long r_key = std::llround(8.0 * r);

#pragma omp parallel for schedule(dynamic) if (budget.policy == ExecPolicy::parallel)
  for (int b = 0; b < b_count; ++b) {
    Rng pool_rng1(budget.seed, hash_combine(hash_combine(0x71, r_key), b));
    Rng pool_rng2(budget.seed, hash_combine(hash_combine(0x72, r_key), b));
    auto pool1 = sample_pool(shell, k.dim, budget.xpool, pool_rng1);
    auto pool2 = sample_pool(shell, k.dim, budget.xpool, pool_rng2);
    double scale = ns / double(budget.xpool);

    double cases[3] = {0, 0, 0};
    // the origin contributes exactly
    {
      double w = arm.degenerate_one ? 1.0 : arm.from_dist(std::max(r, 1.0));
      cases[0] += 1.0 * w * t_origin * t_origin;
    }
    std::vector<int> u(std::size_t(k.dim));
    for (std::size_t s = 0; s < strata.size(); ++s) {
      Rng u_rng(budget.seed,
                hash_combine(hash_combine(hash_combine(0x73, r_key), b), (long long)s));
      Kahan acc;
      for (std::uint64_t j = 0; j < strata[s].draws; ++j) {
        long long q = radial->sample_q(u_rng, strata[s].qlo, strata[s].qhi);
        radial->sample_point(u_rng, q, u);
        double gu = k.eval_sq(double(q));
        double un = std::sqrt(double(q));
        double w = arm.degenerate_one ? 1.0
                                      : arm.from_dist(std::max(std::fabs(r - un), 1.0));
        double t1 = scale * pool_kernel_sum(k, u, pool1, k.dim);
        double t2 = scale * pool_kernel_sum(k, u, pool2, k.dim);
        acc.add(gu * w * t1 * t2);
      }
      cases[strata[s].case_id] +=
          double(strata[s].count) * acc.value() / double(strata[s].draws);
    }
    for (int case_id = 0; case_id < 3; ++case_id)
      rep_case[std::size_t(b) * 3 + case_id] = cases[case_id];
  }

  auto collect = [&](int case_id) {
    std::vector<double> vals;
    for (int b = 0; b < b_count; ++b) vals.push_back(rep_case[std::size_t(b) * 3 + case_id]);
    Estimate e = from_replicates(vals);
    SumEstimate se;
    se.value = e.mean;
    se.std_err = e.std_err;
    se.sampled = true;
    return se;
  };
  out.case_i = collect(0);
  out.case_ii = collect(1);
  out.case_iii = collect(2);
  double tail = tail_bound_beyond(k, r, ns, umax, arm);
  out.case_iii.tail_bound = tail;
  out.total.value = out.case_i.value + out.case_ii.value + out.case_iii.value;
  out.total.std_err = std::sqrt(out.case_i.std_err * out.case_i.std_err +
                                out.case_ii.std_err * out.case_ii.std_err +
                                out.case_iii.std_err * out.case_iii.std_err);
  out.total.sampled = true;
  out.total.tail_bound = tail;
  std::uint64_t draws = 0;
  for (auto& s : strata) draws += s.draws;
  out.total.terms = std::uint64_t(b_count) * draws;
  return out;
}

SumEstimate rhs_lower_bound(const PowerLawKernel& k, const CouplingSpec& c, double r,
                            const ArmWeight& arm, const ScalingBudget& budget) {
  SumEstimate num = numerator_sum(k, c, r);
  SumEstimate t1 = denominator_term1(k, c, r, budget);
  Term2 t2 = denominator_term2(k, c, r, arm, budget);
  double den = t1.value + t2.total.value;
  SumEstimate out;
  if (den <= 0) throw std::invalid_argument("rhs_lower_bound: empty denominator");
  out.value = num.value / den;
  double den_err = std::sqrt(t1.std_err * t1.std_err +
                             t2.total.std_err * t2.total.std_err);
  out.std_err = out.value * den_err / den;
  out.sampled = t1.sampled || t2.total.sampled;
  out.tail_bound = std::isfinite(t2.total.tail_bound)
                       ? out.value * t2.total.tail_bound / den
                       : t2.total.tail_bound;
  out.terms = t1.terms + t2.total.terms;
  return out;
}

SumEstimate perc_rhs_bound(const PowerLawKernel& k, const CouplingSpec& c, double r,
                           const ScalingBudget& budget) {
  SumEstimate num = numerator_sum(k, c, r);
  Term2 t2 = denominator_term2(k, c, r, ArmWeight::one(), budget);
  double den = t2.total.value;
  if (den <= 0) throw std::invalid_argument("perc_rhs_bound: empty denominator");
  SumEstimate out;
  out.value = num.value / den;
  out.std_err = out.value * t2.total.std_err / den;
  out.sampled = t2.total.sampled;
  out.tail_bound = std::isfinite(t2.total.tail_bound)
                       ? out.value * t2.total.tail_bound / den
                       : t2.total.tail_bound;
  out.terms = t2.total.terms;
  return out;
}

FitResult fit_exponent(const std::vector<std::pair<double, SumEstimate>>& series) {
  if (series.size() < 4)
    throw std::invalid_argument("fit_exponent: need at least 4 points");
  double rmin = series.front().first, rmax = series.front().first;
  std::vector<FitPoint> pts;
  for (auto& [r, se] : series) {
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
    pts.push_back({r, se.value, se.std_err});
  }
  if (rmax < 2.0 * rmin)
    throw std::invalid_argument("fit_exponent: series spans less than one octave");
  return fit_loglog(pts);
}

}  // namespace onearm
