#include "onearm/fit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace onearm {

// Solve a small symmetric linear system in place (Gaussian elimination with
// partial pivoting); n <= 3 here.
static void solve_small(double a[3][3], double b[3], double out[3], int n) {
  int idx[3] = {0, 1, 2};
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int row = col + 1; row < n; ++row)
      if (std::fabs(a[idx[row]][col]) > std::fabs(a[idx[piv]][col])) piv = row;
    std::swap(idx[col], idx[piv]);
    double d = a[idx[col]][col];
    if (d == 0.0) throw std::invalid_argument("fit: singular normal equations");
    for (int row = col + 1; row < n; ++row) {
      double f = a[idx[row]][col] / d;
      for (int k = col; k < n; ++k) a[idx[row]][k] -= f * a[idx[col]][k];
      b[idx[row]] -= f * b[idx[col]];
    }
  }
  for (int col = n - 1; col >= 0; --col) {
    double s = b[idx[col]];
    for (int k = col + 1; k < n; ++k) s -= a[idx[col]][k] * out[k];
    out[col] = s / a[idx[col]][col];
  }
}

FitResult fit_loglog(const std::vector<FitPoint>& pts, double curvature_threshold) {
  if (pts.size() < 2)
    throw std::invalid_argument("fit_loglog: need at least 2 points");
  std::vector<double> x, y, w;
  for (const auto& p : pts) {
    if (!(p.x > 0.0) || !(p.value > 0.0))
      throw std::invalid_argument("fit_loglog: degenerate series (non-positive point)");
    double sigma = p.err > 0 ? p.err / p.value : 1e-12;
    x.push_back(std::log(p.x));
    y.push_back(std::log(p.value));
    w.push_back(1.0 / (sigma * sigma));
  }

  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
    sxx += w[i] * x[i] * x[i];
    sxy += w[i] * x[i] * y[i];
  }
  double delta = sw * sxx - sx * sx;
  if (delta <= 0)
    throw std::invalid_argument("fit_loglog: degenerate series (no spread in x)");

  FitResult res;
  res.slope = (sw * sxy - sx * sy) / delta;
  res.intercept = (sxx * sy - sx * sxy) / delta;
  res.slope_err = std::sqrt(sw / delta);
  res.intercept_err = std::sqrt(sxx / delta);
  res.ndof = int(x.size()) - 2;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double r = y[i] - (res.intercept + res.slope * x[i]);
    res.residuals.push_back(r);
    res.chi2 += w[i] * r * r;
  }

  // quadratic side-fit for pre-asymptotic curvature
  if (x.size() >= 3) {
    double a[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    double b[3] = {0, 0, 0};
    for (std::size_t i = 0; i < x.size(); ++i) {
      double basis[3] = {1.0, x[i], x[i] * x[i]};
      for (int p = 0; p < 3; ++p) {
        for (int q = 0; q < 3; ++q) a[p][q] += w[i] * basis[p] * basis[q];
        b[p] += w[i] * basis[p] * y[i];
      }
    }
    double coeff[3] = {0, 0, 0};
    try {
      solve_small(a, b, coeff, 3);
      res.curvature = coeff[2];
      res.curvature_flag = std::fabs(coeff[2]) > curvature_threshold;
    } catch (const std::invalid_argument&) {
      res.curvature = 0;
      res.curvature_flag = false;
    }
  }
  return res;
}

FitResult estimate_rho(const std::vector<std::pair<double, Estimate>>& series) {
  if (series.size() < 4)
    throw std::invalid_argument("estimate_rho: need at least 4 radii");
  double rmin = series.front().first, rmax = series.front().first;
  std::vector<FitPoint> pts;
  for (const auto& [r, est] : series) {
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
    if (!(est.mean > 3.0 * est.std_err))
      throw std::invalid_argument(
          "estimate_rho: series value not positive at 3 sigma");
    pts.push_back({r, est.mean, est.std_err});
  }
  if (rmax < 2.0 * rmin)
    throw std::invalid_argument("estimate_rho: radii span less than one octave");
  FitResult res = fit_loglog(pts);
  res.note =
      "finite-window log-log fit; the asymptotic rate is defined through a "
      "liminf, which a finite radius window cannot distinguish from a limsup";
  return res;
}

}  // namespace onearm
