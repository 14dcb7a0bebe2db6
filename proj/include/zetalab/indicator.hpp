#pragma once

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include <fftw3.h>

#include "zetalab/errors.hpp"

namespace zetalab {

enum class IndicatorSign { plus, minus };

/// A polynomial sum_n c_n T_n(x / X) on [-X, X], approximating (the square root
/// of) the indicator of a window of length 1/Delta.
struct IndicatorPoly {
  IndicatorSign sign = IndicatorSign::minus;
  double X = 0, Delta = 0;
  int a = 3;
  std::vector<double> cheb;

  int degree() const { return static_cast<int>(cheb.size()) - 1; }
  double eps() const { return std::exp(-std::pow(Delta, a - 2)); }
  /// Degree cap 100 X Delta^{3a}, as a double.
  double degree_budget() const { return 100.0 * X * std::pow(Delta, 3 * a); }

  /// Clenshaw evaluation; valid for |x| <= X.
  double operator()(double x) const {
    const double y = x / X, y2 = 2 * y;
    double b1 = 0, b2 = 0;
    for (int n = degree(); n >= 1; --n) {
      const double b0 = cheb[n] + y2 * b1 - b2;
      b2 = b1;
      b1 = b0;
    }
    return cheb[0] + y * b1 - b2;
  }

  /// Values at many points; eight Clenshaw recurrences run side by side.
  std::vector<double> evaluate(const std::vector<double> &xs) const {
    constexpr std::size_t W = 8;
    std::vector<double> out(xs.size());
    for (std::size_t i0 = 0; i0 < xs.size(); i0 += W) {
      double y[W], b1[W] = {}, b2[W] = {};
      for (std::size_t k = 0; k < W; ++k)
        y[k] = i0 + k < xs.size() ? xs[i0 + k] / X : 0.0;
      for (int n = degree(); n >= 1; --n) {
        const double c = cheb[n];
        for (std::size_t k = 0; k < W; ++k) {
          const double b0 = c + 2 * y[k] * b1[k] - b2[k];
          b2[k] = b1[k];
          b1[k] = b0;
        }
      }
      for (std::size_t k = 0; k < W && i0 + k < xs.size(); ++k)
        out[i0 + k] = cheb[0] + y[k] * b1[k] - b2[k];
    }
    return out;
  }
};

namespace detail {
inline std::mutex &fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// Chebyshev coefficients of f on [-X, X] from N+1 Lobatto samples (DCT-I).
template <class F> std::vector<double> chebyshev_coefficients(F &&f, double X, int N) {
  std::vector<double> in(static_cast<std::size_t>(N + 1)), out(in.size());
  for (int k = 0; k <= N; ++k)
    in[k] = f(X * std::cos(std::numbers::pi * k / N));
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_r2r_1d(N + 1, in.data(), out.data(), FFTW_REDFT00, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  for (auto &v : out)
    v /= N;
  out[0] /= 2;
  out[N] /= 2;
  return out;
}
} // namespace detail

struct IndicatorCheck {
  bool ok = true;
  double worst_x = 0;      // grid point with the largest violation
  double worst_excess = 0; // amount by which a bound fails there (<= 0 when ok)
  std::size_t points = 0;
};

/// Sandwich bounds for |D(x)|^2 at x in [-X, X]:
///   D+: 1[0, 1/Delta] (1 - eps) <= |D|^2 <= 1[-Delta^-a, 1/Delta + Delta^-a] + eps
///   D-: 1[Delta^-a, 1/Delta - Delta^-a] (1 - eps) <= |D|^2 <= 1[0, 1/Delta] + eps
inline std::pair<double, double> indicator_bounds(const IndicatorPoly &D, double x) {
  const double w = 1 / D.Delta, h = std::pow(D.Delta, -D.a), e = D.eps();
  auto in = [&](double lo, double hi) { return x >= lo && x <= hi ? 1.0 : 0.0; };
  if (D.sign == IndicatorSign::plus)
    return {in(0, w) * (1 - e), in(-h, w + h) + e};
  return {in(h, w - h) * (1 - e), in(0, w) + e};
}

/// Check the sandwich at n uniform points of [-X, X] plus n points spread over
/// the window and its transition zones.
inline IndicatorCheck verify_indicator(const IndicatorPoly &D, std::size_t n = 10000) {
  std::vector<double> xs;
  xs.reserve(2 * n + 1);
  for (std::size_t i = 0; i <= n; ++i)
    xs.push_back(-D.X + 2 * D.X * static_cast<double>(i) / static_cast<double>(n));
  const double h = std::pow(D.Delta, -D.a), lo = -3 * h, hi = 1 / D.Delta + 3 * h;
  for (std::size_t i = 0; i < n; ++i)
    xs.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
  IndicatorCheck c;
  c.points = xs.size();
  c.worst_excess = -INFINITY;
  const auto vs = D.evaluate(xs);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i], sq = vs[i] * vs[i];
    auto [lb, ub] = indicator_bounds(D, x);
    const double excess = std::max(lb - sq, sq - ub);
    if (excess > c.worst_excess) {
      c.worst_excess = excess;
      c.worst_x = x;
    }
  }
  c.ok = c.worst_excess <= 0;
  return c;
}

/// log of an upper bound for |[x^l] D|, l = 0..deg, by Cauchy's estimate on
/// circles |x| = rho: the disc |x / X| <= r lies inside the Bernstein ellipse
/// with R = r + sqrt(1 + r^2), where |T_n| <= R^n. Minimised over a log grid in rho.
inline std::vector<double> log_monomial_majorant(const IndicatorPoly &D, int grid = 400) {
  const int deg = D.degree();
  std::vector<double> logc(static_cast<std::size_t>(deg + 1));
  for (int n = 0; n <= deg; ++n)
    logc[n] = D.cheb[n] == 0 ? -INFINITY : std::log(std::fabs(D.cheb[n]));
  std::vector<double> out(static_cast<std::size_t>(deg + 1), INFINITY);
  for (int g = 0; g < grid; ++g) {
    const double r = std::exp(std::log(1e-8) + (std::log(1e3) - std::log(1e-8)) * g / (grid - 1));
    const double lR = std::asinh(r); // log(r + sqrt(1 + r^2))
    double m = -INFINITY;
    for (int n = 0; n <= deg; ++n)
      m = std::max(m, logc[n] + n * lR);
    double s = 0;
    for (int n = 0; n <= deg; ++n)
      s += std::exp(logc[n] + n * lR - m);
    const double log_max = m + std::log(s), log_rho = std::log(r * D.X);
    for (int l = 0; l <= deg; ++l)
      out[l] = std::min(out[l], log_max - l * log_rho);
  }
  return out;
}

/// log((2 pi)^l / l! Delta^{2a(l+2)})
inline double log_coefficient_bound(int l, double Delta, int a) {
  return l * std::log(2 * std::numbers::pi) - std::lgamma(l + 1.0) + 2.0 * a * (l + 2) * std::log(Delta);
}

inline bool coefficients_within_bound(const IndicatorPoly &D) {
  const auto maj = log_monomial_majorant(D);
  for (int l = 0; l <= D.degree(); ++l)
    if (maj[l] > log_coefficient_bound(l, D.Delta, D.a))
      return false;
  return true;
}

/// Build D+ or D- as the Chebyshev interpolant of an erf-smoothed window whose
/// edges sit midway through the transition zones of width Delta^{-a}. The
/// sandwich, degree budget and coefficient bounds are verified before return.
inline IndicatorPoly indicator_poly(double X, double Delta, int a, IndicatorSign sign,
                                    bool paper_faithful = false) {
  if (paper_faithful) {
    if (!(X > 100))
      throw domain_error("indicator_poly: paper-faithful mode needs X > 100");
  } else if (!(X >= 4 && Delta >= 8 && a == 3)) {
    throw domain_error("indicator_poly: scaled mode needs X >= 4, Delta >= 8, a = 3");
  }
  IndicatorPoly D;
  D.sign = sign;
  D.X = X;
  D.Delta = Delta;
  D.a = a;
  const double h = std::pow(Delta, -a), w = 1 / Delta;
  const double c1 = sign == IndicatorSign::plus ? -h / 2 : h / 2;
  const double c2 = sign == IndicatorSign::plus ? w + h / 2 : w - h / 2;
  const double s = h / 2 / 3.0; // edge scale: erfc(3) leaves 1e-5 at the zone ends
  auto f = [&](double x) { return 0.5 * (std::erf((x - c1) / s) - std::erf((x - c2) / s)); };

  // Chebyshev index n resolves features of size about X / n near the centre;
  // 12 X / s leaves the Gaussian tail of the edge spectrum below 1e-15.
  const double want = 12 * X / s;
  if (want > 5e7 || want > D.degree_budget())
    throw resource_error("indicator_poly: required degree " + std::to_string(want) +
                         " exceeds the working limit");
  int N = 1024;
  while (N < want)
    N *= 2;
  auto c = detail::chebyshev_coefficients(f, X, N);
  double tail = 0;
  int keep = N;
  while (keep > 0 && tail + std::fabs(c[keep]) < 1e-9) {
    tail += std::fabs(c[keep]);
    --keep;
  }
  c.resize(static_cast<std::size_t>(keep + 1));
  D.cheb = std::move(c);

  if (!(D.degree() < D.degree_budget()))
    throw construction_error("indicator_poly: degree above 100 X Delta^{3a}");
  const auto chk = verify_indicator(D);
  if (!chk.ok)
    throw construction_error("indicator_poly: sandwich fails at x = " + std::to_string(chk.worst_x) +
                             " by " + std::to_string(chk.worst_excess));
  if (!coefficients_within_bound(D))
    throw construction_error("indicator_poly: coefficient bound fails");
  return D;
}

/// |D(y)| <= |2y/X|^{100 X Delta^{3a}} for |y| >= X, compared in log space
/// through |T_n(r)| <= (|r| + sqrt(r^2 - 1))^n.
inline bool indicator_growth_check(const IndicatorPoly &D, double y) {
  if (!(std::fabs(y) >= D.X))
    throw domain_error("indicator_growth_check: need |y| >= X");
  const double r = std::fabs(y) / D.X, lg = std::acosh(r);
  double m = -INFINITY;
  std::vector<double> terms;
  terms.reserve(D.cheb.size());
  for (int n = 0; n <= D.degree(); ++n)
    if (D.cheb[n] != 0) {
      terms.push_back(std::log(std::fabs(D.cheb[n])) + n * lg);
      m = std::max(m, terms.back());
    }
  double s = 0;
  for (double t : terms)
    s += std::exp(t - m);
  const double log_abs = m + std::log(s);
  return log_abs <= D.degree_budget() * std::log(2 * r);
}

/// The coefficient route: sum_l bound_l |y|^l <= |y/X|^K Delta^{4a} exp(2 pi Delta^{2a} X),
/// K = 100 X Delta^{3a}; true when that is at most |2y/X|^K, i.e. when
/// 4a log Delta + 2 pi Delta^{2a} X <= K log 2. Independent of y >= X.
inline bool coefficient_route_holds(double X, double Delta, int a) {
  const double K = 100 * X * std::pow(Delta, 3 * a);
  return 4 * a * std::log(Delta) + 2 * std::numbers::pi * std::pow(Delta, 2 * a) * X <=
         K * std::log(2.0);
}

} // namespace zetalab
