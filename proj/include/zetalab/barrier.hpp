#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "zetalab/errors.hpp"
#include "zetalab/primes.hpp"

namespace zetalab {

/// Floor that forgives a few ulps below an integer, so that for example
/// (2/2) * 4 computed as 3.9999999999999996 still floors to 4.
inline long long floor_tolerant(long double x) {
  const long double r = std::nearbyint(x);
  if (std::fabs(x - r) <= 1e-9L * std::max<long double>(1.0L, std::fabs(x)))
    return static_cast<long long>(r);
  return static_cast<long long>(std::floor(x));
}

/// Overrides for the scaled parameter mode. Unset vectors take the defaults
/// w_j = 1, Delta_j = 16, Delta_0 = 256, A = 1, a = 5.
struct ScaledBarrierOptions {
  double A = 1.0;
  double Delta0 = 256.0;
  std::vector<double> Delta; // j = 1..J, or a single value for all
  std::vector<double> width; // j = 1..J, or a single value for all
  int a = 5;
};

/// Barrier, grid and tilt parameters on a block schedule.
///
/// Index conventions: Delta[j], X[j], width[j] for j = 0..J, with
/// Delta[0] = Delta_0 and width[0] unused (block 0 is constrained through
/// |M_0|^2 instead).
struct BarrierConfig {
  using real = long double;

  BlockSchedule schedule;
  real alpha = 1, V = 0, A = 1;
  real Vstar = 0, kappa_star = 0;
  std::vector<real> Delta;
  std::vector<real> X;
  std::vector<real> width;
  int a = 5;
  real L0 = 0, U0 = 0;

  int J() const { return schedule.J; }
  real n(int j) const { return schedule.n_at(j); }

  /// (V* - z) / (n_J - n_0)
  real kappa(real z) const {
    const real span = n(J()) - n(0);
    if (!(span > 0))
      throw domain_error("kappa: degenerate schedule with n_J = n_0");
    return (Vstar - z) / span;
  }

  real midline(int j, real z) const { return z + kappa(z) * (n(j) - n(0)); }

  std::pair<real, real> bounds(int j, real z) const {
    if (j < 1 || j > J())
      throw domain_error("bounds: j must lie in 1..J");
    const real m = midline(j, z);
    return {m - width[j], m + width[j]};
  }
};

namespace detail {
inline std::vector<long double> per_block(const std::vector<double> &v, int J, double dflt,
                                          const char *what) {
  std::vector<long double> out(static_cast<std::size_t>(J + 1), dflt);
  if (v.size() == 1) {
    for (int j = 1; j <= J; ++j)
      out[j] = v[0];
  } else if (!v.empty()) {
    if (static_cast<int>(v.size()) != J)
      throw validation_error(std::string(what) + ": expected one value or J values");
    for (int j = 1; j <= J; ++j)
      out[j] = v[j - 1];
  }
  return out;
}

inline long double euler_factor_max(const std::vector<std::uint64_t> &block0) {
  long double x = 1.0L;
  for (auto p : block0) {
    const long double f = 1.0L - 1.0L / std::sqrt(static_cast<long double>(p));
    x /= f * f;
  }
  return x;
}

inline void finish_barrier(BarrierConfig &b) {
  b.Vstar = b.V + b.A * (b.alpha + 1);
  const auto nJ = b.n(b.J());
  if (!(nJ > 0))
    throw domain_error("barrier needs n_J > 0");
  b.kappa_star = b.Vstar / nJ;
  const auto n0 = b.n(0);
  b.L0 = std::exp(-2 * b.kappa_star * n0);
  b.U0 = std::exp(-2 * b.kappa_star * n0 + std::pow(std::cbrt(n0), 2.0L));
  for (int j = 1; j <= b.J(); ++j) {
    if (!(b.Delta[j] >= 2))
      throw validation_error("Delta_j must be at least 2");
    if (!(b.X[j] > 2 * b.width[j]))
      throw validation_error("X_j must exceed the barrier window width");
  }
  if (!(b.Delta[0] >= 2))
    throw validation_error("Delta_0 must be at least 2");
}
} // namespace detail

/// Scaled-mode barrier: X_j = ceil(100 (alpha (n_j - n_{j-1}) + w_j)),
/// X_0 = prod_{p in P_0} (1 - p^{-1/2})^{-2}.
inline BarrierConfig make_scaled_barrier(const Blocks &blocks, double alpha, double V,
                                         const ScaledBarrierOptions &opt = {}) {
  BarrierConfig b;
  b.schedule = blocks.schedule;
  const int J = b.J();
  b.alpha = alpha;
  b.V = V;
  b.A = opt.A;
  b.a = opt.a;
  b.Delta = detail::per_block(opt.Delta, J, 16.0, "Delta");
  b.Delta[0] = opt.Delta0;
  b.width = detail::per_block(opt.width, J, 1.0, "width");
  b.width[0] = 0;
  b.X.assign(static_cast<std::size_t>(J + 1), 0);
  b.X[0] = detail::euler_factor_max(blocks.primes[0]);
  for (int j = 1; j <= J; ++j)
    b.X[j] = std::ceil(100 * (alpha * (b.n(j) - b.n(j - 1)) + b.width[j]));
  detail::finish_barrier(b);
  return b;
}

/// Paper-faithful barrier constants:
///   w_j = 1e4 log_{j+2} T, Delta_j = floor(log_{j+1}^10 T),
///   Delta_0 = e^{100 max(alpha,1) n_0}, X_j = ceil(100(alpha(n_j - n_{j-1}) + 1e4 log_{j+1} T)).
/// Values beyond long double range are stored as +inf.
inline BarrierConfig make_paper_barrier(const Blocks &blocks, double alpha, double V,
                                        double A) {
  const auto &s = blocks.schedule;
  if (s.mode != ScheduleMode::paper_faithful)
    throw domain_error("make_paper_barrier needs a paper-faithful schedule");
  BarrierConfig b;
  b.schedule = s;
  const int J = b.J();
  b.alpha = alpha;
  b.V = V;
  b.A = A;
  b.a = 5;
  b.Delta.assign(static_cast<std::size_t>(J + 1), 0);
  b.width.assign(static_cast<std::size_t>(J + 1), 0);
  b.X.assign(static_cast<std::size_t>(J + 1), 0);
  b.Delta[0] = std::exp(100.0L * std::max(1.0, alpha) * s.n_at(0));
  b.X[0] = detail::euler_factor_max(blocks.primes[0]);
  for (int j = 1; j <= J; ++j) {
    const auto &L = s.iterated_logs;
    b.width[j] = 1e4L * L.at(j + 2);
    b.Delta[j] = std::floor(std::pow(L.at(j + 1), 10.0L));
    b.X[j] = std::ceil(100 * (alpha * (s.n_at(j) - s.n_at(j - 1)) + 1e4L * L.at(j + 1)));
  }
  detail::finish_barrier(b);
  return b;
}

/// A grid point of the barrier region: u_j = k[j] / Delta_j.
struct GridTuple {
  std::vector<long long> num; // u_j * Delta_j
  std::vector<long double> u;
  std::vector<long double> z; // z_0..z_J; z_{-1} = 0 is implicit
};

enum class GridSign { plus, minus };

inline GridTuple make_tuple(const BarrierConfig &b, std::vector<long long> num) {
  GridTuple g;
  g.num = std::move(num);
  const int J = b.J();
  g.u.resize(static_cast<std::size_t>(J + 1));
  g.z.resize(g.u.size());
  for (int j = 0; j <= J; ++j)
    g.u[j] = static_cast<long double>(g.num[j]) / b.Delta[j];
  if (g.u[0] > 0) {
    g.z[0] = -0.5L * std::log(g.u[0]);
    for (int j = 1; j <= J; ++j)
      g.z[j] = g.z[j - 1] + g.u[j];
  } else {
    for (auto &z : g.z)
      z = std::numeric_limits<long double>::quiet_NaN();
  }
  return g;
}

/// Starting point z threaded into L_j(z), U_j(z) for a grid tuple. It is
/// quantized like the good event: floor(-Delta_0 log sqrt(u_0)) / Delta_0.
inline long double grid_start(const BarrierConfig &b, long double u0) {
  return static_cast<long double>(floor_tolerant(-0.5L * b.Delta[0] * std::log(u0))) /
         b.Delta[0];
}

/// Membership in the grid of the given sign.
inline bool in_grid(const BarrierConfig &b, const GridTuple &g, GridSign sign) {
  const long double s = sign == GridSign::plus ? 1.0L : -1.0L;
  const long double u0 = g.u[0];
  if (!(u0 > 0))
    return false;
  if (u0 < b.L0 - s / b.Delta[0] || u0 > b.U0 + s / b.Delta[0])
    return false;
  const long double zs = grid_start(b, u0);
  for (int j = 1; j <= b.J(); ++j) {
    auto [L, U] = b.bounds(j, zs);
    if (g.z[j] < L - s / b.Delta[j] || g.z[j] > U + s / b.Delta[j])
      return false;
  }
  return true;
}

/// Crude upper estimate of the number of grid tuples.
inline long double estimate_grid_size(const BarrierConfig &b) {
  long double n = (b.U0 - b.L0 + 2 / b.Delta[0]) * b.Delta[0] + 1;
  for (int j = 1; j <= b.J(); ++j)
    n *= (2 * b.width[j] + 2 / b.Delta[j]) * b.Delta[j] + 3;
  return n;
}

/// Stream every grid tuple of the given sign to `emit`, in lexicographic
/// order of (u_0, ..., u_J). Only tuples with u_0 > 0 exist.
inline std::uint64_t enumerate_grid(const BarrierConfig &b, GridSign sign,
                                    const std::function<void(const GridTuple &)> &emit,
                                    long double budget = 1e6L) {
  if (b.schedule.mode == ScheduleMode::paper_faithful)
    throw resource_error("paper-faithful grids are far too large to enumerate");
  const long double est = estimate_grid_size(b);
  if (!(est <= budget))
    throw resource_error("grid estimate " + std::to_string(static_cast<double>(est)) +
                         " exceeds budget");
  const long double s = sign == GridSign::plus ? 1.0L : -1.0L;
  const int J = b.J();
  std::uint64_t count = 0;

  const long long k0_lo = std::max<long long>(
      1, static_cast<long long>(std::floor((b.L0 - s / b.Delta[0]) * b.Delta[0])) - 1);
  const long long k0_hi =
      static_cast<long long>(std::ceil((b.U0 + s / b.Delta[0]) * b.Delta[0])) + 1;

  std::vector<long long> num(static_cast<std::size_t>(J + 1));
  std::function<void(int, long double, long double)> rec = [&](int j, long double zprev,
                                                                long double zs) {
    if (j > J) {
      GridTuple g = make_tuple(b, num);
      if (in_grid(b, g, sign)) {
        ++count;
        emit(g);
      }
      return;
    }
    auto [L, U] = b.bounds(j, zs);
    const long double lo = L - s / b.Delta[j] - zprev, hi = U + s / b.Delta[j] - zprev;
    const long long klo = static_cast<long long>(std::floor(lo * b.Delta[j])) - 1;
    const long long khi = static_cast<long long>(std::ceil(hi * b.Delta[j])) + 1;
    for (long long k = klo; k <= khi; ++k) {
      num[j] = k;
      const long double zj = zprev + static_cast<long double>(k) / b.Delta[j];
      if (zj < L - s / b.Delta[j] - 1e-12L || zj > U + s / b.Delta[j] + 1e-12L)
        continue;
      rec(j + 1, zj, zs);
    }
  };
  for (long long k0 = k0_lo; k0 <= k0_hi; ++k0) {
    const long double u0 = static_cast<long double>(k0) / b.Delta[0];
    if (u0 < b.L0 - s / b.Delta[0] || u0 > b.U0 + s / b.Delta[0])
      continue;
    num[0] = k0;
    rec(1, -0.5L * std::log(u0), grid_start(b, u0));
  }
  return count;
}

/// k_0 = floor(-(kappa*/2) log u_0), k_j = floor(kappa* u_j).
inline std::vector<long long> tilt_degrees(const GridTuple &g, long double kappa_star) {
  if (!(g.u.at(0) > 0))
    throw domain_error("tilt_degrees: u_0 must be positive");
  std::vector<long long> k(g.u.size());
  k[0] = floor_tolerant(-0.5L * kappa_star * std::log(g.u[0]));
  for (std::size_t j = 1; j < g.u.size(); ++j)
    k[j] = floor_tolerant(kappa_star * g.u[j]);
  return k;
}

/// log prod_j d_j^{2 k_j} for increments d_j = z_j - z_{j-1}.
inline long double log_tilt_constant(const std::vector<long double> &increments,
                                     const std::vector<long long> &k) {
  if (increments.size() != k.size())
    throw validation_error("tilt constant: size mismatch");
  long double s = 0;
  for (std::size_t j = 0; j < k.size(); ++j) {
    if (!(increments[j] > 0))
      throw domain_error("tilt constant: degenerate tuple, z not increasing at j = " +
                         std::to_string(j));
    if (k[j] != 0)
      s += 2.0L * k[j] * std::log(increments[j]);
  }
  return s;
}

inline std::vector<long double> increments_of(const std::vector<long double> &z) {
  std::vector<long double> d(z.size());
  long double prev = 0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    d[j] = z[j] - prev;
    prev = z[j];
  }
  return d;
}

inline long double log_tilt_constant(const GridTuple &g, long double kappa_star) {
  return log_tilt_constant(increments_of(g.z), tilt_degrees(g, kappa_star));
}

struct MagicResult {
  long double log_ratio = 0; // log[prod (c_j - c_{j-1})^{2k_j} / c_u]
  long double bound = 0;     // explicit B(u, c)
  long double endpoint_term = 0; // 2 kappa* |c_J - z_J|
};

/// Compare the perturbed product at c with the tilt constant at z.
///
/// With d_j = z_j - z_{j-1}, e_j = c_j - z_j, delta_j = e_j - e_{j-1}, x_j = delta_j / d_j
/// and k_j = kappa* d_j - f_j, 0 <= f_j < 1, one has
///   sum 2k_j log(1 + x_j) = 2 kappa* e_J - sum 2 f_j x_j - sum 2 k_j r(x_j),
/// where 0 <= r(x) = x - log(1+x) <= x^2 / (2 (1 + min(0, x))). Hence
///   |log ratio| <= C0 + 2 kappa* |e_J| + sum 2|delta_j|/d_j + sum k_j x_j^2 / (1 + min(0, x_j)).
inline MagicResult magic_ratio(const std::vector<long double> &z, const std::vector<long long> &k,
                               const std::vector<long double> &c, long double kappa_star,
                               long double C0 = 1e-6L) {
  if (z.size() != c.size() || z.size() != k.size())
    throw contract_error("magic_ratio: size mismatch");
  MagicResult r;
  long double zprev = 0, cprev = 0, eprev = 0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    const long double e = c[j] - z[j];
    if (!(std::fabs(e) <= 100))
      throw contract_error("magic_ratio: |c_j - z_j| > 100");
    const long double d = z[j] - zprev, dc = c[j] - cprev;
    if (!(d > 0) || !(dc > 0))
      throw contract_error("magic_ratio: increments must be positive");
    const long double delta = e - eprev, x = delta / d;
    r.log_ratio += 2.0L * k[j] * std::log1p(x);
    r.bound += 2 * std::fabs(delta) / d + k[j] * x * x / (1 + std::min(0.0L, x));
    zprev = z[j];
    cprev = c[j];
    eprev = e;
  }
  r.endpoint_term = 2 * kappa_star * std::fabs(eprev);
  r.bound += C0 + r.endpoint_term;
  return r;
}

} // namespace zetalab
