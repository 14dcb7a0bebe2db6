#pragma once
// Slow, independent reference computations. None of these call into the
// library routine they are used to check.

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

#include "zetalab/barrier.hpp"

namespace oracle {

// Linear (Euler) sieve: every composite is struck exactly once by its least
// prime factor. Different algorithm from the odd-only Eratosthenes.
inline std::vector<std::uint64_t> linear_sieve(std::uint32_t limit) {
  std::vector<std::uint32_t> lp(limit + 1, 0);
  std::vector<std::uint64_t> pr;
  for (std::uint32_t i = 2; i <= limit; ++i) {
    if (lp[i] == 0) {
      lp[i] = i;
      pr.push_back(i);
    }
    for (auto p : pr) {
      if (p > lp[i] || static_cast<std::uint64_t>(i) * p > limit)
        break;
      lp[i * p] = static_cast<std::uint32_t>(p);
    }
  }
  return pr;
}

inline int trial_mobius(std::uint64_t n) {
  int mu = 1;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d)
      continue;
    n /= d;
    if (n % d == 0)
      return 0;
    mu = -mu;
  }
  if (n > 1)
    mu = -mu;
  return mu;
}

inline int trial_big_omega(std::uint64_t n) {
  int k = 0;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    while (n % d == 0) {
      n /= d;
      ++k;
    }
  return k + (n > 1 ? 1 : 0);
}

// zeta(s) by plain Euler-Maclaurin in long double: direct sum to N, then
// Bernoulli corrections. N is chosen well above |t| / (2 pi).
inline std::complex<long double> zeta_em(std::complex<long double> s) {
  using cld = std::complex<long double>;
  const int N = 30 + static_cast<int>(std::fabs(s.imag()));
  cld sum = 0;
  for (int n = 1; n < N; ++n)
    sum += std::pow(static_cast<long double>(n), -s);
  const long double Nl = N;
  sum += std::pow(Nl, 1.0L - s) / (s - 1.0L) + 0.5L * std::pow(Nl, -s);
  // B_2k / (2k)!
  const long double b[] = {1.0L / 12, -1.0L / 720, 1.0L / 30240, -1.0L / 1209600,
                           1.0L / 47900160, -691.0L / 1307674368000.0L};
  cld rising = s; // s (s+1) ... (s + 2k - 2)
  for (int k = 1; k <= 6; ++k) {
    sum += b[k - 1] * rising * std::pow(Nl, -s - static_cast<long double>(2 * k - 1));
    rising *= (s + static_cast<long double>(2 * k - 1)) * (s + static_cast<long double>(2 * k));
  }
  return sum;
}

// Siegel theta from its Stirling expansion (fine for t >= 10).
inline long double theta_asym(long double t) {
  const long double pi = std::numbers::pi_v<long double>;
  return t / 2 * std::log(t / (2 * pi)) - t / 2 - pi / 8 + 1 / (48 * t) +
         7 / (5760 * t * t * t);
}

inline long double hardy_z(long double t) {
  return (std::polar(1.0L, theta_asym(t)) * zeta_em({0.5L, t})).real();
}

// Root of f on [a, b] by bisection.
inline long double bisect(const std::function<long double(long double)> &f, long double a,
                          long double b) {
  long double fa = f(a);
  for (int i = 0; i < 100; ++i) {
    const long double m = (a + b) / 2, fm = f(m);
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return (a + b) / 2;
}

// Hurwitz zeta(s, x) for real s != 1, x > 0, by Euler-Maclaurin.
inline long double hurwitz(long double s, long double x) {
  const int N = 40;
  long double sum = 0;
  for (int n = 0; n < N; ++n)
    sum += std::pow(n + x, -s);
  const long double a = N + x;
  sum += std::pow(a, 1 - s) / (s - 1) + 0.5L * std::pow(a, -s);
  const long double b[] = {1.0L / 12, -1.0L / 720, 1.0L / 30240, -1.0L / 1209600, 1.0L / 47900160};
  long double rising = s;
  for (int k = 1; k <= 5; ++k) {
    sum += b[k - 1] * rising * std::pow(a, -s - (2 * k - 1));
    rising *= (s + 2 * k - 1) * (s + 2 * k);
  }
  return sum;
}

// L(1/2, chi) = q^{-1/2} sum_{a=1}^{q-1} chi(a) zeta(1/2, a/q).
inline std::complex<long double> l_half(std::uint64_t q,
                                        const std::function<std::complex<double>(std::uint64_t)> &chi) {
  std::complex<long double> s = 0;
  for (std::uint64_t a = 1; a < q; ++a) {
    const auto c = chi(a);
    s += std::complex<long double>(c.real(), c.imag()) *
         hurwitz(0.5L, static_cast<long double>(a) / static_cast<long double>(q));
  }
  return s / std::sqrt(static_cast<long double>(q));
}

// E[X^r], r = 0..order, of X = cos(th)/sqrt p + cos(2 th)/(2p) by the
// trapezoid rule in th. X^r is a trig polynomial of degree 2r, so M > 2 order
// points integrate it exactly up to rounding.
inline std::vector<double> prime_moments_quadrature(std::uint64_t p, int order) {
  const int M = 4 * order + 8;
  const double sp = std::sqrt(static_cast<double>(p)), pd = static_cast<double>(p);
  std::vector<double> m(static_cast<std::size_t>(order + 1), 0.0);
  for (int i = 0; i < M; ++i) {
    const double th = 2 * std::numbers::pi * i / M;
    const double x = std::cos(th) / sp + std::cos(2 * th) / (2 * pd);
    double xr = 1;
    for (int r = 0; r <= order; ++r, xr *= x)
      m[r] += xr / M;
  }
  return m;
}

// E[(sum_p X_p)^m] by expanding the multinomial over every composition of m
// into |block| parts.
inline double block_moment_multinomial(const std::vector<std::uint64_t> &block, int m) {
  std::vector<std::vector<double>> mom;
  for (auto p : block)
    mom.push_back(prime_moments_quadrature(p, m));
  const std::size_t K = block.size();
  std::vector<int> parts(K, 0);
  double total = 0;
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i + 1 == K) {
      parts[i] = left;
      double coef = std::tgamma(m + 1.0), prod = 1;
      for (std::size_t l = 0; l < K; ++l) {
        coef /= std::tgamma(parts[l] + 1.0);
        prod *= mom[l][static_cast<std::size_t>(parts[l])];
      }
      total += coef * prod;
      return;
    }
    for (int r = 0; r <= left; ++r) {
      parts[i] = r;
      rec(i + 1, left - r);
    }
  };
  if (K == 0)
    return m == 0 ? 1.0 : 0.0;
  rec(0, m);
  return total;
}

// E|1 - e^{i th} p^{-1/2}|^{-2 kappa} by the trapezoid rule (spectral for a
// smooth periodic integrand).
inline double tilt_factor_trapezoid(std::uint64_t p, double kappa, int M = 4096) {
  const double x = 1 / std::sqrt(static_cast<double>(p));
  double s = 0;
  for (int i = 0; i < M; ++i) {
    const double th = 2 * std::numbers::pi * i / M;
    s += std::pow(1 + x * x - 2 * x * std::cos(th), -kappa);
  }
  return s / M;
}

// E[N^{2k} 1(lo < N < hi)], N ~ N(0, var), through the integration-by-parts
// recursion I_n = -[x^{n-1} phi]_a^b + (n-1) I_{n-2} on the standardized scale.
inline double restricted_moment(int k, double var, double lo, double hi) {
  const double sd = std::sqrt(var);
  const double a = lo / sd, b = hi / sd;
  auto phi = [](double x) { return std::isfinite(x) ? std::exp(-x * x / 2) / std::sqrt(2 * std::numbers::pi) : 0.0; };
  auto pw = [](double x, int n) { return std::isfinite(x) ? std::pow(x, n) : 0.0; };
  double I = 0.5 * (std::erf(b / std::numbers::sqrt2) - std::erf(a / std::numbers::sqrt2));
  for (int n = 2; n <= 2 * k; n += 2)
    I = -(pw(b, n - 1) * phi(b) - pw(a, n - 1) * phi(a)) + (n - 1) * I;
  return I * std::pow(var, k);
}

// S_j of the prime walk by a direct long double loop over the table, with
// the phase computed as cos(t log p) without any reduction step.
inline std::vector<long double> walk_direct(double t, const std::vector<std::uint64_t> &primes,
                                            const std::vector<long double> &n_list) {
  std::vector<long double> S;
  for (std::size_t j = 1; j < n_list.size(); ++j) {
    long double s = 0;
    for (auto p : primes) {
      const long double lp = std::log(static_cast<long double>(p));
      if (!(std::log(lp) < n_list[j]))
        continue;
      s += std::cos(t * lp) / std::sqrt(static_cast<long double>(p)) +
           std::cos(2 * t * lp) / (2 * static_cast<long double>(p));
    }
    S.push_back(s);
  }
  return S;
}

// The barrier region written out from the definitions: |M_0|^2 in [L_0, U_0]
// and S_j in [midline - w_j, midline + w_j] with the slope fixed by the
// quantized start z = floor(-Delta_0 log|M_0|) / Delta_0.
inline bool good_event(double m0_sq, const std::vector<double> &S, const zetalab::BarrierConfig &b) {
  if (m0_sq < b.L0 || m0_sq > b.U0)
    return false;
  const long double D0 = b.Delta[0];
  const long double z = std::floor(-D0 * std::log(std::sqrt(static_cast<long double>(m0_sq)))) / D0;
  const long double n0 = b.schedule.n[1], nJ = b.schedule.n.back();
  const long double slope = (b.Vstar - z) / (nJ - n0);
  for (int j = 1; j <= b.J(); ++j) {
    const long double mid = z + slope * (b.schedule.n[j + 1] - n0);
    if (S[j] < mid - b.width[j] || S[j] > mid + b.width[j])
      return false;
  }
  return true;
}

// Lattice membership from the definitions, for brute-force grid enumeration.
inline bool lattice_member(const zetalab::BarrierConfig &b, const std::vector<long long> &k, int sign) {
  const long double s = sign, D0 = b.Delta[0];
  const long double u0 = k[0] / D0;
  if (!(u0 > 0) || u0 < b.L0 - s / D0 || u0 > b.U0 + s / D0)
    return false;
  const long double raw = -D0 * std::log(u0) / 2;
  long double fl = std::round(raw);
  if (std::fabs(raw - fl) > 1e-9L * std::max<long double>(1, std::fabs(raw)))
    fl = std::floor(raw);
  const long double zs = fl / D0;
  const long double n0 = b.schedule.n[1], nJ = b.schedule.n.back();
  const long double slope = (b.Vstar - zs) / (nJ - n0);
  long double z = -std::log(u0) / 2;
  for (int j = 1; j <= b.J(); ++j) {
    z += k[static_cast<std::size_t>(j)] / b.Delta[j];
    const long double mid = zs + slope * (b.schedule.n[j + 1] - n0);
    if (z < mid - b.width[j] - s / b.Delta[j] || z > mid + b.width[j] + s / b.Delta[j])
      return false;
  }
  return true;
}

// Every lattice tuple in a box wide enough to hold the region: k_0 over the
// u_0 range, and each k_j over |u_j| <= span.
inline std::vector<std::vector<long long>> lattice_brute_force(const zetalab::BarrierConfig &b, int sign,
                                                               long double span) {
  std::vector<std::vector<long long>> out;
  const int J = b.J();
  std::vector<long long> k(static_cast<std::size_t>(J + 1));
  const long long k0_hi = static_cast<long long>(std::ceil((b.U0 + 1 / b.Delta[0]) * b.Delta[0])) + 2;
  std::function<void(int)> rec = [&](int j) {
    if (j > J) {
      if (lattice_member(b, k, sign))
        out.push_back(k);
      return;
    }
    const long long K = static_cast<long long>(std::ceil(span * b.Delta[j]));
    for (long long v = -K; v <= K; ++v) {
      k[static_cast<std::size_t>(j)] = v;
      rec(j + 1);
    }
  };
  for (long long k0 = 1; k0 <= k0_hi; ++k0) {
    k[0] = k0;
    rec(1);
  }
  return out;
}

} // namespace oracle
