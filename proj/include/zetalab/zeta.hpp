#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/bernoulli.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "zetalab/errors.hpp"
#include "zetalab/parallel.hpp"
#include "zetalab/rng.hpp"
#include "zetalab/stats.hpp"

namespace zetalab {

enum class ZetaMethod { riemann_siegel, euler_maclaurin };

inline const char *to_string(ZetaMethod m) {
  return m == ZetaMethod::riemann_siegel ? "riemann_siegel" : "euler_maclaurin";
}

struct ZetaPoint {
  double t = 0.0;
  std::complex<double> value;
  double log_abs = 0.0; // -inf at an exact zero
  ZetaMethod method = ZetaMethod::euler_maclaurin;
};

/// Heights where each method is used and trusted.
inline constexpr double kRiemannSiegelFrom = 50.0;
inline constexpr double kMaxHeight = 1e8;

namespace detail {

using big = boost::multiprecision::cpp_bin_float_100;

/// ln Gamma(z) for complex z, Re z > 0, by shifting up and Stirling.
inline std::complex<long double> lgamma_complex(std::complex<long double> z) {
  std::complex<long double> shift = 0;
  while (std::abs(z) < 20.0L) {
    shift += std::log(z);
    z += 1.0L;
  }
  // Stirling with B_{2k}/(2k(2k-1) z^{2k-1}), k = 1..8
  static constexpr long double c[] = {1.0L / 12,         -1.0L / 360,
                                      1.0L / 1260,       -1.0L / 1680,
                                      1.0L / 1188,       -691.0L / 360360,
                                      1.0L / 156,        -3617.0L / 122400};
  const std::complex<long double> iz = 1.0L / z, iz2 = iz * iz;
  std::complex<long double> series = 0, pw = iz;
  for (long double ck : c) {
    series += ck * pw;
    pw *= iz2;
  }
  const long double half_log_2pi = 0.918938533204672741780329736406L;
  return (z - 0.5L) * std::log(z) - z + half_log_2pi + series - shift;
}

/// Riemann-Siegel correction terms in the complex form
///   R(s) = sum_{n<=N} n^{-s} + (-1)^{N-1} a^{-1/2} e^{-i phi} sum_k a^{-k} sum_l
///          d(k,l) F^{(3k-2l)}(p) / (pi^{2k-l} (2i)^l),
/// with a = sqrt(t/2pi), p = 1 - 2(a - N) and
///   F(z) = (exp(pi i (z^2/2 + 3/8)) - i sqrt2 cos(pi z/2)) / (2 cos pi z).
/// F is entire; its Taylor coefficients come from a power-series division
/// carried out in 100-digit arithmetic because the division cancels heavily.
struct RiemannSiegelTables {
  static constexpr int kTerms = 12;
  static constexpr int kDegree = 110;
  static constexpr int kMaxDeriv = 3 * (kTerms - 1);

  // deriv[m][j]: coefficient of p^j in F^{(m)}(p)
  std::vector<std::vector<std::complex<double>>> deriv;
  // weight[k][l] = d(k,l) / (pi^{2k-l} (2i)^l)
  std::vector<std::vector<std::complex<double>>> weight;

  RiemannSiegelTables() {
    const big pi = boost::math::constants::pi<big>();
    const big sqrt2 = sqrt(big(2));
    std::vector<big> fact(kDegree + 1);
    fact[0] = 1;
    for (int i = 1; i <= kDegree; ++i)
      fact[i] = fact[i - 1] * i;

    // numerator: e^{3 pi i/8} exp(i pi z^2 / 2) - i sqrt2 cos(pi z / 2)
    std::vector<big> num_re(kDegree + 1, big(0)), num_im(kDegree + 1, big(0));
    const big c38 = cos(3 * pi / 8), s38 = sin(3 * pi / 8);
    for (int k = 0; 2 * k <= kDegree; ++k) {
      // (i pi/2)^k / k!
      big mag = pow(pi / 2, k) / fact[k];
      big re = 0, im = 0;
      switch (k % 4) {
      case 0: re = mag; break;
      case 1: im = mag; break;
      case 2: re = -mag; break;
      case 3: im = -mag; break;
      }
      num_re[2 * k] += c38 * re - s38 * im;
      num_im[2 * k] += c38 * im + s38 * re;
      const big cosk = ((k % 2) ? -1 : 1) * pow(pi / 2, 2 * k) / fact[2 * k];
      num_im[2 * k] -= sqrt2 * cosk;
    }
    std::vector<big> den(kDegree + 1, big(0));
    for (int k = 0; 2 * k <= kDegree; ++k)
      den[2 * k] = 2 * ((k % 2) ? -1 : 1) * pow(pi, 2 * k) / fact[2 * k];

    std::vector<big> q_re(kDegree + 1), q_im(kDegree + 1);
    for (int n = 0; n <= kDegree; ++n) {
      big sr = num_re[n], si = num_im[n];
      for (int k = 2; k <= n; k += 2) {
        sr -= den[k] * q_re[n - k];
        si -= den[k] * q_im[n - k];
      }
      q_re[n] = sr / den[0];
      q_im[n] = si / den[0];
    }

    deriv.assign(kMaxDeriv + 1, {});
    for (int m = 0; m <= kMaxDeriv; ++m) {
      for (int j = 0; j + m <= kDegree; ++j) {
        const big f = fact[j + m] / fact[j];
        deriv[m].emplace_back(static_cast<double>(q_re[j + m] * f),
                              static_cast<double>(q_im[j + m] * f));
      }
    }

    // d(k,l) recurrence on the critical line
    std::vector<std::vector<big>> d(kTerms);
    auto get = [&](int k, int l) -> big {
      if (k < 0 || l < 0 || l >= static_cast<int>(d[k].size()))
        return big(0);
      return d[k][l];
    };
    d[0] = {big(1)};
    for (int k = 1; k < kTerms; ++k) {
      d[k].assign(3 * k / 2 + 1, big(0));
      for (int l = 0; l <= 3 * k / 2; ++l) {
        const int m = 3 * k - 2 * l;
        if (m != 0) {
          d[k][l] = -(m + 1) * get(k - 1, l - 2) + get(k - 1, l) / (4 * m);
        } else {
          big s = 0;
          for (int r = 0; r < l; ++r) {
            const big term = d[k][r] * fact[2 * l - 2 * r] / fact[l - r];
            s -= ((l - r) % 2 ? -1 : 1) * term;
          }
          d[k][l] = s;
        }
      }
    }
    weight.assign(kTerms, {});
    for (int k = 0; k < kTerms; ++k) {
      for (int l = 0; l <= 3 * k / 2; ++l) {
        // 1 / (2i)^l = (-i/2)^l
        const big mag = d[k][l] / (pow(pi, 2 * k - l) * pow(big(2), l));
        double re = 0, im = 0;
        switch (l % 4) {
        case 0: re = static_cast<double>(mag); break;
        case 1: im = -static_cast<double>(mag); break;
        case 2: re = -static_cast<double>(mag); break;
        case 3: im = static_cast<double>(mag); break;
        }
        weight[k].emplace_back(re, im);
      }
    }
  }

  std::complex<double> F(int m, double p) const {
    const auto &c = deriv[m];
    std::complex<double> s = 0;
    for (std::size_t j = c.size(); j-- > 0;)
      s = s * p + c[j];
    return s;
  }
};

inline const RiemannSiegelTables &rs_tables() {
  static const RiemannSiegelTables tables;
  return tables;
}

inline long double reduce_2pi(long double x) {
  constexpr long double two_pi = 6.283185307179586476925286766559L;
  return x - two_pi * std::nearbyint(x / two_pi);
}

inline const std::vector<long double> &log_table(std::size_t n) {
  static thread_local std::vector<long double> table{0.0L, 0.0L};
  if (table.size() <= n) {
    const std::size_t old = table.size();
    table.resize(std::max(n + 1, 2 * old));
    for (std::size_t k = old; k < table.size(); ++k)
      table[k] = std::log(static_cast<long double>(k));
  }
  return table;
}

} // namespace detail

/// Riemann-Siegel theta function, not reduced mod 2pi.
inline long double siegel_theta(long double t) {
  constexpr long double pi = 3.141592653589793238462643383279503L;
  if (t >= 50.0L) {
    const long double it = 1.0L / t, it2 = it * it;
    return t / 2 * std::log(t / (2 * pi)) - t / 2 - pi / 8 +
           it * (1.0L / 48 + it2 * (7.0L / 5760 + it2 * (31.0L / 80640 +
           it2 * (127.0L / 430080 + it2 * (511.0L / 1216512)))));
  }
  const auto lg = detail::lgamma_complex({0.25L, t / 2});
  return lg.imag() - t / 2 * std::log(pi);
}

/// Euler-Maclaurin summation for zeta(s), any s != 1.
inline std::complex<double> zeta_euler_maclaurin(std::complex<double> s_in) {
  using cld = std::complex<long double>;
  const cld s(s_in.real(), s_in.imag());
  if (std::abs(s - 1.0L) < 1e-12L)
    throw domain_error("zeta pole at s = 1");
  const long double at = std::abs(s.imag());
  const int N = 20 + static_cast<int>(std::ceil(at / 3.0L));
  constexpr int M = 20;

  const auto &logs = detail::log_table(static_cast<std::size_t>(N));
  cld sum = 0;
  for (int n = 1; n < N; ++n)
    sum += std::exp(-s * logs[n]);
  const cld Ns = std::exp(-s * logs[N]); // N^{-s}
  sum += Ns * static_cast<long double>(N) / (s - 1.0L) + Ns / 2.0L;

  // B_{2k}/(2k)! s(s+1)...(s+2k-2) N^{-s-2k+1}
  cld rising = s;                      // s(s+1)...(s+2k-2)
  cld power = Ns / static_cast<long double>(N); // N^{-s-2k+1}
  long double fact = 2.0L;             // (2k)!
  for (int k = 1; k <= M; ++k) {
    const long double b2k = boost::math::bernoulli_b2n<long double>(k);
    const cld term = b2k / fact * rising * power;
    sum += term;
    if (std::abs(term) < 1e-19L * std::abs(sum))
      break;
    rising *= (s + static_cast<long double>(2 * k - 1)) * (s + static_cast<long double>(2 * k));
    power /= static_cast<long double>(N) * N;
    fact *= (2.0L * k + 1) * (2.0L * k + 2);
  }
  return {static_cast<double>(sum.real()), static_cast<double>(sum.imag())};
}

/// Hardy Z(t) by the Riemann-Siegel formula with 12 correction terms.
inline double hardy_z_rs(double t_in) {
  if (t_in < kRiemannSiegelFrom)
    throw precision_loss_error("Riemann-Siegel used below t = 50");
  if (t_in > kMaxHeight)
    throw precision_loss_error("height above 1e8 is outside the accuracy envelope");
  constexpr long double two_pi = 6.283185307179586476925286766559L;
  const long double t = t_in;
  const long double a = std::sqrt(t / two_pi);
  const auto N = static_cast<std::size_t>(a);
  const double p = static_cast<double>(1.0L - 2.0L * (a - N));

  const long double theta = siegel_theta(t);
  const auto &logs = detail::log_table(N);
  double main = 0.0;
  for (std::size_t n = 1; n <= N; ++n) {
    const double phase = static_cast<double>(detail::reduce_2pi(theta - t * logs[n]));
    main += std::cos(phase) / std::sqrt(static_cast<double>(n));
  }

  const auto &tab = detail::rs_tables();
  const double ainv = static_cast<double>(1.0L / a);
  std::complex<double> rs = 0;
  double apow = 1.0;
  for (int k = 0; k < detail::RiemannSiegelTables::kTerms; ++k) {
    std::complex<double> term = 0;
    for (int l = 0; l <= 3 * k / 2; ++l)
      term += tab.weight[k][l] * tab.F(3 * k - 2 * l, p);
    rs += term * apow;
    apow *= ainv;
  }
  // theta minus its leading asymptotic part, computed without cancellation
  const double it = static_cast<double>(1.0L / t), it2 = it * it;
  const double dtheta =
      it * (1.0 / 48 + it2 * (7.0 / 5760 + it2 * (31.0 / 80640 + it2 * (127.0 / 430080))));
  const double sign = (N % 2 == 1) ? 1.0 : -1.0; // (-1)^{N-1}
  const double corr = sign / std::sqrt(static_cast<double>(a)) *
                      (rs * std::polar(1.0, dtheta)).real();
  return 2.0 * main + 2.0 * corr;
}

inline ZetaPoint make_point(double t, std::complex<double> v, ZetaMethod m) {
  const double mod = std::abs(v);
  return {t, v, mod > 0 ? std::log(mod) : -std::numeric_limits<double>::infinity(), m};
}

inline ZetaPoint zeta_em_point(double t) {
  return make_point(t, zeta_euler_maclaurin({0.5, t}), ZetaMethod::euler_maclaurin);
}

inline ZetaPoint zeta_rs_point(double t) {
  const double z = hardy_z_rs(t);
  const double th = static_cast<double>(detail::reduce_2pi(siegel_theta(t)));
  return make_point(t, std::polar(1.0, -th) * z, ZetaMethod::riemann_siegel);
}

/// zeta(1/2 + it) for 0 <= t <= 1e8.
inline ZetaPoint zeta_half_line(double t) {
  if (!(t >= 0))
    throw domain_error("zeta_half_line: t must be nonnegative");
  if (t > kMaxHeight)
    throw precision_loss_error("zeta_half_line: t above 1e8");
  return t < kRiemannSiegelFrom ? zeta_em_point(t) : zeta_rs_point(t);
}

/// Hardy Z at any height t >= 0.
inline double hardy_z(double t) {
  if (t >= kRiemannSiegelFrom)
    return hardy_z_rs(t);
  const auto v = zeta_euler_maclaurin({0.5, t});
  return (std::polar(1.0, static_cast<double>(siegel_theta(t))) * v).real();
}

/// Uniform heights t_i = T U_i used by every t-side sampler.
inline double sample_height(double T, std::uint64_t seed, std::uint64_t i) {
  return T * CounterRng(seed).uniform(Stream::zeta_height, i, 0);
}

/// log|zeta(1/2+it)| at n uniform heights in [0, T].
inline std::vector<double> sample_log_abs(double T, std::uint64_t n, std::uint64_t seed) {
  return parallel_map<double>(
      n, [&](std::uint64_t i) { return zeta_half_line(sample_height(T, seed, i)).log_abs; });
}

inline Estimate level_set_from(const std::vector<double> &log_abs, double V) {
  std::uint64_t hits = 0;
  for (double x : log_abs)
    if (x > V || V == -std::numeric_limits<double>::infinity())
      ++hits;
  return binomial_estimate(hits, log_abs.size());
}

/// Fraction of t in [0, T] with log|zeta| > V, with binomial standard error.
inline Estimate level_set_measure(double T, double V, std::uint64_t n, std::uint64_t seed) {
  if (n < 1000)
    throw validation_error("level_set_measure needs at least 1000 samples");
  if (V == -std::numeric_limits<double>::infinity())
    return {1.0, 0.0};
  if (V == std::numeric_limits<double>::infinity())
    return {0.0, 0.0};
  return level_set_from(sample_log_abs(T, n, seed), V);
}

inline Estimate moment_from(const std::vector<double> &log_abs, double alpha) {
  MeanAccumulator acc;
  for (double x : log_abs)
    acc.add(alpha == 0.0 ? 1.0 : std::exp(2.0 * alpha * x));
  return {acc.mean, acc.stderr_of_mean()};
}

/// Monte Carlo (1/T) int_0^T |zeta(1/2+it)|^{2 alpha} dt.
inline Estimate moment_estimate(double T, double alpha, std::uint64_t n, std::uint64_t seed) {
  if (alpha < 0)
    throw domain_error("moment_estimate: alpha must be nonnegative");
  if (alpha == 0.0)
    return {1.0, 0.0};
  return moment_from(sample_log_abs(T, n, seed), alpha);
}

/// int_V^inf exp(-y^2/L)/sqrt(L) dy.
inline double gaussian_tail(double V, double loglogT) {
  if (!(loglogT > 0))
    throw domain_error("gaussian_tail: loglogT must be positive");
  return 0.5 * std::sqrt(std::numbers::pi) * std::erfc(V / std::sqrt(loglogT));
}

} // namespace zetalab
