#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <fftw3.h>

#include "zetalab/errors.hpp"
#include "zetalab/indicator.hpp"
#include "zetalab/parallel.hpp"
#include "zetalab/stats.hpp"

namespace zetalab {

inline bool is_prime(std::uint64_t n) {
  if (n < 2)
    return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0)
      return false;
  return true;
}

inline std::uint64_t pow_mod(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  b %= m;
  while (e) {
    if (e & 1)
      r = static_cast<std::uint64_t>(static_cast<unsigned __int128>(r) * b % m);
    b = static_cast<std::uint64_t>(static_cast<unsigned __int128>(b) * b % m);
    e >>= 1;
  }
  return r;
}

inline std::uint64_t primitive_root(std::uint64_t q) {
  if (!is_prime(q))
    throw domain_error("primitive_root: q must be prime");
  std::vector<std::uint64_t> f;
  std::uint64_t m = q - 1;
  for (std::uint64_t d = 2; d * d <= m; ++d)
    if (m % d == 0) {
      f.push_back(d);
      while (m % d == 0)
        m /= d;
    }
  if (m > 1)
    f.push_back(m);
  for (std::uint64_t g = 2; g < q; ++g) {
    bool ok = true;
    for (auto p : f)
      if (pow_mod(g, (q - 1) / p, q) == 1) {
        ok = false;
        break;
      }
    if (ok)
      return g;
  }
  return 1; // q = 2
}

/// Characters chi_a(g^k) = e^{2 pi i a k / (q-1)} modulo a prime q.
struct CharacterTable {
  std::uint64_t q = 0, g = 0;
  std::vector<std::int64_t> index;   // discrete log of n mod q; -1 at n = 0
  std::vector<std::uint64_t> powers; // g^k mod q, k = 0..q-2
  std::vector<std::int64_t> exponents; // the selected characters
  std::vector<std::complex<double>> roots; // e^{2 pi i k / (q-1)}

  std::uint64_t order() const { return q - 1; }
  std::complex<double> chi(std::int64_t a, std::uint64_t n) const {
    const auto k = index[n % q];
    if (k < 0)
      return 0.0;
    return roots[static_cast<std::size_t>((a * k) % static_cast<std::int64_t>(q - 1))];
  }
  static bool even(std::int64_t a) { return a % 2 == 0; }
  /// phi+(q): number of even primitive characters.
  std::size_t phi_plus() const { return (q - 1) / 2 - 1; }
};

inline CharacterTable character_table(std::uint64_t q) {
  if (!is_prime(q))
    throw domain_error("character_table: q = " + std::to_string(q) + " is not prime");
  CharacterTable t;
  t.q = q;
  t.g = primitive_root(q);
  t.index.assign(q, -1);
  t.powers.resize(q - 1);
  std::uint64_t x = 1;
  for (std::uint64_t k = 0; k + 1 < q; ++k) {
    t.powers[k] = x;
    t.index[x] = static_cast<std::int64_t>(k);
    x = x * t.g % q;
  }
  t.roots.resize(q - 1);
  for (std::uint64_t k = 0; k + 1 < q; ++k)
    t.roots[k] = std::polar(1.0, 2 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(q - 1));
  return t;
}

/// Even nontrivial (hence primitive) characters: a = 2, 4, ..., q - 3.
inline CharacterTable even_primitive_chars(std::uint64_t q) {
  if (q < 5)
    throw domain_error("even_primitive_chars: q must be at least 5");
  auto t = character_table(q);
  for (std::int64_t a = 2; a < static_cast<std::int64_t>(q - 1); a += 2)
    t.exponents.push_back(a);
  return t;
}

/// tau(chi_a) for every a = 0..q-2 in one DFT of k -> e(g^k / q).
inline std::vector<std::complex<double>> gauss_sums(const CharacterTable &t) {
  const int n = static_cast<int>(t.q - 1);
  std::vector<std::complex<double>> in(static_cast<std::size_t>(n)), out(in.size());
  for (int k = 0; k < n; ++k)
    in[k] = std::polar(1.0, 2 * std::numbers::pi * static_cast<double>(t.powers[k]) / static_cast<double>(t.q));
  fftw_plan plan;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex *>(in.data()),
                            reinterpret_cast<fftw_complex *>(out.data()), FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

/// Direct O(q) Gauss sum.
inline std::complex<double> gauss_sum(const CharacterTable &t, std::int64_t a) {
  std::complex<double> s = 0;
  for (std::uint64_t n = 1; n < t.q; ++n)
    s += t.chi(a, n) * std::polar(1.0, 2 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(t.q));
  return s;
}

/// Weights n^{-1/2} Gamma(1/4, pi n^2 c / q) / Gamma(1/4) for n = 1..N with the
/// tail bound past N. Gamma(1/4, x) <= x^{-3/4} e^{-x}.
struct AfeWeights {
  std::vector<double> w; // w[n], w[0] unused
  double tail_bound = 0;
};

inline AfeWeights afe_weights(std::uint64_t q, double c, double cutoff = 60) {
  AfeWeights W;
  const double k = std::numbers::pi * c / static_cast<double>(q);
  const auto N = static_cast<std::size_t>(std::ceil(std::sqrt(cutoff / k)));
  const double g14 = boost::math::tgamma(0.25);
  W.w.assign(N + 1, 0.0);
  for (std::size_t n = 1; n <= N; ++n)
    W.w[n] = boost::math::tgamma(0.25, k * double(n) * double(n)) / (g14 * std::sqrt(double(n)));
  const double x1 = k * double(N + 1) * double(N + 1);
  const double ratio = std::exp(-k * (2.0 * double(N + 1) + 1));
  W.tail_bound = std::pow(x1, -0.75) * std::exp(-x1) / g14 / (1 - ratio);
  return W;
}

struct CentralValue {
  std::int64_t a = 0;
  std::complex<double> L;
  double log_abs = 0;
};

/// Absolute accuracy target for central values.
inline constexpr double kCentralValueTolerance = 1e-8;

/// L(1/2, chi_a) for even primitive chi_a from
///   L = sum chi(n) n^{-1/2} G(pi n^2 c / q) + eps sum conj chi(n) n^{-1/2} G(pi n^2 / (q c)),
/// G(x) = Gamma(1/4, x) / Gamma(1/4), eps = tau(chi) / sqrt q.
inline std::complex<double> central_value(const CharacterTable &t, std::int64_t a,
                                          std::complex<double> tau, const AfeWeights &Wc,
                                          const AfeWeights &Winv) {
  if (!CharacterTable::even(a) || a % static_cast<std::int64_t>(t.q - 1) == 0)
    throw domain_error("central_value: character must be even and nontrivial");
  std::complex<double> s1 = 0, s2 = 0;
  for (std::size_t n = 1; n < Wc.w.size(); ++n)
    s1 += t.chi(a, n) * Wc.w[n];
  for (std::size_t n = 1; n < Winv.w.size(); ++n)
    s2 += std::conj(t.chi(a, n)) * Winv.w[n];
  return s1 + tau / std::sqrt(static_cast<double>(t.q)) * s2;
}

inline std::complex<double> central_value(const CharacterTable &t, std::int64_t a, double c = 1.0) {
  if (t.q > 100000)
    throw precision_loss_error("central_value: accuracy is only guaranteed for q <= 1e5");
  const auto Wc = afe_weights(t.q, c), Winv = afe_weights(t.q, 1 / c);
  if (Wc.tail_bound + Winv.tail_bound > kCentralValueTolerance)
    throw precision_loss_error("central_value: truncation bound above tolerance");
  return central_value(t, a, gauss_sum(t, a), Wc, Winv);
}

struct Family {
  std::uint64_t q = 0;
  std::vector<CentralValue> values;
  double truncation_bound = 0; // of each central value
};

/// Central values for every even primitive character modulo q.
inline Family central_values(std::uint64_t q, double c = 1.0) {
  if (q > 100000)
    throw precision_loss_error("central_values: accuracy is only guaranteed for q <= 1e5");
  const auto t = even_primitive_chars(q);
  const auto tau = gauss_sums(t);
  const auto Wc = afe_weights(q, c), Winv = afe_weights(q, 1 / c);
  Family f;
  f.q = q;
  f.truncation_bound = Wc.tail_bound + Winv.tail_bound;
  if (f.truncation_bound > kCentralValueTolerance)
    throw precision_loss_error("central_values: truncation bound above tolerance");
  f.values = parallel_map<CentralValue>(t.exponents.size(), [&](std::uint64_t i) {
    const auto a = t.exponents[i];
    const auto L = central_value(t, a, tau[static_cast<std::size_t>(a)], Wc, Winv);
    const double m = std::abs(L);
    return CentralValue{a, L, m > 0 ? std::log(m) : -std::numeric_limits<double>::infinity()};
  });
  return f;
}

/// Fraction of the family with log|L| >= W.
inline double level_set_fraction(const Family &f, double W) {
  if (f.values.empty())
    return 0;
  std::size_t k = 0;
  for (const auto &v : f.values)
    if (v.log_abs >= W)
      ++k;
  return static_cast<double>(k) / static_cast<double>(f.values.size());
}

/// Family average of |L(1/2, chi)|^{2 alpha}.
inline double q_moment(const Family &f, double alpha) {
  if (alpha < 0)
    throw domain_error("q_moment: alpha must be nonnegative");
  if (alpha == 0)
    return 1.0;
  long double s = 0;
  for (const auto &v : f.values)
    s += std::exp(2.0L * alpha * v.log_abs);
  return static_cast<double>(s / f.values.size());
}

/// log|L| / sqrt(log log q / 2) against the standard normal.
inline double family_ks(const Family &f) {
  const double sd = std::sqrt(0.5 * std::log(std::log(static_cast<double>(f.q))));
  std::vector<double> z;
  z.reserve(f.values.size());
  for (const auto &v : f.values)
    z.push_back(v.log_abs / sd);
  return ks_distance(z, standard_normal_cdf);
}

/// Fraction with |L| >= (log q)^{-1/2}.
inline double nonvanishing_fraction(const Family &f) {
  return level_set_fraction(f, -0.5 * std::log(std::log(static_cast<double>(f.q))));
}

/// Second differences of log q_moment on an increasing alpha grid; convexity
/// means all are >= 0. Returns the smallest, scaled by the local spacing.
inline double min_log_moment_curvature(const Family &f, const std::vector<double> &alphas) {
  std::vector<double> lm;
  for (double a : alphas)
    lm.push_back(std::log(q_moment(f, a)));
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < alphas.size(); ++i) {
    const double h1 = alphas[i] - alphas[i - 1], h2 = alphas[i + 1] - alphas[i];
    // slope difference, >= 0 for a convex function
    const double d = (lm[i + 1] - lm[i]) / h2 - (lm[i] - lm[i - 1]) / h1;
    worst = std::min(worst, d);
  }
  return worst;
}

} // namespace zetalab
