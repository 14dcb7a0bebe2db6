#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "zetalab/errors.hpp"
#include "zetalab/parallel.hpp"
#include "zetalab/primes.hpp"
#include "zetalab/stats.hpp"
#include "zetalab/steinhaus.hpp"
#include "zetalab/zeta.hpp"

namespace zetalab {

using NM = std::pair<std::uint64_t, std::uint64_t>;
using CoeffMap = std::map<NM, std::complex<double>>;

/// Q(t) = sum a(n,m) n^{-1/2-it} m^{-1/2+it}.
struct SeparablePoly {
  CoeffMap coeffs;

  /// a(n,m) = c and a(m,n) = conj(c).
  void add_pair(std::uint64_t n, std::uint64_t m, std::complex<double> c) {
    if (n == 0 || m == 0)
      throw domain_error("coefficient indices must be positive");
    if (n == m) {
      coeffs[{n, n}] += c.real();
      return;
    }
    coeffs[{n, m}] += c;
    coeffs[{m, n}] += std::conj(c);
  }
  std::size_t size() const { return coeffs.size(); }
};

/// Support rules: every prime factor in some block, per-block caps on
/// Omega_j(nm), and max(n, m) within the length budget.
struct SeparableConfig {
  BlockSchedule schedule;
  std::vector<long long> caps; // caps[j], j = 0..J
  double length_budget = 1e6;
};

/// Caps of 8 prime factors per block and length 1e6 unless overridden.
inline SeparableConfig scaled_separable_config(const BlockSchedule &s, long long cap = 8,
                                               double length = 1e6) {
  return {s, std::vector<long long>(static_cast<std::size_t>(s.J + 1), cap), length};
}

namespace detail {
inline const PrimeTable &small_prime_table() {
  static const PrimeTable t = sieve_primes(1'000'000);
  return t;
}

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_mul_overflow(a, b, &r))
    throw resource_error("coefficient index overflows 64 bits");
  return r;
}
} // namespace detail

struct ValidationResult {
  bool ok = true;
  std::string message;
};

inline ValidationResult validate_separable(const SeparablePoly &Q, const SeparableConfig &cfg) {
  const auto &table = detail::small_prime_table();
  auto fail = [](std::string m) { return ValidationResult{false, std::move(m)}; };
  const int J = cfg.schedule.J;
  if (static_cast<int>(cfg.caps.size()) != J + 1)
    return fail("caps must have J + 1 entries");
  for (const auto &[key, c] : Q.coeffs) {
    const auto [n, m] = key;
    const std::string at = "a(" + std::to_string(n) + "," + std::to_string(m) + ")";
    auto it = Q.coeffs.find({m, n});
    if (it == Q.coeffs.end() || it->second != std::conj(c))
      return fail("hermitian symmetry fails at " + at);
    if (static_cast<double>(std::max(n, m)) > cfg.length_budget)
      return fail("length budget exceeded at " + at);
    std::vector<long long> omega(static_cast<std::size_t>(J + 1), 0);
    for (auto x : {n, m})
      for (auto [p, e] : factorize(x, table)) {
        auto j = block_of(p, cfg.schedule);
        if (!j)
          return fail("support: prime " + std::to_string(p) + " outside every block at " + at);
        omega[*j] += e;
      }
    for (int j = 0; j <= J; ++j)
      if (omega[j] > cfg.caps[j])
        return fail("Omega_" + std::to_string(j) + " above cap at " + at);
  }
  return {};
}

/// Coefficients of Q1 Q2: a(n1 n2, m1 m2) += a1(n1,m1) a2(n2,m2).
inline SeparablePoly multiply(const SeparablePoly &A, const SeparablePoly &B,
                              double budget = 1e8) {
  if (static_cast<double>(A.size()) * static_cast<double>(B.size()) > budget)
    throw resource_error("product support exceeds the work budget");
  const std::vector<std::pair<NM, std::complex<double>>> a(A.coeffs.begin(), A.coeffs.end());
  struct Part {
    CoeffMap m;
    void merge(const Part &o) {
      for (const auto &[k, v] : o.m)
        m[k] += v;
    }
  };
  auto part = chunked_reduce<Part>(
      a.size(),
      [&](std::uint64_t lo, std::uint64_t hi) {
        Part p;
        for (auto i = lo; i < hi; ++i)
          for (const auto &[kb, vb] : B.coeffs)
            p.m[{detail::checked_mul(a[i].first.first, kb.first),
                 detail::checked_mul(a[i].first.second, kb.second)}] += a[i].second * vb;
        return p;
      },
      [](Part x, const Part &y) {
        x.merge(y);
        return x;
      },
      8);
  SeparablePoly out;
  out.coeffs = std::move(part.m);
  return out;
}

struct SquaredCoeffs {
  CoeffMap b; // coprime pairs only
  double b11 = 0;

  std::complex<double> at(std::uint64_t n, std::uint64_t m) const {
    auto it = b.find({n, m});
    return it == b.end() ? 0.0 : it->second;
  }
};

/// b(n,m) = sum_r P(rn, rm) / r for coprime (n,m), with P the coefficients of Q^2.
inline SquaredCoeffs square_to_b(const SeparablePoly &Q, double budget = 1e8) {
  const auto P = multiply(Q, Q, budget);
  SquaredCoeffs s;
  for (const auto &[uv, c] : P.coeffs) {
    const auto g = std::gcd(uv.first, uv.second);
    s.b[{uv.first / g, uv.second / g}] += c / static_cast<double>(g);
  }
  s.b11 = s.at(1, 1).real();
  return s;
}

/// b(1,1) as sum over coprime (u,v) of |C(u,v)|^2 with
/// C(u,v) = (uv)^{-1/2} sum_r a(ru, rv) / r.
inline double b11_from_coprime_sums(const SeparablePoly &Q) {
  std::map<NM, std::complex<double>> C;
  for (const auto &[nm, a] : Q.coeffs) {
    const auto g = std::gcd(nm.first, nm.second);
    const auto u = nm.first / g, v = nm.second / g;
    C[{u, v}] += a / (static_cast<double>(g) * std::sqrt(static_cast<double>(u) * v));
  }
  double s = 0;
  for (const auto &[k, c] : C)
    s += std::norm(c);
  return s;
}

struct DominanceReport {
  bool literal = true;  // |b(n,m)| <= b(1,1)
  bool weighted = true; // |b(n,m)| <= sqrt(nm) b(1,1)
  NM worst{1, 1};       // largest |b(n,m)| / b(1,1)
  double worst_ratio = 0;
};

inline DominanceReport check_dominance(const SquaredCoeffs &s, double rel_tol = 1e-12) {
  DominanceReport r;
  for (const auto &[nm, c] : s.b) {
    const double a = std::abs(c);
    const double ratio = s.b11 > 0 ? a / s.b11 : (a > 0 ? INFINITY : 0.0);
    if (ratio > r.worst_ratio) {
      r.worst_ratio = ratio;
      r.worst = nm;
    }
    if (a > s.b11 * (1 + rel_tol) + 1e-300)
      r.literal = false;
    if (a > std::sqrt(static_cast<double>(nm.first) * nm.second) * s.b11 * (1 + rel_tol) + 1e-300)
      r.weighted = false;
  }
  return r;
}

namespace detail {
/// e^{-it log(n/m)} with the phase reduced in long double.
inline std::complex<double> ratio_phase(double t, std::uint64_t n, std::uint64_t m) {
  constexpr long double two_pi = 6.283185307179586476925286766559L;
  long double x = static_cast<long double>(t) *
                  (std::log(static_cast<long double>(n)) - std::log(static_cast<long double>(m)));
  x -= two_pi * std::nearbyint(x / two_pi);
  return std::polar(1.0, -static_cast<double>(x));
}

inline std::complex<double> dirichlet_sum(const CoeffMap &c, double t) {
  std::complex<double> s = 0;
  for (const auto &[nm, a] : c)
    s += a / std::sqrt(static_cast<double>(nm.first) * nm.second) *
         ratio_phase(t, nm.first, nm.second);
  return s;
}
} // namespace detail

inline double evaluate(const SeparablePoly &Q, double t) {
  return detail::dirichlet_sum(Q.coeffs, t).real();
}

/// sum b(n,m) (nm)^{-1/2} (n/m)^{-it}
inline double evaluate_square(const SquaredCoeffs &s, double t) {
  return detail::dirichlet_sum(s.b, t).real();
}

/// theta_n extended completely additively from theta_p.
inline double steinhaus_eval(const SeparablePoly &Q,
                             const std::function<double(std::uint64_t)> &theta) {
  const auto &table = detail::small_prime_table();
  std::map<std::uint64_t, double> cache;
  auto th = [&](std::uint64_t n) {
    auto it = cache.find(n);
    if (it != cache.end())
      return it->second;
    double s = 0;
    for (auto [p, e] : factorize(n, table))
      s += e * theta(p);
    cache.emplace(n, s);
    return s;
  };
  std::complex<double> s = 0;
  for (const auto &[nm, a] : Q.coeffs)
    s += a / std::sqrt(static_cast<double>(nm.first) * nm.second) *
         std::polar(1.0, th(nm.first) - th(nm.second));
  return s.real();
}

inline double steinhaus_eval(const SeparablePoly &Q, std::uint64_t seed, std::uint64_t index) {
  return steinhaus_eval(Q, [&](std::uint64_t p) { return steinhaus_angle(seed, index, p); });
}

/// Monte Carlo E[Q(theta)^2] in the Steinhaus model.
inline Estimate steinhaus_second_moment(const SeparablePoly &Q, std::uint64_t n,
                                        std::uint64_t seed) {
  const auto acc = chunked_reduce<MeanAccumulator>(n, [&](std::uint64_t lo, std::uint64_t hi) {
    MeanAccumulator a;
    for (auto i = lo; i < hi; ++i) {
      const double q = steinhaus_eval(Q, seed, i);
      a.add(q * q);
    }
    return a;
  });
  return {acc.mean, acc.stderr_of_mean()};
}

struct MvtResult {
  double average = 0;  // (1/T) int_0^T Q(t)^2 dt
  double b11 = 0;
  double gap = 0;      // |average - b11| / b11
  double envelope = 0; // sum over off-diagonal 2|b| / (sqrt(nm) T |log(n/m)|), over b11
  bool termwise_ok = true;
};

/// Closed-form mean of Q^2 over [0, T], term by term.
inline MvtResult mvt_check(const SquaredCoeffs &s, double T) {
  if (!(T > 0))
    throw domain_error("mvt_check: T must be positive");
  MvtResult r;
  r.b11 = s.b11;
  long double total = 0, env = 0;
  for (const auto &[nm, c] : s.b) {
    const auto [n, m] = nm;
    const double w = 1.0 / std::sqrt(static_cast<double>(n) * m);
    if (n == m) {
      total += (c * w).real();
      continue;
    }
    const long double L = std::log(static_cast<long double>(n)) - std::log(static_cast<long double>(m));
    // (1/T) int_0^T e^{-itL} dt = (e^{-iTL} - 1) / (-iTL)
    const auto ph = detail::ratio_phase(T, n, m);
    const std::complex<double> avg = (ph - 1.0) / std::complex<double>(0, -static_cast<double>(T * L));
    const std::complex<double> term = c * w * avg;
    const double bound = 2 * std::abs(c) * w / static_cast<double>(T * std::fabs(L));
    if (std::abs(term) > bound * (1 + 1e-12))
      r.termwise_ok = false;
    total += term.real();
    env += bound;
  }
  r.average = static_cast<double>(total);
  r.gap = std::fabs(r.average - r.b11) / r.b11;
  r.envelope = static_cast<double>(env) / r.b11;
  return r;
}

inline MvtResult mvt_check(const SeparablePoly &Q, double T) { return mvt_check(square_to_b(Q), T); }

struct TwistedMomentReport {
  int power = 2;
  Estimate moment;     // (1/T) int |zeta M|^power Q^2
  double target = 0;   // (log T / log T_J)^{1 or 4} b(1,1)
  Estimate ratio;
  bool inconclusive = false; // stderr above 30% of the estimate
};

/// Monte Carlo over uniform t in [0, T]. log_TJ is log T_J of the mollifier
/// (pass 1 for M = 1, which makes the target log T or (log T)^4).
inline TwistedMomentReport twisted_moment_check(const SeparablePoly &Q,
                                                const std::function<std::complex<double>(double)> &M,
                                                double T, int power, std::uint64_t n_samples,
                                                std::uint64_t seed, double log_TJ = 1.0) {
  if (power != 2 && power != 4)
    throw domain_error("twisted_moment_check: power must be 2 or 4");
  if (!(T > 0 && T <= 1e7))
    throw domain_error("twisted_moment_check: T must lie in (0, 1e7]");
  const double b11 = square_to_b(Q).b11;
  const auto acc = chunked_reduce<MeanAccumulator>(n_samples, [&](std::uint64_t lo, std::uint64_t hi) {
    MeanAccumulator a;
    for (auto i = lo; i < hi; ++i) {
      const double t = sample_height(T, seed, i);
      const double q = evaluate(Q, t);
      const double zm = std::abs(zeta_half_line(t).value * M(t));
      a.add(std::pow(zm, power) * q * q);
    }
    return a;
  });
  TwistedMomentReport r;
  r.power = power;
  r.moment = {acc.mean, acc.stderr_of_mean()};
  const double shape = std::log(T) / log_TJ;
  r.target = (power == 2 ? shape : std::pow(shape, 4)) * b11;
  r.ratio = {r.moment.value / r.target, r.moment.stderr / r.target};
  r.inconclusive = !(r.moment.stderr <= 0.3 * r.moment.value);
  return r;
}

/// Random valid Q with at most max_terms coefficients: hermitian pairs (n, m)
/// built from up to three primes each out of the blocks' smallest primes,
/// max(n, m) <= max_len, Gaussian complex coefficients. Draw `index` of `seed`.
inline SeparablePoly random_separable(const SeparableConfig &cfg, const Blocks &blocks,
                                      int max_terms, std::uint64_t max_len, std::uint64_t seed,
                                      std::uint64_t index) {
  std::vector<std::uint64_t> pool;
  for (const auto &P : blocks.primes)
    for (auto p : P)
      if (p <= max_len && pool.size() < 25)
        pool.push_back(p);
  if (pool.empty())
    throw validation_error("random_separable: no prime below the length cap");
  const CounterRng rng(seed);
  std::uint32_t draw = 0;
  auto u = [&] { return rng.uniform(Stream::random_poly, index, draw++); };
  auto pick_number = [&] {
    std::uint64_t n = 1;
    const int k = static_cast<int>(u() * 4); // 0..3 prime factors
    for (int i = 0; i < k; ++i) {
      const auto p = pool[static_cast<std::size_t>(u() * static_cast<double>(pool.size()))];
      if (n * p <= max_len)
        n *= p;
    }
    return n;
  };
  SeparablePoly Q;
  const int pairs = 1 + static_cast<int>(u() * (max_terms / 2));
  for (int i = 0, tries = 0; i < pairs && tries < 50 * max_terms; ++tries) {
    const auto n = pick_number(), m = pick_number();
    if (Q.coeffs.count({n, m}))
      continue;
    SeparablePoly trial = Q;
    const double re = rng.normal(Stream::random_poly, index, draw++);
    const std::complex<double> c(re, rng.normal(Stream::random_poly, index, draw++));
    trial.add_pair(n, m, c);
    if (static_cast<int>(trial.size()) > max_terms || !validate_separable(trial, cfg).ok)
      continue;
    Q = std::move(trial);
    ++i;
  }
  return Q;
}

/// CSV rows n,m,re,im.
inline void write_coeff_csv(std::ostream &os, const CoeffMap &c) {
  os << "n,m,re,im\n";
  os.precision(17);
  for (const auto &[nm, v] : c)
    os << nm.first << ',' << nm.second << ',' << v.real() << ',' << v.imag() << '\n';
}

inline CoeffMap read_coeff_csv(std::istream &is) {
  CoeffMap c;
  std::string line;
  std::getline(is, line);
  if (line.rfind("n,m,re,im", 0) != 0)
    throw validation_error("coefficient CSV must start with the header n,m,re,im");
  while (std::getline(is, line)) {
    if (line.empty())
      continue;
    std::istringstream ls(line);
    std::uint64_t n, m;
    double re, im;
    char c1, c2, c3;
    if (!(ls >> n >> c1 >> m >> c2 >> re >> c3 >> im) || c1 != ',' || c2 != ',' || c3 != ',')
      throw validation_error("bad coefficient row: " + line);
    c[{n, m}] += std::complex<double>(re, im);
  }
  return c;
}

} // namespace zetalab
