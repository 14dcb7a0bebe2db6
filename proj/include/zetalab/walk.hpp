#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <vector>

#include "zetalab/barrier.hpp"
#include "zetalab/errors.hpp"
#include "zetalab/primes.hpp"

namespace zetalab {

namespace detail {
/// p^{-it} with the phase t log p reduced in extended precision.
inline std::complex<double> prime_phase(double t, double logp) {
  constexpr long double two_pi = 6.283185307179586476925286766559L;
  long double x = static_cast<long double>(t) * logp;
  x -= two_pi * std::nearbyint(x / two_pi);
  return std::polar(1.0, -static_cast<double>(x));
}

/// p^{-1/2-it} + p^{-1-2it}/2 for one prime.
inline std::complex<double> prime_term(double t, std::uint64_t p, double logp) {
  const auto w = prime_phase(t, logp);
  const double pd = static_cast<double>(p);
  return w / std::sqrt(pd) + 0.5 * w * w / pd;
}
} // namespace detail

/// S(eta, t) = sum_{log log p < eta} p^{-1/2-it} + p^{-1-2it}/2.
inline std::complex<double> partial_sum(double eta, double t, const PrimeTable &table) {
  if (eta > std::log(std::log(static_cast<double>(table.limit) + 1.0)))
    throw coverage_error("partial_sum: prime table does not reach log log p = eta");
  std::complex<double> s = 0;
  for (std::size_t i = 0; i < table.size() && table.loglog[i] < eta; ++i)
    s += detail::prime_term(t, table.primes[i], table.log[i]);
  return s;
}

struct WalkTrace {
  double t = 0;
  std::vector<double> S; // S_0..S_J
  std::vector<double> Y; // Y_0 = S_0, Y_j = S_j - S_{j-1}
  double m0_sq = 1;      // |M_0(t)|^2
  long long frak_n = 0;  // floor(-Delta_0 log|M_0(t)|)
};

/// M_0(t) as the Euler product over block 0.
inline std::complex<double> mollifier_M0(double t, const Blocks &blocks) {
  std::complex<double> m = 1;
  const auto &P = blocks.primes.at(0);
  for (std::size_t i = 0; i < P.size(); ++i)
    m *= 1.0 - detail::prime_phase(t, blocks.logp[0][i]) /
                   std::sqrt(static_cast<double>(P[i]));
  return m;
}

inline WalkTrace walk_trace(double t, const Blocks &blocks, double Delta0) {
  WalkTrace w;
  w.t = t;
  const int J = blocks.J();
  w.S.resize(static_cast<std::size_t>(J + 1));
  w.Y.resize(w.S.size());
  std::complex<double> m0 = 1;
  for (int j = 0; j <= J; ++j) {
    double y = 0;
    const auto &P = blocks.primes[j];
    for (std::size_t i = 0; i < P.size(); ++i) {
      const auto ph = detail::prime_phase(t, blocks.logp[j][i]);
      const double pd = static_cast<double>(P[i]);
      const double rs = 1.0 / std::sqrt(pd);
      y += rs * ph.real() + 0.5 * (ph * ph).real() / pd;
      if (j == 0)
        m0 *= 1.0 - ph * rs;
    }
    w.Y[j] = y;
    w.S[j] = j == 0 ? y : w.S[j - 1] + y;
  }
  w.m0_sq = std::norm(m0);
  w.frak_n = static_cast<long long>(std::floor(-Delta0 * 0.5 * std::log(w.m0_sq)));
  return w;
}

struct MollifierValue {
  int j = 0;
  std::complex<double> value;
  long long cap = -1; // -1: no cap (block 0 uses the full product)
};

/// Work above this many prime-by-degree updates is refused.
inline constexpr double kMollifierBudget = 5e8;

/// sum over n supported on P_j with Omega(n) <= cap of mu(n) n^{-1/2-it}, by
/// multiplying the factors (1 - x p^{-1/2-it}) and dropping powers of x above
/// the cap.
inline MollifierValue mollifier_Mj(double t, int j, long long cap, const Blocks &blocks,
                                   double budget = kMollifierBudget) {
  if (j < 1 || j > blocks.J())
    throw domain_error("mollifier_Mj: j must lie in 1..J");
  if (cap < 0)
    throw domain_error("mollifier_Mj: cap must be nonnegative");
  const auto &P = blocks.primes[j];
  const auto deg = static_cast<std::size_t>(std::min<long long>(cap, static_cast<long long>(P.size())));
  if (static_cast<double>(P.size()) * static_cast<double>(deg + 1) > budget)
    throw resource_error("mollifier_Mj: truncated product exceeds the work budget");
  std::vector<std::complex<double>> c(deg + 1, 0.0);
  c[0] = 1;
  for (std::size_t i = 0; i < P.size(); ++i) {
    const auto x = detail::prime_phase(t, blocks.logp[j][i]) / std::sqrt(static_cast<double>(P[i]));
    for (std::size_t d = deg; d >= 1; --d)
      c[d] -= x * c[d - 1];
  }
  std::complex<double> s = 0;
  for (auto v : c)
    s += v;
  return {j, s, cap};
}

/// Default scaled caps 5 ceil(alpha^2 (n_j - n_{j-1})), j = 1..J (index 0 unused).
inline std::vector<long long> default_caps(const BlockSchedule &s, double alpha) {
  std::vector<long long> caps(static_cast<std::size_t>(s.J + 1), -1);
  for (int j = 1; j <= s.J; ++j)
    caps[j] = 5 * static_cast<long long>(std::ceil(alpha * alpha * static_cast<double>(s.n_at(j) - s.n_at(j - 1))));
  return caps;
}

/// The cap 5 alpha^2 (n_j - n_{j-1})^{1e5} in log space (it overflows for
/// any block longer than e^{0.007}).
inline long double log_paper_cap(const BlockSchedule &s, double alpha, int j) {
  return std::log(5.0L * alpha * alpha) + 1e5L * std::log(s.n_at(j) - s.n_at(j - 1));
}

/// M(t) = prod_j M_j(t); caps[j] for j >= 1 (caps[0] ignored).
inline std::complex<double> mollifier_full(double t, const Blocks &blocks,
                                           const std::vector<long long> &caps) {
  std::complex<double> m = mollifier_M0(t, blocks);
  for (int j = 1; j <= blocks.J(); ++j)
    m *= mollifier_Mj(t, j, caps.at(j), blocks).value;
  return m;
}

/// m0_sq in [L_0, U_0] and S_j in [L_j(z), U_j(z)] for all j >= 1, z = frak_n / Delta_0.
inline bool detect_good_event(const WalkTrace &w, const BarrierConfig &b) {
  if (!(w.m0_sq >= b.L0 && w.m0_sq <= b.U0))
    return false;
  const long double z = static_cast<long double>(w.frak_n) / b.Delta[0];
  for (int j = 1; j <= b.J(); ++j) {
    auto [L, U] = b.bounds(j, z);
    if (w.S[j] < L || w.S[j] > U)
      return false;
  }
  return true;
}

/// Good-event test at height t that stops at the first failing block. On
/// success the full trace is stored in *trace.
inline bool good_event_at(double t, const Blocks &blocks, const BarrierConfig &b,
                          WalkTrace *trace = nullptr) {
  std::complex<double> m0 = 1;
  double S = 0;
  const auto &P0 = blocks.primes[0];
  for (std::size_t i = 0; i < P0.size(); ++i) {
    const auto ph = detail::prime_phase(t, blocks.logp[0][i]);
    const double pd = static_cast<double>(P0[i]), rs = 1.0 / std::sqrt(pd);
    S += rs * ph.real() + 0.5 * (ph * ph).real() / pd;
    m0 *= 1.0 - ph * rs;
  }
  const double m0_sq = std::norm(m0);
  if (!(m0_sq >= b.L0 && m0_sq <= b.U0))
    return false;
  const auto frak_n = static_cast<long long>(std::floor(-b.Delta[0] * 0.5 * std::log(m0_sq)));
  const long double z = static_cast<long double>(frak_n) / b.Delta[0];
  for (int j = 1; j <= b.J(); ++j) {
    const auto &P = blocks.primes[j];
    for (std::size_t i = 0; i < P.size(); ++i) {
      const auto ph = detail::prime_phase(t, blocks.logp[j][i]);
      const double pd = static_cast<double>(P[i]);
      S += ph.real() / std::sqrt(pd) + 0.5 * (ph * ph).real() / pd;
    }
    auto [L, U] = b.bounds(j, z);
    if (S < L || S > U)
      return false;
  }
  if (trace) {
    *trace = walk_trace(t, blocks, static_cast<double>(b.Delta[0]));
    if (!detect_good_event(*trace, b))
      return false; // rounding disagreement at a window edge; treat as a miss
  }
  return true;
}

/// log|M|^2 + 2 L_J on the good event (L_J = V* - w_J does not depend on z).
inline double moll_bound_ratio(const WalkTrace &w, const BarrierConfig &b,
                               std::complex<double> mollifier) {
  if (!detect_good_event(w, b))
    throw contract_error("moll_bound_ratio: trace is not on the good event");
  const long double LJ = b.J() == 0 ? b.L0 : b.bounds(b.J(), 0).first;
  return static_cast<double>(std::log(std::norm(mollifier)) + 2 * LJ);
}

} // namespace zetalab
