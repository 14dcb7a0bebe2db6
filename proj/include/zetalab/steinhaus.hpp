#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "zetalab/barrier.hpp"
#include "zetalab/errors.hpp"
#include "zetalab/parallel.hpp"
#include "zetalab/primes.hpp"
#include "zetalab/rng.hpp"
#include "zetalab/stats.hpp"
#include "zetalab/walk.hpp"

namespace zetalab {

/// Angle theta_p of sample `index`. Keyed by the prime itself, so growing a
/// schedule never changes the angles already drawn.
inline double steinhaus_angle(std::uint64_t seed, std::uint64_t index, std::uint64_t p) {
  return 2.0 * std::numbers::pi *
         CounterRng(seed).uniform(Stream::steinhaus_angle, index, static_cast<std::uint32_t>(p));
}

struct SteinhausSample {
  std::vector<std::vector<double>> theta; // theta[j][i] for blocks[j][i]
  std::vector<double> Y;                  // script Y_j
  std::complex<double> m0;                // prod_{P_0} (1 - e^{i theta_p} / sqrt p)
  double r0 = 0;                          // log|m0| + kappa* n_0
  double weight = 1;
};

/// cos(theta)/sqrt(p) + cos(2 theta)/(2p)
inline double prime_increment(double theta, double p) {
  return std::cos(theta) / std::sqrt(p) + std::cos(2 * theta) / (2 * p);
}

inline SteinhausSample sample(std::uint64_t seed, std::uint64_t index, const Blocks &blocks,
                              double kappa_star = 0) {
  SteinhausSample s;
  const int J = blocks.J();
  s.theta.resize(static_cast<std::size_t>(J + 1));
  s.Y.assign(s.theta.size(), 0.0);
  s.m0 = 1;
  for (int j = 0; j <= J; ++j) {
    for (auto p : blocks.primes[j]) {
      const double th = steinhaus_angle(seed, index, p);
      const double pd = static_cast<double>(p);
      s.theta[j].push_back(th);
      s.Y[j] += prime_increment(th, pd);
      if (j == 0)
        s.m0 *= 1.0 - std::polar(1.0, th) / std::sqrt(pd);
    }
  }
  s.r0 = std::log(std::abs(s.m0)) + kappa_star * static_cast<double>(blocks.schedule.n_at(0));
  return s;
}

/// sum_{p in block} 1/(2p) + 1/(8p^2)
inline double sigma2(const std::vector<std::uint64_t> &block) {
  double s = 0;
  for (auto p : block) {
    const double pd = static_cast<double>(p);
    s += 1.0 / (2 * pd) + 1.0 / (8 * pd * pd);
  }
  return s;
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n)
    return 0;
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

/// E[A_{p,i}^order] for A_{p,1} = cos(theta)/sqrt p, A_{p,2} = cos(2 theta)/(2p):
/// nu_i^{2k} C(2k,k) / (2^k p^{ik}) for order 2k, 0 for odd order.
inline double moment_A(std::uint64_t p, int i, int order) {
  if (order % 2 != 0)
    return 0.0;
  const int k = order / 2;
  const double nu2 = i == 1 ? 0.5 : 0.125;
  return std::pow(nu2, k) * binomial(2 * k, k) / std::pow(2.0, k) /
         std::pow(static_cast<double>(p), i * k);
}

/// Gaussian comparison N_{p,i} ~ N(0, nu_i^2 p^{-i}).
inline double moment_N(std::uint64_t p, int i, int order) {
  if (order % 2 != 0)
    return 0.0;
  const int k = order / 2;
  const double nu2 = i == 1 ? 0.5 : 0.125;
  return std::pow(nu2, k) * std::exp(std::lgamma(2 * k + 1.0) - std::lgamma(k + 1.0)) /
         std::pow(2.0, k) / std::pow(static_cast<double>(p), i * k);
}

/// E[N^{2k}] = sigma^{2k} (2k)! / (2^k k!)
inline double gaussian_even_moment(double var, int k) {
  return std::pow(var, k) * std::exp(std::lgamma(2 * k + 1.0) - std::lgamma(k + 1.0)) /
         std::pow(2.0, k);
}

/// Exact moments E[X_p^m], m = 0..order, of X_p = cos(theta)/sqrt p + cos(2 theta)/(2p):
/// E[cos^r(theta) cos^s(2 theta)] is the constant term of
/// ((w + 1/w)/2)^r ((w^2 + w^{-2})/2)^s.
inline std::vector<double> prime_increment_moments(std::uint64_t p, int order) {
  const double a = 1.0 / std::sqrt(static_cast<double>(p)), b = 0.5 / static_cast<double>(p);
  std::vector<double> out(static_cast<std::size_t>(order + 1), 0.0);
  for (int m = 0; m <= order; ++m) {
    double total = 0;
    for (int r = 0; r <= m; ++r) {
      const int s = m - r;
      // count pairs (i, l) with (2i - r) + 2(2l - s) = 0
      double ct = 0;
      for (int l = 0; l <= s; ++l) {
        const int twice_i = r - 2 * (2 * l - s);
        if (twice_i < 0 || twice_i % 2 != 0 || twice_i / 2 > r)
          continue;
        ct += binomial(r, twice_i / 2) * binomial(s, l);
      }
      total += binomial(m, r) * std::pow(a, r) * std::pow(b, s) * ct / std::pow(2.0, m);
    }
    out[m] = total;
  }
  return out;
}

/// Exact E[Y^m], m = 0..order, for the block sum Y, combining independent
/// primes through E[(X+Y)^m] = sum_r C(m,r) E[X^r] E[Y^{m-r}].
inline std::vector<double> block_moments_exact(const std::vector<std::uint64_t> &block, int order) {
  std::vector<double> acc(static_cast<std::size_t>(order + 1), 0.0);
  acc[0] = 1.0;
  for (auto p : block) {
    const auto x = prime_increment_moments(p, order);
    std::vector<double> next(acc.size(), 0.0);
    for (int m = 0; m <= order; ++m)
      for (int r = 0; r <= m; ++r)
        next[m] += binomial(m, r) * x[r] * acc[m - r];
    acc = std::move(next);
  }
  return acc;
}

/// Constant in the regime k <= C (n_j - n_{j-1}) T_{j-1}^{1/100}.
inline constexpr double kMomentRegimeConstant = 10.0;

struct MomentBlockReport {
  int j = 0, k = 0;
  Estimate mc;            // Monte Carlo E[Y_j^{2k}]
  double exact = 0;       // exact E[Y_j^{2k}]
  double gaussian = 0;    // E[N_j^{2k}] with variance sigma_j^2
  bool pass = false;      // mc <= gaussian (1 + 3 relative stderr)
  bool exact_pass = false;
};

inline void check_moment_regime(const BlockSchedule &s, int j, int k,
                                double C = kMomentRegimeConstant) {
  const long double len = s.n_at(j) - s.n_at(j - 1);
  const long double limit = C * len * std::exp(std::exp(s.n_at(j - 1)) / 100.0L);
  if (k < 0 || static_cast<long double>(k) > limit)
    throw contract_error("moment_block_bound: k = " + std::to_string(k) +
                         " outside the regime k <= C (n_j - n_{j-1}) T_{j-1}^{1/100}");
}

/// Reports for k = 1..k_max from one pass over the samples.
inline std::vector<MomentBlockReport> moment_block_bounds(int j, int k_max, const Blocks &blocks,
                                                          std::uint64_t n_mc, std::uint64_t seed,
                                                          double C = kMomentRegimeConstant) {
  check_moment_regime(blocks.schedule, j, k_max, C);
  const auto &P = blocks.primes.at(j);
  struct Acc {
    std::vector<MeanAccumulator> m;
    void merge(const Acc &o) {
      if (m.empty())
        m = o.m;
      else
        for (std::size_t i = 0; i < m.size(); ++i)
          m[i].merge(o.m[i]);
    }
  };
  const auto acc = chunked_reduce<Acc>(n_mc, [&](std::uint64_t b, std::uint64_t e) {
    Acc a;
    a.m.resize(static_cast<std::size_t>(k_max));
    for (std::uint64_t i = b; i < e; ++i) {
      double y = 0;
      for (auto p : P)
        y += prime_increment(steinhaus_angle(seed, i, p), static_cast<double>(p));
      double y2k = 1;
      for (int k = 1; k <= k_max; ++k)
        a.m[k - 1].add(y2k *= y * y);
    }
    return a;
  });
  const auto exact = block_moments_exact(P, 2 * k_max);
  const double var = sigma2(P);
  std::vector<MomentBlockReport> out;
  for (int k = 1; k <= k_max; ++k) {
    MomentBlockReport r;
    r.j = j;
    r.k = k;
    r.exact = exact[2 * k];
    r.gaussian = gaussian_even_moment(var, k);
    r.mc = {acc.m[k - 1].mean, acc.m[k - 1].stderr_of_mean()};
    const double rel = r.mc.value > 0 ? r.mc.stderr / r.mc.value : 0.0;
    r.pass = r.mc.value <= r.gaussian * (1 + 3 * rel);
    r.exact_pass = r.exact <= r.gaussian * (1 + 1e-12);
    out.push_back(r);
  }
  return out;
}

inline MomentBlockReport moment_block_bound(int j, int k, const Blocks &blocks, std::uint64_t n_mc,
                                            std::uint64_t seed,
                                            double C = kMomentRegimeConstant) {
  check_moment_regime(blocks.schedule, j, k, C);
  if (k == 0) {
    MomentBlockReport r;
    r.j = j;
    r.mc = {1.0, 0.0};
    r.exact = r.gaussian = 1.0;
    r.pass = r.exact_pass = true;
    return r;
  }
  return moment_block_bounds(j, k, blocks, n_mc, seed, C).back();
}

/// Sums for a self-normalized importance-sampling mean.
struct WeightedSums {
  double w = 0, w2 = 0, wf = 0, w2f = 0, w2f2 = 0;
  double n = 0;
  void merge(const WeightedSums &o) {
    w += o.w;
    w2 += o.w2;
    wf += o.wf;
    w2f += o.w2f;
    w2f2 += o.w2f2;
    n += o.n;
  }
};

struct TiltedResult {
  Estimate mean;        // tilted expectation of f
  Estimate normalizer;  // E[exp(-2 kappa* log|M_0|)]
  double ess = 0;       // effective sample size
};

/// Expectation of f under the measure reweighted by |M_0|^{-2 kappa*}, by
/// self-normalized importance sampling with delta-method standard error.
inline TiltedResult tilted_expectation(const std::function<double(const SteinhausSample &)> &f,
                                       double kappa_star, const Blocks &blocks, std::uint64_t n_mc,
                                       std::uint64_t seed, double min_ess = 100) {
  if (kappa_star < 0)
    throw domain_error("tilted_expectation: kappa* must be nonnegative");
  const auto sums = chunked_reduce<WeightedSums>(n_mc, [&](std::uint64_t b, std::uint64_t e) {
    WeightedSums s;
    for (std::uint64_t i = b; i < e; ++i) {
      const auto smp = sample(seed, i, blocks, kappa_star);
      const double w = std::exp(-2 * kappa_star * std::log(std::abs(smp.m0)));
      const double fv = f(smp);
      s.w += w;
      s.w2 += w * w;
      s.wf += w * fv;
      s.w2f += w * w * fv;
      s.w2f2 += w * w * fv * fv;
      s.n += 1;
    }
    return s;
  });
  TiltedResult r;
  r.ess = sums.w * sums.w / sums.w2;
  if (!(r.ess >= min_ess))
    throw reliability_error("tilted_expectation: effective sample size " +
                            std::to_string(r.ess) + " below " + std::to_string(min_ess));
  const double mu = sums.wf / sums.w;
  const double var = (sums.w2f2 - 2 * mu * sums.w2f + mu * mu * sums.w2) / (sums.w * sums.w);
  r.mean = {mu, std::sqrt(std::max(0.0, var))};
  const double mw = sums.w / sums.n;
  const double vw = (sums.w2 / sums.n - mw * mw) * sums.n / std::max(1.0, sums.n - 1);
  r.normalizer = {mw, std::sqrt(std::max(0.0, vw) / sums.n)};
  return r;
}

struct BarrierProbability {
  Estimate p;
  std::uint64_t hits = 0, n = 0;
  double upper95 = 0; // one-sided bound, 3/n when there are no hits
};

inline BarrierProbability barrier_probability_from(std::uint64_t hits, std::uint64_t n) {
  BarrierProbability r;
  r.hits = hits;
  r.n = n;
  r.p = binomial_estimate(hits, n);
  r.upper95 = hits == 0 ? 3.0 / static_cast<double>(n) : r.p.value + 1.645 * r.p.stderr;
  return r;
}

/// True iff the Steinhaus walk of sample `index` lies in the good event.
/// Blocks past the first failing check are never drawn.
inline bool steinhaus_good_event(const BarrierConfig &b, const Blocks &blocks, std::uint64_t seed,
                                 std::uint64_t index) {
  std::complex<double> m0 = 1;
  double S = 0;
  for (auto p : blocks.primes[0]) {
    const double th = steinhaus_angle(seed, index, p), pd = static_cast<double>(p);
    S += prime_increment(th, pd);
    m0 *= 1.0 - std::polar(1.0, th) / std::sqrt(pd);
  }
  const double m0_sq = std::norm(m0);
  if (!(m0_sq >= b.L0 && m0_sq <= b.U0))
    return false;
  const auto frak_n = static_cast<long long>(std::floor(-b.Delta[0] * 0.5 * std::log(m0_sq)));
  const long double z = static_cast<long double>(frak_n) / b.Delta[0];
  for (int j = 1; j <= b.J(); ++j) {
    for (auto p : blocks.primes[j])
      S += prime_increment(steinhaus_angle(seed, index, p), static_cast<double>(p));
    auto [L, U] = b.bounds(j, z);
    if (S < L || S > U)
      return false;
  }
  return true;
}

/// Monte Carlo P(G_J) in the Steinhaus model.
inline BarrierProbability barrier_probability(const BarrierConfig &b, const Blocks &blocks,
                                              std::uint64_t n_mc, std::uint64_t seed) {
  struct Count {
    std::uint64_t hits = 0;
    void merge(const Count &o) { hits += o.hits; }
  };
  const auto c = chunked_reduce<Count>(n_mc, [&](std::uint64_t lo, std::uint64_t hi) {
    Count k;
    for (std::uint64_t i = lo; i < hi; ++i)
      k.hits += steinhaus_good_event(b, blocks, seed, i) ? 1 : 0;
    return k;
  });
  return barrier_probability_from(c.hits, n_mc);
}

/// Same event with Y_j, j >= 1, replaced by independent N(0, sigma_j^2);
/// block 0 stays Steinhaus.
inline BarrierProbability gaussian_walk_probability(const BarrierConfig &b, const Blocks &blocks,
                                                    std::uint64_t n_mc, std::uint64_t seed) {
  std::vector<double> sd(static_cast<std::size_t>(b.J() + 1), 0.0);
  for (int j = 1; j <= b.J(); ++j)
    sd[j] = std::sqrt(sigma2(blocks.primes[j]));
  struct Count {
    std::uint64_t hits = 0;
    void merge(const Count &o) { hits += o.hits; }
  };
  const CounterRng rng(seed);
  const auto c = chunked_reduce<Count>(n_mc, [&](std::uint64_t lo, std::uint64_t hi) {
    Count k;
    for (std::uint64_t i = lo; i < hi; ++i) {
      std::complex<double> m0 = 1;
      double S = 0;
      for (auto p : blocks.primes[0]) {
        const double th = steinhaus_angle(seed, i, p), pd = static_cast<double>(p);
        S += prime_increment(th, pd);
        m0 *= 1.0 - std::polar(1.0, th) / std::sqrt(pd);
      }
      const double m0_sq = std::norm(m0);
      if (!(m0_sq >= b.L0 && m0_sq <= b.U0))
        continue;
      const long double z =
          std::floor(-b.Delta[0] * 0.5 * std::log(m0_sq)) / static_cast<long double>(b.Delta[0]);
      bool good = true;
      for (int j = 1; j <= b.J() && good; ++j) {
        S += sd[j] * rng.normal(Stream::gaussian_walk, i, static_cast<std::uint32_t>(j));
        auto [L, U] = b.bounds(j, z);
        good = S >= L && S <= U;
      }
      k.hits += good ? 1 : 0;
    }
    return k;
  });
  return barrier_probability_from(c.hits, n_mc);
}

/// sum_p sum_{k>=3} p^{-k/2} / k, which bounds |-log|M_0| - Y_0| pointwise.
inline double log_m0_tail_bound(const std::vector<std::uint64_t> &block) {
  double s = 0;
  for (auto p : block) {
    const double x = 1.0 / std::sqrt(static_cast<double>(p));
    // -log(1 - x) - x - x^2/2
    s += -std::log1p(-x) - x - x * x / 2;
  }
  return s;
}

/// E[|1 - e^{i theta} p^{-1/2}|^{-2 kappa}] by Gauss-Kronrod over theta.
inline double euler_factor_tilt_moment(std::uint64_t p, double kappa) {
  const double x = 1.0 / std::sqrt(static_cast<double>(p));
  auto f = [&](double th) { return std::pow(1 + x * x - 2 * x * std::cos(th), -kappa); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, std::numbers::pi, 20,
                                                                       1e-14) /
         std::numbers::pi;
}

/// E[exp(-2 kappa log|M_0|)] as the product of per-prime expectations.
inline double tilt_normalizer_exact(const std::vector<std::uint64_t> &block0, double kappa) {
  double r = 1;
  for (auto p : block0)
    r *= euler_factor_tilt_moment(p, kappa);
  return r;
}

/// CSV of (prime, theta) for one sample, and of the derived summary.
inline void write_sample_csv(std::ostream &angles, std::ostream &summary, const SteinhausSample &s,
                             const Blocks &blocks) {
  angles << "prime,theta\n";
  angles.precision(17);
  for (std::size_t j = 0; j < s.theta.size(); ++j)
    for (std::size_t i = 0; i < s.theta[j].size(); ++i)
      angles << blocks.primes[j][i] << ',' << s.theta[j][i] << '\n';
  summary << "block,Y\n";
  summary.precision(17);
  for (std::size_t j = 0; j < s.Y.size(); ++j)
    summary << j << ',' << s.Y[j] << '\n';
  summary << "m0_re," << s.m0.real() << "\nm0_im," << s.m0.imag() << "\nr0," << s.r0 << '\n';
}

/// E[N^{2k} 1(N in [lo, hi])] for N ~ N(0, var), by adaptive Gauss-Kronrod.
/// Infinite endpoints are cut at 60 standard deviations.
inline double gaussian_restricted_moment(int k, double var, double lo, double hi) {
  if (!(var > 0))
    throw domain_error("gaussian_restricted_moment: variance must be positive");
  const double sd = std::sqrt(var), cut = 60 * sd;
  lo = std::max(lo, -cut);
  hi = std::min(hi, cut);
  if (!(hi > lo))
    return 0.0;
  const double norm = 1.0 / std::sqrt(2 * std::numbers::pi * var);
  auto f = [&](double z) { return norm * std::pow(z, 2 * k) * std::exp(-z * z / (2 * var)); };
  // split at 0 and at the mode sqrt(2k) sd, where the integrand peaks
  std::vector<double> cuts{lo};
  for (double c : {-std::sqrt(2.0 * k) * sd, 0.0, std::sqrt(2.0 * k) * sd})
    if (c > cuts.back() && c < hi)
      cuts.push_back(c);
  cuts.push_back(hi);
  double total = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, cuts[i], cuts[i + 1],
                                                                            20, 1e-13);
  return total;
}

/// Window [u, u + 1/Delta] for block j of a schedule.
inline double gaussian_restricted_moment(int j, int k, double u, double Delta, const Blocks &blocks) {
  if (!(Delta > 0))
    throw domain_error("gaussian_restricted_moment: Delta must be positive");
  return gaussian_restricted_moment(k, sigma2(blocks.primes.at(j)), u, u + 1.0 / Delta);
}

} // namespace zetalab
