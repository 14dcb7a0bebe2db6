#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "zetalab/steinhaus.hpp"

using namespace zetalab;
using Catch::Approx;

namespace {

// blocks {2,3,5}, {7,11,13}, {17,19,23}
Blocks toy_blocks() {
  static const auto table = sieve_primes(1000);
  return partition_primes(table, build_schedule({-100, 0.5, 1.0, 1.2}));
}

Blocks default_blocks() {
  static const auto table = sieve_primes(4000);
  return partition_primes(table, build_schedule({-100, 1.0, 1.6, 2.1}));
}

} // namespace

TEST_CASE("toy blocks are the expected primes") {
  const auto b = toy_blocks();
  CHECK(b.primes[0] == std::vector<std::uint64_t>{2, 3, 5});
  CHECK(b.primes[1] == std::vector<std::uint64_t>{7, 11, 13});
  CHECK(b.primes[2] == std::vector<std::uint64_t>{17, 19, 23});
}

TEST_CASE("samples are deterministic and angles lie in [0, 2 pi)") {
  const auto b = default_blocks();
  const auto s1 = sample(9, 123, b, 1.5), s2 = sample(9, 123, b, 1.5);
  CHECK(s1.theta == s2.theta);
  CHECK(s1.Y == s2.Y);
  CHECK(s1.m0 == s2.m0);
  for (const auto &blk : s1.theta)
    for (double th : blk) {
      REQUIRE(th >= 0);
      REQUIRE(th < 2 * std::numbers::pi);
    }
  // angles are keyed by prime, so a longer schedule keeps the shared ones
  const auto small = partition_primes(sieve_primes(1000), build_schedule({-100, 1.0, 1.6}));
  const auto s3 = sample(9, 123, small);
  CHECK(s3.theta[0] == s1.theta[0]);
  CHECK(s3.theta[1] == s1.theta[1]);
}

TEST_CASE("block variance") {
  CHECK(sigma2({2, 3}) == Approx(0.25 + 1.0 / 32 + 1.0 / 6 + 1.0 / 72).epsilon(1e-15));
  CHECK(sigma2({2, 3}) == Approx(0.4618056).margin(1e-7));
  CHECK(sigma2({}) == 0);
}

TEST_CASE("single-prime moment examples") {
  CHECK(moment_A(2, 1, 2) == Approx(0.25).epsilon(1e-15));
  CHECK(moment_N(2, 1, 2) == Approx(0.25).epsilon(1e-15));
  CHECK(moment_A(2, 1, 4) == Approx(3.0 / 32).epsilon(1e-15));
  CHECK(moment_N(2, 1, 4) == Approx(3.0 / 16).epsilon(1e-15));
  for (int order : {1, 3, 5, 7})
    for (int i : {1, 2}) {
      CHECK(moment_A(7, i, order) == 0);
      CHECK(moment_N(7, i, order) == 0);
    }
}

TEST_CASE("moment_A is the true moment and never exceeds moment_N") {
  for (auto p : sieve_primes(100).primes)
    for (int i : {1, 2})
      for (int k = 1; k <= 10; ++k) {
        // E[(cos(i th) c)^{2k}] by trapezoid, c = p^{-1/2} or 1/(2p)
        const double c = i == 1 ? 1 / std::sqrt(double(p)) : 1 / (2.0 * double(p));
        double q = 0;
        const int M = 64;
        for (int m = 0; m < M; ++m)
          q += std::pow(c * std::cos(i * 2 * std::numbers::pi * m / M), 2 * k) / M;
        INFO("p = " << p << " i = " << i << " k = " << k);
        REQUIRE(moment_A(p, i, 2 * k) == Approx(q).epsilon(1e-12));
        REQUIRE(moment_A(p, i, 2 * k) <= moment_N(p, i, 2 * k));
      }
}

TEST_CASE("exact increment and block moments match the multinomial oracle") {
  for (auto p : {2ull, 3ull, 17ull, 101ull}) {
    const auto got = prime_increment_moments(p, 8);
    const auto want = oracle::prime_moments_quadrature(p, 8);
    for (int m = 0; m <= 8; ++m)
      CHECK(got[m] == Approx(want[m]).margin(1e-15).epsilon(1e-12));
  }
  const auto b = toy_blocks();
  for (const auto &P : b.primes) {
    const auto got = block_moments_exact(P, 8);
    for (int m = 0; m <= 8; ++m)
      CHECK(got[m] == Approx(oracle::block_moment_multinomial(P, m)).margin(1e-15).epsilon(1e-12));
    CHECK(got[2] == Approx(sigma2(P)).epsilon(1e-13));
  }
}

TEST_CASE("moment block bounds") {
  const auto b = toy_blocks();
  const auto r0 = moment_block_bound(1, 0, b, 1000, 1);
  CHECK(r0.mc.value == 1);
  CHECK(r0.exact == 1);
  CHECK(r0.gaussian == 1);

  const auto rs = moment_block_bounds(1, 2, b, 200'000, 5);
  REQUIRE(rs.size() == 2);
  CHECK(rs[0].exact == Approx(sigma2(b.primes[1])).epsilon(1e-13));
  CHECK(std::fabs(rs[0].mc.value - rs[0].exact) <= 3 * rs[0].mc.stderr);
  CHECK(std::fabs(rs[1].mc.value - rs[1].exact) <= 3 * rs[1].mc.stderr);
  CHECK(rs[1].exact <= 3 * std::pow(sigma2(b.primes[1]), 2));
  CHECK(rs[1].gaussian == Approx(3 * std::pow(sigma2(b.primes[1]), 2)).epsilon(1e-13));
  CHECK(rs[1].exact_pass);

  CHECK_THROWS_AS(moment_block_bound(1, 6, b, 1000, 1), contract_error);
}

// Odd moments vanish per term (cos th, cos 2th) but not for the block sum:
// E[(a cos th + b cos 2th)^3] picks up 3a^2b/4. MC tracks the exact value.
TEST_CASE("odd block moments in Monte Carlo") {
  const auto b = toy_blocks();
  for (int j = 0; j <= 2; ++j) {
    const auto exact = block_moments_exact(b.primes[j], 3);
    CHECK(exact[1] == 0);
    CHECK(exact[3] > 0);
    MeanAccumulator m1, m3;
    for (std::uint64_t i = 0; i < 50'000; ++i) {
      const double y = sample(13, i, b).Y[j];
      m1.add(y);
      m3.add(y * y * y);
    }
    CHECK(std::fabs(m1.mean) <= 3 * m1.stderr_of_mean());
    CHECK(std::fabs(m3.mean - exact[3]) <= 3 * m3.stderr_of_mean());
  }
}

TEST_CASE("log|M_0| sandwich") {
  const auto b = toy_blocks();
  const double tail = log_m0_tail_bound(b.primes[0]);
  CHECK(tail < 10);
  double worst = 0;
  for (std::uint64_t i = 0; i < 10'000; ++i) {
    const auto s = sample(2, i, b);
    const double gap = std::fabs(-std::log(std::abs(s.m0)) - s.Y[0]);
    worst = std::max(worst, gap);
  }
  CHECK(worst <= tail + 1e-12);
  CHECK(worst <= 10);
}

TEST_CASE("tilted expectation") {
  const auto b = toy_blocks();
  const auto one = tilted_expectation([](const SteinhausSample &) { return 1.0; }, 1.2, b, 20'000, 3);
  CHECK(one.mean.value == Approx(1.0).epsilon(1e-14));

  const auto plain = tilted_expectation([](const SteinhausSample &s) { return s.Y[1]; }, 0.0, b, 20'000, 3);
  MeanAccumulator m;
  for (std::uint64_t i = 0; i < 20'000; ++i)
    m.add(sample(3, i, b).Y[1]);
  CHECK(plain.mean.value == Approx(m.mean).margin(1e-12));
  CHECK(plain.normalizer.value == 1.0);

  for (double kappa : {0.5, 1.0, 1.5}) {
    const auto r = tilted_expectation([](const SteinhausSample &) { return 1.0; }, kappa, b, 200'000, 8);
    double want = 1;
    for (auto p : b.primes[0])
      want *= oracle::tilt_factor_trapezoid(p, kappa);
    INFO("kappa = " << kappa);
    CHECK(tilt_normalizer_exact(b.primes[0], kappa) == Approx(want).epsilon(1e-10));
    CHECK(std::fabs(r.normalizer.value - want) <= 3 * r.normalizer.stderr);
  }
  for (double kappa : {2.0, 3.0, 4.0})
    CHECK(std::isfinite(tilt_normalizer_exact(b.primes[0], kappa)));

  CHECK_THROWS_AS(tilted_expectation([](const SteinhausSample &) { return 1.0; }, -1, b, 100, 1),
                  domain_error);
  CHECK_THROWS_AS(tilted_expectation([](const SteinhausSample &) { return 1.0; }, 1, b, 1000, 1, 1e9),
                  reliability_error);
}

TEST_CASE("barrier probability trivial and monotone cases") {
  const auto blocks = default_blocks();
  auto b = make_scaled_barrier(blocks, 1.0, 1.0);
  auto all = b;
  all.L0 = 0;
  all.U0 = INFINITY;
  for (int j = 1; j <= all.J(); ++j)
    all.width[j] = 1e9;
  CHECK(barrier_probability(all, blocks, 5000, 1).p.value == 1.0);

  auto wide = b;
  for (int j = 1; j <= wide.J(); ++j)
    wide.width[j] = 2;
  auto halved = wide;
  for (int j = 1; j <= halved.J(); ++j)
    halved.width[j] /= 2;
  const auto pw = barrier_probability(wide, blocks, 20'000, 4);
  const auto ph = barrier_probability(halved, blocks, 20'000, 4);
  CHECK(pw.hits > 0);
  CHECK(ph.hits <= pw.hits);

  auto none = b;
  none.U0 = 0;
  const auto z = barrier_probability(none, blocks, 1000, 1);
  CHECK(z.hits == 0);
  CHECK(z.upper95 == Approx(3.0 / 1000));
}

TEST_CASE("Steinhaus and Gaussian walks agree on wide windows") {
  const auto blocks = default_blocks();
  ScaledBarrierOptions o;
  o.width = {2};
  const auto b = make_scaled_barrier(blocks, 1.0, 1.0, o);
  const auto s = barrier_probability(b, blocks, 50'000, 6);
  const auto g = gaussian_walk_probability(b, blocks, 50'000, 6 + 1000003);
  CHECK(s.hits > 100);
  CHECK(std::fabs(s.p.value - g.p.value) <= 3 * std::hypot(s.p.stderr, g.p.stderr));
}

TEST_CASE("restricted Gaussian moments") {
  const double var = 0.37;
  CHECK(gaussian_restricted_moment(0, var, -INFINITY, INFINITY) == Approx(1).epsilon(1e-12));
  CHECK(gaussian_restricted_moment(1, var, -INFINITY, INFINITY) == Approx(var).epsilon(1e-12));
  for (int k = 0; k <= 4; ++k)
    for (auto [lo, hi] : {std::pair{0.1, 0.35}, std::pair{-0.4, 0.2}, std::pair{1.0, 1.0625}}) {
      INFO("k = " << k << " window " << lo << ".." << hi);
      CHECK(gaussian_restricted_moment(k, var, lo, hi) ==
            Approx(oracle::restricted_moment(k, var, lo, hi)).epsilon(1e-9).margin(1e-15));
    }
  const auto b = toy_blocks();
  CHECK(gaussian_restricted_moment(1, 0, 0.0, 16.0, b) ==
        Approx(oracle::restricted_moment(0, sigma2(b.primes[1]), 0.0, 1.0 / 16)).epsilon(1e-9));
  CHECK_THROWS_AS(gaussian_restricted_moment(0, 0.0, 0, 1), domain_error);
}
