#include <catch_amalgamated.hpp>

#include <numeric>

#include "oracles.hpp"
#include "zetalab/primes.hpp"
#include "zetalab/rng.hpp"

using namespace zetalab;
using Catch::Approx;

TEST_CASE("sieve small limits") {
  CHECK(sieve_primes(30).primes == std::vector<std::uint64_t>{2, 3, 5, 7, 11, 13, 17, 19, 23, 29});
  CHECK(sieve_primes(2).primes == std::vector<std::uint64_t>{2});
  CHECK_THROWS_AS(sieve_primes(1), domain_error);
}

TEST_CASE("sieve to 1e7 agrees with a linear sieve") {
  const auto t = sieve_primes(10'000'000);
  CHECK(t.size() == 664579);
  CHECK(t.primes == oracle::linear_sieve(10'000'000));
}

TEST_CASE("table logs") {
  const auto t = sieve_primes(1000);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(t.log[i] == Approx(std::log(double(t.primes[i]))));
    CHECK(t.loglog[i] == Approx(std::log(std::log(double(t.primes[i])))));
  }
  CHECK(t.loglog[0] < -0.36); // p = 2 sits below zero yet far above the -100 floor
}

TEST_CASE("mobius examples and multiplicativity") {
  const auto t = sieve_primes(100'000);
  CHECK(mobius(1, t) == 1);
  CHECK(mobius(12, t) == 0);
  CHECK(mobius(30, t) == -1);
  CHECK_THROWS_AS(mobius(0, t), domain_error);
  for (std::uint64_t n = 1; n < 3000; ++n)
    REQUIRE(mobius(n, t) == oracle::trial_mobius(n));

  const CounterRng rng(11);
  int tested = 0;
  for (std::uint64_t i = 0; tested < 1000; ++i) {
    const auto a = 1 + static_cast<std::uint64_t>(rng.uniform(Stream::perturbation, i, 0) * 1e4);
    const auto b = 1 + static_cast<std::uint64_t>(rng.uniform(Stream::perturbation, i, 1) * 1e4);
    if (std::gcd(a, b) != 1)
      continue;
    ++tested;
    REQUIRE(mobius(a * b, t) == mobius(a, t) * mobius(b, t));
  }
}

TEST_CASE("factorize needs a large enough table") {
  const auto t = sieve_primes(100);
  CHECK_THROWS_AS(factorize(101 * 103, t), coverage_error);
  CHECK_THROWS_AS(factorize(0, t), domain_error);
}

TEST_CASE("paper schedule J from iterated logs") {
  IteratedLogs L;
  L.first = 2;
  L.values = {std::exp(1200.0L), 1200.0L, std::log(1200.0L), std::log(std::log(1200.0L))};
  CHECK(double(L.at(4)) == Approx(7.09).margin(0.01));
  CHECK(double(L.at(5)) == Approx(1.96).margin(0.01));
  const auto s = build_schedule_paper(L, 1.0);
  CHECK(s.J == 1);
  CHECK_FALSE(s.degenerate);
  // n_1 is log log T* itself, since j = J
  CHECK(double(s.n_at(1)) == Approx(double(L.at(2) - std::log(1e3L * 2))));
  CHECK(double(s.n_at(0)) == Approx(double(L.at(4) / 1000)));
  CHECK(double(s.n_at(-1)) == -100);
}

TEST_CASE("paper schedule degenerate when log_3 T <= 1000") {
  const auto s = build_schedule_paper(IteratedLogs::from_log3(500.0L), 1.0);
  CHECK(s.degenerate);
  CHECK(s.J == 0);
}

TEST_CASE("scaled schedule pass-through and validation") {
  const auto s = build_schedule({-100, 0.5, 1.2, 1.8});
  CHECK(s.J == 2); // four checkpoints n_{-1}..n_2 make blocks 0..2
  CHECK(s.n.size() == 4);
  CHECK_THROWS_AS(build_schedule({-100, 1.2, 0.5}), validation_error);
  CHECK_THROWS_AS(build_schedule({-100}), validation_error);

  const auto r = build_schedule({-100, 0.5, 1.2});
  CHECK(block_of(5, r) == 0);
  CHECK(block_of(11, r) == 1);
  CHECK_FALSE(block_of(100003, r).has_value());
  CHECK(r.to_text().find("mode = scaled") != std::string::npos);
}

TEST_CASE("omega_in_block examples") {
  const auto s = build_schedule({-100, 0.5, 1.2});
  const auto t = sieve_primes(1000);
  CHECK(omega_in_block(1, 0, s, t) == 0);
  CHECK(omega_in_block(1, 1, s, t) == 0);
  CHECK(omega_in_block(8, 0, s, t) == 3);
  CHECK(omega_in_block(22, 0, s, t) == 1);
  CHECK(omega_in_block(22, 1, s, t) == 1);
}

TEST_CASE("blocks partition the primes below n_J") {
  const auto s = build_schedule({-100, 1.0, 1.6, 2.1});
  const auto t = sieve_primes(4000);
  const auto b = partition_primes(t, s);
  std::size_t inside = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto j = block_of(t.primes[i], s);
    if (t.loglog[i] < double(s.n.back())) {
      REQUIRE(j.has_value());
      ++inside;
      const auto &P = b.primes[static_cast<std::size_t>(*j)];
      REQUIRE(std::find(P.begin(), P.end(), t.primes[i]) != P.end());
    } else {
      REQUIRE_FALSE(j.has_value());
    }
  }
  CHECK(b.total() == inside);
  CHECK_THROWS_AS(partition_primes(sieve_primes(100), s), coverage_error);
}

TEST_CASE("omega over blocks adds up to Omega") {
  const auto s = build_schedule({-100, 1.0, 1.6, 2.1});
  const auto t = sieve_primes(20'000);
  const CounterRng rng(3);
  for (std::uint64_t i = 0; i < 10'000; ++i) {
    const auto n = 1 + static_cast<std::uint64_t>(rng.uniform(Stream::perturbation, i, 0) * 1e8);
    int in_blocks = 0;
    for (int j = 0; j <= s.J; ++j)
      in_blocks += omega_in_block(n, j, s, t);
    int outside = 0;
    for (auto [p, e] : factorize(n, t))
      if (!block_of(p, s))
        outside += e;
    REQUIRE(in_blocks + outside == oracle::trial_big_omega(n));
  }
}
