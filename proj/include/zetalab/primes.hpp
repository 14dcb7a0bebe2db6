#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "zetalab/errors.hpp"

namespace zetalab {

/// All primes up to `limit` with their logarithms.
///
/// loglog[i] is log log p for every prime, including p = 2 where it is
/// negative (about -0.367); it sits well above the -100 floor of block 0, so
/// no prime needs special handling.
struct PrimeTable {
  std::uint64_t limit = 0;
  std::vector<std::uint64_t> primes;
  std::vector<double> log;
  std::vector<double> loglog;

  std::size_t size() const { return primes.size(); }
};

/// Sieve of Eratosthenes over odd numbers.
inline PrimeTable sieve_primes(std::uint64_t limit) {
  if (limit < 2)
    throw domain_error("sieve_primes: limit must be at least 2");
  if (limit > 2'000'000'000ull)
    throw resource_error("sieve_primes: limit above 2e9 not supported");

  PrimeTable t;
  t.limit = limit;
  // composite[i] marks 2i+1
  const std::uint64_t half = (limit + 1) / 2;
  std::vector<std::uint8_t> composite(half, 0);
  for (std::uint64_t i = 1; (2 * i + 1) * (2 * i + 1) <= limit; ++i) {
    if (composite[i])
      continue;
    const std::uint64_t p = 2 * i + 1;
    for (std::uint64_t m = p * p / 2; m < half; m += p)
      composite[m] = 1;
  }
  t.primes.reserve(static_cast<std::size_t>(1.1 * limit / std::log(double(limit)) + 10));
  t.primes.push_back(2);
  for (std::uint64_t i = 1; i < half; ++i)
    if (!composite[i])
      t.primes.push_back(2 * i + 1);

  t.log.resize(t.primes.size());
  t.loglog.resize(t.primes.size());
  for (std::size_t i = 0; i < t.primes.size(); ++i) {
    t.log[i] = std::log(static_cast<double>(t.primes[i]));
    t.loglog[i] = std::log(t.log[i]);
  }
  return t;
}

/// Prime factorization (p, multiplicity) by trial division against the table.
inline std::vector<std::pair<std::uint64_t, int>> factorize(std::uint64_t n,
                                                            const PrimeTable &table) {
  if (n == 0)
    throw domain_error("factorize: n must be positive");
  std::vector<std::pair<std::uint64_t, int>> out;
  for (std::uint64_t p : table.primes) {
    if (p * p > n)
      break;
    if (n % p != 0)
      continue;
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    out.emplace_back(p, e);
  }
  if (n > 1) {
    const std::uint64_t last = table.primes.empty() ? 1 : table.primes.back();
    if (last * last < n && n > table.limit)
      throw coverage_error("factorize: prime table too small for n = " +
                           std::to_string(n));
    out.emplace_back(n, 1);
  }
  return out;
}

inline int mobius(std::uint64_t n, const PrimeTable &table) {
  if (n == 0)
    throw domain_error("mobius: n must be positive");
  int mu = 1;
  for (auto [p, e] : factorize(n, table)) {
    if (e > 1)
      return 0;
    mu = -mu;
  }
  return mu;
}

/// Total number of prime factors with multiplicity.
inline int big_omega(std::uint64_t n, const PrimeTable &table) {
  int k = 0;
  for (auto [p, e] : factorize(n, table))
    k += e;
  return k;
}

enum class ScheduleMode { paper_faithful, scaled };

inline const char *to_string(ScheduleMode m) {
  return m == ScheduleMode::paper_faithful ? "paper_faithful" : "scaled";
}

/// Iterated logarithms log_k T for k = first, first+1, ...
///
/// T itself is never needed. Only log_2 T and deeper enter the checkpoint
/// formula, and log_1 T is not representable in the interesting regime.
struct IteratedLogs {
  int first = 2;
  std::vector<long double> values;

  long double at(int k) const {
    if (k < first || k >= first + static_cast<int>(values.size()))
      throw domain_error("iterated log index " + std::to_string(k) +
                         " not supplied");
    return values[static_cast<std::size_t>(k - first)];
  }
  int last() const { return first + static_cast<int>(values.size()) - 1; }

  /// Build log_2 T, log_3 T, ... from a given log_3 T (down to depth `last`).
  static IteratedLogs from_log3(long double l3, int last = 8) {
    IteratedLogs it;
    it.first = 2;
    it.values.push_back(std::exp(l3));
    long double v = l3;
    for (int k = 3; k <= last; ++k) {
      it.values.push_back(v);
      if (v <= 0)
        break;
      v = std::log(v);
    }
    return it;
  }
};

/// Checkpoints n_{-1} < n_0 < ... < n_J on the log log scale.
struct BlockSchedule {
  ScheduleMode mode = ScheduleMode::scaled;
  IteratedLogs iterated_logs;
  int J = 0;
  long double s = 1e6L;
  std::vector<long double> n; // n[j + 1] = n_j
  long double R = 1e3L;
  long double alpha = 1.0L;
  bool degenerate = false;

  long double n_at(int j) const { return n.at(static_cast<std::size_t>(j + 1)); }
  long double loglog_Tstar() const { return n.back(); }

  /// e^{e^{n_j}}, or +inf when that overflows a double.
  double T_at(int j) const {
    const long double e = std::exp(n_at(j));
    if (e > 700.0L)
      return std::numeric_limits<double>::infinity();
    return static_cast<double>(std::exp(e));
  }

  /// Index j with n_{j-1} <= loglog < n_j, or none past n_J.
  std::optional<int> block_of_loglog(double loglog) const {
    if (loglog < n.front())
      return std::nullopt;
    for (int j = 0; j <= J; ++j)
      if (loglog < n_at(j))
        return j;
    return std::nullopt;
  }

  /// Largest prime that belongs to some block is below this bound.
  double prime_bound() const { return T_at(J); }

  std::string to_text() const {
    std::ostringstream os;
    os.precision(std::numeric_limits<long double>::max_digits10);
    os << "mode = " << to_string(mode) << "\n";
    os << "n =";
    for (long double v : n)
      os << ' ' << v;
    os << "\nalpha = " << alpha << "\nR = " << R << "\ns = " << s << "\n";
    return os.str();
  }
};

/// Scaled mode: the list is n_{-1}, n_0, ..., n_J.
inline BlockSchedule build_schedule(std::vector<long double> n_list, double alpha = 1.0,
                                    double R = 1e3) {
  if (n_list.size() < 2)
    throw validation_error("schedule needs at least n_{-1} and n_0");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (!(n_list[i] > n_list[i - 1]))
      throw validation_error("schedule n-list must be strictly increasing");
  BlockSchedule s;
  s.mode = ScheduleMode::scaled;
  s.n = std::move(n_list);
  s.J = static_cast<int>(s.n.size()) - 2;
  s.alpha = alpha;
  s.R = R;
  s.s = 1.0L;
  s.degenerate = s.J < 1;
  return s;
}

/// Paper-faithful checkpoints from iterated logs:
///   J = largest integer with log_{J+2} T > 1000,
///   n_j = log log T* - s (log_{j+2} T - log_{J+2} T),  log log T* = log_2 T - log(R(alpha^2+1)),
///   n_{-1} = -100, n_0 = log_4 T / 1000.
/// J < 1 yields a degenerate schedule holding only block 0.
inline BlockSchedule build_schedule_paper(const IteratedLogs &logs, double alpha,
                                          double R = 1e3, long double s_factor = 1e6L) {
  if (alpha < 0 || R <= 0)
    throw domain_error("build_schedule_paper: need alpha >= 0 and R > 0");
  BlockSchedule s;
  s.mode = ScheduleMode::paper_faithful;
  s.iterated_logs = logs;
  s.alpha = alpha;
  s.R = R;
  s.s = s_factor;

  int J = 0;
  for (int k = std::max(3, logs.first); k <= logs.last(); ++k)
    if (logs.at(k) > 1000.0L)
      J = k - 2;
  s.J = J;
  s.degenerate = J < 1;

  const long double loglog_tstar =
      logs.at(2) - std::log(static_cast<long double>(R) * (1.0L + (long double)alpha * alpha));
  s.n.push_back(-100.0L);
  s.n.push_back(logs.at(4) / 1000.0L);
  if (!s.degenerate) {
    const long double lJ = logs.at(J + 2);
    for (int j = 1; j <= J; ++j)
      s.n.push_back(loglog_tstar - s_factor * (logs.at(j + 2) - lJ));
  } else {
    s.J = 0;
  }
  for (std::size_t i = 1; i < s.n.size(); ++i)
    if (!(s.n[i] > s.n[i - 1]))
      throw validation_error("paper-faithful checkpoints are not increasing");
  return s;
}

/// Primes of each block 0..J, read from the table.
struct Blocks {
  BlockSchedule schedule;
  std::vector<std::vector<std::uint64_t>> primes; // primes[j]
  std::vector<std::vector<double>> logp;

  int J() const { return schedule.J; }
  std::size_t total() const {
    std::size_t k = 0;
    for (auto &b : primes)
      k += b.size();
    return k;
  }
};

/// Split the table into blocks. Throws coverage_error if the table stops
/// before log log p reaches n_J.
inline Blocks partition_primes(const PrimeTable &table, const BlockSchedule &schedule) {
  const long double need = schedule.prime_bound();
  if (!(static_cast<long double>(table.limit) + 1.0L >= need))
    throw coverage_error("prime table ends at " + std::to_string(table.limit) +
                         " but the schedule reaches e^{e^{n_J}}");
  Blocks b;
  b.schedule = schedule;
  b.primes.resize(static_cast<std::size_t>(schedule.J + 1));
  b.logp.resize(b.primes.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    auto j = schedule.block_of_loglog(table.loglog[i]);
    if (!j) {
      if (table.loglog[i] >= static_cast<double>(schedule.loglog_Tstar()))
        break;
      continue;
    }
    b.primes[*j].push_back(table.primes[i]);
    b.logp[*j].push_back(table.log[i]);
  }
  return b;
}

inline std::optional<int> block_of(std::uint64_t p, const BlockSchedule &schedule) {
  return schedule.block_of_loglog(std::log(std::log(static_cast<double>(p))));
}

/// Prime factors of n (with multiplicity) lying in block j.
inline int omega_in_block(std::uint64_t n, int j, const BlockSchedule &schedule,
                          const PrimeTable &table) {
  int k = 0;
  for (auto [p, e] : factorize(n, table)) {
    auto b = block_of(p, schedule);
    if (b && *b == j)
      k += e;
  }
  return k;
}

} // namespace zetalab
