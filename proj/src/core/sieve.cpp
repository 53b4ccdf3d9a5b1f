#include "sieve.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "arith.hpp"
#include "errors.hpp"
#include "kahan.hpp"
#include "primes.hpp"

namespace race {

namespace {

// slot[r] = position of residue r in the tuple, or -1.
std::vector<int> residue_slots(std::uint64_t q, std::span<const std::int64_t> residues,
                               std::vector<std::uint64_t>& reduced) {
  if (q < 3) throw_domain("modulus must be at least 3");
  if (residues.empty()) throw_domain("empty residue tuple");
  std::vector<int> slot(q, -1);
  for (std::size_t j = 0; j < residues.size(); ++j) {
    const std::uint64_t r = mod(residues[j], q);
    if (std::gcd(r, q) != 1) throw_domain("residue " + std::to_string(residues[j]) + " is not a unit mod " + std::to_string(q));
    if (slot[r] != -1) throw_domain("residues must be distinct mod q");
    slot[r] = static_cast<int>(j);
    reduced.push_back(r);
  }
  return slot;
}

}  // namespace

void race_counts(std::uint64_t q, std::span<const std::int64_t> residues, std::uint64_t limit,
                 const std::function<void(std::uint64_t, const RaceCounters&)>& on_prime,
                 unsigned workers, bool allow_large) {
  if (limit > kSieveGuard && !allow_large && !guards_lifted())
    throw_guard("X = " + std::to_string(limit) + " exceeds the sieve guard 10^9 (set RACE_GUARD_OVERRIDE=1)");
  RaceCounters c;
  c.q = q;
  const std::vector<int> slot = residue_slots(q, residues, c.residues);
  c.counts.assign(residues.size(), 0);
  for_each_prime(
      limit,
      [&](std::uint64_t p) {
        const int s = slot[p % q];
        if (s >= 0) ++c.counts[static_cast<std::size_t>(s)];
        ++c.total;
        c.x = p;
        on_prime(p, c);
      },
      workers);
}

RaceCounters final_counts(std::uint64_t q, std::span<const std::int64_t> residues,
                          std::uint64_t limit, unsigned workers) {
  RaceCounters out;
  race_counts(q, residues, limit, [&](std::uint64_t, const RaceCounters& c) { out = c; }, workers);
  if (out.q == 0) {
    out.q = q;
    residue_slots(q, residues, out.residues);
    out.counts.assign(residues.size(), 0);
  }
  return out;
}

std::vector<double> error_vector(const RaceCounters& c, double x) {
  if (!(x >= 2.0)) throw_domain("error vector needs x >= 2");
  const double scale = std::log(x) / std::sqrt(x);
  const double phi = static_cast<double>(euler_phi(c.q));
  std::vector<double> e;
  e.reserve(c.counts.size());
  for (std::int64_t n : c.counts)
    e.push_back(scale * (phi * static_cast<double>(n) - static_cast<double>(c.total)));
  return e;
}

std::vector<double> error_vector(const RaceCounters& c) {
  return error_vector(c, static_cast<double>(c.x));
}

std::vector<LogDensityResult> exact_log_densities(std::uint64_t q,
                                                  std::span<const std::int64_t> residues,
                                                  std::span<const OrderingEvent> events,
                                                  std::uint64_t limit, unsigned workers,
                                                  bool allow_large) {
  if (limit < 3) throw_domain("X must be at least 3");
  for (const auto& e : events)
    if (e.n() != residues.size()) throw_domain("event " + e.to_string() + " does not match the tuple length");
  const std::size_t m = events.size(), n = residues.size();

  struct Track {
    KahanSum measure, ties;
    Outcome state = Outcome::Fail;
    std::uint64_t switches = 0;
    double run_start = 2.0;
  };
  std::vector<Track> tracks(m);
  KahanSum any_tie;
  bool any_tie_state = false;
  double any_tie_start = 2.0;

  // Interval [start, end) with the counts fixed; `state` closes runs lazily.
  std::vector<std::int64_t> counts(n, 0);
  double start = 2.0;
  bool first = true;
  auto close_interval = [&](double end) {
    for (std::size_t e = 0; e < m; ++e) {
      Track& t = tracks[e];
      const Outcome o = events[e].evaluate(std::span<const std::int64_t>(counts));
      if (first) {
        t.state = o;
        t.run_start = start;
      } else if (o != t.state) {
        if (t.state == Outcome::Hold) t.measure += std::log(start / t.run_start);
        if (t.state == Outcome::Tie) t.ties += std::log(start / t.run_start);
        if ((o == Outcome::Hold) != (t.state == Outcome::Hold)) ++t.switches;
        t.state = o;
        t.run_start = start;
      }
    }
    bool tie = false;
    for (std::size_t i = 0; i < n && !tie; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (counts[i] == counts[j]) {
          tie = true;
          break;
        }
    if (first) {
      any_tie_state = tie;
      any_tie_start = start;
    } else if (tie != any_tie_state) {
      if (any_tie_state) any_tie += std::log(start / any_tie_start);
      any_tie_state = tie;
      any_tie_start = start;
    }
    first = false;
    start = end;
  };

  race_counts(
      q, residues, limit,
      [&](std::uint64_t p, const RaceCounters& c) {
        if (p > 2) close_interval(static_cast<double>(p));
        counts = c.counts;
      },
      workers, allow_large);
  if (start < static_cast<double>(limit)) close_interval(static_cast<double>(limit));
  const double end = static_cast<double>(limit);
  for (auto& t : tracks) {
    if (t.state == Outcome::Hold) t.measure += std::log(end / t.run_start);
    if (t.state == Outcome::Tie) t.ties += std::log(end / t.run_start);
  }
  if (any_tie_state) any_tie += std::log(end / any_tie_start);

  const double log_x = std::log(end);
  const double total = log_x - std::log(2.0);
  std::vector<LogDensityResult> out;
  out.reserve(m);
  for (std::size_t e = 0; e < m; ++e) {
    LogDensityResult r;
    r.event = events[e];
    r.limit = limit;
    r.measure = tracks[e].measure.value();
    r.density = r.measure / total;
    r.density_logx = r.measure / log_x;
    r.tie_measure = tracks[e].ties.value();
    r.any_tie_measure = any_tie.value();
    r.boundary_count = tracks[e].switches;
    out.push_back(std::move(r));
  }
  return out;
}

LogDensityResult exact_log_density(std::uint64_t q, std::span<const std::int64_t> residues,
                                   const OrderingEvent& event, std::uint64_t limit,
                                   unsigned workers, bool allow_large) {
  return exact_log_densities(q, residues, std::span(&event, 1), limit, workers, allow_large).front();
}

}  // namespace race
