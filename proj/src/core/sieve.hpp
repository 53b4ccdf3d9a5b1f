#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "events.hpp"

namespace race {

struct RaceCounters {
  std::uint64_t q = 0;
  std::vector<std::uint64_t> residues;
  std::uint64_t x = 0;                 // last prime counted
  std::vector<std::int64_t> counts;    // π(x; q, a_j)
  std::uint64_t total = 0;             // π(x)
};

constexpr std::uint64_t kSieveGuard = 1'000'000'000;

// Calls on_prime(p, counters) for every prime p <= limit in increasing order,
// with the counters already updated for p. Limits above 10^9 raise a guard
// error unless guards are lifted.
void race_counts(std::uint64_t q, std::span<const std::int64_t> residues, std::uint64_t limit,
                 const std::function<void(std::uint64_t, const RaceCounters&)>& on_prime,
                 unsigned workers = 1, bool allow_large = false);

RaceCounters final_counts(std::uint64_t q, std::span<const std::int64_t> residues,
                          std::uint64_t limit, unsigned workers = 1);

// E(x; q, a_j) = (log x/√x)(φ(q)π(x; q, a_j) - π(x)) at x = counters.x, or
// at an explicit x >= counters.x before the next prime.
std::vector<double> error_vector(const RaceCounters& counters);
std::vector<double> error_vector(const RaceCounters& counters, double x);

struct LogDensityResult {
  OrderingEvent event;
  std::uint64_t limit = 0;
  double measure = 0.0;        // ∫ dt/t over [2, X] where the event holds
  double density = 0.0;        // measure/(log X - log 2)
  double density_logx = 0.0;   // measure/log X
  double tie_measure = 0.0;    // where an equality among the compared counts occurs
  double any_tie_measure = 0.0;  // where any two of the n counts coincide
  std::uint64_t boundary_count = 0;
};

// Exact logarithmic measure of each event over [2, X]: the counts are constant
// on [p, p'), so the measure is a sum of log(b/a) over maximal runs.
std::vector<LogDensityResult> exact_log_densities(std::uint64_t q,
                                                  std::span<const std::int64_t> residues,
                                                  std::span<const OrderingEvent> events,
                                                  std::uint64_t limit, unsigned workers = 1,
                                                  bool allow_large = false);

LogDensityResult exact_log_density(std::uint64_t q, std::span<const std::int64_t> residues,
                                   const OrderingEvent& event, std::uint64_t limit,
                                   unsigned workers = 1, bool allow_large = false);

}  // namespace race
