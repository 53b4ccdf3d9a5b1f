#include "sampler.hpp"

#include <atomic>
#include <boost/random/normal_distribution.hpp>
#include <cmath>
#include <functional>
#include <string>
#include <thread>

#include "covariance.hpp"
#include "errors.hpp"

namespace race {

namespace {

// Semidefinite Cholesky of r + jitter·I into a packed lower triangle. A pivot
// within `tol` of zero gives a zero column provided the entries below it
// vanish as well.
bool try_cholesky(const Eigen::MatrixXd& r, double jitter, std::vector<double>& lower) {
  const auto n = static_cast<std::size_t>(r.rows());
  lower.assign(n * (n + 1) / 2, 0.0);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return lower[i * (i + 1) / 2 + j]; };
  const double tol = 64.0 * 2.220446049250313e-16 * static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = r(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) + jitter;
    for (std::size_t k = 0; k < j; ++k) d -= at(j, k) * at(j, k);
    if (d < -tol) return false;
    const bool zero_pivot = d <= tol;
    const double ljj = zero_pivot ? 0.0 : std::sqrt(d);
    at(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      for (std::size_t k = 0; k < j; ++k) s -= at(i, k) * at(j, k);
      if (zero_pivot) {
        if (std::abs(s) > 1e-7) return false;
        at(i, j) = 0.0;
      } else {
        at(i, j) = s / ljj;
      }
    }
  }
  return true;
}

}  // namespace

ZSampler::ZSampler(const Eigen::MatrixXd& r) : n_(static_cast<std::size_t>(r.rows())) {
  if (r.rows() != r.cols() || r.rows() == 0) throw_domain("correlation matrix must be square");
  bool ok = try_cholesky(r, 0.0, lower_);
  for (double j = 1e-12; !ok && j <= 1e-8 * 1.0000001; j *= 10.0) {
    jitter_ = j;
    ok = try_cholesky(r, j, lower_);
  }
  if (!ok) throw_numeric("correlation matrix is not PSD (Cholesky failed with jitter 1e-8)");
  diagonal_ = true;
  for (std::size_t i = 0; i < n_ && diagonal_; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (lower_[i * (i + 1) / 2 + j] != 0.0) {
        diagonal_ = false;
        break;
      }
}

Eigen::MatrixXd ZSampler::factor() const {
  const auto n = static_cast<Eigen::Index>(n_);
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      l(i, j) = lower_[static_cast<std::size_t>(i * (i + 1) / 2 + j)];
  return l;
}

void ZSampler::draw(Philox& rng, std::span<double> out) const {
  boost::random::normal_distribution<double> normal;
  if (diagonal_) {
    for (std::size_t i = 0; i < n_; ++i) out[i] = lower_[i * (i + 1) / 2 + i] * normal(rng);
    return;
  }
  // out = L g, computed in place from the last row up.
  for (std::size_t i = 0; i < n_; ++i) out[i] = normal(rng);
  for (std::size_t i = n_; i-- > 0;) {
    const double* row = &lower_[i * (i + 1) / 2];
    double s = 0.0;
    for (std::size_t k = 0; k <= i; ++k) s += row[k] * out[k];
    out[i] = s;
  }
}

XSampler::XSampler(const ZeroSet& zs, const CharacterTable& table,
                   std::span<const std::int64_t> residues, bool include_shifts)
    : n_(residues.size()), var_q_(race::var_q(zs)) {
  if (zs.modulus() != table.modulus()) throw_domain("zero data and character table disagree on q");
  if (n_ == 0) throw_domain("empty residue tuple");
  if (!(var_q_ > 0.0)) throw_domain("zero data is empty");
  for (std::int64_t a : residues)
    if (!table.is_unit(a)) throw_domain("residue " + std::to_string(a) + " is not a unit");
  scale_ = 1.0 / std::sqrt(var_q_);
  offsets_.push_back(0);
  for (const auto& block : zs.blocks()) {
    for (double g : block.gammas) coeff_.push_back(1.0 / std::sqrt(0.25 + g * g));
    offsets_.push_back(coeff_.size());
    for (std::int64_t a : residues) chi_.push_back(table.evaluate(block.conrey_index, a));
  }
  for (std::int64_t a : residues)
    shift_.push_back(include_shifts ? -static_cast<double>(cq_shift(table.modulus(), a)) : 0.0);
}

void XSampler::draw(Philox& rng, std::span<double> out) const {
  for (std::size_t j = 0; j < n_; ++j) out[j] = 0.0;
  const std::size_t blocks = offsets_.size() - 1;
  for (std::size_t b = 0; b < blocks; ++b) {
    double sr = 0.0, si = 0.0;
    for (std::size_t z = offsets_[b]; z < offsets_[b + 1]; ++z) {
      const Complex u = rng.unit_circle();
      sr += coeff_[z] * u.real();
      si += coeff_[z] * u.imag();
    }
    const Complex* chi = &chi_[b * n_];
    for (std::size_t j = 0; j < n_; ++j)
      out[j] += 2.0 * (chi[j].real() * sr - chi[j].imag() * si);
  }
  for (std::size_t j = 0; j < n_; ++j) out[j] = (shift_[j] + out[j]) * scale_;
}

void for_each_chunk(std::uint64_t total, std::uint64_t chunk_size, unsigned workers,
                    const std::function<void(std::uint64_t, std::uint64_t, std::uint64_t)>& fn) {
  if (chunk_size == 0) throw_domain("chunk size must be positive");
  const std::uint64_t chunks = (total + chunk_size - 1) / chunk_size;
  std::atomic<std::uint64_t> next{0};
  auto work = [&] {
    for (std::uint64_t c = next++; c < chunks; c = next++)
      fn(c, c * chunk_size, std::min(total, (c + 1) * chunk_size));
  };
  if (workers <= 1) {
    work();
    return;
  }
  std::vector<std::thread> threads;
  for (unsigned w = 0; w < workers; ++w) threads.emplace_back(work);
  for (auto& t : threads) t.join();
}

std::vector<DensityEstimate> mc_event_probabilities(const VectorSampler& sampler, Model model,
                                                    std::span<const OrderingEvent> events,
                                                    const McOptions& options) {
  if (options.samples < 1000) throw_domain("Monte Carlo needs at least 1000 samples");
  const std::size_t n = sampler.dim();
  for (const auto& e : events)
    if (e.n() != n)
      throw_domain("event " + e.to_string() + " is over " + std::to_string(e.n()) +
                   " positions but the sampler has " + std::to_string(n));
  const std::uint64_t chunks = (options.samples + options.chunk_size - 1) / options.chunk_size;
  const std::size_t m = events.size();
  // Per-chunk integer tallies; summation order is fixed by chunk index.
  std::vector<std::uint64_t> hits(chunks * m, 0), ties(chunks * m, 0);
  for_each_chunk(options.samples, options.chunk_size, options.workers,
                 [&](std::uint64_t c, std::uint64_t begin, std::uint64_t end) {
                   Philox rng(options.seed, c);
                   std::vector<double> x(n);
                   for (std::uint64_t s = begin; s < end; ++s) {
                     sampler.draw(rng, x);
                     const std::span<const double> view(x);
                     for (std::size_t e = 0; e < m; ++e) {
                       switch (events[e].evaluate(view)) {
                         case Outcome::Hold: ++hits[c * m + e]; break;
                         case Outcome::Tie: ++ties[c * m + e]; break;
                         case Outcome::Fail: break;
                       }
                     }
                   }
                 });
  std::vector<DensityEstimate> out(m);
  for (std::size_t e = 0; e < m; ++e) {
    DensityEstimate& d = out[e];
    for (std::uint64_t c = 0; c < chunks; ++c) {
      d.count += hits[c * m + e];
      d.ties += ties[c * m + e];
    }
    d.samples = options.samples;
    d.value = static_cast<double>(d.count) / static_cast<double>(d.samples);
    d.std_error = std::sqrt(d.value * (1.0 - d.value) / static_cast<double>(d.samples));
    d.prediction = events[e].symmetric_prediction();
    d.model = model;
  }
  return out;
}

DensityEstimate mc_event_probability(const VectorSampler& sampler, Model model,
                                     const OrderingEvent& event, const McOptions& options) {
  return mc_event_probabilities(sampler, model, std::span(&event, 1), options).front();
}

}  // namespace race
