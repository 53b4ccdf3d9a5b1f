#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "characters.hpp"
#include "events.hpp"
#include "rng.hpp"
#include "zeros.hpp"

namespace race {

enum class Model { XModel, ZModel, Sieve };

class VectorSampler {
 public:
  virtual ~VectorSampler() = default;
  virtual std::size_t dim() const = 0;
  virtual void draw(Philox& rng, std::span<double> out) const = 0;
};

// Mean-zero Gaussian vector with the given correlation matrix. Factorizes by
// (semidefinite) Cholesky; on failure retries with diagonal jitter 1e-12,
// 1e-11, ..., 1e-8 and throws "not PSD" after that.
class ZSampler final : public VectorSampler {
 public:
  explicit ZSampler(const Eigen::MatrixXd& r);

  std::size_t dim() const override { return n_; }
  void draw(Philox& rng, std::span<double> out) const override;

  double jitter() const { return jitter_; }
  Eigen::MatrixXd factor() const;

 private:
  std::size_t n_;
  double jitter_ = 0.0;
  bool diagonal_ = false;
  std::vector<double> lower_;  // packed row-major lower triangle
};

// The random model vector (X(q, a_j)/√Var(q))_j: one uniform unit-circle
// variable per zero, shared by all residues within a sample.
class XSampler final : public VectorSampler {
 public:
  XSampler(const ZeroSet& zs, const CharacterTable& table, std::span<const std::int64_t> residues,
           bool include_shifts = true);

  std::size_t dim() const override { return n_; }
  void draw(Philox& rng, std::span<double> out) const override;

  double var_q() const { return var_q_; }
  // -C_q(a_j) (zero when shifts are off), before normalization.
  std::span<const double> shifts() const { return shift_; }

 private:
  std::size_t n_;
  double var_q_;
  double scale_;
  std::vector<double> coeff_;         // 1/√(1/4 + γ²), blocks concatenated
  std::vector<std::size_t> offsets_;  // block b spans coeff_[offsets_[b], offsets_[b+1])
  std::vector<Complex> chi_;          // χ_b(a_j) at chi_[b*n + j]
  std::vector<double> shift_;
};

struct DensityEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t count = 0;  // samples where the event held
  std::uint64_t ties = 0;   // samples with an exact equality in the pattern
  std::optional<double> prediction;
  std::optional<double> bound;
  Model model = Model::ZModel;
};

struct McOptions {
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::uint64_t chunk_size = 1 << 16;  // fixed partition; RNG stream = chunk index
};

// Estimates every event on the same sample stream. Results depend only on
// (seed, samples, chunk_size), never on workers.
std::vector<DensityEstimate> mc_event_probabilities(const VectorSampler& sampler, Model model,
                                                    std::span<const OrderingEvent> events,
                                                    const McOptions& options);

DensityEstimate mc_event_probability(const VectorSampler& sampler, Model model,
                                     const OrderingEvent& event, const McOptions& options);

// Runs fn(chunk_index, begin, end) over a fixed chunk partition of [0, total)
// on `workers` threads.
void for_each_chunk(std::uint64_t total, std::uint64_t chunk_size, unsigned workers,
                    const std::function<void(std::uint64_t, std::uint64_t, std::uint64_t)>& fn);

}  // namespace race
