#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace race {

class CharacterTable;

enum class Provenance { RealData, Synthetic };

struct SyntheticParams {
  std::uint64_t seed = 0;
  std::uint64_t count_per_char = 0;
};

// Positive ordinates of the zeros of L(s, χ) for one non-principal χ.
struct ZeroBlock {
  std::uint64_t conrey_index = 0;
  std::vector<double> gammas;  // strictly increasing, all > 0

  // Σ 1/(1/4 + γ²) over the block, compensated summation.
  double weight() const;
};

class ZeroSet {
 public:
  ZeroSet() = default;
  // Validates every invariant; throws a validation error on violation.
  ZeroSet(std::uint64_t modulus, std::vector<ZeroBlock> blocks, Provenance provenance,
          std::optional<SyntheticParams> synthetic = std::nullopt);

  std::uint64_t modulus() const { return modulus_; }
  const std::vector<ZeroBlock>& blocks() const { return blocks_; }
  Provenance provenance() const { return provenance_; }
  const std::optional<SyntheticParams>& synthetic() const { return synthetic_; }

  // Blocks exist for all φ(q)-1 non-principal characters.
  bool complete() const;
  const ZeroBlock* find(std::uint64_t conrey_index) const;
  std::size_t total_zeros() const;
  // Largest ordinate over all blocks (the truncation height).
  double height() const;

 private:
  std::uint64_t modulus_ = 0;
  std::vector<ZeroBlock> blocks_;
  Provenance provenance_ = Provenance::RealData;
  std::optional<SyntheticParams> synthetic_;
};

// Zero file format:
//   modulus <q>
//   chi <conrey index>
//   <gamma>            one positive decimal per line, strictly increasing
//   ...
// '#' lines are comments and blank lines are ignored.
ZeroSet parse_zero_file(std::istream& in);
ZeroSet parse_zero_text(std::string_view text);
ZeroSet load_zero_file(const std::string& path);
// Writes gammas with 17 significant digits so parsing round-trips exactly.
std::string serialize(const ZeroSet& zs);

// Sequential synthetic ordinates with locally-uniform spacing around the
// mean gap 2π/log(q(γ+2)/2π); deterministic in (q, count, seed).
ZeroSet synthesize_zeros(const CharacterTable& table, std::uint64_t count_per_char,
                         std::uint64_t seed);

// Mean zero spacing used by the synthesizer at height gamma.
double synthetic_mean_spacing(std::uint64_t q, double gamma);

}  // namespace race
