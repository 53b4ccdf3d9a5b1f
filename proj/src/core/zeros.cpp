#include "zeros.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include "arith.hpp"
#include "characters.hpp"
#include "errors.hpp"
#include "kahan.hpp"
#include "rng.hpp"

namespace race {

double ZeroBlock::weight() const {
  KahanSum sum;
  for (double g : gammas) sum += 1.0 / (0.25 + g * g);
  return sum.value();
}

ZeroSet::ZeroSet(std::uint64_t modulus, std::vector<ZeroBlock> blocks, Provenance provenance,
                 std::optional<SyntheticParams> synthetic)
    : modulus_(modulus),
      blocks_(std::move(blocks)),
      provenance_(provenance),
      synthetic_(synthetic) {
  if (modulus_ < 3) throw_validation("modulus must be >= 3");
  std::set<std::uint64_t> seen;
  for (const auto& b : blocks_) {
    const std::string where = "chi " + std::to_string(b.conrey_index) + ": ";
    if (b.conrey_index >= modulus_ || std::gcd(b.conrey_index, modulus_) != 1)
      throw_validation(where + "conrey index not a unit");
    if (b.conrey_index == 1) throw_validation(where + "principal character has no zeros block");
    if (!seen.insert(b.conrey_index).second) throw_validation(where + "duplicate block");
    if (b.gammas.empty()) throw_validation(where + "empty block");
    for (std::size_t i = 0; i < b.gammas.size(); ++i) {
      if (!(b.gammas[i] > 0.0) || !std::isfinite(b.gammas[i]))
        throw_validation(where + "gammas must be positive");
      if (i > 0 && !(b.gammas[i] > b.gammas[i - 1]))
        throw_validation(where + "gammas not increasing");
    }
  }
}

bool ZeroSet::complete() const { return blocks_.size() + 1 == euler_phi(modulus_); }

const ZeroBlock* ZeroSet::find(std::uint64_t conrey_index) const {
  for (const auto& b : blocks_)
    if (b.conrey_index == conrey_index) return &b;
  return nullptr;
}

std::size_t ZeroSet::total_zeros() const {
  std::size_t n = 0;
  for (const auto& b : blocks_) n += b.gammas.size();
  return n;
}

double ZeroSet::height() const {
  double h = 0.0;
  for (const auto& b : blocks_) h = std::max(h, b.gammas.back());
  return h;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

ZeroSet parse_zero_file(std::istream& in) {
  std::optional<std::uint64_t> modulus;
  std::vector<ZeroBlock> blocks;
  std::string raw;
  std::size_t line_no = 0;
  auto error = [&](const std::string& what) {
    throw_parse("line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (!modulus) {
      if (!line.starts_with("modulus")) error("expected 'modulus <q>'");
      std::uint64_t q = 0;
      if (!parse_number(trim(line.substr(7)), q)) error("bad modulus");
      modulus = q;
      continue;
    }
    if (line.starts_with("chi")) {
      std::uint64_t idx = 0;
      if (!parse_number(trim(line.substr(3)), idx)) error("bad conrey index");
      blocks.push_back({idx, {}});
      continue;
    }
    if (blocks.empty()) error("gamma before any 'chi' line");
    double g = 0.0;
    if (!parse_number(line, g)) error("bad gamma '" + std::string(line) + "'");
    blocks.back().gammas.push_back(g);
  }
  if (!modulus) throw_parse("missing 'modulus' line");
  return ZeroSet(*modulus, std::move(blocks), Provenance::RealData);
}

ZeroSet parse_zero_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_zero_file(in);
}

ZeroSet load_zero_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read zero file '" + path + "'");
  return parse_zero_file(in);
}

std::string serialize(const ZeroSet& zs) {
  std::string out;
  if (const auto& s = zs.synthetic())
    out += "# synthetic seed=" + std::to_string(s->seed) +
           " count=" + std::to_string(s->count_per_char) + "\n";
  out += "modulus " + std::to_string(zs.modulus()) + "\n";
  char buf[32];
  for (const auto& b : zs.blocks()) {
    out += "chi " + std::to_string(b.conrey_index) + "\n";
    for (double g : b.gammas) {
      auto res = std::to_chars(buf, buf + sizeof buf, g, std::chars_format::general, 17);
      out.append(buf, res.ptr);
      out += '\n';
    }
  }
  return out;
}

double synthetic_mean_spacing(std::uint64_t q, double gamma) {
  const double density_log =
      std::log(static_cast<double>(q) * (gamma + 2.0) / (2.0 * std::numbers::pi));
  // Low heights at small q put the log below 1; cap the gap at 2π there.
  return 2.0 * std::numbers::pi / std::max(density_log, 1.0);
}

ZeroSet synthesize_zeros(const CharacterTable& table, std::uint64_t count_per_char,
                         std::uint64_t seed) {
  if (count_per_char < 1) throw_domain("count_per_char must be >= 1");
  const std::uint64_t q = table.modulus();
  std::vector<ZeroBlock> blocks;
  for (std::uint64_t idx : table.conrey_indices()) {
    if (idx == 1) continue;
    Philox rng(seed ^ mix64(idx), 0);
    ZeroBlock block{idx, {}};
    block.gammas.reserve(count_per_char);
    // (0, m]: 1 - uniform() lies in (0, 1]
    double gamma = (1.0 - rng.uniform()) * synthetic_mean_spacing(q, 0.0);
    block.gammas.push_back(gamma);
    for (std::uint64_t k = 1; k < count_per_char; ++k) {
      const double m = synthetic_mean_spacing(q, gamma);
      gamma += (0.5 + rng.uniform()) * m;
      block.gammas.push_back(gamma);
    }
    blocks.push_back(std::move(block));
  }
  return ZeroSet(q, std::move(blocks), Provenance::Synthetic,
                 SyntheticParams{seed, count_per_char});
}

}  // namespace race
