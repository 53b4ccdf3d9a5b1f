#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"

namespace {

namespace fs = std::filesystem;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

// Per-process scratch directory, removed at exit.
struct Scratch {
  fs::path dir = fs::temp_directory_path() / ("race_cli_tests_" + std::to_string(::getpid()));
  Scratch() { fs::create_directories(dir); }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
};

fs::path scratch() {
  static const Scratch s;
  return s.dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run race(const std::string& args) {
  const fs::path err = scratch() / "stderr.txt";
  const std::string cmd = std::string("\"") + RACE_CLI + "\" " + args + " 2>\"" + err.string() + "\"";
  Run r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, got);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err);
  return r;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

// Splits a CSV line, honouring double quotes.
std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (char c : line) {
    if (c == '"')
      quoted = !quoted;
    else if (c == ',' && !quoted)
      out.emplace_back();
    else
      out.back() += c;
  }
  return out;
}

// Header row and data rows of a CSV document; '#' lines are the echoed config.
struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string column(size_t row, const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return rows.at(row).at(i);
    FAIL("no column " << name);
    return {};
  }
};

Csv csv(const std::string& text) {
  Csv c;
  for (const auto& l : lines(text)) {
    if (l.empty() || l[0] == '#') continue;
    if (c.header.empty())
      c.header = fields(l);
    else
      c.rows.push_back(fields(l));
  }
  return c;
}

bool is_number(const std::string& s, double& v) {
  if (s.empty()) return false;
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

std::string print17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::string kMc = "mc --model z --q 4 --residues 1,3 --event full:1,2 --samples 1000000 --seed 7";

}  // namespace

TEST_CASE("mc on the degenerate q = 4 pair gives one half") {
  const Run r = race(kMc);
  REQUIRE(r.code == 0);
  const Csv c = csv(r.out);
  CHECK(c.header == std::vector<std::string>{"model", "event", "n", "k", "samples", "value",
                                             "stderr", "prediction", "bound", "ties"});
  REQUIRE(c.rows.size() == 1);
  const double v = std::stod(c.column(0, "value"));
  const double se = std::stod(c.column(0, "stderr"));
  CHECK(std::abs(v - 0.5) <= 4 * se);
  CHECK(c.column(0, "prediction") == "0.5");
  CHECK(r.out.find("# seed = 7") != std::string::npos);
}

TEST_CASE("identical configs give byte-identical output") {
  const Run a = race(kMc), b = race(kMc);
  CHECK(a.out == b.out);
  const Run w = race(kMc + " --workers 3");
  // the echoed config differs only in the workers line
  auto strip = [](const std::string& s) {
    std::string out;
    for (const auto& l : lines(s))
      if (l.rfind("# workers", 0) != 0) out += l + "\n";
    return out;
  };
  CHECK(strip(a.out) == strip(w.out));
}

TEST_CASE("predict probleader") {
  const Run r = race("predict --kind probleader --n 100 --r1-sum 0.1 --rij-sum 1");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["kind"] == "probleader");
  CHECK(j["value"].get<double>() == doctest::Approx(1.1518e-5).epsilon(1e-3));
  CHECK(j["config"]["n"] == "100");
}

TEST_CASE("sieve measure matches the per-integer scan") {
  const Run r = race("sieve --q 4 --residues 3,1 --event full:1,2 --x 100");
  REQUIRE(r.code == 0);
  const Csv c = csv(r.out);
  REQUIRE(c.rows.size() == 1);
  const auto primes = oracle::prime_table(100);
  const auto scan = oracle::integer_scan(4, {3, 1}, "full:1,2", 100, primes);
  CHECK(std::stod(c.column(0, "measure")) ==
        doctest::Approx(static_cast<double>(scan.measure)).epsilon(1e-12));
  CHECK(std::stoull(c.column(0, "boundary_count")) == scan.switches);
  CHECK(std::stod(c.column(0, "density")) ==
        doctest::Approx(static_cast<double>(scan.measure) / (std::log(100.0) - std::log(2.0))));
}

TEST_CASE("validation errors exit 2 and name the flag") {
  struct Case {
    std::string args, flag;
  };
  const std::vector<Case> cases = {
      {"mc --bogus 1", "--bogus"},
      {"sieve --q 4 --residues 2,1 --event full:1,2 --x 100", "--residues"},
      {"sieve --q 4 --residues 3,1 --event full:1,1 --x 100", "--event"},
      {"sieve --q 4 --residues 3,1 --event full:1,2 --x 2e9", "--x"},
      {"cov --q 5 --residues 1,2 --zeros /nonexistent/zeros.txt", "--zeros"},
      {"mc --model z --corr identity:3 --event full:1,2,3 --samples 10", "--samples"},
      {"mc --format xml --corr identity:2 --event full:1,2", "--format"},
      {"predict --kind probleader --n 100", "--r1-sum"},
      {"harmonic --Q 0 --theta 0 --x 10", "--Q"},
      {"--config /nonexistent/race.cfg mc", "/nonexistent/race.cfg"},
  };
  for (const auto& c : cases) {
    CAPTURE(c.args);
    const Run r = race(c.args);
    CHECK(r.code == 2);
    CHECK(r.out.empty());
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
    CHECK(r.err.find(c.flag) != std::string::npos);
  }
  CHECK(race("").code == 2);
  CHECK(race("frobnicate").code == 2);
  CHECK(race("--help").code == 0);
}

TEST_CASE("config file is equivalent to flags and flags override it") {
  const fs::path cfg = scratch() / "mc.cfg";
  {
    std::ofstream f(cfg);
    f << "model = z\nq = 4\nresidues = 1,3\nevent = full:1,2\nsamples = 1000000\nseed = 7\n";
  }
  const Run flags = race(kMc);
  const Run file = race("--config \"" + cfg.string() + "\" mc");
  REQUIRE(file.code == 0);
  CHECK(csv(file.out).rows == csv(flags.out).rows);

  const Run over = race("--config \"" + cfg.string() + "\" mc --seed 8");
  REQUIRE(over.code == 0);
  CHECK(over.out.find("# seed = 8") != std::string::npos);
  CHECK(csv(over.out).rows == csv(race(kMc.substr(0, kMc.size() - 1) + "8").out).rows);
  CHECK(csv(over.out).rows != csv(flags.out).rows);
}

TEST_CASE("numeric fields round-trip at 17 significant digits") {
  const std::vector<std::string> runs = {
      kMc,
      "sieve --q 10 --residues 1,3,7,9 --event full:2,4,1,3 --event leader:2 --x 5000",
      "harmonic --thetas 0.1,0.2,0.7 --phis 0.05,0.5 --Q 20 --x 1e4",
      "cov --q 5 --residues 1,2,3,4 --synthetic-count 50",
  };
  for (const auto& args : runs) {
    CAPTURE(args);
    const Run r = race(args);
    REQUIRE(r.code == 0);
    const Csv c = csv(r.out);
    REQUIRE(!c.rows.empty());
    int numeric = 0;
    for (const auto& row : c.rows)
      for (const auto& f : row) {
        double v;
        if (!is_number(f, v) || f.find_first_of(".eE") == std::string::npos) continue;
        ++numeric;
        CHECK(print17(v) == f);
      }
    CHECK(numeric > 0);
  }
  const Run j = race("predict --kind probleader --n 100 --r1-sum 0.1 --rij-sum 1 --format json");
  const double v = nlohmann::json::parse(j.out)["value"].get<double>();
  CHECK(std::strtod(print17(v).c_str(), nullptr) == v);
}

TEST_CASE("output file and json format") {
  const fs::path out = scratch() / "mc.json";
  const Run r = race(kMc + " --format json --out \"" + out.string() + "\"");
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  const auto j = nlohmann::json::parse(slurp(out));
  CHECK(j["config"]["seed"] == "7");
  const Csv c = csv(race(kMc).out);
  CHECK(j["results"][0]["value"].get<double>() == std::stod(c.column(0, "value")));
}

TEST_CASE("cov on q = 4 reports r = -1") {
  const Run r = race("cov --q 4 --residues 1,3 --zeros \"" + std::string(RACE_DATA_DIR) +
                     "/zeros_q4.txt\"");
  REQUIRE(r.code == 0);
  const Csv c = csv(r.out);
  CHECK(c.header == std::vector<std::string>{"a", "b", "B_q", "r", "annotation"});
  bool found = false;
  for (size_t i = 0; i < c.rows.size(); ++i)
    if (c.column(i, "a") == "1" && c.column(i, "b") == "3") {
      found = true;
      CHECK(c.column(i, "r") == "-1");
    }
  CHECK(found);
}

TEST_CASE("sieve trace is gzip text") {
  const fs::path trace = scratch() / "trace.gz";
  const Run r = race("sieve --q 4 --residues 3,1 --event full:1,2 --x 100 --trace \"" +
                     trace.string() + "\"");
  REQUIRE(r.code == 0);
  const std::string bytes = slurp(trace);
  REQUIRE(bytes.size() > 2);
  CHECK(static_cast<unsigned char>(bytes[0]) == 0x1f);
  CHECK(static_cast<unsigned char>(bytes[1]) == 0x8b);
}
