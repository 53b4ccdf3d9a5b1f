// race: command-line front end over the librace C API.

#include <zlib.h>

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "race/race.h"

namespace {

using json = nlohmann::ordered_json;

// A failure that names the flag responsible; always exit code 2.
struct UsageError {
  std::string flag;
  std::string message;
};

[[noreturn]] void fail(const std::string& flag, const std::string& message) {
  throw UsageError{flag, message};
}

void check(race_status s, const std::string& flag) {
  if (s != RACE_OK) fail(flag, std::string(race_status_name(s)) + ": " + race_last_error());
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using ZerosPtr = std::unique_ptr<race_zeros, Deleter<race_zeros, race_zeros_free>>;
using CorrPtr = std::unique_ptr<race_corr, Deleter<race_corr, race_corr_free>>;
using SamplerPtr = std::unique_ptr<race_sampler, Deleter<race_sampler, race_sampler_free>>;

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Splits a joined list on commas, whitespace and newlines.
std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == '\n' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

template <typename T>
T parse_number(const std::string& s, const std::string& flag) {
  T v{};
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) fail(flag, "not a number: '" + s + "'");
  return v;
}

// Integer that may be written in scientific notation ("1e7").
std::uint64_t parse_count(const std::string& s, const std::string& flag) {
  if (s.find_first_of("eE.") == std::string::npos) return parse_number<std::uint64_t>(s, flag);
  const double d = parse_number<double>(s, flag);
  if (!(d >= 0.0) || d != std::floor(d) || d > 1.8e19) fail(flag, "not a nonnegative integer: '" + s + "'");
  return static_cast<std::uint64_t>(d);
}

template <typename T>
std::vector<T> parse_list(const std::string& s, const std::string& flag) {
  std::vector<T> out;
  for (const auto& tok : split_list(s)) out.push_back(parse_number<T>(tok, flag));
  return out;
}

// Events are joined with newlines; a config-file value "full:1,2" arrives
// split at the comma, so pieces without a ':' continue the previous event.
std::vector<std::string> parse_events(const std::string& joined) {
  std::vector<std::string> out;
  for (const auto& tok : split_list(joined)) {
    if (tok.find(':') == std::string::npos && !out.empty())
      out.back() += "," + tok;
    else
      out.push_back(tok);
  }
  return out;
}

struct Config {
  std::string q, residues, zeros, synthetic_count, zero_seed = "0";
  std::string samples = "1000000", seed = "0", workers = "1", chunk = "65536";
  std::string out, format = "csv";
  std::string model = "z", corr, events;
  bool no_shifts = false;
  std::string x;
  std::string trace;
  std::string kind, constant = "1";
  std::map<std::string, std::string> params;  // predict/check scalars
  std::string x_corr, w_corr, u;
  std::string thetas, phis, theta_grid, phi_grid, theta, Q;
};

// ---- Output --------------------------------------------------------------

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) fail("--out", "cannot open '" + path + "' for writing");
    }
  }
  std::ostream& os() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

// Resolved configuration: every option that is set or has a default, in
// declaration order. --config and --out do not affect results.
std::vector<std::pair<std::string, std::string>> resolved(const CLI::App& app,
                                                          const std::string& sub) {
  std::vector<std::pair<std::string, std::string>> kv{{"subcommand", sub}};
  for (const CLI::Option* opt : app.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "config" || name == "out") continue;
    std::string value;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      if (opt->get_type_size() == 0) {
        value = "true";
      } else {
        for (std::size_t i = 0; i < res.size(); ++i) value += (i ? "," : "") + res[i];
      }
    } else {
      value = opt->get_default_str();
    }
    for (char& c : value)
      if (c == '\n') c = ',';
    if (value.empty()) continue;
    kv.emplace_back(name, value);
  }
  return kv;
}

void echo_csv_header(std::ostream& os, const std::vector<std::pair<std::string, std::string>>& kv) {
  for (const auto& [k, v] : kv) os << "# " << k << " = " << v << "\n";
}

json config_json(const std::vector<std::pair<std::string, std::string>>& kv) {
  json j = json::object();
  for (const auto& [k, v] : kv) j[k] = v;
  return j;
}

json opt_num(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

// ---- Shared inputs -------------------------------------------------------

std::uint64_t require_q(const Config& c) {
  if (c.q.empty()) fail("--q", "required");
  return parse_count(c.q, "--q");
}

std::vector<std::int64_t> require_residues(const Config& c) {
  if (c.residues.empty()) fail("--residues", "required");
  auto r = parse_list<std::int64_t>(c.residues, "--residues");
  if (r.empty()) fail("--residues", "empty list");
  return r;
}

// Zero data from --zeros, or synthetic (default 200 per character, seed 0).
ZerosPtr load_zeros(const Config& c, std::uint64_t q) {
  race_zeros* z = nullptr;
  if (!c.zeros.empty()) {
    if (!c.synthetic_count.empty()) fail("--zeros", "conflicts with --synthetic-count");
    check(race_zeros_load(c.zeros.c_str(), &z), "--zeros");
    ZerosPtr out(z);
    if (q != 0 && race_zeros_modulus(z) != q)
      fail("--zeros", "file is for modulus " + std::to_string(race_zeros_modulus(z)) + ", not " +
                          std::to_string(q));
    return out;
  }
  if (q == 0) fail("--q", "required");
  const std::uint64_t count =
      c.synthetic_count.empty() ? 200 : parse_count(c.synthetic_count, "--synthetic-count");
  check(race_zeros_synthesize(q, count, parse_count(c.zero_seed, "--zero-seed"), &z),
        "--synthetic-count");
  return ZerosPtr(z);
}

// The model sums over all zeros; reports built from finite data say where it stops.
std::string zero_note(const race_zeros* zs) {
  return std::string(race_zeros_is_synthetic(zs) ? "synthetic" : "file") + ", " +
         std::to_string(race_zeros_total(zs)) + " zeros up to height " + num(race_zeros_height(zs)) +
         "; truncation error not quantified";
}

std::vector<double> read_matrix_file(const std::string& path, const std::string& flag, size_t& n) {
  std::ifstream in(path);
  if (!in) fail(flag, "cannot read '" + path + "'");
  std::vector<double> v;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    for (const auto& tok : split_list(line)) v.push_back(parse_number<double>(tok, flag));
  }
  n = static_cast<size_t>(std::llround(std::sqrt(static_cast<double>(v.size()))));
  if (n == 0 || n * n != v.size()) fail(flag, "matrix file must hold n*n numbers");
  return v;
}

// identity:N, equi:RHO:N or a matrix file.
std::vector<double> corr_spec(const std::string& spec, size_t& n) {
  const auto parts = [&] {
    std::vector<std::string> p;
    std::stringstream ss(spec);
    std::string t;
    while (std::getline(ss, t, ':')) p.push_back(t);
    return p;
  }();
  if (parts.size() == 2 && parts[0] == "identity") {
    n = parse_count(parts[1], "--corr");
    if (n == 0) fail("--corr", "dimension must be positive");
    std::vector<double> m(n * n, 0.0);
    for (size_t i = 0; i < n; ++i) m[i * n + i] = 1.0;
    return m;
  }
  if (parts.size() == 3 && parts[0] == "equi") {
    const double rho = parse_number<double>(parts[1], "--corr");
    n = parse_count(parts[2], "--corr");
    if (n == 0) fail("--corr", "dimension must be positive");
    std::vector<double> m(n * n, rho);
    for (size_t i = 0; i < n; ++i) m[i * n + i] = 1.0;
    return m;
  }
  return read_matrix_file(spec, "--corr", n);
}

// ---- Subcommands ---------------------------------------------------------

// Error-term bound attached to an MC row, or nullopt when none applies.
std::optional<double> mc_bound(const std::string& event, size_t n, const std::vector<double>& r,
                               std::uint64_t q, double c) {
  race_event_kind kind;
  size_t k = 0;
  check(race_event_info(event.c_str(), n, &kind, &k, nullptr), "--event");
  race_bound b{};
  if (kind == RACE_EVENT_LEADER && n >= 2 && !r.empty()) {
    const size_t lead = std::stoul(event.substr(event.find(':') + 1)) - 1;
    double s1 = 0.0, s2 = 0.0;
    for (size_t j = 0; j < n; ++j) {
      if (j == lead) continue;
      s1 += std::abs(r[lead * n + j]);
      for (size_t l = j + 1; l < n; ++l)
        if (l != lead) s2 += std::abs(r[j * n + l]);
    }
    const char* keys[] = {"n", "r1_sum", "rij_sum"};
    const double vals[] = {static_cast<double>(n), s1, s2};
    check(race_bound_value("probleader", keys, vals, 3, nullptr, nullptr, nullptr, 0, c, &b), "--event");
    return b.absolute;
  }
  if (q < 3 || n < 2) return std::nullopt;
  if (kind == RACE_EVENT_FULL || (kind == RACE_EVENT_FIRSTK && k + 1 >= n)) {
    const char* keys[] = {"n", "q"};
    const double vals[] = {static_cast<double>(n), static_cast<double>(q)};
    check(race_bound_value("fullrace", keys, vals, 2, nullptr, nullptr, nullptr, 0, c, &b), "--event");
    return b.absolute;
  }
  if (kind == RACE_EVENT_FIRSTK && n >= 3) {
    const char* keys[] = {"n", "k", "q"};
    const double vals[] = {static_cast<double>(n), static_cast<double>(k), static_cast<double>(q)};
    check(race_bound_value("firstk", keys, vals, 3, nullptr, nullptr, nullptr, 0, c, &b), "--event");
    return b.absolute;
  }
  return std::nullopt;
}

void run_mc(const Config& c, const std::vector<std::pair<std::string, std::string>>& kv,
            Output& out) {
  if (c.model != "x" && c.model != "z") fail("--model", "must be x or z");
  const auto events = parse_events(c.events);
  if (events.empty()) fail("--event", "at least one event is required");
  std::uint64_t q = 0;
  std::vector<double> r;
  size_t n = 0;
  SamplerPtr sampler;
  race_sampler* s = nullptr;
  std::string zero_data;
  if (c.model == "z" && !c.corr.empty()) {
    if (!c.residues.empty()) fail("--corr", "conflicts with --residues");
    if (!c.q.empty()) q = require_q(c);
    r = corr_spec(c.corr, n);
    race_corr* m = nullptr;
    check(race_corr_from_matrix(r.data(), n, &m), "--corr");
    CorrPtr corr(m);
    check(race_sampler_z(corr.get(), &s), "--corr");
    sampler.reset(s);
  } else {
    q = require_q(c);
    const auto residues = require_residues(c);
    n = residues.size();
    const ZerosPtr zs = load_zeros(c, q);
    zero_data = zero_note(zs.get());
    race_corr* m = nullptr;
    check(race_corr_from_zeros(zs.get(), residues.data(), n, &m), "--residues");
    CorrPtr corr(m);
    r.assign(n * n, 0.0);
    check(race_corr_entries(corr.get(), r.data(), r.size()), "--residues");
    if (c.model == "z")
      check(race_sampler_z(corr.get(), &s), "--residues");
    else
      check(race_sampler_x(zs.get(), residues.data(), n, c.no_shifts ? 0 : 1, &s), "--residues");
    sampler.reset(s);
  }
  race_mc_options opt{};
  opt.samples = parse_count(c.samples, "--samples");
  if (opt.samples < 1000) fail("--samples", "at least 1000 samples are required");
  opt.seed = parse_count(c.seed, "--seed");
  opt.workers = static_cast<unsigned>(parse_count(c.workers, "--workers"));
  opt.chunk_size = parse_count(c.chunk, "--chunk-size");
  std::vector<const char*> specs;
  for (const auto& e : events) specs.push_back(e.c_str());
  std::vector<race_estimate> est(events.size());
  check(race_mc_estimate(sampler.get(), specs.data(), specs.size(), &opt, est.data()), "--event");
  const double cst = parse_number<double>(c.constant, "--constant");

  std::vector<std::optional<double>> bounds;
  std::vector<size_t> ks;
  for (const auto& e : events) {
    size_t k = 0;
    check(race_event_info(e.c_str(), n, nullptr, &k, nullptr), "--event");
    ks.push_back(k);
    bounds.push_back(mc_bound(e, n, r, q, cst));
  }
  const double jitter = race_sampler_jitter(sampler.get());
  auto& os = out.os();
  if (c.format == "json") {
    json j;
    j["config"] = config_json(kv);
    j["jitter"] = jitter;
    if (!zero_data.empty()) j["zero_data"] = zero_data;
    j["results"] = json::array();
    for (size_t i = 0; i < events.size(); ++i)
      j["results"].push_back({{"model", c.model},
                              {"event", events[i]},
                              {"n", n},
                              {"k", ks[i]},
                              {"samples", est[i].samples},
                              {"count", est[i].count},
                              {"value", est[i].value},
                              {"stderr", est[i].std_error},
                              {"prediction", est[i].prediction},
                              {"bound", opt_num(bounds[i])},
                              {"ties", est[i].ties}});
    os << j.dump(2) << "\n";
    return;
  }
  echo_csv_header(os, kv);
  os << "# jitter = " << num(jitter) << "\n";
  if (!zero_data.empty()) os << "# zero_data = " << zero_data << "\n";
  os << "model,event,n,k,samples,value,stderr,prediction,bound,ties\n";
  for (size_t i = 0; i < events.size(); ++i)
    os << c.model << ",\"" << events[i] << "\"," << n << "," << ks[i] << "," << est[i].samples
       << "," << num(est[i].value) << "," << num(est[i].std_error) << ","
       << num(est[i].prediction) << "," << (bounds[i] ? num(*bounds[i]) : "") << ","
       << est[i].ties << "\n";
}

void run_cov(const Config& c, const std::vector<std::pair<std::string, std::string>>& kv,
             Output& out) {
  const std::uint64_t q = require_q(c);
  const auto residues = require_residues(c);
  const ZerosPtr zs = load_zeros(c, q);
  const size_t n = residues.size();
  race_corr* m = nullptr;
  check(race_corr_from_zeros(zs.get(), residues.data(), n, &m), "--residues");
  CorrPtr corr(m);
  std::vector<double> r(n * n);
  check(race_corr_entries(corr.get(), r.data(), r.size()), "--residues");
  double min_eig = 0.0;
  check(race_corr_min_eigenvalue(corr.get(), &min_eig), "--residues");
  race_characters* t = nullptr;
  check(race_characters_create(q, &t), "--q");
  const std::uint64_t phi = race_characters_count(t);
  race_characters_free(t);

  struct Row {
    std::int64_t a, b;
    double bq, r;
    std::string note;
  };
  std::vector<Row> rows;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) {
      Row row{residues[i], residues[j], 0.0, r[i * n + j], ""};
      check(race_bq(zs.get(), row.a, row.b, &row.bq), "--residues");
      const auto sq = static_cast<std::int64_t>(q);
      const std::int64_t ma = ((row.a % sq) + sq) % sq, mb = ((row.b % sq) + sq) % sq;
      if ((ma == 1 && mb == sq - 1) || (mb == 1 && ma == sq - 1))
        row.note = "large_cov ratio=" + num(row.bq / (static_cast<double>(phi) * -std::log(2.0)));
      rows.push_back(row);
    }
  const double var = race_corr_var_q(corr.get());
  const bool partial = race_corr_is_partial(corr.get());
  auto& os = out.os();
  if (c.format == "json") {
    json j;
    j["config"] = config_json(kv);
    j["var_q"] = var;
    j["zero_data"] = zero_note(zs.get());
    j["partial"] = partial;
    j["min_eigenvalue"] = min_eig;
    j["rows"] = json::array();
    for (const auto& row : rows)
      j["rows"].push_back(
          {{"a", row.a}, {"b", row.b}, {"B_q", row.bq}, {"r", row.r}, {"annotation", row.note}});
    os << j.dump(2) << "\n";
    return;
  }
  echo_csv_header(os, kv);
  os << "# var_q = " << num(var) << "\n# zero_data = " << zero_note(zs.get()) << "\n# partial = " << (partial ? "true" : "false")
     << "\n# min_eigenvalue = " << num(min_eig) << "\n";
  os << "a,b,B_q,r,annotation\n";
  for (const auto& row : rows)
    os << row.a << "," << row.b << "," << num(row.bq) << "," << num(row.r) << "," << row.note
       << "\n";
}

struct TraceWriter {
  gzFile f;
  bool ok = true;
};

void trace_prime(uint64_t p, const int64_t* counts, size_t n, uint64_t total, void* user) {
  auto* w = static_cast<TraceWriter*>(user);
  std::string line = std::to_string(p);
  for (size_t i = 0; i < n; ++i) line += "," + std::to_string(counts[i]);
  line += "," + std::to_string(total) + "\n";
  if (gzwrite(w->f, line.data(), static_cast<unsigned>(line.size())) <= 0) w->ok = false;
}

void run_sieve(const Config& c, const std::vector<std::pair<std::string, std::string>>& kv,
               Output& out) {
  const std::uint64_t q = require_q(c);
  const auto residues = require_residues(c);
  if (c.x.empty()) fail("--x", "required");
  const std::uint64_t limit = parse_count(c.x, "--x");
  const auto events = parse_events(c.events);
  if (events.empty()) fail("--event", "at least one event is required");
  std::vector<const char*> specs;
  for (const auto& e : events) specs.push_back(e.c_str());
  const unsigned workers = static_cast<unsigned>(parse_count(c.workers, "--workers"));
  std::vector<race_log_density> res(events.size());
  const race_status st = race_exact_log_density(q, residues.data(), residues.size(), specs.data(),
                                                specs.size(), limit, workers, 0, res.data());
  check(st, st == RACE_ERR_DOMAIN ? "--residues" : st == RACE_ERR_GUARD ? "--x" : "--event");
  if (!c.trace.empty()) {
    TraceWriter w{gzopen(c.trace.c_str(), "wb")};
    if (w.f == nullptr) fail("--trace", "cannot open '" + c.trace + "'");
    std::string head = "# p";
    for (auto a : residues) head += ",pi(x;" + std::to_string(q) + "," + std::to_string(a) + ")";
    head += ",pi(x)\n";
    gzwrite(w.f, head.data(), static_cast<unsigned>(head.size()));
    const race_status s = race_sieve_stream(q, residues.data(), residues.size(), limit, workers, 0,
                                            trace_prime, &w);
    if (gzclose(w.f) != Z_OK || !w.ok) fail("--trace", "write failed");
    check(s, "--x");
  }
  auto& os = out.os();
  if (c.format == "json") {
    json j;
    j["config"] = config_json(kv);
    j["results"] = json::array();
    for (size_t i = 0; i < events.size(); ++i)
      j["results"].push_back({{"q", q},
                              {"event", events[i]},
                              {"X", limit},
                              {"measure", res[i].measure},
                              {"density", res[i].density},
                              {"density_logx", res[i].density_logx},
                              {"tie_measure", res[i].tie_measure},
                              {"any_tie_measure", res[i].any_tie_measure},
                              {"boundary_count", res[i].boundary_count}});
    os << j.dump(2) << "\n";
    return;
  }
  echo_csv_header(os, kv);
  for (size_t i = 0; i < events.size(); ++i)
    os << "# " << events[i] << ": density_logx = " << num(res[i].density_logx)
       << ", tie_measure = " << num(res[i].tie_measure)
       << ", any_tie_measure = " << num(res[i].any_tie_measure) << "\n";
  os << "q,event,X,measure,density,boundary_count\n";
  for (size_t i = 0; i < events.size(); ++i)
    os << q << ",\"" << events[i] << "\"," << limit << "," << num(res[i].measure) << ","
       << num(res[i].density) << "," << res[i].boundary_count << "\n";
}

double param(const Config& c, const std::string& key) {
  const auto it = c.params.find(key);
  if (it == c.params.end() || it->second.empty()) fail("--" + key, "required for --kind " + c.kind);
  return parse_number<double>(it->second, "--" + key);
}

json report(const std::string& kind, json inputs, double value, std::optional<double> oracle) {
  json j;
  j["kind"] = kind;
  j["inputs"] = std::move(inputs);
  j["value"] = value;
  j["oracle"] = opt_num(oracle);
  j["ratio"] = oracle && *oracle != 0.0 ? json(value / *oracle) : json(nullptr);
  return j;
}

void emit_report(json j, const std::vector<std::pair<std::string, std::string>>& kv, Output& out) {
  json wrapped;
  wrapped["config"] = config_json(kv);
  for (auto& [k, v] : j.items()) wrapped[k] = v;
  out.os() << wrapped.dump(2) << "\n";
}

void run_predict(const Config& c, const std::vector<std::pair<std::string, std::string>>& kv,
                 Output& out) {
  if (c.kind.empty()) fail("--kind", "required");
  const double cst = parse_number<double>(c.constant, "--constant");
  static const std::map<std::string, std::vector<std::pair<std::string, std::string>>> scalars = {
      {"probleader", {{"n", "n"}, {"r1-sum", "r1_sum"}, {"rij-sum", "rij_sum"}}},
      {"fullrace", {{"n", "n"}, {"q", "q"}}},
      {"leader", {{"n", "n"}, {"q", "q"}}},
      {"firstk", {{"n", "n"}, {"k", "k"}, {"q", "q"}}},
      {"ncr2", {{"n", "n"}, {"epsilon", "epsilon"}, {"A", "A"}, {"B", "B"}}},
      {"lishao", {}},
      {"hybrid", {{"epsilon", "epsilon"}, {"epsilon1", "epsilon1"}, {"w", "w"}}},
  };
  const auto it = scalars.find(c.kind);
  if (it == scalars.end()) fail("--kind", "unknown kind '" + c.kind + "'");
  Config cc = c;
  if (!c.q.empty()) cc.params["q"] = c.q;
  std::vector<std::string> keys;
  std::vector<double> vals;
  json inputs = json::object();
  for (const auto& [flag, key] : it->second) {
    keys.push_back(key);
    vals.push_back(param(cc, flag));
    inputs[key] = vals.back();
  }
  std::vector<double> xm, wm, u;
  size_t n = 0;
  if (c.kind == "lishao") {
    if (c.x_corr.empty()) fail("--x-corr", "required for --kind lishao");
    xm = corr_spec(c.x_corr, n);
  }
  if (c.kind == "lishao" || c.kind == "hybrid") {
    const std::string flag = "--w-corr";
    if (c.w_corr.empty()) fail(flag, "required for --kind " + c.kind);
    size_t nw = 0;
    wm = corr_spec(c.w_corr, nw);
    if (n != 0 && nw != n) fail(flag, "size differs from --x-corr");
    n = nw;
    u = parse_list<double>(c.u, "--u");
    if (u.size() != n) fail("--u", "needs " + std::to_string(n) + " thresholds");
    inputs["n_dim"] = n;
    inputs["u"] = u;
  }
  std::vector<const char*> kp;
  for (const auto& k : keys) kp.push_back(k.c_str());
  race_bound b{};
  check(race_bound_value(c.kind.c_str(), kp.data(), vals.data(), kp.size(),
                         xm.empty() ? nullptr : xm.data(), wm.empty() ? nullptr : wm.data(),
                         u.empty() ? nullptr : u.data(), n, cst, &b),
        "--kind");
  inputs["constant_c"] = cst;
  std::optional<double> oracle;
  if (c.kind == "ncr2") {
    // The exact equicorrelated probability the bound dominates.
    double v = 0.0;
    check(race_ncr2_conditional_integral(static_cast<uint64_t>(vals[0]), vals[1], vals[2], &v),
          "--kind");
    oracle = v;
  }
  json j = report(c.kind, inputs, b.value, oracle);
  j["absolute"] = b.absolute;
  if (b.shape_only) j["label"] = "shape only";
  emit_report(std::move(j), kv, out);
}

void run_check(const Config& c, const std::vector<std::pair<std::string, std::string>>& kv,
               Output& out) {
  if (c.kind.empty()) fail("--kind", "required");
  json inputs = json::object();
  double value = 0.0;
  std::optional<double> oracle;
  if (c.kind == "phi-power") {
    const auto n = static_cast<uint64_t>(param(c, "n"));
    const double a = param(c, "a");
    inputs = {{"n", n}, {"a", a}};
    check(race_phi_power_integral(n, a, &value), "--n");
    double quad = 0.0;
    check(race_phi_power_integral_quadrature(n, a, &quad), "--n");
    oracle = quad;
  } else if (c.kind == "ncr2") {
    const auto n = static_cast<uint64_t>(param(c, "n"));
    const double eps = param(c, "epsilon"), a = param(c, "A");
    inputs = {{"n", n}, {"epsilon", eps}, {"A", a}};
    check(race_ncr2_conditional_integral(n, eps, a, &value), "--epsilon");
    oracle = std::exp(static_cast<double>(n) * race_log_phi_cdf(a));  // independent case
  } else if (c.kind == "delta2") {
    const auto n = static_cast<uint64_t>(param(c, "n"));
    const double r12 = param(c, "r12");
    inputs = {{"r12", r12}, {"n", n}};
    check(race_delta2_quadrature(r12, n, &value), "--r12");
    oracle = 1.0 / (static_cast<double>(n) * static_cast<double>(n - 1));
  } else if (c.kind == "leader-product") {
    const auto r1 = parse_list<double>(c.params.count("r1") ? c.params.at("r1") : "", "--r1");
    const double x = param(c, "xval");
    inputs = {{"r1", r1}, {"x", x}};
    check(race_leader_conditional_product(r1.data(), r1.size(), x, &value), "--r1");
    oracle = std::exp(static_cast<double>(r1.size()) * race_log_phi_cdf(x));
  } else if (c.kind == "choose-a") {
    const double n = param(c, "n"), k = param(c, "k");
    inputs = {{"n", n}, {"k", k}};
    check(race_choose_A(n, k, &value), "--n");
    oracle = std::sqrt(std::log(n / (k * std::log(n))) / 0.51);
  } else if (c.kind == "near-identity") {
    size_t n = 0;
    if (c.corr.empty()) fail("--corr", "required for --kind near-identity");
    const auto a = corr_spec(c.corr, n);
    race_near_identity_report rep{};
    check(race_near_identity(a.data(), n, &rep, nullptr, nullptr), "--corr");
    inputs = {{"n", n},
              {"epsilon", rep.epsilon},
              {"det_bound_ratio", rep.det_bound_ratio},
              {"max_inv_offdiag_ratio", rep.max_inv_offdiag_ratio},
              {"lu_residual", rep.lu_residual}};
    value = rep.det_exact;
    oracle = 1.0;
  } else {
    fail("--kind", "unknown check '" + c.kind +
                       "' (phi-power, ncr2, delta2, leader-product, choose-a, near-identity)");
  }
  emit_report(report(c.kind, inputs, value, oracle), kv, out);
}

std::vector<double> points(const std::string& list, const std::string& grid,
                           const std::string& list_flag, const std::string& grid_flag) {
  if (!list.empty() && !grid.empty()) fail(grid_flag, "conflicts with " + list_flag);
  if (!grid.empty()) {
    const std::uint64_t m = parse_count(grid, grid_flag);
    if (m == 0) fail(grid_flag, "must be positive");
    std::vector<double> v;
    for (std::uint64_t i = 0; i < m; ++i) v.push_back(static_cast<double>(i) / static_cast<double>(m));
    return v;
  }
  if (list.empty()) fail(list_flag, "required (or " + grid_flag + ")");
  return parse_list<double>(list, list_flag);
}

void run_harmonic(const Config& c, const std::vector<std::pair<std::string, std::string>>& kv,
                  Output& out) {
  if (c.Q.empty()) fail("--Q", "required");
  const std::uint64_t Q = parse_count(c.Q, "--Q");
  if (Q < 1) fail("--Q", "must be at least 1");
  if (c.x.empty()) fail("--x", "required");
  const double x = parse_number<double>(c.x, "--x");
  auto& os = out.os();
  if (!c.theta.empty()) {
    const double theta = parse_number<double>(c.theta, "--theta");
    double g = 0.0;
    check(race_g_function(theta, Q, x, &g), "--x");
    if (c.format == "json") {
      json j;
      j["config"] = config_json(kv);
      j["theta"] = theta;
      j["G"] = g;
      os << j.dump(2) << "\n";
    } else {
      echo_csv_header(os, kv);
      os << "theta,Q,x,G\n" << num(theta) << "," << Q << "," << num(x) << "," << num(g) << "\n";
    }
    return;
  }
  const auto th = points(c.thetas, c.theta_grid, "--thetas", "--theta-grid");
  const auto ph = points(c.phis, c.phi_grid, "--phis", "--phi-grid");
  race_pair_report rep{};
  const race_status st = race_pair_sum(th.data(), th.size(), ph.data(), ph.size(), Q, x, &rep);
  check(st, st == RACE_ERR_VALIDATION ? "--thetas/--phis" : "--x");
  if (c.format == "json") {
    json j;
    j["config"] = config_json(kv);
    j["R"] = th.size();
    j["S"] = ph.size();
    j["sum"] = rep.sum;
    j["paper_form"] = rep.paper_form;
    j["ratio"] = rep.ratio;
    os << j.dump(2) << "\n";
    return;
  }
  echo_csv_header(os, kv);
  os << "sum,paper_form,ratio\n" << num(rep.sum) << "," << num(rep.paper_form) << "," << num(rep.ratio) << "\n";
}

void run_zeros(const Config& c, const std::vector<std::pair<std::string, std::string>>& kv,
               Output& out) {
  const std::uint64_t q = c.q.empty() ? 0 : require_q(c);
  if (c.zeros.empty() && c.synthetic_count.empty())
    fail("--zeros", "give --zeros FILE to validate or --synthetic-count N to synthesize");
  const ZerosPtr zs = load_zeros(c, q);
  double var = 0.0;
  check(race_var_q(zs.get(), &var), "--zeros");
  auto& os = out.os();
  if (c.format == "json") {
    json j;
    j["config"] = config_json(kv);
    j["modulus"] = race_zeros_modulus(zs.get());
    j["blocks"] = race_zeros_block_count(zs.get());
    j["zeros"] = race_zeros_total(zs.get());
    j["height"] = race_zeros_height(zs.get());
    j["complete"] = race_zeros_is_complete(zs.get()) != 0;
    j["synthetic"] = race_zeros_is_synthetic(zs.get()) != 0;
    j["var_q"] = var;
    os << j.dump(2) << "\n";
    return;
  }
  char* text = nullptr;
  check(race_zeros_serialize(zs.get(), &text), "--zeros");
  echo_csv_header(os, kv);
  os << "# var_q = " << num(var) << "\n" << text;
  race_string_free(text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prime number races: model sampling, exact sieve densities and analytic checks",
               "race"};
  app.set_config("--config", "", "key = value file; flags override it");
  app.require_subcommand(1);
  Config c;

  auto joined = [&](const std::string& name, std::string& target, const std::string& help) {
    return app.add_option(name, target, help)->multi_option_policy(CLI::MultiOptionPolicy::Join);
  };
  app.add_option("--q", c.q, "modulus")->group("Inputs");
  joined("--residues", c.residues, "comma-separated units mod q")->group("Inputs");
  app.add_option("--zeros", c.zeros, "zero file")->group("Inputs");
  app.add_option("--synthetic-count", c.synthetic_count, "synthetic zeros per character (default 200)")->group("Inputs");
  app.add_option("--zero-seed", c.zero_seed, "synthetic zero seed")->capture_default_str()->group("Inputs");
  app.add_option("--corr", c.corr, "identity:N, equi:RHO:N or matrix file")->group("Inputs");
  joined("--event", c.events, "full:i1,..,in | leader:i | firstk:k (repeatable)")->group("Inputs");

  app.add_option("--model", c.model, "x or z")->capture_default_str()->group("Monte Carlo");
  app.add_option("--samples", c.samples)->capture_default_str()->group("Monte Carlo");
  app.add_option("--seed", c.seed)->capture_default_str()->group("Monte Carlo");
  app.add_option("--chunk-size", c.chunk, "samples per RNG stream")->capture_default_str()->group("Monte Carlo");
  app.add_flag("--no-shifts", c.no_shifts, "drop the C_q(a) shifts from the X model")->group("Monte Carlo");
  app.add_option("--workers", c.workers)->capture_default_str();

  app.add_option("--x", c.x, "sieve limit X, or the x of the harmonic sums")->group("Sieve");
  app.add_option("--trace", c.trace, "gzip per-prime trace file")->group("Sieve");

  app.add_option("--kind", c.kind, "predict/check kind")->group("Analytics");
  app.add_option("--constant", c.constant, "stand-in for implicit constants")->capture_default_str()->group("Analytics");
  for (const char* key : {"n", "k", "r1-sum", "rij-sum", "epsilon", "epsilon1", "A", "B", "w", "a", "r12", "xval"})
    app.add_option(std::string("--") + key, c.params[key])->group("Analytics");
  joined("--r1", c.params["r1"], "correlations r_{1,i}")->group("Analytics");
  app.add_option("--x-corr", c.x_corr, "X correlations (lishao)")->group("Analytics");
  app.add_option("--w-corr", c.w_corr, "W correlations (lishao, hybrid)")->group("Analytics");
  joined("--u", c.u, "thresholds (lishao, hybrid)")->group("Analytics");

  app.add_option("--Q", c.Q)->group("Harmonic");
  app.add_option("--theta", c.theta)->group("Harmonic");
  joined("--thetas", c.thetas, "points in [0, 1)")->group("Harmonic");
  joined("--phis", c.phis, "points in [0, 1)")->group("Harmonic");
  app.add_option("--theta-grid", c.theta_grid, "theta_r = r/R")->group("Harmonic");
  app.add_option("--phi-grid", c.phi_grid, "phi_s = s/S")->group("Harmonic");

  app.add_option("--out", c.out, "output path (default stdout)");
  app.add_option("--format", c.format)->capture_default_str()->check(CLI::IsMember({"csv", "json"}));

  using Runner = void (*)(const Config&, const std::vector<std::pair<std::string, std::string>>&, Output&);
  const std::vector<std::tuple<std::string, std::string, Runner>> subs = {
      {"cov", "covariance and correlation matrix of a residue tuple", run_cov},
      {"mc", "Monte Carlo ordering probabilities (X or Z model)", run_mc},
      {"sieve", "exact logarithmic densities from a prime sieve", run_sieve},
      {"predict", "error-term bounds", run_predict},
      {"check", "analytic identity checks against oracles", run_check},
      {"harmonic", "G(theta) and the pair-sum report", run_harmonic},
      {"zeros", "validate or synthesize zero data", run_zeros},
  };
  for (const auto& [name, help, fn] : subs) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "race: error: " << e.what() << "\n";
    return 2;
  }
  try {
    for (const auto& [name, help, fn] : subs) {
      if (!app.got_subcommand(name)) continue;
      Output out(c.out);
      fn(c, resolved(app, name), out);
      out.os().flush();
    }
  } catch (const UsageError& e) {
    std::cerr << "race: error: " << e.flag << ": " << e.message << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "race: error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
