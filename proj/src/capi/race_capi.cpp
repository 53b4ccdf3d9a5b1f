#include "race/race.h"

#include <Eigen/Eigenvalues>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "analytics.hpp"
#include "characters.hpp"
#include "covariance.hpp"
#include "errors.hpp"
#include "events.hpp"
#include "harmonic.hpp"
#include "sampler.hpp"
#include "sieve.hpp"
#include "zeros.hpp"

struct race_characters {
  race::CharacterTable table;
};

struct race_zeros {
  race::ZeroSet zs;
};

struct race_corr {
  race::CorrelationMatrix corr;
};

struct race_sampler {
  std::unique_ptr<race::VectorSampler> sampler;
  double jitter = 0.0;
};

namespace {

thread_local std::string last_error;

race_status status_of(race::ErrorKind kind) {
  switch (kind) {
    case race::ErrorKind::Domain: return RACE_ERR_DOMAIN;
    case race::ErrorKind::Parse: return RACE_ERR_PARSE;
    case race::ErrorKind::Validation: return RACE_ERR_VALIDATION;
    case race::ErrorKind::Guard: return RACE_ERR_GUARD;
    case race::ErrorKind::Numeric: return RACE_ERR_NUMERIC;
    case race::ErrorKind::Io: return RACE_ERR_IO;
  }
  return RACE_ERR_INTERNAL;
}

struct ArgError {
  const char* what;
};

template <typename F>
race_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return RACE_OK;
  } catch (const race::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const ArgError& e) {
    last_error = e.what;
    return RACE_ERR_ARG;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return RACE_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return RACE_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return RACE_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) throw ArgError{what};
}

Eigen::MatrixXd matrix(const double* rowmajor, size_t n) {
  need(rowmajor, "null matrix");
  if (n == 0) throw ArgError{"empty matrix"};
  Eigen::MatrixXd m(n, n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) m(i, j) = rowmajor[i * n + j];
  return m;
}

void store(const Eigen::MatrixXd& m, double* out) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i * m.cols() + j] = m(i, j);
}

std::span<const int64_t> tuple(const int64_t* residues, size_t n) {
  if (n > 0) need(residues, "null residues");
  return {residues, n};
}

std::vector<race::OrderingEvent> parse_events(const char* const* specs, size_t m, size_t n) {
  if (m > 0) need(specs, "null event list");
  std::vector<race::OrderingEvent> events;
  for (size_t e = 0; e < m; ++e) {
    need(specs[e], "null event spec");
    events.push_back(race::OrderingEvent::parse(specs[e], n));
  }
  return events;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* race_last_error(void) { return last_error.c_str(); }

const char* race_status_name(race_status status) {
  switch (status) {
    case RACE_OK: return "ok";
    case RACE_ERR_DOMAIN: return "domain error";
    case RACE_ERR_PARSE: return "parse error";
    case RACE_ERR_VALIDATION: return "validation error";
    case RACE_ERR_GUARD: return "cost guard";
    case RACE_ERR_NUMERIC: return "numeric error";
    case RACE_ERR_IO: return "i/o error";
    case RACE_ERR_ARG: return "bad argument";
    case RACE_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* race_version(void) { return "1.0.0"; }

void race_string_free(char* s) { std::free(s); }

// ---- Characters ----------------------------------------------------------

race_status race_characters_create(uint64_t q, race_characters** out) {
  return guarded([&] {
    need(out, "null output");
    *out = new race_characters{race::CharacterTable(q)};
  });
}

void race_characters_free(race_characters* table) { delete table; }

uint64_t race_characters_modulus(const race_characters* t) { return t ? t->table.modulus() : 0; }

uint64_t race_characters_count(const race_characters* t) { return t ? t->table.size() : 0; }

race_status race_characters_indices(const race_characters* t, uint64_t* out, size_t capacity,
                                    size_t* count) {
  return guarded([&] {
    need(t, "null table");
    const auto idx = t->table.conrey_indices();
    if (count) *count = idx.size();
    if (out == nullptr) return;
    if (capacity < idx.size()) throw ArgError{"output buffer too small"};
    std::copy(idx.begin(), idx.end(), out);
  });
}

race_status race_character_value(const race_characters* t, uint64_t index, int64_t a, double* re,
                                 double* im) {
  return guarded([&] {
    need(t, "null table");
    need(re, "null output");
    need(im, "null output");
    const race::Complex v = t->table.evaluate(index, a);
    *re = v.real();
    *im = v.imag();
  });
}

// ---- Zeros ---------------------------------------------------------------

race_status race_zeros_load(const char* path, race_zeros** out) {
  return guarded([&] {
    need(path, "null path");
    need(out, "null output");
    *out = new race_zeros{race::load_zero_file(path)};
  });
}

race_status race_zeros_parse(const char* text, race_zeros** out) {
  return guarded([&] {
    need(text, "null text");
    need(out, "null output");
    *out = new race_zeros{race::parse_zero_text(text)};
  });
}

race_status race_zeros_synthesize(uint64_t q, uint64_t count, uint64_t seed, race_zeros** out) {
  return guarded([&] {
    need(out, "null output");
    const race::CharacterTable table(q);
    *out = new race_zeros{race::synthesize_zeros(table, count, seed)};
  });
}

void race_zeros_free(race_zeros* zs) { delete zs; }

uint64_t race_zeros_modulus(const race_zeros* zs) { return zs ? zs->zs.modulus() : 0; }
size_t race_zeros_block_count(const race_zeros* zs) { return zs ? zs->zs.blocks().size() : 0; }
size_t race_zeros_total(const race_zeros* zs) { return zs ? zs->zs.total_zeros() : 0; }
double race_zeros_height(const race_zeros* zs) { return zs ? zs->zs.height() : 0.0; }

int race_zeros_is_synthetic(const race_zeros* zs) {
  return zs && zs->zs.provenance() == race::Provenance::Synthetic;
}

int race_zeros_is_complete(const race_zeros* zs) { return zs && zs->zs.complete(); }

race_status race_zeros_serialize(const race_zeros* zs, char** out) {
  return guarded([&] {
    need(zs, "null zero set");
    need(out, "null output");
    *out = dup_string(race::serialize(zs->zs));
  });
}

// ---- Covariance ----------------------------------------------------------

race_status race_cq_shift(uint64_t q, int64_t a, int* out) {
  return guarded([&] {
    need(out, "null output");
    *out = race::cq_shift(q, a);
  });
}

race_status race_var_q(const race_zeros* zs, double* out) {
  return guarded([&] {
    need(zs, "null zero set");
    need(out, "null output");
    *out = race::var_q(zs->zs);
  });
}

race_status race_bq(const race_zeros* zs, int64_t a, int64_t b, double* out) {
  return guarded([&] {
    need(zs, "null zero set");
    need(out, "null output");
    const race::CharacterTable table(zs->zs.modulus());
    *out = race::bq(zs->zs, table, a, b);
  });
}

race_status race_lambda_term(uint64_t q, int64_t a, int64_t b, double* out) {
  return guarded([&] {
    need(out, "null output");
    *out = race::lambda_term(q, a, b);
  });
}

race_status race_m1_sum(uint64_t q, int64_t a, int64_t d, int allow_large, double* out) {
  return guarded([&] {
    need(out, "null output");
    *out = race::m1_sum(q, a, d, allow_large != 0);
  });
}

race_status race_m2_sum(uint64_t q, int64_t a, int64_t d, int allow_large, double* out) {
  return guarded([&] {
    need(out, "null output");
    *out = race::m2_sum(q, a, d, allow_large != 0);
  });
}

race_status race_corr_from_zeros(const race_zeros* zs, const int64_t* residues, size_t n,
                                 race_corr** out) {
  return guarded([&] {
    need(zs, "null zero set");
    need(out, "null output");
    const race::CharacterTable table(zs->zs.modulus());
    *out = new race_corr{race::correlation_matrix(zs->zs, table, tuple(residues, n))};
  });
}

race_status race_corr_from_matrix(const double* entries, size_t n, race_corr** out) {
  return guarded([&] {
    need(out, "null output");
    *out = new race_corr{race::correlation_matrix_from(matrix(entries, n))};
  });
}

void race_corr_free(race_corr* r) { delete r; }

size_t race_corr_size(const race_corr* r) { return r ? r->corr.size() : 0; }
double race_corr_var_q(const race_corr* r) { return r ? r->corr.var_q : 0.0; }
int race_corr_is_partial(const race_corr* r) { return r && r->corr.partial; }

race_status race_corr_entries(const race_corr* r, double* out, size_t capacity) {
  return guarded([&] {
    need(r, "null matrix");
    need(out, "null output");
    if (capacity < r->corr.size() * r->corr.size()) throw ArgError{"output buffer too small"};
    store(r->corr.r, out);
  });
}

race_status race_corr_min_eigenvalue(const race_corr* r, double* out) {
  return guarded([&] {
    need(r, "null matrix");
    need(out, "null output");
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r->corr.r, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) race::throw_numeric("eigenvalue solver failed");
    *out = es.eigenvalues().minCoeff();
  });
}

race_status race_corr_average(const race_corr* r, const size_t* I, size_t ni, const size_t* J,
                              size_t nj, double log_q, race_pair_report* out) {
  return guarded([&] {
    need(r, "null matrix");
    need(I, "null index set");
    need(J, "null index set");
    need(out, "null output");
    for (size_t t = 0; t < ni; ++t)
      if (I[t] >= r->corr.size()) throw ArgError{"index out of range"};
    for (size_t t = 0; t < nj; ++t)
      if (J[t] >= r->corr.size()) throw ArgError{"index out of range"};
    const auto avg = race::correlation_average(r->corr.r, {I, ni}, {J, nj}, log_q);
    *out = {avg.sum, avg.paper_form, avg.ratio};
  });
}

// ---- Events --------------------------------------------------------------

race_status race_event_info(const char* spec, size_t n, race_event_kind* kind, size_t* k,
                            double* prediction) {
  return guarded([&] {
    need(spec, "null event spec");
    const auto e = race::OrderingEvent::parse(spec, n);
    if (kind) {
      switch (e.kind()) {
        case race::OrderingEvent::Kind::FullOrdering: *kind = RACE_EVENT_FULL; break;
        case race::OrderingEvent::Kind::Leader: *kind = RACE_EVENT_LEADER; break;
        case race::OrderingEvent::Kind::FirstK: *kind = RACE_EVENT_FIRSTK; break;
      }
    }
    if (k) *k = e.k();
    if (prediction) *prediction = e.symmetric_prediction();
  });
}

// ---- Monte Carlo ---------------------------------------------------------

race_status race_sampler_z(const race_corr* r, race_sampler** out) {
  return guarded([&] {
    need(r, "null matrix");
    need(out, "null output");
    auto z = std::make_unique<race::ZSampler>(r->corr.r);
    const double jitter = z->jitter();
    *out = new race_sampler{std::move(z), jitter};
  });
}

race_status race_sampler_x(const race_zeros* zs, const int64_t* residues, size_t n,
                           int include_shifts, race_sampler** out) {
  return guarded([&] {
    need(zs, "null zero set");
    need(out, "null output");
    const race::CharacterTable table(zs->zs.modulus());
    *out = new race_sampler{
        std::make_unique<race::XSampler>(zs->zs, table, tuple(residues, n), include_shifts != 0),
        0.0};
  });
}

void race_sampler_free(race_sampler* s) { delete s; }

size_t race_sampler_dim(const race_sampler* s) { return s ? s->sampler->dim() : 0; }

double race_sampler_jitter(const race_sampler* s) { return s ? s->jitter : 0.0; }

race_status race_sampler_draw(const race_sampler* s, uint64_t seed, uint64_t stream, size_t count,
                              double* out) {
  return guarded([&] {
    need(s, "null sampler");
    if (count > 0) need(out, "null output");
    race::Philox rng(seed, stream);
    const size_t d = s->sampler->dim();
    for (size_t i = 0; i < count; ++i) s->sampler->draw(rng, {out + i * d, d});
  });
}

race_status race_mc_estimate(const race_sampler* s, const char* const* events, size_t n_events,
                             const race_mc_options* options, race_estimate* out) {
  return guarded([&] {
    need(s, "null sampler");
    need(options, "null options");
    if (n_events > 0) need(out, "null output");
    const auto parsed = parse_events(events, n_events, s->sampler->dim());
    race::McOptions opt;
    opt.samples = options->samples;
    opt.seed = options->seed;
    opt.workers = options->workers == 0 ? 1 : options->workers;
    if (options->chunk_size != 0) opt.chunk_size = options->chunk_size;
    const auto est = race::mc_event_probabilities(*s->sampler, race::Model::ZModel, parsed, opt);
    for (size_t e = 0; e < est.size(); ++e)
      out[e] = {est[e].value, est[e].std_error, est[e].samples, est[e].count, est[e].ties,
                est[e].prediction.value_or(0.0)};
  });
}

// ---- Sieve ---------------------------------------------------------------

race_status race_sieve_stream(uint64_t q, const int64_t* residues, size_t n, uint64_t limit,
                              unsigned workers, int allow_large, race_prime_callback callback,
                              void* user) {
  return guarded([&] {
    if (callback == nullptr) throw ArgError{"null callback"};
    race::race_counts(
        q, tuple(residues, n), limit,
        [&](uint64_t p, const race::RaceCounters& c) {
          callback(p, c.counts.data(), c.counts.size(), c.total, user);
        },
        workers == 0 ? 1 : workers, allow_large != 0);
  });
}

race_status race_sieve_counts(uint64_t q, const int64_t* residues, size_t n, uint64_t limit,
                              unsigned workers, int64_t* counts, uint64_t* total) {
  return guarded([&] {
    need(counts, "null output");
    const auto c = race::final_counts(q, tuple(residues, n), limit, workers == 0 ? 1 : workers);
    std::copy(c.counts.begin(), c.counts.end(), counts);
    if (total) *total = c.total;
  });
}

race_status race_error_vector(uint64_t q, const int64_t* counts, size_t n, uint64_t total,
                              double x, double* out) {
  return guarded([&] {
    need(counts, "null counts");
    need(out, "null output");
    race::RaceCounters c;
    c.q = q;
    c.counts.assign(counts, counts + n);
    c.total = total;
    const auto e = race::error_vector(c, x);
    std::copy(e.begin(), e.end(), out);
  });
}

race_status race_exact_log_density(uint64_t q, const int64_t* residues, size_t n,
                                   const char* const* events, size_t n_events, uint64_t limit,
                                   unsigned workers, int allow_large, race_log_density* out) {
  return guarded([&] {
    if (n_events > 0) need(out, "null output");
    const auto parsed = parse_events(events, n_events, n);
    const auto res = race::exact_log_densities(q, tuple(residues, n), parsed, limit,
                                               workers == 0 ? 1 : workers, allow_large != 0);
    for (size_t e = 0; e < res.size(); ++e)
      out[e] = {res[e].measure,     res[e].density,         res[e].density_logx,
                res[e].tie_measure, res[e].any_tie_measure, res[e].boundary_count};
  });
}

// ---- Analytics -----------------------------------------------------------

double race_phi_cdf(double x) { return race::phi_cdf(x); }

double race_log_phi_cdf(double x) { return race::log_phi_cdf(x); }

race_status race_phi_power_integral(uint64_t n, double a, double* out) {
  return guarded([&] {
    need(out, "null output");
    *out = race::phi_power_integral(n, a);
  });
}

race_status race_phi_power_integral_quadrature(uint64_t n, double a, double* out) {
  return guarded([&] {
    need(out, "null output");
    *out = race::phi_power_integral_quadrature(n, a);
  });
}

race_status race_ncr2_conditional_integral(uint64_t n, double epsilon, double a, double* out) {
  return guarded([&] {
    need(out, "null output");
    *out = race::ncr2_conditional_integral(n, epsilon, a);
  });
}

race_status race_leader_conditional_product(const double* r1, size_t m, double x, double* out) {
  return guarded([&] {
    if (m > 0) need(r1, "null correlations");
    need(out, "null output");
    *out = race::leader_conditional_product(std::vector<double>(r1, r1 + m), x);
  });
}

race_status race_gaussian_density(const double* c, size_t n, const double* x, int log_scale,
                                  double* out) {
  return guarded([&] {
    need(x, "null point");
    need(out, "null output");
    const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(x, static_cast<Eigen::Index>(n));
    *out = log_scale ? race::log_gaussian_density(matrix(c, n), v)
                     : race::gaussian_density(matrix(c, n), v);
  });
}

race_status race_near_identity(const double* a, size_t n, race_near_identity_report* out,
                               double* inverse, double* ratios) {
  return guarded([&] {
    need(out, "null output");
    const Eigen::MatrixXd m = matrix(a, n);
    const auto rep = race::near_identity_analysis(m);
    out->epsilon = rep.epsilon;
    out->det_exact = rep.det_exact;
    out->det_bound_ratio = rep.det_bound_ratio;
    out->max_inv_offdiag_ratio = rep.inv_offdiag_ratios.maxCoeff();
    out->lu_residual =
        (rep.inv_exact * m - Eigen::MatrixXd::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
    if (inverse) store(rep.inv_exact, inverse);
    if (ratios) store(rep.inv_offdiag_ratios, ratios);
  });
}

race_status race_firstk_transform(const double* r, size_t n, size_t k, const double* x, double* u,
                                  double* v_var, double* w, double* residual) {
  return guarded([&] {
    need(x, "null x");
    const Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(x, static_cast<Eigen::Index>(k));
    const auto t = race::firstk_transform(matrix(r, n), k, xv);
    if (u) store(t.u, u);
    if (v_var) std::copy(t.v_var.data(), t.v_var.data() + t.v_var.size(), v_var);
    if (w) std::copy(t.w.data(), t.w.data() + t.w.size(), w);
    if (residual) store(t.residual_corr, residual);
  });
}

race_status race_bound_value(const char* kind, const char* const* keys, const double* values,
                             size_t n_params, const double* x_corr, const double* w_corr,
                             const double* u, size_t n, double constant_c, race_bound* out) {
  return guarded([&] {
    need(kind, "null kind");
    need(out, "null output");
    if (n_params > 0) {
      need(keys, "null parameter names");
      need(values, "null parameter values");
    }
    race::BoundParams p;
    for (size_t i = 0; i < n_params; ++i) {
      need(keys[i], "null parameter name");
      p.scalars[keys[i]] = values[i];
    }
    if (x_corr) p.x_corr = matrix(x_corr, n);
    if (w_corr) p.w_corr = matrix(w_corr, n);
    if (u) p.u.assign(u, u + n);
    const auto rep = race::bound_value(race::parse_bound_kind(kind), p, constant_c);
    out->value = rep.value;
    out->absolute = rep.absolute.value_or(rep.value);
    out->constant_c = rep.constant_c;
    out->shape_only = rep.shape_only ? 1 : 0;
  });
}

race_status race_delta2_quadrature(double r12, uint64_t n, double* out) {
  return guarded([&] {
    need(out, "null output");
    *out = race::delta2_quadrature(r12, n);
  });
}

race_status race_biased_tuple(uint64_t q, uint64_t k, uint64_t n, uint64_t* out) {
  return guarded([&] {
    need(out, "null output");
    const auto t = race::biased_tuple(q, k, n);
    std::copy(t.begin(), t.end(), out);
  });
}

race_status race_choose_A(double n, double k, double* out) {
  return guarded([&] {
    need(out, "null output");
    *out = race::choose_A(n, k);
  });
}

// ---- Harmonic ------------------------------------------------------------

race_status race_g_function(double theta, uint64_t Q, double x, double* out) {
  return guarded([&] {
    need(out, "null output");
    *out = race::g_function(theta, Q, x);
  });
}

race_status race_pair_sum(const double* thetas, size_t R, const double* phis, size_t S, uint64_t Q,
                          double x, race_pair_report* out) {
  return guarded([&] {
    need(thetas, "null points");
    need(phis, "null points");
    need(out, "null output");
    const race::SpacedPoints a(std::vector<double>(thetas, thetas + R), x);
    const race::SpacedPoints b(std::vector<double>(phis, phis + S), x);
    const auto rep = race::pair_sum_report(a, b, Q, x);
    *out = {rep.sum, rep.paper_form, rep.ratio};
  });
}

}  // extern "C"
