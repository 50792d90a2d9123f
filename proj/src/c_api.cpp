#include "mpaudit/mpaudit.h"

#include <exception>
#include <new>
#include <string>

#include "mpaudit/runner.hpp"

struct mpa_config {
  mpaudit::RunConfig cfg;
};

struct mpa_report {
  mpaudit::RunOutcome outcome;
  std::string path;
};

namespace {

thread_local std::string g_last_error;

static_assert(MPA_CAT_CERTIFIED == static_cast<int>(mpaudit::ExitCategory::Certified));
static_assert(MPA_CAT_INTERNAL == static_cast<int>(mpaudit::ExitCategory::Internal));
static_assert(MPA_CAT_CONFIG == static_cast<int>(mpaudit::ExitCategory::Config));
static_assert(MPA_CAT_IO == static_cast<int>(mpaudit::ExitCategory::Io));
static_assert(MPA_CAT_PREMISE_FAILED == static_cast<int>(mpaudit::ExitCategory::PremiseFailed));
static_assert(MPA_CAT_DEGENERATE_COORDINATEWISE == static_cast<int>(mpaudit::ExitCategory::DegenerateCoordinatewise));
static_assert(MPA_CAT_DATA == static_cast<int>(mpaudit::ExitCategory::Data));

mpa_status status_of(mpaudit::ErrorKind kind) noexcept {
  using mpaudit::ErrorKind;
  switch (kind) {
    case ErrorKind::InvalidArgument: return MPA_ERR_INVALID_ARGUMENT;
    case ErrorKind::EmptyDataset: return MPA_ERR_EMPTY_DATASET;
    case ErrorKind::InvalidPoint: return MPA_ERR_INVALID_POINT;
    case ErrorKind::SingularMatrix: return MPA_ERR_SINGULAR_MATRIX;
    case ErrorKind::LabelMismatch: return MPA_ERR_LABEL_MISMATCH;
    case ErrorKind::Pairing: return MPA_ERR_PAIRING;
    case ErrorKind::Undersampled: return MPA_ERR_UNDERSAMPLED;
    case ErrorKind::IllConditionedPoint: return MPA_ERR_ILL_CONDITIONED;
    case ErrorKind::InvalidDomain: return MPA_ERR_INVALID_DOMAIN;
    case ErrorKind::Parse: return MPA_ERR_PARSE;
    case ErrorKind::ConfigConstraint: return MPA_ERR_CONFIG;
    case ErrorKind::MalformedRow: return MPA_ERR_MALFORMED_ROW;
    case ErrorKind::Io: return MPA_ERR_IO;
  }
  return MPA_ERR_INTERNAL;
}

mpa_status fail(mpa_status s, const char* msg) {
  g_last_error = msg;
  return s;
}

// Runs fn, translating exceptions into status codes and the thread-local
// error message.
template <typename Fn>
mpa_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    return MPA_OK;
  } catch (const mpaudit::Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(MPA_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MPA_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MPA_ERR_INTERNAL, "unknown error");
  }
}

mpa_status null_arg(const char* what) { return fail(MPA_ERR_INVALID_ARGUMENT, what); }

mpa_status transform(double a, double c, double z1, double z2, double* out1, double* out2, bool inverse) {
  if (!out1 || !out2) return null_arg("output pointers must not be null");
  return guarded([&] {
    const mpaudit::MpaParams p(a, c);
    const mpaudit::Point2 z{z1, z2};
    const auto r = inverse ? mpaudit::mpa_inverse(p, z) : mpaudit::mpa_forward(p, z);
    *out1 = r.x1;
    *out2 = r.x2;
  });
}

mpa_status make_report(mpaudit::RunOutcome outcome, mpa_report** out) {
  auto* r = new (std::nothrow) mpa_report{std::move(outcome), {}};
  if (!r) return fail(MPA_ERR_INTERNAL, "out of memory");
  r->path = r->outcome.report_path.string();
  *out = r;
  return MPA_OK;
}

}  // namespace

extern "C" {

const char* mpa_version(void) { return mpaudit::kToolVersion; }

const char* mpa_last_error(void) { return g_last_error.c_str(); }

const char* mpa_status_name(mpa_status status) {
  switch (status) {
    case MPA_OK: return "ok";
    case MPA_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case MPA_ERR_EMPTY_DATASET: return "empty-dataset";
    case MPA_ERR_INVALID_POINT: return "invalid-point";
    case MPA_ERR_SINGULAR_MATRIX: return "singular-matrix";
    case MPA_ERR_LABEL_MISMATCH: return "label-mismatch";
    case MPA_ERR_PAIRING: return "pairing";
    case MPA_ERR_UNDERSAMPLED: return "undersampled";
    case MPA_ERR_ILL_CONDITIONED: return "ill-conditioned-point";
    case MPA_ERR_INVALID_DOMAIN: return "invalid-domain";
    case MPA_ERR_PARSE: return "parse";
    case MPA_ERR_CONFIG: return "config-constraint";
    case MPA_ERR_MALFORMED_ROW: return "malformed-row";
    case MPA_ERR_IO: return "io";
    case MPA_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

mpa_category mpa_status_category(mpa_status status) {
  switch (status) {
    case MPA_OK: return MPA_CAT_CERTIFIED;
    case MPA_ERR_INVALID_ARGUMENT:
    case MPA_ERR_SINGULAR_MATRIX:
    case MPA_ERR_PARSE:
    case MPA_ERR_CONFIG: return MPA_CAT_CONFIG;
    case MPA_ERR_IO: return MPA_CAT_IO;
    case MPA_ERR_EMPTY_DATASET:
    case MPA_ERR_INVALID_POINT:
    case MPA_ERR_LABEL_MISMATCH:
    case MPA_ERR_PAIRING:
    case MPA_ERR_UNDERSAMPLED:
    case MPA_ERR_ILL_CONDITIONED:
    case MPA_ERR_INVALID_DOMAIN:
    case MPA_ERR_MALFORMED_ROW: return MPA_CAT_DATA;
    case MPA_ERR_INTERNAL: return MPA_CAT_INTERNAL;
  }
  return MPA_CAT_INTERNAL;
}

const char* mpa_category_name(mpa_category category) {
  return mpaudit::to_string(static_cast<mpaudit::ExitCategory>(category));
}

mpa_status mpa_config_default(mpa_config** out) {
  if (!out) return null_arg("out must not be null");
  return guarded([&] { *out = new mpa_config{}; });
}

mpa_status mpa_config_load(const char* path, int allow_degenerate, mpa_config** out) {
  if (!path || !out) return null_arg("path and out must not be null");
  return guarded([&] { *out = new mpa_config{mpaudit::load_config(path, allow_degenerate != 0)}; });
}

mpa_status mpa_config_parse(const char* text, int allow_degenerate, mpa_config** out) {
  if (!text || !out) return null_arg("text and out must not be null");
  return guarded([&] { *out = new mpa_config{mpaudit::parse_config(text, allow_degenerate != 0)}; });
}

void mpa_config_free(mpa_config* cfg) { delete cfg; }

mpa_status mpa_config_set_seed(mpa_config* cfg, uint64_t seed) {
  if (!cfg) return null_arg("config must not be null");
  cfg->cfg.seed = seed;
  return MPA_OK;
}

mpa_status mpa_config_set_output_dir(mpa_config* cfg, const char* dir) {
  if (!cfg || !dir) return null_arg("config and dir must not be null");
  if (*dir == '\0') return fail(MPA_ERR_CONFIG, "output_dir: output_dir non-empty");
  return guarded([&] { cfg->cfg.output_dir = dir; });
}

mpa_status mpa_config_set_render(mpa_config* cfg, int render) {
  if (!cfg) return null_arg("config must not be null");
  cfg->cfg.render = render != 0;
  return MPA_OK;
}

mpa_status mpa_config_get_seed(const mpa_config* cfg, uint64_t* seed) {
  if (!cfg || !seed) return null_arg("config and seed must not be null");
  *seed = cfg->cfg.seed;
  return MPA_OK;
}

mpa_status mpa_config_get_n(const mpa_config* cfg, uint64_t* n) {
  if (!cfg || !n) return null_arg("config and n must not be null");
  *n = cfg->cfg.n;
  return MPA_OK;
}

const char* mpa_config_output_dir(const mpa_config* cfg) { return cfg ? cfg->cfg.output_dir.c_str() : nullptr; }

mpa_status mpa_run(const mpa_config* cfg, mpa_report** out) {
  if (!cfg || !out) return null_arg("config and out must not be null");
  mpaudit::RunOutcome outcome;
  const mpa_status s = guarded([&] { outcome = mpaudit::cmd_run(cfg->cfg); });
  if (s != MPA_OK) return s;
  return make_report(std::move(outcome), out);
}

mpa_status mpa_figures(const mpa_config* cfg) {
  if (!cfg) return null_arg("config must not be null");
  return guarded([&] { (void)mpaudit::cmd_figures(cfg->cfg); });
}

mpa_status mpa_audit_external(const mpa_config* cfg, const char* z_path, const char* zprime_path, mpa_report** out) {
  if (!cfg || !z_path || !zprime_path || !out) return null_arg("arguments must not be null");
  mpaudit::RunOutcome outcome;
  const mpa_status s = guarded([&] { outcome = mpaudit::cmd_audit_external(z_path, zprime_path, cfg->cfg); });
  if (s != MPA_OK) return s;
  return make_report(std::move(outcome), out);
}

void mpa_report_free(mpa_report* report) { delete report; }

int mpa_report_certified(const mpa_report* report) {
  return report && report->outcome.report.counterexample_certified() ? 1 : 0;
}

int mpa_report_premises_pass(const mpa_report* report) {
  return report && report->outcome.report.premises_pass() ? 1 : 0;
}

int mpa_report_coordinatewise(const mpa_report* report) {
  return report && report->outcome.report.conclusion.coordinatewise ? 1 : 0;
}

double mpa_report_uniformity_pvalue(const mpa_report* report) {
  return report ? report->outcome.report.uniformity_pvalue_zprime : 0.0;
}

mpa_category mpa_report_category(const mpa_report* report) {
  if (!report) return MPA_CAT_INTERNAL;
  return static_cast<mpa_category>(report->outcome.category);
}

const char* mpa_report_json(const mpa_report* report) { return report ? report->outcome.report_json.c_str() : nullptr; }

const char* mpa_report_path(const mpa_report* report) { return report ? report->path.c_str() : nullptr; }

mpa_status mpa_forward(double a, double c, double z1, double z2, double* out1, double* out2) {
  return transform(a, c, z1, z2, out1, out2, false);
}

mpa_status mpa_inverse(double a, double c, double z1, double z2, double* out1, double* out2) {
  return transform(a, c, z1, z2, out1, out2, true);
}

}  // extern "C"
