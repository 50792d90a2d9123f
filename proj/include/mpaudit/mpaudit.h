/* C interface to the mpaudit library.
 *
 * Objects are opaque handles created and released through this API. Every
 * fallible call returns an mpa_status; on failure, mpa_last_error() holds a
 * thread-local message describing the most recent error on the calling
 * thread. Strings returned by the library are owned by it and stay valid
 * until the owning handle is freed (or, for mpa_last_error, until the next
 * failing call on the same thread).
 */
#ifndef MPAUDIT_MPAUDIT_H
#define MPAUDIT_MPAUDIT_H

#include <stdint.h>

#if defined(_WIN32)
#  if defined(MPAUDIT_BUILDING)
#    define MPA_API __declspec(dllexport)
#  else
#    define MPA_API __declspec(dllimport)
#  endif
#else
#  define MPA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mpa_status {
  MPA_OK = 0,
  MPA_ERR_INVALID_ARGUMENT = 1,
  MPA_ERR_EMPTY_DATASET = 2,
  MPA_ERR_INVALID_POINT = 3,
  MPA_ERR_SINGULAR_MATRIX = 4,
  MPA_ERR_LABEL_MISMATCH = 5,
  MPA_ERR_PAIRING = 6,
  MPA_ERR_UNDERSAMPLED = 7,
  MPA_ERR_ILL_CONDITIONED = 8,
  MPA_ERR_INVALID_DOMAIN = 9,
  MPA_ERR_PARSE = 10,
  MPA_ERR_CONFIG = 11,
  MPA_ERR_MALFORMED_ROW = 12,
  MPA_ERR_IO = 13,
  MPA_ERR_INTERNAL = 99
} mpa_status;

/* Process exit categories used by the command-line tool. */
typedef enum mpa_category {
  MPA_CAT_CERTIFIED = 0,
  MPA_CAT_INTERNAL = 1,
  MPA_CAT_CONFIG = 2,
  MPA_CAT_IO = 3,
  MPA_CAT_PREMISE_FAILED = 4,
  MPA_CAT_DEGENERATE_COORDINATEWISE = 5,
  MPA_CAT_DATA = 6
} mpa_category;

typedef struct mpa_config mpa_config;
typedef struct mpa_report mpa_report;

MPA_API const char* mpa_version(void);
MPA_API const char* mpa_last_error(void);
MPA_API const char* mpa_status_name(mpa_status status);
MPA_API mpa_category mpa_status_category(mpa_status status);
MPA_API const char* mpa_category_name(mpa_category category);

/* Configuration. allow_degenerate admits a = 0 (test fixture only). */
MPA_API mpa_status mpa_config_default(mpa_config** out);
MPA_API mpa_status mpa_config_load(const char* path, int allow_degenerate, mpa_config** out);
MPA_API mpa_status mpa_config_parse(const char* text, int allow_degenerate, mpa_config** out);
MPA_API void mpa_config_free(mpa_config* cfg);
MPA_API mpa_status mpa_config_set_seed(mpa_config* cfg, uint64_t seed);
MPA_API mpa_status mpa_config_set_output_dir(mpa_config* cfg, const char* dir);
MPA_API mpa_status mpa_config_set_render(mpa_config* cfg, int render);
MPA_API mpa_status mpa_config_get_seed(const mpa_config* cfg, uint64_t* seed);
MPA_API mpa_status mpa_config_get_n(const mpa_config* cfg, uint64_t* n);
MPA_API const char* mpa_config_output_dir(const mpa_config* cfg);

/* Commands. Each writes its files under the configured output directory. */
MPA_API mpa_status mpa_run(const mpa_config* cfg, mpa_report** out);
MPA_API mpa_status mpa_figures(const mpa_config* cfg);
MPA_API mpa_status mpa_audit_external(const mpa_config* cfg, const char* z_path, const char* zprime_path,
                                      mpa_report** out);

/* Report accessors. */
MPA_API void mpa_report_free(mpa_report* report);
MPA_API int mpa_report_certified(const mpa_report* report);
MPA_API int mpa_report_premises_pass(const mpa_report* report);
MPA_API int mpa_report_coordinatewise(const mpa_report* report);
MPA_API double mpa_report_uniformity_pvalue(const mpa_report* report);
MPA_API mpa_category mpa_report_category(const mpa_report* report);
MPA_API const char* mpa_report_json(const mpa_report* report);
MPA_API const char* mpa_report_path(const mpa_report* report);

/* Pointwise transforms. */
MPA_API mpa_status mpa_forward(double a, double c, double z1, double z2, double* out1, double* out2);
MPA_API mpa_status mpa_inverse(double a, double c, double z1, double z2, double* out1, double* out2);

#ifdef __cplusplus
}
#endif

#endif /* MPAUDIT_MPAUDIT_H */
