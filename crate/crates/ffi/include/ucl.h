#ifndef UCL_H
#define UCL_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum UclStatus {
  UCL_STATUS_OK = 0,
  UCL_STATUS_NULL_POINTER = 1,
  UCL_STATUS_INVALID_INPUT = 2,
  // The model could not be fitted (separation, singular design, one class).
  UCL_STATUS_FIT_FAILED = 3,
  // No schedule satisfies the draw rules.
  UCL_STATUS_INFEASIBLE = 4,
  UCL_STATUS_SEARCH_LIMIT = 5,
  UCL_STATUS_OUT_OF_RANGE = 6,
  UCL_STATUS_PANIC = 7,
} UclStatus;

// A fitted binary logistic model.
typedef struct UclLogit UclLogit;

// A drawn schedule together with the pots it was drawn from.
typedef struct UclSchedule UclSchedule;

// Elo settings. The margin-of-victory table is fixed to the library default.
typedef struct UclEloParams {
  double scale;
  double k_factor;
  double home_advantage;
  double initial_rating;
} UclEloParams;

typedef struct UclCoefficient {
  double estimate;
  double std_error;
  double z;
  double p_value;
} UclCoefficient;

typedef struct UclFitSummary {
  size_t n;
  double log_lik_null;
  double log_lik_fit;
  double cox_snell_r2;
  double nagelkerke_r2;
  // NaN when undefined.
  double mcfadden_r2;
  // Percent classified correctly at cut 0.5.
  double classification_rate;
  double auc;
} UclFitSummary;

typedef struct UclFixture {
  // Owned by the schedule handle; valid until it is freed.
  const char *home;
  const char *away;
  size_t away_pot;
} UclFixture;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer
// stays valid until the next call into this library from the same thread.
const char *ucl_last_error(void);

struct UclEloParams ucl_elo_params_default(void);

// Expected score of the home side.
//
// # Safety
// `out` must be NULL or point to writable memory for one double.
enum UclStatus ucl_expected_score(struct UclEloParams params,
                                  double r_home,
                                  double r_away,
                                  bool neutral,
                                  double *out);

// Ratings of both sides after one match.
//
// # Safety
// `new_home` and `new_away` must be NULL or point to writable doubles.
enum UclStatus ucl_elo_update(struct UclEloParams params,
                              double r_home,
                              double r_away,
                              uint32_t home_goals,
                              uint32_t away_goals,
                              bool neutral,
                              double *new_home,
                              double *new_away);

// Fits `y ~ 1 + x` where `x` is row-major with `n_features` columns.
// Coefficient 0 is the intercept; coefficient `j + 1` belongs to column `j`.
//
// # Safety
// `x` must hold `n_rows * n_features` doubles and `y` `n_rows` bytes (0 or 1);
// `out` must point to writable memory for one handle.
enum UclStatus ucl_logit_fit(const double *x,
                             const uint8_t *y,
                             size_t n_rows,
                             size_t n_features,
                             struct UclLogit **out);

// Number of coefficients, intercept included. Returns 0 for NULL.
//
// # Safety
// `model` must be NULL or a live handle from [`ucl_logit_fit`].
size_t ucl_logit_n_coefficients(const struct UclLogit *model);

// # Safety
// `model` must be NULL or a live handle; `out` NULL or writable.
enum UclStatus ucl_logit_coefficient(const struct UclLogit *model,
                                     size_t index,
                                     struct UclCoefficient *out);

// # Safety
// `model` must be NULL or a live handle; `out` NULL or writable.
enum UclStatus ucl_logit_summary(const struct UclLogit *model, struct UclFitSummary *out);

// # Safety
// `model` must be NULL or a handle from [`ucl_logit_fit`] not yet freed.
void ucl_logit_free(struct UclLogit *model);

// Area under the ROC curve; ties between classes count one half.
//
// # Safety
// `scores` and `labels` must hold `n` values; `out` must be writable.
enum UclStatus ucl_roc_auc(const double *scores, const uint8_t *labels, size_t n, double *out);

// Draws the bundled 36-club league. `node_limit` 0 keeps the default.
//
// # Safety
// `out` must point to writable memory for one handle.
enum UclStatus ucl_draw_league(uint64_t seed, uint64_t node_limit, struct UclSchedule **out);

// Draws from a `club,pot,association` CSV given as a NUL-terminated string.
//
// # Safety
// `pots_csv` must be a valid C string; `out` writable for one handle.
enum UclStatus ucl_draw_from_csv(const char *pots_csv,
                                 bool allow_exception,
                                 uint64_t seed,
                                 uint64_t node_limit,
                                 struct UclSchedule **out);

// Number of fixtures. Returns 0 for NULL.
//
// # Safety
// `s` must be NULL or a live schedule handle.
size_t ucl_schedule_len(const struct UclSchedule *s);

// # Safety
// `s` must be NULL or a live schedule handle; `out` NULL or writable.
enum UclStatus ucl_schedule_fixture(const struct UclSchedule *s,
                                    size_t index,
                                    struct UclFixture *out);

// Whether the draw had to allow same-association fixtures.
//
// # Safety
// `s` must be NULL or a live schedule handle.
bool ucl_schedule_exceptions_used(const struct UclSchedule *s);

// Re-checks the schedule against the rules of its pots. `violations`
// receives the number of broken rules.
//
// # Safety
// `s` must be NULL or a live schedule handle; `violations` NULL or writable.
enum UclStatus ucl_schedule_validate(const struct UclSchedule *s, size_t *violations);

// # Safety
// `s` must be NULL or a handle not yet freed.
void ucl_schedule_free(struct UclSchedule *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UCL_H */
