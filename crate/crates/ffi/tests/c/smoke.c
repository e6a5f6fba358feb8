#include <math.h>
#include <stdio.h>
#include <string.h>

#include "ucl.h"

#define CHECK(cond)                                                   \
  do {                                                                \
    if (!(cond)) {                                                    \
      const char *e = ucl_last_error();                               \
      fprintf(stderr, "line %d: %s (%s)\n", __LINE__, #cond, e ? e : ""); \
      return 1;                                                       \
    }                                                                 \
  } while (0)

int main(void) {
  UclEloParams p = ucl_elo_params_default();
  double w;
  CHECK(ucl_expected_score(p, 1500.0, 1500.0, false, &w) == UCL_STATUS_OK);
  CHECK(fabs(w - 0.5924662305843318) < 1e-12);
  CHECK(ucl_expected_score(p, 1500.0, 1500.0, false, NULL) == UCL_STATUS_NULL_POINTER);
  CHECK(ucl_last_error() != NULL);

  double x[8] = {-2, -1, -0.5, 0, 0.3, 0.8, 1.5, 2};
  uint8_t y[8] = {0, 0, 1, 0, 1, 0, 1, 1};
  UclLogit *m = NULL;
  CHECK(ucl_logit_fit(x, y, 8, 1, &m) == UCL_STATUS_OK);
  CHECK(ucl_logit_n_coefficients(m) == 2);
  UclFitSummary s;
  CHECK(ucl_logit_summary(m, &s) == UCL_STATUS_OK);
  CHECK(s.n == 8 && s.log_lik_fit > s.log_lik_null);
  ucl_logit_free(m);

  UclSchedule *sched = NULL;
  CHECK(ucl_draw_league(7, 0, &sched) == UCL_STATUS_OK);
  CHECK(ucl_schedule_len(sched) == 144);
  UclFixture f;
  CHECK(ucl_schedule_fixture(sched, 0, &f) == UCL_STATUS_OK);
  CHECK(strlen(f.home) > 0 && strcmp(f.home, f.away) != 0);
  size_t bad = 1;
  CHECK(ucl_schedule_validate(sched, &bad) == UCL_STATUS_OK && bad == 0);
  ucl_schedule_free(sched);
  printf("ok\n");
  return 0;
}
