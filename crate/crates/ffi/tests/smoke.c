#include <math.h>
#include <stdio.h>
#include <string.h>

#include "trajadv.h"

#define CHECK(cond)                                                  \
    do {                                                             \
        if (!(cond)) {                                               \
            const char *m = trajadv_last_error_message();            \
            fprintf(stderr, "line %d: %s (%s)\n", __LINE__, #cond,   \
                    m ? m : "no error message");                     \
            return 1;                                                \
        }                                                            \
    } while (0)

int main(void) {
    TrajadvConfig *cfg = NULL;
    TrajadvRun *run = NULL;
    TrajadvSummary sum;
    TrajadvRow row;
    TrajadvDecomposition d;
    double tau[6];
    double psi_dot = 0.0;
    const double f[6] = {2, 3, 0, 0, 0, 0};
    const double v[6] = {1, 0, 0, 0, 0, 0};

    CHECK(trajadv_config_from_toml("duration = 0.1\n", &cfg) == TRAJADV_STATUS_OK);
    CHECK(trajadv_run(cfg, &run) == TRAJADV_STATUS_OK);
    CHECK(trajadv_run_row_count(run) == 100);
    CHECK(trajadv_run_tau_len(run) == 6);
    CHECK(trajadv_run_row(run, 99, &row) == TRAJADV_STATUS_OK);
    CHECK(fabs(row.t - 0.099) < 1e-12 && row.phase == 1);
    CHECK(trajadv_run_row_tau(run, 99, tau, 6) == TRAJADV_STATUS_OK);
    CHECK(trajadv_run_row(run, 100, &row) == TRAJADV_STATUS_INVALID_ARGUMENT);
    CHECK(trajadv_run_summary(run, &sum) == TRAJADV_STATUS_OK);
    CHECK(sum.steps == 100 && !sum.reached_goal && isnan(sum.time_to_goal));
    trajadv_run_free(run);
    trajadv_config_free(cfg);

    CHECK(trajadv_config_from_toml("bogus = 1\n", &cfg) == TRAJADV_STATUS_CONFIG);
    CHECK(strstr(trajadv_last_error_message(), "bogus") != NULL);

    CHECK(trajadv_decompose(f, v, 1e-9, &d) == TRAJADV_STATUS_OK);
    CHECK(d.alpha == 2.0 && d.beta == 3.0 && d.perp_dir[1] == 1.0);
    CHECK(trajadv_psi_dot_update(f, v, 3.0, 1e-9, &psi_dot) == TRAJADV_STATUS_OK);
    CHECK(psi_dot == 2.0);
    CHECK(trajadv_psi_dot_update(f, v, 0.5, 1e-9, &psi_dot) == TRAJADV_STATUS_CONFIG);
    printf("ok %s\n", trajadv_version());
    return 0;
}
