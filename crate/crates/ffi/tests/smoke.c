#include <math.h>
#include <stdio.h>
#include <string.h>

#include "ptreadout.h"

#define CHECK(cond)                                                   \
    do {                                                              \
        if (!(cond)) {                                                \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__,  \
                    #cond, ptreadout_last_error());                   \
            return 1;                                                 \
        }                                                             \
    } while (0)

int main(void) {
    PtreadoutParams *p = ptreadout_params_from_preset("fig3d");
    CHECK(p != NULL);

    PtreadoutComplex s;
    bool flagged = true;
    CHECK(ptreadout_s21(p, PTREADOUT_BRANCH_EXCITED, 0.0, &s, &flagged) == PTREADOUT_STATUS_OK);
    CHECK(!flagged);
    CHECK(fabs(s.re * s.re + s.im * s.im - 3125.0) < 1e-6);

    PtreadoutComplex values[3];
    size_t n = 0;
    CHECK(ptreadout_eigenvalues(p, PTREADOUT_BRANCH_GROUND, values, 3, &n) == PTREADOUT_STATUS_OK);
    CHECK(n == 2);

    PtreadoutEp ep;
    CHECK(ptreadout_find_ep(p, &ep) == PTREADOUT_STATUS_OK);
    CHECK(ep.coupling == 1.0 && ep.order == 2 && ep.analytic);

    CHECK(ptreadout_params_set(p, "kappa_a", -1.0) == PTREADOUT_STATUS_OK);
    CHECK(ptreadout_s21(p, PTREADOUT_BRANCH_GROUND, 0.0, &s, NULL) == PTREADOUT_STATUS_INVALID_PARAMS);
    CHECK(strstr(ptreadout_last_error(), "kappa_a must be positive") != NULL);

    ptreadout_params_free(p);
    printf("ok %s\n", ptreadout_version());
    return 0;
}
