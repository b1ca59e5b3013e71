#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include "boundstate.h"

#define CHECK(cond) do { if (!(cond)) { fprintf(stderr, "line %d: %s\n", __LINE__, #cond); return 1; } } while (0)

int main(void) {
    BsConfig *cfg = NULL;
    CHECK(bs_config_new(3, 2.0, 3.0, &cfg) == BS_STATUS_OK);
    CHECK(fabs(bs_config_critical_exponent(cfg) - 5.0) < 1e-15);

    double phi0 = 0.0;
    CHECK(bs_bubble_radial(cfg, 1.0, 0.0, &phi0) == BS_STATUS_OK);
    CHECK(fabs(phi0 - pow(3.0, 0.25)) < 1e-14);

    BsProfile *prof = NULL;
    CHECK(bs_shoot(cfg, 1.0, 2.0, 0.0, &prof) == BS_STATUS_OK);
    CHECK(bs_profile_kind(prof) == BS_SHOOT_KIND_POSITIVITY_FAILURE_U);
    CHECK(fabs(bs_profile_event_radius(prof) - 1.861433885) < 1e-6);
    size_t len = bs_profile_len(prof);
    double *r = malloc(len * sizeof(double));
    CHECK(bs_profile_copy(prof, r, NULL, NULL, len) == BS_STATUS_OK);
    CHECK(r[0] > 0.0 && r[len - 1] > r[0]);
    free(r);
    bs_profile_free(prof);

    BsConfig *bad = NULL;
    CHECK(bs_config_new(3, 2.0, 2.0, &bad) == BS_STATUS_INVALID_CONFIG);
    CHECK(bad == NULL);
    CHECK(bs_last_error_message() != NULL);

    bs_config_free(cfg);
    printf("ok %s\n", bs_version());
    return 0;
}
