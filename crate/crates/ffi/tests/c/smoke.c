#include <math.h>
#include <stdio.h>
#include <string.h>

#include "freefield.h"

int main(void) {
    FfConfig *cfg = NULL;
    if (ff_config_from_json("{\"suites\": [\"geometry\"], \"seed\": 4}", &cfg) != FF_STATUS_OK) {
        fprintf(stderr, "config: %s\n", ff_last_error());
        return 1;
    }
    FfRun *run = NULL;
    if (ff_run(cfg, &run) != FF_STATUS_OK || !ff_run_passed(run)) {
        return 2;
    }
    char *json = NULL;
    if (ff_run_report_json(run, &json) != FF_STATUS_OK || strstr(json, "\"pass\": true") == NULL) {
        return 3;
    }
    printf("%zu checks\n", ff_run_check_count(run));
    ff_string_free(json);
    ff_run_free(run);
    ff_config_free(cfg);

    FfDensity *d = NULL;
    if (ff_density_new(2.0, 0.0, &d) != FF_STATUS_OK) {
        return 4;
    }
    double v, rho;
    ff_density_sample(d, ff_density_len(d) / 2, &v, &rho);
    if (!(fabs(ff_density_rho(d, v) - rho) <= 1e-12 * rho)) {
        return 5;
    }
    ff_density_free(d);

    if (ff_density_new(1.0, 3.0, &d) != FF_STATUS_INPUT && ff_density_new(1.0, 3.0, &d) != FF_STATUS_DEGENERATE) {
        return 6;
    }
    printf("version %s\n", ff_version());
    return 0;
}
