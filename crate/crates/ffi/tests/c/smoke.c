/* Copyright 2026 The blindprep Authors. Licensed under the Apache License, Version 2.0. */
#include <math.h>
#include <stdio.h>
#include "blindprep.h"

int main(void) {
    BpParams *p = bp_params_new();
    double t = 0.0;
    if (bp_transmittance(p, 50.0, &t) != BP_OK || fabs(t - 0.0045) > 1e-12) {
        fprintf(stderr, "transmittance %g: %s\n", t, bp_last_error());
        return 1;
    }
    bp_params_free(p);

    BpPattern *h = NULL;
    double f = 0.0;
    if (bp_pattern_hadamard(&h) != BP_OK || bp_pattern_verify(h, BP_BRANCHES_EXHAUSTIVE, 0, 0, &f) != BP_OK) {
        fprintf(stderr, "hadamard: %s\n", bp_last_error());
        return 1;
    }
    bp_pattern_free(h);
    if (f < 1.0 - 1e-10) {
        fprintf(stderr, "hadamard fidelity %.17g\n", f);
        return 1;
    }

    if (bp_pattern_cnot(0, &h) != BP_ERR_INPUT) {
        fprintf(stderr, "separation 0 accepted\n");
        return 1;
    }
    printf("ok\n");
    return 0;
}
