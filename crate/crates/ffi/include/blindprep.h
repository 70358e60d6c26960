/* Copyright 2026 The blindprep Authors. Licensed under the Apache License, Version 2.0. */
/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef BLINDPREP_H
#define BLINDPREP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define BP_OK 0

#define BP_ERR_INPUT 1

#define BP_ERR_UNKNOWN_LABEL 2

#define BP_ERR_TOO_MANY_QUBITS 3

#define BP_ERR_DEGENERATE_BRANCH 4

#define BP_ERR_BRANCH_WORD 5

#define BP_ERR_STRUCTURAL 6

#define BP_ERR_SEQUENCING 7

#define BP_ERR_CONTRACT 8

#define BP_ERR_ESTIMATION 9

#define BP_ERR_CONFIG 10

/**
 * A required pointer argument was null.
 */
#define BP_ERR_NULL 100

/**
 * A string argument was not valid UTF-8.
 */
#define BP_ERR_UTF8 101

/**
 * The library panicked; the handle arguments should be treated as lost.
 */
#define BP_ERR_PANIC 102

#define BP_BRANCHES_EXHAUSTIVE 0

#define BP_BRANCHES_SAMPLE 1

#define BP_BRANCHES_ZERO 2

#define BP_PROTOCOL_MIN_CLUSTER_X 0

#define BP_PROTOCOL_MIN_CLUSTER_Y 1

#define BP_PROTOCOL_MIN_CLUSTER_Z 2

#define BP_PROTOCOL_PREPARE 3

/**
 * Opaque experiment parameters.
 */
typedef struct BpParams BpParams;

/**
 * Opaque measurement pattern.
 */
typedef struct BpPattern BpPattern;

/**
 * Opaque pure state.
 */
typedef struct BpState BpState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, empty if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *bp_last_error(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void bp_string_free(char *s);

/**
 * Default parameter set.
 */
BpParams *bp_params_new(void);

/**
 * Parses a `key = value` config text.
 *
 * # Safety
 * `config` must be a NUL-terminated string and `out` writable.
 */
int32_t bp_params_from_config(const char *config, BpParams **out_params);

/**
 * # Safety
 * `p` must come from this library and not have been freed.
 */
void bp_params_free(BpParams *p);

/**
 * Transmittance at distance `l_km`.
 *
 * # Safety
 * `p` must be a live handle and `out_t` writable.
 */
int32_t bp_transmittance(const BpParams *p, double l_km, double *out_t);

/**
 * Expected repetitions of an uncoded run of `s` qubits at error rate `e`.
 *
 * # Safety
 * `out_k` must be writable.
 */
int32_t bp_repetitions(double e, double s, double *out_k);

/**
 * Distance sweep as CSV text; release it with [`bp_string_free`].
 *
 * # Safety
 * `p` must be a live handle and `out_csv` writable.
 */
int32_t bp_sweep_csv(const BpParams *p, double l_min, double l_max, double step, char **out_csv);

/**
 * # Safety
 * `out_pattern` must be writable.
 */
int32_t bp_pattern_hadamard(BpPattern **out_pattern);

/**
 * # Safety
 * `out_pattern` must be writable.
 */
int32_t bp_pattern_rotation(double xi, double eta, double zeta, BpPattern **out_pattern);

/**
 * CNOT from wire 0 onto wire `separation`.
 *
 * # Safety
 * `out_pattern` must be writable.
 */
int32_t bp_pattern_cnot(uint32_t separation, BpPattern **out_pattern);

/**
 * Parses the text pattern format.
 *
 * # Safety
 * `src` must be a NUL-terminated string and `out_pattern` writable.
 */
int32_t bp_pattern_parse(const char *src, BpPattern **out_pattern);

/**
 * Text form of a pattern; release it with [`bp_string_free`].
 *
 * # Safety
 * `p` must be a live handle and `out_text` writable.
 */
int32_t bp_pattern_to_text(const BpPattern *p, char **out_text);

/**
 * Measured node count, or 0 for a null handle.
 *
 * # Safety
 * `p` must be null or a live handle.
 */
size_t bp_pattern_num_measured(const BpPattern *p);

/**
 * Smallest fidelity of the corrected pattern against its declared unitary
 * over the selected branches (`BP_BRANCHES_*`). `samples` and `seed` are
 * only read for sampled branches.
 *
 * # Safety
 * `p` must be a live handle and `out_min_fidelity` writable.
 */
int32_t bp_pattern_verify(const BpPattern *p,
                          int32_t branches,
                          size_t samples,
                          uint64_t seed,
                          double *out_min_fidelity);

/**
 * # Safety
 * `p` must come from this library and not have been freed.
 */
void bp_pattern_free(BpPattern *p);

/**
 * Circuit-model encoding of `|+_theta>`.
 *
 * # Safety
 * `out_state` must be writable.
 */
int32_t bp_encode_circuit(double theta, BpState **out_state);

/**
 * Encoded `|+_theta>` prepared by cluster measurements, on the all-zero
 * branch when `zero_branch` is set and on a `seed`-sampled branch otherwise.
 *
 * # Safety
 * `out_state` must be writable.
 */
int32_t bp_prepare_encoded(double theta, uint64_t seed, bool zero_branch, BpState **out_state);

/**
 * # Safety
 * `s` must be null or a live handle.
 */
size_t bp_state_num_qubits(const BpState *s);

/**
 * Copies the `2^n` amplitudes into `re` and `im`, first qubit most
 * significant.
 *
 * # Safety
 * `s` must be a live handle; `re` and `im` must each hold `len` doubles.
 */
int32_t bp_state_amplitudes(const BpState *s, double *re, double *im, size_t len);

/**
 * `|<a|b>|^2`.
 *
 * # Safety
 * `a` and `b` must be live handles and `out_f` writable.
 */
int32_t bp_state_fidelity(const BpState *a, const BpState *b, double *out_f);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void bp_state_free(BpState *s);

/**
 * Encodes `|+_theta>`, applies `pauli` (`'X'`, `'Y'` or `'Z'`) at block
 * position `pos`, extracts the syndrome and corrects. Reports both
 * syndromes and the fidelity with the clean block.
 *
 * # Safety
 * The three output pointers must be writable.
 */
int32_t bp_correct(char pauli,
                   uint32_t pos,
                   double theta,
                   uint64_t seed,
                   uint8_t *out_bit_syndrome,
                   uint8_t *out_phase_syndrome,
                   double *out_fidelity);

/**
 * Blindness check over the eight protocol angles (`BP_PROTOCOL_*`).
 * `paths` sampled runs per angle are used for protocols too long to
 * enumerate.
 *
 * # Safety
 * The output pointers must be writable.
 */
int32_t bp_blindness(int32_t protocol,
                     double epsilon,
                     size_t paths,
                     uint64_t seed,
                     double *out_max_tv,
                     double *out_max_trace_distance,
                     bool *out_pass);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BLINDPREP_H */
