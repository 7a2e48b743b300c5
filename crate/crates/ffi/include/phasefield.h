/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef PHASEFIELD_H
#define PHASEFIELD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible function.
typedef enum PfStatus {
  PF_STATUS_OK = 0,
  PF_STATUS_NULL_POINTER = 1,
  PF_STATUS_INVALID_UTF8 = 2,
  PF_STATUS_CONFIG = 3,
  PF_STATUS_MISSING_FILE = 4,
  PF_STATUS_IO = 5,
  PF_STATUS_DIVERGED = 6,
  PF_STATUS_NUMERIC = 7,
  PF_STATUS_UNSUPPORTED = 8,
  PF_STATUS_BUFFER_TOO_SMALL = 9,
  PF_STATUS_NOT_DEFINED = 10,
  PF_STATUS_PANIC = 11,
} PfStatus;

// Opaque simulation handle.
typedef struct PfSimulation PfSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *pf_version(void);

// Message describing the last failure on this thread, or NULL.
//
// The pointer stays valid until the next call into this library on the
// same thread.
const char *pf_last_error_message(void);

// Evaluates `phi_1(z) = (e^z - 1) / z` for complex `z = re + i im`.
//
// # Safety
// `out_re` and `out_im` must be valid for writes.
enum PfStatus pf_phi1(double re, double im, double *out_re, double *out_im);

// Creates a simulation from configuration text (`key = value` lines).
//
// # Safety
// `config_text` must be a NUL-terminated string and `out_sim` valid for writes.
enum PfStatus pf_simulation_new(const char *config_text, struct PfSimulation **out_sim);

// Releases a simulation; NULL is ignored.
//
// # Safety
// `sim` must come from [`pf_simulation_new`] and not be used afterwards.
void pf_simulation_free(struct PfSimulation *sim);

// Advances by `steps` steps. After divergence every further call fails.
//
// # Safety
// `sim` must be a live handle.
enum PfStatus pf_simulation_advance(struct PfSimulation *sim, uint64_t steps);

// Advances to the first step at or after time `t`.
//
// # Safety
// `sim` must be a live handle.
enum PfStatus pf_simulation_advance_to(struct PfSimulation *sim, double t);

// Current simulated time (`step_index * h`).
//
// # Safety
// `sim` must be a live handle and `out_time` valid for writes.
enum PfStatus pf_simulation_time(const struct PfSimulation *sim, double *out_time);

// Number of steps taken so far.
//
// # Safety
// `sim` must be a live handle and `out_steps` valid for writes.
enum PfStatus pf_simulation_step_index(const struct PfSimulation *sim, uint64_t *out_steps);

// Number of grid values (`n` in 1D, `n * n` in 2D).
//
// # Safety
// `sim` must be a live handle and `out_len` valid for writes.
enum PfStatus pf_simulation_field_len(const struct PfSimulation *sim, size_t *out_len);

// Copies the real-space field (row-major, `index = i * n + j`) into `buf`.
//
// # Safety
// `sim` must be a live handle and `buf` valid for `len` writes.
enum PfStatus pf_simulation_copy_field(const struct PfSimulation *sim, double *buf, size_t len);

// Free energy of the current field; `PF_STATUS_NOT_DEFINED` for models without one.
//
// # Safety
// `sim` must be a live handle and `out_energy` valid for writes.
enum PfStatus pf_simulation_free_energy(struct PfSimulation *sim, double *out_energy);

// Spatial mean of the current field.
//
// # Safety
// `sim` must be a live handle and `out_mean` valid for writes.
enum PfStatus pf_simulation_mean(const struct PfSimulation *sim, double *out_mean);

// Runs a configuration to completion, writing output to `output_dir`
// (or `run.output_dir` when NULL).
//
// # Safety
// `config_text` must be a NUL-terminated string; `output_dir` NULL or one.
enum PfStatus pf_run(const char *config_text, const char *output_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHASEFIELD_H */
