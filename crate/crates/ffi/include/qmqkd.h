#ifndef QMQKD_H
#define QMQKD_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible function.
 */
typedef enum QmStatus {
  QM_STATUS_OK = 0,
  QM_STATUS_NULL_POINTER = 1,
  QM_STATUS_INVALID_ARGUMENT = 2,
  QM_STATUS_CONFIG = 3,
  QM_STATUS_CALIBRATION = 4,
  QM_STATUS_IO = 5,
  QM_STATUS_OUT_OF_RANGE = 6,
  QM_STATUS_PANIC = 7,
} QmStatus;

typedef enum QmMirrorKind {
  QM_MIRROR_KIND_QWP_REFLECTOR = 0,
  QM_MIRROR_KIND_FARADAY_MIRROR = 1,
  QM_MIRROR_KIND_PLAIN_MIRROR = 2,
} QmMirrorKind;

/**
 * An interferometric link (opaque).
 */
typedef struct QmLink QmLink;

/**
 * A scenario configuration (opaque).
 */
typedef struct QmScenario QmScenario;

/**
 * A finished session (opaque).
 */
typedef struct QmSession QmSession;

typedef struct QmFadingSummary {
  size_t samples;
  double min;
  double mean;
  double p5;
} QmFadingSummary;

typedef struct QmSessionBin {
  double t_s;
  double phase_error;
  double qber;
  double rate_bps;
} QmSessionBin;

typedef struct QmSessionSummary {
  size_t bins;
  double mean_qber;
  double std_qber;
  double mean_rate_bps;
  double std_rate_bps;
} QmSessionSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on this thread.
 */
const char *qm_last_error_message(void);

/**
 * Library version, a static NUL-terminated string.
 */
const char *qm_version(void);

/**
 * Link with identity channel and the given fiber birefringence of the four
 * arms (Alice long, Alice short, Bob long, Bob short).
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum QmStatus qm_link_new(enum QmMirrorKind scheme,
                          double delta_alice_long,
                          double delta_alice_short,
                          double delta_bob_long,
                          double delta_bob_short,
                          struct QmLink **out);

/**
 * Link with a Haar-random channel and random arm parameters; identical to
 * sample `index` of a fading scan seeded with `seed`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum QmStatus qm_link_random(enum QmMirrorKind scheme,
                             uint64_t seed,
                             uint64_t index,
                             struct QmLink **out);

/**
 * # Safety
 * `link` must come from this library and not be used afterwards.
 */
void qm_link_free(struct QmLink *link);

/**
 * Sets the phase shifter in Alice's long arm.
 *
 * # Safety
 * `link` must be a live handle.
 */
enum QmStatus qm_link_set_phase_shift(struct QmLink *link, double phase);

/**
 * Output power at Bob for the input field `(ex, ey)`.
 *
 * # Safety
 * `link` must be a live handle and `out` valid for writes.
 */
enum QmStatus qm_link_interference_power(const struct QmLink *link,
                                         double ex_re,
                                         double ex_im,
                                         double ey_re,
                                         double ey_im,
                                         double *out);

/**
 * Worst-case fringe visibility over input polarizations.
 *
 * # Safety
 * `link` must be a live handle and `out` valid for writes.
 */
enum QmStatus qm_link_visibility(const struct QmLink *link, size_t sweep_points, double *out);

/**
 * Visibility statistics of `samples` random links.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum QmStatus qm_fading_scan(enum QmMirrorKind scheme,
                             size_t samples,
                             uint64_t seed,
                             struct QmFadingSummary *out);

/**
 * Runs the identity suite; `*all_pass` is 1 when every residual is within
 * `tol`, and `*failures` counts the failing identities.
 *
 * # Safety
 * `all_pass` and `failures` must be valid for writes.
 */
enum QmStatus qm_algebra_check(double tol,
                               size_t samples,
                               uint64_t seed,
                               int *all_pass,
                               size_t *failures);

/**
 * Parses a scenario from TOML text.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` valid for writes.
 */
enum QmStatus qm_scenario_from_toml(const char *toml, struct QmScenario **out);

/**
 * Loads a bundled preset (`paper-50km`, `paper-100km`, `fading-demo`).
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` valid for writes.
 */
enum QmStatus qm_scenario_preset(const char *name, struct QmScenario **out);

/**
 * # Safety
 * `scenario` must come from this library and not be used afterwards.
 */
void qm_scenario_free(struct QmScenario *scenario);

/**
 * Fits detector and visibility parameters in place and disables further
 * calibration on the scenario.
 *
 * # Safety
 * `scenario` must be a live handle.
 */
enum QmStatus qm_scenario_calibrate(struct QmScenario *scenario);

/**
 * Simulates a session. Calibration runs first when the scenario enables it.
 *
 * # Safety
 * `scenario` must be a live handle and `out` valid for writes.
 */
enum QmStatus qm_session_run(const struct QmScenario *scenario, struct QmSession **out);

/**
 * # Safety
 * `session` must come from this library and not be used afterwards.
 */
void qm_session_free(struct QmSession *session);

/**
 * Number of bins; 0 for a null handle.
 *
 * # Safety
 * `session` must be a live handle or null.
 */
size_t qm_session_len(const struct QmSession *session);

/**
 * # Safety
 * `session` must be a live handle and `out` valid for writes.
 */
enum QmStatus qm_session_bin(const struct QmSession *session,
                             size_t index,
                             struct QmSessionBin *out);

/**
 * # Safety
 * `session` must be a live handle and `out` valid for writes.
 */
enum QmStatus qm_session_summary(const struct QmSession *session, struct QmSessionSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QMQKD_H */
