#ifndef GTSCHEME_H
#define GTSCHEME_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Zero is success.
 */
typedef enum GtsStatus {
  GTS_STATUS_OK = 0,
  GTS_STATUS_USAGE = 1,
  GTS_STATUS_DOMAIN = 2,
  GTS_STATUS_NO_PRIME = 3,
  GTS_STATUS_UNVERIFIABLE = 4,
  GTS_STATUS_INCONSISTENT = 5,
  GTS_STATUS_VERIFICATION = 6,
  GTS_STATUS_PARSE = 7,
  GTS_STATUS_IO = 8,
  GTS_STATUS_NULL_POINTER = 9,
  GTS_STATUS_BUFFER_TOO_SMALL = 10,
  GTS_STATUS_PANIC = 11,
} GtsStatus;

typedef enum GtsMode {
  GTS_MODE_FAST = 0,
  GTS_MODE_EXACT = 1,
} GtsMode;

/**
 * Opaque generator matrix.
 */
typedef struct GtsCode GtsCode;

/**
 * Opaque test family.
 */
typedef struct GtsScheme GtsScheme;

/**
 * Derived parameters. `q`, `k`, `m` and `delta_*` are zero when `trivial`.
 */
typedef struct GtsParams {
  bool trivial;
  uint32_t q;
  uint32_t k;
  uint32_t m;
  uint64_t delta_num;
  uint64_t delta_den;
  uint64_t t_bound;
} GtsParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *gts_last_error(void);

/**
 * Parameters for an `(n, r)`-SSF (`r` is the strength).
 */
enum GtsStatus gts_derive_params(uint64_t n, uint64_t r, struct GtsParams *params);

/**
 * Builds an `(n, r)`-SSF. On success `*scheme` owns a new handle.
 */
enum GtsStatus gts_scheme_build_ssf(uint64_t n,
                                    uint64_t r,
                                    enum GtsMode mode,
                                    struct GtsScheme **scheme);

/**
 * Builds a scheme identifying up to `r` defectives among `n` items.
 */
enum GtsStatus gts_scheme_build_gt(uint64_t n,
                                   uint64_t r,
                                   enum GtsMode mode,
                                   struct GtsScheme **scheme);

/**
 * Reads a `GTS v1` file.
 */
enum GtsStatus gts_scheme_read(const char *file, struct GtsScheme **scheme);

/**
 * Writes a `GTS v1` file.
 */
enum GtsStatus gts_scheme_write(const struct GtsScheme *scheme, const char *file);

/**
 * Releases a scheme handle. Null is ignored.
 */
void gts_scheme_free(struct GtsScheme *scheme);

/**
 * Number of items; 0 for a null handle.
 */
uint64_t gts_scheme_items(const struct GtsScheme *scheme);

/**
 * SSF strength; 0 for a null handle.
 */
uint64_t gts_scheme_strength(const struct GtsScheme *scheme);

/**
 * Number of tests; 0 for a null handle.
 */
size_t gts_scheme_num_tests(const struct GtsScheme *scheme);

/**
 * Copies the sorted items of test `index` into `buf`. `*len` receives the
 * test size even when `cap` is too small.
 */
enum GtsStatus gts_scheme_test(const struct GtsScheme *scheme,
                               size_t index,
                               uint64_t *buf,
                               size_t cap,
                               size_t *len);

/**
 * Exhaustively checks the `r`-SSF property. `*valid` is false when a
 * violation is found; the status is `Unverifiable` when over `budget`.
 */
enum GtsStatus gts_scheme_verify(const struct GtsScheme *scheme,
                                 uint64_t r,
                                 uint64_t budget,
                                 bool *valid);

/**
 * Writes one byte per test (1 positive, 0 negative) for the given
 * defective items into `buf`, which must hold `gts_scheme_num_tests` bytes.
 */
enum GtsStatus gts_scheme_outcomes(const struct GtsScheme *scheme,
                                   const uint64_t *items,
                                   size_t count,
                                   uint8_t *buf,
                                   size_t cap,
                                   size_t *len);

/**
 * Decodes outcome bytes (nonzero = positive) into at most `r` items.
 */
enum GtsStatus gts_scheme_decode(const struct GtsScheme *scheme,
                                 const uint8_t *outcomes,
                                 size_t tests,
                                 uint64_t r,
                                 uint64_t *buf,
                                 size_t cap,
                                 size_t *len);

/**
 * Constructs a code with relative distance `delta_num / delta_den`,
 * verifying its distance when `q^k` is at most 2^24.
 */
enum GtsStatus gts_code_build(uint32_t q,
                              uint32_t m,
                              uint32_t k,
                              uint64_t delta_num,
                              uint64_t delta_den,
                              enum GtsMode mode,
                              struct GtsCode **code);

/**
 * Reads a `GVC v1` file.
 */
enum GtsStatus gts_code_read(const char *file, struct GtsCode **code);

/**
 * Writes a `GVC v1` file.
 */
enum GtsStatus gts_code_write(const struct GtsCode *code, const char *file);

/**
 * Releases a code handle. Null is ignored.
 */
void gts_code_free(struct GtsCode *code);

/**
 * Matrix dimensions and field size. Any output pointer may be null.
 */
enum GtsStatus gts_code_shape(const struct GtsCode *code, uint32_t *q, uint32_t *m, uint32_t *k);

/**
 * Copies the `m * k` entries, row-major, into `buf`.
 */
enum GtsStatus gts_code_entries(const struct GtsCode *code, uint32_t *buf, size_t cap, size_t *len);

/**
 * Minimum distance by enumerating all `q^k` codewords (at most `budget`).
 */
enum GtsStatus gts_code_min_distance(const struct GtsCode *code,
                                     uint64_t budget,
                                     uint32_t *distance);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GTSCHEME_H */
