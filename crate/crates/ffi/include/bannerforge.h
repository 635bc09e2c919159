#ifndef BANNERFORGE_H
#define BANNERFORGE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Values 1 to 4 match the command-line exit codes.
 */
typedef enum BfStatus {
  BF_STATUS_OK = 0,
  BF_STATUS_GENERIC = 1,
  BF_STATUS_EMPTY_RECALL = 2,
  BF_STATUS_IO = 3,
  BF_STATUS_CONFIG = 4,
  BF_STATUS_NULL = 5,
  BF_STATUS_UTF8 = 6,
  BF_STATUS_PANIC = 7,
} BfStatus;

/**
 * Opaque engine handle.
 */
typedef struct BfEngine BfEngine;

/**
 * Byte buffer owned by this library.
 */
typedef struct BfBuffer {
  uint8_t *data;
  size_t len;
} BfBuffer;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *bf_version(void);

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call into this library on the same thread.
 */
const char *bf_last_error(void);

/**
 * Loads an engine from a TOML config file.
 *
 * # Safety
 * `config_path` must be a valid NUL-terminated string and `out` a valid
 * pointer. On success `*out` owns a handle to release with `bf_engine_free`.
 */
enum BfStatus bf_engine_open(const char *config_path, struct BfEngine **out);

/**
 * # Safety
 * `engine` must come from `bf_engine_open` and not be used afterwards.
 * Null is ignored.
 */
void bf_engine_free(struct BfEngine *engine);

/**
 * Number of templates in the engine's library.
 *
 * # Safety
 * `engine` must be a live handle or null (returns 0).
 */
size_t bf_engine_template_count(const struct BfEngine *engine);

/**
 * Lints a template library directory. A library that loads but breaks
 * schema rules still returns `Ok`, with `*violations` > 0 and the report
 * in `bf_last_error`.
 *
 * # Safety
 * `library_dir` must be a valid NUL-terminated string; `violations` must be
 * a valid pointer.
 */
enum BfStatus bf_lint(const char *library_dir, size_t *violations);

/**
 * Synthesizes one banner from a request line in the batch syntax
 * (`--product PATH --text TEXT ... --size WxH`). Product paths resolve
 * against `base_dir`. On success `*png` holds the encoded image and
 * `*provenance` the JSON provenance record.
 *
 * # Safety
 * String arguments must be valid NUL-terminated strings; `png` and
 * `provenance` must be valid pointers.
 */
enum BfStatus bf_synth(const struct BfEngine *engine,
                       const char *request,
                       const char *base_dir,
                       uint64_t seed,
                       struct BfBuffer *png,
                       char **provenance);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards. Null is ignored.
 */
void bf_string_free(char *s);

/**
 * # Safety
 * `buf` must have been filled by this library; it is reset to empty.
 */
void bf_buffer_free(struct BfBuffer *buf);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BANNERFORGE_H */
