#ifndef MSFA_H
#define MSFA_H

/* Generated by cbindgen from the msfa-demosaic-ffi crate. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum MsfaStatus {
  MSFA_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  MSFA_STATUS_NULL_ARGUMENT = 1,
  /**
   * A non-pointer argument was out of range or not valid UTF-8.
   */
  MSFA_STATUS_INVALID_ARGUMENT = 2,
  MSFA_STATUS_SHAPE = 3,
  MSFA_STATUS_BOUNDS = 4,
  MSFA_STATUS_CONFIG = 5,
  MSFA_STATUS_DEGENERATE_PATTERN = 6,
  MSFA_STATUS_UNSUPPORTED = 7,
  /**
   * Malformed file contents.
   */
  MSFA_STATUS_FORMAT = 8,
  MSFA_STATUS_IO = 9,
  /**
   * An internal panic was caught at the boundary.
   */
  MSFA_STATUS_PANIC = 10,
} MsfaStatus;

/**
 * Spectral cube, `height × width × bands` of 32-bit floats.
 */
typedef struct MsfaCube MsfaCube;

/**
 * Network configuration and parameters.
 */
typedef struct MsfaModel MsfaModel;

/**
 * Single-plane filter-array capture together with its pattern.
 */
typedef struct MsfaMosaic MsfaMosaic;

/**
 * Periodic filter-array layout.
 */
typedef struct MsfaPattern MsfaPattern;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or null after a
 * successful call. Valid until the next library call on the same thread.
 */
const char *msfa_last_error_message(void);

/**
 * Creates a cube from `height·width·bands` band-major floats.
 *
 * # Safety
 * `data` must point to that many readable floats; `out` must be writable.
 */
enum MsfaStatus msfa_cube_new(size_t height,
                              size_t width,
                              size_t bands,
                              const float *data,
                              struct MsfaCube **out);

/**
 * # Safety
 * `cube` must be null or a handle not yet freed.
 */
void msfa_cube_free(struct MsfaCube *cube);

/**
 * # Safety
 * `cube` must be a live handle; the out-pointers must be writable.
 */
enum MsfaStatus msfa_cube_dims(const struct MsfaCube *cube,
                               size_t *height,
                               size_t *width,
                               size_t *bands);

/**
 * Copies the band-major values into `dst`, which must hold exactly
 * `height·width·bands` floats (`len`).
 *
 * # Safety
 * `dst` must point to `len` writable floats.
 */
enum MsfaStatus msfa_cube_copy_data(const struct MsfaCube *cube, float *dst, size_t len);

/**
 * # Safety
 * `path` must be a nul-terminated string; `out` must be writable.
 */
enum MsfaStatus msfa_cube_read(const char *path, struct MsfaCube **out);

/**
 * # Safety
 * `cube` must be a live handle; `path` a nul-terminated string.
 */
enum MsfaStatus msfa_cube_write(const struct MsfaCube *cube, const char *path);

/**
 * The 4×4 layout with sixteen bands, one per cell in row-major order.
 *
 * # Safety
 * `out` must be writable.
 */
enum MsfaStatus msfa_pattern_default(struct MsfaPattern **out);

/**
 * Pattern with `period × period` row-major cell bands.
 *
 * # Safety
 * `cells` must point to `period·period` readable values.
 */
enum MsfaStatus msfa_pattern_new(size_t period,
                                 size_t band_count,
                                 const uint32_t *cells,
                                 struct MsfaPattern **out);

/**
 * # Safety
 * `pattern` must be null or a handle not yet freed.
 */
void msfa_pattern_free(struct MsfaPattern *pattern);

/**
 * Reads a pattern sidecar file.
 *
 * # Safety
 * `path` must be a nul-terminated string; `out` must be writable.
 */
enum MsfaStatus msfa_pattern_read(const char *path, struct MsfaPattern **out);

/**
 * # Safety
 * `pattern` must be a live handle; `path` a nul-terminated string.
 */
enum MsfaStatus msfa_pattern_write(const struct MsfaPattern *pattern, const char *path);

/**
 * Simulates capture of `cube` through `pattern`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum MsfaStatus msfa_mosaic_apply(const struct MsfaCube *cube,
                                  const struct MsfaPattern *pattern,
                                  struct MsfaMosaic **out);

/**
 * Wraps a one-band cube holding raw mosaic samples.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum MsfaStatus msfa_mosaic_from_plane(const struct MsfaCube *plane,
                                       const struct MsfaPattern *pattern,
                                       struct MsfaMosaic **out);

/**
 * The mosaic samples as a one-band cube.
 *
 * # Safety
 * `mosaic` must be live; `out` must be writable.
 */
enum MsfaStatus msfa_mosaic_to_plane(const struct MsfaMosaic *mosaic, struct MsfaCube **out);

/**
 * # Safety
 * `mosaic` must be null or a handle not yet freed.
 */
void msfa_mosaic_free(struct MsfaMosaic *mosaic);

/**
 * # Safety
 * `mosaic` must be live; `out` must be writable.
 */
enum MsfaStatus msfa_demosaic_bilinear(const struct MsfaMosaic *mosaic, struct MsfaCube **out);

/**
 * Simplified pseudo-panchromatic difference baseline (period 4 only).
 *
 * # Safety
 * `mosaic` must be live; `out` must be writable.
 */
enum MsfaStatus msfa_demosaic_ppi(const struct MsfaMosaic *mosaic, struct MsfaCube **out);

/**
 * Bilinear initial cube refined by `model`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum MsfaStatus msfa_demosaic_net(const struct MsfaModel *model,
                                  const struct MsfaMosaic *mosaic,
                                  struct MsfaCube **out);

/**
 * Untrained default network; refinement is the identity.
 *
 * # Safety
 * `out` must be writable.
 */
enum MsfaStatus msfa_model_init(uint64_t seed, struct MsfaModel **out);

/**
 * Loads network config and parameters from a checkpoint; optimizer state
 * is discarded.
 *
 * # Safety
 * `path` must be a nul-terminated string; `out` must be writable.
 */
enum MsfaStatus msfa_model_read(const char *path, struct MsfaModel **out);

/**
 * Number of trainable parameters.
 *
 * # Safety
 * `model` must be a live handle or null (which yields 0).
 */
size_t msfa_model_param_count(const struct MsfaModel *model);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void msfa_model_free(struct MsfaModel *model);

/**
 * Whole-cube PSNR with peak 1, in dB; +infinity for identical cubes.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum MsfaStatus msfa_psnr(const struct MsfaCube *reference,
                          const struct MsfaCube *test,
                          double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MSFA_H */
