#ifndef REQUANT_H
#define REQUANT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum RqMethod {
  RQ_METHOD_GOLDEN = 0,
  RQ_METHOD_BISECTION = 1,
  RQ_METHOD_NELDER_MEAD = 2,
  RQ_METHOD_GRID = 3,
} RqMethod;

/**
 * Status code returned by every fallible call.
 */
typedef enum RqStatus {
  RQ_STATUS_OK = 0,
  RQ_STATUS_NULL_POINTER = 1,
  RQ_STATUS_INVALID_INPUT = 2,
  RQ_STATUS_BIT_WIDTH = 3,
  RQ_STATUS_DUPLICATE_NAME = 4,
  RQ_STATUS_NON_FINITE = 5,
  RQ_STATUS_CODE_OUT_OF_RANGE = 6,
  RQ_STATUS_SEARCH_ABORTED = 7,
  RQ_STATUS_MANIFEST = 8,
  RQ_STATUS_MISSING_FILE = 9,
  RQ_STATUS_SIZE_MISMATCH = 10,
  RQ_STATUS_IO = 11,
  RQ_STATUS_SERIALIZE = 12,
  RQ_STATUS_BUFFER_TOO_SMALL = 13,
  RQ_STATUS_PANIC = 14,
} RqStatus;

typedef enum RqStrategy {
  RQ_STRATEGY_UNIFORM_FULL = 0,
  RQ_STRATEGY_UNIFORM_CLIP = 1,
  RQ_STRATEGY_RESHAPE_FULL = 2,
  RQ_STRATEGY_RESHAPE_CLIP = 3,
} RqStrategy;

/**
 * Opaque result of quantizing one layer.
 */
typedef struct RqLayerResult RqLayerResult;

/**
 * Opaque ordered list of tensors loaded from a manifest.
 */
typedef struct RqModel RqModel;

/**
 * Opaque weight tensor.
 */
typedef struct RqTensor RqTensor;

typedef struct RqSearchSettings {
  double epsilon;
  double phi;
  double alpha_min;
  enum RqMethod method;
  uintptr_t grid_points;
} RqSearchSettings;

/**
 * Per-tensor quantization parameters.
 */
typedef struct RqParams {
  double alpha;
  double scale;
  double w_max;
  double loss;
  uint32_t bits;
  enum RqStrategy strategy;
} RqParams;

/**
 * One report row. `method` is one of the `RqMethod` values, or -1 for the
 * fixed-alpha strategies.
 */
typedef struct RqReport {
  double alpha;
  double loss;
  double time_ms;
  uint64_t evals;
  uint32_t bits;
  int32_t method;
  bool degenerate;
} RqReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *rq_version(void);

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length including the NUL, or
 * 0 when there is no error recorded.
 */
uintptr_t rq_last_error_message(char *buf, uintptr_t len);

/**
 * The default search settings (golden-section, epsilon 1e-4, phi = (sqrt(5) - 1) / 2,
 * alpha_min 1e-3).
 */
struct RqSearchSettings rq_search_settings_default(void);

/**
 * Creates a tensor from `len` doubles with the given shape.
 */
enum RqStatus rq_tensor_new(const char *name,
                            const uintptr_t *shape,
                            uintptr_t ndim,
                            const double *values,
                            uintptr_t len,
                            struct RqTensor **out);

void rq_tensor_free(struct RqTensor *tensor);

/**
 * Number of elements, or 0 for a null handle.
 */
uintptr_t rq_tensor_len(const struct RqTensor *tensor);

enum RqStatus rq_max_abs(const struct RqTensor *tensor, double *out);

/**
 * Quantization MSE at a given alpha: the uniform loss for the uniform
 * strategies, the reshaped loss for the reshape strategies.
 */
enum RqStatus rq_loss(const struct RqTensor *tensor,
                      double alpha,
                      uint32_t bits,
                      enum RqStrategy strategy,
                      double *out);

/**
 * Quantizes one tensor. `settings` may be null for the defaults.
 */
enum RqStatus rq_quantize_layer(const struct RqTensor *tensor,
                                uint32_t bits,
                                enum RqStrategy strategy,
                                const struct RqSearchSettings *settings,
                                struct RqLayerResult **out);

void rq_result_free(struct RqLayerResult *result);

uintptr_t rq_result_len(const struct RqLayerResult *result);

enum RqStatus rq_result_params(const struct RqLayerResult *result, struct RqParams *out);

enum RqStatus rq_result_report(const struct RqLayerResult *result, struct RqReport *out);

/**
 * Copies the integer codes into `buf`, which must hold `rq_result_len` values.
 */
enum RqStatus rq_result_codes(const struct RqLayerResult *result, int32_t *buf, uintptr_t len);

/**
 * Writes the dequantized (fake-quantized) values into `buf`.
 */
enum RqStatus rq_result_dequantize(const struct RqLayerResult *result, double *buf, uintptr_t len);

/**
 * Runs golden-section, bisection and Nelder-Mead on the uniform loss and
 * writes three reports, in that order, into `out` (which must hold 3).
 */
enum RqStatus rq_compare_searches(const struct RqTensor *tensor,
                                  uint32_t bits,
                                  const struct RqSearchSettings *settings,
                                  struct RqReport *out);

/**
 * Loads a model manifest.
 */
enum RqStatus rq_model_load(const char *manifest_path, struct RqModel **out);

void rq_model_free(struct RqModel *model);

uintptr_t rq_model_len(const struct RqModel *model);

/**
 * Copies tensor `index` out of the model into a new handle.
 */
enum RqStatus rq_model_tensor(const struct RqModel *model, uintptr_t index, struct RqTensor **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REQUANT_H */
