#ifndef SYNPROTO_H
#define SYNPROTO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Index of the non-argument decision in [`SpClassification::decision`].
 */
#define SP_NON_ARGUMENT 14

typedef enum SpStatus {
  SP_STATUS_OK = 0,
  SP_STATUS_NULL_POINTER = 1,
  SP_STATUS_INVALID_UTF8 = 2,
  SP_STATUS_EMPTY_INPUT = 3,
  SP_STATUS_MALFORMED_TREE = 4,
  SP_STATUS_UNBALANCED = 5,
  SP_STATUS_INVALID_ARGUMENT = 6,
  SP_STATUS_UNKNOWN_TACTIC = 7,
  SP_STATUS_MISSING_TACTIC = 8,
  SP_STATUS_INVALID_THRESHOLD = 9,
  SP_STATUS_FORMAT = 10,
  SP_STATUS_BUFFER_TOO_SMALL = 11,
  SP_STATUS_IO = 12,
  SP_STATUS_PANIC = 13,
} SpStatus;

typedef enum SpMethod {
  SP_METHOD_MEDIAN = 0,
  SP_METHOD_SYNTHETIC = 1,
} SpMethod;

/**
 * Labelled arguments collected for [`sp_builder_build`].
 */
typedef struct SpBuilder SpBuilder;

/**
 * A prototype set compiled for classification.
 */
typedef struct SpPrototypeSet SpPrototypeSet;

typedef struct SpClassification {
  /**
   * Tactic index 0..=13 in canonical order, or `SP_NON_ARGUMENT`.
   */
  int32_t decision;
  double distances[14];
  double best_similarity;
} SpClassification;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf`.
 */
enum SpStatus sp_last_error_message(char *buf, size_t buf_len, size_t *out_len);

size_t sp_tactic_count(void);

/**
 * Canonical snake-case name of tactic `index`, or of the non-argument
 * bucket for `SP_NON_ARGUMENT`; NULL when out of range. The string is
 * static and must not be freed.
 */
const char *sp_tactic_name(int32_t index);

/**
 * Renders the parse string of an argument given as `n_trees` bracketed
 * trees.
 */
enum SpStatus sp_parse_string(const char *const *trees,
                              size_t n_trees,
                              char *buf,
                              size_t buf_len,
                              size_t *out_len);

/**
 * Unit-cost edit distance between two rendered parse strings.
 */
enum SpStatus sp_edit_distance(const char *a, const char *b, size_t *out);

enum SpStatus sp_normalized_distance(const char *a, const char *b, double *out);

/**
 * Loads a prototype set from the text of a prototype file.
 */
enum SpStatus sp_prototypes_from_json(const char *json, struct SpPrototypeSet **out);

enum SpStatus sp_prototypes_from_file(const char *path, struct SpPrototypeSet **out);

/**
 * Serializes a prototype set in the prototype file layout.
 */
enum SpStatus sp_prototypes_to_json(const struct SpPrototypeSet *set,
                                    char *buf,
                                    size_t buf_len,
                                    size_t *out_len);

/**
 * Rendered prototype of tactic `index`.
 */
enum SpStatus sp_prototypes_get(const struct SpPrototypeSet *set,
                                int32_t index,
                                char *buf,
                                size_t buf_len,
                                size_t *out_len);

void sp_prototypes_free(struct SpPrototypeSet *set);

/**
 * Classifies a rendered parse string. A negative `threshold` disables
 * non-argument rejection.
 */
enum SpStatus sp_classify(const struct SpPrototypeSet *set,
                          const char *parse_string,
                          double threshold,
                          struct SpClassification *out);

/**
 * Classifies an argument given as bracketed trees.
 */
enum SpStatus sp_classify_trees(const struct SpPrototypeSet *set,
                                const char *const *trees,
                                size_t n_trees,
                                double threshold,
                                struct SpClassification *out);

struct SpBuilder *sp_builder_new(void);

/**
 * Adds one argument. `gold` is a tactic name (aliases accepted) or
 * "non-argument"; `trees` are its bracketed trees.
 */
enum SpStatus sp_builder_add(struct SpBuilder *builder,
                             const char *gold,
                             const char *const *trees,
                             size_t n_trees);

/**
 * Builds prototypes from the collected arguments. The builder stays valid
 * and may be reused.
 */
enum SpStatus sp_builder_build(const struct SpBuilder *builder,
                               enum SpMethod method,
                               double set_fraction,
                               size_t segments,
                               uint64_t seed,
                               struct SpPrototypeSet **out);

void sp_builder_free(struct SpBuilder *builder);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYNPROTO_H */
