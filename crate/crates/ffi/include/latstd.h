#ifndef LATSTD_H
#define LATSTD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LatstdFlavor {
  LATSTD_FLAVOR_UD = 0,
  LATSTD_FLAVOR_LASLA = 1,
  LATSTD_FLAVOR_STANDARD = 2,
} LatstdFlavor;

typedef enum LatstdStatus {
  LATSTD_STATUS_OK = 0,
  LATSTD_STATUS_NULL_POINTER = 1,
  LATSTD_STATUS_INVALID_UTF8 = 2,
  LATSTD_STATUS_PARSE = 3,
  LATSTD_STATUS_ALIGNMENT = 4,
  LATSTD_STATUS_CONFIG = 5,
  LATSTD_STATUS_INTERNAL = 6,
} LatstdStatus;

/**
 * A parsed CoNLL-U corpus.
 */
typedef struct LatstdCorpus LatstdCorpus;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next call into the library on this thread.
 */
const char *latstd_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *latstd_version(void);

/**
 * Parses CoNLL-U text into a new corpus handle.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum LatstdStatus latstd_corpus_parse(const char *text, struct LatstdCorpus **out);

/**
 * Releases a corpus. NULL is ignored.
 *
 * # Safety
 * `corpus` must come from this library and not be used afterwards.
 */
void latstd_corpus_free(struct LatstdCorpus *corpus);

/**
 * Writes the corpus back to CoNLL-U.
 *
 * # Safety
 * `corpus` must be a live handle; `out` must be writable.
 */
enum LatstdStatus latstd_corpus_serialize(const struct LatstdCorpus *corpus, char **out);

/**
 * # Safety
 * `corpus` must be a live handle; `out` must be writable.
 */
enum LatstdStatus latstd_corpus_sentence_count(const struct LatstdCorpus *corpus, size_t *out);

/**
 * Number of syntactic words (multiword ranges and empty nodes excluded).
 *
 * # Safety
 * `corpus` must be a live handle; `out` must be writable.
 */
enum LatstdStatus latstd_corpus_token_count(const struct LatstdCorpus *corpus, size_t *out);

/**
 * Standardizes and harmonizes a corpus with default options into a new
 * handle.
 *
 * # Safety
 * `corpus` must be a live handle; `out` must be writable.
 */
enum LatstdStatus latstd_corpus_convert(const struct LatstdCorpus *corpus,
                                        enum LatstdFlavor flavor,
                                        struct LatstdCorpus **out);

/**
 * Whole-string morphological accuracy of `pred` against `gold`.
 *
 * # Safety
 * Both handles must be live; `out` must be writable.
 */
enum LatstdStatus latstd_eval_accuracy(const struct LatstdCorpus *gold,
                                       const struct LatstdCorpus *pred,
                                       bool include_upos,
                                       double *out);

/**
 * Macro F1 of one feature (`UPOS` or a morphological feature name).
 *
 * # Safety
 * Both handles must be live; `feature` NUL-terminated; `out` writable.
 */
enum LatstdStatus latstd_eval_macro_f1(const struct LatstdCorpus *gold,
                                       const struct LatstdCorpus *pred,
                                       const char *feature,
                                       double *out);

/**
 * Paired permutation test; writes the p-value. `metric` uses the CLI
 * syntax (`morph-acc`, `upos-acc`, `macro-f1:Case`, `f1:Case=Dat`).
 *
 * # Safety
 * All handles must be live; `metric` NUL-terminated; `p_value` writable.
 */
enum LatstdStatus latstd_permutation_test(const struct LatstdCorpus *gold,
                                          const struct LatstdCorpus *pred_a,
                                          const struct LatstdCorpus *pred_b,
                                          const char *metric,
                                          uint64_t iterations,
                                          uint64_t seed,
                                          size_t jobs,
                                          double *p_value);

/**
 * Replaces j/v with i/u, preserving case.
 *
 * # Safety
 * `text` must be NUL-terminated; `out` must be writable.
 */
enum LatstdStatus latstd_jv_replace(const char *text, char **out);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void latstd_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LATSTD_H */
