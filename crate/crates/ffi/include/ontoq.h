/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef ONTOQ_H
#define ONTOQ_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Relation bits for [`OntoqSearchOptions::relations`] and related-term calls.
 */
#define ONTOQ_REL_IS_A 1

#define ONTOQ_REL_PART_OF 2

#define ONTOQ_REL_DEVELOPS_FROM 4

/**
 * Result code of every call.
 */
typedef enum OntoqStatus {
  ONTOQ_STATUS_OK = 0,
  ONTOQ_STATUS_NULL_ARGUMENT = 1,
  ONTOQ_STATUS_INVALID_UTF8 = 2,
  ONTOQ_STATUS_IO = 3,
  ONTOQ_STATUS_PARSE = 4,
  ONTOQ_STATUS_CYCLE = 5,
  ONTOQ_STATUS_DUPLICATE_TERM = 6,
  ONTOQ_STATUS_UNKNOWN_TERM = 7,
  ONTOQ_STATUS_INVALID_ARGUMENT = 8,
  ONTOQ_STATUS_PANIC = 9,
} OntoqStatus;

/**
 * Opaque engine handle.
 */
typedef struct OntoqEngine OntoqEngine;

/**
 * Search flags. Start from [`ontoq_search_options_default`].
 *
 * `annotation_type` and `object_type` are optional filters (NULL for none).
 */
typedef struct OntoqSearchOptions {
  bool include_descendants;
  bool include_composites;
  bool include_ancestor_composites;
  bool include_bridges;
  /**
   * Bitwise OR of `ONTOQ_REL_*`; must be non-zero.
   */
  uint8_t relations;
  const char *annotation_type;
  const char *object_type;
} OntoqSearchOptions;

/**
 * Corpus counts.
 */
typedef struct OntoqStats {
  uint64_t terms;
  uint64_t ontologies;
  uint64_t annotations;
  uint64_t bridges;
} OntoqStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Loads ontologies, optional annotations and bridge files.
 *
 * `annotation_path` may be NULL. On success `*out` receives a handle to
 * release with [`ontoq_engine_free`].
 *
 * # Safety
 * Path arrays must hold `*_count` valid NUL-terminated strings; `out` must
 * be writable.
 */
enum OntoqStatus ontoq_engine_load(const char *const *obo_paths,
                                   size_t obo_count,
                                   const char *annotation_path,
                                   const char *const *bridge_paths,
                                   size_t bridge_count,
                                   bool lenient,
                                   struct OntoqEngine **out);

/**
 * Releases an engine. NULL is ignored.
 *
 * # Safety
 * `engine` must come from [`ontoq_engine_load`] and not be used afterwards.
 */
void ontoq_engine_free(struct OntoqEngine *engine);

/**
 * Default search flags: descendants and composites on, is_a + part_of.
 */
struct OntoqSearchOptions ontoq_search_options_default(void);

/**
 * Runs a search and writes the `/search` JSON body to `*out`.
 *
 * `options` may be NULL for defaults.
 *
 * # Safety
 * Pointers must be valid; `out` must be writable.
 */
enum OntoqStatus ontoq_search_json(const struct OntoqEngine *engine,
                                   const char *term,
                                   const struct OntoqSearchOptions *options,
                                   char **out);

/**
 * Ranked autocomplete; writes the `/autocomplete` JSON array to `*out`.
 *
 * `ontology` may be NULL for all ontologies.
 *
 * # Safety
 * Pointers must be valid; `out` must be writable.
 */
enum OntoqStatus ontoq_autocomplete_json(const struct OntoqEngine *engine,
                                         const char *query,
                                         size_t limit,
                                         const char *ontology,
                                         char **out);

/**
 * Term details; writes the `/terms/{id}` JSON body to `*out`.
 *
 * # Safety
 * Pointers must be valid; `out` must be writable.
 */
enum OntoqStatus ontoq_term_json(const struct OntoqEngine *engine, const char *id, char **out);

/**
 * Parents, children, ancestors or descendants of a term; writes the
 * `/terms/{id}/{direction}` JSON array to `*out`.
 *
 * # Safety
 * Pointers must be valid; `out` must be writable.
 */
enum OntoqStatus ontoq_related_json(const struct OntoqEngine *engine,
                                    const char *id,
                                    const char *direction,
                                    uint8_t relations,
                                    char **out);

/**
 * Corpus counts.
 *
 * # Safety
 * `engine` must be valid; `out` must be writable.
 */
enum OntoqStatus ontoq_stats(const struct OntoqEngine *engine, struct OntoqStats *out);

/**
 * Frees a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void ontoq_string_free(char *s);

/**
 * Message for the last failed call on this thread ("" after a success).
 * Valid until the next call on the same thread.
 */
const char *ontoq_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ONTOQ_H */
