#ifndef LCSG_H
#define LCSG_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum LcsgStatus {
  LCSG_STATUS_OK = 0,
  LCSG_STATUS_NULL_POINTER = 1,
  LCSG_STATUS_INVALID_UTF8 = 2,
  LCSG_STATUS_SYNTAX = 3,
  LCSG_STATUS_DEFINITION = 4,
  LCSG_STATUS_UNKNOWN_SUITE = 5,
  LCSG_STATUS_IO = 6,
  LCSG_STATUS_NUMERIC = 7,
  LCSG_STATUS_OUT_OF_RANGE = 8,
  LCSG_STATUS_PANIC = 9,
} LcsgStatus;

/**
 * Parsed definition file.
 */
typedef struct LcsgDefinitions LcsgDefinitions;

/**
 * Result of a suite run. Entry strings live as long as the report.
 */
typedef struct LcsgReport LcsgReport;

/**
 * Sampling and control options for [`lcsg_run`].
 */
typedef struct LcsgOptions {
  size_t samples;
  uint64_t seed;
  double tolerance;
  /**
   * Nonzero stops after the first failing check group.
   */
  int32_t fail_fast;
  /**
   * Nonzero records wall time in the report.
   */
  int32_t timing;
} LcsgOptions;

/**
 * One report entry. `id` and `paper_tag` are borrowed from the report.
 */
typedef struct LcsgEntry {
  const char *id;
  const char *paper_tag;
  double max_residual;
  double tolerance;
  size_t samples;
  /**
   * 1 for pass, 0 for fail.
   */
  int32_t passed;
} LcsgEntry;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *lcsg_version(void);

/**
 * Message for the last failed call on this thread. Valid until the next
 * failing call on the same thread.
 */
const char *lcsg_last_error(void);

/**
 * Default options: 64 samples, seed 0xD1CE, tolerance 1e-8.
 */
struct LcsgOptions lcsg_default_options(void);

/**
 * Parses definition text.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum LcsgStatus lcsg_definitions_parse(const char *text, struct LcsgDefinitions **out);

/**
 * Reads and parses a definition file.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum LcsgStatus lcsg_definitions_load_file(const char *path, struct LcsgDefinitions **out);

/**
 * Loads a shipped catalog item by id or file name.
 *
 * # Safety
 * `id` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum LcsgStatus lcsg_definitions_load_catalog(const char *id, struct LcsgDefinitions **out);

/**
 * Number of structures declared in the definitions, or 0 for null.
 *
 * # Safety
 * `defs` must be null or a handle from this library.
 */
size_t lcsg_definitions_structure_count(const struct LcsgDefinitions *defs);

/**
 * Releases a definitions handle. Null is ignored.
 *
 * # Safety
 * `defs` must be null or a handle from this library not yet freed.
 */
void lcsg_definitions_free(struct LcsgDefinitions *defs);

/**
 * Runs a suite. The report is produced whether or not its checks pass.
 *
 * # Safety
 * `defs` must be a live handle, `suite` a valid NUL-terminated string and
 * `out` a valid pointer.
 */
enum LcsgStatus lcsg_run(const struct LcsgDefinitions *defs,
                         const char *suite,
                         struct LcsgOptions options,
                         struct LcsgReport **out);

/**
 * 1 if every entry passes, 0 otherwise (including null).
 *
 * # Safety
 * `report` must be null or a live handle.
 */
int32_t lcsg_report_passed(const struct LcsgReport *report);

/**
 * Number of entries, or 0 for null.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
size_t lcsg_report_entry_count(const struct LcsgReport *report);

/**
 * Copies entry `index` into `out`.
 *
 * # Safety
 * `report` must be a live handle and `out` a valid pointer.
 */
enum LcsgStatus lcsg_report_entry(const struct LcsgReport *report,
                                  size_t index,
                                  struct LcsgEntry *out);

/**
 * The report as JSON; release with [`lcsg_string_free`]. Null on error.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
char *lcsg_report_to_json(const struct LcsgReport *report);

/**
 * Releases a report handle. Null is ignored.
 *
 * # Safety
 * `report` must be null or a handle from this library not yet freed.
 */
void lcsg_report_free(struct LcsgReport *report);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void lcsg_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LCSG_H */
