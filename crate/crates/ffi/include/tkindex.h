/* C interface for the tkindex workbench. */

#ifndef TKINDEX_H
#define TKINDEX_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes mirror the CLI exit codes: 0 success, 1 computation failure,
 * 2 validation failure; 3 is reserved for misuse of the ABI itself.
 */
typedef enum TkxStatus {
  TkxStatus_Ok = 0,
  TkxStatus_Computation = 1,
  TkxStatus_Validation = 2,
  TkxStatus_InvalidArgument = 3,
} TkxStatus;

/**
 * Opaque result handle: owns the report JSON and the aggregate verdict.
 */
typedef struct TkxReport TkxReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Run one pipeline (same names as the CLI subcommands: "cech-h", "dd-class",
 * "twisted-derham", "family-index", "index-compare", "scl-check",
 * "thom-check", "grr") on a JSON scenario config.  On success writes a new
 * handle to `out`; on failure leaves `out` untouched and records a message
 * retrievable via `tkx_last_error`.
 *
 * # Safety
 * `subcommand` and `config_json` must be NUL-terminated strings or null;
 * `out` must be a valid pointer to writable memory.
 */
enum TkxStatus tkx_run(const char *subcommand, const char *config_json, struct TkxReport **out);

/**
 * Borrow the report JSON (NUL-terminated UTF-8).  Returns null if the
 * handle is null.  The pointer is owned by the handle.
 *
 * # Safety
 * `report` must be a handle produced by `tkx_run` that has not been freed.
 */
const char *tkx_report_json(const struct TkxReport *report);

/**
 * 1 if every pass criterion in the report holds, 0 otherwise (or if the
 * handle is null).
 *
 * # Safety
 * `report` must be a handle produced by `tkx_run` that has not been freed.
 */
int tkx_report_all_pass(const struct TkxReport *report);

/**
 * Release a handle.  Null is accepted and ignored.
 *
 * # Safety
 * `report` must be null or a handle produced by `tkx_run`, freed at most
 * once.
 */
void tkx_report_free(struct TkxReport *report);

/**
 * Message for the most recent failure on this thread (NUL-terminated,
 * valid until the next failing call on the same thread).
 */
const char *tkx_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tkx_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TKINDEX_H */
