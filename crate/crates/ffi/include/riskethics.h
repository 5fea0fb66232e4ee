#ifndef RISKETHICS_H
#define RISKETHICS_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a fallible call.
 */
typedef enum ReStatus {
  RE_STATUS_OK = 0,
  RE_STATUS_NULL_POINTER = 1,
  RE_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed JSON or a document that does not match the schema.
   */
  RE_STATUS_PARSE = 3,
  /**
   * A value violates a documented invariant.
   */
  RE_STATUS_VALIDATION = 4,
  RE_STATUS_IO = 5,
  RE_STATUS_PLANNER_FAULT = 6,
  RE_STATUS_OUT_OF_RANGE = 7,
  /**
   * A Rust panic was caught at the boundary.
   */
  RE_STATUS_PANIC = 8,
} ReStatus;

/**
 * Final status of a simulation run.
 */
typedef enum ReRunStatus {
  RE_RUN_STATUS_FINISHED = 0,
  RE_RUN_STATUS_COLLIDED = 1,
  RE_RUN_STATUS_TIMEOUT = 2,
  RE_RUN_STATUS_FAULT = 3,
} ReRunStatus;

/**
 * Opaque planner configuration handle.
 */
typedef struct ReConfig ReConfig;

/**
 * Opaque simulation log handle.
 */
typedef struct ReLog ReLog;

/**
 * Opaque scenario handle.
 */
typedef struct ReScenario ReScenario;

/**
 * Executed ego state of one simulation step.
 */
typedef struct ReEgoState {
  double t;
  double x;
  double y;
  double heading;
  double v;
  double a;
  /**
   * Largest risk borne by any other road user at this step.
   */
  double max_user_risk;
  double ego_risk;
} ReEgoState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into the library on this thread.
 */
const char *re_last_error(void);

/**
 * Library version as a static string.
 */
const char *re_version(void);

/**
 * Releases a string returned by the library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void re_string_free(char *s);

/**
 * Parses and validates a scenario from JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum ReStatus re_scenario_from_json(const char *json, struct ReScenario **out);

/**
 * Loads a scenario file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum ReStatus re_scenario_load(const char *path, struct ReScenario **out);

/**
 * # Safety
 * `scenario` must come from this library and not be freed twice.
 */
void re_scenario_free(struct ReScenario *scenario);

/**
 * Number of road users other than the ego.
 *
 * # Safety
 * `scenario` must be a live handle or null.
 */
size_t re_scenario_agent_count(const struct ReScenario *scenario);

/**
 * Default planner configuration (ethical profile).
 *
 * # Safety
 * `out` must be writable.
 */
enum ReStatus re_config_default(struct ReConfig **out);

/**
 * Parses a configuration file's JSON text; missing sections take defaults.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum ReStatus re_config_from_json(const char *json, struct ReConfig **out);

/**
 * Switches the profile: "ethical", "selfish" or "standard".
 *
 * # Safety
 * `config` must be a live handle; `profile` a NUL-terminated string.
 */
enum ReStatus re_config_set_profile(struct ReConfig *config, const char *profile);

/**
 * # Safety
 * `config` must come from this library and not be freed twice.
 */
void re_config_free(struct ReConfig *config);

/**
 * Simulates the scenario in closed loop. A planner fault inside the run is
 * not an error: the log is returned with status `RE_RUN_STATUS_FAULT`.
 *
 * # Safety
 * `scenario` and `config` must be live handles; `out` must be writable.
 */
enum ReStatus re_run(const struct ReScenario *scenario,
                     const struct ReConfig *config,
                     uint64_t seed,
                     struct ReLog **out);

/**
 * # Safety
 * `log` must be a live handle.
 */
enum ReRunStatus re_log_status(const struct ReLog *log);

/**
 * Number of executed steps; 0 for null.
 *
 * # Safety
 * `log` must be a live handle or null.
 */
size_t re_log_step_count(const struct ReLog *log);

/**
 * Number of collision events; 0 for null.
 *
 * # Safety
 * `log` must be a live handle or null.
 */
size_t re_log_collision_count(const struct ReLog *log);

/**
 * Ego state and risks at step `index`.
 *
 * # Safety
 * `log` must be a live handle; `out` must be writable.
 */
enum ReStatus re_log_ego_state(const struct ReLog *log, size_t index, struct ReEgoState *out);

/**
 * The log as JSON lines. Release with [`re_string_free`].
 *
 * # Safety
 * `log` must be a live handle; `out` must be writable.
 */
enum ReStatus re_log_to_jsonl(const struct ReLog *log, char **out);

/**
 * # Safety
 * `log` must come from this library and not be freed twice.
 */
void re_log_free(struct ReLog *log);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RISKETHICS_H */
