#ifndef ETE_ASSIGN_H
#define ETE_ASSIGN_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EteStatus {
  ETE_STATUS_OK = 0,
  ETE_STATUS_NULL_POINTER = 1,
  ETE_STATUS_INVALID_UTF8 = 2,
  ETE_STATUS_PARSE = 3,
  ETE_STATUS_INVALID_INPUT = 4,
  ETE_STATUS_BUDGET_EXCEEDED = 5,
  ETE_STATUS_ASSUMPTION_VIOLATED = 6,
  ETE_STATUS_NOT_CONSECUTIVE_EQUALS = 7,
  ETE_STATUS_NOT_DOWNWARD_CLOSED = 8,
  ETE_STATUS_UNSUPPORTED = 9,
  ETE_STATUS_PANIC = 10,
} EteStatus;

typedef enum EteMode {
  ETE_MODE_CYCLIC = 0,
  ETE_MODE_FULL = 1,
} EteMode;

typedef struct EteLottery EteLottery;

/**
 * An instance together with the enumeration budget used for it.
 */
typedef struct EteProblem EteProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *ete_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void ete_string_free(char *s);

/**
 * # Safety
 * `json` must be a nul-terminated string and `out` writable.
 */
enum EteStatus ete_problem_from_json(const char *json, struct EteProblem **out);

/**
 * # Safety
 * `p` must be null or a handle from [`ete_problem_from_json`] not yet freed.
 */
void ete_problem_free(struct EteProblem *p);

/**
 * # Safety
 * `p` must be a live problem handle.
 */
enum EteStatus ete_problem_set_budget(struct EteProblem *p, size_t max_tested, size_t max_retained);

/**
 * # Safety
 * `p` must be a live problem handle; `agents` and `objects` writable.
 */
enum EteStatus ete_problem_dimensions(const struct EteProblem *p, size_t *agents, size_t *objects);

/**
 * # Safety
 * `p` must be a live problem handle, `json` a nul-terminated string and
 * `out` writable.
 */
enum EteStatus ete_lottery_from_json(const struct EteProblem *p,
                                     const char *json,
                                     struct EteLottery **out);

/**
 * # Safety
 * `l` must be null or a lottery handle not yet freed.
 */
void ete_lottery_free(struct EteLottery *l);

/**
 * Writes the lottery as a JSON list of `{assignment, probability}`.
 *
 * # Safety
 * `l` must be a live lottery handle and `out` writable.
 */
enum EteStatus ete_lottery_to_json(const struct EteLottery *l, char **out);

/**
 * Writes every agent's marginal as JSON, probabilities as exact fractions.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum EteStatus ete_lottery_marginals_json(const struct EteProblem *p,
                                          const struct EteLottery *l,
                                          char **out);

/**
 * Serial dictatorship along `alpha` (agent indices, highest priority
 * first) followed by the reassignment.
 *
 * # Safety
 * `p` must be a live problem handle, `alpha` point to `len` indices and
 * `out` be writable.
 */
enum EteStatus ete_run_pipeline(const struct EteProblem *p,
                                const size_t *alpha,
                                size_t len,
                                enum EteMode mode,
                                struct EteLottery **out);

/**
 * # Safety
 * Handles must be live and `out` writable.
 */
enum EteStatus ete_reassign_lottery(const struct EteProblem *p,
                                    const struct EteLottery *l,
                                    enum EteMode mode,
                                    struct EteLottery **out);

/**
 * # Safety
 * Handles must be live and `out` writable.
 */
enum EteStatus ete_is_ete(const struct EteProblem *p, const struct EteLottery *l, bool *out);

/**
 * # Safety
 * Handles must be live and `out` writable.
 */
enum EteStatus ete_is_oe(const struct EteProblem *p, const struct EteLottery *l, bool *out);

/**
 * # Safety
 * Handles must be live and `out` writable.
 */
enum EteStatus ete_is_re(const struct EteProblem *p, const struct EteLottery *l, bool *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ETE_ASSIGN_H */
