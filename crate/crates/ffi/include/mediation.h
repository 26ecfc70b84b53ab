#ifndef MEDIATION_H
#define MEDIATION_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MedStatus {
  MED_STATUS_OK = 0,
  MED_STATUS_NULL_POINTER = 1,
  MED_STATUS_INVALID_ARGUMENT = 2,
  MED_STATUS_INVALID_PROFILE = 3,
  MED_STATUS_TOO_LARGE = 4,
  MED_STATUS_INFEASIBLE = 5,
  MED_STATUS_BUFFER_TOO_SMALL = 6,
  MED_STATUS_PANIC = 7,
} MedStatus;

typedef enum MedMediator {
  MED_MEDIATOR_NONE = 0,
  MED_MEDIATOR_PARETO = 1,
  MED_MEDIATOR_PUNISH = 2,
} MedMediator;

/**
 * Opaque game handle.
 */
typedef struct MedGame MedGame;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call on the same thread.
 */
const char *med_last_error(void);

/**
 * Create a game from `num_players` action counts and a row-major payoff
 * array of `num_cells * num_players` utilities, player 0 most significant.
 *
 * # Safety
 * Pointers must be valid for the given lengths; `out` must be writable.
 */
enum MedStatus med_game_new(const size_t *action_counts,
                            size_t num_players,
                            const double *payoffs,
                            size_t payoffs_len,
                            struct MedGame **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum MedStatus med_game_prisoners_dilemma(struct MedGame **out);

/**
 * Release a handle; null is ignored.
 *
 * # Safety
 * `game` must be null or a handle not yet freed.
 */
void med_game_free(struct MedGame *game);

/**
 * Number of players, or 0 for a null handle.
 *
 * # Safety
 * `game` must be null or a live handle.
 */
size_t med_game_num_players(const struct MedGame *game);

/**
 * Copy the action counts into `out` (length `num_players`).
 *
 * # Safety
 * `game` must be a live handle and `out` valid for `len` writes.
 */
enum MedStatus med_game_action_counts(const struct MedGame *game, size_t *out, size_t len);

/**
 * Utilities of a pure profile; `actions` and `out` have `num_players`
 * entries.
 *
 * # Safety
 * `game` must be a live handle; buffers valid for `num_players` elements.
 */
enum MedStatus med_game_utility(const struct MedGame *game,
                                const size_t *actions,
                                size_t num_players,
                                double *out);

/**
 * Resolve a mediated profile under a `MedMediator`. `delegate[i]` is
 * nonzero when player `i` delegates. Writes the played profile to `resolved` and, if non-null,
 * whether the mediator changed anything to `activated`.
 *
 * # Safety
 * `game` must be a live handle; arrays valid for `num_players` elements;
 * `activated` null or writable.
 */
enum MedStatus med_mediate(const struct MedGame *game,
                           uint32_t mediator,
                           const size_t *actions,
                           const uint8_t *delegate,
                           size_t num_players,
                           size_t *resolved,
                           bool *activated);

/**
 * Build the explicit mediated game for a `MedMediator` as a new handle. Player `i`'s action
 * `a` means "play `a`", action `k_i + a` means "play `a` and delegate".
 *
 * # Safety
 * `game` must be a live handle; `out` writable.
 */
enum MedStatus med_build_mediated_game(const struct MedGame *game,
                                       uint32_t mediator,
                                       struct MedGame **out);

/**
 * Pure Nash equilibria, flattened into `out` as consecutive profiles of
 * `num_players` actions. `count` always receives the number of
 * equilibria; with too small a buffer the status is `BufferTooSmall` and
 * nothing is written.
 *
 * # Safety
 * `game` must be a live handle; `out` valid for `capacity` writes; `count`
 * writable.
 */
enum MedStatus med_pure_nash(const struct MedGame *game,
                             size_t *out,
                             size_t capacity,
                             size_t *count);

/**
 * Maximum-weight assignment of `num_agents` agents to distinct slots.
 * `weights` is row-major `num_agents * num_slots`; negative infinity marks
 * a forbidden pair. Writes each agent's slot and the total weight.
 *
 * # Safety
 * `weights` valid for `num_agents * num_slots` reads; `slot_of` for
 * `num_agents` writes; `total` null or writable.
 */
enum MedStatus med_solve_assignment(const double *weights,
                                    size_t num_agents,
                                    size_t num_slots,
                                    size_t *slot_of,
                                    double *total);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MEDIATION_H */
