//! C ABI over the mediation library.
//!
//! Games are opaque handles created by `med_game_*` constructors and
//! released with `med_game_free`. Every fallible call returns a
//! [`MedStatus`]; on failure `med_last_error` describes the problem. Output
//! buffers are caller-allocated.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use mediation::{
    build_mediated_game, enumerate_pure_nash, resolve, solve_assignment, AssignmentProblem, Error, Game,
    MediatedProfile, MediatorKind,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MedStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidProfile = 3,
    TooLarge = 4,
    Infeasible = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MedMediator {
    None = 0,
    Pareto = 1,
    Punish = 2,
}

/// Mediators cross the boundary as plain integers (`MedMediator` values)
/// so that out-of-range input is an error rather than undefined behavior.
fn mediator_kind(m: u32) -> Result<MediatorKind, Failure> {
    match m {
        x if x == MedMediator::None as u32 => Ok(MediatorKind::None),
        x if x == MedMediator::Pareto as u32 => Ok(MediatorKind::Pareto),
        x if x == MedMediator::Punish as u32 => Ok(MediatorKind::Punish),
        other => Err(Failure(MedStatus::InvalidArgument, format!("unknown mediator {other}"))),
    }
}

/// Opaque game handle.
pub struct MedGame {
    game: Game,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> MedStatus {
    match e {
        Error::InvalidProfile(_) | Error::InvalidAction(_) | Error::LengthMismatch { .. } => MedStatus::InvalidProfile,
        Error::TooLarge { .. } => MedStatus::TooLarge,
        Error::Infeasible { .. } => MedStatus::Infeasible,
        _ => MedStatus::InvalidArgument,
    }
}

struct Failure(MedStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(MedStatus::NullPointer, format!("{what} is null"))
}

/// Run `f`, translating errors and panics into a status.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> MedStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            MedStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            MedStatus::Panic
        }
    }
}

/// # Safety
/// `ptr` must be null or valid for `len` reads.
unsafe fn input<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(ptr, len))
}

/// # Safety
/// `ptr` must be null or valid for `len` writes.
unsafe fn output<'a, T>(ptr: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(ptr, len))
}

/// # Safety
/// `game` must be null or a live handle.
unsafe fn handle<'a>(game: *const MedGame) -> Result<&'a Game, Failure> {
    game.as_ref().map(|g| &g.game).ok_or_else(|| null("game"))
}

fn store(out: *mut *mut MedGame, game: Game) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    // SAFETY: checked non-null; the caller provides a writable slot.
    unsafe { *out = Box::into_raw(Box::new(MedGame { game })) };
    Ok(())
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call on the same thread.
#[no_mangle]
pub extern "C" fn med_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Create a game from `num_players` action counts and a row-major payoff
/// array of `num_cells * num_players` utilities, player 0 most significant.
///
/// # Safety
/// Pointers must be valid for the given lengths; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn med_game_new(
    action_counts: *const usize,
    num_players: usize,
    payoffs: *const f64,
    payoffs_len: usize,
    out: *mut *mut MedGame,
) -> MedStatus {
    guard(|| {
        let counts = input(action_counts, num_players, "action_counts")?.to_vec();
        let payoffs = input(payoffs, payoffs_len, "payoffs")?.to_vec();
        store(out, Game::new(counts, payoffs)?)
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn med_game_prisoners_dilemma(out: *mut *mut MedGame) -> MedStatus {
    guard(|| store(out, Game::prisoners_dilemma()))
}

/// Release a handle; null is ignored.
///
/// # Safety
/// `game` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn med_game_free(game: *mut MedGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// Number of players, or 0 for a null handle.
///
/// # Safety
/// `game` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn med_game_num_players(game: *const MedGame) -> usize {
    game.as_ref().map_or(0, |g| g.game.num_players())
}

/// Copy the action counts into `out` (length `num_players`).
///
/// # Safety
/// `game` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn med_game_action_counts(game: *const MedGame, out: *mut usize, len: usize) -> MedStatus {
    guard(|| {
        let g = handle(game)?;
        if len < g.num_players() {
            return Err(Failure(
                MedStatus::BufferTooSmall,
                format!("need {} entries", g.num_players()),
            ));
        }
        output(out, len, "out")?[..g.num_players()].copy_from_slice(g.action_counts());
        Ok(())
    })
}

/// Utilities of a pure profile; `actions` and `out` have `num_players`
/// entries.
///
/// # Safety
/// `game` must be a live handle; buffers valid for `num_players` elements.
#[no_mangle]
pub unsafe extern "C" fn med_game_utility(
    game: *const MedGame,
    actions: *const usize,
    num_players: usize,
    out: *mut f64,
) -> MedStatus {
    guard(|| {
        let g = handle(game)?;
        let actions = input(actions, num_players, "actions")?;
        let u = g.utility(&actions.to_vec().into())?;
        output(out, num_players, "out")?.copy_from_slice(u);
        Ok(())
    })
}

/// Resolve a mediated profile under a `MedMediator`. `delegate[i]` is
/// nonzero when player `i` delegates. Writes the played profile to `resolved` and, if non-null,
/// whether the mediator changed anything to `activated`.
///
/// # Safety
/// `game` must be a live handle; arrays valid for `num_players` elements;
/// `activated` null or writable.
#[no_mangle]
pub unsafe extern "C" fn med_mediate(
    game: *const MedGame,
    mediator: u32,
    actions: *const usize,
    delegate: *const u8,
    num_players: usize,
    resolved: *mut usize,
    activated: *mut bool,
) -> MedStatus {
    guard(|| {
        let g = handle(game)?;
        let actions = input(actions, num_players, "actions")?.to_vec();
        let delegate = input(delegate, num_players, "delegate")?
            .iter()
            .map(|&d| d != 0)
            .collect();
        let sm = MediatedProfile::new(actions, delegate)?;
        let outcome = resolve(g, &sm, mediator_kind(mediator)?)?;
        output(resolved, num_players, "resolved")?.copy_from_slice(&outcome.resolved.0);
        if !activated.is_null() {
            *activated = outcome.activated;
        }
        Ok(())
    })
}

/// Build the explicit mediated game for a `MedMediator` as a new handle. Player `i`'s action
/// `a` means "play `a`", action `k_i + a` means "play `a` and delegate".
///
/// # Safety
/// `game` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn med_build_mediated_game(
    game: *const MedGame,
    mediator: u32,
    out: *mut *mut MedGame,
) -> MedStatus {
    guard(|| store(out, build_mediated_game(handle(game)?, mediator_kind(mediator)?)?))
}

/// Pure Nash equilibria, flattened into `out` as consecutive profiles of
/// `num_players` actions. `count` always receives the number of
/// equilibria; with too small a buffer the status is `BufferTooSmall` and
/// nothing is written.
///
/// # Safety
/// `game` must be a live handle; `out` valid for `capacity` writes; `count`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn med_pure_nash(
    game: *const MedGame,
    out: *mut usize,
    capacity: usize,
    count: *mut usize,
) -> MedStatus {
    guard(|| {
        let g = handle(game)?;
        if count.is_null() {
            return Err(null("count"));
        }
        let equilibria = enumerate_pure_nash(g)?;
        *count = equilibria.len();
        let needed = equilibria.len() * g.num_players();
        if needed > capacity {
            return Err(Failure(MedStatus::BufferTooSmall, format!("need {needed} entries")));
        }
        let buf = output(out, needed, "out")?;
        for (chunk, p) in buf.chunks_mut(g.num_players().max(1)).zip(&equilibria) {
            chunk.copy_from_slice(&p.0);
        }
        Ok(())
    })
}

/// Maximum-weight assignment of `num_agents` agents to distinct slots.
/// `weights` is row-major `num_agents * num_slots`; negative infinity marks
/// a forbidden pair. Writes each agent's slot and the total weight.
///
/// # Safety
/// `weights` valid for `num_agents * num_slots` reads; `slot_of` for
/// `num_agents` writes; `total` null or writable.
#[no_mangle]
pub unsafe extern "C" fn med_solve_assignment(
    weights: *const f64,
    num_agents: usize,
    num_slots: usize,
    slot_of: *mut usize,
    total: *mut f64,
) -> MedStatus {
    guard(|| {
        let len = num_agents
            .checked_mul(num_slots)
            .ok_or_else(|| Failure(MedStatus::InvalidArgument, "size overflow".into()))?;
        let w = input(weights, len, "weights")?.to_vec();
        let solution = solve_assignment(&AssignmentProblem::new(num_agents, num_slots, w)?)?;
        output(slot_of, num_agents, "slot_of")?.copy_from_slice(&solution.slot_of);
        if !total.is_null() {
            *total = solution.total_weight;
        }
        Ok(())
    })
}
