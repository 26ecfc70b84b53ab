//! Exact exhaustive mediators for unstructured normal-form games.
//!
//! Both mediators search over joint reassignments of the delegators' actions
//! with every non-delegator pinned to their submitted action. Ties resolve to
//! the submitted profile when it is optimal, otherwise to the
//! lexicographically smallest optimal reassignment.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{advance, cell_count, check_cap, Game, MediatedProfile, PureProfile, DEFAULT_CELL_CAP};

/// Which mediator resolves delegated actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MediatorKind {
    /// Identity: submitted actions are always played.
    None,
    Pareto,
    Punish,
}

impl MediatorKind {
    pub const ALL: [MediatorKind; 3] = [MediatorKind::None, MediatorKind::Pareto, MediatorKind::Punish];

    pub fn as_str(self) -> &'static str {
        match self {
            MediatorKind::None => "none",
            MediatorKind::Pareto => "pareto",
            MediatorKind::Punish => "punish",
        }
    }
}

impl fmt::Display for MediatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MediatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(MediatorKind::None),
            "pareto" => Ok(MediatorKind::Pareto),
            "punish" | "punishing" => Ok(MediatorKind::Punish),
            other => Err(Error::Config(format!("unknown mediator kind {other:?}"))),
        }
    }
}

/// The profile a mediator actually plays, plus diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MediatorOutcome {
    pub resolved: PureProfile,
    /// Whether the resolved profile differs from the submitted one.
    pub activated: bool,
    /// Number of tied optimal profiles found by the search.
    pub num_optima: usize,
}

impl MediatorOutcome {
    fn identity(sm: &MediatedProfile) -> Self {
        MediatorOutcome {
            resolved: sm.submitted(),
            activated: false,
            num_optima: 1,
        }
    }
}

fn validate(game: &Game, sm: &MediatedProfile) -> Result<()> {
    if sm.delegate.len() != sm.actions.len() {
        return Err(Error::LengthMismatch {
            expected: sm.actions.len(),
            actual: sm.delegate.len(),
        });
    }
    game.cell_index(&sm.actions).map(|_| ())
}

#[derive(Clone, Copy, PartialEq)]
enum Direction {
    Maximize,
    Minimize,
}

/// Exhaustive search over the joint actions of `movers`, everybody else
/// pinned to `sm.actions`.
fn search<O, F>(
    game: &Game,
    sm: &MediatedProfile,
    movers: &[usize],
    cap: usize,
    direction: Direction,
    objective: O,
    feasible: F,
) -> Result<MediatorOutcome>
where
    O: Fn(&[f64]) -> f64,
    F: Fn(&[f64]) -> bool,
{
    let counts = game.action_counts();
    let radices: Vec<usize> = movers.iter().map(|&i| counts[i]).collect();
    check_cap(cell_count(radices.iter().copied()), cap)?;

    let better = |a: f64, b: f64| match direction {
        Direction::Maximize => a > b,
        Direction::Minimize => a < b,
    };

    let mut profile = sm.actions.clone();
    let mut digits = vec![0usize; movers.len()];
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut ties = 0usize;
    loop {
        for (&p, &d) in movers.iter().zip(&digits) {
            profile[p] = d;
        }
        let u = game.utility_unchecked(&profile);
        if feasible(u) {
            let value = objective(u);
            match &best {
                Some((b, _)) if better(value, *b) => {
                    best = Some((value, profile.clone()));
                    ties = 1;
                }
                Some((b, _)) if value == *b => ties += 1,
                Some(_) => {}
                None => {
                    best = Some((value, profile.clone()));
                    ties = 1;
                }
            }
        }
        if !advance(&mut digits, &radices) {
            break;
        }
    }

    // The submitted profile is always in the search space; the callers'
    // feasibility filters always admit it.
    let (best_value, lexi_first) = best.expect("submitted profile is feasible");
    let submitted_value = objective(game.utility_unchecked(&sm.actions));
    let resolved = if submitted_value == best_value {
        sm.actions.clone()
    } else {
        lexi_first
    };
    let activated = resolved != sm.actions;
    Ok(MediatorOutcome {
        resolved: PureProfile(resolved),
        activated,
        num_optima: ties,
    })
}

/// Pareto Mediator: with two or more delegators, maximize the delegators'
/// total utility subject to no delegator doing worse than under the
/// submitted profile. With at most one delegator nothing changes.
pub fn pareto_mediate(game: &Game, sm: &MediatedProfile) -> Result<MediatorOutcome> {
    pareto_mediate_capped(game, sm, DEFAULT_CELL_CAP)
}

pub fn pareto_mediate_capped(game: &Game, sm: &MediatedProfile, cap: usize) -> Result<MediatorOutcome> {
    validate(game, sm)?;
    let delegators = sm.delegators();
    if delegators.len() <= 1 {
        return Ok(MediatorOutcome::identity(sm));
    }
    let baseline: Vec<f64> = game.utility_unchecked(&sm.actions).to_vec();
    search(
        game,
        sm,
        &delegators,
        cap,
        Direction::Maximize,
        |u| delegators.iter().map(|&i| u[i]).sum(),
        |u| delegators.iter().all(|&i| u[i] >= baseline[i]),
    )
}

/// Punishing Mediator: when everybody delegates, play a welfare-maximizing
/// profile; otherwise use the delegators to minimize the non-delegators'
/// total utility. Without delegators nothing changes.
pub fn punish_mediate(game: &Game, sm: &MediatedProfile) -> Result<MediatorOutcome> {
    punish_mediate_capped(game, sm, DEFAULT_CELL_CAP)
}

pub fn punish_mediate_capped(game: &Game, sm: &MediatedProfile, cap: usize) -> Result<MediatorOutcome> {
    validate(game, sm)?;
    let delegators = sm.delegators();
    if delegators.is_empty() {
        return Ok(MediatorOutcome::identity(sm));
    }
    if delegators.len() == game.num_players() {
        return search(
            game,
            sm,
            &delegators,
            cap,
            Direction::Maximize,
            |u| u.iter().sum(),
            |_| true,
        );
    }
    let outsiders = sm.non_delegators();
    search(
        game,
        sm,
        &delegators,
        cap,
        Direction::Minimize,
        |u| outsiders.iter().map(|&i| u[i]).sum(),
        |_| true,
    )
}

pub fn resolve(game: &Game, sm: &MediatedProfile, kind: MediatorKind) -> Result<MediatorOutcome> {
    resolve_capped(game, sm, kind, DEFAULT_CELL_CAP)
}

pub fn resolve_capped(game: &Game, sm: &MediatedProfile, kind: MediatorKind, cap: usize) -> Result<MediatorOutcome> {
    match kind {
        MediatorKind::None => {
            validate(game, sm)?;
            Ok(MediatorOutcome::identity(sm))
        }
        MediatorKind::Pareto => pareto_mediate_capped(game, sm, cap),
        MediatorKind::Punish => punish_mediate_capped(game, sm, cap),
    }
}
