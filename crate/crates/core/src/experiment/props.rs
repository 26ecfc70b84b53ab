//! Randomized checks of the two-player guarantees of the Pareto Mediator:
//! delegating weakly dominates not delegating, and every pure equilibrium in
//! which both players delegate has at least the welfare of any pure
//! equilibrium of the original game.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{build_mediated_game, enumerate_pure_nash, Game};
use crate::learning::derive_seed;
use crate::mediator::MediatorKind;

/// Outcome of checking one game.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GameCheck {
    pub dominance_violations: Vec<String>,
    pub welfare_violations: Vec<String>,
    /// No pure equilibrium on one side, so the welfare check did not apply.
    pub welfare_skipped: bool,
}

/// Check both properties on a single two-player game.
pub fn check_game(game: &Game, kind: MediatorKind) -> Result<GameCheck> {
    if game.num_players() != 2 {
        return Err(Error::Config("proposition checks need a two-player game".into()));
    }
    let k = game.action_counts().to_vec();
    let mediated = build_mediated_game(game, kind)?;
    let mut out = GameCheck::default();

    // Weak dominance of delegating, for every player, own action and
    // opponent mediated action.
    for player in 0..2 {
        let other = 1 - player;
        for a in 0..k[player] {
            for b in 0..2 * k[other] {
                let cell = |own: usize| {
                    let mut p = [0usize; 2];
                    p[player] = own;
                    p[other] = b;
                    mediated.utility_unchecked(&p)[player]
                };
                let with = cell(k[player] + a);
                let without = cell(a);
                if with < without {
                    out.dominance_violations.push(format!(
                        "player {player}, action {a}, opponent mediated action {b}: delegate {with} < keep {without}"
                    ));
                }
            }
        }
    }

    let original = enumerate_pure_nash(game)?;
    let delegated: Vec<_> = enumerate_pure_nash(&mediated)?
        .into_iter()
        .filter(|p| p.0[0] >= k[0] && p.0[1] >= k[1])
        .collect();
    if original.is_empty() || delegated.is_empty() {
        out.welfare_skipped = true;
        return Ok(out);
    }
    let best_original = original
        .iter()
        .map(|p| game.utility_unchecked(&p.0).iter().sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    for p in &delegated {
        let total: f64 = mediated.utility_unchecked(&p.0).iter().sum();
        if total < best_original {
            out.welfare_violations.push(format!(
                "mediated equilibrium {:?} has welfare {total} < original equilibrium welfare {best_original}",
                p.0
            ));
        }
    }
    Ok(out)
}

/// Random two-player game for a seed: each player's action count is uniform
/// on `2..=max_actions`, utilities Uniform[0, 1).
pub fn random_two_player_game(seed: u64, max_actions: usize) -> Result<Game> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x5052_4F50));
    let hi = max_actions.max(2);
    let counts = vec![rng.gen_range(2..=hi), rng.gen_range(2..=hi)];
    Game::random(counts, &mut rng)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub seed: u64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropositionReport {
    pub mediator: MediatorKind,
    pub games_checked: usize,
    pub welfare_checked: usize,
    pub dominance: Vec<Counterexample>,
    pub welfare: Vec<Counterexample>,
}

impl PropositionReport {
    pub fn passed(&self) -> bool {
        self.dominance.is_empty() && self.welfare.is_empty()
    }
}

impl fmt::Display for PropositionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mediator: {}", self.mediator)?;
        writeln!(f, "games checked: {}", self.games_checked)?;
        writeln!(
            f,
            "delegation weakly dominant: {} ({} counterexamples)",
            if self.dominance.is_empty() { "PASS" } else { "FAIL" },
            self.dominance.len()
        )?;
        writeln!(
            f,
            "delegated equilibria welfare >= original equilibria welfare: {} ({} counterexamples, {} games applicable)",
            if self.welfare.is_empty() { "PASS" } else { "FAIL" },
            self.welfare.len(),
            self.welfare_checked
        )?;
        for c in &self.dominance {
            writeln!(f, "  dominance counterexample (seed {}): {}", c.seed, c.detail)?;
        }
        for c in &self.welfare {
            writeln!(f, "  welfare counterexample (seed {}): {}", c.seed, c.detail)?;
        }
        Ok(())
    }
}

/// Run both checks on one random game per seed.
pub fn verify_propositions(seeds: &[u64], max_actions: usize, kind: MediatorKind) -> Result<PropositionReport> {
    let mut report = PropositionReport {
        mediator: kind,
        games_checked: 0,
        welfare_checked: 0,
        dominance: Vec::new(),
        welfare: Vec::new(),
    };
    for &seed in seeds {
        let game = random_two_player_game(seed, max_actions)?;
        let check = check_game(&game, kind)?;
        report.games_checked += 1;
        if !check.welfare_skipped {
            report.welfare_checked += 1;
        }
        report.dominance.extend(
            check
                .dominance_violations
                .into_iter()
                .map(|detail| Counterexample { seed, detail }),
        );
        report.welfare.extend(
            check
                .welfare_violations
                .into_iter()
                .map(|detail| Counterexample { seed, detail }),
        );
    }
    Ok(report)
}
