//! Finite N-player normal-form games.
//!
//! Payoffs live in a dense row-major tensor: profile `(s_0, ..., s_{N-1})`
//! maps to cell `sum_i s_i * stride_i` where player 0 is the most significant
//! digit, so cell order is lexicographic profile order. Each cell holds the
//! full utility vector `(u_0(s), ..., u_{N-1}(s))`.

use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};
use crate::mediator::{self, MediatorKind};

/// Default bound on the number of cells any exhaustive scan may visit.
pub const DEFAULT_CELL_CAP: usize = 10_000_000;

/// A joint pure action profile, one 0-based action index per player.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PureProfile(pub Vec<usize>);

impl PureProfile {
    pub fn new(actions: Vec<usize>) -> Self {
        PureProfile(actions)
    }

    pub fn actions(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<usize>> for PureProfile {
    fn from(v: Vec<usize>) -> Self {
        PureProfile(v)
    }
}

/// Submitted actions plus one delegation bit per player.
///
/// The delegating set is always derived from `delegate`; it is never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MediatedProfile {
    pub actions: Vec<usize>,
    pub delegate: Vec<bool>,
}

impl MediatedProfile {
    pub fn new(actions: Vec<usize>, delegate: Vec<bool>) -> Result<Self> {
        if actions.len() != delegate.len() {
            return Err(Error::LengthMismatch {
                expected: actions.len(),
                actual: delegate.len(),
            });
        }
        Ok(MediatedProfile { actions, delegate })
    }

    /// Nobody delegates.
    pub fn plain(actions: Vec<usize>) -> Self {
        let n = actions.len();
        MediatedProfile {
            actions,
            delegate: vec![false; n],
        }
    }

    /// Everybody delegates.
    pub fn all_delegate(actions: Vec<usize>) -> Self {
        let n = actions.len();
        MediatedProfile {
            actions,
            delegate: vec![true; n],
        }
    }

    pub fn num_players(&self) -> usize {
        self.actions.len()
    }

    pub fn delegators(&self) -> Vec<usize> {
        (0..self.delegate.len()).filter(|&i| self.delegate[i]).collect()
    }

    pub fn non_delegators(&self) -> Vec<usize> {
        (0..self.delegate.len()).filter(|&i| !self.delegate[i]).collect()
    }

    pub fn num_delegators(&self) -> usize {
        self.delegate.iter().filter(|&&d| d).count()
    }

    pub fn submitted(&self) -> PureProfile {
        PureProfile(self.actions.clone())
    }

    /// Decode a profile of the explicit mediated game: index `a < |S_i|` is
    /// action `a` without delegation, `|S_i| + a` is action `a` delegated.
    pub fn from_mediated_indices(action_counts: &[usize], indices: &[usize]) -> Result<Self> {
        if indices.len() != action_counts.len() {
            return Err(Error::LengthMismatch {
                expected: action_counts.len(),
                actual: indices.len(),
            });
        }
        let mut actions = Vec::with_capacity(indices.len());
        let mut delegate = Vec::with_capacity(indices.len());
        for (i, (&m, &k)) in indices.iter().zip(action_counts).enumerate() {
            if m >= 2 * k {
                return Err(Error::InvalidProfile(format!(
                    "player {i}: mediated action {m} out of range 0..{}",
                    2 * k
                )));
            }
            actions.push(m % k);
            delegate.push(m >= k);
        }
        Ok(MediatedProfile { actions, delegate })
    }

    /// Inverse of [`MediatedProfile::from_mediated_indices`].
    pub fn to_mediated_indices(&self, action_counts: &[usize]) -> Vec<usize> {
        self.actions
            .iter()
            .zip(&self.delegate)
            .zip(action_counts)
            .map(|((&a, &d), &k)| if d { k + a } else { a })
            .collect()
    }
}

/// Advance a mixed-radix counter in lexicographic order (last digit fastest).
/// Returns `false` once the counter wraps back to all zeros.
pub(crate) fn advance(digits: &mut [usize], radices: &[usize]) -> bool {
    for pos in (0..digits.len()).rev() {
        digits[pos] += 1;
        if digits[pos] < radices[pos] {
            return true;
        }
        digits[pos] = 0;
    }
    false
}

/// Product of the radices, saturating into `u128` so that oversized games
/// report their true size in errors instead of overflowing.
pub(crate) fn cell_count(radices: impl IntoIterator<Item = usize>) -> u128 {
    radices.into_iter().fold(1u128, |acc, k| acc.saturating_mul(k as u128))
}

pub(crate) fn check_cap(cells: u128, cap: usize) -> Result<()> {
    if cells > cap as u128 {
        Err(Error::TooLarge { cells, cap })
    } else {
        Ok(())
    }
}

/// A finite normal-form game with a dense payoff tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    action_counts: Vec<usize>,
    strides: Vec<usize>,
    payoffs: Vec<f64>,
}

impl Game {
    /// Build a game from action counts and a flat payoff buffer laid out as
    /// `num_cells * num_players` values in lexicographic profile order.
    pub fn new(action_counts: Vec<usize>, payoffs: Vec<f64>) -> Result<Self> {
        if action_counts.is_empty() {
            return Err(Error::InvalidGame("a game needs at least one player".into()));
        }
        if let Some(i) = action_counts.iter().position(|&k| k == 0) {
            return Err(Error::InvalidGame(format!("player {i} has no actions")));
        }
        let cells = cell_count(action_counts.iter().copied());
        let n = action_counts.len() as u128;
        let expected = cells
            .checked_mul(n)
            .filter(|&e| e <= usize::MAX as u128)
            .ok_or_else(|| Error::InvalidGame("payoff tensor too large".into()))?;
        if payoffs.len() as u128 != expected {
            return Err(Error::LengthMismatch {
                expected: expected as usize,
                actual: payoffs.len(),
            });
        }
        if let Some(pos) = payoffs.iter().position(|u| !u.is_finite()) {
            return Err(Error::InvalidGame(format!("non-finite utility at flat position {pos}")));
        }
        let mut strides = vec![1usize; action_counts.len()];
        for i in (0..action_counts.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * action_counts[i + 1];
        }
        Ok(Game {
            action_counts,
            strides,
            payoffs,
        })
    }

    /// Build a game by evaluating `f` on every profile in lexicographic order.
    pub fn from_fn<F>(action_counts: Vec<usize>, mut f: F) -> Result<Self>
    where
        F: FnMut(&[usize]) -> Vec<f64>,
    {
        let n = action_counts.len();
        let cells = cell_count(action_counts.iter().copied());
        check_cap(cells, DEFAULT_CELL_CAP)?;
        let mut payoffs = Vec::with_capacity(cells as usize * n);
        let mut digits = vec![0usize; n];
        loop {
            let u = f(&digits);
            if u.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: u.len(),
                });
            }
            payoffs.extend_from_slice(&u);
            if !advance(&mut digits, &action_counts) {
                break;
            }
        }
        Game::new(action_counts, payoffs)
    }

    /// Utilities drawn independently from Uniform[0, 1).
    pub fn random<R: Rng + ?Sized>(action_counts: Vec<usize>, rng: &mut R) -> Result<Self> {
        let cells = cell_count(action_counts.iter().copied());
        check_cap(cells, DEFAULT_CELL_CAP)?;
        let len = cells as usize * action_counts.len();
        let payoffs = (0..len).map(|_| rng.gen::<f64>()).collect();
        Game::new(action_counts, payoffs)
    }

    /// The prisoner's dilemma with actions `0 = C`, `1 = D`.
    pub fn prisoners_dilemma() -> Self {
        Game::new(vec![2, 2], vec![2.0, 2.0, 0.0, 3.0, 3.0, 0.0, 1.0, 1.0]).expect("static game is valid")
    }

    pub fn num_players(&self) -> usize {
        self.action_counts.len()
    }

    pub fn action_counts(&self) -> &[usize] {
        &self.action_counts
    }

    pub fn num_cells(&self) -> usize {
        self.payoffs.len() / self.num_players()
    }

    pub fn payoffs(&self) -> &[f64] {
        &self.payoffs
    }

    /// Flat cell index of a profile, validating every coordinate.
    pub fn cell_index(&self, actions: &[usize]) -> Result<usize> {
        if actions.len() != self.num_players() {
            return Err(Error::InvalidProfile(format!(
                "profile has {} actions, game has {} players",
                actions.len(),
                self.num_players()
            )));
        }
        let mut idx = 0;
        for (i, (&a, &k)) in actions.iter().zip(&self.action_counts).enumerate() {
            if a >= k {
                return Err(Error::InvalidProfile(format!(
                    "player {i}: action {a} out of range 0..{k}"
                )));
            }
            idx += a * self.strides[i];
        }
        Ok(idx)
    }

    #[inline]
    pub(crate) fn cell_index_unchecked(&self, actions: &[usize]) -> usize {
        actions.iter().zip(&self.strides).map(|(&a, &s)| a * s).sum()
    }

    /// Utility vector of the cell at a flat index.
    #[inline]
    pub fn cell(&self, index: usize) -> &[f64] {
        let n = self.num_players();
        &self.payoffs[index * n..(index + 1) * n]
    }

    #[inline]
    pub(crate) fn utility_unchecked(&self, actions: &[usize]) -> &[f64] {
        self.cell(self.cell_index_unchecked(actions))
    }

    /// Utility vector `(u_0(s), ..., u_{N-1}(s))` of a pure profile.
    pub fn utility(&self, profile: &PureProfile) -> Result<&[f64]> {
        let idx = self.cell_index(profile.actions())?;
        Ok(self.cell(idx))
    }

    /// Sum of utilities over `subset`. The empty subset has welfare 0.
    pub fn social_welfare(&self, profile: &PureProfile, subset: &[usize]) -> Result<f64> {
        let u = self.utility(profile)?;
        if let Some(&bad) = subset.iter().find(|&&i| i >= u.len()) {
            return Err(Error::InvalidProfile(format!(
                "player {bad} not in game with {} players",
                u.len()
            )));
        }
        Ok(subset.iter().map(|&i| u[i]).sum())
    }

    /// Every pure profile in lexicographic order.
    pub fn profiles(&self) -> Profiles<'_> {
        Profiles {
            radices: &self.action_counts,
            next: Some(vec![0; self.num_players()]),
        }
    }

    /// Serialize as text: the player count, the action counts, then one line
    /// per cell in lexicographic profile order holding N utilities.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.num_players());
        let counts: Vec<String> = self.action_counts.iter().map(|k| k.to_string()).collect();
        let _ = writeln!(out, "{}", counts.join(" "));
        for c in 0..self.num_cells() {
            let row: Vec<String> = self.cell(c).iter().map(|u| u.to_string()).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    /// Parse the text format written by [`Game::to_text`]. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (line, n_str) = lines.next().ok_or(Error::Parse {
            line: 0,
            message: "missing player count".into(),
        })?;
        let n: usize = n_str.parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad player count {n_str:?}"),
        })?;

        let (line, counts_str) = lines.next().ok_or(Error::Parse {
            line,
            message: "missing action counts".into(),
        })?;
        let counts = counts_str
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse {
                line,
                message: format!("bad action count: {e}"),
            })?;
        if counts.len() != n {
            return Err(Error::Parse {
                line,
                message: format!("expected {n} action counts, found {}", counts.len()),
            });
        }

        let mut payoffs = Vec::new();
        let mut rows = 0usize;
        for (line, row) in lines {
            let values = row
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    line,
                    message: format!("bad utility: {e}"),
                })?;
            if values.len() != n {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {n} utilities, found {}", values.len()),
                });
            }
            payoffs.extend(values);
            rows += 1;
        }
        let cells = cell_count(counts.iter().copied());
        if rows as u128 != cells {
            return Err(Error::Parse {
                line: 0,
                message: format!("expected {cells} payoff rows, found {rows}"),
            });
        }
        Game::new(counts, payoffs)
    }
}

/// Iterator over pure profiles in lexicographic order.
pub struct Profiles<'a> {
    radices: &'a [usize],
    next: Option<Vec<usize>>,
}

impl Iterator for Profiles<'_> {
    type Item = PureProfile;

    fn next(&mut self) -> Option<PureProfile> {
        let current = self.next.take()?;
        let mut following = current.clone();
        if advance(&mut following, self.radices) {
            self.next = Some(following);
        }
        Some(PureProfile(current))
    }
}

/// Weak Pareto dominance on `subset`: `a_i >= b_i` for every `i` in it.
pub fn pareto_dominates(a: &[f64], b: &[f64], subset: &[usize]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if let Some(&bad) = subset.iter().find(|&&i| i >= a.len()) {
        return Err(Error::InvalidProfile(format!(
            "player {bad} not in vectors of length {}",
            a.len()
        )));
    }
    Ok(subset.iter().all(|&i| a[i] >= b[i]))
}

/// All pure Nash equilibria, in lexicographic order.
pub fn enumerate_pure_nash(game: &Game) -> Result<Vec<PureProfile>> {
    enumerate_pure_nash_capped(game, DEFAULT_CELL_CAP)
}

pub fn enumerate_pure_nash_capped(game: &Game, cap: usize) -> Result<Vec<PureProfile>> {
    check_cap(cell_count(game.action_counts().iter().copied()), cap)?;
    let n = game.num_players();
    let counts = game.action_counts();
    let mut out = Vec::new();
    let mut digits = vec![0usize; n];
    loop {
        let base = game.cell_index_unchecked(&digits);
        let u = game.cell(base);
        let mut stable = true;
        'players: for i in 0..n {
            let own = digits[i];
            let row_start = base - own * game.strides[i];
            for alt in 0..counts[i] {
                if alt != own && game.cell(row_start + alt * game.strides[i])[i] > u[i] {
                    stable = false;
                    break 'players;
                }
            }
        }
        if stable {
            out.push(PureProfile(digits.clone()));
        }
        if !advance(&mut digits, counts) {
            break;
        }
    }
    Ok(out)
}

/// Build the explicit mediated game `Γ(M)`: player `i` gets `2|S_i|` actions
/// where index `a` plays `a` without delegating and `|S_i| + a` plays `a` and
/// delegates. Each cell holds `u(M(s_m))`.
pub fn build_mediated_game(game: &Game, kind: MediatorKind) -> Result<Game> {
    build_mediated_game_capped(game, kind, DEFAULT_CELL_CAP)
}

pub fn build_mediated_game_capped(game: &Game, kind: MediatorKind, cap: usize) -> Result<Game> {
    let counts = game.action_counts().to_vec();
    let mediated_counts: Vec<usize> = counts.iter().map(|k| 2 * k).collect();
    check_cap(cell_count(mediated_counts.iter().copied()), cap)?;
    let n = game.num_players();
    let mut payoffs = Vec::with_capacity(cell_count(mediated_counts.iter().copied()) as usize * n);
    let mut digits = vec![0usize; n];
    loop {
        let sm = MediatedProfile::from_mediated_indices(&counts, &digits)?;
        let outcome = mediator::resolve_capped(game, &sm, kind, cap)?;
        payoffs.extend_from_slice(game.utility_unchecked(outcome.resolved.actions()));
        if !advance(&mut digits, &mediated_counts) {
            break;
        }
    }
    Game::new(mediated_counts, payoffs)
}
