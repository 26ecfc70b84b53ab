//! Independent epsilon-greedy learners on mediated games.
//!
//! Each agent is a flat bandit over its mediated arms: arm `a < k` plays
//! action `a` without delegating and arm `k + a` plays `a` and delegates,
//! where `k` is the agent's action count. Exploration follows
//! `eps_t = min(1, 1/t)` with `t` counted from 1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{build_mediated_game, Game, MediatedProfile};
use crate::mediator::MediatorKind;

/// SplitMix64 finalizer; derives independent sub-seeds from a master seed.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(stream.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exploration {
    /// `min(1, 1/t)`.
    InverseTime,
    /// A constant rate; `Fixed(0.0)` is pure greedy.
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub struct LearnerState {
    means: Vec<f64>,
    counts: Vec<u64>,
    step: u64,
    seed: u64,
    exploration: Exploration,
    rng: ChaCha8Rng,
    best: usize,
}

impl LearnerState {
    pub fn new(num_arms: usize, seed: u64) -> Self {
        assert!(num_arms > 0, "a learner needs at least one arm");
        LearnerState {
            means: vec![0.0; num_arms],
            counts: vec![0; num_arms],
            step: 0,
            seed,
            exploration: Exploration::InverseTime,
            rng: ChaCha8Rng::seed_from_u64(seed),
            best: 0,
        }
    }

    pub fn with_exploration(mut self, exploration: Exploration) -> Self {
        self.exploration = exploration;
        self
    }

    /// Overwrite the arm means, e.g. to probe the greedy rule directly.
    pub fn with_means(mut self, means: Vec<f64>) -> Self {
        assert_eq!(means.len(), self.means.len());
        self.means = means;
        self.best = argmax_lowest(&self.means);
        self
    }

    pub fn num_arms(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Total plays so far.
    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Exploration probability for the next selection.
    pub fn epsilon(&self) -> f64 {
        match self.exploration {
            Exploration::InverseTime => 1.0 / (self.step + 1) as f64,
            Exploration::Fixed(e) => e,
        }
    }

    /// Highest mean, lowest index among ties.
    pub fn greedy_arm(&self) -> usize {
        self.best
    }

    /// Returns the chosen arm and whether it came from exploration.
    pub fn select_arm_traced(&mut self) -> (usize, bool) {
        let eps = self.epsilon();
        if eps >= 1.0 || (eps > 0.0 && self.rng.gen::<f64>() < eps) {
            (self.rng.gen_range(0..self.means.len()), true)
        } else {
            (self.best, false)
        }
    }

    pub fn select_arm(&mut self) -> usize {
        self.select_arm_traced().0
    }

    /// Incremental mean update for `arm`.
    pub fn update(&mut self, arm: usize, reward: f64) {
        let old = self.means[arm];
        self.counts[arm] += 1;
        self.means[arm] += (reward - old) / self.counts[arm] as f64;
        self.step += 1;

        let m = self.means[arm];
        if arm == self.best {
            if m < old {
                self.best = argmax_lowest(&self.means);
            }
        } else {
            let b = self.means[self.best];
            if m > b || (m == b && arm < self.best) {
                self.best = arm;
            }
        }
    }
}

fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Rewards and resolved actions of one round.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepOutcome {
    pub rewards: Vec<f64>,
    pub resolved: Vec<usize>,
}

/// A repeated game played through a mediator.
pub trait Environment {
    fn num_agents(&self) -> usize;

    /// Actions available to `agent` in the underlying game.
    fn num_actions(&self, agent: usize) -> usize;

    /// Whether agents get delegate arms at all.
    fn delegation_enabled(&self) -> bool;

    /// Resolve mediation for one round and fill `out` with rewards and
    /// resolved actions.
    fn step(&mut self, profile: &MediatedProfile, out: &mut StepOutcome) -> Result<()>;

    fn num_arms(&self, agent: usize) -> usize {
        if self.delegation_enabled() {
            2 * self.num_actions(agent)
        } else {
            self.num_actions(agent)
        }
    }
}

/// Full per-step record of an episode.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    /// `rewards[t][i]`: realized utility of agent `i` at step `t`.
    pub rewards: Vec<Vec<f64>>,
    pub delegated: Vec<Vec<bool>>,
    pub resolved: Vec<Vec<usize>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    /// Population-mean reward at each step.
    pub fn mean_rewards(&self) -> Vec<f64> {
        self.rewards
            .iter()
            .map(|r| r.iter().sum::<f64>() / r.len() as f64)
            .collect()
    }
}

/// One learner per agent, seeded from `master_seed`.
pub fn spawn_learners<E: Environment + ?Sized>(env: &E, master_seed: u64) -> Vec<LearnerState> {
    (0..env.num_agents())
        .map(|i| LearnerState::new(env.num_arms(i), derive_seed(master_seed, i as u64)))
        .collect()
}

/// Play `horizon` rounds, reporting every round to `observer`.
pub fn run_episode_with<E, F>(env: &mut E, agents: &mut [LearnerState], horizon: usize, mut observer: F) -> Result<()>
where
    E: Environment + ?Sized,
    F: FnMut(usize, &MediatedProfile, &StepOutcome),
{
    let n = env.num_agents();
    if agents.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: agents.len(),
        });
    }
    let actions: Vec<usize> = (0..n).map(|i| env.num_actions(i)).collect();
    let delegation = env.delegation_enabled();
    let mut profile = MediatedProfile::plain(vec![0; n]);
    let mut arms = vec![0usize; n];
    let mut out = StepOutcome::default();
    for t in 0..horizon {
        for (i, agent) in agents.iter_mut().enumerate() {
            let arm = agent.select_arm();
            arms[i] = arm;
            profile.actions[i] = arm % actions[i];
            profile.delegate[i] = delegation && arm >= actions[i];
        }
        env.step(&profile, &mut out)?;
        for (i, agent) in agents.iter_mut().enumerate() {
            agent.update(arms[i], out.rewards[i]);
        }
        observer(t, &profile, &out);
    }
    Ok(())
}

/// Play an episode and keep the full trajectory.
pub fn run_episode<E: Environment + ?Sized>(
    env: &mut E,
    agents: &mut [LearnerState],
    horizon: usize,
) -> Result<Trajectory> {
    let mut traj = Trajectory::default();
    run_episode_with(env, agents, horizon, |_, profile, out| {
        traj.rewards.push(out.rewards.clone());
        traj.delegated.push(profile.delegate.clone());
        traj.resolved.push(out.resolved.clone());
    })?;
    Ok(traj)
}

/// Spawn learners from `seed` and stream an episode to `observer`.
pub fn run_episode_stream<E, F>(env: &mut E, horizon: usize, seed: u64, observer: F) -> Result<()>
where
    E: Environment + ?Sized,
    F: FnMut(usize, &MediatedProfile, &StepOutcome),
{
    let mut agents = spawn_learners(env, seed);
    run_episode_with(env, &mut agents, horizon, observer)
}

/// A normal-form game played through a mediator, with the mediated payoff
/// table precomputed so each round is a lookup.
#[derive(Debug, Clone)]
pub struct GameEnvironment {
    base: Game,
    table: Game,
    kind: MediatorKind,
    scratch: Vec<usize>,
}

impl GameEnvironment {
    pub fn new(game: Game, kind: MediatorKind) -> Result<Self> {
        let table = match kind {
            MediatorKind::None => game.clone(),
            _ => build_mediated_game(&game, kind)?,
        };
        let n = game.num_players();
        Ok(GameEnvironment {
            base: game,
            table,
            kind,
            scratch: vec![0; n],
        })
    }

    pub fn game(&self) -> &Game {
        &self.base
    }

    pub fn mediated_table(&self) -> &Game {
        &self.table
    }
}

impl Environment for GameEnvironment {
    fn num_agents(&self) -> usize {
        self.base.num_players()
    }

    fn num_actions(&self, agent: usize) -> usize {
        self.base.action_counts()[agent]
    }

    fn delegation_enabled(&self) -> bool {
        self.kind != MediatorKind::None
    }

    fn step(&mut self, profile: &MediatedProfile, out: &mut StepOutcome) -> Result<()> {
        let counts = self.base.action_counts();
        if self.kind == MediatorKind::None {
            self.scratch.copy_from_slice(&profile.actions);
        } else {
            for (i, slot) in self.scratch.iter_mut().enumerate() {
                *slot = if profile.delegate[i] {
                    counts[i] + profile.actions[i]
                } else {
                    profile.actions[i]
                };
            }
        }
        let u = self.table.utility_unchecked(&self.scratch);
        out.rewards.clear();
        out.rewards.extend_from_slice(u);
        // The explicit table stores payoffs only; re-resolve for the actions.
        out.resolved.clear();
        if self.kind == MediatorKind::None || profile.delegate.iter().all(|d| !d) {
            out.resolved.extend_from_slice(&profile.actions);
        } else {
            let outcome = crate::mediator::resolve(&self.base, profile, self.kind)?;
            out.resolved.extend_from_slice(outcome.resolved.actions());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_always_explores() {
        let s = LearnerState::new(4, 1);
        assert_eq!(s.epsilon(), 1.0);
        let mut s = s.with_means(vec![0.0, 0.0, 9.0, 0.0]);
        // Uniform over all arms on the first pull regardless of the means.
        let mut seen = [false; 4];
        for seed in 0..200 {
            let mut fresh = LearnerState::new(4, seed).with_means(vec![0.0, 0.0, 9.0, 0.0]);
            seen[fresh.select_arm()] = true;
        }
        assert!(seen.iter().all(|&x| x));
        s.update(2, 9.0);
        assert_eq!(s.epsilon(), 0.5);
    }

    #[test]
    fn update_is_incremental_mean() {
        let mut s = LearnerState::new(2, 0);
        s.update(0, 0.7);
        assert_eq!(s.means()[0], 0.7);
        assert_eq!(s.counts()[0], 1);

        let mut s = LearnerState::new(1, 0);
        s.update(0, 0.5);
        s.update(0, 1.0);
        assert_eq!(s.means()[0], 0.75);
        assert_eq!(s.step(), 2);
    }

    #[test]
    fn greedy_breaks_ties_low() {
        let s = LearnerState::new(3, 0)
            .with_exploration(Exploration::Fixed(0.0))
            .with_means(vec![0.5, 0.9, 0.9]);
        assert_eq!(s.greedy_arm(), 1);
        let mut s = s;
        assert_eq!(s.select_arm(), 1);
        s.update(1, 0.0);
        assert_eq!(s.greedy_arm(), 2);
        s.update(0, 5.0);
        assert_eq!(s.greedy_arm(), 0);
    }

    #[test]
    fn same_seed_same_arms() {
        let run = || {
            let mut s = LearnerState::new(3, 42);
            (0..10)
                .map(|k| {
                    let a = s.select_arm();
                    s.update(a, (k % 3) as f64 * 0.1);
                    a
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }

    #[test]
    fn zero_horizon_is_empty() {
        let mut env = GameEnvironment::new(Game::prisoners_dilemma(), MediatorKind::Pareto).unwrap();
        let mut agents = spawn_learners(&env, 0);
        let t = run_episode(&mut env, &mut agents, 0).unwrap();
        assert!(t.is_empty());
    }

    #[test]
    fn constant_environment_rewards_one() {
        let g = Game::new(vec![1], vec![1.0]).unwrap();
        let mut env = GameEnvironment::new(g, MediatorKind::None).unwrap();
        let mut agents = spawn_learners(&env, 5);
        let t = run_episode(&mut env, &mut agents, 50).unwrap();
        assert!(t.mean_rewards().iter().all(|&r| r == 1.0));
    }

    #[test]
    fn none_mediator_has_no_delegate_arms() {
        let env = GameEnvironment::new(Game::prisoners_dilemma(), MediatorKind::None).unwrap();
        assert_eq!(env.num_arms(0), 2);
        let env = GameEnvironment::new(Game::prisoners_dilemma(), MediatorKind::Punish).unwrap();
        assert_eq!(env.num_arms(1), 4);
    }

    #[test]
    fn mismatched_agent_count_errors() {
        let mut env = GameEnvironment::new(Game::prisoners_dilemma(), MediatorKind::None).unwrap();
        let mut agents = vec![LearnerState::new(2, 0)];
        assert!(run_episode(&mut env, &mut agents, 3).is_err());
    }
}
