//! The mutual-matching game: every agent points at another agent, and a
//! pair that points at each other collects `reward[i][j]` and
//! `reward[j][i]`. Everyone else earns nothing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::MediatedProfile;
use crate::learning::{Environment, StepOutcome};
use crate::mediator::MediatorKind;

/// Largest number of agents paired by exact search; bigger sets use greedy.
pub const EXACT_PAIRING_LIMIT: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct MatchingInstance {
    num_agents: usize,
    reward: Vec<f64>,
}

impl MatchingInstance {
    /// `reward` is row-major `n * n`; the diagonal is ignored.
    pub fn new(num_agents: usize, reward: Vec<f64>) -> Result<Self> {
        if num_agents < 2 {
            return Err(Error::Config("the matching game needs at least two agents".into()));
        }
        if reward.len() != num_agents * num_agents {
            return Err(Error::LengthMismatch {
                expected: num_agents * num_agents,
                actual: reward.len(),
            });
        }
        Ok(MatchingInstance { num_agents, reward })
    }

    /// Independent Uniform[0, 1) rewards for every ordered pair.
    pub fn random(num_agents: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reward = (0..num_agents * num_agents)
            .map(|k| {
                let r: f64 = rng.gen();
                if k / num_agents == k % num_agents {
                    0.0
                } else {
                    r
                }
            })
            .collect();
        MatchingInstance::new(num_agents, reward)
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    #[inline]
    pub fn reward(&self, i: usize, j: usize) -> f64 {
        self.reward[i * self.num_agents + j]
    }

    #[inline]
    fn pair_weight(&self, i: usize, j: usize) -> f64 {
        self.reward(i, j) + self.reward(j, i)
    }

    pub fn validate(&self, choices: &[usize]) -> Result<()> {
        if choices.len() != self.num_agents {
            return Err(Error::LengthMismatch {
                expected: self.num_agents,
                actual: choices.len(),
            });
        }
        for (i, &c) in choices.iter().enumerate() {
            if c == i {
                return Err(Error::InvalidAction(format!("agent {i} points at itself")));
            }
            if c >= self.num_agents {
                return Err(Error::InvalidAction(format!(
                    "agent {i} points at {c}, only {} agents exist",
                    self.num_agents
                )));
            }
        }
        Ok(())
    }

    /// `u_i = reward[i][choices[i]]` when the choice is mutual, else 0.
    pub fn payoff(&self, choices: &[usize]) -> Result<Vec<f64>> {
        self.validate(choices)?;
        Ok(self.payoff_unchecked(choices))
    }

    fn payoff_unchecked(&self, choices: &[usize]) -> Vec<f64> {
        choices
            .iter()
            .enumerate()
            .map(|(i, &c)| if choices[c] == i { self.reward(i, c) } else { 0.0 })
            .collect()
    }
}

fn is_matched(choices: &[usize], i: usize) -> bool {
    choices[choices[i]] == i
}

/// Pairs among `nodes` maximizing summed pair weight: exact for up to
/// [`EXACT_PAIRING_LIMIT`] nodes, heaviest-pair-first greedy beyond.
pub fn max_weight_pairing(instance: &MatchingInstance, nodes: &[usize]) -> Vec<(usize, usize)> {
    if nodes.len() <= EXACT_PAIRING_LIMIT {
        exact_pairing(instance, nodes)
    } else {
        greedy_pairing(instance, nodes)
    }
}

fn exact_pairing(instance: &MatchingInstance, nodes: &[usize]) -> Vec<(usize, usize)> {
    let k = nodes.len();
    if k < 2 {
        return Vec::new();
    }
    let full = (1usize << k) - 1;
    // best[mask]: optimal weight pairing the nodes in `mask`; choice[mask]:
    // partner of the lowest node in `mask`, or `k` when it stays single.
    let mut best = vec![0.0f64; full + 1];
    let mut choice = vec![k; full + 1];
    for mask in 1..=full {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << low);
        // Ties prefer pairing with the lowest partner over staying single.
        let mut value = f64::NEG_INFINITY;
        let mut pick = k;
        let mut others = rest;
        while others != 0 {
            let j = others.trailing_zeros() as usize;
            others &= others - 1;
            let v = instance.pair_weight(nodes[low], nodes[j]) + best[rest & !(1 << j)];
            if v > value {
                value = v;
                pick = j;
            }
        }
        if best[rest] > value {
            value = best[rest];
            pick = k;
        }
        best[mask] = value;
        choice[mask] = pick;
    }
    let mut pairs = Vec::new();
    let mut mask = full;
    while mask != 0 {
        let low = mask.trailing_zeros() as usize;
        let pick = choice[mask];
        mask &= !(1 << low);
        if pick < k {
            mask &= !(1 << pick);
            pairs.push((nodes[low], nodes[pick]));
        }
    }
    pairs
}

fn greedy_pairing(instance: &MatchingInstance, nodes: &[usize]) -> Vec<(usize, usize)> {
    let mut candidates = Vec::with_capacity(nodes.len() * nodes.len() / 2);
    for (a, &i) in nodes.iter().enumerate() {
        for &j in &nodes[a + 1..] {
            candidates.push((instance.pair_weight(i, j), i.min(j), i.max(j)));
        }
    }
    candidates.sort_by(|x, y| {
        y.0.partial_cmp(&x.0)
            .expect("finite weights")
            .then((x.1, x.2).cmp(&(y.1, y.2)))
    });
    let mut taken = vec![false; instance.num_agents()];
    let mut pairs = Vec::new();
    for (_, i, j) in candidates {
        if !taken[i] && !taken[j] {
            taken[i] = true;
            taken[j] = true;
            pairs.push((i, j));
        }
    }
    pairs
}

fn check_profile(instance: &MatchingInstance, sm: &MediatedProfile) -> Result<()> {
    instance.validate(&sm.actions)?;
    if sm.delegate.len() != sm.actions.len() {
        return Err(Error::LengthMismatch {
            expected: sm.actions.len(),
            actual: sm.delegate.len(),
        });
    }
    Ok(())
}

/// Pareto Mediator for matching: with two or more delegators, pair up the
/// delegators who are not already mutually matched.
pub fn pareto_mediate_matching(instance: &MatchingInstance, sm: &MediatedProfile) -> Result<Vec<usize>> {
    check_profile(instance, sm)?;
    let mut choices = sm.actions.clone();
    if sm.num_delegators() < 2 {
        return Ok(choices);
    }
    let unmatched: Vec<usize> = sm
        .delegators()
        .into_iter()
        .filter(|&i| !is_matched(&sm.actions, i))
        .collect();
    for (i, j) in max_weight_pairing(instance, &unmatched) {
        choices[i] = j;
        choices[j] = i;
    }
    Ok(choices)
}

/// Punishing Mediator for matching. Everyone delegating: welfare-maximizing
/// pairing of all agents. Otherwise every delegator mutually matched with a
/// non-delegator points elsewhere: at the lowest-index other delegator, or,
/// without one, the lowest-index agent other than its partner that does not
/// point back at it. When every other agent points at it, it picks the one
/// earning the least from the match.
pub fn punish_mediate_matching(instance: &MatchingInstance, sm: &MediatedProfile) -> Result<Vec<usize>> {
    check_profile(instance, sm)?;
    let mut choices = sm.actions.clone();
    let delegators = sm.delegators();
    if delegators.is_empty() {
        return Ok(choices);
    }
    let n = instance.num_agents();
    if delegators.len() == n {
        for (i, j) in max_weight_pairing(instance, &delegators) {
            choices[i] = j;
            choices[j] = i;
        }
        return Ok(choices);
    }
    for &i in &delegators {
        let partner = sm.actions[i];
        if sm.delegate[partner] || sm.actions[partner] != i {
            continue;
        }
        let target = delegators
            .iter()
            .copied()
            .find(|&d| d != i)
            .or_else(|| (0..n).find(|&k| k != i && k != partner && sm.actions[k] != i))
            .unwrap_or_else(|| {
                // Everybody else points at `i`, so any target is matched;
                // give the smallest reward, staying put included.
                (0..n).filter(|&k| k != i).fold(partner, |best, k| {
                    if instance.reward(k, i) < instance.reward(best, i) {
                        k
                    } else {
                        best
                    }
                })
            });
        choices[i] = target;
    }
    Ok(choices)
}

pub fn resolve_matching(instance: &MatchingInstance, sm: &MediatedProfile, kind: MediatorKind) -> Result<Vec<usize>> {
    match kind {
        MediatorKind::None => {
            check_profile(instance, sm)?;
            Ok(sm.actions.clone())
        }
        MediatorKind::Pareto => pareto_mediate_matching(instance, sm),
        MediatorKind::Punish => punish_mediate_matching(instance, sm),
    }
}

/// Learner-facing wrapper: agent `i`'s action `a` points at `a` when
/// `a < i`, otherwise at `a + 1`, so there is no self-pointing action.
#[derive(Debug, Clone)]
pub struct MatchingEnvironment {
    instance: MatchingInstance,
    kind: MediatorKind,
    scratch: MediatedProfile,
}

impl MatchingEnvironment {
    pub fn new(instance: MatchingInstance, kind: MediatorKind) -> Self {
        let n = instance.num_agents();
        MatchingEnvironment {
            instance,
            kind,
            scratch: MediatedProfile::plain(vec![0; n]),
        }
    }

    pub fn instance(&self) -> &MatchingInstance {
        &self.instance
    }

    pub fn target_of(agent: usize, action: usize) -> usize {
        if action < agent {
            action
        } else {
            action + 1
        }
    }
}

impl Environment for MatchingEnvironment {
    fn num_agents(&self) -> usize {
        self.instance.num_agents()
    }

    fn num_actions(&self, _agent: usize) -> usize {
        self.instance.num_agents() - 1
    }

    fn delegation_enabled(&self) -> bool {
        self.kind != MediatorKind::None
    }

    fn step(&mut self, profile: &MediatedProfile, out: &mut StepOutcome) -> Result<()> {
        for (i, &a) in profile.actions.iter().enumerate() {
            self.scratch.actions[i] = Self::target_of(i, a);
            self.scratch.delegate[i] = profile.delegate[i];
        }
        let resolved = resolve_matching(&self.instance, &self.scratch, self.kind)?;
        out.rewards = self.instance.payoff_unchecked(&resolved);
        out.resolved = resolved;
        Ok(())
    }
}
