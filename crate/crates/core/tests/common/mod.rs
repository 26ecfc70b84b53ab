//! Brute-force oracles shared by the integration and acceptance tests. They
//! deliberately avoid the library's search code and use only plain payoff
//! lookups.

#![allow(dead_code)]

use mediation::{Game, MediatedProfile};

/// Every joint profile in lexicographic order, player 0 most significant.
pub fn all_profiles(counts: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &k in counts {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..k).map(move |a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    out
}

pub fn payoff(game: &Game, profile: &[usize]) -> Vec<f64> {
    game.utility(&profile.to_vec().into()).unwrap().to_vec()
}

/// Pure equilibria by checking every unilateral deviation.
pub fn nash_oracle(game: &Game) -> Vec<Vec<usize>> {
    let counts = game.action_counts().to_vec();
    all_profiles(&counts)
        .into_iter()
        .filter(|p| {
            let u = payoff(game, p);
            (0..counts.len()).all(|i| {
                (0..counts[i]).all(|a| {
                    let mut q = p.clone();
                    q[i] = a;
                    payoff(game, &q)[i] <= u[i]
                })
            })
        })
        .collect()
}

/// Resolution of a mediator by filtering candidates and taking the best,
/// keeping the submitted profile when it is among the optima and the
/// lexicographically first optimum otherwise. Returns (resolved, #optima).
fn constrained_best(
    game: &Game,
    sm: &MediatedProfile,
    objective: impl Fn(&[f64]) -> f64,
    admissible: impl Fn(&[f64]) -> bool,
) -> (Vec<usize>, usize) {
    let candidates: Vec<Vec<usize>> = all_profiles(game.action_counts())
        .into_iter()
        .filter(|p| (0..p.len()).all(|i| sm.delegate[i] || p[i] == sm.actions[i]))
        .filter(|p| admissible(&payoff(game, p)))
        .collect();
    let values: Vec<f64> = candidates.iter().map(|p| objective(&payoff(game, p))).collect();
    let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let optima: Vec<&Vec<usize>> = candidates
        .iter()
        .zip(&values)
        .filter(|(_, &v)| v == best)
        .map(|(p, _)| p)
        .collect();
    let resolved = if optima.iter().any(|p| **p == sm.actions) {
        sm.actions.clone()
    } else {
        optima[0].clone()
    };
    (resolved, optima.len())
}

pub fn pareto_oracle(game: &Game, sm: &MediatedProfile) -> (Vec<usize>, usize) {
    let delegators: Vec<usize> = (0..sm.actions.len()).filter(|&i| sm.delegate[i]).collect();
    if delegators.len() <= 1 {
        return (sm.actions.clone(), 1);
    }
    let base = payoff(game, &sm.actions);
    constrained_best(
        game,
        sm,
        |u| delegators.iter().map(|&i| u[i]).sum(),
        |u| delegators.iter().all(|&i| u[i] >= base[i]),
    )
}

pub fn punish_oracle(game: &Game, sm: &MediatedProfile) -> (Vec<usize>, usize) {
    let n = sm.actions.len();
    let outsiders: Vec<usize> = (0..n).filter(|&i| !sm.delegate[i]).collect();
    if outsiders.len() == n {
        return (sm.actions.clone(), 1);
    }
    if outsiders.is_empty() {
        return constrained_best(game, sm, |u| u.iter().sum(), |_| true);
    }
    // Minimizing outsider welfare is maximizing its negation.
    constrained_best(game, sm, |u| -outsiders.iter().map(|&i| u[i]).sum::<f64>(), |_| true)
}

/// Best total weight over injective agent-to-slot maps avoiding
/// non-finite weights; `None` when no such map exists.
pub fn assignment_oracle(rows: &[Vec<f64>]) -> Option<f64> {
    fn go(rows: &[Vec<f64>], agent: usize, used: &mut Vec<bool>) -> Option<f64> {
        if agent == rows.len() {
            return Some(0.0);
        }
        let mut best: Option<f64> = None;
        for s in 0..used.len() {
            let w = rows[agent][s];
            if used[s] || !w.is_finite() {
                continue;
            }
            used[s] = true;
            if let Some(rest) = go(rows, agent + 1, used) {
                let v = w + rest;
                best = Some(best.map_or(v, |b: f64| b.max(v)));
            }
            used[s] = false;
        }
        best
    }
    let m = rows.first().map_or(0, Vec::len);
    go(rows, 0, &mut vec![false; m])
}

/// Heaviest set of disjoint pairs among `nodes` under `weight`.
pub fn pairing_oracle(nodes: &[usize], weight: &dyn Fn(usize, usize) -> f64) -> f64 {
    match nodes.split_first() {
        None => 0.0,
        Some((&first, rest)) => {
            let mut best = pairing_oracle(rest, weight);
            for (k, &j) in rest.iter().enumerate() {
                let remaining: Vec<usize> = rest
                    .iter()
                    .enumerate()
                    .filter(|&(x, _)| x != k)
                    .map(|(_, &v)| v)
                    .collect();
                best = best.max(weight(first, j) + pairing_oracle(&remaining, weight));
            }
            best
        }
    }
}
