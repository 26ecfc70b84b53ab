//! Exact rectangular max-weight assignment with forbidden edges.
//!
//! Shortest augmenting path Hungarian method with dual potentials, one row
//! at a time, O(n^2 m) for `n` agents and `m >= n` slots. Maximization runs
//! as minimization of `row_max - weight`; forbidden pairs cost a finite
//! sentinel larger than any feasible total, so no infinities enter the
//! arithmetic.

use crate::error::{Error, Result};

/// Marker weight for an infeasible agent/slot pair.
pub const FORBIDDEN: f64 = f64::NEG_INFINITY;

#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentProblem {
    num_agents: usize,
    num_slots: usize,
    weights: Vec<f64>,
}

impl AssignmentProblem {
    /// `weights` is row-major, `num_agents * num_slots` long. Entries equal to
    /// [`FORBIDDEN`] mark infeasible pairs; every other entry must be finite.
    pub fn new(num_agents: usize, num_slots: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != num_agents * num_slots {
            return Err(Error::LengthMismatch {
                expected: num_agents * num_slots,
                actual: weights.len(),
            });
        }
        if weights.iter().any(|w| w.is_nan() || *w == f64::INFINITY) {
            return Err(Error::InvalidGame(
                "assignment weights must be finite or FORBIDDEN".into(),
            ));
        }
        Ok(AssignmentProblem {
            num_agents,
            num_slots,
            weights,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::LengthMismatch {
                expected: m,
                actual: bad.len(),
            });
        }
        AssignmentProblem::new(n, m, rows.concat())
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn num_slots(&self) -> usize {
        self.num_slots
    }

    #[inline]
    pub fn weight(&self, agent: usize, slot: usize) -> f64 {
        self.weights[agent * self.num_slots + slot]
    }

    #[inline]
    pub fn is_forbidden(&self, agent: usize, slot: usize) -> bool {
        self.weight(agent, slot) == FORBIDDEN
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// Distinct slot per agent.
    pub slot_of: Vec<usize>,
    pub total_weight: f64,
}

/// Maximum-weight injective assignment of agents to slots.
pub fn solve_assignment(problem: &AssignmentProblem) -> Result<Assignment> {
    let n = problem.num_agents;
    let m = problem.num_slots;
    if n == 0 {
        return Ok(Assignment {
            slot_of: Vec::new(),
            total_weight: 0.0,
        });
    }

    // Per-row offset and the spread of admissible weights.
    let mut row_max = vec![0.0f64; n];
    let mut spread = 0.0f64;
    for (i, row) in problem.weights.chunks_exact(m).enumerate() {
        let mut hi = f64::NEG_INFINITY;
        let mut lo = f64::INFINITY;
        for &w in row.iter().filter(|&&w| w != FORBIDDEN) {
            hi = hi.max(w);
            lo = lo.min(w);
        }
        if hi == f64::NEG_INFINITY {
            return Err(Error::Infeasible { agent: i });
        }
        row_max[i] = hi;
        spread = spread.max(hi - lo);
    }
    if m < n {
        return Err(Error::Infeasible { agent: m });
    }
    let sentinel = (spread + 1.0) * (n as f64 + 1.0);

    let cost: Vec<f64> = (0..n)
        .flat_map(|i| {
            let row = &problem.weights[i * m..(i + 1) * m];
            let top = row_max[i];
            row.iter()
                .map(move |&w| if w == FORBIDDEN { sentinel } else { top - w })
        })
        .collect();

    // 1-based potentials; column 0 is the virtual root.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut minv = vec![0.0f64; m + 1];
    let mut used = vec![false; m + 1];

    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|x| *x = f64::INFINITY);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let row = &cost[(i0 - 1) * m..i0 * m];
            let ui0 = u[i0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = row[j - 1] - ui0 - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut slot_of = vec![usize::MAX; n];
    for j in 1..=m {
        if owner[j] > 0 {
            slot_of[owner[j] - 1] = j - 1;
        }
    }
    let mut total_weight = 0.0;
    for (agent, &slot) in slot_of.iter().enumerate() {
        if problem.is_forbidden(agent, slot) {
            return Err(Error::Infeasible { agent });
        }
        total_weight += problem.weight(agent, slot);
    }
    Ok(Assignment { slot_of, total_weight })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(rows: &[Vec<f64>]) -> Assignment {
        solve_assignment(&AssignmentProblem::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn identity_optimum() {
        let a = solve(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(a.slot_of, vec![0, 1]);
        assert_eq!(a.total_weight, 2.0);
    }

    #[test]
    fn anti_diagonal_optimum() {
        let a = solve(&[vec![2.0, 3.0], vec![3.0, 2.0]]);
        assert_eq!(a.slot_of, vec![1, 0]);
        assert_eq!(a.total_weight, 6.0);
    }

    #[test]
    fn rectangular_uses_best_columns() {
        let a = solve(&[vec![1.0, 5.0, 2.0], vec![1.0, 6.0, 4.0]]);
        assert_eq!(a.slot_of, vec![1, 2]);
        assert_eq!(a.total_weight, 9.0);
    }

    #[test]
    fn forbidden_edges_are_avoided() {
        let a = solve(&[vec![FORBIDDEN, 1.0], vec![10.0, 100.0]]);
        assert_eq!(a.slot_of, vec![1, 0]);
        assert_eq!(a.total_weight, 11.0);
    }

    #[test]
    fn agent_without_slots_is_named() {
        let p = AssignmentProblem::from_rows(&[vec![1.0, 2.0], vec![FORBIDDEN, FORBIDDEN]]).unwrap();
        assert_eq!(solve_assignment(&p), Err(Error::Infeasible { agent: 1 }));
    }

    #[test]
    fn hall_violation_is_infeasible() {
        let p = AssignmentProblem::from_rows(&[vec![1.0, FORBIDDEN], vec![2.0, FORBIDDEN]]).unwrap();
        assert!(matches!(solve_assignment(&p), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn negative_weights_are_fine() {
        let a = solve(&[vec![-5.0, -1.0], vec![-2.0, -7.0]]);
        assert_eq!(a.slot_of, vec![1, 0]);
        assert_eq!(a.total_weight, -3.0);
    }

    #[test]
    fn empty_problem() {
        let a = solve_assignment(&AssignmentProblem::new(0, 3, vec![]).unwrap()).unwrap();
        assert!(a.slot_of.is_empty());
    }
}
