use std::fmt::Write as _;

use crate::game::MediatedProfile;
use crate::learning::StepOutcome;
use crate::mediator::MediatorKind;

/// Aggregates of one reporting window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowStats {
    pub window_start: usize,
    /// Mean over the window's steps of the population-mean reward.
    pub mean_reward: f64,
    /// Smallest per-agent average reward within the window.
    pub min_reward: f64,
    /// Fraction of agent-steps that delegated.
    pub delegation_fraction: f64,
}

/// Windowed statistics for one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedRun {
    pub seed: u64,
    pub windows: Vec<WindowStats>,
    /// Per-agent mean realized utility of the central planner, when the
    /// scenario has one.
    pub central_plan_reward: Option<f64>,
}

impl SeedRun {
    pub fn final_window(&self) -> Option<&WindowStats> {
        self.windows.last()
    }
}

/// Mean and standard error of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl MeanSe {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return MeanSe {
                mean: f64::NAN,
                se: f64::NAN,
                n,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let se = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        MeanSe { mean, se, n }
    }

    /// Standard error of the difference of two independent means.
    pub fn pooled_se(&self, other: &MeanSe) -> f64 {
        (self.se.powi(2) + other.se.powi(2)).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub mediator: MediatorKind,
    pub runs: Vec<SeedRun>,
}

impl RunSummary {
    /// Final-window mean reward across seeds.
    pub fn final_reward(&self) -> MeanSe {
        MeanSe::of(&self.collect_final(|w| w.mean_reward))
    }

    pub fn final_min_reward(&self) -> MeanSe {
        MeanSe::of(&self.collect_final(|w| w.min_reward))
    }

    pub fn final_delegation(&self) -> MeanSe {
        MeanSe::of(&self.collect_final(|w| w.delegation_fraction))
    }

    pub fn central_plan(&self) -> Option<MeanSe> {
        let v: Option<Vec<f64>> = self.runs.iter().map(|r| r.central_plan_reward).collect();
        v.map(|v| MeanSe::of(&v))
    }

    fn collect_final(&self, f: impl Fn(&WindowStats) -> f64) -> Vec<f64> {
        self.runs.iter().filter_map(|r| r.final_window().map(&f)).collect()
    }

    /// Window-by-window means across seeds.
    pub fn mean_curve(&self) -> Vec<WindowStats> {
        let Some(first) = self.runs.first() else {
            return Vec::new();
        };
        let k = self.runs.len() as f64;
        (0..first.windows.len())
            .map(|w| WindowStats {
                window_start: first.windows[w].window_start,
                mean_reward: self.runs.iter().map(|r| r.windows[w].mean_reward).sum::<f64>() / k,
                min_reward: self.runs.iter().map(|r| r.windows[w].min_reward).sum::<f64>() / k,
                delegation_fraction: self.runs.iter().map(|r| r.windows[w].delegation_fraction).sum::<f64>() / k,
            })
            .collect()
    }

    /// CSV with one row per seed and window. The central-planner column is
    /// present exactly when the scenario has a planner.
    pub fn to_csv(&self) -> String {
        let planner = self.runs.iter().any(|r| r.central_plan_reward.is_some());
        let mut out = String::from("seed,window_start,mean_reward,min_reward,delegation_fraction");
        if planner {
            out.push_str(",central_plan_reward");
        }
        out.push('\n');
        for run in &self.runs {
            for w in &run.windows {
                let _ = write!(
                    out,
                    "{},{},{},{},{}",
                    run.seed, w.window_start, w.mean_reward, w.min_reward, w.delegation_fraction
                );
                if planner {
                    let _ = write!(out, ",{}", run.central_plan_reward.unwrap_or(f64::NAN));
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Streaming window aggregation; feed it every step of an episode.
#[derive(Debug, Clone)]
pub struct WindowAccumulator {
    window: usize,
    num_agents: usize,
    start: usize,
    steps: usize,
    reward_sum: f64,
    per_agent: Vec<f64>,
    delegations: usize,
    windows: Vec<WindowStats>,
}

impl WindowAccumulator {
    pub fn new(window: usize, num_agents: usize) -> Self {
        assert!(window > 0, "window must be positive");
        WindowAccumulator {
            window,
            num_agents,
            start: 0,
            steps: 0,
            reward_sum: 0.0,
            per_agent: vec![0.0; num_agents],
            delegations: 0,
            windows: Vec::new(),
        }
    }

    pub fn observe(&mut self, t: usize, profile: &MediatedProfile, out: &StepOutcome) {
        if self.steps == 0 {
            self.start = t;
        }
        let n = self.num_agents as f64;
        self.reward_sum += out.rewards.iter().sum::<f64>() / n;
        for (acc, r) in self.per_agent.iter_mut().zip(&out.rewards) {
            *acc += r;
        }
        self.delegations += profile.delegate.iter().filter(|&&d| d).count();
        self.steps += 1;
        if self.steps == self.window {
            self.flush();
        }
    }

    fn flush(&mut self) {
        if self.steps == 0 {
            return;
        }
        let s = self.steps as f64;
        self.windows.push(WindowStats {
            window_start: self.start,
            mean_reward: self.reward_sum / s,
            min_reward: self.per_agent.iter().fold(f64::INFINITY, |m, &v| m.min(v / s)),
            delegation_fraction: self.delegations as f64 / (s * self.num_agents as f64),
        });
        self.steps = 0;
        self.reward_sum = 0.0;
        self.per_agent.iter_mut().for_each(|v| *v = 0.0);
        self.delegations = 0;
    }

    /// Close any partial trailing window and return all windows.
    pub fn finish(mut self) -> Vec<WindowStats> {
        self.flush();
        self.windows
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows_tile_the_horizon() {
        let mut acc = WindowAccumulator::new(3, 2);
        let out = StepOutcome {
            rewards: vec![1.0, 0.0],
            resolved: vec![0, 0],
        };
        let p = MediatedProfile::new(vec![0, 0], vec![true, false]).unwrap();
        for t in 0..7 {
            acc.observe(t, &p, &out);
        }
        let w = acc.finish();
        assert_eq!(w.iter().map(|w| w.window_start).collect::<Vec<_>>(), vec![0, 3, 6]);
        assert!(w.iter().all(|w| w.mean_reward == 0.5));
        assert!(w.iter().all(|w| w.min_reward == 0.0));
        assert!(w.iter().all(|w| w.delegation_fraction == 0.5));
    }

    #[test]
    fn mean_se_basics() {
        let m = MeanSe::of(&[1.0, 2.0, 3.0]);
        assert_eq!(m.mean, 2.0);
        assert!((m.se - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(MeanSe::of(&[4.0]).se, 0.0);
    }
}
