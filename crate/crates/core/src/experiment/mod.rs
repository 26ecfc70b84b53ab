//! Experiment configuration, orchestration, and reporting.

mod props;
mod summary;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;

pub use props::{
    check_game, random_two_player_game, verify_propositions, Counterexample, GameCheck, PropositionReport,
};
pub use summary::{MeanSe, RunSummary, SeedRun, WindowAccumulator, WindowStats};

use crate::error::{Error, Result};
use crate::game::{build_mediated_game, enumerate_pure_nash, Game};
use crate::learning::{derive_seed, run_episode_with, spawn_learners, Environment, GameEnvironment};
use crate::matching::{MatchingEnvironment, MatchingInstance};
use crate::mediator::MediatorKind;
use crate::restaurant::{
    central_plan, generate_instance, parse_capacities, RatingsTable, RestaurantEnvironment, RestaurantInstance,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    RandomGames,
    Matching,
    Restaurant,
    MediatedTable,
    Nash,
    VerifyProps,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::RandomGames => "random-games",
            Scenario::Matching => "matching",
            Scenario::Restaurant => "restaurant",
            Scenario::MediatedTable => "mediated-table",
            Scenario::Nash => "nash",
            Scenario::VerifyProps => "verify-props",
        }
    }

    fn is_learning(self) -> bool {
        matches!(self, Scenario::RandomGames | Scenario::Matching | Scenario::Restaurant)
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random-games" => Ok(Scenario::RandomGames),
            "matching" => Ok(Scenario::Matching),
            "restaurant" => Ok(Scenario::Restaurant),
            "mediated-table" => Ok(Scenario::MediatedTable),
            "nash" => Ok(Scenario::Nash),
            "verify-props" => Ok(Scenario::VerifyProps),
            other => Err(Error::Config(format!("unknown scenario {other:?}"))),
        }
    }
}

/// Everything a run needs. Optional fields fall back to scenario defaults.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Option<Scenario>,
    pub mediator: MediatorKind,
    pub players: usize,
    /// Actions per player; for `verify-props`, the largest action count.
    pub actions: Option<usize>,
    pub agents: usize,
    pub restaurants: usize,
    pub alpha: f64,
    pub horizon: usize,
    pub seeds: Vec<u64>,
    pub window: usize,
    pub ratings: Option<PathBuf>,
    pub capacities: Option<PathBuf>,
    pub game: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: None,
            mediator: MediatorKind::Pareto,
            players: 2,
            actions: None,
            agents: 8,
            restaurants: 60,
            alpha: 0.0,
            horizon: 10_000,
            seeds: vec![0],
            window: 100,
            ratings: None,
            capacities: None,
            game: None,
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        ExperimentConfig::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn actions_or_default(&self) -> usize {
        match (self.actions, self.scenario) {
            (Some(a), _) => a,
            (None, Some(Scenario::VerifyProps)) => 4,
            (None, _) => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let scenario = self.scenario.ok_or_else(|| Error::Config("no scenario given".into()))?;
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if self.players == 0 || self.actions_or_default() == 0 {
            return Err(Error::Config("player and action counts must be positive".into()));
        }
        if self.agents == 0 || self.restaurants == 0 {
            return Err(Error::Config("agent and restaurant counts must be positive".into()));
        }
        if scenario == Scenario::Matching && self.agents < 2 {
            return Err(Error::Config("the matching game needs at least two agents".into()));
        }
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(Error::Config(format!("alpha must be nonnegative, got {}", self.alpha)));
        }
        if scenario.is_learning() {
            if self.horizon == 0 || self.window == 0 {
                return Err(Error::Config("horizon and window must be positive".into()));
            }
            if self.window > self.horizon {
                return Err(Error::Config(format!(
                    "window {} exceeds horizon {}",
                    self.window, self.horizon
                )));
            }
        }
        Ok(())
    }
}

/// Parse `1,2,5..8` into seeds; `a..b` is half-open.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || Error::Config(format!("bad seed {part:?}"));
        if let Some((a, b)) = part.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let b: u64 = b.trim().parse().map_err(|_| bad())?;
            out.extend(a..b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() {
        return Err(Error::Config("no seeds given".into()));
    }
    Ok(out)
}

fn run_seed<E: Environment>(env: &mut E, seed: u64, horizon: usize, window: usize) -> Result<Vec<WindowStats>> {
    let mut agents = spawn_learners(env, derive_seed(seed, 2));
    let mut acc = WindowAccumulator::new(window, env.num_agents());
    run_episode_with(env, &mut agents, horizon, |t, p, o| acc.observe(t, p, o))?;
    Ok(acc.finish())
}

fn collect_runs<F>(config: &ExperimentConfig, per_seed: F) -> Result<RunSummary>
where
    F: Fn(u64) -> Result<SeedRun> + Sync,
{
    config.validate()?;
    // Rayon preserves input order on collect, so output is seed-ordered.
    let runs = config
        .seeds
        .par_iter()
        .map(|&seed| per_seed(seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(RunSummary {
        mediator: config.mediator,
        runs,
    })
}

/// The random game played under `seed`.
pub fn random_game_for_seed(config: &ExperimentConfig, seed: u64) -> Result<Game> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1));
    Game::random(vec![config.actions_or_default(); config.players], &mut rng)
}

/// Random normal-form games with Uniform[0, 1) utilities, one per seed,
/// played by epsilon-greedy learners through the configured mediator.
pub fn run_random_games(config: &ExperimentConfig) -> Result<RunSummary> {
    collect_runs(config, |seed| {
        let game = random_game_for_seed(config, seed)?;
        let mut env = GameEnvironment::new(game, config.mediator)?;
        Ok(SeedRun {
            seed,
            windows: run_seed(&mut env, seed, config.horizon, config.window)?,
            central_plan_reward: None,
        })
    })
}

pub fn matching_instance_for_seed(config: &ExperimentConfig, seed: u64) -> Result<MatchingInstance> {
    MatchingInstance::random(config.agents, derive_seed(seed, 1))
}

pub fn run_matching(config: &ExperimentConfig) -> Result<RunSummary> {
    collect_runs(config, |seed| {
        let instance = matching_instance_for_seed(config, seed)?;
        let mut env = MatchingEnvironment::new(instance, config.mediator);
        Ok(SeedRun {
            seed,
            windows: run_seed(&mut env, seed, config.horizon, config.window)?,
            central_plan_reward: None,
        })
    })
}

/// Capacities by restaurant id.
pub type CapacityOverrides = HashMap<String, u32>;

/// Ratings (filtered) and capacity overrides named by the config, if any.
pub fn load_restaurant_inputs(config: &ExperimentConfig) -> Result<(Option<RatingsTable>, Option<CapacityOverrides>)> {
    let ratings = config.ratings.as_deref().map(RatingsTable::load_csv).transpose()?;
    let capacities = match config.capacities.as_deref() {
        Some(p) => Some(parse_capacities(std::fs::File::open(p)?)?),
        None => None,
    };
    Ok((ratings, capacities))
}

pub fn restaurant_instance_for_seed(
    config: &ExperimentConfig,
    seed: u64,
    ratings: Option<&RatingsTable>,
    capacities: Option<&CapacityOverrides>,
) -> Result<RestaurantInstance> {
    let mut instance = generate_instance(config.agents, config.restaurants, config.alpha, seed, ratings)?;
    if let Some(caps) = capacities {
        instance.apply_capacities(caps);
    }
    Ok(instance)
}

/// The restaurant game; every seed also reports the central planner's
/// per-agent realized true utility.
pub fn run_restaurant(config: &ExperimentConfig) -> Result<RunSummary> {
    let (ratings, capacities) = load_restaurant_inputs(config)?;
    collect_runs(config, |seed| {
        let instance = restaurant_instance_for_seed(config, seed, ratings.as_ref(), capacities.as_ref())?;
        let plan = central_plan(&instance)?;
        let plan_reward = plan.total_true() / instance.num_agents() as f64;
        let mut env = RestaurantEnvironment::new(instance, config.mediator);
        Ok(SeedRun {
            seed,
            windows: run_seed(&mut env, seed, config.horizon, config.window)?,
            central_plan_reward: Some(plan_reward),
        })
    })
}

/// Run a learning scenario.
pub fn run_learning(config: &ExperimentConfig) -> Result<RunSummary> {
    match config.scenario {
        Some(Scenario::RandomGames) => run_random_games(config),
        Some(Scenario::Matching) => run_matching(config),
        Some(Scenario::Restaurant) => run_restaurant(config),
        other => Err(Error::Config(format!(
            "{} is not a learning scenario",
            other.map_or("none", Scenario::as_str)
        ))),
    }
}

fn fmt_utils(u: &[f64]) -> String {
    u.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// Render the mediated payoff matrix of a two-player game. Row and column
/// labels are the action names suffixed with `-` (keep) or `+` (delegate).
pub fn render_mediated_table(game: &Game, kind: MediatorKind, labels: Option<[&[&str]; 2]>) -> Result<String> {
    if game.num_players() != 2 {
        return Err(Error::Config("the mediated table needs a two-player game".into()));
    }
    let table = build_mediated_game(game, kind)?;
    let k = game.action_counts();
    let names = |player: usize| -> Vec<String> {
        let base: Vec<String> = match labels {
            Some(l) if l[player].len() == k[player] => l[player].iter().map(|s| s.to_string()).collect(),
            _ => (0..k[player]).map(|a| a.to_string()).collect(),
        };
        base.iter()
            .map(|b| format!("{b}-"))
            .chain(base.iter().map(|b| format!("{b}+")))
            .collect()
    };
    let rows = names(0);
    let cols = names(1);
    let cells: Vec<Vec<String>> = (0..2 * k[0])
        .map(|r| {
            (0..2 * k[1])
                .map(|c| fmt_utils(table.utility_unchecked(&[r, c])))
                .collect()
        })
        .collect();
    let width = cells
        .iter()
        .flatten()
        .map(String::len)
        .chain(cols.iter().map(String::len))
        .max()
        .unwrap_or(1);
    let label_width = rows.iter().map(String::len).max().unwrap_or(1);

    let mut out = String::new();
    let _ = write!(out, "{:label_width$}", "");
    for c in &cols {
        let _ = write!(out, "  {c:>width$}");
    }
    out.push('\n');
    for (r, row) in cells.iter().enumerate() {
        let _ = write!(out, "{:label_width$}", rows[r]);
        for cell in row {
            let _ = write!(out, "  {cell:>width$}");
        }
        out.push('\n');
    }
    Ok(out)
}

/// One line per pure equilibrium: the profile and its utilities.
pub fn render_pure_nash(game: &Game) -> Result<String> {
    let mut out = String::new();
    for p in enumerate_pure_nash(game)? {
        let actions: Vec<String> = p.0.iter().map(|a| a.to_string()).collect();
        let _ = writeln!(out, "({}) -> ({})", actions.join(", "), fmt_utils(game.utility(&p)?));
    }
    Ok(out)
}
