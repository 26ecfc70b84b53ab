use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mediation::experiment::{
    parse_seeds, render_mediated_table, render_pure_nash, run_learning, verify_propositions, ExperimentConfig,
    RunSummary, Scenario,
};
use mediation::{Error, Game, MediatorKind, Result};

/// Mediated-game simulations. CSV goes to --out or stdout; the seed
/// aggregate goes to stderr.
#[derive(Debug, Parser)]
#[command(name = "sim", version)]
struct Cli {
    /// random-games | matching | restaurant | mediated-table | nash | verify-props
    scenario: Option<Scenario>,
    /// TOML file with the same keys as the flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// none | pareto | punish
    #[arg(long)]
    mediator: Option<MediatorKind>,
    #[arg(long)]
    players: Option<usize>,
    #[arg(long)]
    actions: Option<usize>,
    #[arg(long)]
    agents: Option<usize>,
    #[arg(long)]
    restaurants: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    horizon: Option<usize>,
    /// Comma-separated seeds; `a..b` expands to a half-open range.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    window: Option<usize>,
    /// Ratings CSV with header user_id,restaurant_id,rating.
    #[arg(long)]
    ratings: Option<PathBuf>,
    /// Capacities CSV with header restaurant_id,capacity.
    #[arg(long)]
    capacities: Option<PathBuf>,
    /// Game in text form for `nash` and `mediated-table`.
    #[arg(long)]
    game: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Cli {
    fn into_config(self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! merge {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field {
                    c.$field = v.into();
                }
            )*};
        }
        merge!(mediator, players, agents, restaurants, alpha, horizon, window);
        if self.scenario.is_some() {
            c.scenario = self.scenario;
        }
        if self.actions.is_some() {
            c.actions = self.actions;
        }
        if let Some(s) = &self.seeds {
            c.seeds = parse_seeds(s)?;
        }
        for (dst, src) in [
            (&mut c.ratings, self.ratings),
            (&mut c.capacities, self.capacities),
            (&mut c.game, self.game),
            (&mut c.out, self.out),
        ] {
            if src.is_some() {
                *dst = src;
            }
        }
        c.validate()?;
        Ok(c)
    }
}

fn load_game(config: &ExperimentConfig) -> Result<(Game, bool)> {
    match &config.game {
        Some(path) => Ok((Game::from_text(&std::fs::read_to_string(path)?)?, false)),
        None => Ok((Game::prisoners_dilemma(), true)),
    }
}

fn emit(config: &ExperimentConfig, text: &str) -> Result<()> {
    match &config.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn report(summary: &RunSummary) {
    let r = summary.final_reward();
    let m = summary.final_min_reward();
    let d = summary.final_delegation();
    eprintln!(
        "mediator={} seeds={} final_mean_reward={:.6}±{:.6} final_min_reward={:.6}±{:.6} delegation={:.4}±{:.4}",
        summary.mediator, r.n, r.mean, r.se, m.mean, m.se, d.mean, d.se
    );
    if let Some(c) = summary.central_plan() {
        eprintln!("central_plan_reward={:.6}±{:.6}", c.mean, c.se);
    }
}

/// Ok(false) signals a verification failure.
fn run(config: &ExperimentConfig) -> Result<bool> {
    match config.scenario.expect("validated") {
        Scenario::MediatedTable => {
            let (game, is_pd) = load_game(config)?;
            let cd: &[&str] = &["C", "D"];
            let labels = is_pd.then_some([cd, cd]);
            emit(config, &render_mediated_table(&game, config.mediator, labels)?)?;
        }
        Scenario::Nash => {
            let (game, _) = load_game(config)?;
            emit(config, &render_pure_nash(&game)?)?;
        }
        Scenario::VerifyProps => {
            let report = verify_propositions(&config.seeds, config.actions_or_default(), config.mediator)?;
            emit(config, &report.to_string())?;
            if !report.passed() {
                eprintln!(
                    "verification failed: {} dominance and {} welfare counterexamples",
                    report.dominance.len(),
                    report.welfare.len()
                );
                return Ok(false);
            }
        }
        _ => {
            let summary = run_learning(config)?;
            emit(config, &summary.to_csv())?;
            report(&summary);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = cli.into_config().and_then(|c| run(&c));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) | Error::Parse { .. } => 2,
                _ => 1,
            })
        }
    }
}
