use std::process::{Command, Output};

fn sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sim")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn csv_is_deterministic_and_seed_ordered() {
    let args = [
        "matching",
        "--agents",
        "6",
        "--horizon",
        "400",
        "--seeds",
        "3,1,2",
        "--window",
        "100",
    ];
    let a = sim(&args);
    let b = sim(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let seeds: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(seeds, ["3", "3", "3", "3", "1", "1", "1", "1", "2", "2", "2", "2"]);
}

#[test]
fn columns_depend_on_scenario_only() {
    let base = "seed,window_start,mean_reward,min_reward,delegation_fraction";
    for mediator in ["none", "pareto", "punish"] {
        let o = sim(&[
            "random-games",
            "--mediator",
            mediator,
            "--horizon",
            "200",
            "--seeds",
            "0..2",
        ]);
        assert_eq!(stdout(&o).lines().next().unwrap(), base);
        let o = sim(&[
            "restaurant",
            "--mediator",
            mediator,
            "--agents",
            "5",
            "--restaurants",
            "4",
            "--horizon",
            "200",
        ]);
        assert_eq!(
            stdout(&o).lines().next().unwrap(),
            format!("{base},central_plan_reward")
        );
    }
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    let out = dir.path().join("out.csv");
    std::fs::write(
        &config,
        "scenario = \"random-games\"\nhorizon = 300\nwindow = 100\nseeds = [4, 5]\n",
    )
    .unwrap();
    let o = sim(&[
        "--config",
        config.to_str().unwrap(),
        "--horizon",
        "200",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("seeds=2"));
}

#[test]
fn configuration_errors_exit_nonzero() {
    for args in [
        &["random-games", "--window", "500", "--horizon", "100"][..],
        &["random-games", "--seeds", ""],
        &["matching", "--agents", "0"],
        &["random-games", "--mediator", "benevolent"],
    ] {
        let o = sim(args);
        assert!(!o.status.success(), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn mediated_table_for_prisoners_dilemma() {
    let o = sim(&["mediated-table", "--mediator", "pareto"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let last = text.lines().last().unwrap();
    assert!(last.starts_with("D+") && last.trim_end().ends_with("2, 2"));
}

#[test]
fn nash_reads_game_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pd.txt");
    std::fs::write(&path, mediation::Game::prisoners_dilemma().to_text()).unwrap();
    let o = sim(&["nash", "--game", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "(1, 1) -> (1, 1)");
}

#[test]
fn verification_failure_exits_nonzero() {
    let o = sim(&["verify-props", "--mediator", "punish", "--seeds", "0..200"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("dominance counterexample"));
    let o = sim(&["verify-props", "--mediator", "pareto", "--seeds", "0..100"]);
    assert!(o.status.success(), "{}", stdout(&o));
}
