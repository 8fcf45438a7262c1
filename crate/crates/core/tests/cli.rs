use std::fs;
use std::path::Path;

use coevo_games::cli;
use coevo_games::harness::records_from_csv;
use serde_json::Value;

fn run(args: &[&str]) -> i32 {
    cli::run(std::iter::once("coevo").chain(args.iter().copied()))
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_fig1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("solve.json");
    assert_eq!(
        run(&["solve", "--fixture", "fig1", "--out", out.to_str().unwrap()]),
        0
    );
    let v = json(&out);
    assert_eq!(v["h"], serde_json::json!([1, 0, 2, 1, 0]));
    assert_eq!(v["critical"], serde_json::json!([0, 2]));
    assert_eq!(v["first_player_wins"], true);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["solve", "--no-such-flag"]), 1);
    assert_eq!(run(&["frobnicate"]), 1);
    assert_eq!(run(&["solve"]), 1);
    assert_eq!(run(&["gen", "--family", "chomp"]), 1);
    assert_eq!(run(&["run", "--help"]), 0);
}

#[test]
fn runtime_errors_exit_two() {
    assert_eq!(run(&["solve", "--game", "/definitely/not/here.json"]), 2);
    assert_eq!(run(&["gen", "--fixture", "fig9"]), 2);
    // gamma * delta >= 1
    assert_eq!(
        run(&["run", "--fixture", "fig1", "--mu", "4", "--gamma", "0.5"]),
        2
    );
}

#[test]
fn gen_then_solve_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("chomp.json");
    let dot = dir.path().join("chomp.dot");
    assert_eq!(
        run(&[
            "gen",
            "--family",
            "chomp",
            "--m",
            "3",
            "--out",
            game.to_str().unwrap()
        ]),
        0
    );
    assert_eq!(
        run(&[
            "gen",
            "--game",
            game.to_str().unwrap(),
            "--format",
            "dot",
            "--out",
            dot.to_str().unwrap()
        ]),
        0
    );
    assert!(fs::read_to_string(&dot).unwrap().starts_with("digraph"));
    assert_eq!(json(&game)["vertices"].as_array().unwrap().len(), 19);
    let out = dir.path().join("s.json");
    assert_eq!(
        run(&[
            "solve",
            "--game",
            game.to_str().unwrap(),
            "--out",
            out.to_str().unwrap()
        ]),
        0
    );
    assert_eq!(json(&out)["n"], 19);
}

#[test]
fn run_is_deterministic_and_analyzable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let args = |p: &Path| {
        vec![
            "run".to_string(),
            "--family".into(),
            "subtraction-nim".into(),
            "--n".into(),
            "16".into(),
            "--k".into(),
            "2".into(),
            "--mu".into(),
            "1024".into(),
            "--seed".into(),
            "7".into(),
            "--trace-every".into(),
            "1".into(),
            "--out".into(),
            p.to_str().unwrap().into(),
        ]
    };
    let call = |p: &Path| cli::run(std::iter::once("coevo".to_string()).chain(args(p)));
    assert_eq!(call(&a), 0);
    assert_eq!(call(&b), 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let v = json(&a);
    assert_eq!(v["augmented"], true);
    assert_eq!(v["config"]["gamma"].as_f64().unwrap(), 1.0 / 640.0);
    let r = &v["result"];
    assert_eq!(
        r["evaluations"].as_u64().unwrap(),
        1024 * r["generations_used"].as_u64().unwrap()
    );

    let an = dir.path().join("an.json");
    assert_eq!(
        run(&[
            "analyze",
            "--run",
            a.to_str().unwrap(),
            "--out",
            an.to_str().unwrap()
        ]),
        0
    );
    let reach = json(&an)["reach"].as_array().unwrap().len();
    assert_eq!(reach, 17);
}

#[test]
fn analyze_model_file() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.json");
    fs::write(
        &model,
        r#"{"gamma": 0.0, "dists": [[0.5, 0.25, 0.25], [1.0], [0.5, 0.5], [1.0], []]}"#,
    )
    .unwrap();
    let out = dir.path().join("an.json");
    assert_eq!(
        run(&[
            "analyze",
            "--fixture",
            "fig1",
            "--model",
            model.to_str().unwrap(),
            "--out",
            out.to_str().unwrap()
        ]),
        0
    );
    let v = json(&out);
    assert_eq!(v["reach"][0], 1.0);
    // shape mismatch is a runtime error
    fs::write(&model, r#"{"gamma": 0.0, "dists": [[1.0]]}"#).unwrap();
    assert_eq!(
        run(&[
            "analyze",
            "--fixture",
            "fig1",
            "--model",
            model.to_str().unwrap()
        ]),
        2
    );
}

#[test]
fn sweep_writes_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let o = out.to_str().unwrap();
    let args = [
        "sweep",
        "--family",
        "subtraction-nim",
        "--grid",
        "8,16",
        "--k",
        "2",
        "--mu",
        "8,32",
        "--replicates",
        "2",
        "--max-gen",
        "100",
        "--seed",
        "1",
        "--out-dir",
        o,
    ];
    assert_eq!(run(&args), 0);
    let first = fs::read(out.join("records.csv")).unwrap();
    let recs = records_from_csv(&first).unwrap();
    assert_eq!(recs.len(), 8);
    assert!(recs.iter().all(|r| r.delta == 2));
    assert_eq!(
        recs.iter().map(|r| r.n).collect::<Vec<_>>(),
        vec![8, 8, 8, 8, 16, 16, 16, 16]
    );
    let plot = json(&out.join("plot.json"));
    assert_eq!(plot["series"].as_array().unwrap().len(), 3);
    assert_eq!(plot["yscale"], "log");
    assert!(out.join("summary.csv").exists());
    assert_eq!(run(&args), 0);
    assert_eq!(fs::read(out.join("records.csv")).unwrap(), first);
    // bad grid: mu not ascending
    let bad = [
        "sweep",
        "--family",
        "chomp",
        "--grid",
        "2",
        "--mu",
        "8,4",
        "--out-dir",
        o,
    ];
    assert_eq!(run(&bad), 1);
}

#[test]
fn switch_and_intrans() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sw.json");
    assert_eq!(
        run(&[
            "switch",
            "--fixture",
            "fig3_bottom",
            "--vertex",
            "9",
            "--mode",
            "exact",
            "--out",
            out.to_str().unwrap()
        ]),
        0
    );
    assert_eq!(json(&out)["exact"], 2);
    assert_eq!(
        run(&[
            "switch",
            "--fixture",
            "fig1",
            "--out",
            out.to_str().unwrap()
        ]),
        0
    );
    assert_eq!(json(&out)["s_bar"], 2);
    assert_eq!(
        run(&[
            "intrans",
            "--family",
            "subtraction-nim",
            "--n",
            "7",
            "--k",
            "2",
            "--out",
            out.to_str().unwrap()
        ]),
        0
    );
    assert_eq!(json(&out)["mode"], "exhaustive");
    assert!(json(&out)["witness"].is_array());
}
