//! Experiment orchestration: grids of UMDA runs, CSV records, scaling sweeps,
//! plot descriptions and the intransitivity search.
//!
//! # CSV schema
//!
//! One row per run, columns in this order:
//!
//! | column | meaning |
//! |---|---|
//! | `family`, `params` | game family and parameter string (`n=16;k=2`) |
//! | `n`, `delta` | positions and max out-degree of the instance as generated |
//! | `augmented` | 1 if a fictitious root was added so the first player wins |
//! | `s_bar`, `s_mode` | max switchability and how it was obtained (`exact` or `bound`) |
//! | `mu`, `gamma` | population size and border |
//! | `seed`, `replicate` | base seed and stream id of the run |
//! | `generations`, `evaluations`, `success` | outcome; `evaluations = mu * generations` |
//! | `stop_rule` | `exact`, `sufficient` or `cap` |
//! | `theorem_eval_budget` | theorem-shaped budget with `C = K = 1` (reported, never enforced) |
//! | `wall_ms` | wall time, or 0 when timing is off so files stay reproducible |

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eda::{self, EdaError, RngStreams, StopRule, UmdaConfig};
use crate::game::{all_strategies, payoff, GameGraph, Strategy};
use crate::games::{GameError, GameSpec};
use crate::grundy::{self, ensure_first_player_win};
use crate::switchability::{self, ProfileMode, SwitchError, DEFAULT_EDGE_LIMIT};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Eda(#[from] EdaError),
    #[error(transparent)]
    Switch(#[from] SwitchError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "value")]
pub enum GammaRule {
    /// `1 / (20 Δ n)` from the instance as generated.
    Theorem,
    Fixed(f64),
}

impl GammaRule {
    pub fn gamma(&self, g: &GameGraph) -> f64 {
        match *self {
            Self::Theorem => eda::theorem_gamma(g),
            Self::Fixed(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub game: GameSpec,
    pub mu_grid: Vec<usize>,
    pub gamma_rule: GammaRule,
    pub replicates: u64,
    pub base_seed: u64,
    pub max_generations: u64,
    #[serde(default)]
    pub stop_rule: StopRule,
    #[serde(default = "default_edge_limit")]
    pub edge_limit: usize,
    /// Fill `wall_ms`; makes output depend on the machine.
    #[serde(default)]
    pub timing: bool,
}

fn default_edge_limit() -> usize {
    DEFAULT_EDGE_LIMIT
}

impl ExperimentConfig {
    pub fn new(game: GameSpec, mu_grid: Vec<usize>, replicates: u64, base_seed: u64) -> Self {
        Self {
            game,
            mu_grid,
            gamma_rule: GammaRule::Theorem,
            replicates,
            base_seed,
            max_generations: 10_000,
            stop_rule: StopRule::ExactOptimal,
            edge_limit: DEFAULT_EDGE_LIMIT,
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.replicates == 0 {
            return Err(HarnessError::Config("replicates must be at least 1".into()));
        }
        if self.mu_grid.is_empty() {
            return Err(HarnessError::Config("mu grid is empty".into()));
        }
        if self.mu_grid.contains(&0) {
            return Err(HarnessError::Config(
                "population sizes must be positive".into(),
            ));
        }
        if self.mu_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HarnessError::Config(
                "mu grid must be strictly ascending".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub family: String,
    pub params: String,
    pub n: usize,
    pub delta: usize,
    pub augmented: u8,
    pub s_bar: usize,
    pub s_mode: String,
    pub mu: usize,
    pub gamma: f64,
    pub seed: u64,
    pub replicate: u64,
    pub generations: u64,
    pub evaluations: u64,
    pub success: u8,
    pub stop_rule: String,
    pub theorem_eval_budget: f64,
    pub wall_ms: u64,
}

/// Everything about an instance that does not depend on the run.
#[derive(Debug, Clone)]
pub struct PreparedInstance {
    pub spec: GameSpec,
    /// The game as generated.
    pub original: GameGraph,
    /// The game the algorithm plays (with a fictitious root if needed).
    pub game: GameGraph,
    pub augmented: bool,
    pub s_bar: usize,
    pub s_exact: bool,
    pub theorem_eval_budget: f64,
}

pub fn prepare_instance(
    spec: &GameSpec,
    edge_limit: usize,
) -> Result<PreparedInstance, HarnessError> {
    let original = spec.build()?;
    let game = ensure_first_player_win(&original);
    let augmented = game.num_vertices() != original.num_vertices();
    let gd = grundy::grundy_values(&game);
    let profile = switchability::switchability_profile(&game, ProfileMode::Hybrid, edge_limit)?;
    let params = eda::theorem_parameters(&game, &gd, &profile.values(), 1.0, 1.0)?;
    Ok(PreparedInstance {
        spec: spec.clone(),
        original,
        game,
        augmented,
        s_bar: profile.s_bar,
        s_exact: profile.all_exact,
        theorem_eval_budget: params.theorem_eval_budget,
    })
}

/// Runs every `(mu, replicate)` pair of `cfg` and returns the records in
/// grid order. Replicate `r` uses stream `r` under `base_seed`, so each grid
/// point sees the same random streams.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>, HarnessError> {
    cfg.validate()?;
    let inst = prepare_instance(&cfg.game, cfg.edge_limit)?;
    run_prepared(&inst, cfg)
}

pub fn run_prepared(
    inst: &PreparedInstance,
    cfg: &ExperimentConfig,
) -> Result<Vec<ExperimentRecord>, HarnessError> {
    cfg.validate()?;
    let gamma = cfg.gamma_rule.gamma(&inst.original);
    eda::check_gamma(&inst.game, gamma)?;
    let jobs: Vec<(usize, u64)> = cfg
        .mu_grid
        .iter()
        .flat_map(|&mu| (0..cfg.replicates).map(move |r| (mu, r)))
        .collect();
    jobs.par_iter()
        .map(|&(mu, replicate)| {
            let mut ucfg = UmdaConfig::new(mu, gamma, cfg.max_generations, cfg.base_seed);
            ucfg.stream = replicate;
            ucfg.stop_rule = cfg.stop_rule;
            let start = Instant::now();
            let result = eda::run_umda(&inst.game, &ucfg)?;
            let wall_ms = if cfg.timing {
                start.elapsed().as_millis() as u64
            } else {
                0
            };
            Ok(ExperimentRecord {
                family: inst.spec.family().to_string(),
                params: inst.spec.params(),
                n: inst.original.num_vertices(),
                delta: inst.original.max_degree(),
                augmented: inst.augmented as u8,
                s_bar: inst.s_bar,
                s_mode: if inst.s_exact { "exact" } else { "bound" }.to_string(),
                mu,
                gamma,
                seed: cfg.base_seed,
                replicate,
                generations: result.generations_used,
                evaluations: result.evaluations,
                success: result.succeeded as u8,
                stop_rule: cfg.stop_rule.as_str().to_string(),
                theorem_eval_budget: inst.theorem_eval_budget,
                wall_ms,
            })
        })
        .collect()
}

/// Success frequency per grid point, in `mu_grid` order.
pub fn success_rates(records: &[ExperimentRecord], mu_grid: &[usize]) -> Vec<f64> {
    mu_grid
        .iter()
        .map(|&mu| {
            let rows: Vec<_> = records.iter().filter(|r| r.mu == mu).collect();
            if rows.is_empty() {
                0.0
            } else {
                rows.iter().filter(|r| r.success == 1).count() as f64 / rows.len() as f64
            }
        })
        .collect()
}

/// Median of the evaluation counts (mean of the middle pair for even counts).
pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[m]
    } else {
        (values[m - 1] + values[m]) / 2.0
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummaryRow {
    pub family: String,
    pub params: String,
    pub n: usize,
    pub delta: usize,
    pub s_bar: usize,
    pub s_mode: String,
    pub mu: usize,
    pub runs: u64,
    pub successes: u64,
    /// Over all runs, failures counted at the cap.
    pub median_evaluations: f64,
    pub theorem_eval_budget: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSeries {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub series: Vec<PlotSeries>,
    pub xlabel: String,
    pub ylabel: String,
    pub xscale: String,
    pub yscale: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub records: Vec<ExperimentRecord>,
    pub summary: Vec<SweepSummaryRow>,
    pub plot: PlotSpec,
}

/// Runs `template` on every instance of `grid` (the template's own game is
/// ignored). Instances run one after another; runs inside each in parallel.
pub fn sweep_scaling(
    grid: &[GameSpec],
    template: &ExperimentConfig,
) -> Result<SweepOutput, HarnessError> {
    if grid.is_empty() {
        return Err(HarnessError::Config("empty parameter grid".into()));
    }
    template.validate()?;
    let mut records = Vec::new();
    let mut summary = Vec::new();
    for spec in grid {
        let cfg = ExperimentConfig {
            game: spec.clone(),
            ..template.clone()
        };
        let recs = run_experiment(&cfg)?;
        for &mu in &template.mu_grid {
            let rows: Vec<_> = recs.iter().filter(|r| r.mu == mu).collect();
            let mut evals: Vec<f64> = rows.iter().map(|r| r.evaluations as f64).collect();
            let first = rows[0];
            summary.push(SweepSummaryRow {
                family: first.family.clone(),
                params: first.params.clone(),
                n: first.n,
                delta: first.delta,
                s_bar: first.s_bar,
                s_mode: first.s_mode.clone(),
                mu,
                runs: rows.len() as u64,
                successes: rows.iter().filter(|r| r.success == 1).count() as u64,
                median_evaluations: median(&mut evals).unwrap_or(0.0),
                theorem_eval_budget: first.theorem_eval_budget,
            });
        }
        records.extend(recs);
    }
    let plot = scaling_plot(&summary, &template.mu_grid);
    Ok(SweepOutput {
        records,
        summary,
        plot,
    })
}

fn scaling_plot(summary: &[SweepSummaryRow], mu_grid: &[usize]) -> PlotSpec {
    let mut series: Vec<PlotSeries> = mu_grid
        .iter()
        .map(|&mu| {
            let rows: Vec<_> = summary.iter().filter(|s| s.mu == mu).collect();
            PlotSeries {
                name: format!("median evaluations, mu={mu}"),
                x: rows.iter().map(|s| s.n as f64).collect(),
                y: rows.iter().map(|s| s.median_evaluations).collect(),
            }
        })
        .collect();
    let first_mu = mu_grid[0];
    let rows: Vec<_> = summary.iter().filter(|s| s.mu == first_mu).collect();
    series.push(PlotSeries {
        name: "theorem budget (C=1, K=1)".into(),
        x: rows.iter().map(|s| s.n as f64).collect(),
        y: rows.iter().map(|s| s.theorem_eval_budget).collect(),
    });
    PlotSpec {
        series,
        xlabel: "n (positions)".into(),
        ylabel: "payoff evaluations".into(),
        xscale: "log".into(),
        yscale: "log".into(),
    }
}

pub fn records_to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))
}

pub fn records_from_csv(bytes: &[u8]) -> Result<Vec<ExperimentRecord>, HarnessError> {
    let mut r = csv::Reader::from_reader(bytes);
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .ok_or_else(|| HarnessError::Config(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

/// Writes `records.csv`, `summary.csv` and `plot.json` into `dir`.
pub fn write_sweep(dir: &Path, out: &SweepOutput) -> Result<(), HarnessError> {
    write_atomic(&dir.join("records.csv"), &records_to_csv(&out.records)?)?;
    write_atomic(&dir.join("summary.csv"), &records_to_csv(&out.summary)?)?;
    let mut plot = serde_json::to_vec_pretty(&out.plot)?;
    plot.push(b'\n');
    write_atomic(&dir.join("plot.json"), &plot)
}

/// `x` beats `y` when it wins both as first and as second mover.
pub fn beats(g: &GameGraph, x: &Strategy, y: &Strategy) -> bool {
    payoff(g, x, y) == 1 && payoff(g, y, x) == -1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntransitivityReport {
    pub mode: SearchMode,
    /// Strategies in the exhaustive pool, or triples drawn when sampling.
    pub examined: u64,
    /// Successor indices of `x1, x2, x3` with `x1 > x2 > x3 > x1`.
    pub witness: Option<[Vec<u32>; 3]>,
}

/// Largest strategy set searched exhaustively.
pub const EXHAUSTIVE_LIMIT: u128 = 64;

/// Looks for `x1` beating `x2` beating `x3` beating `x1`.
///
/// Games with at most [`EXHAUSTIVE_LIMIT`] strategies are searched
/// completely and the lexicographically first triple is reported; otherwise
/// `samples` uniformly random triples are drawn.
pub fn intransitivity_search(
    g: &GameGraph,
    samples: u64,
    streams: RngStreams,
) -> IntransitivityReport {
    match g.strategy_count() {
        Some(c) if c <= EXHAUSTIVE_LIMIT => exhaustive_cycle(g),
        _ => sampled_cycle(g, samples, streams),
    }
}

fn exhaustive_cycle(g: &GameGraph) -> IntransitivityReport {
    let pool: Vec<Strategy> = all_strategies(g).collect();
    let k = pool.len();
    let wins: Vec<Vec<bool>> = (0..k)
        .map(|i| (0..k).map(|j| beats(g, &pool[i], &pool[j])).collect())
        .collect();
    let mut witness = None;
    'outer: for a in 0..k {
        for b in (0..k).filter(|&b| wins[a][b]) {
            if let Some(c) = (0..k).find(|&c| wins[b][c] && wins[c][a]) {
                witness = Some([a, b, c].map(|i| pool[i].indices().to_vec()));
                break 'outer;
            }
        }
    }
    IntransitivityReport {
        mode: SearchMode::Exhaustive,
        examined: k as u64,
        witness,
    }
}

fn sampled_cycle(g: &GameGraph, samples: u64, streams: RngStreams) -> IntransitivityReport {
    let mut rng = streams.at(0, 0);
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
        let choice = (0..g.num_vertices())
            .map(|v| match g.successors(v).len() {
                0 => 0,
                d => rng.random_range(0..d as u32),
            })
            .collect();
        Strategy::from_indices(g, choice).expect("sampled indices are in range")
    };
    for t in 0..samples {
        let xs = [draw(&mut rng), draw(&mut rng), draw(&mut rng)];
        if beats(g, &xs[0], &xs[1]) && beats(g, &xs[1], &xs[2]) && beats(g, &xs[2], &xs[0]) {
            return IntransitivityReport {
                mode: SearchMode::Sampled,
                examined: t + 1,
                witness: Some(xs.map(|x| x.indices().to_vec())),
            };
        }
    }
    IntransitivityReport {
        mode: SearchMode::Sampled,
        examined: samples,
        witness: None,
    }
}
