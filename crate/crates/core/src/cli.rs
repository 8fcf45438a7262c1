//! Command-line front end (`coevo`).
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on runtime errors.
//! Files named by `--out` are written atomically.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::eda::{self, ProbModel, RngStreams, StopRule, UmdaConfig};
use crate::game::GameGraph;
use crate::games::GameSpec;
use crate::grundy::{self, CriticalRule};
use crate::harness::{self, ExperimentConfig, GammaRule};
use crate::oracles;
use crate::switchability::{self, ProfileMode, DEFAULT_EDGE_LIMIT};

#[derive(Parser, Debug)]
#[command(
    name = "coevo",
    version,
    about = "Coevolutionary UMDA on impartial games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a game and write it as JSON or DOT.
    Gen {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grundy values, zero set, critical positions and a canonical optimal strategy.
    Solve {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, value_enum, default_value_t = Rule::Literal)]
        rule: Rule,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One UMDA run.
    Run {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        umda: UmdaArgs,
        #[arg(long)]
        mu: usize,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        /// Record a model snapshot every N generations.
        #[arg(long, default_value_t = 0)]
        trace_every: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs a family over a parameter grid; writes records.csv, summary.csv, plot.json.
    Sweep {
        #[arg(long, value_enum)]
        family: Family,
        /// Values of n (subtraction_nim) or m (other families).
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        mu: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        replicates: u64,
        #[command(flatten)]
        umda: UmdaArgs,
        #[arg(long, default_value_t = DEFAULT_EDGE_LIMIT)]
        edge_limit: usize,
        /// Fill wall_ms (output then depends on the machine).
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Switchability of one vertex or of every vertex.
    Switch {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long)]
        vertex: Option<usize>,
        #[arg(long, value_enum, default_value_t = Mode::Hybrid)]
        mode: Mode,
        #[arg(long, default_value_t = DEFAULT_EDGE_LIMIT)]
        edge_limit: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact reach, win and selection probabilities of a model.
    Analyze {
        #[command(flatten)]
        game: GameArgs,
        /// Output of `run`; supplies both the game and its final model.
        #[arg(long, conflicts_with = "model")]
        run: Option<PathBuf>,
        /// A model JSON ({"gamma", "dists"}); the uniform model if omitted.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Searches for a cyclic triple x1 > x2 > x3 > x1.
    Intrans {
        #[command(flatten)]
        game: GameArgs,
        /// Triples drawn when the strategy set is too large to enumerate.
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Default)]
struct GameArgs {
    /// Game JSON file.
    #[arg(long, conflicts_with_all = ["family", "fixture"])]
    game: Option<PathBuf>,
    #[arg(long, value_enum, conflicts_with = "fixture")]
    family: Option<Family>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// fig1, fig2, fig3_top, fig3_bottom or fig4.
    #[arg(long)]
    fixture: Option<String>,
}

#[derive(Args, Debug)]
struct UmdaArgs {
    #[arg(long, conflicts_with = "gamma_theorem")]
    gamma: Option<f64>,
    /// Use 1/(20 Δ n) (the default).
    #[arg(long)]
    gamma_theorem: bool,
    #[arg(long, default_value_t = 10_000)]
    max_gen: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Stop::Exact)]
    stop: Stop,
}

impl UmdaArgs {
    fn gamma_rule(&self) -> GammaRule {
        match self.gamma {
            Some(v) => GammaRule::Fixed(v),
            None => GammaRule::Theorem,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Family {
    SubtractionNim,
    SilverDollar,
    TurningTurtles,
    Chomp,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Format {
    Json,
    Dot,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Rule {
    Literal,
    ZeroMove,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Mode {
    Exact,
    Bound,
    Hybrid,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Stop {
    Exact,
    Sufficient,
    Cap,
}

impl From<Stop> for StopRule {
    fn from(s: Stop) -> Self {
        match s {
            Stop::Exact => StopRule::ExactOptimal,
            Stop::Sufficient => StopRule::SufficientOptimal,
            Stop::Cap => StopRule::GenerationCapOnly,
        }
    }
}

enum CliError {
    Usage(String),
    Runtime(String),
}

fn runtime<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

fn family_spec(
    family: Family,
    n: Option<usize>,
    k: Option<usize>,
    m: Option<usize>,
) -> Result<GameSpec, CliError> {
    let need = |v: Option<usize>, flag: &str| {
        v.ok_or_else(|| CliError::Usage(format!("--{flag} is required for this family")))
    };
    Ok(match family {
        Family::SubtractionNim => GameSpec::SubtractionNim {
            n: need(n, "n")?,
            k: need(k, "k")?,
        },
        Family::SilverDollar => GameSpec::SilverDollar {
            m: need(m, "m")?,
            k: need(k, "k")?,
        },
        Family::TurningTurtles => GameSpec::TurningTurtles { m: need(m, "m")? },
        Family::Chomp => GameSpec::Chomp { m: need(m, "m")? },
    })
}

impl GameArgs {
    fn is_set(&self) -> bool {
        self.game.is_some() || self.family.is_some() || self.fixture.is_some()
    }

    fn spec(&self) -> Result<Option<GameSpec>, CliError> {
        if let Some(f) = self.family {
            return family_spec(f, self.n, self.k, self.m).map(Some);
        }
        Ok(self
            .fixture
            .as_ref()
            .map(|name| GameSpec::Fixture { name: name.clone() }))
    }

    fn load(&self) -> Result<(GameGraph, Option<GameSpec>), CliError> {
        if let Some(path) = &self.game {
            let text = std::fs::read_to_string(path)
                .map_err(|e| runtime(format!("{}: {e}", path.display())))?;
            return Ok((GameGraph::from_json(&text).map_err(runtime)?, None));
        }
        match self.spec()? {
            Some(spec) => Ok((spec.build().map_err(runtime)?, Some(spec))),
            None => Err(CliError::Usage(
                "give a game with --game, --family or --fixture".into(),
            )),
        }
    }
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(p) => harness::write_atomic(p, bytes).map_err(runtime),
        None => std::io::stdout().write_all(bytes).map_err(runtime),
    }
}

fn emit_json<T: Serialize>(out: &Option<PathBuf>, value: &T) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(runtime)?;
    bytes.push(b'\n');
    emit(out, &bytes)
}

fn read_json(path: &Path) -> Result<serde_json::Value, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            1
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn execute(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Gen { game, format, out } => {
            let (g, _) = game.load()?;
            match format {
                Format::Json => emit(&out, format!("{}\n", g.to_json()).as_bytes()),
                Format::Dot => emit(&out, g.to_dot().as_bytes()),
            }
        }
        Command::Solve { game, rule, out } => {
            let (g, _) = game.load()?;
            let rule = match rule {
                Rule::Literal => CriticalRule::Literal,
                Rule::ZeroMove => CriticalRule::ZeroMoveAndChoice,
            };
            let gd = grundy::grundy_values_with(&g, rule);
            let canonical = grundy::canonical_optimal_strategy(&g, &gd).ok();
            emit_json(
                &out,
                &json!({
                    "n": g.num_vertices(),
                    "root": g.root(),
                    "first_player_wins": gd.h[g.root()] != 0,
                    "h": gd.h,
                    "zero_set": gd.zero_set,
                    "critical": gd.critical,
                    "critical_rule": rule,
                    "canonical_strategy": canonical.as_ref().map(|x| x.indices().to_vec()),
                    "canonical_targets": canonical.as_ref().map(|x| x.targets(&g)),
                }),
            )
        }
        Command::Run {
            game,
            umda,
            mu,
            stream,
            trace_every,
            out,
        } => {
            let (original, spec) = game.load()?;
            let g = grundy::ensure_first_player_win(&original);
            let gamma = umda.gamma_rule().gamma(&original);
            let mut cfg = UmdaConfig::new(mu, gamma, umda.max_gen, umda.seed);
            cfg.stream = stream;
            cfg.stop_rule = umda.stop.into();
            cfg.trace_every = trace_every;
            let result = eda::run_umda(&g, &cfg).map_err(runtime)?;
            emit_json(
                &out,
                &json!({
                    "game_spec": spec,
                    "augmented": g.num_vertices() != original.num_vertices(),
                    "config": cfg,
                    "game": g.to_json_model(),
                    "result": result,
                }),
            )
        }
        Command::Sweep {
            family,
            grid,
            k,
            mu,
            replicates,
            umda,
            edge_limit,
            timing,
            out_dir,
        } => {
            let specs = grid
                .iter()
                .map(|&x| match family {
                    Family::SubtractionNim => family_spec(family, Some(x), k, None),
                    _ => family_spec(family, None, k, Some(x)),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let template = ExperimentConfig {
                game: specs[0].clone(),
                mu_grid: mu,
                gamma_rule: umda.gamma_rule(),
                replicates,
                base_seed: umda.seed,
                max_generations: umda.max_gen,
                stop_rule: umda.stop.into(),
                edge_limit,
                timing,
            };
            template
                .validate()
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let out = harness::sweep_scaling(&specs, &template).map_err(runtime)?;
            harness::write_sweep(&out_dir, &out).map_err(runtime)
        }
        Command::Switch {
            game,
            vertex,
            mode,
            edge_limit,
            out,
        } => {
            let (g, _) = game.load()?;
            match vertex {
                Some(v) => {
                    let report = match mode {
                        Mode::Exact => switchability::exact_switchability(&g, v, edge_limit),
                        Mode::Bound => {
                            switchability::switchability_profile(&g, ProfileMode::Bound, edge_limit)
                                .and_then(|p| {
                                    p.reports
                                        .get(v)
                                        .cloned()
                                        .ok_or(switchability::SwitchError::Unreachable(v))
                                })
                        }
                        Mode::Hybrid => match switchability::exact_switchability(&g, v, edge_limit)
                        {
                            Err(switchability::SwitchError::TooLarge { .. }) => {
                                switchability::switchability_profile(
                                    &g,
                                    ProfileMode::Bound,
                                    edge_limit,
                                )
                                .map(|p| p.reports[v].clone())
                            }
                            r => r,
                        },
                    }
                    .map_err(runtime)?;
                    emit_json(&out, &report)
                }
                None => {
                    let mode = match mode {
                        Mode::Exact => ProfileMode::Exact,
                        Mode::Bound => ProfileMode::Bound,
                        Mode::Hybrid => ProfileMode::Hybrid,
                    };
                    let profile = switchability::switchability_profile(&g, mode, edge_limit)
                        .map_err(runtime)?;
                    emit_json(&out, &profile)
                }
            }
        }
        Command::Analyze {
            game,
            run,
            model,
            out,
        } => {
            let (g, model) = if let Some(path) = run {
                if game.is_set() {
                    return Err(CliError::Usage("--run already names the game".into()));
                }
                let v = read_json(&path)?;
                let g: crate::game::GameJson =
                    serde_json::from_value(v["game"].clone()).map_err(runtime)?;
                let g = GameGraph::from_json_model(g).map_err(runtime)?;
                let m: ProbModel =
                    serde_json::from_value(v["result"]["final_model"].clone()).map_err(runtime)?;
                (g, m)
            } else {
                let (g, _) = game.load()?;
                let m = match model {
                    Some(p) => serde_json::from_value(read_json(&p)?).map_err(runtime)?,
                    None => eda::uniform_model(&g, 0.0).map_err(runtime)?,
                };
                (g, m)
            };
            model.validate(&g).map_err(runtime)?;
            emit_json(&out, &oracles::analyze(&g, &model))
        }
        Command::Intrans {
            game,
            samples,
            seed,
            out,
        } => {
            let (g, _) = game.load()?;
            let report = harness::intransitivity_search(&g, samples, RngStreams::new(seed, 0));
            emit_json(&out, &report)
        }
    }
}
