//! Multi-valued UMDA with binary tournament selection.
//!
//! The model keeps one categorical distribution per interior position over
//! its successor list. Each generation plays `mu` games between pairs of
//! strategies sampled from the model, keeps the winners, and replaces every
//! distribution by the winners' choice frequencies pushed back into the
//! border set `{p : p(s) >= gamma}` by [`restrict`].
//!
//! # Random streams
//!
//! A run is keyed by `(seed, stream)`. Tournament `j` of generation `t`
//! reads its uniforms from a ChaCha8 stream keyed by `seed`, stream id
//! `stream`, starting at word offset `(t * mu + j) * 4 * |Int(G)|`; each
//! strategy consumes exactly one `f64` (two words) per interior position.
//! Results therefore do not depend on how tournaments are scheduled.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{payoff, GameGraph, Strategy, Vertex};
use crate::grundy::{self, GrundyData};

/// Tolerance on the sum of a probability vector.
pub const SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EdaError {
    #[error("gamma = {gamma} must satisfy 0 <= gamma and gamma * max_degree ({delta}) < 1")]
    GammaTooLarge { gamma: f64, delta: usize },
    #[error("population size must be at least 1")]
    EmptyPopulation,
    #[error("the first player does not win this game (h(root) = 0)")]
    FirstPlayerLoses,
    #[error("no switchability value for critical position {0}")]
    MissingSwitchability(Vertex),
    #[error("model does not fit the game: {0}")]
    ModelMismatch(String),
}

/// One categorical distribution per position (empty at sinks).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbModel {
    pub gamma: f64,
    pub dists: Vec<Vec<f64>>,
}

impl ProbModel {
    pub fn prob(&self, u: Vertex, idx: usize) -> f64 {
        self.dists[u][idx]
    }

    /// Checks shape against `g` and that each vector is a distribution.
    pub fn validate(&self, g: &GameGraph) -> Result<(), EdaError> {
        if self.dists.len() != g.num_vertices() {
            return Err(EdaError::ModelMismatch(format!(
                "{} distributions for {} vertices",
                self.dists.len(),
                g.num_vertices()
            )));
        }
        for (v, d) in self.dists.iter().enumerate() {
            if d.len() != g.successors(v).len() {
                return Err(EdaError::ModelMismatch(format!(
                    "vertex {v} has {} entries",
                    d.len()
                )));
            }
            if d.is_empty() {
                continue;
            }
            let sum: f64 = d.iter().sum();
            if (sum - 1.0).abs() > 1e-9 || d.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(EdaError::ModelMismatch(format!(
                    "vertex {v} is not a distribution"
                )));
            }
        }
        Ok(())
    }
}

pub fn check_gamma(g: &GameGraph, gamma: f64) -> Result<(), EdaError> {
    if gamma.is_nan() || gamma < 0.0 || gamma * g.max_degree() as f64 >= 1.0 {
        return Err(EdaError::GammaTooLarge {
            gamma,
            delta: g.max_degree(),
        });
    }
    Ok(())
}

pub fn uniform_model(g: &GameGraph, gamma: f64) -> Result<ProbModel, EdaError> {
    check_gamma(g, gamma)?;
    let dists = (0..g.num_vertices())
        .map(|v| {
            let d = g.successors(v).len();
            vec![1.0 / d as f64; d]
        })
        .collect();
    Ok(ProbModel { gamma, dists })
}

/// Total mass above and below the border `gamma`.
pub fn border_masses(p: &[f64], gamma: f64) -> (f64, f64) {
    p.iter().fold((0.0, 0.0), |(plus, minus), &x| {
        (plus + (x - gamma).max(0.0), minus + (gamma - x).max(0.0))
    })
}

/// Moves every entry to at least `gamma`, taking the deficit proportionally
/// from the excess above `gamma`. Requires `gamma * p.len() < 1`.
pub fn restrict(p: &[f64], gamma: f64) -> Vec<f64> {
    let (plus, minus) = border_masses(p, gamma);
    // plus - minus = 1 - gamma * |S| > 0, so plus is positive.
    let keep = 1.0 - minus / plus;
    p.iter()
        .map(|&x| {
            if x <= gamma {
                gamma
            } else {
                gamma + keep * (x - gamma)
            }
        })
        .collect()
}

fn renormalise(p: &mut [f64]) {
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > SUM_TOL {
        p.iter_mut().for_each(|x| *x /= sum);
    }
}

/// Inverse-CDF draw over the canonical successor order.
#[inline]
pub fn sample_index(dist: &[f64], uniform: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in dist.iter().enumerate() {
        acc += p;
        if uniform < acc {
            return i;
        }
    }
    // Rounding can leave the cumulative sum a hair below one.
    dist.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Draws a full strategy, one uniform per interior position in id order.
pub fn sample_strategy<R: Rng + ?Sized>(g: &GameGraph, model: &ProbModel, rng: &mut R) -> Strategy {
    let mut choice = vec![0u32; g.num_vertices()];
    for (v, c) in choice.iter_mut().enumerate() {
        let d = &model.dists[v];
        if !d.is_empty() {
            let u: f64 = rng.random();
            *c = sample_index(d, u) as u32;
        }
    }
    Strategy::from_indices_unchecked(choice)
}

/// Samples two strategies, plays one game, returns the winner.
pub fn tournament<R: Rng + ?Sized>(
    g: &GameGraph,
    model: &ProbModel,
    rng: &mut R,
    evaluations: &mut u64,
) -> Strategy {
    let x = sample_strategy(g, model, rng);
    let y = sample_strategy(g, model, rng);
    *evaluations += 1;
    if payoff(g, &x, &y) == 1 {
        x
    } else {
        y
    }
}

/// Counter-based random streams for one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStreams {
    pub seed: u64,
    pub stream: u64,
}

impl RngStreams {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Generator positioned at `slot * words_per_slot` within this run's stream.
    pub fn at(&self, slot: u128, words_per_slot: u128) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(slot * words_per_slot);
        rng
    }

    pub fn tournament_rng(
        &self,
        g: &GameGraph,
        generation: u64,
        mu: usize,
        j: usize,
    ) -> ChaCha8Rng {
        let words = 4 * g.num_interior().max(1) as u128;
        self.at(generation as u128 * mu as u128 + j as u128, words)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Stop once a selected strategy is optimal (exact best-response check).
    #[default]
    ExactOptimal,
    /// Stop once a selected strategy moves into the zero set at every critical position.
    SufficientOptimal,
    /// Run until the generation cap.
    GenerationCapOnly,
}

impl StopRule {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ExactOptimal => "exact",
            Self::SufficientOptimal => "sufficient",
            Self::GenerationCapOnly => "cap",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UmdaConfig {
    pub mu: usize,
    pub gamma: f64,
    pub max_generations: u64,
    pub seed: u64,
    /// Stream id; the replicate index in experiments.
    #[serde(default)]
    pub stream: u64,
    pub stop_rule: StopRule,
    /// Record a model snapshot every this many generations (0 = never).
    #[serde(default)]
    pub trace_every: u64,
}

impl UmdaConfig {
    pub fn new(mu: usize, gamma: f64, max_generations: u64, seed: u64) -> Self {
        Self {
            mu,
            gamma,
            max_generations,
            seed,
            stream: 0,
            stop_rule: StopRule::ExactOptimal,
            trace_every: 0,
        }
    }

    pub fn streams(&self) -> RngStreams {
        RngStreams::new(self.seed, self.stream)
    }
}

#[derive(Debug, Clone)]
pub struct GenerationOutcome {
    pub model: ProbModel,
    pub population: Vec<Strategy>,
    pub evaluations: u64,
}

/// Runs `mu` tournaments of generation `generation` (0-based) and updates the model.
pub fn generation_step(
    g: &GameGraph,
    model: &ProbModel,
    cfg: &UmdaConfig,
    generation: u64,
) -> GenerationOutcome {
    let streams = cfg.streams();
    let population: Vec<Strategy> = (0..cfg.mu)
        .into_par_iter()
        .map(|j| {
            let mut rng = streams.tournament_rng(g, generation, cfg.mu, j);
            let mut evals = 0;
            tournament(g, model, &mut rng, &mut evals)
        })
        .collect();
    let model = update_model(g, &population, cfg.gamma);
    GenerationOutcome {
        model,
        population,
        evaluations: cfg.mu as u64,
    }
}

/// Choice frequencies of `population`, restricted to the border set.
pub fn update_model(g: &GameGraph, population: &[Strategy], gamma: f64) -> ProbModel {
    let mut counts: Vec<Vec<u64>> = (0..g.num_vertices())
        .map(|v| vec![0; g.successors(v).len()])
        .collect();
    for x in population {
        for v in g.interior() {
            counts[v][x.index(v)] += 1;
        }
    }
    let mu = population.len() as f64;
    let dists = counts
        .into_iter()
        .map(|c| {
            if c.is_empty() {
                return Vec::new();
            }
            let q: Vec<f64> = c.iter().map(|&k| k as f64 / mu).collect();
            let mut p = restrict(&q, gamma);
            renormalise(&mut p);
            p
        })
        .collect();
    ProbModel { gamma, dists }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSnapshot {
    pub generation: u64,
    pub model: ProbModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub generations_used: u64,
    pub evaluations: u64,
    pub succeeded: bool,
    pub stop_rule: StopRule,
    pub final_model: ProbModel,
    /// Successor indices of the first optimal selected strategy found.
    pub optimal_witness: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<ModelSnapshot>,
}

/// Runs the UMDA until the stop rule fires on a selected population or the
/// generation cap is reached.
pub fn run_umda(g: &GameGraph, cfg: &UmdaConfig) -> Result<RunResult, EdaError> {
    if cfg.mu == 0 {
        return Err(EdaError::EmptyPopulation);
    }
    let gd = grundy::grundy_values(g);
    if gd.h[g.root()] == 0 {
        return Err(EdaError::FirstPlayerLoses);
    }
    let mut model = uniform_model(g, cfg.gamma)?;
    let mut trace = Vec::new();
    if cfg.trace_every > 0 {
        trace.push(ModelSnapshot {
            generation: 0,
            model: model.clone(),
        });
    }
    let mut evaluations = 0u64;
    for t in 0..cfg.max_generations {
        let out = generation_step(g, &model, cfg, t);
        evaluations += out.evaluations;
        model = out.model;
        let generation = t + 1;
        if cfg.trace_every > 0 && generation % cfg.trace_every == 0 {
            trace.push(ModelSnapshot {
                generation,
                model: model.clone(),
            });
        }
        if let Some(w) = find_optimal(g, &gd, &out.population, cfg.stop_rule) {
            return Ok(RunResult {
                generations_used: generation,
                evaluations,
                succeeded: true,
                stop_rule: cfg.stop_rule,
                final_model: model,
                optimal_witness: Some(w.indices().to_vec()),
                trace,
            });
        }
    }
    Ok(RunResult {
        generations_used: cfg.max_generations,
        evaluations,
        succeeded: false,
        stop_rule: cfg.stop_rule,
        final_model: model,
        optimal_witness: None,
        trace,
    })
}

fn find_optimal<'a>(
    g: &GameGraph,
    gd: &GrundyData,
    population: &'a [Strategy],
    rule: StopRule,
) -> Option<&'a Strategy> {
    let mut checked: HashSet<&Strategy> = HashSet::new();
    population.iter().find(|x| {
        if !checked.insert(x) {
            return false;
        }
        match rule {
            StopRule::ExactOptimal => grundy::is_optimal_exact(g, x),
            StopRule::SufficientOptimal => grundy::is_optimal_sufficient(g, gd, x).unwrap_or(false),
            StopRule::GenerationCapOnly => false,
        }
    })
}

/// Parameter settings and budgets of the main runtime bound, as functions of
/// the game, switchability values, and the free constants `K` and `C`.
///
/// Every budget is "theorem-shaped": `C` is not known, so these numbers are
/// for comparison only and never used as cutoffs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremParameters {
    pub n: usize,
    pub max_degree: usize,
    /// `20 * Δ * n`.
    #[serde(serialize_with = "ser_big")]
    pub scale: BigUint,
    pub gamma: f64,
    /// Max switchability over critical positions.
    pub s_hat: usize,
    /// Max switchability over all positions, when every value is known.
    pub s_bar: Option<usize>,
    /// `scale^(1 + 2 s_hat)`.
    #[serde(serialize_with = "ser_big")]
    pub mu_power: BigUint,
    /// `C (K + s_hat + 1) scale^(1 + 2 s_hat) ln n`.
    pub mu_min: f64,
    /// `sum over critical v of scale^s(v)`.
    #[serde(serialize_with = "ser_big")]
    pub critical_sum: BigUint,
    /// `C * sum * ln n` generations.
    pub generation_budget: f64,
    /// `mu_min * generation_budget` evaluations.
    pub theorem_eval_budget: f64,
    /// `scale^(2 + 3 s_bar)`.
    #[serde(serialize_with = "ser_big_opt")]
    pub corollary_power: Option<BigUint>,
    /// `C^2 (K + s_bar + 1) scale^(2 + 3 s_bar) ln^2 n` evaluations.
    pub corollary_eval_budget: Option<f64>,
}

fn ser_big<S: serde::Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn ser_big_opt<S: serde::Serializer>(v: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(b) => s.serialize_str(&b.to_string()),
        None => s.serialize_none(),
    }
}

/// `switchability[v]` may hold exact values or upper bounds; budgets are
/// monotone in them. Values are required at every critical position.
pub fn theorem_parameters(
    g: &GameGraph,
    gd: &GrundyData,
    switchability: &[Option<usize>],
    k: f64,
    c: f64,
) -> Result<TheoremParameters, EdaError> {
    let n = g.num_vertices();
    let delta = g.max_degree();
    let scale = BigUint::from(20u32) * BigUint::from(delta) * BigUint::from(n);
    let scale_f = scale.to_f64().unwrap_or(f64::INFINITY);
    let ln_n = (n as f64).ln();

    let mut s_hat = 0;
    let mut critical_sum = BigUint::zero();
    for &v in &gd.critical {
        let s = switchability
            .get(v)
            .copied()
            .flatten()
            .ok_or(EdaError::MissingSwitchability(v))?;
        s_hat = s_hat.max(s);
        critical_sum += scale.pow(s as u32);
    }
    let s_bar = switchability
        .iter()
        .take(n)
        .try_fold(0usize, |acc, s| s.map(|s| acc.max(s)))
        .filter(|_| switchability.len() >= n);

    let mu_power = scale.pow(1 + 2 * s_hat as u32);
    let mu_min = c * (k + s_hat as f64 + 1.0) * big_f64(&mu_power) * ln_n;
    let generation_budget = c * big_f64(&critical_sum) * ln_n;
    let corollary_power = s_bar.map(|s| scale.pow(2 + 3 * s as u32));
    let corollary_eval_budget = s_bar
        .zip(corollary_power.as_ref())
        .map(|(s, p)| c * c * (k + s as f64 + 1.0) * big_f64(p) * ln_n * ln_n);
    Ok(TheoremParameters {
        n,
        max_degree: delta,
        scale,
        gamma: 1.0 / scale_f,
        s_hat,
        s_bar,
        mu_power,
        mu_min,
        critical_sum,
        generation_budget,
        theorem_eval_budget: mu_min * generation_budget,
        corollary_power,
        corollary_eval_budget,
    })
}

fn big_f64(b: &BigUint) -> f64 {
    b.to_f64().unwrap_or(f64::INFINITY)
}

/// `1 / (20 Δ n)`.
pub fn theorem_gamma(g: &GameGraph) -> f64 {
    1.0 / (20.0 * g.max_degree() as f64 * g.num_vertices() as f64)
}
