//! Seeded replication grids and their summary statistics.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::SearchError;
use crate::hydraulics::SolverConfig;
use crate::ils::{optimize, Constraints, Costed, SearchParams, SearchStats, Variant};
use crate::io::{parse_instance, parse_type_catalog, RunRecord, RunStatus};
use crate::network::{Network, PipeTypeCatalog};

/// Seeds given either explicitly or as a count (`0..count`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    Count(u64),
    List(Vec<u64>),
}

impl Seeds {
    pub fn values(&self) -> Vec<u64> {
        match self {
            Seeds::Count(n) => (0..*n).collect(),
            Seeds::List(v) => v.clone(),
        }
    }
}

fn default_time_limits() -> Vec<f64> {
    vec![60.0, 180.0, 300.0, 600.0]
}

fn default_seeds() -> Seeds {
    Seeds::Count(10)
}

fn default_variants() -> Vec<Variant> {
    vec![Variant::Full]
}

fn default_h_min() -> f64 {
    Constraints::default().h_min
}

fn default_v_max() -> f64 {
    Constraints::default().v_max
}

fn default_alpha() -> f64 {
    SearchParams::default().alpha
}

fn default_factor() -> usize {
    SearchParams::default().factor
}

fn default_pool() -> usize {
    SearchParams::default().pool_size
}

/// A grid of runs: every instance, time limit, seed and variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub instances: Vec<PathBuf>,
    /// Catalog CSV; the built-in 16-type table when absent.
    #[serde(default)]
    pub catalog: Option<PathBuf>,
    #[serde(default = "default_time_limits")]
    pub time_limits: Vec<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: Seeds,
    #[serde(default = "default_variants")]
    pub variants: Vec<Variant>,
    #[serde(default = "default_h_min")]
    pub h_min: f64,
    #[serde(default = "default_v_max")]
    pub v_max: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_factor")]
    pub factor: usize,
    #[serde(default = "default_pool")]
    pub pool: usize,
    #[serde(default)]
    pub max_iterations: Option<u64>,
    #[serde(default)]
    pub dispersed_probability: Option<f64>,
    /// Worker threads; 0 means one per core.
    #[serde(default)]
    pub jobs: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("plan lists no {0}")]
    Empty(&'static str),
    #[error("catalog {path}: {message}")]
    Catalog { path: PathBuf, message: String },
    #[error("thread pool: {0}")]
    Pool(String),
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<(), PlanError> {
        if self.instances.is_empty() {
            return Err(PlanError::Empty("instances"));
        }
        if self.time_limits.is_empty() {
            return Err(PlanError::Empty("time limits"));
        }
        if self.seeds.values().is_empty() {
            return Err(PlanError::Empty("seeds"));
        }
        if self.variants.is_empty() {
            return Err(PlanError::Empty("variants"));
        }
        Ok(())
    }

    /// Resolves relative instance, catalog and output paths against `base`.
    pub fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.instances.iter_mut().for_each(fix);
        self.catalog.iter_mut().for_each(fix);
        self.output.iter_mut().for_each(fix);
    }

    fn catalog(&self) -> Result<PipeTypeCatalog, PlanError> {
        match &self.catalog {
            None => Ok(PipeTypeCatalog::hg_mp()),
            Some(path) => {
                let err = |message: String| PlanError::Catalog {
                    path: path.clone(),
                    message,
                };
                let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
                parse_type_catalog(&text).map_err(|e| err(e.to_string()))
            }
        }
    }
}

/// Name under which records refer to an instance file.
pub fn instance_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn load(path: &Path) -> Result<Network, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_instance(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Runs one seeded replication and turns the outcome into a record.
pub fn run_one(
    instance_id: &str,
    net: &Network,
    cat: &PipeTypeCatalog,
    constraints: Constraints,
    params: &SearchParams,
) -> RunRecord {
    record(
        instance_id,
        params,
        &optimize(net, cat, constraints, SolverConfig::default(), params),
    )
}

/// The record of a finished run.
pub fn record(
    instance_id: &str,
    params: &SearchParams,
    outcome: &Result<(Costed, SearchStats), SearchError>,
) -> RunRecord {
    let mut rec = RunRecord {
        instance_id: instance_id.to_string(),
        seed: params.seed,
        time_limit_s: params.time_limit.as_secs_f64(),
        variant: params.variant.name().to_string(),
        best_cost: None,
        time_to_best_s: 0.0,
        iterations: 0,
        simulator_calls: 0,
        tested_solutions: 0,
        feasible_fraction: 0.0,
        status: RunStatus::Ok,
        error: None,
    };
    match outcome {
        Ok((best, stats)) => {
            rec.best_cost = Some(best.cost);
            rec.time_to_best_s = stats.time_to_best_s;
            rec.iterations = stats.iterations;
            rec.simulator_calls = stats.simulator_calls;
            rec.tested_solutions = stats.tested_solutions;
            rec.feasible_fraction = stats.feasible_fraction();
        }
        Err(e) => {
            rec.status = match e {
                SearchError::NoFeasibleUniform => RunStatus::Infeasible,
                _ => RunStatus::Error,
            };
            rec.error = Some(e.to_string());
        }
    }
    rec
}

/// Runs the whole grid, in parallel over replications, and returns the
/// records sorted by instance, time limit, seed and variant (plan order).
/// An instance that cannot be read yields a single error record.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<Vec<RunRecord>, PlanError> {
    plan.validate()?;
    let cat = plan.catalog()?;
    let constraints = Constraints {
        h_min: plan.h_min,
        v_max: plan.v_max,
    };
    let seeds = plan.seeds.values();

    let mut records = Vec::new();
    let mut jobs = Vec::new();
    let mut loaded = Vec::new();
    for (i, path) in plan.instances.iter().enumerate() {
        let id = instance_id(path);
        match load(path) {
            Ok(net) => loaded.push((i, id, net)),
            Err(message) => {
                log::warn!("{message}");
                records.push((
                    (i, 0, 0, 0),
                    RunRecord {
                        instance_id: id,
                        seed: 0,
                        time_limit_s: 0.0,
                        variant: String::new(),
                        best_cost: None,
                        time_to_best_s: 0.0,
                        iterations: 0,
                        simulator_calls: 0,
                        tested_solutions: 0,
                        feasible_fraction: 0.0,
                        status: RunStatus::Error,
                        error: Some(message),
                    },
                ));
            }
        }
    }
    for (k, (i, _, _)) in loaded.iter().enumerate() {
        for (l, &limit) in plan.time_limits.iter().enumerate() {
            for (s, &seed) in seeds.iter().enumerate() {
                for (v, &variant) in plan.variants.iter().enumerate() {
                    let params = SearchParams {
                        alpha: plan.alpha,
                        factor: plan.factor,
                        pool_size: plan.pool,
                        time_limit: Duration::from_secs_f64(limit),
                        max_iterations: plan.max_iterations,
                        target_cost: None,
                        seed,
                        variant,
                        dispersed_probability: plan.dispersed_probability,
                    };
                    jobs.push(((*i, l, s, v), k, params));
                }
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.jobs)
        .build()
        .map_err(|e| PlanError::Pool(e.to_string()))?;
    let done: Vec<_> = pool.install(|| {
        jobs.par_iter()
            .map(|(key, k, params)| {
                let (_, id, net) = &loaded[*k];
                log::info!(
                    "{id} seed {} limit {:?} {}",
                    params.seed,
                    params.time_limit,
                    params.variant
                );
                (*key, run_one(id, net, &cat, constraints, params))
            })
            .collect()
    });
    records.extend(done);
    records.sort_by_key(|(key, _)| *key);
    Ok(records.into_iter().map(|(_, r)| r).collect())
}

/// Cost statistics of one variant on one (instance, time limit) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub instance_id: String,
    pub time_limit_s: f64,
    pub variant: String,
    pub runs: usize,
    pub best_cost: f64,
    pub average_cost: f64,
    /// Mean over runs of the percentage above the best cost known for the
    /// instance and time limit across all variants.
    pub average_deviation_pct: f64,
}

/// Average gain of `variant` over `baseline` across instances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainSummary {
    pub variant: String,
    pub baseline: String,
    pub time_limit_s: f64,
    pub instances: usize,
    /// Gain computed on each instance's best costs, then averaged.
    pub best_gain_pct: f64,
    /// Gain computed on each instance's average costs, then averaged.
    pub average_gain_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub cells: Vec<CellSummary>,
    pub gains: Vec<GainSummary>,
    pub notes: Vec<String>,
}

#[derive(Debug, Error, PartialEq)]
pub enum SummaryError {
    #[error("no successful runs to summarize")]
    Empty,
    #[error("baseline variant {0:?} has no records")]
    MissingBaseline(String),
    #[error("records do not pair up: {0}")]
    Pairing(String),
}

/// Percentage by which `z_a` undercuts `z_b`.
pub fn gain_pct(z_a: f64, z_b: f64) -> f64 {
    100.0 * (z_b - z_a) / z_b
}

/// Percentage by which `z` exceeds the best known cost `z_best`.
pub fn deviation_pct(z: f64, z_best: f64) -> f64 {
    if z == z_best {
        0.0
    } else {
        100.0 * (z - z_best) / z_best
    }
}

type Cell = (String, u64, String);

/// Summarizes successful records. Gains of every other variant are taken
/// against `baseline` (default: `base` if present, else the first variant
/// by name). Records of failed runs are skipped with a note.
pub fn summarize(records: &[RunRecord], baseline: Option<&str>) -> Result<Summary, SummaryError> {
    let mut notes = Vec::new();
    let failed = records
        .iter()
        .filter(|r| r.status != RunStatus::Ok || r.best_cost.is_none())
        .count();
    if failed > 0 {
        notes.push(format!("{failed} failed runs skipped"));
    }
    // (instance, limit bits, variant) -> (seed, cost)
    let mut cells: BTreeMap<Cell, Vec<(u64, f64)>> = BTreeMap::new();
    for r in records {
        if let (RunStatus::Ok, Some(cost)) = (r.status, r.best_cost) {
            cells
                .entry((r.instance_id.clone(), r.time_limit_s.to_bits(), r.variant.clone()))
                .or_default()
                .push((r.seed, cost));
        }
    }
    if cells.is_empty() {
        return Err(SummaryError::Empty);
    }

    let mut best_known: BTreeMap<(String, u64), f64> = BTreeMap::new();
    for ((inst, limit, _), runs) in &cells {
        let b = best_known.entry((inst.clone(), *limit)).or_insert(f64::INFINITY);
        for &(_, c) in runs {
            *b = b.min(c);
        }
    }

    let mut out_cells = Vec::new();
    for ((inst, limit, variant), runs) in &cells {
        let z_best = best_known[&(inst.clone(), *limit)];
        let n = runs.len() as f64;
        out_cells.push(CellSummary {
            instance_id: inst.clone(),
            time_limit_s: f64::from_bits(*limit),
            variant: variant.clone(),
            runs: runs.len(),
            best_cost: runs.iter().map(|r| r.1).fold(f64::INFINITY, f64::min),
            average_cost: runs.iter().map(|r| r.1).sum::<f64>() / n,
            average_deviation_pct: runs.iter().map(|r| deviation_pct(r.1, z_best)).sum::<f64>() / n,
        });
    }

    let variants: BTreeSet<&str> = cells.keys().map(|k| k.2.as_str()).collect();
    let mut gains = Vec::new();
    if variants.len() < 2 {
        notes.push("single variant: gains omitted".to_string());
        return Ok(Summary {
            cells: out_cells,
            gains,
            notes,
        });
    }
    let base = match baseline {
        Some(b) if variants.contains(b) => b,
        Some(b) => return Err(SummaryError::MissingBaseline(b.to_string())),
        None if variants.contains("base") => "base",
        None => variants.iter().next().copied().expect("at least two variants"),
    };

    let find = |inst: &str, limit: u64, variant: &str| cells.get(&(inst.to_string(), limit, variant.to_string()));
    let limits: BTreeSet<u64> = cells.keys().map(|k| k.1).collect();
    for &variant in variants.iter().filter(|v| **v != base) {
        for &limit in &limits {
            let instances: BTreeSet<&str> = cells
                .keys()
                .filter(|k| k.1 == limit && (k.2 == variant || k.2 == base))
                .map(|k| k.0.as_str())
                .collect();
            let mut best_gains = Vec::new();
            let mut avg_gains = Vec::new();
            for inst in instances {
                let (a, b) = match (find(inst, limit, variant), find(inst, limit, base)) {
                    (Some(a), Some(b)) => (a, b),
                    _ => {
                        return Err(SummaryError::Pairing(format!(
                            "{inst} at {} s has runs of only one of {variant} and {base}",
                            f64::from_bits(limit)
                        )))
                    }
                };
                let seeds = |runs: &[(u64, f64)]| runs.iter().map(|r| r.0).collect::<BTreeSet<_>>();
                if seeds(a) != seeds(b) {
                    return Err(SummaryError::Pairing(format!(
                        "{inst} at {} s: {variant} and {base} use different seeds",
                        f64::from_bits(limit)
                    )));
                }
                let best = |runs: &[(u64, f64)]| runs.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
                let mean = |runs: &[(u64, f64)]| runs.iter().map(|r| r.1).sum::<f64>() / runs.len() as f64;
                best_gains.push(gain_pct(best(a), best(b)));
                avg_gains.push(gain_pct(mean(a), mean(b)));
            }
            if best_gains.is_empty() {
                continue;
            }
            let n = best_gains.len() as f64;
            gains.push(GainSummary {
                variant: variant.to_string(),
                baseline: base.to_string(),
                time_limit_s: f64::from_bits(limit),
                instances: best_gains.len(),
                best_gain_pct: best_gains.iter().sum::<f64>() / n,
                average_gain_pct: avg_gains.iter().sum::<f64>() / n,
            });
        }
    }
    Ok(Summary {
        cells: out_cells,
        gains,
        notes,
    })
}
