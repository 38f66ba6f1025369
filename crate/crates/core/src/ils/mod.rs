//! Simulation-based iterated local search for pipe sizing.
//!
//! The search starts from the cheapest feasible uniform assignment and then
//! alternates a greedy-randomized diameter-reduction local search with
//! diameter-increasing perturbations, keeping a small pool of solutions for
//! the acceptance decision. Every candidate is checked with the hydraulic
//! [`Validator`].

mod acceptance;
mod brute_force;
mod construct;
mod local_search;
mod perturbation;

use std::cell::Cell;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::SearchError;
use crate::graph::{path_list, shortest_path_tree};
use crate::hydraulics::{Simulator, SolverConfig, Validator};
use crate::network::{solution_cost, Network, PipeTypeCatalog, Solution};

pub use acceptance::{acceptance_criterion, Pool};
pub use brute_force::brute_force_optimum;
pub use construct::initial_solution;
pub use local_search::local_search;
pub use perturbation::{concentrated_perturbation, dispersed_perturbation, perturbation_size, selection_criterion};

/// The generator behind every stochastic decision of a run.
pub type SearchRng = ChaCha8Rng;

/// Which of the search's enhancements are switched on. `Full` uses all of
/// them, `Base` none, and the `*Only` variants exactly one on top of `Base`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Full,
    Base,
    ReduOnly,
    PoolOnly,
    PertOnly,
    SptOnly,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Full,
        Variant::Base,
        Variant::ReduOnly,
        Variant::PoolOnly,
        Variant::PertOnly,
        Variant::SptOnly,
    ];

    /// Reduction factor above 1 in the local search.
    pub fn aggressive_reduction(self) -> bool {
        matches!(self, Variant::Full | Variant::ReduOnly)
    }

    pub fn solution_pool(self) -> bool {
        matches!(self, Variant::Full | Variant::PoolOnly)
    }

    /// Concentrated perturbation alongside the dispersed one.
    pub fn concentrated_perturbation(self) -> bool {
        matches!(self, Variant::Full | Variant::PertOnly)
    }

    /// Protection of shortest-path pipes in the local search.
    pub fn path_protection(self) -> bool {
        matches!(self, Variant::Full | Variant::SptOnly)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::Base => "base",
            Variant::ReduOnly => "redu-only",
            Variant::PoolOnly => "pool-only",
            Variant::PertOnly => "pert-only",
            Variant::SptOnly => "spt-only",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown variant {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchParams {
    /// Greediness of the candidate lists and share of pipes perturbed.
    pub alpha: f64,
    /// Initial type reduction factor.
    pub factor: usize,
    /// Pool size.
    pub pool_size: usize,
    pub time_limit: Duration,
    /// Optional cap on main-loop iterations, for reproducible budgets.
    pub max_iterations: Option<u64>,
    /// Stop as soon as the best cost is at or below this value.
    pub target_cost: Option<f64>,
    pub seed: u64,
    pub variant: Variant,
    /// Probability of the dispersed perturbation; `None` means `1 - alpha`.
    pub dispersed_probability: Option<f64>,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            factor: 4,
            pool_size: 3,
            time_limit: Duration::from_secs(60),
            max_iterations: None,
            target_cost: None,
            seed: 0,
            variant: Variant::Full,
            dispersed_probability: None,
        }
    }
}

/// Pressure and velocity bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constraints {
    /// Minimum pressure head at junctions, m.
    pub h_min: f64,
    /// Maximum velocity in pipes, m/s.
    pub v_max: f64,
}

impl Default for Constraints {
    fn default() -> Self {
        Self {
            h_min: 20.0,
            v_max: 2.0,
        }
    }
}

/// A solution together with its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Costed {
    pub solution: Solution,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: u64,
    pub elapsed_s: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SearchStats {
    pub iterations: u64,
    pub simulator_calls: u64,
    pub tested_solutions: u64,
    pub feasible_tested: u64,
    pub initial_cost: f64,
    /// Best cost after initialization and after every improvement.
    pub best_cost_trace: Vec<TracePoint>,
    /// Reduction factor handed to the first local searches.
    pub factor_trace: Vec<usize>,
    pub time_to_best_s: f64,
}

impl SearchStats {
    pub const FACTOR_TRACE_LEN: usize = 64;

    pub fn feasible_fraction(&self) -> f64 {
        if self.tested_solutions == 0 {
            0.0
        } else {
            self.feasible_tested as f64 / self.tested_solutions as f64
        }
    }
}

/// Feasibility oracle of a run: a validator plus counters of tested and
/// feasible candidates.
#[derive(Debug)]
pub struct Evaluator<'a> {
    validator: Validator<'a>,
    tested: Cell<u64>,
    feasible: Cell<u64>,
}

impl<'a> Evaluator<'a> {
    pub fn new(validator: Validator<'a>) -> Self {
        Self {
            validator,
            tested: Cell::new(0),
            feasible: Cell::new(0),
        }
    }

    pub fn build(
        net: &'a Network,
        cat: &'a PipeTypeCatalog,
        constraints: Constraints,
        solver: SolverConfig,
    ) -> Result<Self, SearchError> {
        let sim = Simulator::new(net, cat, solver)?;
        Ok(Self::new(Validator::new(sim, constraints.h_min, constraints.v_max)))
    }

    pub fn network(&self) -> &'a Network {
        self.validator.simulator().network()
    }

    pub fn catalog(&self) -> &'a PipeTypeCatalog {
        self.validator.simulator().catalog()
    }

    pub fn validator(&self) -> &Validator<'a> {
        &self.validator
    }

    pub fn is_feasible(&self, sol: &Solution) -> Result<bool, SearchError> {
        self.tested.set(self.tested.get() + 1);
        let ok = self.validator.validate(sol)?.is_feasible();
        if ok {
            self.feasible.set(self.feasible.get() + 1);
        }
        Ok(ok)
    }

    pub fn cost(&self, sol: &Solution) -> Result<f64, SearchError> {
        Ok(solution_cost(sol, self.network(), self.catalog())?)
    }

    pub fn costed(&self, solution: Solution) -> Result<Costed, SearchError> {
        let cost = self.cost(&solution)?;
        Ok(Costed { solution, cost })
    }

    pub fn tested(&self) -> u64 {
        self.tested.get()
    }

    pub fn feasible(&self) -> u64 {
        self.feasible.get()
    }

    pub fn simulator_calls(&self) -> u64 {
        self.validator.simulator_calls()
    }
}

/// Runs the iterated local search until the time limit (or the optional
/// iteration cap or target cost) is reached and returns the best solution.
pub fn run(eval: &Evaluator<'_>, params: &SearchParams) -> Result<(Costed, SearchStats), SearchError> {
    let start = Instant::now();
    let net = eval.network();
    let variant = params.variant;
    let mut rng = SearchRng::seed_from_u64(params.seed);
    let mut stats = SearchStats::default();

    let init = eval.costed(initial_solution(eval)?)?;
    stats.initial_cost = init.cost;
    let pool_size = if variant.solution_pool() { params.pool_size } else { 0 };
    let mut pool = Pool::new(pool_size, init.clone());
    let mut best = init.clone();
    let mut cur = init;

    let protected = if variant.path_protection() {
        let spt = shortest_path_tree(net)?;
        path_list(net, &spt, params.alpha)?
    } else {
        Default::default()
    };
    let mut path_mask = vec![false; net.pipe_count()];
    for p in &protected {
        path_mask[p.0] = true;
    }

    let mut factor = if variant.aggressive_reduction() {
        params.factor.max(1)
    } else {
        1
    };
    let dispersed_probability = params.dispersed_probability.unwrap_or(1.0 - params.alpha);

    stats.best_cost_trace.push(TracePoint {
        iteration: 0,
        elapsed_s: start.elapsed().as_secs_f64(),
        cost: best.cost,
    });
    stats.time_to_best_s = start.elapsed().as_secs_f64();

    loop {
        if start.elapsed() >= params.time_limit
            || params.max_iterations.is_some_and(|m| stats.iterations >= m)
            || params.target_cost.is_some_and(|t| best.cost <= t)
        {
            break;
        }
        stats.iterations += 1;
        if stats.factor_trace.len() < SearchStats::FACTOR_TRACE_LEN {
            stats.factor_trace.push(factor);
        }
        log::trace!("iteration {} factor {} current {}", stats.iterations, factor, cur.cost);

        let cand = local_search(eval, &cur.solution, params.alpha, factor, &path_mask, &mut rng)?;
        if factor > 1 {
            factor /= 2;
        }
        let previous_best = best.cost;
        let accepted = acceptance_criterion(&mut best, cand, &cur, &mut pool, &mut rng);
        if best.cost < previous_best {
            let elapsed = start.elapsed().as_secs_f64();
            stats.time_to_best_s = elapsed;
            stats.best_cost_trace.push(TracePoint {
                iteration: stats.iterations,
                elapsed_s: elapsed,
                cost: best.cost,
            });
            log::debug!("iteration {}: new best {}", stats.iterations, best.cost);
        }

        let use_dispersed = !variant.concentrated_perturbation() || rng.random::<f64>() <= dispersed_probability;
        let perturbed = if use_dispersed {
            dispersed_perturbation(eval, &accepted.solution, params.alpha, &mut rng)?
        } else {
            concentrated_perturbation(eval, &accepted.solution, params.alpha, &mut rng)?
        };
        cur = if perturbed == accepted.solution {
            accepted
        } else {
            eval.costed(perturbed)?
        };
    }

    stats.simulator_calls = eval.simulator_calls();
    stats.tested_solutions = eval.tested();
    stats.feasible_tested = eval.feasible();
    Ok((best, stats))
}

/// Builds an evaluator for `net` and runs the search.
pub fn optimize(
    net: &Network,
    cat: &PipeTypeCatalog,
    constraints: Constraints,
    solver: SolverConfig,
    params: &SearchParams,
) -> Result<(Costed, SearchStats), SearchError> {
    let eval = Evaluator::build(net, cat, constraints, solver)?;
    run(&eval, params)
}
