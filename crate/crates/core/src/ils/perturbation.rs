use std::collections::BTreeMap;

use rand::seq::index;
use rand::Rng;

use crate::error::SearchError;
use crate::graph::{bfs_levels, LevelMap};
use crate::network::{pipe_cost, PipeId, Solution};

use super::{Evaluator, SearchRng};

/// Smallest candidate list of the concentrated perturbation.
const MIN_SEED_CANDIDATES: usize = 5;

/// Number of pipes a perturbation starts out changing: `floor(alpha |E|)`,
/// but at least one on networks that have pipes.
pub fn perturbation_size(alpha: f64, pipes: usize) -> usize {
    if pipes == 0 {
        return 0;
    }
    ((alpha * pipes as f64).floor() as usize).max(1)
}

/// Copy of `sol` with every pipe of `chosen` one type larger, clamped at the
/// largest type.
fn bumped(sol: &Solution, chosen: &[PipeId], largest: usize) -> Solution {
    let mut out = sol.clone();
    for &p in chosen {
        out.set(p, (sol.get(p) + 1).min(largest));
    }
    out
}

/// Shared back-off loop of both perturbations. `draw` picks the subset to
/// enlarge from the open pipes; after each infeasible attempt one random
/// member of that subset is closed. When every pipe is closed the subset
/// size halves.
fn perturb_with(
    eval: &Evaluator<'_>,
    sol: &Solution,
    alpha: f64,
    all: &[PipeId],
    rng: &mut SearchRng,
    mut draw: impl FnMut(&[PipeId], usize, &mut SearchRng) -> Vec<PipeId>,
) -> Result<Solution, SearchError> {
    let largest = eval.catalog().max_index();
    let mut m = perturbation_size(alpha, eval.network().pipe_count());
    while m > 0 {
        let mut open = all.to_vec();
        while !open.is_empty() {
            let chosen = draw(&open, m, rng);
            let candidate = bumped(sol, &chosen, largest);
            if candidate == *sol {
                return Ok(candidate);
            }
            if eval.is_feasible(&candidate)? {
                return Ok(candidate);
            }
            let drop = chosen[rng.random_range(0..chosen.len())];
            let at = open.iter().position(|&p| p == drop).expect("chosen pipe is open");
            open.remove(at);
        }
        m /= 2;
    }
    Ok(sol.clone())
}

/// Enlarges a uniformly drawn subset of pipes by one type at once, backing
/// off to smaller subsets until a feasible perturbation is found. Returns
/// `sol` unchanged if none is.
pub fn dispersed_perturbation(
    eval: &Evaluator<'_>,
    sol: &Solution,
    alpha: f64,
    rng: &mut SearchRng,
) -> Result<Solution, SearchError> {
    let all: Vec<PipeId> = eval.network().pipe_ids().collect();
    perturb_with(eval, sol, alpha, &all, rng, |open, m, rng| {
        index::sample(rng, open.len(), m.min(open.len()))
            .into_iter()
            .map(|i| open[i])
            .collect()
    })
}

/// Draws `min(m, |open|)` pipes, filling the lowest distance levels first.
/// Within a level every subset of the needed size is equally likely.
///
/// Panics if `open` is empty.
pub fn selection_criterion(open: &[PipeId], levels: &LevelMap, m: usize, rng: &mut SearchRng) -> Vec<PipeId> {
    assert!(!open.is_empty(), "selection needs at least one pipe");
    let mut by_level: BTreeMap<usize, Vec<PipeId>> = BTreeMap::new();
    for &p in open {
        by_level.entry(levels.level(p)).or_default().push(p);
    }
    let mut remaining = m.min(open.len());
    let mut out = Vec::with_capacity(remaining);
    for (_, mut class) in by_level {
        class.sort_unstable();
        let mut unseen = class.len();
        for p in class {
            if remaining == 0 {
                return out;
            }
            if rng.random::<f64>() < remaining as f64 / unseen as f64 {
                out.push(p);
                remaining -= 1;
            }
            unseen -= 1;
        }
    }
    out
}

/// Enlarges pipes around one of the most expensive pipes. The seed pipe is
/// drawn from the costliest `alpha` slice (at least five pipes); the pipes
/// to enlarge are chosen level by level outward from its endpoints.
pub fn concentrated_perturbation(
    eval: &Evaluator<'_>,
    sol: &Solution,
    alpha: f64,
    rng: &mut SearchRng,
) -> Result<Solution, SearchError> {
    let net = eval.network();
    let cat = eval.catalog();
    if net.pipe_count() == 0 {
        return Ok(sol.clone());
    }
    let psi: Vec<f64> = net.pipe_ids().map(|p| pipe_cost(sol, net, cat, p)).collect();
    let psi_max = psi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let psi_min = psi.iter().copied().fold(f64::INFINITY, f64::min);
    let threshold = psi_max - alpha * (psi_max - psi_min);

    let mut ranked: Vec<PipeId> = net.pipe_ids().collect();
    ranked.sort_by(|a, b| psi[b.0].total_cmp(&psi[a.0]).then(a.cmp(b)));
    let in_interval = ranked.partition_point(|p| psi[p.0] >= threshold);
    let mut rcl = ranked[..in_interval.max(MIN_SEED_CANDIDATES.min(ranked.len()))].to_vec();
    rcl.sort_unstable();

    let seed = rcl[rng.random_range(0..rcl.len())];
    let pipe = net.pipe(seed);
    let levels = bfs_levels(net, &[pipe.from, pipe.to]);
    let others: Vec<PipeId> = net.pipe_ids().filter(|&p| p != seed).collect();
    perturb_with(eval, sol, alpha, &others, rng, |open, m, rng| {
        selection_criterion(open, &levels, m, rng)
    })
}
