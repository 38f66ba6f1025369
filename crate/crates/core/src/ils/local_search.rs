use rand::Rng;

use crate::error::SearchError;
use crate::network::{PipeId, Solution};

use super::{Costed, Evaluator, SearchRng};

/// Greedy-randomized descent that lowers one pipe at a time by `factor`
/// types.
///
/// Candidates are the longest pipes still untried in the current pass (the
/// top `alpha` slice of the length range). Pipes flagged in `protected` are
/// only picked when the candidate list holds nothing else. A pipe whose
/// reduction proves infeasible becomes tabu for the rest of the call. Passes
/// repeat while the previous one improved the solution.
pub fn local_search(
    eval: &Evaluator<'_>,
    start: &Solution,
    alpha: f64,
    factor: usize,
    protected: &[bool],
    rng: &mut SearchRng,
) -> Result<Costed, SearchError> {
    let net = eval.network();
    let length = |p: PipeId| net.pipe(p).length;
    let mut by_length: Vec<PipeId> = net.pipe_ids().collect();
    by_length.sort_by(|&a, &b| length(b).total_cmp(&length(a)).then(a.cmp(&b)));

    let mut sol = start.clone();
    let mut tabu = vec![false; net.pipe_count()];
    let mut improved = true;
    let mut unprotected = Vec::new();
    while improved {
        improved = false;
        let mut open: Vec<PipeId> = by_length.iter().copied().filter(|p| !tabu[p.0]).collect();
        while !open.is_empty() {
            let l_max = length(open[0]);
            let l_min = length(open[open.len() - 1]);
            let threshold = l_max - alpha * (l_max - l_min);
            let rcl_len = open.partition_point(|&p| length(p) >= threshold);

            unprotected.clear();
            unprotected.extend((0..rcl_len).filter(|&i| !protected[open[i].0]));
            let pick = if unprotected.is_empty() {
                rng.random_range(0..rcl_len)
            } else {
                unprotected[rng.random_range(0..unprotected.len())]
            };
            let pipe = open[pick];

            let current = sol.get(pipe);
            if current > factor {
                let mut reduced = sol.clone();
                reduced.set(pipe, current - factor);
                if eval.is_feasible(&reduced)? {
                    sol = reduced;
                    improved = true;
                } else {
                    tabu[pipe.0] = true;
                }
            }
            open.remove(pick);
        }
    }
    eval.costed(sol)
}
