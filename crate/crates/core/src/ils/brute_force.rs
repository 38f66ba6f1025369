use crate::error::SearchError;
use crate::network::Solution;

use super::{Costed, Evaluator};

/// Cheapest feasible assignment by exhaustive enumeration. Configurations
/// are visited in increasing cost order, so the first feasible one is
/// optimal. Refuses search spaces larger than `limit`.
pub fn brute_force_optimum(eval: &Evaluator<'_>, limit: u64) -> Result<Costed, SearchError> {
    let pipes = eval.network().pipe_count();
    let types = eval.catalog().max_index();
    let size = (types as f64).powi(pipes as i32);
    if size > limit as f64 {
        return Err(SearchError::TooLarge { size, limit });
    }
    let size = size as usize;
    let decode = |mut code: usize| {
        let mut t = vec![0; pipes];
        for slot in t.iter_mut() {
            *slot = code % types + 1;
            code /= types;
        }
        Solution::new(t)
    };
    let mut ranked = Vec::with_capacity(size);
    for code in 0..size {
        ranked.push((eval.cost(&decode(code))?, code));
    }
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    for (cost, code) in ranked {
        let sol = decode(code);
        if eval.is_feasible(&sol)? {
            return Ok(Costed { solution: sol, cost });
        }
    }
    Err(SearchError::Infeasible)
}
