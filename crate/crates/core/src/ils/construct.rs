use crate::error::SearchError;
use crate::network::Solution;

use super::Evaluator;

/// Cheapest feasible uniform assignment, found by lowering the common type
/// from the largest one until the network stops being feasible.
pub fn initial_solution(eval: &Evaluator<'_>) -> Result<Solution, SearchError> {
    let pipes = eval.network().pipe_count();
    let largest = eval.catalog().max_index();
    let mut kept = None;
    for t in (1..=largest).rev() {
        let candidate = Solution::uniform(pipes, t);
        if eval.is_feasible(&candidate)? {
            kept = Some(candidate);
        } else if t != largest {
            break;
        } else {
            return Err(SearchError::NoFeasibleUniform);
        }
    }
    Ok(kept.expect("largest uniform type was feasible"))
}
