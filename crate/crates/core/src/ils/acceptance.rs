use rand::Rng;

use super::{Costed, SearchRng};

/// Fixed-size memory of solutions used by the acceptance step.
#[derive(Debug, Clone)]
pub struct Pool {
    slots: Vec<(Costed, u64)>,
    clock: u64,
}

impl Pool {
    /// `size` copies of `init`.
    pub fn new(size: usize, init: Costed) -> Self {
        Self {
            slots: (0..size).map(|_| (init.clone(), 0)).collect(),
            clock: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn get(&self, i: usize) -> &Costed {
        &self.slots[i].0
    }

    pub fn iter(&self) -> impl Iterator<Item = &Costed> {
        self.slots.iter().map(|s| &s.0)
    }

    /// Slot of the most expensive solution; the oldest one among equals.
    pub fn worst(&self) -> Option<usize> {
        (0..self.slots.len()).reduce(|w, i| {
            let (a, b) = (&self.slots[w], &self.slots[i]);
            if b.0.cost > a.0.cost || (b.0.cost == a.0.cost && b.1 < a.1) {
                i
            } else {
                w
            }
        })
    }

    pub fn replace_worst(&mut self, sol: Costed) {
        if let Some(w) = self.worst() {
            self.clock += 1;
            self.slots[w] = (sol, self.clock);
        }
    }
}

/// Decides where the search continues from.
///
/// A candidate cheaper than the incumbent is returned; it becomes the new
/// best if it beats it, otherwise it takes the worst pool slot. Any other
/// candidate is dropped and a uniformly random member of the pool or the
/// best solution is returned instead.
pub fn acceptance_criterion(
    best: &mut Costed,
    cand: Costed,
    cur: &Costed,
    pool: &mut Pool,
    rng: &mut SearchRng,
) -> Costed {
    if cand.cost < cur.cost {
        if cand.cost < best.cost {
            *best = cand.clone();
        } else {
            pool.replace_worst(cand.clone());
        }
        cand
    } else {
        let i = rng.random_range(0..=pool.len());
        if i == pool.len() {
            best.clone()
        } else {
            pool.get(i).clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Solution;
    use rand::SeedableRng;

    fn c(t: usize, cost: f64) -> Costed {
        Costed {
            solution: Solution::uniform(1, t),
            cost,
        }
    }

    #[test]
    fn improving_best_leaves_pool_alone() {
        let mut rng = SearchRng::seed_from_u64(0);
        let mut pool = Pool::new(3, c(9, 100.0));
        let mut best = c(5, 50.0);
        let out = acceptance_criterion(&mut best, c(1, 10.0), &c(7, 70.0), &mut pool, &mut rng);
        assert_eq!(out, c(1, 10.0));
        assert_eq!(best, c(1, 10.0));
        assert!(pool.iter().all(|s| *s == c(9, 100.0)));
    }

    #[test]
    fn improving_current_only_replaces_worst_slot() {
        let mut rng = SearchRng::seed_from_u64(0);
        let mut pool = Pool::new(3, c(9, 100.0));
        pool.replace_worst(c(8, 80.0));
        let mut best = c(5, 50.0);
        let out = acceptance_criterion(&mut best, c(6, 60.0), &c(7, 70.0), &mut pool, &mut rng);
        assert_eq!(out, c(6, 60.0));
        assert_eq!(best, c(5, 50.0));
        let costs: Vec<f64> = pool.iter().map(|s| s.cost).collect();
        // slot 0 was refreshed first, so slot 1 is the oldest of the two 100s
        assert_eq!(costs, vec![80.0, 60.0, 100.0]);
    }

    #[test]
    fn worst_prefers_oldest_among_ties() {
        let mut pool = Pool::new(2, c(9, 100.0));
        pool.replace_worst(c(8, 100.0));
        assert_eq!(pool.worst(), Some(1));
        assert_eq!(Pool::new(0, c(1, 1.0)).worst(), None);
    }

    #[test]
    fn rejection_picks_from_pool_or_best() {
        let mut rng = SearchRng::seed_from_u64(3);
        let mut pool = Pool::new(2, c(9, 100.0));
        let mut best = c(5, 50.0);
        for _ in 0..100 {
            let out = acceptance_criterion(&mut best, c(7, 70.0), &c(7, 70.0), &mut pool, &mut rng);
            assert!(out == c(9, 100.0) || out == c(5, 50.0));
        }
        let mut empty = Pool::new(0, c(9, 100.0));
        let out = acceptance_criterion(&mut best, c(7, 80.0), &c(7, 70.0), &mut empty, &mut rng);
        assert_eq!(out, best);
    }
}
