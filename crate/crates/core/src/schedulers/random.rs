use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{RoundPlan, ScheduleError, Scheduler};
use crate::engine::EngineState;
use crate::model::{Network, NodeId};

/// Uniform permutation of the non-sink nodes.
pub fn random_fair_permutation<R: Rng + ?Sized>(net: &Network, rng: &mut R) -> Vec<NodeId> {
    let mut order: Vec<NodeId> = net.non_sink().collect();
    order.shuffle(rng);
    order
}

/// Independent uniform permutation every round, reproducible from the seed.
#[derive(Debug, Clone)]
pub struct RandomScheduler {
    rng: ChaCha8Rng,
}

impl RandomScheduler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Scheduler for RandomScheduler {
    fn name(&self) -> &'static str {
        "random"
    }

    fn plan(&mut self, state: &EngineState) -> Result<RoundPlan, ScheduleError> {
        Ok(RoundPlan::new(random_fair_permutation(
            state.network(),
            &mut self.rng,
        )))
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;
    use crate::model::fixtures;

    #[test]
    fn two_nodes_have_one_order() {
        let net = fixtures::star(2);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            assert_eq!(random_fair_permutation(&net, &mut rng), vec![NodeId(1)]);
        }
    }

    #[test]
    fn same_seed_same_orders() {
        let net = fixtures::star(7);
        let mut a = ChaCha8Rng::seed_from_u64(42);
        let mut b = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            assert_eq!(
                random_fair_permutation(&net, &mut a),
                random_fair_permutation(&net, &mut b)
            );
        }
    }

    #[test]
    fn orders_are_uniform() {
        let net = fixtures::star(4);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let draws = 10_000;
        let mut counts: HashMap<Vec<NodeId>, usize> = HashMap::new();
        for _ in 0..draws {
            *counts
                .entry(random_fair_permutation(&net, &mut rng))
                .or_default() += 1;
        }
        assert_eq!(counts.len(), 6);
        let expected = draws as f64 / 6.0;
        let mut chi2 = 0.0;
        for &c in counts.values() {
            let f = c as f64 / draws as f64;
            assert!((f - 1.0 / 6.0).abs() <= 0.05 / 6.0, "frequency {f}");
            chi2 += (c as f64 - expected).powi(2) / expected;
        }
        // 1% critical value, 5 degrees of freedom
        assert!(chi2 < 15.086, "chi-square {chi2}");
    }
}
