#![allow(dead_code)]

use firelab::cayley::VertexId;
use firelab::fire::FireState;
use firelab::strategies::{Strategy, StrategyError, StrategyOutput};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Protects a random legal set each turn: a mix of threatened vertices and
/// arbitrary vertices of the ball, never more than the budget.
pub struct RandomLegal {
    pub seed: u64,
}

impl Strategy for RandomLegal {
    fn name(&self) -> String {
        format!("random:{}", self.seed)
    }

    fn choose(&self, state: &FireState<'_>, budget: u64) -> Result<StrategyOutput, StrategyError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ state.next_turn().wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let ball = state.ball();
        let k = rng.gen_range(0..=budget.min(8)) as usize;
        let mut candidates = state.threatened();
        for _ in 0..k {
            candidates.push(VertexId(rng.gen_range(0..ball.len() as u32)));
        }
        candidates.shuffle(&mut rng);
        let mut protect = Vec::with_capacity(k);
        for v in candidates {
            if protect.len() == k {
                break;
            }
            if !state.is_burning(v) && !state.is_protected(v) && !protect.contains(&v) {
                protect.push(v);
            }
        }
        protect.sort_unstable();
        Ok(StrategyOutput::new(protect))
    }
}

/// `|a − p/q|` compared across two fractions without rounding:
/// is `|a₁/b₁ − p/q| < |a₂/b₂ − p/q|`?
pub fn strictly_closer(a1: u64, b1: u64, a2: u64, b2: u64, p: u64, q: u64) -> bool {
    let d1 = (a1 as i128 * q as i128 - p as i128 * b1 as i128).unsigned_abs();
    let d2 = (a2 as i128 * q as i128 - p as i128 * b2 as i128).unsigned_abs();
    // |d1| / (q b1) < |d2| / (q b2)
    d1 * (b2 as u128) < d2 * (b1 as u128)
}
