//! Protection strategies. A strategy sees the current [`FireState`] and the budget
//! `f(n)` for the coming turn and names the vertices to protect.

mod shield;

use std::cmp::Reverse;

use thiserror::Error;

use crate::cayley::{Ball, VertexId};
use crate::fire::FireState;
use crate::group::GroupElement;

pub use shield::{in_shield, shield_census, shield_layer, LamplighterShield, ShieldCensus};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrategyError {
    #[error("strategy {strategy} does not support group {group}")]
    UnsupportedGroup { strategy: &'static str, group: String },
    #[error("{0}")]
    Precondition(String),
    #[error("fixed schedule protects {element} at turns {first} and {second}")]
    OverlappingSchedule {
        element: String,
        first: usize,
        second: usize,
    },
    #[error("shield vertex {element} is already burning at turn {turn}")]
    ShieldBreached { element: String, turn: u64 },
}

/// Vertices to protect this turn, plus how many intended vertices were dropped.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StrategyOutput {
    pub protect: Vec<VertexId>,
    pub shortfall: u64,
}

impl StrategyOutput {
    pub fn new(protect: Vec<VertexId>) -> Self {
        StrategyOutput { protect, shortfall: 0 }
    }
}

pub trait Strategy: Send + Sync {
    fn name(&self) -> String;

    /// Choose `W_n` for turn `n = state.next_turn()`, with `|W_n| ≤ budget`.
    fn choose(&self, state: &FireState<'_>, budget: u64) -> Result<StrategyOutput, StrategyError>;
}

/// Never protects anything.
#[derive(Clone, Copy, Debug, Default)]
pub struct NullStrategy;

impl Strategy for NullStrategy {
    fn name(&self) -> String {
        "null".into()
    }

    fn choose(&self, _: &FireState<'_>, _: u64) -> Result<StrategyOutput, StrategyError> {
        Ok(StrategyOutput::default())
    }
}

/// On a free group with `F_0 = {e}`, protects `a₁` at turn 1 and nothing after,
/// cutting off the whole branch of words starting with `a₁`.
#[derive(Clone, Copy, Debug, Default)]
pub struct BranchCut;

impl Strategy for BranchCut {
    fn name(&self) -> String {
        "branch-cut".into()
    }

    fn choose(&self, state: &FireState<'_>, budget: u64) -> Result<StrategyOutput, StrategyError> {
        let ball = state.ball();
        if !ball.group().is_free() {
            return Err(StrategyError::UnsupportedGroup {
                strategy: "branch-cut",
                group: ball.group().name().to_string(),
            });
        }
        if state.turn() > 0 {
            return Ok(StrategyOutput::default());
        }
        let e = ball.identity();
        if state.burning().len() != 1 || !state.is_burning(e) {
            return Err(StrategyError::Precondition(
                "branch-cut requires the initial fire to be the identity alone".into(),
            ));
        }
        let first = ball
            .neighbor(e, 0)
            .ok_or_else(|| StrategyError::Precondition("ball too small".into()))?;
        Ok(if budget >= 1 {
            StrategyOutput::new(vec![first])
        } else {
            StrategyOutput { protect: Vec::new(), shortfall: 1 }
        })
    }
}

/// Protects threatened vertices farthest from the identity first; ties are broken
/// by a seeded hash of the canonical encoding, then by id.
#[derive(Clone, Copy, Debug)]
pub struct GreedyBoundary {
    pub seed: u64,
}

fn mix(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for &b in bytes {
        h = (h ^ b as u64).wrapping_mul(0x0100_0000_01b3);
        h ^= h >> 29;
    }
    h ^= h >> 33;
    h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
    h ^ (h >> 33)
}

impl Strategy for GreedyBoundary {
    fn name(&self) -> String {
        format!("greedy:seed={}", self.seed)
    }

    fn choose(&self, state: &FireState<'_>, budget: u64) -> Result<StrategyOutput, StrategyError> {
        if budget == 0 {
            return Ok(StrategyOutput::default());
        }
        let ball = state.ball();
        let mut candidates = state.threatened();
        candidates.sort_by_cached_key(|&v| {
            (Reverse(ball.word_length(v)), mix(self.seed, ball.encoding(v)), v)
        });
        candidates.truncate(budget.min(usize::MAX as u64) as usize);
        candidates.sort_unstable();
        Ok(StrategyOutput::new(candidates))
    }
}

/// Protects a predetermined list of sets; `schedule[0]` is played at turn 1.
/// Vertices already burning are dropped and counted as shortfall, as are any past
/// the budget. Elements outside the ball are ignored.
#[derive(Clone, Debug)]
pub struct FixedSet {
    schedule: Vec<Vec<GroupElement>>,
}

impl FixedSet {
    pub fn new(schedule: Vec<Vec<GroupElement>>) -> Result<Self, StrategyError> {
        let mut first_seen = std::collections::HashMap::new();
        for (turn, set) in schedule.iter().enumerate() {
            for e in set {
                if let Some(&prev) = first_seen.get(e) {
                    if prev != turn {
                        return Err(StrategyError::OverlappingSchedule {
                            element: e.to_string(),
                            first: prev + 1,
                            second: turn + 1,
                        });
                    }
                }
                first_seen.insert(e.clone(), turn);
            }
        }
        Ok(FixedSet { schedule })
    }

    pub fn schedule(&self) -> &[Vec<GroupElement>] {
        &self.schedule
    }

    /// Total number of distinct scheduled elements.
    pub fn total(&self) -> usize {
        self.schedule.iter().map(Vec::len).sum()
    }
}

impl Strategy for FixedSet {
    fn name(&self) -> String {
        format!("fixed({} turns)", self.schedule.len())
    }

    fn choose(&self, state: &FireState<'_>, budget: u64) -> Result<StrategyOutput, StrategyError> {
        let Some(set) = self.schedule.get(state.turn() as usize) else {
            return Ok(StrategyOutput::default());
        };
        let ball: &Ball = state.ball();
        let mut protect: Vec<VertexId> = set
            .iter()
            .filter_map(|e| ball.id_of(e))
            .filter(|&v| !state.is_protected(v))
            .collect();
        protect.sort_unstable();
        protect.dedup();
        let before = protect.len();
        protect.retain(|&v| !state.is_burning(v));
        let mut shortfall = (before - protect.len()) as u64;
        if protect.len() as u64 > budget {
            shortfall += protect.len() as u64 - budget;
            protect.truncate(budget as usize);
        }
        Ok(StrategyOutput { protect, shortfall })
    }
}
