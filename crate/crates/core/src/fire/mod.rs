//! The protect-then-spread fire game on a truncated Cayley ball.
//!
//! At turn `n` the strategy protects a set `W_n` with `|W_n| ≤ f(n)`, then the fire
//! spreads to every unprotected neighbor of `F_{n-1}`. All state lives on ball ids,
//! and a run is refused outright if the fire could reach the edge of the ball.

mod audit;
mod budget;
mod state;

use thiserror::Error;

pub use audit::{
    check_boundary_relation, spread_increment_audit, BoundaryReport, BoundaryViolation, SpreadAudit,
    SpreadRow,
};
pub use budget::{BudgetClass, BudgetError, BudgetFn};
pub use state::{run_simulation, FireState, Trajectory, TurnLog, UNSET};

use crate::strategies::StrategyError;

#[derive(Debug, Error)]
pub enum FireError {
    #[error("initial fire is empty")]
    EmptyInitialFire,
    #[error("element {0} lies outside the ball")]
    OutsideBall(String),
    #[error("turn {turn}: protecting {requested} vertices exceeds the budget f({turn}) = {allowed}")]
    BudgetExceeded {
        turn: u64,
        requested: u64,
        allowed: u64,
    },
    #[error("turn {turn}: vertex {vertex} is already burning")]
    ProtectBurning { turn: u64, vertex: String },
    #[error("turn {turn}: vertex {vertex} is already protected")]
    AlreadyProtected { turn: u64, vertex: String },
    #[error(
        "turn {turn}: fire from radius {r0} could reach the ball edge \
         (need r0 + turn + 1 <= {radius})"
    )]
    ExactnessGuard { r0: u32, turn: u64, radius: u32 },
    #[error("radius {n} is out of range (at most {max})")]
    RadiusOutOfRange { n: u32, max: u32 },
    #[error(transparent)]
    Budget(#[from] BudgetError),
    #[error("turn {turn}: strategy failed: {source}")]
    Strategy { turn: u64, source: StrategyError },
}
