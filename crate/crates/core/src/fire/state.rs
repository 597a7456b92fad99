use std::collections::HashSet;

use num_rational::Ratio;

use super::{BudgetFn, FireError};
use crate::cayley::{Ball, VertexId, VertexSet};
use crate::group::GroupElement;
use crate::strategies::Strategy;

/// Marker for "never" in per-vertex burn and protect turns.
pub const UNSET: u32 = u32::MAX;

/// Counts recorded after each turn.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TurnLog {
    pub turn: u64,
    pub burned_total: u64,
    pub burned_new: u64,
    pub protected_this_turn: u64,
    pub protected_total: u64,
    /// Vertices a strategy intended to protect but could not (already burning).
    pub shortfall: u64,
}

/// Live game state: `F_n`, the cumulative protected set `P`, and the turn log.
pub struct FireState<'b> {
    ball: &'b Ball,
    turn: u32,
    r0: u32,
    burning: VertexSet,
    protected: VertexSet,
    burn_turn: Vec<u32>,
    protect_turn: Vec<u32>,
    /// `F_n ∖ F_{n-1}` (all of `F_0` at turn 0).
    frontier: Vec<VertexId>,
    protections: Vec<Vec<VertexId>>,
    log: Vec<TurnLog>,
}

impl<'b> FireState<'b> {
    /// Turn-0 state with fire `F_0` and nothing protected.
    pub fn new(ball: &'b Ball, f0: &[VertexId]) -> Result<Self, FireError> {
        if f0.is_empty() {
            return Err(FireError::EmptyInitialFire);
        }
        let mut burning = ball.empty_set();
        let mut burn_turn = vec![UNSET; ball.len()];
        let mut frontier = Vec::with_capacity(f0.len());
        let mut r0 = 0;
        for &v in f0 {
            if v.index() >= ball.len() {
                return Err(FireError::OutsideBall(v.to_string()));
            }
            if burning.insert(v) {
                burn_turn[v.index()] = 0;
                frontier.push(v);
                r0 = r0.max(ball.word_length(v));
            }
        }
        frontier.sort_unstable();
        Ok(FireState {
            ball,
            turn: 0,
            r0,
            burning,
            protected: ball.empty_set(),
            burn_turn,
            protect_turn: vec![UNSET; ball.len()],
            frontier,
            protections: Vec::new(),
            log: Vec::new(),
        })
    }

    pub fn from_elements(ball: &'b Ball, f0: &[GroupElement]) -> Result<Self, FireError> {
        let ids = ball
            .resolve(f0)
            .map_err(|e| FireError::OutsideBall(e.to_string()))?;
        Self::new(ball, &ids)
    }

    pub fn ball(&self) -> &'b Ball {
        self.ball
    }

    /// Number of completed turns.
    pub fn turn(&self) -> u32 {
        self.turn
    }

    pub fn next_turn(&self) -> u64 {
        self.turn as u64 + 1
    }

    /// Largest word length in `F_0`.
    pub fn r0(&self) -> u32 {
        self.r0
    }

    pub fn burning(&self) -> &VertexSet {
        &self.burning
    }

    pub fn protected(&self) -> &VertexSet {
        &self.protected
    }

    pub fn is_burning(&self, v: VertexId) -> bool {
        self.burning.contains(v)
    }

    pub fn is_protected(&self, v: VertexId) -> bool {
        self.protected.contains(v)
    }

    pub fn burned_count(&self) -> u64 {
        self.log
            .last()
            .map_or(self.frontier.len() as u64, |l| l.burned_total)
    }

    /// Vertices that caught fire on the last turn.
    pub fn frontier(&self) -> &[VertexId] {
        &self.frontier
    }

    /// Vertices that burn next turn unless protected now: `∂F_n ∖ P`, sorted.
    pub fn threatened(&self) -> Vec<VertexId> {
        let mut seen = self.ball.empty_set();
        let mut out = Vec::new();
        for &v in &self.frontier {
            for n in self.ball.inner_neighbors(v) {
                if !self.burning.contains(n) && !self.protected.contains(n) && seen.insert(n) {
                    out.push(n);
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn log(&self) -> &[TurnLog] {
        &self.log
    }

    /// Play one turn: protect `w`, then spread.
    pub fn advance(&mut self, w: &[VertexId], budget: &BudgetFn) -> Result<&TurnLog, FireError> {
        self.step(w, 0, budget)
    }

    pub fn advance_elements(
        &mut self,
        w: &[GroupElement],
        budget: &BudgetFn,
    ) -> Result<&TurnLog, FireError> {
        let ids = self
            .ball
            .resolve(w)
            .map_err(|e| FireError::OutsideBall(e.to_string()))?;
        self.step(&ids, 0, budget)
    }

    fn describe(&self, v: VertexId) -> String {
        self.ball.element(v).to_string()
    }

    fn step(&mut self, w: &[VertexId], shortfall: u64, budget: &BudgetFn) -> Result<&TurnLog, FireError> {
        let n = self.next_turn();
        let radius = self.ball.radius();
        if self.r0 as u64 + n + 1 > radius as u64 {
            return Err(FireError::ExactnessGuard {
                r0: self.r0,
                turn: n,
                radius,
            });
        }
        let allowed = budget.eval(n)?;
        if w.len() as u64 > allowed {
            return Err(FireError::BudgetExceeded {
                turn: n,
                requested: w.len() as u64,
                allowed,
            });
        }
        let mut fresh = HashSet::with_capacity(w.len());
        for &v in w {
            if v.index() >= self.ball.len() {
                return Err(FireError::OutsideBall(v.to_string()));
            }
            if self.burning.contains(v) {
                return Err(FireError::ProtectBurning {
                    turn: n,
                    vertex: self.describe(v),
                });
            }
            if self.protected.contains(v) || !fresh.insert(v) {
                return Err(FireError::AlreadyProtected {
                    turn: n,
                    vertex: self.describe(v),
                });
            }
        }

        let turn = n as u32;
        let mut placed: Vec<VertexId> = w.to_vec();
        placed.sort_unstable();
        for &v in &placed {
            self.protected.insert(v);
            self.protect_turn[v.index()] = turn;
        }

        let mut next = Vec::new();
        for &v in &self.frontier {
            for nb in self.ball.neighbors(v) {
                let nb = nb.expect("exactness guard keeps the fire inside the ball");
                if !self.protected.contains(nb) && self.burning.insert(nb) {
                    self.burn_turn[nb.index()] = turn;
                    next.push(nb);
                }
            }
        }
        next.sort_unstable();

        let prev = self.log.last();
        let burned_total = prev.map_or(self.frontier.len() as u64, |l| l.burned_total) + next.len() as u64;
        let protected_total = prev.map_or(0, |l| l.protected_total) + placed.len() as u64;
        self.log.push(TurnLog {
            turn: n,
            burned_total,
            burned_new: next.len() as u64,
            protected_this_turn: placed.len() as u64,
            protected_total,
            shortfall,
        });
        self.frontier = next;
        self.protections.push(placed);
        self.turn = turn;
        Ok(self.log.last().unwrap())
    }

    pub fn into_trajectory(self) -> Trajectory<'b> {
        Trajectory {
            ball: self.ball,
            r0: self.r0,
            horizon: self.turn,
            burn_turn: self.burn_turn,
            protect_turn: self.protect_turn,
            protections: self.protections,
            log: self.log,
        }
    }
}

/// Play `horizon` turns of `strategy` against the fire started at `f0`.
pub fn run_simulation<'b>(
    ball: &'b Ball,
    f0: &[VertexId],
    strategy: &dyn Strategy,
    budget: &BudgetFn,
    horizon: u32,
) -> Result<Trajectory<'b>, FireError> {
    let mut state = FireState::new(ball, f0)?;
    if state.r0() as u64 + horizon as u64 + 1 > ball.radius() as u64 {
        return Err(FireError::ExactnessGuard {
            r0: state.r0(),
            turn: horizon as u64,
            radius: ball.radius(),
        });
    }
    for _ in 0..horizon {
        let n = state.next_turn();
        let allowed = budget.eval(n)?;
        let out = strategy
            .choose(&state, allowed)
            .map_err(|source| FireError::Strategy { turn: n, source })?;
        state.step(&out.protect, out.shortfall, budget)?;
    }
    Ok(state.into_trajectory())
}

/// A finished game: per-vertex burn and protect turns plus the turn log.
#[derive(Clone)]
pub struct Trajectory<'b> {
    ball: &'b Ball,
    r0: u32,
    horizon: u32,
    burn_turn: Vec<u32>,
    protect_turn: Vec<u32>,
    protections: Vec<Vec<VertexId>>,
    log: Vec<TurnLog>,
}

impl<'b> Trajectory<'b> {
    /// Assemble a trajectory from raw per-vertex turns without checking legality.
    /// The log is recomputed; `protections[n - 1]` is `W_n`.
    pub fn from_parts(
        ball: &'b Ball,
        horizon: u32,
        burn_turn: Vec<u32>,
        protect_turn: Vec<u32>,
    ) -> Self {
        assert_eq!(burn_turn.len(), ball.len());
        assert_eq!(protect_turn.len(), ball.len());
        let r0 = ball
            .ids()
            .filter(|v| burn_turn[v.index()] == 0)
            .map(|v| ball.word_length(v))
            .max()
            .unwrap_or(0);
        let mut protections = vec![Vec::new(); horizon as usize];
        let mut burned_at = vec![0u64; horizon as usize + 1];
        for v in ball.ids() {
            let p = protect_turn[v.index()];
            if p >= 1 && p <= horizon {
                protections[p as usize - 1].push(v);
            }
            let b = burn_turn[v.index()];
            if b <= horizon {
                burned_at[b as usize] += 1;
            }
        }
        let mut log = Vec::with_capacity(horizon as usize);
        let (mut burned_total, mut protected_total) = (burned_at[0], 0);
        for n in 1..=horizon as usize {
            burned_total += burned_at[n];
            protected_total += protections[n - 1].len() as u64;
            log.push(TurnLog {
                turn: n as u64,
                burned_total,
                burned_new: burned_at[n],
                protected_this_turn: protections[n - 1].len() as u64,
                protected_total,
                shortfall: 0,
            });
        }
        Trajectory {
            ball,
            r0,
            horizon,
            burn_turn,
            protect_turn,
            protections,
            log,
        }
    }

    pub fn ball(&self) -> &'b Ball {
        self.ball
    }

    pub fn r0(&self) -> u32 {
        self.r0
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn log(&self) -> &[TurnLog] {
        &self.log
    }

    /// `W_n` for `1 ≤ n ≤ T`, sorted.
    pub fn protections(&self, n: u32) -> &[VertexId] {
        &self.protections[n as usize - 1]
    }

    pub fn burn_turn(&self, v: VertexId) -> Option<u32> {
        Some(self.burn_turn[v.index()]).filter(|&t| t != UNSET)
    }

    pub fn protect_turn(&self, v: VertexId) -> Option<u32> {
        Some(self.protect_turn[v.index()]).filter(|&t| t != UNSET)
    }

    pub fn burn_turns(&self) -> &[u32] {
        &self.burn_turn
    }

    pub fn protect_turns(&self) -> &[u32] {
        &self.protect_turn
    }

    /// `F_n`.
    pub fn burning_at(&self, n: u32) -> VertexSet {
        VertexSet::from_ids(
            self.ball.len(),
            self.ball.ids().filter(|v| self.burn_turn[v.index()] <= n),
        )
    }

    /// `P` after turn `n`.
    pub fn protected_by(&self, n: u32) -> VertexSet {
        VertexSet::from_ids(
            self.ball.len(),
            self.ball.ids().filter(|v| self.protect_turn[v.index()] <= n),
        )
    }

    /// `U_T`: every vertex not burning at the horizon.
    pub fn unburnt(&self) -> VertexSet {
        self.burning_at(self.horizon).complement()
    }

    /// `|U_T ∩ B_n|`.
    pub fn saved_count(&self, n: u32) -> Result<u64, FireError> {
        let max = self.ball.radius().min(self.r0 + self.horizon);
        if n > max {
            return Err(FireError::RadiusOutOfRange { n, max });
        }
        Ok(self
            .ball
            .sub_ball(n)
            .filter(|&i| self.burn_turn[i as usize] > self.horizon)
            .count() as u64)
    }

    /// `|U_T ∩ B_n| / v(n)` as an exact rational.
    pub fn saved_fraction(&self, n: u32) -> Result<Ratio<u64>, FireError> {
        Ok(Ratio::new(self.saved_count(n)?, self.ball.volume(n)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;

    fn plane(r: u32) -> Ball {
        Ball::enumerate(&Group::parse("Z^2").unwrap(), r).unwrap()
    }

    #[test]
    fn first_turn_on_plane_burns_unit_ball() {
        let b = plane(4);
        let mut s = FireState::new(&b, &[b.identity()]).unwrap();
        assert_eq!(s.r0(), 0);
        s.advance(&[], &BudgetFn::Constant(0)).unwrap();
        assert_eq!(s.burning().len(), 5);
    }

    #[test]
    fn protection_blocks_spread_on_line() {
        let b = Ball::enumerate(&Group::parse("Z").unwrap(), 4).unwrap();
        let mut s = FireState::from_elements(&b, &[GroupElement::lattice(&[0])]).unwrap();
        s.advance_elements(&[GroupElement::lattice(&[1])], &BudgetFn::Constant(1))
            .unwrap();
        let expect = b
            .resolve(&[GroupElement::lattice(&[0]), GroupElement::lattice(&[-1])])
            .unwrap();
        assert_eq!(s.burning(), &VertexSet::from_ids(b.len(), expect));
    }

    #[test]
    fn budget_exceeded_is_refused() {
        let b = plane(4);
        let f0: Vec<VertexId> = b.sub_ball(1).map(VertexId).collect();
        let mut s = FireState::new(&b, &f0).unwrap();
        let w: Vec<VertexId> = b.layer(2).map(VertexId).collect();
        assert_eq!(w.len(), 8);
        assert!(matches!(
            s.advance(&w, &BudgetFn::Constant(4)),
            Err(FireError::BudgetExceeded { turn: 1, requested: 8, allowed: 4 })
        ));
        assert_eq!(s.turn(), 0);
    }

    #[test]
    fn illegal_protections_are_refused() {
        let b = plane(4);
        let mut s = FireState::new(&b, &[b.identity()]).unwrap();
        let e = b.identity();
        assert!(matches!(
            s.advance(&[e], &BudgetFn::Constant(1)),
            Err(FireError::ProtectBurning { .. })
        ));
        let x = b.neighbor(e, 0).unwrap();
        assert!(matches!(
            s.advance(&[x, x], &BudgetFn::Constant(2)),
            Err(FireError::AlreadyProtected { .. })
        ));
        s.advance(&[x], &BudgetFn::Constant(1)).unwrap();
        assert!(matches!(
            s.advance(&[x], &BudgetFn::Constant(1)),
            Err(FireError::AlreadyProtected { turn: 2, .. })
        ));
    }

    #[test]
    fn initial_fire_validation() {
        let b = plane(2);
        assert!(matches!(FireState::new(&b, &[]), Err(FireError::EmptyInitialFire)));
        assert!(matches!(
            FireState::from_elements(&b, &[GroupElement::lattice(&[5, 0])]),
            Err(FireError::OutsideBall(_))
        ));
    }

    #[test]
    fn exactness_guard_refuses() {
        let b = plane(3);
        let mut s = FireState::new(&b, &[b.identity()]).unwrap();
        let none = BudgetFn::Constant(0);
        s.advance(&[], &none).unwrap();
        s.advance(&[], &none).unwrap();
        assert!(matches!(
            s.advance(&[], &none),
            Err(FireError::ExactnessGuard { turn: 3, .. })
        ));
    }

    #[test]
    fn from_parts_rebuilds_log() {
        let b = plane(5);
        let mut s = FireState::new(&b, &[b.identity()]).unwrap();
        let x = b.neighbor(b.identity(), 0).unwrap();
        s.advance(&[x], &BudgetFn::Constant(1)).unwrap();
        s.advance(&[], &BudgetFn::Constant(1)).unwrap();
        let t = s.into_trajectory();
        let again = Trajectory::from_parts(&b, 2, t.burn_turns().to_vec(), t.protect_turns().to_vec());
        assert_eq!(again.log(), t.log());
        assert_eq!(t.protections(1), &[x]);
    }
}
