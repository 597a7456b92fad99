use super::{BudgetFn, FireError, Trajectory};
use crate::cayley::VertexId;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryViolation {
    pub turn: u32,
    pub vertex: VertexId,
    pub element: String,
}

/// Per-turn outcome of `∂F_n ⊆ (F_{n+1} ∖ F_n) ∪ W_1 ∪ … ∪ W_{n+1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryReport {
    /// Entry `n` covers `∂F_n`, for `n = 0..T`.
    pub per_turn: Vec<bool>,
    /// First offending vertex, if any.
    pub violation: Option<BoundaryViolation>,
}

impl BoundaryReport {
    pub fn holds(&self) -> bool {
        self.per_turn.iter().all(|&b| b)
    }
}

/// Recompute the outer boundary of every `F_n` from scratch and check that each of
/// its vertices burns at turn `n + 1` or was protected by then. A fire vertex whose
/// neighbor lies outside the ball also counts as a violation.
pub fn check_boundary_relation(traj: &Trajectory<'_>) -> BoundaryReport {
    let ball = traj.ball();
    let burn = traj.burn_turns();
    let protect = traj.protect_turns();
    let mut per_turn = Vec::with_capacity(traj.horizon() as usize);
    let mut violation = None;
    for n in 0..traj.horizon() {
        let mut ok = true;
        'scan: for v in ball.ids() {
            if burn[v.index()] > n {
                continue;
            }
            for nb in ball.neighbors(v) {
                let bad = match nb {
                    None => Some(v),
                    Some(x) if burn[x.index()] > n => {
                        let covered = burn[x.index()] == n + 1 || protect[x.index()] <= n + 1;
                        (!covered).then_some(x)
                    }
                    Some(_) => None,
                };
                if let Some(x) = bad {
                    ok = false;
                    if violation.is_none() {
                        violation = Some(BoundaryViolation {
                            turn: n,
                            vertex: x,
                            element: ball.element(x).to_string(),
                        });
                    }
                    break 'scan;
                }
            }
        }
        per_turn.push(ok);
    }
    BoundaryReport { per_turn, violation }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpreadRow {
    pub turn: u64,
    /// `|F_n ∖ F_{n-1}|`.
    pub increment: u64,
    pub g: u64,
    pub f: u64,
    /// `increment ≥ g(n) − f(n)`.
    pub per_turn_holds: bool,
    /// `|F_n|`.
    pub fire: u64,
    /// `Σ_{k ≤ n} (g(k) − f(k))`.
    pub cumulative_bound: i128,
    /// `|F_n| ≥ cumulative_bound`.
    pub cumulative_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpreadAudit {
    pub rows: Vec<SpreadRow>,
}

impl SpreadAudit {
    pub fn per_turn_holds(&self) -> bool {
        self.rows.iter().all(|r| r.per_turn_holds)
    }

    pub fn cumulative_holds(&self) -> bool {
        self.rows.iter().all(|r| r.cumulative_holds)
    }
}

/// Compare logged fire increments against `g(n) − f(n)`, turn by turn and summed.
/// This is a report: failing rows are findings, not errors.
pub fn spread_increment_audit(
    traj: &Trajectory<'_>,
    g: &BudgetFn,
    f: &BudgetFn,
) -> Result<SpreadAudit, FireError> {
    let mut rows = Vec::with_capacity(traj.log().len());
    let mut bound: i128 = 0;
    for entry in traj.log() {
        let gv = g.eval(entry.turn)?;
        let fv = f.eval(entry.turn)?;
        let diff = gv as i128 - fv as i128;
        bound += diff;
        rows.push(SpreadRow {
            turn: entry.turn,
            increment: entry.burned_new,
            g: gv,
            f: fv,
            per_turn_holds: entry.burned_new as i128 >= diff,
            fire: entry.burned_total,
            cumulative_bound: bound,
            cumulative_holds: entry.burned_total as i128 >= bound,
        });
    }
    Ok(SpreadAudit { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::Ball;
    use crate::fire::{run_simulation, UNSET};
    use crate::group::Group;
    use crate::strategies::NullStrategy;

    #[test]
    fn null_run_satisfies_relation() {
        let b = Ball::enumerate(&Group::parse("F2").unwrap(), 6).unwrap();
        let t = run_simulation(&b, &[b.identity()], &NullStrategy, &BudgetFn::Constant(0), 5).unwrap();
        let r = check_boundary_relation(&t);
        assert_eq!(r.per_turn.len(), 5);
        assert!(r.holds());
    }

    #[test]
    fn skipped_vertex_is_reported() {
        let b = Ball::enumerate(&Group::parse("Z^2").unwrap(), 6).unwrap();
        let t = run_simulation(&b, &[b.identity()], &NullStrategy, &BudgetFn::Constant(0), 4).unwrap();
        let mut burn = t.burn_turns().to_vec();
        let skipped = VertexId(b.layer(2).start);
        burn[skipped.index()] = UNSET;
        let bad = Trajectory::from_parts(&b, 4, burn, t.protect_turns().to_vec());
        let r = check_boundary_relation(&bad);
        assert!(!r.holds());
        assert_eq!(r.per_turn, vec![true, false, false, false]);
        assert_eq!(r.violation.unwrap().vertex, skipped);
    }

    #[test]
    fn null_increments_are_spheres() {
        let b = Ball::enumerate(&Group::parse("Z^2").unwrap(), 8).unwrap();
        let t = run_simulation(&b, &[b.identity()], &NullStrategy, &BudgetFn::Constant(0), 7).unwrap();
        let spheres = BudgetFn::Polynomial { coeff: 4, degree: 1 };
        let a = spread_increment_audit(&t, &spheres, &BudgetFn::Constant(0)).unwrap();
        assert!(a.rows.iter().all(|r| r.increment == r.g));
        assert!(a.per_turn_holds() && a.cumulative_holds());
    }
}
