use std::sync::Arc;

use super::{Strategy, StrategyError, StrategyOutput};
use crate::cayley::{Ball, VertexId};
use crate::fire::FireState;
use crate::group::{Group, GroupElement};

/// Strong retainment on ℤ₂ ≀ ℤ. The saved set is
///
/// `S = { ((aᵢ), k) : a₀ = … = a_M = 1, aᵢ = 0 for i < 0, k > M + 1 }`
///
/// and its inner boundary `P` (position `M + 2`) is protected in layers: by turn `n`
/// every element of `P` whose lamps above `M + ⌊n/2⌋` are off.
#[derive(Clone, Copy, Debug)]
pub struct LamplighterShield {
    pub m: u32,
}

fn lamp_at(i: i64) -> (GroupElement, GroupElement) {
    (GroupElement::lattice(&[i]), GroupElement::Cyclic(1))
}

/// `P_n` for the shield with parameter `m`, ordered by highest free lamp, then by
/// canonical encoding.
pub fn shield_layer(group: &Arc<Group>, m: u32, n: u64) -> Vec<GroupElement> {
    let m = m as i64;
    let free = (n / 2) as u32;
    let mut out: Vec<(u32, Vec<u8>, GroupElement)> = (0..1u64 << free)
        .map(|mask| {
            let lamps = (0..=m)
                .map(lamp_at)
                .chain((0..free).filter(|b| mask >> b & 1 == 1).map(|b| lamp_at(m + 1 + b as i64)));
            let e = group
                .wreath_element(GroupElement::lattice(&[m + 2]), lamps)
                .expect("shield elements live in the lamplighter");
            let top = 64 - mask.leading_zeros();
            (top, group.encode(&e), e)
        })
        .collect();
    out.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    out.into_iter().map(|(_, _, e)| e).collect()
}

/// Membership in `S` for parameter `m`.
pub fn in_shield(m: u32, element: &GroupElement) -> bool {
    let Some(w) = element.as_wreath() else {
        return false;
    };
    let Some(&[k]) = w.position.as_lattice() else {
        return false;
    };
    if k <= m as i64 + 1 {
        return false;
    }
    let mut on_core = 0;
    for (key, _) in &w.lamps {
        match key.as_lattice() {
            Some(&[i]) if i < 0 => return false,
            Some(&[i]) if i <= m as i64 => on_core += 1,
            Some(&[_]) => {}
            _ => return false,
        }
    }
    on_core == m as usize + 1
}

/// `|S ∩ B_R|` next to `v(R)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShieldCensus {
    pub radius: u32,
    pub shield: u64,
    pub volume: u64,
}

impl ShieldCensus {
    pub fn ratio(&self) -> f64 {
        self.shield as f64 / self.volume as f64
    }
}

/// Exact census of `S ∩ B_R` for every `R` up to the ball radius.
pub fn shield_census(ball: &Ball, m: u32) -> Vec<ShieldCensus> {
    let mut out = Vec::with_capacity(ball.radius() as usize + 1);
    let mut shield = 0;
    for r in 0..=ball.radius() {
        shield += ball
            .layer(r)
            .filter(|&i| in_shield(m, &ball.element(VertexId(i))))
            .count() as u64;
        out.push(ShieldCensus {
            radius: r,
            shield,
            volume: ball.volume(r),
        });
    }
    out
}

impl Strategy for LamplighterShield {
    fn name(&self) -> String {
        format!("shield:M={}", self.m)
    }

    fn choose(&self, state: &FireState<'_>, budget: u64) -> Result<StrategyOutput, StrategyError> {
        let ball = state.ball();
        let group = ball.group();
        if !group.is_lamplighter() {
            return Err(StrategyError::UnsupportedGroup {
                strategy: "shield",
                group: group.name().to_string(),
            });
        }
        if self.m <= state.r0() {
            return Err(StrategyError::Precondition(format!(
                "shield parameter M = {} must exceed the initial fire radius {}",
                self.m,
                state.r0()
            )));
        }
        let n = state.next_turn();
        let mut protect = Vec::new();
        for e in shield_layer(group, self.m, n) {
            let Some(v) = ball.id_of(&e) else { continue };
            if state.is_protected(v) {
                continue;
            }
            if state.is_burning(v) {
                return Err(StrategyError::ShieldBreached {
                    element: e.to_string(),
                    turn: n,
                });
            }
            protect.push(v);
        }
        let mut shortfall = 0;
        if protect.len() as u64 > budget {
            shortfall = protect.len() as u64 - budget;
            protect.truncate(budget as usize);
        }
        protect.sort_unstable();
        Ok(StrategyOutput { protect, shortfall })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::{inner_boundary, VertexSet};
    use crate::fire::{run_simulation, BudgetFn};

    fn lamplighter() -> Arc<Group> {
        Group::parse("Z2wrZ").unwrap()
    }

    #[test]
    fn first_layer_is_single_element() {
        let g = lamplighter();
        let p1 = shield_layer(&g, 3, 1);
        assert_eq!(p1.len(), 1);
        assert_eq!(p1[0].to_string(), "((5);{(0):1,(1):1,(2):1,(3):1})");
        assert!(in_shield(3, &p1[0]));
    }

    #[test]
    fn layer_sizes_double_every_other_turn() {
        let g = lamplighter();
        for n in 1..=12u64 {
            let size = shield_layer(&g, 3, n).len() as u64;
            assert_eq!(size, 1 << (n / 2));
            let before = if n == 1 { 0 } else { shield_layer(&g, 3, n - 1).len() as u64 };
            let new = size - before;
            let expect = match n {
                1 => 1,
                _ if n % 2 == 0 => 1 << (n / 2 - 1),
                _ => 0,
            };
            assert_eq!(new, expect, "turn {n}");
            assert!(BudgetFn::le_real_power(new, 2, 2, 2, n as u32));
        }
    }

    #[test]
    fn membership() {
        let g = lamplighter();
        let yes = g.parse_element("((6);{(0):1,(1):1,(2):1,(3):1,(9):1})").unwrap();
        let low = g.parse_element("((4);{(0):1,(1):1,(2):1,(3):1})").unwrap();
        let neg = g.parse_element("((6);{(-1):1,(0):1,(1):1,(2):1,(3):1})").unwrap();
        let gap = g.parse_element("((6);{(0):1,(2):1,(3):1})").unwrap();
        assert!(in_shield(3, &yes));
        assert!(!in_shield(3, &low) && !in_shield(3, &neg) && !in_shield(3, &gap));
    }

    #[test]
    fn protected_vertices_are_inner_boundary_of_shield() {
        let g = lamplighter();
        let b = Ball::enumerate(&g, 9).unwrap();
        let s = b.select(|_, e| in_shield(2, e));
        let inner = inner_boundary(&b, &s);
        let t = run_simulation(&b, &[b.identity()], &LamplighterShield { m: 2 }, &BudgetFn::shield(), 8)
            .unwrap();
        let mut emitted = VertexSet::new(b.len());
        for n in 1..=8 {
            for &v in t.protections(n) {
                emitted.insert(v);
            }
        }
        assert!(!emitted.is_empty());
        for v in emitted.iter() {
            assert!(inner.contains(v), "{}", b.element(v));
            assert!(b.neighbors(v).flatten().any(|x| !s.contains(x)));
        }
    }

    #[test]
    fn m_one_above_fire_radius_is_breached() {
        // The uncovered shield vertex with lamp M + 2 on sits at distance M + 2
        // from e, so with M = 1 the fire reaches it at turn 3.
        let g = lamplighter();
        let b = Ball::enumerate(&g, 7).unwrap();
        let err = run_simulation(&b, &[b.identity()], &LamplighterShield { m: 1 }, &BudgetFn::shield(), 6)
            .err()
            .unwrap();
        assert!(matches!(
            err,
            crate::fire::FireError::Strategy { turn: 4, source: StrategyError::ShieldBreached { .. } }
        ));
    }

    #[test]
    fn refuses_small_m_and_other_groups() {
        let g = lamplighter();
        let b = Ball::enumerate(&g, 5).unwrap();
        let f0: Vec<VertexId> = b.sub_ball(1).map(VertexId).collect();
        assert!(run_simulation(&b, &f0, &LamplighterShield { m: 1 }, &BudgetFn::shield(), 2).is_err());
        let z = Ball::enumerate(&Group::parse("Z^2").unwrap(), 4).unwrap();
        assert!(run_simulation(&z, &[z.identity()], &LamplighterShield { m: 3 }, &BudgetFn::shield(), 2).is_err());
    }
}
