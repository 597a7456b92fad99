//! Closed-form values the simulator must reproduce exactly.

use firelab::cayley::Ball;
use firelab::fire::{run_simulation, spread_increment_audit, BudgetFn, FireError, FireState};
use firelab::group::Group;
use firelab::strategies::{shield_census, BranchCut, NullStrategy};

fn pow3(n: u32) -> u64 {
    3u64.pow(n)
}

#[test]
fn null_strategy_on_z2_burns_the_ball() {
    let ball = Ball::enumerate(&Group::parse("Z^2").unwrap(), 4).unwrap();
    let t = run_simulation(&ball, &[ball.identity()], &NullStrategy, &BudgetFn::Constant(0), 3).unwrap();
    assert_eq!(t.burning_at(3).len(), 25);
    for n in 0..=3 {
        assert_eq!(t.burning_at(n).len() as u64, ball.volume(n));
    }
}

#[test]
fn free_group_fire_without_protection() {
    let ball = Ball::enumerate(&Group::parse("F2").unwrap(), 11).unwrap();
    let t = run_simulation(&ball, &[ball.identity()], &NullStrategy, &BudgetFn::Constant(0), 10).unwrap();
    for n in 0..=10 {
        let fire = t.burning_at(n).len() as u64;
        assert_eq!(fire, 2 * pow3(n) - 1);
        assert!(fire as f64 >= (n as f64).exp());
    }
}

#[test]
fn branch_cut_on_free_group() {
    let ball = Ball::enumerate(&Group::parse("F2").unwrap(), 11).unwrap();
    let t = run_simulation(&ball, &[ball.identity()], &BranchCut, &BudgetFn::Constant(1), 10).unwrap();
    assert_eq!(t.burning_at(10).len() as u64, ball.volume(10) - (pow3(10) - 1) / 2);
    for n in 1..=10 {
        assert_eq!(t.burning_at(n).len() as u64, (pow3(n + 1) - 1) / 2);
    }
}

/// `g(n) = 4·3ⁿ⁻¹` against branch-cut with `f ≡ 1`: the summed bound only
/// survives the first turn, and the per-turn one fails from the second.
#[test]
fn spread_audit_on_free_group() {
    let ball = Ball::enumerate(&Group::parse("F2").unwrap(), 9).unwrap();
    let f = BudgetFn::Constant(1);
    let t = run_simulation(&ball, &[ball.identity()], &BranchCut, &f, 8).unwrap();
    let g = BudgetFn::Table {
        values: (0..8).map(|k| 4 * pow3(k)).collect(),
        repeat_last: false,
    };
    let audit = spread_increment_audit(&t, &g, &f).unwrap();
    for row in &audit.rows {
        let n = row.turn as u32;
        assert_eq!(row.fire, (pow3(n + 1) - 1) / 2);
        assert_eq!(row.increment, pow3(n));
        assert_eq!(row.cumulative_bound, 2 * (pow3(n) as i128 - 1) - n as i128);
        assert_eq!(row.cumulative_holds, n == 1, "turn {n}");
        assert_eq!(row.per_turn_holds, n == 1, "turn {n}");
    }
    assert_eq!((audit.rows[1].fire, audit.rows[1].cumulative_bound), (13, 14));
}

#[test]
fn initial_ball_on_lamplighter() {
    let g = Group::parse("Z2wrZ").unwrap();
    let ball = Ball::enumerate(&g, 3).unwrap();
    let f0: Vec<_> = ball.ids().filter(|&v| ball.word_length(v) <= 1).collect();
    let state = FireState::new(&ball, &f0).unwrap();
    assert_eq!(state.r0(), 1);
    assert_eq!(state.burned_count(), 9);
}

#[test]
fn protection_blocks_one_side_of_z() {
    let g = Group::parse("Z").unwrap();
    let ball = Ball::enumerate(&g, 3).unwrap();
    let mut state = FireState::from_elements(&ball, &[g.parse_element("(0)").unwrap()]).unwrap();
    let one = ball.id_of(&g.parse_element("(1)").unwrap()).unwrap();
    state.advance(&[one], &BudgetFn::Constant(1)).unwrap();
    let burning: Vec<_> = state.burning().iter().map(|v| ball.element(v).to_string()).collect();
    assert_eq!(burning.len(), 2);
    assert!(burning.contains(&"(0)".to_string()) && burning.contains(&"(-1)".to_string()));
}

#[test]
fn budget_overrun_is_rejected() {
    let g = Group::parse("Z^2").unwrap();
    let ball = Ball::enumerate(&g, 3).unwrap();
    let mut state = FireState::new(&ball, &[ball.identity()]).unwrap();
    let two: Vec<_> = ball.layer(1).take(2).map(firelab::cayley::VertexId).collect();
    let err = state.advance(&two, &BudgetFn::Constant(1)).unwrap_err();
    assert!(matches!(err, FireError::BudgetExceeded { turn: 1, requested: 2, allowed: 1 }));
}

/// With `M = 3` the shield's share of `B_R` rises toward `1/48` from below.
#[test]
fn shield_density_rises_toward_one_in_48() {
    let ball = Ball::enumerate(&Group::parse("Z2wrZ").unwrap(), 12).unwrap();
    let census = shield_census(&ball, 3);
    let tail = &census[8..];
    for w in tail.windows(2) {
        // s₁/v₁ < s₂/v₂ < 1/48
        assert!((w[0].shield as u128) * (w[1].volume as u128) < (w[1].shield as u128) * (w[0].volume as u128));
        assert!(48 * w[1].shield < w[1].volume);
    }
    let last = census.last().unwrap();
    assert!(last.ratio() > 0.0195, "{}", last.ratio());
}
