mod common;

use std::sync::{Arc, OnceLock};

use proptest::prelude::*;

use firelab::cayley::{inner_boundary, outer_boundary, Ball, VertexId, VertexSet};
use firelab::fire::{check_boundary_relation, run_simulation, BudgetFn};
use firelab::group::{Group, GroupElement};
use firelab::strategies::GreedyBoundary;
use firelab::wreath_paths::{dilute_paths, synthetic_family, verify_disjointness, CaseTag, PathContext};

use common::RandomLegal;

const GROUPS: [&str; 7] = ["Z^2", "Z^3", "F2", "H3", "Z2wrZ", "F2xZ", "Z3wrZ^2"];

fn group(i: usize) -> &'static Arc<Group> {
    static CELLS: [OnceLock<Arc<Group>>; 7] = [const { OnceLock::new() }; 7];
    CELLS[i].get_or_init(|| Group::parse(GROUPS[i]).unwrap())
}

/// Balls with room for `T = radius - 1` turns from `{e}`.
const FIRE_GROUPS: [(&str, u32); 5] = [("Z^2", 12), ("F2", 7), ("H3", 8), ("Z2wrZ", 8), ("F2xZ", 6)];

fn fire_ball(i: usize) -> &'static Ball {
    static CELLS: [OnceLock<Ball>; 5] = [const { OnceLock::new() }; 5];
    CELLS[i].get_or_init(|| {
        let (g, r) = FIRE_GROUPS[i];
        Ball::enumerate(&Group::parse(g).unwrap(), r).unwrap()
    })
}

fn element(g: &Group, word: &[usize]) -> GroupElement {
    let w: Vec<usize> = word.iter().map(|&j| j % g.generator_count()).collect();
    g.apply_word(&g.identity(), &w)
}

fn word() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0usize..1000, 0..14)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_axioms(k in 0..GROUPS.len(), a in word(), b in word(), c in word()) {
        let g = group(k);
        let (a, b, c) = (element(g, &a), element(g, &b), element(g, &c));
        let e = g.identity();
        prop_assert_eq!(g.multiply(&g.multiply(&a, &b)?, &c)?, g.multiply(&a, &g.multiply(&b, &c)?)?);
        prop_assert_eq!(g.multiply(&a, &e)?, a.clone());
        prop_assert_eq!(g.multiply(&e, &a)?, a.clone());
        prop_assert!(g.is_identity(&g.multiply(&a, &g.invert(&a)?)?));
        prop_assert!(g.is_identity(&g.multiply(&g.invert(&a)?, &a)?));
    }

    #[test]
    fn generating_set_is_symmetric(k in 0..GROUPS.len()) {
        let g = group(k);
        for (i, s) in g.generators().iter().enumerate() {
            prop_assert!(!g.is_identity(s));
            let j = g.inverse_generator(i);
            prop_assert!(g.is_identity(&g.multiply(s, &g.generators()[j])?));
        }
    }

    #[test]
    fn encodings_round_trip(k in 0..GROUPS.len(), a in word(), b in word()) {
        let g = group(k);
        let (x, y) = (element(g, &a), element(g, &b));
        prop_assert_eq!(g.decode(&g.encode(&x))?, x.clone());
        prop_assert_eq!(g.parse_element(&x.to_string())?, x.clone());
        prop_assert_eq!(x == y, g.encode(&x) == g.encode(&y));
    }

    #[test]
    fn fire_dynamics_invariants(k in 0..FIRE_GROUPS.len(), seed in any::<u64>(), budget in 0u64..5) {
        let ball = fire_ball(k);
        let horizon = ball.radius() - 1;
        let budget = BudgetFn::Constant(budget);
        let t = run_simulation(ball, &[ball.identity()], &RandomLegal { seed }, &budget, horizon)?;
        let mut prev = t.burning_at(0);
        for n in 1..=horizon {
            let fire = t.burning_at(n);
            prop_assert!(prev.is_subset(&fire), "fire shrank at turn {}", n);
            prop_assert!(fire.iter().all(|v| ball.word_length(v) <= n), "fire outran B_n at turn {}", n);
            prop_assert!(t.protected_by(n - 1).is_subset(&t.protected_by(n)));
            prop_assert!(t.protected_by(n).is_disjoint(&t.burning_at(horizon)));
            prop_assert!(t.protections(n).len() as u64 <= budget.eval(n as u64)?);
            prop_assert_eq!(t.log()[n as usize - 1].protected_this_turn, t.protections(n).len() as u64);
            prev = fire;
        }
        prop_assert!(check_boundary_relation(&t).holds());
        let again = run_simulation(ball, &[ball.identity()], &RandomLegal { seed }, &budget, horizon)?;
        prop_assert_eq!(again.burn_turns(), t.burn_turns());
        prop_assert_eq!(again.protect_turns(), t.protect_turns());
        prop_assert_eq!(again.log(), t.log());
    }

    #[test]
    fn greedy_respects_budget(k in 0..FIRE_GROUPS.len(), seed in any::<u64>(), budget in 0u64..4) {
        let ball = fire_ball(k);
        let horizon = ball.radius() - 1;
        let budget = BudgetFn::Constant(budget);
        let t = run_simulation(ball, &[ball.identity()], &GreedyBoundary { seed }, &budget, horizon)?;
        for l in t.log() {
            prop_assert!(l.protected_this_turn <= budget.eval(l.turn)?);
        }
        prop_assert!(check_boundary_relation(&t).holds());
    }

    #[test]
    fn boundary_duality_away_from_edge(k in 0..FIRE_GROUPS.len(), bits in prop::collection::vec(any::<bool>(), 400)) {
        let ball = fire_ball(k);
        let inner_r = ball.radius() - 2;
        let a = VertexSet::from_ids(
            ball.len(),
            ball.sub_ball(inner_r).filter(|&i| bits[i as usize % bits.len()]).map(VertexId),
        );
        let mut dual = inner_boundary(ball, &a.complement());
        dual.intersect_with(&VertexSet::from_ids(ball.len(), ball.sub_ball(ball.radius() - 1).map(VertexId)));
        prop_assert_eq!(outer_boundary(ball, &a), dual);
    }

    #[test]
    fn budget_prefix_sums_are_exact(k in 0u64..20, d in 0u32..4, n in 1u64..40) {
        let poly = BudgetFn::Polynomial { coeff: k, degree: d };
        let naive: u128 = (1..=n).map(|i| k as u128 * (i as u128).pow(d)).sum();
        prop_assert_eq!(poly.prefix_sum(n)?.to_string(), naive.to_string());
    }

    #[test]
    fn exponential_budget_is_floor_of_real_value(scale in 1u64..6, base in 2u64..5, root in 1u32..4, n in 1u64..30) {
        let f = BudgetFn::Exponential { scale, base, root };
        let v = f.eval(n)?;
        // v^root <= scale^root base^n < (v+1)^root
        let lhs = (v as u128).pow(root);
        let mid = (scale as u128).pow(root) * (base as u128).pow(n as u32);
        let rhs = (v as u128 + 1).pow(root);
        prop_assert!(lhs <= mid && mid < rhs);
        prop_assert!(BudgetFn::le_real_power(v, scale, base, root, n as u32));
        prop_assert!(!BudgetFn::le_real_power(v + 1, scale, base, root, n as u32));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn compiled_paths_are_sound(case in 1u8..=4, n in 2u32..=3, count in 1usize..=6, seed in any::<u64>()) {
        let g = group(4);
        let ctx = PathContext::new(g, n)?;
        let case = CaseTag::from_number(case).unwrap();
        let fam = synthetic_family(&ctx, case, count, seed)?;
        let set = ctx.construct_connecting_paths(&fam)?;
        prop_assert_eq!(set.paths.len() + set.dropped.len(), count);
        for (p, &i) in set.paths.iter().zip(&set.indices) {
            prop_assert!(p.verify(g));
            prop_assert_eq!(&g.apply_word(&fam.a[i], &p.word), &fam.b[i]);
            prop_assert!(p.len() <= 100 * n as usize);
            if case == CaseTag::DistinctLamps {
                prop_assert_eq!(ctx.case1_witness_failure(&fam.a[i], &fam.b[i], p)?, None);
            }
        }
        let report = verify_disjointness(g, &set.paths, case, n);
        if case == CaseTag::DistinctLamps {
            prop_assert!(report.pairwise_disjoint);
        }
        let d = dilute_paths(&report);
        prop_assert!(d.kept.len() >= d.guaranteed);
        for (x, &i) in d.kept.iter().enumerate() {
            for &j in &d.kept[x + 1..] {
                let vi: std::collections::HashSet<_> = set.paths[i].vertices.iter().collect();
                prop_assert!(set.paths[j].vertices.iter().all(|v| !vi.contains(v)));
            }
        }
    }
}
