//! Exact checks of the L¹ Poincaré inequality on balls and the ball-restricted
//! isoperimetric inequality it implies.
//!
//! With `‖∇f‖_{L¹(B)} = Σ_{x ∈ B, s ∈ S, xs ∈ B} |f(xs) − f(x)|`:
//!
//! ```text
//! ‖f − f_R‖_{L¹(B_R)} ≤ 2R · v(2R)/v(R) · ‖∇f‖_{L¹(B_{3R})}
//! |B_{3R} ∩ ∂A| ≥ 1/(2|S|) · 1/(R·v(2R)) · |B_R ∖ A| · |A ∩ B_R|
//! ```
//!
//! Everything is computed over `Ratio<i128>`.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cayley::{outer_boundary, Ball, VertexId, VertexSet};
use crate::group::GroupElement;

pub type Q = Ratio<i128>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IsoError {
    #[error("radius {needed} exceeds the ball radius {available}")]
    RadiusOverflow { needed: u32, available: u32 },
    #[error("field has {got} values for a ball of {expected} elements")]
    DomainMismatch { got: usize, expected: usize },
    #[error("radius must be positive")]
    ZeroRadius,
}

fn need(ball: &Ball, radius: u32) -> Result<(), IsoError> {
    if radius > ball.radius() {
        Err(IsoError::RadiusOverflow {
            needed: radius,
            available: ball.radius(),
        })
    } else {
        Ok(())
    }
}

/// A rational-valued function on every element of a ball, stored as integer
/// numerators over one positive denominator.
#[derive(Clone, Debug)]
pub struct ScalarField<'b> {
    ball: &'b Ball,
    num: Vec<i128>,
    den: i128,
}

impl<'b> ScalarField<'b> {
    pub fn from_integers(ball: &'b Ball, values: Vec<i128>) -> Result<Self, IsoError> {
        if values.len() != ball.len() {
            return Err(IsoError::DomainMismatch {
                got: values.len(),
                expected: ball.len(),
            });
        }
        Ok(ScalarField { ball, num: values, den: 1 })
    }

    pub fn from_rationals(ball: &'b Ball, values: &[Q]) -> Result<Self, IsoError> {
        if values.len() != ball.len() {
            return Err(IsoError::DomainMismatch {
                got: values.len(),
                expected: ball.len(),
            });
        }
        let den = values.iter().fold(1i128, |acc, q| acc.lcm(q.denom()));
        let num = values.iter().map(|q| q.numer() * (den / q.denom())).collect();
        Ok(ScalarField { ball, num, den })
    }

    pub fn from_fn(ball: &'b Ball, mut f: impl FnMut(VertexId, &GroupElement) -> i128) -> Self {
        let num = ball.ids().map(|v| f(v, &ball.element(v))).collect();
        ScalarField { ball, num, den: 1 }
    }

    pub fn constant(ball: &'b Ball, c: i128) -> Self {
        ScalarField {
            ball,
            num: vec![c; ball.len()],
            den: 1,
        }
    }

    /// `1_A`.
    pub fn indicator(ball: &'b Ball, a: &VertexSet) -> Self {
        ScalarField {
            ball,
            num: ball.ids().map(|v| a.contains(v) as i128).collect(),
            den: 1,
        }
    }

    pub fn ball(&self) -> &'b Ball {
        self.ball
    }

    pub fn value(&self, v: VertexId) -> Q {
        Q::new(self.num[v.index()], self.den)
    }
}

/// `‖∇f‖_{L¹(B_r)}`: each unordered edge inside `B_r` is counted once per orientation.
pub fn gradient_l1(field: &ScalarField<'_>, r: u32) -> Result<Q, IsoError> {
    let ball = field.ball;
    need(ball, r)?;
    let end = ball.volume(r) as u32;
    let mut total: i128 = 0;
    for v in 0..end {
        let fv = field.num[v as usize];
        for u in ball.inner_neighbors(VertexId(v)) {
            if u.0 < end {
                total += (field.num[u.index()] - fv).abs();
            }
        }
    }
    Ok(Q::new(total, field.den))
}

/// `‖f − f_R‖_{L¹(B_R)}` with `f_R` the exact mean over `B_R`. Requires `B_{3R}`.
pub fn deviation_l1(field: &ScalarField<'_>, r: u32) -> Result<Q, IsoError> {
    let ball = field.ball;
    need(ball, 3 * r)?;
    let end = ball.volume(r) as usize;
    let sum: i128 = field.num[..end].iter().sum();
    let n = end as i128;
    let total: i128 = field.num[..end].iter().map(|&x| (x * n - sum).abs()).sum();
    Ok(Q::new(total, field.den * n))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoincareCheck {
    pub holds: bool,
    pub lhs: Q,
    pub rhs: Q,
    /// `rhs − lhs`.
    pub slack: Q,
}

pub fn check_poincare(field: &ScalarField<'_>, r: u32) -> Result<PoincareCheck, IsoError> {
    if r == 0 {
        return Err(IsoError::ZeroRadius);
    }
    let ball = field.ball;
    need(ball, 3 * r)?;
    let lhs = deviation_l1(field, r)?;
    let factor = Q::new(2 * r as i128 * ball.volume(2 * r) as i128, ball.volume(r) as i128);
    let rhs = factor * gradient_l1(field, 3 * r)?;
    Ok(PoincareCheck {
        holds: lhs <= rhs,
        slack: rhs - lhs,
        lhs,
        rhs,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsoperimetryCheck {
    pub holds: bool,
    /// `|B_{3R} ∩ ∂A|`.
    pub lhs: u64,
    pub rhs: Q,
    /// `lhs · R · v(2R) / (|B_R ∖ A| · |A ∩ B_R|)`: the largest constant this
    /// instance allows in place of `1/(2|S|)`. `None` when the product vanishes.
    pub constant: Option<Q>,
}

/// `A` must lie in `B_{3R}`; members beyond it are ignored.
pub fn check_isoperimetry(ball: &Ball, r: u32, a: &VertexSet) -> Result<IsoperimetryCheck, IsoError> {
    if r == 0 {
        return Err(IsoError::ZeroRadius);
    }
    need(ball, 3 * r)?;
    let mut inside = a.clone();
    inside.intersect_with(&VertexSet::from_ids(ball.len(), ball.sub_ball(3 * r).map(VertexId)));
    let boundary = outer_boundary(ball, &inside);
    let lhs = boundary.count_below(ball.volume(3 * r) as usize) as u64;
    let vr = ball.volume(r) as usize;
    let in_a = inside.count_below(vr) as i128;
    let product = (vr as i128 - in_a) * in_a;
    let scale = r as i128 * ball.volume(2 * r) as i128;
    let s = ball.group().generator_count() as i128;
    let rhs = Q::new(product, 2 * s * scale);
    Ok(IsoperimetryCheck {
        holds: Q::from(lhs as i128) >= rhs,
        lhs,
        rhs,
        constant: (product > 0).then(|| Q::new(lhs as i128 * scale, product)),
    })
}

/// Exact identities for indicator fields on `B_R`:
/// `‖1_A − f_R‖ = (2/v(R))·|B_R∖A|·|A∩B_R|` and `‖∇1_A‖_{L¹(B_R)} ≤ 2|S|·|B_R ∩ ∂A|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndicatorIdentities {
    pub deviation: Q,
    pub deviation_expected: Q,
    pub gradient: Q,
    pub gradient_bound: Q,
}

impl IndicatorIdentities {
    pub fn hold(&self) -> bool {
        self.deviation == self.deviation_expected && self.gradient <= self.gradient_bound
    }
}

pub fn indicator_identities(ball: &Ball, r: u32, a: &VertexSet) -> Result<IndicatorIdentities, IsoError> {
    need(ball, 3 * r)?;
    let field = ScalarField::indicator(ball, a);
    let vr = ball.volume(r) as usize;
    let in_a = a.count_below(vr) as i128;
    let deviation_expected = Q::new(2 * (vr as i128 - in_a) * in_a, vr as i128);
    let boundary = outer_boundary(ball, a).count_below(vr) as i128;
    let s = ball.group().generator_count() as i128;
    Ok(IndicatorIdentities {
        deviation: deviation_l1(&field, r)?,
        deviation_expected,
        gradient: gradient_l1(&field, r)?,
        gradient_bound: Q::from(2 * s * boundary),
    })
}

/// Each element of `B_r` independently with probability `p`.
pub fn random_subset(ball: &Ball, r: u32, p: f64, rng: &mut impl Rng) -> VertexSet {
    VertexSet::from_ids(ball.len(), ball.sub_ball(r).map(VertexId).filter(|_| rng.gen_bool(p)))
}

/// The ball of radius `rho` around `center`, clipped to `B_r`.
pub fn sub_ball(ball: &Ball, r: u32, center: VertexId, rho: u32) -> VertexSet {
    let end = ball.volume(r) as u32;
    let mut set = VertexSet::new(ball.len());
    set.insert(center);
    let mut frontier = vec![center];
    for _ in 0..rho {
        let mut next = Vec::new();
        for v in frontier {
            for u in ball.inner_neighbors(v) {
                if u.0 < end && set.insert(u) {
                    next.push(u);
                }
            }
        }
        frontier = next;
    }
    set
}

/// `{x ∈ B_r : x_axis ≥ threshold}` for lattice groups.
pub fn half_space(ball: &Ball, r: u32, axis: usize, threshold: i64) -> Option<VertexSet> {
    let end = ball.volume(r) as u32;
    let mut set = VertexSet::new(ball.len());
    for v in 0..end {
        let e = ball.element(VertexId(v));
        let coords = e.as_lattice()?;
        if *coords.get(axis)? >= threshold {
            set.insert(VertexId(v));
        }
    }
    Some(set)
}

/// Outcome of a randomized batch over one group and radius.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BatchReport {
    pub poincare_checks: u64,
    pub poincare_violations: u64,
    pub isoperimetry_checks: u64,
    pub isoperimetry_violations: u64,
    pub identity_checks: u64,
    pub identity_violations: u64,
    /// Smallest per-instance constant seen, i.e. the best constant valid for the batch.
    pub best_constant: Option<Q>,
    pub rows: Vec<CheckRow>,
}

/// One CSV row: `kind, id, size, lhs, rhs, ratio, holds`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckRow {
    pub kind: &'static str,
    pub id: String,
    pub size: u64,
    pub lhs: Q,
    pub rhs: Q,
    pub holds: bool,
}

impl CheckRow {
    pub fn ratio(&self) -> Option<f64> {
        (!self.rhs.is_zero()).then(|| q_to_f64(&self.lhs) / q_to_f64(&self.rhs))
    }
}

pub fn q_to_f64(q: &Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

const DENSITIES: [f64; 3] = [0.1, 0.5, 0.9];

/// The test subsets for one instance index: random subsets of `B_{3R}` at the
/// three densities, with sub-balls and (for lattices) half-spaces mixed in.
fn instance_set(ball: &Ball, r: u32, i: u64, rng: &mut ChaCha8Rng) -> (String, VertexSet) {
    let big = 3 * r;
    match i % 8 {
        6 => {
            let center = VertexId(rng.gen_range(0..ball.volume(2 * r) as u32));
            let rho = rng.gen_range(0..=r);
            (format!("ball:{center}:{rho}"), sub_ball(ball, big, center, rho))
        }
        7 => {
            let dim = ball.element(ball.identity()).as_lattice().map_or(0, |c| c.len());
            if dim > 0 {
                let axis = rng.gen_range(0..dim);
                let t = rng.gen_range(-(r as i64)..=r as i64);
                let set = half_space(ball, big, axis, t).expect("lattice elements");
                (format!("half:{axis}:{t}"), set)
            } else {
                let p = DENSITIES[rng.gen_range(0..3)];
                (format!("random:{p}"), random_subset(ball, big, p, rng))
            }
        }
        k => {
            let p = DENSITIES[(k % 3) as usize];
            (format!("random:{p}"), random_subset(ball, big, p, rng))
        }
    }
}

/// Run `trials` Poincaré checks (random ±1, small-integer and indicator fields) and
/// `trials` isoperimetry checks with indicator identities, deterministically from `seed`.
pub fn run_batch(ball: &Ball, r: u32, trials: u64, seed: u64) -> Result<BatchReport, IsoError> {
    need(ball, 3 * r)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = BatchReport::default();
    let big_end = ball.volume(3 * r) as usize;
    for i in 0..trials {
        let (kind, values): (&str, Vec<i128>) = match i % 3 {
            0 => ("pm1", (0..ball.len()).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect()),
            1 => ("int5", (0..ball.len()).map(|_| rng.gen_range(-5..=5)).collect()),
            _ => {
                let p = DENSITIES[rng.gen_range(0..3)];
                ("indicator", (0..ball.len()).map(|v| (v < big_end && rng.gen_bool(p)) as i128).collect())
            }
        };
        let field = ScalarField::from_integers(ball, values)?;
        let c = check_poincare(&field, r)?;
        report.poincare_checks += 1;
        report.poincare_violations += !c.holds as u64;
        report.rows.push(CheckRow {
            kind: "poincare",
            id: format!("{kind}#{i}"),
            size: ball.volume(3 * r),
            lhs: c.lhs,
            rhs: c.rhs,
            holds: c.holds,
        });

        let (label, a) = instance_set(ball, r, i, &mut rng);
        let iso = check_isoperimetry(ball, r, &a)?;
        report.isoperimetry_checks += 1;
        report.isoperimetry_violations += !iso.holds as u64;
        if let Some(k) = iso.constant {
            report.best_constant = Some(report.best_constant.map_or(k, |b: Q| b.min(k)));
        }
        report.rows.push(CheckRow {
            kind: "isoperimetry",
            id: format!("{label}#{i}"),
            size: a.len() as u64,
            lhs: Q::from(iso.lhs as i128),
            rhs: iso.rhs,
            holds: iso.holds,
        });

        let ids = indicator_identities(ball, r, &a)?;
        report.identity_checks += 1;
        report.identity_violations += !ids.hold() as u64;
    }
    Ok(report)
}

impl std::fmt::Display for CheckRow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let ratio = self.ratio().map_or_else(|| "inf".to_string(), |x| format!("{x:.6}"));
        write!(
            f,
            "{},{},{},{},{},{},{}",
            self.kind, self.id, self.size, self.lhs, self.rhs, ratio, self.holds
        )
    }
}
