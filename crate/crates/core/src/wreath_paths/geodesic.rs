use std::sync::Arc;

use super::PathError;
use crate::cayley::{Ball, BallOptions};
use crate::group::{Group, GroupDescriptor, GroupElement};

/// Canonical geodesic words from the identity in a base (or lamp) group.
///
/// Lattices walk coordinate by coordinate, free groups spell the reduced word,
/// cyclic groups go the short way round. Anything else falls back to the
/// lexicographically least geodesic read off an enumerated ball.
pub enum Geodesics {
    Lattice(usize),
    Free,
    Cyclic(u64),
    Table { group: Arc<Group>, ball: Ball },
}

impl Geodesics {
    /// `radius` bounds the targets of the ball fallback; closed forms ignore it.
    pub fn new(group: &Arc<Group>, radius: u32) -> Result<Self, PathError> {
        Ok(match group.descriptor() {
            GroupDescriptor::Lattice(d) => Geodesics::Lattice(*d as usize),
            GroupDescriptor::Free(_) => Geodesics::Free,
            GroupDescriptor::Cyclic(m) => Geodesics::Cyclic(*m),
            _ => {
                let ball = Ball::enumerate_with(group, radius, BallOptions::default())
                    .map_err(|e| PathError::Geometry(e.to_string()))?;
                Geodesics::Table {
                    group: group.clone(),
                    ball,
                }
            }
        })
    }

    /// Generator indices spelling a geodesic from `e` to `target`.
    pub fn word(&self, target: &GroupElement) -> Result<Vec<usize>, PathError> {
        match (self, target) {
            (Geodesics::Lattice(_), GroupElement::Lattice(c)) => {
                let mut w = Vec::new();
                for (i, &x) in c.iter().enumerate() {
                    let g = if x >= 0 { 2 * i } else { 2 * i + 1 };
                    w.extend(std::iter::repeat_n(g, x.unsigned_abs() as usize));
                }
                Ok(w)
            }
            (Geodesics::Free, GroupElement::Word(letters)) => {
                Ok(letters.iter().map(|&l| l as usize).collect())
            }
            (Geodesics::Cyclic(m), GroupElement::Cyclic(t)) => {
                let (t, m) = (*t, *m);
                Ok(if m == 2 || t <= m - t {
                    vec![0; t as usize]
                } else {
                    vec![1; (m - t) as usize]
                })
            }
            (Geodesics::Table { group, ball }, _) => {
                let len = |x: &GroupElement| {
                    ball.id_of(x).map(|v| ball.word_length(v)).ok_or_else(|| {
                        PathError::Geometry(format!("{x} lies beyond the geodesic table"))
                    })
                };
                let mut rest = target.clone();
                let mut remaining = len(&rest)?;
                let mut w = Vec::with_capacity(remaining as usize);
                while remaining > 0 {
                    let (j, next) = (0..group.generator_count())
                        .find_map(|j| {
                            let inv = group.invert_unchecked(&group.generators()[j]);
                            let next = group.multiply_unchecked(&inv, &rest);
                            (ball.id_of(&next).map(|v| ball.word_length(v)) == Some(remaining - 1))
                                .then_some((j, next))
                        })
                        .expect("some generator shortens a nontrivial element");
                    w.push(j);
                    rest = next;
                    remaining -= 1;
                }
                Ok(w)
            }
            _ => Err(PathError::Geometry(format!(
                "element {target} does not match the geodesic model"
            ))),
        }
    }

    /// Word length of `target`.
    pub fn length(&self, target: &GroupElement) -> Result<u32, PathError> {
        Ok(self.word(target)?.len() as u32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_match_ball_distances() {
        for (spec, r) in [("Z^2", 4), ("F2", 4), ("Z7", 4), ("Z2", 1)] {
            let g = Group::parse(spec).unwrap();
            let geo = Geodesics::new(&g, r).unwrap();
            let ball = Ball::enumerate(&g, r).unwrap();
            for v in ball.ids() {
                let x = ball.element(v);
                let w = geo.word(&x).unwrap();
                assert_eq!(w.len() as u32, ball.word_length(v), "{spec} {x}");
                assert_eq!(g.apply_word(&g.identity(), &w), x);
            }
        }
    }

    #[test]
    fn table_fallback_is_geodesic() {
        let g = Group::parse("H3").unwrap();
        let geo = Geodesics::new(&g, 4).unwrap();
        let ball = Ball::enumerate(&g, 4).unwrap();
        for v in ball.ids() {
            let x = ball.element(v);
            let w = geo.word(&x).unwrap();
            assert_eq!(w.len() as u32, ball.word_length(v));
            assert_eq!(g.apply_word(&g.identity(), &w), x);
        }
        assert!(geo.word(&GroupElement::Heisenberg([9, 0, 0])).is_err());
    }
}
