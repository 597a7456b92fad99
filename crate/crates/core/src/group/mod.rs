//! Finitely generated groups with fixed symmetric generating sets.
//!
//! Every group here is handled through a [`Group`] built from a
//! [`GroupDescriptor`]. Elements are plain [`GroupElement`] values kept in
//! canonical form, so structural equality is group equality and the canonical
//! byte encoding is injective.

pub(crate) mod codec;
mod element;
mod parse;

use std::fmt;
use std::sync::Arc;

use smallvec::SmallVec;
use thiserror::Error;

pub use element::{GroupElement, Letter, WreathElement};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("malformed group descriptor: {0}")]
    Malformed(String),
    #[error("cannot parse group specifier {text:?}: {reason}")]
    Parse { text: String, reason: String },
    #[error("element of variant {found} does not belong to group {group}")]
    VariantMismatch { group: String, found: &'static str },
    #[error("corrupt element encoding: {0}")]
    Corrupt(String),
    #[error("cannot parse element {text:?}: {reason}")]
    ElementParse { text: String, reason: String },
}

/// Description of a concrete group together with its generating set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GroupDescriptor {
    /// ℤ/mℤ with generators {+1, −1}; m ≥ 2.
    Cyclic(u64),
    /// ℤ^d with the 2d signed unit vectors.
    Lattice(u32),
    /// Free group on k letters with generators a₁^±1 … a_k^±1.
    Free(u32),
    /// Integer Heisenberg group with generators x^±1, y^±1.
    Heisenberg,
    /// G × H with generators (s, e) and (e, t).
    Direct(Box<GroupDescriptor>, Box<GroupDescriptor>),
    /// lamp ≀ base with switch-walk-switch generators.
    Wreath {
        lamp: Box<GroupDescriptor>,
        base: Box<GroupDescriptor>,
    },
}

impl GroupDescriptor {
    pub fn direct(left: GroupDescriptor, right: GroupDescriptor) -> Self {
        GroupDescriptor::Direct(Box::new(left), Box::new(right))
    }

    pub fn wreath(lamp: GroupDescriptor, base: GroupDescriptor) -> Self {
        GroupDescriptor::Wreath {
            lamp: Box::new(lamp),
            base: Box::new(base),
        }
    }

    /// ℤ₂ ≀ ℤ, the lamplighter group.
    pub fn lamplighter() -> Self {
        Self::wreath(GroupDescriptor::Cyclic(2), GroupDescriptor::Lattice(1))
    }

    pub fn is_finite(&self) -> bool {
        match self {
            GroupDescriptor::Cyclic(_) => true,
            GroupDescriptor::Lattice(_) | GroupDescriptor::Free(_) | GroupDescriptor::Heisenberg => {
                false
            }
            GroupDescriptor::Direct(a, b) => a.is_finite() && b.is_finite(),
            GroupDescriptor::Wreath { lamp, base } => lamp.is_finite() && base.is_finite(),
        }
    }

    fn needs_parens(&self) -> bool {
        matches!(self, GroupDescriptor::Direct(..) | GroupDescriptor::Wreath { .. })
    }
}

impl fmt::Display for GroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, d: &GroupDescriptor| {
            if d.needs_parens() {
                write!(f, "({d})")
            } else {
                write!(f, "{d}")
            }
        };
        match self {
            GroupDescriptor::Cyclic(m) => write!(f, "Z{m}"),
            GroupDescriptor::Lattice(1) => write!(f, "Z"),
            GroupDescriptor::Lattice(d) => write!(f, "Z^{d}"),
            GroupDescriptor::Free(k) => write!(f, "F{k}"),
            GroupDescriptor::Heisenberg => write!(f, "H3"),
            GroupDescriptor::Direct(a, b) => {
                // Products associate to the left, so only the right side needs parens.
                if matches!(**a, GroupDescriptor::Wreath { .. }) {
                    wrap(f, a)?;
                } else {
                    write!(f, "{a}")?;
                }
                write!(f, "x")?;
                wrap(f, b)
            }
            GroupDescriptor::Wreath { lamp, base } => {
                wrap(f, lamp)?;
                write!(f, "wr")?;
                wrap(f, base)
            }
        }
    }
}

#[derive(Debug)]
pub(crate) enum Kind {
    Cyclic(u64),
    Lattice(usize),
    Free(usize),
    Heisenberg,
    Direct(Arc<Group>, Arc<Group>),
    Wreath { lamp: Arc<Group>, base: Arc<Group> },
}

/// A group handle: identity, generators, and the group law.
#[derive(Debug)]
pub struct Group {
    descriptor: GroupDescriptor,
    name: String,
    kind: Kind,
    identity: GroupElement,
    generators: Vec<GroupElement>,
    inverse_generator: Vec<usize>,
}

const MAX_FREE_RANK: u32 = 127;

impl Group {
    pub fn new(descriptor: GroupDescriptor) -> Result<Arc<Group>, GroupError> {
        Self::build(&descriptor).map(Arc::new)
    }

    /// Parse a short specifier such as `Z^2`, `F2`, `H3`, `F2xZ` or `Z2wrZ`.
    pub fn parse(text: &str) -> Result<Arc<Group>, GroupError> {
        Self::new(parse::parse_descriptor(text)?)
    }

    fn build(descriptor: &GroupDescriptor) -> Result<Group, GroupError> {
        let kind = match descriptor {
            GroupDescriptor::Cyclic(m) => {
                if *m < 2 {
                    return Err(GroupError::Malformed(format!("cyclic order must be >= 2, got {m}")));
                }
                Kind::Cyclic(*m)
            }
            GroupDescriptor::Lattice(d) => {
                if *d == 0 {
                    return Err(GroupError::Malformed("lattice rank must be >= 1".into()));
                }
                Kind::Lattice(*d as usize)
            }
            GroupDescriptor::Free(k) => {
                if *k == 0 || *k > MAX_FREE_RANK {
                    return Err(GroupError::Malformed(format!(
                        "free rank must be in 1..={MAX_FREE_RANK}, got {k}"
                    )));
                }
                Kind::Free(*k as usize)
            }
            GroupDescriptor::Heisenberg => Kind::Heisenberg,
            GroupDescriptor::Direct(a, b) => {
                Kind::Direct(Arc::new(Self::build(a)?), Arc::new(Self::build(b)?))
            }
            GroupDescriptor::Wreath { lamp, base } => {
                // Every descriptor we accept describes a nontrivial group, so the
                // lamp group is nontrivial by construction.
                Kind::Wreath {
                    lamp: Arc::new(Self::build(lamp)?),
                    base: Arc::new(Self::build(base)?),
                }
            }
        };
        let identity = identity_of(&kind);
        let generators = generators_of(&kind);
        let mut group = Group {
            descriptor: descriptor.clone(),
            name: descriptor.to_string(),
            kind,
            identity,
            generators,
            inverse_generator: Vec::new(),
        };
        group.inverse_generator = group
            .generators
            .iter()
            .map(|s| {
                let inv = group.invert_unchecked(s);
                group
                    .generators
                    .iter()
                    .position(|t| *t == inv)
                    .expect("generating set is symmetric")
            })
            .collect();
        Ok(group)
    }

    pub fn descriptor(&self) -> &GroupDescriptor {
        &self.descriptor
    }

    /// Canonical specifier text, e.g. `Z2wrZ`.
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn identity(&self) -> GroupElement {
        self.identity.clone()
    }

    pub fn is_identity(&self, a: &GroupElement) -> bool {
        *a == self.identity
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    /// Index of the generator inverse to generator `i`.
    pub fn inverse_generator(&self, i: usize) -> usize {
        self.inverse_generator[i]
    }

    pub fn is_finite(&self) -> bool {
        self.descriptor.is_finite()
    }

    /// `(left, right)` for direct products, `(lamp, base)` for wreath products.
    pub fn components(&self) -> Option<(&Arc<Group>, &Arc<Group>)> {
        match &self.kind {
            Kind::Direct(a, b) => Some((a, b)),
            Kind::Wreath { lamp, base } => Some((lamp, base)),
            _ => None,
        }
    }

    pub fn is_wreath(&self) -> bool {
        matches!(self.kind, Kind::Wreath { .. })
    }

    pub fn is_free(&self) -> bool {
        matches!(self.kind, Kind::Free(_))
    }

    /// True for ℤ₂ ≀ ℤ.
    pub fn is_lamplighter(&self) -> bool {
        self.descriptor == GroupDescriptor::lamplighter()
    }

    fn factors(&self) -> (&Group, &Group) {
        match &self.kind {
            Kind::Direct(a, b) => (a, b),
            Kind::Wreath { lamp, base } => (lamp, base),
            _ => unreachable!("factors() on a group without components"),
        }
    }

    /// Verify that `a` has the shape of an element of this group.
    pub fn check(&self, a: &GroupElement) -> Result<(), GroupError> {
        let ok = match (&self.kind, a) {
            (Kind::Cyclic(m), GroupElement::Cyclic(v)) => v < m,
            (Kind::Lattice(d), GroupElement::Lattice(v)) => v.len() == *d,
            (Kind::Free(k), GroupElement::Word(w)) => {
                w.iter().all(|&l| (l as usize) < 2 * k) && w.windows(2).all(|p| p[0] ^ 1 != p[1])
            }
            (Kind::Heisenberg, GroupElement::Heisenberg(_)) => true,
            (Kind::Direct(l, r), GroupElement::Pair(p)) => {
                l.check(&p.0)?;
                r.check(&p.1)?;
                true
            }
            (Kind::Wreath { lamp, base }, GroupElement::Wreath(w)) => {
                base.check(&w.position)?;
                for (k, v) in &w.lamps {
                    base.check(k)?;
                    lamp.check(v)?;
                    if lamp.is_identity(v) {
                        return Err(GroupError::Corrupt("identity-valued lamp entry".into()));
                    }
                }
                let keys: Vec<Vec<u8>> = w.lamps.iter().map(|(k, _)| base.encode(k)).collect();
                if keys.windows(2).any(|p| p[0] >= p[1]) {
                    return Err(GroupError::Corrupt("lamp keys not in canonical order".into()));
                }
                true
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(GroupError::VariantMismatch {
                group: self.name.clone(),
                found: a.variant_name(),
            })
        }
    }

    pub fn multiply(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.multiply_unchecked(a, b))
    }

    pub fn invert(&self, a: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check(a)?;
        Ok(self.invert_unchecked(a))
    }

    /// Product of two elements already known to belong to this group.
    pub fn multiply_unchecked(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        match (&self.kind, a, b) {
            (Kind::Cyclic(m), GroupElement::Cyclic(x), GroupElement::Cyclic(y)) => {
                GroupElement::Cyclic(((*x as u128 + *y as u128) % *m as u128) as u64)
            }
            (Kind::Lattice(_), GroupElement::Lattice(x), GroupElement::Lattice(y)) => {
                GroupElement::Lattice(x.iter().zip(y).map(|(p, q)| p + q).collect())
            }
            (Kind::Free(_), GroupElement::Word(x), GroupElement::Word(y)) => {
                let mut w = x.clone();
                for &l in y {
                    if w.last().is_some_and(|&p| p ^ 1 == l) {
                        w.pop();
                    } else {
                        w.push(l);
                    }
                }
                GroupElement::Word(w)
            }
            (Kind::Heisenberg, GroupElement::Heisenberg(x), GroupElement::Heisenberg(y)) => {
                GroupElement::Heisenberg([x[0] + y[0], x[1] + y[1], x[2] + y[2] + x[0] * y[1]])
            }
            (Kind::Direct(l, r), GroupElement::Pair(x), GroupElement::Pair(y)) => GroupElement::pair(
                l.multiply_unchecked(&x.0, &y.0),
                r.multiply_unchecked(&x.1, &y.1),
            ),
            (Kind::Wreath { lamp, base }, GroupElement::Wreath(x), GroupElement::Wreath(y)) => {
                // (g₁, L₁)(g₂, L₂) = (g₁g₂, s ↦ L₁(s) · L₂(g₁⁻¹s))
                let position = base.multiply_unchecked(&x.position, &y.position);
                let mut lamps = x.lamps.clone();
                for (t, v) in &y.lamps {
                    let key = base.multiply_unchecked(&x.position, t);
                    match lamps.iter_mut().find(|(k, _)| *k == key) {
                        Some(entry) => entry.1 = lamp.multiply_unchecked(&entry.1, v),
                        None => lamps.push((key, v.clone())),
                    }
                }
                GroupElement::Wreath(Box::new(self.canonical_wreath(position, lamps)))
            }
            _ => panic!(
                "multiply_unchecked: elements {} and {} do not belong to {}",
                a.variant_name(),
                b.variant_name(),
                self.name
            ),
        }
    }

    pub fn invert_unchecked(&self, a: &GroupElement) -> GroupElement {
        match (&self.kind, a) {
            (Kind::Cyclic(m), GroupElement::Cyclic(x)) => GroupElement::Cyclic((m - x) % m),
            (Kind::Lattice(_), GroupElement::Lattice(x)) => {
                GroupElement::Lattice(x.iter().map(|v| -v).collect())
            }
            (Kind::Free(_), GroupElement::Word(x)) => {
                GroupElement::Word(x.iter().rev().map(|l| l ^ 1).collect())
            }
            (Kind::Heisenberg, GroupElement::Heisenberg([a, b, c])) => {
                GroupElement::Heisenberg([-a, -b, a * b - c])
            }
            (Kind::Direct(l, r), GroupElement::Pair(x)) => {
                GroupElement::pair(l.invert_unchecked(&x.0), r.invert_unchecked(&x.1))
            }
            (Kind::Wreath { lamp, base }, GroupElement::Wreath(x)) => {
                // (g, L)⁻¹ = (g⁻¹, t ↦ L(g t)⁻¹)
                let position = base.invert_unchecked(&x.position);
                let lamps = x
                    .lamps
                    .iter()
                    .map(|(s, v)| (base.multiply_unchecked(&position, s), lamp.invert_unchecked(v)))
                    .collect();
                GroupElement::Wreath(Box::new(self.canonical_wreath(position, lamps)))
            }
            _ => panic!("invert_unchecked: element {} not in {}", a.variant_name(), self.name),
        }
    }

    /// Drop identity lamps and sort keys by canonical encoding.
    fn canonical_wreath(
        &self,
        position: GroupElement,
        mut lamps: Vec<(GroupElement, GroupElement)>,
    ) -> WreathElement {
        let (lamp, base) = self.factors();
        lamps.retain(|(_, v)| !lamp.is_identity(v));
        if lamps.len() > 1 {
            lamps.sort_by_cached_key(|(k, _)| base.encode(k));
        }
        WreathElement { position, lamps }
    }

    /// Build a wreath element from an arbitrary lamp list (duplicates multiply left to right).
    pub fn wreath_element(
        &self,
        position: GroupElement,
        lamps: impl IntoIterator<Item = (GroupElement, GroupElement)>,
    ) -> Result<GroupElement, GroupError> {
        let Kind::Wreath { lamp, base } = &self.kind else {
            return Err(GroupError::VariantMismatch {
                group: self.name.clone(),
                found: "wreath",
            });
        };
        base.check(&position)?;
        let mut merged: Vec<(GroupElement, GroupElement)> = Vec::new();
        for (k, v) in lamps {
            base.check(&k)?;
            lamp.check(&v)?;
            match merged.iter_mut().find(|(key, _)| *key == k) {
                Some(entry) => entry.1 = lamp.multiply_unchecked(&entry.1, &v),
                None => merged.push((k, v)),
            }
        }
        Ok(GroupElement::Wreath(Box::new(self.canonical_wreath(position, merged))))
    }

    /// Fold the generator word `word` onto `start` by right multiplication.
    pub fn apply_word(&self, start: &GroupElement, word: &[usize]) -> GroupElement {
        word.iter().fold(start.clone(), |acc, &i| {
            self.multiply_unchecked(&acc, &self.generators[i])
        })
    }

    /// Index of the switch-walk-switch generator `S₁ W S₂` of a wreath product:
    /// `walk` indexes the base generators, the switches index lamp generators.
    pub fn wreath_generator_index(
        &self,
        walk: usize,
        first_switch: Option<usize>,
        second_switch: Option<usize>,
    ) -> usize {
        let (lamp, _) = self.factors();
        let width = lamp.generator_count() + 1;
        let a = first_switch.map_or(0, |i| i + 1);
        let b = second_switch.map_or(0, |i| i + 1);
        walk * width * width + a * width + b
    }

    /// Inverse of [`Group::wreath_generator_index`].
    pub fn wreath_generator_parts(&self, index: usize) -> (usize, Option<usize>, Option<usize>) {
        let (lamp, _) = self.factors();
        let width = lamp.generator_count() + 1;
        let walk = index / (width * width);
        let a = (index / width) % width;
        let b = index % width;
        (walk, a.checked_sub(1), b.checked_sub(1))
    }
}

fn identity_of(kind: &Kind) -> GroupElement {
    match kind {
        Kind::Cyclic(_) => GroupElement::Cyclic(0),
        Kind::Lattice(d) => GroupElement::Lattice(SmallVec::from_elem(0, *d)),
        Kind::Free(_) => GroupElement::Word(SmallVec::new()),
        Kind::Heisenberg => GroupElement::Heisenberg([0; 3]),
        Kind::Direct(a, b) => GroupElement::pair(a.identity(), b.identity()),
        Kind::Wreath { base, .. } => GroupElement::Wreath(Box::new(WreathElement {
            position: base.identity(),
            lamps: Vec::new(),
        })),
    }
}

fn generators_of(kind: &Kind) -> Vec<GroupElement> {
    match kind {
        Kind::Cyclic(m) => {
            let mut g = vec![GroupElement::Cyclic(1)];
            if *m > 2 {
                g.push(GroupElement::Cyclic(m - 1));
            }
            g
        }
        Kind::Lattice(d) => (0..*d)
            .flat_map(|i| {
                [1i64, -1].map(|sign| {
                    let mut v = SmallVec::from_elem(0, *d);
                    v[i] = sign;
                    GroupElement::Lattice(v)
                })
            })
            .collect(),
        Kind::Free(k) => (0..2 * *k).map(|l| GroupElement::word(&[l as Letter])).collect(),
        Kind::Heisenberg => vec![
            GroupElement::Heisenberg([1, 0, 0]),
            GroupElement::Heisenberg([-1, 0, 0]),
            GroupElement::Heisenberg([0, 1, 0]),
            GroupElement::Heisenberg([0, -1, 0]),
        ],
        Kind::Direct(a, b) => {
            let mut g: Vec<_> = a
                .generators()
                .iter()
                .map(|s| GroupElement::pair(s.clone(), b.identity()))
                .collect();
            g.extend(b.generators().iter().map(|t| GroupElement::pair(a.identity(), t.clone())));
            g
        }
        Kind::Wreath { lamp, base } => {
            let switches: Vec<Option<&GroupElement>> =
                std::iter::once(None).chain(lamp.generators().iter().map(Some)).collect();
            let mut g = Vec::new();
            for w in base.generators() {
                for s1 in &switches {
                    for s2 in &switches {
                        // S₁ W S₂ = (w, S₁ at e, S₂ at w).
                        let mut lamps = Vec::new();
                        if let Some(h) = s1 {
                            lamps.push((base.identity(), (*h).clone()));
                        }
                        if let Some(h) = s2 {
                            lamps.push((w.clone(), (*h).clone()));
                        }
                        lamps.sort_by_cached_key(|(k, _)| base.encode(k));
                        g.push(GroupElement::Wreath(Box::new(WreathElement {
                            position: w.clone(),
                            lamps,
                        })));
                    }
                }
            }
            g
        }
    }
}
