use std::fmt;

use smallvec::SmallVec;

/// A free-group letter. Letter `2i` is the generator `a_{i+1}`, letter `2i + 1` its inverse.
pub type Letter = u8;

/// Canonical element payload. Structural equality coincides with group equality
/// because every constructor in [`crate::group::Group`] returns canonical forms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    /// Residue in `0..m`.
    Cyclic(u64),
    /// Integer vector of ℤ^d.
    Lattice(SmallVec<[i64; 4]>),
    /// Freely reduced word.
    Word(SmallVec<[Letter; 16]>),
    /// Upper unitriangular matrix `[[1, a, c], [0, 1, b], [0, 0, 1]]` stored as `[a, b, c]`.
    Heisenberg([i64; 3]),
    /// Element of a direct product.
    Pair(Box<(GroupElement, GroupElement)>),
    /// Element of a wreath product.
    Wreath(Box<WreathElement>),
}

/// Lamplighter position plus finitely supported lamp configuration.
///
/// `lamps` never holds identity values, and its keys are strictly increasing
/// in canonical encoding order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WreathElement {
    pub position: GroupElement,
    pub lamps: Vec<(GroupElement, GroupElement)>,
}

impl GroupElement {
    pub fn lattice(coords: &[i64]) -> Self {
        GroupElement::Lattice(SmallVec::from_slice(coords))
    }

    pub fn word(letters: &[Letter]) -> Self {
        GroupElement::Word(SmallVec::from_slice(letters))
    }

    pub fn pair(left: GroupElement, right: GroupElement) -> Self {
        GroupElement::Pair(Box::new((left, right)))
    }

    pub fn as_wreath(&self) -> Option<&WreathElement> {
        match self {
            GroupElement::Wreath(w) => Some(w),
            _ => None,
        }
    }

    pub fn as_lattice(&self) -> Option<&[i64]> {
        match self {
            GroupElement::Lattice(v) => Some(v),
            _ => None,
        }
    }

    pub(crate) fn variant_name(&self) -> &'static str {
        match self {
            GroupElement::Cyclic(_) => "cyclic",
            GroupElement::Lattice(_) => "lattice",
            GroupElement::Word(_) => "word",
            GroupElement::Heisenberg(_) => "heisenberg",
            GroupElement::Pair(_) => "pair",
            GroupElement::Wreath(_) => "wreath",
        }
    }
}

impl WreathElement {
    /// Lamp value at `key`, if lit.
    pub fn lamp(&self, key: &GroupElement) -> Option<&GroupElement> {
        self.lamps.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

fn write_letter(f: &mut fmt::Formatter<'_>, letter: Letter) -> fmt::Result {
    let index = letter / 2;
    let inverse = letter % 2 == 1;
    if index < 26 {
        let base = if inverse { b'A' } else { b'a' };
        write!(f, "{}", (base + index) as char)
    } else if inverse {
        write!(f, "x{}'", index + 1)
    } else {
        write!(f, "x{}", index + 1)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Cyclic(v) => write!(f, "{v}"),
            GroupElement::Lattice(v) => {
                write!(f, "(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            GroupElement::Word(w) => {
                if w.is_empty() {
                    return write!(f, "e");
                }
                for &l in w {
                    write_letter(f, l)?;
                }
                Ok(())
            }
            GroupElement::Heisenberg([a, b, c]) => write!(f, "[{a},{b},{c}]"),
            GroupElement::Pair(p) => write!(f, "<{}|{}>", p.0, p.1),
            GroupElement::Wreath(w) => {
                write!(f, "({};{{", w.position)?;
                for (i, (k, v)) in w.lamps.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{k}:{v}")?;
                }
                write!(f, "}})")
            }
        }
    }
}
