use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BudgetError {
    #[error("budget table has {len} entries and no repetition; turn {turn} is undefined")]
    TableTooShort { len: usize, turn: u64 },
    #[error("turns are numbered from 1")]
    TurnZero,
    #[error("budget value at turn {turn} does not fit in 64 bits")]
    Overflow { turn: u64 },
    #[error("invalid budget specifier {text:?}: {reason}")]
    Parse { text: String, reason: String },
}

/// Per-turn protection budget `f(n)`, evaluated exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BudgetFn {
    /// `f(n) = K`.
    Constant(u64),
    /// `f(n) = K · n^d`.
    Polynomial { coeff: u64, degree: u32 },
    /// `f(n) = ⌊scale · base^(n / root)⌋`, computed as the integer `root`-th root of
    /// `scale^root · base^n`.
    Exponential { scale: u64, base: u64, root: u32 },
    /// `f(n) = values[n - 1]`; past the end the last value repeats if `repeat_last`.
    Table { values: Vec<u64>, repeat_last: bool },
}

/// Growth class of a budget, derived from its closed form.
#[derive(Clone, Debug, PartialEq)]
pub enum BudgetClass {
    Subexponential,
    /// `f(n) ≍ rate^n` with `rate = base^(1/root) > 1`.
    Exponential { base: u64, root: u32 },
    Unclassified,
}

impl BudgetClass {
    pub fn rate(&self) -> Option<f64> {
        match self {
            BudgetClass::Exponential { base, root } => Some((*base as f64).powf(1.0 / *root as f64)),
            _ => None,
        }
    }
}

impl fmt::Display for BudgetClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BudgetClass::Subexponential => f.write_str("subexponential"),
            BudgetClass::Exponential { base, root: 1 } => write!(f, "exponential(rate {base})"),
            BudgetClass::Exponential { base, root } => write!(f, "exponential(rate {base}^(1/{root}))"),
            BudgetClass::Unclassified => f.write_str("unclassified"),
        }
    }
}

impl BudgetFn {
    /// `f(n) = 2^((n+2)/2)`, the lamplighter shield budget.
    pub fn shield() -> Self {
        BudgetFn::Exponential {
            scale: 2,
            base: 2,
            root: 2,
        }
    }

    pub fn eval(&self, n: u64) -> Result<u64, BudgetError> {
        match self {
            BudgetFn::Constant(k) => Ok(*k),
            BudgetFn::Polynomial { coeff, degree } => {
                let v = BigUint::from(*coeff) * BigUint::from(n).pow(*degree);
                v.to_u64().ok_or(BudgetError::Overflow { turn: n })
            }
            BudgetFn::Exponential { scale, base, root } => {
                if *root == 0 {
                    return Err(BudgetError::Overflow { turn: n });
                }
                let exp = u32::try_from(n).map_err(|_| BudgetError::Overflow { turn: n })?;
                let radicand = BigUint::from(*scale).pow(*root) * BigUint::from(*base).pow(exp);
                radicand
                    .nth_root(*root)
                    .to_u64()
                    .ok_or(BudgetError::Overflow { turn: n })
            }
            BudgetFn::Table { values, repeat_last } => {
                if n == 0 {
                    return Err(BudgetError::TurnZero);
                }
                let i = (n - 1) as usize;
                match values.get(i) {
                    Some(v) => Ok(*v),
                    None if *repeat_last && !values.is_empty() => Ok(*values.last().unwrap()),
                    None => Err(BudgetError::TableTooShort {
                        len: values.len(),
                        turn: n,
                    }),
                }
            }
        }
    }

    /// Whether protecting `count` vertices at turn `n` is within budget.
    pub fn allows(&self, n: u64, count: u64) -> Result<bool, BudgetError> {
        Ok(count <= self.eval(n)?)
    }

    /// `Σ_{k=1}^{n} f(k)`, exact.
    pub fn prefix_sum(&self, n: u64) -> Result<BigUint, BudgetError> {
        let mut total = BigUint::zero();
        for k in 1..=n {
            total += self.eval(k)?;
        }
        Ok(total)
    }

    pub fn classify(&self) -> BudgetClass {
        match self {
            BudgetFn::Constant(_) | BudgetFn::Polynomial { .. } => BudgetClass::Subexponential,
            BudgetFn::Exponential { scale, base, root } => {
                if *scale == 0 || *base <= 1 {
                    BudgetClass::Subexponential
                } else {
                    BudgetClass::Exponential {
                        base: *base,
                        root: *root,
                    }
                }
            }
            BudgetFn::Table { .. } => BudgetClass::Unclassified,
        }
    }

    /// `count ≤ a·b^(n/q)` over the reals, decided by comparing `count^q` with `a^q·b^n`.
    /// Used to audit `|W_n| ≤ 2^((n+2)/2)` without floating point.
    pub fn le_real_power(count: u64, scale: u64, base: u64, root: u32, n: u32) -> bool {
        let lhs = BigUint::from(count).pow(root);
        let rhs = BigUint::from(scale).pow(root) * BigUint::from(base).pow(n);
        lhs <= rhs
    }
}

impl fmt::Display for BudgetFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BudgetFn::Constant(k) => write!(f, "const:{k}"),
            BudgetFn::Polynomial { coeff, degree } => write!(f, "poly:{coeff}:{degree}"),
            BudgetFn::Exponential { scale, base, root } => write!(f, "exp:{scale}:{base}:{root}"),
            BudgetFn::Table { values, repeat_last } => {
                f.write_str(if *repeat_last { "table+:" } else { "table:" })?;
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for BudgetFn {
    type Err = BudgetError;

    /// `const:K`, `poly:K:d`, `exp:c:b:q`, `shield`, `table:v1,v2,...`, `table+:v1,...`.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let err = |reason: &str| BudgetError::Parse {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let t = text.trim();
        if t == "shield" {
            return Ok(BudgetFn::shield());
        }
        let (kind, rest) = t.split_once(':').ok_or_else(|| err("expected kind:args"))?;
        let num = |s: &str| s.trim().parse::<u64>().map_err(|_| err("expected a non-negative integer"));
        let args: Vec<&str> = rest.split(':').collect();
        match (kind, args.as_slice()) {
            ("const", [k]) => Ok(BudgetFn::Constant(num(k)?)),
            ("poly", [k, d]) => Ok(BudgetFn::Polynomial {
                coeff: num(k)?,
                degree: u32::try_from(num(d)?).map_err(|_| err("degree too large"))?,
            }),
            ("exp", [c, b, q]) => {
                let root = u32::try_from(num(q)?).map_err(|_| err("root too large"))?;
                if root == 0 {
                    return Err(err("root must be positive"));
                }
                Ok(BudgetFn::Exponential {
                    scale: num(c)?,
                    base: num(b)?,
                    root,
                })
            }
            ("table" | "table+", [list]) => {
                let values = if list.trim().is_empty() {
                    Vec::new()
                } else {
                    list.split(',').map(num).collect::<Result<_, _>>()?
                };
                Ok(BudgetFn::Table {
                    values,
                    repeat_last: kind == "table+",
                })
            }
            _ => Err(err("unknown budget kind or wrong number of arguments")),
        }
    }
}
