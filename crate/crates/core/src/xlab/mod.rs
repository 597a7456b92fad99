//! Experiment plumbing: config files, the simulate pipeline, budget analytics,
//! CSV output, ball cache administration and path-family files.

mod cache;
mod config;
mod experiment;
mod family;
mod specs;

use std::fmt::Write as _;
use std::path::PathBuf;

use num_bigint::BigUint;
use thiserror::Error;

use crate::cayley::{Ball, BallError, BallOptions, CacheError};
use crate::fire::{BudgetClass, BudgetError, BudgetFn, FireError};
use crate::group::{Group, GroupError};
use crate::isoperimetry::{BatchReport, IsoError};
use crate::strategies::StrategyError;
use crate::wreath_paths::PathError;

pub use cache::{CacheEntry, CacheStatus, CacheStore, CACHE_DIR_ENV};
pub use config::{ExperimentConfig, InitialFire};
pub use experiment::{
    decimal, emit_csv, regime_report, report_csv, run_experiment, run_experiment_with, run_experiments,
    shield_verify, verify_shield_trajectory, EmpiricalConstants, ExperimentReport, RegimeReport, RunOptions,
    ShieldVerification,
};
pub use family::{run_paths, FamilySpec, PathRow, PathsReport};
pub use specs::{parse_schedule, parse_strategy};

#[derive(Debug, Error)]
pub enum XlabError {
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("bad specifier {spec:?}: {msg}")]
    Spec { spec: String, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("no cache file at {0}")]
    CacheMissing(PathBuf),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Ball(#[from] BallError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error(transparent)]
    Fire(#[from] FireError),
    #[error(transparent)]
    Budget(#[from] BudgetError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Iso(#[from] IsoError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error("{context}: {source}")]
    Experiment {
        context: String,
        #[source]
        source: Box<XlabError>,
    },
}

/// `Σ_{k=1}^{n} f(k)`, exact.
pub fn budget_prefix_sum(budget: &BudgetFn, n: u64) -> Result<BigUint, XlabError> {
    Ok(budget.prefix_sum(n)?)
}

/// Symbolic growth class of the budget; tables are unclassified.
pub fn classify_budget(budget: &BudgetFn) -> BudgetClass {
    budget.classify()
}

/// `R,v(R)` rows for `R = 0..=max_radius`.
pub fn growth_csv(group: &std::sync::Arc<Group>, max_radius: u32, options: BallOptions) -> Result<String, XlabError> {
    let table = Ball::enumerate_with(group, max_radius, options)?.growth();
    let mut s = String::from("R,v\n");
    for (r, v) in table.entries {
        let _ = writeln!(s, "{r},{v}");
    }
    Ok(s)
}

/// `group,R,kind,id,size,lhs,rhs,ratio,holds` for the rows of `kind`
/// (`poincare` or `isoperimetry`; `None` keeps all).
pub fn batch_csv(group: &Group, r: u32, report: &BatchReport, kind: Option<&str>) -> String {
    let mut s = String::from("group,R,kind,id,size,lhs,rhs,ratio,holds\n");
    for row in report.rows.iter().filter(|row| kind.is_none_or(|k| row.kind == k)) {
        let _ = writeln!(s, "{},{r},{row}", group.name());
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_analytics() {
        assert_eq!(budget_prefix_sum(&BudgetFn::Constant(5), 10).unwrap(), BigUint::from(50u32));
        let sq = BudgetFn::Polynomial { coeff: 1, degree: 2 };
        assert_eq!(budget_prefix_sum(&sq, 10).unwrap(), BigUint::from(385u32));
        assert_eq!(classify_budget(&sq), BudgetClass::Subexponential);
        let rate = classify_budget(&BudgetFn::shield()).rate().unwrap();
        assert!((rate - 2f64.sqrt()).abs() < 1e-12);
        let short = BudgetFn::Table { values: vec![1, 2], repeat_last: false };
        assert!(budget_prefix_sum(&short, 3).is_err());
        assert_eq!(classify_budget(&short), BudgetClass::Unclassified);
    }

    #[test]
    fn growth_rows() {
        let csv = growth_csv(&Group::parse("Z^2").unwrap(), 3, BallOptions::default()).unwrap();
        assert_eq!(csv, "R,v\n0,1\n1,5\n2,13\n3,25\n");
    }
}
