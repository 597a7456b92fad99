use std::path::Path;

use super::XlabError;
use crate::group::Group;
use crate::strategies::{BranchCut, FixedSet, GreedyBoundary, LamplighterShield, NullStrategy, Strategy};

fn spec_err(spec: &str, msg: impl Into<String>) -> XlabError {
    XlabError::Spec {
        spec: spec.to_string(),
        msg: msg.into(),
    }
}

/// Build a strategy from `null`, `branch-cut`, `greedy[:seed=N]`,
/// `fixed:file=PATH` or `shield:M=K`. A greedy strategy without a seed takes
/// `default_seed`; relative schedule paths resolve against `base_dir`.
pub fn parse_strategy(
    spec: &str,
    group: &Group,
    base_dir: &Path,
    default_seed: u64,
) -> Result<Box<dyn Strategy>, XlabError> {
    let spec = spec.trim();
    let (name, arg) = match spec.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (spec, None),
    };
    let kv = |key: &str| -> Result<&str, XlabError> {
        arg.and_then(|a| a.strip_prefix(key)).and_then(|a| a.strip_prefix('=')).ok_or_else(|| {
            spec_err(spec, format!("expected {name}:{key}=..."))
        })
    };
    let number = |key: &str| -> Result<u64, XlabError> {
        kv(key)?
            .parse()
            .map_err(|e| spec_err(spec, format!("{key}: {e}")))
    };
    Ok(match name {
        "null" if arg.is_none() => Box::new(NullStrategy),
        "branch-cut" if arg.is_none() => Box::new(BranchCut),
        "greedy" => Box::new(GreedyBoundary {
            seed: if arg.is_some() { number("seed")? } else { default_seed },
        }),
        "shield" => {
            let m = u32::try_from(number("M")?).map_err(|e| spec_err(spec, e.to_string()))?;
            Box::new(LamplighterShield { m })
        }
        "fixed" => {
            let file = Path::new(kv("file")?);
            let path = if file.is_absolute() { file.to_path_buf() } else { base_dir.join(file) };
            let text = std::fs::read_to_string(&path).map_err(|source| XlabError::Io { path, source })?;
            Box::new(parse_schedule(&text, group)?)
        }
        _ => return Err(spec_err(spec, "unknown strategy")),
    })
}

/// A protection schedule, one line per turn: `N: e₁ | e₂ | …`. Turns may be listed
/// in any order; unlisted turns protect nothing. `#` starts a comment.
pub fn parse_schedule(text: &str, group: &Group) -> Result<FixedSet, XlabError> {
    let mut schedule: Vec<Vec<crate::group::GroupElement>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |msg: String| XlabError::Config { line, msg };
        let (turn, rest) = content
            .split_once(':')
            .ok_or_else(|| err(format!("expected `turn: elements`, got {content:?}")))?;
        let turn: usize = turn
            .trim()
            .parse()
            .map_err(|e| err(format!("bad turn {turn:?}: {e}")))?;
        if turn == 0 {
            return Err(err("turns start at 1".into()));
        }
        if schedule.len() < turn {
            schedule.resize(turn, Vec::new());
        }
        for e in rest.split('|').map(str::trim).filter(|e| !e.is_empty()) {
            let x = group.parse_element(e).map_err(|g| err(g.to_string()))?;
            schedule[turn - 1].push(x);
        }
    }
    FixedSet::new(schedule).map_err(XlabError::Strategy)
}
