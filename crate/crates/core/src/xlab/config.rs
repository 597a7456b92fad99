use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::XlabError;
use crate::fire::BudgetFn;

/// How the fire starts: the ball `B_r` around the identity, or explicit elements
/// in the group's text syntax.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InitialFire {
    Radius(u32),
    Elements(Vec<String>),
}

impl FromStr for InitialFire {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(r) = s.strip_prefix("radius:") {
            return r
                .trim()
                .parse()
                .map(InitialFire::Radius)
                .map_err(|e| format!("bad fire radius {r:?}: {e}"));
        }
        if let Some(list) = s.strip_prefix("elements:") {
            let items: Vec<String> = list
                .split('|')
                .map(|e| e.trim().to_string())
                .filter(|e| !e.is_empty())
                .collect();
            if items.is_empty() {
                return Err("empty initial fire".into());
            }
            return Ok(InitialFire::Elements(items));
        }
        Err(format!("initial fire must be radius:R or elements:a|b|..., got {s:?}"))
    }
}

impl fmt::Display for InitialFire {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialFire::Radius(r) => write!(f, "radius:{r}"),
            InitialFire::Elements(es) => write!(f, "elements:{}", es.join("|")),
        }
    }
}

/// One simulation run, read from a flat `key = value` file with `[section]` headers:
///
/// ```text
/// [game]
/// group = Z^2
/// fire = radius:0
/// strategy = greedy:seed=3
/// budget = const:2
/// horizon = 20
/// seed = 3
///
/// [report]
/// max_radius = 22
/// radii = 5, 10, 20
/// output = run.csv
/// ```
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub group: String,
    pub fire: InitialFire,
    pub strategy: String,
    pub budget: BudgetFn,
    pub horizon: u32,
    /// Truncation radius of the ambient ball. Defaults to `r₀ + T + 1`.
    pub max_radius: Option<u32>,
    pub report_radii: Vec<u32>,
    pub seed: u64,
    pub output: Option<PathBuf>,
    /// Directory that relative paths (schedule files, output) resolve against.
    pub base_dir: PathBuf,
}

const KEYS: &[&str] = &[
    "game.group",
    "game.fire",
    "game.strategy",
    "game.budget",
    "game.horizon",
    "game.seed",
    "report.max_radius",
    "report.radii",
    "report.output",
];

impl ExperimentConfig {
    /// A config with defaults: fire `radius:0`, null strategy, zero budget, seed 0.
    pub fn new(group: &str, horizon: u32) -> Self {
        ExperimentConfig {
            group: group.to_string(),
            fire: InitialFire::Radius(0),
            strategy: "null".into(),
            budget: BudgetFn::Constant(0),
            horizon,
            max_radius: None,
            report_radii: Vec::new(),
            seed: 0,
            output: None,
            base_dir: PathBuf::from("."),
        }
    }

    pub fn load(path: &Path) -> Result<Self, XlabError> {
        let text = std::fs::read_to_string(path).map_err(|source| XlabError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::parse(&text)?;
        if let Some(dir) = path.parent() {
            cfg.base_dir = dir.to_path_buf();
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, XlabError> {
        let mut section = String::new();
        let mut seen: Vec<(&str, String, usize)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |msg: String| XlabError::Config { line, msg };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                section = name
                    .strip_suffix(']')
                    .ok_or_else(|| err(format!("unterminated section header {content:?}")))?
                    .trim()
                    .to_string();
                continue;
            }
            let (k, v) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got {content:?}")))?;
            let full = format!("{section}.{}", k.trim());
            let key = KEYS
                .iter()
                .find(|&&known| known == full)
                .ok_or_else(|| err(format!("unknown key {full:?}")))?;
            if seen.iter().any(|(k, _, _)| k == key) {
                return Err(err(format!("duplicate key {full:?}")));
            }
            seen.push((key, v.trim().to_string(), line));
        }

        let get = |key: &str| seen.iter().find(|(k, _, _)| *k == key);
        let required = |key: &str| {
            get(key).ok_or(XlabError::Config {
                line: 0,
                msg: format!("missing required key {key:?}"),
            })
        };
        fn value<T: FromStr>(entry: &(&str, String, usize)) -> Result<T, XlabError>
        where
            T::Err: fmt::Display,
        {
            entry.1.parse().map_err(|e: T::Err| XlabError::Config {
                line: entry.2,
                msg: format!("{}: {e}", entry.0),
            })
        }

        let (_, group, _) = required("game.group")?;
        let mut cfg = ExperimentConfig::new(group, value(required("game.horizon")?)?);
        if let Some(e) = get("game.fire") {
            cfg.fire = value(e)?;
        }
        if let Some(e) = get("game.strategy") {
            cfg.strategy = e.1.clone();
        }
        if let Some(e) = get("game.budget") {
            cfg.budget = value(e)?;
        }
        if let Some(e) = get("game.seed") {
            cfg.seed = value(e)?;
        }
        if let Some(e) = get("report.max_radius") {
            cfg.max_radius = Some(value(e)?);
        }
        if let Some(e) = get("report.radii") {
            cfg.report_radii = e
                .1
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse().map_err(|err| XlabError::Config {
                        line: e.2,
                        msg: format!("bad radius {s:?}: {err}"),
                    })
                })
                .collect::<Result<_, _>>()?;
        }
        if let Some(e) = get("report.output") {
            cfg.output = Some(PathBuf::from(&e.1));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks that need no group: the radius bookkeeping for `radius:r` fires.
    pub fn validate(&self) -> Result<(), XlabError> {
        let bad = |msg: String| Err(XlabError::Config { line: 0, msg });
        if let (Some(r), Some(rmax)) = (self.known_r0(), self.max_radius) {
            if r as u64 + self.horizon as u64 + 1 > rmax as u64 {
                return bad(format!(
                    "r0 + T + 1 = {} exceeds max_radius {rmax}",
                    r as u64 + self.horizon as u64 + 1
                ));
            }
        }
        if let Some(rmax) = self.max_radius {
            if let Some(&r) = self.report_radii.iter().find(|&&r| r > rmax) {
                return bad(format!("report radius {r} exceeds max_radius {rmax}"));
            }
        }
        Ok(())
    }

    fn known_r0(&self) -> Option<u32> {
        match self.fire {
            InitialFire::Radius(r) => Some(r),
            InitialFire::Elements(_) => None,
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Canonical text form; parsing it back yields the same config.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "[game]\ngroup = {}\nfire = {}\nstrategy = {}\nbudget = {}\nhorizon = {}\nseed = {}\n\n[report]\n",
            self.group, self.fire, self.strategy, self.budget, self.horizon, self.seed
        );
        if let Some(r) = self.max_radius {
            s += &format!("max_radius = {r}\n");
        }
        if !self.report_radii.is_empty() {
            let radii: Vec<String> = self.report_radii.iter().map(u32::to_string).collect();
            s += &format!("radii = {}\n", radii.join(", "));
        }
        if let Some(o) = &self.output {
            s += &format!("output = {}\n", o.display());
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# sample
[game]
group = Z^2
fire = radius:0
strategy = greedy:seed=3
budget = const:2
horizon = 20

[report]
max_radius = 22
radii = 5, 10,20
";

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(cfg.group, "Z^2");
        assert_eq!(cfg.budget, BudgetFn::Constant(2));
        assert_eq!(cfg.report_radii, vec![5, 10, 20]);
        assert_eq!(cfg.max_radius, Some(22));
        assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_input() {
        let too_small = SAMPLE.replace("max_radius = 22", "max_radius = 20");
        assert!(ExperimentConfig::parse(&too_small).is_err());
        let far = SAMPLE.replace("5, 10,20", "5, 30");
        assert!(ExperimentConfig::parse(&far).is_err());
        let unknown = SAMPLE.replace("horizon", "horizn");
        assert!(matches!(
            ExperimentConfig::parse(&unknown),
            Err(XlabError::Config { line: 7, .. })
        ));
        assert!(ExperimentConfig::parse("[game]\ngroup = Z\n").is_err());
        assert!(ExperimentConfig::parse("[game]\ngroup = Z\ngroup = Z\nhorizon = 1").is_err());
    }

    #[test]
    fn initial_fire_forms() {
        assert_eq!("radius:2".parse::<InitialFire>().unwrap(), InitialFire::Radius(2));
        let e: InitialFire = "elements: (0,0) | (1,0)".parse().unwrap();
        assert_eq!(e, InitialFire::Elements(vec!["(0,0)".into(), "(1,0)".into()]));
        assert!("elements:".parse::<InitialFire>().is_err());
        assert!("ball".parse::<InitialFire>().is_err());
    }
}
