use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rayon::prelude::*;

use super::{parse_strategy, CacheStore, ExperimentConfig, InitialFire, XlabError};
use crate::cayley::{Ball, BallOptions, VertexId};
use crate::fire::{
    check_boundary_relation, run_simulation, spread_increment_audit, BudgetFn, TurnLog, Trajectory, UNSET,
};
use crate::group::{Group, GroupDescriptor};
use crate::strategies::{in_shield, shield_census, LamplighterShield, ShieldCensus};

/// How experiments obtain their balls.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub ball: BallOptions,
    /// Read balls from (and store them into) this cache when set.
    pub cache: Option<CacheStore>,
}

/// Measured quantities standing in for the existential constants of the theorems.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalConstants {
    /// `|F_n| / v(r₀ + n)` for `n = 1..=T`.
    pub fire_density: Vec<Ratio<u64>>,
    /// `min_n |F_n| / v(r₀ + n)`.
    pub min_fire_density: Option<Ratio<u64>>,
    /// The boundary relation `∂F_n ⊂ (F_{n+1} ∖ F_n) ∪ ⋃ W_k` on every turn.
    pub boundary_relation: bool,
    /// Fire increments against `|S_{r₀+n}| − f(n)` (sphere sizes of the ball).
    pub spread_per_turn: bool,
    pub spread_cumulative: bool,
}

/// Extra checks run when the strategy is the lamplighter shield.
#[derive(Clone, Debug, PartialEq)]
pub struct ShieldVerification {
    pub m: u32,
    pub horizon: u32,
    /// Shield vertices inside the ball that burned by the horizon. Must be 0.
    pub shield_burned: u64,
    /// Protections aimed at burning vertices. The engine refuses these, so 0.
    pub protected_burning: u64,
    /// `|W_n| ≤ 2^((n+2)/2)` compared exactly, per turn.
    pub budget_respected: Vec<bool>,
    pub census: Vec<ShieldCensus>,
}

impl ShieldVerification {
    pub fn passed(&self) -> bool {
        self.shield_burned == 0 && self.protected_burning == 0 && self.budget_respected.iter().all(|&b| b)
    }

    /// `2^(−M−3)`, the limit the census ratio should approach.
    pub fn limit(&self) -> f64 {
        2f64.powi(-(self.m as i32) - 3)
    }
}

/// Hypothesis check for direct products `G × H` with `H` of polynomial growth:
/// is `Σ_{k≤10n} f(k) = o(v_H(n))`?
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegimeReport {
    pub factor: String,
    /// Polynomial growth degree of `H`.
    pub degree: u32,
    /// `(n, Σ_{k≤10n} f(k), v_H(n))`.
    pub rows: Vec<(u32, String, u64)>,
    /// Decided symbolically from the budget variant.
    pub in_regime: bool,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub strategy: String,
    pub ball_radius: u32,
    pub r0: u32,
    pub log: Vec<TurnLog>,
    /// `|U_T ∩ B_R| / v(R)` for each report radius; `None` above `r₀ + T`, where
    /// "unburnt" is not yet meaningful.
    pub saved: Vec<(u32, Option<Ratio<u64>>)>,
    /// Unburnt counts in `B_R` after each turn, one row per report radius.
    pub unburnt_by_turn: Vec<Vec<u64>>,
    pub volumes: Vec<u64>,
    pub constants: EmpiricalConstants,
    pub shield: Option<ShieldVerification>,
    pub regime: Option<RegimeReport>,
    pub wall_time: Duration,
}

impl ExperimentReport {
    pub fn saved_fraction(&self, radius: u32) -> Option<Ratio<u64>> {
        self.saved.iter().find(|(r, _)| *r == radius).and_then(|(_, f)| *f)
    }
}

/// Largest word length searched when locating an explicit initial fire.
const MAX_FIRE_RADIUS: u32 = 64;

fn with_context(cfg: &ExperimentConfig, e: XlabError) -> XlabError {
    XlabError::Experiment {
        context: format!("group {} / strategy {} / T={}", cfg.group, cfg.strategy, cfg.horizon),
        source: Box::new(e),
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, XlabError> {
    run_experiment_with(config, &RunOptions::default())
}

/// Configs run in parallel, one worker each; results come back in input order.
pub fn run_experiments(configs: &[ExperimentConfig], options: &RunOptions) -> Vec<Result<ExperimentReport, XlabError>> {
    configs.par_iter().map(|c| run_experiment_with(c, options)).collect()
}

pub fn run_experiment_with(config: &ExperimentConfig, options: &RunOptions) -> Result<ExperimentReport, XlabError> {
    run_inner(config, options).map_err(|e| with_context(config, e))
}

fn obtain_ball(group: &Arc<Group>, radius: u32, options: &RunOptions) -> Result<Ball, XlabError> {
    match &options.cache {
        Some(store) => store.load_or_build(group, radius, options.ball),
        None => Ok(Ball::enumerate_with(group, radius, options.ball)?),
    }
}

fn run_inner(config: &ExperimentConfig, options: &RunOptions) -> Result<ExperimentReport, XlabError> {
    let started = Instant::now();
    config.validate()?;
    let group = Group::parse(&config.group)?;
    let parsed_fire = match &config.fire {
        InitialFire::Radius(_) => Vec::new(),
        InitialFire::Elements(es) => es.iter().map(|e| group.parse_element(e)).collect::<Result<_, _>>()?,
    };
    let r0 = match &config.fire {
        InitialFire::Radius(r) => *r,
        InitialFire::Elements(_) => {
            // Word lengths need a ball; the smallest one containing F₀ suffices.
            let mut r = 0;
            loop {
                let probe = Ball::enumerate_with(&group, r, options.ball)?;
                if parsed_fire.iter().all(|e| probe.id_of(e).is_some()) {
                    break r;
                }
                r += 1;
                if r > MAX_FIRE_RADIUS {
                    return Err(XlabError::Config {
                        line: 0,
                        msg: format!("initial fire reaches beyond radius {MAX_FIRE_RADIUS}"),
                    });
                }
            }
        }
    };
    let radius = config.max_radius.unwrap_or(r0 + config.horizon + 1);
    if let Some(&r) = config.report_radii.iter().find(|&&r| r > radius) {
        return Err(XlabError::Config {
            line: 0,
            msg: format!("report radius {r} exceeds the ball radius {radius}"),
        });
    }
    let ball = obtain_ball(&group, radius, options)?;
    let f0: Vec<VertexId> = match &config.fire {
        InitialFire::Radius(r) => ball.sub_ball(*r).map(VertexId).collect(),
        InitialFire::Elements(_) => ball
            .resolve(&parsed_fire)
            .map_err(|e| XlabError::Fire(crate::fire::FireError::OutsideBall(e.to_string())))?,
    };
    let strategy = parse_strategy(&config.strategy, &group, &config.base_dir, config.seed)?;
    let traj = run_simulation(&ball, &f0, strategy.as_ref(), &config.budget, config.horizon)?;

    let constants = empirical_constants(&traj, &config.budget)?;
    let mut saved = Vec::new();
    for &r in &config.report_radii {
        saved.push((r, traj.saved_fraction(r).ok()));
    }
    let unburnt_by_turn = config
        .report_radii
        .iter()
        .map(|&r| unburnt_counts(&traj, r))
        .collect();
    let volumes = config.report_radii.iter().map(|&r| ball.volume(r)).collect();
    let shield = match config.strategy.trim().strip_prefix("shield:M=") {
        Some(m) => Some(verify_shield_trajectory(&traj, m.parse().map_err(|_| XlabError::Spec {
            spec: config.strategy.clone(),
            msg: "bad M".into(),
        })?)),
        None => None,
    };
    Ok(ExperimentReport {
        config: config.clone(),
        strategy: strategy.name(),
        ball_radius: radius,
        r0,
        log: traj.log().to_vec(),
        saved,
        unburnt_by_turn,
        volumes,
        constants,
        shield,
        regime: regime_report(&group, &config.budget, 10)?,
        wall_time: started.elapsed(),
    })
}

/// Unburnt vertices of `B_R` after turns `1..=T`.
fn unburnt_counts(traj: &Trajectory<'_>, radius: u32) -> Vec<u64> {
    let t = traj.horizon() as usize;
    let mut burned_at = vec![0u64; t + 1];
    let ball = traj.ball();
    for i in ball.sub_ball(radius) {
        let b = traj.burn_turn(VertexId(i)).unwrap_or(UNSET);
        if (b as usize) <= t {
            burned_at[b as usize] += 1;
        }
    }
    let v = ball.volume(radius);
    let mut burned = burned_at[0];
    (1..=t)
        .map(|n| {
            burned += burned_at[n];
            v - burned
        })
        .collect()
}

fn empirical_constants(traj: &Trajectory<'_>, budget: &BudgetFn) -> Result<EmpiricalConstants, XlabError> {
    let ball = traj.ball();
    let r0 = traj.r0();
    let fire_density: Vec<Ratio<u64>> = traj
        .log()
        .iter()
        .map(|l| Ratio::new(l.burned_total, ball.volume(r0 + l.turn as u32)))
        .collect();
    let spheres = BudgetFn::Table {
        values: ball.layer_sizes()[(r0 as usize + 1).min(ball.layer_sizes().len())..].to_vec(),
        repeat_last: false,
    };
    let audit = spread_increment_audit(traj, &spheres, budget)?;
    Ok(EmpiricalConstants {
        min_fire_density: fire_density.iter().min().copied(),
        fire_density,
        boundary_relation: traj.horizon() == 0 || check_boundary_relation(traj).holds(),
        spread_per_turn: audit.per_turn_holds(),
        spread_cumulative: audit.cumulative_holds(),
    })
}

/// Shield checks on a finished lamplighter trajectory.
pub fn verify_shield_trajectory(traj: &Trajectory<'_>, m: u32) -> ShieldVerification {
    let ball = traj.ball();
    let horizon = traj.horizon();
    let mut shield_burned = 0;
    let mut protected_burning = 0;
    for v in ball.ids() {
        let burn = traj.burn_turn(v);
        if burn.is_some_and(|b| b <= horizon) && in_shield(m, &ball.element(v)) {
            shield_burned += 1;
        }
        if let (Some(p), Some(b)) = (traj.protect_turn(v), burn) {
            if b < p {
                protected_burning += 1;
            }
        }
    }
    let budget_respected = traj
        .log()
        .iter()
        .map(|l| BudgetFn::le_real_power(l.protected_this_turn, 2, 2, 2, l.turn as u32))
        .collect();
    ShieldVerification {
        m,
        horizon,
        shield_burned,
        protected_burning,
        budget_respected,
        census: shield_census(ball, m),
    }
}

/// Run the shield with parameter `m` from `F₀ = {e}` for `horizon` turns on the
/// smallest admissible ball, then check it.
pub fn shield_verify(m: u32, horizon: u32, options: &RunOptions) -> Result<ShieldVerification, XlabError> {
    let group = Group::new(GroupDescriptor::lamplighter())?;
    let ball = obtain_ball(&group, horizon + 1, options)?;
    let traj = run_simulation(&ball, &[ball.identity()], &LamplighterShield { m }, &BudgetFn::shield(), horizon)?;
    Ok(verify_shield_trajectory(&traj, m))
}

/// Growth degree of groups known to grow polynomially.
fn polynomial_degree(d: &GroupDescriptor) -> Option<u32> {
    match d {
        GroupDescriptor::Lattice(k) => Some(*k),
        GroupDescriptor::Heisenberg => Some(4),
        GroupDescriptor::Cyclic(_) => Some(0),
        GroupDescriptor::Direct(a, b) => Some(polynomial_degree(a)? + polynomial_degree(b)?),
        _ => None,
    }
}

/// Growth degree of `n ↦ Σ_{k≤10n} f(k)`, or `None` when it is exponential.
fn prefix_degree(budget: &BudgetFn) -> Option<u32> {
    match budget {
        BudgetFn::Constant(0) | BudgetFn::Polynomial { coeff: 0, .. } => Some(0),
        BudgetFn::Constant(_) => Some(1),
        BudgetFn::Polynomial { degree, .. } => Some(degree + 1),
        BudgetFn::Exponential { scale: 0, .. } | BudgetFn::Exponential { base: 0, .. } => Some(0),
        BudgetFn::Exponential { base: 1, .. } => Some(1),
        BudgetFn::Exponential { .. } => None,
        BudgetFn::Table { values, repeat_last } => match values.last() {
            Some(&last) if *repeat_last && last > 0 => Some(1),
            _ => Some(0),
        },
    }
}

/// For `G × H` with `H` infinite of polynomial growth, tabulate `Σ_{k≤10n} f(k)`
/// against `v_H(n)` for `n ≤ n_max` and decide the regime from the closed forms.
/// Other groups get `None`.
pub fn regime_report(group: &Group, budget: &BudgetFn, n_max: u32) -> Result<Option<RegimeReport>, XlabError> {
    let GroupDescriptor::Direct(left, right) = group.descriptor() else {
        return Ok(None);
    };
    let (h, degree) = match (polynomial_degree(right), polynomial_degree(left)) {
        (Some(d), _) if d > 0 => (right.as_ref().clone(), d),
        (_, Some(d)) if d > 0 => (left.as_ref().clone(), d),
        _ => return Ok(None),
    };
    let hg = Group::new(h)?;
    let growth = crate::cayley::growth_table(&hg, n_max)?;
    let finite_table = matches!(budget, BudgetFn::Table { repeat_last: false, .. });
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let sum = match budget.prefix_sum(10 * n as u64) {
            Ok(s) => s.to_string(),
            Err(_) if finite_table => budget_prefix_total(budget).to_string(),
            Err(e) => return Err(e.into()),
        };
        rows.push((n, sum, growth.volume(n).expect("tabulated")));
    }
    let (in_regime, reason) = match prefix_degree(budget) {
        None => (false, "prefix sums grow exponentially".to_string()),
        Some(p) if p < degree => (true, format!("prefix sums grow like n^{p}, v_H like n^{degree}")),
        Some(p) => (false, format!("prefix sums grow like n^{p}, not o(n^{degree})")),
    };
    Ok(Some(RegimeReport {
        factor: hg.name().to_string(),
        degree,
        rows,
        in_regime,
        reason,
    }))
}

/// Sum of all entries of a non-repeating table.
fn budget_prefix_total(budget: &BudgetFn) -> u128 {
    match budget {
        BudgetFn::Table { values, .. } => values.iter().map(|&v| v as u128).sum(),
        _ => 0,
    }
}

/// `num/den` as a decimal truncated to `digits` places, computed in integers so
/// the output never depends on float formatting or locale.
pub fn decimal(num: u64, den: u64, digits: u32) -> String {
    let int = num / den;
    let scale = 10u128.pow(digits);
    let frac = (num % den) as u128 * scale / den as u128;
    format!("{int}.{frac:0width$}", width = digits as usize)
}

/// The trajectory log as CSV: `turn, burned_total, burned_new,
/// protected_this_turn, protected_total`, then `unburnt_frac_r{R}` per report radius.
pub fn report_csv(report: &ExperimentReport) -> String {
    let mut s = String::from("turn,burned_total,burned_new,protected_this_turn,protected_total");
    for r in &report.config.report_radii {
        let _ = write!(s, ",unburnt_frac_r{r}");
    }
    s.push('\n');
    for (i, l) in report.log.iter().enumerate() {
        let _ = write!(
            s,
            "{},{},{},{},{}",
            l.turn, l.burned_total, l.burned_new, l.protected_this_turn, l.protected_total
        );
        for (k, counts) in report.unburnt_by_turn.iter().enumerate() {
            let _ = write!(s, ",{}", decimal(counts[i], report.volumes[k], 9));
        }
        s.push('\n');
    }
    s
}

pub fn emit_csv(report: &ExperimentReport, path: &Path) -> Result<(), XlabError> {
    std::fs::write(path, report_csv(report)).map_err(|source| XlabError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_plane_saves_nothing() {
        let mut cfg = ExperimentConfig::new("Z^2", 20);
        cfg.report_radii = vec![5, 10, 20];
        let rep = run_experiment(&cfg).unwrap();
        for r in [5, 10, 20] {
            assert_eq!(rep.saved_fraction(r), Some(Ratio::new(0, 1)));
        }
        assert!(rep.constants.boundary_relation);
        assert!(rep.constants.spread_per_turn && rep.constants.spread_cumulative);
        assert!(rep.constants.fire_density.iter().all(|d| *d == Ratio::new(1, 1)));
        let csv = report_csv(&rep);
        assert_eq!(csv.lines().count(), 21);
        assert!(csv.starts_with("turn,burned_total,burned_new,protected_this_turn,protected_total,unburnt_frac_r5,"));
        assert!(csv.lines().nth(1).unwrap().starts_with("1,5,4,0,0,0.918032786,"));
    }

    #[test]
    fn branch_cut_on_free_group() {
        let mut cfg = ExperimentConfig::new("F2", 10);
        cfg.strategy = "branch-cut".into();
        cfg.budget = BudgetFn::Constant(1);
        cfg.report_radii = vec![10];
        let rep = run_experiment(&cfg).unwrap();
        let expect = Ratio::new((3u64.pow(10) - 1) / 2, 2 * 3u64.pow(10) - 1);
        assert_eq!(rep.saved_fraction(10), Some(expect));
    }

    #[test]
    fn empty_report_is_header_only() {
        let mut cfg = ExperimentConfig::new("Z^2", 0);
        cfg.report_radii = vec![1];
        let rep = run_experiment(&cfg).unwrap();
        assert_eq!(report_csv(&rep), "turn,burned_total,burned_new,protected_this_turn,protected_total,unburnt_frac_r1\n");
    }

    #[test]
    fn errors_carry_config_context() {
        let mut cfg = ExperimentConfig::new("Z^2", 3);
        cfg.strategy = "shield:M=3".into();
        let err = run_experiment(&cfg).unwrap_err();
        assert!(err.to_string().contains("shield:M=3"), "{err}");
        cfg.group = "Q8".into();
        assert!(run_experiment(&cfg).is_err());
    }

    #[test]
    fn explicit_initial_fire() {
        let mut cfg = ExperimentConfig::new("Z^2", 2);
        cfg.fire = InitialFire::Elements(vec!["(1,1)".into(), "(0,0)".into()]);
        let rep = run_experiment(&cfg).unwrap();
        assert_eq!(rep.r0, 2);
        assert_eq!(rep.ball_radius, 5);
    }

    #[test]
    fn regime_on_product() {
        let g = Group::parse("F2xZ").unwrap();
        let none = regime_report(&g, &BudgetFn::Constant(0), 4).unwrap().unwrap();
        assert!(none.in_regime);
        assert_eq!(none.rows[1], (2, "0".to_string(), 5));
        let one = regime_report(&g, &BudgetFn::Constant(1), 4).unwrap().unwrap();
        assert!(!one.in_regime);
        assert_eq!(one.rows[0].1, "10");
        let finite = BudgetFn::Table { values: vec![3, 1], repeat_last: false };
        let t = regime_report(&g, &finite, 3).unwrap().unwrap();
        assert!(t.in_regime);
        assert_eq!(t.rows[2].1, "4");
        let plane = Group::parse("F2xZ^2").unwrap();
        assert!(regime_report(&plane, &BudgetFn::Constant(4), 2).unwrap().unwrap().in_regime);
        assert!(regime_report(&Group::parse("Z^2").unwrap(), &BudgetFn::Constant(1), 2).unwrap().is_none());
    }

    #[test]
    fn decimals_are_exact_truncations() {
        assert_eq!(decimal(1, 3, 4), "0.3333");
        assert_eq!(decimal(2, 2, 3), "1.000");
        assert_eq!(decimal(0, 7, 2), "0.00");
    }

    #[test]
    fn shield_checks_pass_at_small_scale() {
        let v = shield_verify(2, 6, &RunOptions::default()).unwrap();
        assert!(v.passed(), "{v:?}");
        assert_eq!(v.budget_respected.len(), 6);
        assert!(v.census.last().unwrap().shield > 0);
    }
}
