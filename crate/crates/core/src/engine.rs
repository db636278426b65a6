//! The Halpern iteration `x_{n+1} = beta_n u (+) (1 - beta_n) W_n x_n` with
//! per-step diagnostics against a known target `p`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{ModelSpace, SpacePoint, COINCIDENT_EPS};
use crate::mapping::{apply_w, residuals, Mapping, WSchedule};

pub const LYAPUNOV_TOL: f64 = 1e-10;
pub const FEJER_TOL: f64 = 1e-12;
pub const BOUNDEDNESS_TOL: f64 = 1e-9;
pub const GAMMA_TOL: f64 = 1e-12;

#[derive(Clone)]
pub enum BetaKind {
    /// `beta_n = (n + 1)^(-q)`.
    PowerLaw {
        q: f64,
    },
    Constant {
        value: f64,
    },
    /// `beta_n = values[n - 1]`; the last value is held past the end.
    List(Vec<f64>),
    Custom(Arc<dyn Fn(usize) -> f64 + Send + Sync>),
}

impl fmt::Debug for BetaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BetaKind::PowerLaw { q } => f.debug_struct("PowerLaw").field("q", q).finish(),
            BetaKind::Constant { value } => f.debug_struct("Constant").field("value", value).finish(),
            BetaKind::List(v) => f.debug_tuple("List").field(&v.len()).finish(),
            BetaKind::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// Asymptotic facts about a schedule, set symbolically from its kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BetaMeta {
    pub sum_diverges: bool,
    pub sum_of_squares_diverges: bool,
    pub tends_to_zero: bool,
}

#[derive(Debug, Clone)]
pub struct BetaSchedule {
    kind: BetaKind,
    meta: BetaMeta,
}

fn check_open_unit(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value: v,
            range: "(0, 1)",
        })
    }
}

impl BetaSchedule {
    pub fn power_law(q: f64) -> Result<Self> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::OutOfRange {
                name: "q",
                value: q,
                range: "(0, 1]",
            });
        }
        Ok(BetaSchedule {
            kind: BetaKind::PowerLaw { q },
            meta: BetaMeta {
                sum_diverges: true,
                sum_of_squares_diverges: q <= 0.5,
                tends_to_zero: true,
            },
        })
    }

    pub fn constant(value: f64) -> Result<Self> {
        check_open_unit("beta", value)?;
        Ok(BetaSchedule {
            kind: BetaKind::Constant { value },
            meta: BetaMeta {
                sum_diverges: true,
                sum_of_squares_diverges: true,
                tends_to_zero: false,
            },
        })
    }

    /// A finite list carries no asymptotic guarantee, so every flag is false.
    pub fn list(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("beta list is empty".into()));
        }
        for &v in &values {
            check_open_unit("beta", v)?;
        }
        Ok(BetaSchedule {
            kind: BetaKind::List(values),
            meta: BetaMeta {
                sum_diverges: false,
                sum_of_squares_diverges: false,
                tends_to_zero: false,
            },
        })
    }

    pub fn custom(f: impl Fn(usize) -> f64 + Send + Sync + 'static, meta: BetaMeta) -> Self {
        BetaSchedule {
            kind: BetaKind::Custom(Arc::new(f)),
            meta,
        }
    }

    pub fn kind(&self) -> &BetaKind {
        &self.kind
    }

    pub fn meta(&self) -> BetaMeta {
        self.meta
    }

    /// `beta_n` for `n >= 1`.
    pub fn beta(&self, n: usize) -> Result<f64> {
        let v = match &self.kind {
            BetaKind::PowerLaw { q } => ((n + 1) as f64).powf(-q),
            BetaKind::Constant { value } => *value,
            BetaKind::List(values) => values[n.saturating_sub(1).min(values.len() - 1)],
            BetaKind::Custom(f) => f(n),
        };
        check_open_unit("beta_n", v)?;
        Ok(v)
    }
}

#[derive(Debug, Clone)]
pub struct HalpernProblem {
    pub space: ModelSpace,
    pub mappings: Vec<Mapping>,
    pub w_schedule: WSchedule,
    pub beta: BetaSchedule,
    pub u: SpacePoint,
    pub x1: SpacePoint,
    /// `P_F u`, when known.
    pub oracle_target: Option<SpacePoint>,
    pub max_iters: usize,
    pub stop_tolerance: f64,
    /// Keep every `stride`-th row of the trace (plus the final point).
    /// Step invariants are still monitored at every step.
    pub stride: usize,
}

impl HalpernProblem {
    pub fn validate(&self) -> Result<()> {
        if self.mappings.is_empty() {
            return Err(Error::InvalidArgument("no mappings".into()));
        }
        if self.mappings.len() != self.w_schedule.r() {
            return Err(Error::InvalidArgument(format!(
                "{} mappings but the W schedule has r = {}",
                self.mappings.len(),
                self.w_schedule.r()
            )));
        }
        self.space.validate(&self.u)?;
        self.space.validate(&self.x1)?;
        if let Some(p) = &self.oracle_target {
            self.space.validate(p)?;
        }
        if !(self.stop_tolerance >= 0.0 && self.stop_tolerance.is_finite()) {
            return Err(Error::OutOfRange {
                name: "stop_tolerance",
                value: self.stop_tolerance,
                range: "[0, inf)",
            });
        }
        if self.stride == 0 {
            return Err(Error::InvalidArgument("stride must be at least 1".into()));
        }
        Ok(())
    }
}

/// `combine(beta_n, u, W x)`.
pub fn halpern_step(
    space: &ModelSpace,
    u: &SpacePoint,
    x: &SpacePoint,
    w: &Mapping,
    beta_n: f64,
) -> Result<SpacePoint> {
    check_open_unit("beta_n", beta_n)?;
    let wx = w.apply(x)?;
    space.combine(beta_n, u, &wx)
}

/// `(gamma_n, t_n)` for the step whose W-image is `w_image`.
pub fn diagnostics_gamma_t(
    space: &ModelSpace,
    u: &SpacePoint,
    w_image: &SpacePoint,
    beta_n: f64,
    p: &SpacePoint,
) -> Result<(f64, f64)> {
    let d = space.dist(u, w_image)?;
    let d_up = space.dist(u, p)?;
    gamma_t(d, d_up, beta_n)
}

fn gamma_t(d: f64, d_up: f64, beta: f64) -> Result<(f64, f64)> {
    if d >= FRAC_PI_2 {
        return Err(Error::Undefined(format!("d(u, W x) = {d} is not below pi/2")));
    }
    let gamma = if d <= COINCIDENT_EPS {
        beta
    } else {
        1.0 - ((1.0 - beta) * d).sin() / d.sin()
    };
    let t = 1.0 - d_up.cos() / (d.sin() * (0.5 * beta * d).tan() + d.cos());
    Ok((gamma, t))
}

/// One retained trace record. Step quantities (`beta`, `gamma`, `t`,
/// `lyap_slack`, `d_u_w`) are NaN on the final row, which holds the last
/// point only; oracle quantities are NaN without an oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub n: usize,
    pub beta: f64,
    pub x: Vec<f64>,
    pub d_oracle: f64,
    pub s: f64,
    pub gamma: f64,
    pub t: f64,
    pub lyap_slack: f64,
    /// Empty when residuals were not computed for this row.
    pub residuals: Vec<f64>,
    pub d_u_w: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub ambient_dim: usize,
    pub r: usize,
    pub stride: usize,
    pub rows: Vec<TraceRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    OracleTolerance,
    Stationary,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    /// The configured space has diameter below pi/2.
    pub a: bool,
    /// `d(u, p) < pi/4` and `d(u, p) + d(x1, p) < pi/2`; unknown without an oracle.
    pub b: Option<bool>,
    /// `sum beta_n^2 = inf`.
    pub c: bool,
    pub warnings: Vec<String>,
}

impl ConditionReport {
    pub fn any(&self) -> bool {
        self.a || self.b == Some(true) || self.c
    }
}

pub fn check_conditions(problem: &HalpernProblem) -> ConditionReport {
    let a = problem.space.diameter_bound().is_some_and(|d| d < FRAC_PI_2);
    let b = problem.oracle_target.as_ref().map(|p| {
        let du = problem.space.dist_unchecked(&problem.u, p);
        let dx = problem.space.dist_unchecked(&problem.x1, p);
        du < FRAC_PI_4 && du + dx < FRAC_PI_2
    });
    let meta = problem.beta.meta();
    let c = meta.sum_of_squares_diverges;
    let mut warnings = Vec::new();
    if !(a || b == Some(true) || c) {
        warnings.push("none of the conditions (a), (b), (c) holds; convergence is not guaranteed".into());
    }
    if !meta.tends_to_zero {
        warnings.push("beta_n is not known to tend to 0".into());
    }
    if !meta.sum_diverges {
        warnings.push("sum of beta_n is not known to diverge".into());
    }
    ConditionReport { a, b, c, warnings }
}

/// Worst-case margins of the step inequalities over a run with an oracle.
/// Violations are reported as positive numbers; 0 means the bound held.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub steps_checked: usize,
    /// Steps with `d(u, W x) >= pi/2`, where `gamma_n`/`t_n` are undefined.
    pub undefined_steps: usize,
    pub min_lyapunov_slack: f64,
    pub max_lyapunov_violation: f64,
    pub lyapunov_failures: usize,
    pub max_fejer_violation: f64,
    pub max_boundedness_violation: f64,
    /// Against `beta_n^2 pi^2 / 16`.
    pub max_gamma_c_violation: f64,
    /// Against `beta_n cos M`, `M = max d(u, W_n x_n)`.
    pub max_gamma_a_violation: f64,
    pub max_d_u_w: f64,
}

impl MonitorReport {
    fn empty() -> Self {
        MonitorReport {
            steps_checked: 0,
            undefined_steps: 0,
            min_lyapunov_slack: f64::INFINITY,
            max_lyapunov_violation: 0.0,
            lyapunov_failures: 0,
            max_fejer_violation: 0.0,
            max_boundedness_violation: 0.0,
            max_gamma_c_violation: 0.0,
            max_gamma_a_violation: 0.0,
            max_d_u_w: 0.0,
        }
    }

    pub fn lyapunov_holds(&self) -> bool {
        self.max_lyapunov_violation <= LYAPUNOV_TOL
    }

    pub fn fejer_holds(&self) -> bool {
        self.max_fejer_violation <= FEJER_TOL
    }

    pub fn boundedness_holds(&self) -> bool {
        self.max_boundedness_violation <= BOUNDEDNESS_TOL
    }

    pub fn gamma_c_holds(&self) -> bool {
        self.max_gamma_c_violation <= GAMMA_TOL
    }

    pub fn gamma_a_holds(&self) -> bool {
        self.max_gamma_a_violation <= GAMMA_TOL
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KasaharaReport {
    pub window_rows: usize,
    pub per_mapping: Vec<f64>,
    pub max_residual: f64,
    pub threshold: f64,
    /// `None` when no pass claim is made: beta_n does not tend to 0, or the
    /// window holds no residuals.
    pub pass: Option<bool>,
}

pub const KASAHARA_THRESHOLD: f64 = 1e-2;

/// `max_i d(T_i x_n, x_n)` over the final 10% of the retained rows.
pub fn kasahara_diagnostic(trace: &IterationTrace, beta: BetaMeta, threshold: f64) -> KasaharaReport {
    let rows: Vec<&TraceRow> = trace.rows.iter().filter(|r| r.residuals.len() == trace.r).collect();
    let window = rows.len().div_ceil(10);
    let mut per_mapping = vec![0.0_f64; trace.r];
    for row in &rows[rows.len() - window..] {
        for (m, &v) in per_mapping.iter_mut().zip(&row.residuals) {
            *m = m.max(v);
        }
    }
    let max_residual = per_mapping.iter().copied().fold(0.0, f64::max);
    let pass = (window > 0 && beta.tends_to_zero).then_some(max_residual <= threshold);
    KasaharaReport {
        window_rows: window,
        per_mapping,
        max_residual,
        threshold,
        pass,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub final_point: SpacePoint,
    /// Number of steps taken.
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub final_d_oracle: Option<f64>,
    pub conditions: ConditionReport,
    /// Present when an oracle target was given.
    pub monitor: Option<MonitorReport>,
    pub kasahara: KasaharaReport,
}

impl RunReport {
    pub fn converged(&self) -> bool {
        self.stop_reason != StopReason::MaxIters
    }
}

struct OracleState<'a> {
    p: &'a SpacePoint,
    cos_up: f64,
    d_up: f64,
    bound: f64,
    monitor: MonitorReport,
    steps: Vec<(f64, f64)>,
}

fn non_finite(step: usize, what: &str) -> Error {
    Error::NonFinite {
        step,
        what: what.into(),
    }
}

pub fn run(problem: &HalpernProblem) -> Result<(IterationTrace, RunReport)> {
    problem.validate()?;
    let space = &problem.space;
    let u = &problem.u;
    let conditions = check_conditions(problem);
    let mut oracle = problem.oracle_target.as_ref().map(|p| {
        let d_up = space.dist_unchecked(u, p);
        OracleState {
            p,
            cos_up: d_up.cos(),
            d_up,
            bound: d_up.max(space.dist_unchecked(&problem.x1, p)),
            monitor: MonitorReport::empty(),
            steps: Vec::new(),
        }
    });
    let mut trace = IterationTrace {
        ambient_dim: space.ambient_dim(),
        r: problem.mappings.len(),
        stride: problem.stride,
        rows: Vec::new(),
    };

    let mut x = problem.x1.clone();
    let mut n = 1;
    let mut d_x = oracle.as_ref().map(|o| space.dist_unchecked(&x, o.p));
    let stop_reason = loop {
        if let Some(d) = d_x {
            if d < problem.stop_tolerance {
                break StopReason::OracleTolerance;
            }
        }
        if n > problem.max_iters {
            break StopReason::MaxIters;
        }
        let alphas = problem.w_schedule.alphas(n)?;
        let beta = problem.beta.beta(n)?;
        let wx = apply_w(space, &problem.mappings, &alphas, &x)?;
        if !wx.is_finite() {
            return Err(non_finite(n, "W_n x_n"));
        }
        let next = space.combine(beta, u, &wx)?;
        if !next.is_finite() {
            return Err(non_finite(n, "x_{n+1}"));
        }
        let d_u_w = space.dist_unchecked(u, &wx);
        let keep = (n - 1) % problem.stride == 0;

        let mut row = TraceRow {
            n,
            beta,
            x: Vec::new(),
            d_oracle: f64::NAN,
            s: f64::NAN,
            gamma: f64::NAN,
            t: f64::NAN,
            lyap_slack: f64::NAN,
            residuals: Vec::new(),
            d_u_w,
        };

        let mut stationary = false;
        if let Some(o) = oracle.as_mut() {
            let d_now = d_x.unwrap_or(f64::NAN);
            let d_next = space.dist_unchecked(&next, o.p);
            let s = 1.0 - d_now.cos();
            let s_next = 1.0 - d_next.cos();
            row.d_oracle = d_now;
            row.s = s;
            let m = &mut o.monitor;
            m.steps_checked += 1;
            m.max_d_u_w = m.max_d_u_w.max(d_u_w);
            match gamma_t(d_u_w, o.d_up, beta) {
                Ok((gamma, t)) => {
                    let slack = (1.0 - gamma) * s + gamma * t - s_next;
                    row.gamma = gamma;
                    row.t = t;
                    row.lyap_slack = slack;
                    m.min_lyapunov_slack = m.min_lyapunov_slack.min(slack);
                    m.max_lyapunov_violation = m.max_lyapunov_violation.max(-slack);
                    if slack < -LYAPUNOV_TOL {
                        m.lyapunov_failures += 1;
                    }
                    m.max_gamma_c_violation = m.max_gamma_c_violation.max(beta * beta * PI * PI / 16.0 - gamma);
                    o.steps.push((beta, gamma));
                }
                Err(_) => m.undefined_steps += 1,
            }
            let floor = o.cos_up.min(d_now.cos());
            m.max_fejer_violation = m.max_fejer_violation.max(floor - d_next.cos());
            m.max_boundedness_violation = m.max_boundedness_violation.max(d_next - o.bound);
            d_x = Some(d_next);
        } else {
            let displacement = space.dist_unchecked(&x, &next);
            if displacement < problem.stop_tolerance {
                row.residuals = residuals(space, &problem.mappings, &x)?;
                stationary = row.residuals.iter().all(|&v| v < problem.stop_tolerance);
            }
        }
        if keep {
            if row.residuals.is_empty() {
                row.residuals = residuals(space, &problem.mappings, &x)?;
            }
            row.x = std::mem::replace(&mut x, next).into_coords();
            trace.rows.push(row);
        } else {
            x = next;
        }
        n += 1;
        if stationary {
            break StopReason::Stationary;
        }
    };

    let final_d_oracle = d_x;
    let final_residuals = residuals(space, &problem.mappings, &x)?;
    trace.rows.push(TraceRow {
        n,
        beta: f64::NAN,
        x: x.coords().to_vec(),
        d_oracle: final_d_oracle.unwrap_or(f64::NAN),
        s: final_d_oracle.map_or(f64::NAN, |d| 1.0 - d.cos()),
        gamma: f64::NAN,
        t: f64::NAN,
        lyap_slack: f64::NAN,
        residuals: final_residuals,
        d_u_w: f64::NAN,
    });

    let monitor = oracle.map(|mut o| {
        let cos_m = o.monitor.max_d_u_w.cos();
        o.monitor.max_gamma_a_violation = o
            .steps
            .iter()
            .map(|&(beta, gamma)| beta * cos_m - gamma)
            .fold(0.0, f64::max);
        o.monitor
    });
    let kasahara = kasahara_diagnostic(&trace, problem.beta.meta(), KASAHARA_THRESHOLD);
    let report = RunReport {
        final_point: x,
        iterations: n - 1,
        stop_reason,
        final_d_oracle,
        conditions,
        monitor,
        kasahara,
    };
    Ok((trace, report))
}
