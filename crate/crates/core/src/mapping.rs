//! Self-maps of a model space, the combinator `alpha T (+) (1 - alpha) I`,
//! and W-mappings built from a finite family.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{ModelSpace, SpaceKind, SpacePoint};
use crate::prox::{project_cap, resolvent, Cap, ConvexFunction, ConvexSet, Penalty, PointSet, SolverSettings};
use crate::sampling::{rng, uniform_point};

type Evaluator = Arc<dyn Fn(&SpacePoint) -> Result<SpacePoint> + Send + Sync>;

/// Properties a mapping is declared to have. They are set by the
/// constructors and never verified at runtime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MappingFlags {
    pub quasinonexpansive: bool,
    pub delta_demiclosed: bool,
    pub nonexpansive: bool,
}

/// An immutable self-map of a model space.
#[derive(Clone)]
pub struct Mapping {
    label: String,
    eval: Evaluator,
    fixed_set: Option<PointSet>,
    flags: MappingFlags,
}

impl fmt::Debug for Mapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Mapping")
            .field("label", &self.label)
            .field("fixed_set", &self.fixed_set)
            .field("flags", &self.flags)
            .finish()
    }
}

impl Mapping {
    pub fn from_fn(
        label: impl Into<String>,
        f: impl Fn(&SpacePoint) -> Result<SpacePoint> + Send + Sync + 'static,
        fixed_set: Option<PointSet>,
        flags: MappingFlags,
    ) -> Self {
        Mapping {
            label: label.into(),
            eval: Arc::new(f),
            fixed_set,
            flags,
        }
    }

    pub fn identity() -> Self {
        Mapping::from_fn(
            "identity",
            |x| Ok(x.clone()),
            Some(PointSet::Whole),
            MappingFlags {
                quasinonexpansive: true,
                delta_demiclosed: true,
                nonexpansive: true,
            },
        )
    }

    /// Metric projection onto a cap.
    pub fn cap_projection(space: &ModelSpace, cap: Cap) -> Self {
        let space = space.clone();
        let label = format!("cap_projection(r={})", cap.radius);
        let fixed = PointSet::Set(ConvexSet::Cap(cap.clone()));
        Mapping::from_fn(
            label,
            move |x| project_cap(&space, &cap, x),
            Some(fixed),
            MappingFlags {
                quasinonexpansive: true,
                delta_demiclosed: true,
                nonexpansive: true,
            },
        )
    }

    /// `x -> lambda p (+) (1 - lambda) x`, which shrinks `d(x, p)` by the
    /// factor `1 - lambda`. Fixed set `{p}` for `lambda > 0`.
    pub fn geodesic_contraction(space: &ModelSpace, p: SpacePoint, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::OutOfRange {
                name: "lambda",
                value: lambda,
                range: "[0, 1]",
            });
        }
        space.validate(&p)?;
        let fixed = if lambda > 0.0 {
            PointSet::Points(vec![p.clone()])
        } else {
            PointSet::Whole
        };
        let space = space.clone();
        Ok(Mapping::from_fn(
            format!("geodesic_contraction(lambda={lambda})"),
            move |x| space.combine(lambda, &p, x),
            Some(fixed),
            MappingFlags {
                quasinonexpansive: true,
                delta_demiclosed: true,
                nonexpansive: false,
            },
        ))
    }

    /// `x -> -x` on a segment symmetric about zero. Quasinonexpansive with
    /// `F = {0}`, yet not strongly quasinonexpansive.
    pub fn segment_negation(space: &ModelSpace) -> Result<Self> {
        match space.kind() {
            SpaceKind::Segment { lo, hi } if lo == -hi => Ok(Mapping::from_fn(
                "segment_negation",
                |x| Ok(SpacePoint::scalar(-x.coords()[0])),
                Some(PointSet::Points(vec![SpacePoint::scalar(0.0)])),
                MappingFlags {
                    quasinonexpansive: true,
                    delta_demiclosed: true,
                    nonexpansive: true,
                },
            )),
            _ => Err(Error::InvalidSpace("segment negation needs a segment [-h, h]".into())),
        }
    }

    /// The resolvent of `f` with the given penalty. Its fixed points are the
    /// minimizers of `f`.
    pub fn resolvent(
        space: &ModelSpace,
        f: ConvexFunction,
        penalty: Penalty,
        settings: SolverSettings,
    ) -> Result<Self> {
        settings.validate()?;
        let label = format!("resolvent_{}({})", penalty_name(penalty), f.label());
        let fixed = f.known_argmin().cloned();
        let space = space.clone();
        Ok(Mapping::from_fn(
            label,
            move |x| resolvent(&space, &f, x, penalty, &settings),
            fixed,
            MappingFlags {
                quasinonexpansive: true,
                delta_demiclosed: true,
                nonexpansive: false,
            },
        ))
    }

    pub fn apply(&self, x: &SpacePoint) -> Result<SpacePoint> {
        (self.eval)(x)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn flags(&self) -> MappingFlags {
        self.flags
    }

    pub fn fixed_set(&self) -> Option<&PointSet> {
        self.fixed_set.as_ref()
    }
}

fn penalty_name(p: Penalty) -> &'static str {
    match p {
        Penalty::TanSin => "tansin",
        Penalty::LogCos => "logcos",
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            range: "[0, 1]",
        });
    }
    Ok(())
}

/// `S = alpha T (+) (1 - alpha) I`, i.e. `S x = combine(alpha, T x, x)`.
pub fn convex_combine_with_identity(space: &ModelSpace, alpha: f64, t: &Mapping) -> Result<Mapping> {
    check_alpha(alpha)?;
    if !t.flags.quasinonexpansive {
        return Err(Error::InvalidArgument(format!(
            "{} is not declared quasinonexpansive",
            t.label
        )));
    }
    let flags = MappingFlags {
        quasinonexpansive: true,
        // For alpha > 0, d(Sx, x) = alpha d(Tx, x) and F(S) = F(T), so S
        // inherits demiclosedness; nonexpansive T also gives it directly.
        delta_demiclosed: alpha == 0.0 || t.flags.delta_demiclosed || t.flags.nonexpansive,
        nonexpansive: alpha == 0.0 || (alpha == 1.0 && t.flags.nonexpansive),
    };
    let fixed = if alpha > 0.0 {
        t.fixed_set.clone()
    } else {
        Some(PointSet::Whole)
    };
    let inner = t.clone();
    let space = space.clone();
    Ok(Mapping::from_fn(
        format!("{alpha}*{} (+) identity", t.label),
        move |x| {
            let tx = inner.apply(x)?;
            space.combine(alpha, &tx, x)
        },
        fixed,
        flags,
    ))
}

/// Evaluates the W-mapping generated by `mappings` and `alphas` at `x`:
/// `U_1 x = combine(a_1, T_1 x, x)`, `U_k x = combine(a_k, T_k U_{k-1} x, x)`,
/// `W = U_r`. Exactly one evaluation of each `T_k`.
pub fn apply_w(space: &ModelSpace, mappings: &[Mapping], alphas: &[f64], x: &SpacePoint) -> Result<SpacePoint> {
    if mappings.is_empty() {
        return Err(Error::InvalidArgument("W-mapping needs at least one mapping".into()));
    }
    if mappings.len() != alphas.len() {
        return Err(Error::InvalidArgument(format!(
            "{} mappings but {} coefficients",
            mappings.len(),
            alphas.len()
        )));
    }
    let mut u = x.clone();
    for (t, &alpha) in mappings.iter().zip(alphas) {
        check_alpha(alpha)?;
        let tu = t.apply(&u)?;
        u = space.combine(alpha, &tu, x)?;
    }
    Ok(u)
}

/// The W-mapping as a [`Mapping`]. Its declared fixed set is the common
/// fixed set of the family when every coefficient lies in `(0, 1)`.
pub fn build_w_mapping(space: &ModelSpace, mappings: &[Mapping], alphas: &[f64]) -> Result<Mapping> {
    if mappings.is_empty() {
        return Err(Error::InvalidArgument("W-mapping needs at least one mapping".into()));
    }
    if mappings.len() != alphas.len() {
        return Err(Error::InvalidArgument(format!(
            "{} mappings but {} coefficients",
            mappings.len(),
            alphas.len()
        )));
    }
    for &a in alphas {
        check_alpha(a)?;
    }
    let interior = alphas.iter().all(|&a| a > 0.0 && a < 1.0);
    let fixed = if interior {
        mappings
            .iter()
            .map(|m| m.fixed_set.clone())
            .collect::<Option<Vec<_>>>()
            .map(PointSet::Common)
    } else {
        None
    };
    let flags = MappingFlags {
        quasinonexpansive: mappings.iter().all(|m| m.flags.quasinonexpansive),
        delta_demiclosed: false,
        nonexpansive: false,
    };
    let label = format!(
        "W[{}]",
        mappings.iter().map(|m| m.label.as_str()).collect::<Vec<_>>().join(", ")
    );
    let mappings = mappings.to_vec();
    let alphas = alphas.to_vec();
    let space = space.clone();
    Ok(Mapping::from_fn(
        label,
        move |x| apply_w(&space, &mappings, &alphas, x),
        fixed,
        flags,
    ))
}

/// `[d(T_i x, x)]` for each mapping.
pub fn residuals(space: &ModelSpace, mappings: &[Mapping], x: &SpacePoint) -> Result<Vec<f64>> {
    mappings.iter().map(|t| space.dist(&t.apply(x)?, x)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasinonexpansiveReport {
    pub label: String,
    pub samples: usize,
    pub fixed_points: usize,
    pub seed: u64,
    /// `max_{x, p} d(T x, p) - d(x, p)`; `-inf` when nothing was sampled.
    pub max_violation: f64,
    pub pass: bool,
}

/// Falsification check of `d(T x, p) <= d(x, p)` on `samples` uniform
/// random points of the space against each listed fixed point.
pub fn sampled_quasinonexpansive_check(
    space: &ModelSpace,
    t: &Mapping,
    fixed_points: &[SpacePoint],
    samples: usize,
    seed: u64,
) -> Result<QuasinonexpansiveReport> {
    if fixed_points.is_empty() {
        return Err(Error::InvalidArgument("no fixed points to check against".into()));
    }
    let mut r = rng(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let x = uniform_point(space, &mut r);
        let tx = t.apply(&x)?;
        for p in fixed_points {
            worst = worst.max(space.dist(&tx, p)? - space.dist(&x, p)?);
        }
    }
    Ok(checked_report(t, samples, fixed_points.len(), seed, worst))
}

/// Same check over an explicit list of points (e.g. an exhaustive grid).
pub fn quasinonexpansive_on_points(
    space: &ModelSpace,
    t: &Mapping,
    fixed_points: &[SpacePoint],
    points: &[SpacePoint],
) -> Result<QuasinonexpansiveReport> {
    if fixed_points.is_empty() {
        return Err(Error::InvalidArgument("no fixed points to check against".into()));
    }
    let mut worst = f64::NEG_INFINITY;
    for x in points {
        let tx = t.apply(x)?;
        for p in fixed_points {
            worst = worst.max(space.dist(&tx, p)? - space.dist(x, p)?);
        }
    }
    Ok(checked_report(t, points.len(), fixed_points.len(), 0, worst))
}

fn checked_report(t: &Mapping, samples: usize, fixed: usize, seed: u64, worst: f64) -> QuasinonexpansiveReport {
    QuasinonexpansiveReport {
        label: t.label.clone(),
        samples,
        fixed_points: fixed,
        seed,
        max_violation: worst,
        pass: worst <= 1e-10,
    }
}

/// For each `x` in `xs`: the cosine ratio `cos d(x, p) / cos d(T x, p)` and the
/// residual `d(T x, x)`. A quasinonexpansive map whose ratio tends to 1 along a
/// sequence with residuals bounded away from zero is not strongly
/// quasinonexpansive.
pub fn cosine_ratio_log(space: &ModelSpace, t: &Mapping, xs: &[SpacePoint], p: &SpacePoint) -> Result<Vec<(f64, f64)>> {
    xs.iter()
        .map(|x| {
            let tx = t.apply(x)?;
            let ratio = space.dist(x, p)?.cos() / space.dist(&tx, p)?.cos();
            Ok((ratio, space.dist(&tx, x)?))
        })
        .collect()
}

/// How the coefficients `alpha_{n,i}` are produced.
#[derive(Clone)]
pub enum AlphaRule {
    Constant(Vec<f64>),
    /// `low` when `n + i` is even, `high` otherwise (`i` is 1-based).
    Alternating {
        low: f64,
        high: f64,
    },
    Custom(Arc<dyn Fn(usize, usize) -> f64 + Send + Sync>),
}

impl fmt::Debug for AlphaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaRule::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            AlphaRule::Alternating { low, high } => f
                .debug_struct("Alternating")
                .field("low", low)
                .field("high", high)
                .finish(),
            AlphaRule::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// Per-iteration W-mapping coefficients with the bound `alpha in [a, 1 - a]`.
#[derive(Debug, Clone)]
pub struct WSchedule {
    r: usize,
    a: f64,
    rule: AlphaRule,
}

impl WSchedule {
    pub fn new(r: usize, a: f64, rule: AlphaRule) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidArgument("W schedule needs r >= 1".into()));
        }
        if !(a > 0.0 && a < 0.5) {
            return Err(Error::InvalidArgument(format!("a must lie in (0, 1/2), got {a}")));
        }
        if let AlphaRule::Constant(v) = &rule {
            if v.len() != r {
                return Err(Error::InvalidArgument(format!(
                    "{} constant coefficients for r = {r}",
                    v.len()
                )));
            }
        }
        let sched = WSchedule { r, a, rule };
        // Static rules are checked up front.
        if !matches!(sched.rule, AlphaRule::Custom(_)) {
            sched.alphas(1)?;
            sched.alphas(2)?;
        }
        Ok(sched)
    }

    pub fn constant(values: Vec<f64>, a: f64) -> Result<Self> {
        WSchedule::new(values.len(), a, AlphaRule::Constant(values))
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Coefficients for iteration `n` (1-based); each must lie in `[a, 1 - a]`.
    pub fn alphas(&self, n: usize) -> Result<Vec<f64>> {
        let values: Vec<f64> = (1..=self.r)
            .map(|i| match &self.rule {
                AlphaRule::Constant(v) => v[i - 1],
                AlphaRule::Alternating { low, high } => {
                    if (n + i).is_multiple_of(2) {
                        *low
                    } else {
                        *high
                    }
                }
                AlphaRule::Custom(f) => f(n, i),
            })
            .collect();
        if let Some(&bad) = values.iter().find(|&&v| !(v >= self.a && v <= 1.0 - self.a)) {
            return Err(Error::OutOfRange {
                name: "alpha_{n,i}",
                value: bad,
                range: "[a, 1 - a]",
            });
        }
        Ok(values)
    }
}
