use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::solver::{argmin, grid, ArgminProblem, SolverSettings};
use super::{ConvexSet, PointSet};
use crate::error::{Error, Result};
use crate::geom::{ModelSpace, SpacePoint};

type FiniteFn = Arc<dyn Fn(&SpacePoint) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Term {
    DistanceTo(SpacePoint),
    Custom(FiniteFn),
}

impl Term {
    fn eval(&self, space: &ModelSpace, y: &SpacePoint) -> f64 {
        match self {
            Term::DistanceTo(c) => space.dist_unchecked(c, y),
            Term::Custom(f) => f(y),
        }
    }
}

/// A proper convex function `X -> (-inf, +inf]`, represented as a domain
/// (where it is finite) plus a weighted sum of finite terms.
#[derive(Clone)]
pub struct ConvexFunction {
    label: String,
    domain: Option<ConvexSet>,
    terms: Vec<(f64, Term)>,
    known_argmin: Option<PointSet>,
}

impl fmt::Debug for ConvexFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvexFunction")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("terms", &self.terms.len())
            .field("known_argmin", &self.known_argmin)
            .finish()
    }
}

impl ConvexFunction {
    /// `i_C`: zero on the set, `+inf` off it. Its minimizer set is `C`.
    pub fn indicator_of(set: ConvexSet) -> Self {
        ConvexFunction {
            label: "indicator".into(),
            known_argmin: Some(PointSet::Set(set.clone())),
            domain: Some(set),
            terms: Vec::new(),
        }
    }

    /// `y -> d(y, c)`, minimized exactly at `c`.
    pub fn distance_to(space: &ModelSpace, c: SpacePoint) -> Result<Self> {
        space.validate(&c)?;
        Ok(ConvexFunction {
            label: "distance".into(),
            domain: None,
            known_argmin: Some(PointSet::Points(vec![c.clone()])),
            terms: vec![(1.0, Term::DistanceTo(c))],
        })
    }

    /// A user-supplied finite function restricted to an optional domain.
    /// Convexity is the caller's claim; properness is checked on a probe grid.
    pub fn custom(
        space: &ModelSpace,
        label: impl Into<String>,
        f: impl Fn(&SpacePoint) -> f64 + Send + Sync + 'static,
        domain: Option<ConvexSet>,
        known_argmin: Option<PointSet>,
    ) -> Result<Self> {
        let func = ConvexFunction {
            label: label.into(),
            domain,
            terms: vec![(1.0, Term::Custom(Arc::new(f)))],
            known_argmin,
        };
        func.check_proper(space)?;
        Ok(func)
    }

    /// `sum_k w_k f_k` with positive weights. The domain is the intersection
    /// of the domains; a minimizer set is kept when some listed minimizer of
    /// one term minimizes every other term.
    pub fn weighted_sum(space: &ModelSpace, parts: &[(f64, ConvexFunction)]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidArgument("empty weighted sum".into()));
        }
        if let Some((w, _)) = parts.iter().find(|(w, _)| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::OutOfRange {
                name: "weight",
                value: *w,
                range: "(0, inf)",
            });
        }
        let hints: Vec<SpacePoint> = parts
            .iter()
            .filter_map(|(_, f)| match &f.known_argmin {
                Some(PointSet::Points(ps)) => Some(ps.clone()),
                _ => None,
            })
            .flatten()
            .collect();
        let mut domain: Option<ConvexSet> = None;
        for (_, f) in parts {
            if let Some(d) = &f.domain {
                domain = Some(match domain {
                    None => d.clone(),
                    Some(prev) => ConvexSet::intersect(space, &prev, d, &hints)?,
                });
            }
        }
        let terms = parts
            .iter()
            .flat_map(|(w, f)| f.terms.iter().map(move |(v, t)| (w * v, t.clone())))
            .collect();
        let common: Vec<SpacePoint> = hints
            .iter()
            .filter(|p| {
                parts
                    .iter()
                    .all(|(_, f)| f.known_argmin.as_ref().is_some_and(|a| a.contains(space, p, 1e-12)))
            })
            .cloned()
            .collect();
        let label = parts
            .iter()
            .map(|(w, f)| format!("{w}*{}", f.label))
            .collect::<Vec<_>>()
            .join(" + ");
        let func = ConvexFunction {
            label,
            domain,
            terms,
            known_argmin: (!common.is_empty()).then_some(PointSet::Points(common)),
        };
        func.check_proper(space)?;
        Ok(func)
    }

    fn check_proper(&self, space: &ModelSpace) -> Result<()> {
        let mut probes = grid(space, 200, None);
        if let Some(d) = &self.domain {
            probes.push(d.witness());
        }
        if probes.iter().any(|p| self.evaluate(space, p).is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "function {} is +inf on every probe point",
                self.label
            )))
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> Option<&ConvexSet> {
        self.domain.as_ref()
    }

    pub fn known_argmin(&self) -> Option<&PointSet> {
        self.known_argmin.as_ref()
    }

    /// Value at `y`; `+inf` off the domain.
    pub fn evaluate(&self, space: &ModelSpace, y: &SpacePoint) -> f64 {
        if let Some(d) = &self.domain {
            if !d.contains(space, y) {
                return f64::INFINITY;
            }
        }
        self.finite_part(space, y)
    }

    fn finite_part(&self, space: &ModelSpace, y: &SpacePoint) -> f64 {
        self.terms.iter().map(|(w, t)| w * t.eval(space, y)).sum()
    }
}

/// Distance penalty of a resolvent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Penalty {
    /// `tan d * sin d`
    TanSin,
    /// `-log cos d`
    LogCos,
}

impl Penalty {
    /// Penalty at distance `d`; `+inf` from `pi/2` on.
    pub fn eval(self, d: f64) -> f64 {
        if d >= FRAC_PI_2 {
            return f64::INFINITY;
        }
        match self {
            Penalty::TanSin => d.tan() * d.sin(),
            Penalty::LogCos => -d.cos().ln(),
        }
    }
}

/// `R_f x = argmin_y f(y) + penalty(d(y, x))`.
pub fn resolvent(
    space: &ModelSpace,
    f: &ConvexFunction,
    x: &SpacePoint,
    penalty: Penalty,
    settings: &SolverSettings,
) -> Result<SpacePoint> {
    space.validate(x)?;
    let objective = |y: &SpacePoint| f.finite_part(space, y) + penalty.eval(space.dist_unchecked(y, x));
    let mut anchors = vec![x.clone()];
    if let Some(d) = &f.domain {
        anchors.push(d.witness());
    }
    let problem = ArgminProblem {
        space,
        domain: f.domain.as_ref(),
        objective: &objective,
        anchors,
        grid_ball: space.is_sphere().then(|| (x.clone(), FRAC_PI_2)),
    };
    Ok(argmin(&problem, settings)?.point)
}

pub fn resolvent_tansin(
    space: &ModelSpace,
    f: &ConvexFunction,
    x: &SpacePoint,
    settings: &SolverSettings,
) -> Result<SpacePoint> {
    resolvent(space, f, x, Penalty::TanSin, settings)
}

pub fn resolvent_logcos(
    space: &ModelSpace,
    f: &ConvexFunction,
    x: &SpacePoint,
    settings: &SolverSettings,
) -> Result<SpacePoint> {
    resolvent(space, f, x, Penalty::LogCos, settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prox::{project_cap, Cap};

    fn s2() -> ModelSpace {
        ModelSpace::sphere(2).unwrap()
    }

    #[test]
    fn indicator_values() {
        let s = s2();
        let set = ConvexSet::cap(&s, SpacePoint::axis(3, 2), 0.3).unwrap();
        let f = ConvexFunction::indicator_of(set.clone());
        assert_eq!(f.evaluate(&s, &SpacePoint::axis(3, 2)), 0.0);
        assert_eq!(f.evaluate(&s, &SpacePoint::axis(3, 0)), f64::INFINITY);
        assert_eq!(f.known_argmin(), Some(&PointSet::Set(set)));
    }

    #[test]
    fn resolvent_of_zero_is_identity() {
        let s = s2();
        let zero = ConvexFunction::custom(&s, "zero", |_| 0.0, None, Some(PointSet::Whole)).unwrap();
        let x = s.point_from_direction(vec![0.4, -0.1, 0.8]).unwrap();
        for pen in [Penalty::TanSin, Penalty::LogCos] {
            let r = resolvent(&s, &zero, &x, pen, &SolverSettings::default()).unwrap();
            assert!(s.dist(&r, &x).unwrap() < 1e-6, "{pen:?}");
        }
    }

    #[test]
    fn resolvent_of_indicator_is_projection() {
        let s = s2();
        let cap = Cap::new(&s, s.point_from_direction(vec![0.0, 0.3, 1.0]).unwrap(), 0.4).unwrap();
        let f = ConvexFunction::indicator_of(ConvexSet::Cap(cap.clone()));
        let x = s.point_from_direction(vec![0.8, 0.1, 0.6]).unwrap();
        let p = project_cap(&s, &cap, &x).unwrap();
        for pen in [Penalty::TanSin, Penalty::LogCos] {
            let r = resolvent(&s, &f, &x, pen, &SolverSettings::default()).unwrap();
            assert!(s.dist(&r, &p).unwrap() < 1e-4, "{pen:?}");
        }
    }

    #[test]
    fn resolvent_of_distance_at_its_center() {
        let s = s2();
        let c = s.point_from_direction(vec![0.1, 0.1, 1.0]).unwrap();
        let f = ConvexFunction::distance_to(&s, c.clone()).unwrap();
        let r = resolvent_tansin(&s, &f, &c, &SolverSettings::default()).unwrap();
        assert!(s.dist(&r, &c).unwrap() < 1e-6);
        let r = resolvent_logcos(&s, &f, &c, &SolverSettings::default()).unwrap();
        assert!(s.dist(&r, &c).unwrap() < 1e-6);
    }

    #[test]
    fn weighted_sum_keeps_common_minimizer() {
        let s = s2();
        let c = s.point_from_direction(vec![0.1, 0.0, 1.0]).unwrap();
        let set = ConvexSet::cap(&s, SpacePoint::axis(3, 2), 0.5).unwrap();
        let sum = ConvexFunction::weighted_sum(
            &s,
            &[
                (1.0, ConvexFunction::indicator_of(set)),
                (2.0, ConvexFunction::distance_to(&s, c.clone()).unwrap()),
            ],
        )
        .unwrap();
        assert_eq!(sum.known_argmin(), Some(&PointSet::Points(vec![c.clone()])));
        assert!(
            (sum.evaluate(&s, &SpacePoint::axis(3, 2)) - 2.0 * s.dist(&c, &SpacePoint::axis(3, 2)).unwrap()).abs()
                < 1e-15
        );
        assert_eq!(sum.evaluate(&s, &SpacePoint::axis(3, 0)), f64::INFINITY);
    }

    #[test]
    fn improper_function_is_rejected() {
        let s = s2();
        assert!(ConvexFunction::custom(&s, "inf", |_| f64::INFINITY, None, None).is_err());
    }

    #[test]
    fn penalty_blows_up_at_quarter_turn() {
        assert_eq!(Penalty::TanSin.eval(FRAC_PI_2), f64::INFINITY);
        assert_eq!(Penalty::LogCos.eval(2.0), f64::INFINITY);
        assert_eq!(Penalty::TanSin.eval(0.0), 0.0);
        assert_eq!(Penalty::LogCos.eval(0.0), 0.0);
    }
}
