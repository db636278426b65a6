//! Convex sets and functions on the model spaces, metric projections, and
//! the two resolvents `argmin f(y) + tan d(y,x) sin d(y,x)` and
//! `argmin f(y) - log cos d(y,x)`.

mod function;
mod solver;

pub use function::{resolvent, resolvent_logcos, resolvent_tansin, ConvexFunction, Penalty};
pub use solver::{argmin, grid, ArgminProblem, Solution, SolverSettings};

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::geom::{dot, normalize_in_place, ModelSpace, SpaceKind, SpacePoint, ANTIPODAL_EPS};

/// Membership tolerance used by [`ConvexSet::contains`].
pub const MEMBERSHIP_TOL: f64 = 1e-10;

const RETRACT_SWEEPS: usize = 200;
const RETRACT_TOL: f64 = 1e-12;

/// A closed spherical cap `{y : d(y, center) <= radius}` with `radius < pi/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cap {
    pub center: SpacePoint,
    pub radius: f64,
}

impl Cap {
    pub fn new(space: &ModelSpace, center: SpacePoint, radius: f64) -> Result<Self> {
        if !space.is_sphere() {
            return Err(Error::InvalidSpace("caps live on spheres".into()));
        }
        if !(0.0..FRAC_PI_2).contains(&radius) {
            return Err(Error::OutOfRange {
                name: "cap radius",
                value: radius,
                range: "[0, pi/2)",
            });
        }
        space.validate(&center)?;
        Ok(Cap { center, radius })
    }

    fn contains_within(&self, space: &ModelSpace, y: &SpacePoint, tol: f64) -> bool {
        space.dist_unchecked(&self.center, y) <= self.radius + tol
    }
}

/// Closed convex subsets supported by the projection and argmin machinery.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet {
    Cap(Cap),
    /// Intersection of caps, carrying a point known to lie in every cap.
    Intersection {
        caps: Vec<Cap>,
        witness: SpacePoint,
    },
    /// A closed interval of a segment space.
    Interval {
        lo: f64,
        hi: f64,
    },
}

impl ConvexSet {
    pub fn cap(space: &ModelSpace, center: SpacePoint, radius: f64) -> Result<Self> {
        Ok(ConvexSet::Cap(Cap::new(space, center, radius)?))
    }

    /// Intersection of caps. The witness must lie in every cap; emptiness is
    /// never inferred.
    pub fn intersection(space: &ModelSpace, caps: Vec<Cap>, witness: SpacePoint) -> Result<Self> {
        if caps.is_empty() {
            return Err(Error::InvalidArgument("intersection of zero caps".into()));
        }
        space.validate(&witness)?;
        if let Some(i) = caps
            .iter()
            .position(|c| !c.contains_within(space, &witness, MEMBERSHIP_TOL))
        {
            return Err(Error::InvalidArgument(format!("witness does not lie in cap {}", i + 1)));
        }
        Ok(ConvexSet::Intersection { caps, witness })
    }

    pub fn interval(space: &ModelSpace, lo: f64, hi: f64) -> Result<Self> {
        let SpaceKind::Segment { lo: slo, hi: shi } = space.kind() else {
            return Err(Error::InvalidSpace("intervals live on segments".into()));
        };
        if !(lo <= hi && lo >= slo && hi <= shi) {
            return Err(Error::InvalidArgument(format!(
                "interval [{lo}, {hi}] is empty or leaves [{slo}, {shi}]"
            )));
        }
        Ok(ConvexSet::Interval { lo, hi })
    }

    /// Membership with tolerance [`MEMBERSHIP_TOL`].
    pub fn contains(&self, space: &ModelSpace, y: &SpacePoint) -> bool {
        self.contains_within(space, y, MEMBERSHIP_TOL)
    }

    pub fn contains_within(&self, space: &ModelSpace, y: &SpacePoint, tol: f64) -> bool {
        match self {
            ConvexSet::Cap(cap) => cap.contains_within(space, y, tol),
            ConvexSet::Intersection { caps, .. } => caps.iter().all(|c| c.contains_within(space, y, tol)),
            ConvexSet::Interval { lo, hi } => {
                let s = y.coords()[0];
                s >= lo - tol && s <= hi + tol
            }
        }
    }

    /// A point of the set.
    pub fn witness(&self) -> SpacePoint {
        match self {
            ConvexSet::Cap(cap) => cap.center.clone(),
            ConvexSet::Intersection { witness, .. } => witness.clone(),
            ConvexSet::Interval { lo, hi } => SpacePoint::scalar(0.5 * (lo + hi)),
        }
    }

    /// Pulls `y` back into the set: exact projection for a cap or an
    /// interval. For an intersection, cyclic projections onto the violated
    /// caps (exact when a single cap is violated), then, if that has not
    /// landed inside, the last feasible point on the geodesic from the
    /// witness. Returns `None` when `y` is antipodal to the pulling point.
    pub fn retract(&self, space: &ModelSpace, y: &SpacePoint) -> Option<SpacePoint> {
        if self.contains_within(space, y, 0.0) {
            return Some(y.clone());
        }
        match self {
            ConvexSet::Cap(cap) => project_cap(space, cap, y).ok(),
            ConvexSet::Interval { lo, hi } => Some(SpacePoint::scalar(y.coords()[0].clamp(*lo, *hi))),
            ConvexSet::Intersection { caps, witness } => {
                let mut z = y.clone();
                for _ in 0..RETRACT_SWEEPS {
                    match caps.iter().find(|c| !c.contains_within(space, &z, RETRACT_TOL)) {
                        None => return Some(z),
                        Some(c) => match project_cap(space, c, &z) {
                            Ok(next) => z = next,
                            Err(_) => break,
                        },
                    }
                }
                let y = &z;
                if space.dist_unchecked(witness, y) >= PI - ANTIPODAL_EPS {
                    return None;
                }
                // z(s) = s y (+) (1 - s) witness, feasible at s = 0.
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                let mut best = witness.clone();
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let z = space.combine(mid, y, witness).ok()?;
                    if self.contains_within(space, &z, 0.0) {
                        lo = mid;
                        best = z;
                    } else {
                        hi = mid;
                    }
                }
                Some(best)
            }
        }
    }

    /// Intersection of two sets. Two interval sets intersect exactly; sets
    /// built from caps need a common point, searched among the witnesses,
    /// the extra candidates, and a fixed sphere lattice.
    pub fn intersect(space: &ModelSpace, a: &ConvexSet, b: &ConvexSet, extra: &[SpacePoint]) -> Result<ConvexSet> {
        match (a, b) {
            (ConvexSet::Interval { lo: l1, hi: h1 }, ConvexSet::Interval { lo: l2, hi: h2 }) => {
                ConvexSet::interval(space, l1.max(*l2), h1.min(*h2))
            }
            (ConvexSet::Interval { .. }, _) | (_, ConvexSet::Interval { .. }) => {
                Err(Error::InvalidArgument("cannot intersect an interval with caps".into()))
            }
            _ => {
                let caps: Vec<Cap> = [a, b]
                    .into_iter()
                    .flat_map(|s| match s {
                        ConvexSet::Cap(c) => vec![c.clone()],
                        ConvexSet::Intersection { caps, .. } => caps.clone(),
                        ConvexSet::Interval { .. } => unreachable!(),
                    })
                    .collect();
                let candidates = [a.witness(), b.witness()]
                    .into_iter()
                    .chain(extra.iter().cloned())
                    .chain(grid(space, 20_000, None));
                for w in candidates {
                    if caps.iter().all(|c| c.contains_within(space, &w, 0.0)) {
                        return ConvexSet::intersection(space, caps, w);
                    }
                }
                Err(Error::InvalidArgument(
                    "no common point found for the intersection".into(),
                ))
            }
        }
    }
}

/// A declared subset of the space: fixed-point sets of mappings and
/// minimizer sets of functions.
#[derive(Debug, Clone, PartialEq)]
pub enum PointSet {
    /// Every point of the space.
    Whole,
    /// A finite list of points.
    Points(Vec<SpacePoint>),
    Set(ConvexSet),
    /// Intersection of the listed sets.
    Common(Vec<PointSet>),
}

impl PointSet {
    pub fn contains(&self, space: &ModelSpace, y: &SpacePoint, tol: f64) -> bool {
        match self {
            PointSet::Whole => true,
            PointSet::Points(ps) => ps.iter().any(|p| space.dist_unchecked(p, y) <= tol),
            PointSet::Set(s) => s.contains_within(space, y, tol),
            PointSet::Common(parts) => parts.iter().all(|p| p.contains(space, y, tol)),
        }
    }
}

/// Metric projection onto a cap: `x` itself when inside, otherwise the point
/// of the geodesic from the center towards `x` at distance `radius`.
pub fn project_cap(space: &ModelSpace, cap: &Cap, x: &SpacePoint) -> Result<SpacePoint> {
    let d = space.dist(&cap.center, x)?;
    if d <= cap.radius {
        return Ok(x.clone());
    }
    if d >= PI - ANTIPODAL_EPS {
        return Err(Error::Antipodal(d));
    }
    let c = cap.center.coords();
    let along = dot(x.coords(), c);
    let mut w: Vec<f64> = x.coords().iter().zip(c).map(|(xi, ci)| xi - along * ci).collect();
    normalize_in_place(&mut w);
    let (s, co) = cap.radius.sin_cos();
    let mut z: Vec<f64> = c.iter().zip(&w).map(|(ci, wi)| co * ci + s * wi).collect();
    normalize_in_place(&mut z);
    Ok(SpacePoint::from_coords(z))
}

/// Metric projection onto any supported convex set. Intersections go through
/// the numerical [`argmin`] of `d(x, .)` over the set.
pub fn project_convex(
    space: &ModelSpace,
    set: &ConvexSet,
    x: &SpacePoint,
    settings: &SolverSettings,
) -> Result<SpacePoint> {
    Ok(project_convex_solution(space, set, x, settings)?.point)
}

/// [`project_convex`] with the solver bookkeeping (grid value, evaluations).
pub fn project_convex_solution(
    space: &ModelSpace,
    set: &ConvexSet,
    x: &SpacePoint,
    settings: &SolverSettings,
) -> Result<Solution> {
    space.validate(x)?;
    let exact = |p: SpacePoint| {
        let value = space.dist_unchecked(x, &p);
        Solution {
            point: p,
            value,
            grid_value: value,
            evaluations: 0,
        }
    };
    match set {
        ConvexSet::Cap(cap) => Ok(exact(project_cap(space, cap, x)?)),
        ConvexSet::Interval { lo, hi } => Ok(exact(SpacePoint::scalar(x.coords()[0].clamp(*lo, *hi)))),
        ConvexSet::Intersection { .. } => {
            if set.contains(space, x) {
                return Ok(exact(x.clone()));
            }
            let objective = |y: &SpacePoint| space.dist_unchecked(x, y);
            let problem = ArgminProblem {
                space,
                domain: Some(set),
                objective: &objective,
                anchors: vec![set.witness()],
                grid_ball: None,
            };
            argmin(&problem, settings)
        }
    }
}

/// Points on the boundary circle of a cap on `S^2`, for variational checks.
pub fn cap_boundary_grid(space: &ModelSpace, cap: &Cap, count: usize) -> Vec<SpacePoint> {
    let basis = space.tangent_basis(&cap.center);
    (0..count)
        .map(|k| {
            let phi = std::f64::consts::TAU * k as f64 / count as f64;
            let v: Vec<f64> = (0..space.ambient_dim())
                .map(|i| cap.radius * (phi.cos() * basis[0][i] + phi.sin() * basis[1][i]))
                .collect();
            space.exp_map(&cap.center, &v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{rng, uniform_in_cap, uniform_on_sphere};
    use approx::assert_abs_diff_eq;

    fn s2() -> ModelSpace {
        ModelSpace::sphere(2).unwrap()
    }

    #[test]
    fn project_cap_examples() {
        let s = s2();
        let cap = Cap::new(&s, SpacePoint::axis(3, 0), 0.5).unwrap();
        let inside = s.point(vec![0.2f64.cos(), 0.0, 0.2f64.sin()]).unwrap();
        assert_eq!(project_cap(&s, &cap, &inside).unwrap(), inside);

        let p = project_cap(&s, &cap, &SpacePoint::axis(3, 1)).unwrap();
        assert_abs_diff_eq!(p.coords()[0], 0.5f64.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(p.coords()[1], 0.5f64.sin(), epsilon = 1e-15);
        assert_abs_diff_eq!(p.coords()[2], 0.0, epsilon = 1e-15);

        // Dense grid over the cap: no cap point is closer to e2 than the
        // analytic projection.
        let target = SpacePoint::axis(3, 1);
        let best = s.dist(&target, &p).unwrap();
        let mut r = rng(5);
        for _ in 0..20_000 {
            let y = uniform_in_cap(&s, &cap.center, cap.radius, &mut r);
            assert!(s.dist(&target, &y).unwrap() >= best - 1e-12);
        }

        let point_cap = Cap::new(&s, SpacePoint::axis(3, 2), 0.0).unwrap();
        assert_eq!(
            project_cap(&s, &point_cap, &SpacePoint::axis(3, 0)).unwrap(),
            point_cap.center
        );

        let anti = SpacePoint::from_coords(vec![-1.0, 0.0, 0.0]);
        assert!(matches!(project_cap(&s, &cap, &anti), Err(Error::Antipodal(_))));
    }

    #[test]
    fn cap_projection_is_variationally_optimal() {
        let s = s2();
        let cap = Cap::new(&s, s.point_from_direction(vec![0.2, 0.3, 0.9]).unwrap(), 0.6).unwrap();
        let boundary = cap_boundary_grid(&s, &cap, 2000);
        let mut r = rng(9);
        for _ in 0..200 {
            let x = uniform_on_sphere(3, &mut r);
            if s.dist(&x, &cap.center).unwrap() > 3.0 {
                continue;
            }
            let px = project_cap(&s, &cap, &x).unwrap();
            let dx = s.dist(&x, &px).unwrap();
            for y in &boundary {
                assert!(dx <= s.dist(&x, y).unwrap() + 1e-9);
            }
        }
    }

    #[test]
    fn interval_projection_clamps() {
        let seg = ModelSpace::segment(-1.0, 1.0).unwrap();
        let set = ConvexSet::interval(&seg, -0.7, 0.7).unwrap();
        let p = project_convex(&seg, &set, &SpacePoint::scalar(0.9), &SolverSettings::default()).unwrap();
        assert_eq!(p.coords()[0], 0.7);
        assert!(ConvexSet::interval(&seg, 0.5, 0.2).is_err());
    }

    #[test]
    fn intersection_requires_witness() {
        let s = s2();
        let a = Cap::new(&s, SpacePoint::axis(3, 0), 0.3).unwrap();
        let b = Cap::new(&s, SpacePoint::axis(3, 1), 0.3).unwrap();
        assert!(ConvexSet::intersection(&s, vec![a.clone(), b], SpacePoint::axis(3, 0)).is_err());
        let set = ConvexSet::intersection(&s, vec![a.clone()], SpacePoint::axis(3, 0)).unwrap();
        assert!(set.contains(&s, &SpacePoint::axis(3, 0)));
    }

    #[test]
    fn retract_lands_on_boundary_of_intersection() {
        let s = s2();
        let a = Cap::new(&s, s.point_from_direction(vec![1.0, 0.0, 1.0]).unwrap(), 0.6).unwrap();
        let b = Cap::new(&s, s.point_from_direction(vec![0.0, 1.0, 1.0]).unwrap(), 0.6).unwrap();
        let w = s.point_from_direction(vec![0.5, 0.5, 1.0]).unwrap();
        let set = ConvexSet::intersection(&s, vec![a.clone(), b.clone()], w).unwrap();
        let y = SpacePoint::axis(3, 0);
        let z = set.retract(&s, &y).unwrap();
        assert!(set.contains_within(&s, &z, 0.0));
        let da = s.dist(&a.center, &z).unwrap() - a.radius;
        let db = s.dist(&b.center, &z).unwrap() - b.radius;
        assert!(da.max(db).abs() < 1e-12);
    }
}
