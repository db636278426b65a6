//! Two-phase derivative-free minimizer on the model spaces.
//!
//! Phase one evaluates a deterministic grid (Fibonacci lattice on `S^2`,
//! uniform points on a circle or a segment, a fixed pseudo-random cloud on
//! higher spheres), keeps the feasible points, and optionally zooms in with
//! successively finer local grids whose points are pulled into the domain. Phase two is a pattern search along
//! geodesics in the tangent directions at the incumbent, halving the step
//! down to `refine_tolerance`. Trial points that leave the domain are pulled
//! back with [`ConvexSet::retract`], which lets the search slide along the
//! boundary of a constraint.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::ConvexSet;
use crate::error::{Error, Result};
use crate::geom::{normalize_in_place, ModelSpace, SpaceKind, SpacePoint};
use crate::sampling::rng;

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;
const ZOOM_HALF_WIDTH: i32 = 8;
const ZOOM_FACTOR: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    /// Number of points of the global grid.
    pub coarse_grid_resolution: usize,
    /// Smallest geodesic step of the pattern search.
    pub refine_tolerance: f64,
    /// Cap on pattern-search sweeps.
    pub max_refine_iters: usize,
    /// When set, local grids are refined until their spacing (radians)
    /// drops to this value before the pattern search starts. Only used on
    /// spaces of intrinsic dimension at most 2.
    pub zoom_resolution: Option<f64>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            coarse_grid_resolution: 400,
            refine_tolerance: 1e-8,
            max_refine_iters: 20_000,
            zoom_resolution: None,
        }
    }
}

impl SolverSettings {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        if self.coarse_grid_resolution == 0 {
            return Err(Error::InvalidArgument("coarse_grid_resolution must be positive".into()));
        }
        if !(self.refine_tolerance > 0.0) {
            return Err(Error::InvalidArgument("refine_tolerance must be positive".into()));
        }
        if self.max_refine_iters == 0 {
            return Err(Error::InvalidArgument("max_refine_iters must be positive".into()));
        }
        if let Some(z) = self.zoom_resolution {
            if !(z > 0.0) {
                return Err(Error::InvalidArgument("zoom_resolution must be positive".into()));
            }
        }
        Ok(())
    }
}

/// A minimization problem: `objective` over `domain` (the whole space when
/// `None`). The objective may return `+inf`.
pub struct ArgminProblem<'a> {
    pub space: &'a ModelSpace,
    pub domain: Option<&'a ConvexSet>,
    pub objective: &'a dyn Fn(&SpacePoint) -> f64,
    /// Extra starting candidates evaluated alongside the grid.
    pub anchors: Vec<SpacePoint>,
    /// Restricts the global grid to an open ball `(center, radius)`.
    pub grid_ball: Option<(SpacePoint, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub point: SpacePoint,
    pub value: f64,
    /// Best objective value found by the grid phase (including zoom levels).
    pub grid_value: f64,
    pub evaluations: usize,
}

impl Solution {
    /// Improvement of the refinement over the best grid point.
    pub fn gap(&self) -> f64 {
        self.grid_value - self.value
    }
}

/// Deterministic grid of roughly `count` points, optionally restricted to a
/// ball.
pub fn grid(space: &ModelSpace, count: usize, ball: Option<(&SpacePoint, f64)>) -> Vec<SpacePoint> {
    let count = count.max(1);
    let pts: Vec<SpacePoint> = match space.kind() {
        SpaceKind::Segment { lo, hi } => {
            if count == 1 {
                vec![SpacePoint::scalar(0.5 * (lo + hi))]
            } else {
                (0..count)
                    .map(|i| SpacePoint::scalar(lo + (hi - lo) * i as f64 / (count - 1) as f64))
                    .collect()
            }
        }
        SpaceKind::UnitSphere { dim: 1 } => (0..count)
            .map(|i| {
                let phi = std::f64::consts::TAU * i as f64 / count as f64;
                SpacePoint::from_coords(vec![phi.cos(), phi.sin()])
            })
            .collect(),
        SpaceKind::UnitSphere { dim: 2 } => (0..count)
            .map(|i| {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let phi = GOLDEN_ANGLE * i as f64;
                SpacePoint::from_coords(vec![r * phi.cos(), r * phi.sin(), z])
            })
            .collect(),
        SpaceKind::UnitSphere { dim } => {
            let mut r = rng(0x5eed_0000 + dim as u64);
            (0..count)
                .map(|_| {
                    let mut v: Vec<f64> = (0..=dim).map(|_| r.sample(StandardNormal)).collect();
                    normalize_in_place(&mut v);
                    SpacePoint::from_coords(v)
                })
                .collect()
        }
    };
    match ball {
        None => pts,
        Some((center, radius)) => pts
            .into_iter()
            .filter(|p| space.dist_unchecked(center, p) < radius)
            .collect(),
    }
}

/// Typical spacing of [`grid`] with `count` points.
fn grid_spacing(space: &ModelSpace, count: usize) -> f64 {
    let count = count.max(2) as f64;
    match space.kind() {
        SpaceKind::Segment { lo, hi } => (hi - lo) / (count - 1.0),
        SpaceKind::UnitSphere { dim: 1 } => std::f64::consts::TAU / count,
        SpaceKind::UnitSphere { dim: 2 } => (4.0 * PI / count).sqrt(),
        SpaceKind::UnitSphere { dim } => PI * count.powf(-1.0 / dim as f64),
    }
}

struct Evaluator<'a, 'b> {
    problem: &'b ArgminProblem<'a>,
    count: usize,
}

impl Evaluator<'_, '_> {
    /// Objective value, `+inf` off the domain or off a segment space.
    fn value(&mut self, y: &SpacePoint) -> f64 {
        if let SpaceKind::Segment { lo, hi } = self.problem.space.kind() {
            let s = y.coords()[0];
            if !(s >= lo && s <= hi) {
                return f64::INFINITY;
            }
        }
        if let Some(domain) = self.problem.domain {
            if !domain.contains(self.problem.space, y) {
                return f64::INFINITY;
            }
        }
        self.count += 1;
        let v = (self.problem.objective)(y);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }

    fn pull_in(&self, y: SpacePoint) -> Option<SpacePoint> {
        let space = self.problem.space;
        let y = match space.kind() {
            SpaceKind::Segment { lo, hi } => SpacePoint::scalar(y.coords()[0].clamp(lo, hi)),
            _ => y,
        };
        match self.problem.domain {
            Some(domain) if !domain.contains(space, &y) => domain.retract(space, &y),
            _ => Some(y),
        }
    }
}

/// Minimizes the problem's objective. Fails when no grid point or anchor
/// is feasible with a finite value.
pub fn argmin(problem: &ArgminProblem<'_>, settings: &SolverSettings) -> Result<Solution> {
    settings.validate()?;
    let space = problem.space;
    let mut eval = Evaluator { problem, count: 0 };

    let ball = problem.grid_ball.as_ref().map(|(c, r)| (c, *r));
    let mut feasible = 0usize;
    let mut best: Option<(SpacePoint, f64)> = None;
    for y in problem
        .anchors
        .iter()
        .cloned()
        .chain(grid(space, settings.coarse_grid_resolution, ball))
    {
        let v = eval.value(&y);
        if v.is_finite() {
            feasible += 1;
            if best.as_ref().is_none_or(|(_, bv)| v < *bv) {
                best = Some((y, v));
            }
        }
    }
    let Some((mut x, mut fx)) = best else {
        return Err(Error::Solver(if problem.domain.is_some() && feasible == 0 {
            "no feasible grid point found".into()
        } else {
            "objective is +inf on every grid point".into()
        }));
    };

    let mut step = grid_spacing(space, settings.coarse_grid_resolution);
    let basis_dim = space.intrinsic_dim();

    if let Some(target) = settings.zoom_resolution {
        if basis_dim <= 2 {
            while step > target {
                step = (step / ZOOM_FACTOR).max(target);
                let basis = space.tangent_basis(&x);
                let center = x.clone();
                let offsets: Vec<Vec<i32>> = if basis_dim == 1 {
                    (-ZOOM_HALF_WIDTH..=ZOOM_HALF_WIDTH).map(|i| vec![i]).collect()
                } else {
                    (-ZOOM_HALF_WIDTH..=ZOOM_HALF_WIDTH)
                        .flat_map(|i| (-ZOOM_HALF_WIDTH..=ZOOM_HALF_WIDTH).map(move |j| vec![i, j]))
                        .collect()
                };
                for off in offsets {
                    let v = tangent_combination(&basis, &off.iter().map(|&k| k as f64 * step).collect::<Vec<_>>());
                    let Some(y) = eval.pull_in(space.exp_map(&center, &v)) else {
                        continue;
                    };
                    let fy = eval.value(&y);
                    if fy < fx {
                        x = y;
                        fx = fy;
                    }
                }
            }
        }
    }
    let grid_value = fx;

    // Pattern search.
    let mut sweeps = 0usize;
    while step >= settings.refine_tolerance && sweeps < settings.max_refine_iters {
        sweeps += 1;
        let basis = space.tangent_basis(&x);
        let mut improved = false;
        for dir in directions(&basis) {
            let v: Vec<f64> = dir.iter().map(|c| c * step).collect();
            let Some(y) = eval.pull_in(space.exp_map(&x, &v)) else {
                continue;
            };
            let fy = eval.value(&y);
            if fy < fx {
                x = y;
                fx = fy;
                improved = true;
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }

    Ok(Solution {
        point: x,
        value: fx,
        grid_value,
        evaluations: eval.count,
    })
}

fn tangent_combination(basis: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let n = basis[0].len();
    (0..n)
        .map(|i| basis.iter().zip(weights).map(|(b, w)| w * b[i]).sum())
        .collect()
}

/// `+-b_k` for every basis vector, plus the four diagonals on 2-d tangent
/// spaces.
fn directions(basis: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut dirs = Vec::with_capacity(2 * basis.len() + 4);
    for b in basis {
        dirs.push(b.clone());
        dirs.push(b.iter().map(|c| -c).collect());
    }
    if basis.len() == 2 {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (s0, s1) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            dirs.push(tangent_combination(basis, &[s0 * h, s1 * h]));
        }
    }
    dirs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prox::Cap;

    #[test]
    fn fibonacci_grid_covers_sphere() {
        let s = ModelSpace::sphere(2).unwrap();
        let g = grid(&s, 1000, None);
        assert_eq!(g.len(), 1000);
        for p in &g {
            s.validate(p).unwrap();
        }
        // Every axis has a grid point within roughly one spacing.
        let h = grid_spacing(&s, 1000);
        for i in 0..3 {
            let e = SpacePoint::axis(3, i);
            let nearest = g.iter().map(|p| s.dist(&e, p).unwrap()).fold(f64::INFINITY, f64::min);
            assert!(nearest < h, "axis {i}: {nearest} vs {h}");
        }
    }

    #[test]
    fn unconstrained_minimum_of_distance() {
        let s = ModelSpace::sphere(2).unwrap();
        let c = s.point_from_direction(vec![0.3, -0.5, 0.8]).unwrap();
        let f = |y: &SpacePoint| s.dist_unchecked(&c, y);
        let p = ArgminProblem {
            space: &s,
            domain: None,
            objective: &f,
            anchors: vec![],
            grid_ball: None,
        };
        let sol = argmin(&p, &SolverSettings::default()).unwrap();
        assert!(s.dist(&sol.point, &c).unwrap() < 1e-7);
        assert!(sol.gap() >= 0.0);
    }

    #[test]
    fn constrained_minimum_slides_along_boundary() {
        let s = ModelSpace::sphere(2).unwrap();
        let cap = Cap::new(&s, SpacePoint::axis(3, 2), 0.4).unwrap();
        let set = ConvexSet::Cap(cap.clone());
        let x = s.point_from_direction(vec![1.0, 0.2, 0.3]).unwrap();
        let f = |y: &SpacePoint| s.dist_unchecked(&x, y);
        let p = ArgminProblem {
            space: &s,
            domain: Some(&set),
            objective: &f,
            anchors: vec![],
            grid_ball: None,
        };
        let sol = argmin(&p, &SolverSettings::default()).unwrap();
        let exact = crate::prox::project_cap(&s, &cap, &x).unwrap();
        assert!(s.dist(&sol.point, &exact).unwrap() < 1e-7);
    }

    #[test]
    fn infeasible_everywhere_is_a_solver_failure() {
        let s = ModelSpace::sphere(2).unwrap();
        let f = |_: &SpacePoint| f64::INFINITY;
        let p = ArgminProblem {
            space: &s,
            domain: None,
            objective: &f,
            anchors: vec![],
            grid_ball: None,
        };
        assert!(matches!(argmin(&p, &SolverSettings::default()), Err(Error::Solver(_))));
    }

    #[test]
    fn segment_minimum() {
        let s = ModelSpace::segment(-0.7, 0.7).unwrap();
        let f = |y: &SpacePoint| (y.coords()[0] - 0.123).powi(2);
        let p = ArgminProblem {
            space: &s,
            domain: None,
            objective: &f,
            anchors: vec![],
            grid_ball: None,
        };
        let sol = argmin(&p, &SolverSettings::default()).unwrap();
        assert!((sol.point.coords()[0] - 0.123).abs() < 1e-7);
        // Minimum at the endpoint.
        let g = |y: &SpacePoint| y.coords()[0];
        let p = ArgminProblem {
            space: &s,
            domain: None,
            objective: &g,
            anchors: vec![],
            grid_ball: None,
        };
        assert_eq!(argmin(&p, &SolverSettings::default()).unwrap().point.coords()[0], -0.7);
    }

    #[test]
    fn zoom_tightens_grid_value() {
        let s = ModelSpace::sphere(2).unwrap();
        let c = s.point_from_direction(vec![0.1, 0.2, 0.9]).unwrap();
        let f = |y: &SpacePoint| s.dist_unchecked(&c, y);
        let p = ArgminProblem {
            space: &s,
            domain: None,
            objective: &f,
            anchors: vec![],
            grid_ball: None,
        };
        let settings = SolverSettings {
            zoom_resolution: Some(1e-6),
            ..SolverSettings::default()
        };
        let sol = argmin(&p, &settings).unwrap();
        assert!(sol.grid_value < 2e-6);
        assert!(sol.gap() < 2e-6);
    }
}
