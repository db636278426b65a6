//! Randomized property batteries for the sphere geometry.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{sin_inequality_gap, ModelSpace, SpacePoint};
use crate::sampling::{rng, uniform_on_sphere, SeededRng};

pub const COMPARISON_TOL: f64 = 1e-9;
pub const CONVEXITY_TOL: f64 = 1e-12;
pub const METRIC_TOL: f64 = 1e-10;
pub const INTERPOLATION_TOL: f64 = 1e-10;
pub const REPARAM_TOL: f64 = 1e-9;
pub const CORRUPTION: f64 = 1e-3;

/// The interpolation under test, so a deliberately broken one can be
/// swapped in.
pub type CombineFn = dyn Fn(&ModelSpace, f64, &SpacePoint, &SpacePoint) -> Result<SpacePoint> + Sync;

pub fn exact_combine(space: &ModelSpace, t: f64, x: &SpacePoint, y: &SpacePoint) -> Result<SpacePoint> {
    space.combine(t, x, y)
}

/// `combine` followed by a geodesic step of length [`CORRUPTION`].
pub fn corrupted_combine(space: &ModelSpace, t: f64, x: &SpacePoint, y: &SpacePoint) -> Result<SpacePoint> {
    let z = space.combine(t, x, y)?;
    let basis = space.tangent_basis(&z);
    let v: Vec<f64> = basis[0].iter().map(|b| CORRUPTION * b).collect();
    Ok(space.exp_map(&z, &v))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryCheck {
    pub name: String,
    pub samples: usize,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    pub bound: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub count: usize,
    pub seed: u64,
    pub corrupted: bool,
    pub checks: Vec<BatteryCheck>,
    pub pass: bool,
}

struct Triple {
    t: f64,
    x: SpacePoint,
    y: SpacePoint,
    z: SpacePoint,
}

/// A random `(t, x, y, z)` on `S^2` with perimeter below `2 pi`; with
/// `acute`, also `d(x,z), d(y,z) <= pi/2`.
fn draw_triple(space: &ModelSpace, g: &mut SeededRng, acute: bool) -> Triple {
    use rand::Rng;
    loop {
        let x = uniform_on_sphere(3, g);
        let y = uniform_on_sphere(3, g);
        let z = uniform_on_sphere(3, g);
        let t: f64 = g.random_range(0.0..=1.0);
        let dxy = space.dist_unchecked(&x, &y);
        let dyz = space.dist_unchecked(&y, &z);
        let dxz = space.dist_unchecked(&x, &z);
        if dxy + dyz + dxz >= 2.0 * PI || dxy >= PI - 1e-6 {
            continue;
        }
        if acute && (dxz > FRAC_PI_2 || dyz > FRAC_PI_2) {
            continue;
        }
        return Triple { t, x, y, z };
    }
}

fn check(name: &str, samples: usize, worst: f64, bound: &str, pass: bool) -> BatteryCheck {
    BatteryCheck {
        name: name.into(),
        samples,
        worst,
        bound: bound.into(),
        pass,
    }
}

/// Runs every battery with `count` samples each on `S^2`. With `count = 0`
/// the report is empty and passes.
pub fn geometry_battery(count: usize, seed: u64, combine: &CombineFn, corrupted: bool) -> Result<GeometryReport> {
    let mut checks = Vec::new();
    if count > 0 {
        let space = ModelSpace::sphere(2)?;
        let mut g = rng(seed);
        checks.push(comparison_battery(&space, &mut g, count, combine)?);
        checks.push(convexity_battery(&space, &mut g, count, combine)?);
        checks.extend(metric_battery(&space, &mut g, count));
        checks.extend(interpolation_battery(&space, &mut g, count, combine)?);
        checks.push(sin_inequality_sweep(count)?);
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(GeometryReport {
        count,
        seed,
        corrupted,
        checks,
        pass,
    })
}

/// `|comparison_residual| <= 1e-9` on admissible triples.
pub fn comparison_battery(
    space: &ModelSpace,
    g: &mut SeededRng,
    count: usize,
    combine: &CombineFn,
) -> Result<BatteryCheck> {
    let mut worst = 0.0_f64;
    for _ in 0..count {
        let Triple { t, x, y, z } = draw_triple(space, g, false);
        let v = combine(space, t, &x, &y)?;
        worst = worst.max(space.comparison_residual_at(&v, t, &x, &y, &z)?.abs());
    }
    Ok(check(
        "comparison",
        count,
        worst,
        "|r| <= 1e-9",
        worst <= COMPARISON_TOL,
    ))
}

/// `convexity_residual >= -1e-12` on admissible triples whose cosines
/// `cos d(x,z)`, `cos d(y,z)` are nonnegative.
pub fn convexity_battery(
    space: &ModelSpace,
    g: &mut SeededRng,
    count: usize,
    combine: &CombineFn,
) -> Result<BatteryCheck> {
    let mut worst = f64::INFINITY;
    for _ in 0..count {
        let Triple { t, x, y, z } = draw_triple(space, g, true);
        let v = combine(space, t, &x, &y)?;
        worst = worst.min(space.convexity_residual_at(&v, t, &x, &y, &z)?);
    }
    Ok(check("convexity", count, worst, "r >= -1e-12", worst >= -CONVEXITY_TOL))
}

fn metric_battery(space: &ModelSpace, g: &mut SeededRng, count: usize) -> Vec<BatteryCheck> {
    let mut sym = 0.0_f64;
    let mut tri = f64::NEG_INFINITY;
    for _ in 0..count {
        let x = uniform_on_sphere(3, g);
        let y = uniform_on_sphere(3, g);
        let z = uniform_on_sphere(3, g);
        let dxy = space.dist_unchecked(&x, &y);
        sym = sym.max((dxy - space.dist_unchecked(&y, &x)).abs());
        let excess = space.dist_unchecked(&x, &z) - dxy - space.dist_unchecked(&y, &z);
        tri = tri.max(excess);
    }
    vec![
        check("symmetry", count, sym, "|d(x,y) - d(y,x)| <= 1e-10", sym <= METRIC_TOL),
        check(
            "triangle",
            count,
            tri,
            "d(x,z) - d(x,y) - d(y,z) <= 1e-10",
            tri <= METRIC_TOL,
        ),
    ]
}

fn interpolation_battery(
    space: &ModelSpace,
    g: &mut SeededRng,
    count: usize,
    combine: &CombineFn,
) -> Result<Vec<BatteryCheck>> {
    use rand::Rng;
    let mut law = 0.0_f64;
    let mut reparam = 0.0_f64;
    for _ in 0..count {
        let Triple { t, x, y, .. } = draw_triple(space, g, false);
        let s: f64 = g.random_range(0.0..=1.0);
        let d = space.dist_unchecked(&x, &y);
        let v = combine(space, t, &x, &y)?;
        law = law
            .max((space.dist_unchecked(&x, &v) - (1.0 - t) * d).abs())
            .max((space.dist_unchecked(&y, &v) - t * d).abs());
        let along = combine(space, 1.0 - s, &x, &v)?;
        let direct = combine(space, 1.0 - s * (1.0 - t), &x, &y)?;
        reparam = reparam.max(space.dist_unchecked(&along, &direct));
    }
    Ok(vec![
        check(
            "interpolation_law",
            count,
            law,
            "|d(x,v) - (1-t) d(x,y)| <= 1e-10",
            law <= INTERPOLATION_TOL,
        ),
        check("reparametrization", count, reparam, "d <= 1e-9", reparam <= REPARAM_TOL),
    ])
}

/// Evaluates the sine inequality on `points` evenly spaced values of
/// `delta` in `(1e-4, pi/2]` for each `alpha` in `{0.1, ..., 0.9}`. The
/// check passes when it holds nowhere; `worst` is the smallest gap seen.
pub fn sin_inequality_sweep(points: usize) -> Result<BatteryCheck> {
    if points == 0 {
        return Err(Error::InvalidArgument("sweep needs at least one point".into()));
    }
    let lo = 1e-4;
    let mut worst = f64::INFINITY;
    let mut holds = 0usize;
    for k in 1..=9 {
        let alpha = k as f64 / 10.0;
        for i in 1..=points {
            let delta = lo + (FRAC_PI_2 - lo) * i as f64 / points as f64;
            let gap = sin_inequality_gap(delta, alpha)?;
            if gap <= 0.0 {
                holds += 1;
            }
            worst = worst.min(gap);
        }
    }
    Ok(check(
        "sin_inequality_sweep",
        9 * points,
        worst,
        "sin(a d) + sin((1-a) d) - sin d > 0",
        holds == 0,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_battery_passes() {
        let rep = geometry_battery(2000, 7, &exact_combine, false).unwrap();
        assert!(rep.pass, "{rep:#?}");
        assert_eq!(rep.checks.len(), 7);
    }

    #[test]
    fn corrupted_battery_fails() {
        let rep = geometry_battery(200, 7, &corrupted_combine, true).unwrap();
        assert!(!rep.pass);
        let failing: Vec<&str> = rep.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        assert!(failing.contains(&"comparison"));
        assert!(failing.contains(&"interpolation_law"));
    }

    #[test]
    fn empty_battery() {
        let rep = geometry_battery(0, 1, &exact_combine, false).unwrap();
        assert!(rep.checks.is_empty());
        assert!(rep.pass);
    }

    #[test]
    fn corruption_size() {
        let s = ModelSpace::sphere(2).unwrap();
        let x = SpacePoint::axis(3, 0);
        let y = SpacePoint::axis(3, 1);
        let a = exact_combine(&s, 0.3, &x, &y).unwrap();
        let b = corrupted_combine(&s, 0.3, &x, &y).unwrap();
        assert!((s.dist(&a, &b).unwrap() - CORRUPTION).abs() < 1e-12);
    }

    #[test]
    fn sweep_never_holds() {
        let c = sin_inequality_sweep(1000).unwrap();
        assert!(c.pass);
        assert!(c.worst > 0.0);
    }
}
