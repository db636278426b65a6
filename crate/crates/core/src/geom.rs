//! Geodesic geometry of the two CAT(1) model spaces used throughout the
//! crate: the unit sphere `S^d` embedded in `R^(d+1)` and a closed segment
//! of the real line.
//!
//! Interpolation follows the convention `z = t x (+) (1 - t) y`, meaning the
//! point on the geodesic `[x, y]` with `d(x, z) = (1 - t) d(x, y)`. The
//! weight `t` sits on `x`: `t = 1` returns `x` and `t = 0` returns `y`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points closer than this are treated as coincident by [`ModelSpace::combine`].
pub const COINCIDENT_EPS: f64 = 1e-14;
/// Geodesics longer than `PI - ANTIPODAL_EPS` are rejected as non-unique.
pub const ANTIPODAL_EPS: f64 = 1e-9;
/// Tolerance on `|x| = 1` for sphere points.
pub const UNIT_NORM_TOL: f64 = 1e-12;

const REGION_TOL: f64 = 1e-9;

/// A point of a model space, stored by its ambient coordinates.
///
/// On `S^d` this is a unit vector of length `d + 1`; on a segment it is a
/// single scalar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpacePoint(Vec<f64>);

impl SpacePoint {
    /// Wraps raw coordinates without validation. Use [`ModelSpace::point`]
    /// for checked construction.
    pub fn from_coords(coords: Vec<f64>) -> Self {
        SpacePoint(coords)
    }

    pub fn scalar(value: f64) -> Self {
        SpacePoint(vec![value])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// `e_i` in `R^n` (zero-based axis index).
    pub fn axis(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        SpacePoint(v)
    }
}

/// Which model space a [`ModelSpace`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceKind {
    UnitSphere { dim: usize },
    Segment { lo: f64, hi: f64 },
}

/// A closed ball of the sphere that the space is restricted to.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub center: SpacePoint,
    pub radius: f64,
}

/// Descriptor of the ambient CAT(1) model space.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpace {
    kind: SpaceKind,
    region: Option<Region>,
}

impl ModelSpace {
    /// The unit sphere `S^dim`, `1 <= dim <= 10`.
    pub fn sphere(dim: usize) -> Result<Self> {
        if dim == 0 || dim > 10 {
            return Err(Error::InvalidSpace(format!(
                "sphere dimension must lie in 1..=10, got {dim}"
            )));
        }
        Ok(ModelSpace {
            kind: SpaceKind::UnitSphere { dim },
            region: None,
        })
    }

    /// The closed segment `[lo, hi]` of the real line.
    pub fn segment(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidSpace(format!(
                "segment requires lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(ModelSpace {
            kind: SpaceKind::Segment { lo, hi },
            region: None,
        })
    }

    /// Restricts a sphere to the closed cap `B(center, radius)`. The
    /// resulting diameter bound `2 * radius` must stay below `pi / 2`.
    pub fn with_region(mut self, center: SpacePoint, radius: f64) -> Result<Self> {
        let SpaceKind::UnitSphere { .. } = self.kind else {
            return Err(Error::InvalidSpace("regions are only supported on spheres".into()));
        };
        if !(radius > 0.0 && 2.0 * radius < FRAC_PI_2) {
            return Err(Error::OutOfRange {
                name: "region radius",
                value: radius,
                range: "(0, pi/4)",
            });
        }
        self.check_unit(&center)?;
        self.region = Some(Region { center, radius });
        Ok(self)
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn region(&self) -> Option<&Region> {
        self.region.as_ref()
    }

    pub fn is_sphere(&self) -> bool {
        matches!(self.kind, SpaceKind::UnitSphere { .. })
    }

    /// Number of ambient coordinates of a point.
    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            SpaceKind::UnitSphere { dim } => dim + 1,
            SpaceKind::Segment { .. } => 1,
        }
    }

    /// Intrinsic dimension (`d` for `S^d`, 1 for a segment).
    pub fn intrinsic_dim(&self) -> usize {
        match self.kind {
            SpaceKind::UnitSphere { dim } => dim,
            SpaceKind::Segment { .. } => 1,
        }
    }

    /// Configured sup of pairwise distances: twice the region radius on a
    /// restricted sphere, the length of a segment, `None` for a full sphere.
    pub fn diameter_bound(&self) -> Option<f64> {
        match (&self.kind, &self.region) {
            (SpaceKind::Segment { lo, hi }, _) => Some(hi - lo),
            (_, Some(region)) => Some(2.0 * region.radius),
            _ => None,
        }
    }

    fn check_dim(&self, p: &SpacePoint) -> Result<()> {
        let expected = self.ambient_dim();
        if p.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: p.len() });
        }
        Ok(())
    }

    fn check_unit(&self, p: &SpacePoint) -> Result<()> {
        self.check_dim(p)?;
        if !p.is_finite() {
            return Err(Error::InvalidPoint("non-finite coordinates".into()));
        }
        let norm = dot(p.coords(), p.coords()).sqrt();
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::InvalidPoint(format!("norm {norm} is not 1")));
        }
        Ok(())
    }

    /// Checks that `p` is a valid point of this space.
    pub fn validate(&self, p: &SpacePoint) -> Result<()> {
        match self.kind {
            SpaceKind::UnitSphere { .. } => {
                self.check_unit(p)?;
                if let Some(region) = &self.region {
                    let d = sphere_dist(region.center.coords(), p.coords());
                    if d > region.radius + REGION_TOL {
                        return Err(Error::InvalidPoint(format!(
                            "point lies at distance {d} from the region center, beyond radius {}",
                            region.radius
                        )));
                    }
                }
                Ok(())
            }
            SpaceKind::Segment { lo, hi } => {
                self.check_dim(p)?;
                let s = p.coords()[0];
                if !(s >= lo && s <= hi) {
                    return Err(Error::InvalidPoint(format!("{s} lies outside [{lo}, {hi}]")));
                }
                Ok(())
            }
        }
    }

    /// Checked constructor for a point of this space.
    pub fn point(&self, coords: Vec<f64>) -> Result<SpacePoint> {
        let p = SpacePoint(coords);
        self.validate(&p)?;
        Ok(p)
    }

    /// Like [`ModelSpace::point`] but rescales sphere coordinates to unit
    /// length first, so any nonzero direction is accepted.
    pub fn point_from_direction(&self, coords: Vec<f64>) -> Result<SpacePoint> {
        match self.kind {
            SpaceKind::UnitSphere { .. } => {
                self.check_dim(&SpacePoint(coords.clone()))?;
                let n = dot(&coords, &coords).sqrt();
                if !(n.is_finite() && n > 0.0) {
                    return Err(Error::InvalidPoint("zero or non-finite direction".into()));
                }
                self.point(coords.into_iter().map(|c| c / n).collect())
            }
            SpaceKind::Segment { .. } => self.point(coords),
        }
    }

    /// Geodesic distance in radians.
    pub fn dist(&self, x: &SpacePoint, y: &SpacePoint) -> Result<f64> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        Ok(self.dist_unchecked(x, y))
    }

    /// Distance without the dimension check, for inner loops where the
    /// points are known to belong to this space.
    pub fn dist_unchecked(&self, x: &SpacePoint, y: &SpacePoint) -> f64 {
        match self.kind {
            SpaceKind::UnitSphere { .. } => sphere_dist(x.coords(), y.coords()),
            SpaceKind::Segment { .. } => (x.coords()[0] - y.coords()[0]).abs(),
        }
    }

    /// The point `t x (+) (1 - t) y`.
    pub fn combine(&self, t: f64, x: &SpacePoint, y: &SpacePoint) -> Result<SpacePoint> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::OutOfRange {
                name: "t",
                value: t,
                range: "[0, 1]",
            });
        }
        self.check_dim(x)?;
        self.check_dim(y)?;
        if t == 1.0 {
            return Ok(x.clone());
        }
        if t == 0.0 {
            return Ok(y.clone());
        }
        match self.kind {
            SpaceKind::UnitSphere { .. } => {
                let theta = sphere_dist(x.coords(), y.coords());
                if theta < COINCIDENT_EPS {
                    return Ok(x.clone());
                }
                if theta >= PI - ANTIPODAL_EPS {
                    return Err(Error::Antipodal(theta));
                }
                let s = theta.sin();
                let wx = (t * theta).sin() / s;
                let wy = ((1.0 - t) * theta).sin() / s;
                let mut z: Vec<f64> = x
                    .coords()
                    .iter()
                    .zip(y.coords())
                    .map(|(a, b)| wx * a + wy * b)
                    .collect();
                normalize_in_place(&mut z);
                Ok(SpacePoint(z))
            }
            SpaceKind::Segment { .. } => Ok(SpacePoint(vec![t * x.coords()[0] + (1.0 - t) * y.coords()[0]])),
        }
    }

    fn check_perimeter(&self, x: &SpacePoint, y: &SpacePoint, z: &SpacePoint) -> Result<(f64, f64, f64)> {
        let dxy = self.dist(x, y)?;
        let dyz = self.dist(y, z)?;
        let dxz = self.dist(x, z)?;
        let perimeter = dxy + dyz + dxz;
        if perimeter >= 2.0 * PI {
            return Err(Error::Perimeter(perimeter));
        }
        Ok((dxy, dyz, dxz))
    }

    /// LHS minus RHS of the spherical comparison inequality
    /// `cos d(v,z) sin d(x,y) >= cos d(x,z) sin(t d(x,y)) + cos d(y,z) sin((1-t) d(x,y))`
    /// with `v = t x (+) (1 - t) y`. Zero up to round-off on the model sphere.
    pub fn comparison_residual(&self, t: f64, x: &SpacePoint, y: &SpacePoint, z: &SpacePoint) -> Result<f64> {
        let v = self.combine(t, x, y)?;
        self.comparison_residual_at(&v, t, x, y, z)
    }

    /// [`ModelSpace::comparison_residual`] for a caller-supplied interpolant `v`.
    pub fn comparison_residual_at(
        &self,
        v: &SpacePoint,
        t: f64,
        x: &SpacePoint,
        y: &SpacePoint,
        z: &SpacePoint,
    ) -> Result<f64> {
        let (dxy, dyz, dxz) = self.check_perimeter(x, y, z)?;
        let dvz = self.dist(v, z)?;
        let lhs = dvz.cos() * dxy.sin();
        let rhs = dxz.cos() * (t * dxy).sin() + dyz.cos() * ((1.0 - t) * dxy).sin();
        Ok(lhs - rhs)
    }

    /// `cos d(v,z) - [t cos d(x,z) + (1-t) cos d(y,z)]` with `v = t x (+) (1-t) y`.
    ///
    /// Nonnegative whenever `cos d(x,z)` and `cos d(y,z)` are nonnegative;
    /// it can go negative for obtuse configurations on the sphere.
    pub fn convexity_residual(&self, t: f64, x: &SpacePoint, y: &SpacePoint, z: &SpacePoint) -> Result<f64> {
        let v = self.combine(t, x, y)?;
        self.convexity_residual_at(&v, t, x, y, z)
    }

    pub fn convexity_residual_at(
        &self,
        v: &SpacePoint,
        t: f64,
        x: &SpacePoint,
        y: &SpacePoint,
        z: &SpacePoint,
    ) -> Result<f64> {
        let (_, dyz, dxz) = self.check_perimeter(x, y, z)?;
        let dvz = self.dist(v, z)?;
        Ok(dvz.cos() - (t * dxz.cos() + (1.0 - t) * dyz.cos()))
    }

    /// Orthonormal basis of the tangent space at `y`.
    pub fn tangent_basis(&self, y: &SpacePoint) -> Vec<Vec<f64>> {
        match self.kind {
            SpaceKind::Segment { .. } => vec![vec![1.0]],
            SpaceKind::UnitSphere { dim } => {
                let n = dim + 1;
                let mut basis: Vec<Vec<f64>> = Vec::with_capacity(dim);
                // Gram-Schmidt over the standard axes, skipping the axis most
                // aligned with y.
                let skip = (0..n)
                    .max_by(|&a, &b| y.coords()[a].abs().total_cmp(&y.coords()[b].abs()))
                    .unwrap_or(0);
                for axis in (0..n).filter(|&i| i != skip) {
                    let mut v = vec![0.0; n];
                    v[axis] = 1.0;
                    let py = dot(&v, y.coords());
                    for (vi, yi) in v.iter_mut().zip(y.coords()) {
                        *vi -= py * yi;
                    }
                    for b in &basis {
                        let pb = dot(&v, b);
                        for (vi, bi) in v.iter_mut().zip(b) {
                            *vi -= pb * bi;
                        }
                    }
                    normalize_in_place(&mut v);
                    basis.push(v);
                }
                basis
            }
        }
    }

    /// Follows the geodesic from `y` with initial tangent `v` for length `|v|`.
    /// On a segment the result is not clamped.
    pub fn exp_map(&self, y: &SpacePoint, v: &[f64]) -> SpacePoint {
        match self.kind {
            SpaceKind::Segment { .. } => SpacePoint(vec![y.coords()[0] + v[0]]),
            SpaceKind::UnitSphere { .. } => {
                let len = dot(v, v).sqrt();
                if len == 0.0 {
                    return y.clone();
                }
                let (s, c) = len.sin_cos();
                let mut z: Vec<f64> = y.coords().iter().zip(v).map(|(yi, vi)| c * yi + s * vi / len).collect();
                normalize_in_place(&mut z);
                SpacePoint(z)
            }
        }
    }
}

/// True iff `sin(delta) >= sin(alpha delta) + sin((1 - alpha) delta)`.
///
/// Only `delta = 0` satisfies this on `[0, pi/2]` for `alpha` in `(0, 1)`.
/// The comparison is made through [`sin_inequality_gap`], which has no
/// cancellation, so no slack is needed.
pub fn sin_inequality_holds(delta: f64, alpha: f64) -> Result<bool> {
    Ok(sin_inequality_gap(delta, alpha)? <= 0.0)
}

/// `sin(alpha delta) + sin((1 - alpha) delta) - sin(delta)`, evaluated as
/// `4 sin(delta/2) sin(alpha delta/2) sin((1 - alpha) delta/2)`.
pub fn sin_inequality_gap(delta: f64, alpha: f64) -> Result<f64> {
    if !(0.0..=FRAC_PI_2).contains(&delta) {
        return Err(Error::OutOfRange {
            name: "delta",
            value: delta,
            range: "[0, pi/2]",
        });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            range: "(0, 1)",
        });
    }
    Ok(4.0 * (0.5 * delta).sin() * (0.5 * alpha * delta).sin() * (0.5 * (1.0 - alpha) * delta).sin())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn normalize_in_place(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|c| *c /= n);
    }
}

/// `2 atan2(|x - y|, |x + y|)`: accurate for both nearly equal and nearly
/// antipodal unit vectors.
pub(crate) fn sphere_dist(x: &[f64], y: &[f64]) -> f64 {
    let (mut diff, mut sum) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        diff += (a - b) * (a - b);
        sum += (a + b) * (a + b);
    }
    2.0 * diff.sqrt().atan2(sum.sqrt())
}
