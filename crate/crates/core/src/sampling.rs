//! Seeded random points on the model spaces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::geom::{normalize_in_place, ModelSpace, SpaceKind, SpacePoint};

/// The generator used everywhere a seed is recorded.
pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point on the full unit sphere with `n` ambient coordinates.
pub fn uniform_on_sphere<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SpacePoint {
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm2: f64 = v.iter().map(|c| c * c).sum();
        if norm2 > 1e-20 {
            normalize_in_place(&mut v);
            return SpacePoint::from_coords(v);
        }
    }
}

/// Uniform point in the closed cap `B(center, radius)`, by rejection from
/// the full sphere (direct inversion on `S^2`, where it is exact and cheap).
pub fn uniform_in_cap<R: Rng + ?Sized>(
    space: &ModelSpace,
    center: &SpacePoint,
    radius: f64,
    rng: &mut R,
) -> SpacePoint {
    let n = space.ambient_dim();
    if n == 3 {
        // On S^2 the height along the axis is uniform in [cos r, 1].
        let h: f64 = rng.random_range(radius.cos()..=1.0);
        let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let basis = space.tangent_basis(center);
        let ring = (1.0 - h * h).max(0.0).sqrt();
        let mut v: Vec<f64> = (0..3)
            .map(|i| h * center.coords()[i] + ring * (phi.cos() * basis[0][i] + phi.sin() * basis[1][i]))
            .collect();
        normalize_in_place(&mut v);
        return SpacePoint::from_coords(v);
    }
    loop {
        let p = uniform_on_sphere(n, rng);
        if space.dist_unchecked(center, &p) <= radius {
            return p;
        }
    }
}

/// Uniform point of the space: the whole sphere, the configured region of a
/// restricted sphere (by rejection), or the segment.
pub fn uniform_point<R: Rng + ?Sized>(space: &ModelSpace, rng: &mut R) -> SpacePoint {
    match space.kind() {
        SpaceKind::Segment { lo, hi } => SpacePoint::scalar(rng.random_range(lo..=hi)),
        SpaceKind::UnitSphere { .. } => match space.region() {
            None => uniform_on_sphere(space.ambient_dim(), rng),
            Some(region) => loop {
                let p = uniform_on_sphere(space.ambient_dim(), rng);
                if space.dist_unchecked(&region.center, &p) <= region.radius {
                    return p;
                }
            },
        },
    }
}
