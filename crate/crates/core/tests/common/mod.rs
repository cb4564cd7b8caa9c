// Helpers shared by the integration test targets. Distances here are
// computed from coordinates directly so they can serve as oracles for the
// library's own geometry.
#![allow(dead_code)]

use mstats::geometry::{self, Manifold, Point, TangentVector};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Property-test settings without a regression file next to the sources.
pub fn config(cases: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config { cases, failure_persistence: None, ..Default::default() }
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn unit_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| gaussian(rng));
        let norm = v.norm();
        if norm > 1e-6 {
            return v / norm;
        }
    }
}

pub fn unit_complex(rng: &mut ChaCha8Rng, n: usize) -> DVector<Complex64> {
    loop {
        let v = DVector::from_fn(n, |_, _| Complex64::new(gaussian(rng), gaussian(rng)));
        let norm = v.norm();
        if norm > 1e-6 {
            return v.unscale(norm);
        }
    }
}

pub fn random_spd(rng: &mut ChaCha8Rng, p: usize) -> DMatrix<f64> {
    let b = DMatrix::from_fn(p, p, |_, _| gaussian(rng));
    &b * b.transpose() * 0.5 + DMatrix::identity(p, p) * 0.5
}

/// A point spread over the whole manifold (for SPD, a random well-conditioned matrix).
pub fn random_point(rng: &mut ChaCha8Rng, m: Manifold) -> Point {
    match m {
        Manifold::Spd { p, .. } => Point::from_flat(m, random_spd(rng, p).transpose().as_slice()).unwrap(),
        _ => mstats::bayes::sample_uniform(m, rng).unwrap(),
    }
}

/// Tangent vector at `p` with a uniformly random direction and norm `r`.
pub fn random_tangent(rng: &mut ChaCha8Rng, p: &Point, r: f64) -> TangentVector {
    let basis = geometry::tangent_basis(p);
    let c = unit_vector(rng, basis.len()) * r;
    TangentVector::from_coordinates(&basis, &c)
}

/// Great-circle distance between unit vectors.
pub fn sphere_dist(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let c = x.dot(y);
    (y - x * c).norm().atan2(c)
}

/// Fubini-Study distance between unit complex vectors.
pub fn cp_dist(z: &DVector<Complex64>, w: &DVector<Complex64>) -> f64 {
    let h = z.dotc(w);
    (w - z * h).norm().atan2(h.norm())
}

/// Geodesic distance for the sphere and planar shape cases.
pub fn oracle_dist(a: &Point, b: &Point) -> f64 {
    match (a.as_vector(), b.as_vector(), a.as_complex(), b.as_complex()) {
        (Some(x), Some(y), _, _) => sphere_dist(x, y),
        (_, _, Some(z), Some(w)) => cp_dist(z, w),
        _ => panic!("oracle distance only covers spheres and planar shapes"),
    }
}

pub fn cplx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Planar shape with the given complex coordinates (normalized).
pub fn planar(z: &[Complex64]) -> Point {
    Point::planar_shape(z).unwrap()
}

pub fn rel_frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}
