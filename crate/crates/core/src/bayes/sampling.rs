//! Samplers for the uniform distribution, von Mises-Fisher and complex Watson laws.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::frechet::Sample;
use crate::geometry::{Coords, Manifold, Point};

/// Attempts allowed per accepted draw in the rejection samplers.
pub const MAX_ATTEMPTS: usize = 1_000_000;

fn gaussian_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

fn complex_gaussian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<Complex64> {
    DVector::from_fn(n, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// A point from the normalized volume measure (Sphere, PlanarShape, RealProjective).
pub fn sample_uniform<R: Rng + ?Sized>(manifold: Manifold, rng: &mut R) -> Result<Point> {
    let coords = match manifold {
        Manifold::Sphere { d } => Coords::Vector(gaussian_vector(d + 1, rng)),
        Manifold::RealProjective { m } => Coords::Vector(gaussian_vector(m + 1, rng)),
        Manifold::PlanarShape { k } => Coords::ComplexVector(complex_gaussian(k - 1, rng)),
        m => return Err(m.unsupported("uniform sampling")),
    };
    Point::normalized(manifold, coords)
}

/// Uniform unit vector orthogonal to `mu` (complex-orthogonal in the complex case).
fn orthogonal_direction<R: Rng + ?Sized>(mu: &Coords, rng: &mut R) -> Coords {
    loop {
        let w = match mu {
            Coords::Vector(m) => {
                let g = gaussian_vector(m.len(), rng);
                Coords::Vector(&g - m * m.dot(&g))
            }
            Coords::ComplexVector(m) => {
                let g = complex_gaussian(m.len(), rng);
                Coords::ComplexVector(&g - m * m.dotc(&g))
            }
            _ => unreachable!("only vector representatives are sampled"),
        };
        let n = w.norm();
        if n > 1e-12 {
            return w.scale(1.0 / n);
        }
    }
}

/// `a mu + b w` as a point.
fn combine(mu: &Point, a: f64, w: &Coords, b: f64) -> Result<Point> {
    let mut c = mu.coords().scale(a);
    c.axpy(b, w);
    Point::normalized(mu.manifold(), c)
}

fn n_draws<R: Rng + ?Sized>(
    n: usize,
    rng: &mut R,
    mut draw: impl FnMut(&mut R) -> Result<Point>,
) -> Result<Sample> {
    let points = (0..n).map(|_| draw(rng)).collect::<Result<Vec<_>>>()?;
    Sample::new(points)
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("tau must be positive and finite, got {tau}")))
    }
}

fn too_concentrated(name: &str, tau: f64) -> Error {
    Error::InvalidArgument(format!(
        "{name} with tau = {tau} rejected {MAX_ATTEMPTS} proposals in a row; \
         use the concentrated sampler for this regime"
    ))
}

/// One von Mises-Fisher draw, density `c exp(kappa x'mu)` with respect to
/// the uniform measure, by rejection from uniform proposals.
pub fn vmf_draw<R: Rng + ?Sized>(mu: &Point, kappa: f64, rng: &mut R) -> Result<Point> {
    check_tau(kappa)?;
    let Manifold::Sphere { .. } = mu.manifold() else {
        return Err(mu.manifold().unsupported("von Mises-Fisher sampling"));
    };
    for _ in 0..MAX_ATTEMPTS {
        let x = sample_uniform(mu.manifold(), rng)?;
        let s = x.coords().inner(mu.coords());
        if rng.random::<f64>() < (kappa * (s - 1.0)).exp() {
            return Ok(x);
        }
    }
    Err(too_concentrated("von Mises-Fisher", kappa))
}

pub fn sample_vmf<R: Rng + ?Sized>(mu: &Point, kappa: f64, n: usize, rng: &mut R) -> Result<Sample> {
    n_draws(n, rng, |r| vmf_draw(mu, kappa, r))
}

/// Wood's algorithm for von Mises-Fisher draws; efficient at any concentration.
pub fn vmf_draw_concentrated<R: Rng + ?Sized>(mu: &Point, kappa: f64, rng: &mut R) -> Result<Point> {
    check_tau(kappa)?;
    let Manifold::Sphere { d } = mu.manifold() else {
        return Err(mu.manifold().unsupported("von Mises-Fisher sampling"));
    };
    let m1 = d as f64;
    let b = m1 / (2.0 * kappa + (4.0 * kappa * kappa + m1 * m1).sqrt());
    let x0 = (1.0 - b) / (1.0 + b);
    let c = kappa * x0 + m1 * (1.0 - x0 * x0).ln();
    let beta = Beta::new(m1 / 2.0, m1 / 2.0).expect("positive shape parameters");
    for _ in 0..MAX_ATTEMPTS {
        let z: f64 = beta.sample(rng);
        let w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
        let u: f64 = rng.random();
        if kappa * w + m1 * (1.0 - x0 * w).ln() - c >= u.ln() {
            let dir = orthogonal_direction(mu.coords(), rng);
            return combine(mu, w, &dir, (1.0 - w * w).max(0.0).sqrt());
        }
    }
    Err(too_concentrated("von Mises-Fisher", kappa))
}

pub fn sample_vmf_concentrated<R: Rng + ?Sized>(mu: &Point, kappa: f64, n: usize, rng: &mut R) -> Result<Sample> {
    n_draws(n, rng, |r| vmf_draw_concentrated(mu, kappa, r))
}

/// One complex Watson draw, density `c exp(|z* mu|^2 / tau)` with respect to
/// the uniform measure on planar shape space, by rejection from uniform proposals.
pub fn watson_draw<R: Rng + ?Sized>(mu: &Point, tau: f64, rng: &mut R) -> Result<Point> {
    check_tau(tau)?;
    let Manifold::PlanarShape { .. } = mu.manifold() else {
        return Err(mu.manifold().unsupported("complex Watson sampling"));
    };
    for _ in 0..MAX_ATTEMPTS {
        let z = sample_uniform(mu.manifold(), rng)?;
        let t = watson_similarity(&z, mu);
        if rng.random::<f64>() < ((t - 1.0) / tau).exp() {
            return Ok(z);
        }
    }
    Err(too_concentrated("complex Watson", tau))
}

pub fn sample_watson<R: Rng + ?Sized>(mu: &Point, tau: f64, n: usize, rng: &mut R) -> Result<Sample> {
    n_draws(n, rng, |r| watson_draw(mu, tau, r))
}

/// Complex Watson draw through the law of `s = 1 - |z* mu|^2`, whose density
/// on `[0, 1]` is proportional to `s^{k-3} exp(-s / tau)`.
pub fn watson_draw_concentrated<R: Rng + ?Sized>(mu: &Point, tau: f64, rng: &mut R) -> Result<Point> {
    check_tau(tau)?;
    let Manifold::PlanarShape { k } = mu.manifold() else {
        return Err(mu.manifold().unsupported("complex Watson sampling"));
    };
    let shape = (k - 2) as f64;
    let s = if k == 3 {
        // truncated exponential, by inversion
        let u: f64 = rng.random();
        -tau * (u * (-1.0 / tau).exp_m1()).ln_1p()
    } else if shape * tau < 0.5 {
        let gamma = Gamma::new(shape, tau).expect("positive parameters");
        let mut out = None;
        for _ in 0..MAX_ATTEMPTS {
            let s: f64 = gamma.sample(rng);
            if s <= 1.0 {
                out = Some(s);
                break;
            }
        }
        out.ok_or_else(|| too_concentrated("complex Watson", tau))?
    } else {
        let beta = Beta::new(shape, 1.0).expect("positive parameters");
        let mut out = None;
        for _ in 0..MAX_ATTEMPTS {
            let s: f64 = beta.sample(rng);
            if rng.random::<f64>() < (-s / tau).exp() {
                out = Some(s);
                break;
            }
        }
        out.ok_or_else(|| too_concentrated("complex Watson", tau))?
    };
    let s = s.clamp(0.0, 1.0);
    let dir = orthogonal_direction(mu.coords(), rng);
    combine(mu, (1.0 - s).sqrt(), &dir, s.sqrt())
}

pub fn sample_watson_concentrated<R: Rng + ?Sized>(mu: &Point, tau: f64, n: usize, rng: &mut R) -> Result<Sample> {
    n_draws(n, rng, |r| watson_draw_concentrated(mu, tau, r))
}

/// `|z* mu|^2` for planar shapes.
pub fn watson_similarity(z: &Point, mu: &Point) -> f64 {
    match (z.coords(), mu.coords()) {
        (Coords::ComplexVector(a), Coords::ComplexVector(b)) => b.dotc(a).norm_sqr(),
        _ => panic!("complex Watson similarity needs planar shapes"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn vmf_mean_direction() {
        let mu = Point::on_sphere(&[0.0, 0.6, 0.8]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for s in [
            sample_vmf(&mu, 10.0, 2000, &mut rng).unwrap(),
            sample_vmf_concentrated(&mu, 10.0, 2000, &mut rng).unwrap(),
        ] {
            let mean = crate::frechet::extrinsic_mean(&s).unwrap().mean;
            assert!(crate::geometry::dist(&mean, &mu).unwrap() < 0.05);
            // E[x'mu] = coth(kappa) - 1/kappa on S^2
            let avg: f64 = s.points().iter().map(|p| p.coords().inner(mu.coords())).sum::<f64>() / 2000.0;
            assert!((avg - (1.0 / 10f64.tanh() - 0.1)).abs() < 0.01);
        }
    }

    #[test]
    fn watson_samplers_agree_on_mean_similarity() {
        let mu = Point::planar_shape(&[Complex64::new(0.4, 0.1), Complex64::new(-0.2, 0.5), Complex64::new(0.3, 0.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = sample_watson(&mu, 0.2, 4000, &mut rng).unwrap();
        let b = sample_watson_concentrated(&mu, 0.2, 4000, &mut rng).unwrap();
        let avg = |s: &Sample, mu: &Point| s.points().iter().map(|p| watson_similarity(p, mu)).sum::<f64>() / s.len() as f64;
        assert!((avg(&a, &mu) - avg(&b, &mu)).abs() < 0.02);

        // triangles take the inversion path; E[t] = 1/(1 - e^{-1/tau}) - tau
        let tri = Point::planar_shape(&[Complex64::new(0.4, 0.1), Complex64::new(-0.2, 0.5)]).unwrap();
        let a = sample_watson(&tri, 0.2, 4000, &mut rng).unwrap();
        let b = sample_watson_concentrated(&tri, 0.2, 4000, &mut rng).unwrap();
        let expected = 1.0 / (1.0 - (-5.0f64).exp()) - 0.2;
        assert!((avg(&a, &tri) - expected).abs() < 0.01);
        assert!((avg(&b, &tri) - expected).abs() < 0.01);
    }

    #[test]
    fn too_concentrated_rejection_errors() {
        let mu = Point::planar_shape(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(watson_draw(&mu, 1e-3, &mut rng).is_err());
        assert!(watson_draw_concentrated(&mu, 1e-3, &mut rng).is_ok());
    }
}
