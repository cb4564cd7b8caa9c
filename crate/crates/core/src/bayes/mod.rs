//! Nonparametric Bayes on planar shape space and spheres: Dirichlet-process
//! stick-breaking, kernel mixtures, posterior draws, density estimation and
//! Bayes classification.
//!
//! Kernels are written with a bandwidth `tau`:
//!
//! ```text
//! complex Watson   K(z; mu, tau) = c(tau) exp(|z* mu|^2 / tau)   on planar shapes
//! von Mises-Fisher K(x; mu, tau) = c(tau) exp(x' mu / tau)       on spheres
//! ```
//!
//! both as densities with respect to the uniform probability measure. For
//! the von Mises-Fisher kernel `1/tau` is the usual concentration; the
//! samplers in [`sampling`] take the concentration directly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Manifold, Point};

pub mod baselines;
mod classify;
mod mixture;
pub mod quadrature;
pub mod sampling;
mod stick;

pub use baselines::{compare_l1, watson_mean_similarity, watson_mle, L1Comparison, WatsonDensity, WatsonKde};
pub use classify::{classify, Classification};
pub use mixture::{density_estimate, Density, MixtureDensity};
pub use sampling::{sample_uniform, sample_vmf, sample_watson};
pub use stick::{
    posterior_draw, posterior_sticks, stick_breaking_draw, stick_breaking_with, Atom, AtomOrigin, BaseMeasure, DpPrior,
    StickBreaking, StickOptions,
};

/// Bandwidth used to evaluate atoms that sit exactly on observations.
pub const TAU_FLOOR: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    ComplexWatson,
    VonMisesFisher,
}

impl Kernel {
    pub fn for_manifold(m: Manifold) -> Result<Kernel> {
        match m {
            Manifold::PlanarShape { .. } => Ok(Kernel::ComplexWatson),
            Manifold::Sphere { .. } => Ok(Kernel::VonMisesFisher),
            other => Err(other.unsupported("mixture kernels")),
        }
    }

    /// `|z* mu|^2` or `x' mu`.
    pub fn similarity(self, x: &Point, mu: &Point) -> f64 {
        match self {
            Kernel::ComplexWatson => sampling::watson_similarity(x, mu),
            Kernel::VonMisesFisher => x.coords().inner(mu.coords()),
        }
    }

    /// `ln c(tau)` on `manifold`.
    pub fn log_normalizer(self, manifold: Manifold, tau: f64) -> Result<f64> {
        check_bandwidth(tau)?;
        match (self, manifold) {
            (Kernel::ComplexWatson, Manifold::PlanarShape { k }) => Ok(-log_watson_mgf(k, 1.0 / tau)),
            (Kernel::VonMisesFisher, Manifold::Sphere { d }) => Ok(-log_vmf_mgf(d, 1.0 / tau)),
            (_, m) => Err(Error::InvalidArgument(format!("{self:?} kernel does not live on {m}"))),
        }
    }

    pub fn log_density(self, x: &Point, mu: &Point, tau: f64) -> Result<f64> {
        x.manifold().check_same(&mu.manifold())?;
        Ok(self.log_normalizer(mu.manifold(), tau)? + self.similarity(x, mu) / tau)
    }
}

fn check_bandwidth(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("kernel bandwidth must be positive, got {tau}")))
    }
}

/// Complex Watson kernel `c(tau) exp(|z* mu|^2 / tau)`.
pub fn watson_kernel(z: &Point, mu: &Point, tau: f64) -> Result<f64> {
    if !matches!(mu.manifold(), Manifold::PlanarShape { .. }) {
        return Err(mu.manifold().unsupported("complex Watson kernel"));
    }
    Ok(Kernel::ComplexWatson.log_density(z, mu, tau)?.exp())
}

/// Von Mises-Fisher kernel `c(tau) exp(x' mu / tau)` in bandwidth form.
pub fn vmf_kernel(x: &Point, mu: &Point, tau: f64) -> Result<f64> {
    if !matches!(mu.manifold(), Manifold::Sphere { .. }) {
        return Err(mu.manifold().unsupported("von Mises-Fisher kernel"));
    }
    Ok(Kernel::VonMisesFisher.log_density(x, mu, tau)?.exp())
}

/// `ln sum_n exp(l_n)` where `l_0 = 0` and `l_{n+1} - l_n = ln ratio(n)`, for
/// series whose ratio eventually drops below one.
fn log_series(ratio: impl Fn(f64) -> f64) -> f64 {
    let mut log_term = 0.0f64;
    let mut acc = 1.0f64; // sum of exp(l_n - shift)
    let mut shift = 0.0f64;
    let mut n = 0.0;
    loop {
        let r = ratio(n);
        log_term += r.ln();
        n += 1.0;
        if log_term > shift {
            acc = acc * (shift - log_term).exp() + 1.0;
            shift = log_term;
        } else {
            acc += (log_term - shift).exp();
        }
        if r < 1.0 && log_term < shift - 40.0 {
            break;
        }
        if n > 1e8 {
            break;
        }
    }
    shift + acc.ln()
}

/// `ln E[exp(x t)]` for `t ~ Beta(1, k - 2)`, the law of `|z* mu|^2` under
/// the uniform measure on planar shapes of `k` landmarks. This is
/// `ln 1F1(1; k - 1; x)`.
pub(crate) fn log_watson_mgf(k: usize, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if k == 3 {
        // (e^x - 1) / x
        return x + (-(-x).exp_m1()).ln() - x.ln();
    }
    let b = (k - 1) as f64;
    log_series(|n| x / (b + n))
}

/// `ln E[exp(x s)]` for `s = x' mu` under the uniform measure on `S^d`, which
/// is `ln 0F1(; (d + 1)/2; x^2 / 4)`.
pub(crate) fn log_vmf_mgf(d: usize, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if d == 2 {
        // sinh(x) / x
        return x + (-(-2.0 * x).exp_m1()).ln() - (2.0 * x).ln();
    }
    let a = (d + 1) as f64 / 2.0;
    let q = x * x / 4.0;
    log_series(|n| q / ((a + n) * (n + 1.0)))
}

/// `E[t exp(x t)] / E[exp(x t)]` for `t ~ Beta(1, k - 2)`.
pub(crate) fn watson_tilted_mean(k: usize, x: f64) -> f64 {
    if k == 3 {
        if x.abs() < 1e-6 {
            return 0.5 + x / 12.0;
        }
        // 1/(1 - e^{-x}) - 1/x
        return 1.0 / (-(-x).exp_m1()) - 1.0 / x;
    }
    let b = (k - 1) as f64;
    // E[t e^{xt}] = sum_n x^n (n+1) / (b)_{n+1}, using E[t^m] = m! / (b)_m
    let numerator = log_series(|n| x * (n + 2.0) / ((n + 1.0) * (b + 1.0 + n))) - b.ln();
    (numerator - log_watson_mgf(k, x)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn watson_series_matches_closed_form_for_triangles() {
        let b = 2.0;
        for x in [0.5, 3.0, 40.0, 1000.0] {
            let series = log_series(|n| x / (b + n));
            assert!((series - log_watson_mgf(3, x)).abs() < 1e-12 * series.abs().max(1.0), "{x}");
        }
    }

    #[test]
    fn vmf_series_matches_closed_form_on_s2() {
        for x in [0.1, 2.0, 50.0, 1000.0] {
            let series = log_series(|n| x * x / 4.0 / ((1.5 + n) * (n + 1.0)));
            assert!((series - log_vmf_mgf(2, x)).abs() < 1e-12 * series.abs().max(1.0), "{x}");
        }
    }

    #[test]
    fn tilted_mean_matches_derivative() {
        for k in [3usize, 5, 8] {
            for x in [0.3, 4.0, 30.0] {
                let h = 1e-5;
                let fd = (log_watson_mgf(k, x + h) - log_watson_mgf(k, x - h)) / (2.0 * h);
                assert!((fd - watson_tilted_mean(k, x)).abs() < 1e-7, "{k} {x}");
            }
        }
    }

    #[test]
    fn kernel_maximum_and_phase_invariance() {
        let z = [Complex64::new(0.2, 0.4), Complex64::new(-0.7, 0.1), Complex64::new(0.3, -0.3)];
        let mu = Point::planar_shape(&z).unwrap();
        let tau = 0.3;
        let c = Kernel::ComplexWatson.log_normalizer(mu.manifold(), tau).unwrap().exp();
        let at_mu = watson_kernel(&mu, &mu, tau).unwrap();
        assert!((at_mu - c * (1.0f64 / tau).exp()).abs() < 1e-12 * at_mu);
        let rot = Complex64::from_polar(1.0, 1.1);
        let w: Vec<Complex64> = [Complex64::new(0.5, 0.0), Complex64::new(0.1, 0.2), Complex64::new(-0.3, 0.6)].to_vec();
        let x = Point::planar_shape(&w).unwrap();
        let xr = Point::planar_shape(&w.iter().map(|v| v * rot).collect::<Vec<_>>()).unwrap();
        let a = watson_kernel(&x, &mu, tau).unwrap();
        assert!((a - watson_kernel(&xr, &mu, tau).unwrap()).abs() < 1e-12 * a);
        assert!(a < at_mu);
        assert!(watson_kernel(&x, &mu, 0.0).is_err());
    }
}
