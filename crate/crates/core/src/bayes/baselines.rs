//! Parametric and kernel baselines for density estimation on planar shapes.

use serde::Serialize;

use super::mixture::{density_estimate, log_sum_exp, Density};
use super::quadrature::QuadratureGrid;
use super::stick::{DpPrior, StickOptions};
use super::{sampling::watson_similarity, watson_tilted_mean, Kernel};
use crate::error::{Error, Result};
use crate::frechet::{extrinsic_mean, Sample};
use crate::geometry::{Manifold, Point};

/// A complex Watson density `c(tau) exp(|z* mu|^2 / tau)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WatsonDensity {
    pub mu: Point,
    pub tau: f64,
    #[serde(skip)]
    log_c: f64,
}

impl WatsonDensity {
    pub fn new(mu: Point, tau: f64) -> Result<Self> {
        if !matches!(mu.manifold(), Manifold::PlanarShape { .. }) {
            return Err(mu.manifold().unsupported("complex Watson density"));
        }
        let log_c = Kernel::ComplexWatson.log_normalizer(mu.manifold(), tau)?;
        Ok(WatsonDensity { mu, tau, log_c })
    }
}

impl Density for WatsonDensity {
    fn log_density(&self, x: &Point) -> Result<f64> {
        self.mu.manifold().check_same(&x.manifold())?;
        Ok(self.log_c + watson_similarity(x, &self.mu) / self.tau)
    }
}

/// `E[|z* mu|^2]` under the complex Watson law with bandwidth `tau` on
/// shapes of `k` landmarks.
pub fn watson_mean_similarity(k: usize, tau: f64) -> f64 {
    watson_tilted_mean(k, 1.0 / tau)
}

/// Bandwidth assigned when the sample is no more concentrated than uniform.
const TAU_UNIFORM: f64 = 1e6;

/// Maximum likelihood complex Watson fit: `mu` is the extrinsic mean and
/// `tau` solves `E_tau[|z* mu|^2] = mean_j |z_j* mu|^2`.
pub fn watson_mle(s: &Sample) -> Result<WatsonDensity> {
    let Manifold::PlanarShape { k } = s.manifold() else {
        return Err(s.manifold().unsupported("complex Watson fit"));
    };
    let mu = extrinsic_mean(s)?.mean;
    let t_bar: f64 = s.points().iter().zip(s.weights()).map(|(z, w)| w * watson_similarity(z, &mu)).sum();
    if t_bar <= 1.0 / (k - 1) as f64 {
        return WatsonDensity::new(mu, TAU_UNIFORM);
    }
    if t_bar >= 1.0 - 1e-12 {
        return Err(Error::Degenerate("all observations share one shape; the Watson fit is a point mass".into()));
    }
    // the tilted mean increases in x = 1/tau
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while watson_tilted_mean(k, hi) < t_bar {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if watson_tilted_mean(k, mid) < t_bar {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    WatsonDensity::new(mu, 2.0 / (lo + hi))
}

/// Kernel density estimate `(1/n) sum_j K(x; X_j, h)` with complex Watson kernels.
#[derive(Clone, Debug)]
pub struct WatsonKde {
    points: Vec<Point>,
    bandwidth: f64,
    log_c: f64,
}

impl WatsonKde {
    pub fn new(s: &Sample, bandwidth: f64) -> Result<Self> {
        let Manifold::PlanarShape { .. } = s.manifold() else {
            return Err(s.manifold().unsupported("complex Watson kernel density estimate"));
        };
        let log_c = Kernel::ComplexWatson.log_normalizer(s.manifold(), bandwidth)?;
        Ok(WatsonKde { points: s.points().to_vec(), bandwidth, log_c })
    }

    /// Bandwidth maximizing the leave-one-out log likelihood over `candidates`.
    pub fn cross_validated(s: &Sample, candidates: &[f64]) -> Result<Self> {
        let n = s.len();
        if n < 2 {
            return Err(Error::InvalidArgument("cross-validation needs at least two observations".into()));
        }
        let mut best: Option<(f64, f64)> = None;
        for &h in candidates {
            let log_c = Kernel::ComplexWatson.log_normalizer(s.manifold(), h)?;
            let mut score = 0.0;
            for i in 0..n {
                let terms: Vec<f64> = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| watson_similarity(&s.points()[i], &s.points()[j]) / h)
                    .collect();
                score += log_c + log_sum_exp(&terms) - ((n - 1) as f64).ln();
            }
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((h, score));
            }
        }
        let (h, _) = best.ok_or_else(|| Error::InvalidArgument("no candidate bandwidths".into()))?;
        WatsonKde::new(s, h)
    }

    /// `count` bandwidths log-spaced over `[1e-3, 10]`.
    pub fn default_candidates(count: usize) -> Vec<f64> {
        let (lo, hi) = (1e-3f64.ln(), 10f64.ln());
        (0..count).map(|i| (lo + (hi - lo) * i as f64 / (count - 1).max(1) as f64).exp()).collect()
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }
}

impl Density for WatsonKde {
    fn log_density(&self, x: &Point) -> Result<f64> {
        self.points[0].manifold().check_same(&x.manifold())?;
        let terms: Vec<f64> = self.points.iter().map(|p| watson_similarity(x, p) / self.bandwidth).collect();
        Ok(self.log_c + log_sum_exp(&terms) - (self.points.len() as f64).ln())
    }
}

/// L1 errors of three density estimates against a known truth.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct L1Comparison {
    pub np_bayes: f64,
    pub mle: f64,
    pub kde: f64,
}

/// Fits the posterior mean density, the Watson MLE and a cross-validated
/// KDE to `data` and measures each against `truth` on `grid`.
pub fn compare_l1(
    truth: &dyn Density,
    data: &Sample,
    prior: &DpPrior,
    n_draws: usize,
    seed: u64,
    grid: &QuadratureGrid,
) -> Result<L1Comparison> {
    let bayes = density_estimate(prior, data.points(), n_draws, seed, &StickOptions::default())?;
    let mle = watson_mle(data)?;
    let kde = WatsonKde::cross_validated(data, &WatsonKde::default_candidates(60))?;
    Ok(L1Comparison {
        np_bayes: grid.l1_distance(truth, &bayes)?,
        mle: grid.l1_distance(truth, &mle)?,
        kde: grid.l1_distance(truth, &kde)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes::sampling::sample_watson_concentrated;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mu() -> Point {
        Point::planar_shape(&[Complex64::new(0.6, 0.2), Complex64::new(-0.1, 0.3), Complex64::new(0.2, -0.5)]).unwrap()
    }

    #[test]
    fn mle_recovers_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = sample_watson_concentrated(&mu(), 0.05, 4000, &mut rng).unwrap();
        let fit = watson_mle(&s).unwrap();
        assert!((fit.tau - 0.05).abs() < 0.005, "{}", fit.tau);
        assert!(crate::geometry::dist(&fit.mu, &mu()).unwrap() < 0.02);
    }

    #[test]
    fn mean_similarity_limits() {
        assert!((watson_mean_similarity(5, 1e6) - 0.25).abs() < 1e-6);
        // concentrated: 1 - E[s] with s ~ Gamma(k - 2, tau)
        assert!((watson_mean_similarity(5, 1e-3) - (1.0 - 3e-3)).abs() < 1e-9);
    }

    #[test]
    fn kde_prefers_a_finite_bandwidth() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = sample_watson_concentrated(&mu(), 0.1, 50, &mut rng).unwrap();
        let kde = WatsonKde::cross_validated(&s, &WatsonKde::default_candidates(40)).unwrap();
        assert!(kde.bandwidth() > 1e-3 && kde.bandwidth() < 10.0);
    }
}
