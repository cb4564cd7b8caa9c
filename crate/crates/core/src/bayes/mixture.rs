//! Kernel mixture densities built from stick-breaking draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stick::{posterior_draw, Atom, AtomOrigin, DpPrior, StickBreaking, StickOptions};
use super::Kernel;
use crate::error::{Error, Result};
use crate::geometry::{Manifold, Point};

/// A density with respect to the uniform probability measure.
pub trait Density: Sync {
    fn log_density(&self, x: &Point) -> Result<f64>;

    fn density(&self, x: &Point) -> Result<f64> {
        Ok(self.log_density(x)?.exp())
    }
}

/// `sum_j w_j K(x; mu_j, max(tau_j, tau_floor))`.
///
/// The residual stick mass is kept as recorded and not spread over the atoms,
/// so the density integrates to `1 - residual`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MixtureRecord", into = "MixtureRecord")]
pub struct MixtureDensity {
    kernel: Kernel,
    components: StickBreaking,
    tau_floor: f64,
    manifold: Manifold,
    log_norms: Vec<f64>,
}

impl MixtureDensity {
    pub fn new(kernel: Kernel, components: StickBreaking, tau_floor: f64) -> Result<Self> {
        let first = components
            .atoms
            .first()
            .ok_or_else(|| Error::InvalidArgument("a mixture needs at least one atom".into()))?;
        let manifold = first.location.manifold();
        if Kernel::for_manifold(manifold)? != kernel {
            return Err(Error::InvalidArgument(format!("{kernel:?} kernel does not live on {manifold}")));
        }
        if components.weights.len() != components.atoms.len() {
            return Err(Error::InvalidArgument("weights and atoms differ in length".into()));
        }
        if components.weights.iter().any(|&w| !(w >= 0.0)) || !(components.residual >= -1e-12) {
            return Err(Error::InvalidArgument("mixture weights must be nonnegative".into()));
        }
        let total: f64 = components.weights.iter().sum::<f64>() + components.residual;
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("weights plus residual sum to {total}")));
        }
        if !(tau_floor > 0.0) {
            return Err(Error::InvalidArgument(format!("tau_floor must be positive, got {tau_floor}")));
        }
        let mut log_norms = Vec::with_capacity(components.atoms.len());
        for atom in &components.atoms {
            manifold.check_same(&atom.location.manifold())?;
            if !(atom.tau >= 0.0) {
                return Err(Error::InvalidArgument(format!("atom bandwidth {} is negative", atom.tau)));
            }
            log_norms.push(kernel.log_normalizer(manifold, atom.tau.max(tau_floor))?);
        }
        Ok(MixtureDensity { kernel, components, tau_floor, manifold, log_norms })
    }

    /// A single kernel as a one-atom mixture.
    pub fn single(kernel: Kernel, location: Point, tau: f64) -> Result<Self> {
        let sticks = StickBreaking {
            weights: vec![1.0],
            atoms: vec![Atom { location, tau, origin: AtomOrigin::Base }],
            residual: 0.0,
        };
        MixtureDensity::new(kernel, sticks, tau.min(super::TAU_FLOOR))
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn components(&self) -> &StickBreaking {
        &self.components
    }

    pub fn tau_floor(&self) -> f64 {
        self.tau_floor
    }

    /// Equal-weight average of several mixtures.
    pub fn average(parts: Vec<MixtureDensity>) -> Result<MixtureDensity> {
        let first = parts.first().ok_or_else(|| Error::InvalidArgument("nothing to average".into()))?;
        let (kernel, tau_floor) = (first.kernel, first.tau_floor);
        let scale = 1.0 / parts.len() as f64;
        let mut weights = Vec::new();
        let mut atoms = Vec::new();
        let mut residual = 0.0;
        for part in parts {
            if part.kernel != kernel || part.tau_floor != tau_floor {
                return Err(Error::InvalidArgument("averaged mixtures must share kernel and tau_floor".into()));
            }
            weights.extend(part.components.weights.iter().map(|w| w * scale));
            atoms.extend(part.components.atoms);
            residual += part.components.residual * scale;
        }
        let merged = StickBreaking { weights, atoms, residual }.merge_data_atoms();
        MixtureDensity::new(kernel, merged, tau_floor)
    }
}

impl Density for MixtureDensity {
    fn log_density(&self, x: &Point) -> Result<f64> {
        self.manifold.check_same(&x.manifold())?;
        let mut terms = Vec::with_capacity(self.log_norms.len());
        for ((w, atom), ln_c) in self.components.weights.iter().zip(&self.components.atoms).zip(&self.log_norms) {
            if *w > 0.0 {
                let tau = atom.tau.max(self.tau_floor);
                terms.push(w.ln() + ln_c + self.kernel.similarity(x, &atom.location) / tau);
            }
        }
        Ok(log_sum_exp(&terms))
    }
}

pub(crate) fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

#[derive(Serialize, Deserialize)]
struct AtomRecord {
    location: Point,
    tau: f64,
    weight: f64,
    #[serde(default)]
    origin: AtomOrigin,
}

#[derive(Serialize, Deserialize)]
struct MixtureRecord {
    kernel: Kernel,
    tau_floor: f64,
    atoms: Vec<AtomRecord>,
    residual: f64,
}

impl From<MixtureDensity> for MixtureRecord {
    fn from(m: MixtureDensity) -> Self {
        let atoms = m
            .components
            .weights
            .into_iter()
            .zip(m.components.atoms)
            .map(|(weight, a)| AtomRecord { location: a.location, tau: a.tau, weight, origin: a.origin })
            .collect();
        MixtureRecord { kernel: m.kernel, tau_floor: m.tau_floor, atoms, residual: m.components.residual }
    }
}

impl TryFrom<MixtureRecord> for MixtureDensity {
    type Error = Error;

    fn try_from(r: MixtureRecord) -> Result<Self> {
        let (weights, atoms) = r
            .atoms
            .into_iter()
            .map(|a| (a.weight, Atom { location: a.location, tau: a.tau, origin: a.origin }))
            .unzip();
        MixtureDensity::new(r.kernel, StickBreaking { weights, atoms, residual: r.residual }, r.tau_floor)
    }
}

/// Posterior mean density: the average of `n_draws` posterior draws, draw
/// `i` using stream `i` of the ChaCha generator seeded with `seed`.
pub fn density_estimate(
    prior: &DpPrior,
    data: &[Point],
    n_draws: usize,
    seed: u64,
    opts: &StickOptions,
) -> Result<MixtureDensity> {
    if n_draws == 0 {
        return Err(Error::InvalidArgument("density_estimate needs at least one draw".into()));
    }
    let draws = (0..n_draws)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            posterior_draw(prior, data, opts, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    MixtureDensity::average(draws)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn shape(z: &[(f64, f64)]) -> Point {
        Point::planar_shape(&z.iter().map(|&(a, b)| Complex64::new(a, b)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn single_atom_equals_kernel() {
        let mu = shape(&[(0.3, 0.1), (-0.2, 0.6), (0.5, 0.0)]);
        let x = shape(&[(0.1, 0.1), (0.2, -0.6), (0.4, 0.3)]);
        let m = MixtureDensity::single(Kernel::ComplexWatson, mu.clone(), 0.4).unwrap();
        let k = super::super::watson_kernel(&x, &mu, 0.4).unwrap();
        assert!((m.density(&x).unwrap() - k).abs() < 1e-12 * k);
    }

    #[test]
    fn json_round_trip() {
        let mu = shape(&[(0.3, 0.1), (-0.2, 0.6), (0.5, 0.0)]);
        let x = shape(&[(0.1, 0.1), (0.2, -0.6), (0.4, 0.3)]);
        let sticks = StickBreaking {
            weights: vec![0.6, 0.3],
            atoms: vec![
                Atom { location: mu, tau: 0.0, origin: AtomOrigin::Data { index: 3 } },
                Atom { location: x, tau: 0.25, origin: AtomOrigin::Base },
            ],
            residual: 0.1,
        };
        let m = MixtureDensity::new(Kernel::ComplexWatson, sticks, 1e-3).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains("\"atoms\"") && text.contains("\"residual\""));
        let back: MixtureDensity = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }
}
