//! Dirichlet-process priors and stick-breaking draws.

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use super::mixture::MixtureDensity;
use super::sampling;
use super::{Kernel, TAU_FLOOR};
use crate::error::{Error, Result};
use crate::geometry::{Manifold, Point};

/// Distribution of `(location, tau)` for atoms not taken from the data.
#[derive(Clone, Debug, PartialEq)]
pub enum BaseMeasure {
    /// Uniform locations, `ln tau` uniform on `[ln tau_min, ln tau_max]`.
    Uniform { tau_min: f64, tau_max: f64 },
    /// Locations drawn from the manifold's kernel around `center` with bandwidth
    /// `spread`; `tau` log-uniform as above.
    Centered { center: Point, spread: f64, tau_min: f64, tau_max: f64 },
}

impl Default for BaseMeasure {
    fn default() -> Self {
        BaseMeasure::Uniform { tau_min: 1e-3, tau_max: 10.0 }
    }
}

impl BaseMeasure {
    fn tau_range(&self) -> (f64, f64) {
        match *self {
            BaseMeasure::Uniform { tau_min, tau_max } | BaseMeasure::Centered { tau_min, tau_max, .. } => {
                (tau_min, tau_max)
            }
        }
    }

    fn validate(&self, manifold: Manifold) -> Result<()> {
        let (lo, hi) = self.tau_range();
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::InvalidArgument(format!("invalid bandwidth range [{lo}, {hi}]")));
        }
        if let BaseMeasure::Centered { center, spread, .. } = self {
            manifold.check_same(&center.manifold())?;
            if !(*spread > 0.0 && spread.is_finite()) {
                return Err(Error::InvalidArgument(format!("spread must be positive, got {spread}")));
            }
        }
        Ok(())
    }

    pub fn draw<R: Rng + ?Sized>(&self, manifold: Manifold, rng: &mut R) -> Result<(Point, f64)> {
        let (lo, hi) = self.tau_range();
        let location = match self {
            BaseMeasure::Uniform { .. } => sampling::sample_uniform(manifold, rng)?,
            BaseMeasure::Centered { center, spread, .. } => match manifold {
                Manifold::PlanarShape { .. } => sampling::watson_draw_concentrated(center, *spread, rng)?,
                _ => sampling::vmf_draw_concentrated(center, 1.0 / spread, rng)?,
            },
        };
        let tau = if lo == hi { lo } else { (lo.ln() + rng.random::<f64>() * (hi / lo).ln()).exp() };
        Ok((location, tau))
    }
}

/// Dirichlet-process prior with base measure of total mass `concentration`.
#[derive(Clone, Debug, PartialEq)]
pub struct DpPrior {
    pub manifold: Manifold,
    pub concentration: f64,
    pub base: BaseMeasure,
}

impl DpPrior {
    pub fn new(manifold: Manifold, concentration: f64) -> Result<Self> {
        DpPrior::with_base(manifold, concentration, BaseMeasure::default())
    }

    pub fn with_base(manifold: Manifold, concentration: f64, base: BaseMeasure) -> Result<Self> {
        Kernel::for_manifold(manifold)?;
        if !(concentration > 0.0 && concentration.is_finite()) {
            return Err(Error::InvalidArgument(format!("concentration must be positive, got {concentration}")));
        }
        base.validate(manifold)?;
        Ok(DpPrior { manifold, concentration, base })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum AtomOrigin {
    #[default]
    Base,
    /// Point mass at observation `index` (bandwidth zero).
    Data { index: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub location: Point,
    /// Zero for data atoms.
    pub tau: f64,
    pub origin: AtomOrigin,
}

/// Truncated stick-breaking representation `sum_j w_j delta_{atom_j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct StickBreaking {
    pub weights: Vec<f64>,
    pub atoms: Vec<Atom>,
    /// Unassigned mass `1 - sum_j w_j`.
    pub residual: f64,
}

impl StickBreaking {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Sums the weights of data atoms that share an observation.
    pub fn merge_data_atoms(self) -> StickBreaking {
        let mut weights = Vec::with_capacity(self.weights.len());
        let mut atoms: Vec<Atom> = Vec::with_capacity(self.atoms.len());
        let mut seen = std::collections::HashMap::new();
        for (w, atom) in self.weights.into_iter().zip(self.atoms) {
            if let AtomOrigin::Data { index } = atom.origin {
                if let Some(&slot) = seen.get(&(index, atom.tau.to_bits())) {
                    weights[slot] += w;
                    continue;
                }
                seen.insert((index, atom.tau.to_bits()), weights.len());
            }
            weights.push(w);
            atoms.push(atom);
        }
        StickBreaking { weights, atoms, residual: self.residual }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StickOptions {
    pub trunc_tol: f64,
    pub max_atoms: usize,
}

impl Default for StickOptions {
    fn default() -> Self {
        StickOptions { trunc_tol: 1e-8, max_atoms: 10_000 }
    }
}

/// Stick-breaking with caller-supplied stick fractions and atoms, stopping
/// at the first residual below `trunc_tol`.
pub fn stick_breaking_with(
    opts: &StickOptions,
    mut stick: impl FnMut() -> f64,
    mut atom: impl FnMut() -> Result<Atom>,
) -> Result<StickBreaking> {
    let mut weights = Vec::new();
    let mut atoms = Vec::new();
    let mut residual = 1.0f64;
    while residual >= opts.trunc_tol {
        if weights.len() == opts.max_atoms {
            return Err(Error::InvalidArgument(format!(
                "stick-breaking reached {} atoms with residual {residual:e} still above {:e}; \
                 the concentration is too large for this truncation",
                opts.max_atoms, opts.trunc_tol
            )));
        }
        let u = stick();
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::InvalidArgument(format!("stick fraction {u} outside [0, 1]")));
        }
        let w = u * residual;
        residual -= w;
        weights.push(w);
        atoms.push(atom()?);
    }
    Ok(StickBreaking { weights, atoms, residual })
}

/// One draw from the prior: `Beta(1, b)` sticks, atoms from the base measure.
pub fn stick_breaking_draw<R: Rng + ?Sized>(
    prior: &DpPrior,
    opts: &StickOptions,
    rng: &mut R,
) -> Result<StickBreaking> {
    let beta = Beta::new(1.0, prior.concentration)
        .map_err(|e| Error::InvalidArgument(format!("stick distribution: {e}")))?;
    let rng = std::cell::RefCell::new(rng);
    stick_breaking_with(
        opts,
        || beta.sample(&mut **rng.borrow_mut()),
        || {
            let (location, tau) = prior.base.draw(prior.manifold, &mut **rng.borrow_mut())?;
            Ok(Atom { location, tau, origin: AtomOrigin::Base })
        },
    )
}

/// Posterior stick-breaking given `data`: `Beta(1, b + n)` sticks, atoms
/// equal to an observation (bandwidth zero) with probability `n / (b + n)`
/// and drawn from the base measure otherwise. Atoms are left unmerged.
///
/// The expected number of sticks before the residual falls below `trunc_tol`
/// is about `(b + n) ln(1/trunc_tol)`, so `max_atoms` is raised to
/// `40 (b + n)` when that is larger.
pub fn posterior_sticks<R: Rng + ?Sized>(
    prior: &DpPrior,
    data: &[Point],
    opts: &StickOptions,
    rng: &mut R,
) -> Result<StickBreaking> {
    for x in data {
        prior.manifold.check_same(&x.manifold())?;
    }
    let n = data.len() as f64;
    let b = prior.concentration;
    let opts = StickOptions {
        max_atoms: opts.max_atoms.max((40.0 * (b + n)).ceil() as usize),
        ..*opts
    };
    let beta = Beta::new(1.0, b + n).map_err(|e| Error::InvalidArgument(format!("stick distribution: {e}")))?;
    let data_prob = n / (b + n);
    let rng = std::cell::RefCell::new(rng);
    stick_breaking_with(
        &opts,
        || beta.sample(&mut **rng.borrow_mut()),
        || {
            let mut r = rng.borrow_mut();
            if r.random::<f64>() < data_prob {
                let index = r.random_range(0..data.len());
                Ok(Atom { location: data[index].clone(), tau: 0.0, origin: AtomOrigin::Data { index } })
            } else {
                let (location, tau) = prior.base.draw(prior.manifold, &mut **r)?;
                Ok(Atom { location, tau, origin: AtomOrigin::Base })
            }
        },
    )
}

/// One posterior draw as a mixture density; data atoms repeated by the
/// stick-breaking are merged and evaluated at bandwidth [`TAU_FLOOR`].
pub fn posterior_draw<R: Rng + ?Sized>(
    prior: &DpPrior,
    data: &[Point],
    opts: &StickOptions,
    rng: &mut R,
) -> Result<MixtureDensity> {
    let sticks = posterior_sticks(prior, data, opts, rng)?;
    MixtureDensity::new(Kernel::for_manifold(prior.manifold)?, sticks.merge_data_atoms(), TAU_FLOOR)
}
