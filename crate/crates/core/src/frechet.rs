//! Fréchet functions and sample Fréchet means.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, Coords, Manifold, Point, TangentVector};

/// A weighted sample of points on one manifold.
#[derive(Clone, Debug)]
pub struct Sample {
    manifold: Manifold,
    points: Vec<Point>,
    weights: Vec<f64>,
}

impl Sample {
    /// Uniformly weighted sample.
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let n = points.len();
        Sample::weighted(points, vec![1.0 / n.max(1) as f64; n])
    }

    /// Weights must be nonnegative and sum to one within `1e-12`.
    pub fn weighted(points: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::InvalidArgument("a sample needs at least one point".into()))?;
        let manifold = first.manifold();
        for p in &points {
            manifold.check_same(&p.manifold())?;
        }
        if weights.len() != points.len() {
            return Err(Error::InvalidArgument(format!(
                "{} weights for {} points",
                weights.len(),
                points.len()
            )));
        }
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::InvalidArgument("weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("weights sum to {total}, not 1")));
        }
        Ok(Sample { manifold, points, weights })
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Weighted Euclidean mean of the embedded sample.
    pub fn ambient_mean(&self) -> Coords {
        Coords::weighted_sum(
            self.points
                .iter()
                .zip(&self.weights)
                .map(|(p, &w)| (geometry::embed(p).ambient, w))
                .collect::<Vec<_>>()
                .iter()
                .map(|(c, w)| (c, *w)),
        )
        .expect("non-empty sample")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeanMethod {
    Extrinsic,
    Intrinsic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrechetEstimate {
    pub mean: Point,
    pub method: MeanMethod,
    pub converged: bool,
    /// Gradient evaluations for intrinsic means; zero for extrinsic ones.
    pub iterations: usize,
    pub gradient_norm: f64,
    pub eigen_gap: Option<f64>,
    pub warnings: Vec<String>,
    /// Set when the sample spreads beyond the uniqueness radius, so the
    /// estimate is only known to be a local (Karcher) mean.
    pub local_only: bool,
}

impl FrechetEstimate {
    pub fn label(&self) -> &'static str {
        match (self.method, self.local_only) {
            (MeanMethod::Extrinsic, _) => "extrinsic mean",
            (MeanMethod::Intrinsic, false) => "intrinsic mean",
            (MeanMethod::Intrinsic, true) => "Karcher (local) mean",
        }
    }
}

/// `sum_j w_j dist(p, X_j)^alpha`.
pub fn frechet_function(s: &Sample, p: &Point, alpha: f64) -> Result<f64> {
    if !(alpha >= 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must be >= 1, got {alpha}")));
    }
    s.manifold.check_same(&p.manifold())?;
    let mut total = 0.0;
    for (x, &w) in s.points.iter().zip(&s.weights) {
        total += w * geometry::dist(p, x)?.powf(alpha);
    }
    Ok(total)
}

/// Weighted tangent mean `sum_j w_j log(p, X_j)`.
fn tangent_mean(s: &Sample, p: &Point) -> Result<Coords> {
    let mut acc = p.coords().zeros_like();
    for (x, &w) in s.points.iter().zip(&s.weights) {
        acc.axpy(w, &geometry::log(p, x)?.coords().clone());
    }
    Ok(acc)
}

/// Gradient `-2 sum_j w_j log(p, X_j)` of the Fréchet function.
pub fn frechet_gradient(s: &Sample, p: &Point) -> Result<TangentVector> {
    s.manifold.check_same(&p.manifold())?;
    if !s.manifold.has_exp_log() {
        return Err(s.manifold.unsupported("log"));
    }
    let g = tangent_mean(s, p)?.scale(-2.0);
    Ok(TangentVector::zero(p).with_coords(g))
}

/// `J^{-1}(P(sum_j w_j J(X_j)))`.
pub fn extrinsic_mean(s: &Sample) -> Result<FrechetEstimate> {
    let proj = geometry::project(s.manifold, &s.ambient_mean())?;
    let eigen_gap = matches!(
        s.manifold,
        Manifold::PlanarShape { .. }
            | Manifold::ReflectionShape { .. }
            | Manifold::AffineShape { .. }
            | Manifold::RealProjective { .. }
    )
    .then(|| proj.gap());
    Ok(FrechetEstimate {
        mean: proj.point()?,
        method: MeanMethod::Extrinsic,
        converged: true,
        iterations: 0,
        gradient_norm: 0.0,
        eigen_gap,
        warnings: Vec::new(),
        local_only: false,
    })
}

#[derive(Clone, Debug)]
pub struct IntrinsicOptions {
    /// Starting point; defaults to the extrinsic mean.
    pub init: Option<Point>,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for IntrinsicOptions {
    fn default() -> Self {
        IntrinsicOptions { init: None, tol: 1e-10, max_iter: 1000 }
    }
}

/// Fixed-point iteration `mu <- exp(mu, sum_j w_j log(mu, X_j))`.
///
/// Running out of iterations is not an error: the estimate comes back with
/// `converged = false`.
pub fn intrinsic_mean(s: &Sample, opts: &IntrinsicOptions) -> Result<FrechetEstimate> {
    if !s.manifold.has_exp_log() {
        return Err(s.manifold.unsupported("intrinsic mean"));
    }
    let mut warnings = Vec::new();
    let mut mu = match &opts.init {
        Some(p) => {
            s.manifold.check_same(&p.manifold())?;
            p.clone()
        }
        None => match extrinsic_mean(s) {
            Ok(e) => e.mean,
            Err(Error::NonUniqueProjection { .. }) => {
                warnings.push("extrinsic mean is not unique; starting from the first point".to_string());
                s.points[0].clone()
            }
            Err(e) => return Err(e),
        },
    };

    let mut iterations = 0;
    let mut converged = false;
    let mut gradient_norm = f64::INFINITY;
    while iterations < opts.max_iter {
        let step = tangent_mean(s, &mu)?;
        iterations += 1;
        gradient_norm = step.norm();
        if gradient_norm < opts.tol {
            converged = true;
            break;
        }
        mu = geometry::exp(&mu, &TangentVector::zero(&mu).with_coords(step))?;
    }
    if !converged {
        warnings.push(format!(
            "no convergence after {iterations} iterations (tangent mean norm {gradient_norm:e})"
        ));
    }

    let mut local_only = false;
    if let Some(r) = geometry::uniqueness_radius(&s.manifold) {
        let mut spread: f64 = 0.0;
        for (x, &w) in s.points.iter().zip(&s.weights) {
            if w > 0.0 {
                spread = spread.max(geometry::dist(&mu, x)?);
            }
        }
        if spread >= r {
            local_only = true;
            warnings.push(format!(
                "sample radius {spread:.4} about the estimate exceeds the uniqueness radius {r:.4}; \
                 this is a Karcher (local) mean"
            ));
        }
    }

    Ok(FrechetEstimate {
        mean: mu,
        method: MeanMethod::Intrinsic,
        converged,
        iterations,
        gradient_norm,
        eigen_gap: None,
        warnings,
        local_only,
    })
}
