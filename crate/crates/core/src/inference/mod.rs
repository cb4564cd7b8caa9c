//! Large-sample inference for Fréchet means: linearizations, confidence
//! regions, two-sample and matched-pair tests.
//!
//! All statistics are quadratic forms `n v' V^{-1} v` in the coordinates of an
//! orthonormal tangent basis, referred to a chi-square law with
//! `dimension()` degrees of freedom. Covariances use divisor `n`.

mod bootstrap;
mod chi2;
mod fdr;
mod hessian;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frechet::{self, IntrinsicOptions, MeanMethod, Sample};
use crate::geometry::{self, Coords, Manifold, Point, Projection};
use crate::linalg;

pub use bootstrap::{bootstrap_two_sample, BootstrapSummary};
pub use chi2::{chi2_cdf, chi2_quantile, chi2_sf, gamma_p, gamma_q, ln_gamma};
pub use fdr::fdr_select;
pub use hessian::{hessian, hessian_lower_bound, hessian_planar_shape, hessian_sphere, normal_coordinates};

#[derive(Clone, Debug)]
pub struct InferenceOptions {
    pub alpha: f64,
    /// Adds `ridge * I` to covariance matrices before inversion.
    pub ridge: Option<f64>,
    /// Orthogonal change of tangent coordinates applied before forming the
    /// quadratic form; statistics do not depend on it.
    pub basis_rotation: Option<DMatrix<f64>>,
}

impl Default for InferenceOptions {
    fn default() -> Self {
        InferenceOptions { alpha: 0.05, ridge: None, basis_rotation: None }
    }
}

impl InferenceOptions {
    pub fn with_alpha(alpha: f64) -> Self {
        InferenceOptions { alpha, ..Default::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Chart {
    LogMap,
    ProjectionDifferential,
}

/// Centre, Hessian and score covariance of a CLT linearization.
#[derive(Clone, Debug, Serialize)]
pub struct CltLinearization {
    pub base: Point,
    pub chart: Chart,
    #[serde(serialize_with = "linalg::serialize_rows")]
    pub lambda_hat: DMatrix<f64>,
    #[serde(serialize_with = "linalg::serialize_rows")]
    pub cov_hat: DMatrix<f64>,
    pub n: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestMethod {
    ExtrinsicTwoSample,
    IntrinsicTwoSample,
    MatchedPair,
    ConfidenceRegion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub method: TestMethod,
    pub n1: usize,
    pub n2: Option<usize>,
    pub alpha: f64,
    pub critical_value: f64,
    pub reject: bool,
    pub bootstrap: Option<BootstrapSummary>,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

fn report(
    statistic: f64,
    dof: usize,
    method: TestMethod,
    n1: usize,
    n2: Option<usize>,
    alpha: f64,
) -> Result<TestReport> {
    let p_value = chi2_sf(dof, statistic);
    Ok(TestReport {
        statistic,
        dof,
        p_value,
        method,
        n1,
        n2,
        alpha,
        critical_value: chi2_quantile(dof, 1.0 - alpha)?,
        reject: p_value < alpha,
        bootstrap: None,
    })
}

/// `n v' V^{-1} v`, after the optional basis rotation.
fn quadratic_statistic(n: usize, v: &DVector<f64>, cov: &DMatrix<f64>, opts: &InferenceOptions) -> Result<f64> {
    let (v, cov) = match &opts.basis_rotation {
        Some(q) => (q * v, q * cov * q.transpose()),
        None => (v.clone(), cov.clone()),
    };
    if v.iter().all(|&x| x == 0.0) {
        // zero under any inverse, including for a vanishing covariance
        return Ok(0.0);
    }
    let inv = linalg::inverse_psd(&cov, opts.ridge)?;
    Ok(n as f64 * linalg::quadratic_form(&v, &inv))
}

fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

fn embeddings(s: &Sample) -> Vec<Coords> {
    s.points().iter().map(|p| geometry::embed(p).ambient).collect()
}

fn weighted_mean(ys: &[&Coords], w: &[f64]) -> Coords {
    Coords::weighted_sum(ys.iter().copied().zip(w.iter().copied())).expect("non-empty sample")
}

/// Linearized scores `d_Y P (Y_j - c)` in the projection frame.
fn scores(proj: &Projection, ys: &[&Coords], center: &Coords) -> Vec<DVector<f64>> {
    ys.iter().map(|y| proj.tangent_coords(&proj.differential(&y.sub(center)))).collect()
}

/// Extrinsic linearization at the sample mean: `cov_hat = B' C B`.
pub fn extrinsic_linearization(s: &Sample) -> Result<CltLinearization> {
    let ys = embeddings(s);
    let refs: Vec<&Coords> = ys.iter().collect();
    let ybar = weighted_mean(&refs, s.weights());
    let proj = geometry::project(s.manifold(), &ybar)?;
    let sc = scores(&proj, &refs, &ybar);
    let d = proj.dimension();
    Ok(CltLinearization {
        base: proj.point()?,
        chart: Chart::ProjectionDifferential,
        lambda_hat: DMatrix::identity(d, d),
        cov_hat: linalg::weighted_covariance(&sc, s.weights()),
        n: s.len(),
    })
}

/// Log-map linearization at `base`: Hessian and `4 Cov(log_base X)`.
pub fn intrinsic_linearization(s: &Sample, base: &Point) -> Result<CltLinearization> {
    let ys = normal_coordinates(s, base)?;
    Ok(CltLinearization {
        base: base.clone(),
        chart: Chart::LogMap,
        lambda_hat: hessian(s, base)?,
        cov_hat: linalg::weighted_covariance(&ys, s.weights()) * 4.0,
        n: s.len(),
    })
}

fn converged_intrinsic_mean(s: &Sample) -> Result<Point> {
    let est = frechet::intrinsic_mean(s, &IntrinsicOptions::default())?;
    if !est.converged {
        return Err(Error::NoConvergence { iterations: est.iterations, gradient_norm: est.gradient_norm });
    }
    Ok(est.mean)
}

fn invert(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("Hessian estimate is singular".into()))
}

/// Tests whether `candidate` is compatible with the sample's mean; the
/// candidate lies in the `1 - alpha` confidence region iff the test does not reject.
///
/// Extrinsic: `n v' (B' S B)^{-1} v` with `v` the frame coordinates of
/// `P(Ybar) - J(candidate)`. Intrinsic: in normal coordinates at the
/// candidate `p`, `n y' L S~^{-1} L y` with `y = log_p(mu_n)`,
/// `L` the Hessian at `p` and `S~ = 4 Cov(log_p X)`.
pub fn confidence_region_test(
    s: &Sample,
    candidate: &Point,
    method: MeanMethod,
    opts: &InferenceOptions,
) -> Result<TestReport> {
    check_alpha(opts.alpha)?;
    s.manifold().check_same(&candidate.manifold())?;
    let n = s.len();
    let statistic = match method {
        MeanMethod::Extrinsic => {
            let ys = embeddings(s);
            let refs: Vec<&Coords> = ys.iter().collect();
            let ybar = weighted_mean(&refs, s.weights());
            let proj = geometry::project(s.manifold(), &ybar)?;
            let v = proj.tangent_coords(&proj.image().ambient.sub(&geometry::embed(candidate).ambient));
            let cov = linalg::weighted_covariance(&scores(&proj, &refs, &ybar), s.weights());
            quadratic_statistic(n, &v, &cov, opts)?
        }
        MeanMethod::Intrinsic => {
            let mu_n = converged_intrinsic_mean(s)?;
            let lin = intrinsic_linearization(s, candidate)?;
            let y = geometry::log(candidate, &mu_n)?.coordinates_in(&geometry::tangent_basis(candidate));
            let v = &lin.lambda_hat * y;
            quadratic_statistic(n, &v, &lin.cov_hat, opts)?
        }
    };
    report(statistic, s.manifold().dimension(), TestMethod::ConfidenceRegion, n, None, opts.alpha)
}

/// Extrinsic two-sample statistic on embedded data. `centers` shifts each
/// group mean before differencing (used by the pivotal bootstrap).
pub(crate) fn extrinsic_two_sample_statistic(
    manifold: Manifold,
    groups: [(&[&Coords], &[f64]); 2],
    centers: Option<[&Coords; 2]>,
    opts: &InferenceOptions,
) -> Result<f64> {
    let [(y1, w1), (y2, w2)] = groups;
    let (n1, n2) = (y1.len(), y2.len());
    let n = n1 + n2;
    let (p1, p2) = (n1 as f64 / n as f64, n2 as f64 / n as f64);
    let m1 = weighted_mean(y1, w1);
    let m2 = weighted_mean(y2, w2);
    let mut pooled = m1.scale(p1);
    pooled.axpy(p2, &m2);
    let proj = geometry::project(manifold, &pooled)?;
    let mut diff = m1.sub(&m2);
    if let Some([c1, c2]) = centers {
        diff.axpy(-1.0, c1);
        diff.axpy(1.0, c2);
    }
    let v = proj.tangent_coords(&proj.differential(&diff));
    let cov1 = linalg::weighted_covariance(&scores(&proj, y1, &m1), w1);
    let cov2 = linalg::weighted_covariance(&scores(&proj, y2, &m2), w2);
    // Var(sqrt(n) (Ybar1 - Ybar2)) = S1 / p1 + S2 / p2
    let cov = cov1 / p1 + cov2 / p2;
    quadratic_statistic(n, &v, &cov, opts)
}

/// Two-sample test for equal extrinsic means, linearized at the pooled
/// ambient mean `p1 Ybar1 + p2 Ybar2`.
pub fn two_sample_extrinsic(s1: &Sample, s2: &Sample, opts: &InferenceOptions) -> Result<TestReport> {
    check_alpha(opts.alpha)?;
    s1.manifold().check_same(&s2.manifold())?;
    let (e1, e2) = (embeddings(s1), embeddings(s2));
    let r1: Vec<&Coords> = e1.iter().collect();
    let r2: Vec<&Coords> = e2.iter().collect();
    let statistic = extrinsic_two_sample_statistic(
        s1.manifold(),
        [(&r1, s1.weights()), (&r2, s2.weights())],
        None,
        opts,
    )?;
    report(statistic, s1.manifold().dimension(), TestMethod::ExtrinsicTwoSample, s1.len(), Some(s2.len()), opts.alpha)
}

/// Two-sample test for equal intrinsic means in normal coordinates at the
/// point `exp_{mu1}(p2 log_{mu1} mu2)` between the two sample means.
pub fn two_sample_intrinsic(s1: &Sample, s2: &Sample, opts: &InferenceOptions) -> Result<TestReport> {
    check_alpha(opts.alpha)?;
    s1.manifold().check_same(&s2.manifold())?;
    let (n1, n2) = (s1.len(), s2.len());
    let n = n1 + n2;
    let (p1, p2) = (n1 as f64 / n as f64, n2 as f64 / n as f64);
    let mu1 = converged_intrinsic_mean(s1)?;
    let mu2 = converged_intrinsic_mean(s2)?;
    let pooled = geometry::exp(&mu1, &geometry::log(&mu1, &mu2)?.scaled(p2))?;
    let basis = geometry::tangent_basis(&pooled);

    let mut v = DVector::zeros(basis.len());
    let mut cov = DMatrix::zeros(basis.len(), basis.len());
    for (s, mu, sign, p) in [(s1, &mu1, 1.0, p1), (s2, &mu2, -1.0, p2)] {
        v += geometry::log(&pooled, mu)?.coordinates_in(&basis) * sign;
        let ys = hessian::normal_coordinates_in(s, &pooled, &basis)?;
        let sigma = linalg::weighted_covariance(&ys, s.weights()) * 4.0;
        let lambda_inv = invert(&hessian(s, &pooled)?)?;
        cov += (&lambda_inv * sigma * &lambda_inv) / p;
    }
    let statistic = quadratic_statistic(n, &v, &cov, opts)?;
    report(statistic, s1.manifold().dimension(), TestMethod::IntrinsicTwoSample, n1, Some(n2), opts.alpha)
}

/// Matched-pair test for equal extrinsic means of the two marginals, with the
/// covariance of paired score differences `S11 + S22 - S12 - S21`.
pub fn matched_pair_test(pairs: &[(Point, Point)], opts: &InferenceOptions) -> Result<TestReport> {
    check_alpha(opts.alpha)?;
    if pairs.len() < 2 {
        return Err(Error::InvalidArgument("the matched-pair test needs at least two pairs".into()));
    }
    let manifold = pairs[0].0.manifold();
    for (a, b) in pairs {
        manifold.check_same(&a.manifold())?;
        manifold.check_same(&b.manifold())?;
    }
    let n = pairs.len();
    let w = uniform(n);
    let e1: Vec<Coords> = pairs.iter().map(|(a, _)| geometry::embed(a).ambient).collect();
    let e2: Vec<Coords> = pairs.iter().map(|(_, b)| geometry::embed(b).ambient).collect();
    let r1: Vec<&Coords> = e1.iter().collect();
    let r2: Vec<&Coords> = e2.iter().collect();
    let m1 = weighted_mean(&r1, &w);
    let m2 = weighted_mean(&r2, &w);
    let mut pooled = m1.scale(0.5);
    pooled.axpy(0.5, &m2);
    let proj = geometry::project(manifold, &pooled)?;
    let v = proj.tangent_coords(&proj.differential(&m1.sub(&m2)));
    let diffs: Vec<DVector<f64>> = scores(&proj, &r1, &m1)
        .into_iter()
        .zip(scores(&proj, &r2, &m2))
        .map(|(a, b)| a - b)
        .collect();
    let cov = linalg::weighted_covariance(&diffs, &w);
    let statistic = quadratic_statistic(n, &v, &cov, opts)?;
    report(statistic, manifold.dimension(), TestMethod::MatchedPair, n, Some(n), opts.alpha)
}
