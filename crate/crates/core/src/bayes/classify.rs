//! Bayes classification rule with plug-in class densities.

use serde::{Deserialize, Serialize};

use super::mixture::Density;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Relative tolerance on `ln(pi_i q_i(x))` for declaring a tie.
const TIE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    /// Smallest index in `ties`.
    pub label: usize,
    /// All classes attaining the maximum of `pi_i q_i(x)`; more than one entry
    /// means the rule cannot separate them.
    pub ties: Vec<usize>,
    pub posterior: Vec<f64>,
}

impl Classification {
    pub fn is_tie(&self) -> bool {
        self.ties.len() > 1
    }
}

/// Assigns `x` to the class maximizing `pi_i q_i(x)`.
pub fn classify(x: &Point, groups: &[(f64, &dyn Density)]) -> Result<Classification> {
    if groups.is_empty() {
        return Err(Error::InvalidArgument("no classes to choose from".into()));
    }
    let total: f64 = groups.iter().map(|g| g.0).sum();
    if groups.iter().any(|g| !(g.0 >= 0.0)) || (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("prior probabilities must be nonnegative and sum to 1, got {total}")));
    }
    let scores = groups
        .iter()
        .map(|(pi, q)| Ok(pi.ln() + q.log_density(x)?))
        .collect::<Result<Vec<f64>>>()?;
    classify_scores(&scores)
}

/// The rule applied to precomputed `ln(pi_i q_i(x))`.
pub(crate) fn classify_scores(scores: &[f64]) -> Result<Classification> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return Err(Error::Degenerate("every class density vanishes at the point".into()));
    }
    let tol = TIE_TOL * max.abs().max(1.0);
    let ties: Vec<usize> = (0..scores.len()).filter(|&i| max - scores[i] <= tol).collect();
    let total: f64 = scores.iter().map(|s| (s - max).exp()).sum();
    let posterior = scores.iter().map(|s| (s - max).exp() / total).collect();
    Ok(Classification { label: ties[0], ties, posterior })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_to_one() {
        let c = classify_scores(&[(0.5f64 * 2.0).ln(), 0.5f64.ln()]).unwrap();
        assert_eq!(c.label, 0);
        assert!((c.posterior[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!(!c.is_tie());
    }

    #[test]
    fn common_scale_and_ties() {
        let a = classify_scores(&[-3.0, -1.0, -2.0]).unwrap();
        let b = classify_scores(&[-3.0 + 50.0, -1.0 + 50.0, -2.0 + 50.0]).unwrap();
        assert_eq!(a.label, 1);
        assert_eq!(a.label, b.label);
        for (p, q) in a.posterior.iter().zip(&b.posterior) {
            assert!((p - q).abs() < 1e-14);
        }
        let t = classify_scores(&[-1.0, -1.0, -4.0]).unwrap();
        assert_eq!(t.ties, vec![0, 1]);
        assert!(classify_scores(&[f64::NEG_INFINITY; 2]).is_err());
    }
}
