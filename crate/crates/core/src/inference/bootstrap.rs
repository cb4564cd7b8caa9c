use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_alpha, embeddings, extrinsic_two_sample_statistic, two_sample_extrinsic, uniform, InferenceOptions, TestReport};
use crate::error::{Error, Result};
use crate::frechet::Sample;
use crate::geometry::Coords;

fn resample<'a>(rng: &mut ChaCha8Rng, r: &[&'a Coords]) -> Vec<&'a Coords> {
    (0..r.len()).map(|_| r[rng.random_range(0..r.len())]).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub replications: usize,
    pub p_value_boot: f64,
    /// Replicates dropped because the projection or covariance degenerated.
    pub failed: usize,
}

/// Extrinsic two-sample test with a pivotal bootstrap p-value.
///
/// Each replicate resamples both groups with replacement and evaluates the
/// statistic on `(Ybar1* - Ybar1) - (Ybar2* - Ybar2)`, i.e. with every group
/// recentred at its own observed mean. Replicate `b` draws from the ChaCha
/// stream `b` of `seed`, so the result does not depend on thread scheduling.
pub fn bootstrap_two_sample(
    s1: &Sample,
    s2: &Sample,
    replications: usize,
    seed: u64,
    opts: &InferenceOptions,
) -> Result<TestReport> {
    check_alpha(opts.alpha)?;
    if replications < 100 {
        return Err(Error::InvalidArgument(format!(
            "the bootstrap needs at least 100 replications, got {replications}"
        )));
    }
    let mut report = two_sample_extrinsic(s1, s2, opts)?;
    let observed = report.statistic;
    let manifold = s1.manifold();
    let (e1, e2) = (embeddings(s1), embeddings(s2));
    let (w1, w2) = (uniform(e1.len()), uniform(e2.len()));
    let r1: Vec<&Coords> = e1.iter().collect();
    let r2: Vec<&Coords> = e2.iter().collect();
    let c1 = Coords::weighted_sum(r1.iter().copied().zip(w1.iter().copied())).unwrap();
    let c2 = Coords::weighted_sum(r2.iter().copied().zip(w2.iter().copied())).unwrap();

    let outcomes: Vec<Result<Option<f64>>> = (0..replications)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let b1 = resample(&mut rng, &r1);
            let b2 = resample(&mut rng, &r2);
            match extrinsic_two_sample_statistic(manifold, [(&b1, &w1), (&b2, &w2)], Some([&c1, &c2]), opts) {
                Ok(t) => Ok(Some(t)),
                Err(Error::NonUniqueProjection { .. } | Error::SingularCovariance { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();

    let mut exceed = 0usize;
    let mut failed = 0usize;
    for o in outcomes {
        match o? {
            Some(t) if t >= observed => exceed += 1,
            Some(_) => {}
            None => failed += 1,
        }
    }
    if failed * 10 > replications {
        return Err(Error::Degenerate(format!(
            "{failed} of {replications} bootstrap replicates had a non-unique projection or singular covariance"
        )));
    }
    report.bootstrap = Some(BootstrapSummary {
        replications,
        p_value_boot: exceed as f64 / (replications - failed) as f64,
        failed,
    });
    Ok(report)
}
