//! Matched-pair test on paired shapes: each subject seen before and after a deformation.

use mstats::inference::{matched_pair_test, InferenceOptions};
use mstats::landmarks::{shape_of, KAd};
use mstats::Manifold;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> mstats::Result<()> {
    let target = Manifold::planar_shape(6)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let template = [[0.0, 0.0], [1.0, 0.0], [1.5, 0.8], [1.0, 1.6], [0.0, 1.6], [-0.5, 0.8]];

    for (label, stretch) in [("no deformation", 0.0), ("landmark 3 pulled out", 0.08)] {
        let mut pairs = Vec::new();
        for _ in 0..25 {
            // subject-specific variation shared by both members of the pair
            let subject: Vec<Vec<f64>> =
                template.iter().map(|p| p.iter().map(|x| x + 0.1 * (rng.random::<f64>() - 0.5)).collect()).collect();
            let jitter = |rng: &mut ChaCha8Rng, rows: &[Vec<f64>]| -> Vec<Vec<f64>> {
                rows.iter().map(|p| p.iter().map(|x| x + 0.01 * (rng.random::<f64>() - 0.5)).collect()).collect()
            };
            let before = jitter(&mut rng, &subject);
            let mut after = jitter(&mut rng, &subject);
            after[2][0] += stretch;
            pairs.push((
                shape_of(&KAd::from_landmarks(&before)?, target)?,
                shape_of(&KAd::from_landmarks(&after)?, target)?,
            ));
        }
        let r = matched_pair_test(&pairs, &InferenceOptions::default())?;
        println!("{label:>22}: T = {:8.3} on {} dof, p = {:.3e}", r.statistic, r.dof, r.p_value);
    }
    Ok(())
}
