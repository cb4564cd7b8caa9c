//! Large-sample confidence regions for the mean, tested at candidate points.

use mstats::bayes::sampling::sample_vmf_concentrated;
use mstats::frechet::MeanMethod;
use mstats::inference::{confidence_region_test, InferenceOptions};
use mstats::Point;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> mstats::Result<()> {
    let mu = Point::on_sphere(&[0.0, 0.0, 1.0])?;
    let s = sample_vmf_concentrated(&mu, 15.0, 150, &mut ChaCha8Rng::seed_from_u64(4))?;
    let opts = InferenceOptions::with_alpha(0.05);

    for candidate in [[0.0, 0.0, 1.0], [0.05, 0.0, 1.0], [0.3, 0.0, 1.0]] {
        let c = Point::on_sphere(&candidate)?;
        for method in [MeanMethod::Extrinsic, MeanMethod::Intrinsic] {
            let r = confidence_region_test(&s, &c, method, &opts)?;
            println!(
                "{:?} {:<9?} T = {:8.3}  p = {:.4}  {}",
                candidate,
                method,
                r.statistic,
                r.p_value,
                if r.reject { "outside the 95% region" } else { "inside the 95% region" }
            );
        }
    }
    Ok(())
}
