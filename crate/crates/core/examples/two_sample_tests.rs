//! Two-sample tests for equal means on planar shape space.

use mstats::bayes::sampling::sample_watson_concentrated;
use mstats::inference::{bootstrap_two_sample, two_sample_extrinsic, two_sample_intrinsic, InferenceOptions};
use mstats::Point;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> mstats::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let z = |v: &[(f64, f64)]| Point::planar_shape(&v.iter().map(|&(a, b)| Complex64::new(a, b)).collect::<Vec<_>>());
    let mu1 = z(&[(0.6, 0.1), (-0.3, 0.4), (0.2, -0.5), (0.1, 0.2)])?;
    let mu2 = z(&[(0.6, 0.1), (-0.3, 0.5), (0.2, -0.5), (0.0, 0.2)])?;
    let tau = 0.01;
    let a = sample_watson_concentrated(&mu1, tau, 40, &mut rng)?;
    let b = sample_watson_concentrated(&mu2, tau, 40, &mut rng)?;
    let c = sample_watson_concentrated(&mu1, tau, 40, &mut rng)?;
    let opts = InferenceOptions::default();

    for (name, other) in [("shifted", &b), ("same mean", &c)] {
        let e = two_sample_extrinsic(&a, other, &opts)?;
        let i = two_sample_intrinsic(&a, other, &opts)?;
        let boot = bootstrap_two_sample(&a, other, 499, 3, &opts)?;
        println!("{name}:");
        println!("  extrinsic T = {:9.4} (dof {}), p = {:.3e}", e.statistic, e.dof, e.p_value);
        println!("  intrinsic T = {:9.4}, p = {:.3e}", i.statistic, i.p_value);
        println!("  bootstrap p = {:.4} over {} replicates", boot.bootstrap.as_ref().unwrap().p_value_boot, 499);
    }
    Ok(())
}
