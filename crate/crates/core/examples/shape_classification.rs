//! Two-class Bayes classification of triangle shapes with posterior-mean densities.

use mstats::bayes::sampling::sample_watson_concentrated;
use mstats::bayes::{classify, density_estimate, Density, DpPrior, StickOptions};
use mstats::Point;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> mstats::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let a = Point::planar_shape(&[Complex64::new(0.8, 0.0), Complex64::new(0.1, 0.5)])?;
    let b = Point::planar_shape(&[Complex64::new(-0.3, 0.6), Complex64::new(0.7, -0.1)])?;
    let train_a = sample_watson_concentrated(&a, 0.01, 25, &mut rng)?;
    let train_b = sample_watson_concentrated(&b, 0.01, 25, &mut rng)?;
    let prior = DpPrior::new(a.manifold(), 1.0)?;
    let qa = density_estimate(&prior, train_a.points(), 20, 1, &StickOptions::default())?;
    let qb = density_estimate(&prior, train_b.points(), 20, 1, &StickOptions::default())?;
    let groups: [(f64, &dyn Density); 2] = [(0.5, &qa), (0.5, &qb)];

    let mut correct = 0;
    for (truth, centre) in [(0usize, &a), (1, &b)] {
        for x in sample_watson_concentrated(centre, 0.01, 9, &mut rng)?.points() {
            let c = classify(x, &groups)?;
            correct += usize::from(c.label == truth);
            println!("true {truth}  label {}  posterior ({:.3}, {:.3})", c.label, c.posterior[0], c.posterior[1]);
        }
    }
    println!("{correct}/18 held-out shapes classified correctly");
    Ok(())
}
