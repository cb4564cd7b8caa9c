//! Dirichlet-process posterior draws and density estimates for triangle
//! shapes, compared with a parametric fit and a kernel estimate.

use mstats::bayes::quadrature::QuadratureGrid;
use mstats::bayes::sampling::sample_watson_concentrated;
use mstats::bayes::{compare_l1, posterior_draw, AtomOrigin, DpPrior, StickOptions, WatsonDensity};
use mstats::Point;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> mstats::Result<()> {
    let mu = Point::planar_shape(&[Complex64::new(0.6, 0.2), Complex64::new(-0.1, 0.3)])?;
    let truth = WatsonDensity::new(mu.clone(), 0.1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let data = sample_watson_concentrated(&mu, 0.1, 20, &mut rng)?;
    let prior = DpPrior::new(mu.manifold(), 1.0)?;

    let draw = posterior_draw(&prior, data.points(), &StickOptions::default(), &mut rng)?;
    let sticks = draw.components();
    let data_mass: f64 = sticks
        .weights
        .iter()
        .zip(&sticks.atoms)
        .filter(|(_, a)| matches!(a.origin, AtomOrigin::Data { .. }))
        .map(|(w, _)| w)
        .sum();
    println!("one posterior draw: {} atoms, mass on observations {:.3}, residual {:.1e}", sticks.len(), data_mass, sticks.residual);

    let grid = QuadratureGrid::planar_triangles(150, 300);
    for seed in 0..3 {
        let s = sample_watson_concentrated(&mu, 0.1, 20, &mut ChaCha8Rng::seed_from_u64(100 + seed))?;
        let c = compare_l1(&truth, &s, &prior, 10, seed, &grid)?;
        println!("replication {seed}: L1 np-bayes {:.3}  mle {:.3}  kde {:.3}", c.np_bayes, c.mle, c.kde);
    }
    Ok(())
}
