//! Landmark configurations in the plane reduced to Kendall shapes.

use mstats::frechet::{extrinsic_mean, intrinsic_mean, IntrinsicOptions, Sample};
use mstats::geometry::dist;
use mstats::landmarks::{preshape, shape_of, KAd};
use mstats::Manifold;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> mstats::Result<()> {
    let template = [[0.0, 0.0], [1.0, 0.0], [1.2, 0.8], [0.4, 1.1], [-0.2, 0.6]];
    let target = Manifold::planar_shape(template.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    // noisy copies, each rotated, scaled and shifted at random
    let mut shapes = Vec::new();
    for _ in 0..30 {
        let rows: Vec<Vec<f64>> =
            template.iter().map(|p| p.iter().map(|x| x + 0.05 * (rng.random::<f64>() - 0.5)).collect()).collect();
        let (a, s) = (rng.random::<f64>() * 6.0, 0.5 + rng.random::<f64>());
        let r = DMatrix::from_row_slice(2, 2, &[a.cos(), -a.sin(), a.sin(), a.cos()]) * s;
        let shift = DVector::from_vec(vec![rng.random::<f64>() * 10.0, rng.random::<f64>() * 10.0]);
        shapes.push(shape_of(&KAd::from_landmarks(&rows)?.transformed(&r, &shift), target)?);
    }

    let base = KAd::from_landmarks(&template.iter().map(|p| p.to_vec()).collect::<Vec<_>>())?;
    println!("preshape of the template:\n{}", preshape(&base)?.matrix());
    let template_shape = shape_of(&base, target)?;

    let s = Sample::new(shapes)?;
    let ext = extrinsic_mean(&s)?;
    let int = intrinsic_mean(&s, &IntrinsicOptions::default())?;
    println!("eigen gap of the extrinsic mean: {:.4}", ext.eigen_gap.unwrap_or(f64::NAN));
    println!("template to extrinsic mean: {:.5}", dist(&template_shape, &ext.mean)?);
    println!("template to intrinsic mean: {:.5}", dist(&template_shape, &int.mean)?);
    println!("extrinsic to intrinsic:     {:.2e}", dist(&ext.mean, &int.mean)?);
    Ok(())
}
