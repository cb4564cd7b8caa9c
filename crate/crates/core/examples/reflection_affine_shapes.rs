//! Three-dimensional reflection shapes and planar affine shapes.

use mstats::frechet::{extrinsic_mean, Sample};
use mstats::inference::{two_sample_extrinsic, InferenceOptions};
use mstats::landmarks::{shape_of, to_affine_shape, KAd};
use mstats::{Manifold, Point};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn noisy(template: &[[f64; 3]], sd: f64, rng: &mut ChaCha8Rng) -> mstats::Result<KAd> {
    KAd::from_landmarks(&template.iter().map(|p| p.iter().map(|x| x + sd * (rng.random::<f64>() - 0.5)).collect()).collect::<Vec<_>>())
}

fn main() -> mstats::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let target = Manifold::reflection_shape(3, 5)?;
    let t1 = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.1], [0.3, 1.0, 0.0], [0.2, 0.4, 1.0], [0.8, 0.9, 0.7]];
    let mut t2 = t1;
    t2[4] = [0.9, 1.1, 0.6];

    let g1: Vec<Point> = (0..30).map(|_| shape_of(&noisy(&t1, 0.1, &mut rng)?, target)).collect::<mstats::Result<_>>()?;
    let g2: Vec<Point> = (0..30).map(|_| shape_of(&noisy(&t2, 0.1, &mut rng)?, target)).collect::<mstats::Result<_>>()?;
    let mirror = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0, 1.0]));
    let x = noisy(&t1, 0.0, &mut rng)?;
    println!("mirror image has the same reflection shape: {}", shape_of(&x, target)?.same_orbit(&shape_of(&x.transformed(&mirror, &DVector::zeros(3)), target)?));

    let (s1, s2) = (Sample::new(g1)?, Sample::new(g2)?);
    println!("eigen gap of group 1 mean: {:.4}", extrinsic_mean(&s1)?.eigen_gap.unwrap());
    let r = two_sample_extrinsic(&s1, &s2, &InferenceOptions::default())?;
    println!("reflection shapes: T = {:.3} on {} dof, p = {:.3e}", r.statistic, r.dof, r.p_value);

    // planar affine shapes: an affine map does not change the shape
    let square = KAd::from_landmarks(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![0.4, 0.3]])?;
    let sheared = square.transformed(&DMatrix::from_row_slice(2, 2, &[1.0, 0.7, 0.0, 2.0]), &DVector::from_vec(vec![3.0, -1.0]));
    let (a, b) = (to_affine_shape(&square)?, to_affine_shape(&sheared)?);
    println!("affine shape invariant under shear: {}", a.same_orbit(&b));
    Ok(())
}
