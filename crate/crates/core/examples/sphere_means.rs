//! Extrinsic and intrinsic means of directional data on the unit sphere.

use mstats::bayes::sampling::sample_vmf_concentrated;
use mstats::frechet::{extrinsic_mean, frechet_function, intrinsic_mean, IntrinsicOptions, Sample};
use mstats::geometry::dist;
use mstats::Point;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> mstats::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mu = Point::on_sphere(&[0.2, -0.3, 0.9])?;
    let s = sample_vmf_concentrated(&mu, 8.0, 200, &mut rng)?;

    let ext = extrinsic_mean(&s)?;
    let int = intrinsic_mean(&s, &IntrinsicOptions::default())?;
    println!("true direction      {:?}", mu.to_flat());
    println!("extrinsic mean      {:?}", ext.mean.to_flat());
    println!("intrinsic mean      {:?} ({} iterations)", int.mean.to_flat(), int.iterations);
    println!("distance between    {:.2e}", dist(&ext.mean, &int.mean)?);
    println!("F(intrinsic) = {:.6}, F(extrinsic) = {:.6}", frechet_function(&s, &int.mean, 2.0)?, frechet_function(&s, &ext.mean, 2.0)?);

    // a sample spread over more than a hemisphere only has a local mean
    let t = 100f64.to_radians();
    let mut pts: Vec<Point> = (0..4)
        .map(|i| {
            let a = i as f64 * std::f64::consts::FRAC_PI_2;
            Point::on_sphere(&[t.sin() * a.cos(), t.sin() * a.sin(), t.cos()])
        })
        .collect::<mstats::Result<_>>()?;
    pts.push(Point::on_sphere(&[0.0, 0.0, 1.0])?);
    let spread = intrinsic_mean(&Sample::new(pts)?, &IntrinsicOptions::default())?;
    println!("spread sample: {} at {:?}", spread.label(), spread.mean.to_flat());
    for w in &spread.warnings {
        println!("  warning: {w}");
    }
    Ok(())
}
