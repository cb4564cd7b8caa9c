//! Nearest-point projections onto embedded shape spaces and their differentials.

use mstats::geometry::{embed, project, tangent_basis, Coords};
use mstats::{Manifold, Point};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

fn main() -> mstats::Result<()> {
    // planar shapes: the image of J is the set of rank-one Hermitian projectors
    let k = 4;
    let m = Manifold::planar_shape(k)?;
    let a = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 0.3, 0.2]).map(|x| Complex64::new(x, 0.0)));
    let p = project(m, &Coords::ComplexMatrix(a))?;
    println!("planar projection of diag(0.5, 0.3, 0.2): {:?}, gap {}", p.point()?.to_flat(), p.gap());

    // the differential annihilates directions that only change eigenvalues
    let mut h = DMatrix::zeros(3, 3);
    h[(1, 1)] = Complex64::new(1.0, 0.0);
    let dp = p.differential(&Coords::ComplexMatrix(h));
    println!("|dP(E_22)| = {:.2e}", dp.norm());

    // reflection shapes of 3-d configurations
    let r = Manifold::reflection_shape(3, 5)?;
    let c = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 0.3, 0.2, 0.0]));
    let q = project(r, &Coords::Matrix(c))?;
    println!("reflection projection eigenvalues: {}", embed(&q.point()?).ambient.norm());

    // equal top eigenvalues make the projection non-unique
    let tie = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 0.5, 0.0]).map(|x| Complex64::new(x, 0.0)));
    match project(m, &Coords::ComplexMatrix(tie)) {
        Err(e) => println!("tied spectrum: {e}"),
        Ok(_) => println!("tied spectrum projected"),
    }

    let z = Point::planar_shape(&[Complex64::new(0.6, 0.1), Complex64::new(-0.3, 0.4), Complex64::new(0.2, -0.5)])?;
    println!("tangent space dimension at a planar shape: {}", tangent_basis(&z).len());
    Ok(())
}
