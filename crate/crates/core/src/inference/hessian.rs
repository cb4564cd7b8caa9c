//! Hessians of the empirical Fréchet function in normal coordinates.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::frechet::Sample;
use crate::geometry::{self, curvature_gap_ratio, Manifold, Point, TangentVector};

/// Normal coordinates `log_mu(X_j)` in the basis `tangent_basis(mu)`.
pub fn normal_coordinates(s: &Sample, mu: &Point) -> Result<Vec<DVector<f64>>> {
    normal_coordinates_in(s, mu, &geometry::tangent_basis(mu))
}

pub(crate) fn normal_coordinates_in(
    s: &Sample,
    mu: &Point,
    basis: &[TangentVector],
) -> Result<Vec<DVector<f64>>> {
    s.manifold().check_same(&mu.manifold())?;
    s.points()
        .iter()
        .map(|x| Ok(geometry::log(mu, x)?.coordinates_in(basis)))
        .collect()
}

/// `(1 - r cot r) / r^2`, with its series near zero.
fn radial_gap(r: f64) -> f64 {
    if r < 1e-4 {
        1.0 / 3.0 + r * r / 45.0
    } else {
        (1.0 - r / r.tan()) / (r * r)
    }
}

/// `r cot r`
fn r_cot(r: f64) -> f64 {
    if r < 1e-4 {
        1.0 - r * r / 3.0
    } else {
        r / r.tan()
    }
}

/// `tan r / r`
fn tan_over_r(r: f64) -> f64 {
    if r < 1e-4 {
        1.0 + r * r / 3.0
    } else {
        r.tan() / r
    }
}

/// Hessian at `mu` for unit-curvature spheres (also used for real projective space):
/// `2 sum_j w_j [ (1 - r cot r)/r^2 y y' + r cot r I ]` with `r = |y|`.
pub fn hessian_sphere(s: &Sample, mu: &Point) -> Result<DMatrix<f64>> {
    match mu.manifold() {
        Manifold::Sphere { .. } | Manifold::RealProjective { .. } => {}
        m => return Err(m.unsupported("sphere Hessian")),
    }
    let ys = normal_coordinates(s, mu)?;
    let d = mu.manifold().dimension();
    let mut h = DMatrix::zeros(d, d);
    for (y, &w) in ys.iter().zip(s.weights()) {
        let r = y.norm();
        h += (y * y.transpose()) * (2.0 * w * radial_gap(r));
        for i in 0..d {
            h[(i, i)] += 2.0 * w * r_cot(r);
        }
    }
    Ok(h)
}

/// Hessian at `mu` on planar shape space in the coordinates
/// `(Re Y^1, .., Re Y^{k-2}, Im Y^1, .., Im Y^{k-2})`.
///
/// With `g = (1 - r cot r)/r^2`, `t = tan r / r` and `a = r cot r`:
///
/// ```text
/// L11_rs = 2 E[ a d_rs + g Re Y^r Re Y^s - t Im Y^r Im Y^s ]
/// L22_rs = 2 E[ a d_rs + g Im Y^r Im Y^s - t Re Y^r Re Y^s ]
/// L12_rs = 2 E[ g Re Y^r Im Y^s + t Im Y^r Re Y^s ],   L21 = L12'
/// ```
pub fn hessian_planar_shape(s: &Sample, mu: &Point) -> Result<DMatrix<f64>> {
    let Manifold::PlanarShape { k } = mu.manifold() else {
        return Err(mu.manifold().unsupported("planar shape Hessian"));
    };
    let q = k - 2;
    let ys = normal_coordinates(s, mu)?;
    let mut h = DMatrix::zeros(2 * q, 2 * q);
    for (y, &w) in ys.iter().zip(s.weights()) {
        let r = y.norm();
        let (g, t, a) = (radial_gap(r), tan_over_r(r), r_cot(r));
        let re = y.rows(0, q);
        let im = y.rows(q, q);
        for i in 0..q {
            for j in 0..q {
                let delta = if i == j { a } else { 0.0 };
                h[(i, j)] += 2.0 * w * (delta + g * re[i] * re[j] - t * im[i] * im[j]);
                h[(q + i, q + j)] += 2.0 * w * (delta + g * im[i] * im[j] - t * re[i] * re[j]);
                h[(i, q + j)] += 2.0 * w * (g * re[i] * im[j] + t * im[i] * re[j]);
            }
        }
    }
    for i in 0..q {
        for j in 0..q {
            h[(q + j, i)] = h[(i, q + j)];
        }
    }
    Ok(h)
}

/// Curvature comparison bound
/// `2 sum_j w_j [ (1 - f(|y|))/|y|^2 y y' + f(|y|) I ]` for sectional curvature `<= c_sup`.
pub fn hessian_lower_bound(s: &Sample, mu: &Point, c_sup: f64) -> Result<DMatrix<f64>> {
    let ys = normal_coordinates(s, mu)?;
    let d = mu.manifold().dimension();
    let mut h = DMatrix::zeros(d, d);
    for (y, &w) in ys.iter().zip(s.weights()) {
        let r = y.norm();
        let f = geometry::curvature_factor(c_sup, r)?;
        h += (y * y.transpose()) * (2.0 * w * curvature_gap_ratio(c_sup, r)?);
        for i in 0..d {
            h[(i, i)] += 2.0 * w * f;
        }
    }
    Ok(h)
}

/// Hessian of the empirical Fréchet function at `mu` for the manifolds with
/// intrinsic inference (flat SPD metrics give `2 I`).
pub fn hessian(s: &Sample, mu: &Point) -> Result<DMatrix<f64>> {
    match mu.manifold() {
        Manifold::Sphere { .. } | Manifold::RealProjective { .. } => hessian_sphere(s, mu),
        Manifold::PlanarShape { .. } => hessian_planar_shape(s, mu),
        Manifold::Spd { .. } => {
            s.manifold().check_same(&mu.manifold())?;
            let d = mu.manifold().dimension();
            Ok(DMatrix::identity(d, d) * 2.0)
        }
        m => Err(Error::Unsupported { manifold: m, operation: "intrinsic Hessian" }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_gives_twice_identity() {
        let mu = Point::on_sphere(&[0.0, 0.0, 1.0]).unwrap();
        let s = Sample::new(vec![mu.clone()]).unwrap();
        let h = hessian_sphere(&s, &mu).unwrap();
        assert!((h - DMatrix::identity(2, 2) * 2.0).amax() < 1e-15);

        let z = [num_complex::Complex64::new(0.3, 0.2), num_complex::Complex64::new(-0.5, 0.1), num_complex::Complex64::new(0.2, 0.7)];
        let p = Point::planar_shape(&z).unwrap();
        let s = Sample::new(vec![p.clone()]).unwrap();
        let h = hessian_planar_shape(&s, &p).unwrap();
        assert!((h - DMatrix::identity(4, 4) * 2.0).amax() < 1e-15);
    }

    #[test]
    fn flat_bound_is_second_moment_plus_identity() {
        let mu = Point::on_sphere(&[0.0, 0.0, 1.0]).unwrap();
        let s = Sample::new(vec![Point::on_sphere(&[0.3, 0.1, 1.0]).unwrap()]).unwrap();
        let h = hessian_lower_bound(&s, &mu, 0.0).unwrap();
        assert!((h - DMatrix::identity(2, 2) * 2.0).amax() < 1e-15);
    }
}
