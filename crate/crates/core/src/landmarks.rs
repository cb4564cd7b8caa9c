//! Landmark configurations (k-ads) and their reduction to shape-space points.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{Coords, Manifold, Point};
use crate::linalg;

/// Relative singular-value threshold for rank checks.
pub const RANK_TOL: f64 = 1e-10;

/// `k` labelled landmarks in `R^m`, stored as an `m x k` matrix (one column per landmark).
#[derive(Clone, Debug, PartialEq)]
pub struct KAd {
    coords: DMatrix<f64>,
}

impl KAd {
    pub fn new(coords: DMatrix<f64>) -> Result<Self> {
        let (m, k) = coords.shape();
        if m == 0 || k < 2 {
            return Err(Error::InvalidArgument(format!("a k-ad needs k >= 2 landmarks, got {m}x{k}")));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("landmark coordinates must be finite".into()));
        }
        Ok(KAd { coords })
    }

    /// Builds a k-ad from landmarks given one per row (`k` rows of `m` values).
    pub fn from_landmarks(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidArgument("landmarks have inconsistent dimensions".into()));
        }
        KAd::new(DMatrix::from_fn(m, rows.len(), |i, j| rows[j][i]))
    }

    /// Reads `m * k` values in row-major landmark order.
    pub fn from_flat(m: usize, k: usize, data: &[f64]) -> Result<Self> {
        if data.len() != m * k {
            return Err(Error::InvalidArgument(format!(
                "expected {} landmark coordinates, found {}",
                m * k,
                data.len()
            )));
        }
        KAd::new(DMatrix::from_column_slice(m, k, data))
    }

    pub fn m(&self) -> usize {
        self.coords.nrows()
    }

    pub fn k(&self) -> usize {
        self.coords.ncols()
    }

    pub fn coords(&self) -> &DMatrix<f64> {
        &self.coords
    }

    /// Applies `x -> A x + c` to every landmark.
    pub fn transformed(&self, a: &DMatrix<f64>, c: &DVector<f64>) -> KAd {
        let mut out = a * &self.coords;
        for mut col in out.column_iter_mut() {
            col += c;
        }
        KAd { coords: out }
    }
}

/// Helmertized, unit-norm representative of a k-ad: `x H / |x H|`.
#[derive(Clone, Debug, PartialEq)]
pub struct PreShape {
    matrix: DMatrix<f64>,
}

impl PreShape {
    pub fn m(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn k(&self) -> usize {
        self.matrix.ncols() + 1
    }

    /// The `m x (k-1)` unit-norm matrix.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// For `m = 2`: the complex row `z_j = x_j + i y_j`.
    pub fn as_complex(&self) -> Option<DVector<Complex64>> {
        (self.m() == 2).then(|| {
            DVector::from_fn(self.matrix.ncols(), |j, _| {
                Complex64::new(self.matrix[(0, j)], self.matrix[(1, j)])
            })
        })
    }
}

/// The `k x (k-1)` Helmert sub-matrix.
pub fn helmert_matrix(k: usize) -> Result<DMatrix<f64>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("Helmert matrix needs k >= 2, got {k}")));
    }
    Ok(linalg::helmert(k))
}

pub fn preshape(x: &KAd) -> Result<PreShape> {
    let xh = &x.coords * linalg::helmert(x.k());
    let n = xh.norm();
    if !(n > 0.0) || n < 1e-14 * x.coords.amax() {
        return Err(Error::Degenerate("all landmarks coincide".into()));
    }
    Ok(PreShape { matrix: xh / n })
}

fn relative_rank_gap(a: &DMatrix<f64>, rank: usize) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.max();
    if sv.len() < rank || !(max > 0.0) {
        return 0.0;
    }
    let mut v: Vec<f64> = sv.iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v[rank - 1] / max
}

/// Point of the shape space `target` represented by `p`.
pub fn to_shape(p: &PreShape, target: Manifold) -> Result<Point> {
    let incompatible = || {
        Error::InvalidArgument(format!(
            "preshape of {} landmarks in R^{} does not match {target}",
            p.k(),
            p.m()
        ))
    };
    match target {
        Manifold::PlanarShape { k } if p.m() == 2 && k == p.k() => {
            Point::normalized(target, Coords::ComplexVector(p.as_complex().unwrap()))
        }
        Manifold::ReflectionShape { m, k } if m == p.m() && k == p.k() => {
            let relative = relative_rank_gap(&p.matrix, m);
            if relative < RANK_TOL {
                return Err(Error::RankDeficient { relative });
            }
            Point::normalized(target, Coords::Matrix(p.matrix.clone()))
        }
        Manifold::AffineShape { m, k } if m == p.m() && k == p.k() => affine_from(&p.matrix, target),
        _ => Err(incompatible()),
    }
}

/// Affine shape of a k-ad: the row space of the centered configuration.
pub fn to_affine_shape(x: &KAd) -> Result<Point> {
    let target = Manifold::affine_shape(x.m(), x.k())?;
    affine_from(&(&x.coords * linalg::helmert(x.k())), target)
}

fn affine_from(xh: &DMatrix<f64>, target: Manifold) -> Result<Point> {
    let m = xh.nrows();
    let relative = relative_rank_gap(xh, m);
    if relative < RANK_TOL {
        return Err(Error::RankDeficient { relative });
    }
    Point::normalized(target, Coords::Matrix(xh.transpose().qr().q()))
}

/// Preshape followed by [`to_shape`].
pub fn shape_of(x: &KAd, target: Manifold) -> Result<Point> {
    match target {
        Manifold::AffineShape { .. } => {
            if target != Manifold::affine_shape(x.m(), x.k())? {
                return Err(Error::InvalidArgument(format!("k-ad does not match {target}")));
            }
            to_affine_shape(x)
        }
        _ => to_shape(&preshape(x)?, target),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::embed;

    fn triangle() -> KAd {
        KAd::from_landmarks(&[vec![0.0, 0.0], vec![1.0, 0.2], vec![0.3, 0.9], vec![-0.4, 0.5]]).unwrap()
    }

    #[test]
    fn helmert_columns() {
        let h = helmert_matrix(3).unwrap();
        let s6 = 6f64.sqrt();
        assert!((h.column(1) - DVector::from_vec(vec![1.0 / s6, 1.0 / s6, -2.0 / s6])).amax() < 1e-15);
        assert!(helmert_matrix(1).is_err());
    }

    #[test]
    fn preshape_invariances() {
        let x = triangle();
        let p = preshape(&x).unwrap();
        let y = x.transformed(&(DMatrix::identity(2, 2) * 3.0), &DVector::from_vec(vec![5.0, -2.0]));
        assert!((p.matrix() - preshape(&y).unwrap().matrix()).amax() < 1e-14);
        assert!((p.matrix().norm() - 1.0).abs() < 1e-14);
        let flat = KAd::from_landmarks(&vec![vec![1.0, 1.0]; 4]).unwrap();
        assert!(preshape(&flat).is_err());
    }

    #[test]
    fn planar_rotation_invariance() {
        let x = triangle();
        let t = 0.7f64;
        let r = DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
        let target = Manifold::planar_shape(4).unwrap();
        let a = shape_of(&x, target).unwrap();
        let b = shape_of(&x.transformed(&r, &DVector::zeros(2)), target).unwrap();
        assert!(embed(&a).ambient.max_abs_diff(&embed(&b).ambient) < 1e-10);
    }

    #[test]
    fn reflection_and_rank() {
        let x = KAd::from_landmarks(&[
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.1, 0.3],
            vec![0.2, 1.0, -0.4],
            vec![0.1, 0.3, 1.2],
            vec![-0.5, 0.4, 0.6],
        ])
        .unwrap();
        let target = Manifold::reflection_shape(3, 5).unwrap();
        let mirror = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, 1.0, 1.0]));
        let a = shape_of(&x, target).unwrap();
        let b = shape_of(&x.transformed(&mirror, &DVector::zeros(3)), target).unwrap();
        assert!(a.same_orbit(&b));

        let line: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, 2.0 * i as f64, -(i as f64)]).collect();
        let collinear = KAd::from_landmarks(&line).unwrap();
        assert!(matches!(shape_of(&collinear, target), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn affine_projector() {
        let x = triangle();
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, -0.3, 1.1]);
        let s = to_affine_shape(&x).unwrap();
        let t = to_affine_shape(&x.transformed(&a, &DVector::from_vec(vec![1.0, 3.0]))).unwrap();
        assert!(s.same_orbit(&t));
        let Coords::Matrix(pr) = embed(&s).ambient else { panic!() };
        assert!((&pr * &pr - &pr).amax() < 1e-12);
        assert!((pr.trace() - 2.0).abs() < 1e-12);
    }
}
