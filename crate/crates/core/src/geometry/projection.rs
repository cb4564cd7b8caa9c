//! Nearest-point projection onto the embedded image `J(M)` and its differential.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

use super::{Coords, EmbeddedPoint, Manifold, Point, SpdMetric};
use crate::error::{Error, Result};
use crate::linalg::{self, SortedEigen};

/// Eigenvalue gaps below this make the projection non-unique.
pub const GAP_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
enum Spectrum {
    /// Sphere: the ambient vector and its norm.
    Radial(DVector<f64>, f64),
    Real(SortedEigen<f64>),
    Complex(SortedEigen<Complex64>),
    /// SPD: `J(M)` is open in the ambient space.
    Flat,
}

/// Result of projecting an ambient element onto `J(M)`, keeping what the
/// differential needs.
#[derive(Clone, Debug)]
pub struct Projection {
    manifold: Manifold,
    image: EmbeddedPoint,
    gap: f64,
    spectrum: Spectrum,
    frame: Vec<Coords>,
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    /// Sum of the top-`m` eigenprojectors.
    Projector(usize),
    /// Top-`m` eigenprojectors weighted by `lambda_j - mean + 1/m`.
    Shifted(usize),
}

impl Projection {
    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn image(&self) -> &EmbeddedPoint {
        &self.image
    }

    /// The controlling eigenvalue gap (vector norm for spheres, `inf` for SPD).
    pub fn gap(&self) -> f64 {
        self.gap
    }

    /// Orthonormal basis of the tangent space of `J(M)` at the image, in the
    /// ambient inner product.
    pub fn frame(&self) -> &[Coords] {
        &self.frame
    }

    pub fn dimension(&self) -> usize {
        self.frame.len()
    }

    /// Coordinates of an ambient element in [`Projection::frame`].
    pub fn tangent_coords(&self, h: &Coords) -> DVector<f64> {
        DVector::from_iterator(self.frame.len(), self.frame.iter().map(|f| h.inner(f)))
    }

    /// Ambient element with the given frame coordinates.
    pub fn from_tangent_coords(&self, c: &DVector<f64>) -> Coords {
        Coords::weighted_sum(self.frame.iter().zip(c.iter().copied())).expect("non-empty frame")
    }

    /// Point of `M` whose embedding is the image.
    pub fn point(&self) -> Result<Point> {
        let m = self.manifold;
        let coords = match (&self.spectrum, m) {
            (Spectrum::Radial(x, n), _) => Coords::Vector(x / *n),
            (Spectrum::Complex(eig), Manifold::PlanarShape { .. }) => {
                // (p* p) conj(p) = conj(p), so the representative is conj(u).
                Coords::ComplexVector(eig.vectors.column(0).conjugate())
            }
            (Spectrum::Real(eig), Manifold::RealProjective { .. }) => {
                Coords::Vector(eig.vectors.column(0).into_owned())
            }
            (Spectrum::Real(eig), Manifold::AffineShape { m: dim, .. }) => {
                Coords::Matrix(eig.vectors.columns(0, dim).into_owned())
            }
            (Spectrum::Real(eig), Manifold::ReflectionShape { m: dim, .. }) => {
                let c = shifted_weights(&eig.values, dim);
                if let Some(bad) = c.iter().copied().find(|&x| x <= 0.0) {
                    return Err(Error::invalid_point(
                        m,
                        format!("projected matrix has a non-positive weight {bad:e}"),
                    ));
                }
                let n = eig.values.len();
                Coords::Matrix(DMatrix::from_fn(dim, n, |j, l| c[j].sqrt() * eig.vectors[(l, j)]))
            }
            (Spectrum::Flat, Manifold::Spd { metric, .. }) => {
                let Coords::Matrix(a) = &self.image.ambient else { unreachable!() };
                Coords::Matrix(match metric {
                    SpdMetric::LogEuclidean => linalg::sym_exp(a),
                    SpdMetric::Euclidean => a.clone(),
                })
            }
            _ => unreachable!("spectrum kind is fixed by the manifold"),
        };
        Point::normalized(m, coords)
    }

    /// Differential of the projection at the ambient base, applied to `h`.
    pub fn differential(&self, h: &Coords) -> Coords {
        match (&self.spectrum, h) {
            (Spectrum::Radial(x, n), Coords::Vector(h)) => {
                let u = x / *n;
                Coords::Vector((h - &u * u.dot(h)) / *n)
            }
            (Spectrum::Real(eig), Coords::Matrix(h)) => {
                Coords::Matrix(eigen_differential(eig, h, mode_of(self.manifold)))
            }
            (Spectrum::Complex(eig), Coords::ComplexMatrix(h)) => {
                Coords::ComplexMatrix(eigen_differential(eig, h, mode_of(self.manifold)))
            }
            (Spectrum::Complex(eig), Coords::Matrix(h)) => Coords::ComplexMatrix(eigen_differential(
                eig,
                &h.map(Complex64::from),
                mode_of(self.manifold),
            )),
            (Spectrum::Flat, Coords::Matrix(h)) => Coords::Matrix(linalg::hermitian_part(h)),
            _ => panic!("ambient direction has the wrong kind for {}", self.manifold),
        }
    }
}

fn mode_of(m: Manifold) -> Mode {
    match m {
        Manifold::ReflectionShape { m, .. } => Mode::Shifted(m),
        Manifold::AffineShape { m, .. } => Mode::Projector(m),
        _ => Mode::Projector(1),
    }
}

fn ambient_size(m: Manifold) -> usize {
    match m {
        Manifold::Sphere { d } => d + 1,
        Manifold::PlanarShape { k } | Manifold::ReflectionShape { k, .. } | Manifold::AffineShape { k, .. } => k - 1,
        Manifold::RealProjective { m } => m + 1,
        Manifold::Spd { p, .. } => p,
    }
}

fn shifted_weights(values: &[f64], m: usize) -> Vec<f64> {
    let mean = values[..m].iter().sum::<f64>() / m as f64;
    values[..m].iter().map(|&l| l - mean + 1.0 / m as f64).collect()
}

/// Projects an ambient element onto `J(M)`.
pub fn project(manifold: Manifold, ambient: &Coords) -> Result<Projection> {
    let n = ambient_size(manifold);
    let wrong = || Error::InvalidArgument(format!("ambient element has the wrong shape for {manifold}"));
    match (manifold, ambient) {
        (Manifold::Sphere { .. }, Coords::Vector(x)) => {
            if x.len() != n {
                return Err(wrong());
            }
            let norm = x.norm();
            if !(norm >= GAP_TOL) {
                return Err(Error::NonUniqueProjection { gap: norm });
            }
            let u = x / norm;
            let frame = linalg::orthonormal_complement(&u)
                .column_iter()
                .map(|c| Coords::Vector(c.into_owned()))
                .collect();
            Ok(Projection {
                manifold,
                image: EmbeddedPoint { manifold, ambient: Coords::Vector(u) },
                gap: norm,
                spectrum: Spectrum::Radial(x.clone(), norm),
                frame,
            })
        }
        (Manifold::PlanarShape { .. }, Coords::Matrix(a)) => {
            project(manifold, &Coords::ComplexMatrix(a.map(Complex64::from)))
        }
        (Manifold::PlanarShape { .. }, Coords::ComplexMatrix(a)) => {
            if a.shape() != (n, n) {
                return Err(wrong());
            }
            let (eig, image, gap) = eigen_project(a, Mode::Projector(1))?;
            let frame = image_frame(&eig, Mode::Projector(1), Some(Complex64::i()))
                .into_iter()
                .map(Coords::ComplexMatrix)
                .collect();
            Ok(Projection {
                manifold,
                image: EmbeddedPoint { manifold, ambient: Coords::ComplexMatrix(image) },
                gap,
                spectrum: Spectrum::Complex(eig),
                frame,
            })
        }
        (
            Manifold::ReflectionShape { .. } | Manifold::AffineShape { .. } | Manifold::RealProjective { .. },
            Coords::Matrix(a),
        ) => {
            if a.shape() != (n, n) {
                return Err(wrong());
            }
            let mode = mode_of(manifold);
            let (eig, image, gap) = eigen_project(a, mode)?;
            let frame = image_frame(&eig, mode, None).into_iter().map(Coords::Matrix).collect();
            Ok(Projection {
                manifold,
                image: EmbeddedPoint { manifold, ambient: Coords::Matrix(image) },
                gap,
                spectrum: Spectrum::Real(eig),
                frame,
            })
        }
        (Manifold::Spd { metric, .. }, Coords::Matrix(a)) => {
            if a.shape() != (n, n) {
                return Err(wrong());
            }
            let a = linalg::hermitian_part(a);
            if metric == SpdMetric::Euclidean && !linalg::is_positive_definite(&a) {
                return Err(Error::invalid_point(manifold, "ambient matrix is not positive definite"));
            }
            Ok(Projection {
                manifold,
                image: EmbeddedPoint { manifold, ambient: Coords::Matrix(a) },
                gap: f64::INFINITY,
                spectrum: Spectrum::Flat,
                frame: linalg::symmetric_basis(n).into_iter().map(Coords::Matrix).collect(),
            })
        }
        _ => Err(wrong()),
    }
}

/// Shorthand for `project(manifold, base)?.differential(direction)`.
pub fn project_differential(manifold: Manifold, base: &Coords, direction: &Coords) -> Result<Coords> {
    Ok(project(manifold, base)?.differential(direction))
}

fn eigen_project<T: ComplexField<RealField = f64>>(
    a: &DMatrix<T>,
    mode: Mode,
) -> Result<(SortedEigen<T>, DMatrix<T>, f64)> {
    let eig = linalg::eigen_desc(a);
    let n = eig.values.len();
    let m = match mode {
        Mode::Projector(m) | Mode::Shifted(m) => m,
    };
    let gap = if m < n { eig.values[m - 1] - eig.values[m] } else { f64::INFINITY };
    if !(gap >= GAP_TOL) {
        return Err(Error::NonUniqueProjection { gap });
    }
    let weights: Vec<f64> = match mode {
        Mode::Projector(m) => vec![1.0; m],
        Mode::Shifted(m) => {
            let w = shifted_weights(&eig.values, m);
            // averages of embedded points always give positive weights
            if let Some(&low) = w.iter().find(|&&w| !(w > 0.0)) {
                return Err(Error::Degenerate(format!(
                    "shifted weight {low:e} is not positive; the ambient element has no nearest reflection shape"
                )));
            }
            w
        }
    };
    let mut image = DMatrix::<T>::zeros(n, n);
    for (j, &w) in weights.iter().enumerate() {
        let u = eig.vectors.column(j);
        image += (&u * u.adjoint()) * T::from_real(w);
    }
    Ok((eig, image, gap))
}

/// `U X U*` where `X` is the differential in the eigenbasis.
fn eigen_differential<T: ComplexField<RealField = f64>>(
    eig: &SortedEigen<T>,
    h: &DMatrix<T>,
    mode: Mode,
) -> DMatrix<T> {
    let u = &eig.vectors;
    let ht = u.adjoint() * linalg::hermitian_part(h) * u;
    let n = ht.nrows();
    let lam = &eig.values;
    let mut x = DMatrix::<T>::zeros(n, n);
    let m = match mode {
        Mode::Projector(m) | Mode::Shifted(m) => m,
    };
    let weights = match mode {
        Mode::Projector(m) => vec![1.0; m],
        Mode::Shifted(m) => shifted_weights(lam, m),
    };
    for j in 0..m {
        for l in m..n {
            let v = ht[(j, l)].clone() * T::from_real(weights[j] / (lam[j] - lam[l]));
            x[(l, j)] = v.clone().conjugate();
            x[(j, l)] = v;
        }
    }
    if let Mode::Shifted(m) = mode {
        let mean = (0..m).map(|j| ht[(j, j)].clone().real()).sum::<f64>() / m as f64;
        for j in 0..m {
            for l in 0..m {
                x[(j, l)] = if j == l {
                    T::from_real(ht[(j, j)].clone().real() - mean)
                } else {
                    ht[(j, l)].clone()
                };
            }
        }
    }
    u * x * u.adjoint()
}

/// Orthonormal basis of the range of the differential, rotated out of the eigenbasis.
fn image_frame<T: ComplexField<RealField = f64>>(
    eig: &SortedEigen<T>,
    mode: Mode,
    imaginary_unit: Option<T>,
) -> Vec<DMatrix<T>> {
    let u = &eig.vectors;
    let n = u.nrows();
    let s = T::from_real(std::f64::consts::FRAC_1_SQRT_2);
    let rotate = |x: DMatrix<T>| u * x * u.adjoint();
    let pair = |j: usize, l: usize, imaginary: bool| {
        let mut x = DMatrix::<T>::zeros(n, n);
        if imaginary {
            let i = imaginary_unit.clone().expect("complex frame");
            x[(j, l)] = i.clone() * s.clone();
            x[(l, j)] = -(i * s.clone());
        } else {
            x[(j, l)] = s.clone();
            x[(l, j)] = s.clone();
        }
        x
    };
    let m = match mode {
        Mode::Projector(m) | Mode::Shifted(m) => m,
    };
    let mut out = Vec::new();
    let push_cross = |imaginary: bool, out: &mut Vec<DMatrix<T>>| {
        for l in m..n {
            for j in 0..m {
                out.push(rotate(pair(j, l, imaginary)));
            }
        }
    };
    push_cross(false, &mut out);
    if imaginary_unit.is_some() {
        push_cross(true, &mut out);
    }
    if let Mode::Shifted(m) = mode {
        for j in 0..m {
            for l in (j + 1)..m {
                out.push(rotate(pair(j, l, false)));
            }
        }
        let h = linalg::helmert(m);
        for c in 0..(m - 1) {
            let mut x = DMatrix::<T>::zeros(n, n);
            for j in 0..m {
                x[(j, j)] = T::from_real(h[(j, c)]);
            }
            out.push(rotate(x));
        }
    }
    out
}
