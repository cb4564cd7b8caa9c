//! Riemannian and embedding primitives for the supported manifolds.
//!
//! Every space is described by a [`Manifold`] value. Points store one
//! representative of their orbit ([`Point`]); comparisons between quotient
//! points go through the equivariant embedding ([`embed`]), which is constant
//! on orbits.
//!
//! | manifold            | representative                         | embedding `J`        |
//! |---------------------|----------------------------------------|----------------------|
//! | `Sphere(d)`         | unit vector in `R^{d+1}`               | inclusion            |
//! | `PlanarShape(k)`    | unit complex `(k-1)`-vector `p`        | `p* p` (Hermitian)   |
//! | `ReflectionShape`   | unit `m x (k-1)` matrix of rank `m`    | `p' p`               |
//! | `AffineShape`       | `(k-1) x m` orthonormal columns `F`    | `F F'`               |
//! | `RealProjective(m)` | unit vector in `R^{m+1}`               | `p p'`               |
//! | `Spd(p)`            | symmetric positive-definite matrix     | `log A` or `A`       |

mod coords;
mod projection;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

pub use coords::Coords;
pub use projection::{project, project_differential, Projection, GAP_TOL};

/// Tolerance for the norm / orthonormality / symmetry constraints of a point.
pub const POINT_TOL: f64 = 1e-10;
/// Tolerance used when comparing embedded images of quotient points.
pub const ORBIT_TOL: f64 = 1e-9;
/// Distance to the injectivity radius below which `log` refuses to answer.
pub const CUT_LOCUS_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpdMetric {
    /// Frobenius distance between the matrices themselves.
    Euclidean,
    /// Frobenius distance between matrix logarithms.
    LogEuclidean,
}

/// Which space a point lives on, with its size parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Manifold {
    Sphere { d: usize },
    PlanarShape { k: usize },
    ReflectionShape { m: usize, k: usize },
    AffineShape { m: usize, k: usize },
    RealProjective { m: usize },
    Spd { p: usize, metric: SpdMetric },
}

impl Manifold {
    pub fn sphere(d: usize) -> Result<Self> {
        Manifold::Sphere { d }.validated()
    }

    pub fn planar_shape(k: usize) -> Result<Self> {
        Manifold::PlanarShape { k }.validated()
    }

    pub fn reflection_shape(m: usize, k: usize) -> Result<Self> {
        Manifold::ReflectionShape { m, k }.validated()
    }

    pub fn affine_shape(m: usize, k: usize) -> Result<Self> {
        Manifold::AffineShape { m, k }.validated()
    }

    pub fn real_projective(m: usize) -> Result<Self> {
        Manifold::RealProjective { m }.validated()
    }

    pub fn spd(p: usize, metric: SpdMetric) -> Result<Self> {
        Manifold::Spd { p, metric }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let ok = match self {
            Manifold::Sphere { d } => d >= 1,
            Manifold::PlanarShape { k } => k >= 3,
            Manifold::ReflectionShape { m, k } => m >= 2 && k > m,
            Manifold::AffineShape { m, k } => m >= 1 && k > m + 1,
            Manifold::RealProjective { m } => m >= 1,
            Manifold::Spd { p, .. } => p >= 1,
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::InvalidManifold(format!("size parameters out of range for {self}")))
        }
    }

    /// Intrinsic dimension of the manifold.
    pub fn dimension(&self) -> usize {
        match *self {
            Manifold::Sphere { d } => d,
            Manifold::PlanarShape { k } => 2 * k - 4,
            Manifold::ReflectionShape { m, k } => m * (k - 1) - 1 - m * (m - 1) / 2,
            Manifold::AffineShape { m, k } => m * (k - 1 - m),
            Manifold::RealProjective { m } => m,
            Manifold::Spd { p, .. } => p * (p + 1) / 2,
        }
    }

    /// Whether `exp`, `log` and hence intrinsic means are available.
    pub fn has_exp_log(&self) -> bool {
        !matches!(self, Manifold::ReflectionShape { .. } | Manifold::AffineShape { .. })
    }

    /// Injectivity radius, when known.
    pub fn injectivity_radius(&self) -> Option<f64> {
        match self {
            Manifold::Sphere { .. } => Some(PI),
            Manifold::PlanarShape { .. } | Manifold::RealProjective { .. } => Some(FRAC_PI_2),
            Manifold::Spd { .. } => Some(f64::INFINITY),
            _ => None,
        }
    }

    /// Supremum of the sectional curvatures, when known.
    pub fn curvature_sup(&self) -> Option<f64> {
        match self {
            Manifold::Sphere { .. } | Manifold::RealProjective { .. } => Some(1.0),
            Manifold::PlanarShape { .. } => Some(4.0),
            Manifold::Spd { .. } => Some(0.0),
            _ => None,
        }
    }

    pub(crate) fn check_same(&self, other: &Manifold) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ManifoldMismatch(*self, *other))
        }
    }

    pub(crate) fn unsupported(&self, operation: &'static str) -> Error {
        Error::Unsupported { manifold: *self, operation }
    }

    /// Number of reals in the flat encoding of a point (see [`Point::to_flat`]).
    pub fn flat_len(&self) -> usize {
        match *self {
            Manifold::Sphere { d } => d + 1,
            Manifold::PlanarShape { k } => 2 * (k - 1),
            Manifold::ReflectionShape { m, k } | Manifold::AffineShape { m, k } => m * (k - 1),
            Manifold::RealProjective { m } => m + 1,
            Manifold::Spd { p, .. } => p * p,
        }
    }
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Manifold::Sphere { d } => write!(f, "sphere:{d}"),
            Manifold::PlanarShape { k } => write!(f, "kendall2d:{k}"),
            Manifold::ReflectionShape { m: 3, k } => write!(f, "reflect3d:{k}"),
            Manifold::ReflectionShape { m, k } => write!(f, "reflect:{m}:{k}"),
            Manifold::AffineShape { m, k } => write!(f, "affine:{m}:{k}"),
            Manifold::RealProjective { m } => write!(f, "rproj:{m}"),
            Manifold::Spd { p, metric: SpdMetric::LogEuclidean } => write!(f, "spd:{p}:logeuclid"),
            Manifold::Spd { p, metric: SpdMetric::Euclidean } => write!(f, "spd:{p}:euclid"),
        }
    }
}

impl FromStr for Manifold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let bad = || Error::InvalidManifold(format!("unrecognized manifold key '{s}'"));
        let num = |i: usize| -> Result<usize> {
            parts.get(i).and_then(|p| p.parse().ok()).ok_or_else(bad)
        };
        let manifold = match (parts[0], parts.len()) {
            ("sphere", 2) => Manifold::Sphere { d: num(1)? },
            ("kendall2d", 2) => Manifold::PlanarShape { k: num(1)? },
            ("reflect3d", 2) => Manifold::ReflectionShape { m: 3, k: num(1)? },
            ("reflect", 3) => Manifold::ReflectionShape { m: num(1)?, k: num(2)? },
            ("affine", 3) => Manifold::AffineShape { m: num(1)?, k: num(2)? },
            ("rproj", 2) => Manifold::RealProjective { m: num(1)? },
            ("spd", 2) => Manifold::Spd { p: num(1)?, metric: SpdMetric::LogEuclidean },
            ("spd", 3) => {
                let metric = match parts[2] {
                    "logeuclid" | "log-euclidean" => SpdMetric::LogEuclidean,
                    "euclid" | "euclidean" => SpdMetric::Euclidean,
                    _ => return Err(bad()),
                };
                Manifold::Spd { p: num(1)?, metric }
            }
            _ => return Err(bad()),
        };
        manifold.validated()
    }
}

impl Serialize for Manifold {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Manifold {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A point on a manifold, stored as one representative of its orbit.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    manifold: Manifold,
    coords: Coords,
}

impl Point {
    /// Builds a point, checking the representation constraint at [`POINT_TOL`].
    pub fn new(manifold: Manifold, coords: Coords) -> Result<Self> {
        check_shape(manifold, &coords)?;
        check_constraint(manifold, &coords, POINT_TOL)?;
        Ok(Point { manifold, coords })
    }

    /// Builds a point after projecting `coords` onto the representation
    /// constraint (normalization, orthonormalization or symmetrization).
    pub fn normalized(manifold: Manifold, coords: Coords) -> Result<Self> {
        check_shape(manifold, &coords)?;
        let coords = normalize(manifold, coords)?;
        check_constraint(manifold, &coords, POINT_TOL)?;
        Ok(Point { manifold, coords })
    }

    /// Unit vector on `S^d` from any nonzero vector.
    pub fn on_sphere(v: &[f64]) -> Result<Self> {
        let d = v.len().checked_sub(1).filter(|&d| d >= 1).ok_or_else(|| {
            Error::InvalidArgument("a sphere point needs at least two coordinates".into())
        })?;
        Point::normalized(Manifold::Sphere { d }, Coords::Vector(DVector::from_column_slice(v)))
    }

    /// Planar shape with representative proportional to `z` (already Helmertized).
    pub fn planar_shape(z: &[Complex64]) -> Result<Self> {
        let k = z.len() + 1;
        Point::normalized(
            Manifold::planar_shape(k)?,
            Coords::ComplexVector(DVector::from_column_slice(z)),
        )
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn coords(&self) -> &Coords {
        &self.coords
    }

    pub fn into_coords(self) -> Coords {
        self.coords
    }

    /// Real vector coordinates (Sphere, RealProjective).
    pub fn as_vector(&self) -> Option<&DVector<f64>> {
        match &self.coords {
            Coords::Vector(v) => Some(v),
            _ => None,
        }
    }

    /// Complex representative (PlanarShape).
    pub fn as_complex(&self) -> Option<&DVector<Complex64>> {
        match &self.coords {
            Coords::ComplexVector(v) => Some(v),
            _ => None,
        }
    }

    /// Matrix representative (ReflectionShape, AffineShape, Spd).
    pub fn as_matrix(&self) -> Option<&DMatrix<f64>> {
        match &self.coords {
            Coords::Matrix(m) => Some(m),
            _ => None,
        }
    }

    /// Flat real encoding: vectors as is; complex vectors as interleaved
    /// `(re, im)` pairs; shape matrices pseudo-landmark by pseudo-landmark;
    /// SPD matrices row-major.
    pub fn to_flat(&self) -> Vec<f64> {
        match (&self.manifold, &self.coords) {
            (_, Coords::Vector(v)) => v.iter().copied().collect(),
            (_, Coords::ComplexVector(z)) => z.iter().flat_map(|c| [c.re, c.im]).collect(),
            (Manifold::AffineShape { .. }, Coords::Matrix(f)) => {
                f.transpose().as_slice().to_vec()
            }
            (Manifold::Spd { .. }, Coords::Matrix(a)) => a.transpose().as_slice().to_vec(),
            (_, Coords::Matrix(m)) => m.as_slice().to_vec(),
            (_, Coords::ComplexMatrix(m)) => m.iter().flat_map(|c| [c.re, c.im]).collect(),
        }
    }

    /// Inverse of [`Point::to_flat`]. Constraint violations up to `1e-8` are
    /// accepted and projected away; SPD input is symmetrized.
    pub fn from_flat(manifold: Manifold, data: &[f64]) -> Result<Self> {
        if data.len() != manifold.flat_len() {
            return Err(Error::invalid_point(
                manifold,
                format!("expected {} values, found {}", manifold.flat_len(), data.len()),
            ));
        }
        let coords = match manifold {
            Manifold::Sphere { .. } | Manifold::RealProjective { .. } => {
                Coords::Vector(DVector::from_column_slice(data))
            }
            Manifold::PlanarShape { k } => Coords::ComplexVector(DVector::from_iterator(
                k - 1,
                data.chunks(2).map(|c| Complex64::new(c[0], c[1])),
            )),
            Manifold::ReflectionShape { m, k } => {
                Coords::Matrix(DMatrix::from_column_slice(m, k - 1, data))
            }
            Manifold::AffineShape { m, k } => {
                Coords::Matrix(DMatrix::from_column_slice(m, k - 1, data).transpose())
            }
            Manifold::Spd { p, .. } => {
                let a = DMatrix::from_row_slice(p, p, data);
                let asym = (&a - a.transpose()).amax();
                if asym > 1e-8 * a.amax().max(1.0) {
                    return Err(Error::invalid_point(manifold, "matrix is not symmetric"));
                }
                Coords::Matrix(a)
            }
        };
        check_constraint(manifold, &coords, 1e-8)?;
        Point::normalized(manifold, coords)
    }

    /// Orbit equality, decided by comparing embedded images entrywise.
    pub fn same_orbit(&self, other: &Point) -> bool {
        self.manifold == other.manifold
            && embed(self).ambient.max_abs_diff(&embed(other).ambient) <= ORBIT_TOL
    }
}

#[derive(Serialize, Deserialize)]
struct PointRepr {
    manifold: Manifold,
    coords: Vec<f64>,
}

impl Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PointRepr { manifold: self.manifold, coords: self.to_flat() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = PointRepr::deserialize(d)?;
        let coords = flat_to_coords(repr.manifold, &repr.coords).map_err(serde::de::Error::custom)?;
        // Exact coordinates are kept so that serialization round-trips bit for bit.
        check_constraint(repr.manifold, &coords, 1e-8).map_err(serde::de::Error::custom)?;
        Ok(Point { manifold: repr.manifold, coords })
    }
}

fn flat_to_coords(manifold: Manifold, data: &[f64]) -> Result<Coords> {
    if data.len() != manifold.flat_len() {
        return Err(Error::invalid_point(manifold, "wrong number of coordinates"));
    }
    Ok(match manifold {
        Manifold::Sphere { .. } | Manifold::RealProjective { .. } => {
            Coords::Vector(DVector::from_column_slice(data))
        }
        Manifold::PlanarShape { k } => Coords::ComplexVector(DVector::from_iterator(
            k - 1,
            data.chunks(2).map(|c| Complex64::new(c[0], c[1])),
        )),
        Manifold::ReflectionShape { m, k } => Coords::Matrix(DMatrix::from_column_slice(m, k - 1, data)),
        Manifold::AffineShape { m, k } => {
            Coords::Matrix(DMatrix::from_column_slice(m, k - 1, data).transpose())
        }
        Manifold::Spd { p, .. } => Coords::Matrix(DMatrix::from_row_slice(p, p, data)),
    })
}

fn check_shape(manifold: Manifold, coords: &Coords) -> Result<()> {
    let ok = match (manifold, coords) {
        (Manifold::Sphere { d }, Coords::Vector(v)) => v.len() == d + 1,
        (Manifold::RealProjective { m }, Coords::Vector(v)) => v.len() == m + 1,
        (Manifold::PlanarShape { k }, Coords::ComplexVector(z)) => z.len() == k - 1,
        (Manifold::ReflectionShape { m, k }, Coords::Matrix(a)) => a.shape() == (m, k - 1),
        (Manifold::AffineShape { m, k }, Coords::Matrix(a)) => a.shape() == (k - 1, m),
        (Manifold::Spd { p, .. }, Coords::Matrix(a)) => a.shape() == (p, p),
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::invalid_point(manifold, "coordinates have the wrong shape"))
    }
}

fn normalize(manifold: Manifold, coords: Coords) -> Result<Coords> {
    match manifold {
        Manifold::Sphere { .. }
        | Manifold::RealProjective { .. }
        | Manifold::PlanarShape { .. }
        | Manifold::ReflectionShape { .. } => {
            let n = coords.norm();
            if !(n > 0.0) || !n.is_finite() {
                return Err(Error::invalid_point(manifold, "cannot normalize a zero vector"));
            }
            Ok(coords.scale(1.0 / n))
        }
        Manifold::AffineShape { .. } => {
            let Coords::Matrix(f) = coords else { unreachable!() };
            let q = f.qr().q();
            Ok(Coords::Matrix(q))
        }
        Manifold::Spd { .. } => {
            let Coords::Matrix(a) = coords else { unreachable!() };
            Ok(Coords::Matrix(linalg::hermitian_part(&a)))
        }
    }
}

fn check_constraint(manifold: Manifold, coords: &Coords, tol: f64) -> Result<()> {
    let fail = |reason: String| Err(Error::invalid_point(manifold, reason));
    match (manifold, coords) {
        (Manifold::Sphere { .. } | Manifold::RealProjective { .. } | Manifold::PlanarShape { .. }, c) => {
            let n = c.norm();
            if (n - 1.0).abs() > tol {
                return fail(format!("norm {n} is not 1"));
            }
        }
        (Manifold::ReflectionShape { m, .. }, Coords::Matrix(a)) => {
            let n = a.norm();
            if (n - 1.0).abs() > tol {
                return fail(format!("Frobenius norm {n} is not 1"));
            }
            let sv = a.clone().singular_values();
            let max = sv.max();
            let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
            if sv.len() < m || min < 1e-10 * max {
                return Err(Error::RankDeficient { relative: min / max });
            }
        }
        (Manifold::AffineShape { m, .. }, Coords::Matrix(f)) => {
            let err = (f.transpose() * f - DMatrix::<f64>::identity(m, m)).amax();
            if err > tol {
                return fail(format!("columns are not orthonormal (error {err:e})"));
            }
        }
        (Manifold::Spd { .. }, Coords::Matrix(a)) => {
            let asym = (a - a.transpose()).amax();
            if asym > tol * a.amax().max(1.0) {
                return fail("matrix is not symmetric".into());
            }
            if !linalg::is_positive_definite(a) {
                return fail("matrix is not positive definite".into());
            }
        }
        _ => return fail("coordinates have the wrong type".into()),
    }
    Ok(())
}

/// A tangent vector in the ambient representation of its base point: the
/// tangent plane for spheres, the horizontal subspace for quotient spaces and
/// the space of symmetric matrices (log coordinates) for SPD.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    base: Point,
    coords: Coords,
}

impl TangentVector {
    pub fn new(base: &Point, coords: Coords) -> Result<Self> {
        if std::mem::discriminant(base.coords()) != std::mem::discriminant(&coords)
            || !coords.same_shape(base.coords())
        {
            return Err(Error::invalid_point(base.manifold, "tangent coordinates have the wrong shape"));
        }
        let scale = coords.norm().max(1.0);
        let violation = tangency_violation(base, &coords);
        if violation > POINT_TOL * scale {
            return Err(Error::invalid_point(
                base.manifold,
                format!("vector is not tangent (violation {violation:e})"),
            ));
        }
        Ok(TangentVector { base: base.clone(), coords })
    }

    pub(crate) fn with_coords(self, coords: Coords) -> Self {
        TangentVector { base: self.base, coords }
    }

    pub fn zero(base: &Point) -> Self {
        TangentVector { base: base.clone(), coords: base.coords.zeros_like() }
    }

    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn coords(&self) -> &Coords {
        &self.coords
    }

    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }

    pub fn inner(&self, other: &TangentVector) -> f64 {
        self.coords.inner(&other.coords)
    }

    pub fn scaled(&self, s: f64) -> TangentVector {
        TangentVector { base: self.base.clone(), coords: self.coords.scale(s) }
    }

    /// Coordinates with respect to an orthonormal basis.
    pub fn coordinates_in(&self, basis: &[TangentVector]) -> DVector<f64> {
        DVector::from_iterator(basis.len(), basis.iter().map(|b| self.inner(b)))
    }

    /// Linear combination `sum_i c_i b_i` of basis vectors.
    pub fn from_coordinates(basis: &[TangentVector], c: &DVector<f64>) -> TangentVector {
        let first = &basis[0];
        let mut acc = first.coords.zeros_like();
        for (b, &ci) in basis.iter().zip(c.iter()) {
            acc.axpy(ci, &b.coords);
        }
        TangentVector { base: first.base.clone(), coords: acc }
    }
}

fn tangency_violation(base: &Point, v: &Coords) -> f64 {
    match (base.manifold, &base.coords, v) {
        (Manifold::Sphere { .. } | Manifold::RealProjective { .. }, p, v) => p.inner(v).abs(),
        (Manifold::PlanarShape { .. }, Coords::ComplexVector(p), Coords::ComplexVector(v)) => {
            p.dotc(v).norm()
        }
        (Manifold::ReflectionShape { .. }, Coords::Matrix(p), Coords::Matrix(v)) => {
            let pv = p * v.transpose();
            (pv.trace()).abs().max((&pv - pv.transpose()).amax())
        }
        (Manifold::AffineShape { .. }, Coords::Matrix(f), Coords::Matrix(x)) => {
            (f.transpose() * x).amax()
        }
        (Manifold::Spd { .. }, _, Coords::Matrix(v)) => (v - v.transpose()).amax(),
        _ => f64::INFINITY,
    }
}

/// Image `J(p)` of a point in the ambient Euclidean space of the embedding.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddedPoint {
    pub manifold: Manifold,
    pub ambient: Coords,
}

/// Equivariant embedding `J`.
pub fn embed(p: &Point) -> EmbeddedPoint {
    let ambient = match (p.manifold, &p.coords) {
        (Manifold::Sphere { .. }, c) => c.clone(),
        (Manifold::PlanarShape { .. }, Coords::ComplexVector(z)) => {
            // (p* p)_{ij} = conj(p_i) p_j for the row vector p.
            Coords::ComplexMatrix(z.conjugate() * z.transpose())
        }
        (Manifold::ReflectionShape { .. }, Coords::Matrix(a)) => Coords::Matrix(a.transpose() * a),
        (Manifold::AffineShape { .. }, Coords::Matrix(f)) => Coords::Matrix(f * f.transpose()),
        (Manifold::RealProjective { .. }, Coords::Vector(v)) => Coords::Matrix(v * v.transpose()),
        (Manifold::Spd { metric: SpdMetric::LogEuclidean, .. }, Coords::Matrix(a)) => {
            Coords::Matrix(linalg::spd_log(a).expect("validated SPD point"))
        }
        (Manifold::Spd { metric: SpdMetric::Euclidean, .. }, Coords::Matrix(a)) => {
            Coords::Matrix(a.clone())
        }
        _ => unreachable!("point coordinates are validated at construction"),
    };
    EmbeddedPoint { manifold: p.manifold, ambient }
}

/// Geodesic distance for manifolds with intrinsic geometry; embedding
/// (chord) distance for reflection and affine shape spaces.
pub fn dist(a: &Point, b: &Point) -> Result<f64> {
    a.manifold.check_same(&b.manifold)?;
    Ok(match (a.manifold, &a.coords, &b.coords) {
        (Manifold::Sphere { .. }, Coords::Vector(x), Coords::Vector(y)) => {
            let c = x.dot(y);
            (y - x * c).norm().atan2(c)
        }
        (Manifold::RealProjective { .. }, Coords::Vector(x), Coords::Vector(y)) => {
            let c = x.dot(y);
            (y - x * c).norm().atan2(c.abs())
        }
        (Manifold::PlanarShape { .. }, Coords::ComplexVector(p), Coords::ComplexVector(q)) => {
            let (aligned, c) = align_phase(p, q);
            (aligned - p * Complex64::from(c)).norm().atan2(c)
        }
        (Manifold::Spd { metric: SpdMetric::LogEuclidean, .. }, Coords::Matrix(x), Coords::Matrix(y)) => {
            (linalg::spd_log(x)? - linalg::spd_log(y)?).norm()
        }
        (Manifold::Spd { metric: SpdMetric::Euclidean, .. }, Coords::Matrix(x), Coords::Matrix(y)) => {
            (x - y).norm()
        }
        _ => embed(a).ambient.sub(&embed(b).ambient).norm(),
    })
}

/// Rotates `q` by the phase that minimizes its spherical distance to `p`;
/// returns the aligned representative and `|p q*|`.
fn align_phase(p: &DVector<Complex64>, q: &DVector<Complex64>) -> (DVector<Complex64>, f64) {
    // p q* = sum_i p_i conj(q_i)
    let pq = q.dotc(p);
    let c = pq.norm();
    if c == 0.0 {
        return (q.clone(), 0.0);
    }
    (q * (pq / c), c)
}

/// Exponential map.
pub fn exp(base: &Point, v: &TangentVector) -> Result<Point> {
    base.manifold.check_same(&v.base.manifold)?;
    if v.base.coords != base.coords {
        return Err(Error::InvalidArgument("tangent vector is anchored at a different point".into()));
    }
    exp_coords(base, &v.coords)
}

pub(crate) fn exp_coords(base: &Point, v: &Coords) -> Result<Point> {
    let m = base.manifold;
    match m {
        Manifold::Sphere { .. } | Manifold::RealProjective { .. } | Manifold::PlanarShape { .. } => {
            let t = v.norm();
            if t == 0.0 {
                return Ok(base.clone());
            }
            let mut out = base.coords.scale(t.cos());
            out.axpy(t.sin() / t, v);
            let n = out.norm();
            Ok(Point { manifold: m, coords: out.scale(1.0 / n) })
        }
        Manifold::Spd { metric, .. } => {
            let (Coords::Matrix(a), Coords::Matrix(v)) = (&base.coords, v) else { unreachable!() };
            let v = linalg::hermitian_part(v);
            let out = match metric {
                SpdMetric::LogEuclidean => linalg::sym_exp(&(linalg::spd_log(a)? + v)),
                SpdMetric::Euclidean => a + v,
            };
            Point::new(m, Coords::Matrix(linalg::hermitian_part(&out)))
        }
        _ => Err(m.unsupported("exp")),
    }
}

/// Inverse exponential map. Fails inside [`CUT_LOCUS_TOL`] of the cut locus.
pub fn log(base: &Point, q: &Point) -> Result<TangentVector> {
    Ok(TangentVector { base: base.clone(), coords: log_coords(base, q)? })
}

pub(crate) fn log_coords(base: &Point, q: &Point) -> Result<Coords> {
    let m = base.manifold;
    m.check_same(&q.manifold)?;
    match (m, &base.coords, &q.coords) {
        (Manifold::Sphere { .. }, Coords::Vector(p), Coords::Vector(x)) => {
            sphere_log(p, x, PI).map(Coords::Vector)
        }
        (Manifold::RealProjective { .. }, Coords::Vector(p), Coords::Vector(x)) => {
            let x = if p.dot(x) < 0.0 { -x } else { x.clone() };
            sphere_log(p, &x, FRAC_PI_2).map(Coords::Vector)
        }
        (Manifold::PlanarShape { .. }, Coords::ComplexVector(p), Coords::ComplexVector(z)) => {
            let (aligned, c) = align_phase(p, z);
            let w = aligned - p * Complex64::from(c);
            let s = w.norm();
            let r = s.atan2(c);
            if FRAC_PI_2 - r < CUT_LOCUS_TOL {
                return Err(Error::CutLocus { distance: r, radius: FRAC_PI_2 });
            }
            Ok(Coords::ComplexVector(w * Complex64::from(angle_over_sine(r, s))))
        }
        (Manifold::Spd { metric, .. }, Coords::Matrix(a), Coords::Matrix(b)) => Ok(Coords::Matrix(
            match metric {
                SpdMetric::LogEuclidean => linalg::spd_log(b)? - linalg::spd_log(a)?,
                SpdMetric::Euclidean => b - a,
            },
        )),
        _ => Err(m.unsupported("log")),
    }
}

fn sphere_log(p: &DVector<f64>, x: &DVector<f64>, radius: f64) -> Result<DVector<f64>> {
    let c = p.dot(x);
    let w = x - p * c;
    let s = w.norm();
    let r = s.atan2(c);
    if radius - r < CUT_LOCUS_TOL {
        return Err(Error::CutLocus { distance: r, radius });
    }
    Ok(w * angle_over_sine(r, s))
}

/// `r / sin r`, with `s = sin r` supplied; series below `1e-6`.
pub(crate) fn angle_over_sine(r: f64, s: f64) -> f64 {
    if r < 1e-6 {
        1.0 + r * r / 6.0
    } else {
        r / s
    }
}

/// Orthonormal basis of the tangent (horizontal) space at `p`.
///
/// For planar shapes the basis is `{nu_1, .., nu_{k-2}, i nu_1, .., i nu_{k-2}}`
/// with `nu_r` a complex orthonormal basis of the horizontal space.
pub fn tangent_basis(p: &Point) -> Vec<TangentVector> {
    let wrap = |c: Coords| TangentVector { base: p.clone(), coords: c };
    match (p.manifold, &p.coords) {
        (Manifold::Sphere { .. } | Manifold::RealProjective { .. }, Coords::Vector(v)) => {
            let q = linalg::orthonormal_complement(v);
            q.column_iter().map(|c| wrap(Coords::Vector(c.into_owned()))).collect()
        }
        (Manifold::PlanarShape { .. }, Coords::ComplexVector(z)) => {
            let q = linalg::orthonormal_complement(z);
            let nus: Vec<DVector<Complex64>> = q.column_iter().map(|c| c.into_owned()).collect();
            let i = Complex64::i();
            nus.iter()
                .map(|nu| wrap(Coords::ComplexVector(nu.clone())))
                .chain(nus.iter().map(|nu| wrap(Coords::ComplexVector(nu * i))))
                .collect()
        }
        (Manifold::ReflectionShape { m, k }, Coords::Matrix(a)) => {
            reflection_horizontal_basis(a, m, k).into_iter().map(|c| wrap(Coords::Matrix(c))).collect()
        }
        (Manifold::AffineShape { m, k }, Coords::Matrix(f)) => {
            let n = k - 1;
            let mut aug = DMatrix::<f64>::zeros(n, n + m);
            aug.columns_mut(0, m).copy_from(f);
            aug.columns_mut(m, n).fill_with_identity();
            let full = aug.qr().q();
            let mut out = Vec::with_capacity(m * (k - 1 - m));
            for a in m..(k - 1) {
                for j in 0..m {
                    let mut x = DMatrix::zeros(k - 1, m);
                    x.set_column(j, &full.column(a));
                    out.push(wrap(Coords::Matrix(x)));
                }
            }
            out
        }
        (Manifold::Spd { p: n, .. }, _) => {
            linalg::symmetric_basis(n).into_iter().map(|c| wrap(Coords::Matrix(c))).collect()
        }
        _ => unreachable!("point coordinates are validated at construction"),
    }
}

/// Horizontal space at a reflection-shape preshape `a`: matrices `v` with
/// `tr(a v') = 0` and `a v'` symmetric, computed as a null space.
fn reflection_horizontal_basis(a: &DMatrix<f64>, m: usize, k: usize) -> Vec<DMatrix<f64>> {
    let n = m * (k - 1);
    let mut rows: Vec<DVector<f64>> = Vec::new();
    // trace constraint: sum_{ij} a_ij v_ij = 0
    rows.push(DVector::from_column_slice(a.as_slice()));
    // (a v')_{ij} - (a v')_{ji} = sum_l a_il v_jl - a_jl v_il = 0 for i < j
    for i in 0..m {
        for j in (i + 1)..m {
            let mut r = DMatrix::<f64>::zeros(m, k - 1);
            for l in 0..(k - 1) {
                r[(j, l)] += a[(i, l)];
                r[(i, l)] -= a[(j, l)];
            }
            rows.push(DVector::from_column_slice(r.as_slice()));
        }
    }
    let c = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
    // Null space from the full SVD of C'C (symmetric, n x n).
    let eig = linalg::eigen_desc(&(c.transpose() * &c));
    let dim = n - rows.len();
    (n - dim..n)
        .map(|j| DMatrix::from_column_slice(m, k - 1, eig.vectors.column(j).as_slice()))
        .collect()
}

/// Radius of a geodesic ball guaranteeing a unique intrinsic mean:
/// `min(inj, pi / sqrt(C)) / 2`. `None` when the constants are unknown.
pub fn uniqueness_radius(manifold: &Manifold) -> Option<f64> {
    match manifold {
        Manifold::Sphere { .. } => Some(FRAC_PI_2),
        Manifold::PlanarShape { .. } | Manifold::RealProjective { .. } => Some(FRAC_PI_4),
        Manifold::Spd { .. } => Some(f64::INFINITY),
        _ => None,
    }
}

/// Curvature comparison factor `f(t)`: `1` for `C = 0`, `sqrt(C) t cot(sqrt(C) t)`
/// for `C > 0` and `sqrt(-C) t coth(sqrt(-C) t)` for `C < 0`.
pub fn curvature_factor(c: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("curvature factor needs t >= 0, got {t}")));
    }
    if c == 0.0 {
        return Ok(1.0);
    }
    let x = c.abs().sqrt() * t;
    if x < 1e-6 {
        let s = if c > 0.0 { -1.0 } else { 1.0 };
        return Ok(1.0 + s * x * x / 3.0);
    }
    if c > 0.0 {
        if x > FRAC_PI_2 * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "t = {t} exceeds t0 = {} for curvature {c}",
                FRAC_PI_2 / c.sqrt()
            )));
        }
        Ok(x * x.cos() / x.sin())
    } else {
        Ok(x / x.tanh())
    }
}

/// `(1 - f(t)) / t^2`, continuous at `t = 0` where it equals `C / 3`.
pub(crate) fn curvature_gap_ratio(c: f64, t: f64) -> Result<f64> {
    let x = c.abs().sqrt() * t;
    if x < 1e-4 {
        // 1 - x cot x = x^2/3 + x^4/45 + ..., 1 - x coth x = -x^2/3 + x^4/45 - ...
        let x2 = x * x;
        return Ok(c / 3.0 + c.signum() * c * x2 / 45.0);
    }
    Ok((1.0 - curvature_factor(c, t)?) / (t * t))
}
