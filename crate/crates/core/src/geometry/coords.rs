use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Storage shared by points, tangent vectors and ambient (embedded) elements.
///
/// All variants carry the real inner product `Re sum a_i conj(b_i)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Coords {
    Vector(DVector<f64>),
    ComplexVector(DVector<Complex64>),
    Matrix(DMatrix<f64>),
    ComplexMatrix(DMatrix<Complex64>),
}

impl Coords {
    pub fn inner(&self, other: &Coords) -> f64 {
        match (self, other) {
            (Coords::Vector(a), Coords::Vector(b)) => a.dot(b),
            (Coords::Matrix(a), Coords::Matrix(b)) => a.dot(b),
            (Coords::ComplexVector(a), Coords::ComplexVector(b)) => b.dotc(a).re,
            (Coords::ComplexMatrix(a), Coords::ComplexMatrix(b)) => b.dotc(a).re,
            _ => panic!("inner product between mismatched coordinate kinds"),
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            Coords::Vector(a) => a.norm(),
            Coords::Matrix(a) => a.norm(),
            Coords::ComplexVector(a) => a.norm(),
            Coords::ComplexMatrix(a) => a.norm(),
        }
    }

    pub fn scale(&self, s: f64) -> Coords {
        match self {
            Coords::Vector(a) => Coords::Vector(a * s),
            Coords::Matrix(a) => Coords::Matrix(a * s),
            Coords::ComplexVector(a) => Coords::ComplexVector(a * Complex64::from(s)),
            Coords::ComplexMatrix(a) => Coords::ComplexMatrix(a * Complex64::from(s)),
        }
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: f64, other: &Coords) {
        match (self, other) {
            (Coords::Vector(a), Coords::Vector(b)) => a.axpy(s, b, 1.0),
            (Coords::Matrix(a), Coords::Matrix(b)) => *a += b * s,
            (Coords::ComplexVector(a), Coords::ComplexVector(b)) => {
                a.axpy(Complex64::from(s), b, Complex64::from(1.0))
            }
            (Coords::ComplexMatrix(a), Coords::ComplexMatrix(b)) => *a += b * Complex64::from(s),
            _ => panic!("axpy between mismatched coordinate kinds"),
        }
    }

    pub fn sub(&self, other: &Coords) -> Coords {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn zeros_like(&self) -> Coords {
        self.scale(0.0)
    }

    pub fn same_shape(&self, other: &Coords) -> bool {
        match (self, other) {
            (Coords::Vector(a), Coords::Vector(b)) => a.len() == b.len(),
            (Coords::ComplexVector(a), Coords::ComplexVector(b)) => a.len() == b.len(),
            (Coords::Matrix(a), Coords::Matrix(b)) => a.shape() == b.shape(),
            (Coords::ComplexMatrix(a), Coords::ComplexMatrix(b)) => a.shape() == b.shape(),
            _ => false,
        }
    }

    /// Largest entrywise absolute difference (complex modulus for complex kinds).
    pub fn max_abs_diff(&self, other: &Coords) -> f64 {
        match self.sub(other) {
            Coords::Vector(a) => a.amax(),
            Coords::Matrix(a) => a.amax(),
            Coords::ComplexVector(a) => a.iter().map(|c| c.norm()).fold(0.0, f64::max),
            Coords::ComplexMatrix(a) => a.iter().map(|c| c.norm()).fold(0.0, f64::max),
        }
    }

    /// Weighted sum `sum_i w_i x_i` of elements of the same kind.
    pub fn weighted_sum<'a>(items: impl IntoIterator<Item = (&'a Coords, f64)>) -> Option<Coords> {
        let mut acc: Option<Coords> = None;
        for (x, w) in items {
            match acc.as_mut() {
                Some(a) => a.axpy(w, x),
                None => acc = Some(x.scale(w)),
            }
        }
        acc
    }
}
