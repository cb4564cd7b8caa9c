//! Product-rule quadrature against the uniform probability measure on the
//! circle and on planar triangle shapes.
//!
//! Triangle shapes are parametrized through the sphere,
//! `z = (cos(theta/2), sin(theta/2) e^{i phi})`, which carries the uniform
//! measure to `sin(theta) dtheta dphi / (4 pi)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::mixture::Density;
use crate::error::Result;
use crate::geometry::{Manifold, Point};

#[derive(Clone, Debug)]
pub struct QuadratureGrid {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl QuadratureGrid {
    /// Midpoint rule in `theta` and `phi` on the shape space of triangles.
    pub fn planar_triangles(n_theta: usize, n_phi: usize) -> QuadratureGrid {
        let (dt, dp) = (PI / n_theta as f64, 2.0 * PI / n_phi as f64);
        let mut points = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for i in 0..n_theta {
            let theta = (i as f64 + 0.5) * dt;
            let w = theta.sin() * dt * dp / (4.0 * PI);
            for j in 0..n_phi {
                let phi = (j as f64 + 0.5) * dp;
                let z = [Complex64::new((theta / 2.0).cos(), 0.0), Complex64::from_polar((theta / 2.0).sin(), phi)];
                points.push(Point::planar_shape(&z).expect("unit vector"));
                weights.push(w);
            }
        }
        QuadratureGrid { points, weights }
    }

    /// Midpoint rule on the unit circle.
    pub fn circle(n: usize) -> QuadratureGrid {
        let points = (0..n)
            .map(|j| {
                let a = (j as f64 + 0.5) * 2.0 * PI / n as f64;
                Point::on_sphere(&[a.cos(), a.sin()]).expect("unit vector")
            })
            .collect();
        QuadratureGrid { points, weights: vec![1.0 / n as f64; n] }
    }

    pub fn manifold(&self) -> Manifold {
        self.points[0].manifold()
    }

    pub fn integrate(&self, f: impl Fn(&Point) -> Result<f64> + Sync) -> Result<f64> {
        self.points
            .par_iter()
            .zip(&self.weights)
            .map(|(p, w)| Ok(w * f(p)?))
            .collect::<Result<Vec<f64>>>()
            .map(|v| v.iter().sum())
    }

    /// `int |f - g| d lambda`.
    pub fn l1_distance(&self, f: &dyn Density, g: &dyn Density) -> Result<f64> {
        self.integrate(|p| Ok((f.density(p)? - g.density(p)?).abs()))
    }
}
