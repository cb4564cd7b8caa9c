// Acceptance checks, one per criterion. Runs as a plain binary (no libtest
// harness) so each criterion always prints its PASS/FAIL line.

mod common;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use common::*;
use mstats::bayes::{
    self, compare_l1, quadrature::QuadratureGrid, sampling, posterior_sticks, stick_breaking_with, Atom, AtomOrigin, DpPrior, 
    StickOptions, WatsonDensity,
};
use mstats::frechet::{extrinsic_mean, intrinsic_mean, FrechetEstimate, IntrinsicOptions, Sample};
use mstats::geometry::{self, embed, project, Coords, Manifold, Point, SpdMetric, TangentVector};
use mstats::inference::{
    chi2_cdf, chi2_quantile, hessian_lower_bound, hessian_planar_shape, hessian_sphere, matched_pair_test,
    two_sample_extrinsic, two_sample_intrinsic, InferenceOptions, TestReport,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// 1. exp/log round trips

fn round_trips() -> Outcome {
    let start = Instant::now();
    let manifolds = [
        Manifold::sphere(1).unwrap(),
        Manifold::sphere(2).unwrap(),
        Manifold::sphere(6).unwrap(),
        Manifold::planar_shape(3).unwrap(),
        Manifold::planar_shape(6).unwrap(),
        Manifold::real_projective(2).unwrap(),
        Manifold::real_projective(4).unwrap(),
        Manifold::spd(3, SpdMetric::Euclidean).unwrap(),
        Manifold::spd(3, SpdMetric::LogEuclidean).unwrap(),
    ];
    let mut worst = 0.0f64;
    let mut r = rng(1);
    for m in manifolds {
        assert!(m.has_exp_log());
        for _ in 0..1000 {
            let p = random_point(&mut r, m);
            let radius = match m {
                // stay where the Euclidean SPD geodesic remains positive definite
                Manifold::Spd { metric: SpdMetric::Euclidean, .. } => 0.4,
                _ => 0.9 * m.injectivity_radius().unwrap_or(3.0 / 0.9).min(3.0 / 0.9),
            };
            let len = r.random::<f64>() * radius;
            let v = random_tangent(&mut r, &p, len);
            let q = geometry::exp(&p, &v).map_err(|e| format!("exp on {m}: {e}"))?;
            let back = geometry::log(&p, &q).map_err(|e| format!("log on {m}: {e}"))?;
            worst = worst.max(back.coords().sub(v.coords()).norm());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst < 1e-9 && secs < 10.0,
        format!("max |log(p, exp(p, v)) - v| = {worst:.2e} over 9 x 1000 cases in {secs:.2} s"),
    )
}

// 2. closed-form projections against random search

fn hermitian_noise(r: &mut ChaCha8Rng, n: usize, s: f64) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| cplx(gaussian(r), gaussian(r)));
    (&g + g.adjoint()).scale(0.5 * s)
}

fn symmetric_noise(r: &mut ChaCha8Rng, n: usize, s: f64) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| gaussian(r));
    (&g + g.transpose()) * (0.5 * s)
}

fn sq_dist(a: &Coords, b: &Coords) -> f64 {
    a.sub(b).norm().powi(2)
}

/// Smallest objective over `count` random candidates built by `candidate`.
fn random_search(count: usize, seed: u64, target: &Coords, candidate: impl Fn(&mut ChaCha8Rng) -> Coords + Sync) -> f64 {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut r = rng(seed);
            r.set_stream(i as u64);
            sq_dist(&candidate(&mut r), target)
        })
        .reduce(|| f64::INFINITY, f64::min)
}

fn projections() -> Outcome {
    const CANDIDATES: usize = 100_000;
    let mut r = rng(2);
    let mut worst_gap = [0.0f64; 3];
    let mut beaten = 0usize;
    let mut cases: Vec<(Manifold, Coords)> = Vec::new();
    let planar = Manifold::planar_shape(3).unwrap();
    let reflect = Manifold::reflection_shape(2, 3).unwrap();
    let affine = Manifold::affine_shape(2, 4).unwrap();
    for _ in 0..50 {
        let base = random_point(&mut r, planar);
        let Coords::ComplexMatrix(j) = embed(&base).ambient else { unreachable!() };
        cases.push((planar, Coords::ComplexMatrix(j + hermitian_noise(&mut r, 2, 0.3))));
        // reflection targets are averages of embedded points, as extrinsic means are
        let mut avg = DMatrix::zeros(2, 2);
        for _ in 0..3 {
            let a = DMatrix::from_fn(2, 2, |_, _| gaussian(&mut r));
            avg += a.transpose() * &a / (3.0 * a.norm_squared());
        }
        cases.push((reflect, Coords::Matrix(avg)));
        cases.push((affine, Coords::Matrix(symmetric_noise(&mut r, 3, 1.0))));
    }
    for (i, (m, target)) in cases.iter().enumerate() {
        let proj = project(*m, target).map_err(|e| format!("projection on {m}: {e}"))?;
        let ours = sq_dist(&proj.image().ambient, target);
        let oracle = match m {
            Manifold::PlanarShape { .. } => random_search(CANDIDATES, i as u64, target, |r| {
                let z = unit_complex(r, 2);
                Coords::ComplexMatrix(z.conjugate() * z.transpose())
            }),
            Manifold::ReflectionShape { .. } => random_search(CANDIDATES, i as u64, target, |r| {
                let a = DMatrix::from_fn(2, 2, |_, _| gaussian(r));
                let a = &a / a.norm();
                Coords::Matrix(a.transpose() * &a)
            }),
            _ => random_search(CANDIDATES, i as u64, target, |r| {
                let q = DMatrix::from_fn(3, 2, |_, _| gaussian(r)).qr().q();
                Coords::Matrix(&q * q.transpose())
            }),
        };
        if ours > oracle + 1e-12 {
            beaten += 1;
        }
        worst_gap[i % 3] = worst_gap[i % 3].max((oracle - ours).abs());
    }

    // diagonal inputs have exact answers
    let diag = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 0.3, 0.2]));
    let expect_planar = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0, 0.0]));
    let expect_reflect = DMatrix::from_diagonal(&DVector::from_vec(vec![0.6, 0.4, 0.0]));
    let expect_affine = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 0.0]));
    let mut diag_err = 0.0f64;
    let p = project(Manifold::planar_shape(4).unwrap(), &Coords::ComplexMatrix(diag.map(Complex64::from)))
        .map_err(|e| e.to_string())?;
    let Coords::ComplexMatrix(img) = &p.image().ambient else { unreachable!() };
    diag_err = diag_err.max((img - expect_planar.map(Complex64::from)).map(|c| c.norm()).max());
    for (m, expect) in [
        (Manifold::reflection_shape(2, 4).unwrap(), &expect_reflect),
        (Manifold::affine_shape(2, 4).unwrap(), &expect_affine),
    ] {
        let p = project(m, &Coords::Matrix(diag.clone())).map_err(|e| e.to_string())?;
        let Coords::Matrix(img) = &p.image().ambient else { unreachable!() };
        diag_err = diag_err.max((img - expect).amax());
    }
    check(
        worst_gap.iter().all(|&g| g < 1e-3) && beaten == 0 && diag_err <= 1e-12,
        format!(
            "max |oracle - closed form| over 50 cases: planar {:.1e}, reflection {:.1e}, affine {:.1e}; \
             oracle better in {beaten}; diagonal error {diag_err:.1e}",
            worst_gap[0], worst_gap[1], worst_gap[2]
        ),
    )
}

// 3. sphere extrinsic mean

fn sphere_extrinsic_mean() -> Outcome {
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let d = r.random_range(1..=5);
        let n = r.random_range(2..=50);
        let centre = Point::on_sphere(unit_vector(&mut r, d + 1).as_slice()).unwrap();
        let kappa = 0.5 + 10.0 * r.random::<f64>();
        let s = sampling::sample_vmf_concentrated(&centre, kappa, n, &mut r).map_err(|e| e.to_string())?;
        let est = extrinsic_mean(&s).map_err(|e| e.to_string())?;
        let mut m = DVector::zeros(d + 1);
        for p in s.points() {
            m += p.as_vector().unwrap();
        }
        let expect = &m / m.norm();
        worst = worst.max((est.mean.as_vector().unwrap() - expect).amax());
    }
    check(worst <= 1e-12, format!("max deviation from m/|m| over 1000 samples: {worst:.2e}"))
}

// 4. intrinsic means: stationarity and grid search

fn frechet_at(points: &[DVector<f64>], x: &DVector<f64>) -> f64 {
    points.iter().map(|p| sphere_dist(x, p).powi(2)).sum()
}

fn s2_point(theta: f64, phi: f64) -> DVector<f64> {
    DVector::from_vec(vec![theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()])
}

/// Minimizer of the Fréchet function on S^2: a 0.01 grid over the whole
/// sphere refined by a 1e-4 grid around the best node.
fn grid_minimizer_s2(points: &[DVector<f64>]) -> DVector<f64> {
    let search = |t0: f64, t1: f64, p0: f64, p1: f64, step: f64| -> (f64, f64) {
        let nt = ((t1 - t0) / step).ceil() as usize;
        let np = ((p1 - p0) / step).ceil() as usize;
        (0..=nt)
            .into_par_iter()
            .map(|i| {
                let t = t0 + i as f64 * step;
                let mut best = (f64::INFINITY, 0.0, 0.0);
                for j in 0..=np {
                    let p = p0 + j as f64 * step;
                    let f = frechet_at(points, &s2_point(t, p));
                    if f < best.0 {
                        best = (f, t, p);
                    }
                }
                best
            })
            .reduce(|| (f64::INFINITY, 0.0, 0.0), |a, b| if a.0 <= b.0 { a } else { b })
            .pipe(|b| (b.1, b.2))
    };
    let (t, p) = search(0.0, std::f64::consts::PI, 0.0, 2.0 * std::f64::consts::PI, 0.01);
    let (t, p) = search(t - 0.02, t + 0.02, p - 0.02, p + 0.02, 1e-4);
    s2_point(t, p)
}

trait Pipe: Sized {
    fn pipe<T>(self, f: impl FnOnce(Self) -> T) -> T {
        f(self)
    }
}
impl<T> Pipe for T {}

fn intrinsic_means() -> Outcome {
    let mut r = rng(4);
    let mut worst_grad = 0.0f64;
    let mut unconverged = 0;
    let manifolds = [
        Manifold::sphere(2).unwrap(),
        Manifold::sphere(4).unwrap(),
        Manifold::planar_shape(5).unwrap(),
        Manifold::real_projective(3).unwrap(),
        Manifold::spd(2, SpdMetric::LogEuclidean).unwrap(),
    ];
    for m in manifolds {
        for _ in 0..20 {
            let centre = random_point(&mut r, m);
            let points: Vec<Point> = (0..30)
                .map(|_| {
                    let len = 0.6 * r.random::<f64>();
                    let v = random_tangent(&mut r, &centre, len);
                    geometry::exp(&centre, &v).unwrap()
                })
                .collect();
            let s = Sample::new(points).unwrap();
            let est = intrinsic_mean(&s, &IntrinsicOptions::default()).map_err(|e| e.to_string())?;
            if !est.converged {
                unconverged += 1;
                continue;
            }
            let mut g = TangentVector::zero(&est.mean);
            let mut acc = g.coords().clone();
            for (x, w) in s.points().iter().zip(s.weights()) {
                acc.axpy(*w, geometry::log(&est.mean, x).unwrap().coords());
            }
            g = TangentVector::new(&est.mean, acc).unwrap();
            worst_grad = worst_grad.max(g.norm());
        }
    }

    // grid searches on the circle and on S^2
    let mut worst_grid = 0.0f64;
    for trial in 0..5 {
        let centre = Point::on_sphere(&[1.0, 0.0]).unwrap();
        let s = sampling::sample_vmf_concentrated(&centre, 1.0 + trial as f64, 40, &mut r).unwrap();
        let est = intrinsic_mean(&s, &IntrinsicOptions::default()).map_err(|e| e.to_string())?;
        let angles: Vec<f64> = s.points().iter().map(|p| p.as_vector().unwrap()[1].atan2(p.as_vector().unwrap()[0])).collect();
        let f = |t: f64| -> f64 {
            angles
                .iter()
                .map(|a| {
                    let d = (t - a).rem_euclid(2.0 * std::f64::consts::PI);
                    d.min(2.0 * std::f64::consts::PI - d).powi(2)
                })
                .sum()
        };
        let steps = (2.0 * std::f64::consts::PI / 1e-4) as usize;
        let best = (0..steps).map(|i| i as f64 * 1e-4).min_by(|a, b| f(*a).total_cmp(&f(*b))).unwrap();
        let grid = Point::on_sphere(&[best.cos(), best.sin()]).unwrap();
        worst_grid = worst_grid.max(oracle_dist(&grid, &est.mean));

        let centre = Point::on_sphere(unit_vector(&mut r, 3).as_slice()).unwrap();
        let s = sampling::sample_vmf_concentrated(&centre, 2.0 + trial as f64, 40, &mut r).unwrap();
        let est = intrinsic_mean(&s, &IntrinsicOptions::default()).map_err(|e| e.to_string())?;
        let vs: Vec<DVector<f64>> = s.points().iter().map(|p| p.as_vector().unwrap().clone()).collect();
        let grid = grid_minimizer_s2(&vs);
        worst_grid = worst_grid.max(sphere_dist(&grid, est.mean.as_vector().unwrap()));
    }
    check(
        unconverged == 0 && worst_grad < 1e-8 && worst_grid < 1e-3,
        format!(
            "100 samples: max gradient norm {worst_grad:.2e} ({unconverged} unconverged); S1/S2 grid distance max {worst_grid:.2e}"
        ),
    )
}

// 5. Hessians against finite differences

fn fd_hessian(s: &Sample, mu: &Point) -> DMatrix<f64> {
    let basis = geometry::tangent_basis(mu);
    let n = basis.len();
    let h = 1e-4;
    let f = |y: &DVector<f64>| -> f64 {
        let q = geometry::exp(mu, &TangentVector::from_coordinates(&basis, y)).unwrap();
        s.points().iter().zip(s.weights()).map(|(x, w)| w * oracle_dist(&q, x).powi(2)).sum()
    };
    let mut out = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let mut val = 0.0;
            for (sa, sb, sign) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
                let mut y = DVector::zeros(n);
                y[a] += sa * h;
                y[b] += sb * h;
                val += sign * f(&y);
            }
            out[(a, b)] = val / (4.0 * h * h);
            out[(b, a)] = out[(a, b)];
        }
    }
    out
}

fn hessians() -> Outcome {
    let mut r = rng(5);
    let (mut worst_sphere, mut worst_planar, mut worst_bound) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..20 {
        let d = 2 + i % 3;
        let centre = Point::on_sphere(unit_vector(&mut r, d + 1).as_slice()).unwrap();
        let s = sampling::sample_vmf_concentrated(&centre, 10.0, 25, &mut r).unwrap();
        let mu = extrinsic_mean(&s).unwrap().mean;
        let h = hessian_sphere(&s, &mu).map_err(|e| e.to_string())?;
        worst_sphere = worst_sphere.max(rel_frobenius(&fd_hessian(&s, &mu), &h));
        let lb = hessian_lower_bound(&s, &mu, 1.0).map_err(|e| e.to_string())?;
        worst_bound = worst_bound.max((&lb - &h).amax());

        let k = 3 + i % 4;
        let centre = random_point(&mut r, Manifold::planar_shape(k).unwrap());
        let s = sampling::sample_watson_concentrated(&centre, 0.05, 25, &mut r).unwrap();
        let mu = extrinsic_mean(&s).unwrap().mean;
        let h = hessian_planar_shape(&s, &mu).map_err(|e| e.to_string())?;
        worst_planar = worst_planar.max(rel_frobenius(&fd_hessian(&s, &mu), &h));
    }
    check(
        worst_sphere < 1e-4 && worst_planar < 1e-4 && worst_bound < 1e-8,
        format!(
            "relative FD error: sphere {worst_sphere:.2e}, planar shapes {worst_planar:.2e}; bound vs sphere Hessian {worst_bound:.1e}"
        ),
    )
}

// 6. test calibration

fn null_rejections(reps: usize, seed: u64, test: impl Fn(&mut ChaCha8Rng) -> mstats::Result<TestReport> + Sync) -> Result<f64, String> {
    let rejected = (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut r = rng(seed);
            r.set_stream(i as u64);
            test(&mut r).map(|rep| rep.reject as usize)
        })
        .collect::<mstats::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    Ok(rejected.iter().sum::<usize>() as f64 / reps as f64)
}

fn north() -> Point {
    Point::on_sphere(&[0.0, 0.0, 1.0]).unwrap()
}

/// Pairs sharing a latent offset: the same tangent coordinates applied at
/// each mean, then independent noise around both.
fn paired(r: &mut ChaCha8Rng, n: usize, mu1: &Point, mu2: &Point) -> mstats::Result<Vec<(Point, Point)>> {
    let (b1, b2) = (geometry::tangent_basis(mu1), geometry::tangent_basis(mu2));
    (0..n)
        .map(|_| {
            let c = DVector::from_fn(b1.len(), |_, _| 0.15 * gaussian(r));
            let a = geometry::exp(mu1, &TangentVector::from_coordinates(&b1, &c))?;
            let b = geometry::exp(mu2, &TangentVector::from_coordinates(&b2, &c))?;
            Ok((sampling::vmf_draw_concentrated(&a, 40.0, r)?, sampling::vmf_draw_concentrated(&b, 40.0, r)?))
        })
        .collect()
}

fn calibration() -> Outcome {
    let start = Instant::now();
    let opts = InferenceOptions::default();
    let mu = north();
    let n = 200;
    let ext = null_rejections(1000, 61, |r| {
        let a = sampling::sample_vmf_concentrated(&mu, 10.0, n, r)?;
        let b = sampling::sample_vmf_concentrated(&mu, 10.0, n, r)?;
        two_sample_extrinsic(&a, &b, &opts)
    })?;
    let int = null_rejections(1000, 62, |r| {
        let a = sampling::sample_vmf_concentrated(&mu, 10.0, n, r)?;
        let b = sampling::sample_vmf_concentrated(&mu, 10.0, n, r)?;
        two_sample_intrinsic(&a, &b, &opts)
    })?;
    let pair = null_rejections(1000, 63, |r| matched_pair_test(&paired(r, n, &mu, &mu)?, &opts))?;
    let secs = start.elapsed().as_secs_f64();
    let ok = [ext, int, pair].iter().all(|s| (0.03..=0.07).contains(s)) && secs < 300.0;
    check(
        ok,
        format!("empirical size at 0.05: extrinsic {ext:.3}, intrinsic {int:.3}, matched pair {pair:.3} ({secs:.1} s)"),
    )
}

// 7. power and intrinsic/extrinsic agreement

fn power_and_agreement() -> Outcome {
    let opts = InferenceOptions::default();
    let mu1 = north();
    let mu2 = Point::on_sphere(&[0.3f64.sin(), 0.0, 0.3f64.cos()]).unwrap();
    let kappa = 20.0;
    let n = 30;
    let ext = null_rejections(200, 71, |r| {
        let a = sampling::sample_vmf_concentrated(&mu1, kappa, n, r)?;
        let b = sampling::sample_vmf_concentrated(&mu2, kappa, n, r)?;
        two_sample_extrinsic(&a, &b, &opts)
    })?;
    let int = null_rejections(200, 72, |r| {
        let a = sampling::sample_vmf_concentrated(&mu1, kappa, n, r)?;
        let b = sampling::sample_vmf_concentrated(&mu2, kappa, n, r)?;
        two_sample_intrinsic(&a, &b, &opts)
    })?;
    let pair = null_rejections(200, 73, |r| {
        let pairs: Vec<(Point, Point)> = (0..n)
            .map(|_| Ok((sampling::vmf_draw_concentrated(&mu1, kappa, r)?, sampling::vmf_draw_concentrated(&mu2, kappa, r)?)))
            .collect::<mstats::Result<_>>()?;
        matched_pair_test(&pairs, &opts)
    })?;

    // planar shapes of 5 landmarks, concentrated data
    let centre = planar(&[cplx(0.6, 0.2), cplx(-0.1, 0.3), cplx(0.2, -0.5), cplx(0.1, 0.1)]);
    let mut r = rng(74);
    let shift = random_tangent(&mut r, &centre, 0.05);
    let other = geometry::exp(&centre, &shift).unwrap();
    let mut worst = 0.0f64;
    let mut rel = Vec::new();
    for i in 0..50 {
        let mut r = rng(75);
        r.set_stream(i);
        let second = if i % 2 == 0 { &centre } else { &other };
        let a = sampling::sample_watson_concentrated(&centre, 0.005, 40, &mut r).unwrap();
        let b = sampling::sample_watson_concentrated(second, 0.005, 40, &mut r).unwrap();
        let te = two_sample_extrinsic(&a, &b, &opts).map_err(|e| e.to_string())?.statistic;
        let ti = two_sample_intrinsic(&a, &b, &opts).map_err(|e| e.to_string())?.statistic;
        let d = (te - ti).abs() / te.max(ti);
        rel.push(d);
        worst = worst.max(d);
    }
    rel.sort_by(f64::total_cmp);
    check(
        ext > 0.9 && int > 0.9 && pair > 0.9 && worst < 0.1,
        format!(
            "power at separation 0.3: extrinsic {ext:.3}, intrinsic {int:.3}, matched pair {pair:.3}; \
             intrinsic vs extrinsic relative difference median {:.3}, max {worst:.3}",
            rel[rel.len() / 2]
        ),
    )
}

// 8. chi-square numerics

fn chi_square() -> Outcome {
    let mut worst_q = 0.0f64;
    let mut worst_id = 0.0f64;
    let ps: Vec<f64> = (1..1000)
        .map(|i| i as f64 / 1000.0)
        .chain([1e-12, 1e-8, 1e-4, 0.9999, 1.0 - 1e-8])
        .collect();
    for &p in &ps {
        let q = chi2_quantile(2, p).map_err(|e| e.to_string())?;
        let expect = -2.0 * (-p).ln_1p();
        worst_q = worst_q.max((q - expect).abs() / expect.max(1.0));
        for d in 1..=10 {
            let q = chi2_quantile(d, p).map_err(|e| e.to_string())?;
            worst_id = worst_id.max((chi2_cdf(d, q) - p).abs());
        }
    }
    check(
        worst_q < 1e-10 && worst_id < 1e-10,
        format!("d = 2 quantile error {worst_q:.2e}; max |cdf(quantile(p)) - p| for d in 1..10: {worst_id:.2e}"),
    )
}

// 9. Watson normalization

fn watson_normalization() -> Outcome {
    // midpoint rule in u = cos(theta), the S^2 picture of the triangle shapes
    let (nu, nphi) = (4000, 400);
    let mu = planar(&[cplx(0.6, 0.2), cplx(-0.1, 0.3)]);
    let mut out = Vec::new();
    for tau in [0.05, 0.2, 1.0] {
        let total: f64 = (0..nu)
            .into_par_iter()
            .map(|i| {
                let u = -1.0 + (i as f64 + 0.5) * 2.0 / nu as f64;
                let (c, s) = (((1.0 + u) / 2.0).sqrt(), ((1.0 - u) / 2.0).sqrt());
                (0..nphi)
                    .map(|j| {
                        let phi = (j as f64 + 0.5) * 2.0 * std::f64::consts::PI / nphi as f64;
                        let z = planar(&[cplx(c, 0.0), Complex64::from_polar(s, phi)]);
                        bayes::watson_kernel(&z, &mu, tau).unwrap()
                    })
                    .sum::<f64>()
            })
            .sum::<f64>()
            / (nu * nphi) as f64;
        out.push((tau, total));
    }
    check(
        out.iter().all(|(_, v)| (0.999..=1.001).contains(v)),
        out.iter().map(|(t, v)| format!("tau {t}: {v:.6}")).collect::<Vec<_>>().join(", "),
    )
}

// 10. stick-breaking

fn stick_breaking() -> Outcome {
    let p = north();
    let s = stick_breaking_with(&StickOptions::default(), || 0.5, || {
        Ok(Atom { location: p.clone(), tau: 1.0, origin: AtomOrigin::Base })
    })
    .map_err(|e| e.to_string())?;
    let exact = s.weights.iter().enumerate().all(|(j, &w)| w == 0.5f64.powi(j as i32 + 1));

    let mut r = rng(10);
    let data: Vec<Point> = sampling::sample_vmf_concentrated(&p, 5.0, 20, &mut r).unwrap().points().to_vec();
    let b = 5.0;
    let prior = DpPrior::new(Manifold::sphere(2).unwrap(), b).unwrap();
    let (mut total, mut from_data) = (0usize, 0usize);
    while total < 10_000 {
        let sticks = posterior_sticks(&prior, &data, &StickOptions::default(), &mut r).map_err(|e| e.to_string())?;
        total += sticks.len();
        from_data += sticks.atoms.iter().filter(|a| matches!(a.origin, AtomOrigin::Data { .. })).count();
    }
    let expect = 20.0 / (20.0 + b);
    let observed = from_data as f64 / total as f64;
    let se = (expect * (1.0 - expect) / total as f64).sqrt();
    let z = (observed - expect) / se;
    check(
        exact && z.abs() < 3.0,
        format!(
            "halving sticks exact: {exact} ({} atoms); data-atom share {observed:.4} vs {expect:.4} over {total} atoms (z = {z:.2})",
            s.len()
        ),
    )
}

// 11. L1 ordering of density estimates

fn l1_ordering() -> Outcome {
    let start = Instant::now();
    let mu = planar(&[cplx(0.6, 0.2), cplx(-0.1, 0.3)]);
    let truth = WatsonDensity::new(mu.clone(), 0.1).unwrap();
    let prior = DpPrior::new(Manifold::planar_shape(3).unwrap(), 1.0).unwrap();
    let grid = QuadratureGrid::planar_triangles(150, 300);
    let mut held = 0;
    let mut rows = Vec::new();
    for i in 0..50u64 {
        let mut r = rng(110);
        r.set_stream(i);
        let data = sampling::sample_watson_concentrated(&mu, 0.1, 20, &mut r).unwrap();
        let c = compare_l1(&truth, &data, &prior, 10, 1000 + i, &grid).map_err(|e| e.to_string())?;
        if c.np_bayes < c.mle && c.mle < c.kde {
            held += 1;
        }
        rows.push([c.np_bayes, c.mle, c.kde]);
    }
    let median = |j: usize| {
        let mut v: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        v.sort_by(f64::total_cmp);
        0.5 * (v[24] + v[25])
    };
    check(
        held as f64 >= 0.6 * 50.0,
        format!(
            "ordering held in {held}/50; median L1: NP Bayes {:.3}, MLE {:.3}, KDE {:.3} ({:.1} s)",
            median(0),
            median(1),
            median(2),
            start.elapsed().as_secs_f64()
        ),
    )
}

// 12. command line

struct Workdir(PathBuf);

impl Workdir {
    fn new(tag: &str) -> Workdir {
        let dir = std::env::temp_dir().join(format!("mstats-{tag}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        Workdir(dir)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

impl Drop for Workdir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn mstats(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_mstats")).args(args).output().expect("run mstats");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn cli_contract() -> Outcome {
    let w = Workdir::new("acceptance");
    let mut problems = Vec::new();
    let mut runs = 0;

    // every seeded command twice, byte for byte
    let a = w.path("a.csv");
    let b = w.path("b.csv");
    let shapes = w.path("shapes.csv");
    let tri = w.path("tri.csv");
    let sims: Vec<(PathBuf, Vec<String>)> = vec![
        (a.clone(), "--dist vmf --manifold sphere:2 --n 60 --tau 15 --seed 1".split(' ').map(String::from).collect()),
        (b.clone(), "--dist vmf --manifold sphere:2 --n 50 --tau 15 --mu 0.1,0,1 --seed 2".split(' ').map(String::from).collect()),
        (shapes.clone(), "--dist watson --manifold kendall2d:4 --n 30 --tau 0.02 --seed 3".split(' ').map(String::from).collect()),
        (tri.clone(), "--dist watson --manifold kendall2d:3 --n 25 --tau 0.05 --mu 1,0,0.3,0.4 --seed 4".split(' ').map(String::from).collect()),
    ];
    for (path, args) in &sims {
        let mut snapshots = Vec::new();
        for _ in 0..2 {
            let mut full: Vec<&str> = vec!["simulate"];
            full.extend(args.iter().map(String::as_str));
            full.extend(["--out", s(path)]);
            let (code, _) = mstats(&full);
            runs += 1;
            if code != 0 {
                problems.push(format!("simulate {args:?} exited {code}"));
            }
            snapshots.push((std::fs::read(path).unwrap_or_default(), std::fs::read(path.with_extension("json")).unwrap_or_default()));
        }
        if snapshots[0] != snapshots[1] {
            problems.push(format!("simulate {args:?} is not reproducible"));
        }
    }
    let am = w.path("a.json");
    let bm = w.path("b.json");
    let shapes_m = w.path("shapes.json");
    let tri_m = w.path("tri.json");
    let pvals = w.path("p.csv");
    std::fs::write(&pvals, "0.001\n0.2\n0.03\n0.004\n0.8\n").unwrap();

    let commands: Vec<Vec<String>> = vec![
        vec!["mean".into(), s(&am).into()],
        vec!["mean".into(), s(&am).into(), "--method".into(), "intrinsic".into()],
        vec!["mean".into(), s(&shapes_m).into(), "--method".into(), "intrinsic".into()],
        vec!["test2".into(), s(&am).into(), s(&bm).into()],
        vec!["test2".into(), s(&am).into(), s(&bm).into(), "--method".into(), "intrinsic".into()],
        vec!["test2".into(), s(&am).into(), s(&bm).into(), "--bootstrap".into(), "200".into(), "--seed".into(), "9".into()],
        vec!["region".into(), s(&am).into(), "--candidate".into(), "0,0,1".into()],
        vec!["bayes-fit".into(), s(&tri_m).into(), "--draws".into(), "5".into(), "--seed".into(), "3".into()],
        vec![
            "classify".into(),
            "--train".into(),
            format!("north={}", s(&am)),
            "--train".into(),
            format!("tilted={}", s(&bm)),
            "--test".into(),
            s(&am).into(),
            "--draws".into(),
            "4".into(),
            "--seed".into(),
            "5".into(),
        ],
        vec!["fdr".into(), s(&pvals).into()],
    ];
    let mut json_outputs = Vec::new();
    for (i, cmd) in commands.iter().enumerate() {
        let ext = if matches!(cmd[0].as_str(), "classify" | "fdr") { "csv" } else { "json" };
        let out = w.path(&format!("out{i}.{ext}"));
        let mut bytes = Vec::new();
        for _ in 0..2 {
            let mut full: Vec<&str> = cmd.iter().map(String::as_str).collect();
            full.extend(["--out", s(&out)]);
            let (code, _) = mstats(&full);
            runs += 1;
            if code != 0 {
                problems.push(format!("{cmd:?} exited {code}"));
            }
            bytes.push(std::fs::read(&out).unwrap_or_default());
        }
        if bytes[0] != bytes[1] || bytes[0].is_empty() {
            problems.push(format!("{cmd:?} is not byte-reproducible"));
        }
        if ext == "json" {
            json_outputs.push((cmd[0].clone(), bytes.swap_remove(0)));
        }
    }

    // JSON reports parse back into the library types and re-serialize identically
    let mut round_trips = 0;
    for (verb, bytes) in &json_outputs {
        let text = String::from_utf8_lossy(bytes);
        let again = match verb.as_str() {
            "mean" => serde_json::from_str::<FrechetEstimate>(&text).and_then(|v| serde_json::to_string_pretty(&v)),
            "test2" | "region" => serde_json::from_str::<TestReport>(&text).and_then(|v| serde_json::to_string_pretty(&v)),
            "bayes-fit" => serde_json::from_str::<bayes::MixtureDensity>(&text).and_then(|v| serde_json::to_string_pretty(&v)),
            _ => unreachable!(),
        };
        match again {
            Ok(t) if format!("{t}\n") == text => round_trips += 1,
            Ok(_) => problems.push(format!("{verb} JSON changed on a round trip")),
            Err(e) => problems.push(format!("{verb} JSON does not parse back: {e}")),
        }
    }

    // exit codes
    let rp = w.path("rp.csv");
    std::fs::write(&rp, "1,0,0\n0,1,0\n").unwrap();
    let spread = w.path("spread.csv");
    std::fs::write(&spread, "1,0,0\n0,1,0\n0,0,1\n0.6,0.8,0\n").unwrap();
    let flat1 = w.path("flat1.csv");
    let flat2 = w.path("flat2.csv");
    std::fs::write(&flat1, "1,0,0\n1,0,0\n1,0,0\n").unwrap();
    std::fs::write(&flat2, "0,1,0\n0,1,0\n0,1,0\n").unwrap();
    let junk = w.path("junk.csv");
    std::fs::write(&junk, "1,0,zero\n").unwrap();
    let missing = w.path("missing.csv");
    let expected: Vec<(i32, Vec<&str>)> = vec![
        (0, vec!["mean", s(&am)]),
        (0, vec!["--help"]),
        (1, vec!["mean", s(&a), "--manifold", "torus:2"]),
        (1, vec!["mean", s(&am), "--bogus"]),
        (1, vec!["test2", s(&am), s(&bm), "--alpha", "1.5"]),
        (2, vec!["mean", s(&rp), "--manifold", "rproj:2"]),
        (3, vec!["mean", s(&spread), "--manifold", "sphere:2", "--method", "intrinsic", "--max-iter", "1"]),
        (4, vec!["mean", s(&missing), "--manifold", "sphere:2"]),
        (4, vec!["mean", s(&junk), "--manifold", "sphere:2"]),
        (5, vec!["test2", s(&flat1), s(&flat2), "--manifold", "sphere:2"]),
    ];
    for (code, args) in &expected {
        let (got, _) = mstats(args);
        runs += 1;
        if got != *code {
            problems.push(format!("{args:?} exited {got}, expected {code}"));
        }
    }
    let detail = format!(
        "{runs} invocations, {} reproducibility checks, {round_trips}/{} JSON round trips, {} exit-code cases",
        sims.len() + commands.len(),
        json_outputs.len(),
        expected.len()
    );
    if problems.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; problems: {}", problems.join("; ")))
    }
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("geometry round trips", round_trips),
        ("closed-form projections", projections),
        ("sphere extrinsic mean", sphere_extrinsic_mean),
        ("intrinsic mean stationarity", intrinsic_means),
        ("Hessian formulas", hessians),
        ("test calibration", calibration),
        ("test power and agreement", power_and_agreement),
        ("chi-square numerics", chi_square),
        ("Watson normalization", watson_normalization),
        ("stick-breaking", stick_breaking),
        ("density estimate L1 ordering", l1_ordering),
        ("CLI determinism and exit codes", cli_contract),
    ];
    // optional substring filters, as with the default harness
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = format!("criterion {:>2}", i + 1);
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str()) || id.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            Err(format!("panicked: {}", e.downcast_ref::<String>().cloned().unwrap_or_else(|| {
                e.downcast_ref::<&str>().map(|s| s.to_string()).unwrap_or_default()
            })))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("{id} PASS  {name}: {detail} [{secs:.1} s]"),
            Err(detail) => {
                println!("{id} FAIL  {name}: {detail} [{secs:.1} s]");
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
