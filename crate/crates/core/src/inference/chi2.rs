//! Chi-square distribution function and quantiles.

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Gamma(x)` for `x > 0` (Lanczos approximation, ~15 significant digits).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    match incomplete_gamma(a, x) {
        Tail::Lower(p) => p,
        Tail::Upper(q) => (1.0 - q).max(0.0),
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`, computed
/// without cancellation in the far tail.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    match incomplete_gamma(a, x) {
        Tail::Lower(p) => (1.0 - p).max(0.0),
        Tail::Upper(q) => q,
    }
}

enum Tail {
    Lower(f64),
    Upper(f64),
}

fn incomplete_gamma(a: f64, x: f64) -> Tail {
    if x <= 0.0 {
        return Tail::Lower(0.0);
    }
    if x.is_infinite() {
        return Tail::Upper(0.0);
    }
    let log_prefix = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        // series: sum_n x^n / (a (a+1) ... (a+n))
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..10_000 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        Tail::Lower((sum.ln() + log_prefix).exp().min(1.0))
    } else {
        // modified Lentz continued fraction for Q(a, x)
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        Tail::Upper((h.ln() + log_prefix).exp().min(1.0))
    }
}

/// `P(chi2_d <= x)`.
pub fn chi2_cdf(d: usize, x: f64) -> f64 {
    if !(x > 0.0) {
        return 0.0;
    }
    gamma_p(d as f64 / 2.0, x / 2.0)
}

/// Upper tail `1 - chi2_cdf(d, x)`.
pub fn chi2_sf(d: usize, x: f64) -> f64 {
    if !(x > 0.0) {
        return 1.0;
    }
    gamma_q(d as f64 / 2.0, x / 2.0)
}

/// The `p`-quantile, by bisection to full relative precision. Levels above
/// one half are located on the upper tail, where `1 - p` is exact.
pub fn chi2_quantile(d: usize, p: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidArgument("chi-square needs at least one degree of freedom".into()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!("quantile level must lie in (0, 1), got {p}")));
    }
    let below = |x: f64| if p > 0.5 { chi2_sf(d, x) > 1.0 - p } else { chi2_cdf(d, x) < p };
    let mut hi = d as f64 + 10.0;
    while below(hi) {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * hi {
            break;
        }
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_dof_is_exponential() {
        let q = chi2_quantile(2, 0.5).unwrap();
        assert!((q - 2.0 * 2f64.ln()).abs() < 1e-10);
        for x in [0.1, 1.0, 5.0, 30.0] {
            assert!((chi2_cdf(2, x) - (1.0 - (-x / 2.0).exp())).abs() < 1e-14);
        }
        assert_eq!(chi2_cdf(3, 0.0), 0.0);
        // far tail keeps relative precision: P(chi2_2 > x) = exp(-x/2)
        for x in [100.0, 291.8, 1200.0] {
            let exact = (-x / 2.0f64).exp();
            assert!((chi2_sf(2, x) - exact).abs() < 1e-12 * exact, "{x}");
        }
        assert_eq!(chi2_sf(4, 0.0), 1.0);
    }

    #[test]
    fn ln_gamma_integers() {
        let mut f = 1.0f64;
        for n in 1..20 {
            assert!((ln_gamma(n as f64) - f.ln()).abs() < 1e-12 * f.ln().abs().max(1.0));
            f *= n as f64;
        }
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for d in [1, 2, 3, 5, 10, 26, 60] {
            for p in [0.01, 0.05, 0.5, 0.9, 0.95, 0.999] {
                let q = chi2_quantile(d, p).unwrap();
                assert!((chi2_cdf(d, q) - p).abs() < 1e-10, "d={d} p={p}");
            }
        }
        // tiny levels need relative, not absolute, precision
        let q = chi2_quantile(1, 1e-12).unwrap();
        assert!((chi2_cdf(1, q) - 1e-12).abs() < 1e-20);
        assert!(chi2_quantile(2, 1.0).is_err());
        assert!(chi2_quantile(2, 0.0).is_err());
    }
}
