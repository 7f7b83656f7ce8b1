//! Chi-square distribution via the regularized incomplete gamma function.

use crate::error::{Error, Result};

const MAX_ITER: usize = 100_000;
const TINY: f64 = 1e-300;

/// Lanczos coefficients for g = 7, n = 9.
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let t = x + 7.5;
    let mut sum = LANCZOS[0];
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (x + k as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + sum.ln()
}

/// Regularized incomplete gamma pair `(P(a, x), Q(a, x))`.
fn incomplete_gamma(a: f64, x: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (0.0, 1.0);
    }
    let log_prefactor = -x + a * x.ln() - ln_gamma(a);
    if x < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..MAX_ITER {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * f64::EPSILON {
                break;
            }
        }
        let p = (log_prefactor.exp() * sum).min(1.0);
        (p, 1.0 - p)
    } else {
        // modified Lentz on the continued fraction for Q
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < f64::EPSILON {
                break;
            }
        }
        let q = (log_prefactor.exp() * h).min(1.0);
        (1.0 - q, q)
    }
}

fn check_dof(dof: u64) -> Result<()> {
    if dof == 0 {
        Err(Error::InvalidDof(dof))
    } else {
        Ok(())
    }
}

/// `P(X <= x)` for `X ~ chi-square(dof)`; zero for `x <= 0`.
pub fn chi_square_cdf(dof: u64, x: f64) -> Result<f64> {
    check_dof(dof)?;
    Ok(incomplete_gamma(0.5 * dof as f64, 0.5 * x).0)
}

/// Upper tail `P(X > x)`, computed directly to keep small tails accurate.
pub fn chi_square_sf(dof: u64, x: f64) -> Result<f64> {
    check_dof(dof)?;
    Ok(incomplete_gamma(0.5 * dof as f64, 0.5 * x).1)
}

/// Density of chi-square(dof) at `x`.
pub fn chi_square_pdf(dof: u64, x: f64) -> Result<f64> {
    check_dof(dof)?;
    if x <= 0.0 {
        return Ok(match dof {
            1 => f64::INFINITY,
            2 => 0.5,
            _ => 0.0,
        });
    }
    let a = 0.5 * dof as f64;
    Ok(((a - 1.0) * x.ln() - 0.5 * x - a * std::f64::consts::LN_2 - ln_gamma(a)).exp())
}

/// Acklam's rational approximation of the standard normal quantile
/// (relative error about 1e-9), good enough for a starting point.
fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let low = 0.024_25;
    if p < low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -normal_quantile(1.0 - p)
    }
}

/// Upper `alpha` point of chi-square(dof): the `q` with `P(X > q) = alpha`.
///
/// Wilson-Hilferty start, then safeguarded Newton iterations inside a
/// bracket that is maintained throughout.
pub fn chi_square_quantile(dof: u64, alpha: f64) -> Result<f64> {
    check_dof(dof)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let k = dof as f64;
    let a = 0.5 * k;
    let z = normal_quantile(1.0 - alpha);
    let h = 2.0 / (9.0 * k);
    let mut x = k * (1.0 - h + z * h.sqrt()).powi(3);
    if !(x.is_finite() && x > 0.0) {
        // small-x expansion P(a, x/2) ~ (x/2)^a / Gamma(a + 1)
        x = 2.0 * (((1.0 - alpha).ln() + ln_gamma(a + 1.0)) / a).exp();
    }

    let excess = |x: f64| chi_square_sf(dof, x).map(|s| s - alpha);

    // bracket [lo, hi] with excess(lo) > 0 > excess(hi)
    let (mut lo, mut hi) = (0.0_f64, x);
    while excess(hi)? > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    if lo == 0.0 {
        let mut probe = x;
        for _ in 0..2000 {
            probe *= 0.5;
            if excess(probe)? > 0.0 {
                lo = probe;
                break;
            }
            hi = probe;
        }
    }

    x = x.clamp(lo, hi);
    for _ in 0..200 {
        let g = excess(x)?;
        if g == 0.0 {
            return Ok(x);
        }
        if g > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let density = chi_square_pdf(dof, x)?;
        let mut next = x + g / density;
        if !(next.is_finite() && next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - x).abs();
        x = next;
        if step <= 4.0 * f64::EPSILON * x.max(1.0) || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Gamma(k/2) for integer k via factorials and the half-integer formula.
    fn gamma_half(k: u64) -> f64 {
        if k % 2 == 0 {
            (1..k / 2).map(|i| i as f64).product()
        } else {
            // Gamma(m + 1/2) = (2m)! sqrt(pi) / (4^m m!)
            let m = (k - 1) / 2;
            let mut g = std::f64::consts::PI.sqrt();
            for i in 0..m {
                g *= i as f64 + 0.5;
            }
            g
        }
    }

    /// CDF by adaptive Simpson quadrature of the density after the
    /// substitution x = t^2, which removes the singularity at zero.
    fn quadrature_cdf(dof: u64, x: f64) -> f64 {
        let k = dof as f64;
        let norm = 2f64.powf(k / 2.0) * gamma_half(dof);
        let f = |t: f64| 2.0 * t.powf(k - 1.0) * (-t * t / 2.0).exp() / norm;
        fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
            (b - a) / 6.0 * (fa + 4.0 * fm + fb)
        }
        fn adapt(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = simpson(a, m, fa, flm, fm);
            let right = simpson(m, b, fm, frm, fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                adapt(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                    + adapt(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
            }
        }
        let b = x.sqrt();
        let (fa, fm, fb) = (f(0.0), f(0.5 * b), f(b));
        let whole = simpson(0.0, b, fa, fm, fb);
        adapt(&f, 0.0, b, fa, fm, fb, whole, 1e-14, 50)
    }

    fn quadrature_quantile(dof: u64, alpha: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, 200.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if 1.0 - quadrature_cdf(dof, mid) > alpha {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn ln_gamma_matches_exact_values() {
        for k in 1..60 {
            let exact = gamma_half(k).ln();
            assert!((ln_gamma(k as f64 / 2.0) - exact).abs() < 1e-12 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn quantile_against_quadrature_oracle() {
        let q1 = quadrature_quantile(1, 0.05);
        let q10 = quadrature_quantile(10, 0.05);
        assert!((q1 - 3.841_458_820_694_124).abs() < 1e-9);
        assert!((q10 - 18.307_038_053_275_146).abs() < 1e-9);
        assert!((chi_square_quantile(1, 0.05).unwrap() - q1).abs() < 1e-9);
        assert!((chi_square_quantile(10, 0.05).unwrap() - q10).abs() < 1e-9);
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(chi_square_cdf(3, 0.0).unwrap(), 0.0);
        let median = chi_square_cdf(2, 2.0 * std::f64::consts::LN_2).unwrap();
        assert!((median - 0.5).abs() < 1e-15);
        assert!((chi_square_cdf(10, 18.3070).unwrap() - 0.95).abs() < 1e-6);
        for x in [0.1, 1.0, 3.0, 10.0, 40.0] {
            let closed = 1.0 - (-x / 2.0_f64).exp();
            assert!((chi_square_cdf(2, x).unwrap() - closed).abs() < 1e-14);
        }
        for (dof, x) in [(1, 0.5), (4, 2.0), (7, 9.0), (25, 30.0)] {
            assert!((chi_square_cdf(dof, x).unwrap() - quadrature_cdf(dof, x)).abs() < 1e-12);
        }
    }

    #[test]
    fn median_round_trip() {
        let q = chi_square_quantile(3, 0.5).unwrap();
        assert!((chi_square_cdf(3, q).unwrap() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn round_trip_over_dofs() {
        for dof in 1..=50 {
            for alpha in [0.2, 0.1, 0.05, 0.01] {
                let q = chi_square_quantile(dof, alpha).unwrap();
                let back = chi_square_cdf(dof, q).unwrap();
                assert!((back - (1.0 - alpha)).abs() < 1e-9, "dof {dof} alpha {alpha}");
            }
        }
    }

    #[test]
    fn extreme_arguments() {
        for alpha in [1e-12, 0.999_999] {
            for dof in [1, 2, 5, 300, 10_000] {
                let q = chi_square_quantile(dof, alpha).unwrap();
                let tail = chi_square_sf(dof, q).unwrap();
                assert!((tail - alpha).abs() <= 1e-8 * alpha, "dof {dof} alpha {alpha}: {tail}");
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(chi_square_quantile(0, 0.05), Err(Error::InvalidDof(0)));
        assert_eq!(chi_square_quantile(3, 0.0), Err(Error::InvalidAlpha(0.0)));
        assert_eq!(chi_square_quantile(3, 1.0), Err(Error::InvalidAlpha(1.0)));
        assert!(chi_square_quantile(3, f64::NAN).is_err());
    }
}
