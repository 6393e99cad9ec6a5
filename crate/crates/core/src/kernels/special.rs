//! Special functions used by the kernel closed forms.

use std::f64::consts::PI;

use statrs::function::{beta as sbeta, gamma as sgamma};

use crate::error::{Error, Result};

const SERIES_TOL: f64 = 1e-17;
const MAX_TERMS: usize = 20_000;

/// Γ(x) for real `x` away from the poles.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if x <= 0.0 && x == x.floor() {
        return Err(Error::InvalidParameter(format!("gamma pole at {x}")));
    }
    Ok(sgamma::gamma(x))
}

/// ln Γ(x) for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    sgamma::ln_gamma(x)
}

/// ψ(x) = Γ'(x)/Γ(x).
pub fn digamma(x: f64) -> f64 {
    sgamma::digamma(x)
}

/// 1/Γ(x), zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        0.0
    } else {
        1.0 / sgamma::gamma(x)
    }
}

/// B(a, b) = Γ(a)Γ(b)/Γ(a+b) for `a, b > 0`.
pub fn beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidParameter(format!("beta({a}, {b}) needs positive arguments")));
    }
    Ok(sbeta::beta(a, b))
}

fn nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

fn near_integer(x: f64) -> Option<i64> {
    let r = x.round();
    ((x - r).abs() < 1e-12).then_some(r as i64)
}

/// Plain power series, for `|z| ≤ 1/2` or terminating parameters.
fn series(a: f64, b: f64, c: f64, z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        sum += term;
        if term == 0.0 || term.abs() < SERIES_TOL * sum.abs() {
            break;
        }
    }
    sum
}

/// Gauss hypergeometric function ₂F₁(a, b; c; z) for real `z ∈ [-1, 1]`.
///
/// Uses the power series near the origin, the Pfaff transformation for
/// `z < -1/2`, and the `1 - z` connection formulas (including the logarithmic
/// cases for integer `c - a - b`) on `(1/2, 1)`. At `z = 1` the Gauss sum is used.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&z) {
        return Err(Error::InvalidParameter(format!("hyp2f1 argument {z} outside [-1, 1]")));
    }
    if nonpositive_integer(c) {
        return Err(Error::InvalidParameter(format!("hyp2f1 undefined for c = {c}")));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if nonpositive_integer(a) || nonpositive_integer(b) {
        return Ok(series(a, b, c, z));
    }
    if z < -0.5 {
        let w = z / (z - 1.0);
        return Ok((1.0 - z).powf(-a) * hyp2f1(a, c - b, c, w)?);
    }
    if z <= 0.5 {
        return Ok(series(a, b, c, z));
    }
    let s = c - a - b;
    if z == 1.0 {
        if s <= 0.0 {
            return Err(Error::InvalidParameter(format!("hyp2f1 diverges at z = 1 for c - a - b = {s}")));
        }
        return Ok(gamma_fn(c)? * gamma_fn(s)? * rgamma(c - a) * rgamma(c - b));
    }
    match near_integer(s) {
        Some(m) if m < 0 => Ok((1.0 - z).powf(s) * hyp2f1(c - a, c - b, c, z)?),
        Some(m) => Ok(log_case(a, b, m as usize, 1.0 - z)),
        None => {
            let w = 1.0 - z;
            let t1 = gamma_fn(c)? * gamma_fn(s)? * rgamma(c - a) * rgamma(c - b) * series(a, b, 1.0 - s, w);
            let t2 =
                w.powf(s) * gamma_fn(c)? * gamma_fn(-s)? * rgamma(a) * rgamma(b) * series(c - a, c - b, 1.0 + s, w);
            Ok(t1 + t2)
        }
    }
}

/// ₂F₁(a, b; a+b+m; 1-w) for integer `m ≥ 0` and `0 < w < 1/2`.
fn log_case(a: f64, b: f64, m: usize, w: f64) -> f64 {
    let c = a + b + m as f64;
    let lw = w.ln();
    let mut finite = 0.0;
    if m > 0 {
        let mf = m as f64;
        let pre = sgamma::gamma(mf) * sgamma::gamma(c) * rgamma(a + mf) * rgamma(b + mf);
        let mut term = 1.0;
        for n in 0..m {
            finite += term;
            let nf = n as f64;
            term *= (a + nf) * (b + nf) / ((nf + 1.0) * (1.0 - mf + nf)) * w;
        }
        finite *= pre;
    }
    let mf = m as f64;
    // ψ values advanced by the recurrence ψ(x+1) = ψ(x) + 1/x
    let mut psi_n1 = digamma(1.0);
    let mut psi_nm1 = digamma(mf + 1.0);
    let mut psi_a = digamma(a + mf);
    let mut psi_b = digamma(b + mf);
    let mut coef = 1.0 / factorial(m);
    let mut sum = 0.0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let term = coef * (lw - psi_n1 - psi_nm1 + psi_a + psi_b);
        sum += term;
        if n > 2 && term.abs() < SERIES_TOL * sum.abs() {
            break;
        }
        coef *= (a + mf + nf) * (b + mf + nf) / ((nf + 1.0) * (nf + mf + 1.0)) * w;
        psi_n1 += 1.0 / (nf + 1.0);
        psi_nm1 += 1.0 / (nf + mf + 1.0);
        psi_a += 1.0 / (a + mf + nf);
        psi_b += 1.0 / (b + mf + nf);
        if coef == 0.0 {
            break;
        }
    }
    // (z - 1)^m = (-w)^m
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let pre = sgamma::gamma(c) * rgamma(a) * rgamma(b) * w.powi(m as i32);
    finite - sign * pre * sum
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|k| k as f64).product()
}

/// Complete elliptic integral of the second kind, parameter convention:
/// `E(m) = ∫₀^{π/2} √(1 − m sin²θ) dθ`, evaluated by the AGM.
pub fn ellip_e(m: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&m) {
        return Err(Error::InvalidParameter(format!("ellip_e parameter {m} outside [0, 1]")));
    }
    if m == 1.0 {
        return Ok(1.0);
    }
    let mut a = 1.0f64;
    let mut b = (1.0 - m).sqrt();
    let mut c = m.sqrt();
    let mut pow2 = 0.5;
    let mut sum = pow2 * c * c;
    for _ in 0..64 {
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        c = 0.5 * (a - b);
        if c.abs() <= 1e-16 * a {
            break;
        }
        a = an;
        b = bn;
        pow2 *= 2.0;
        sum += pow2 * c * c;
    }
    Ok(PI / (2.0 * a) * (1.0 - sum))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_and_beta_values() {
        assert!((gamma_fn(0.5).unwrap() - PI.sqrt()).abs() < 1e-13);
        assert!((beta(1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((beta(1.5, 1.5).unwrap() - PI / 8.0).abs() < 1e-13);
        assert!((beta(1.5, 0.5).unwrap() - PI / 2.0).abs() < 1e-13);
        assert!(beta(0.0, 1.0).is_err());
        assert!(gamma_fn(-2.0).is_err());
        assert_eq!(rgamma(-3.0), 0.0);
    }

    #[test]
    fn hyp2f1_reference_values() {
        let cases = [
            (1.0, 1.0, 2.0, 0.5, 1.386_294_361_119_890_6),
            (1.0, 1.0, 2.0, 0.9, 2.558_427_881_104_495_6),
            (1.0, 1.0, 3.0, 0.8, 1.494_101_304_728_687_3),
            (0.5, 0.5, 1.0, 0.95, 1.851_504_997_072_928_3),
            (-2.5, 0.5, 1.0, 0.99, 0.341_677_097_847_198),
            (-2.5, 0.5, 1.0, 0.7, 0.432_787_237_919_612_77),
            (-2.5, 0.5, 1.0, 1.0, 0.339_530_545_262_710_04),
            (-4.3, 0.5, 1.0, 0.6, 0.361_124_410_609_861_7),
            (0.3, 1.7, 2.9, 0.75, 1.217_582_406_811_248_9),
            (0.3, 1.7, 2.9, -0.9, 0.884_585_774_538_011_8),
            (1.5, 2.0, 1.2, -0.7, 0.254_594_224_595_733_1),
            (0.25, 0.5, 2.75, 0.97, 1.064_169_678_552_521_9),
            (2.0, 3.0, 1.5, 0.3, 3.999_306_166_505_282_7),
            (-3.0, 0.5, 1.0, 0.8, 0.36),
            (0.7, 0.2, 4.9, 0.999, 1.035_939_704_991_380_8),
            (1.0, 2.0, 1.5, 0.85, 14.284_428_280_614_867),
        ];
        for (a, b, c, z, want) in cases {
            let got = hyp2f1(a, b, c, z).unwrap();
            assert!(((got - want) / want).abs() < 1e-12, "2F1({a},{b};{c};{z}) = {got}, want {want}");
        }
    }

    #[test]
    fn hyp2f1_log_identity() {
        for z in [-0.9, -0.3, 0.2, 0.5, 0.8, 0.99] {
            let want = -(1.0f64 - z).ln() / z;
            assert!((hyp2f1(1.0, 1.0, 2.0, z).unwrap() - want).abs() < 1e-13);
        }
        assert_eq!(hyp2f1(0.3, 0.4, 0.5, 0.0).unwrap(), 1.0);
        assert!(hyp2f1(1.0, 1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn ellip_e_values() {
        assert!((ellip_e(0.0).unwrap() - PI / 2.0).abs() < 1e-15);
        assert_eq!(ellip_e(1.0).unwrap(), 1.0);
        for (m, want) in [
            (0.1, 1.530_757_636_897_763_1),
            (0.5, 1.350_643_881_047_675_5),
            (0.9, 1.104_774_732_704_073_3),
            (0.999999, 1.000_003_897_026_172_2),
        ] {
            assert!((ellip_e(m).unwrap() - want).abs() < 1e-13, "E({m})");
        }
        assert!(ellip_e(1.5).is_err());
    }
}
