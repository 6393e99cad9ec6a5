//! Abel–Poisson and de la Vallée Poussin kernels on S³.
//!
//! Both kernels are central: `K(q) = K(ω)` with `ω` the rotation angle of `q`.
//! They are normalized to mean one over S³, so their Chebyshev expansion
//! `K(ω) = Σ a_l U_{2l}(cos(ω/2))` starts with `a_0 = 1`. Their one- and
//! twofold Radon transforms are
//! `RK(η) = Σ a_l P_l(cos η)` and `RRK(η1, η2) = Σ a_l P_l(cos η1) P_l(cos η2)`.

pub mod special;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Quat;
use crate::harmonics::legendre_unchecked;
use crate::quadrature::gauss_legendre;
use special::{beta, ellip_e, hyp2f1, ln_gamma};

/// Kernel family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    #[serde(rename = "abel_poisson")]
    AbelPoisson,
    #[serde(rename = "dlvp")]
    DeLaValleePoussin,
}

/// A kernel family together with its shape parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelSpec {
    kind: KernelKind,
    kappa: f64,
    /// Normalization constant of the dlVP kernel, unused for Abel–Poisson.
    norm: f64,
}

impl KernelSpec {
    /// Validates `kappa`: Abel–Poisson needs `0 ≤ κ < 1`, dlVP needs `κ > 0`.
    pub fn new(kind: KernelKind, kappa: f64) -> Result<Self> {
        let ok = match kind {
            KernelKind::AbelPoisson => (0.0..1.0).contains(&kappa),
            KernelKind::DeLaValleePoussin => kappa > 0.0 && kappa.is_finite(),
        };
        if !ok {
            return Err(Error::InvalidParameter(format!("kappa = {kappa} outside the domain of {kind:?}")));
        }
        let norm = match kind {
            KernelKind::AbelPoisson => 1.0,
            KernelKind::DeLaValleePoussin => beta(1.5, 0.5)? / beta(1.5, kappa + 0.5)?,
        };
        Ok(KernelSpec { kind, kappa, norm })
    }

    pub fn abel_poisson(kappa: f64) -> Result<Self> {
        KernelSpec::new(KernelKind::AbelPoisson, kappa)
    }

    pub fn dlvp(kappa: f64) -> Result<Self> {
        KernelSpec::new(KernelKind::DeLaValleePoussin, kappa)
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Kernel value as a function of `c = cos(ω/2)`; even in `c`.
    pub fn value_cos_half(&self, c: f64) -> f64 {
        match self.kind {
            KernelKind::AbelPoisson => {
                let k = self.kappa;
                let num = 1.0 - k * k;
                let dm = 1.0 - 2.0 * k * c + k * k;
                let dp = 1.0 + 2.0 * k * c + k * k;
                0.5 * (num / (dm * dm) + num / (dp * dp))
            }
            KernelKind::DeLaValleePoussin => self.norm * pow_even(c.abs(), self.kappa),
        }
    }

    /// `K(p* q)`, the kernel centered at `p` evaluated at `q`.
    pub fn centered(&self, p: Quat, q: Quat) -> f64 {
        self.value_cos_half(p.dot(q).clamp(-1.0, 1.0))
    }

    /// Largest degree with a nonzero coefficient, if the expansion is finite.
    pub fn finite_degree(&self) -> Option<usize> {
        match self.kind {
            KernelKind::DeLaValleePoussin if self.kappa == self.kappa.floor() => Some(self.kappa as usize),
            _ => None,
        }
    }
}

/// `x^(2κ)` for `x ≥ 0`, with an integer fast path.
fn pow_even(x: f64, kappa: f64) -> f64 {
    if kappa == kappa.floor() && kappa <= 1024.0 {
        (x * x).powi(kappa as i32)
    } else {
        x.powf(2.0 * kappa)
    }
}

/// Kernel value at rotation angle `omega`.
pub fn kernel_value(spec: &KernelSpec, omega: f64) -> f64 {
    spec.value_cos_half((0.5 * omega).cos())
}

/// Chebyshev polynomial of the second kind `U_n(x)`.
pub fn chebyshev_u(n: usize, x: f64) -> f64 {
    let (mut u0, mut u1) = (1.0, 2.0 * x);
    if n == 0 {
        return u0;
    }
    for _ in 1..n {
        let u2 = 2.0 * x * u1 - u0;
        u0 = u1;
        u1 = u2;
    }
    u1
}

/// Expansion coefficient `a_l` with respect to `U_{2l}(cos(ω/2))`.
///
/// For dlVP this is `(2l+1) Γ(κ+1)Γ(κ+2) / (Γ(κ+l+2) Γ(κ−l+1))`, which vanishes
/// for `l > κ` when `κ` is an integer. See [`dlvp_coeff_beta_sum`] for the
/// alternating Beta-sum representation of the same numbers.
pub fn kernel_coeff(spec: &KernelSpec, l: usize) -> f64 {
    let lf = l as f64;
    match spec.kind {
        KernelKind::AbelPoisson => {
            if spec.kappa == 0.0 {
                return if l == 0 { 1.0 } else { 0.0 };
            }
            (2.0 * lf + 1.0) * spec.kappa.powi(2 * l as i32)
        }
        KernelKind::DeLaValleePoussin => {
            let k = spec.kappa;
            let tail = k - lf + 1.0;
            let head = ln_gamma(k + 1.0) + ln_gamma(k + 2.0) - ln_gamma(k + lf + 2.0);
            let ratio = if tail > 0.0 {
                (head - ln_gamma(tail)).exp()
            } else if tail == tail.floor() {
                0.0
            } else {
                // 1/Γ(t) = Γ(1−t) sin(πt)/π
                (head + ln_gamma(1.0 - tail)).exp() * (PI * tail).sin() / PI
            };
            (2.0 * lf + 1.0) * ratio
        }
    }
}

/// dlVP coefficient through the alternating Beta sums
/// `a_l = [S_l − S_{l+1}] / (2 B(3/2, κ+1/2))`,
/// `S_l = Σ_k (−1)^k C(2l, 2k) B(k+1/2, κ+l−k+1/2)`.
///
/// The alternating sum cancels heavily for large `l` or `κ`; use
/// [`kernel_coeff`] for production values.
pub fn dlvp_coeff_beta_sum(kappa: f64, l: usize) -> Result<f64> {
    let s = |l: usize| -> Result<f64> {
        let mut sum = 0.0;
        let mut binom = 1.0f64;
        for k in 0..=l {
            let kf = k as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * binom * beta(kf + 0.5, kappa + (l - k) as f64 + 0.5)?;
            // C(2l, 2k+2) from C(2l, 2k)
            let n = 2 * l;
            if k < l {
                binom *= ((n - 2 * k) * (n - 2 * k - 1)) as f64 / ((2 * k + 1) * (2 * k + 2)) as f64;
            }
        }
        Ok(sum)
    };
    Ok((s(l)? - s(l + 1)?) / (2.0 * beta(1.5, kappa + 0.5)?))
}

/// `a_l = (2/π) ∫₀^π K(2s) U_{2l}(cos s) sin²s ds` by Gauss–Legendre
/// quadrature with `nodes` points on `[0, π/2]` (the integrand is symmetric
/// about π/2).
pub fn kernel_coeff_numeric(spec: &KernelSpec, l: usize, nodes: usize) -> f64 {
    let (x, w) = gauss_legendre(nodes);
    let half = 0.25 * PI;
    let mut sum = 0.0;
    for (&xi, &wi) in x.iter().zip(&w) {
        let s = half * (xi + 1.0);
        let (sn, cs) = s.sin_cos();
        sum += wi * spec.value_cos_half(cs) * chebyshev_u(2 * l, cs) * sn * sn;
    }
    2.0 * (2.0 / PI) * half * sum
}

/// Great-circle mean of the kernel: `RK(η)`, where `η` is the angle between
/// `p h p*` and `r` for a kernel centered at `p`.
pub fn kernel_radon(spec: &KernelSpec, eta: f64) -> f64 {
    match spec.kind {
        KernelKind::AbelPoisson => {
            let x = spec.kappa * spec.kappa;
            (1.0 - x * x) / (1.0 - 2.0 * x * eta.cos() + x * x).powf(1.5)
        }
        KernelKind::DeLaValleePoussin => (1.0 + spec.kappa) * pow_even((0.5 * eta).cos().max(0.0), spec.kappa),
    }
}

/// Twofold Radon transform `RRK(η1, η2)`.
///
/// Abel–Poisson, with `x = κ²`:
/// `(2/π)(1−x²) E(m) / ((C−D)√(C+D))`, `C = 1 − 2x cos η1 cos η2 + x²`,
/// `D = 2x sin η1 sin η2`, `m = 2D/(C+D)`.
///
/// dlVP, with `A = 1 + cos(η1+η2)`, `B = 1 + cos(η1−η2)`:
/// `(1+κ) 2^{−κ} B^κ ₂F₁(−κ, 1/2; 1; 1 − A/B)`.
pub fn kernel_double_radon(spec: &KernelSpec, eta1: f64, eta2: f64) -> f64 {
    match spec.kind {
        KernelKind::AbelPoisson => {
            let x = spec.kappa * spec.kappa;
            let c = 1.0 - 2.0 * x * eta1.cos() * eta2.cos() + x * x;
            let d = 2.0 * x * eta1.sin() * eta2.sin();
            let m = (2.0 * d / (c + d)).clamp(0.0, 1.0);
            let e = ellip_e(m).expect("parameter clamped to [0, 1]");
            2.0 / PI * (1.0 - x * x) / ((c - d) * (c + d).sqrt()) * e
        }
        KernelKind::DeLaValleePoussin => {
            let k = spec.kappa;
            let a = (1.0 + (eta1 + eta2).cos()).max(0.0);
            let b = (1.0 + (eta1 - eta2).cos()).max(0.0);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            if hi < 1e-300 {
                return 0.0;
            }
            let z = (1.0 - lo / hi).clamp(0.0, 1.0);
            let f = hyp2f1(-k, 0.5, 1.0, z).expect("argument clamped to [0, 1]");
            (1.0 + k) * (0.5 * hi).powf(k) * f
        }
    }
}

/// Truncated Chebyshev series `Σ_{l ≤ lmax} a_l U_{2l}(cos(ω/2))`.
pub fn kernel_value_series(spec: &KernelSpec, omega: f64, lmax: usize) -> f64 {
    let c = (0.5 * omega).cos();
    (0..=lmax).map(|l| kernel_coeff(spec, l) * chebyshev_u(2 * l, c)).sum()
}

/// Truncated Legendre series `Σ_{l ≤ lmax} a_l P_l(cos η)`.
pub fn kernel_radon_series(spec: &KernelSpec, eta: f64, lmax: usize) -> f64 {
    let x = eta.cos();
    (0..=lmax).map(|l| kernel_coeff(spec, l) * legendre_unchecked(l, x)).sum()
}

/// Truncated series `Σ_{l ≤ lmax} a_l P_l(cos η1) P_l(cos η2)`.
pub fn kernel_double_radon_series(spec: &KernelSpec, eta1: f64, eta2: f64, lmax: usize) -> f64 {
    let (x1, x2) = (eta1.cos(), eta2.cos());
    (0..=lmax).map(|l| kernel_coeff(spec, l) * legendre_unchecked(l, x1) * legendre_unchecked(l, x2)).sum()
}

/// Degree at which the Abel–Poisson coefficients drop below `tol`, or the
/// finite degree of an integer dlVP kernel.
pub fn truncation_degree(spec: &KernelSpec, tol: f64) -> usize {
    if let Some(d) = spec.finite_degree() {
        return d;
    }
    let mut l = 0;
    while kernel_coeff(spec, l).abs() >= tol && l < 10_000 {
        l += 1;
    }
    l
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_examples() {
        let ap0 = KernelSpec::abel_poisson(0.0).unwrap();
        assert_eq!(kernel_value(&ap0, 1.234), 1.0);
        let d1 = KernelSpec::dlvp(1.0).unwrap();
        assert!((kernel_value(&d1, 0.0) - 4.0).abs() < 1e-13);
        let ap = KernelSpec::abel_poisson(0.5).unwrap();
        let want = 0.5 * (0.75 / 0.0625 + 0.75 / 5.0625);
        assert!((kernel_value(&ap, 0.0) - want).abs() < 1e-13);
        assert!((kernel_value(&ap, 0.0) - 6.0741).abs() < 1e-4);
        assert!((kernel_value(&KernelSpec::dlvp(4.0).unwrap(), 0.0) - 18.2857142857).abs() < 1e-9);
        assert!((kernel_value(&KernelSpec::dlvp(20.0).unwrap(), 0.0) - 167.5032688958).abs() < 1e-8);
        assert!(KernelSpec::abel_poisson(1.0).is_err());
        assert!(KernelSpec::dlvp(0.0).is_err());
    }

    #[test]
    fn coefficient_examples() {
        let ap = KernelSpec::abel_poisson(0.5).unwrap();
        assert_eq!(kernel_coeff(&ap, 0), 1.0);
        assert!((kernel_coeff(&ap, 2) - 0.3125).abs() < 1e-15);
        let d4 = KernelSpec::dlvp(4.0).unwrap();
        for l in 5..40 {
            assert!(kernel_coeff(&d4, l).abs() < 1e-12);
        }
        assert!((kernel_coeff(&d4, 0) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn beta_sum_agrees_with_gamma_ratio() {
        for kappa in [1.0, 2.5, 4.0, 7.0, 20.0] {
            for l in 0..6 {
                let a = kernel_coeff(&KernelSpec::dlvp(kappa).unwrap(), l);
                let b = dlvp_coeff_beta_sum(kappa, l).unwrap();
                assert!((a - b).abs() < 1e-11 * (1.0 + a.abs()), "kappa={kappa} l={l}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn numeric_projection_matches_coefficients() {
        for spec in [
            KernelSpec::abel_poisson(0.3).unwrap(),
            KernelSpec::abel_poisson(0.7).unwrap(),
            KernelSpec::dlvp(4.0).unwrap(),
            KernelSpec::dlvp(2.5).unwrap(),
        ] {
            for l in 0..8 {
                let num = kernel_coeff_numeric(&spec, l, 200);
                let tol = if spec.kappa() == 2.5 { 1e-6 } else { 1e-12 };
                assert!((num - kernel_coeff(&spec, l)).abs() < tol, "{spec:?} l={l}");
            }
        }
    }

    #[test]
    fn series_consistency() {
        for spec in [KernelSpec::abel_poisson(0.5).unwrap(), KernelSpec::dlvp(4.0).unwrap()] {
            let lmax = truncation_degree(&spec, 1e-16);
            for k in 0..20 {
                let w = 2.0 * PI * k as f64 / 20.0;
                let a = kernel_value(&spec, w);
                assert!((a - kernel_value_series(&spec, w, lmax)).abs() < 1e-8);
                let eta = PI * k as f64 / 19.0;
                assert!((kernel_radon(&spec, eta) - kernel_radon_series(&spec, eta, lmax)).abs() < 1e-10);
                for j in 0..10 {
                    let eta2 = PI * j as f64 / 9.0;
                    let rr = kernel_double_radon(&spec, eta, eta2);
                    let rs = kernel_double_radon_series(&spec, eta, eta2, lmax);
                    assert!((rr - rs).abs() < 1e-10, "{spec:?} {eta} {eta2}: {rr} vs {rs}");
                }
            }
        }
    }

    #[test]
    fn radon_examples() {
        let ap = KernelSpec::abel_poisson(0.5).unwrap();
        let want = 0.9375 / 0.8125f64.powf(1.5);
        assert!((kernel_radon(&ap, PI / 3.0) - want).abs() < 1e-14);
        assert!((kernel_radon(&ap, PI / 3.0) - 1.2801).abs() < 1e-4);
        for kappa in [1.0, 4.0, 20.0, 2.5] {
            assert_eq!(kernel_radon(&KernelSpec::dlvp(kappa).unwrap(), 0.0), 1.0 + kappa);
        }
    }

    #[test]
    fn double_radon_degenerate_and_symmetric() {
        for spec in
            [KernelSpec::abel_poisson(0.8).unwrap(), KernelSpec::dlvp(20.0).unwrap(), KernelSpec::dlvp(2.5).unwrap()]
        {
            for eta in [0.0, 0.3, 1.0, 2.0, PI] {
                assert!((kernel_double_radon(&spec, eta, 0.0) - kernel_radon(&spec, eta)).abs() < 1e-10);
            }
            let a = kernel_double_radon(&spec, 0.7, 1.2);
            let b = kernel_double_radon(&spec, 1.2, 0.7);
            assert!((a - b).abs() < 1e-12);
            assert!(kernel_double_radon(&spec, 1.1, 1.1) > 0.0);
        }
    }

    #[test]
    fn non_integer_dlvp_double_radon_matches_series() {
        // a_l decays like l^(-2κ-1); a long series converges for κ = 2.5
        let spec = KernelSpec::dlvp(2.5).unwrap();
        for (e1, e2) in [(0.4, 0.9), (1.5, 2.2), (2.8, 0.3)] {
            let rr = kernel_double_radon(&spec, e1, e2);
            let rs = kernel_double_radon_series(&spec, e1, e2, 4000);
            assert!((rr - rs).abs() < 1e-6, "{e1} {e2}: {rr} vs {rs}");
        }
    }
}
