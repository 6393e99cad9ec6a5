//! Legendre polynomials, real spherical harmonics and harmonic expansions of
//! the Radon and W transforms.
//!
//! Spherical harmonics are real, L²(S²)-orthonormal and carry no
//! Condon–Shortley phase:
//! `Y_l^m = N_l^|m| P_l^|m|(cos θ) · {√2 cos mφ, 1, √2 sin |m|φ}` for `m > 0`,
//! `m = 0`, `m < 0`.
//!
//! A [`CoeffTable`] holds the expansion
//! `X f(h, r) = Σ_{l even} Σ_{m,n} C_l^{mn} Y_l^m(h) Y_l^n(r)`
//! of the Friedel-symmetrized Radon transform. The ODF itself expands into
//! SO(3) modes `√(2l+1) D_l^{mn}(q)` with
//! `D_l^{mn}(q) = ∫ Y_l^m(h) Y_l^n(q h q*) dh`; each such mode has mean square
//! one, and its Radon coefficient is `4π/√(2l+1)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{Dir3, Quat};
use crate::kernels::{kernel_coeff, KernelSpec};
use crate::quadrature::{CircleRule, Rules};
use crate::transforms::{radon_hr, Odf};

/// Legendre polynomial `P_l(x)` by the three-term recurrence.
pub fn legendre(l: usize, x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::InvalidParameter(format!("legendre argument {x} outside [-1, 1]")));
    }
    Ok(legendre_unchecked(l, x))
}

/// `P_l(x)` without a domain check.
pub fn legendre_unchecked(l: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if l == 0 {
        return p0;
    }
    for k in 2..=l {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// All `P_l(x)` for `l ≤ lmax`.
pub fn legendre_all(lmax: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(lmax + 1);
    out.push(1.0);
    if lmax >= 1 {
        out.push(x);
    }
    for k in 2..=lmax {
        let kf = k as f64;
        let p = ((2.0 * kf - 1.0) * x * out[k - 1] - (kf - 1.0) * out[k - 2]) / kf;
        out.push(p);
    }
    out
}

/// Position of `(l, m)` in the packed harmonic vector.
#[inline]
pub fn sh_index(l: usize, m: i64) -> usize {
    (l * l) + (l as i64 + m) as usize
}

/// Real parts and imaginary parts of `(x + i y)^m` for `m ≤ lmax`.
fn azimuth_powers(lmax: usize, x: f64, y: f64) -> (Vec<f64>, Vec<f64>) {
    let mut re = vec![0.0; lmax + 1];
    let mut im = vec![0.0; lmax + 1];
    re[0] = 1.0;
    for m in 1..=lmax {
        re[m] = re[m - 1] * x - im[m - 1] * y;
        im[m] = re[m - 1] * y + im[m - 1] * x;
    }
    (re, im)
}

/// All `Y_l^m(d)` for `l ≤ lmax`, packed by [`sh_index`].
pub fn sph_harm_all(lmax: usize, d: Dir3) -> Vec<f64> {
    let mut out = vec![0.0; (lmax + 1) * (lmax + 1)];
    sph_harm_all_into(lmax, d, &mut out);
    out
}

/// [`sph_harm_all`] writing into a caller buffer of length `(lmax+1)²`.
pub fn sph_harm_all_into(lmax: usize, d: Dir3, out: &mut [f64]) {
    let z = d.z;
    let (re, im) = azimuth_powers(lmax, d.x, d.y);
    let sqrt2 = std::f64::consts::SQRT_2;
    // pmm holds P̄_m^m / sin^m θ; the sin^m θ factor lives in (x + i y)^m
    let mut pmm = (0.25 / PI).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            let mf = m as f64;
            pmm *= ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt();
        }
        let mut store = |l: usize, p: f64| {
            if m == 0 {
                out[sh_index(l, 0)] = p;
            } else {
                out[sh_index(l, m as i64)] = sqrt2 * p * re[m];
                out[sh_index(l, -(m as i64))] = sqrt2 * p * im[m];
            }
        };
        store(m, pmm);
        if m == lmax {
            break;
        }
        let mf = m as f64;
        let mut p_prev = pmm;
        let mut p_cur = (2.0 * mf + 3.0).sqrt() * z * pmm;
        store(m + 1, p_cur);
        for l in m + 2..=lmax {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            let p_next = a * (z * p_cur - b * p_prev);
            p_prev = p_cur;
            p_cur = p_next;
            store(l, p_cur);
        }
    }
}

/// Real orthonormal spherical harmonic `Y_l^m(d)`.
pub fn sph_harm(l: usize, m: i64, d: Dir3) -> Result<f64> {
    if m.unsigned_abs() as usize > l {
        return Err(Error::InvalidParameter(format!("|m| = {} exceeds l = {l}", m.abs())));
    }
    Ok(sph_harm_unchecked(l, m, d))
}

/// `Y_l^m(d)` by the single-order recurrence, `|m| ≤ l` assumed.
pub fn sph_harm_unchecked(l: usize, m: i64, d: Dir3) -> f64 {
    let ma = m.unsigned_abs() as usize;
    let (re, im) = azimuth_powers(ma, d.x, d.y);
    let mut pmm = (0.25 / PI).sqrt();
    for k in 1..=ma {
        let kf = k as f64;
        pmm *= ((2.0 * kf + 1.0) / (2.0 * kf)).sqrt();
    }
    let mf = ma as f64;
    let p = if l == ma {
        pmm
    } else {
        let mut p_prev = pmm;
        let mut p_cur = (2.0 * mf + 3.0).sqrt() * d.z * pmm;
        for k in ma + 2..=l {
            let lf = k as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            let p_next = a * (d.z * p_cur - b * p_prev);
            p_prev = p_cur;
            p_cur = p_next;
        }
        p_cur
    };
    match m.signum() {
        0 => p,
        1 => std::f64::consts::SQRT_2 * p * re[ma],
        _ => std::f64::consts::SQRT_2 * p * im[ma],
    }
}

/// Mean of `Y_l^n` over the small circle of directions `p` with `p·r = τ`.
pub fn circle_avg_harmonic(l: usize, n: i64, r: Dir3, tau: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&tau) {
        return Err(Error::InvalidParameter(format!("tau = {tau} outside [-1, 1]")));
    }
    sph_harm(l, n, r)?;
    let rule = CircleRule::new((2 * l + 2).max(8))?;
    let circle = crate::geometry::SmallCircle::new(r, tau.acos())?;
    Ok(rule.mean_small_circle(&circle, |p| sph_harm_unchecked(l, n, p)))
}

/// Harmonic coefficients `C_l^{mn}` for even `l ≤ L`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffTable {
    lmax: usize,
    blocks: Vec<Vec<f64>>,
    /// Radial profile coefficients `C_l` for zonal tables, indexed by `l`.
    pub profile: Option<Vec<f64>>,
    /// Scaling entries `σ_l`, indexed by `l`.
    pub sigma: Option<Vec<f64>>,
}

impl CoeffTable {
    /// All-zero table of degree `lmax`.
    pub fn zeros(lmax: usize) -> Self {
        let blocks = (0..=lmax).step_by(2).map(|l| vec![0.0; (2 * l + 1) * (2 * l + 1)]).collect();
        CoeffTable { lmax, blocks, profile: None, sigma: None }
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    /// Number of stored coefficients, `Σ_{l even ≤ L} (2l+1)²`.
    pub fn len(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn offset(l: usize, m: i64, n: i64) -> usize {
        let w = 2 * l + 1;
        (m + l as i64) as usize * w + (n + l as i64) as usize
    }

    fn check(&self, l: usize, m: i64, n: i64) -> Result<()> {
        if l > self.lmax || m.unsigned_abs() as usize > l || n.unsigned_abs() as usize > l {
            return Err(Error::InvalidParameter(format!(
                "index (l={l}, m={m}, n={n}) outside table of degree {}",
                self.lmax
            )));
        }
        Ok(())
    }

    /// `C_l^{mn}`; zero for odd `l` and out-of-range indices.
    pub fn get(&self, l: usize, m: i64, n: i64) -> f64 {
        if l % 2 == 1 || self.check(l, m, n).is_err() {
            return 0.0;
        }
        self.blocks[l / 2][Self::offset(l, m, n)]
    }

    /// Sets `C_l^{mn}`; odd `l` is rejected.
    pub fn set(&mut self, l: usize, m: i64, n: i64, value: f64) -> Result<()> {
        self.check(l, m, n)?;
        if l % 2 == 1 {
            return Err(Error::InvalidParameter(format!("odd degree {l} is not representable")));
        }
        self.blocks[l / 2][Self::offset(l, m, n)] = value;
        Ok(())
    }

    /// Dense block of degree `l` in row-major `(m, n)` order.
    pub fn block(&self, l: usize) -> Option<&[f64]> {
        (l.is_multiple_of(2) && l <= self.lmax).then(|| self.blocks[l / 2].as_slice())
    }

    /// All entries as `(l, m, n, value)` in lexicographic order.
    pub fn entries(&self) -> Vec<(usize, i64, i64, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for l in (0..=self.lmax).step_by(2) {
            let li = l as i64;
            for m in -li..=li {
                for n in -li..=li {
                    out.push((l, m, n, self.get(l, m, n)));
                }
            }
        }
        out
    }

    /// Largest absolute entrywise difference to `other`.
    pub fn max_abs_diff(&self, other: &CoeffTable) -> f64 {
        let lmax = self.lmax.max(other.lmax);
        let mut worst = 0.0f64;
        for l in (0..=lmax).step_by(2) {
            let li = l as i64;
            for m in -li..=li {
                for n in -li..=li {
                    worst = worst.max((self.get(l, m, n) - other.get(l, m, n)).abs());
                }
            }
        }
        worst
    }

    /// Table of a kernel centered at `center`:
    /// `C_l^{mn} = 4π a_l / (2l+1) · D_l^{mn}(center)`.
    pub fn from_kernel(spec: &KernelSpec, center: Quat, lmax: usize) -> Self {
        let mut table = CoeffTable::zeros(lmax);
        let wigner = WignerD::new(lmax);
        let d = wigner.matrices(center);
        let mut profile = vec![0.0; lmax + 1];
        for l in (0..=lmax).step_by(2) {
            let c = 4.0 * PI * kernel_coeff(spec, l) / (2 * l + 1) as f64;
            profile[l] = c;
            let w = 2 * l + 1;
            for i in 0..w {
                for j in 0..w {
                    table.blocks[l / 2][i * w + j] = c * d[l][(i, j)];
                }
            }
        }
        table.profile = Some(profile);
        table
    }

    /// Adds `weight · other` entrywise; the degree of `self` is kept.
    pub fn add_scaled(&mut self, other: &CoeffTable, weight: f64) {
        for l in (0..=self.lmax.min(other.lmax)).step_by(2) {
            for (a, b) in self.blocks[l / 2].iter_mut().zip(&other.blocks[l / 2]) {
                *a += weight * b;
            }
        }
    }
}

/// `Σ_{l even} P_l(cos ρ) Σ_{m,n} C_l^{mn} Y_l^m(h) Y_l^n(r)`.
pub fn w_series(table: &CoeffTable, h: Dir3, r: Dir3, rho: f64) -> f64 {
    let lmax = table.lmax;
    let yh = sph_harm_all(lmax, h);
    let yr = sph_harm_all(lmax, r);
    let pl = legendre_all(lmax, rho.cos());
    let mut total = 0.0;
    for l in (0..=lmax).step_by(2) {
        let w = 2 * l + 1;
        let base = l * l;
        let block = &table.blocks[l / 2];
        let mut s = 0.0;
        for i in 0..w {
            let row = &block[i * w..(i + 1) * w];
            let inner: f64 = row.iter().zip(&yr[base..base + w]).map(|(c, y)| c * y).sum();
            s += yh[base + i] * inner;
        }
        total += pl[l] * s;
    }
    total
}

/// `Σ_{l even} (2l+1)/(4π) C_l P_l(cos ρ) P_l(cos η)` for a radial profile
/// `C_l` indexed by `l`.
pub fn w_series_radial(profile: &[f64], rho: f64, eta: f64) -> f64 {
    let lmax = profile.len().saturating_sub(1);
    let p1 = legendre_all(lmax, rho.cos());
    let p2 = legendre_all(lmax, eta.cos());
    (0..=lmax).step_by(2).map(|l| (2 * l + 1) as f64 / (4.0 * PI) * profile[l] * p1[l] * p2[l]).sum()
}

/// A coefficient table together with the largest odd-degree coefficient seen
/// by the projection (zero up to quadrature error).
#[derive(Clone, Debug)]
pub struct RadonProjection {
    pub table: CoeffTable,
    pub odd_residual: f64,
}

/// Projects `X f` onto `Y_l^m(h) Y_l^n(r)` for `l ≤ lmax` with the sphere rule
/// of `rules` in both arguments.
///
/// The projection is exact when the sphere rule degree is at least `lmax`
/// plus the harmonic degree of `f` and the circle rule resolves `f`.
pub fn radon_projection<O: Odf + ?Sized>(f: &O, lmax: usize, rules: &Rules) -> RadonProjection {
    let nodes = rules.sphere.nodes();
    let weights = rules.sphere.weights();
    let npts = nodes.len();
    let k = (lmax + 1) * (lmax + 1);
    let mut a = DMatrix::<f64>::zeros(npts, k);
    let mut buf = vec![0.0; k];
    for (i, (&d, &w)) in nodes.iter().zip(weights).enumerate() {
        sph_harm_all_into(lmax, d, &mut buf);
        for (j, &y) in buf.iter().enumerate() {
            a[(i, j)] = 4.0 * PI * w * y;
        }
    }
    let mut x = DMatrix::<f64>::zeros(npts, npts);
    for (i, &h) in nodes.iter().enumerate() {
        for (j, &r) in nodes.iter().enumerate() {
            x[(i, j)] = 0.5 * (radon_hr(f, h, r, rules) + radon_hr(f, -h, r, rules));
        }
    }
    let t = a.transpose() * x * &a;
    let mut table = CoeffTable::zeros(lmax);
    let mut odd_residual = 0.0f64;
    for l in 0..=lmax {
        let li = l as i64;
        for m in -li..=li {
            for n in -li..=li {
                let v = t[(sh_index(l, m), sh_index(l, n))];
                if l % 2 == 0 {
                    table.set(l, m, n, v).expect("index in range");
                } else {
                    odd_residual = odd_residual.max(v.abs());
                }
            }
        }
    }
    RadonProjection { table, odd_residual }
}

/// [`radon_projection`] keeping only the table.
pub fn project_radon_coeffs<O: Odf + ?Sized>(f: &O, lmax: usize, rules: &Rules) -> CoeffTable {
    radon_projection(f, lmax, rules).table
}

/// Direction of [`scale_coefficients`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScaleDirection {
    /// Radon coefficients to ODF coefficients: multiply by `σ_l`.
    ToOdf,
    /// ODF coefficients to Radon coefficients: divide by `σ_l`.
    ToRadon,
}

/// Multiplies or divides each degree-`l` block by `σ_l`.
pub fn scale_coefficients(table: &CoeffTable, direction: ScaleDirection) -> Result<CoeffTable> {
    let sigma = table.sigma.as_ref().ok_or(Error::MissingSigma)?;
    if sigma.len() <= table.lmax {
        return Err(Error::MissingSigma);
    }
    let mut out = table.clone();
    for l in (0..=table.lmax).step_by(2) {
        let s = sigma[l];
        for v in out.blocks[l / 2].iter_mut() {
            match direction {
                ScaleDirection::ToOdf => *v *= s,
                ScaleDirection::ToRadon => *v /= s,
            }
        }
    }
    Ok(out)
}

/// `σ_l = √(2l+1)` for `l ≤ lmax`, the value the single-mode calibration
/// measures under the normalization used here.
pub fn nominal_sigma(lmax: usize) -> Vec<f64> {
    (0..=lmax).map(|l| ((2 * l + 1) as f64).sqrt()).collect()
}

/// Evaluates the real SO(3) representation matrices `D_l(q)` for `l ≤ lmax`.
///
/// `D_l^{mn}(q)` is the coefficient of `Y_l^m` in `a ↦ Y_l^n(q a q*)`; it is
/// recovered by least squares from samples at a fixed point set.
#[derive(Clone, Debug)]
pub struct WignerD {
    lmax: usize,
    points: Vec<Dir3>,
    pinv: Vec<DMatrix<f64>>,
}

/// Spiral point set of `n` nearly uniform directions.
pub fn fibonacci_sphere(n: usize) -> Vec<Dir3> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let s = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            Dir3::new_unchecked(s * phi.cos(), s * phi.sin(), z)
        })
        .collect()
}

impl WignerD {
    pub fn new(lmax: usize) -> Self {
        let points = fibonacci_sphere(2 * (2 * lmax + 1) + 1);
        let ys: Vec<Vec<f64>> = points.iter().map(|&p| sph_harm_all(lmax, p)).collect();
        let pinv = (0..=lmax)
            .map(|l| {
                let w = 2 * l + 1;
                let m = DMatrix::from_fn(points.len(), w, |j, i| ys[j][l * l + i]);
                m.pseudo_inverse(1e-13).expect("sample matrix has full column rank")
            })
            .collect();
        WignerD { lmax, points, pinv }
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    /// `D_l(q)` for every `l ≤ lmax`, rows indexed by `m + l`, columns by `n + l`.
    pub fn matrices(&self, q: Quat) -> Vec<DMatrix<f64>> {
        let npts = self.points.len();
        let k = (self.lmax + 1) * (self.lmax + 1);
        let mut yq = vec![0.0; npts * k];
        for (j, &a) in self.points.iter().enumerate() {
            sph_harm_all_into(self.lmax, q.rotate(a), &mut yq[j * k..(j + 1) * k]);
        }
        (0..=self.lmax)
            .map(|l| {
                let w = 2 * l + 1;
                let block = DMatrix::from_fn(npts, w, |j, n| yq[j * k + l * l + n]);
                &self.pinv[l] * block
            })
            .collect()
    }

    /// Single entry `D_l^{mn}(q)`.
    pub fn entry(&self, l: usize, m: i64, n: i64, q: Quat) -> f64 {
        let row = (m + l as i64) as usize;
        let p = &self.pinv[l];
        self.points.iter().enumerate().map(|(j, &a)| p[(row, j)] * sph_harm_unchecked(l, n, q.rotate(a))).sum()
    }
}

/// The unit-mean-square SO(3) mode `√(2l+1) D_l^{mn}(q)`.
#[derive(Clone, Debug)]
pub struct HarmonicMode {
    pub l: usize,
    pub m: i64,
    pub n: i64,
    wigner: WignerD,
}

impl HarmonicMode {
    pub fn new(l: usize, m: i64, n: i64) -> Result<Self> {
        if m.unsigned_abs() as usize > l || n.unsigned_abs() as usize > l {
            return Err(Error::InvalidParameter(format!("mode ({l}, {m}, {n}) out of range")));
        }
        Ok(HarmonicMode { l, m, n, wigner: WignerD::new(l) })
    }
}

impl Odf for HarmonicMode {
    fn eval(&self, q: Quat) -> f64 {
        ((2 * self.l + 1) as f64).sqrt() * self.wigner.entry(self.l, self.m, self.n, q)
    }

    fn is_even(&self) -> bool {
        true
    }
}

/// Result of calibrating `σ_l` on one SO(3) mode.
#[derive(Clone, Debug)]
pub struct SigmaMeasurement {
    pub l: usize,
    pub m: i64,
    pub n: i64,
    /// `4π · (ODF coefficient) / (Radon coefficient)`.
    pub sigma: f64,
    /// Largest Radon coefficient outside the `(l, m, n)` slot.
    pub leakage: f64,
}

/// Measures `σ_l` by projecting the Radon transform of single modes
/// `√(2l+1) D_l^{mn}` for each `(m, n)` in `pairs`.
///
/// Exact when `rules` has sphere degree ≥ `2l` and at least `2l + 1` circle nodes.
pub fn calibrate_sigma(l: usize, pairs: &[(i64, i64)], rules: &Rules) -> Result<Vec<SigmaMeasurement>> {
    pairs
        .iter()
        .map(|&(m, n)| {
            let mode = HarmonicMode::new(l, m, n)?;
            let proj = radon_projection(&mode, l, rules);
            let c = proj.table.get(l, m, n);
            let mut leakage = proj.odd_residual;
            for (ll, mm, nn, v) in proj.table.entries() {
                if (ll, mm, nn) != (l, m, n) {
                    leakage = leakage.max(v.abs());
                }
            }
            Ok(SigmaMeasurement { l, m, n, sigma: 4.0 * PI / c, leakage })
        })
        .collect()
}

/// ODF of a coefficient table:
/// `f(q) = Σ_l (2l+1)/(4π) Σ_{m,n} C_l^{mn} D_l^{mn}(q)`.
#[derive(Clone, Debug)]
pub struct HarmonicOdf {
    table: CoeffTable,
    wigner: WignerD,
}

impl HarmonicOdf {
    pub fn new(table: CoeffTable) -> Self {
        let wigner = WignerD::new(table.lmax);
        HarmonicOdf { table, wigner }
    }

    pub fn table(&self) -> &CoeffTable {
        &self.table
    }
}

impl Odf for HarmonicOdf {
    fn eval(&self, q: Quat) -> f64 {
        let d = self.wigner.matrices(q);
        let mut total = 0.0;
        for l in (0..=self.table.lmax).step_by(2) {
            let w = 2 * l + 1;
            let block = &self.table.blocks[l / 2];
            let s: f64 =
                (0..w).flat_map(|i| (0..w).map(move |j| (i, j))).map(|(i, j)| block[i * w + j] * d[l][(i, j)]).sum();
            total += w as f64 / (4.0 * PI) * s;
        }
        total
    }

    fn is_even(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::SphereRule;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre(0, 0.3).unwrap(), 1.0);
        assert!((legendre(2, 0.0).unwrap() + 0.5).abs() < 1e-16);
        // P_10 from its explicit coefficients
        let c = [-63.0, 0.0, 3465.0, 0.0, -30030.0, 0.0, 90090.0, 0.0, -109395.0, 0.0, 46189.0];
        let x: f64 = 0.3;
        let direct: f64 = c.iter().enumerate().map(|(k, a)| a * x.powi(k as i32)).sum::<f64>() / 256.0;
        assert!((legendre(10, x).unwrap() - direct).abs() < 1e-12);
        assert!(legendre(3, 1.5).is_err());
        for l in 0..=128 {
            assert!((legendre_unchecked(l, 1.0) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn harmonics_are_orthonormal() {
        let lmax = 6;
        let rule = SphereRule::new(2 * lmax).unwrap();
        let k = (lmax + 1) * (lmax + 1);
        let ys: Vec<Vec<f64>> = rule.nodes().iter().map(|&d| sph_harm_all(lmax, d)).collect();
        for a in 0..k {
            for b in 0..k {
                let g: f64 = 4.0 * PI * ys.iter().zip(rule.weights()).map(|(y, w)| w * y[a] * y[b]).sum::<f64>();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-12, "{a} {b}: {g}");
            }
        }
    }

    #[test]
    fn single_and_packed_evaluation_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let d = Dir3::random(&mut rng);
            let all = sph_harm_all(12, d);
            for l in 0..=12usize {
                for m in -(l as i64)..=l as i64 {
                    assert!((all[sh_index(l, m)] - sph_harm(l, m, d).unwrap()).abs() < 1e-13);
                }
            }
        }
        assert!((sph_harm(0, 0, Dir3::E2).unwrap() - (0.25 / PI).sqrt()).abs() < 1e-16);
        assert!(sph_harm(2, 3, Dir3::E1).is_err());
    }

    #[test]
    fn low_degree_closed_forms() {
        // Y_1^{-1}, Y_1^0, Y_1^1 are √(3/4π) (y, z, x)
        let d = Dir3::new(0.3, -0.5, 0.7).unwrap();
        let c = (3.0 / (4.0 * PI)).sqrt();
        assert!((sph_harm(1, -1, d).unwrap() - c * d.y).abs() < 1e-15);
        assert!((sph_harm(1, 0, d).unwrap() - c * d.z).abs() < 1e-15);
        assert!((sph_harm(1, 1, d).unwrap() - c * d.x).abs() < 1e-15);
    }

    #[test]
    fn funk_hecke_small_circle() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for l in 0..=10usize {
            let r = Dir3::random(&mut rng);
            let n = l as i64 / 2;
            let tau = 0.37;
            let avg = circle_avg_harmonic(l, n, r, tau).unwrap();
            let want = legendre_unchecked(l, tau) * sph_harm(l, n, r).unwrap();
            assert!((avg - want).abs() < 1e-12);
        }
        let r = Dir3::E1;
        assert!((circle_avg_harmonic(3, 1, r, 1.0).unwrap() - sph_harm(3, 1, r).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn table_access_and_scaling() {
        let mut t = CoeffTable::zeros(4);
        assert_eq!(t.len(), 1 + 25 + 81);
        t.set(2, -1, 2, 0.5).unwrap();
        assert_eq!(t.get(2, -1, 2), 0.5);
        assert_eq!(t.get(3, 0, 0), 0.0);
        assert!(t.set(3, 0, 0, 1.0).is_err());
        assert!(t.set(6, 0, 0, 1.0).is_err());
        assert!(scale_coefficients(&t, ScaleDirection::ToOdf).is_err());
        t.sigma = Some(nominal_sigma(4));
        let back = scale_coefficients(&scale_coefficients(&t, ScaleDirection::ToOdf).unwrap(), ScaleDirection::ToRadon)
            .unwrap();
        assert!(back.max_abs_diff(&t) < 1e-15);
    }

    #[test]
    fn wigner_matrices_are_orthogonal_representations() {
        let w = WignerD::new(4);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let e = w.matrices(Quat::E0);
        for (l, el) in e.iter().enumerate() {
            let id = DMatrix::<f64>::identity(2 * l + 1, 2 * l + 1);
            assert!((el - &id).amax() < 1e-12);
        }
        let p = Quat::random(&mut rng);
        let q = Quat::random(&mut rng);
        let (dp, dq, dpq) = (w.matrices(p), w.matrices(q), w.matrices(p * q));
        for l in 0..=4 {
            let ortho = dp[l].transpose() * &dp[l];
            assert!((ortho - DMatrix::<f64>::identity(2 * l + 1, 2 * l + 1)).amax() < 1e-12);
            // Y(pq a) = Y(p (q a)): D(pq) = D(q) D(p)
            assert!((&dpq[l] - &dq[l] * &dp[l]).amax() < 1e-12, "l={l}");
            assert!((w.entry(l, 0, l as i64, p) - dp[l][(l, 2 * l)]).abs() < 1e-13);
        }
        // zonal entry is a Legendre polynomial
        let z = p.rotate(Dir3::E3).z;
        assert!((dp[3][(3, 3)] - legendre_unchecked(3, z)).abs() < 1e-12);
    }

    #[test]
    fn kernel_table_matches_radon_closed_form() {
        let spec = KernelSpec::dlvp(4.0).unwrap();
        let q0 = Quat::new(0.2, 0.4, -0.8, 0.1).normalize().unwrap();
        let table = CoeffTable::from_kernel(&spec, q0, 4);
        let h = Dir3::new(0.3, 0.1, 0.9).unwrap();
        let r = Dir3::new(-0.4, 0.8, 0.2).unwrap();
        let eta = q0.rotate(h).angle_to(r);
        let eta_m = q0.rotate(-h).angle_to(r);
        let x = 0.5 * (crate::kernels::kernel_radon(&spec, eta) + crate::kernels::kernel_radon(&spec, eta_m));
        assert!((w_series(&table, h, r, 0.0) - x).abs() < 1e-10);
    }

    #[test]
    fn radial_series_is_symmetric() {
        let profile = vec![1.0, 0.0, 0.7, 0.0, 0.2];
        let a = w_series_radial(&profile, 0.4, 1.1);
        let b = w_series_radial(&profile, 1.1, 0.4);
        assert!((a - b).abs() < 1e-15);
        let single = vec![0.0, 0.0, 3.0];
        assert!((w_series_radial(&single, 0.0, 0.0) - 5.0 / (4.0 * PI) * 3.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_projection() {
        let rules = Rules::for_polynomial_degree(8);
        let one = |_q: Quat| 1.0;
        let proj = radon_projection(&one, 4, &rules);
        assert!((proj.table.get(0, 0, 0) - 4.0 * PI).abs() < 1e-12);
        let mut rest = proj.table.clone();
        rest.set(0, 0, 0, 0.0).unwrap();
        assert!(rest.max_abs_diff(&CoeffTable::zeros(4)) < 1e-12);
        assert!(proj.odd_residual < 1e-12);
    }

    #[test]
    fn harmonic_odf_of_uniform_table() {
        let mut t = CoeffTable::zeros(2);
        t.set(0, 0, 0, 4.0 * PI).unwrap();
        let f = HarmonicOdf::new(t);
        assert!((f.eval(Quat::new(0.5, 0.5, 0.5, 0.5)) - 1.0).abs() < 1e-13);
    }
}
