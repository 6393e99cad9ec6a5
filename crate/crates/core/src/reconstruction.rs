//! ODF models, synthetic W-transform data, and least-squares fits of kernel
//! mixtures and harmonic coefficient tables.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::error::{Error, Result};
use crate::geometry::{Dir3, Quat};
use crate::harmonics::{fibonacci_sphere, legendre_all, sph_harm_all_into, w_series, CoeffTable, HarmonicOdf};
use crate::kernels::{kernel_double_radon, KernelSpec};
use crate::linalg::{least_squares, nnls};
use crate::quadrature::Rules;
use crate::transforms::{w_transform, Odf};

/// Tolerance on the weight sum of a mixture.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// One kernel of a mixture.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RbfComponent {
    pub center: Quat,
    pub weight: f64,
    pub spec: KernelSpec,
}

/// Superposition `f(q) = Σ_j λ_j K_j(q_j* q)` with `Σ λ_j = 1`.
///
/// Weights may be negative: unconstrained fits produce signed weights, and
/// the result is still a valid signed density with unit mean.
#[derive(Clone, Debug, PartialEq)]
pub struct RbfMixture {
    components: Vec<RbfComponent>,
}

impl RbfMixture {
    pub fn new(components: Vec<RbfComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("mixture needs at least one component".into()));
        }
        let mut sum = 0.0;
        for c in &components {
            c.center.check_unit()?;
            if !c.weight.is_finite() {
                return Err(Error::InvalidParameter(format!("weight {} is not finite", c.weight)));
            }
            sum += c.weight;
        }
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidParameter(format!("weights sum to {sum}, expected 1")));
        }
        Ok(RbfMixture { components })
    }

    /// Single kernel with weight one.
    pub fn single(center: Quat, spec: KernelSpec) -> Result<Self> {
        RbfMixture::new(vec![RbfComponent { center, weight: 1.0, spec }])
    }

    pub fn components(&self) -> &[RbfComponent] {
        &self.components
    }

    /// Coefficient table of the mixture up to degree `lmax`.
    pub fn coeff_table(&self, lmax: usize) -> CoeffTable {
        let mut t = CoeffTable::zeros(lmax);
        for c in &self.components {
            t.add_scaled(&CoeffTable::from_kernel(&c.spec, c.center, lmax), c.weight);
        }
        t
    }
}

impl Odf for RbfMixture {
    fn eval(&self, q: Quat) -> f64 {
        self.components.iter().map(|c| c.weight * c.spec.centered(c.center, q)).sum()
    }

    fn is_even(&self) -> bool {
        true
    }
}

/// An orientation density function.
#[derive(Clone, Debug)]
pub enum OdfModel {
    Uniform,
    Rbf(RbfMixture),
    Harmonic(HarmonicOdf),
}

impl Odf for OdfModel {
    fn eval(&self, q: Quat) -> f64 {
        evaluate_odf(self, q)
    }

    fn is_even(&self) -> bool {
        true
    }
}

/// `f(q)` for any model.
pub fn evaluate_odf(model: &OdfModel, q: Quat) -> f64 {
    match model {
        OdfModel::Uniform => 1.0,
        OdfModel::Rbf(m) => m.eval(q),
        OdfModel::Harmonic(h) => h.eval(q),
    }
}

/// `W K(h, r; ρ)` of a single kernel centered at `center`.
pub fn kernel_w(spec: &KernelSpec, center: Quat, h: Dir3, r: Dir3, rho: f64) -> f64 {
    let c = center.rotate(h).dot(r).clamp(-1.0, 1.0);
    let eta = c.acos();
    0.5 * (kernel_double_radon(spec, eta, rho) + kernel_double_radon(spec, PI - eta, rho))
}

/// Closed-form W transform of a mixture.
pub fn forward_w_rbf(model: &RbfMixture, h: Dir3, r: Dir3, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    Ok(model.components.iter().map(|c| c.weight * kernel_w(&c.spec, c.center, h, r, rho)).sum())
}

/// W transform of any model: closed form for mixtures, harmonic series for
/// tables, one for the uniform law.
pub fn forward_w(model: &OdfModel, h: Dir3, r: Dir3, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    match model {
        OdfModel::Uniform => Ok(1.0),
        OdfModel::Rbf(m) => forward_w_rbf(m, h, r, rho),
        OdfModel::Harmonic(hm) => Ok(w_series(hm.table(), h, r, rho)),
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(0.0..=PI).contains(&rho) {
        return Err(Error::AngleOutOfRange { value: rho, lo: 0.0, hi: PI });
    }
    Ok(())
}

/// One value of the W transform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleRecord {
    pub h: Dir3,
    pub r: Dir3,
    /// Radians.
    pub rho: f64,
    pub value: f64,
    pub sigma: Option<f64>,
}

impl SampleRecord {
    pub fn new(h: Dir3, r: Dir3, rho: f64, value: f64, sigma: Option<f64>) -> Result<Self> {
        check_rho(rho)?;
        if !value.is_finite() {
            return Err(Error::InvalidParameter(format!("sample value {value} is not finite")));
        }
        if let Some(s) = sigma {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::InvalidParameter(format!("sample sigma {s} is invalid")));
            }
        }
        Ok(SampleRecord { h, r, rho, value, sigma })
    }
}

/// Probe triples `(h, r, ρ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignGrid {
    pub probes: Vec<(Dir3, Dir3, f64)>,
}

impl DesignGrid {
    /// `n` independent uniform directions `h`, `r` and `ρ ∈ [0, π]`.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let angle = Uniform::new_inclusive(0.0, PI);
        let probes = (0..n)
            .map(|_| {
                let h = Dir3::random(&mut rng);
                let r = Dir3::random(&mut rng);
                (h, r, angle.sample(&mut rng))
            })
            .collect();
        DesignGrid { probes }
    }

    /// Product of spiral point sets for `h` and `r` with midpoint angles
    /// `ρ_k = (k + ½)π / n_rho`. The `r` set is rotated by a fixed
    /// irrational angle about the z-axis so it differs from the `h` set.
    pub fn product(n_h: usize, n_r: usize, n_rho: usize) -> Self {
        let hs = fibonacci_sphere(n_h);
        let (s, c) = 1.0f64.sin_cos();
        let rs: Vec<Dir3> = fibonacci_sphere(n_r)
            .into_iter()
            .map(|d| Dir3::new_unchecked(c * d.x - s * d.y, s * d.x + c * d.y, d.z))
            .collect();
        let mut probes = Vec::with_capacity(n_h * n_r * n_rho);
        for &h in &hs {
            for &r in &rs {
                for k in 0..n_rho {
                    probes.push((h, r, (k as f64 + 0.5) * PI / n_rho as f64));
                }
            }
        }
        DesignGrid { probes }
    }

    pub fn len(&self) -> usize {
        self.probes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probes.is_empty()
    }
}

fn add_noise(
    values: impl Iterator<Item = Result<(Dir3, Dir3, f64, f64)>>,
    noise: f64,
    seed: u64,
) -> Result<Vec<SampleRecord>> {
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise level {noise} is invalid")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise.max(f64::MIN_POSITIVE)).expect("positive deviation");
    let sigma = (noise > 0.0).then_some(noise);
    values
        .map(|v| {
            let (h, r, rho, w) = v?;
            let eps = if noise > 0.0 { normal.sample(&mut rng) } else { 0.0 };
            SampleRecord::new(h, r, rho, w + eps, sigma)
        })
        .collect()
}

/// Forward model at every probe plus additive Gaussian noise of deviation
/// `noise`; deterministic for a given seed.
pub fn synthesize_samples(model: &OdfModel, design: &DesignGrid, noise: f64, seed: u64) -> Result<Vec<SampleRecord>> {
    let values = design.probes.iter().map(|&(h, r, rho)| forward_w(model, h, r, rho).map(|w| (h, r, rho, w)));
    add_noise(values, noise, seed)
}

/// Like [`synthesize_samples`] for an arbitrary ODF, with the W transform
/// evaluated by quadrature.
pub fn synthesize_samples_quadrature<O: Odf + ?Sized>(
    f: &O,
    design: &DesignGrid,
    noise: f64,
    seed: u64,
    rules: &Rules,
) -> Result<Vec<SampleRecord>> {
    let values = design.probes.iter().map(|&(h, r, rho)| w_transform(f, h, r, rho, rules).map(|w| (h, r, rho, w)));
    add_noise(values, noise, seed)
}

/// Outcome of [`fit_rbf`].
#[derive(Clone, Debug)]
pub struct RbfFit {
    /// Least-squares weights before normalization.
    pub raw_weights: Vec<f64>,
    /// `Σ raw_weights`.
    pub scale: f64,
    /// Normalized mixture; `None` when the scale vanishes.
    pub mixture: Option<RbfMixture>,
    pub residual_rms: f64,
    pub condition: f64,
}

/// Fits mixture weights on fixed centers by (ridge) least squares, optionally
/// constrained to `λ ≥ 0`.
pub fn fit_rbf(
    samples: &[SampleRecord],
    centers: &[Quat],
    spec: &KernelSpec,
    ridge: f64,
    nonneg: bool,
) -> Result<RbfFit> {
    if centers.is_empty() {
        return Err(Error::InvalidParameter("no centers given".into()));
    }
    for c in centers {
        c.check_unit()?;
    }
    let a = DMatrix::from_fn(samples.len(), centers.len(), |i, j| {
        let s = &samples[i];
        kernel_w(spec, centers[j], s.h, s.r, s.rho)
    });
    let b = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.value));
    let sol = if nonneg {
        if ridge == 0.0 && samples.len() < centers.len() {
            return Err(Error::Underdetermined { rows: samples.len(), unknowns: centers.len() });
        }
        nnls(&a, &b, ridge)?
    } else {
        least_squares(&a, &b, ridge)?
    };
    let residual_rms = rms(&(&a * &sol.x - &b));
    let raw_weights: Vec<f64> = sol.x.iter().copied().collect();
    let scale: f64 = raw_weights.iter().sum();
    let mixture = if scale.abs() > 1e-12 * raw_weights.iter().map(|w| w.abs()).sum::<f64>().max(1e-300) {
        let comps = centers
            .iter()
            .zip(&raw_weights)
            .map(|(&center, &w)| RbfComponent { center, weight: w / scale, spec: *spec })
            .collect::<Vec<_>>();
        // renormalize once more so the stored sum is 1 to rounding
        let total: f64 = comps.iter().map(|c| c.weight).sum();
        let comps = comps.into_iter().map(|c| RbfComponent { weight: c.weight / total, ..c }).collect();
        Some(RbfMixture::new(comps)?)
    } else {
        None
    };
    Ok(RbfFit { raw_weights, scale, mixture, residual_rms, condition: sol.cond })
}

fn rms(v: &DVector<f64>) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        (v.norm_squared() / v.len() as f64).sqrt()
    }
}

/// Number of unknowns `Σ_{l even ≤ L} (2l+1)²`.
pub fn harmonic_unknowns(lmax: usize) -> usize {
    (0..=lmax).step_by(2).map(|l| (2 * l + 1) * (2 * l + 1)).sum()
}

/// Outcome of [`fit_harmonic`].
#[derive(Clone, Debug)]
pub struct HarmonicFit {
    pub table: CoeffTable,
    pub residual_rms: f64,
    pub condition: f64,
}

/// Least-squares fit of `w_i = Σ_{l even ≤ L} P_l(cos ρ_i) Σ_{m,n} C_l^{mn}
/// Y_l^m(h_i) Y_l^n(r_i)`.
pub fn fit_harmonic(samples: &[SampleRecord], lmax: usize, ridge: f64) -> Result<HarmonicFit> {
    let k = harmonic_unknowns(lmax);
    if ridge == 0.0 && samples.len() < k {
        return Err(Error::Underdetermined { rows: samples.len(), unknowns: k });
    }
    let nsh = (lmax + 1) * (lmax + 1);
    let mut a = DMatrix::<f64>::zeros(samples.len(), k);
    let mut yh = vec![0.0; nsh];
    let mut yr = vec![0.0; nsh];
    for (i, s) in samples.iter().enumerate() {
        sph_harm_all_into(lmax, s.h, &mut yh);
        sph_harm_all_into(lmax, s.r, &mut yr);
        let pl = legendre_all(lmax, s.rho.cos());
        let mut col = 0;
        for l in (0..=lmax).step_by(2) {
            let w = 2 * l + 1;
            for mi in 0..w {
                for ni in 0..w {
                    a[(i, col)] = pl[l] * yh[l * l + mi] * yr[l * l + ni];
                    col += 1;
                }
            }
        }
    }
    let b = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.value));
    let sol = least_squares(&a, &b, ridge)?;
    let residual_rms = rms(&(&a * &sol.x - &b));
    let mut table = CoeffTable::zeros(lmax);
    let mut col = 0;
    for l in (0..=lmax).step_by(2) {
        let li = l as i64;
        for m in -li..=li {
            for n in -li..=li {
                table.set(l, m, n, sol.x[col])?;
                col += 1;
            }
        }
    }
    Ok(HarmonicFit { table, residual_rms, condition: sol.cond })
}

/// Rotations of the 600-cell (`level = 0`, 60 rotations) or the 600-cell
/// with its normalized edge midpoints (`level = 1`, 420 rotations), one
/// representative of each `±q` pair with nonnegative scalar part.
pub fn center_pool(level: usize) -> Result<Vec<Quat>> {
    if level > 1 {
        return Err(Error::InvalidParameter(format!("refinement level {level} not supported (0 or 1)")));
    }
    let phi = 0.5 * (1.0 + 5f64.sqrt());
    let mut verts: Vec<[f64; 4]> = Vec::with_capacity(120);
    for i in 0..4 {
        for s in [1.0, -1.0] {
            let mut v = [0.0; 4];
            v[i] = s;
            verts.push(v);
        }
    }
    for bits in 0..16u32 {
        let v: Vec<f64> = (0..4).map(|k| if bits >> k & 1 == 1 { -0.5 } else { 0.5 }).collect();
        verts.push([v[0], v[1], v[2], v[3]]);
    }
    let even_perms = [
        [0, 1, 2, 3],
        [0, 2, 3, 1],
        [0, 3, 1, 2],
        [1, 0, 3, 2],
        [1, 2, 0, 3],
        [1, 3, 2, 0],
        [2, 0, 1, 3],
        [2, 1, 3, 0],
        [2, 3, 0, 1],
        [3, 0, 2, 1],
        [3, 1, 0, 2],
        [3, 2, 1, 0],
    ];
    let base = [0.5 * phi, 0.5, 0.5 / phi, 0.0];
    for p in even_perms {
        for bits in 0..8u32 {
            let signed = [
                if bits & 1 == 1 { -base[0] } else { base[0] },
                if bits & 2 == 2 { -base[1] } else { base[1] },
                if bits & 4 == 4 { -base[2] } else { base[2] },
                0.0,
            ];
            let mut v = [0.0; 4];
            for (k, &pk) in p.iter().enumerate() {
                v[pk] = signed[k];
            }
            verts.push(v);
        }
    }
    let quats: Vec<Quat> = verts.into_iter().map(Quat::from_array).collect();
    let mut pool: Vec<Quat> = Vec::new();
    let push = |q: Quat, pool: &mut Vec<Quat>| {
        let q = q.canonical();
        if !pool.iter().any(|p| (p.dot(q).abs() - 1.0).abs() < 1e-9) {
            pool.push(q);
        }
    };
    for &q in &quats {
        push(q, &mut pool);
    }
    if level == 1 {
        let edge = 0.5 * phi;
        for i in 0..quats.len() {
            for j in i + 1..quats.len() {
                if (quats[i].dot(quats[j]) - edge).abs() < 1e-9 {
                    let mid = (quats[i] + quats[j]).normalize()?;
                    push(mid, &mut pool);
                }
            }
        }
    }
    Ok(pool)
}

/// `count` distinct rotations drawn from the refined 600-cell by a seeded
/// shuffle.
pub fn center_dictionary(count: usize, seed: u64) -> Result<Vec<Quat>> {
    let level = usize::from(count > 60);
    let mut pool = center_pool(level)?;
    if count > pool.len() {
        return Err(Error::InvalidParameter(format!(
            "dictionary of {count} centers exceeds the {} available",
            pool.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pool.shuffle(&mut rng);
    pool.truncate(count);
    Ok(pool)
}
