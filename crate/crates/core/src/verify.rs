//! Invariant suite: numbered criteria plus module invariants, each reported
//! with its measured error and tolerance.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::geometry::{
    dist_along_fibre, dist_point_circle, fibre_circle, matched_base_points, small_circle_point, Dir3, GreatCircle,
    Quat, SmallCircle, TorusSpec,
};
use crate::harmonics::{
    calibrate_sigma, circle_avg_harmonic, legendre_unchecked, nominal_sigma, project_radon_coeffs, sph_harm,
    sph_harm_all, HarmonicMode,
};
use crate::kernels::{
    kernel_coeff, kernel_coeff_numeric, kernel_double_radon, kernel_radon, kernel_value, kernel_value_series,
    truncation_degree, KernelSpec,
};
use crate::quadrature::{CircleRule, Rules, SphereRule};
use crate::reconstruction::{
    center_dictionary, fit_harmonic, fit_rbf, forward_w_rbf, synthesize_samples, synthesize_samples_quadrature,
    DesignGrid, OdfModel, RbfComponent, RbfMixture,
};
use crate::transforms::{
    abel_reconstruct, angle_density, dual_radon, generalized_dual_radon, generalized_radon, quarter_circle_average,
    radon, radon_hr, translate_s3, translate_sphere_fn, translated_fibre_average, w_transform, xray, Odf, RadonOf,
};

/// Settings of a verification run.
#[derive(Clone, Debug)]
pub struct VerifyConfig {
    /// Rules for checks that run at user-chosen resolution.
    pub rules: Rules,
    /// Replaces the pinned tolerance of every identity check when set.
    pub tol_identity: Option<f64>,
    pub seed: u64,
    pub abel_grid: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { rules: Rules::default(), tol_identity: None, seed: 20_240_607, abel_grid: 512 }
    }
}

/// One measured quantity of a check.
#[derive(Clone, Debug)]
pub struct Part {
    pub label: String,
    pub measured: f64,
    pub tolerance: f64,
}

impl Part {
    pub fn passed(&self) -> bool {
        self.measured <= self.tolerance
    }
}

/// Outcome of a check.
#[derive(Clone, Debug)]
pub struct CheckResult {
    /// Acceptance criterion number, `None` for module invariants.
    pub criterion: Option<u8>,
    pub name: String,
    pub parts: Vec<Part>,
    pub note: String,
    pub seconds: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        !self.parts.is_empty() && self.parts.iter().all(Part::passed)
    }

    /// The part with the largest measured/tolerance ratio.
    pub fn worst(&self) -> Option<&Part> {
        self.parts.iter().max_by(|a, b| {
            let ra = a.measured / a.tolerance;
            let rb = b.measured / b.tolerance;
            ra.total_cmp(&rb)
        })
    }

    /// One report line.
    pub fn line(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let head = match self.criterion {
            Some(n) => format!("criterion {n:>2}: {status}"),
            None => format!("invariant   : {status}"),
        };
        let (m, t) = self.worst().map_or((f64::NAN, f64::NAN), |p| (p.measured, p.tolerance));
        let mut s = format!("{head} {} measured={m:.3e} tol={t:.1e} time={:.2}s", self.name, self.seconds);
        if self.parts.len() > 1 {
            let parts: Vec<String> =
                self.parts.iter().map(|p| format!("{}={:.3e}/{:.1e}", p.label, p.measured, p.tolerance)).collect();
            s.push_str(&format!(" [{}]", parts.join(", ")));
        }
        if !self.note.is_empty() {
            s.push_str(&format!(" ({})", self.note));
        }
        s
    }
}

struct Builder {
    criterion: Option<u8>,
    name: &'static str,
    parts: Vec<Part>,
    note: String,
    start: Instant,
}

impl Builder {
    fn new(criterion: Option<u8>, name: &'static str) -> Self {
        Builder { criterion, name, parts: Vec::new(), note: String::new(), start: Instant::now() }
    }

    fn part(&mut self, label: &str, measured: f64, tolerance: f64) {
        // NaN must fail
        let measured = if measured.is_nan() { f64::INFINITY } else { measured };
        self.parts.push(Part { label: label.to_string(), measured, tolerance });
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            criterion: self.criterion,
            name: self.name.to_string(),
            parts: self.parts,
            note: self.note,
            seconds: self.start.elapsed().as_secs_f64(),
        }
    }
}

fn rng_for(cfg: &VerifyConfig, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(salt))
}

fn identity_tol(cfg: &VerifyConfig, pinned: f64) -> f64 {
    cfg.tol_identity.unwrap_or(pinned)
}

fn random_circle<R: Rng>(rng: &mut R) -> GreatCircle {
    fibre_circle(Dir3::random(rng), Dir3::random(rng))
}

fn dlvp(kappa: f64) -> KernelSpec {
    KernelSpec::dlvp(kappa).expect("valid kappa")
}

fn random_mixture<R: Rng>(rng: &mut R, spec: KernelSpec, weights: &[f64]) -> RbfMixture {
    let comps = weights.iter().map(|&weight| RbfComponent { center: Quat::random(rng), weight, spec }).collect();
    RbfMixture::new(comps).expect("weights sum to one")
}

/// Rules exact for the polynomial test ODFs used below (degree ≤ 8).
fn exact_rules() -> Rules {
    Rules::new(16, 16, 16).expect("valid resolutions")
}

/// 1. Every transform of the constant function is one.
pub fn normalization(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut b = Builder::new(Some(1), "normalization of f = 1");
    let rules = &cfg.rules;
    let mut rng = rng_for(cfg, 1);
    let one = |_q: Quat| 1.0;
    let phi = |_h: Dir3, _r: Dir3| 1.0;
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let h = Dir3::random(&mut rng);
        let r = Dir3::random(&mut rng);
        let q = Quat::random(&mut rng);
        let rho = rng.gen_range(0.05..PI - 0.05);
        let c = fibre_circle(h, r);
        let vals = [
            radon(&one, &c, rules),
            xray(&one, h, r, rules),
            generalized_radon(&one, &c, rho, rules)?,
            angle_density(&one, h, r, rho, rules)?,
            w_transform(&one, h, r, rho, rules)?,
            dual_radon(&phi, q, rules),
            generalized_dual_radon(&phi, q, 0.5 * rho.min(3.0), rules)?,
            translate_s3(&one, q, rho, rules)?,
        ];
        for v in vals {
            worst = worst.max((v - 1.0).abs());
        }
    }
    b.part("max |T1 - 1|", worst, 1e-12);
    Ok(b.finish())
}

/// 2. Circle quadrature of centered kernels against the closed-form Radon transform.
pub fn radon_closed_form(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut b = Builder::new(Some(2), "closed-form radon of centered kernels");
    let tol = identity_tol(cfg, 1e-8);
    let mut rng = rng_for(cfg, 2);
    let specs = [
        KernelSpec::abel_poisson(0.3)?,
        KernelSpec::abel_poisson(0.5)?,
        KernelSpec::abel_poisson(0.8)?,
        dlvp(1.0),
        dlvp(4.0),
        dlvp(20.0),
    ];
    for spec in specs {
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let p = Quat::random(&mut rng);
            let h = Dir3::random(&mut rng);
            let r = Dir3::random(&mut rng);
            let quad = radon_hr(&|q: Quat| spec.centered(p, q), h, r, &cfg.rules);
            let eta = p.rotate(h).angle_to(r);
            worst = worst.max((quad - kernel_radon(&spec, eta)).abs());
        }
        b.part(&format!("{:?} k={}", spec.kind(), spec.kappa()), worst, tol);
    }
    Ok(b.finish())
}

/// 3. Angle density equals the generalized Radon transform.
pub fn angle_density_identity(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut b = Builder::new(Some(3), "angle density = generalized radon");
    let mut rng = rng_for(cfg, 3);
    let f = random_mixture(&mut rng, dlvp(4.0), &[0.6, 0.4]);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let h = Dir3::random(&mut rng);
        let r = Dir3::random(&mut rng);
        let rho = rng.gen_range(0.1..PI - 0.1);
        let a = angle_density(&f, h, r, rho, &cfg.rules)?;
        let g = generalized_radon(&f, &fibre_circle(h, r), rho, &cfg.rules)?;
        worst = worst.max((a - g).abs());
    }
    b.part("max |A - R_rho|", worst, identity_tol(cfg, 1e-6));
    Ok(b.finish())
}

/// Mean over `p1 ∈ G(h, u)`, `p2 ∈ G(r, v)` of `K(p2* p1)`.
fn double_circle_mean(spec: &KernelSpec, h: Dir3, u: Dir3, r: Dir3, v: Dir3, rule: &CircleRule) -> f64 {
    let c1 = fibre_circle(h, u);
    let c2 = fibre_circle(r, v);
    rule.mean_great_circle(&c1, |p1| rule.mean_great_circle(&c2, |p2| spec.centered(p2, p1)))
}

/// 4. Twofold Radon transform of kernels by double circle quadrature.
pub fn double_radon_identity(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut b = Builder::new(Some(4), "double radon closed form");
    let rule = CircleRule::new(128)?;
    let mut rng = rng_for(cfg, 4);
    for spec in [KernelSpec::abel_poisson(0.5)?, dlvp(4.0)] {
        let mut worst = 0.0f64;
        let mut worst_line = 0.0f64;
        for i in 0..20 {
            let h = Dir3::random(&mut rng);
            let u = Dir3::random(&mut rng);
            let r = Dir3::random(&mut rng);
            let v = if i < 5 {
                // η1 = η2: v at the same angle from u as r from h
                let eta = h.angle_to(r);
                SmallCircle::new(u, eta)?.point(rng.gen_range(0.0..2.0 * PI))
            } else {
                Dir3::random(&mut rng)
            };
            let quad = double_circle_mean(&spec, h, u, r, v, &rule);
            let closed = kernel_double_radon(&spec, h.angle_to(r), u.angle_to(v));
            if i < 5 {
                worst_line = worst_line.max((quad - closed).abs());
            } else {
                worst = worst.max((quad - closed).abs());
            }
        }
        let name = format!("{:?} k={}", spec.kind(), spec.kappa());
        b.part(&name, worst, identity_tol(cfg, 1e-6));
        b.part(&format!("{name} on eta1=eta2"), worst_line, identity_tol(cfg, 1e-5));
    }
    Ok(b.finish())
}

/// 5. The two small-circle averaging orders of the Radon transform agree.
pub fn asgeirsson(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut b = Builder::new(Some(5), "mean value theorem for both arguments");
    let mut rng = rng_for(cfg, 5);
    let f = random_mixture(&mut rng, dlvp(4.0), &[0.7, 0.3]);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let h = Dir3::random(&mut rng);
        let r = Dir3::random(&mut rng);
        let rho = rng.gen_range(0.0..PI);
        let over_h = translate_sphere_fn(|hp| radon_hr(&f, hp, r, &cfg.rules), h, rho, &cfg.rules)?;
        let over_r = translate_sphere_fn(|rp| radon_hr(&f, h, rp, &cfg.rules), r, rho, &cfg.rules)?;
        worst = worst.max((over_h - over_r).abs());
    }
    b.part("max difference", worst, identity_tol(cfg, 1e-8));
    Ok(b.finish())
}

/// 6. Small-circle averages of spherical harmonics.
pub fn funk_hecke(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut b = Builder::new(Some(6), "small-circle mean of harmonics");
    let mut rng = rng_for(cfg, 6);
    let mut worst = 0.0f64;
    for l in 0..=10usize {
        for _ in 0..20 {
            let r = Dir3::random(&mut rng);
            let tau = rng.gen_range(-1.0..1.0);
            let n = rng.gen_range(-(l as i64)..=l as i64);
            let avg = circle_avg_harmonic(l, n, r, tau)?;
            worst = worst.max((avg - legendre_unchecked(l, tau) * sph_harm(l, n, r)?).abs());
        }
    }
    b.part("max |avg - P_l Y|", worst, 1e-10);
    Ok(b.finish())
}

/// 7. Conjugation along a fibre, torus factorization, distance along a fibre.
pub fn geometry_identities(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut b = Builder::new(Some(7), "geometry identities");
    let mut rng = rng_for(cfg, 7);

    let mut conj = 0.0f64;
    for _ in 0..4 {
        let h = Dir3::random(&mut rng);
        let r = Dir3::random(&mut rng);
        let rho = rng.gen_range(0.1..PI - 0.1);
        let c = fibre_circle(h, r);
        let (h0, r0) = matched_base_points(&c, rho);
        let ch = SmallCircle::new(h, rho)?;
        let cr = SmallCircle::new(r, rho)?;
        for i in 0..16 {
            let t = 2.0 * PI * i as f64 / 16.0;
            let q = c.point(t);
            for j in 0..16 {
                let u = 2.0 * PI * j as f64 / 16.0;
                let lhs = q.rotate(small_circle_point(&ch, h0, u)?);
                let rhs = small_circle_point(&cr, r0, u + 2.0 * t)?;
                let d = [lhs.x - rhs.x, lhs.y - rhs.y, lhs.z - rhs.z];
                conj = conj.max(d.iter().fold(0.0f64, |m, x| m.max(x.abs())));
            }
        }
    }
    b.part("conjugation along fibre", conj, identity_tol(cfg, 1e-12));

    let mut torus = 0.0f64;
    for _ in 0..50 {
        let h = Dir3::random(&mut rng);
        let r = Dir3::random(&mut rng);
        let u = Dir3::random(&mut rng);
        let v = Dir3::random(&mut rng);
        let rho = u.angle_to(v);
        let p1 = fibre_circle(h, u).point(rng.gen_range(0.0..2.0 * PI));
        let p2 = fibre_circle(r, v).point(rng.gen_range(0.0..2.0 * PI));
        let d = dist_point_circle(p2.conj() * p1, &fibre_circle(h, r));
        torus = torus.max((d - 0.5 * rho).abs());
    }
    b.part("torus factorization", torus, identity_tol(cfg, 1e-10));

    let mut along = 0.0f64;
    for _ in 0..100 {
        let c = random_circle(&mut rng);
        let c1 = random_circle(&mut rng);
        let t = rng.gen_range(0.0..2.0 * PI);
        let d = dist_along_fibre(&c, t, &c1) - dist_point_circle(c.point(t), &c1);
        along = along.max(d.abs());
    }
    b.part("distance along fibre", along, identity_tol(cfg, 1e-10));
    Ok(b.finish())
}

/// 8. Translated fibre average equals the generalized dual of the Radon transform.
pub fn fibre_average_identity(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut b = Builder::new(Some(8), "translated fibre average = generalized dual radon");
    let rules = exact_rules();
    let mut rng = rng_for(cfg, 8);
    let f = random_mixture(&mut rng, dlvp(4.0), &[0.5, 0.5]);
    let rf = RadonOf::new(&f, &rules);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let q = Quat::random(&mut rng);
        let rho = rng.gen_range(0.0..0.5 * PI - 0.05);
        let lhs = translated_fibre_average(&f, q, rho, &rules)?;
        let rhs = generalized_dual_radon(&rf, q, rho, &rules)?;
        worst = worst.max((lhs - rhs).abs());
    }
    b.part("max difference", worst, identity_tol(cfg, 1e-5));
    Ok(b.finish())
}

/// Directions `(h', r')` with `angle(q h' q*, r') = eta`.
fn probe_at_angle<R: Rng>(rng: &mut R, q: Quat, eta: f64) -> Result<(Dir3, Dir3)> {
    let h = Dir3::random(rng);
    let center = q.rotate(h);
    let r = SmallCircle::new(center, eta)?.point(rng.gen_range(0.0..2.0 * PI));
    Ok((h, r))
}

/// 9. For single kernels the W transform is symmetric under ρ ↔ η.
pub fn radial_swap_symmetry(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut b = Builder::new(Some(9), "rho <-> eta swap for radial functions");
    let mut rng = rng_for(cfg, 9);
    let mut closed = 0.0f64;
    let mut quad = 0.0f64;
    for (i, spec) in [dlvp(4.0), KernelSpec::abel_poisson(0.5)?].iter().enumerate() {
        for _ in 0..10 {
            let q = Quat::random(&mut rng);
            let m = RbfMixture::single(q, *spec)?;
            let eta = rng.gen_range(0.0..PI);
            let rho = rng.gen_range(0.0..PI);
            let (h, r) = probe_at_angle(&mut rng, q, eta)?;
            let (hs, rs) = probe_at_angle(&mut rng, q, rho)?;
            let a = forward_w_rbf(&m, h, r, rho)?;
            let s = forward_w_rbf(&m, hs, rs, eta)?;
            closed = closed.max((a - s).abs());
            // the quadrature route is independent of the closed forms
            if i == 0 || quad == 0.0 || rng.gen_bool(0.5) {
                let qa = w_transform(&m, h, r, rho, &cfg.rules)?;
                let qs = w_transform(&m, hs, rs, eta, &cfg.rules)?;
                quad = quad.max((qa - qs).abs()).max((qa - a).abs());
            }
        }
    }
    b.part("closed form", closed, identity_tol(cfg, 1e-8));
    b.part("quadrature", quad, identity_tol(cfg, 1e-8));
    Ok(b.finish())
}

/// 10. Radon/ODF coefficient ratio of single SO(3) modes.
pub fn sigma_calibration(_cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut b = Builder::new(Some(10), "per-degree scaling sigma_l");
    let mut spread = 0.0f64;
    let mut leakage = 0.0f64;
    let mut sigmas = Vec::new();
    for l in [2usize, 4, 6, 8] {
        let li = l as i64;
        let pairs = [(0, 0), (li, -li), (1 - li, li / 2), (-1, 2)];
        let rules = Rules::new(2 * l + 2, 2 * l, 8)?;
        let ms = calibrate_sigma(l, &pairs, &rules)?;
        let vals: Vec<f64> = ms.iter().map(|m| m.sigma).collect();
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        spread = spread.max((hi - lo) / lo.abs());
        leakage = leakage.max(ms.iter().map(|m| m.leakage).fold(0.0, f64::max));
        sigmas.push((l, vals.iter().sum::<f64>() / vals.len() as f64));
    }
    let monotone = sigmas.windows(2).all(|w| w[1].1 > w[0].1);
    b.part("relative spread over (m,n)", spread, 1e-8);
    b.part("off-slot leakage", leakage, 1e-8);
    b.part("non-monotone", if monotone { 0.0 } else { 1.0 }, 0.5);
    let nominal = nominal_sigma(8);
    b.note = sigmas
        .iter()
        .map(|&(l, s)| format!("sigma_{l}={s:.10} sqrt(2l+1)={:.10}", nominal[l]))
        .collect::<Vec<_>>()
        .join("; ");
    Ok(b.finish())
}

/// 11. Numeric projections of the dlVP kernel with κ = 4.
pub fn dlvp_finite_expansion(_cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut b = Builder::new(Some(11), "finite dlVP expansion");
    let spec = dlvp(4.0);
    let numeric: Vec<f64> = (0..=12).map(|l| kernel_coeff_numeric(&spec, l, 64)).collect();
    let tail = numeric[5..].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let ratios: Vec<f64> = (0..=4).map(|l| numeric[l] / kernel_coeff(&spec, l)).collect();
    let c = ratios[0];
    let spread = ratios.iter().fold(0.0f64, |m, r| m.max((r - c).abs()));
    b.part("max |a_l|, l > 4", tail, 1e-10);
    b.part("ratio spread, l <= 4", spread, 1e-8);
    b.note = format!("global constant {c:.15}");
    Ok(b.finish())
}

fn max_weight_error(fitted: &RbfMixture, truth: &[f64]) -> f64 {
    let min_true = truth.iter().cloned().filter(|&w| w > 0.0).fold(f64::INFINITY, f64::min);
    fitted.components().iter().zip(truth).map(|(c, &w)| (c.weight - w).abs() / min_true).fold(0.0, f64::max)
}

/// 12. Kernel mixture weights recovered from synthetic W data.
pub fn rbf_round_trip(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut b = Builder::new(Some(12), "rbf round trip");
    let spec = dlvp(20.0);
    let centers = center_dictionary(30, cfg.seed)?;
    let mut truth = vec![0.0; centers.len()];
    truth[0] = 0.5;
    truth[1] = 0.3;
    truth[2] = 0.2;
    let model = RbfMixture::new((0..3).map(|j| RbfComponent { center: centers[j], weight: truth[j], spec }).collect())?;
    let design = DesignGrid::random(500, cfg.seed.wrapping_add(12));
    let model = OdfModel::Rbf(model);
    let clean = synthesize_samples(&model, &design, 0.0, 0)?;
    let fit = fit_rbf(&clean, &centers, &spec, 0.0, false)?;
    let err = fit.mixture.as_ref().map_or(f64::INFINITY, |m| max_weight_error(m, &truth));
    b.part("noiseless", err, 1e-3);
    let noisy = synthesize_samples(&model, &design, 0.01, cfg.seed.wrapping_add(13))?;
    let fit_n = fit_rbf(&noisy, &centers, &spec, 0.0, false)?;
    let err_n = fit_n.mixture.as_ref().map_or(f64::INFINITY, |m| max_weight_error(m, &truth));
    b.part("sigma=0.01", err_n, 5e-2);
    b.note =
        format!("condition {:.2e}, residual rms {:.2e} / {:.2e}", fit.condition, fit.residual_rms, fit_n.residual_rms);
    Ok(b.finish())
}

/// 13. Harmonic coefficients from W data; odd degrees are invisible.
pub fn harmonic_round_trip(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut b = Builder::new(Some(13), "harmonic round trip and Friedel blindness");
    let rules = Rules::for_polynomial_degree(8);
    let mut rng = rng_for(cfg, 13);
    let f = random_mixture(&mut rng, dlvp(4.0), &[0.6, 0.4]);
    let odd3 = HarmonicMode::new(3, 1, -2)?;
    let odd1 = HarmonicMode::new(1, 0, 1)?;
    let perturbed = |q: Quat| f.eval(q) + 0.3 * odd3.eval(q) + 0.2 * odd1.eval(q);
    let design = DesignGrid::random(300, cfg.seed.wrapping_add(14));
    let s0 = synthesize_samples_quadrature(&f, &design, 0.0, 0, &rules)?;
    let s1 = synthesize_samples_quadrature(&perturbed, &design, 0.0, 0, &rules)?;
    let sample_diff = s0.iter().zip(&s1).map(|(a, b)| (a.value - b.value).abs()).fold(0.0, f64::max);
    let fit0 = fit_harmonic(&s0, 4, 0.0)?;
    let fit1 = fit_harmonic(&s1, 4, 0.0)?;
    let projected = project_radon_coeffs(&f, 4, &rules);
    b.part("fit vs projection", fit0.table.max_abs_diff(&projected), 1e-4);
    b.part("sample change from odd degrees", sample_diff, 1e-10);
    b.part("fit change from odd degrees", fit0.table.max_abs_diff(&fit1.table), 1e-10);
    b.note = format!("analytic table vs projection {:.2e}", f.coeff_table(4).max_abs_diff(&projected));
    Ok(b.finish())
}

/// Floor of the denominator in the relative Abel error.
pub const ABEL_REL_FLOOR: f64 = 1e-2;

/// 14. Pointwise inversion of the angle densities.
pub fn abel_inversion(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut b = Builder::new(Some(14), "abel reconstruction");
    let rules = Rules::for_polynomial_degree(8);
    let mut rng = rng_for(cfg, 14);
    let one = |_q: Quat| 1.0;
    let q = Quat::random(&mut rng);
    b.part("f = 1", (abel_reconstruct(&one, q, cfg.abel_grid, &rules)? - 1.0).abs(), 1e-8);

    let spec = dlvp(4.0);
    let q0 = Quat::random(&mut rng);
    let single = RbfMixture::single(q0, spec)?;
    let peak = kernel_value(&spec, 0.0);
    let rec = abel_reconstruct(&single, q0, cfg.abel_grid, &rules)?;
    b.part("single peak", (rec - peak).abs() / peak, 2e-2);

    let mix = random_mixture(&mut rng, spec, &[0.5, 0.5]);
    let mut worst = 0.0f64;
    let mut worst_abs = 0.0f64;
    let mut at = (0.0, 0.0);
    for _ in 0..10 {
        let q = Quat::random(&mut rng);
        let want = mix.eval(q);
        let got = abel_reconstruct(&mix, q, cfg.abel_grid, &rules)?;
        // densities have unit mean; errors are relative to f with a floor of 1% of it
        let rel = (got - want).abs() / want.abs().max(ABEL_REL_FLOOR);
        worst_abs = worst_abs.max((got - want).abs());
        if rel > worst {
            worst = rel;
            at = (want, got - want);
        }
    }
    b.part("mixture pointwise", worst, 5e-2);
    b.note = format!(
        "relative to max(|f|, {ABEL_REL_FLOOR}); max abs error {worst_abs:.2e}; worst at f={:.3e} err={:.2e}",
        at.0, at.1
    );
    Ok(b.finish())
}

/// 15. The Radon transform annihilates odd functions.
pub fn odd_kernel(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut b = Builder::new(Some(15), "radon of odd functions");
    let mut rng = rng_for(cfg, 15);
    let p = Quat::random(&mut rng);
    let spec = KernelSpec::abel_poisson(0.6)?;
    let f1 = |q: Quat| q.q0;
    let f2 = |q: Quat| q.q1 * q.q2 * q.q3;
    // difference of the one-sided Poisson profile at ±p
    let f3 = |q: Quat| {
        let c = p.dot(q);
        let k = spec.kappa();
        let lobe = |c: f64| (1.0 - k * k) / (1.0 - 2.0 * k * c + k * k).powi(2);
        lobe(c) - lobe(-c)
    };
    let fs: [&dyn Odf; 3] = [&f1, &f2, &f3];
    let mut worst = 0.0f64;
    for f in fs {
        for _ in 0..20 {
            let c = random_circle(&mut rng);
            worst = worst.max(radon(f, &c, &cfg.rules).abs());
        }
    }
    b.part("max |R f|", worst, 1e-10);
    Ok(b.finish())
}

/// Geometry invariants beyond criterion 7.
pub fn geometry_invariants(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut b = Builder::new(None, "tangent circle family and double cover");
    let mut rng = rng_for(cfg, 101);
    let mut tangent = 0.0f64;
    for _ in 0..20 {
        let q = Quat::random(&mut rng);
        let h = Dir3::random(&mut rng);
        let rho = rng.gen_range(0.0..PI);
        let sc = SmallCircle::new(q.rotate(h), rho)?;
        for k in 0..8 {
            let r = sc.point(k as f64 * PI / 4.0);
            tangent = tangent.max((dist_point_circle(q, &fibre_circle(h, r)) - 0.5 * rho).abs());
        }
    }
    b.part("tangent circles", tangent, 1e-10);
    let mut cover = 0.0f64;
    for _ in 0..50 {
        let c = random_circle(&mut rng);
        let t = rng.gen_range(0.0..2.0 * PI);
        let a = c.point(t + PI);
        let m = c.point(t);
        let d = [a.q0 + m.q0, a.q1 + m.q1, a.q2 + m.q2, a.q3 + m.q3];
        cover = cover.max(d.iter().fold(0.0f64, |x, y| x.max(y.abs())));
    }
    b.part("antipodal double cover", cover, 1e-14);
    Ok(b.finish())
}

/// Quadrature invariants.
pub fn quadrature_invariants(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut b = Builder::new(None, "quadrature convergence, torus limit, sphere orthonormality");
    let mut rng = rng_for(cfg, 102);
    let mut conv = 0.0f64;
    let r512 = CircleRule::new(512)?;
    let r1024 = CircleRule::new(1024)?;
    for spec in [KernelSpec::abel_poisson(0.9)?, dlvp(50.0)] {
        for _ in 0..20 {
            let p = Quat::random(&mut rng);
            let c = random_circle(&mut rng);
            let a = r512.mean_great_circle(&c, |q| spec.centered(p, q));
            let b2 = r1024.mean_great_circle(&c, |q| spec.centered(p, q));
            conv = conv.max((a - b2).abs());
        }
    }
    b.part("circle doubling beyond 256", conv, 1e-10);

    let mut torus = 0.0f64;
    let f = random_mixture(&mut rng, dlvp(4.0), &[1.0]);
    for _ in 0..10 {
        let c = random_circle(&mut rng);
        let t = cfg.rules.torus.mean(&TorusSpec::new(c, 0.0)?, |q| f.eval(q));
        torus = torus.max((t - radon(&f, &c, &cfg.rules)).abs());
    }
    b.part("torus at zero radius", torus, 1e-12);

    let deg = 16;
    let rule = SphereRule::new(deg)?;
    let lmax = deg / 2;
    let k = (lmax + 1) * (lmax + 1);
    let ys: Vec<Vec<f64>> = rule.nodes().iter().map(|&d| sph_harm_all(lmax, d)).collect();
    let mut ortho = 0.0f64;
    for a in 0..k {
        for c in 0..k {
            let g: f64 = 4.0 * PI * ys.iter().zip(rule.weights()).map(|(y, w)| w * y[a] * y[c]).sum::<f64>();
            ortho = ortho.max((g - if a == c { 1.0 } else { 0.0 }).abs());
        }
    }
    b.part("sphere rule orthonormality", ortho, 1e-12);
    Ok(b.finish())
}

/// Transform invariants beyond the numbered criteria.
pub fn transform_invariants(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut b = Builder::new(None, "Friedel symmetry and quarter-circle form");
    let rules = exact_rules();
    let mut rng = rng_for(cfg, 103);
    let f = random_mixture(&mut rng, dlvp(4.0), &[0.3, 0.7]);
    let mut friedel = 0.0f64;
    for _ in 0..10 {
        let h = Dir3::random(&mut rng);
        let r = Dir3::random(&mut rng);
        let rho = rng.gen_range(0.0..PI);
        let a = w_transform(&f, h, r, rho, &rules)?;
        let m = w_transform(&f, -h, r, rho, &rules)?;
        friedel = friedel.max((a - m).abs());
    }
    b.part("W even in h", friedel, 1e-13);
    let mut quarter = 0.0f64;
    for _ in 0..5 {
        let q = Quat::random(&mut rng);
        let rho = rng.gen_range(0.0..0.5 * PI - 0.05);
        let a = translated_fibre_average(&f, q, rho, &rules)?;
        let c = quarter_circle_average(&f, q, rho, 32, &rules)?;
        quarter = quarter.max((a - c).abs());
    }
    b.part("quarter-circle form", quarter, identity_tol(cfg, 1e-6));
    Ok(b.finish())
}

/// Kernel invariants: series consistency and positivity.
pub fn kernel_invariants(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut b = Builder::new(None, "kernel series consistency, positivity, finiteness");
    let mut rng = rng_for(cfg, 104);
    let specs = [KernelSpec::abel_poisson(0.3)?, KernelSpec::abel_poisson(0.7)?, dlvp(1.0), dlvp(4.0), dlvp(20.0)];
    let mut series = 0.0f64;
    let mut negative = 0.0f64;
    for spec in specs {
        let lmax = truncation_degree(&spec, 1e-14);
        for _ in 0..20 {
            let omega = rng.gen_range(0.0..2.0 * PI);
            let v = kernel_value(&spec, omega);
            series = series.max((v - kernel_value_series(&spec, omega, lmax)).abs() / v.abs().max(1.0));
            let e1 = rng.gen_range(0.0..PI);
            let e2 = rng.gen_range(0.0..PI);
            for x in [v, kernel_radon(&spec, e1), kernel_double_radon(&spec, e1, e2)] {
                negative = negative.max(-x);
            }
        }
    }
    let mut finite = 0.0f64;
    for k in [1usize, 2, 3, 6, 9] {
        let spec = dlvp(k as f64);
        for l in k + 1..=k + 6 {
            finite = finite.max(kernel_coeff_numeric(&spec, l, 64).abs());
        }
    }
    b.part("series vs closed form", series, 1e-8);
    b.part("most negative value", negative, 0.0);
    b.part("dlVP projections beyond integer order", finite, 1e-10);
    Ok(b.finish())
}

/// Reconstruction invariants: linearity and exact dictionary recovery.
pub fn reconstruction_invariants(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut b = Builder::new(None, "forward linearity and exact weight recovery");
    let mut rng = rng_for(cfg, 105);
    let spec = dlvp(4.0);
    let centers = center_dictionary(8, cfg.seed.wrapping_add(1))?;
    let weights = [0.1, 0.2, 0.05, 0.15, 0.1, 0.2, 0.1, 0.1];
    let mix = RbfMixture::new(
        centers.iter().zip(weights).map(|(&center, weight)| RbfComponent { center, weight, spec }).collect(),
    )?;
    let mut lin = 0.0f64;
    for _ in 0..20 {
        let h = Dir3::random(&mut rng);
        let r = Dir3::random(&mut rng);
        let rho = rng.gen_range(0.0..PI);
        let whole = forward_w_rbf(&mix, h, r, rho)?;
        let mut parts = 0.0;
        for c in mix.components() {
            parts += c.weight * forward_w_rbf(&RbfMixture::single(c.center, spec)?, h, r, rho)?;
        }
        lin = lin.max((whole - parts).abs());
    }
    b.part("linearity", lin, 1e-12);
    let samples = synthesize_samples(&OdfModel::Rbf(mix), &DesignGrid::random(200, cfg.seed), 0.0, 0)?;
    let fit = fit_rbf(&samples, &centers, &spec, 0.0, false)?;
    let err = fit
        .mixture
        .map(|m| m.components().iter().zip(weights).map(|(c, w)| (c.weight - w).abs()).fold(0.0, f64::max))
        .unwrap_or(f64::INFINITY);
    b.part("weight recovery", err, 1e-8);
    Ok(b.finish())
}

/// Runs acceptance criterion `n` (1 to 15).
pub fn run_criterion(n: u8, cfg: &VerifyConfig) -> Result<CheckResult> {
    match n {
        1 => normalization(cfg),
        2 => radon_closed_form(cfg),
        3 => angle_density_identity(cfg),
        4 => double_radon_identity(cfg),
        5 => asgeirsson(cfg),
        6 => funk_hecke(cfg),
        7 => geometry_identities(cfg),
        8 => fibre_average_identity(cfg),
        9 => radial_swap_symmetry(cfg),
        10 => sigma_calibration(cfg),
        11 => dlvp_finite_expansion(cfg),
        12 => rbf_round_trip(cfg),
        13 => harmonic_round_trip(cfg),
        14 => abel_inversion(cfg),
        15 => odd_kernel(cfg),
        _ => Err(crate::Error::InvalidParameter(format!("no criterion {n}"))),
    }
}

/// Number of acceptance criteria.
pub const CRITERIA: u8 = 15;

/// Module invariants not covered by a numbered criterion.
pub fn run_invariants(cfg: &VerifyConfig) -> Vec<Result<CheckResult>> {
    vec![
        geometry_invariants(cfg),
        quadrature_invariants(cfg),
        transform_invariants(cfg),
        kernel_invariants(cfg),
        reconstruction_invariants(cfg),
    ]
}

/// A failed check for an error raised while running it.
pub fn errored(criterion: Option<u8>, err: &crate::Error) -> CheckResult {
    CheckResult {
        criterion,
        name: "error".into(),
        parts: vec![Part { label: "error".into(), measured: f64::INFINITY, tolerance: 0.0 }],
        note: err.to_string(),
        seconds: 0.0,
    }
}

/// All criteria followed by all module invariants.
pub fn run_suite(cfg: &VerifyConfig) -> Vec<CheckResult> {
    let mut out: Vec<CheckResult> =
        (1..=CRITERIA).map(|n| run_criterion(n, cfg).unwrap_or_else(|e| errored(Some(n), &e))).collect();
    out.extend(run_invariants(cfg).into_iter().map(|r| r.unwrap_or_else(|e| errored(None, &e))));
    out
}
