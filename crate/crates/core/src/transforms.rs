//! Forward and dual transforms on S³, in mean-value normalization.
//!
//! Every transform maps the constant function 1 to 1. Quadrature resolutions
//! come from an explicit [`Rules`] bundle so callers can trade accuracy for
//! speed and demonstrate convergence.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{fibre_circle, Dir3, GreatCircle, Quat, SmallCircle, TorusSpec};
use crate::quadrature::{gauss_legendre, Rules};

/// A real function on S³, typically an orientation density.
pub trait Odf {
    fn eval(&self, q: Quat) -> f64;

    /// Whether `f(q) = f(−q)` holds by construction.
    fn is_even(&self) -> bool {
        false
    }
}

impl<F: Fn(Quat) -> f64> Odf for F {
    fn eval(&self, q: Quat) -> f64 {
        self(q)
    }
}

/// Wraps a callable together with an evenness flag.
pub struct OdfEvaluator<F> {
    f: F,
    even: bool,
}

impl<F: Fn(Quat) -> f64> OdfEvaluator<F> {
    pub fn new(f: F, even: bool) -> Self {
        OdfEvaluator { f, even }
    }

    /// Largest `|f(q) − f(−q)|` over `probes` random quaternions.
    pub fn evenness_defect(&self, probes: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..probes)
            .map(|_| {
                let q = Quat::random(&mut rng);
                ((self.f)(q) - (self.f)(-q)).abs()
            })
            .fold(0.0, f64::max)
    }
}

impl<F: Fn(Quat) -> f64> Odf for OdfEvaluator<F> {
    fn eval(&self, q: Quat) -> f64 {
        (self.f)(q)
    }

    fn is_even(&self) -> bool {
        self.even
    }
}

/// A real function on great circles, represented through their witnesses
/// `(h, r)`; expected to satisfy `φ(h, r) = φ(−h, −r)`.
pub trait CircleFunction {
    fn eval(&self, h: Dir3, r: Dir3) -> f64;
}

impl<F: Fn(Dir3, Dir3) -> f64> CircleFunction for F {
    fn eval(&self, h: Dir3, r: Dir3) -> f64 {
        self(h, r)
    }
}

/// The Radon transform of an ODF, viewed as a circle function.
pub struct RadonOf<'a, O: ?Sized> {
    f: &'a O,
    rules: &'a Rules,
}

impl<'a, O: Odf + ?Sized> RadonOf<'a, O> {
    pub fn new(f: &'a O, rules: &'a Rules) -> Self {
        RadonOf { f, rules }
    }
}

impl<O: Odf + ?Sized> CircleFunction for RadonOf<'_, O> {
    fn eval(&self, h: Dir3, r: Dir3) -> f64 {
        radon_hr(self.f, h, r, self.rules)
    }
}

fn check_angle(rho: f64, hi: f64) -> Result<()> {
    if (0.0..=hi).contains(&rho) {
        Ok(())
    } else {
        Err(Error::AngleOutOfRange { value: rho, lo: 0.0, hi })
    }
}

/// Mean of `f` over the great circle `c`.
pub fn radon<O: Odf + ?Sized>(f: &O, c: &GreatCircle, rules: &Rules) -> f64 {
    rules.circle.mean_great_circle(c, |q| f.eval(q))
}

/// Mean of `f` over the fibre of `(h, r)`.
pub fn radon_hr<O: Odf + ?Sized>(f: &O, h: Dir3, r: Dir3, rules: &Rules) -> f64 {
    radon(f, &fibre_circle(h, r), rules)
}

/// Friedel-symmetrized transform `½[R f(h, r) + R f(−h, r)]`.
pub fn xray<O: Odf + ?Sized>(f: &O, h: Dir3, r: Dir3, rules: &Rules) -> f64 {
    0.5 * (radon_hr(f, h, r, rules) + radon_hr(f, -h, r, rules))
}

/// Mean of `f` over the torus of points at distance `ρ/2` from `c`.
pub fn generalized_radon<O: Odf + ?Sized>(f: &O, c: &GreatCircle, rho: f64, rules: &Rules) -> Result<f64> {
    check_angle(rho, PI)?;
    let torus = TorusSpec::new(*c, 0.5 * rho)?;
    Ok(rules.torus.mean(&torus, |q| f.eval(q)))
}

/// Mean of `g` over the small circle `c(r; ρ)`.
pub fn translate_sphere_fn<G: Fn(Dir3) -> f64>(g: G, r: Dir3, rho: f64, rules: &Rules) -> Result<f64> {
    let c = SmallCircle::new(r, rho)?;
    Ok(rules.small_circle.mean_small_circle(&c, g))
}

/// Angle density: mean of `R f(h, ·)` over `c(r; ρ)`.
pub fn angle_density<O: Odf + ?Sized>(f: &O, h: Dir3, r: Dir3, rho: f64, rules: &Rules) -> Result<f64> {
    translate_sphere_fn(|rp| radon_hr(f, h, rp, rules), r, rho, rules)
}

/// `½[A f(h, r; ρ) + A f(−h, r; ρ)]`, even in `h`.
pub fn w_transform<O: Odf + ?Sized>(f: &O, h: Dir3, r: Dir3, rho: f64, rules: &Rules) -> Result<f64> {
    Ok(0.5 * (angle_density(f, h, r, rho, rules)? + angle_density(f, -h, r, rho, rules)?))
}

/// Mean of `φ` over all circles through `q`: `mean_h φ(h, q h q*)`.
pub fn dual_radon<P: CircleFunction + ?Sized>(phi: &P, q: Quat, rules: &Rules) -> f64 {
    rules.sphere.mean(|h| phi.eval(h, q.rotate(h)))
}

/// Mean of `φ` over all circles at distance `ρ` from `q`, parametrized by
/// `h ∈ S²` and `r ∈ c(q h q*; 2ρ)`.
pub fn generalized_dual_radon<P: CircleFunction + ?Sized>(phi: &P, q: Quat, rho: f64, rules: &Rules) -> Result<f64> {
    if !(0.0..0.5 * PI).contains(&rho) {
        return Err(Error::AngleOutOfRange { value: rho, lo: 0.0, hi: 0.5 * PI });
    }
    let mut err = None;
    let v = rules.sphere.mean(|h| match translate_sphere_fn(|r| phi.eval(h, r), q.rotate(h), 2.0 * rho, rules) {
        Ok(v) => v,
        Err(e) => {
            err = Some(e);
            0.0
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Mean of `f` over the 2-sphere of points at geodesic distance `ρ` from `q`.
pub fn translate_s3<O: Odf + ?Sized>(f: &O, q: Quat, rho: f64, rules: &Rules) -> Result<f64> {
    check_angle(rho, PI)?;
    Ok(rules.sphere.mean_small_sphere3(q, rho, |p| f.eval(p)))
}

/// A fixed great circle at distance `ρ` from `q`: the fibre of `e3` and a
/// point of `c(q e3 q*; 2ρ)`.
pub fn circle_at_distance(q: Quat, rho: f64) -> Result<GreatCircle> {
    if !(0.0..0.5 * PI).contains(&rho) {
        return Err(Error::AngleOutOfRange { value: rho, lo: 0.0, hi: 0.5 * PI });
    }
    let r = SmallCircle::new(q.rotate(Dir3::E3), 2.0 * rho)?.point(0.0);
    Ok(fibre_circle(Dir3::E3, r))
}

/// Mean over `p` on a fixed great circle `C0` with `d(q, C0) = ρ` of the S³
/// translation of `f` at `q` by the distance from `q` to `p`.
pub fn translated_fibre_average<O: Odf + ?Sized>(f: &O, q: Quat, rho: f64, rules: &Rules) -> Result<f64> {
    let c0 = circle_at_distance(q, rho)?;
    let mut total = 0.0;
    for &t in rules.circle.nodes() {
        let p = c0.point(t);
        let d = q.dot(p).clamp(-1.0, 1.0).acos();
        total += translate_s3(f, q, d, rules)?;
    }
    Ok(total * rules.circle.weight())
}

/// Quarter-circle form for even `f`:
/// `(2/π) ∫₀^{π/2} T^{d(τ)} f(q) dτ` with `cos d(τ) = cos ρ cos τ`,
/// integrated by Gauss–Legendre with `nodes` points.
pub fn quarter_circle_average<O: Odf + ?Sized>(f: &O, q: Quat, rho: f64, nodes: usize, rules: &Rules) -> Result<f64> {
    if !(0.0..0.5 * PI).contains(&rho) {
        return Err(Error::AngleOutOfRange { value: rho, lo: 0.0, hi: 0.5 * PI });
    }
    let (x, w) = gauss_legendre(nodes);
    let mut total = 0.0;
    for (&xi, &wi) in x.iter().zip(&w) {
        let tau = 0.25 * PI * (xi + 1.0);
        let d = (rho.cos() * tau.cos()).clamp(-1.0, 1.0).acos();
        total += wi * translate_s3(f, q, d, rules)?;
    }
    // (2/π) · (π/4) · Σ wᵢ gᵢ
    Ok(0.5 * total)
}

/// Minimum θ-grid size accepted by [`abel_reconstruct`].
pub const MIN_ABEL_GRID: usize = 64;

/// Reconstructs an even `f` at `q` from its angle densities.
///
/// With `G(θ) = mean_h A f(h, q h q*; θ)` the inversion reads
/// `f(q) = G(π) − ∫₀^π G'(θ) / sin(θ/2) dθ`. `G'` is taken by central
/// differences on a uniform grid of `grid` intervals, one-sided at the ends;
/// the integrand at θ = 0 is its limit `2 G''(0)`; the integral uses the
/// trapezoid rule, extrapolated over the grids `n`, `n/2`, `n/4`.
/// `grid` must be a multiple of 4.
pub fn abel_reconstruct<O: Odf + ?Sized>(f: &O, q: Quat, grid: usize, rules: &Rules) -> Result<f64> {
    if grid < MIN_ABEL_GRID {
        return Err(Error::ResolutionTooSmall { given: grid, min: MIN_ABEL_GRID });
    }
    if !grid.is_multiple_of(4) {
        return Err(Error::InvalidParameter(format!("abel grid {grid} must be a multiple of 4")));
    }
    let step = PI / grid as f64;
    let g = (0..=grid)
        .map(|k| {
            let theta = (k as f64 * step).min(PI);
            let mut err = None;
            let v = rules.sphere.mean(|h| {
                angle_density(f, h, q.rotate(h), theta, rules).unwrap_or_else(|e| {
                    err = Some(e);
                    0.0
                })
            });
            match err {
                Some(e) => Err(e),
                None => Ok(v),
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(abel_extrapolate(&g))
}

/// Richardson extrapolation of [`abel_invert_profile`] over the grids `n`,
/// `n/2`, `n/4`, removing the `h²` and `h³` error terms.
fn abel_extrapolate(g: &[f64]) -> f64 {
    let mut r: Vec<f64> = (0..3)
        .map(|k| {
            let sub: Vec<f64> = g.iter().step_by(1 << k).copied().collect();
            abel_invert_profile(&sub)
        })
        .collect();
    for (j, factor) in [4.0, 8.0].into_iter().enumerate() {
        for k in 0..2 - j {
            r[k] += (r[k] - r[k + 1]) / (factor - 1.0);
        }
    }
    r[0]
}

/// Applies the inversion formula to samples `G(kπ/n)`, `k = 0..=n`.
pub fn abel_invert_profile(g: &[f64]) -> f64 {
    let n = g.len() - 1;
    let step = PI / n as f64;
    let mut deriv = vec![0.0; n + 1];
    // fourth-order one-sided stencils at the ends
    deriv[n] = (25.0 * g[n] - 48.0 * g[n - 1] + 36.0 * g[n - 2] - 16.0 * g[n - 3] + 3.0 * g[n - 4]) / (12.0 * step);
    for k in 1..n {
        deriv[k] = (g[k + 1] - g[k - 1]) / (2.0 * step);
    }
    let second0 =
        (45.0 * g[0] - 154.0 * g[1] + 214.0 * g[2] - 156.0 * g[3] + 61.0 * g[4] - 10.0 * g[5]) / (12.0 * step * step);
    let integrand = |k: usize| {
        if k == 0 {
            2.0 * second0
        } else {
            deriv[k] / (0.5 * k as f64 * step).sin()
        }
    };
    let mut integral = 0.5 * (integrand(0) + integrand(n));
    for k in 1..n {
        integral += integrand(k);
    }
    integral *= step;
    g[n] - integral
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{kernel_radon, KernelSpec};

    fn small_rules() -> Rules {
        Rules::for_polynomial_degree(16)
    }

    #[test]
    fn constant_function_maps_to_one() {
        let rules = small_rules();
        let one = |_q: Quat| 1.0;
        let h = Dir3::new(0.2, 0.3, -0.9).unwrap();
        let r = Dir3::new(-0.5, 0.1, 0.4).unwrap();
        let c = fibre_circle(h, r);
        let q = Quat::new(0.1, 0.7, -0.3, 0.2).normalize().unwrap();
        assert!((radon(&one, &c, &rules) - 1.0).abs() < 1e-14);
        assert!((xray(&one, h, r, &rules) - 1.0).abs() < 1e-14);
        assert!((generalized_radon(&one, &c, 1.0, &rules).unwrap() - 1.0).abs() < 1e-14);
        assert!((angle_density(&one, h, r, 0.4, &rules).unwrap() - 1.0).abs() < 1e-14);
        assert!((w_transform(&one, h, r, 0.4, &rules).unwrap() - 1.0).abs() < 1e-14);
        let phi = |_h: Dir3, _r: Dir3| 1.0;
        assert!((dual_radon(&phi, q, &rules) - 1.0).abs() < 1e-14);
        assert!((generalized_dual_radon(&phi, q, 0.3, &rules).unwrap() - 1.0).abs() < 1e-14);
        assert!((translate_s3(&one, q, 0.8, &rules).unwrap() - 1.0).abs() < 1e-14);
        assert!((translated_fibre_average(&one, q, 0.8, &rules).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn odd_function_has_zero_radon() {
        let rules = small_rules();
        let f = |q: Quat| q.q0;
        let c = fibre_circle(Dir3::E1, Dir3::new(0.3, 0.3, 0.9).unwrap());
        assert!(radon(&f, &c, &rules).abs() < 1e-15);
    }

    #[test]
    fn centered_dlvp_radon_closed_form() {
        let rules = small_rules();
        let spec = KernelSpec::dlvp(4.0).unwrap();
        let q0 = Quat::new(0.3, -0.4, 0.5, 0.2).normalize().unwrap();
        let f = |q: Quat| spec.centered(q0, q);
        let h = Dir3::new(1.0, 2.0, 3.0).unwrap();
        let r = Dir3::new(-1.0, 0.5, 0.2).unwrap();
        let eta = q0.rotate(h).angle_to(r);
        assert!((radon_hr(&f, h, r, &rules) - kernel_radon(&spec, eta)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_angles() {
        let rules = small_rules();
        let q0 = Quat::new(0.9, 0.1, -0.3, 0.2).normalize().unwrap();
        let spec = KernelSpec::dlvp(3.0).unwrap();
        let f = |q: Quat| spec.centered(q0, q);
        let h = Dir3::new(0.1, 0.9, 0.2).unwrap();
        let r = Dir3::new(0.7, -0.2, 0.1).unwrap();
        let c = fibre_circle(h, r);
        let rad = radon(&f, &c, &rules);
        assert!((generalized_radon(&f, &c, 0.0, &rules).unwrap() - rad).abs() < 1e-14);
        assert!((angle_density(&f, h, r, 0.0, &rules).unwrap() - rad).abs() < 1e-14);
        let anti = radon_hr(&f, h, -r, &rules);
        assert!((angle_density(&f, h, r, PI, &rules).unwrap() - anti).abs() < 1e-14);
        let xr = xray(&f, h, r, &rules);
        assert!((w_transform(&f, h, r, 0.0, &rules).unwrap() - xr).abs() < 1e-14);
        assert!((translate_s3(&f, q0, 0.0, &rules).unwrap() - f(q0)).abs() < 1e-13);
        assert!(generalized_radon(&f, &c, 4.0, &rules).is_err());
        assert!(generalized_dual_radon(&|_h: Dir3, _r: Dir3| 1.0, q0, 1.6, &rules).is_err());
    }

    #[test]
    fn sphere_translation_of_constant_and_antipode() {
        let rules = small_rules();
        let r = Dir3::new(0.3, -0.2, 0.8).unwrap();
        assert!((translate_sphere_fn(|_| 2.5, r, 1.0, &rules).unwrap() - 2.5).abs() < 1e-14);
        let g = |d: Dir3| d.x + 2.0 * d.y * d.z;
        assert!((translate_sphere_fn(g, r, PI, &rules).unwrap() - g(-r)).abs() < 1e-15);
        assert!((translate_sphere_fn(g, r, 0.0, &rules).unwrap() - g(r)).abs() < 1e-15);
    }

    #[test]
    fn abel_profile_inversion_of_legendre_modes() {
        // G(θ) = P_l(cos θ) reconstructs to 2l + 1
        for l in 0..5 {
            let n = 512;
            let g: Vec<f64> =
                (0..=n).map(|k| crate::harmonics::legendre_unchecked(l, (PI * k as f64 / n as f64).cos())).collect();
            let v = abel_invert_profile(&g);
            assert!((v - (2 * l + 1) as f64).abs() < 1e-3 * (2 * l + 1) as f64, "l={l}: {v}");
        }
    }

    #[test]
    fn evaluator_evenness() {
        let even = OdfEvaluator::new(|q: Quat| q.q0 * q.q0, true);
        assert!(even.is_even());
        assert_eq!(even.evenness_defect(100, 1), 0.0);
        let odd = OdfEvaluator::new(|q: Quat| q.q1, false);
        assert!(odd.evenness_defect(100, 1) > 0.0);
    }
}
