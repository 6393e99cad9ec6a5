//! Deterministic quadrature rules in mean-value normalization.
//!
//! Every rule carries weights summing to one, so the mean of the constant
//! function is one on every domain.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{orthonormal_frame, Dir3, GreatCircle, Quat, SmallCircle, TorusSpec};

/// Smallest admissible resolution for [`build_rule`].
pub const MIN_RESOLUTION: usize = 4;

/// Below this value of `sin ρ` small circles and spheres collapse to a point.
const DEGENERATE_SIN: f64 = 1e-15;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 {
                1.0
            } else if n == 1 {
                z
            } else {
                p1
            };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Equispaced rule on a circle: `t_k = 2πk/N` with weights `1/N`.
#[derive(Clone, Debug)]
pub struct CircleRule {
    nodes: Vec<f64>,
    cs: Vec<(f64, f64)>,
    weight: f64,
}

impl CircleRule {
    pub fn new(n: usize) -> Result<Self> {
        if n < MIN_RESOLUTION {
            return Err(Error::ResolutionTooSmall { given: n, min: MIN_RESOLUTION });
        }
        let nodes: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
        let cs = nodes.iter().map(|t| (t.cos(), t.sin())).collect();
        Ok(CircleRule { nodes, cs, weight: 1.0 / n as f64 })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Mean of `f(t)` over the parameter circle.
    pub fn mean<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().map(|&t| f(t)).sum::<f64>() * self.weight
    }

    /// Mean of `f` over the great circle `c`.
    pub fn mean_great_circle<F: FnMut(Quat) -> f64>(&self, c: &GreatCircle, mut f: F) -> f64 {
        let (q1, q2) = (c.q1(), c.q2());
        self.cs.iter().map(|&(ct, st)| f(q1.scale(ct) + q2.scale(st))).sum::<f64>() * self.weight
    }

    /// Mean of `f` over the small circle `c`. Degenerate circles (`ρ ∈ {0, π}`)
    /// evaluate at their single point.
    pub fn mean_small_circle<F: FnMut(Dir3) -> f64>(&self, c: &SmallCircle, mut f: F) -> f64 {
        let (sr, cr) = c.rho.sin_cos();
        let z = c.center;
        if sr.abs() < DEGENERATE_SIN {
            return f(if cr > 0.0 { z } else { -z });
        }
        let (a, b) = orthonormal_frame(z);
        self.cs
            .iter()
            .map(|&(ct, st)| {
                let (u, v) = (sr * ct, sr * st);
                f(Dir3::new_unchecked(
                    cr * z.x + u * a.x + v * b.x,
                    cr * z.y + u * a.y + v * b.y,
                    cr * z.z + u * a.z + v * b.z,
                ))
            })
            .sum::<f64>()
            * self.weight
    }
}

/// Gauss–Legendre in `cos θ` times an equispaced azimuth rule, exact for
/// spherical harmonics of degree up to `degree`.
#[derive(Clone, Debug)]
pub struct SphereRule {
    degree: usize,
    n_theta: usize,
    n_phi: usize,
    nodes: Vec<Dir3>,
    weights: Vec<f64>,
}

impl SphereRule {
    pub fn new(degree: usize) -> Result<Self> {
        if degree < MIN_RESOLUTION {
            return Err(Error::ResolutionTooSmall { given: degree, min: MIN_RESOLUTION });
        }
        let n_theta = (degree + 2) / 2;
        let n_phi = degree + 1;
        let (x, w) = gauss_legendre(n_theta);
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for (&z, &wz) in x.iter().zip(&w) {
            let s = (1.0 - z * z).sqrt();
            for k in 0..n_phi {
                let phi = 2.0 * PI * k as f64 / n_phi as f64;
                nodes.push(Dir3::new_unchecked(s * phi.cos(), s * phi.sin(), z));
                weights.push(0.5 * wz / n_phi as f64);
            }
        }
        Ok(SphereRule { degree, n_theta, n_phi, nodes, weights })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_theta, self.n_phi)
    }

    pub fn nodes(&self) -> &[Dir3] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Mean of `f` over S².
    pub fn mean<F: FnMut(Dir3) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&d, &w)| w * f(d)).sum()
    }

    /// Mean of `f` over the small 2-sphere `{q (cos ρ + sin ρ v) : v ∈ S²}` of
    /// points at distance `ρ` from `q` in S³.
    pub fn mean_small_sphere3<F: FnMut(Quat) -> f64>(&self, q: Quat, rho: f64, mut f: F) -> f64 {
        let (sr, cr) = rho.sin_cos();
        if sr.abs() < DEGENERATE_SIN {
            return f(q.scale(cr.signum()));
        }
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&v, &w)| {
                let p = Quat::new(cr, sr * v.x, sr * v.y, sr * v.z);
                w * f(q * p)
            })
            .sum()
    }
}

/// Product of two circle rules on a spherical torus.
#[derive(Clone, Debug)]
pub struct TorusRule {
    s: CircleRule,
    t: CircleRule,
}

impl TorusRule {
    pub fn new(n_s: usize, n_t: usize) -> Result<Self> {
        Ok(TorusRule { s: CircleRule::new(n_s)?, t: CircleRule::new(n_t)? })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.s.len(), self.t.len())
    }

    /// Mean of `f` over the torus. A zero half-angle collapses onto the core.
    pub fn mean<F: FnMut(Quat) -> f64>(&self, torus: &TorusSpec, mut f: F) -> f64 {
        let (st, ct) = torus.theta().sin_cos();
        if st.abs() < DEGENERATE_SIN {
            return self.s.mean_great_circle(torus.core(), f);
        }
        if ct.abs() < DEGENERATE_SIN {
            return self.t.mean_great_circle(&torus.core().orthogonal(), f);
        }
        let (q1, q2) = (torus.core().q1(), torus.core().q2());
        let (q3, q4) = torus.core().complement();
        let inner: Vec<Quat> = self.t.cs.iter().map(|&(c, s)| (q3.scale(c) + q4.scale(s)).scale(st)).collect();
        let mut total = 0.0;
        for &(c, s) in &self.s.cs {
            let a = (q1.scale(c) + q2.scale(s)).scale(ct);
            let row: f64 = inner.iter().map(|&b| f(a + b)).sum();
            total += row;
        }
        total * self.s.weight * self.t.weight
    }
}

/// The integration domains known to [`build_rule`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainKind {
    Circle,
    Sphere2,
    Torus,
    SmallSphere3,
}

/// A rule built for one domain kind.
#[derive(Clone, Debug)]
pub enum QuadratureRule {
    Circle(CircleRule),
    Sphere2(SphereRule),
    Torus(TorusRule),
    SmallSphere3(SphereRule),
}

impl QuadratureRule {
    pub fn kind(&self) -> DomainKind {
        match self {
            QuadratureRule::Circle(_) => DomainKind::Circle,
            QuadratureRule::Sphere2(_) => DomainKind::Sphere2,
            QuadratureRule::Torus(_) => DomainKind::Torus,
            QuadratureRule::SmallSphere3(_) => DomainKind::SmallSphere3,
        }
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        match self {
            QuadratureRule::Circle(c) => c.len(),
            QuadratureRule::Sphere2(s) | QuadratureRule::SmallSphere3(s) => s.len(),
            QuadratureRule::Torus(t) => t.s.len() * t.t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sum of all node weights.
    pub fn weight_sum(&self) -> f64 {
        match self {
            QuadratureRule::Circle(c) => c.weight * c.len() as f64,
            QuadratureRule::Sphere2(s) | QuadratureRule::SmallSphere3(s) => s.weights.iter().sum(),
            QuadratureRule::Torus(t) => t.s.weight * t.s.len() as f64 * t.t.weight * t.t.len() as f64,
        }
    }
}

/// Builds the rule of the given kind. For circles and tori `resolution` is a
/// node count per circle; for spheres it is the polynomial degree.
pub fn build_rule(kind: DomainKind, resolution: usize) -> Result<QuadratureRule> {
    Ok(match kind {
        DomainKind::Circle => QuadratureRule::Circle(CircleRule::new(resolution)?),
        DomainKind::Sphere2 => QuadratureRule::Sphere2(SphereRule::new(resolution)?),
        DomainKind::Torus => QuadratureRule::Torus(TorusRule::new(resolution, resolution)?),
        DomainKind::SmallSphere3 => QuadratureRule::SmallSphere3(SphereRule::new(resolution)?),
    })
}

/// An integration domain for [`mean_over`].
#[derive(Clone, Copy, Debug)]
pub enum Domain<'a> {
    GreatCircle(&'a GreatCircle),
    SmallCircle(&'a SmallCircle),
    Torus(&'a TorusSpec),
    Sphere2,
    SmallSphere3 { center: Quat, rho: f64 },
}

impl Domain<'_> {
    fn name(&self) -> &'static str {
        match self {
            Domain::GreatCircle(_) => "great circle",
            Domain::SmallCircle(_) => "small circle",
            Domain::Torus(_) => "torus",
            Domain::Sphere2 => "sphere",
            Domain::SmallSphere3 { .. } => "small sphere in S3",
        }
    }
}

/// A node of some domain: a point of S³ or a direction on S².
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Point {
    Quat(Quat),
    Dir(Dir3),
}

/// Mean of `f` over `domain` under `rule`.
pub fn mean_over<F: FnMut(Point) -> f64>(domain: Domain<'_>, mut f: F, rule: &QuadratureRule) -> Result<f64> {
    let rule_name = match rule.kind() {
        DomainKind::Circle => "circle",
        DomainKind::Sphere2 => "sphere2",
        DomainKind::Torus => "torus",
        DomainKind::SmallSphere3 => "small_sphere3",
    };
    match (domain, rule) {
        (Domain::GreatCircle(c), QuadratureRule::Circle(r)) => Ok(r.mean_great_circle(c, |q| f(Point::Quat(q)))),
        (Domain::SmallCircle(c), QuadratureRule::Circle(r)) => Ok(r.mean_small_circle(c, |d| f(Point::Dir(d)))),
        (Domain::Torus(t), QuadratureRule::Torus(r)) => Ok(r.mean(t, |q| f(Point::Quat(q)))),
        (Domain::Sphere2, QuadratureRule::Sphere2(r)) => Ok(r.mean(|d| f(Point::Dir(d)))),
        (Domain::SmallSphere3 { center, rho }, QuadratureRule::SmallSphere3(r)) => {
            Ok(r.mean_small_sphere3(center, rho, |q| f(Point::Quat(q))))
        }
        _ => Err(Error::RuleMismatch { rule: rule_name, domain: domain.name() }),
    }
}

/// The set of rules used by the transforms.
#[derive(Clone, Debug)]
pub struct Rules {
    /// Great-circle rule.
    pub circle: CircleRule,
    /// Small-circle rule on S².
    pub small_circle: CircleRule,
    /// Rule on S², also used for the small 2-spheres of S³.
    pub sphere: SphereRule,
    /// Rule on spherical tori.
    pub torus: TorusRule,
}

/// Default great-circle and small-circle node count.
pub const DEFAULT_CIRCLE_NODES: usize = 256;
/// Default sphere rule degree.
pub const DEFAULT_SPHERE_DEGREE: usize = 64;
/// Default torus node count per circle.
pub const DEFAULT_TORUS_NODES: usize = 128;

impl Rules {
    pub fn new(circle_nodes: usize, sphere_degree: usize, torus_nodes: usize) -> Result<Self> {
        Ok(Rules {
            circle: CircleRule::new(circle_nodes)?,
            small_circle: CircleRule::new(circle_nodes)?,
            sphere: SphereRule::new(sphere_degree)?,
            torus: TorusRule::new(torus_nodes, torus_nodes)?,
        })
    }

    /// Rules exact for integrands that are polynomials of degree `degree` in
    /// the quaternion or direction coordinates.
    pub fn for_polynomial_degree(degree: usize) -> Self {
        let n = (degree + 1).max(MIN_RESOLUTION);
        let d = degree.max(MIN_RESOLUTION);
        Rules::new(n, d, n).expect("resolutions above minimum")
    }
}

impl Default for Rules {
    fn default() -> Self {
        Rules::new(DEFAULT_CIRCLE_NODES, DEFAULT_SPHERE_DEGREE, DEFAULT_TORUS_NODES)
            .expect("default resolutions are valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::fibre_circle;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in [1usize, 2, 5, 17, 40] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            for k in 0..2 * n {
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                assert!((q - exact).abs() < 1e-13, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn circle_rule_nodes() {
        let r = CircleRule::new(8).unwrap();
        assert_eq!(r.len(), 8);
        assert!((r.nodes()[3] - 3.0 * PI / 4.0).abs() < 1e-15);
        assert_eq!(r.weight(), 0.125);
        assert!(CircleRule::new(3).is_err());
    }

    #[test]
    fn sphere_rule_constant_and_monomials() {
        let s = SphereRule::new(16).unwrap();
        assert!((s.mean(|_| 1.0) - 1.0).abs() < 1e-14);
        // mean of z² is 1/3, of x⁴ is 1/5
        assert!((s.mean(|d| d.z * d.z) - 1.0 / 3.0).abs() < 1e-14);
        assert!((s.mean(|d| d.x.powi(4)) - 0.2).abs() < 1e-14);
        assert!(s.mean(|d| d.x * d.y * d.z).abs() < 1e-16);
    }

    #[test]
    fn circle_mean_of_scalar_square() {
        let c = fibre_circle(Dir3::E1, Dir3::E2);
        let r = build_rule(DomainKind::Circle, 16).unwrap();
        let v = mean_over(
            Domain::GreatCircle(&c),
            |p| match p {
                Point::Quat(q) => q.scalar().powi(2),
                Point::Dir(_) => unreachable!(),
            },
            &r,
        )
        .unwrap();
        assert!((v - 0.25).abs() < 1e-15);
    }

    #[test]
    fn mismatch_is_reported() {
        let r = build_rule(DomainKind::Sphere2, 8).unwrap();
        let c = fibre_circle(Dir3::E1, Dir3::E2);
        assert!(mean_over(Domain::GreatCircle(&c), |_| 1.0, &r).is_err());
    }

    #[test]
    fn torus_degenerate_matches_circle() {
        let c = fibre_circle(Dir3::E1, Dir3::new(0.1, 0.4, 0.9).unwrap());
        let t = TorusSpec::new(c, 0.0).unwrap();
        let rule = TorusRule::new(32, 32).unwrap();
        let f = |q: Quat| (q.q0 + 0.3 * q.q2).powi(4);
        let a = rule.mean(&t, f);
        let b = CircleRule::new(32).unwrap().mean_great_circle(&c, f);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn weights_sum_to_one() {
        for kind in [DomainKind::Circle, DomainKind::Sphere2, DomainKind::Torus, DomainKind::SmallSphere3] {
            for res in [4usize, 7, 16, 64] {
                let r = build_rule(kind, res).unwrap();
                assert!((r.weight_sum() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn small_sphere_points_at_distance() {
        let s = SphereRule::new(8).unwrap();
        let q = Quat::new(0.5, 0.5, -0.5, 0.5);
        let rho = 0.7;
        let m = s.mean_small_sphere3(q, rho, |p| (q.dot(p) - rho.cos()).abs());
        assert!(m < 1e-15);
    }
}
