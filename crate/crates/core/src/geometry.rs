//! Quaternion algebra and the geometric objects of S³ and S².
//!
//! A unit quaternion `q` acts on directions by `x ↦ q x q*`. The set of all
//! unit quaternions mapping `h` to `r` is a great circle of S³ (a fibre), which
//! covers the corresponding set of rotations twice.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when checking that inputs are unit quaternions or directions.
pub const UNIT_TOL: f64 = 1e-10;

/// Below this norm of `h + r` the fibre is built on the antipodal branch.
const ANTIPODAL_EPS: f64 = 1e-8;

pub(crate) type Vec3 = [f64; 3];

#[inline]
pub(crate) fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn cross3(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

#[inline]
fn axpy3(alpha: f64, x: Vec3, y: Vec3) -> Vec3 {
    [alpha * x[0] + y[0], alpha * x[1] + y[1], alpha * x[2] + y[2]]
}

#[inline]
fn norm3(a: Vec3) -> f64 {
    dot3(a, a).sqrt()
}

/// A quaternion `q0 + q1 e1 + q2 e2 + q3 e3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quat {
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

impl Quat {
    pub const E0: Quat = Quat::new(1.0, 0.0, 0.0, 0.0);
    pub const E1: Quat = Quat::new(0.0, 1.0, 0.0, 0.0);
    pub const E2: Quat = Quat::new(0.0, 0.0, 1.0, 0.0);
    pub const E3: Quat = Quat::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(q0: f64, q1: f64, q2: f64, q3: f64) -> Self {
        Quat { q0, q1, q2, q3 }
    }

    pub fn from_scalar_vector(s: f64, v: Vec3) -> Self {
        Quat::new(s, v[0], v[1], v[2])
    }

    /// Pure quaternion with vector part `d`.
    pub fn pure(d: Dir3) -> Self {
        Quat::new(0.0, d.x, d.y, d.z)
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Quat::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.q0, self.q1, self.q2, self.q3]
    }

    /// Scalar part `Sc q`.
    pub fn scalar(self) -> f64 {
        self.q0
    }

    /// Vector part `Vec q`.
    pub fn vector(self) -> Vec3 {
        [self.q1, self.q2, self.q3]
    }

    pub fn conj(self) -> Self {
        Quat::new(self.q0, -self.q1, -self.q2, -self.q3)
    }

    pub fn norm_sqr(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Euclidean inner product in R⁴, equal to `Sc(self* other)`.
    pub fn dot(self, other: Quat) -> f64 {
        self.q0 * other.q0 + self.q1 * other.q1 + self.q2 * other.q2 + self.q3 * other.q3
    }

    pub fn scale(self, s: f64) -> Self {
        Quat::new(self.q0 * s, self.q1 * s, self.q2 * s, self.q3 * s)
    }

    pub fn normalize(self) -> Result<Self> {
        let n = self.norm();
        if !n.is_finite() || n <= 0.0 {
            return Err(Error::InvalidParameter(format!("cannot normalize quaternion of norm {n}")));
        }
        Ok(self.scale(1.0 / n))
    }

    pub fn is_unit(self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn check_unit(self) -> Result<Self> {
        let norm = self.norm();
        if (norm - 1.0).abs() <= UNIT_TOL {
            Ok(self)
        } else {
            Err(Error::NotUnit { norm, tol: UNIT_TOL })
        }
    }

    /// Rotation angle `ω = 2 arccos |Sc q|` in `[0, π]`.
    pub fn angle(self) -> f64 {
        2.0 * self.q0.abs().min(1.0).acos()
    }

    /// Representative of `±q` with nonnegative scalar part.
    pub fn canonical(self) -> Self {
        if self.q0 < 0.0 {
            -self
        } else {
            self
        }
    }

    /// `q x q*` without a unit check.
    pub fn rotate(self, x: Dir3) -> Dir3 {
        let u = self.vector();
        let v = x.to_array();
        let t = cross3(u, v);
        let tt = cross3(u, t);
        let out = [
            v[0] + 2.0 * (self.q0 * t[0] + tt[0]),
            v[1] + 2.0 * (self.q0 * t[1] + tt[1]),
            v[2] + 2.0 * (self.q0 * t[2] + tt[2]),
        ];
        Dir3::new_unchecked(out[0], out[1], out[2])
    }

    /// 3×3 rotation matrix of `x ↦ q x q*` (row major).
    pub fn rotation_matrix(self) -> [[f64; 3]; 3] {
        let Quat { q0: w, q1: x, q2: y, q3: z } = self;
        [
            [w * w + x * x - y * y - z * z, 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), w * w - x * x + y * y - z * z, 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), w * w - x * x - y * y + z * z],
        ]
    }

    /// Uniformly distributed unit quaternion.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let q = Quat::new(
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            );
            let n = q.norm();
            if n > 1e-6 {
                return q.scale(1.0 / n);
            }
        }
    }
}

impl Mul for Quat {
    type Output = Quat;

    /// Hamilton product.
    fn mul(self, b: Quat) -> Quat {
        let a = self;
        Quat::new(
            a.q0 * b.q0 - a.q1 * b.q1 - a.q2 * b.q2 - a.q3 * b.q3,
            a.q0 * b.q1 + a.q1 * b.q0 + a.q2 * b.q3 - a.q3 * b.q2,
            a.q0 * b.q2 - a.q1 * b.q3 + a.q2 * b.q0 + a.q3 * b.q1,
            a.q0 * b.q3 + a.q1 * b.q2 - a.q2 * b.q1 + a.q3 * b.q0,
        )
    }
}

impl Add for Quat {
    type Output = Quat;
    fn add(self, b: Quat) -> Quat {
        Quat::new(self.q0 + b.q0, self.q1 + b.q1, self.q2 + b.q2, self.q3 + b.q3)
    }
}

impl Sub for Quat {
    type Output = Quat;
    fn sub(self, b: Quat) -> Quat {
        Quat::new(self.q0 - b.q0, self.q1 - b.q1, self.q2 - b.q2, self.q3 - b.q3)
    }
}

impl Neg for Quat {
    type Output = Quat;
    fn neg(self) -> Quat {
        Quat::new(-self.q0, -self.q1, -self.q2, -self.q3)
    }
}

/// A unit vector on S².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dir3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Dir3 {
    pub const E1: Dir3 = Dir3 { x: 1.0, y: 0.0, z: 0.0 };
    pub const E2: Dir3 = Dir3 { x: 0.0, y: 1.0, z: 0.0 };
    pub const E3: Dir3 = Dir3 { x: 0.0, y: 0.0, z: 1.0 };

    /// Normalizes `(x, y, z)`; fails on a zero or non-finite vector.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if !n.is_finite() || n <= 0.0 {
            return Err(Error::InvalidParameter(format!("cannot normalize direction ({x}, {y}, {z})")));
        }
        Ok(Dir3 { x: x / n, y: y / n, z: z / n })
    }

    /// Wraps components that are already unit length.
    pub const fn new_unchecked(x: f64, y: f64, z: f64) -> Self {
        Dir3 { x, y, z }
    }

    pub fn from_array(a: Vec3) -> Result<Self> {
        Dir3::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> Vec3 {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, o: Dir3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Dir3) -> Vec3 {
        cross3(self.to_array(), o.to_array())
    }

    pub fn norm(self) -> f64 {
        norm3(self.to_array())
    }

    /// Angle to `o` in `[0, π]`.
    pub fn angle_to(self, o: Dir3) -> f64 {
        self.dot(o).clamp(-1.0, 1.0).acos()
    }

    /// Uniformly distributed direction.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let v: Vec3 = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
            let n = norm3(v);
            if n > 1e-6 {
                return Dir3::new_unchecked(v[0] / n, v[1] / n, v[2] / n);
            }
        }
    }
}

impl Neg for Dir3 {
    type Output = Dir3;
    fn neg(self) -> Dir3 {
        Dir3::new_unchecked(-self.x, -self.y, -self.z)
    }
}

/// Orthonormal pair `(a, b)` spanning the plane orthogonal to `d`, with
/// `(a, b, d)` right handed. `a` is built from the coordinate axis least
/// aligned with `d`, so the frame is deterministic.
pub fn orthonormal_frame(d: Dir3) -> (Dir3, Dir3) {
    let v = d.to_array();
    let k = (0..3).min_by(|&i, &j| v[i].abs().partial_cmp(&v[j].abs()).unwrap()).unwrap();
    let mut axis = [0.0; 3];
    axis[k] = 1.0;
    let a = axpy3(-v[k], v, axis);
    let na = norm3(a);
    let a = [a[0] / na, a[1] / na, a[2] / na];
    let b = cross3(v, a);
    (Dir3::new_unchecked(a[0], a[1], a[2]), Dir3::new_unchecked(b[0], b[1], b[2]))
}

/// Hamilton product `a b`.
pub fn quat_product(a: Quat, b: Quat) -> Quat {
    a * b
}

/// `q x q*` for a unit quaternion `q`.
pub fn rotate3(q: Quat, x: Dir3) -> Result<Dir3> {
    q.check_unit()?;
    Ok(q.rotate(x))
}

/// The SO(4) action `x ↦ q x p*`.
pub fn rotate4(q: Quat, p: Quat, x: Quat) -> Result<Quat> {
    q.check_unit()?;
    p.check_unit()?;
    Ok(q * x * p.conj())
}

/// Quaternion of the rotation about `axis` by angle `t`.
pub fn axis_angle_quat(axis: Dir3, t: f64) -> Quat {
    let (s, c) = (0.5 * t).sin_cos();
    Quat::new(c, axis.x * s, axis.y * s, axis.z * s)
}

/// A great circle `q(t) = q1 cos t + q2 sin t` of S³.
///
/// Every great circle is the fibre of some pair `(h, r)`: with `h = Vec(q1* q2)`
/// and `r = q1 h q1*`, each point maps `h` to `r`. The pair is stored as the
/// circle's witness.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreatCircle {
    q1: Quat,
    q2: Quat,
    h: Dir3,
    r: Dir3,
}

impl GreatCircle {
    /// Circle through the orthonormal pair `(q1, q2)`.
    pub fn from_pair(q1: Quat, q2: Quat) -> Result<Self> {
        q1.check_unit()?;
        q2.check_unit()?;
        let p = q1.conj() * q2;
        if p.scalar().abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "circle generators are not orthogonal (Sc = {:e})",
                p.scalar()
            )));
        }
        let h = Dir3::from_array(p.vector())?;
        let r = q1.rotate(h);
        Ok(GreatCircle { q1, q2, h, r })
    }

    pub fn q1(&self) -> Quat {
        self.q1
    }

    pub fn q2(&self) -> Quat {
        self.q2
    }

    /// The pair `(h, r)` with `q h q* = r` for every `q` on the circle.
    pub fn witness(&self) -> (Dir3, Dir3) {
        (self.h, self.r)
    }

    pub fn point(&self, t: f64) -> Quat {
        let (s, c) = t.sin_cos();
        self.q1.scale(c) + self.q2.scale(s)
    }

    /// An orthonormal pair spanning the plane orthogonal to `q1, q2` in R⁴.
    pub fn complement(&self) -> (Quat, Quat) {
        let basis = [Quat::E0, Quat::E1, Quat::E2, Quat::E3];
        let project = |v: Quat, onto: &[Quat]| onto.iter().fold(v, |acc, &u| acc - u.scale(u.dot(acc)));
        let mut best: Vec<(f64, Quat)> = basis
            .iter()
            .map(|&e| {
                let p = project(e, &[self.q1, self.q2]);
                (p.norm(), p)
            })
            .collect();
        best.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let q3 = best[0].1.scale(1.0 / best[0].0);
        let q4 = basis
            .iter()
            .map(|&e| project(e, &[self.q1, self.q2, q3]))
            .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap())
            .unwrap();
        let q4 = q4.scale(1.0 / q4.norm());
        (q3, q4)
    }

    /// The great circle of points at distance π/2 from this one.
    pub fn orthogonal(&self) -> GreatCircle {
        let (q3, q4) = self.complement();
        GreatCircle::from_pair(q3, q4).expect("complement is orthonormal")
    }
}

/// The fibre circle of all unit quaternions mapping `h` to `r`.
pub fn fibre_circle(h: Dir3, r: Dir3) -> GreatCircle {
    let hr = [h.x + r.x, h.y + r.y, h.z + r.z];
    let nhr = norm3(hr);
    let (q1, q2) = if nhr < ANTIPODAL_EPS {
        let (u, _) = orthonormal_frame(h);
        let q1 = Quat::pure(u);
        let q2 = Quat::from_scalar_vector(0.0, u.cross(h));
        (q1, q2)
    } else {
        let q1 = Quat::from_scalar_vector(1.0 + h.dot(r), h.cross(r));
        let q1 = q1.scale(1.0 / q1.norm());
        let q2 = Quat::new(0.0, hr[0] / nhr, hr[1] / nhr, hr[2] / nhr);
        (q1, q2)
    };
    GreatCircle { q1, q2, h, r }
}

/// `q1 cos t + q2 sin t`.
pub fn circle_point(c: &GreatCircle, t: f64) -> Quat {
    c.point(t)
}

/// A spherical torus: all points at distance `theta` from a core circle.
#[derive(Clone, Copy, Debug)]
pub struct TorusSpec {
    core: GreatCircle,
    theta: f64,
    q3: Quat,
    q4: Quat,
}

impl TorusSpec {
    pub fn new(core: GreatCircle, theta: f64) -> Result<Self> {
        if !(0.0..=0.5 * PI).contains(&theta) {
            return Err(Error::AngleOutOfRange { value: theta, lo: 0.0, hi: 0.5 * PI });
        }
        let (q3, q4) = core.complement();
        Ok(TorusSpec { core, theta, q3, q4 })
    }

    pub fn core(&self) -> &GreatCircle {
        &self.core
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `(q1 cos s + q2 sin s) cos Θ + (q3 cos t + q4 sin t) sin Θ`.
    pub fn point(&self, s: f64, t: f64) -> Quat {
        let (st, ct) = self.theta.sin_cos();
        let (ss, cs) = s.sin_cos();
        let (sn, cn) = t.sin_cos();
        (self.core.q1.scale(cs) + self.core.q2.scale(ss)).scale(ct) + (self.q3.scale(cn) + self.q4.scale(sn)).scale(st)
    }
}

pub fn torus_point(t: &TorusSpec, s: f64, u: f64) -> Quat {
    t.point(s, u)
}

/// The small circle `c(center; ρ)` of directions at angle `ρ` from `center`.
#[derive(Clone, Copy, Debug)]
pub struct SmallCircle {
    pub center: Dir3,
    pub rho: f64,
}

impl SmallCircle {
    pub fn new(center: Dir3, rho: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&rho) {
            return Err(Error::AngleOutOfRange { value: rho, lo: 0.0, hi: PI });
        }
        Ok(SmallCircle { center, rho })
    }

    /// Deterministic point `t ↦ cos ρ c + sin ρ (cos t a + sin t b)`.
    pub fn point(&self, t: f64) -> Dir3 {
        let (a, b) = orthonormal_frame(self.center);
        let (sr, cr) = self.rho.sin_cos();
        let (st, ct) = t.sin_cos();
        let c = self.center;
        Dir3::new_unchecked(
            cr * c.x + sr * (ct * a.x + st * b.x),
            cr * c.y + sr * (ct * a.y + st * b.y),
            cr * c.z + sr * (ct * a.z + st * b.z),
        )
    }
}

/// Rotates `start` about the circle's center by angle `t`.
pub fn small_circle_point(c: &SmallCircle, start: Dir3, t: f64) -> Result<Dir3> {
    let expected = c.rho.cos();
    let found = start.dot(c.center);
    if (found - expected).abs() > 1e-10 {
        return Err(Error::NotOnCircle { found, expected });
    }
    let (st, ct) = t.sin_cos();
    let k = c.center.to_array();
    let v = start.to_array();
    let kv = cross3(k, v);
    let kdv = found * (1.0 - ct);
    Ok(Dir3::new_unchecked(
        v[0] * ct + kv[0] * st + k[0] * kdv,
        v[1] * ct + kv[1] * st + k[1] * kdv,
        v[2] * ct + kv[2] * st + k[2] * kdv,
    ))
}

/// Base points `(h0', r0')` on `c(h; ρ)` and `c(r; ρ)` matched by the circle's
/// first generator: `q1 h0' q1* = r0'`.
///
/// In the generic case `r0' = cos ρ r + sin ρ ê`, where `ê` is the unit
/// component of `h` orthogonal to `r`.
pub fn matched_base_points(c: &GreatCircle, rho: f64) -> (Dir3, Dir3) {
    let (h, r) = c.witness();
    let perp = axpy3(-h.dot(r), r.to_array(), h.to_array());
    let n = norm3(perp);
    let (sr, cr) = rho.sin_cos();
    let r0 = if n > 1e-8 {
        let e = [perp[0] / n, perp[1] / n, perp[2] / n];
        let v = axpy3(sr, e, [cr * r.x, cr * r.y, cr * r.z]);
        Dir3::new_unchecked(v[0], v[1], v[2])
    } else {
        SmallCircle { center: r, rho }.point(0.0)
    };
    let h0 = c.q1().conj().rotate(r0);
    (h0, r0)
}

/// `d(q, C) = ½ arccos(q h q* · r)` for the witness `(h, r)` of `C`.
///
/// Evaluated as the angle between `q` and its projection onto the plane of
/// `C`, which equals the expression above and stays accurate near 0 and π/2.
pub fn dist_point_circle(q: Quat, c: &GreatCircle) -> f64 {
    let a = q.dot(c.q1);
    let b = q.dot(c.q2);
    let perp = q - c.q1.scale(a) - c.q2.scale(b);
    perp.norm().atan2(a.hypot(b))
}

/// Distance from `circle_point(c, t)` to `c1` in closed form.
///
/// With `a = h·h1`, `b = r·r1` the value is
/// `½ arccos(ab + √((1−a²)(1−b²)) cos(2t − φ0))`, where the phase `φ0` comes
/// from the components of `h1` and `q1* r1 q1` orthogonal to `h`.
pub fn dist_along_fibre(c: &GreatCircle, t: f64, c1: &GreatCircle) -> f64 {
    let (h, _) = c.witness();
    let (h1, r1) = c1.witness();
    let a = h.dot(h1);
    let y = c.q1().conj().rotate(r1);
    let b = y.dot(h);
    let hv = h.to_array();
    let x_perp = axpy3(-a, hv, h1.to_array());
    let y_perp = axpy3(-b, hv, y.to_array());
    let phi0 = dot3(cross3(hv, x_perp), y_perp).atan2(dot3(x_perp, y_perp));
    let amp = ((1.0 - a * a).max(0.0) * (1.0 - b * b).max(0.0)).sqrt();
    let cosine = a * b + amp * (2.0 * t - phi0).cos();
    0.5 * cosine.clamp(-1.0, 1.0).acos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: Quat, b: Quat, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn generator_table() {
        assert_eq!(Quat::E1 * Quat::E2, Quat::E3);
        assert_eq!(Quat::E2 * Quat::E3, Quat::E1);
        assert_eq!(Quat::E3 * Quat::E1, Quat::E2);
        assert_eq!(Quat::E1 * Quat::E2 * Quat::E3, -Quat::E0);
        assert_eq!(Quat::E1 * Quat::E1, -Quat::E0);
    }

    #[test]
    fn product_matches_left_multiplication_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let a = Quat::random(&mut rng).scale(1.7);
            let b = Quat::random(&mut rng);
            let m = [
                [a.q0, -a.q1, -a.q2, -a.q3],
                [a.q1, a.q0, -a.q3, a.q2],
                [a.q2, a.q3, a.q0, -a.q1],
                [a.q3, -a.q2, a.q1, a.q0],
            ];
            let bv = b.to_array();
            let mut out = [0.0; 4];
            for i in 0..4 {
                out[i] = (0..4).map(|j| m[i][j] * bv[j]).sum();
            }
            assert!(close(a * b, Quat::from_array(out), 1e-14));
            assert!(((a * b).norm() - a.norm() * b.norm()).abs() < 1e-14);
            assert!(close((a * b).conj(), b.conj() * a.conj(), 1e-15));
        }
    }

    #[test]
    fn rotate3_quarter_turn_and_checks() {
        let q = axis_angle_quat(Dir3::E3, 0.5 * PI);
        let y = rotate3(q, Dir3::E1).unwrap();
        assert!((y.dot(Dir3::E2) - 1.0).abs() < 1e-15);
        assert_eq!(rotate3(Quat::E0, Dir3::E2).unwrap(), Dir3::E2);
        assert!(rotate3(Quat::new(1.1, 0.0, 0.0, 0.0), Dir3::E1).is_err());
        let m = q.rotation_matrix();
        assert!((m[1][0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rotate4_fixes_north_pole() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let q = Quat::random(&mut rng);
            assert!(close(rotate4(q, q, Quat::E0).unwrap(), Quat::E0, 1e-15));
        }
        let x = Quat::new(0.3, -0.2, 0.5, 0.1);
        assert_eq!(rotate4(Quat::E0, Quat::E0, x).unwrap(), x);
    }

    #[test]
    fn axis_angle_half_turn() {
        let q = axis_angle_quat(Dir3::E3, PI);
        assert!(close(q, Quat::E3, 1e-16));
        assert_eq!(axis_angle_quat(Dir3::E1, 0.0), Quat::E0);
    }

    #[test]
    fn fibre_of_equal_directions_is_rotation_group_about_h() {
        let h = Dir3::new(0.2, -0.5, 0.7).unwrap();
        let c = fibre_circle(h, h);
        assert!(close(c.q1(), Quat::E0, 1e-15));
        assert!(close(c.q2(), Quat::pure(h), 1e-15));
    }

    #[test]
    fn fibre_e1_e2() {
        let c = fibre_circle(Dir3::E1, Dir3::E2);
        let s = 0.5f64.sqrt();
        assert!(close(c.q1(), Quat::new(s, 0.0, 0.0, s), 1e-15));
        for k in 0..64 {
            let t = 2.0 * PI * k as f64 / 64.0;
            let q = c.point(t);
            assert!((q.rotate(Dir3::E1).dot(Dir3::E2) - 1.0).abs() < 1e-14);
            assert!((q.scalar() - s * t.cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn antipodal_fibre() {
        for h in [Dir3::E1, Dir3::E3, Dir3::new(1.0, 2.0, -3.0).unwrap()] {
            let c = fibre_circle(h, -h);
            assert!(c.q1().conj().dot(c.q2()).abs() < 1e-15);
            for k in 0..64 {
                let q = c.point(2.0 * PI * k as f64 / 64.0);
                assert!(q.scalar().abs() < 1e-15);
                assert!((q.rotate(h).dot(-h) - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn from_pair_recovers_witness() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let c = fibre_circle(Dir3::random(&mut rng), Dir3::random(&mut rng));
            let d = GreatCircle::from_pair(c.q1(), c.q2()).unwrap();
            let (h, r) = c.witness();
            let (h2, r2) = d.witness();
            assert!((h.dot(h2) - 1.0).abs() < 1e-12);
            assert!((r.dot(r2) - 1.0).abs() < 1e-12);
        }
        assert!(GreatCircle::from_pair(Quat::E0, Quat::E0).is_err());
    }

    #[test]
    fn torus_degenerate_cases() {
        let c = fibre_circle(Dir3::E1, Dir3::new(0.0, 0.6, 0.8).unwrap());
        let t0 = TorusSpec::new(c, 0.0).unwrap();
        assert!(close(t0.point(0.4, 1.3), c.point(0.4), 1e-15));
        let t1 = TorusSpec::new(c, 0.5 * PI).unwrap();
        let o = c.orthogonal();
        let p = t1.point(0.4, 1.3);
        assert!(p.dot(c.q1()).abs() < 1e-15 && p.dot(c.q2()).abs() < 1e-15);
        assert!(dist_point_circle(p, &o) < 1e-15);
        assert!(TorusSpec::new(c, 2.0).is_err());
    }

    #[test]
    fn small_circle_rotation() {
        let c = SmallCircle::new(Dir3::new(0.3, 0.1, -0.9).unwrap(), 0.8).unwrap();
        let start = c.point(0.0);
        assert!((start.dot(c.center) - 0.8f64.cos()).abs() < 1e-15);
        let p = small_circle_point(&c, start, 2.0 * PI).unwrap();
        assert!((p.dot(start) - 1.0).abs() < 1e-14);
        assert!(small_circle_point(&c, c.center, 0.1).is_err());
    }

    #[test]
    fn distance_examples() {
        let c = fibre_circle(Dir3::E1, Dir3::E2);
        assert!((dist_point_circle(Quat::E0, &c) - 0.25 * PI).abs() < 1e-15);
        assert!(dist_point_circle(c.point(0.7), &c) < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let c = fibre_circle(Dir3::random(&mut rng), Dir3::random(&mut rng));
            let q = Quat::random(&mut rng);
            let (h, r) = c.witness();
            let half_acos = 0.5 * q.rotate(h).dot(r).clamp(-1.0, 1.0).acos();
            assert!((dist_point_circle(q, &c) - half_acos).abs() < 1e-7);
        }
        assert!(dist_along_fibre(&c, 1.1, &c) < 1e-7);
    }

    #[test]
    fn canonical_sign() {
        let q = Quat::new(-0.5, 0.5, 0.5, 0.5);
        assert_eq!(q.canonical(), -q);
        assert!((q.angle() - 2.0 * PI / 3.0).abs() < 1e-14);
    }
}
