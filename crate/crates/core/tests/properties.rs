use std::f64::consts::PI;

use proptest::prelude::*;
use s3radon::geometry::{dist_point_circle, fibre_circle};
use s3radon::kernels::{kernel_double_radon, kernel_radon, kernel_value};
use s3radon::reconstruction::{forward_w_rbf, RbfMixture};
use s3radon::{Dir3, KernelSpec, Quat, Rules};

fn dir() -> impl Strategy<Value = Dir3> {
    (-1.0f64..1.0, 0.0f64..2.0 * PI).prop_map(|(z, phi)| {
        let s = (1.0 - z * z).sqrt();
        Dir3::new_unchecked(s * phi.cos(), s * phi.sin(), z)
    })
}

fn quat() -> impl Strategy<Value = Quat> {
    (dir(), 0.0f64..PI).prop_map(|(d, a)| {
        let (s, c) = a.sin_cos();
        Quat::new(c, s * d.x, s * d.y, s * d.z)
    })
}

fn spec() -> impl Strategy<Value = KernelSpec> {
    prop_oneof![
        (0.05f64..0.9).prop_map(|k| KernelSpec::abel_poisson(k).unwrap()),
        (0.5f64..30.0).prop_map(|k| KernelSpec::dlvp(k).unwrap()),
        (1u32..30).prop_map(|k| KernelSpec::dlvp(k as f64).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn rotation_preserves_unit_norm(q in quat(), d in dir()) {
        prop_assert!((q.rotate(d).norm() - 1.0).abs() < 1e-14);
        prop_assert!(((q * q.conj()).scalar() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fibre_circle_maps_h_to_r(h in dir(), r in dir(), t in 0.0f64..2.0 * PI) {
        let p = fibre_circle(h, r).point(t).rotate(h);
        prop_assert!(p.angle_to(r) < 1e-7);
    }

    #[test]
    fn distance_to_fibre_is_half_angle(q in quat(), h in dir(), r in dir()) {
        let d = dist_point_circle(q, &fibre_circle(h, r));
        prop_assert!((d - 0.5 * q.rotate(h).angle_to(r)).abs() < 1e-7);
    }

    #[test]
    fn kernels_are_nonnegative_and_symmetric(s in spec(), eta in 0.0f64..PI, eta2 in 0.0f64..PI) {
        prop_assert!(kernel_value(&s, 2.0 * eta) >= 0.0);
        prop_assert!(kernel_radon(&s, eta) >= 0.0);
        let a = kernel_double_radon(&s, eta, eta2);
        let b = kernel_double_radon(&s, eta2, eta);
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
        let c = kernel_double_radon(&s, PI - eta, PI - eta2);
        prop_assert!((a - c).abs() <= 1e-10 * a.abs().max(1.0));
    }

    #[test]
    fn forward_w_is_even_in_h_and_r(s in spec(), q in quat(), h in dir(), r in dir(), rho in 0.0f64..PI) {
        let m = RbfMixture::single(q, s).unwrap();
        let w = forward_w_rbf(&m, h, r, rho).unwrap();
        let wh = forward_w_rbf(&m, -h, r, rho).unwrap();
        let wr = forward_w_rbf(&m, h, -r, rho).unwrap();
        prop_assert!((w - wh).abs() <= 1e-10 * w.abs().max(1.0));
        prop_assert!((w - wr).abs() <= 1e-10 * w.abs().max(1.0));
        prop_assert!(w >= -1e-12);
    }

    #[test]
    fn radon_of_kernel_matches_closed_form(s in spec(), q in quat(), h in dir(), r in dir()) {
        // non-integer dlVP orders have a kink and converge only algebraically
        prop_assume!(match s.kind() {
            s3radon::KernelKind::DeLaValleePoussin => s.kappa().fract() == 0.0,
            s3radon::KernelKind::AbelPoisson => s.kappa() <= 0.8,
        });
        let rules = Rules::new(256, 8, 8).unwrap();
        let quad = s3radon::transforms::radon_hr(&|p: Quat| s.centered(q, p), h, r, &rules);
        let closed = kernel_radon(&s, q.rotate(h).angle_to(r));
        prop_assert!((quad - closed).abs() <= 1e-9 * closed.abs().max(1.0));
    }
}
