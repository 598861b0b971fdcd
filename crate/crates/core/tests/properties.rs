//! Property-based invariants across the theta, section, frame and flow layers.

use proptest::prelude::*;

use spectral_orbit::curve::{antipodal_eta, IntersectionTable};
use spectral_orbit::flow::flow_point;
use spectral_orbit::frames::{polynomial_from_frame, unitary_frame};
use spectral_orbit::io::fmt_float;
use spectral_orbit::linalg::{c, C64};
use spectral_orbit::poly::Poly;
use spectral_orbit::potential::hitchin_residual;
use spectral_orbit::random::{random_curve, random_definite_point, random_divisor, random_gluing, random_ratios, stream_rng};
use spectral_orbit::sections::{abel_map, distinguished_sections, hermitian_pair_signed};
use spectral_orbit::theta::{theta_det, theta_expansion, theta_with_scale, JacobianPoint};

fn complex() -> impl Strategy<Value = C64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| c(re, im))
}

fn nonzero() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, 0.0..std::f64::consts::TAU).prop_map(|(lr, ph)| C64::from_polar(lr.exp(), ph))
}

fn inv_conj(z: C64) -> C64 {
    C64::from(1.0) / z.conj()
}

fn curve(seed: u64, k: usize) -> IntersectionTable {
    random_curve(&mut stream_rng(seed, 0), k, false)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reflect_squares_to_the_degree_sign(coeffs in prop::collection::vec(complex(), 1..6)) {
        let p = Poly::new(coeffs);
        let back = p.reflect().reflect();
        // quaternionic on odd degree
        let sign = if p.len() % 2 == 1 { 1.0 } else { -1.0 };
        for (a, b) in p.coeffs.iter().zip(&back.coeffs) {
            prop_assert!((a * sign - b).norm() < 1e-15);
        }
    }

    #[test]
    fn reflect_matches_its_definition(coeffs in prop::collection::vec(complex(), 1..6), z in nonzero()) {
        let p = Poly::new(coeffs);
        let n = p.len() as i32 - 1;
        let direct = (-z).powi(n) * p.eval(-inv_conj(z)).conj();
        prop_assert!((p.reflect().eval(z) - direct).norm() < 1e-12 * (1.0 + direct.norm()));
    }

    #[test]
    fn theta_is_invariant_under_rescaling(seed in 0u64..1000, k in 2usize..5, z in prop::collection::vec(nonzero(), 4)) {
        let table = curve(seed, k);
        let g = random_gluing(&mut stream_rng(seed, 1), k);
        let (a, scale) = theta_with_scale(&table, &g);
        let b = theta_det(&table, &g.act(&z[..k]));
        prop_assert!((a - b).norm() < 1e-10 * scale);
    }

    #[test]
    fn canonical_form_is_gauge_invariant(seed in 0u64..1000, k in 2usize..5, z in prop::collection::vec(nonzero(), 4)) {
        let ratios = random_ratios(&mut stream_rng(seed, 2), k);
        let g = spectral_orbit::theta::Gluing::from_matching_ratios(k, &ratios).unwrap();
        let p = JacobianPoint::from_ratios(k, &ratios);
        prop_assert!(g.act(&z[..k]).to_point().distance(&p) < 1e-12);
    }

    #[test]
    fn flow_is_a_one_parameter_group(seed in 0u64..1000, k in 2usize..5, s in 0.0..2.0f64, t in 0.0..2.0f64) {
        let table = curve(seed, k);
        let p = JacobianPoint::from_ratios(k, &random_ratios(&mut stream_rng(seed, 3), k));
        let two_steps = flow_point(&table, &flow_point(&table, &p, s), t);
        prop_assert!(two_steps.distance(&flow_point(&table, &p, s + t)) < 1e-12);
    }

    #[test]
    fn antipodal_eta_is_an_involution(eta in complex(), zeta in nonzero()) {
        let w = -C64::from(1.0) / zeta.conj();
        let back = antipodal_eta(antipodal_eta(eta, zeta), w);
        prop_assert!((back - eta).norm() < 1e-12 * (1.0 + eta.norm()));
    }

    #[test]
    fn floats_round_trip_through_text(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn expansion_agrees_with_determinant(seed in 0u64..1000, k in 2usize..4) {
        let table = curve(seed, k);
        let e = theta_expansion(&table).unwrap();
        let g = random_gluing(&mut stream_rng(seed, 4), k);
        let (det, scale) = theta_with_scale(&table, &g);
        prop_assert!((det - e.evaluate(&g)).norm() < 1e-10 * scale);
    }

    #[test]
    fn abel_image_lies_on_theta(seed in 0u64..1000) {
        let table = curve(seed, 3);
        let p = abel_map(&table, &random_divisor(&mut stream_rng(seed, 5), &table, 1)).unwrap();
        let (th, scale) = theta_with_scale(&table, &p.gluing());
        prop_assert!(th.norm() < 1e-9 * scale);
    }

    #[test]
    fn hermitian_pairing_is_conjugate_symmetric(seed in 0u64..1000, z0 in complex()) {
        let table = curve(seed, 3);
        let pt = random_definite_point(&mut stream_rng(seed, 6), &table).unwrap();
        let frame = distinguished_sections(&table, &pt).unwrap();
        for l in 0..3 {
            for m in 0..3 {
                let (a, b) = (frame.column(l), frame.column(m));
                let (Ok(x), Ok(y)) = (
                    hermitian_pair_signed(&table, &frame.signs, &a, &b, z0),
                    hermitian_pair_signed(&table, &frame.signs, &b, &a, z0),
                ) else {
                    // fibre over z0 too close to a node
                    continue;
                };
                prop_assert!((x - y.conj()).norm() < 1e-9 * (1.0 + x.norm()));
            }
        }
    }

    #[test]
    fn reality_of_the_matricial_polynomial(seed in 0u64..1000) {
        let table = curve(seed, 2);
        let pt = random_definite_point(&mut stream_rng(seed, 7), &table).unwrap();
        let a = polynomial_from_frame(&table, &unitary_frame(&table, &pt).unwrap()).unwrap();
        let scale = a.max_abs().max(1.0);
        prop_assert!((&a.a2 + a.a0.adjoint()).iter().all(|z| z.norm() < 1e-9 * scale));
        prop_assert!((&a.a1 - a.a1.adjoint()).iter().all(|z| z.norm() < 1e-9 * scale));
    }

    #[test]
    fn hitchin_identity_along_the_flow(seed in 0u64..1000, t in 0.0..2.0f64) {
        let table = curve(seed, 2);
        let pt = random_definite_point(&mut stream_rng(seed, 8), &table).unwrap();
        prop_assert!(hitchin_residual(&table, &pt, t).unwrap().worst() < 1e-7);
    }
}
