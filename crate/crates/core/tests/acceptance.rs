//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line with the measured value and its tolerance.

use spectral_orbit::curve::{num_pairs, ordered_pairs, validate_curve, CurveSpec, IntersectionTable};
use spectral_orbit::flow::{compare_flows, flow_point, flow_trace, integrate_nahm, uniform_grid};
use spectral_orbit::frames::{
    frame_checks, jacobian_from_frame, polynomial_from_frame, sample_points, unitarity_matrix, unitary_frame,
};
use spectral_orbit::linalg::{c, max_abs, poly_from_roots, rel_coeff_diff, trace, CMatrix, C64};
use spectral_orbit::potential::{eguchi_hanson_from_polynomial, hitchin_residual, kahler_potential};
use spectral_orbit::random::{
    random_curve, random_definite_point, random_divisor, random_gluing, random_real_ratios, stream_rng,
};
use spectral_orbit::sections::{abel_map, distinguished_sections, hermitian_pair_signed};
use spectral_orbit::selftest;
use spectral_orbit::theta::{
    enumerate_regular_subsets, theta_det, theta_expansion, theta_pq, theta_with_scale, JacobianPoint,
};

const DEFAULT_SEED: u64 = 20240917;

/// Base seed, overridable through `SPECTRAL_ORBIT_ACCEPTANCE_SEED`.
fn seed() -> u64 {
    std::env::var("SPECTRAL_ORBIT_ACCEPTANCE_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

fn report(n: u32, name: &str, value: f64, tol: f64) {
    let pass = value < tol;
    println!(
        "criterion {n} [{name}]: {} (value {value:.3e}, tolerance {tol:.1e})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {n} failed: {value:e} >= {tol:e}");
}

fn c2_with(r: f64) -> IntersectionTable {
    validate_curve(&CurveSpec::from_pairs(&[(0.0, c(-r / 2.0, 0.0)), (0.0, c(r / 2.0, 0.0))]).unwrap()).unwrap()
}

fn gamma_point(g: f64) -> JacobianPoint {
    let s = g.sqrt();
    JacobianPoint::from_ratios(2, &[c(s, 0.0), c(s, 0.0)])
}

fn relative(a: C64, b: C64, scale: f64) -> f64 {
    (a - b).norm() / scale.max(f64::MIN_POSITIVE)
}

#[test]
fn criterion_1_k2_theta_formula() {
    let mut rng = stream_rng(seed(), 1);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let table = random_curve(&mut rng, 2, false);
        let g = random_gluing(&mut rng, 2);
        let (l12, m12) = g.get(0, 1);
        let (l21, m21) = g.get(1, 0);
        let expected = l12 * l21 - m12 * m21;
        let scale = (l12 * l21).norm() + (m12 * m21).norm();
        worst = worst.max(relative(theta_det(&table, &g), expected, scale));
    }
    report(1, "k=2 theta equals l12*l21 - m12*m21", worst, 1e-12);
}

/// Independent count of balanced subsets of ordered pairs by direct 2^|P| scan.
fn brute_force_regular_count(k: usize) -> usize {
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    (0u64..1 << pairs.len())
        .filter(|mask| {
            let mut out = vec![0i32; k];
            for (b, &(i, j)) in pairs.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    out[i] += 1;
                    out[j] -= 1;
                }
            }
            out.iter().all(|&d| d == 0)
        })
        .count()
}

#[test]
fn criterion_2_expansion_matches_determinant() {
    let mut rng = stream_rng(seed(), 2);
    let mut worst = 0.0_f64;
    let mut count_mismatch = 0.0;
    for (k, known) in [(2usize, Some(2usize)), (3, Some(10)), (4, None)] {
        let enumerated = enumerate_regular_subsets(k).unwrap().len();
        let brute = brute_force_regular_count(k);
        if enumerated != brute || known.is_some_and(|n| n != enumerated) {
            count_mismatch = 1.0;
        }
        println!("  k={k}: {enumerated} regular subsets (brute force {brute})");
        let table = random_curve(&mut rng, k, false);
        let expansion = theta_expansion(&table).unwrap();
        for _ in 0..50 {
            let g = random_gluing(&mut rng, k);
            let (det, _) = theta_with_scale(&table, &g);
            let sum = expansion.evaluate(&g);
            // scale: sum of term magnitudes
            let scale: f64 = expansion
                .terms()
                .iter()
                .map(|t| {
                    ordered_pairs(k).zip(g.pairs()).fold(t.coeff.norm(), |acc, (p, &(l, m))| {
                        acc * if t.subset.contains(p) { l.norm() } else { m.norm() }
                    })
                })
                .sum();
            worst = worst.max(relative(det, sum, scale));
        }
    }
    report(2, "regular-subset counts match brute force", count_mismatch, 0.5);
    report(2, "expansion equals determinant, k=2,3,4", worst, 1e-10);
}

#[test]
fn criterion_3_theta_vanishes_on_abel_image() {
    let mut rng = stream_rng(seed(), 3);
    let mut worst = 0.0_f64;
    for k in 2..=4 {
        let table = random_curve(&mut rng, k, false);
        for _ in 0..30 {
            let d = random_divisor(&mut rng, &table, k - 2);
            let p = abel_map(&table, &d).unwrap();
            let (th, scale) = theta_with_scale(&table, &p.gluing());
            worst = worst.max(th.norm() / scale);
            // same value through theta_pq on the canonical form
            worst = worst.max(theta_pq(&table, &p, 1, 0).norm() / scale);
        }
    }
    report(3, "theta_{1,0} vanishes on Abel image", worst, 1e-9);
}

#[test]
fn criterion_4_beauville_pipeline() {
    let mut rng = stream_rng(seed(), 4);
    let (mut char_err, mut real_err, mut unit_err, mut trip_err) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for k in 2..=4 {
        for _ in 0..10 {
            let table = random_curve(&mut rng, k, false);
            let pt = random_definite_point(&mut rng, &table).unwrap();
            let frame = unitary_frame(&table, &pt).unwrap();
            let a = polynomial_from_frame(&table, &frame).unwrap();
            let rep = frame_checks(&table, &frame, &a);
            let spec = table.spec();
            for z in sample_points(&table, 7) {
                let roots: Vec<C64> = (0..k).map(|i| spec.eta_at(i, z)).collect();
                char_err = char_err.max(rel_coeff_diff(&a.spectral_coefficients(z), &poly_from_roots(&roots)));
            }
            real_err = real_err.max(rep.reality_a1).max(rep.reality_a2);
            let id = CMatrix::identity(k, k);
            for _ in 0..10 {
                let z = loop {
                    let z = c(rng_unit(&mut rng) * 2.0, rng_unit(&mut rng) * 2.0);
                    if table.nodes().iter().all(|n| (z - n).norm() > 1e-3) {
                        break z;
                    }
                };
                unit_err = unit_err.max(max_abs(&(unitarity_matrix(&table, &frame, z) - &id)));
            }
            let back = jacobian_from_frame(&table, &frame).unwrap();
            trip_err = trip_err.max(back.point.distance(&pt));
        }
    }
    report(4, "char poly of A equals prod(eta - eta_i)", char_err, 1e-9);
    report(4, "reality A2 = -A0*, A1 = A1*", real_err, 1e-9);
    report(4, "sigma(Q) D Q = 1 at random zeta", unit_err, 1e-9);
    report(4, "frame to point round trip", trip_err, 1e-9);
}

fn rng_unit(rng: &mut impl rand::Rng) -> f64 {
    rng.random_range(-1.0..1.0)
}

#[test]
fn criterion_5_hitchin_identity() {
    let mut rng = stream_rng(seed(), 5);
    let (mut global, mut per) = (0.0_f64, 0.0_f64);
    for k in 2..=3 {
        let table = random_curve(&mut rng, k, false);
        let pt = random_definite_point(&mut rng, &table).unwrap();
        for t in uniform_grid(0.0, 3.0, 19) {
            let res = hitchin_residual(&table, &pt, t).unwrap();
            global = global.max(res.global.norm());
            per = per.max(res.per_component.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    // baseline curve as well
    for t in uniform_grid(0.0, 3.0, 19) {
        let res = hitchin_residual(&c2_with(1.0), &gamma_point(0.5), t).unwrap();
        global = global.max(res.global.norm());
        per = per.max(res.per_component.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    report(5, "Delta - tr tau^2 - 3/2 (log theta)''", global, 1e-7);
    report(5, "tr T_i^2 - tr tau_i^2 - 1/2 (log theta)''", per, 1e-7);
}

fn ode_vs_trace(table: &IntersectionTable, pt: &JacobianPoint, t_end: f64, h: f64, samples: usize) -> f64 {
    let grid = uniform_grid(0.0, t_end, samples);
    let alg = flow_trace(table, pt, &grid).unwrap();
    let traj = integrate_nahm(alg[0].a.nahm_triple(), t_end, h).unwrap();
    compare_flows(&traj, &alg).unwrap().max_delta
}

#[test]
fn criterion_6_ode_cross_validation() {
    let k2 = ode_vs_trace(&c2_with(1.0), &gamma_point(0.5), 2.0, 1e-3, 20);
    report(6, "RK4 vs algebraic flow, k=2, t in [0,2]", k2, 1e-6);
    let mut rng = stream_rng(seed(), 6);
    let table = random_curve(&mut rng, 3, false);
    let pt = random_definite_point(&mut rng, &table).unwrap();
    let k3 = ode_vs_trace(&table, &pt, 1.0, 1e-3, 10);
    report(6, "RK4 vs algebraic flow, k=3, t in [0,1]", k3, 1e-5);
    // fourth order: drift ratio between h and h/2 close to 16, with h scaled
    // so that h * |T| = 0.05 keeps RK4 in its asymptotic regime
    let start = flow_trace(&table, &pt, &[0.0]).unwrap()[0].a.nahm_triple();
    let size = start.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt();
    let steps = (20.0 * size).ceil();
    let coarse = integrate_nahm(start.clone(), 1.0, 1.0 / steps).unwrap().invariant_drift();
    let fine = integrate_nahm(start, 1.0, 0.5 / steps).unwrap().invariant_drift();
    let ratio = coarse / fine;
    println!("  |T| = {size:.3}, drift with {steps} steps: {coarse:.3e}, with {}: {fine:.3e}, ratio {ratio:.2}", 2.0 * steps);
    report(6, "halving h: |log2(drift ratio) - 4|", (ratio.log2() - 4.0).abs(), 0.5);
}

#[test]
fn criterion_7_eguchi_hanson() {
    let table = c2_with(1.0);
    let base = gamma_point(0.5);
    let k_theta = kahler_potential(&table, &base).unwrap();
    let a = polynomial_from_frame(&table, &unitary_frame(&table, &base).unwrap()).unwrap();
    let (_, k_closed) = eguchi_hanson_from_polynomial(&table, &a).unwrap();
    let tr = trace(&(&a.a0 * a.a0.adjoint())).re;
    println!("  baseline: K_theta = {k_theta}, K_closed_form = {k_closed}, tr A0 A0* = {tr}");
    report(7, "baseline K_theta = 1", (k_theta - 1.0).abs(), 1e-8);
    report(7, "baseline K_closed_form = 1", (k_closed - 1.0).abs(), 1e-8);
    report(7, "baseline tr A0 A0* = 8.5", (tr - 8.5).abs(), 1e-8);
    let mut rng = stream_rng(seed(), 7);
    let mut worst = 0.0_f64;
    for r in [0.5, 1.0, 2.0] {
        let table = c2_with(r);
        for _ in 0..10 {
            let g: f64 = rand::Rng::random_range(&mut rng, 0.05..0.95);
            let pt = gamma_point(g);
            let k_theta = kahler_potential(&table, &pt).unwrap();
            let a = polynomial_from_frame(&table, &unitary_frame(&table, &pt).unwrap()).unwrap();
            let (_, k_closed) = eguchi_hanson_from_polynomial(&table, &a).unwrap();
            worst = worst.max((k_theta - k_closed).abs());
        }
    }
    report(7, "K_theta vs closed form, 10 gamma x 3 R", worst, 1e-8);
}

#[test]
fn criterion_8_asymptotic_norms() {
    let mut rng = stream_rng(seed(), 8);
    let mut worst = 0.0_f64;
    for k in 2..=3 {
        for _ in 0..3 {
            let table = loop {
                let t = random_curve(&mut rng, k, false);
                if t.distances().iter().all(|&r| r > 0.8) {
                    break t;
                }
            };
            let start = JacobianPoint::from_ratios(k, &random_real_ratios(&mut rng, k));
            let pt = flow_point(&table, &start, 20.0);
            let frame = distinguished_sections(&table, &pt).unwrap();
            let spec = table.spec();
            for l in 0..k {
                let s = frame.column(l);
                let s = s.scale(C64::from(1.0) / s.q[l].lead());
                let norm = hermitian_pair_signed(&table, &frame.signs, &s, &s, c(0.0, 0.0)).unwrap();
                let expected: f64 = (0..k)
                    .filter(|&i| i != l)
                    .map(|i| (spec.x(i) - spec.x(l) + table.r(i, l)) / (spec.z(i) - spec.z(l)).norm_sqr())
                    .product();
                worst = worst.max((norm - expected).norm() / expected.abs());
            }
        }
    }
    assert_eq!(num_pairs(3), 6);
    report(8, "<s^l, s^l> at t=20 vs product formula", worst, 1e-6);
}

#[test]
fn criterion_9_selftest_determinism() {
    let first = selftest::run(42).render();
    let second = selftest::run(42).render();
    let same = if first == second { 0.0 } else { 1.0 };
    println!("  selftest report: {} bytes", first.len());
    report(9, "selftest --seed 42 byte-identical across runs", same, 0.5);
    if let Some(exe) = option_env!("CARGO_BIN_EXE_spectral-orbit") {
        let run = || {
            std::process::Command::new(exe)
                .args(["selftest", "--seed", "42"])
                .output()
                .expect("run binary")
                .stdout
        };
        let (a, b) = (run(), run());
        report(9, "binary selftest output byte-identical", if a == b && !a.is_empty() { 0.0 } else { 1.0 }, 0.5);
    }
}
