//! Seeded invariant suite behind `spectral-orbit selftest`. Each check draws
//! from its own RNG stream so the report is independent of scheduling.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::curve::{validate_curve, CurveSpec, IntersectionTable};
use crate::error::Result;
use crate::flow::{compare_flows, flow_point, flow_trace, integrate_nahm, uniform_grid};
use crate::frames::{frame_checks, jacobian_from_frame, polynomial_from_frame, unitary_frame};
use crate::linalg::{c, trace, C64, ZERO};
use crate::potential::{eguchi_hanson_from_polynomial, hitchin_residual, kahler_potential};
use crate::random::{random_curve, random_definite_point, random_divisor, random_gluing, random_real_ratios, stream_rng};
use crate::sections::{abel_map, distinguished_sections, hermitian_pair_signed};
use crate::theta::{enumerate_regular_subsets, theta_det, theta_expansion, theta_with_scale, JacobianPoint};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = format!("selftest seed={}\n", self.seed);
        for ch in &self.checks {
            out.push_str(&format!(
                "{} {:<34} value={:e} tol={:e}",
                if ch.passed { "PASS" } else { "FAIL" },
                ch.name,
                ch.value,
                ch.tolerance
            ));
            if let Some(e) = &ch.error {
                out.push_str(&format!(" error={e}"));
            }
            out.push('\n');
        }
        let passed = self.checks.iter().filter(|c| c.passed).count();
        out.push_str(&format!("{passed}/{} checks passed\n", self.checks.len()));
        out
    }
}

type CheckFn = fn(&mut rand_chacha::ChaCha8Rng) -> Result<f64>;

const CHECKS: [(&str, f64, CheckFn); 9] = [
    ("k2_theta_formula", 1e-12, k2_theta_formula),
    ("expansion_vs_determinant", 1e-10, expansion_vs_determinant),
    ("abel_image_on_theta", 1e-9, abel_image_on_theta),
    ("frame_pipeline", 1e-9, frame_pipeline),
    ("hitchin_identity", 1e-7, hitchin_identity),
    ("ode_vs_algebraic_flow", 1e-6, ode_vs_algebraic_flow),
    ("eguchi_hanson_baseline", 1e-8, eguchi_hanson_baseline),
    ("asymptotic_section_norms", 1e-6, asymptotic_section_norms),
    ("hermitian_form_symmetry", 1e-10, hermitian_form_symmetry),
];

pub fn run(seed: u64) -> SelftestReport {
    let checks = CHECKS
        .par_iter()
        .enumerate()
        .map(|(id, &(name, tolerance, f))| {
            let mut rng = stream_rng(seed, id as u64 + 1);
            match f(&mut rng) {
                Ok(value) => Check {
                    name,
                    value,
                    tolerance,
                    passed: value < tolerance,
                    error: None,
                },
                Err(e) => Check {
                    name,
                    value: f64::INFINITY,
                    tolerance,
                    passed: false,
                    error: Some(e.name().to_string()),
                },
            }
        })
        .collect();
    SelftestReport { seed, checks }
}

fn baseline_curve() -> IntersectionTable {
    validate_curve(&CurveSpec::from_pairs(&[(0.0, c(-0.5, 0.0)), (0.0, c(0.5, 0.0))]).expect("valid")).expect("valid")
}

fn baseline_point() -> JacobianPoint {
    let s = 0.5f64.sqrt();
    JacobianPoint::from_ratios(2, &[c(s, 0.0), c(s, 0.0)])
}

fn k2_theta_formula(rng: &mut rand_chacha::ChaCha8Rng) -> Result<f64> {
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let table = random_curve(rng, 2, false);
        let g = random_gluing(rng, 2);
        let ((l12, m12), (l21, m21)) = (g.get(0, 1), g.get(1, 0));
        let scale = (l12 * l21).norm() + (m12 * m21).norm();
        worst = worst.max((theta_det(&table, &g) - (l12 * l21 - m12 * m21)).norm() / scale);
    }
    Ok(worst)
}

fn expansion_vs_determinant(rng: &mut rand_chacha::ChaCha8Rng) -> Result<f64> {
    let mut worst = 0.0_f64;
    for (k, count) in [(2, 2), (3, 10)] {
        if enumerate_regular_subsets(k)?.len() != count {
            return Ok(f64::INFINITY);
        }
        let table = random_curve(rng, k, false);
        let e = theta_expansion(&table)?;
        for _ in 0..10 {
            let g = random_gluing(rng, k);
            let (det, scale) = theta_with_scale(&table, &g);
            worst = worst.max((det - e.evaluate(&g)).norm() / scale);
        }
    }
    Ok(worst)
}

fn abel_image_on_theta(rng: &mut rand_chacha::ChaCha8Rng) -> Result<f64> {
    let mut worst = 0.0_f64;
    for k in 2..=3 {
        let table = random_curve(rng, k, false);
        for _ in 0..10 {
            let p = abel_map(&table, &random_divisor(rng, &table, k - 2))?;
            let (th, scale) = theta_with_scale(&table, &p.gluing());
            worst = worst.max(th.norm() / scale);
        }
    }
    Ok(worst)
}

fn frame_pipeline(rng: &mut rand_chacha::ChaCha8Rng) -> Result<f64> {
    let mut worst = 0.0_f64;
    for k in 2..=3 {
        for _ in 0..3 {
            let table = random_curve(rng, k, false);
            let pt = random_definite_point(rng, &table)?;
            let frame = unitary_frame(&table, &pt)?;
            let a = polynomial_from_frame(&table, &frame)?;
            worst = worst.max(frame_checks(&table, &frame, &a).worst());
            worst = worst.max(jacobian_from_frame(&table, &frame)?.point.distance(&pt));
        }
    }
    Ok(worst)
}

fn hitchin_identity(rng: &mut rand_chacha::ChaCha8Rng) -> Result<f64> {
    let mut worst = 0.0_f64;
    for t in uniform_grid(0.0, 3.0, 4) {
        worst = worst.max(hitchin_residual(&baseline_curve(), &baseline_point(), t)?.worst());
    }
    let table = random_curve(rng, 3, false);
    let pt = random_definite_point(rng, &table)?;
    for t in uniform_grid(0.0, 3.0, 4) {
        worst = worst.max(hitchin_residual(&table, &pt, t)?.worst());
    }
    Ok(worst)
}

fn ode_vs_algebraic_flow(_: &mut rand_chacha::ChaCha8Rng) -> Result<f64> {
    let table = baseline_curve();
    let samples = flow_trace(&table, &baseline_point(), &uniform_grid(0.0, 1.0, 10))?;
    let traj = integrate_nahm(samples[0].a.nahm_triple(), 1.0, 1e-3)?;
    Ok(compare_flows(&traj, &samples)?.max_delta)
}

fn eguchi_hanson_baseline(_: &mut rand_chacha::ChaCha8Rng) -> Result<f64> {
    let table = baseline_curve();
    let k_theta = kahler_potential(&table, &baseline_point())?;
    let a = polynomial_from_frame(&table, &unitary_frame(&table, &baseline_point())?)?;
    let (_, k_closed) = eguchi_hanson_from_polynomial(&table, &a)?;
    let tr = trace(&(&a.a0 * a.a0.adjoint())).re;
    Ok((k_theta - 1.0).abs().max((k_closed - 1.0).abs()).max((tr - 8.5).abs()))
}

fn asymptotic_section_norms(rng: &mut rand_chacha::ChaCha8Rng) -> Result<f64> {
    let mut worst = 0.0_f64;
    for k in 2..=3 {
        let table = loop {
            let t = random_curve(rng, k, false);
            if t.distances().iter().all(|&r| r > 0.8) {
                break t;
            }
        };
        let pt = flow_point(&table, &JacobianPoint::from_ratios(k, &random_real_ratios(rng, k)), 20.0);
        let frame = distinguished_sections(&table, &pt)?;
        let spec = table.spec();
        for l in 0..k {
            let s = frame.column(l);
            let s = s.scale(C64::from(1.0) / s.q[l].lead());
            let norm = hermitian_pair_signed(&table, &frame.signs, &s, &s, ZERO)?;
            let expected: f64 = (0..k)
                .filter(|&i| i != l)
                .map(|i| (spec.x(i) - spec.x(l) + table.r(i, l)) / (spec.z(i) - spec.z(l)).norm_sqr())
                .product();
            worst = worst.max((norm - expected).norm() / expected.abs());
        }
    }
    Ok(worst)
}

fn hermitian_form_symmetry(rng: &mut rand_chacha::ChaCha8Rng) -> Result<f64> {
    let table = random_curve(rng, 3, false);
    let pt = random_definite_point(rng, &table)?;
    let frame = distinguished_sections(&table, &pt)?;
    let z0 = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let mut worst = 0.0_f64;
    for l in 0..3 {
        for m in 0..3 {
            let (s, s2) = (frame.column(l), frame.column(m));
            let a = hermitian_pair_signed(&table, &frame.signs, &s, &s2, z0)?;
            let b = hermitian_pair_signed(&table, &frame.signs, &s2, &s, z0)?;
            worst = worst.max((a - b.conj()).norm());
        }
    }
    Ok(worst)
}
