//! The linear flow ρ_ij ↦ e^{−r_ij t} ρ_ij on the Jacobian, the induced Nahm
//! matrices T_i(t), and a direct RK4 integrator for the Nahm equations.

use rayon::prelude::*;

use crate::curve::IntersectionTable;
use crate::error::{Error, Result};
use crate::frames::{polynomial_from_frame, unitary_frame, MatricialPolynomial};
use crate::linalg::{c, commutator, max_abs, rel_coeff_diff, skew_part, trace, CMatrix, C64};
use crate::potential::delta;
use crate::theta::{flowed_ratios, theta_flow_jet, JacobianPoint};

/// Spectral invariants are recorded at these ζ.
pub const DIAGNOSTIC_ZETAS: [C64; 2] = [C64 { re: 0.3, im: 0.2 }, C64 { re: -0.7, im: 0.5 }];
/// Relative norm growth treated as a blow-up.
pub const BLOWUP_FACTOR: f64 = 1e6;

pub fn flow_point(table: &IntersectionTable, pt: &JacobianPoint, t: f64) -> JacobianPoint {
    JacobianPoint::from_ratios(pt.k(), &flowed_ratios(table, pt.ratios(), t))
}

pub fn tr_squares(t: &[CMatrix; 3]) -> [C64; 3] {
    [trace(&(&t[0] * &t[0])), trace(&(&t[1] * &t[1])), trace(&(&t[2] * &t[2]))]
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSample {
    pub t: f64,
    pub point: JacobianPoint,
    pub a: MatricialPolynomial,
    pub tr_sq: [C64; 3],
    pub theta: C64,
    pub dlog: C64,
    pub d2log: C64,
    pub delta: C64,
}

/// Frame, matricial polynomial and theta data at a single time.
pub fn flow_sample(table: &IntersectionTable, pt: &JacobianPoint, t: f64) -> Result<FlowSample> {
    let jet = theta_flow_jet(table, pt, t)?;
    let point = flow_point(table, pt, t);
    let frame = unitary_frame(table, &point)?;
    let a = polynomial_from_frame(table, &frame)?;
    let tr_sq = tr_squares(&a.nahm_triple());
    for (i, v) in tr_sq.iter().enumerate() {
        if v.im.abs() > 1e-9 * v.norm().max(1.0) {
            return Err(Error::NonRealValue {
                what: format!("tr T{}^2 at t = {t}", i + 1),
                imag: v.im,
            });
        }
    }
    Ok(FlowSample {
        t,
        point,
        delta: delta(&a),
        a,
        tr_sq,
        theta: jet.theta,
        dlog: jet.dlog,
        d2log: jet.d2log,
    })
}

/// Independent samples along the grid; the first failing grid point (in grid
/// order) is reported.
pub fn flow_trace(table: &IntersectionTable, pt: &JacobianPoint, grid: &[f64]) -> Result<Vec<FlowSample>> {
    grid.par_iter()
        .map(|&t| flow_sample(table, pt, t))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// Uniform grid of `steps + 1` points on [t0, t1].
pub fn uniform_grid(t0: f64, t1: f64, steps: usize) -> Vec<f64> {
    if steps == 0 {
        return vec![t0];
    }
    (0..=steps).map(|m| t0 + (t1 - t0) * m as f64 / steps as f64).collect()
}

/// Ṫ₁ = −[T₂, T₃], Ṫ₂ = −[T₃, T₁], Ṫ₃ = −[T₁, T₂].
pub fn nahm_rhs(t: &[CMatrix; 3]) -> [CMatrix; 3] {
    [
        -commutator(&t[1], &t[2]),
        -commutator(&t[2], &t[0]),
        -commutator(&t[0], &t[1]),
    ]
}

fn axpy(t: &[CMatrix; 3], h: f64, d: &[CMatrix; 3]) -> [CMatrix; 3] {
    [&t[0] + &d[0] * c(h, 0.0), &t[1] + &d[1] * c(h, 0.0), &t[2] + &d[2] * c(h, 0.0)]
}

fn rk4_step(t: &[CMatrix; 3], h: f64) -> [CMatrix; 3] {
    let k1 = nahm_rhs(t);
    let k2 = nahm_rhs(&axpy(t, h / 2.0, &k1));
    let k3 = nahm_rhs(&axpy(t, h / 2.0, &k2));
    let k4 = nahm_rhs(&axpy(t, h, &k3));
    std::array::from_fn(|i| &t[i] + (&k1[i] + (&k2[i] + &k3[i]) * c(2.0, 0.0) + &k4[i]) * c(h / 6.0, 0.0))
}

fn triple_norm(t: &[CMatrix; 3]) -> f64 {
    t.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
}

fn spectral_invariants(t: &[CMatrix; 3]) -> Vec<C64> {
    let a = MatricialPolynomial::from_nahm(t);
    DIAGNOSTIC_ZETAS.iter().flat_map(|&z| a.spectral_coefficients(z)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NahmTrajectory {
    pub h: f64,
    pub times: Vec<f64>,
    pub triples: Vec<[CMatrix; 3]>,
    /// char-poly coefficients of A(ζ_s) at [`DIAGNOSTIC_ZETAS`], per node
    pub invariants: Vec<Vec<C64>>,
    /// max ‖T_i + T_i*‖ before projection
    pub skew_drift: f64,
}

impl NahmTrajectory {
    /// Largest relative change of the spectral invariants from t = 0.
    pub fn invariant_drift(&self) -> f64 {
        let first = &self.invariants[0];
        self.invariants.iter().map(|v| rel_coeff_diff(v, first)).fold(0.0, f64::max)
    }

    pub fn index_of(&self, t: f64) -> Option<usize> {
        let m = (t / self.h).round();
        if m < 0.0 || (m * self.h - t).abs() > 1e-9 * t.abs().max(1.0) {
            return None;
        }
        let m = m as usize;
        (m < self.times.len()).then_some(m)
    }
}

/// Fixed-step RK4 on [0, t_end] with step ≈ h (shrunk so steps divide t_end),
/// re-projecting onto skew-hermitian matrices after each step.
pub fn integrate_nahm(start: [CMatrix; 3], t_end: f64, h: f64) -> Result<NahmTrajectory> {
    if !(h > 0.0) || !(t_end >= 0.0) {
        return Err(Error::InvalidInput(format!("need h > 0 and t_end >= 0, got h = {h}, t_end = {t_end}")));
    }
    let steps = ((t_end / h) - 1e-9).ceil().max(0.0) as usize;
    let h = if steps == 0 { h } else { t_end / steps as f64 };
    let initial = triple_norm(&start).max(f64::MIN_POSITIVE);
    let mut current = start.map(|m| skew_part(&m));
    let mut times = vec![0.0];
    let mut invariants = vec![spectral_invariants(&current)];
    let mut triples = vec![current.clone()];
    let mut skew_drift = 0.0_f64;
    for m in 1..=steps {
        let next = rk4_step(&current, h);
        for x in &next {
            skew_drift = skew_drift.max(max_abs(&(x + x.adjoint())));
        }
        current = next.map(|x| skew_part(&x));
        let t = m as f64 * h;
        let norm = triple_norm(&current);
        if !norm.is_finite() || norm > BLOWUP_FACTOR * initial {
            return Err(Error::BlowUp { t, norm });
        }
        times.push(t);
        invariants.push(spectral_invariants(&current));
        triples.push(current.clone());
    }
    Ok(NahmTrajectory {
        h,
        times,
        triples,
        invariants,
        skew_drift,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub t: f64,
    pub tr_sq_delta: [f64; 3],
    pub spectral_delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowComparison {
    pub rows: Vec<ComparisonRow>,
    pub max_delta: f64,
    pub argmax_t: f64,
    pub max_spectral_delta: f64,
}

/// Gauge-invariant comparison of the ODE trajectory with algebraic samples.
pub fn compare_flows(traj: &NahmTrajectory, samples: &[FlowSample]) -> Result<FlowComparison> {
    let mut rows = Vec::with_capacity(samples.len());
    let mut max_delta = 0.0_f64;
    let mut argmax_t = samples.first().map_or(0.0, |s| s.t);
    let mut max_spectral_delta = 0.0_f64;
    for s in samples {
        let m = traj
            .index_of(s.t)
            .ok_or_else(|| Error::GridMismatch(format!("t = {} is not a node of the trajectory grid (h = {})", s.t, traj.h)))?;
        let ode = tr_squares(&traj.triples[m]);
        let tr_sq_delta: [f64; 3] = std::array::from_fn(|i| (ode[i] - s.tr_sq[i]).norm());
        let alg: Vec<C64> = DIAGNOSTIC_ZETAS.iter().flat_map(|&z| s.a.spectral_coefficients(z)).collect();
        let spectral_delta = rel_coeff_diff(&traj.invariants[m], &alg);
        let worst = tr_sq_delta.iter().copied().fold(0.0, f64::max);
        if worst > max_delta {
            max_delta = worst;
            argmax_t = s.t;
        }
        max_spectral_delta = max_spectral_delta.max(spectral_delta);
        rows.push(ComparisonRow {
            t: s.t,
            tr_sq_delta,
            spectral_delta,
        });
    }
    Ok(FlowComparison {
        rows,
        max_delta,
        argmax_t,
        max_spectral_delta,
    })
}

/// A trajectory made of the algebraic samples themselves; comparing it with
/// the samples gives zero deltas.
pub fn trajectory_from_samples(samples: &[FlowSample], h: f64) -> NahmTrajectory {
    let triples: Vec<[CMatrix; 3]> = samples.iter().map(|s| s.a.nahm_triple()).collect();
    NahmTrajectory {
        h,
        times: samples.iter().map(|s| s.t).collect(),
        invariants: triples.iter().map(spectral_invariants).collect(),
        triples,
        skew_drift: 0.0,
    }
}
