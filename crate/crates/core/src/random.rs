//! Seeded random instances. Every generator draws from a ChaCha8 stream
//! selected by (seed, stream id), so parallel callers stay reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curve::{num_pairs, ordered_pairs, pair_index, validate_curve, CurveSpec, IntersectionTable, Zeta};
use crate::error::{Error, Result};
use crate::flow::flow_point;
use crate::linalg::{c, C64};
use crate::sections::{check_off_nodes, is_definite, Divisor, Verdict};
use crate::theta::{theta_at_origin, theta_det, theta_flow_jet, Gluing, JacobianPoint};

/// Bound on |(log θ_{1,0})″| at generated definite points, keeping them a
/// fixed distance in t away from poles of the Nahm data.
pub const MAX_D2LOG: f64 = 200.0;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn complex_in_box(rng: &mut impl Rng, half: f64) -> C64 {
    c(rng.random_range(-half..half), rng.random_range(-half..half))
}

/// Random nodal curve with markers in the unit box; x = 0 when `massless`.
pub fn random_curve(rng: &mut impl Rng, k: usize, massless: bool) -> IntersectionTable {
    loop {
        let pairs: Vec<(f64, C64)> = (0..k)
            .map(|_| {
                let x = if massless { 0.0 } else { rng.random_range(-1.0..1.0) };
                (x, complex_in_box(rng, 1.0))
            })
            .collect();
        let Ok(spec) = CurveSpec::from_pairs(&pairs) else { continue };
        let Ok(table) = validate_curve(&spec) else { continue };
        // keep nodes in a well-conditioned annulus
        if table.nodes().iter().all(|a| (1e-2..1e2).contains(&a.norm())) {
            return table;
        }
    }
}

/// Nonzero complex number with log-modulus in [−1, 1] and uniform phase.
pub fn random_unit_scale(rng: &mut impl Rng) -> C64 {
    C64::from_polar(rng.random_range(-1.0f64..1.0).exp(), rng.random_range(0.0..std::f64::consts::TAU))
}

/// Independent random (λ_ij, μ_ij).
pub fn random_gluing(rng: &mut impl Rng, k: usize) -> Gluing {
    Gluing::new(
        k,
        (0..num_pairs(k)).map(|_| (random_unit_scale(rng), random_unit_scale(rng))).collect(),
    )
    .expect("length")
}

pub fn random_ratios(rng: &mut impl Rng, k: usize) -> Vec<C64> {
    (0..num_pairs(k)).map(|_| random_unit_scale(rng)).collect()
}

/// Ratios with λ_ij = conj(λ_ji).
pub fn random_real_ratios(rng: &mut impl Rng, k: usize) -> Vec<C64> {
    let mut r = vec![C64::from(1.0); num_pairs(k)];
    for (i, j) in ordered_pairs(k).filter(|&(i, j)| i < j) {
        let v = random_unit_scale(rng);
        r[pair_index(k, i, j)] = v;
        r[pair_index(k, j, i)] = v.conj();
    }
    r
}

/// Positive definite point: a random real point flowed (by at most t = 4, so
/// the ratios stay well-conditioned) until the verdict is positive and
/// θ_{1,0} is well away from zero compared with its value at the origin, with
/// bounded second log-derivative.
pub fn random_definite_point(rng: &mut impl Rng, table: &IntersectionTable) -> Result<JacobianPoint> {
    let k = table.k();
    let limit = theta_at_origin(table).norm();
    for _ in 0..200 {
        let start = JacobianPoint::from_ratios(k, &random_real_ratios(rng, k));
        for t0 in [1.0, 1.5, 2.0, 3.0, 4.0] {
            let p = flow_point(table, &start, t0);
            if is_definite(table, &p).verdict != Verdict::Positive {
                continue;
            }
            if theta_det(table, &p.gluing()).norm() <= 1e-3 * limit {
                continue;
            }
            // (log θ)″ ≈ −1/(t − t_pole)² near a pole of the Nahm data
            if theta_flow_jet(table, &p, 0.0).is_ok_and(|j| j.d2log.norm() <= MAX_D2LOG) {
                return Ok(p);
            }
        }
    }
    Err(Error::OnTheta("no definite point found after 200 draws".into()))
}

/// Divisor of multi-degree (n, …, n); each point is ∞ with probability 1/10.
pub fn random_divisor(rng: &mut impl Rng, table: &IntersectionTable, n: usize) -> Divisor {
    let points = (0..table.k())
        .map(|comp| {
            (0..n)
                .map(|_| loop {
                    let z = if rng.random_bool(0.1) {
                        Zeta::Infinity
                    } else {
                        Zeta::Finite(complex_in_box(rng, 2.0))
                    };
                    if check_off_nodes(table, comp, z).is_ok() {
                        break z;
                    }
                })
                .collect()
        })
        .collect();
    Divisor { n, points }
}
