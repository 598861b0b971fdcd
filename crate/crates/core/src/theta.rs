//! Theta function of a reducible nodal curve.
//!
//! A bundle of multi-degree zero is described by matching ratios ρ_ij with
//! Q_j(a_ij) = ρ_ij Q_i(a_ij). The extended theta function is det Ξ, where Ξ
//! encodes the homogeneous matching equations λ_ij Q_i(a_ij) + μ_ij Q_j(a_ij) = 0
//! on polynomials of degree ≤ k − 2. It vanishes exactly when F(k − 2) has a
//! section.

use crate::curve::{num_pairs, ordered_pairs, pair_index, IntersectionTable};
use crate::error::{Error, Result};
use crate::linalg::{det, row_norm_product, trace, CMatrix, C64, ONE, ZERO};
use rayon::prelude::*;

/// Relative threshold for |θ| / (product of row norms of Ξ).
pub const EPS_THETA: f64 = 1e-12;
/// Largest k for which regular subsets are enumerated by brute force.
pub const MAX_ENUM_K: usize = 5;
/// Entrywise relative tolerance for equality of Jacobian points.
pub const POINT_TOL: f64 = 1e-10;

/// Homogeneous gluing data (λ_ij, μ_ij) for every ordered pair, indexed like
/// [`ordered_pairs`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gluing {
    k: usize,
    pairs: Vec<(C64, C64)>,
}

impl Gluing {
    pub fn new(k: usize, pairs: Vec<(C64, C64)>) -> Result<Self> {
        if pairs.len() != num_pairs(k) {
            return Err(Error::InvalidInput(format!(
                "expected {} gluing pairs for k = {}, got {}",
                num_pairs(k),
                k,
                pairs.len()
            )));
        }
        Ok(Gluing { k, pairs })
    }

    /// (λ_ij, μ_ij) = (ρ_ij, −1), so the stored equations read Q_j(a_ij) = ρ_ij Q_i(a_ij).
    pub fn from_matching_ratios(k: usize, ratios: &[C64]) -> Result<Self> {
        Gluing::new(k, ratios.iter().map(|&r| (r, -ONE)).collect())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn pairs(&self) -> &[(C64, C64)] {
        &self.pairs
    }

    pub fn get(&self, i: usize, j: usize) -> (C64, C64) {
        self.pairs[pair_index(self.k, i, j)]
    }

    /// Matching ratios −λ_ij/μ_ij.
    pub fn ratios(&self) -> Vec<C64> {
        self.pairs.iter().map(|&(l, m)| -l / m).collect()
    }

    /// The rescaling action (z_1, …, z_k)·λ_ij = z_i z_j⁻¹ λ_ij.
    pub fn act(&self, z: &[C64]) -> Gluing {
        let pairs = ordered_pairs(self.k)
            .zip(&self.pairs)
            .map(|((i, j), &(l, m))| (l * z[i] / z[j], m))
            .collect();
        Gluing { k: self.k, pairs }
    }

    /// Swap the λ and μ slots.
    pub fn swapped(&self) -> Gluing {
        Gluing {
            k: self.k,
            pairs: self.pairs.iter().map(|&(l, m)| (m, l)).collect(),
        }
    }

    pub fn to_point(&self) -> JacobianPoint {
        JacobianPoint::from_ratios(self.k, &self.ratios())
    }
}

/// Point of Pic⁰ S ≅ (ℂ*)^{(k−1)²}, stored as matching ratios in canonical
/// form ρ_i1 = 1 for i ≠ 1.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianPoint {
    k: usize,
    rho: Vec<C64>,
}

/// Representative of a real point with λ_ij = ε_i ε_j conj(λ_ji).
#[derive(Debug, Clone, PartialEq)]
pub struct RealRepresentative {
    pub ratios: Vec<C64>,
    pub signs: Vec<f64>,
}

impl RealRepresentative {
    pub fn is_untwisted(&self) -> bool {
        self.signs.iter().all(|&s| s > 0.0)
    }
}

impl JacobianPoint {
    /// Canonicalise an arbitrary representative.
    pub fn from_ratios(k: usize, ratios: &[C64]) -> JacobianPoint {
        assert_eq!(ratios.len(), num_pairs(k), "ratio count must be k(k-1)");
        // z_1 = 1, z_i = ρ_i1⁻¹
        let z: Vec<C64> = (0..k)
            .map(|i| if i == 0 { ONE } else { ONE / ratios[pair_index(k, i, 0)] })
            .collect();
        let rho = ordered_pairs(k)
            .zip(ratios)
            .map(|((i, j), &r)| if j == 0 { ONE } else { r * z[i] / z[j] })
            .collect();
        JacobianPoint { k, rho }
    }

    /// The trivial bundle, ρ_ij = 1.
    pub fn trivial(k: usize) -> JacobianPoint {
        JacobianPoint {
            k,
            rho: vec![ONE; num_pairs(k)],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ratios(&self) -> &[C64] {
        &self.rho
    }

    pub fn ratio(&self, i: usize, j: usize) -> C64 {
        self.rho[pair_index(self.k, i, j)]
    }

    pub fn gluing(&self) -> Gluing {
        Gluing::from_matching_ratios(self.k, &self.rho).expect("consistent length")
    }

    /// Largest entrywise relative difference of canonical forms.
    pub fn distance(&self, other: &JacobianPoint) -> f64 {
        self.rho
            .iter()
            .zip(&other.rho)
            .map(|(a, b)| (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &JacobianPoint, tol: f64) -> bool {
        self.k == other.k && self.distance(other) <= tol
    }

    /// The point [conj(ρ_ji)].
    pub fn conjugate_transpose(&self) -> JacobianPoint {
        let k = self.k;
        let r: Vec<C64> = ordered_pairs(k).map(|(i, j)| self.ratio(j, i).conj()).collect();
        JacobianPoint::from_ratios(k, &r)
    }

    /// Reality [ρ_ij] = [conj(ρ_ji)].
    pub fn is_real(&self, tol: f64) -> bool {
        self.approx_eq(&self.conjugate_transpose(), tol)
    }

    /// A representative with λ_ij = ε_i ε_j conj(λ_ji), ε ∈ {±1}, ε_1 = 1.
    /// `None` if the point is not real.
    pub fn real_representative(&self, tol: f64) -> Option<RealRepresentative> {
        if !self.is_real(tol) {
            return None;
        }
        let k = self.k;
        // canonical reality forces ρ_1j ∈ ℝ; |w_j|² = |ρ_1j| balances the pair
        let mut w = vec![1.0; k];
        let mut signs = vec![1.0; k];
        for j in 1..k {
            let r = self.ratio(0, j).re;
            w[j] = r.abs().sqrt();
            signs[j] = if r < 0.0 { -1.0 } else { 1.0 };
        }
        let mut ratios: Vec<C64> = ordered_pairs(k)
            .zip(&self.rho)
            .map(|((i, j), &r)| r * (w[i] / w[j]))
            .collect();
        for i in 0..k {
            for j in i + 1..k {
                let s = signs[i] * signs[j];
                let (p, q) = (pair_index(k, i, j), pair_index(k, j, i));
                let avg = (ratios[p] + ratios[q].conj() * s) * 0.5;
                ratios[p] = avg;
                ratios[q] = avg.conj() * s;
            }
        }
        Some(RealRepresentative { ratios, signs })
    }
}

/// Subset L of the ordered pairs with equal in- and out-degree at every index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RegularSubset {
    pairs: Vec<(usize, usize)>,
}

impl RegularSubset {
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, p: (usize, usize)) -> bool {
        self.pairs.binary_search(&p).is_ok()
    }

    /// L_m = {(m, j) ∈ L} ∪ {(i, m) ∉ L}, in ascending lexicographic order.
    pub fn block(&self, k: usize, m: usize) -> Vec<(usize, usize)> {
        ordered_pairs(k)
            .filter(|&(i, j)| (i == m && self.contains((i, j))) || (j == m && !self.contains((i, j))))
            .collect()
    }
}

fn is_balanced(k: usize, mask: u64) -> bool {
    let mut balance = [0i32; 64];
    for (p, (i, j)) in ordered_pairs(k).enumerate() {
        if mask >> p & 1 == 1 {
            balance[i] += 1;
            balance[j] -= 1;
        }
    }
    balance[..k].iter().all(|&b| b == 0)
}

/// All regular subsets of the ordered pairs, sorted lexicographically.
pub fn enumerate_regular_subsets(k: usize) -> Result<Vec<RegularSubset>> {
    if k > MAX_ENUM_K {
        return Err(Error::SizeLimit { k, limit: MAX_ENUM_K });
    }
    if k < 2 {
        return Err(Error::InvalidInput(format!("k = {k} < 2")));
    }
    let n = num_pairs(k);
    let pairs: Vec<_> = ordered_pairs(k).collect();
    let mut subsets: Vec<RegularSubset> = (0u64..1 << n)
        .into_par_iter()
        .filter(|&mask| is_balanced(k, mask))
        .map(|mask| RegularSubset {
            pairs: (0..n).filter(|p| mask >> p & 1 == 1).map(|p| pairs[p]).collect(),
        })
        .collect();
    subsets.sort();
    Ok(subsets)
}

/// The k(k−1) × k(k−1) matching matrix: row (i,j), column (m,n) holds
/// λ_ij a_ij^n if m = i, μ_ij a_ij^n if m = j.
pub fn build_xi(table: &IntersectionTable, g: &Gluing) -> CMatrix {
    let k = table.k();
    assert_eq!(g.k(), k, "gluing and curve disagree on k");
    xi_with(table, |p, _, _| g.pairs[p])
}

fn xi_with<F: Fn(usize, usize, usize) -> (C64, C64)>(table: &IntersectionTable, entries: F) -> CMatrix {
    let k = table.k();
    let n = num_pairs(k);
    let mut xi = CMatrix::zeros(n, n);
    for (p, (i, j)) in ordered_pairs(k).enumerate() {
        let a = table.a(i, j);
        let (l, m) = entries(p, i, j);
        let mut pow = ONE;
        for deg in 0..k - 1 {
            xi[(p, i * (k - 1) + deg)] = l * pow;
            xi[(p, j * (k - 1) + deg)] = m * pow;
            pow *= a;
        }
    }
    xi
}

/// Matching matrix with per-row substituted entries; used by Λ_F.
pub(crate) fn build_xi_substituted<F: Fn(usize, usize, usize) -> (C64, C64)>(
    table: &IntersectionTable,
    entries: F,
) -> CMatrix {
    xi_with(table, entries)
}

/// ϑ(λ, μ) = det Ξ.
pub fn theta_det(table: &IntersectionTable, g: &Gluing) -> C64 {
    det(&build_xi(table, g))
}

/// θ together with the Hadamard scale used for "is it zero" decisions.
pub fn theta_with_scale(table: &IntersectionTable, g: &Gluing) -> (C64, f64) {
    let xi = build_xi(table, g);
    (det(&xi), row_norm_product(&xi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaTerm {
    pub subset: RegularSubset,
    pub coeff: C64,
}

/// Theta polynomial as a sum over regular subsets:
/// Σ a_L ∏_{L} λ_ij ∏_{P∖L} μ_ij.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaExpansion {
    k: usize,
    terms: Vec<ThetaTerm>,
}

impl ThetaExpansion {
    pub fn terms(&self) -> &[ThetaTerm] {
        &self.terms
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn evaluate(&self, g: &Gluing) -> C64 {
        self.terms
            .iter()
            .map(|t| {
                ordered_pairs(self.k).zip(g.pairs()).fold(t.coeff, |acc, (p, &(l, m))| {
                    acc * if t.subset.contains(p) { l } else { m }
                })
            })
            .sum()
    }
}

/// Vandermonde determinant ∏_{p<q} (x_q − x_p).
fn vandermonde(xs: &[C64]) -> C64 {
    let mut v = ONE;
    for q in 0..xs.len() {
        for p in 0..q {
            v *= xs[q] - xs[p];
        }
    }
    v
}

fn permutation_sign(perm: &[usize]) -> f64 {
    let mut inversions = 0usize;
    for a in 0..perm.len() {
        for b in a + 1..perm.len() {
            if perm[a] > perm[b] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Coefficients a_L = (−1)^s ∏_m V(L_m) for all regular L.
pub fn theta_expansion(table: &IntersectionTable) -> Result<ThetaExpansion> {
    let k = table.k();
    let subsets = enumerate_regular_subsets(k)?;
    let terms = subsets
        .into_par_iter()
        .map(|subset| {
            let mut order = Vec::with_capacity(num_pairs(k));
            let mut coeff = ONE;
            for m in 0..k {
                let block = subset.block(k, m);
                let xs: Vec<C64> = block.iter().map(|&(i, j)| table.a(i, j)).collect();
                coeff *= vandermonde(&xs);
                order.extend(block.iter().map(|&(i, j)| pair_index(k, i, j)));
            }
            ThetaTerm {
                subset,
                coeff: coeff * permutation_sign(&order),
            }
        })
        .collect();
    Ok(ThetaExpansion { k, terms })
}

/// Gluing (ρ^p, −ρ^q) from matching ratios.
pub fn pq_gluing(k: usize, ratios: &[C64], p: i32, q: i32) -> Gluing {
    Gluing::new(k, ratios.iter().map(|&r| (r.powi(p), -r.powi(q))).collect()).expect("length")
}

/// θ_{p,q}: ϑ evaluated at (λ, μ) = (ρ^p, −ρ^q). Invariant under rescaling.
pub fn theta_pq(table: &IntersectionTable, pt: &JacobianPoint, p: i32, q: i32) -> C64 {
    theta_det(table, &pq_gluing(pt.k(), pt.ratios(), p, q))
}

/// θ_{1,0} on the flowed ratios e^{−r_ij t} ρ_ij and its log-derivatives in t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaJet {
    pub theta: C64,
    pub dlog: C64,
    pub d2log: C64,
    /// |θ| / (product of row norms of Ξ)
    pub relative_size: f64,
}

pub fn flowed_ratios(table: &IntersectionTable, ratios: &[C64], t: f64) -> Vec<C64> {
    ratios
        .iter()
        .zip(table.distances())
        .map(|(&r, &d)| r * (-d * t).exp())
        .collect()
}

/// Analytic d/dt and d²/dt² of log θ_{1,0} along ρ_ij(t) = e^{−r_ij t} ρ_ij:
/// tr(Ξ⁻¹Ξ′) and tr(Ξ⁻¹Ξ″) − tr((Ξ⁻¹Ξ′)²).
pub fn theta_flow_jet(table: &IntersectionTable, pt: &JacobianPoint, t: f64) -> Result<ThetaJet> {
    let k = table.k();
    let rho = flowed_ratios(table, pt.ratios(), t);
    let xi = build_xi(table, &Gluing::from_matching_ratios(k, &rho)?);
    let theta = det(&xi);
    let scale = row_norm_product(&xi);
    let relative_size = theta.norm() / scale;
    if relative_size <= EPS_THETA {
        return Err(Error::NearTheta { t, ratio: relative_size });
    }
    let n = num_pairs(k);
    let mut d1 = CMatrix::zeros(n, n);
    let mut d2 = CMatrix::zeros(n, n);
    for (p, (i, _)) in ordered_pairs(k).enumerate() {
        let r = table.distances()[p];
        for deg in 0..k - 1 {
            let col = i * (k - 1) + deg;
            d1[(p, col)] = xi[(p, col)] * (-r);
            d2[(p, col)] = xi[(p, col)] * (r * r);
        }
    }
    let lu = xi.lu();
    let b1 = lu.solve(&d1).ok_or(Error::NearTheta { t, ratio: relative_size })?;
    let b2 = lu.solve(&d2).ok_or(Error::NearTheta { t, ratio: relative_size })?;
    let dlog = trace(&b1);
    let d2log = trace(&b2) - trace(&(&b1 * &b1));
    Ok(ThetaJet {
        theta,
        dlog,
        d2log,
        relative_size,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivOrder {
    First,
    Second,
}

/// Single log-derivative of θ_{1,0} along the flow.
pub fn theta_flow_logderiv(table: &IntersectionTable, pt: &JacobianPoint, t: f64, order: DerivOrder) -> Result<C64> {
    let jet = theta_flow_jet(table, pt, t)?;
    Ok(match order {
        DerivOrder::First => jet.dlog,
        DerivOrder::Second => jet.d2log,
    })
}

/// θ_{1,0} along the flow without the near-Θ guard.
pub fn theta_on_flow(table: &IntersectionTable, pt: &JacobianPoint, t: f64) -> C64 {
    let rho = flowed_ratios(table, pt.ratios(), t);
    theta_det(table, &Gluing::from_matching_ratios(table.k(), &rho).expect("length"))
}

/// Value of θ_{1,0} at the boundary point [0] of the Jacobian: the μ-only term.
pub fn theta_at_origin(table: &IntersectionTable) -> C64 {
    let k = table.k();
    let g = Gluing::new(k, vec![(ZERO, -ONE); num_pairs(k)]).expect("length");
    theta_det(table, &g)
}
