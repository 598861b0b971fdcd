//! Sections of F(k−1) as k-tuples of polynomials, the Abel map, Λ_F, the
//! hermitian form on sections and the definiteness test.

use std::collections::BTreeMap;

use crate::curve::{num_pairs, ordered_pairs, CurvePoint, IntersectionTable, Zeta};
use crate::error::{Error, Result};
use crate::frames::SectionFrame;
use crate::linalg::{det, null_vector, row_norm_product, CMatrix, C64, ONE, ZERO};
use crate::poly::Poly;
use crate::theta::{build_xi_substituted, Gluing, JacobianPoint, EPS_THETA, POINT_TOL};

/// Relative distance below which a ζ-value is considered to sit on a node.
pub const NODE_TOL: f64 = 1e-10;
/// Second-smallest relative singular value below which a section is not unique.
pub const EPS_NULLITY: f64 = 1e-10;
/// Degree-exactness threshold for the leading coefficient.
pub const EPS_LEAD: f64 = 1e-10;

/// Effective divisor of multi-degree (n, …, n): `points[i]` lists the
/// ζ-coordinates of its points on component i.
#[derive(Debug, Clone, PartialEq)]
pub struct Divisor {
    pub n: usize,
    pub points: Vec<Vec<Zeta>>,
}

impl Divisor {
    pub fn empty(k: usize) -> Divisor {
        Divisor {
            n: 0,
            points: vec![Vec::new(); k],
        }
    }

    pub fn new(points: Vec<Vec<Zeta>>) -> Result<Divisor> {
        let n = points.first().map_or(0, Vec::len);
        if let Some(bad) = points.iter().position(|p| p.len() != n) {
            return Err(Error::InvalidInput(format!(
                "divisor is not of multi-degree ({n},…,{n}): component {} has {} points",
                bad + 1,
                points[bad].len()
            )));
        }
        Ok(Divisor { n, points })
    }

    pub fn check(&self, table: &IntersectionTable) -> Result<()> {
        if self.points.len() != table.k() {
            return Err(Error::InvalidInput(format!(
                "divisor has {} components, curve has {}",
                self.points.len(),
                table.k()
            )));
        }
        for (comp, pts) in self.points.iter().enumerate() {
            for &z in pts {
                check_off_nodes(table, comp, z)?;
            }
        }
        Ok(())
    }
}

fn near(a: C64, b: C64) -> bool {
    (a - b).norm() <= NODE_TOL * b.norm().max(1.0)
}

/// Reject a point of component `comp` lying over one of its nodes.
pub fn check_off_nodes(table: &IntersectionTable, comp: usize, zeta: Zeta) -> Result<()> {
    let Zeta::Finite(z) = zeta else {
        return Ok(());
    };
    for other in (0..table.k()).filter(|&o| o != comp) {
        for (i, j) in [(comp, other), (other, comp)] {
            if near(z, table.a(i, j)) {
                return Err(Error::PointAtNode {
                    component: comp + 1,
                    i: i + 1,
                    j: j + 1,
                });
            }
        }
    }
    Ok(())
}

/// ρ_ij = ∏_m (a_ij − x_j^m) / ∏_m (a_ij − x_i^m), with factors at ∞ omitted.
pub fn abel_map(table: &IntersectionTable, d: &Divisor) -> Result<JacobianPoint> {
    d.check(table)?;
    let k = table.k();
    let factor = |a: C64, pts: &[Zeta]| -> C64 {
        pts.iter()
            .filter_map(|z| z.finite())
            .fold(ONE, |acc, x| acc * (a - x))
    };
    let ratios: Vec<C64> = ordered_pairs(k)
        .map(|(i, j)| {
            let a = table.a(i, j);
            factor(a, &d.points[j]) / factor(a, &d.points[i])
        })
        .collect();
    Ok(JacobianPoint::from_ratios(k, &ratios))
}

/// Components Q_1..Q_k, each with k coefficients (degree ≤ k − 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub q: Vec<Poly>,
}

impl Section {
    pub fn k(&self) -> usize {
        self.q.len()
    }

    pub fn scale(&self, s: C64) -> Section {
        Section {
            q: self.q.iter().map(|p| p.scale(s)).collect(),
        }
    }

    /// max |λ_ij Q_i(a_ij) + μ_ij Q_j(a_ij)| relative to the largest term.
    pub fn matching_residual(&self, table: &IntersectionTable, g: &Gluing) -> f64 {
        let mut worst = 0.0_f64;
        let mut scale = f64::MIN_POSITIVE;
        for (i, j) in ordered_pairs(table.k()) {
            let a = table.a(i, j);
            let (l, m) = g.get(i, j);
            let (u, v) = (l * self.q[i].eval(a), m * self.q[j].eval(a));
            worst = worst.max((u + v).norm());
            scale = scale.max(u.norm() + v.norm());
        }
        worst / scale
    }

    /// Value of Q_j at a point of component j; ∞ reads the leading coefficient.
    pub fn value_at(&self, comp: usize, zeta: Zeta) -> C64 {
        match zeta {
            Zeta::Finite(z) => self.q[comp].eval(z),
            Zeta::Infinity => self.q[comp].lead(),
        }
    }
}

fn substituted_entries(g: &Gluing, u: &[Zeta], p: usize, i: usize, j: usize, a: C64) -> (C64, C64) {
    let (l, m) = g.pairs()[p];
    let s = match u[i] {
        Zeta::Finite(x) => l * (a - x),
        Zeta::Infinity => l,
    };
    let t = match u[j] {
        Zeta::Finite(x) => m * (a - x),
        Zeta::Infinity => m,
    };
    (s, t)
}

/// Substituted matching matrix whose determinant is Λ_F(u).
fn lambda_matrix(table: &IntersectionTable, g: &Gluing, u: &[Zeta]) -> CMatrix {
    build_xi_substituted(table, |p, i, j| substituted_entries(g, u, p, i, j, table.a(i, j)))
}

/// Λ_F(u_1, …, u_k) = ϑ(s_ij(u_i), t_ij(u_j)).
pub fn lambda_f(table: &IntersectionTable, g: &Gluing, u: &[Zeta]) -> C64 {
    assert_eq!(u.len(), table.k(), "one slot per component");
    det(&lambda_matrix(table, g, u))
}

/// Λ_F with slot `l` free, as a polynomial of degree ≤ k − 1.
pub fn lambda_f_slot(table: &IntersectionTable, g: &Gluing, l: usize, base: &[Zeta]) -> Poly {
    let mut u = base.to_vec();
    Poly::interpolate_on_circle(table.k(), 1.0, |z| {
        u[l] = Zeta::Finite(z);
        lambda_f(table, g, &u)
    })
}

/// Matching rows λ_ij Q_i(a_ij) + μ_ij Q_j(a_ij) = 0 followed by one
/// evaluation row per vanishing constraint; rows scaled to unit norm.
fn section_system(table: &IntersectionTable, g: &Gluing, vanish: &[(usize, Zeta)]) -> CMatrix {
    let k = table.k();
    let rows = num_pairs(k) + vanish.len();
    let mut m = CMatrix::zeros(rows, k * k);
    for (p, (i, j)) in ordered_pairs(k).enumerate() {
        let a = table.a(i, j);
        let (l, mu) = g.pairs()[p];
        let mut pow = ONE;
        for n in 0..k {
            m[(p, i * k + n)] = l * pow;
            m[(p, j * k + n)] = mu * pow;
            pow *= a;
        }
    }
    for (r, &(comp, zeta)) in vanish.iter().enumerate() {
        let row = num_pairs(k) + r;
        match zeta {
            Zeta::Infinity => m[(row, comp * k + k - 1)] = ONE,
            Zeta::Finite(z) => {
                let mut pow = ONE;
                for n in 0..k {
                    m[(row, comp * k + n)] = pow;
                    pow *= z;
                }
            }
        }
    }
    for mut row in m.row_iter_mut() {
        let nrm = row.norm();
        if nrm > 0.0 {
            row /= C64::from(nrm);
        }
    }
    m
}

/// Unique (up to scale) section of F(k−1) vanishing at the given points.
fn solve_section(table: &IntersectionTable, g: &Gluing, vanish: &[(usize, Zeta)], label: &str) -> Result<Section> {
    let k = table.k();
    let (v, _, second) = null_vector(&section_system(table, g, vanish));
    if second < EPS_NULLITY {
        return Err(Error::OnTheta(format!(
            "{label}: solution space has dimension > 1 (second singular value {second:e})"
        )));
    }
    Ok(Section {
        q: v.chunks(k).map(|c| Poly::new(c.to_vec())).collect(),
    })
}

/// Section with component l equal to Λ_F(base with slot l free), vanishing at
/// base_j on every other component j.
pub fn section_vanishing_at(table: &IntersectionTable, g: &Gluing, l: usize, base: &[CurvePoint]) -> Result<Section> {
    let k = table.k();
    if base.len() != k || base.iter().enumerate().any(|(j, p)| p.component != j) {
        return Err(Error::InvalidInput(
            "base must contain one point per component, in component order".into(),
        ));
    }
    for p in base {
        check_off_nodes(table, p.component, p.zeta)?;
    }
    let u: Vec<Zeta> = base.iter().map(|p| p.zeta).collect();
    let pivot_matrix = lambda_matrix(table, g, &u);
    let pivot = det(&pivot_matrix);
    let scale = row_norm_product(&pivot_matrix);
    if pivot.norm() <= EPS_THETA * scale {
        return Err(Error::OnTheta(format!(
            "Lambda_F at the base points is {:e} relative to its scale",
            pivot.norm() / scale
        )));
    }
    let target = lambda_f_slot(table, g, l, &u);
    let vanish: Vec<(usize, Zeta)> = (0..k).filter(|&j| j != l).map(|j| (j, u[j])).collect();
    let s = solve_section(table, g, &vanish, "section through base points")?;
    // least-squares multiple fitting component l to Λ_F
    let num: C64 = s.q[l].coeffs.iter().zip(&target.coeffs).map(|(a, b)| a.conj() * b).sum();
    let den: f64 = s.q[l].coeffs.iter().map(|a| a.norm_sqr()).sum();
    let s = s.scale(num / den);
    let mismatch = s.q[l]
        .coeffs
        .iter()
        .zip(&target.coeffs)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / target.max_coeff().max(f64::MIN_POSITIVE);
    if mismatch > 1e-6 {
        return Err(Error::OnTheta(format!(
            "component {} disagrees with Lambda_F (relative mismatch {mismatch:e})",
            l + 1
        )));
    }
    Ok(s)
}

/// Vanishing pattern of the l-th distinguished section: ∞ on components
/// before l, 0 on components after l.
pub fn distinguished_pattern(k: usize, l: usize) -> Vec<Zeta> {
    (0..k)
        .map(|j| if j < l { Zeta::Infinity } else { Zeta::Finite(ZERO) })
        .collect()
}

/// The k distinguished sections s_l of F(k−1) for a real point, in its real
/// representative gauge, unnormalised.
pub fn distinguished_sections(table: &IntersectionTable, pt: &JacobianPoint) -> Result<SectionFrame> {
    let k = table.k();
    let rep = pt.real_representative(POINT_TOL).ok_or(Error::NotReal)?;
    let g = Gluing::from_matching_ratios(k, &rep.ratios)?;
    let mut q = vec![Vec::with_capacity(k); k];
    for l in 0..k {
        let pattern = distinguished_pattern(k, l);
        let vanish: Vec<(usize, Zeta)> = (0..k).filter(|&j| j != l).map(|j| (j, pattern[j])).collect();
        let s = solve_section(table, &g, &vanish, &format!("distinguished section {}", l + 1))?;
        for (i, p) in s.q.into_iter().enumerate() {
            q[i].push(p);
        }
    }
    Ok(SectionFrame::new(rep.ratios, rep.signs, q))
}

fn fibre_check(table: &IntersectionTable, z0: C64) -> Result<()> {
    for (i, j) in ordered_pairs(table.k()) {
        if (z0 - table.a(i, j)).norm() < NODE_TOL {
            return Err(Error::FibreCollision { i: i + 1, j: j + 1 });
        }
    }
    Ok(())
}

/// ⟨s, s′⟩ = Σ_i ε_i P_i(ζ₀) R̃_i(ζ₀) / ∏_{j≠i}(η_i(ζ₀) − η_j(ζ₀)) where
/// R̃(ζ) = (−1)^{k−1} ζ^{k−1} conj(R(−1/conj ζ)); at ζ₀ = 0 this reads
/// Σ_i ε_i P_i(0) conj(lead R_i) / ∏_{j≠i}(z_i − z_j).
pub fn hermitian_pair_signed(
    table: &IntersectionTable,
    signs: &[f64],
    s: &Section,
    s2: &Section,
    z0: C64,
) -> Result<C64> {
    fibre_check(table, z0)?;
    let spec = table.spec();
    let k = table.k();
    let etas: Vec<C64> = (0..k).map(|i| spec.eta_at(i, z0)).collect();
    let mut total = ZERO;
    for i in 0..k {
        let den: C64 = (0..k).filter(|&j| j != i).map(|j| etas[i] - etas[j]).product();
        total += s.q[i].eval(z0) * s2.q[i].reflect().eval(z0) * signs[i] / den;
    }
    Ok(total)
}

pub fn hermitian_pair(table: &IntersectionTable, s: &Section, s2: &Section, z0: C64) -> Result<C64> {
    hermitian_pair_signed(table, &vec![1.0; table.k()], s, s2, z0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Positive,
    Negative,
    Indefinite,
    OnTheta,
    NotReal,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Positive => "positive",
            Verdict::Negative => "negative",
            Verdict::Indefinite => "indefinite",
            Verdict::OnTheta => "on_theta",
            Verdict::NotReal => "not_real",
        }
    }
}

/// Outcome of the definiteness test with the per-l sign quantities
/// ε_l Q_l(0) conj(lead Q_l) / ∏_{j≠l}(z_l − z_j).
#[derive(Debug, Clone, PartialEq)]
pub struct DefiniteReport {
    pub verdict: Verdict,
    pub quantities: Vec<C64>,
}

pub fn is_definite(table: &IntersectionTable, pt: &JacobianPoint) -> DefiniteReport {
    let k = table.k();
    let Some(rep) = pt.real_representative(POINT_TOL) else {
        return DefiniteReport {
            verdict: Verdict::NotReal,
            quantities: Vec::new(),
        };
    };
    let g = Gluing::from_matching_ratios(k, &rep.ratios).expect("length");
    let spec = table.spec();
    let mut quantities = Vec::with_capacity(k);
    let mut exact = true;
    for l in 0..k {
        let q = lambda_f_slot(table, &g, l, &distinguished_pattern(k, l));
        let max = q.max_coeff();
        if q.lead().norm() <= EPS_LEAD * max || q.coeffs[0].norm() <= EPS_LEAD * max {
            exact = false;
        }
        let den: C64 = (0..k).filter(|&j| j != l).map(|j| spec.z(l) - spec.z(j)).product();
        quantities.push(q.coeffs[0] * q.lead().conj() * rep.signs[l] / den);
    }
    let verdict = if !exact {
        Verdict::OnTheta
    } else if quantities.iter().all(|v| v.re > 0.0) {
        Verdict::Positive
    } else if quantities.iter().all(|v| v.re < 0.0) {
        Verdict::Negative
    } else {
        Verdict::Indefinite
    };
    DefiniteReport { verdict, quantities }
}

/// Coefficients d_{n,i} of the cocycle q(ζ, η) = Σ_i (η/ζ)^i Σ_n d_{n,i} ζ^n,
/// with 0 < i ≤ k − 1 and |n| ≤ i − 1.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CocycleData {
    pub d: BTreeMap<(i32, usize), C64>,
}

impl CocycleData {
    pub fn check(&self, k: usize) -> Result<()> {
        for &(n, i) in self.d.keys() {
            if i == 0 || i >= k || n.unsigned_abs() as usize >= i {
                return Err(Error::InvalidInput(format!(
                    "cocycle index [n={n}, i={i}] outside 0 < i <= {}, |n| <= i - 1",
                    k - 1
                )));
            }
        }
        Ok(())
    }

    fn get(&self, n: i32, i: usize) -> C64 {
        self.d.get(&(n, i)).copied().unwrap_or(ZERO)
    }

    /// conj(d_{n,i}) = (−1)^n d_{−n,i} for every stored coefficient.
    pub fn is_real(&self, tol: f64) -> bool {
        self.d.iter().all(|(&(n, i), &v)| {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            (v.conj() - self.get(-n, i) * sign).norm() <= tol * v.norm().max(1.0)
        })
    }
}

/// Laurent coefficients of q restricted to component m, keyed by power of ζ.
fn cocycle_on_component(table: &IntersectionTable, c: &CocycleData, m: usize) -> BTreeMap<i32, C64> {
    let spec = table.spec();
    let eta = [spec.z(m), C64::from(2.0 * spec.x(m)), -spec.z(m).conj()];
    let mut out = BTreeMap::new();
    for (&(n, i), &d) in &c.d {
        let mut pow = vec![ONE];
        for _ in 0..i {
            let mut next = vec![ZERO; pow.len() + 2];
            for (a, &pa) in pow.iter().enumerate() {
                for (b, &eb) in eta.iter().enumerate() {
                    next[a + b] += pa * eb;
                }
            }
            pow = next;
        }
        for (deg, &cf) in pow.iter().enumerate() {
            *out.entry(deg as i32 - i as i32 + n).or_insert(ZERO) += d * cf;
        }
    }
    out
}

fn q_plus(laurent: &BTreeMap<i32, C64>, z: C64) -> C64 {
    laurent
        .iter()
        .map(|(&p, &cf)| match p {
            0 => cf * 0.5,
            p if p > 0 => cf * z.powi(p),
            _ => ZERO,
        })
        .sum()
}

/// ρ_ij = exp(q_+^j(a_ij) − q_+^i(a_ij)), constant term split evenly.
pub fn cocycle_to_point(table: &IntersectionTable, c: &CocycleData) -> Result<JacobianPoint> {
    let k = table.k();
    c.check(k)?;
    let laurent: Vec<_> = (0..k).map(|m| cocycle_on_component(table, c, m)).collect();
    let ratios: Vec<C64> = ordered_pairs(k)
        .map(|(i, j)| {
            let a = table.a(i, j);
            (q_plus(&laurent[j], a) - q_plus(&laurent[i], a)).exp()
        })
        .collect();
    Ok(JacobianPoint::from_ratios(k, &ratios))
}
