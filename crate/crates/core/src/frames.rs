//! Unitary frames of sections and the matricial polynomials they define,
//! A(ζ) = Q(ζ)⁻¹ diag(η_i(ζ)) Q(ζ).

use crate::curve::{ordered_pairs, IntersectionTable};
use crate::error::{Error, Result};
use crate::linalg::{c, char_poly, condition_number, max_abs, poly_from_roots, rel_coeff_diff, CMatrix, C64, ONE, ZERO};
use crate::poly::Poly;
use crate::sections::{distinguished_sections, hermitian_pair_signed, is_definite, Section, Verdict};
use crate::theta::{Gluing, JacobianPoint};

/// Condition number above which Q(ζ) counts as singular.
pub const MAX_COND: f64 = 1e10;
/// Relative tolerance of the quadraticity check.
pub const QUAD_TOL: f64 = 1e-8;
/// Minimum distance from a node for sample points.
const SAMPLE_CLEARANCE: f64 = 1e-2;

/// k × k array of polynomials: rows are components, columns are sections.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionFrame {
    /// Matching ratios of the gauge the sections are written in.
    pub ratios: Vec<C64>,
    /// Signs ε_i of the real structure on that gauge.
    pub signs: Vec<f64>,
    pub q: Vec<Vec<Poly>>,
}

impl SectionFrame {
    pub fn new(ratios: Vec<C64>, signs: Vec<f64>, q: Vec<Vec<Poly>>) -> Self {
        SectionFrame { ratios, signs, q }
    }

    pub fn k(&self) -> usize {
        self.q.len()
    }

    pub fn column(&self, l: usize) -> Section {
        Section {
            q: self.q.iter().map(|row| row[l].clone()).collect(),
        }
    }

    pub fn gluing(&self) -> Gluing {
        Gluing::from_matching_ratios(self.k(), &self.ratios).expect("length")
    }

    fn scale_column(&mut self, l: usize, s: C64) {
        for row in self.q.iter_mut() {
            row[l] = row[l].scale(s);
        }
    }

    /// Q(ζ) with entries Q_il(ζ).
    pub fn evaluate(&self, z: C64) -> CMatrix {
        let k = self.k();
        CMatrix::from_fn(k, k, |i, l| self.q[i][l].eval(z))
    }

    /// σ(Q)(ζ), with σ(Q)_{ij} = (−1)^{k−1} ζ^{k−1} conj(Q_ji(−1/conj ζ)).
    pub fn sigma(&self, z: C64) -> CMatrix {
        let k = self.k();
        CMatrix::from_fn(k, k, |i, j| self.q[j][i].reflect().eval(z))
    }

    /// Right action of a constant matrix on the columns.
    pub fn mix_columns(&self, u: &CMatrix) -> SectionFrame {
        let k = self.k();
        let q = (0..k)
            .map(|i| {
                (0..k)
                    .map(|l| {
                        let coeffs = (0..k)
                            .map(|n| (0..k).map(|s| self.q[i][s].coeffs[n] * u[(s, l)]).sum())
                            .collect();
                        Poly::new(coeffs)
                    })
                    .collect()
            })
            .collect();
        SectionFrame::new(self.ratios.clone(), self.signs.clone(), q)
    }

    pub fn gram(&self, table: &IntersectionTable, z0: C64) -> Result<CMatrix> {
        let k = self.k();
        let cols: Vec<Section> = (0..k).map(|l| self.column(l)).collect();
        let mut g = CMatrix::zeros(k, k);
        for l in 0..k {
            for m in 0..k {
                g[(l, m)] = hermitian_pair_signed(table, &self.signs, &cols[l], &cols[m], z0)?;
            }
        }
        Ok(g)
    }
}

/// Distinguished sections scaled to unit norm with lead(Q_ll) real positive.
pub fn unitary_frame(table: &IntersectionTable, pt: &JacobianPoint) -> Result<SectionFrame> {
    let report = is_definite(table, pt);
    match report.verdict {
        Verdict::Positive => {}
        Verdict::NotReal => return Err(Error::NotReal),
        Verdict::OnTheta => return Err(Error::OnTheta("leading or constant coefficient vanishes".into())),
        v => return Err(Error::NotPositive(format!("verdict {}", v.as_str()))),
    }
    let mut frame = distinguished_sections(table, pt)?;
    for l in 0..frame.k() {
        let s = frame.column(l);
        let n = hermitian_pair_signed(table, &frame.signs, &s, &s, ZERO)?;
        if n.re <= 0.0 || n.im.abs() > 1e-8 * n.norm() {
            return Err(Error::NotPositive(format!("section {} has norm {n}", l + 1)));
        }
        let lead = frame.q[l][l].lead();
        if lead.norm() == 0.0 {
            return Err(Error::OnTheta(format!("section {} vanishes at infinity on its own component", l + 1)));
        }
        frame.scale_column(l, lead.conj() / lead.norm() / n.re.sqrt());
    }
    Ok(frame)
}

/// A(ζ) = A₀ + A₁ζ + A₂ζ².
#[derive(Debug, Clone, PartialEq)]
pub struct MatricialPolynomial {
    pub a0: CMatrix,
    pub a1: CMatrix,
    pub a2: CMatrix,
}

impl MatricialPolynomial {
    pub fn eval(&self, z: C64) -> CMatrix {
        &self.a0 + &self.a1 * z + &self.a2 * (z * z)
    }

    pub fn k(&self) -> usize {
        self.a0.nrows()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.a0).max(max_abs(&self.a1)).max(max_abs(&self.a2))
    }

    /// T₁ = A₁/2i, T₂ = (A₀ + A₂)/2, T₃ = (A₀ − A₂)/2i.
    pub fn nahm_triple(&self) -> [CMatrix; 3] {
        let two_i = c(0.0, 2.0);
        [
            &self.a1 / two_i,
            (&self.a0 + &self.a2) * c(0.5, 0.0),
            (&self.a0 - &self.a2) / two_i,
        ]
    }

    /// Inverse of [`nahm_triple`]: A₀ = T₂ + iT₃, A₁ = 2iT₁, A₂ = T₂ − iT₃.
    pub fn from_nahm(t: &[CMatrix; 3]) -> MatricialPolynomial {
        let i = c(0.0, 1.0);
        MatricialPolynomial {
            a0: &t[1] + &t[2] * i,
            a1: &t[0] * c(0.0, 2.0),
            a2: &t[1] - &t[2] * i,
        }
    }

    /// Coefficients of det(η − A(ζ)), lowest degree first.
    pub fn spectral_coefficients(&self, z: C64) -> Vec<C64> {
        char_poly(&self.eval(z))
    }
}

fn clear_of_nodes(table: &IntersectionTable, z: C64) -> bool {
    table
        .nodes()
        .iter()
        .all(|a| (z - a).norm() > SAMPLE_CLEARANCE * a.norm().max(1.0))
}

/// Deterministic spiral of sample points avoiding the nodes.
pub fn sample_points(table: &IntersectionTable, count: usize) -> Vec<C64> {
    (0..)
        .map(|m: usize| C64::from_polar(0.35 + 0.15 * m as f64, 2.399963 * m as f64 + 0.3))
        .filter(|&z| clear_of_nodes(table, z))
        .take(count)
        .collect()
}

fn a_at(table: &IntersectionTable, frame: &SectionFrame, z: C64) -> Result<CMatrix> {
    let spec = table.spec();
    let chi = frame.evaluate(z);
    let cond = condition_number(&chi);
    if cond > MAX_COND || !cond.is_finite() {
        return Err(Error::SingularEvaluation { zeta: format!("{z}"), cond });
    }
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(frame.k(), |i, _| spec.eta_at(i, z)));
    let inv = chi.clone().try_inverse().ok_or(Error::SingularEvaluation {
        zeta: format!("{z}"),
        cond: f64::INFINITY,
    })?;
    Ok(inv * d * chi)
}

/// Recover A₀, A₁, A₂ from evaluations at 0 and ±s, then confirm at two more points.
pub fn polynomial_from_frame(table: &IntersectionTable, frame: &SectionFrame) -> Result<MatricialPolynomial> {
    let candidates = [ONE, c(0.0, 1.0), c(0.37, 0.21), c(0.6, -0.45), c(-0.23, 0.81)];
    let s = candidates
        .iter()
        .copied()
        .find(|&s| clear_of_nodes(table, s) && clear_of_nodes(table, -s))
        .ok_or_else(|| Error::SingularEvaluation {
            zeta: "all sample candidates".into(),
            cond: f64::INFINITY,
        })?;
    let a0 = a_at(table, frame, ZERO)?;
    let ap = a_at(table, frame, s)?;
    let am = a_at(table, frame, -s)?;
    let a1 = (&ap - &am) / (s * 2.0);
    let a2 = ((&ap + &am) * c(0.5, 0.0) - &a0) / (s * s);
    let poly = MatricialPolynomial { a0, a1, a2 };
    let scale = poly.max_abs().max(f64::MIN_POSITIVE);
    for z in [c(0.8, -0.5), c(-0.55, -0.9), c(1.3, 0.4)].into_iter().filter(|&z| clear_of_nodes(table, z)).take(2) {
        let residual = max_abs(&(a_at(table, frame, z)? - poly.eval(z))) / scale;
        if residual > QUAD_TOL {
            return Err(Error::QuadraticityFailure { residual });
        }
    }
    Ok(poly)
}

/// Residuals of the frame-level identities.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameReport {
    /// max ‖σ(Q)DQ − 1‖ over samples
    pub unitarity: f64,
    /// ‖A₂ + A₀*‖
    pub reality_a2: f64,
    /// ‖A₁ − A₁*‖
    pub reality_a1: f64,
    /// strict lower part of A(0)
    pub lower_a0: f64,
    /// strict upper part of A₂
    pub upper_a2: f64,
    /// max |A(0)_ii − z_i|
    pub diagonal_a0: f64,
    /// relative char-poly coefficient mismatch over samples
    pub char_poly: f64,
    /// worst column matching residual
    pub matching: f64,
}

impl FrameReport {
    pub fn worst(&self) -> f64 {
        [
            self.unitarity,
            self.reality_a2,
            self.reality_a1,
            self.lower_a0,
            self.upper_a2,
            self.diagonal_a0,
            self.char_poly,
            self.matching,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.worst() < tol
    }
}

/// σ(Q) D Q at ζ with D = diag(ε_i / ∏_{j≠i}(η_i − η_j)).
pub fn unitarity_matrix(table: &IntersectionTable, frame: &SectionFrame, z: C64) -> CMatrix {
    let spec = table.spec();
    let k = frame.k();
    let etas: Vec<C64> = (0..k).map(|i| spec.eta_at(i, z)).collect();
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(k, |i, _| {
        let den: C64 = (0..k).filter(|&j| j != i).map(|j| etas[i] - etas[j]).product();
        C64::from(frame.signs[i]) / den
    }));
    frame.sigma(z) * d * frame.evaluate(z)
}

pub fn frame_checks(table: &IntersectionTable, frame: &SectionFrame, poly: &MatricialPolynomial) -> FrameReport {
    let spec = table.spec();
    let k = frame.k();
    let samples = sample_points(table, 10);
    let id = CMatrix::identity(k, k);
    let unitarity = samples
        .iter()
        .map(|&z| max_abs(&(unitarity_matrix(table, frame, z) - &id)))
        .fold(0.0, f64::max);
    let scale = poly.max_abs().max(1.0);
    let mut lower_a0 = 0.0_f64;
    let mut upper_a2 = 0.0_f64;
    for i in 0..k {
        for j in 0..k {
            if i > j {
                lower_a0 = lower_a0.max(poly.a0[(i, j)].norm());
            } else if i < j {
                upper_a2 = upper_a2.max(poly.a2[(i, j)].norm());
            }
        }
    }
    let diagonal_a0 = (0..k).map(|i| (poly.a0[(i, i)] - spec.z(i)).norm()).fold(0.0, f64::max);
    let char_poly_err = samples
        .iter()
        .map(|&z| {
            let roots: Vec<C64> = (0..k).map(|i| spec.eta_at(i, z)).collect();
            rel_coeff_diff(&poly.spectral_coefficients(z), &poly_from_roots(&roots))
        })
        .fold(0.0, f64::max);
    let g = frame.gluing();
    let matching = (0..k).map(|l| frame.column(l).matching_residual(table, &g)).fold(0.0, f64::max);
    FrameReport {
        unitarity,
        reality_a2: max_abs(&(&poly.a2 + poly.a0.adjoint())) / scale,
        reality_a1: max_abs(&(&poly.a1 - poly.a1.adjoint())) / scale,
        lower_a0: lower_a0 / scale,
        upper_a2: upper_a2 / scale,
        diagonal_a0: diagonal_a0 / scale,
        char_poly: char_poly_err,
        matching,
    }
}

/// Jacobian point of a frame, with the spread of the ratio across columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameProjection {
    pub point: JacobianPoint,
    pub spread: f64,
}

/// ρ_mn = Q_ns(a_mn) / Q_ms(a_mn) with s maximising |Q_ms(a_mn)|.
pub fn jacobian_from_frame(table: &IntersectionTable, frame: &SectionFrame) -> Result<FrameProjection> {
    let k = frame.k();
    let mut ratios = Vec::with_capacity(k * (k - 1));
    let mut spread = 0.0_f64;
    for (m, n) in ordered_pairs(k) {
        let a = table.a(m, n);
        let vm: Vec<C64> = (0..k).map(|s| frame.q[m][s].eval(a)).collect();
        let vn: Vec<C64> = (0..k).map(|s| frame.q[n][s].eval(a)).collect();
        let scale = vm.iter().chain(&vn).fold(0.0_f64, |acc, z| acc.max(z.norm()));
        let best = (0..k)
            .max_by(|&x, &y| vm[x].norm().total_cmp(&vm[y].norm()))
            .expect("k >= 2");
        if vm[best].norm() <= 1e-12 * scale || scale == 0.0 {
            return Err(Error::AllColumnsVanish { m: m + 1, n: n + 1 });
        }
        let rho = vn[best] / vm[best];
        for s in (0..k).filter(|&s| vm[s].norm() > 1e-3 * vm[best].norm()) {
            spread = spread.max((vn[s] / vm[s] - rho).norm() / rho.norm().max(f64::MIN_POSITIVE));
        }
        ratios.push(rho);
    }
    Ok(FrameProjection {
        point: JacobianPoint::from_ratios(k, &ratios),
        spread,
    })
}
