//! Reducible real spectral curves ∏(η − z_i − 2x_iζ + z̄_iζ²) = 0.
//!
//! Each component S_i is a rational curve η = η_i(ζ). Two components meet in
//! the antipodal pair of nodes over ζ = a_ij and ζ = a_ji = −1/conj(a_ij).

use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};

/// Collinearity threshold, relative to the marker set scaled to unit diameter.
pub const EPS_GEOM: f64 = 1e-9;
/// Admissible range for |a_ij|.
pub const MIN_NODE_MODULUS: f64 = 1e-8;
pub const MAX_NODE_MODULUS: f64 = 1e8;
/// Relative separation below which two nodes are considered coincident.
pub const NODE_SEPARATION: f64 = 1e-9;

/// A point of ℙ¹ in the affine coordinate ζ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Zeta {
    Finite(C64),
    Infinity,
}

impl Zeta {
    pub fn finite(self) -> Option<C64> {
        match self {
            Zeta::Finite(z) => Some(z),
            Zeta::Infinity => None,
        }
    }

    /// ζ ↦ −1/conj(ζ), exchanging 0 and ∞.
    pub fn antipode(self) -> Zeta {
        match self {
            Zeta::Infinity => Zeta::Finite(ZERO),
            Zeta::Finite(z) if z == ZERO => Zeta::Infinity,
            Zeta::Finite(z) => Zeta::Finite(-1.0 / z.conj()),
        }
    }
}

impl From<C64> for Zeta {
    fn from(z: C64) -> Self {
        Zeta::Finite(z)
    }
}

/// Marker (x_i, z_i) of one component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Marker {
    pub x: f64,
    pub z: C64,
}

impl Marker {
    fn as_r3(&self) -> [f64; 3] {
        [self.x, self.z.re, self.z.im]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    points: Vec<Marker>,
}

impl CurveSpec {
    pub fn new(points: Vec<Marker>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "a curve needs k >= 2 components, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !p.x.is_finite() || !p.z.re.is_finite() || !p.z.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite marker".into()));
        }
        Ok(CurveSpec { points })
    }

    pub fn from_pairs(pairs: &[(f64, C64)]) -> Result<Self> {
        CurveSpec::new(pairs.iter().map(|&(x, z)| Marker { x, z }).collect())
    }

    pub fn k(&self) -> usize {
        self.points.len()
    }

    /// Arithmetic genus (k − 1)².
    pub fn genus(&self) -> usize {
        (self.k() - 1).pow(2)
    }

    pub fn points(&self) -> &[Marker] {
        &self.points
    }

    pub fn x(&self, i: usize) -> f64 {
        self.points[i].x
    }

    pub fn z(&self, i: usize) -> C64 {
        self.points[i].z
    }

    /// η_i(ζ) = z_i + 2x_iζ − z̄_iζ²; at ∞ the leading coefficient −z̄_i.
    pub fn eta(&self, i: usize, zeta: Zeta) -> C64 {
        let Marker { x, z } = self.points[i];
        match zeta {
            Zeta::Finite(w) => z + w * (2.0 * x) - z.conj() * w * w,
            Zeta::Infinity => -z.conj(),
        }
    }

    pub fn eta_at(&self, i: usize, w: C64) -> C64 {
        self.eta(i, Zeta::Finite(w))
    }
}

/// Ordered pairs (i, j), i ≠ j, in lexicographic order (0-based).
pub fn ordered_pairs(k: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..k).flat_map(move |i| (0..k).filter(move |&j| j != i).map(move |j| (i, j)))
}

/// Position of (i, j) in [`ordered_pairs`].
pub fn pair_index(k: usize, i: usize, j: usize) -> usize {
    debug_assert!(i != j && i < k && j < k);
    i * (k - 1) + if j < i { j } else { j - 1 }
}

pub fn num_pairs(k: usize) -> usize {
    k * (k - 1)
}

/// Validated curve together with its node data.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionTable {
    spec: CurveSpec,
    a: Vec<C64>,
    r: Vec<f64>,
}

impl IntersectionTable {
    pub fn spec(&self) -> &CurveSpec {
        &self.spec
    }

    pub fn k(&self) -> usize {
        self.spec.k()
    }

    /// ζ-coordinate of the node p_ij.
    pub fn a(&self, i: usize, j: usize) -> C64 {
        self.a[pair_index(self.k(), i, j)]
    }

    pub fn r(&self, i: usize, j: usize) -> f64 {
        self.r[pair_index(self.k(), i, j)]
    }

    /// Node coordinates indexed like [`ordered_pairs`].
    pub fn nodes(&self) -> &[C64] {
        &self.a
    }

    pub fn distances(&self) -> &[f64] {
        &self.r
    }

    /// Nodes lying on component `m`, i.e. a_mj and a_jm for all j ≠ m.
    pub fn nodes_on(&self, m: usize) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        ordered_pairs(self.k())
            .filter(move |&(i, j)| i == m || j == m)
            .map(move |(i, j)| (i, j, self.a(i, j)))
    }

    /// Closest node to ζ, with its distance.
    pub fn nearest_node(&self, w: C64) -> ((usize, usize), f64) {
        ordered_pairs(self.k())
            .map(|(i, j)| ((i, j), (self.a(i, j) - w).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("k >= 2")
    }
}

/// Compute the node table and check genericity (nodes only, a_ij finite and
/// nonzero, all distinct).
pub fn validate_curve(spec: &CurveSpec) -> Result<IntersectionTable> {
    let k = spec.k();
    let pts = spec.points();

    for i in 0..k {
        for j in i + 1..k {
            if pts[i] == pts[j] {
                return Err(Error::InvalidInput(format!(
                    "components {} and {} coincide",
                    i + 1,
                    j + 1
                )));
            }
        }
    }

    let diam = (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .map(|(i, j)| dist3(pts[i].as_r3(), pts[j].as_r3()))
        .fold(0.0, f64::max);
    for i in 0..k {
        for j in i + 1..k {
            for l in j + 1..k {
                let u = sub3(pts[j].as_r3(), pts[i].as_r3());
                let v = sub3(pts[l].as_r3(), pts[i].as_r3());
                let area = norm3(cross3(u, v)) / (diam * diam);
                if area < EPS_GEOM {
                    return Err(Error::CollinearPoints {
                        i: i + 1,
                        j: j + 1,
                        l: l + 1,
                    });
                }
            }
        }
    }

    let mut a = Vec::with_capacity(num_pairs(k));
    let mut r = Vec::with_capacity(num_pairs(k));
    for (i, j) in ordered_pairs(k) {
        let dx = pts[i].x - pts[j].x;
        let rij = (dx * dx + (pts[i].z - pts[j].z).norm_sqr()).sqrt();
        let denom = pts[i].z.conj() - pts[j].z.conj();
        let aij = (dx + rij) / denom;
        let modulus = aij.norm();
        if !modulus.is_finite() || !(MIN_NODE_MODULUS..=MAX_NODE_MODULUS).contains(&modulus) {
            return Err(Error::IntersectionAtPole {
                i: i + 1,
                j: j + 1,
                modulus: if modulus.is_nan() { f64::INFINITY } else { modulus },
            });
        }
        a.push(aij);
        r.push(rij);
    }

    let pairs: Vec<_> = ordered_pairs(k).collect();
    for p in 0..pairs.len() {
        for q in p + 1..pairs.len() {
            let scale = a[p].norm().max(a[q].norm()).max(1.0);
            if (a[p] - a[q]).norm() < NODE_SEPARATION * scale {
                let ((i, j), (m, n)) = (pairs[p], pairs[q]);
                return Err(Error::CoincidentIntersections {
                    i: i + 1,
                    j: j + 1,
                    m: m + 1,
                    n: n + 1,
                });
            }
        }
    }

    Ok(IntersectionTable {
        spec: spec.clone(),
        a,
        r,
    })
}

/// A point on component `component` over ζ; its η is η_i(ζ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub component: usize,
    pub zeta: Zeta,
}

impl CurvePoint {
    pub fn eta(&self, spec: &CurveSpec) -> C64 {
        spec.eta(self.component, self.zeta)
    }
}

/// The real structure ζ ↦ −1/conj(ζ), η ↦ −conj(η)/conj(ζ)²; components are
/// preserved because each S_i is real.
pub fn antipodal(pt: CurvePoint) -> CurvePoint {
    CurvePoint {
        component: pt.component,
        zeta: pt.zeta.antipode(),
    }
}

/// η-coordinate of τ(p) computed from η(p) directly, for finite nonzero ζ.
pub fn antipodal_eta(eta: C64, zeta: C64) -> C64 {
    -eta.conj() / (zeta.conj() * zeta.conj())
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm3(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    norm3(sub3(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn c2() -> CurveSpec {
        CurveSpec::from_pairs(&[(0.0, c(-0.5, 0.0)), (0.0, c(0.5, 0.0))]).unwrap()
    }

    #[test]
    fn c2_nodes() {
        let t = validate_curve(&c2()).unwrap();
        assert!((t.a(0, 1) - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((t.a(1, 0) - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(t.r(0, 1), 1.0);
        assert_eq!(t.r(1, 0), 1.0);
    }

    #[test]
    fn collinear_markers_rejected() {
        let spec = CurveSpec::from_pairs(&[(0.0, c(0.0, 0.0)), (1.0, c(1.0, 0.0)), (2.0, c(2.0, 0.0))]).unwrap();
        assert_eq!(
            validate_curve(&spec),
            Err(Error::CollinearPoints { i: 1, j: 2, l: 3 })
        );
    }

    #[test]
    fn node_at_zero_rejected() {
        // equal z with x_1 < x_2 puts a_12 at 0/0
        let spec = CurveSpec::from_pairs(&[(0.0, c(1.0, 0.0)), (1.0, c(1.0, 0.0))]).unwrap();
        assert!(matches!(
            validate_curve(&spec),
            Err(Error::IntersectionAtPole { i: 1, j: 2, .. })
        ));
    }

    #[test]
    fn duplicate_components_rejected() {
        let spec = CurveSpec::from_pairs(&[(0.0, c(1.0, 0.0)), (0.0, c(1.0, 0.0))]).unwrap();
        assert!(matches!(validate_curve(&spec), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn eta_examples() {
        let s = c2();
        assert_eq!(s.eta_at(0, c(0.0, 0.0)), c(-0.5, 0.0));
        assert!(s.eta_at(0, c(1.0, 0.0)).norm() < 1e-15);
        assert!(s.eta_at(1, c(1.0, 0.0)).norm() < 1e-15);
        for w in [c(0.3, 0.1), c(-2.0, 1.5), c(0.0, 7.0)] {
            assert!((s.eta_at(0, w) + s.eta_at(1, w)).norm() < 1e-14);
        }
        assert_eq!(s.eta(0, Zeta::Infinity), c(0.5, -0.0));
    }

    #[test]
    fn antipodal_maps_node_to_partner() {
        let t = validate_curve(&c2()).unwrap();
        let p = antipodal(CurvePoint {
            component: 0,
            zeta: Zeta::Finite(t.a(0, 1)),
        });
        assert_eq!(p.component, 0);
        assert!((p.zeta.finite().unwrap() - t.a(1, 0)).norm() < 1e-15);
        assert_eq!(Zeta::Finite(ZERO).antipode(), Zeta::Infinity);
        assert_eq!(Zeta::Infinity.antipode(), Zeta::Finite(ZERO));
    }

    #[test]
    fn antipodal_eta_matches_curve_real_structure() {
        let s = CurveSpec::from_pairs(&[(0.3, c(-0.5, 0.2)), (-0.1, c(0.5, 1.0))]).unwrap();
        let w = c(0.4, 1.3);
        let p = antipodal(CurvePoint { component: 1, zeta: w.into() });
        assert!((p.zeta.finite().unwrap() * w.conj() + 1.0).norm() < 1e-15);
        let eta = s.eta_at(1, w);
        assert!((p.eta(&s) - antipodal_eta(eta, w)).norm() < 1e-14);
    }
}
