//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn det(m: &CMatrix) -> C64 {
    m.clone().lu().determinant()
}

/// Product of the Euclidean row norms (Hadamard bound on |det|).
pub fn row_norm_product(m: &CMatrix) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .product()
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// (M - M*)/2
pub fn skew_part(m: &CMatrix) -> CMatrix {
    (m - m.adjoint()).scale(0.5)
}

/// Singular values of `m` in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn condition_number(m: &CMatrix) -> f64 {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Right null vector of a (possibly wide) matrix, via SVD of the zero-padded
/// square system. Returns the unit null vector together with the two smallest
/// singular values relative to the largest one.
pub fn null_vector(m: &CMatrix) -> (Vec<C64>, f64, f64) {
    let cols = m.ncols();
    let rows = m.nrows().max(cols);
    let mut sq = CMatrix::zeros(rows, cols);
    sq.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let svd = sq.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[a].total_cmp(&sv[b]));
    let smallest = order[0];
    let top = sv[order[order.len() - 1]].max(f64::MIN_POSITIVE);
    let second = if order.len() > 1 { sv[order[1]] } else { top };
    // rows of V^T are conjugated right singular vectors
    let v: Vec<C64> = v_t.row(smallest).iter().map(|z| z.conj()).collect();
    (v, sv[smallest] / top, second / top)
}

/// Coefficients of det(x·1 − M), lowest degree first (monic, length n+1).
/// Faddeev–LeVerrier recursion; adequate for the small sizes used here.
pub fn char_poly(m: &CMatrix) -> Vec<C64> {
    let n = m.nrows();
    let mut coeffs = vec![ZERO; n + 1];
    coeffs[n] = ONE;
    let mut mk = CMatrix::zeros(n, n);
    let id = CMatrix::identity(n, n);
    for k in 1..=n {
        let prev = coeffs[n - k + 1];
        mk = m * (&mk + &id * prev);
        coeffs[n - k] = -trace(&mk) / (k as f64);
    }
    coeffs
}

/// Coefficients of ∏(x − r_i), lowest degree first.
pub fn poly_from_roots(roots: &[C64]) -> Vec<C64> {
    let mut p = vec![ONE];
    for &r in roots {
        let mut next = vec![ZERO; p.len() + 1];
        for (d, &cf) in p.iter().enumerate() {
            next[d + 1] += cf;
            next[d] -= cf * r;
        }
        p = next;
    }
    p
}

/// Max |a_i − b_i| relative to max(1, max |b_i|).
pub fn rel_coeff_diff(a: &[C64], b: &[C64]) -> f64 {
    let scale = b.iter().fold(1.0_f64, |acc, z| acc.max(z.norm()));
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
        / scale
}

pub fn rel_err(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn char_poly_matches_roots_for_triangular() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[c(1.0, 0.0), c(2.0, 1.0), c(0.5, 0.0), ZERO, c(-2.0, 1.0), c(3.0, 0.0), ZERO, ZERO, c(0.0, 4.0)],
        );
        let p = char_poly(&m);
        let q = poly_from_roots(&[c(1.0, 0.0), c(-2.0, 1.0), c(0.0, 4.0)]);
        assert!(rel_coeff_diff(&p, &q) < 1e-14);
    }

    #[test]
    fn null_vector_of_rank_deficient_wide_matrix() {
        let m = CMatrix::from_row_slice(2, 3, &[ONE, ONE, ZERO, ZERO, ONE, c(-1.0, 0.0)]);
        let (v, smin, second) = null_vector(&m);
        let r = &m * nalgebra::DVector::from_vec(v);
        assert!(r.norm() < 1e-14);
        assert!(smin < 1e-14 && second > 1e-3);
    }
}
