//! Dense univariate complex polynomials.

use crate::linalg::{C64, ONE, ZERO};
use std::f64::consts::PI;

/// Polynomial with coefficients stored lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub coeffs: Vec<C64>,
}

impl Poly {
    pub fn new(coeffs: Vec<C64>) -> Self {
        Poly { coeffs }
    }

    pub fn zero(len: usize) -> Self {
        Poly {
            coeffs: vec![ZERO; len],
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &cf| acc * z + cf)
    }

    /// Coefficient of the top slot (degree `len − 1`), i.e. the value "at ∞".
    pub fn lead(&self) -> C64 {
        self.coeffs.last().copied().unwrap_or(ZERO)
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn scale(&self, s: C64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&z| z * s).collect())
    }

    /// (−1)^n ζ^n · conj(P(−1/conj ζ)) for n = len − 1, as a polynomial in ζ.
    pub fn reflect(&self) -> Poly {
        let n = self.len().saturating_sub(1);
        let mut out = vec![ZERO; self.len()];
        for (d, &cf) in self.coeffs.iter().enumerate() {
            let sign = if (n + d) % 2 == 0 { 1.0 } else { -1.0 };
            out[n - d] = cf.conj() * sign;
        }
        Poly::new(out)
    }

    /// Interpolate a polynomial with `len` coefficients from a sampler, using
    /// the discrete Fourier transform on a circle of the given radius.
    pub fn interpolate_on_circle<F: FnMut(C64) -> C64>(len: usize, radius: f64, mut f: F) -> Poly {
        let values: Vec<C64> = (0..len)
            .map(|m| f(C64::from_polar(radius, 2.0 * PI * m as f64 / len as f64)))
            .collect();
        let coeffs = (0..len)
            .map(|n| {
                let s: C64 = values
                    .iter()
                    .enumerate()
                    .map(|(m, &v)| v * C64::from_polar(1.0, -2.0 * PI * (m * n) as f64 / len as f64))
                    .sum();
                s / (len as f64 * radius.powi(n as i32))
            })
            .collect();
        Poly::new(coeffs)
    }

    /// Degree after dropping top coefficients below `rel_tol · max_coeff`.
    pub fn effective_degree(&self, rel_tol: f64) -> Option<usize> {
        let cutoff = rel_tol * self.max_coeff();
        self.coeffs.iter().rposition(|z| z.norm() > cutoff)
    }

    /// All roots of the polynomial after trimming negligible top coefficients
    /// (Durand–Kerner iteration followed by Newton polishing).
    pub fn roots(&self) -> Vec<C64> {
        let Some(deg) = self.effective_degree(1e-13) else {
            return Vec::new();
        };
        if deg == 0 {
            return Vec::new();
        }
        let lead = self.coeffs[deg];
        let monic: Vec<C64> = self.coeffs[..=deg].iter().map(|&z| z / lead).collect();
        let eval = |z: C64| monic.iter().rev().fold(ZERO, |acc, &cf| acc * z + cf);
        let bound = 1.0 + monic[..deg].iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
        let seed = C64::new(0.4, 0.9);
        let mut roots: Vec<C64> = (0..deg).map(|m| seed.powu(m as u32) * (0.5 * bound)).collect();
        for _ in 0..500 {
            let mut delta = 0.0_f64;
            for m in 0..deg {
                let denom: C64 = (0..deg)
                    .filter(|&n| n != m)
                    .map(|n| roots[m] - roots[n])
                    .fold(ONE, |acc, d| acc * d);
                let step = eval(roots[m]) / denom;
                roots[m] -= step;
                delta = delta.max(step.norm());
            }
            if delta < 1e-15 * bound {
                break;
            }
        }
        let deriv: Vec<C64> = (1..=deg).map(|d| monic[d] * d as f64).collect();
        let eval_d = |z: C64| deriv.iter().rev().fold(ZERO, |acc, &cf| acc * z + cf);
        for r in roots.iter_mut() {
            for _ in 0..3 {
                let d = eval_d(*r);
                if d.norm() == 0.0 {
                    break;
                }
                *r -= eval(*r) / d;
            }
        }
        roots
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, poly_from_roots};

    #[test]
    fn reflect_is_an_involution_and_matches_definition() {
        let p = Poly::new(vec![c(1.0, 2.0), c(-0.5, 0.3), c(0.2, -1.0)]);
        assert_eq!(p.reflect().reflect(), p);
        let z = c(0.7, -0.4);
        let direct = z * z * p.eval(-1.0 / z.conj()).conj();
        assert!((p.reflect().eval(z) - direct).norm() < 1e-13);
    }

    #[test]
    fn circle_interpolation_recovers_coefficients() {
        let p = Poly::new(vec![c(1.0, 0.0), c(0.0, -2.0), c(3.0, 1.0), c(0.5, 0.5)]);
        let q = Poly::interpolate_on_circle(4, 1.3, |z| p.eval(z));
        for (a, b) in p.coeffs.iter().zip(&q.coeffs) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn roots_of_quartic() {
        let rs = [c(1.0, 0.0), c(-0.5, 2.0), c(0.3, -0.1), c(-3.0, -1.0)];
        let p = Poly::new(poly_from_roots(&rs));
        let found = p.roots();
        assert_eq!(found.len(), 4);
        for r in rs {
            assert!(found.iter().any(|f| (f - r).norm() < 1e-10));
        }
    }
}
