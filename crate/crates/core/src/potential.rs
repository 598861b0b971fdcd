//! Δ = tr(A₀A₂ − ¼A₁²), the identity relating Δ to (log θ)″, and the Kähler
//! potential K = ½ (log θ_{1,0})′ at t = 0.

use crate::curve::{CurveSpec, IntersectionTable};
use crate::error::{Error, Result};
use crate::flow::flow_sample;
use crate::frames::MatricialPolynomial;
use crate::linalg::{c, trace, CMatrix, C64};
use crate::sections::{is_definite, Verdict};
use crate::theta::{theta_flow_jet, JacobianPoint};

/// Diagonal limits τ₁ = −i diag(x), τ₂ = i diag(Im z), τ₃ = −i diag(Re z).
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitParameters {
    pub tau: [CMatrix; 3],
    /// tr τ_i²
    pub traces: [f64; 3],
}

impl OrbitParameters {
    pub fn from_spec(spec: &CurveSpec) -> OrbitParameters {
        let k = spec.k();
        let diag = |f: &dyn Fn(usize) -> C64| CMatrix::from_diagonal(&nalgebra::DVector::from_fn(k, |i, _| f(i)));
        let tau = [
            diag(&|i| c(0.0, -spec.x(i))),
            diag(&|i| c(0.0, spec.z(i).im)),
            diag(&|i| c(0.0, -spec.z(i).re)),
        ];
        let traces = [
            -(0..k).map(|i| spec.x(i).powi(2)).sum::<f64>(),
            -(0..k).map(|i| spec.z(i).im.powi(2)).sum::<f64>(),
            -(0..k).map(|i| spec.z(i).re.powi(2)).sum::<f64>(),
        ];
        OrbitParameters { tau, traces }
    }

    pub fn total(&self) -> f64 {
        self.traces.iter().sum()
    }
}

pub fn delta(a: &MatricialPolynomial) -> C64 {
    trace(&(&a.a0 * &a.a2 - &a.a1 * &a.a1 * c(0.25, 0.0)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HitchinResidual {
    pub t: f64,
    /// Δ − Σ tr τ_i² − (3/2)(log θ)″
    pub global: C64,
    /// tr T_i² − tr τ_i² − ½(log θ)″
    pub per_component: [C64; 3],
    pub delta: C64,
    pub d2log: C64,
}

impl HitchinResidual {
    pub fn worst(&self) -> f64 {
        self.per_component.iter().map(|z| z.norm()).fold(self.global.norm(), f64::max)
    }
}

pub fn hitchin_residual(table: &IntersectionTable, pt: &JacobianPoint, t: f64) -> Result<HitchinResidual> {
    let orbit = OrbitParameters::from_spec(table.spec());
    let s = flow_sample(table, pt, t)?;
    let per_component = std::array::from_fn(|i| s.tr_sq[i] - orbit.traces[i] - s.d2log * 0.5);
    Ok(HitchinResidual {
        t,
        global: s.delta - orbit.total() - s.d2log * 1.5,
        per_component,
        delta: s.delta,
        d2log: s.d2log,
    })
}

/// K = ½ d/dt log θ_{1,0} at t = 0, for massless curves and definite points.
pub fn kahler_potential(table: &IntersectionTable, pt: &JacobianPoint) -> Result<f64> {
    let spec = table.spec();
    if let Some(i) = (0..spec.k()).find(|&i| spec.x(i) != 0.0) {
        return Err(Error::NonzeroMass { i: i + 1, x: spec.x(i) });
    }
    match is_definite(table, pt).verdict {
        Verdict::Positive => {}
        Verdict::NotReal => return Err(Error::NotReal),
        v => return Err(Error::NotPositive(format!("verdict {}", v.as_str()))),
    }
    let k = theta_flow_jet(table, pt, 0.0)?.dlog * 0.5;
    if k.im.abs() > 1e-10 * k.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::NonRealValue {
            what: "Kahler potential".into(),
            imag: k.im,
        });
    }
    if k.re < -1e-12 {
        return Err(Error::NotPositive(format!("potential K = {} is negative", k.re)));
    }
    Ok(k.re)
}

/// f = −R + √(R²/2 + tr XX*), K = f/2.
pub fn eguchi_hanson_reference(r: f64, tr_xx: f64) -> Result<(f64, f64)> {
    if !(r > 0.0) {
        return Err(Error::DomainError(format!("R = {r} must be positive")));
    }
    let disc = r * r / 2.0 + tr_xx;
    if tr_xx < r * r / 2.0 * (1.0 - 1e-12) {
        return Err(Error::DomainError(format!("tr XX* = {tr_xx} is below R^2/2 = {}", r * r / 2.0)));
    }
    let f = (-r + disc.sqrt()).max(0.0);
    Ok((f, f / 2.0))
}

/// Closed-form reference for k = 2 from A₀ of a unitary frame: X is the
/// traceless part of A₀ and R = r₁₂.
pub fn eguchi_hanson_from_polynomial(table: &IntersectionTable, a: &MatricialPolynomial) -> Result<(f64, f64)> {
    if table.k() != 2 {
        return Err(Error::InvalidInput(format!(
            "closed form needs k = 2, got k = {}",
            table.k()
        )));
    }
    let x = &a.a0 - CMatrix::identity(2, 2) * (trace(&a.a0) * 0.5);
    eguchi_hanson_reference(table.r(0, 1), trace(&(&x * x.adjoint())).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::validate_curve;
    use crate::flow::flow_point;

    fn c2(r: f64) -> IntersectionTable {
        validate_curve(&CurveSpec::from_pairs(&[(0.0, c(-r / 2.0, 0.0)), (0.0, c(r / 2.0, 0.0))]).unwrap()).unwrap()
    }

    fn gamma_point(g: f64) -> JacobianPoint {
        let s = g.sqrt();
        JacobianPoint::from_ratios(2, &[c(s, 0.0), c(s, 0.0)])
    }

    #[test]
    fn orbit_traces() {
        let o = OrbitParameters::from_spec(c2(1.0).spec());
        assert_eq!(o.traces, [0.0, 0.0, -0.5]);
        for i in 0..3 {
            assert!((trace(&(&o.tau[i] * &o.tau[i])).re - o.traces[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn delta_of_zero_is_zero() {
        let z = CMatrix::zeros(3, 3);
        let a = MatricialPolynomial {
            a0: z.clone(),
            a1: z.clone(),
            a2: z,
        };
        assert_eq!(delta(&a), c(0.0, 0.0));
    }

    #[test]
    fn baseline_values() {
        let t = c2(1.0);
        let res = hitchin_residual(&t, &gamma_point(0.5), 0.0).unwrap();
        assert!((res.delta - c(-12.5, 0.0)).norm() < 1e-10);
        assert!(res.worst() < 1e-9);
        let sum: C64 = res.per_component.iter().sum();
        assert!((sum - res.global).norm() < 1e-12);
        assert!((kahler_potential(&t, &gamma_point(0.5)).unwrap() - 1.0).abs() < 1e-12);
        let (f, k) = eguchi_hanson_reference(1.0, 8.5).unwrap();
        assert!((f - 2.0).abs() < 1e-15 && (k - 1.0).abs() < 1e-15);
    }

    #[test]
    fn potential_decreases_along_flow() {
        let t = c2(1.0);
        let mut last = f64::INFINITY;
        for m in 0..=10 {
            let k = kahler_potential(&t, &flow_point(&t, &gamma_point(0.5), 0.5 * m as f64)).unwrap();
            assert!(k < last);
            last = k;
        }
        assert!(last < 1e-4);
    }

    #[test]
    fn domain_and_mass_errors() {
        assert_eq!(eguchi_hanson_reference(2.0, 2.0).unwrap(), (0.0, 0.0));
        assert!(matches!(eguchi_hanson_reference(2.0, 1.0), Err(Error::DomainError(_))));
        let massive = validate_curve(&CurveSpec::from_pairs(&[(0.1, c(-0.5, 0.0)), (0.0, c(0.5, 0.0))]).unwrap()).unwrap();
        assert!(matches!(
            kahler_potential(&massive, &gamma_point(0.5)),
            Err(Error::NonzeroMass { i: 1, .. })
        ));
    }
}
