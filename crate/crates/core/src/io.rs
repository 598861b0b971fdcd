//! JSON and CSV formats used by the command-line front end. Indices in files
//! are 1-based; complex numbers are `[re, im]` pairs unless stated otherwise.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::curve::{num_pairs, ordered_pairs, pair_index, CurveSpec, IntersectionTable, Marker, Zeta};
use crate::error::{Error, Result};
use crate::flow::FlowSample;
use crate::frames::{MatricialPolynomial, SectionFrame};
use crate::linalg::{CMatrix, C64};
use crate::sections::{CocycleData, Divisor};

#[derive(Debug, Serialize, Deserialize)]
struct MarkerRecord {
    x: f64,
    z: [f64; 2],
}

#[derive(Debug, Serialize, Deserialize)]
struct CurveFile {
    k: usize,
    points: Vec<MarkerRecord>,
}

/// `{"k": int, "points": [{"x": float, "z": [re, im]}, …]}`
pub fn parse_curve(text: &str) -> Result<CurveSpec> {
    let file: CurveFile = serde_json::from_str(text)?;
    if file.k != file.points.len() {
        return Err(Error::InvalidInput(format!(
            "curve declares k = {} but lists {} points",
            file.k,
            file.points.len()
        )));
    }
    CurveSpec::new(
        file.points
            .iter()
            .map(|p| Marker {
                x: p.x,
                z: C64::new(p.z[0], p.z[1]),
            })
            .collect(),
    )
}

pub fn curve_to_json(spec: &CurveSpec) -> Value {
    json!({
        "k": spec.k(),
        "points": spec.points().iter().map(|m| json!({"x": m.x, "z": [m.z.re, m.z.im]})).collect::<Vec<_>>(),
    })
}

pub fn intersection_report(table: &IntersectionTable) -> Value {
    let k = table.k();
    json!({
        "k": k,
        "genus": table.spec().genus(),
        "nodes": ordered_pairs(k).map(|(i, j)| {
            let a = table.a(i, j);
            json!({"i": i + 1, "j": j + 1, "re": a.re, "im": a.im, "r": table.r(i, j)})
        }).collect::<Vec<_>>(),
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct RatioRecord {
    i: usize,
    j: usize,
    re: f64,
    im: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct GluingFile {
    ratios: Vec<RatioRecord>,
}

/// `{"ratios": [{"i": 1, "j": 2, "re": …, "im": …}, …]}` with every ordered
/// pair present exactly once; returned in pair order.
pub fn parse_gluing(k: usize, text: &str) -> Result<Vec<C64>> {
    let file: GluingFile = serde_json::from_str(text)?;
    let mut out: Vec<Option<C64>> = vec![None; num_pairs(k)];
    for r in &file.ratios {
        if r.i == 0 || r.j == 0 || r.i > k || r.j > k || r.i == r.j {
            return Err(Error::InvalidInput(format!("ratio index ({}, {}) invalid for k = {k}", r.i, r.j)));
        }
        let slot = &mut out[pair_index(k, r.i - 1, r.j - 1)];
        if slot.is_some() {
            return Err(Error::InvalidInput(format!("ratio ({}, {}) given twice", r.i, r.j)));
        }
        let v = C64::new(r.re, r.im);
        if v.norm() == 0.0 || !v.is_finite() {
            return Err(Error::InvalidInput(format!("ratio ({}, {}) must be finite and nonzero", r.i, r.j)));
        }
        *slot = Some(v);
    }
    ordered_pairs(k)
        .zip(out)
        .map(|((i, j), v)| v.ok_or_else(|| Error::InvalidInput(format!("ratio ({}, {}) missing", i + 1, j + 1))))
        .collect()
}

pub fn gluing_to_json(k: usize, ratios: &[C64]) -> Value {
    json!({
        "ratios": ordered_pairs(k).zip(ratios).map(|((i, j), z)| {
            json!({"i": i + 1, "j": j + 1, "re": z.re, "im": z.im})
        }).collect::<Vec<_>>(),
    })
}

fn parse_zeta(v: &Value) -> Result<Zeta> {
    match v {
        Value::String(s) if s == "inf" => Ok(Zeta::Infinity),
        Value::Array(a) if a.len() == 2 => {
            let part = |x: &Value| x.as_f64().ok_or_else(|| Error::InvalidInput(format!("bad number {x}")));
            Ok(Zeta::Finite(C64::new(part(&a[0])?, part(&a[1])?)))
        }
        other => Err(Error::InvalidInput(format!("expected [re, im] or \"inf\", got {other}"))),
    }
}

#[derive(Debug, Deserialize)]
struct DivisorFile {
    n: usize,
    points: Vec<Vec<Value>>,
}

/// `{"n": int, "points": [[[re, im] | "inf", …], …]}`
pub fn parse_divisor(text: &str) -> Result<Divisor> {
    let file: DivisorFile = serde_json::from_str(text)?;
    let points = file
        .points
        .iter()
        .map(|comp| comp.iter().map(parse_zeta).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let d = Divisor::new(points)?;
    if d.n != file.n {
        return Err(Error::InvalidInput(format!("divisor declares n = {} but lists {}", file.n, d.n)));
    }
    Ok(d)
}

#[derive(Debug, Deserialize)]
struct CocycleRecord {
    key: (i32, usize),
    re: f64,
    im: f64,
}

#[derive(Debug, Deserialize)]
struct CocycleFile {
    d: Vec<CocycleRecord>,
}

/// `{"d": [{"key": [n, i], "re": …, "im": …}, …]}`
pub fn parse_cocycle(text: &str) -> Result<CocycleData> {
    let file: CocycleFile = serde_json::from_str(text)?;
    let mut d = BTreeMap::new();
    for r in file.d {
        if d.insert(r.key, C64::new(r.re, r.im)).is_some() {
            return Err(Error::InvalidInput(format!("cocycle key {:?} given twice", r.key)));
        }
    }
    Ok(CocycleData { d })
}

fn pair(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn matrix_to_json(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| pair(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn matrix_from_json(v: &Value) -> Result<CMatrix> {
    let rows = v.as_array().ok_or_else(|| Error::InvalidInput("matrix must be an array of rows".into()))?;
    let k = rows.len();
    let mut m = CMatrix::zeros(k, k);
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .filter(|r| r.len() == k)
            .ok_or_else(|| Error::InvalidInput(format!("row {} must have {k} entries", i + 1)))?;
        for (j, e) in row.iter().enumerate() {
            m[(i, j)] = parse_zeta(e)?
                .finite()
                .ok_or_else(|| Error::InvalidInput("matrix entries must be finite".into()))?;
        }
    }
    Ok(m)
}

/// `{"A0": k×k, "A1": k×k, "A2": k×k}` of `[re, im]` pairs.
pub fn polynomial_to_json(a: &MatricialPolynomial) -> Value {
    json!({"A0": matrix_to_json(&a.a0), "A1": matrix_to_json(&a.a1), "A2": matrix_to_json(&a.a2)})
}

pub fn polynomial_from_json(v: &Value) -> Result<MatricialPolynomial> {
    let get = |key: &str| {
        v.get(key)
            .ok_or_else(|| Error::InvalidInput(format!("missing {key}")))
            .and_then(matrix_from_json)
    };
    let a = MatricialPolynomial {
        a0: get("A0")?,
        a1: get("A1")?,
        a2: get("A2")?,
    };
    if a.a1.nrows() != a.k() || a.a2.nrows() != a.k() {
        return Err(Error::InvalidInput("A0, A1, A2 must have equal size".into()));
    }
    Ok(a)
}

/// Coefficient tensor `q[i][l][n]` (component, section, degree).
pub fn frame_to_json(frame: &SectionFrame) -> Value {
    json!({
        "signs": frame.signs,
        "q": frame.q.iter().map(|row| {
            row.iter().map(|p| p.coeffs.iter().map(|&z| pair(z)).collect::<Vec<_>>()).collect::<Vec<_>>()
        }).collect::<Vec<_>>(),
    })
}

/// Shortest round-trip rendering of a float.
pub fn fmt_float(x: f64) -> String {
    format!("{x:?}")
}

pub const TRACE_HEADER: &str =
    "t,trT1sq_re,trT1sq_im,trT2sq_re,trT2sq_im,trT3sq_re,trT3sq_im,theta_re,theta_im,dlog,d2log,delta";

/// CSV trace; dlog, d2log and delta are real for real points and written as
/// their real parts.
pub fn trace_to_csv(samples: &[FlowSample]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for s in samples {
        let cols = [
            s.t,
            s.tr_sq[0].re,
            s.tr_sq[0].im,
            s.tr_sq[1].re,
            s.tr_sq[1].im,
            s.tr_sq[2].re,
            s.tr_sq[2].im,
            s.theta.re,
            s.theta.im,
            s.dlog.re,
            s.d2log.re,
            s.delta.re,
        ];
        let line: Vec<String> = cols.iter().map(|&x| fmt_float(x)).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}

pub fn trace_to_json(samples: &[FlowSample]) -> Value {
    Value::Array(
        samples
            .iter()
            .map(|s| {
                json!({
                    "t": s.t,
                    "ratios": s.point.ratios().iter().map(|&z| pair(z)).collect::<Vec<_>>(),
                    "trTsq": s.tr_sq.iter().map(|&z| pair(z)).collect::<Vec<_>>(),
                    "theta": pair(s.theta),
                    "dlog": pair(s.dlog),
                    "d2log": pair(s.d2log),
                    "delta": pair(s.delta),
                    "A": polynomial_to_json(&s.a),
                })
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    const C2: &str = r#"{"k": 2, "points": [{"x": 0.0, "z": [-0.5, 0.0]}, {"x": 0.0, "z": [0.5, 0.0]}]}"#;

    #[test]
    fn curve_round_trip() {
        let spec = parse_curve(C2).unwrap();
        assert_eq!(spec.k(), 2);
        let again = parse_curve(&curve_to_json(&spec).to_string()).unwrap();
        assert_eq!(spec, again);
        assert!(parse_curve(r#"{"k": 3, "points": []}"#).is_err());
    }

    #[test]
    fn gluing_parsing() {
        let text = r#"{"ratios": [{"i": 2, "j": 1, "re": 0.5, "im": 0.0}, {"i": 1, "j": 2, "re": 0.25, "im": 1.0}]}"#;
        let r = parse_gluing(2, text).unwrap();
        assert_eq!(r, vec![c(0.25, 1.0), c(0.5, 0.0)]);
        assert_eq!(parse_gluing(2, &gluing_to_json(2, &r).to_string()).unwrap(), r);
        let missing = r#"{"ratios": [{"i": 1, "j": 2, "re": 1.0, "im": 0.0}]}"#;
        assert!(matches!(parse_gluing(2, missing), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn divisor_and_cocycle_parsing() {
        let d = parse_divisor(r#"{"n": 1, "points": [[[0.5, 0.1]], ["inf"], [[-1.0, 2.0]]]}"#).unwrap();
        assert_eq!(d.points[1][0], Zeta::Infinity);
        assert_eq!(d.points[2][0], Zeta::Finite(c(-1.0, 2.0)));
        let cd = parse_cocycle(r#"{"d": [{"key": [0, 1], "re": 0.3, "im": 0.0}, {"key": [-1, 2], "re": 0.1, "im": 0.2}]}"#).unwrap();
        assert_eq!(cd.d[&(-1, 2)], c(0.1, 0.2));
    }

    #[test]
    fn matrix_round_trip() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 2.0), c(0.0, -1.0), c(3.5, 0.0), c(-0.25, 0.125)]);
        let a = MatricialPolynomial {
            a0: m.clone(),
            a1: m.adjoint(),
            a2: -m,
        };
        assert_eq!(polynomial_from_json(&polynomial_to_json(&a)).unwrap(), a);
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0, -2.5e-17, 1.0 / 3.0, 6.02214076e23] {
            assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_float(1.0), "1.0");
    }
}
