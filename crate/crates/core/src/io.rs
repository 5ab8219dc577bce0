//! JSON structure files: a bracket table with optional metric and complex
//! structure. Parsing is strict — malformed tables, asymmetric or
//! non-positive metrics, and degenerate dimensions are rejected — and in
//! exact mode every numeric literal (including decimals) is read as an
//! exact rational.

use crate::error::{Error, Result};
use crate::lie::{AlmostComplexStructure, LieAlgebra, MetricTensor};
use crate::mat::{RMat, ZeroTest};
use crate::scalar::Scalar;
use serde::Deserialize;
use serde_json::{json, Value};

#[derive(Deserialize)]
struct RawStructure {
    dim: usize,
    #[serde(default)]
    entries: Vec<(usize, usize, usize, Value)>,
    #[serde(default)]
    metric: Option<Vec<Vec<Value>>>,
    #[serde(default)]
    j: Option<Vec<Vec<Value>>>,
}

fn value_to_scalar(v: &Value, exact: bool) -> Result<Scalar> {
    match v {
        Value::String(s) => {
            if exact {
                Scalar::parse_exact(s)
            } else {
                let parsed = Scalar::parse_exact(s)?;
                Ok(parsed.to_float())
            }
        }
        Value::Number(n) => {
            if exact {
                // The JSON text of a number is a finite decimal, which has
                // an exact rational reading.
                Scalar::parse_exact(&n.to_string())
            } else {
                n.as_f64()
                    .map(Scalar::float)
                    .ok_or_else(|| Error::Parse(format!("not a finite number: {n}")))
            }
        }
        other => Err(Error::Parse(format!(
            "expected a number or numeric string, found {other}"
        ))),
    }
}

fn matrix_from_rows(rows: &[Vec<Value>], dim: usize, what: &str, exact: bool) -> Result<RMat> {
    if rows.len() != dim {
        return Err(Error::DimensionMismatch(format!(
            "{what} has {} rows for dimension {dim}",
            rows.len()
        )));
    }
    let mut out = RMat::zeros(dim, dim);
    for (r, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{what} row {r} has {} entries for dimension {dim}",
                row.len()
            )));
        }
        for (c, v) in row.iter().enumerate() {
            out[(r, c)] = value_to_scalar(v, exact)?;
        }
    }
    Ok(out)
}

/// Parse a structure file from JSON text. `exact` selects exact-rational
/// reading of all literals; otherwise everything becomes floating point.
/// The metric defaults to the identity. The complex structure, when
/// present, is only shape-checked here — algebraic validation (squaring to
/// `-I`, compatibility, integrability) belongs to the checks that consume
/// it.
pub fn parse_structure(
    text: &str,
    exact: bool,
) -> Result<(LieAlgebra, MetricTensor, Option<AlmostComplexStructure>)> {
    let raw: RawStructure =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("invalid JSON: {e}")))?;
    if raw.dim < 2 {
        return Err(Error::InvalidInput(format!(
            "dimension {} is too small to carry any of the structures here",
            raw.dim
        )));
    }
    let mut entries = Vec::with_capacity(raw.entries.len());
    for (i, j, k, v) in &raw.entries {
        entries.push((*i, *j, *k, value_to_scalar(v, exact)?));
    }
    let alg = LieAlgebra::from_entries(raw.dim, &entries)?;
    let g = match &raw.metric {
        None => MetricTensor::identity(raw.dim),
        Some(rows) => {
            let mat = matrix_from_rows(rows, raw.dim, "metric", exact)?;
            let zt = if mat.is_exact() {
                ZeroTest::Exact
            } else {
                ZeroTest::Tol(1e-12)
            };
            MetricTensor::new(mat, zt)?
        }
    };
    let j = match &raw.j {
        None => None,
        Some(rows) => Some(AlmostComplexStructure::new(matrix_from_rows(
            rows, raw.dim, "complex structure", exact,
        )?)),
    };
    Ok((alg, g, j))
}

/// Load a structure file from disk.
pub fn load_structure(
    path: &std::path::Path,
    exact: bool,
) -> Result<(LieAlgebra, MetricTensor, Option<AlmostComplexStructure>)> {
    let text = std::fs::read_to_string(path)?;
    parse_structure(&text, exact)
}

/// JSON value for one scalar: exact rationals become integer or `"p/q"`
/// strings, everything else becomes a JSON number.
pub fn scalar_json(s: &Scalar) -> Value {
    if let Some(r) = s.as_rational() {
        if r.is_integer() {
            if let Ok(n) = i64::try_from(r.numer().clone()) {
                return json!(n);
            }
        }
        return json!(format!("{}/{}", r.numer(), r.denom()));
    }
    json!(s.to_f64())
}

fn matrix_json(m: &RMat) -> Value {
    Value::Array(
        (0..m.rows)
            .map(|r| Value::Array((0..m.cols).map(|c| scalar_json(&m[(r, c)])).collect()))
            .collect(),
    )
}

/// Serialize a structure (table, metric, optional complex structure) into
/// the same JSON shape the parser accepts.
pub fn structure_to_json(
    alg: &LieAlgebra,
    g: &MetricTensor,
    j: Option<&AlmostComplexStructure>,
) -> Value {
    let entries: Vec<Value> = alg
        .nonzero()
        .iter()
        .filter(|(_, i, jj, _)| i < jj)
        .map(|(k, i, jj, v)| json!([i, jj, k, scalar_json(v)]))
        .collect();
    let mut out = json!({
        "dim": alg.dim,
        "entries": entries,
        "metric": matrix_json(g.mat()),
    });
    if let Some(acs) = j {
        out["j"] = matrix_json(&acs.mat);
    }
    out
}

/// Serialize a rotation-block structure: the bases of the complement and
/// center, the plane pairs, and the rate matrix.
pub fn flat_structure_to_json(fs: &crate::riemannian::FlatStructure) -> Value {
    let vec_json =
        |v: &Vec<Scalar>| Value::Array(v.iter().map(scalar_json).collect::<Vec<_>>());
    json!({
        "complement_basis": fs.h_basis.iter().map(vec_json).collect::<Vec<_>>(),
        "central_basis": fs.z_basis.iter().map(vec_json).collect::<Vec<_>>(),
        "plane_pairs": fs
            .eps_pairs
            .iter()
            .map(|(a, b)| json!([vec_json(a), vec_json(b)]))
            .collect::<Vec<_>>(),
        "rates": fs
            .f
            .iter()
            .map(|row| Value::Array(row.iter().map(scalar_json).collect::<Vec<_>>()))
            .collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;

    #[test]
    fn round_trip_preserves_exact_structure() {
        let (alg, g, j) = samples::e2r();
        let text = structure_to_json(&alg, &g, Some(&j)).to_string();
        let (alg2, g2, j2) = parse_structure(&text, true).unwrap();
        assert_eq!(alg2.dim, 4);
        for k in 0..4 {
            for i in 0..4 {
                for jj in 0..4 {
                    assert_eq!(alg.c(k, i, jj), alg2.c(k, i, jj));
                }
            }
        }
        assert_eq!(crate::mat::max_diff(g.mat(), g2.mat()), 0.0);
        assert_eq!(
            crate::mat::max_diff(&j.mat, &j2.unwrap().mat),
            0.0
        );
    }

    #[test]
    fn decimal_literals_parse_exactly() {
        let text = r#"{"dim": 2, "entries": [[0, 1, 1, "1.1"]]}"#;
        let (alg, g, j) = parse_structure(text, true).unwrap();
        assert_eq!(alg.c(1, 0, 1), &Scalar::ratio(11, 10));
        assert!(g.is_exact());
        assert!(j.is_none());
        // The same through a JSON number literal.
        let text = r#"{"dim": 2, "entries": [[0, 1, 1, 1.1]]}"#;
        let (alg, _, _) = parse_structure(text, true).unwrap();
        assert_eq!(alg.c(1, 0, 1), &Scalar::ratio(11, 10));
        // Float mode really is floating point.
        let (alg, _, _) = parse_structure(text, false).unwrap();
        assert!(!alg.is_exact());
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        let cases: &[(&str, &str)] = &[
            ("tiny dimension", r#"{"dim": 1, "entries": []}"#),
            (
                "lower-triangle entry",
                r#"{"dim": 3, "entries": [[1, 0, 2, 1]]}"#,
            ),
            (
                "duplicate entry",
                r#"{"dim": 3, "entries": [[0, 1, 2, 1], [0, 1, 2, 2]]}"#,
            ),
            (
                "out-of-range index",
                r#"{"dim": 3, "entries": [[0, 1, 7, 1]]}"#,
            ),
            (
                "asymmetric metric",
                r#"{"dim": 2, "entries": [], "metric": [[1, 1], [0, 1]]}"#,
            ),
            (
                "indefinite metric",
                r#"{"dim": 2, "entries": [], "metric": [[1, 0], [0, -1]]}"#,
            ),
            (
                "metric shape",
                r#"{"dim": 2, "entries": [], "metric": [[1, 0]]}"#,
            ),
            (
                "complex structure shape",
                r#"{"dim": 2, "entries": [], "j": [[0, -1]]}"#,
            ),
            ("not json", "{"),
            (
                "bad literal",
                r#"{"dim": 2, "entries": [[0, 1, 1, "x"]]}"#,
            ),
        ];
        for (what, text) in cases {
            assert!(
                parse_structure(text, true).is_err(),
                "{what} should be rejected"
            );
        }
    }

    #[test]
    fn rotation_structure_serializes_with_rates() {
        let spec = crate::generators::FlatSpec {
            p: 1,
            dim_h: 1,
            dim_z: 0,
            f: vec![vec![Scalar::ratio(3, 2)]],
        };
        let (_, _, fs) = crate::generators::build_flat(&spec).unwrap();
        let v = flat_structure_to_json(&fs);
        assert_eq!(v["rates"][0][0], json!("3/2"));
        assert_eq!(v["plane_pairs"][0][0][1], json!(1));
    }
}
