//! State specifications in JSON. Complex entries are `[re, im]` pairs.
//!
//! Recognized `kind`s: `density`, `pure`, `basis`, `maximally-mixed`,
//! `product`, `mixture`, `ghz`, `prop2`, `remark1`, `remark1-control`.

use num_complex::Complex64;
use serde_json::{json, Value};

use super::constructions::{
    construct_prop2_state, construct_remark1_state, ghz_state, remark1_control, Prop2Block,
    Prop2Spec, Remark1Block, Remark1Spec,
};
use super::state::{CMatrix, DensityMatrix};
use crate::error::{Error, Result};

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key)
        .ok_or_else(|| bad(format!("state JSON lacks \"{key}\"")))
}

fn as_usize_list(v: &Value) -> Result<Vec<usize>> {
    v.as_array()
        .ok_or_else(|| bad("expected an array of integers"))?
        .iter()
        .map(|x| {
            x.as_u64()
                .map(|u| u as usize)
                .ok_or_else(|| bad(format!("expected a nonnegative integer, got {x}")))
        })
        .collect()
}

fn as_f64(v: &Value) -> Result<f64> {
    v.as_f64().ok_or_else(|| bad(format!("expected a number, got {v}")))
}

fn complex_from(v: &Value) -> Result<Complex64> {
    match v {
        Value::Array(pair) if pair.len() == 2 => Ok(Complex64::new(as_f64(&pair[0])?, as_f64(&pair[1])?)),
        Value::Number(_) => Ok(Complex64::new(as_f64(v)?, 0.0)),
        other => Err(bad(format!("expected [re, im], got {other}"))),
    }
}

pub fn complex_to_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn matrix_to_json(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex_to_json(m[(i, j)])).collect()))
            .collect(),
    )
}

fn matrix_from(v: &Value) -> Result<CMatrix> {
    let rows = v.as_array().ok_or_else(|| bad("matrix must be an array of rows"))?;
    let d = rows.len();
    let mut m = CMatrix::zeros(d, d);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or_else(|| bad("matrix row must be an array"))?;
        if row.len() != d {
            return Err(bad(format!("matrix row {i} has {} entries, expected {d}", row.len())));
        }
        for (j, z) in row.iter().enumerate() {
            m[(i, j)] = complex_from(z)?;
        }
    }
    Ok(m)
}

pub fn density_to_json(rho: &DensityMatrix) -> Value {
    json!({
        "kind": "density",
        "dims": rho.dims(),
        "matrix": matrix_to_json(rho.matrix()),
    })
}

pub fn prop2_spec_to_json(spec: &Prop2Spec) -> Value {
    json!({
        "kind": "prop2",
        "blocks": spec.blocks.iter().map(|b| json!({
            "weight": b.weight,
            "left": density_to_json(&b.left),
            "right": density_to_json(&b.right),
        })).collect::<Vec<_>>(),
    })
}

pub fn prop2_spec_from_json(v: &Value) -> Result<Prop2Spec> {
    let blocks = field(v, "blocks")?
        .as_array()
        .ok_or_else(|| bad("\"blocks\" must be an array"))?
        .iter()
        .map(|b| {
            Ok(Prop2Block {
                weight: as_f64(field(b, "weight")?)?,
                left: state_from_json(field(b, "left")?)?,
                right: state_from_json(field(b, "right")?)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(Prop2Spec { blocks })
}

pub fn remark1_spec_to_json(spec: &Remark1Spec) -> Value {
    json!({
        "kind": "remark1",
        "equality": spec.equality,
        "blocks": spec.blocks.iter().map(|b| json!({
            "weight": b.weight,
            "a": density_to_json(&b.a),
            "b": density_to_json(&b.b),
            "cd": density_to_json(&b.cd),
        })).collect::<Vec<_>>(),
    })
}

pub fn remark1_spec_from_json(v: &Value) -> Result<Remark1Spec> {
    let blocks = field(v, "blocks")?
        .as_array()
        .ok_or_else(|| bad("\"blocks\" must be an array"))?
        .iter()
        .map(|b| {
            Ok(Remark1Block {
                weight: as_f64(field(b, "weight")?)?,
                a: state_from_json(field(b, "a")?)?,
                b: state_from_json(field(b, "b")?)?,
                cd: state_from_json(field(b, "cd")?)?,
            })
        })
        .collect::<Result<_>>()?;
    let equality = v.get("equality").and_then(Value::as_bool).unwrap_or(false);
    Ok(Remark1Spec { blocks, equality })
}

/// Builds the density matrix described by a state specification.
pub fn state_from_json(v: &Value) -> Result<DensityMatrix> {
    let kind = field(v, "kind")?
        .as_str()
        .ok_or_else(|| bad("\"kind\" must be a string"))?;
    match kind {
        "density" => DensityMatrix::new(as_usize_list(field(v, "dims")?)?, matrix_from(field(v, "matrix")?)?),
        "pure" => {
            let psi = field(v, "vector")?
                .as_array()
                .ok_or_else(|| bad("\"vector\" must be an array"))?
                .iter()
                .map(complex_from)
                .collect::<Result<Vec<_>>>()?;
            DensityMatrix::pure(as_usize_list(field(v, "dims")?)?, &psi)
        }
        "basis" => DensityMatrix::basis(
            as_usize_list(field(v, "dims")?)?,
            &as_usize_list(field(v, "digits")?)?,
        ),
        "maximally-mixed" => {
            let dims = as_usize_list(field(v, "dims")?)?;
            if dims.is_empty() || dims.contains(&0) {
                return Err(bad("factor dimensions must be positive"));
            }
            Ok(DensityMatrix::maximally_mixed(dims))
        }
        "product" => {
            let factors = field(v, "factors")?
                .as_array()
                .ok_or_else(|| bad("\"factors\" must be an array"))?;
            let mut it = factors.iter();
            let first = it.next().ok_or_else(|| bad("empty product"))?;
            let mut rho = state_from_json(first)?;
            for f in it {
                rho = rho.tensor(&state_from_json(f)?);
            }
            Ok(rho)
        }
        "mixture" => {
            let parts = field(v, "components")?
                .as_array()
                .ok_or_else(|| bad("\"components\" must be an array"))?
                .iter()
                .map(|c| Ok((as_f64(field(c, "weight")?)?, state_from_json(field(c, "state")?)?)))
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<(f64, &DensityMatrix)> = parts.iter().map(|(w, r)| (*w, r)).collect();
            DensityMatrix::mixture(&refs)
        }
        "ghz" => {
            let n = field(v, "parties")?
                .as_u64()
                .ok_or_else(|| bad("\"parties\" must be an integer"))? as usize;
            if !(1..=12).contains(&n) {
                return Err(bad(format!("GHZ party count {n} outside 1..=12")));
            }
            Ok(ghz_state(n))
        }
        "prop2" => construct_prop2_state(&prop2_spec_from_json(v)?),
        "remark1" => construct_remark1_state(&remark1_spec_from_json(v)?),
        "remark1-control" => {
            let bullet = field(v, "bullet")?
                .as_u64()
                .ok_or_else(|| bad("\"bullet\" must be an integer"))?;
            remark1_control(bullet.min(255) as u8)
        }
        other => Err(bad(format!("unknown state kind \"{other}\""))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::sample::sample_random_state;

    #[test]
    fn density_round_trip() {
        let rho = sample_random_state(&[2, 3], 2, 4).unwrap();
        let back = state_from_json(&density_to_json(&rho)).unwrap();
        assert_eq!(back.dims(), rho.dims());
        assert!((back.matrix() - rho.matrix()).norm() < 1e-15);
    }

    #[test]
    fn composite_kinds() {
        let v = json!({
            "kind": "product",
            "factors": [
                {"kind": "mixture", "components": [
                    {"weight": 0.5, "state": {"kind": "basis", "dims": [2, 2, 2], "digits": [0, 0, 0]}},
                    {"weight": 0.5, "state": {"kind": "basis", "dims": [2, 2, 2], "digits": [1, 1, 1]}}
                ]},
                {"kind": "pure", "dims": [2], "vector": [[1, 0], [0, 0]]}
            ]
        });
        let rho = state_from_json(&v).unwrap();
        assert_eq!(rho, remark1_control(1).unwrap());
        assert!(state_from_json(&json!({"kind": "nope"})).is_err());
        assert!(state_from_json(&json!({"kind": "basis", "dims": [2], "digits": [2]})).is_err());
    }
}
