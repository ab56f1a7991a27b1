//! Four-party state families, parametrized through [`Draw`].
//!
//! Parties are ordered A, B, C, D. The constrained families satisfy
//! `I(A;C|B) = I(C;B|A) = I(A;B|D) = 0` for every parameter value.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::{json, Value};

use super::draw::{
    draw_composition, draw_mixed_state, draw_state, draw_weights, Draw, Recorder, Replay,
};
use crate::error::{Error, Result};
use crate::quantum::{
    block_direct_sum, construct_prop2_state, remark1_control, DensityMatrix, Prop2Block,
    Prop2Spec,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// Blocks `q_j ρ_j^A ⊗ σ_j^B ⊗ φ_j^{CD}` with arbitrary `φ_j`, sectors
    /// orthogonal on A, B and D.
    Remark1,
    /// As `Remark1` with `φ_j = τ_j ⊗ ζ_j` and orthogonal `τ_j`.
    Equality,
    /// Sectors orthogonal on A, B and D; inside each sector an SSA-saturating
    /// state on A, D′, B with pivot D′, tensored with a state on C, D″.
    Prop2,
    /// Unconstrained states: marginals of random pure states with a small ancilla.
    General,
    /// The fixed control state saturating only ABC and CAB.
    Control1,
    /// The fixed control state saturating only ABC and ADB.
    Control2,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Remark1,
        Family::Equality,
        Family::Prop2,
        Family::General,
        Family::Control1,
        Family::Control2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Remark1 => "remark1",
            Family::Equality => "equality",
            Family::Prop2 => "prop2",
            Family::General => "general",
            Family::Control1 => "control1",
            Family::Control2 => "control2",
        }
    }

    pub fn parse(text: &str) -> Result<Family> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == text)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown family \"{text}\" (expected one of {})",
                    Family::ALL.map(Family::name).join(", ")
                ))
            })
    }

    /// Whether every member satisfies the three constraints by construction.
    pub fn is_constrained(self) -> bool {
        matches!(self, Family::Remark1 | Family::Equality | Family::Prop2)
    }

    /// Whether the family ignores requested dimensions.
    pub fn is_fixed(self) -> bool {
        matches!(self, Family::Control1 | Family::Control2)
    }
}

/// Largest ancilla used by [`Family::General`].
pub const GENERAL_MAX_RANK: usize = 2;

/// A member of `family` with local dimensions `dims` (ignored by the controls).
pub fn generate(family: Family, dims: [usize; 4], draw: &mut dyn Draw) -> Result<DensityMatrix> {
    if !family.is_fixed() && dims.contains(&0) {
        return Err(Error::InvalidArgument(format!(
            "dimensions must be positive, got {dims:?}"
        )));
    }
    match family {
        Family::Remark1 => remark1_member(dims, draw, false),
        Family::Equality => remark1_member(dims, draw, true),
        Family::Prop2 => prop2_member(dims, draw),
        Family::General => {
            let d: usize = dims.iter().product();
            let rank = 1 + draw.index(d.min(GENERAL_MAX_RANK));
            Ok(draw_state(&dims, rank, draw))
        }
        Family::Control1 => remark1_control(1),
        Family::Control2 => remark1_control(2),
    }
}

/// Pads `rho` with zero rows/columns to a `d`-dimensional state whose
/// support starts at basis index `offset`.
fn embed_single(rho: &DensityMatrix, d: usize, offset: usize) -> DensityMatrix {
    let k = rho.dim();
    let m = DMatrix::from_fn(d, d, |i, j| {
        if (offset..offset + k).contains(&i) && (offset..offset + k).contains(&j) {
            rho.matrix()[(i - offset, j - offset)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    DensityMatrix::from_parts(vec![d], m)
}

fn remark1_member(dims: [usize; 4], draw: &mut dyn Draw, equality: bool) -> Result<DensityMatrix> {
    let [da, db, dc, dd] = dims;
    let mut max_blocks = da.min(db).min(dd);
    if equality {
        max_blocks = max_blocks.min(dc);
    }
    let k = 1 + draw.index(max_blocks);
    let a_parts = draw_composition(da, k, draw);
    let b_parts = draw_composition(db, k, draw);
    let d_parts = draw_composition(dd, k, draw);
    let c_parts = if equality {
        draw_composition(dc, k, draw)
    } else {
        vec![dc; k]
    };
    let weights = draw_weights(k, draw);
    let mut blocks = Vec::with_capacity(k);
    let mut c_offset = 0;
    for j in 0..k {
        let a = draw_mixed_state(&[a_parts[j]], draw);
        let b = draw_mixed_state(&[b_parts[j]], draw);
        let cd = if equality {
            let tau = embed_single(&draw_mixed_state(&[c_parts[j]], draw), dc, c_offset);
            c_offset += c_parts[j];
            tau.tensor(&draw_mixed_state(&[d_parts[j]], draw))
        } else {
            draw_mixed_state(&[dc, d_parts[j]], draw)
        };
        blocks.push(a.tensor(&b).tensor(&cd));
    }
    let refs: Vec<(f64, &DensityMatrix)> = weights.iter().copied().zip(&blocks).collect();
    block_direct_sum(&refs, &[false, false, true, false])
}

fn divisors(n: usize) -> Vec<usize> {
    (1..=n).filter(|&d| n.is_multiple_of(d)).collect()
}

/// Structured state on `(x, pivot, y)` with `pivot` split into drawn
/// sectors, each factored into drawn `b^L ⊗ b^R` dimensions.
pub fn draw_prop2_spec(dx: usize, dpivot: usize, dy: usize, draw: &mut dyn Draw) -> Prop2Spec {
    let m = 1 + draw.index(dpivot);
    let sizes = draw_composition(dpivot, m, draw);
    let weights = draw_weights(m, draw);
    let mut blocks = Vec::with_capacity(m);
    for (size, weight) in sizes.into_iter().zip(weights) {
        let divs = divisors(size);
        let left_dim = divs[draw.index(divs.len())];
        let right_dim = size / left_dim;
        blocks.push(Prop2Block {
            weight,
            left: draw_mixed_state(&[dx, left_dim], draw),
            right: draw_mixed_state(&[right_dim, dy], draw),
        });
    }
    Prop2Spec { blocks }
}

fn prop2_member(dims: [usize; 4], draw: &mut dyn Draw) -> Result<DensityMatrix> {
    let [da, db, dc, dd] = dims;
    let k = 1 + draw.index(da.min(db).min(dd));
    let a_parts = draw_composition(da, k, draw);
    let b_parts = draw_composition(db, k, draw);
    let d_parts = draw_composition(dd, k, draw);
    let weights = draw_weights(k, draw);
    let mut blocks = Vec::with_capacity(k);
    for j in 0..k {
        let divs = divisors(d_parts[j]);
        let d_pivot = divs[draw.index(divs.len())];
        let d_rest = d_parts[j] / d_pivot;
        // (A, D′, B) → (A, B, D′)
        let omega = construct_prop2_state(&draw_prop2_spec(a_parts[j], d_pivot, b_parts[j], draw))?.reorder(&[0, 2, 1])?;
        let phi = draw_mixed_state(&[dc, d_rest], draw);
        // (A, B, D′, C, D″) → (A, B, C, D′, D″), then merge D′ D″
        let joined = omega.tensor(&phi).reorder(&[0, 1, 3, 2, 4])?;
        blocks.push(DensityMatrix::from_parts(
            vec![a_parts[j], b_parts[j], dc, d_parts[j]],
            joined.matrix().clone(),
        ));
    }
    let refs: Vec<(f64, &DensityMatrix)> = weights.iter().copied().zip(&blocks).collect();
    block_direct_sum(&refs, &[false, false, true, false])
}

/// Everything needed to rebuild a family member exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplaySpec {
    pub family: Family,
    pub dims: [usize; 4],
    pub indices: Vec<usize>,
    pub normals: Vec<f64>,
}

impl ReplaySpec {
    /// Draws a fresh member and records the draws.
    pub fn record(family: Family, dims: [usize; 4], draw: &mut dyn Draw) -> Result<(ReplaySpec, DensityMatrix)> {
        let mut rec = Recorder::new(draw);
        let state = generate(family, dims, &mut rec)?;
        let spec = ReplaySpec {
            family,
            dims,
            indices: rec.indices,
            normals: rec.normals,
        };
        Ok((spec, state))
    }

    pub fn build(&self) -> Result<DensityMatrix> {
        generate(self.family, self.dims, &mut Replay::new(&self.normals, &self.indices))
    }

    /// Same structure with different continuous parameters.
    pub fn with_normals(&self, normals: &[f64]) -> ReplaySpec {
        ReplaySpec {
            normals: normals.to_vec(),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": "family",
            "family": self.family.name(),
            "dims": self.dims,
            "indices": self.indices,
            "normals": self.normals,
        })
    }

    pub fn from_json(v: &Value) -> Result<ReplaySpec> {
        let bad = |m: &str| Error::InvalidArgument(format!("family spec: {m}"));
        let family = Family::parse(
            v.get("family")
                .and_then(Value::as_str)
                .ok_or_else(|| bad("missing \"family\""))?,
        )?;
        let dims_v: Vec<usize> = v
            .get("dims")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing \"dims\""))?
            .iter()
            .map(|x| x.as_u64().map(|u| u as usize).ok_or_else(|| bad("bad dimension")))
            .collect::<Result<_>>()?;
        let dims: [usize; 4] = dims_v
            .try_into()
            .map_err(|_| bad("\"dims\" must list four dimensions"))?;
        let indices = v
            .get("indices")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing \"indices\""))?
            .iter()
            .map(|x| x.as_u64().map(|u| u as usize).ok_or_else(|| bad("bad index")))
            .collect::<Result<_>>()?;
        let normals = v
            .get("normals")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing \"normals\""))?
            .iter()
            .map(|x| x.as_f64().ok_or_else(|| bad("bad parameter")))
            .collect::<Result<_>>()?;
        Ok(ReplaySpec {
            family,
            dims,
            indices,
            normals,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::compile_str;
    use crate::quantum::{entropy_vector, stream_rng};

    fn eval(rho: &DensityMatrix, expr: &str) -> f64 {
        compile_str(expr, 4)
            .unwrap()
            .evaluate(&entropy_vector(rho).unwrap())
            .unwrap()
    }

    #[test]
    fn constrained_families_meet_constraints() {
        for family in [Family::Remark1, Family::Equality, Family::Prop2] {
            for trial in 0..20 {
                let mut rng = stream_rng(17, trial);
                let rho = generate(family, [3, 3, 3, 3], &mut rng).unwrap();
                for c in ["I(A;C|B)", "I(C;B|A)", "I(A;B|D)"] {
                    let r = eval(&rho, c);
                    assert!(r.abs() < 1e-9, "{} trial {trial}: {c} = {r}", family.name());
                }
                assert!(eval(&rho, "I(C;D) - I(C;AB)") > -1e-9);
            }
        }
    }

    #[test]
    fn replay_round_trip() {
        let mut rng = stream_rng(5, 1);
        let (spec, rho) = ReplaySpec::record(Family::Prop2, [2, 3, 2, 3], &mut rng).unwrap();
        let back = ReplaySpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(back, spec);
        assert_eq!(back.build().unwrap(), rho);
    }

    #[test]
    fn names_parse() {
        for f in Family::ALL {
            assert_eq!(Family::parse(f.name()).unwrap(), f);
        }
        assert!(Family::parse("bogus").is_err());
    }
}
