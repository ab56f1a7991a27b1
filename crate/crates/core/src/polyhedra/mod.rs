//! Extreme rays of entropy cones, their symmetry classes, and ray lookup.

mod dd;
mod orbits;

pub use dd::{double_description, integer_rank, DdOptions, InsertionOrder};
pub use orbits::{classify_orbits, classify_orbits_under, permute_vector, OrbitClass, Symmetry};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::cones::{saturated_functionals, Cone};
use crate::entropy::{card_lex_subsets, coordinate_count, ExactVector, PartySet};
use crate::error::{Error, Result};
use crate::prover::primitive_integer;

/// Largest coordinate dimension accepted by the enumerator.
pub const MAX_DIMENSION: usize = 31;

/// An extreme ray in primitive integer form, with the cone inequalities it saturates.
#[derive(Clone, Debug, PartialEq)]
pub struct Ray {
    pub vector: ExactVector,
    pub saturated: Vec<String>,
}

impl Ray {
    pub fn n(&self) -> usize {
        self.vector.n()
    }

    /// Primitive integer coordinates in card-lex order.
    pub fn card_lex_integers(&self) -> Vec<BigInt> {
        self.vector.card_lex().iter().map(|x| x.to_integer()).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "vector": self.card_lex_integers().iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "saturated": self.saturated,
        })
    }
}

fn integer_rows(cone: &Cone) -> Vec<Vec<BigInt>> {
    cone.inequalities()
        .iter()
        .map(|f| f.primitive_integer())
        .collect()
}

fn ray_from_mask_order(n: usize, coords: &[BigInt]) -> ExactVector {
    ExactVector::from_mask_order(
        n,
        coords
            .iter()
            .map(|x| BigRational::from_integer(x.clone()))
            .collect(),
    )
    .expect("coordinate count matches")
}

/// All extreme rays of `cone`, sorted card-lex on their primitive vectors.
pub fn enumerate_extreme_rays(cone: &Cone) -> Result<Vec<Ray>> {
    enumerate_extreme_rays_with(cone, &DdOptions::default())
}

pub fn enumerate_extreme_rays_with(cone: &Cone, opts: &DdOptions) -> Result<Vec<Ray>> {
    let n = cone.n();
    let dim = coordinate_count(n);
    if dim > MAX_DIMENSION {
        return Err(Error::ResourceLimit(format!(
            "dimension {dim} exceeds {MAX_DIMENSION}"
        )));
    }
    let raw = double_description(&integer_rows(cone), dim, opts)?;
    let mut rays: Vec<Ray> = raw
        .iter()
        .map(|coords| {
            let vector = ray_from_mask_order(n, coords);
            let saturated = saturated_functionals(&vector, cone, &BigRational::zero())?
                .into_iter()
                .map(|i| cone.tag(i).to_string())
                .collect();
            Ok(Ray { vector, saturated })
        })
        .collect::<Result<_>>()?;
    rays.sort_by_cached_key(Ray::card_lex_integers);
    Ok(rays)
}

fn primitive_card_lex(v: &ExactVector) -> Vec<BigInt> {
    primitive_integer(&v.card_lex())
}

/// Index of the ray that `v` is a positive multiple of, if any.
pub fn ray_membership(rays: &[Ray], v: &ExactVector) -> Result<Option<usize>> {
    if v.is_zero() {
        return Err(Error::InvalidArgument(
            "the zero vector spans no ray".into(),
        ));
    }
    let key = primitive_card_lex(v);
    for (i, r) in rays.iter().enumerate() {
        Error::check_parties(r.n(), v.n())?;
        if r.card_lex_integers() == key {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// Rays JSON: `{"n", "order", "rays": [{vector, saturated, class?}], "classes"?}`.
pub fn rays_to_json(rays: &[Ray], classes: Option<&[OrbitClass]>) -> Value {
    let n = rays.first().map(Ray::n).unwrap_or(0);
    let mut class_of = vec![None; rays.len()];
    if let Some(cs) = classes {
        for (k, c) in cs.iter().enumerate() {
            for &m in &c.members {
                class_of[m] = Some(k);
            }
        }
    }
    let entries: Vec<Value> = rays
        .iter()
        .zip(&class_of)
        .map(|(r, c)| {
            let mut v = r.to_json();
            if let Some(k) = c {
                v["class"] = json!(k);
            }
            v
        })
        .collect();
    let mut out = json!({
        "n": n,
        "order": "card-lex",
        "coordinates": card_lex_subsets(n).iter().map(|s: &PartySet| s.label()).collect::<Vec<_>>(),
        "count": rays.len(),
        "rays": entries,
    });
    if let Some(cs) = classes {
        out["classes"] = Value::Array(cs.iter().map(OrbitClass::to_json).collect());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::{build_shannon_cone, build_von_neumann_cone};

    #[test]
    fn two_party_cones() {
        // Σ_2 rays: (1,0,1),(0,1,1),(1,1,0) card-lex; Γ_2: (0,1,1),(1,0,1),(1,1,1)
        let vn = enumerate_extreme_rays(&build_von_neumann_cone(2).unwrap()).unwrap();
        let got: Vec<Vec<BigInt>> = vn.iter().map(Ray::card_lex_integers).collect();
        let expect: Vec<Vec<BigInt>> = [[0, 1, 1], [1, 0, 1], [1, 1, 0]]
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        assert_eq!(got, expect);
        let sh = enumerate_extreme_rays(&build_shannon_cone(2).unwrap()).unwrap();
        assert_eq!(sh.len(), 3);
    }

    #[test]
    fn membership_rejects_zero_and_scales() {
        let rays = enumerate_extreme_rays(&build_von_neumann_cone(2).unwrap()).unwrap();
        let zero = ExactVector::zeros(2);
        assert!(ray_membership(&rays, &zero).is_err());
        let v = ExactVector::from_integers(2, &[5, 5, 0]).unwrap();
        assert_eq!(ray_membership(&rays, &v).unwrap(), Some(2));
        let w = ExactVector::from_integers(2, &[1, 1, 1]).unwrap();
        assert_eq!(ray_membership(&rays, &w).unwrap(), None);
    }
}
