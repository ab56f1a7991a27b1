use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde_json::{json, Value};

use super::Ray;
use crate::entropy::{permutations, subsets, ExactVector, PartySet};

/// One orbit of rays under relabelling of the parties.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitClass {
    /// Index (into the classified slice) of the card-lex-minimal member.
    pub representative: usize,
    /// Member indices, ascending.
    pub members: Vec<usize>,
    /// For each member, a party permutation taking the representative to it.
    pub witnesses: Vec<Vec<usize>>,
    pub representative_vector: Vec<BigInt>,
}

impl OrbitClass {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "representative": self.representative,
            "representative_vector": self
                .representative_vector
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>(),
            "members": self.members,
            "witnesses": self.witnesses,
        })
    }
}

/// Which relabellings count as symmetries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Symmetry {
    /// The `n!` permutations of the parties.
    Parties,
    /// The `(n+1)!` permutations of the parties together with a purifying
    /// party, acting through `S(T) = S(complement of T)` on pure states.
    #[default]
    WithPurifier,
}

/// Image of `v` under `perm`, a permutation of `n` or `n + 1` labels; in the
/// latter case label `n` is the purifier.
pub fn permute_vector(v: &ExactVector, perm: &[usize]) -> ExactVector {
    let n = v.n();
    assert!(perm.len() == n || perm.len() == n + 1, "bad permutation length");
    let total = perm.len();
    let extended = |t: PartySet| {
        if t.contains(n) {
            v.get(t.complement(total))
        } else {
            v.get(t)
        }
    };
    let mut out = ExactVector::zeros(n);
    for t in subsets(total) {
        let image = t.permuted(perm);
        if !image.contains(n) || total == n {
            out.set(image, extended(t));
        }
    }
    out
}

/// Partition `rays` into orbits under the default symmetry group.
pub fn classify_orbits(rays: &[Ray], n: usize) -> Vec<OrbitClass> {
    classify_orbits_under(rays, n, Symmetry::default())
}

/// Partition `rays` into orbits under `symmetry`.
///
/// Classes are ordered by their representatives' card-lex vectors. Images that
/// are not in `rays` are ignored, so a non-symmetric input still partitions.
pub fn classify_orbits_under(rays: &[Ray], n: usize, symmetry: Symmetry) -> Vec<OrbitClass> {
    let index: BTreeMap<Vec<BigInt>, usize> = rays
        .iter()
        .enumerate()
        .map(|(i, r)| (r.card_lex_integers(), i))
        .collect();
    let perms = match symmetry {
        Symmetry::Parties => permutations(n),
        Symmetry::WithPurifier => permutations(n + 1),
    };
    let mut assigned = vec![false; rays.len()];
    let mut classes = Vec::new();
    // rays are visited in card-lex order of their vectors, so the first
    // unassigned ray is the minimal member of its orbit
    for (key, &start) in &index {
        if assigned[start] {
            continue;
        }
        let mut found: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for p in &perms {
            let image = permute_vector(&rays[start].vector, p);
            let image_key: Vec<BigInt> = image.card_lex().iter().map(|x| x.to_integer()).collect();
            if let Some(&j) = index.get(&image_key) {
                found.entry(j).or_insert_with(|| p.clone());
            }
        }
        for &j in found.keys() {
            assigned[j] = true;
        }
        classes.push(OrbitClass {
            representative: start,
            members: found.keys().copied().collect(),
            witnesses: found.into_values().collect(),
            representative_vector: key.clone(),
        });
    }
    classes
}
