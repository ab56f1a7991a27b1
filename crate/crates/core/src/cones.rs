//! The Shannon cone Γ_n and the von Neumann cone Σ_n as lists of tagged
//! inequalities `f·h ≥ 0`.
//!
//! Every family is instantiated over all tuples of pairwise disjoint subsets
//! (parties not mentioned are traced out). Conditioning sets may be empty, in
//! which case the member reduces to a member of a smaller family and is removed
//! by deduplication. Functionals are deduplicated on their primitive integer
//! form under positive rescaling; the first tag generated wins.

use std::collections::HashSet;

use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::entropy::{
    card_lex_subsets, Atom, EntropyVector, InfoExpression, LinearFunctional, PartySet, Scalar,
};
use crate::error::{Error, Result};

/// Default ceiling on the party count for cone construction.
pub const DEFAULT_MAX_PARTIES: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConeKind {
    Classical,
    Quantum,
}

impl ConeKind {
    pub fn name(self) -> &'static str {
        match self {
            ConeKind::Classical => "shannon",
            ConeKind::Quantum => "von-neumann",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Cone {
    n: usize,
    kind: ConeKind,
    inequalities: Vec<LinearFunctional>,
}

impl Cone {
    /// A cone from arbitrary tagged inequalities; zero and duplicate functionals
    /// are dropped.
    pub fn from_inequalities(
        n: usize,
        kind: ConeKind,
        inequalities: impl IntoIterator<Item = LinearFunctional>,
    ) -> Result<Cone> {
        let mut b = ConeBuilder::new(n);
        for f in inequalities {
            Error::check_parties(n, f.n())?;
            let tag = f.tag().map(str::to_string).unwrap_or_else(|| f.to_string());
            b.push_functional(f, tag);
        }
        Ok(Cone {
            n,
            kind,
            inequalities: b.out,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> ConeKind {
        self.kind
    }

    pub fn inequalities(&self) -> &[LinearFunctional] {
        &self.inequalities
    }

    pub fn len(&self) -> usize {
        self.inequalities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inequalities.is_empty()
    }

    pub fn tag(&self, index: usize) -> &str {
        self.inequalities[index].tag().unwrap_or("")
    }

    pub fn index_of_tag(&self, tag: &str) -> Option<usize> {
        self.inequalities.iter().position(|f| f.tag() == Some(tag))
    }

    /// Index of the inequality equal to `f` up to positive scaling.
    pub fn position(&self, f: &LinearFunctional) -> Option<usize> {
        if f.n() != self.n {
            return None;
        }
        let key = f.primitive_integer();
        self.inequalities
            .iter()
            .position(|g| g.primitive_integer() == key)
    }

    /// A short selector like `vn4` or `sh3`.
    pub fn selector(&self) -> String {
        match self.kind {
            ConeKind::Classical => format!("sh{}", self.n),
            ConeKind::Quantum => format!("vn{}", self.n),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": self.kind.name(),
            "n": self.n,
            "order": "card-lex",
            "subsets": card_lex_subsets(self.n).iter().map(|s| s.label()).collect::<Vec<_>>(),
            "inequalities": self.inequalities.iter().map(|f| json!({
                "tag": f.tag(),
                "coefficients": f.card_lex_coefficients().iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

struct ConeBuilder {
    n: usize,
    seen: HashSet<Vec<BigInt>>,
    out: Vec<LinearFunctional>,
}

impl ConeBuilder {
    fn new(n: usize) -> Self {
        ConeBuilder {
            n,
            seen: HashSet::new(),
            out: Vec::new(),
        }
    }

    fn push(&mut self, atom: Atom, tag: String) {
        let f = InfoExpression::single(self.n, atom)
            .expect("generated groups are valid")
            .compile();
        self.push_functional(f, tag);
    }

    fn push_functional(&mut self, f: LinearFunctional, tag: String) {
        if f.is_zero() {
            return;
        }
        if self.seen.insert(f.primitive_integer()) {
            self.out.push(f.with_tag(tag));
        }
    }

    /// Pushes a sum of atoms, e.g. the two conditional entropies of weak monotonicity.
    fn push_sum(&mut self, atoms: &[Atom], tag: String) {
        let mut f = LinearFunctional::zero(self.n);
        for a in atoms {
            let g = InfoExpression::single(self.n, *a).unwrap().compile();
            f = f.plus(&g).unwrap();
        }
        self.push_functional(f, tag);
    }
}

fn check_n(n: usize, limit: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("cone needs at least one party".into()));
    }
    if n > limit {
        return Err(Error::TooManyParties { n, limit });
    }
    Ok(())
}

/// Ordered pairs of disjoint subsets; `x` nonempty, `y` nonempty unless `allow_empty`.
fn disjoint_pairs(n: usize, allow_empty: bool) -> Vec<(PartySet, PartySet)> {
    let sets = card_lex_subsets(n);
    let mut out = Vec::new();
    for &x in &sets {
        if allow_empty {
            out.push((x, PartySet::EMPTY));
        }
        for &y in &sets {
            if x.is_disjoint(y) {
                out.push((x, y));
            }
        }
    }
    out
}

/// Triples `(x, y, z)` with `x`, `y` nonempty, `x` before `y` in card-lex order,
/// and `z` disjoint from both, possibly empty.
fn symmetric_triples(n: usize) -> Vec<(PartySet, PartySet, PartySet)> {
    let sets = card_lex_subsets(n);
    let mut out = Vec::new();
    for &z in std::iter::once(&PartySet::EMPTY).chain(sets.iter()) {
        for (i, &x) in sets.iter().enumerate() {
            for &y in &sets[i + 1..] {
                if x.is_disjoint(y) && x.is_disjoint(z) && y.is_disjoint(z) {
                    out.push((x, y, z));
                }
            }
        }
    }
    out
}

/// Γ_n: nonnegativity of entropy, conditional entropy, mutual information and
/// conditional mutual information.
pub fn build_shannon_cone(n: usize) -> Result<Cone> {
    build_shannon_cone_limited(n, DEFAULT_MAX_PARTIES)
}

pub fn build_shannon_cone_limited(n: usize, limit: usize) -> Result<Cone> {
    check_n(n, limit)?;
    let mut b = ConeBuilder::new(n);
    for x in card_lex_subsets(n) {
        b.push(Atom::Entropy(x), format!("H({x})"));
    }
    for (x, y) in disjoint_pairs(n, true) {
        if y.is_empty() {
            b.push(Atom::Entropy(x), format!("H({x})"));
        } else {
            b.push(Atom::CondEntropy(x, y), format!("H({x}|{y})"));
        }
    }
    for (x, y, z) in symmetric_triples(n) {
        if z.is_empty() {
            b.push(Atom::MutualInfo(x, y), format!("I({x};{y})"));
        } else {
            b.push(Atom::CondMutualInfo(x, y, z), format!("I({x};{y}|{z})"));
        }
    }
    Ok(Cone {
        n,
        kind: ConeKind::Classical,
        inequalities: b.out,
    })
}

/// Σ_n: entropy nonnegativity, Araki-Lieb, weak monotonicity, subadditivity and
/// strong subadditivity. The redundant families are kept on purpose.
pub fn build_von_neumann_cone(n: usize) -> Result<Cone> {
    build_von_neumann_cone_limited(n, DEFAULT_MAX_PARTIES)
}

pub fn build_von_neumann_cone_limited(n: usize, limit: usize) -> Result<Cone> {
    check_n(n, limit)?;
    let mut b = ConeBuilder::new(n);
    for x in card_lex_subsets(n) {
        b.push(Atom::Entropy(x), format!("S({x})"));
    }
    // Araki-Lieb: S(X|Y) + S(X) ≥ 0.
    for (x, y) in disjoint_pairs(n, false) {
        b.push_sum(
            &[Atom::CondEntropy(x, y), Atom::Entropy(x)],
            format!("AL({x}|{y})"),
        );
    }
    // Weak monotonicity: S(Z|X) + S(Z|Y) ≥ 0; empty X or Y reduces to Araki-Lieb.
    let sets = card_lex_subsets(n);
    for &z in &sets {
        let others: Vec<PartySet> = std::iter::once(PartySet::EMPTY)
            .chain(sets.iter().copied())
            .filter(|s| s.is_disjoint(z))
            .collect();
        for (i, &x) in others.iter().enumerate() {
            for &y in &others[i..] {
                if !x.is_disjoint(y) {
                    continue;
                }
                let cond = |w: PartySet| {
                    if w.is_empty() {
                        Atom::Entropy(z)
                    } else {
                        Atom::CondEntropy(z, w)
                    }
                };
                b.push_sum(&[cond(x), cond(y)], format!("WM({z}|{x},{z}|{y})"));
            }
        }
    }
    for (x, y, z) in symmetric_triples(n) {
        if z.is_empty() {
            b.push(Atom::MutualInfo(x, y), format!("SA({x};{y})"));
        } else {
            b.push(Atom::CondMutualInfo(x, y, z), format!("SSA({x};{y}|{z})"));
        }
    }
    Ok(Cone {
        n,
        kind: ConeKind::Quantum,
        inequalities: b.out,
    })
}

/// Parse selectors like `vn4`, `sh3`, `vonneumann:4`.
pub fn cone_from_selector(selector: &str) -> Result<Cone> {
    let s = selector.trim().to_ascii_lowercase();
    let split = s
        .find(|c: char| c.is_ascii_digit())
        .ok_or_else(|| Error::InvalidArgument(format!("cone selector '{selector}' lacks n")))?;
    let (kind, n) = s.split_at(split);
    let n: usize = n
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad party count in '{selector}'")))?;
    match kind.trim_end_matches(':') {
        "vn" | "vonneumann" | "quantum" | "sigma" => build_von_neumann_cone(n),
        "sh" | "shannon" | "classical" | "gamma" => build_shannon_cone(n),
        other => Err(Error::InvalidArgument(format!("unknown cone kind '{other}'"))),
    }
}

#[derive(Clone, Debug)]
pub struct Violation<T> {
    pub index: usize,
    pub tag: String,
    pub value: T,
}

#[derive(Clone, Debug)]
pub struct Membership<T> {
    pub member: bool,
    pub violated: Vec<Violation<T>>,
}

/// Every inequality must evaluate to at least `-tol`. Exact vectors take an
/// exact tolerance (normally zero).
pub fn check_membership<T: Scalar>(
    v: &EntropyVector<T>,
    cone: &Cone,
    tol: &T,
) -> Result<Membership<T>> {
    Error::check_parties(cone.n, v.n())?;
    let neg_tol = -tol.clone();
    let mut violated = Vec::new();
    for (i, f) in cone.inequalities.iter().enumerate() {
        let value = f.evaluate(v)?;
        if value < neg_tol {
            violated.push(Violation {
                index: i,
                tag: cone.tag(i).to_string(),
                value,
            });
        }
    }
    Ok(Membership {
        member: violated.is_empty(),
        violated,
    })
}

/// Indices of inequalities with `|f·v| ≤ tol`.
pub fn saturated_functionals<T: Scalar>(
    v: &EntropyVector<T>,
    cone: &Cone,
    tol: &T,
) -> Result<Vec<usize>> {
    Error::check_parties(cone.n, v.n())?;
    let mut out = Vec::new();
    for (i, f) in cone.inequalities.iter().enumerate() {
        if f.evaluate(v)?.abs() <= *tol {
            out.push(i);
        }
    }
    Ok(out)
}
