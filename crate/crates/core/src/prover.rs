//! Exact derivability decisions.
//!
//! A target `t` is derivable from a cone `{b_j}` under equality constraints `{g_i}`
//! when `t = Σ λ_j b_j + Σ μ_i g_i` with `λ ≥ 0`. Otherwise the Farkas alternative
//! supplies a point of the cone with all `g_i = 0` and `t < 0`; we report the
//! lexicographically smallest most-violating vertex of the normalized slice.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Map, Value};

use crate::cones::Cone;
use crate::entropy::{
    card_lex_subsets, coordinate_count, format_rational, parse_rational, ExactVector,
    LinearFunctional, PartySet, Scalar,
};
use crate::error::{Error, Result};
use crate::lp::{solve, LpOutcome, StandardLp};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Certificate {
    /// Cone inequality tag → nonnegative multiplier.
    pub lambda: BTreeMap<String, BigRational>,
    /// Constraint index → free multiplier.
    pub mu: BTreeMap<usize, BigRational>,
}

impl Certificate {
    pub fn to_json(&self) -> Value {
        let lambda: Map<String, Value> = self
            .lambda
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(format_rational(v))))
            .collect();
        let mu: Map<String, Value> = self
            .mu
            .iter()
            .map(|(k, v)| (k.to_string(), Value::String(format_rational(v))))
            .collect();
        json!({ "lambda": lambda, "mu": mu })
    }

    pub fn from_json(v: &Value) -> Result<Certificate> {
        let mut cert = Certificate::default();
        let obj = |key: &str| {
            v.get(key)
                .and_then(Value::as_object)
                .ok_or_else(|| Error::InvalidArgument(format!("certificate lacks \"{key}\"")))
        };
        for (k, x) in obj("lambda")? {
            cert.lambda.insert(k.clone(), rational_field(x)?);
        }
        for (k, x) in obj("mu")? {
            let idx: usize = k
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad constraint index '{k}'")))?;
            cert.mu.insert(idx, rational_field(x)?);
        }
        Ok(cert)
    }
}

fn rational_field(v: &Value) -> Result<BigRational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) if n.is_i64() => Ok(BigRational::from_integer(n.as_i64().unwrap().into())),
        other => Err(Error::InvalidArgument(format!("bad rational {other}"))),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CounterRay {
    /// Primitive integer representative.
    pub vector: ExactVector,
    /// Target evaluated on `vector`; negative.
    pub value: BigRational,
}

impl CounterRay {
    pub fn to_json(&self) -> Value {
        json!({ "vector": self.vector.to_json(), "value": format_rational(&self.value) })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Derivable(Certificate),
    NotDerivable(CounterRay),
}

impl Verdict {
    pub fn is_derivable(&self) -> bool {
        matches!(self, Verdict::Derivable(_))
    }

    pub fn to_json(&self) -> Value {
        match self {
            Verdict::Derivable(c) => json!({
                "verdict": "derivable",
                "certificate": c.to_json(),
            }),
            Verdict::NotDerivable(r) => json!({
                "verdict": "not-derivable",
                "counterray": r.to_json(),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConeOptimum {
    pub value: BigRational,
    /// Optimizer on the normalization hyperplane.
    pub point: ExactVector,
}

/// Sum of singleton entropies; positive on Σ_n and Γ_n away from the apex.
pub fn default_normalization(n: usize) -> LinearFunctional {
    LinearFunctional::from_terms(
        n,
        (0..n).map(|p| (PartySet::singleton(p), BigRational::one())),
    )
    .with_tag("normalization")
}

fn check_family(cone: &Cone, constraints: &[LinearFunctional], others: &[&LinearFunctional]) -> Result<()> {
    for f in constraints.iter().chain(others.iter().copied()) {
        Error::check_parties(cone.n(), f.n())?;
    }
    Ok(())
}

/// `min o·h` over `{h : a_j·h ≥ 0, e_i·h = r_i}` solved through its dual
/// `max Σ r_i w_i  s.t.  Σ λ_j a_j + Σ w_i e_i = o, λ ≥ 0`.
fn minimize_raw(
    dim: usize,
    ge_rows: &[Vec<BigRational>],
    eq_rows: &[(Vec<BigRational>, BigRational)],
    objective: &[BigRational],
) -> Result<(BigRational, Vec<BigRational>)> {
    let ncols = ge_rows.len() + 2 * eq_rows.len();
    let mut a = vec![Vec::with_capacity(ncols); dim];
    let mut c = Vec::with_capacity(ncols);
    for row in ge_rows {
        for k in 0..dim {
            a[k].push(row[k].clone());
        }
        c.push(BigRational::zero());
    }
    for (row, rhs) in eq_rows {
        for k in 0..dim {
            a[k].push(row[k].clone());
            a[k].push(-row[k].clone());
        }
        c.push(-rhs.clone());
        c.push(rhs.clone());
    }
    let lp = StandardLp {
        a,
        b: objective.to_vec(),
        c,
    };
    match solve(&lp) {
        LpOutcome::Optimal(sol) => {
            let h: Vec<BigRational> = sol.y.iter().map(|v| -v.clone()).collect();
            Ok((-sol.value, h))
        }
        LpOutcome::Unbounded { .. } => Err(Error::Infeasible),
        LpOutcome::Infeasible { .. } => {
            // Dual infeasible: primal unbounded unless the primal is empty too.
            let zero = vec![BigRational::zero(); dim];
            let probe = StandardLp {
                b: zero,
                ..lp
            };
            match solve(&probe) {
                LpOutcome::Unbounded { .. } => Err(Error::Infeasible),
                _ => Err(Error::Unbounded),
            }
        }
    }
}

/// Minimize `objective` over `cone ∩ {constraints = 0} ∩ {normalization = 1}`.
///
/// Among optimal points the lexicographically smallest in card-lex order is
/// returned, which is a vertex of the slice, i.e. an extreme ray of the
/// constrained cone.
pub fn minimize_over_cone(
    cone: &Cone,
    constraints: &[LinearFunctional],
    objective: &LinearFunctional,
    normalization: &LinearFunctional,
) -> Result<ConeOptimum> {
    check_family(cone, constraints, &[objective, normalization])?;
    let n = cone.n();
    let dim = coordinate_count(n);
    let ge: Vec<Vec<BigRational>> = cone.inequalities().iter().map(|f| f.dense()).collect();
    let mut eq: Vec<(Vec<BigRational>, BigRational)> = constraints
        .iter()
        .map(|g| (g.dense(), BigRational::zero()))
        .collect();
    eq.push((normalization.dense(), BigRational::one()));
    let (value, mut point) = minimize_raw(dim, &ge, &eq, &objective.dense())?;

    eq.push((objective.dense(), value.clone()));
    for set in card_lex_subsets(n) {
        let mut e = vec![BigRational::zero(); dim];
        e[set.index()] = BigRational::one();
        match minimize_raw(dim, &ge, &eq, &e) {
            Ok((v, p)) => {
                point = p;
                eq.push((e, v));
            }
            // Coordinate unbounded below on the optimal face: keep what we have.
            Err(Error::Unbounded) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(ConeOptimum {
        value,
        point: ExactVector::from_mask_order(n, point)?,
    })
}

/// Smallest positive integer multiple of a rational vector (sign preserved).
pub fn primitive_integer(values: &[BigRational]) -> Vec<BigInt> {
    let lcm = values
        .iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let ints: Vec<BigInt> = values
        .iter()
        .map(|v| (v * BigRational::from_integer(lcm.clone())).to_integer())
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        ints
    } else {
        ints.into_iter().map(|x| x / &g).collect()
    }
}

fn find_certificate(
    cone: &Cone,
    constraints: &[LinearFunctional],
    target: &LinearFunctional,
) -> Option<Certificate> {
    let dim = coordinate_count(cone.n());
    let columns: Vec<Vec<BigRational>> = cone
        .inequalities()
        .iter()
        .map(|f| f.dense())
        .chain(constraints.iter().flat_map(|g| {
            let d = g.dense();
            let neg = d.iter().map(|x| -x.clone()).collect();
            [d, neg]
        }))
        .collect();
    let a: Vec<Vec<BigRational>> = (0..dim)
        .map(|k| columns.iter().map(|col| col[k].clone()).collect())
        .collect();
    // Minimizing the total multiplier mass favors short certificates.
    let lp = StandardLp {
        a,
        b: target.dense(),
        c: vec![BigRational::one(); columns.len()],
    };
    let LpOutcome::Optimal(sol) = solve(&lp) else {
        return None;
    };
    let m = cone.len();
    let mut cert = Certificate::default();
    for (j, x) in sol.x[..m].iter().enumerate() {
        if !x.is_zero() {
            cert.lambda.insert(cone.tag(j).to_string(), x.clone());
        }
    }
    for i in 0..constraints.len() {
        let mu = &sol.x[m + 2 * i] - &sol.x[m + 2 * i + 1];
        if !mu.is_zero() {
            cert.mu.insert(i, mu);
        }
    }
    Some(cert)
}

/// Decide whether `target ≥ 0` follows from the cone inequalities and
/// `constraints = 0`.
pub fn prove_implication(
    cone: &Cone,
    constraints: &[LinearFunctional],
    target: &LinearFunctional,
) -> Result<Verdict> {
    check_family(cone, constraints, &[target])?;
    if cone.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot normalize over an empty inequality list".into(),
        ));
    }
    if let Some(cert) = find_certificate(cone, constraints, target) {
        return Ok(Verdict::Derivable(cert));
    }
    let opt = minimize_over_cone(cone, constraints, target, &default_normalization(cone.n()))?;
    if !opt.value.is_negative() {
        return Err(Error::InvalidState(format!(
            "no certificate yet the normalized minimum is {}",
            format_rational(&opt.value)
        )));
    }
    let ints = primitive_integer(opt.point.mask_order());
    let vector = ExactVector::from_mask_order(
        cone.n(),
        ints.into_iter().map(BigRational::from_integer).collect(),
    )?;
    let value = target.evaluate(&vector)?;
    Ok(Verdict::NotDerivable(CounterRay { vector, value }))
}

#[derive(Clone, Debug)]
pub struct CertificateCheck {
    pub valid: bool,
    /// `target − recombination`; zero for a valid certificate.
    pub diff: LinearFunctional,
    pub negative_multipliers: Vec<String>,
    pub unknown_tags: Vec<String>,
    pub bad_constraint_indices: Vec<usize>,
}

impl CertificateCheck {
    pub fn to_json(&self) -> Value {
        json!({
            "valid": self.valid,
            "diff": self.diff.to_json(),
            "negative_multipliers": self.negative_multipliers,
            "unknown_tags": self.unknown_tags,
            "bad_constraint_indices": self.bad_constraint_indices,
        })
    }
}

/// Recombine the certificate exactly and compare with the target.
pub fn verify_certificate(
    cert: &Certificate,
    cone: &Cone,
    constraints: &[LinearFunctional],
    target: &LinearFunctional,
) -> CertificateCheck {
    let n = target.n();
    let mut combo = LinearFunctional::zero(n);
    let mut negative_multipliers = Vec::new();
    let mut unknown_tags = Vec::new();
    let mut bad_constraint_indices = Vec::new();
    for (tag, lambda) in &cert.lambda {
        if lambda.is_negative() {
            negative_multipliers.push(tag.clone());
        }
        match cone.index_of_tag(tag) {
            Some(j) if cone.n() == n => {
                combo = combo.plus(&cone.inequalities()[j].scaled(lambda)).unwrap();
            }
            _ => unknown_tags.push(tag.clone()),
        }
    }
    for (&i, mu) in &cert.mu {
        match constraints.get(i) {
            Some(g) if g.n() == n => combo = combo.plus(&g.scaled(mu)).unwrap(),
            _ => bad_constraint_indices.push(i),
        }
    }
    let diff = target.minus(&combo).unwrap();
    CertificateCheck {
        valid: diff.is_zero()
            && negative_multipliers.is_empty()
            && unknown_tags.is_empty()
            && bad_constraint_indices.is_empty(),
        diff,
        negative_multipliers,
        unknown_tags,
        bad_constraint_indices,
    }
}

/// Exact check that a counter-ray lies in the constrained cone and violates the target.
pub fn verify_counter_ray(
    ray: &CounterRay,
    cone: &Cone,
    constraints: &[LinearFunctional],
    target: &LinearFunctional,
) -> Result<bool> {
    let zero = BigRational::zero();
    let member = crate::cones::check_membership(&ray.vector, cone, &zero)?.member;
    let on_face = constraints
        .iter()
        .map(|g| g.evaluate(&ray.vector))
        .collect::<Result<Vec<_>>>()?
        .iter()
        .all(Zero::is_zero);
    let value = target.evaluate(&ray.vector)?;
    Ok(member && on_face && value.is_negative() && value == ray.value)
}

/// Float view of a rational for reports.
pub fn approx(r: &BigRational) -> f64 {
    f64::from_rational(r)
}
