use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};

use super::party::{card_lex_subsets, coordinate_count, PartySet};
use crate::error::{Error, Result};

/// Scalar field for entropy vectors. Exact vectors use [`BigRational`], state-derived
/// vectors use `f64`; the two never mix implicitly.
pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Zero
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    const EXACT: bool;

    fn from_rational(r: &BigRational) -> Self;

    fn abs(&self) -> Self;

    fn to_json(&self) -> Value;

    fn from_json(v: &Value) -> Result<Self>;
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn abs(&self) -> Self {
        num_traits::Signed::abs(self)
    }

    fn to_json(&self) -> Value {
        Value::String(format_rational(self))
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => parse_rational(s),
            other => Err(Error::InvalidArgument(format!(
                "expected rational string, found {other}"
            ))),
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(r: &BigRational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn to_json(&self) -> Value {
        json!(self)
    }

    fn from_json(v: &Value) -> Result<Self> {
        v.as_f64()
            .ok_or_else(|| Error::InvalidArgument(format!("expected number, found {v}")))
    }
}

/// `"p/q"`, or `"p"` for integers.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidArgument(format!("malformed rational '{s}'"));
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Entropies (in bits) of all nonempty subsets of `n` parties.
///
/// Values are stored in mask order (`values[mask - 1]`); JSON and display use
/// cardinality-then-lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct EntropyVector<T> {
    n: usize,
    values: Vec<T>,
}

pub type ExactVector = EntropyVector<BigRational>;
pub type FloatVector = EntropyVector<f64>;

impl<T: Scalar> EntropyVector<T> {
    pub fn zeros(n: usize) -> Self {
        EntropyVector {
            n,
            values: vec![T::zero(); coordinate_count(n)],
        }
    }

    pub fn from_mask_order(n: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != coordinate_count(n) {
            return Err(Error::InvalidArgument(format!(
                "{n}-party entropy vector needs {} entries, got {}",
                coordinate_count(n),
                values.len()
            )));
        }
        Ok(EntropyVector { n, values })
    }

    pub fn from_card_lex(n: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != coordinate_count(n) {
            return Err(Error::InvalidArgument(format!(
                "{n}-party entropy vector needs {} entries, got {}",
                coordinate_count(n),
                values.len()
            )));
        }
        let mut out = vec![T::zero(); values.len()];
        for (set, v) in card_lex_subsets(n).into_iter().zip(values) {
            out[set.index()] = v;
        }
        Ok(EntropyVector { n, values: out })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(PartySet) -> T) -> Self {
        EntropyVector {
            n,
            values: super::party::subsets(n).map(&mut f).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Entropy of `set`; the empty set has entropy zero.
    pub fn get(&self, set: PartySet) -> T {
        if set.is_empty() {
            T::zero()
        } else {
            self.values[set.index()].clone()
        }
    }

    pub fn set(&mut self, set: PartySet, value: T) {
        self.values[set.index()] = value;
    }

    pub fn mask_order(&self) -> &[T] {
        &self.values
    }

    pub fn card_lex(&self) -> Vec<T> {
        card_lex_subsets(self.n)
            .into_iter()
            .map(|s| self.values[s.index()].clone())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> EntropyVector<U> {
        EntropyVector {
            n: self.n,
            values: self.values.iter().map(f).collect(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "order": "card-lex",
            "units": "bits",
            "values": self.card_lex().iter().map(T::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let (n, raw) = json_header(v)?;
        let values = raw.iter().map(T::from_json).collect::<Result<Vec<_>>>()?;
        Self::from_card_lex(n, values)
    }
}

impl ExactVector {
    pub fn from_integers(n: usize, card_lex: &[i64]) -> Result<Self> {
        Self::from_card_lex(
            n,
            card_lex
                .iter()
                .map(|&x| BigRational::from_integer(x.into()))
                .collect(),
        )
    }

    pub fn to_f64(&self) -> FloatVector {
        self.map(f64::from_rational)
    }
}

fn json_header(v: &Value) -> Result<(usize, &Vec<Value>)> {
    let n = v
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::InvalidArgument("entropy vector JSON lacks \"n\"".into()))?
        as usize;
    if let Some(order) = v.get("order").and_then(Value::as_str) {
        if order != "card-lex" {
            return Err(Error::InvalidArgument(format!(
                "unsupported order '{order}'"
            )));
        }
    }
    let raw = v
        .get("values")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::InvalidArgument("entropy vector JSON lacks \"values\"".into()))?;
    Ok((n, raw))
}

/// An entropy vector read from JSON whose scalar kind is decided by the file:
/// all strings means exact rationals, all numbers means floats.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyEntropyVector {
    Exact(ExactVector),
    Float(FloatVector),
}

impl AnyEntropyVector {
    pub fn from_json(v: &Value) -> Result<Self> {
        let (_, raw) = json_header(v)?;
        let strings = raw.iter().filter(|x| x.is_string()).count();
        if strings == raw.len() {
            Ok(AnyEntropyVector::Exact(ExactVector::from_json(v)?))
        } else if strings == 0 {
            Ok(AnyEntropyVector::Float(FloatVector::from_json(v)?))
        } else {
            Err(Error::InvalidArgument(
                "entropy vector mixes exact and floating-point entries".into(),
            ))
        }
    }

    pub fn n(&self) -> usize {
        match self {
            AnyEntropyVector::Exact(v) => v.n(),
            AnyEntropyVector::Float(v) => v.n(),
        }
    }
}
