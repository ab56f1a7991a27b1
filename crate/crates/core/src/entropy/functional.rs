use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use super::party::{card_lex_subsets, coordinate_count, PartySet};
use super::vector::{format_rational, parse_rational, EntropyVector, Scalar};
use crate::error::{Error, Result};

/// A linear form `Σ c_T S(T)` over the subset entropies of `n` parties.
///
/// Equality compares `n` and coefficients only; the tag is a label.
#[derive(Clone, Debug)]
pub struct LinearFunctional {
    n: usize,
    coeffs: BTreeMap<u32, BigRational>,
    tag: Option<String>,
}

impl PartialEq for LinearFunctional {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.coeffs == other.coeffs
    }
}

impl Eq for LinearFunctional {}

impl LinearFunctional {
    pub fn zero(n: usize) -> Self {
        LinearFunctional {
            n,
            coeffs: BTreeMap::new(),
            tag: None,
        }
    }

    pub fn from_terms<I>(n: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (PartySet, BigRational)>,
    {
        let mut f = LinearFunctional::zero(n);
        for (set, c) in terms {
            f.add_term(set, &c);
        }
        f
    }

    /// Convenience constructor from small integer coefficients.
    pub fn from_int_terms(n: usize, terms: &[(PartySet, i64)]) -> Self {
        Self::from_terms(
            n,
            terms
                .iter()
                .map(|(s, c)| (*s, BigRational::from_integer((*c).into()))),
        )
    }

    pub fn from_mask_order(n: usize, dense: &[BigRational]) -> Self {
        Self::from_terms(
            n,
            dense
                .iter()
                .enumerate()
                .map(|(i, c)| (PartySet::from_index(i), c.clone())),
        )
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = Some(tag.into());
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tag(&self) -> Option<&str> {
        self.tag.as_deref()
    }

    /// Adds `c·S(set)`; terms on the empty set are constant zero and dropped.
    pub fn add_term(&mut self, set: PartySet, c: &BigRational) {
        assert!(set.fits(self.n), "{set} outside {} parties", self.n);
        if set.is_empty() || c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(set.mask()).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&set.mask());
        }
    }

    pub fn coefficient(&self, set: PartySet) -> BigRational {
        self.coeffs
            .get(&set.mask())
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (PartySet, &BigRational)> {
        self.coeffs.iter().map(|(m, c)| (PartySet::from_mask(*m), c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn scaled(&self, k: &BigRational) -> LinearFunctional {
        let mut out = LinearFunctional::zero(self.n);
        for (s, c) in self.terms() {
            out.add_term(s, &(c * k));
        }
        out
    }

    pub fn plus(&self, other: &LinearFunctional) -> Result<LinearFunctional> {
        Error::check_parties(self.n, other.n)?;
        let mut out = self.clone();
        out.tag = None;
        for (s, c) in other.terms() {
            out.add_term(s, c);
        }
        Ok(out)
    }

    pub fn minus(&self, other: &LinearFunctional) -> Result<LinearFunctional> {
        self.plus(&other.scaled(&-BigRational::one()))
    }

    pub fn negated(&self) -> LinearFunctional {
        self.scaled(&-BigRational::one())
    }

    /// Dot product with an entropy vector. Coefficients are converted into the
    /// vector's scalar type, so exact inputs give exact outputs.
    pub fn evaluate<T: Scalar>(&self, v: &EntropyVector<T>) -> Result<T> {
        Error::check_parties(self.n, v.n())?;
        Ok(self.terms().fold(T::zero(), |acc, (s, c)| {
            acc + T::from_rational(c) * v.get(s)
        }))
    }

    /// Dense coefficients in mask order.
    pub fn dense(&self) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); coordinate_count(self.n)];
        for (s, c) in self.terms() {
            out[s.index()] = c.clone();
        }
        out
    }

    pub fn card_lex_coefficients(&self) -> Vec<BigRational> {
        card_lex_subsets(self.n)
            .into_iter()
            .map(|s| self.coefficient(s))
            .collect()
    }

    /// Coprime integer coefficients (mask order) obtained by a *positive* rescaling,
    /// so the halfspace `f ≥ 0` is unchanged. Used as a dedup key.
    pub fn primitive_integer(&self) -> Vec<BigInt> {
        let dense = self.dense();
        let lcm = dense
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = dense
            .iter()
            .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer())
            .collect();
        let gcd = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        if gcd.is_zero() {
            return ints;
        }
        ints.into_iter().map(|x| x / &gcd).collect()
    }

    /// Relabel parties: party `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> LinearFunctional {
        LinearFunctional::from_terms(
            self.n,
            self.terms().map(|(s, c)| (s.permuted(perm), c.clone())),
        )
    }

    /// View the functional as one over `m >= n` parties (new parties unused).
    pub fn extended(&self, m: usize) -> LinearFunctional {
        assert!(m >= self.n);
        let mut out = self.clone();
        out.n = m;
        out
    }

    /// Rewrite a functional on `n+1` parties whose last party purifies the rest:
    /// every subset containing the purifier is replaced by its complement within
    /// all `n+1` parties. The full set maps to the empty set and is dropped.
    pub fn purified_eliminate(&self, purifier: usize) -> Result<LinearFunctional> {
        if self.n == 0 || purifier != self.n - 1 {
            return Err(Error::InvalidArgument(format!(
                "purifier must be the last party (index {}), got {purifier}",
                self.n.saturating_sub(1)
            )));
        }
        let all = self.n;
        let base = self.n - 1;
        let mut out = LinearFunctional::zero(base);
        for (s, c) in self.terms() {
            let replaced = if s.contains(purifier) {
                s.complement(all)
            } else {
                s
            };
            out.add_term(replaced, c);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "tag": self.tag,
            "coefficients": self
                .card_lex_coefficients()
                .iter()
                .map(format_rational)
                .collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<LinearFunctional> {
        let n = v
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::InvalidArgument("functional JSON lacks \"n\"".into()))?
            as usize;
        let coeffs = v
            .get("coefficients")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::InvalidArgument("functional JSON lacks \"coefficients\"".into()))?;
        if coeffs.len() != coordinate_count(n) {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                coordinate_count(n),
                coeffs.len()
            )));
        }
        let mut f = LinearFunctional::zero(n);
        for (s, c) in card_lex_subsets(n).into_iter().zip(coeffs) {
            let c = match c {
                Value::String(text) => parse_rational(text)?,
                Value::Number(num) => BigRational::from_integer(
                    num.as_i64()
                        .ok_or_else(|| {
                            Error::InvalidArgument(format!("non-integer coefficient {num}"))
                        })?
                        .into(),
                ),
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "bad coefficient {other}"
                    )))
                }
            };
            f.add_term(s, &c);
        }
        if let Some(tag) = v.get("tag").and_then(Value::as_str) {
            f.tag = Some(tag.to_string());
        }
        Ok(f)
    }
}

impl fmt::Display for LinearFunctional {
    /// Prints as an entropy expression in card-lex order, e.g. `S(AB) + S(BC) - S(B) - S(ABC)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut sets: Vec<PartySet> = self.terms().map(|(s, _)| s).collect();
        sets.sort_by(|a, b| a.card_lex_cmp(*b));
        for (i, s) in sets.into_iter().enumerate() {
            let c = self.coefficient(s);
            let mag = Signed::abs(&c);
            match (i, c.is_negative()) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if !mag.is_one() {
                write!(f, "{}*", format_rational(&mag))?;
            }
            write!(f, "S({s})")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(label: &str, n: usize) -> PartySet {
        PartySet::parse_label(label, n).unwrap()
    }

    #[test]
    fn purifier_singleton_maps_to_base_set() {
        let f = LinearFunctional::from_int_terms(5, &[(set("E", 5), 1)]);
        let g = f.purified_eliminate(4).unwrap();
        assert_eq!(g, LinearFunctional::from_int_terms(4, &[(set("ABCD", 4), 1)]));
    }

    #[test]
    fn purifier_full_set_dropped() {
        let f = LinearFunctional::from_int_terms(3, &[(set("ABC", 3), 2), (set("A", 3), 1)]);
        let g = f.purified_eliminate(2).unwrap();
        assert_eq!(g, LinearFunctional::from_int_terms(2, &[(set("A", 2), 1)]));
        assert!(f.purified_eliminate(1).is_err());
    }

    #[test]
    fn primitive_integer_keeps_sign() {
        let f = LinearFunctional::from_int_terms(2, &[(set("A", 2), -4), (set("AB", 2), 6)]);
        assert_eq!(
            f.primitive_integer(),
            vec![BigInt::from(-2), BigInt::zero(), BigInt::from(3)]
        );
    }

    #[test]
    fn display_and_json() {
        let f = LinearFunctional::from_int_terms(
            3,
            &[(set("AB", 3), 1), (set("BC", 3), 1), (set("ABC", 3), -1), (set("B", 3), -1)],
        );
        assert_eq!(f.to_string(), "-S(B) + S(AB) + S(BC) - S(ABC)");
        let back = LinearFunctional::from_json(&f.to_json()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn evaluate_checks_dimension() {
        let f = LinearFunctional::from_int_terms(2, &[(set("A", 2), 1)]);
        let v = EntropyVector::<f64>::zeros(3);
        assert!(f.evaluate(&v).is_err());
    }
}
