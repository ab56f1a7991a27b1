//! Information expressions: `S(X)`, `S(X|Y)`, `I(X;Y)`, `I(X;Y|Z)` with rational
//! coefficients, and relations between them.
//!
//! ```text
//! relation := expr ('>=' | '=' | '<=') expr
//! expr     := term (('+' | '-') term)*
//! term     := [rational '*'] atom
//! atom     := 'S(' group ['|' group] ')' | 'I(' group ';' group ['|' group] ')'
//! group    := letter+
//! rational := int ['/' int]
//! ```
//!
//! A bare `0` is accepted as an empty expression so relations such as
//! `I(A;C|B) = 0` parse.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::functional::LinearFunctional;
use super::party::PartySet;
use super::vector::format_rational;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Atom {
    Entropy(PartySet),
    CondEntropy(PartySet, PartySet),
    MutualInfo(PartySet, PartySet),
    CondMutualInfo(PartySet, PartySet, PartySet),
}

impl Atom {
    fn groups(&self) -> Vec<PartySet> {
        match *self {
            Atom::Entropy(x) => vec![x],
            Atom::CondEntropy(x, y) | Atom::MutualInfo(x, y) => vec![x, y],
            Atom::CondMutualInfo(x, y, z) => vec![x, y, z],
        }
    }

    /// Expansion into subset entropies with unit coefficient.
    pub fn expand(&self) -> Vec<(PartySet, i64)> {
        match *self {
            Atom::Entropy(x) => vec![(x, 1)],
            Atom::CondEntropy(x, y) => vec![(x.union(y), 1), (y, -1)],
            Atom::MutualInfo(x, y) => vec![(x, 1), (y, 1), (x.union(y), -1)],
            Atom::CondMutualInfo(x, y, z) => vec![
                (x.union(z), 1),
                (y.union(z), 1),
                (x.union(y).union(z), -1),
                (z, -1),
            ],
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Entropy(x) => write!(f, "S({x})"),
            Atom::CondEntropy(x, y) => write!(f, "S({x}|{y})"),
            Atom::MutualInfo(x, y) => write!(f, "I({x};{y})"),
            Atom::CondMutualInfo(x, y, z) => write!(f, "I({x};{y}|{z})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coeff: BigRational,
    pub atom: Atom,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfoExpression {
    n: usize,
    terms: Vec<Term>,
}

impl InfoExpression {
    pub fn new(n: usize, terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            let groups = t.atom.groups();
            for (i, g) in groups.iter().enumerate() {
                if g.is_empty() || !g.fits(n) {
                    return Err(Error::InvalidArgument(format!(
                        "group {g} invalid for {n} parties"
                    )));
                }
                if groups[..i].iter().any(|h| !h.is_disjoint(*g)) {
                    return Err(Error::InvalidArgument(format!(
                        "groups of {} are not disjoint",
                        t.atom
                    )));
                }
            }
        }
        Ok(InfoExpression { n, terms })
    }

    pub fn single(n: usize, atom: Atom) -> Result<Self> {
        Self::new(
            n,
            vec![Term {
                coeff: BigRational::one(),
                atom,
            }],
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn scaled(&self, k: &BigRational) -> InfoExpression {
        InfoExpression {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: &t.coeff * k,
                    atom: t.atom,
                })
                .collect(),
        }
    }

    /// Concatenation of terms (the formal sum).
    pub fn plus(&self, other: &InfoExpression) -> Result<InfoExpression> {
        Error::check_parties(self.n, other.n)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(InfoExpression { n: self.n, terms })
    }

    pub fn compile(&self) -> LinearFunctional {
        let mut f = LinearFunctional::zero(self.n);
        for t in &self.terms {
            for (set, sign) in t.atom.expand() {
                f.add_term(set, &(&t.coeff * BigRational::from_integer(sign.into())));
            }
        }
        f
    }
}

impl fmt::Display for InfoExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let neg = t.coeff.is_negative();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mag = t.coeff.abs();
            if !mag.is_one() {
                write!(f, "{}*", format_rational(&mag))?;
            }
            write!(f, "{}", t.atom)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelationOp {
    Ge,
    Eq,
    Le,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub lhs: InfoExpression,
    pub op: RelationOp,
    pub rhs: InfoExpression,
}

impl Relation {
    /// The functional `f` with the relation reading `f ≥ 0` (or `f = 0`).
    pub fn functional(&self) -> LinearFunctional {
        let l = self.lhs.compile();
        let r = self.rhs.compile();
        match self.op {
            RelationOp::Ge | RelationOp::Eq => l.minus(&r),
            RelationOp::Le => r.minus(&l),
        }
        .expect("both sides share n")
    }

    pub fn is_equality(&self) -> bool {
        self.op == RelationOp::Eq
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.op {
            RelationOp::Ge => ">=",
            RelationOp::Eq => "=",
            RelationOp::Le => "<=",
        };
        write!(f, "{} {op} {}", self.lhs, self.rhs)
    }
}

pub fn parse_expression(text: &str, n: usize) -> Result<InfoExpression> {
    let mut p = Parser::new(text, n);
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

pub fn parse_relation(text: &str, n: usize) -> Result<Relation> {
    let mut p = Parser::new(text, n);
    let lhs = p.expr()?;
    p.skip_ws();
    let op = if p.eat_str(">=") {
        RelationOp::Ge
    } else if p.eat_str("<=") {
        RelationOp::Le
    } else if p.eat_str("=") {
        RelationOp::Eq
    } else {
        return Err(p.error("expected '>=', '=' or '<='"));
    };
    let rhs = p.expr()?;
    p.finish()?;
    Ok(Relation { lhs, op, rhs })
}

/// Parse and compile in one step.
pub fn compile_str(text: &str, n: usize) -> Result<LinearFunctional> {
    Ok(parse_expression(text, n)?.compile())
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    n: usize,
}

impl Parser {
    fn new(text: &str, n: usize) -> Self {
        Parser {
            chars: text.chars().collect(),
            pos: 0,
            n,
        }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::parse(self.pos, message)
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_str(&mut self, s: &str) -> bool {
        self.skip_ws();
        let want: Vec<char> = s.chars().collect();
        if self.chars[self.pos..].starts_with(&want) {
            self.pos += want.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{c}'")))
        }
    }

    fn finish(&mut self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(c) => Err(self.error(format!("unexpected '{c}'"))),
        }
    }

    fn expr(&mut self) -> Result<InfoExpression> {
        let mut terms = Vec::new();
        let mut sign = if self.eat('-') {
            -BigRational::one()
        } else {
            self.eat('+');
            BigRational::one()
        };
        loop {
            if let Some(t) = self.term()? {
                terms.push(Term {
                    coeff: &sign * t.coeff,
                    atom: t.atom,
                });
            }
            sign = if self.eat('+') {
                BigRational::one()
            } else if self.eat('-') {
                -BigRational::one()
            } else {
                break;
            };
        }
        Ok(InfoExpression { n: self.n, terms })
    }

    /// `None` for a bare zero constant.
    fn term(&mut self) -> Result<Option<Term>> {
        let start = self.pos;
        let coeff = if self.peek().is_some_and(|c| c.is_ascii_digit()) {
            let c = self.rational()?;
            if !self.eat('*') {
                if c.is_zero() {
                    return Ok(None);
                }
                self.pos = start;
                return Err(self.error("nonzero constant term; expected '*'"));
            }
            c
        } else {
            BigRational::one()
        };
        Ok(Some(Term {
            coeff,
            atom: self.atom()?,
        }))
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected integer"));
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        Ok(s.parse().expect("digits"))
    }

    fn rational(&mut self) -> Result<BigRational> {
        let p = self.integer()?;
        if self.eat('/') {
            let q = self.integer()?;
            if q.is_zero() {
                return Err(self.error("zero denominator"));
            }
            Ok(BigRational::new(p, q))
        } else {
            Ok(BigRational::from_integer(p))
        }
    }

    fn group(&mut self) -> Result<PartySet> {
        self.skip_ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_alphabetic()) {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        if text.is_empty() {
            return Err(self.error("expected party group"));
        }
        PartySet::parse_label(&text, self.n).map_err(|e| match e {
            Error::Parse { position, message } => Error::parse(start + position, message),
            other => other,
        })
    }

    fn atom(&mut self) -> Result<Atom> {
        let start = self.pos;
        let atom = if self.eat('S') {
            self.expect('(')?;
            let x = self.group()?;
            let atom = if self.eat('|') {
                Atom::CondEntropy(x, self.group()?)
            } else {
                Atom::Entropy(x)
            };
            self.expect(')')?;
            atom
        } else if self.eat('I') {
            self.expect('(')?;
            let x = self.group()?;
            self.expect(';')?;
            let y = self.group()?;
            let atom = if self.eat('|') {
                Atom::CondMutualInfo(x, y, self.group()?)
            } else {
                Atom::MutualInfo(x, y)
            };
            self.expect(')')?;
            atom
        } else {
            return Err(self.error("expected 'S(' or 'I('"));
        };
        let groups = atom.groups();
        for i in 0..groups.len() {
            for j in 0..i {
                if !groups[i].is_disjoint(groups[j]) {
                    return Err(Error::parse(
                        start,
                        format!("argument groups of {atom} overlap"),
                    ));
                }
            }
        }
        Ok(atom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(label: &str, n: usize) -> PartySet {
        PartySet::parse_label(label, n).unwrap()
    }

    fn int(x: i64) -> BigRational {
        BigRational::from_integer(x.into())
    }

    #[test]
    fn theorem_expression_parses() {
        let e = parse_expression("I(C;D) - I(C;AB)", 4).unwrap();
        assert_eq!(e.terms().len(), 2);
        assert_eq!(e.terms()[0].coeff, int(1));
        assert_eq!(e.terms()[1].coeff, int(-1));
        assert_eq!(e.terms()[1].atom, Atom::MutualInfo(set("C", 4), set("AB", 4)));
    }

    #[test]
    fn smallest_and_conditional() {
        let e = parse_expression("S(A)", 1).unwrap();
        assert_eq!(e.terms()[0].atom, Atom::Entropy(set("A", 1)));
        let e = parse_expression("I(A;C|B)", 3).unwrap();
        assert_eq!(
            e.terms()[0].atom,
            Atom::CondMutualInfo(set("A", 3), set("C", 3), set("B", 3))
        );
    }

    #[test]
    fn parse_errors_carry_position() {
        match parse_expression("S(A) + I(A;E)", 4) {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 11),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_expression("I(AB;BC)", 3),
            Err(Error::Parse { position: 0, .. })
        ));
        assert!(parse_expression("S(A) +", 2).is_err());
        assert!(parse_expression("3 + S(A)", 2).is_err());
        assert!(parse_expression("S(A", 2).is_err());
    }

    #[test]
    fn compile_mutual_information() {
        let f = compile_str("I(C;D)", 4).unwrap();
        let want = LinearFunctional::from_int_terms(
            4,
            &[(set("C", 4), 1), (set("D", 4), 1), (set("CD", 4), -1)],
        );
        assert_eq!(f, want);
        let f = compile_str("I(A;C|B)", 4).unwrap();
        let want = LinearFunctional::from_int_terms(
            4,
            &[
                (set("AB", 4), 1),
                (set("BC", 4), 1),
                (set("ABC", 4), -1),
                (set("B", 4), -1),
            ],
        );
        assert_eq!(f, want);
    }

    #[test]
    fn entropy_form_of_the_constrained_inequality() {
        let a = compile_str("I(C;D) - I(C;AB)", 4).unwrap();
        let b = compile_str("I(ABC;D) - I(AB;CD)", 4).unwrap();
        assert_eq!(a, b);
        let c = compile_str("S(ABC) + S(D) - S(AB) - S(CD)", 4).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn relations() {
        let r = parse_relation("I(C;D) >= I(C;AB)", 4).unwrap();
        assert_eq!(r.functional(), compile_str("I(C;D) - I(C;AB)", 4).unwrap());
        let r = parse_relation("S(A) <= S(AB)", 2).unwrap();
        assert_eq!(r.functional(), compile_str("S(B|A)", 2).unwrap());
        let r = parse_relation("I(A;C|B)=0", 3).unwrap();
        assert!(r.is_equality());
        assert!(r.rhs.terms().is_empty());
        assert!(parse_relation("S(A)", 1).is_err());
    }

    fn arb_group(n: usize) -> impl Strategy<Value = u32> {
        1u32..(1 << n)
    }

    fn arb_atom(n: usize) -> impl Strategy<Value = Option<Atom>> {
        (0..4u8, arb_group(n), arb_group(n), arb_group(n)).prop_map(|(kind, a, b, c)| {
            let (x, y, z) = (
                PartySet::from_mask(a),
                PartySet::from_mask(b & !a),
                PartySet::from_mask(c & !a & !b),
            );
            match kind {
                0 => Some(Atom::Entropy(x)),
                1 if !y.is_empty() => Some(Atom::CondEntropy(x, y)),
                2 if !y.is_empty() => Some(Atom::MutualInfo(x, y)),
                3 if !y.is_empty() && !z.is_empty() => Some(Atom::CondMutualInfo(x, y, z)),
                _ => None,
            }
        })
    }

    fn arb_expr(n: usize) -> impl Strategy<Value = InfoExpression> {
        prop::collection::vec((arb_atom(n), -6i64..6, 1i64..4), 0..6).prop_map(move |raw| {
            let terms = raw
                .into_iter()
                .filter_map(|(a, p, q)| {
                    a.map(|atom| Term {
                        coeff: BigRational::new(p.into(), q.into()),
                        atom,
                    })
                })
                .collect();
            InfoExpression::new(n, terms).unwrap()
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(e in arb_expr(4)) {
            let printed = e.to_string();
            let back = parse_expression(&printed, 4).unwrap();
            prop_assert_eq!(back, e);
        }

        #[test]
        fn compile_is_linear(e1 in arb_expr(4), e2 in arb_expr(4), a in -5i64..5, b in -5i64..5) {
            let (a, b) = (int(a), int(b));
            let combined = e1.scaled(&a).plus(&e2.scaled(&b)).unwrap().compile();
            let separate = e1.compile().scaled(&a).plus(&e2.compile().scaled(&b)).unwrap();
            prop_assert_eq!(combined, separate);
        }
    }
}
