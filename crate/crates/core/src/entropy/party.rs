use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Hard ceiling on the number of parties a [`PartySet`] can address.
pub const MAX_PARTIES: usize = 16;

/// A set of parties encoded as a bitmask; bit `i` is the `i`-th letter
/// (party 0 = `A`, party 1 = `B`, ...).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct PartySet(u32);

impl PartySet {
    pub const EMPTY: PartySet = PartySet(0);

    pub const fn from_mask(mask: u32) -> Self {
        PartySet(mask)
    }

    pub fn singleton(party: usize) -> Self {
        assert!(party < MAX_PARTIES, "party index {party} out of range");
        PartySet(1 << party)
    }

    /// All parties `0..n`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_PARTIES, "{n} parties out of range");
        PartySet(((1u64 << n) - 1) as u32)
    }

    pub fn from_parties<I: IntoIterator<Item = usize>>(parties: I) -> Self {
        parties
            .into_iter()
            .fold(PartySet::EMPTY, |acc, p| acc.union(PartySet::singleton(p)))
    }

    pub const fn mask(self) -> u32 {
        self.0
    }

    /// Position of this set in a mask-ordered entropy vector.
    pub fn index(self) -> usize {
        debug_assert!(!self.is_empty());
        self.0 as usize - 1
    }

    pub fn from_index(index: usize) -> Self {
        PartySet(index as u32 + 1)
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, party: usize) -> bool {
        party < 32 && self.0 & (1 << party) != 0
    }

    pub const fn union(self, other: PartySet) -> PartySet {
        PartySet(self.0 | other.0)
    }

    pub const fn intersection(self, other: PartySet) -> PartySet {
        PartySet(self.0 & other.0)
    }

    pub const fn difference(self, other: PartySet) -> PartySet {
        PartySet(self.0 & !other.0)
    }

    pub const fn is_disjoint(self, other: PartySet) -> bool {
        self.0 & other.0 == 0
    }

    pub const fn is_subset(self, other: PartySet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn complement(self, n: usize) -> PartySet {
        PartySet::full(n).difference(self)
    }

    /// True when every member is a party index below `n`.
    pub fn fits(self, n: usize) -> bool {
        self.is_subset(PartySet::full(n))
    }

    pub fn parties(self) -> impl Iterator<Item = usize> {
        let mask = self.0;
        (0..32).filter(move |&i| mask & (1 << i) != 0)
    }

    /// Image under a permutation of parties, `perm[i]` being the new index of party `i`.
    pub fn permuted(self, perm: &[usize]) -> PartySet {
        PartySet::from_parties(self.parties().map(|p| perm[p]))
    }

    /// Letters of the members, e.g. `"ABD"`; the empty set prints as `"∅"`.
    pub fn label(self) -> String {
        if self.is_empty() {
            return "∅".to_string();
        }
        self.parties().map(party_letter).collect()
    }

    /// Parse a group of party letters, rejecting repeats and parties `>= n`.
    pub fn parse_label(text: &str, n: usize) -> Result<PartySet> {
        let mut set = PartySet::EMPTY;
        for (pos, ch) in text.chars().enumerate() {
            let party = letter_party(ch)
                .ok_or_else(|| Error::parse(pos, format!("'{ch}' is not a party letter")))?;
            if party >= n {
                return Err(Error::parse(
                    pos,
                    format!("unknown party '{ch}' for {n} parties"),
                ));
            }
            if set.contains(party) {
                return Err(Error::parse(pos, format!("party '{ch}' repeated")));
            }
            set = set.union(PartySet::singleton(party));
        }
        if set.is_empty() {
            return Err(Error::parse(0, "empty party group"));
        }
        Ok(set)
    }

    /// Cardinality first, then lexicographic on the sorted letters.
    pub fn card_lex_cmp(self, other: PartySet) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.parties().cmp(other.parties()))
    }
}

impl fmt::Display for PartySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

pub fn party_letter(party: usize) -> char {
    (b'A' + party as u8) as char
}

pub fn letter_party(ch: char) -> Option<usize> {
    if ch.is_ascii_uppercase() {
        let p = (ch as u8 - b'A') as usize;
        (p < MAX_PARTIES).then_some(p)
    } else {
        None
    }
}

/// Number of coordinates of an `n`-party entropy vector.
pub fn coordinate_count(n: usize) -> usize {
    (1usize << n) - 1
}

/// Nonempty subsets of `n` parties in mask order (the internal layout).
pub fn subsets(n: usize) -> impl Iterator<Item = PartySet> {
    (1..=coordinate_count(n) as u32).map(PartySet::from_mask)
}

/// Nonempty subsets in presentation order: `A, B, ..., AB, AC, ..., ABCD`.
pub fn card_lex_subsets(n: usize) -> Vec<PartySet> {
    let mut all: Vec<PartySet> = subsets(n).collect();
    all.sort_by(|a, b| a.card_lex_cmp(*b));
    all
}

/// Every permutation of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        out.push(current.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).unwrap();
        current.swap(i - 1, j);
        current[i..].reverse();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn card_lex_matches_table_header() {
        let labels: Vec<String> = card_lex_subsets(4).iter().map(|s| s.label()).collect();
        assert_eq!(
            labels,
            [
                "A", "B", "C", "D", "AB", "AC", "AD", "BC", "BD", "CD", "ABC", "ABD", "ACD", "BCD",
                "ABCD"
            ]
        );
    }

    #[test]
    fn parse_label_errors() {
        assert_eq!(PartySet::parse_label("AC", 3).unwrap().mask(), 0b101);
        assert!(PartySet::parse_label("AD", 3).is_err());
        assert!(PartySet::parse_label("AA", 3).is_err());
        assert!(PartySet::parse_label("a", 3).is_err());
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(permutations(1), vec![vec![0]]);
        let p = PartySet::parse_label("AB", 4).unwrap();
        assert_eq!(p.permuted(&[2, 3, 0, 1]).label(), "CD");
    }

    #[test]
    fn complement_and_index() {
        let ab = PartySet::parse_label("AB", 4).unwrap();
        assert_eq!(ab.complement(4).label(), "CD");
        assert_eq!(PartySet::from_index(ab.index()), ab);
    }
}
