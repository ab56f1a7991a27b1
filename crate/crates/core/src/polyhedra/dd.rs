//! Double description method for pointed cones `{x : A x ≥ 0}` with integer `A`.
//!
//! Rays are kept as primitive integer vectors. Two rays are adjacent when the
//! processed inequalities tight at both have rank `d − 2`, checked exactly by
//! fraction-free elimination. Arithmetic runs on checked `i128` first and is
//! redone on `BigInt` if any intermediate overflows.

use std::collections::HashSet;
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InsertionOrder {
    /// Rows in the order given.
    Given,
    /// At each step, the unprocessed row tight at the most current rays.
    MostSaturated,
    /// An explicit permutation of row indices.
    Explicit(Vec<usize>),
}

#[derive(Clone, Debug)]
pub struct DdOptions {
    pub max_rays: usize,
    pub order: InsertionOrder,
    pub parallel: bool,
}

impl Default for DdOptions {
    fn default() -> Self {
        DdOptions {
            max_rays: 200_000,
            order: InsertionOrder::MostSaturated,
            parallel: true,
        }
    }
}

#[derive(Debug)]
enum DdFailure {
    Overflow,
    Fatal(Error),
}

impl From<Error> for DdFailure {
    fn from(e: Error) -> Self {
        DdFailure::Fatal(e)
    }
}

type Step<T> = std::result::Result<T, DdFailure>;

trait Num: Clone + Eq + Hash + Ord + Send + Sync + std::fmt::Debug {
    fn zero_num() -> Self;
    fn from_big(x: &BigInt) -> Option<Self>;
    fn to_big(&self) -> BigInt;
    fn add(&self, o: &Self) -> Option<Self>;
    fn sub(&self, o: &Self) -> Option<Self>;
    fn mul(&self, o: &Self) -> Option<Self>;
    fn div_exact(&self, o: &Self) -> Self;
    fn gcd(&self, o: &Self) -> Self;
    fn sign(&self) -> i32;
    fn neg(&self) -> Self;
}

impl Num for i128 {
    fn zero_num() -> Self {
        0
    }
    fn from_big(x: &BigInt) -> Option<Self> {
        // keep headroom so negation and single products of small values stay safe
        x.to_i128().filter(|v| v.unsigned_abs() < (1u128 << 120))
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn add(&self, o: &Self) -> Option<Self> {
        self.checked_add(*o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        self.checked_sub(*o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(*o)
    }
    fn div_exact(&self, o: &Self) -> Self {
        self / o
    }
    fn gcd(&self, o: &Self) -> Self {
        Integer::gcd(self, o)
    }
    fn sign(&self) -> i32 {
        i128::signum(*self) as i32
    }
    fn neg(&self) -> Self {
        -self
    }
}

impl Num for BigInt {
    fn zero_num() -> Self {
        Zero::zero()
    }
    fn from_big(x: &BigInt) -> Option<Self> {
        Some(x.clone())
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn div_exact(&self, o: &Self) -> Self {
        self / o
    }
    fn gcd(&self, o: &Self) -> Self {
        Integer::gcd(self, o)
    }
    fn sign(&self) -> i32 {
        if self.is_positive() {
            1
        } else if self.is_negative() {
            -1
        } else {
            0
        }
    }
    fn neg(&self) -> Self {
        -self
    }
}

fn dot<N: Num>(a: &[N], b: &[N]) -> Step<N> {
    let mut acc = N::zero_num();
    for (x, y) in a.iter().zip(b) {
        if x.sign() == 0 || y.sign() == 0 {
            continue;
        }
        acc = acc
            .add(&x.mul(y).ok_or(DdFailure::Overflow)?)
            .ok_or(DdFailure::Overflow)?;
    }
    Ok(acc)
}

fn make_primitive<N: Num>(v: &mut [N]) {
    let g = v.iter().fold(N::zero_num(), |acc, x| acc.gcd(x));
    if g.sign() != 0 && g != N::from_big(&BigInt::one()).unwrap() {
        for x in v.iter_mut() {
            *x = x.div_exact(&g);
        }
    }
}

/// Rank by fraction-free (Bareiss) elimination; stops early at `cap`.
fn rank<N: Num>(rows: &[&[N]], cols: usize, cap: usize) -> Step<usize> {
    let mut m: Vec<Vec<N>> = rows.iter().map(|r| r.to_vec()).collect();
    let mut rank = 0;
    let mut prev = N::from_big(&BigInt::one()).unwrap();
    for c in 0..cols {
        if rank == m.len() || rank == cap {
            break;
        }
        let Some(p) = (rank..m.len()).find(|&r| m[r][c].sign() != 0) else {
            continue;
        };
        m.swap(rank, p);
        let pivot = m[rank][c].clone();
        for r in rank + 1..m.len() {
            let f = m[r][c].clone();
            for k in c..cols {
                let a = m[r][k].mul(&pivot).ok_or(DdFailure::Overflow)?;
                let b = f.mul(&m[rank][k]).ok_or(DdFailure::Overflow)?;
                m[r][k] = a.sub(&b).ok_or(DdFailure::Overflow)?.div_exact(&prev);
            }
        }
        prev = pivot;
        rank += 1;
    }
    Ok(rank)
}

#[derive(Clone, Debug)]
struct ZeroSet(Vec<u64>);

impl ZeroSet {
    fn new(m: usize) -> Self {
        ZeroSet(vec![0; m.div_ceil(64)])
    }
    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn intersect(&self, o: &ZeroSet) -> ZeroSet {
        ZeroSet(self.0.iter().zip(&o.0).map(|(a, b)| a & b).collect())
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &bits)| {
            (0..64).filter(move |b| bits & (1 << b) != 0).map(move |b| w * 64 + b)
        })
    }
}

#[derive(Clone, Debug)]
struct DdRay<N> {
    coords: Vec<N>,
    zeros: ZeroSet,
}

/// Pick `dim` linearly independent rows in `order`, exactly.
fn independent_rows(rows: &[Vec<BigInt>], order: &[usize], dim: usize) -> Vec<usize> {
    let mut basis: Vec<Vec<BigRational>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    let mut chosen = Vec::new();
    for &i in order {
        let mut v: Vec<BigRational> = rows[i]
            .iter()
            .map(|x| BigRational::from_integer(x.clone()))
            .collect();
        for (b, &p) in basis.iter().zip(&pivots) {
            if !v[p].is_zero() {
                let f = &v[p] / &b[p];
                for k in 0..dim {
                    if !b[k].is_zero() {
                        v[k] -= &f * &b[k];
                    }
                }
            }
        }
        if let Some(p) = (0..dim).find(|&k| !v[k].is_zero()) {
            basis.push(v);
            pivots.push(p);
            chosen.push(i);
            if chosen.len() == dim {
                break;
            }
        }
    }
    chosen
}

/// Columns of the inverse of the square matrix formed by `sel` rows.
fn inverse_columns(rows: &[Vec<BigInt>], sel: &[usize], dim: usize) -> Vec<Vec<BigInt>> {
    let mut aug: Vec<Vec<BigRational>> = sel
        .iter()
        .enumerate()
        .map(|(r, &i)| {
            let mut row: Vec<BigRational> = rows[i]
                .iter()
                .map(|x| BigRational::from_integer(x.clone()))
                .collect();
            row.extend((0..dim).map(|k| {
                if k == r {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            }));
            row
        })
        .collect();
    for c in 0..dim {
        let p = (c..dim).find(|&r| !aug[r][c].is_zero()).expect("nonsingular");
        aug.swap(c, p);
        let inv = aug[c][c].recip();
        for v in aug[c].iter_mut() {
            *v *= &inv;
        }
        for r in 0..dim {
            if r != c && !aug[r][c].is_zero() {
                let f = aug[r][c].clone();
                let pivot_row = aug[c].clone();
                for (k, pv) in pivot_row.iter().enumerate() {
                    if !pv.is_zero() {
                        aug[r][k] -= &f * pv;
                    }
                }
            }
        }
    }
    (0..dim)
        .map(|k| {
            let col: Vec<BigRational> = (0..dim).map(|r| aug[r][dim + k].clone()).collect();
            crate::prover::primitive_integer(&col)
        })
        .collect()
}

fn run<N: Num>(rows: &[Vec<BigInt>], dim: usize, opts: &DdOptions) -> Step<Vec<Vec<BigInt>>> {
    let m = rows.len();
    let nrows: Vec<Vec<N>> = rows
        .iter()
        .map(|r| r.iter().map(|x| N::from_big(x).ok_or(DdFailure::Overflow)).collect())
        .collect::<Step<_>>()?;

    let base_order: Vec<usize> = match &opts.order {
        InsertionOrder::Explicit(p) => p.clone(),
        _ => (0..m).collect(),
    };
    let init = independent_rows(rows, &base_order, dim);
    if init.len() < dim {
        return Err(Error::NotPointed {
            rank: init.len(),
            dim,
        }
        .into());
    }
    let mut rays: Vec<DdRay<N>> = Vec::with_capacity(dim);
    for (k, col) in inverse_columns(rows, &init, dim).into_iter().enumerate() {
        let mut zeros = ZeroSet::new(m);
        for (r, &i) in init.iter().enumerate() {
            if r != k {
                zeros.insert(i);
            }
        }
        let coords = col
            .iter()
            .map(|x| N::from_big(x).ok_or(DdFailure::Overflow))
            .collect::<Step<Vec<N>>>()?;
        rays.push(DdRay { coords, zeros });
    }

    let mut processed = vec![false; m];
    for &i in &init {
        processed[i] = true;
    }
    let mut remaining: Vec<usize> = base_order.iter().copied().filter(|&i| !processed[i]).collect();

    while !remaining.is_empty() {
        let pick = match opts.order {
            InsertionOrder::MostSaturated => {
                let mut best = (0usize, 0usize, usize::MAX);
                for (pos, &i) in remaining.iter().enumerate() {
                    let mut zeros = 0;
                    let mut neg = 0;
                    for r in &rays {
                        match dot(&nrows[i], &r.coords)?.sign() {
                            0 => zeros += 1,
                            -1 => neg += 1,
                            _ => {}
                        }
                    }
                    // prefer many tight rays, then few cut-off rays
                    if pos == 0 || zeros > best.1 || (zeros == best.1 && neg < best.2) {
                        best = (pos, zeros, neg);
                    }
                }
                best.0
            }
            _ => 0,
        };
        let i = remaining.remove(pick);
        let values: Vec<N> = rays
            .iter()
            .map(|r| dot(&nrows[i], &r.coords))
            .collect::<Step<_>>()?;
        let pos: Vec<usize> = (0..rays.len()).filter(|&k| values[k].sign() > 0).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&k| values[k].sign() < 0).collect();
        processed[i] = true;
        if neg.is_empty() {
            for (k, r) in rays.iter_mut().enumerate() {
                if values[k].sign() == 0 {
                    r.zeros.insert(i);
                }
            }
            continue;
        }

        let combine = |&p: &usize| -> Step<Vec<DdRay<N>>> {
            let mut out = Vec::new();
            for &q in &neg {
                let common = rays[p].zeros.intersect(&rays[q].zeros);
                if common.count() + 2 < dim {
                    continue;
                }
                let tight: Vec<&[N]> = common.iter().map(|j| nrows[j].as_slice()).collect();
                if rank(&tight, dim, dim - 2)? != dim - 2 {
                    continue;
                }
                let a = values[p].clone();
                let b = values[q].neg();
                let mut coords = Vec::with_capacity(dim);
                for k in 0..dim {
                    let x = a.mul(&rays[q].coords[k]).ok_or(DdFailure::Overflow)?;
                    let y = b.mul(&rays[p].coords[k]).ok_or(DdFailure::Overflow)?;
                    coords.push(x.add(&y).ok_or(DdFailure::Overflow)?);
                }
                make_primitive(&mut coords);
                let mut zeros = common;
                zeros.insert(i);
                out.push(DdRay { coords, zeros });
            }
            Ok(out)
        };
        let created: Vec<Vec<DdRay<N>>> = if opts.parallel {
            pos.par_iter().map(combine).collect::<Step<_>>()?
        } else {
            pos.iter().map(combine).collect::<Step<_>>()?
        };

        let mut next: Vec<DdRay<N>> = Vec::new();
        for (k, mut r) in rays.into_iter().enumerate() {
            match values[k].sign() {
                1 => next.push(r),
                0 => {
                    r.zeros.insert(i);
                    next.push(r);
                }
                _ => {}
            }
        }
        next.extend(created.into_iter().flatten());
        if next.len() > opts.max_rays {
            return Err(Error::ResourceLimit(format!(
                "{} intermediate rays exceeds the cap of {}",
                next.len(),
                opts.max_rays
            ))
            .into());
        }
        rays = next;
    }

    let mut seen = HashSet::new();
    let mut out: Vec<Vec<BigInt>> = Vec::with_capacity(rays.len());
    for r in rays {
        if seen.insert(r.coords.clone()) {
            out.push(r.coords.iter().map(N::to_big).collect());
        }
    }
    Ok(out)
}

/// Extreme rays (primitive integer vectors, unordered) of `{x ∈ R^dim : row·x ≥ 0}`.
pub fn double_description(
    rows: &[Vec<BigInt>],
    dim: usize,
    opts: &DdOptions,
) -> Result<Vec<Vec<BigInt>>> {
    if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
        return Err(Error::InvalidArgument(format!(
            "row of length {} in dimension {dim}",
            bad.len()
        )));
    }
    if let InsertionOrder::Explicit(p) = &opts.order {
        let mut sorted = p.clone();
        sorted.sort_unstable();
        if sorted != (0..rows.len()).collect::<Vec<_>>() {
            return Err(Error::InvalidArgument(
                "explicit insertion order is not a permutation".into(),
            ));
        }
    }
    if dim < 2 {
        let signs: Vec<i32> = rows
            .iter()
            .filter_map(|r| r.first())
            .map(Num::sign)
            .filter(|&s| s != 0)
            .collect();
        if dim == 0 || signs.is_empty() {
            return Err(Error::NotPointed { rank: 0, dim });
        }
        if signs.iter().all(|&s| s == signs[0]) {
            return Ok(vec![vec![BigInt::from(signs[0])]]);
        }
        return Ok(vec![]);
    }
    match run::<i128>(rows, dim, opts) {
        Ok(r) => Ok(r),
        Err(DdFailure::Fatal(e)) => Err(e),
        Err(DdFailure::Overflow) => match run::<BigInt>(rows, dim, opts) {
            Ok(r) => Ok(r),
            Err(DdFailure::Fatal(e)) => Err(e),
            Err(DdFailure::Overflow) => unreachable!("BigInt never overflows"),
        },
    }
}

/// Rank of an integer matrix, exactly.
pub fn integer_rank(rows: &[Vec<BigInt>], cols: usize) -> usize {
    let refs: Vec<&[BigInt]> = rows.iter().map(|r| r.as_slice()).collect();
    match rank::<BigInt>(&refs, cols, cols) {
        Ok(r) => r,
        Err(_) => unreachable!("BigInt never overflows"),
    }
}
