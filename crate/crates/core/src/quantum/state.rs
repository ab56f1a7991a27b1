use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::linalg::{hermitian_eigen, hermitian_eigenvalues};
use crate::entropy::{FloatVector, PartySet};
use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-12;
/// Eigenvalues below this are treated as zero in entropies and ranks.
pub const EIGEN_CLAMP: f64 = 1e-12;

pub type CMatrix = DMatrix<Complex64>;

/// A validated density matrix on a tensor product of party factors.
///
/// Party 0 is the most significant tensor factor.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    data: CMatrix,
}

fn total_dim(dims: &[usize]) -> usize {
    dims.iter().product()
}

impl DensityMatrix {
    /// Validates shape, Hermiticity, trace and positivity.
    pub fn new(dims: Vec<usize>, data: CMatrix) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "factor dimensions must be positive, got {dims:?}"
            )));
        }
        let d = total_dim(&dims);
        if data.nrows() != d || data.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: data.nrows(),
            });
        }
        let mut herm_err: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                herm_err = herm_err.max((data[(i, j)] - data[(j, i)].conj()).norm());
            }
        }
        if herm_err > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "matrix is not Hermitian (deviation {herm_err:.3e})"
            )));
        }
        let trace: f64 = (0..d).map(|i| data[(i, i)].re).sum();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {trace}, not 1")));
        }
        let min = hermitian_eigenvalues(&data).first().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "matrix has negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self::from_parts(dims, data))
    }

    /// Hermitian-symmetrized constructor for matrices that are valid by construction.
    pub(crate) fn from_parts(dims: Vec<usize>, data: CMatrix) -> Self {
        let data = (&data + data.adjoint()) * Complex64::new(0.5, 0.0);
        DensityMatrix { dims, data }
    }

    /// `|ψ⟩⟨ψ|` for a nonzero vector, normalized.
    pub fn pure(dims: Vec<usize>, psi: &[Complex64]) -> Result<Self> {
        let d = total_dim(&dims);
        if psi.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: psi.len(),
            });
        }
        let v = DVector::from_column_slice(psi);
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument("state vector has zero norm".into()));
        }
        let v = v / Complex64::new(norm, 0.0);
        Ok(Self::from_parts(dims, &v * v.adjoint()))
    }

    /// Computational basis state `|digits⟩⟨digits|`.
    pub fn basis(dims: Vec<usize>, digits: &[usize]) -> Result<Self> {
        if digits.len() != dims.len() || digits.iter().zip(&dims).any(|(x, d)| x >= d) {
            return Err(Error::InvalidArgument(format!(
                "basis label {digits:?} does not fit dimensions {dims:?}"
            )));
        }
        let idx = digits.iter().zip(&dims).fold(0, |acc, (x, d)| acc * d + x);
        let d = total_dim(&dims);
        let mut m = CMatrix::zeros(d, d);
        m[(idx, idx)] = Complex64::new(1.0, 0.0);
        Ok(Self::from_parts(dims, m))
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let d = total_dim(&dims);
        let m = CMatrix::identity(d, d) * Complex64::new(1.0 / d as f64, 0.0);
        Self::from_parts(dims, m)
    }

    /// Convex combination of states on identical factor dimensions.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let Some((_, first)) = parts.first() else {
            return Err(Error::InvalidArgument("empty mixture".into()));
        };
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if parts.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidArgument(format!(
                "mixture weights must be nonnegative and sum to 1 (sum {total})"
            )));
        }
        let mut m = CMatrix::zeros(first.dim(), first.dim());
        for (w, rho) in parts {
            if rho.dims != first.dims {
                return Err(Error::InvalidArgument(format!(
                    "mixture of dimensions {:?} and {:?}",
                    first.dims, rho.dims
                )));
            }
            m += &rho.data * Complex64::new(*w, 0.0);
        }
        Ok(Self::from_parts(first.dims.clone(), m))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    /// `self ⊗ other`, with `other`'s parties appended.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::from_parts(dims, self.data.kronecker(&other.data))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.data)
    }

    /// Number of eigenvalues above the clamp threshold (at least 1).
    pub fn rank(&self) -> usize {
        self.eigenvalues()
            .iter()
            .filter(|&&x| x > EIGEN_CLAMP)
            .count()
            .max(1)
    }

    /// Relabels parties: party `i` of the result is party `order[i]` of `self`.
    pub fn reorder(&self, order: &[usize]) -> Result<DensityMatrix> {
        let n = self.parties();
        let mut seen = vec![false; n];
        if order.len() != n || order.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidArgument(format!(
                "{order:?} is not a permutation of {n} parties"
            )));
        }
        let new_dims: Vec<usize> = order.iter().map(|&p| self.dims[p]).collect();
        let old_strides = strides(&self.dims);
        let d = self.dim();
        // map each new index to the old index
        let map: Vec<usize> = (0..d)
            .map(|idx| {
                let digits = digits_of(idx, &new_dims);
                digits
                    .iter()
                    .zip(order)
                    .map(|(x, &p)| x * old_strides[p])
                    .sum()
            })
            .collect();
        let data = CMatrix::from_fn(d, d, |i, j| self.data[(map[i], map[j])]);
        Ok(DensityMatrix {
            dims: new_dims,
            data,
        })
    }
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

fn digits_of(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for i in (0..dims.len()).rev() {
        out[i] = idx % dims[i];
        idx /= dims[i];
    }
    out
}

/// Offsets into the full index for every combination of digits of `parties`.
fn index_table(dims: &[usize], parties: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let mut table = vec![0usize];
    for &p in parties {
        let mut next = Vec::with_capacity(table.len() * dims[p]);
        for &base in &table {
            for x in 0..dims[p] {
                next.push(base + x * st[p]);
            }
        }
        table = next;
    }
    table
}

/// Partial trace of a raw (not necessarily normalized) matrix onto `kept` parties.
pub(crate) fn reduce(data: &CMatrix, dims: &[usize], kept: &[usize]) -> CMatrix {
    let traced: Vec<usize> = (0..dims.len()).filter(|p| !kept.contains(p)).collect();
    let kt = index_table(dims, kept);
    let tt = index_table(dims, &traced);
    let dk = kt.len();
    let mut out = CMatrix::zeros(dk, dk);
    for i in 0..dk {
        for j in i..dk {
            let mut acc = Complex64::new(0.0, 0.0);
            for &t in &tt {
                acc += data[(kt[i] + t, kt[j] + t)];
            }
            out[(i, j)] = acc;
            out[(j, i)] = acc.conj();
        }
    }
    out
}

/// Adds `weight · block` into `target`, placing block factor `p` at offset
/// `offsets[p]` inside factor `p` of `total_dims`.
pub(crate) fn add_embedded(
    target: &mut CMatrix,
    total_dims: &[usize],
    offsets: &[usize],
    block: &CMatrix,
    block_dims: &[usize],
    weight: f64,
) {
    let st = strides(total_dims);
    let map: Vec<usize> = (0..block.nrows())
        .map(|i| {
            digits_of(i, block_dims)
                .iter()
                .enumerate()
                .map(|(p, x)| (offsets[p] + x) * st[p])
                .sum()
        })
        .collect();
    let w = Complex64::new(weight, 0.0);
    for i in 0..block.nrows() {
        for j in 0..block.ncols() {
            let v = block[(i, j)];
            if v != Complex64::new(0.0, 0.0) {
                target[(map[i], map[j])] += w * v;
            }
        }
    }
}

/// Reduced state on the parties in `keep`, in their original order.
pub fn partial_trace(rho: &DensityMatrix, keep: PartySet) -> Result<DensityMatrix> {
    let n = rho.parties();
    if keep.is_empty() {
        return Err(Error::InvalidArgument("cannot keep no parties".into()));
    }
    if !keep.fits(n) {
        return Err(Error::InvalidArgument(format!(
            "{keep} is outside the {n} parties of the state"
        )));
    }
    let kept: Vec<usize> = keep.parties().collect();
    if kept.len() == n {
        return Ok(rho.clone());
    }
    Ok(DensityMatrix {
        dims: kept.iter().map(|&p| rho.dims[p]).collect(),
        data: reduce(&rho.data, &rho.dims, &kept),
    })
}

/// `−Σ λ log₂ λ` over a spectrum, with eigenvalues below the clamp dropped.
pub fn spectrum_entropy(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&x| x > EIGEN_CLAMP)
        .map(|&x| -x * x.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    spectrum_entropy(&rho.eigenvalues())
}

/// Entropies of all nonempty party subsets, in bits.
pub fn entropy_vector(rho: &DensityMatrix) -> Result<FloatVector> {
    let n = rho.parties();
    if n > crate::entropy::party::MAX_PARTIES {
        return Err(Error::TooManyParties {
            n,
            limit: crate::entropy::party::MAX_PARTIES,
        });
    }
    let mut v = FloatVector::zeros(n);
    for s in crate::entropy::subsets(n) {
        v.set(s, von_neumann_entropy(&partial_trace(rho, s)?));
    }
    Ok(v)
}

/// Entropy vector of the first `n` parties of the pure state `psi` on `dims`;
/// the remaining factors act as a purifying environment. Each marginal
/// spectrum is taken on the smaller side of its cut.
pub fn entropy_vector_of_pure(psi: &[Complex64], dims: &[usize], n: usize) -> Result<FloatVector> {
    let d = total_dim(dims);
    if psi.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: psi.len(),
        });
    }
    if n == 0 || n > dims.len() || n > crate::entropy::party::MAX_PARTIES {
        return Err(Error::InvalidArgument(format!(
            "cannot take {n} parties out of {}",
            dims.len()
        )));
    }
    let mut v = FloatVector::zeros(n);
    for s in crate::entropy::subsets(n) {
        let side: Vec<usize> = s.parties().collect();
        let rest: Vec<usize> = (0..dims.len()).filter(|p| !s.contains(*p)).collect();
        let st = index_table(dims, &side);
        let rt = index_table(dims, &rest);
        let m = CMatrix::from_fn(st.len(), rt.len(), |i, j| psi[st[i] + rt[j]]);
        let gram = if st.len() <= rt.len() {
            &m * m.adjoint()
        } else {
            m.adjoint() * &m
        };
        v.set(s, spectrum_entropy(&hermitian_eigenvalues(&gram)));
    }
    Ok(v)
}

/// `½ Σ |eigenvalues of ρ − σ|`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dims != sigma.dims {
        return Err(Error::InvalidArgument(format!(
            "comparing states of dimensions {:?} and {:?}",
            rho.dims, sigma.dims
        )));
    }
    let diff = &rho.data - &sigma.data;
    Ok(0.5 * hermitian_eigenvalues(&diff).iter().map(|x| x.abs()).sum::<f64>())
}

/// Pure state with an appended environment of dimension `rank(ρ)` whose
/// marginal on the original parties is `ρ`.
pub fn purify(rho: &DensityMatrix) -> DensityMatrix {
    let e = hermitian_eigen(&rho.data);
    let d = rho.dim();
    let kept: Vec<usize> = (0..d).filter(|&k| e.values[k] > EIGEN_CLAMP).collect();
    let kept = if kept.is_empty() { vec![d - 1] } else { kept };
    let r = kept.len();
    let mut psi = vec![Complex64::new(0.0, 0.0); d * r];
    for (slot, &k) in kept.iter().enumerate() {
        let amp = e.values[k].max(0.0).sqrt();
        for i in 0..d {
            psi[i * r + slot] = e.vectors[(i, k)] * amp;
        }
    }
    let mut dims = rho.dims.clone();
    dims.push(r);
    DensityMatrix::pure(dims, &psi).expect("purification vector is nonzero")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn bell() -> DensityMatrix {
        let h = 0.5f64.sqrt();
        DensityMatrix::pure(vec![2, 2], &[c(h), c(0.), c(0.), c(h)]).unwrap()
    }

    fn set(label: &str, n: usize) -> PartySet {
        PartySet::parse_label(label, n).unwrap()
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let a = partial_trace(&bell(), set("A", 2)).unwrap();
        assert!((a.matrix() - DensityMatrix::maximally_mixed(vec![2]).matrix()).norm() < 1e-15);
        assert!((von_neumann_entropy(&a) - 1.0).abs() < 1e-14);
        assert!(von_neumann_entropy(&bell()).abs() < 1e-12);
    }

    #[test]
    fn product_marginals() {
        let a = DensityMatrix::new(
            vec![2],
            CMatrix::from_row_slice(2, 2, &[c(0.7), Complex64::new(0.1, 0.2), Complex64::new(0.1, -0.2), c(0.3)]),
        )
        .unwrap();
        let b = DensityMatrix::maximally_mixed(vec![3]);
        let ab = a.tensor(&b);
        assert!((partial_trace(&ab, set("A", 2)).unwrap().matrix() - a.matrix()).norm() < 1e-15);
        assert!((partial_trace(&ab, set("B", 2)).unwrap().matrix() - b.matrix()).norm() < 1e-15);
        let ba = ab.reorder(&[1, 0]).unwrap();
        assert!((ba.matrix() - b.tensor(&a).matrix()).norm() < 1e-15);
    }

    #[test]
    fn classical_ghz_marginal() {
        let g = DensityMatrix::mixture(&[
            (0.5, &DensityMatrix::basis(vec![2, 2, 2], &[0, 0, 0]).unwrap()),
            (0.5, &DensityMatrix::basis(vec![2, 2, 2], &[1, 1, 1]).unwrap()),
        ])
        .unwrap();
        let ab = partial_trace(&g, set("AB", 3)).unwrap();
        let expect = DensityMatrix::mixture(&[
            (0.5, &DensityMatrix::basis(vec![2, 2], &[0, 0]).unwrap()),
            (0.5, &DensityMatrix::basis(vec![2, 2], &[1, 1]).unwrap()),
        ])
        .unwrap();
        assert_eq!(ab.dims(), &[2, 2]);
        assert!((ab.matrix() - expect.matrix()).norm() < 1e-15);
    }

    #[test]
    fn dyadic_spectrum() {
        let m = CMatrix::from_diagonal(&DVector::from_vec(vec![c(0.5), c(0.25), c(0.25)]));
        let rho = DensityMatrix::new(vec![3], m).unwrap();
        assert!((von_neumann_entropy(&rho) - 1.5).abs() < 1e-14);
    }

    #[test]
    fn validation() {
        let bad_trace = CMatrix::identity(2, 2);
        assert!(DensityMatrix::new(vec![2], bad_trace).is_err());
        let not_psd = CMatrix::from_diagonal(&DVector::from_vec(vec![c(1.5), c(-0.5)]));
        assert!(DensityMatrix::new(vec![2], not_psd).is_err());
        let not_herm = CMatrix::from_row_slice(2, 2, &[c(0.5), c(0.1), c(0.0), c(0.5)]);
        assert!(DensityMatrix::new(vec![2], not_herm).is_err());
        assert!(partial_trace(&bell(), PartySet::EMPTY).is_err());
        assert!(partial_trace(&bell(), set("C", 3)).is_err());
    }

    #[test]
    fn purify_mixed_qubit() {
        let p = purify(&DensityMatrix::maximally_mixed(vec![2]));
        assert_eq!(p.dims(), &[2, 2]);
        let v = entropy_vector(&p).unwrap();
        assert!((v.get(set("A", 2)) - 1.0).abs() < 1e-12);
        assert!((v.get(set("B", 2)) - 1.0).abs() < 1e-12);
        assert!(v.get(set("AB", 2)).abs() < 1e-12);
        let already = purify(&bell());
        assert_eq!(already.dims(), &[2, 2, 1]);
    }

    #[test]
    fn pure_shortcut_matches_marginals() {
        let psi: Vec<Complex64> = (0..24)
            .map(|k| Complex64::new((k as f64 * 0.7).sin(), (k as f64 * 1.3).cos()))
            .collect();
        let rho = DensityMatrix::pure(vec![2, 3, 2, 2], &psi).unwrap();
        let reduced = partial_trace(&rho, PartySet::from_mask(0b111)).unwrap();
        let direct = entropy_vector(&reduced).unwrap();
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let unit: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        let fast = entropy_vector_of_pure(&unit, &[2, 3, 2, 2], 3).unwrap();
        for (a, b) in direct.mask_order().iter().zip(fast.mask_order()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_distance_of_orthogonal_states() {
        let a = DensityMatrix::basis(vec![2], &[0]).unwrap();
        let b = DensityMatrix::basis(vec![2], &[1]).unwrap();
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        assert!(trace_distance(&a, &a).unwrap().abs() < 1e-15);
    }
}
