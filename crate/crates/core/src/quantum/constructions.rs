//! Structured states: SSA-saturating direct sums, the measure-and-replace
//! recovery map, the block family with three saturated SSA triples, and the
//! two control states showing no pair of those constraints suffices.

use num_complex::Complex64;

use super::state::{add_embedded, reduce, CMatrix, DensityMatrix, TRACE_TOL};
use crate::error::{Error, Result};

const PRODUCT_TOL: f64 = 1e-12;
const ORTHOGONALITY_TOL: f64 = 1e-12;

fn check_weights(weights: impl Iterator<Item = f64>) -> Result<()> {
    let mut total = 0.0;
    let mut any = false;
    for w in weights {
        if !(w > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "block weight {w} is not positive"
            )));
        }
        total += w;
        any = true;
    }
    if !any {
        return Err(Error::InvalidArgument("no blocks".into()));
    }
    if (total - 1.0).abs() > TRACE_TOL {
        return Err(Error::InvalidArgument(format!(
            "block weights sum to {total}, not 1"
        )));
    }
    Ok(())
}

fn expect_parties(rho: &DensityMatrix, k: usize, what: &str) -> Result<()> {
    if rho.parties() != k {
        return Err(Error::InvalidArgument(format!(
            "{what} must have {k} parties, has {}",
            rho.parties()
        )));
    }
    Ok(())
}

/// One sector `p_j ρ_j^{A b^L} ⊗ ρ_j^{b^R C}` of an SSA-saturating state.
#[derive(Clone, Debug, PartialEq)]
pub struct Prop2Block {
    pub weight: f64,
    /// State on `A ⊗ b^L`.
    pub left: DensityMatrix,
    /// State on `b^R ⊗ C`.
    pub right: DensityMatrix,
}

/// A state on `A B C` that is a direct sum over orthogonal sectors of `B`,
/// each sector split as `b^L ⊗ b^R`. Parties are ordered A, B, C.
#[derive(Clone, Debug, PartialEq)]
pub struct Prop2Spec {
    pub blocks: Vec<Prop2Block>,
}

impl Prop2Block {
    fn left_dim(&self) -> usize {
        self.left.dims()[1]
    }
    fn right_dim(&self) -> usize {
        self.right.dims()[0]
    }
}

impl Prop2Spec {
    pub fn validate(&self) -> Result<()> {
        check_weights(self.blocks.iter().map(|b| b.weight))?;
        for b in &self.blocks {
            expect_parties(&b.left, 2, "left factor")?;
            expect_parties(&b.right, 2, "right factor")?;
        }
        let first = &self.blocks[0];
        for b in &self.blocks {
            if b.left.dims()[0] != first.left.dims()[0] || b.right.dims()[1] != first.right.dims()[1] {
                return Err(Error::InvalidArgument(
                    "blocks disagree on the dimensions of A or C".into(),
                ));
            }
        }
        Ok(())
    }

    /// Factor dimensions `[dim A, dim B, dim C]`.
    pub fn dims(&self) -> [usize; 3] {
        let b = &self.blocks[0];
        [
            b.left.dims()[0],
            self.blocks.iter().map(|b| b.left_dim() * b.right_dim()).sum(),
            b.right.dims()[1],
        ]
    }

    /// The recovery map reading off the sector and replacing `b^R` by `ρ_j^{b^R C}`.
    pub fn recovery_map(&self) -> RecoveryMapSpec {
        RecoveryMapSpec {
            sectors: self
                .blocks
                .iter()
                .map(|b| RecoverySector {
                    left_dim: b.left_dim(),
                    right_dim: b.right_dim(),
                    replacement: b.right.clone(),
                })
                .collect(),
        }
    }
}

pub fn construct_prop2_state(spec: &Prop2Spec) -> Result<DensityMatrix> {
    spec.validate()?;
    let dims = spec.dims();
    let d: usize = dims.iter().product();
    let mut m = CMatrix::zeros(d, d);
    let mut offset = 0;
    for b in &spec.blocks {
        let sector = b.left_dim() * b.right_dim();
        let block = b.left.tensor(&b.right);
        add_embedded(
            &mut m,
            &dims,
            &[0, offset, 0],
            block.matrix(),
            &[dims[0], sector, dims[2]],
            b.weight,
        );
        offset += sector;
    }
    Ok(DensityMatrix::from_parts(dims.to_vec(), m))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoverySector {
    pub left_dim: usize,
    pub right_dim: usize,
    /// State on `b^R ⊗ C` written into the sector.
    pub replacement: DensityMatrix,
}

/// Measure the sector of `B`, discard `b^R`, and prepare the sector's
/// replacement on `b^R C`. Sectors are consecutive blocks of B's basis.
#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryMapSpec {
    pub sectors: Vec<RecoverySector>,
}

impl RecoveryMapSpec {
    pub fn b_dim(&self) -> usize {
        self.sectors.iter().map(|s| s.left_dim * s.right_dim).sum()
    }

    fn c_dim(&self) -> Result<usize> {
        let mut c = None;
        for s in &self.sectors {
            expect_parties(&s.replacement, 2, "replacement state")?;
            if s.replacement.dims()[0] != s.right_dim {
                return Err(Error::InvalidArgument(format!(
                    "replacement acts on b^R of dimension {}, sector has {}",
                    s.replacement.dims()[0],
                    s.right_dim
                )));
            }
            let dc = s.replacement.dims()[1];
            if *c.get_or_insert(dc) != dc {
                return Err(Error::InvalidArgument(
                    "replacement states disagree on the dimension of C".into(),
                ));
            }
        }
        c.ok_or_else(|| Error::InvalidArgument("recovery map has no sectors".into()))
    }
}

/// Applies `id_A ⊗ R_{B→BC}` to a state on `A B`; the output is on `A B C`.
pub fn apply_recovery_map(rho_ab: &DensityMatrix, r: &RecoveryMapSpec) -> Result<DensityMatrix> {
    expect_parties(rho_ab, 2, "input state")?;
    let dc = r.c_dim()?;
    let [da, db] = [rho_ab.dims()[0], rho_ab.dims()[1]];
    if r.b_dim() != db {
        return Err(Error::DimensionMismatch {
            expected: db,
            found: r.b_dim(),
        });
    }
    let out_dims = [da, db, dc];
    let d = da * db * dc;
    let mut m = CMatrix::zeros(d, d);
    let mut offset = 0;
    for s in &r.sectors {
        let size = s.left_dim * s.right_dim;
        // compress onto A ⊗ sector
        let sub = CMatrix::from_fn(da * size, da * size, |i, j| {
            let (ai, si) = (i / size, i % size);
            let (aj, sj) = (j / size, j % size);
            rho_ab.matrix()[(ai * db + offset + si, aj * db + offset + sj)]
        });
        let kept = reduce(&sub, &[da, s.left_dim, s.right_dim], &[0, 1]);
        let block = kept.kronecker(s.replacement.matrix());
        add_embedded(&mut m, &out_dims, &[0, offset, 0], &block, &[da, size, dc], 1.0);
        offset += size;
    }
    Ok(DensityMatrix::from_parts(out_dims.to_vec(), m))
}

/// One block `q_j ρ_j^A ⊗ σ_j^B ⊗ φ_j^{CD}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Remark1Block {
    pub weight: f64,
    pub a: DensityMatrix,
    pub b: DensityMatrix,
    /// State on `C ⊗ D`.
    pub cd: DensityMatrix,
}

/// Direct sum of blocks over orthogonal sectors of A, B and D, with C shared.
///
/// With `equality` set, every `φ_j` must be a product `τ_j ⊗ ζ_j` with
/// mutually orthogonal `τ_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Remark1Spec {
    pub blocks: Vec<Remark1Block>,
    pub equality: bool,
}

impl Remark1Spec {
    pub fn validate(&self) -> Result<()> {
        check_weights(self.blocks.iter().map(|b| b.weight))?;
        for b in &self.blocks {
            expect_parties(&b.a, 1, "A factor")?;
            expect_parties(&b.b, 1, "B factor")?;
            expect_parties(&b.cd, 2, "CD factor")?;
        }
        let dc = self.blocks[0].cd.dims()[0];
        if self.blocks.iter().any(|b| b.cd.dims()[0] != dc) {
            return Err(Error::InvalidArgument(
                "blocks disagree on the dimension of C".into(),
            ));
        }
        if self.equality {
            let taus: Vec<CMatrix> = self
                .blocks
                .iter()
                .map(|b| reduce(b.cd.matrix(), b.cd.dims(), &[0]))
                .collect();
            for (b, tau) in self.blocks.iter().zip(&taus) {
                let zeta = reduce(b.cd.matrix(), b.cd.dims(), &[1]);
                if (tau.kronecker(&zeta) - b.cd.matrix()).norm() > PRODUCT_TOL {
                    return Err(Error::InvalidArgument(
                        "equality flag set but a CD block is not a product".into(),
                    ));
                }
            }
            for i in 0..taus.len() {
                for j in i + 1..taus.len() {
                    let overlap = (&taus[i] * &taus[j]).trace().norm();
                    if overlap > ORTHOGONALITY_TOL {
                        return Err(Error::InvalidArgument(format!(
                            "equality flag set but C marginals {i} and {j} overlap ({overlap:.3e})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Factor dimensions `[A, B, C, D]`.
    pub fn dims(&self) -> [usize; 4] {
        [
            self.blocks.iter().map(|b| b.a.dim()).sum(),
            self.blocks.iter().map(|b| b.b.dim()).sum(),
            self.blocks[0].cd.dims()[0],
            self.blocks.iter().map(|b| b.cd.dims()[1]).sum(),
        ]
    }
}

pub fn construct_remark1_state(spec: &Remark1Spec) -> Result<DensityMatrix> {
    spec.validate()?;
    let blocks: Vec<(f64, DensityMatrix)> = spec
        .blocks
        .iter()
        .map(|b| (b.weight, b.a.tensor(&b.b).tensor(&b.cd)))
        .collect();
    let refs: Vec<(f64, &DensityMatrix)> = blocks.iter().map(|(w, r)| (*w, r)).collect();
    block_direct_sum(&refs, &[false, false, true, false])
}

/// Weighted direct sum of blocks with the same number of parties. Parties
/// flagged in `shared` keep one common factor; every other party is split
/// into orthogonal sectors, one per block, stacked in block order.
pub fn block_direct_sum(blocks: &[(f64, &DensityMatrix)], shared: &[bool]) -> Result<DensityMatrix> {
    check_weights(blocks.iter().map(|(w, _)| *w))?;
    let n = shared.len();
    for (_, b) in blocks {
        expect_parties(b, n, "block")?;
    }
    let first = blocks[0].1;
    let mut dims = vec![0; n];
    for p in 0..n {
        if shared[p] {
            if blocks.iter().any(|(_, b)| b.dims()[p] != first.dims()[p]) {
                return Err(Error::InvalidArgument(format!(
                    "blocks disagree on the shared party {p}"
                )));
            }
            dims[p] = first.dims()[p];
        } else {
            dims[p] = blocks.iter().map(|(_, b)| b.dims()[p]).sum();
        }
    }
    let d: usize = dims.iter().product();
    let mut m = CMatrix::zeros(d, d);
    let mut offsets = vec![0; n];
    for (w, b) in blocks {
        add_embedded(&mut m, &dims, &offsets, b.matrix(), b.dims(), *w);
        for p in 0..n {
            if !shared[p] {
                offsets[p] += b.dims()[p];
            }
        }
    }
    Ok(DensityMatrix::from_parts(dims, m))
}

fn classical_copies(k: usize) -> DensityMatrix {
    let dims = vec![2; k];
    DensityMatrix::mixture(&[
        (0.5, &DensityMatrix::basis(dims.clone(), &vec![0; k]).unwrap()),
        (0.5, &DensityMatrix::basis(dims, &vec![1; k]).unwrap()),
    ])
    .unwrap()
}

/// The control states with `I(C;D) = 0` and `I(C;AB) = 1`.
///
/// Bullet 1 is `½(|000⟩⟨000| + |111⟩⟨111|)^{ABC} ⊗ |0⟩⟨0|^D` on qubits; it
/// saturates SSA for ABC and CAB but not ADB. Bullet 2 places the three
/// correlated bits on B (two qubits, dimension 4) and C, with A and D in
/// `|0⟩`; it saturates ABC and ADB but not CAB.
pub fn remark1_control(bullet: u8) -> Result<DensityMatrix> {
    match bullet {
        1 => Ok(classical_copies(3).tensor(&DensityMatrix::basis(vec![2], &[0])?)),
        2 => {
            let bc = classical_copies(3);
            let a = DensityMatrix::basis(vec![2], &[0])?;
            let d = DensityMatrix::basis(vec![2], &[0])?;
            // order A, B1, B2, C, D, then merge B1 B2 into one factor
            let full = a.tensor(&bc).tensor(&d);
            Ok(DensityMatrix::from_parts(vec![2, 4, 2, 2], full.matrix().clone()))
        }
        _ => Err(Error::InvalidArgument(format!(
            "control bullet must be 1 or 2, got {bullet}"
        ))),
    }
}

/// `(|0…0⟩ + |1…1⟩)/√2` on `parties` qubits.
pub fn ghz_state(parties: usize) -> DensityMatrix {
    let d = 1usize << parties;
    let mut psi = vec![Complex64::new(0.0, 0.0); d];
    psi[0] = Complex64::new(1.0, 0.0);
    psi[d - 1] = Complex64::new(1.0, 0.0);
    DensityMatrix::pure(vec![2; parties], &psi).expect("nonzero vector")
}

/// `(|00⟩ + |11⟩)/√2` on two qubits.
pub fn bell_state() -> DensityMatrix {
    ghz_state(2)
}
