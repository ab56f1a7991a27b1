use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::state::{CMatrix, DensityMatrix};
use crate::error::{Error, Result};

/// Independent generator for worker `stream` under a common `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard complex Gaussian vector, normalized to unit length.
pub fn random_unit_vector<R: rand::Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..d)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(re, im)
            })
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Marginal of a random pure state on `dims ⊗ C^rank`.
pub fn random_state<R: rand::Rng + ?Sized>(
    dims: &[usize],
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let d: usize = dims.iter().product();
    if rank == 0 || rank > d {
        return Err(Error::InvalidArgument(format!(
            "rank {rank} outside 1..={d}"
        )));
    }
    let psi = random_unit_vector(d * rank, rng);
    let g = CMatrix::from_fn(d, rank, |i, k| psi[i * rank + k]);
    Ok(DensityMatrix::from_parts(dims.to_vec(), &g * g.adjoint()))
}

/// Deterministic random state: the marginal of a Gaussian pure state on the
/// system and a `rank`-dimensional ancilla.
pub fn sample_random_state(dims: &[usize], rank: usize, seed: u64) -> Result<DensityMatrix> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidArgument(format!(
            "factor dimensions must be positive, got {dims:?}"
        )));
    }
    random_state(dims, rank, &mut stream_rng(seed, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::state::von_neumann_entropy;

    #[test]
    fn deterministic_and_ranked() {
        let a = sample_random_state(&[2, 3], 2, 11).unwrap();
        let b = sample_random_state(&[2, 3], 2, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rank(), 2);
        let pure = sample_random_state(&[2, 2], 1, 5).unwrap();
        assert!(von_neumann_entropy(&pure) < 1e-10);
        assert!(sample_random_state(&[2], 3, 0).is_err());
        assert!(sample_random_state(&[2], 0, 0).is_err());
    }

    #[test]
    fn streams_differ() {
        let mut r0 = stream_rng(3, 0);
        let mut r1 = stream_rng(3, 1);
        assert_ne!(random_unit_vector(4, &mut r0), random_unit_vector(4, &mut r1));
    }
}
