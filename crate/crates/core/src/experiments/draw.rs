//! Randomness sources for parametrized state families.
//!
//! Families draw discrete structure choices and Gaussian parameters through
//! [`Draw`]. Recording a draw sequence and replaying it with edited Gaussian
//! parameters keeps the structure fixed while an optimizer moves the state.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::quantum::{CMatrix, DensityMatrix};

pub trait Draw {
    fn normal(&mut self) -> f64;
    /// Uniform choice in `0..n`.
    fn index(&mut self, n: usize) -> usize;
}

impl Draw for ChaCha8Rng {
    fn normal(&mut self) -> f64 {
        StandardNormal.sample(self)
    }
    fn index(&mut self, n: usize) -> usize {
        self.random_range(0..n)
    }
}

/// Forwards to an inner source and records everything drawn.
pub struct Recorder<'a, D: Draw + ?Sized> {
    inner: &'a mut D,
    pub normals: Vec<f64>,
    pub indices: Vec<usize>,
}

impl<'a, D: Draw + ?Sized> Recorder<'a, D> {
    pub fn new(inner: &'a mut D) -> Self {
        Recorder {
            inner,
            normals: Vec::new(),
            indices: Vec::new(),
        }
    }
}

impl<D: Draw + ?Sized> Draw for Recorder<'_, D> {
    fn normal(&mut self) -> f64 {
        let x = self.inner.normal();
        self.normals.push(x);
        x
    }
    fn index(&mut self, n: usize) -> usize {
        let k = self.inner.index(n);
        self.indices.push(k);
        k
    }
}

/// Replays recorded structure choices with a given parameter vector.
pub struct Replay<'a> {
    normals: &'a [f64],
    indices: &'a [usize],
    pos_n: usize,
    pos_i: usize,
}

impl<'a> Replay<'a> {
    pub fn new(normals: &'a [f64], indices: &'a [usize]) -> Self {
        Replay {
            normals,
            indices,
            pos_n: 0,
            pos_i: 0,
        }
    }
}

impl Draw for Replay<'_> {
    fn normal(&mut self) -> f64 {
        let x = self.normals.get(self.pos_n).copied().unwrap_or(0.0);
        self.pos_n += 1;
        x
    }
    fn index(&mut self, n: usize) -> usize {
        let k = self.indices.get(self.pos_i).copied().unwrap_or(0);
        self.pos_i += 1;
        k.min(n - 1)
    }
}

/// Vector of `d` complex entries built from `2d` normals, normalized; a zero
/// draw falls back to the first basis vector.
pub fn draw_unit_vector(d: usize, draw: &mut dyn Draw) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..d)
        .map(|_| {
            let re = draw.normal();
            let im = draw.normal();
            Complex64::new(re, im)
        })
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 1e-300 {
        for z in v.iter_mut() {
            *z /= norm;
        }
    } else {
        v = vec![Complex64::new(0.0, 0.0); d];
        v[0] = Complex64::new(1.0, 0.0);
    }
    v
}

/// Marginal of a drawn pure state on `dims ⊗ C^rank`.
pub fn draw_state(dims: &[usize], rank: usize, draw: &mut dyn Draw) -> DensityMatrix {
    let d: usize = dims.iter().product();
    let rank = rank.clamp(1, d);
    let psi = draw_unit_vector(d * rank, draw);
    let g = CMatrix::from_fn(d, rank, |i, k| psi[i * rank + k]);
    DensityMatrix::from_parts(dims.to_vec(), &g * g.adjoint())
}

/// Drawn state with a drawn rank in `1..=dim`.
pub fn draw_mixed_state(dims: &[usize], draw: &mut dyn Draw) -> DensityMatrix {
    let d: usize = dims.iter().product();
    let rank = 1 + draw.index(d);
    draw_state(dims, rank, draw)
}

/// Positive weights summing to one (softmax of drawn normals).
pub fn draw_weights(k: usize, draw: &mut dyn Draw) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| draw.normal().clamp(-6.0, 6.0).exp()).collect();
    let total: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|x| x / total).collect();
    // put the rounding residue on the last weight so the sum is 1 to machine precision
    let head: f64 = w[..k - 1].iter().sum();
    w[k - 1] = 1.0 - head;
    w
}

/// Random composition of `total` into `parts` positive integers.
pub fn draw_composition(total: usize, parts: usize, draw: &mut dyn Draw) -> Vec<usize> {
    assert!(parts >= 1 && parts <= total);
    let mut out = vec![1; parts];
    for _ in 0..total - parts {
        let k = draw.index(parts);
        out[k] += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::stream_rng;

    #[test]
    fn replay_reproduces_recording() {
        let mut rng = stream_rng(9, 2);
        let mut rec = Recorder::new(&mut rng);
        let a = draw_mixed_state(&[2, 3], &mut rec);
        let (normals, indices) = (rec.normals.clone(), rec.indices.clone());
        let b = draw_mixed_state(&[2, 3], &mut Replay::new(&normals, &indices));
        assert_eq!(a, b);
    }

    #[test]
    fn weights_and_compositions() {
        let mut rng = stream_rng(1, 0);
        let w = draw_weights(4, &mut rng);
        assert!(w.iter().all(|&x| x > 0.0));
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let c = draw_composition(5, 3, &mut rng);
        assert_eq!(c.iter().sum::<usize>(), 5);
        assert!(c.iter().all(|&x| x >= 1));
    }
}
