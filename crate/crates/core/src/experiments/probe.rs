//! How close can realizable 4-party entropy vectors get to a given direction?
//!
//! Candidates are pure states on `ABCD ⊗ E` with an environment `E` of small
//! dimension, so their `ABCD` marginals have rank at most `dim E`. A fixed
//! library of GHZ-partition states is scored first, then Nelder–Mead restarts
//! from random amplitudes.

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::draw::{draw_unit_vector, Draw};
use super::nelder_mead::{nelder_mead, NelderMeadOptions};
use crate::entropy::{FloatVector, PartySet};
use crate::error::{Error, Result};
use crate::quantum::{density_to_json, entropy_vector_of_pure, partial_trace, stream_rng, DensityMatrix};

/// Euclidean distance between `v` and `target` after scaling both to unit
/// length; the zero vector is at distance 2 from everything.
pub fn direction_distance(v: &FloatVector, target: &FloatVector) -> Result<f64> {
    if v.n() != target.n() {
        return Err(Error::DimensionMismatch {
            expected: target.n(),
            found: v.n(),
        });
    }
    let norm = |x: &FloatVector| x.mask_order().iter().map(|a| a * a).sum::<f64>().sqrt();
    let (nv, nt) = (norm(v), norm(target));
    if nt == 0.0 {
        return Err(Error::InvalidArgument("target direction is zero".into()));
    }
    if nv < 1e-12 {
        return Ok(2.0);
    }
    let d2: f64 = v
        .mask_order()
        .iter()
        .zip(target.mask_order())
        .map(|(a, b)| (a / nv - b / nt).powi(2))
        .sum();
    Ok(d2.sqrt())
}

/// Angle in radians between unit vectors at chord distance `d`.
pub fn distance_to_angle(d: f64) -> f64 {
    2.0 * (d / 2.0).clamp(0.0, 1.0).asin()
}

/// A pure state on `ABCDE` that is a product of GHZ states, one per block of
/// a set partition of the five parties (singleton blocks sit in `|0⟩`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LibraryState {
    /// Block label of each of `A, B, C, D, E`.
    pub blocks: [usize; 5],
}

impl LibraryState {
    pub fn name(&self) -> String {
        const LETTERS: [char; 5] = ['A', 'B', 'C', 'D', 'E'];
        let count = self.blocks.iter().max().map_or(0, |m| m + 1);
        let groups: Vec<String> = (0..count)
            .map(|g| {
                (0..5)
                    .filter(|&p| self.blocks[p] == g)
                    .map(|p| LETTERS[p])
                    .collect::<String>()
            })
            .filter(|s| s.len() > 1)
            .collect();
        if groups.is_empty() {
            "product".into()
        } else {
            format!("ghz[{}]", groups.join(","))
        }
    }

    fn block_size(&self, p: usize) -> usize {
        self.blocks.iter().filter(|&&b| b == self.blocks[p]).count()
    }

    /// Amplitudes on `dims ⊗ C^ancilla`, or `None` when the environment is
    /// entangled but `ancilla < 2`.
    pub fn amplitudes(&self, dims: [usize; 4], ancilla: usize) -> Option<Vec<Complex64>> {
        if ancilla < 2 && self.block_size(4) > 1 {
            return None;
        }
        let all = [dims[0], dims[1], dims[2], dims[3], ancilla];
        let total: usize = all.iter().product();
        let active: Vec<usize> = {
            let mut v: Vec<usize> = (0..5)
                .filter(|&p| self.block_size(p) > 1)
                .map(|p| self.blocks[p])
                .collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        let terms = 1usize << active.len();
        let amp = Complex64::new(1.0 / (terms as f64).sqrt(), 0.0);
        let mut psi = vec![Complex64::new(0.0, 0.0); total];
        for bits in 0..terms {
            let mut idx = 0;
            for p in 0..5 {
                let digit = active
                    .iter()
                    .position(|&g| g == self.blocks[p])
                    .map_or(0, |k| (bits >> k) & 1);
                idx = idx * all[p] + digit;
            }
            psi[idx] = amp;
        }
        Some(psi)
    }
}

/// All 52 set partitions of the five parties.
pub fn library() -> Vec<LibraryState> {
    let mut out = Vec::new();
    let mut blocks = [0usize; 5];
    fn grow(p: usize, next: usize, blocks: &mut [usize; 5], out: &mut Vec<LibraryState>) {
        if p == 5 {
            out.push(LibraryState { blocks: *blocks });
            return;
        }
        for g in 0..=next {
            blocks[p] = g;
            grow(p + 1, next.max(g + 1), blocks, out);
        }
    }
    grow(1, 1, &mut blocks, &mut out);
    out
}

#[derive(Clone, Debug)]
pub struct ProbeConfig {
    pub target: FloatVector,
    pub dims: [usize; 4],
    /// Environment dimension; bounds the rank of the `ABCD` marginal.
    pub ancilla: usize,
    pub restarts: usize,
    pub evals_per_restart: usize,
    pub seed: u64,
}

impl ProbeConfig {
    pub fn new(target: FloatVector, dims: [usize; 4], restarts: usize, seed: u64) -> Self {
        ProbeConfig {
            target,
            dims,
            ancilla: 4,
            restarts,
            evals_per_restart: 400,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProbeSource {
    Library(String),
    /// Restart index and the optimized real parameters; amplitudes are
    /// consecutive (re, im) pairs, normalized.
    Restart(usize, Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct ProbeReport {
    pub config: ProbeConfig,
    pub best_distance: f64,
    pub source: ProbeSource,
    pub entropy_vector: FloatVector,
    /// `ABCD` marginal of the best state.
    pub state: DensityMatrix,
    pub library_best: f64,
    /// Final distance per restart.
    pub restart_distances: Vec<f64>,
}

impl ProbeReport {
    pub fn best_angle(&self) -> f64 {
        distance_to_angle(self.best_distance)
    }

    pub fn to_json(&self) -> Value {
        let c = &self.config;
        let source = match &self.source {
            ProbeSource::Library(name) => json!({"kind": "library", "name": name}),
            ProbeSource::Restart(r, x) => json!({"kind": "restart", "restart": r, "parameters": x}),
        };
        json!({
            "target": c.target.to_json(),
            "dims": c.dims,
            "ancilla": c.ancilla,
            "restarts": c.restarts,
            "evals_per_restart": c.evals_per_restart,
            "seed": c.seed,
            "best_distance": self.best_distance,
            "best_angle": self.best_angle(),
            "library_best": self.library_best,
            "restart_distances": self.restart_distances,
            "source": source,
            "entropy_vector": self.entropy_vector.to_json(),
            "state": density_to_json(&self.state),
            "units": "bits",
        })
    }
}

fn amplitudes_from(x: &[f64]) -> Vec<Complex64> {
    let mut psi: Vec<Complex64> = x.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 1e-300 {
        for z in psi.iter_mut() {
            *z /= norm;
        }
    }
    psi
}

pub fn ray_approach_probe(cfg: &ProbeConfig) -> Result<ProbeReport> {
    if cfg.target.n() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: cfg.target.n(),
        });
    }
    if cfg.dims.iter().any(|&d| d < 2) || cfg.ancilla == 0 {
        return Err(Error::InvalidArgument(
            "local dimensions must be at least 2 and the environment nonempty".into(),
        ));
    }
    let all = [cfg.dims[0], cfg.dims[1], cfg.dims[2], cfg.dims[3], cfg.ancilla];
    let score = |psi: &[Complex64]| -> Result<(f64, FloatVector)> {
        let v = entropy_vector_of_pure(psi, &all, 4)?;
        Ok((direction_distance(&v, &cfg.target)?, v))
    };

    let mut best: Option<(f64, ProbeSource, Vec<Complex64>, FloatVector)> = None;
    let consider = |best: &mut Option<_>, d: f64, src: ProbeSource, psi: Vec<Complex64>, v: FloatVector| {
        if best.as_ref().is_none_or(|b: &(f64, _, _, _)| d < b.0) {
            *best = Some((d, src, psi, v));
        }
    };
    for entry in library() {
        if let Some(psi) = entry.amplitudes(cfg.dims, cfg.ancilla) {
            let (d, v) = score(&psi)?;
            consider(&mut best, d, ProbeSource::Library(entry.name()), psi, v);
        }
    }
    let library_best = best.as_ref().map_or(2.0, |b| b.0);

    let total: usize = all.iter().product();
    let runs: Vec<(f64, Vec<f64>)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(cfg.seed, r as u64);
            let x0: Vec<f64> = draw_unit_vector(total, &mut rng as &mut dyn Draw)
                .iter()
                .flat_map(|z| [z.re, z.im])
                .collect();
            let opts = NelderMeadOptions {
                max_evals: cfg.evals_per_restart,
                initial_step: 0.2,
                ..NelderMeadOptions::default()
            };
            let res = nelder_mead(
                |x| score(&amplitudes_from(x)).map_or(f64::INFINITY, |s| s.0),
                &x0,
                &opts,
            );
            (res.value, res.x)
        })
        .collect();
    let restart_distances: Vec<f64> = runs.iter().map(|r| r.0).collect();
    for (r, (_, x)) in runs.into_iter().enumerate() {
        let psi = amplitudes_from(&x);
        let (d, v) = score(&psi)?;
        consider(&mut best, d, ProbeSource::Restart(r, x), psi, v);
    }

    let (best_distance, source, psi, entropy_vector) = best.expect("library is nonempty");
    let full = DensityMatrix::pure(all.to_vec(), &psi)?;
    let state = partial_trace(&full, PartySet::full(4))?;
    Ok(ProbeReport {
        config: cfg.clone(),
        best_distance,
        source,
        entropy_vector,
        state,
        library_best,
        restart_distances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::compile_str;

    #[test]
    fn library_has_all_partitions() {
        let lib = library();
        assert_eq!(lib.len(), 52);
        let names: Vec<String> = lib.iter().map(LibraryState::name).collect();
        assert!(names.contains(&"ghz[AB,CD]".to_string()));
        assert!(names.contains(&"ghz[ABCDE]".to_string()));
        assert!(names.contains(&"product".to_string()));
    }

    #[test]
    fn library_entropies_count_cut_blocks() {
        // S(X) is the number of nontrivial blocks split by X.
        for entry in library() {
            let psi = entry.amplitudes([2, 3, 2, 2], 2).unwrap();
            let v = entropy_vector_of_pure(&psi, &[2, 3, 2, 2, 2], 4).unwrap();
            for mask in 1u32..16 {
                let count = entry.blocks.iter().max().unwrap() + 1;
                let cut = (0..count)
                    .filter(|&g| {
                        let inside = (0..5).filter(|&p| entry.blocks[p] == g && p < 4 && mask >> p & 1 == 1).count();
                        let size = entry.blocks.iter().filter(|&&b| b == g).count();
                        inside > 0 && inside < size
                    })
                    .count();
                let s = v.get(PartySet::from_mask(mask));
                assert!((s - cut as f64).abs() < 1e-10, "{} {mask}: {s}", entry.name());
            }
        }
    }

    #[test]
    fn distance_and_angle() {
        let a = FloatVector::from_fn(2, |_| 1.0);
        let b = FloatVector::from_fn(2, |_| 3.0);
        assert!(direction_distance(&a, &b).unwrap() < 1e-15);
        let e1 = FloatVector::from_mask_order(2, vec![1.0, 0.0, 0.0]).unwrap();
        let e2 = FloatVector::from_mask_order(2, vec![0.0, 1.0, 0.0]).unwrap();
        let d = direction_distance(&e1, &e2).unwrap();
        assert!((distance_to_angle(d) - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert_eq!(direction_distance(&FloatVector::zeros(2), &e1).unwrap(), 2.0);
    }

    #[test]
    fn bell_pairs_direction_is_exact() {
        let f = compile_str("S(A)", 4).unwrap();
        let target = FloatVector::from_fn(4, |s| {
            let ab = s.contains(0) != s.contains(1);
            let cd = s.contains(2) != s.contains(3);
            ab as u8 as f64 + cd as u8 as f64
        });
        let report = ray_approach_probe(&ProbeConfig::new(target, [2, 2, 2, 2], 1, 1)).unwrap();
        assert!(report.best_distance < 1e-6);
        assert!((f.evaluate(&report.entropy_vector).unwrap() - 1.0).abs() < 1e-9);
    }
}
