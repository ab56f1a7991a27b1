//! Batch check of `I(C;D) ≥ I(C;AB)` on states meeting the three constraints.

use rayon::prelude::*;
use serde_json::{json, Value};

use super::draw::Draw;
use super::families::{generate, Family};
use crate::entropy::{compile_str, FloatVector, LinearFunctional};
use crate::error::Result;
use crate::quantum::{entropy_vector, stream_rng, DensityMatrix};

/// Default tolerance on the tested difference, in bits.
pub const DEFAULT_TOL: f64 = 1e-7;
/// Default tolerance on each constraint, in bits.
pub const DEFAULT_CONSTRAINT_TOL: f64 = 1e-9;

/// The constraints `I(A;C|B)`, `I(C;B|A)`, `I(A;B|D)` and the target
/// `I(C;D) − I(C;AB)` over four parties.
pub fn theorem1_functionals() -> ([LinearFunctional; 3], LinearFunctional) {
    let c = |s: &str| compile_str(s, 4).expect("fixed expression");
    (
        [
            c("I(A;C|B)").with_tag("I(A;C|B)"),
            c("I(C;B|A)").with_tag("I(C;B|A)"),
            c("I(A;B|D)").with_tag("I(A;B|D)"),
        ],
        c("I(C;D) - I(C;AB)").with_tag("I(C;D) - I(C;AB)"),
    )
}

#[derive(Clone, Debug)]
pub struct TrialConfig {
    pub family: Family,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub constraint_tol: f64,
    /// Each local dimension is drawn from `2..=max_dim`.
    pub max_dim: usize,
}

impl TrialConfig {
    pub fn new(family: Family, trials: usize, seed: u64) -> Self {
        TrialConfig {
            family,
            trials,
            seed,
            tol: DEFAULT_TOL,
            constraint_tol: DEFAULT_CONSTRAINT_TOL,
            max_dim: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub trial: usize,
    pub dims: Vec<usize>,
    pub difference: f64,
    pub residuals: [f64; 3],
}

impl TrialOutcome {
    pub fn to_json(&self) -> Value {
        json!({
            "trial": self.trial,
            "dims": self.dims,
            "difference": self.difference,
            "residuals": self.residuals,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialReport {
    pub family: Family,
    pub seed: u64,
    pub tol: f64,
    pub constraint_tol: f64,
    pub trials: usize,
    /// Trials meeting all constraints within `constraint_tol`.
    pub evaluated: usize,
    /// Statistics over evaluated trials; `None` when there are none.
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub mean: Option<f64>,
    /// Evaluated trial attaining `min`.
    pub worst_trial: Option<usize>,
    pub max_residual: f64,
    /// Evaluated trials with difference below `−tol`.
    pub violations: Vec<TrialOutcome>,
    /// Trials excluded for violating a constraint (all of them).
    pub excluded: Vec<TrialOutcome>,
}

impl TrialReport {
    pub fn theorem_holds(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self) -> Value {
        const SHOWN: usize = 20;
        json!({
            "family": self.family.name(),
            "seed": self.seed,
            "tol": self.tol,
            "constraint_tol": self.constraint_tol,
            "trials": self.trials,
            "evaluated": self.evaluated,
            "min": self.min,
            "max": self.max,
            "mean": self.mean,
            "worst": self.worst_trial.map(|t| json!({
                "trial": t,
                "reproduce": {"family": self.family.name(), "seed": self.seed, "trial": t},
            })),
            "max_residual": self.max_residual,
            "violations": self.violations.iter().map(TrialOutcome::to_json).collect::<Vec<_>>(),
            "excluded_count": self.excluded.len(),
            "excluded": self.excluded.iter().take(SHOWN).map(TrialOutcome::to_json).collect::<Vec<_>>(),
            "units": "bits",
        })
    }
}

/// The state used by trial `trial` of a suite with this seed.
pub fn reproduce_trial(family: Family, seed: u64, trial: usize, max_dim: usize) -> Result<DensityMatrix> {
    let mut rng = stream_rng(seed, trial as u64);
    let hi = max_dim.max(2);
    let dims = [0; 4].map(|_| 2 + rng.index(hi - 1));
    generate(family, dims, &mut rng)
}

pub fn evaluate_theorem1(v: &FloatVector) -> Result<(f64, [f64; 3])> {
    let (constraints, target) = theorem1_functionals();
    let mut residuals = [0.0; 3];
    for (r, c) in residuals.iter_mut().zip(&constraints) {
        *r = c.evaluate(v)?;
    }
    Ok((target.evaluate(v)?, residuals))
}

/// Runs `cfg.trials` independent trials, each on its own seed stream, and
/// merges the outcomes in trial order.
pub fn run_theorem1_trial_suite(cfg: &TrialConfig) -> Result<TrialReport> {
    let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let rho = reproduce_trial(cfg.family, cfg.seed, trial, cfg.max_dim)?;
            let (difference, residuals) = evaluate_theorem1(&entropy_vector(&rho)?)?;
            Ok(TrialOutcome {
                trial,
                dims: rho.dims().to_vec(),
                difference,
                residuals,
            })
        })
        .collect::<Result<_>>()?;

    let mut report = TrialReport {
        family: cfg.family,
        seed: cfg.seed,
        tol: cfg.tol,
        constraint_tol: cfg.constraint_tol,
        trials: cfg.trials,
        evaluated: 0,
        min: None,
        max: None,
        mean: None,
        worst_trial: None,
        max_residual: 0.0,
        violations: Vec::new(),
        excluded: Vec::new(),
    };
    let mut sum = 0.0;
    for o in outcomes {
        let residual = o.residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        report.max_residual = report.max_residual.max(residual);
        if residual > cfg.constraint_tol {
            report.excluded.push(o);
            continue;
        }
        report.evaluated += 1;
        sum += o.difference;
        if report.min.is_none_or(|m| o.difference < m) {
            report.min = Some(o.difference);
            report.worst_trial = Some(o.trial);
        }
        if report.max.is_none_or(|m| o.difference > m) {
            report.max = Some(o.difference);
        }
        if o.difference < -cfg.tol {
            report.violations.push(o);
        }
    }
    if report.evaluated > 0 {
        report.mean = Some(sum / report.evaluated as f64);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_small_suite() {
        let cfg = TrialConfig::new(Family::Remark1, 12, 3);
        let a = run_theorem1_trial_suite(&cfg).unwrap();
        let b = run_theorem1_trial_suite(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.evaluated, 12);
        assert!(a.theorem_holds());
        let (min, mean, max) = (a.min.unwrap(), a.mean.unwrap(), a.max.unwrap());
        assert!(min <= mean && mean <= max);
    }

    #[test]
    fn control_is_excluded_with_negative_difference() {
        let r = run_theorem1_trial_suite(&TrialConfig::new(Family::Control1, 3, 0)).unwrap();
        assert_eq!(r.evaluated, 0);
        assert_eq!(r.excluded.len(), 3);
        assert!(r.min.is_none());
        for o in &r.excluded {
            assert!((o.difference + 1.0).abs() < 1e-9);
        }
    }
}
