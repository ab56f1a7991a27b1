//! Exact two-phase tableau simplex over `BigRational` with Bland's rule.
//!
//! Problems are in standard form `min cᵀx  s.t.  Ax = b, x ≥ 0`. The solver
//! returns primal and dual solutions at an optimum, a Farkas vector when the
//! system is infeasible, and an improving ray when it is unbounded.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug)]
pub struct StandardLp {
    /// `m` rows of `ncols` entries.
    pub a: Vec<Vec<BigRational>>,
    pub b: Vec<BigRational>,
    pub c: Vec<BigRational>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<BigRational>,
    /// Dual vector `y` with `Aᵀy ≤ c` and `bᵀy = cᵀx`.
    pub y: Vec<BigRational>,
    pub value: BigRational,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    /// `y` with `Aᵀy ≤ 0` and `bᵀy > 0`.
    Infeasible { farkas: Vec<BigRational> },
    /// Feasible `x` plus direction `d ≥ 0` with `Ad = 0`, `cᵀd < 0`.
    Unbounded {
        x: Vec<BigRational>,
        direction: Vec<BigRational>,
    },
}

struct Tableau {
    rows: Vec<Vec<BigRational>>,
    rhs: Vec<BigRational>,
    /// Reduced costs for every column.
    cost_row: Vec<BigRational>,
    /// Negated objective value.
    cost_rhs: BigRational,
    basis: Vec<usize>,
    /// Columns allowed to enter the basis.
    allowed: Vec<bool>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, e: usize) {
        let piv = self.rows[r][e].clone();
        if !piv.is_one() {
            let inv = piv.recip();
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
            self.rhs[r] *= &inv;
        }
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r].clone();
        let nz: Vec<usize> = (0..prow.len()).filter(|&j| !prow[j].is_zero()).collect();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][e].is_zero() {
                continue;
            }
            let f = self.rows[i][e].clone();
            for &j in &nz {
                let d = &f * &prow[j];
                self.rows[i][j] -= d;
            }
            self.rhs[i] -= &f * &prhs;
        }
        if !self.cost_row[e].is_zero() {
            let f = self.cost_row[e].clone();
            for &j in &nz {
                let d = &f * &prow[j];
                self.cost_row[j] -= d;
            }
            self.cost_rhs -= &f * &prhs;
        }
        self.basis[r] = e;
    }

    fn set_costs(&mut self, costs: &[BigRational]) {
        self.cost_row = costs.to_vec();
        self.cost_rhs = BigRational::zero();
        for (r, &bcol) in self.basis.iter().enumerate() {
            let cb = &costs[bcol];
            if cb.is_zero() {
                continue;
            }
            for (j, v) in self.rows[r].iter().enumerate() {
                if !v.is_zero() {
                    self.cost_row[j] -= cb * v;
                }
            }
            self.cost_rhs -= cb * &self.rhs[r];
        }
    }

    /// Runs Bland's rule to optimality. Returns the entering column on unboundedness.
    fn run(&mut self) -> Option<usize> {
        loop {
            let entering = (0..self.cost_row.len())
                .find(|&j| self.allowed[j] && self.cost_row[j].is_negative());
            let Some(e) = entering else {
                return None;
            };
            let mut best: Option<(usize, BigRational)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][e];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[r] / a;
                let better = match &best {
                    None => true,
                    Some((br, bv)) => {
                        ratio < *bv || (ratio == *bv && self.basis[r] < self.basis[*br])
                    }
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, e),
                None => return Some(e),
            }
        }
    }

    fn primal(&self, ncols: usize) -> Vec<BigRational> {
        let mut x = vec![BigRational::zero(); ncols];
        for (r, &bcol) in self.basis.iter().enumerate() {
            if bcol < ncols {
                x[bcol] = self.rhs[r].clone();
            }
        }
        x
    }

    /// `c_Bᵀ B⁻¹` read off the artificial columns, mapped back through the row flips.
    fn duals(&self, costs: &[BigRational], ncols: usize, signs: &[bool]) -> Vec<BigRational> {
        let m = self.rows.len();
        (0..m)
            .map(|i| {
                let mut w = BigRational::zero();
                for (r, &bcol) in self.basis.iter().enumerate() {
                    let cb = &costs[bcol];
                    if !cb.is_zero() {
                        w += cb * &self.rows[r][ncols + i];
                    }
                }
                if signs[i] {
                    -w
                } else {
                    w
                }
            })
            .collect()
    }
}

pub fn solve(lp: &StandardLp) -> LpOutcome {
    let m = lp.b.len();
    let ncols = lp.c.len();
    assert_eq!(lp.a.len(), m, "row count mismatch");
    assert!(lp.a.iter().all(|r| r.len() == ncols), "column count mismatch");

    let signs: Vec<bool> = lp.b.iter().map(|v| v.is_negative()).collect();
    let total = ncols + m;
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = Vec::with_capacity(total);
        for v in &lp.a[i] {
            row.push(if signs[i] { -v.clone() } else { v.clone() });
        }
        for k in 0..m {
            row.push(if k == i {
                BigRational::one()
            } else {
                BigRational::zero()
            });
        }
        rows.push(row);
        rhs.push(lp.b[i].abs());
    }
    let mut t = Tableau {
        rows,
        rhs,
        cost_row: Vec::new(),
        cost_rhs: BigRational::zero(),
        basis: (ncols..total).collect(),
        allowed: (0..total).map(|j| j < ncols).collect(),
    };

    // Phase 1: minimise the sum of artificials.
    let phase1: Vec<BigRational> = (0..total)
        .map(|j| {
            if j < ncols {
                BigRational::zero()
            } else {
                BigRational::one()
            }
        })
        .collect();
    t.set_costs(&phase1);
    let unbounded = t.run();
    debug_assert!(unbounded.is_none(), "phase 1 is bounded below by zero");
    let infeasibility = -t.cost_rhs.clone();
    if infeasibility.is_positive() {
        return LpOutcome::Infeasible {
            farkas: t.duals(&phase1, ncols, &signs),
        };
    }

    // Drive zero-level artificials out where possible; rows that cannot be
    // pivoted are redundant and keep their artificial at zero.
    for r in 0..m {
        if t.basis[r] >= ncols {
            if let Some(j) = (0..ncols).find(|&j| !t.rows[r][j].is_zero()) {
                t.pivot(r, j);
            }
        }
    }

    let mut phase2 = lp.c.clone();
    phase2.extend(std::iter::repeat_n(BigRational::zero(), m));
    t.set_costs(&phase2);
    if let Some(e) = t.run() {
        let x = t.primal(ncols);
        let mut direction = vec![BigRational::zero(); ncols];
        direction[e] = BigRational::one();
        for (r, &bcol) in t.basis.iter().enumerate() {
            if bcol < ncols {
                direction[bcol] = -t.rows[r][e].clone();
            }
        }
        return LpOutcome::Unbounded { x, direction };
    }
    LpOutcome::Optimal(LpSolution {
        x: t.primal(ncols),
        y: t.duals(&phase2, ncols, &signs),
        value: -t.cost_rhs.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    fn ints(v: &[i64]) -> Vec<BigRational> {
        v.iter().map(|&x| q(x, 1)).collect()
    }

    fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn small_optimum_with_duals() {
        // min -x1 - x2  s.t. x1 + 2x2 + s1 = 4, 3x1 + x2 + s2 = 6
        let lp = StandardLp {
            a: vec![ints(&[1, 2, 1, 0]), ints(&[3, 1, 0, 1])],
            b: ints(&[4, 6]),
            c: ints(&[-1, -1, 0, 0]),
        };
        let LpOutcome::Optimal(sol) = solve(&lp) else {
            panic!("expected optimum")
        };
        assert_eq!(sol.value, q(-14, 5));
        assert_eq!(sol.x[..2], [q(8, 5), q(6, 5)]);
        assert_eq!(dot(&lp.b, &sol.y), sol.value);
        for j in 0..4 {
            let col: Vec<BigRational> = lp.a.iter().map(|r| r[j].clone()).collect();
            assert!(dot(&col, &sol.y) <= lp.c[j]);
        }
    }

    #[test]
    fn infeasible_gives_farkas_vector() {
        // x1 + x2 = -1 with x ≥ 0
        let lp = StandardLp {
            a: vec![ints(&[1, 1])],
            b: ints(&[-1]),
            c: ints(&[0, 0]),
        };
        let LpOutcome::Infeasible { farkas } = solve(&lp) else {
            panic!("expected infeasible")
        };
        assert!(dot(&lp.b, &farkas).is_positive());
        for j in 0..2 {
            assert!(!(&lp.a[0][j] * &farkas[0]).is_positive());
        }
    }

    #[test]
    fn unbounded_direction() {
        // min -x1  s.t. x1 - x2 = 1
        let lp = StandardLp {
            a: vec![ints(&[1, -1])],
            b: ints(&[1]),
            c: ints(&[-1, 0]),
        };
        let LpOutcome::Unbounded { direction, .. } = solve(&lp) else {
            panic!("expected unbounded")
        };
        assert_eq!(dot(&lp.a[0], &direction), q(0, 1));
        assert!(dot(&lp.c, &direction).is_negative());
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let lp = StandardLp {
            a: vec![ints(&[1, 1, 0]), ints(&[2, 2, 0]), ints(&[0, 1, 1])],
            b: ints(&[2, 4, 3]),
            c: ints(&[1, 2, 0]),
        };
        let LpOutcome::Optimal(sol) = solve(&lp) else {
            panic!("expected optimum")
        };
        assert_eq!(sol.value, q(2, 1));
        assert_eq!(dot(&lp.b, &sol.y), sol.value);
    }
}
