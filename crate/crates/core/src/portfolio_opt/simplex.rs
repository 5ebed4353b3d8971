//! Dense two-phase primal simplex for small linear programs
//! `min cᵀx  s.t.  A x (≤|=|≥) b,  x ≥ 0`.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coefficients: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration cap reached; `x` holds the last basic point, which is
    /// feasible only if phase one had finished.
    IterationLimit { feasible: bool },
}

impl fmt::Display for LpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpStatus::Optimal => write!(f, "optimal"),
            LpStatus::Infeasible => write!(f, "infeasible"),
            LpStatus::Unbounded => write!(f, "unbounded"),
            LpStatus::IterationLimit { feasible } => {
                write!(f, "iteration limit reached ({})", if *feasible { "feasible" } else { "infeasible" })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

const EPS: f64 = 1e-11;
/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 50;

struct Tableau {
    rows: usize,
    cols: usize,
    /// `rows × (cols + 1)`, last column is the right-hand side.
    a: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * (self.cols + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, r: usize, c: usize, cost: &mut [f64]) {
        let w = self.cols + 1;
        let p = self.a[r * w + c];
        for v in &mut self.a[r * w..(r + 1) * w] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.a[r * w..(r + 1) * w].to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let factor = self.a[i * w + c];
            if factor != 0.0 {
                for (v, &q) in self.a[i * w..(i + 1) * w].iter_mut().zip(&pivot_row) {
                    *v -= factor * q;
                }
                self.a[i * w + c] = 0.0;
            }
        }
        let factor = cost[c];
        if factor != 0.0 {
            for (v, &q) in cost.iter_mut().zip(&pivot_row) {
                *v -= factor * q;
            }
            cost[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Minimizes the reduced-cost row `cost` (length `cols + 1`, last entry
    /// is minus the objective) over columns not in `blocked`.
    fn optimize(&mut self, cost: &mut [f64], blocked: &[bool], iterations: &mut usize, cap: usize) -> Phase {
        let mut streak = 0;
        loop {
            if *iterations >= cap {
                return Phase::Limit;
            }
            let bland = streak >= DEGENERATE_STREAK;
            let mut enter = None;
            let mut best = -EPS;
            for c in 0..self.cols {
                if blocked[c] || cost[c] >= -EPS {
                    continue;
                }
                if bland {
                    enter = Some(c);
                    break;
                }
                if cost[c] < best {
                    best = cost[c];
                    enter = Some(c);
                }
            }
            let Some(c) = enter else {
                return Phase::Done;
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let v = self.at(r, c);
                if v > EPS {
                    let ratio = self.rhs(r) / v;
                    let better = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - EPS || (ratio <= lratio + EPS && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((r, ratio)) = leave else {
                return Phase::Unbounded;
            };
            streak = if ratio.abs() <= EPS { streak + 1 } else { 0 };
            self.pivot(r, c, cost);
            *iterations += 1;
        }
    }
}

enum Phase {
    Done,
    Unbounded,
    Limit,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        Self {
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn add(&mut self, coefficients: Vec<f64>, relation: Relation, rhs: f64) {
        assert_eq!(coefficients.len(), self.objective.len(), "constraint width");
        self.constraints.push(Constraint {
            coefficients,
            relation,
            rhs,
        });
    }

    pub fn variables(&self) -> usize {
        self.objective.len()
    }

    /// Solves with at most `max_iterations` pivots over both phases.
    pub fn solve(&self, max_iterations: usize) -> LpSolution {
        let n = self.variables();
        let rows = self.constraints.len();
        // column layout: structural | slack/surplus per inequality | artificial
        let n_slack = self.constraints.iter().filter(|c| c.relation != Relation::Eq).count();
        let mut needs_artificial = Vec::with_capacity(rows);
        for con in &self.constraints {
            let flipped = con.rhs < 0.0;
            let rel = match (con.relation, flipped) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (r, _) => r,
            };
            needs_artificial.push(rel != Relation::Le);
        }
        let n_art = needs_artificial.iter().filter(|&&b| b).count();
        let cols = n + n_slack + n_art;
        let w = cols + 1;
        let mut t = Tableau {
            rows,
            cols,
            a: vec![0.0; rows * w],
            basis: vec![0; rows],
        };
        let (mut slack, mut art) = (n, n + n_slack);
        for (r, con) in self.constraints.iter().enumerate() {
            let sign = if con.rhs < 0.0 { -1.0 } else { 1.0 };
            for (j, &v) in con.coefficients.iter().enumerate() {
                t.a[r * w + j] = sign * v;
            }
            t.a[r * w + cols] = sign * con.rhs;
            if con.relation != Relation::Eq {
                let s = if con.relation == Relation::Le { 1.0 } else { -1.0 };
                t.a[r * w + slack] = sign * s;
                if !needs_artificial[r] {
                    t.basis[r] = slack;
                }
                slack += 1;
            }
            if needs_artificial[r] {
                t.a[r * w + art] = 1.0;
                t.basis[r] = art;
                art += 1;
            }
        }

        let mut iterations = 0;
        let mut blocked = vec![false; cols];
        if n_art > 0 {
            // phase one: minimize the sum of artificials
            let mut cost = vec![0.0; w];
            for c in n + n_slack..cols {
                cost[c] = 1.0;
            }
            for r in 0..rows {
                if t.basis[r] >= n + n_slack {
                    for c in 0..w {
                        cost[c] -= t.at(r, c);
                    }
                }
            }
            match t.optimize(&mut cost, &blocked, &mut iterations, max_iterations) {
                Phase::Limit => {
                    return self.finish(&t, LpStatus::IterationLimit { feasible: false }, iterations);
                }
                Phase::Unbounded => unreachable!("phase one is bounded below by zero"),
                Phase::Done => {}
            }
            let infeasibility = -cost[cols];
            let scale = self.constraints.iter().map(|c| c.rhs.abs()).fold(1.0, f64::max);
            if infeasibility > 1e-9 * scale {
                return self.finish(&t, LpStatus::Infeasible, iterations);
            }
            // drive zero-level artificials out of the basis where possible
            for r in 0..rows {
                if t.basis[r] >= n + n_slack {
                    if let Some(c) = (0..n + n_slack).find(|&c| t.at(r, c).abs() > 1e-9) {
                        let mut dummy = vec![0.0; w];
                        t.pivot(r, c, &mut dummy);
                    }
                }
            }
            for b in blocked.iter_mut().skip(n + n_slack) {
                *b = true;
            }
        }

        let mut cost = vec![0.0; w];
        cost[..n].copy_from_slice(&self.objective);
        for r in 0..rows {
            let c = t.basis[r];
            let f = cost[c];
            if f != 0.0 {
                for j in 0..w {
                    cost[j] -= f * t.at(r, j);
                }
            }
        }
        let status = match t.optimize(&mut cost, &blocked, &mut iterations, max_iterations) {
            Phase::Done => LpStatus::Optimal,
            Phase::Unbounded => LpStatus::Unbounded,
            Phase::Limit => LpStatus::IterationLimit { feasible: true },
        };
        self.finish(&t, status, iterations)
    }

    fn finish(&self, t: &Tableau, status: LpStatus, iterations: usize) -> LpSolution {
        let n = self.variables();
        let mut x = vec![0.0; n];
        for r in 0..t.rows {
            if t.basis[r] < n {
                x[t.basis[r]] = t.rhs(r);
            }
        }
        let objective = x.iter().zip(&self.objective).map(|(a, b)| a * b).sum();
        LpSolution {
            status,
            x,
            objective,
            iterations,
        }
    }
}
