//! A small dense two-phase revised simplex for
//! `maximize cᵀz  subject to  Az = b, z ≥ 0`
//! with few rows and many columns.
//!
//! The basis inverse is kept explicitly (`m × m`) and refactorized every
//! [`REFACTOR_EVERY`] pivots. Entering columns are chosen by largest reduced
//! cost; after [`DEGENERATE_LIMIT`] consecutive degenerate pivots the method
//! switches to Bland's rule (smallest eligible index, smallest leaving basic
//! index on ties) until progress resumes, which rules out cycling.

use crate::error::{Error, Result};

const REFACTOR_EVERY: usize = 64;
const DEGENERATE_LIMIT: usize = 8;
const COST_TOL: f64 = 1e-11;
const PIVOT_TOL: f64 = 1e-11;

/// Problem data. Column `j` of `A` is `cols[j*m .. (j+1)*m]`.
#[derive(Debug, Clone)]
pub struct StandardLp {
    pub m: usize,
    pub cols: Vec<f64>,
    pub cost: Vec<f64>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub objective: f64,
    /// Values of the basic columns (all other columns are zero).
    pub basis: Vec<usize>,
    pub basic_values: Vec<f64>,
    /// Simplex multipliers `y = c_Bᵀ B⁻¹`, i.e. an optimal solution of the
    /// dual `min bᵀy s.t. Aᵀy ≥ c`.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

impl StandardLp {
    pub fn columns(&self) -> usize {
        self.cost.len()
    }

    fn col(&self, j: usize) -> &[f64] {
        &self.cols[j * self.m..(j + 1) * self.m]
    }
}

struct Tableau<'a> {
    lp: &'a StandardLp,
    rhs: Vec<f64>,
    /// Row sign flips so that `rhs ≥ 0` for the artificial start.
    signs: Vec<f64>,
    basis: Vec<usize>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    iterations: usize,
}

impl<'a> Tableau<'a> {
    fn n_real(&self) -> usize {
        self.lp.columns()
    }

    /// Column `j` with row signs applied; indices past the real columns are
    /// artificial unit vectors.
    fn column(&self, j: usize, out: &mut [f64]) {
        let m = self.lp.m;
        if j < self.n_real() {
            for (i, o) in out.iter_mut().enumerate() {
                *o = self.signs[i] * self.lp.col(j)[i];
            }
        } else {
            out.iter_mut().for_each(|o| *o = 0.0);
            out[j - self.n_real()] = 1.0;
        }
        debug_assert_eq!(out.len(), m);
    }

    fn ftran(&self, a: &[f64], out: &mut [f64]) {
        let m = self.lp.m;
        for i in 0..m {
            out[i] = (0..m).map(|k| self.binv[i * m + k] * a[k]).sum();
        }
    }

    fn multipliers(&self, cost: &dyn Fn(usize) -> f64) -> Vec<f64> {
        let m = self.lp.m;
        (0..m)
            .map(|k| (0..m).map(|i| cost(self.basis[i]) * self.binv[i * m + k]).sum())
            .collect()
    }

    fn refactor(&mut self) -> Result<()> {
        let m = self.lp.m;
        let mut b = vec![0.0; m * m];
        let mut col = vec![0.0; m];
        for (pos, &j) in self.basis.iter().enumerate() {
            self.column(j, &mut col);
            for i in 0..m {
                b[i * m + pos] = col[i];
            }
        }
        self.binv = invert(&b, m).ok_or_else(|| Error::LinearProgram("singular basis".into()))?;
        let rhs = self.rhs.clone();
        let mut xb = vec![0.0; m];
        self.ftran(&rhs, &mut xb);
        for v in xb.iter_mut() {
            if *v < 0.0 && *v > -1e-12 {
                *v = 0.0;
            }
        }
        self.xb = xb;
        Ok(())
    }

    fn pivot(&mut self, r: usize, entering: usize, w: &[f64]) {
        let m = self.lp.m;
        let wr = w[r];
        let theta = self.xb[r] / wr;
        for k in 0..m {
            self.binv[r * m + k] /= wr;
        }
        for i in 0..m {
            if i != r && w[i] != 0.0 {
                let f = w[i];
                for k in 0..m {
                    self.binv[i * m + k] -= f * self.binv[r * m + k];
                }
                self.xb[i] -= theta * f;
                if self.xb[i] < 0.0 && self.xb[i] > -1e-13 {
                    self.xb[i] = 0.0;
                }
            }
        }
        self.xb[r] = theta;
        self.basis[r] = entering;
        self.iterations += 1;
    }

    /// Runs simplex iterations for the given cost until optimal.
    fn optimize(&mut self, cost: &dyn Fn(usize) -> f64, allow_artificial: bool, max_iter: usize) -> Result<()> {
        let m = self.lp.m;
        let total = self.n_real() + if allow_artificial { m } else { 0 };
        let mut col = vec![0.0; m];
        let mut w = vec![0.0; m];
        let mut degenerate_run = 0usize;
        let mut in_basis = vec![false; self.n_real() + m];
        for &j in &self.basis {
            in_basis[j] = true;
        }
        let mut since_refactor = 0;
        loop {
            if self.iterations > max_iter {
                return Err(Error::LinearProgram("iteration limit".into()));
            }
            if since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
                since_refactor = 0;
            }
            let y = self.multipliers(cost);
            let bland = degenerate_run >= DEGENERATE_LIMIT;
            let mut entering = None;
            let mut best = COST_TOL;
            for j in 0..total {
                if in_basis[j] {
                    continue;
                }
                self.column(j, &mut col);
                let d = cost(j) - y.iter().zip(&col).map(|(a, b)| a * b).sum::<f64>();
                let scale = 1.0 + cost(j).abs();
                if d > COST_TOL * scale {
                    if bland {
                        entering = Some(j);
                        break;
                    }
                    if d / scale > best {
                        best = d / scale;
                        entering = Some(j);
                    }
                }
            }
            let Some(j) = entering else {
                return Ok(());
            };
            self.column(j, &mut col);
            self.ftran(&col, &mut w);
            let mut leave: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for i in 0..m {
                if w[i] > PIVOT_TOL {
                    let ratio = self.xb[i].max(0.0) / w[i];
                    let better = match leave {
                        None => true,
                        Some(l) => {
                            ratio < best_ratio - 1e-14
                                || (ratio <= best_ratio + 1e-14 && self.basis[i] < self.basis[l])
                        }
                    };
                    if better {
                        best_ratio = ratio.min(best_ratio);
                        leave = Some(i);
                    }
                }
            }
            let Some(r) = leave else {
                return Err(Error::LinearProgram("unbounded".into()));
            };
            if best_ratio <= 1e-14 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            in_basis[self.basis[r]] = false;
            in_basis[j] = true;
            self.pivot(r, j, &w);
            since_refactor += 1;
        }
    }
}

/// Gauss–Jordan inverse with partial pivoting of a row-major `m × m` matrix.
fn invert(a: &[f64], m: usize) -> Option<Vec<f64>> {
    let mut work = a.to_vec();
    let mut inv = vec![0.0; m * m];
    for i in 0..m {
        inv[i * m + i] = 1.0;
    }
    for c in 0..m {
        let p = (c..m).max_by(|&x, &y| work[x * m + c].abs().total_cmp(&work[y * m + c].abs()))?;
        if work[p * m + c].abs() < 1e-14 {
            return None;
        }
        for k in 0..m {
            work.swap(c * m + k, p * m + k);
            inv.swap(c * m + k, p * m + k);
        }
        let d = work[c * m + c];
        for k in 0..m {
            work[c * m + k] /= d;
            inv[c * m + k] /= d;
        }
        for r in 0..m {
            if r != c {
                let f = work[r * m + c];
                if f != 0.0 {
                    for k in 0..m {
                        work[r * m + k] -= f * work[c * m + k];
                        inv[r * m + k] -= f * inv[c * m + k];
                    }
                }
            }
        }
    }
    Some(inv)
}

/// Solves `max cᵀz, Az = b, z ≥ 0`.
pub fn maximize(lp: &StandardLp) -> Result<LpSolution> {
    let m = lp.m;
    if lp.cols.len() != m * lp.columns() || lp.rhs.len() != m {
        return Err(Error::LinearProgram("inconsistent problem dimensions".into()));
    }
    let signs: Vec<f64> = lp.rhs.iter().map(|&b| if b < 0.0 { -1.0 } else { 1.0 }).collect();
    let rhs: Vec<f64> = lp.rhs.iter().zip(&signs).map(|(b, s)| b * s).collect();
    let n_real = lp.columns();
    let mut t = Tableau {
        lp,
        xb: rhs.clone(),
        rhs,
        signs,
        basis: (n_real..n_real + m).collect(),
        binv: {
            let mut id = vec![0.0; m * m];
            for i in 0..m {
                id[i * m + i] = 1.0;
            }
            id
        },
        iterations: 0,
    };
    let max_iter = 50 * (n_real + m) + 1000;

    // phase I: drive the artificial columns to zero
    let phase1 = |j: usize| if j >= n_real { -1.0 } else { 0.0 };
    t.optimize(&phase1, true, max_iter)?;
    t.refactor()?;
    let infeasibility: f64 = t
        .basis
        .iter()
        .zip(&t.xb)
        .filter(|(&j, _)| j >= n_real)
        .map(|(_, &v)| v)
        .sum();
    if infeasibility > 1e-9 * (1.0 + t.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()))) {
        return Err(Error::LinearProgram("infeasible".into()));
    }
    // pivot remaining (zero-level) artificials out of the basis
    let mut col = vec![0.0; m];
    let mut w = vec![0.0; m];
    for r in 0..m {
        if t.basis[r] < n_real {
            continue;
        }
        let mut replaced = false;
        for j in 0..n_real {
            if t.basis.contains(&j) {
                continue;
            }
            t.column(j, &mut col);
            t.ftran(&col, &mut w);
            if w[r].abs() > 1e-9 {
                t.pivot(r, j, &w);
                replaced = true;
                break;
            }
        }
        if !replaced {
            return Err(Error::LinearProgram("redundant constraint row".into()));
        }
    }
    t.refactor()?;

    let phase2 = |j: usize| if j < n_real { lp.cost[j] } else { 0.0 };
    t.optimize(&phase2, false, max_iter)?;
    t.refactor()?;
    let y_signed = t.multipliers(&phase2);
    // undo the row sign flips: y for the original rows
    let duals: Vec<f64> = y_signed.iter().zip(&t.signs).map(|(y, s)| y * s).collect();
    let objective = t.basis.iter().zip(&t.xb).map(|(&j, &v)| lp.cost[j] * v).sum();
    Ok(LpSolution {
        objective,
        basis: t.basis.clone(),
        basic_values: t.xb.clone(),
        duals,
        iterations: t.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(m: usize, cols: &[&[f64]], cost: &[f64], rhs: &[f64]) -> StandardLp {
        StandardLp {
            m,
            cols: cols.iter().flat_map(|c| c.iter().copied()).collect(),
            cost: cost.to_vec(),
            rhs: rhs.to_vec(),
        }
    }

    #[test]
    fn small_textbook_problem() {
        // max 3x + 2y  s.t. x + y + s1 = 4, x + 3y + s2 = 6
        let p = lp(
            2,
            &[&[1.0, 1.0], &[1.0, 3.0], &[1.0, 0.0], &[0.0, 1.0]],
            &[3.0, 2.0, 0.0, 0.0],
            &[4.0, 6.0],
        );
        let s = maximize(&p).unwrap();
        assert!((s.objective - 12.0).abs() < 1e-12);
        // strong duality
        let dual_obj: f64 = s.duals.iter().zip(&p.rhs).map(|(y, b)| y * b).sum();
        assert!((dual_obj - 12.0).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        // x = -1 with x ≥ 0
        let p = lp(1, &[&[1.0]], &[1.0], &[-1.0]);
        assert!(matches!(maximize(&p), Err(Error::LinearProgram(_))));
        // max x - y, x - y = 0 ... with free growth: x - y + 0 = 0 → bounded at 0; use x - y = 1, max x
        let p = lp(1, &[&[1.0], &[-1.0]], &[1.0, 0.0], &[1.0]);
        assert_eq!(maximize(&p).unwrap_err(), Error::LinearProgram("unbounded".into()));
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Beale's cycling example in equality form.
        let p = lp(
            3,
            &[
                &[0.25, 0.5, 0.0],
                &[-60.0, -90.0, 0.0],
                &[-0.04, -0.02, 1.0],
                &[9.0, 3.0, 0.0],
                &[1.0, 0.0, 0.0],
                &[0.0, 1.0, 0.0],
                &[0.0, 0.0, 1.0],
            ],
            &[0.75, -150.0, 0.02, -6.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0],
        );
        let s = maximize(&p).unwrap();
        assert!((s.objective - 0.05).abs() < 1e-12, "{}", s.objective);
    }
}
