//! Mollification of grid data for constant-coefficient linear inequalities
//! `f₁ ≤ ⟨A, D²u⟩ ≤ f₂`.
//!
//! `u_ε = η_ε ∗ u` uses the polynomial bump `η(x) = c(1 − |x|²)⁴`, sampled on
//! the grid and renormalised to unit mass. Results live on the shrunken
//! domain `Ω_{−ε} = {dist(x, ∂Ω) > ε}` and are undefined elsewhere.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::discretization::hessian_at;
use crate::error::{Error, Result};
use crate::grid::{Ball, Grid, GridFunction, PartialField};
use crate::matrix::SymMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct MollifierKernel {
    eps: f64,
    /// Multi-index offsets `k` with `|k|h < ε`.
    offsets: Vec<Vec<isize>>,
    weights: Vec<f64>,
}

impl MollifierKernel {
    /// Requires `ε ≥ 3h`.
    pub fn new(grid: &Grid, eps: f64) -> Result<Self> {
        let h = grid.h();
        if !(eps >= 3.0 * h * (1.0 - 1e-12)) {
            return Err(Error::KernelUnderResolved);
        }
        let n = grid.dim();
        let reach = (eps / h).ceil() as isize;
        let mut offsets = Vec::new();
        let mut weights = Vec::new();
        let mut k = vec![-reach; n];
        'outer: loop {
            let r2: f64 = k.iter().map(|&v| (v as f64 * h / eps).powi(2)).sum();
            if r2 < 1.0 {
                offsets.push(k.clone());
                weights.push((1.0 - r2).powi(4));
            }
            for a in 0..n {
                if k[a] < reach {
                    k[a] += 1;
                    continue 'outer;
                }
                k[a] = -reach;
            }
            break;
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self { eps, offsets, weights })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn offsets(&self) -> &[Vec<isize>] {
        &self.offsets
    }

    /// `Σ_k w_k (k_axis·h)²`, the shift that mollification adds to `x_axis²`.
    pub fn second_moment(&self, h: f64, axis: usize) -> f64 {
        self.offsets
            .iter()
            .zip(&self.weights)
            .map(|(k, w)| w * (k[axis] as f64 * h).powi(2))
            .sum()
    }
}

/// Whether `idx` lies in `Ω_{−ε}`.
pub fn in_shrunken(grid: &Grid, idx: usize, eps: f64) -> bool {
    let mut p = vec![0.0; grid.dim()];
    grid.write_point(idx, &mut p);
    grid.domain().dist_to_boundary(&p) > eps * (1.0 + 1e-12)
}

fn convolve(kernel: &MollifierKernel, u: &GridFunction) -> PartialField {
    let grid = u.grid();
    let strides = grid.strides();
    let flat: Vec<isize> = kernel
        .offsets
        .iter()
        .map(|k| k.iter().zip(strides).map(|(&a, &s)| a * s as isize).sum())
        .collect();
    let values = u.values();
    let out: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            if !in_shrunken(grid, i, kernel.eps) {
                return f64::NAN;
            }
            flat.iter()
                .zip(&kernel.weights)
                .map(|(&o, &w)| w * values[(i as isize + o) as usize])
                .sum()
        })
        .collect();
    PartialField::from_values(grid, out).expect("length matches")
}

/// `η_ε ∗ u` on `Ω_{−ε}`.
pub fn mollify(u: &GridFunction, eps: f64) -> Result<PartialField> {
    let kernel = MollifierKernel::new(u.grid(), eps)?;
    Ok(convolve(&kernel, u))
}

fn check_spd(a: &SymMatrix) -> Result<()> {
    if a.eigenvalues().first().is_some_and(|&e| e > 0.0) {
        Ok(())
    } else {
        Err(Error::NotPositiveDefinite)
    }
}

/// `g = Σ A_ij ∂²_ij u_ε` by central differences, wherever the 3ⁿ stencil of
/// `u_ε` is defined.
pub fn compute_g(u_eps: &PartialField, a: &SymMatrix) -> Result<PartialField> {
    check_spd(a)?;
    let grid = u_eps.grid();
    if a.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: a.dim(),
        });
    }
    let raw = u_eps.raw();
    let out: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| match hessian_at(grid, raw, i) {
            Some(h) => h.inner(a).expect("dimensions match"),
            None => f64::NAN,
        })
        .collect();
    PartialField::from_values(grid, out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichNode {
    pub node: usize,
    /// `g_ε − f₁∗η_ε`.
    pub lower_margin: f64,
    /// `f₂∗η_ε − g_ε`.
    pub upper_margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub eps: f64,
    pub tolerance: f64,
    pub nodes: Vec<SandwichNode>,
    pub worst_lower: f64,
    pub worst_upper: f64,
    pub pass: bool,
}

/// `10·h·(1 + ‖f₁‖_∞ + ‖f₂‖_∞)`.
pub fn default_sandwich_tolerance(f1: &GridFunction, f2: &GridFunction) -> f64 {
    10.0 * f1.grid().h() * (1.0 + f1.max_abs() + f2.max_abs())
}

/// Mollifies `u`, `f₁`, `f₂` and checks `f₁∗η_ε ≤ g_ε ≤ f₂∗η_ε` at every node
/// of `Ω_{−ε}` where `g_ε` is defined.
pub fn sandwich_check(
    u: &GridFunction,
    a: &SymMatrix,
    f1: &GridFunction,
    f2: &GridFunction,
    eps: f64,
    tol: Option<f64>,
) -> Result<SandwichReport> {
    if u.grid() != f1.grid() || u.grid() != f2.grid() {
        return Err(Error::InvalidGrid("grid functions live on different grids".into()));
    }
    if let Some(i) = (0..u.grid().len()).find(|&i| f1.get(i) > f2.get(i)) {
        return Err(Error::BoundsOrder(i));
    }
    let kernel = MollifierKernel::new(u.grid(), eps)?;
    let g = compute_g(&convolve(&kernel, u), a)?;
    let lo = convolve(&kernel, f1);
    let hi = convolve(&kernel, f2);
    let tol = tol.unwrap_or_else(|| default_sandwich_tolerance(f1, f2));
    let nodes: Vec<SandwichNode> = g
        .defined()
        .map(|(i, gv)| SandwichNode {
            node: i,
            lower_margin: gv - lo.get(i).expect("g defined inside Ω_{−ε}"),
            upper_margin: hi.get(i).expect("g defined inside Ω_{−ε}") - gv,
        })
        .collect();
    let worst_lower = nodes.iter().map(|n| n.lower_margin).fold(f64::INFINITY, f64::min);
    let worst_upper = nodes.iter().map(|n| n.upper_margin).fold(f64::INFINITY, f64::min);
    Ok(SandwichReport {
        eps,
        tolerance: tol,
        pass: !nodes.is_empty() && worst_lower >= -tol && worst_upper >= -tol,
        nodes,
        worst_lower,
        worst_upper,
    })
}

/// `(Σ_{x ∈ B} |D²_h u_ε(x)|_F^p hⁿ)^{1/p}`; the Hessian must be defined on
/// every node of the ball.
pub fn hessian_lp_norm(u_eps: &PartialField, p: f64, b: &Ball) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidConfig(format!("p = {p} outside [1, ∞)")));
    }
    let grid = u_eps.grid();
    let nodes = grid.ball_nodes(b)?;
    let raw = u_eps.raw();
    let terms = nodes
        .par_iter()
        .map(|&i| {
            hessian_at(grid, raw, i)
                .map(|h| h.frobenius().powf(p))
                .ok_or(Error::StencilExitsDomain)
        })
        .collect::<Result<Vec<f64>>>()?;
    let vol = grid.h().powi(grid.dim() as i32);
    Ok((terms.iter().sum::<f64>() * vol).powf(1.0 / p))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub eps: f64,
    pub norm: f64,
    pub sandwich_pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub p: f64,
    pub radius: f64,
    pub rows: Vec<SweepRow>,
    /// `max/min` of the norm column.
    pub ratio: f64,
    pub bounded: bool,
}

impl SweepReport {
    /// Norm at the smallest `ε` over the norm at the largest.
    pub fn growth(&self) -> f64 {
        match (self.rows.first(), self.rows.last()) {
            (Some(a), Some(b)) => b.norm / a.norm,
            _ => f64::NAN,
        }
    }

    /// Columns `eps,norm_p,pass`; `pass` is the sandwich verdict at that `ε`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("eps,norm_p,pass\n");
        for r in &self.rows {
            let _ = writeln!(s, "{:e},{:e},{}", r.eps, r.norm, u8::from(r.sandwich_pass));
        }
        s
    }
}

/// `‖D²u_ε‖_{L^p(B(0, r))}` for each `ε` of a decreasing schedule, with the
/// sandwich verdict alongside. `bounded` is `max/min ≤ 2`.
pub fn stability_sweep(
    u: &GridFunction,
    a: &SymMatrix,
    f1: &GridFunction,
    f2: &GridFunction,
    schedule: &[f64],
    p: f64,
    r: f64,
) -> Result<SweepReport> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidConfig("ε schedule must be nonempty and decreasing".into()));
    }
    let h = u.grid().h();
    if schedule.iter().any(|&e| e < 3.0 * h * (1.0 - 1e-12)) {
        return Err(Error::KernelUnderResolved);
    }
    let ball = Ball::centered(u.grid().dim(), r)?;
    let rows = schedule
        .iter()
        .map(|&eps| {
            let ue = mollify(u, eps)?;
            let norm = hessian_lp_norm(&ue, p, &ball)?;
            let sandwich = sandwich_check(u, a, f1, f2, eps, None)?;
            Ok(SweepRow {
                eps,
                norm,
                sandwich_pass: sandwich.pass,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max = rows.iter().map(|r| r.norm).fold(f64::NEG_INFINITY, f64::max);
    let min = rows.iter().map(|r| r.norm).fold(f64::INFINITY, f64::min);
    let ratio = max / min;
    Ok(SweepReport {
        p,
        radius: r,
        rows,
        ratio,
        bounded: ratio <= 2.0,
    })
}
