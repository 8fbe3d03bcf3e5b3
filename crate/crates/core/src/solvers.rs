//! Explicit relaxation solvers that manufacture grid solutions.
//!
//! Both solvers run simultaneous (Jacobi) sweeps of the parabolic flow
//! `u ← u + τ(F_h u − f)` on the nodes where the scheme fits. Every other node
//! (the boundary and, for wide stencils, the ring next to it) is held at the
//! supplied data. The obstacle solver projects onto `u ≥ ψ` after each sweep
//! and treats the zeroth-order term `u·g` with the current iterate.

use rayon::prelude::*;

use crate::discretization::{Scheme, StencilConfig};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, PartialField};
use crate::operators::EllipticOperator;
use crate::viscosity::Bounds;

pub const DEFAULT_MAX_ITERATIONS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationConfig {
    tau: f64,
    max_iterations: usize,
    tolerance: Option<f64>,
    stencil: StencilConfig,
}

/// Largest stable step, `h²/(4nλ₂)`.
pub fn tau_ceiling(grid: &Grid, op: &EllipticOperator) -> f64 {
    let h = grid.h();
    h * h / (4.0 * grid.dim() as f64 * op.params().lambda_max())
}

impl RelaxationConfig {
    /// `tolerance = None` selects the default `1e-9·(1 + ‖f‖_∞)`.
    pub fn new(
        grid: &Grid,
        op: &EllipticOperator,
        tau: f64,
        max_iterations: usize,
        tolerance: Option<f64>,
        stencil: StencilConfig,
    ) -> Result<Self> {
        let ceiling = tau_ceiling(grid, op);
        if !(tau > 0.0) || tau > ceiling * (1.0 + 1e-12) {
            return Err(Error::InvalidConfig(format!(
                "step {tau:e} outside (0, {ceiling:e}]"
            )));
        }
        if max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be positive".into()));
        }
        if let Some(t) = tolerance {
            if !(t > 0.0) {
                return Err(Error::InvalidConfig(format!("tolerance {t} must be positive")));
            }
        }
        Ok(Self {
            tau,
            max_iterations,
            tolerance,
            stencil,
        })
    }

    /// Step at the ceiling, default iteration cap and tolerance.
    pub fn standard(grid: &Grid, op: &EllipticOperator) -> Self {
        Self {
            tau: tau_ceiling(grid, op),
            max_iterations: DEFAULT_MAX_ITERATIONS,
            tolerance: None,
            stencil: StencilConfig::default(),
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = Some(tol);
        self
    }

    pub fn with_max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n.max(1);
        self
    }

    pub fn with_stencil(mut self, stencil: StencilConfig) -> Self {
        self.stencil = stencil;
        self
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn max_iterations(&self) -> usize {
        self.max_iterations
    }

    pub fn stencil(&self) -> StencilConfig {
        self.stencil
    }

    /// The tolerance actually used against a right-hand side of sup norm `f_norm`.
    pub fn tolerance_for(&self, f_norm: f64) -> f64 {
        self.tolerance.unwrap_or(1e-9 * (1.0 + f_norm))
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub u: GridFunction,
    pub iterations: usize,
    pub residual: f64,
    pub tolerance: f64,
}

fn check_same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a != b {
        return Err(Error::InvalidGrid("grid functions live on different grids".into()));
    }
    Ok(())
}

fn active_nodes(scheme: &Scheme) -> Vec<usize> {
    (0..scheme.grid().len()).filter(|&i| scheme.fits(i)).collect()
}

/// Solves `F_h(u) = f` with `u` held at `boundary` wherever the scheme does
/// not fit. The interior of `boundary` seeds the iteration.
pub fn solve_dirichlet(
    op: &EllipticOperator,
    f: &GridFunction,
    boundary: &GridFunction,
    cfg: &RelaxationConfig,
) -> Result<Solution> {
    check_same_grid(f.grid(), boundary.grid())?;
    let scheme = Scheme::new(op, f.grid(), cfg.stencil)?;
    let active = active_nodes(&scheme);
    let fv = f.values();
    let tol = cfg.tolerance_for(f.max_abs());
    let tau = cfg.tau;

    let mut u = boundary.values().to_vec();
    let mut next = u.clone();
    let mut residual = f64::INFINITY;
    for it in 0..=cfg.max_iterations {
        let updates: Vec<f64> = active
            .par_iter()
            .map(|&i| scheme.eval_unchecked(&u, i) - fv[i])
            .collect();
        residual = updates.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        if residual < tol {
            return Ok(Solution {
                u: GridFunction::new(f.grid().clone(), u)?,
                iterations: it,
                residual,
                tolerance: tol,
            });
        }
        if !residual.is_finite() {
            break;
        }
        for (&i, r) in active.iter().zip(&updates) {
            next[i] = u[i] + tau * r;
        }
        std::mem::swap(&mut u, &mut next);
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iterations,
        residual,
    })
}

/// `F_h(u) − f` where the scheme fits.
pub fn residual(op: &EllipticOperator, u: &GridFunction, f: &GridFunction, stencil: StencilConfig) -> Result<PartialField> {
    check_same_grid(u.grid(), f.grid())?;
    let scheme = Scheme::new(op, u.grid(), stencil)?;
    let mut out = scheme.apply(u.values());
    for i in 0..u.grid().len() {
        if let Some(v) = out.get(i) {
            out.set(i, v - f.get(i));
        }
    }
    Ok(out)
}

/// `u ≥ ψ`, `F_h u ≤ u·g`, with equality off the contact set.
#[derive(Debug, Clone)]
pub struct ObstacleProblem {
    op: EllipticOperator,
    g_weight: GridFunction,
    obstacle: GridFunction,
    boundary: GridFunction,
}

impl ObstacleProblem {
    /// `boundary` supplies the held values (and the interior seed); it must
    /// dominate `obstacle` on every node, and `g_weight` must be nonnegative.
    pub fn new(
        op: EllipticOperator,
        g_weight: GridFunction,
        obstacle: GridFunction,
        boundary: GridFunction,
    ) -> Result<Self> {
        check_same_grid(g_weight.grid(), obstacle.grid())?;
        check_same_grid(g_weight.grid(), boundary.grid())?;
        if let Some(i) = g_weight.values().iter().position(|&g| g < 0.0) {
            return Err(Error::InvalidObstacle(format!("negative g_weight at node {i}")));
        }
        let grid = obstacle.grid();
        if let Some(i) = (0..grid.len())
            .find(|&i| grid.is_boundary(i) && boundary.get(i) < obstacle.get(i))
        {
            return Err(Error::InvalidObstacle(format!(
                "boundary data below the obstacle at node {i}"
            )));
        }
        Ok(Self {
            op,
            g_weight,
            obstacle,
            boundary,
        })
    }

    pub fn operator(&self) -> &EllipticOperator {
        &self.op
    }

    pub fn g_weight(&self) -> &GridFunction {
        &self.g_weight
    }

    pub fn obstacle(&self) -> &GridFunction {
        &self.obstacle
    }

    pub fn boundary(&self) -> &GridFunction {
        &self.boundary
    }

    pub fn grid(&self) -> &Grid {
        self.obstacle.grid()
    }
}

/// Post-solve diagnostics over the nodes where the scheme fits.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplementarityReport {
    pub active_nodes: usize,
    pub contact_nodes: usize,
    /// `max |F_h u − u·g|` off the contact set.
    pub noncontact_residual: f64,
    /// `max (F_h u − u·g)` on the contact set; the fixed point makes it ≤ 0.
    pub contact_excess: f64,
    /// `max (F_h ψ − F_h u)` on the contact set; ≤ 0 for a monotone scheme.
    pub contact_obstacle_gap: f64,
    /// Manufactured bounds with `Λ_lo ≤ F_h u ≤ Λ_hi` on every active node.
    pub bounds: Bounds,
    pub lambda: f64,
}

impl ComplementarityReport {
    pub fn contact_fraction(&self) -> f64 {
        if self.active_nodes == 0 {
            0.0
        } else {
            self.contact_nodes as f64 / self.active_nodes as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct ObstacleSolution {
    pub u: GridFunction,
    pub iterations: usize,
    pub residual: f64,
    pub tolerance: f64,
    pub report: ComplementarityReport,
}

fn complementarity(scheme: &Scheme, prob: &ObstacleProblem, u: &[f64], tol: f64) -> ComplementarityReport {
    let psi = prob.obstacle.values();
    let g = prob.g_weight.values();
    let active = active_nodes(scheme);
    let rows: Vec<(bool, f64, f64, f64)> = active
        .par_iter()
        .map(|&i| {
            let fu = scheme.eval_unchecked(u, i);
            let ug = u[i] * g[i];
            let contact = u[i] == psi[i];
            let fpsi = if contact { scheme.eval_unchecked(psi, i) } else { f64::NAN };
            (contact, fu, ug, fpsi)
        })
        .collect();
    let mut contact_nodes = 0;
    let mut noncontact_residual = 0.0f64;
    let mut contact_excess = f64::NEG_INFINITY;
    let mut gap = f64::NEG_INFINITY;
    let mut min_contact_fpsi = f64::INFINITY;
    let mut max_ug = 0.0f64;
    for &(contact, fu, ug, fpsi) in &rows {
        max_ug = max_ug.max(ug.abs());
        if contact {
            contact_nodes += 1;
            contact_excess = contact_excess.max(fu - ug);
            gap = gap.max(fpsi - fu);
            min_contact_fpsi = min_contact_fpsi.min(fpsi);
        } else {
            noncontact_residual = noncontact_residual.max((fu - ug).abs());
        }
    }
    let lo = min_contact_fpsi.min(-max_ug) - tol;
    let hi = max_ug + tol;
    ComplementarityReport {
        active_nodes: active.len(),
        contact_nodes,
        noncontact_residual,
        contact_excess: if contact_nodes > 0 { contact_excess } else { 0.0 },
        contact_obstacle_gap: if contact_nodes > 0 { gap } else { 0.0 },
        bounds: Bounds { lo, hi },
        lambda: lo.abs().max(hi),
    }
}

/// Projected relaxation `u ← max(ψ, u + τ(F_h u − u·g))`.
///
/// The residual is `sup |u_next − u| / τ`; the default tolerance is
/// `1e-9·(1 + ‖F_h ψ‖_∞)`, the scale of the right-hand side on the contact set.
pub fn solve_obstacle(prob: &ObstacleProblem, cfg: &RelaxationConfig) -> Result<ObstacleSolution> {
    let grid = prob.grid();
    let scheme = Scheme::new(&prob.op, grid, cfg.stencil)?;
    let active = active_nodes(&scheme);
    let psi = prob.obstacle.values();
    let g = prob.g_weight.values();
    let tau = cfg.tau;
    let g_max = g.iter().copied().fold(0.0, f64::max);
    if tau * g_max > 0.5 {
        return Err(Error::InvalidConfig(format!(
            "step {tau:e} too large for g_weight up to {g_max:e}"
        )));
    }
    let f_scale = active
        .par_iter()
        .map(|&i| scheme.eval_unchecked(psi, i).abs())
        .reduce(|| 0.0, f64::max);
    let tol = cfg.tolerance_for(f_scale);

    let mut u: Vec<f64> = prob.boundary.values().to_vec();
    for &i in &active {
        u[i] = u[i].max(psi[i]);
    }
    let mut next = u.clone();
    let mut residual = f64::INFINITY;
    for it in 0..=cfg.max_iterations {
        let proposed: Vec<f64> = active
            .par_iter()
            .map(|&i| (u[i] + tau * (scheme.eval_unchecked(&u, i) - u[i] * g[i])).max(psi[i]))
            .collect();
        residual = active
            .iter()
            .zip(&proposed)
            .fold(0.0f64, |m, (&i, &v)| m.max((v - u[i]).abs()))
            / tau;
        if residual < tol {
            let report = complementarity(&scheme, prob, &u, tol);
            return Ok(ObstacleSolution {
                u: GridFunction::new(grid.clone(), u)?,
                iterations: it,
                residual,
                tolerance: tol,
                report,
            });
        }
        if !residual.is_finite() {
            break;
        }
        for (&i, &v) in active.iter().zip(&proposed) {
            next[i] = v;
        }
        std::mem::swap(&mut u, &mut next);
    }
    let contact_nodes = active.iter().filter(|&&i| u[i] == psi[i]).count();
    Err(Error::ObstacleNotConverged {
        iterations: cfg.max_iterations,
        residual,
        contact_nodes,
    })
}
