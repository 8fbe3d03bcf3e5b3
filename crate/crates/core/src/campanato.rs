//! Oscillation decay of `u` minus its best affine approximation.
//!
//! The basic quantity is `ψ(r) = inf_q osc_{B(r)} (u − q·x)`, computed exactly
//! (over the nodes of the discrete ball) as a linear program. On top of it sit
//! the dyadic decay profile with its exponent fit, the blow-up sequence
//! `u_k(x) = 2^k λ^{−k(1+β)} (u(λ^k x) − q_k·λ^k x)`, the `κ` normalisation
//! and the Campanato-type supremum over a net of centers.
//!
//! The slope update of the blow-up sequence is
//! `q_k = q_{k−1} + 2^{1−k} λ^{(k−1)(1+β)} λ^{1−k} q̃_k`, where `q̃_k` is the
//! best slope of `u_{k−1}` on `B(λ)`. This is the sign that makes
//! `u_k(x) = 2λ^{−(1+β)} (u_{k−1}(λx) − q̃_k·λx)` hold.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{oscillation_over, Ball, Grid, GridFunction};
use crate::lp::{maximize, StandardLp};

/// Balls with more nodes than this are fitted by constraint generation.
const DIRECT_FIT_LIMIT: usize = 2048;
const SEED_SIZE: usize = 1024;
const ADD_PER_ROUND: usize = 512;
const MAX_ROUNDS: usize = 200;

/// Nodes per axis of the grid on `[−1, 1]ⁿ` that carries rescaled functions.
pub const UNIT_NODES: usize = 65;

#[derive(Debug, Clone, PartialEq)]
pub struct AffineFit {
    pub q: Vec<f64>,
    /// `osc (u − q·x)` over the ball, recomputed from the data.
    pub osc_value: f64,
    /// Nodes at which `u − q·x` attains its max or min (within roundoff).
    pub active_count: usize,
}

/// Minimax slope for scattered data: `min_q max_i,j (e_i − e_j)`,
/// `e_i = u_i − q·(x_i − c)`. Points are flat, `n` coordinates each.
pub fn fit_points(points: &[f64], values: &[f64], n: usize, center: &[f64], radius: f64) -> Result<AffineFit> {
    let count = values.len();
    if points.len() != count * n || center.len() != n {
        return Err(Error::DimensionMismatch {
            expected: count * n,
            got: points.len(),
        });
    }
    if count < n + 2 {
        return Err(Error::AffineFitUnderdetermined);
    }
    check_spread(points, n)?;

    let mean = values.iter().sum::<f64>() / count as f64;
    let scale = values.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
    if scale == 0.0 {
        return Ok(AffineFit {
            q: vec![0.0; n],
            osc_value: 0.0,
            active_count: count,
        });
    }
    let r = if radius > 0.0 { radius } else { 1.0 };
    let xs: Vec<f64> = points
        .chunks_exact(n)
        .flat_map(|p| p.iter().zip(center).map(|(a, c)| (a - c) / r).collect::<Vec<_>>())
        .collect();
    let us: Vec<f64> = values.iter().map(|v| (v - mean) / scale).collect();

    let q_hat = if count <= DIRECT_FIT_LIMIT {
        let all: Vec<usize> = (0..count).collect();
        solve_subset(&xs, &us, n, &all)?.0
    } else {
        constraint_generation(&xs, &us, n)?
    };

    let q: Vec<f64> = q_hat.iter().map(|v| v * scale / r).collect();
    let resid: Vec<f64> = points
        .chunks_exact(n)
        .zip(values)
        .map(|(p, v)| v - p.iter().zip(center).zip(&q).map(|((a, c), g)| (a - c) * g).sum::<f64>())
        .collect();
    let hi = resid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = resid.iter().copied().fold(f64::INFINITY, f64::min);
    let eps = 1e-10 * scale;
    let active_count = resid.iter().filter(|&&e| hi - e <= eps || e - lo <= eps).count();
    Ok(AffineFit {
        q,
        osc_value: hi - lo,
        active_count,
    })
}

/// Rejects point sets contained in a hyperplane.
fn check_spread(points: &[f64], n: usize) -> Result<()> {
    let count = points.len() / n;
    let mut mean = vec![0.0; n];
    for p in points.chunks_exact(n) {
        for a in 0..n {
            mean[a] += p[a] / count as f64;
        }
    }
    let mut cov = crate::matrix::SymMatrix::zeros(n);
    for p in points.chunks_exact(n) {
        for a in 0..n {
            for b in a..n {
                let v = cov.get(a, b) + (p[a] - mean[a]) * (p[b] - mean[b]);
                cov.set(a, b, v);
            }
        }
    }
    let ev = cov.eigenvalues();
    let top = ev.last().copied().unwrap_or(0.0);
    if !(top > 0.0) || ev[0] <= 1e-12 * top {
        return Err(Error::AffineFitUnderdetermined);
    }
    Ok(())
}

/// Solves the fit over `subset` through the dual LP
/// `max Σμ_i û_i − Σν_i û_i` with `Σμ = Σν = 1`, `Σμ_i x̂_i = Σν_i x̂_i`.
/// Returns `(q̂, â, b̂)` from the simplex multipliers.
fn solve_subset(xs: &[f64], us: &[f64], n: usize, subset: &[usize]) -> Result<(Vec<f64>, f64, f64)> {
    let m = n + 2;
    let mut cols = Vec::with_capacity(2 * subset.len() * m);
    let mut cost = Vec::with_capacity(2 * subset.len());
    for &i in subset {
        let x = &xs[i * n..(i + 1) * n];
        cols.push(1.0);
        cols.push(0.0);
        cols.extend_from_slice(x);
        cost.push(us[i]);
        cols.push(0.0);
        cols.push(1.0);
        cols.extend(x.iter().map(|v| -v));
        cost.push(-us[i]);
    }
    let mut rhs = vec![0.0; m];
    rhs[0] = 1.0;
    rhs[1] = 1.0;
    let sol = maximize(&StandardLp { m, cols, cost, rhs }).map_err(|e| match e {
        Error::LinearProgram(ref msg) if msg.contains("redundant") || msg.contains("singular") => {
            Error::AffineFitUnderdetermined
        }
        other => other,
    })?;
    let y = sol.duals;
    Ok((y[2..].to_vec(), -y[1], y[0]))
}

fn constraint_generation(xs: &[f64], us: &[f64], n: usize) -> Result<Vec<f64>> {
    let count = us.len();
    let stride = count.div_ceil(SEED_SIZE);
    let mut in_set = vec![false; count];
    let mut subset: Vec<usize> = (0..count).step_by(stride).collect();
    let argmax = (0..count).max_by(|&a, &b| us[a].total_cmp(&us[b])).unwrap();
    let argmin = (0..count).min_by(|&a, &b| us[a].total_cmp(&us[b])).unwrap();
    subset.push(argmax);
    subset.push(argmin);
    subset.sort_unstable();
    subset.dedup();
    for &i in &subset {
        in_set[i] = true;
    }
    for _ in 0..MAX_ROUNDS {
        let (q, a, b) = solve_subset(xs, us, n, &subset)?;
        let excess: Vec<(usize, f64, f64)> = (0..count)
            .into_par_iter()
            .filter(|&i| !in_set[i])
            .filter_map(|i| {
                let e = us[i] - xs[i * n..(i + 1) * n].iter().zip(&q).map(|(x, g)| x * g).sum::<f64>();
                let above = e - b;
                let below = a - e;
                (above > 1e-13 || below > 1e-13).then_some((i, above, below))
            })
            .collect();
        if excess.is_empty() {
            return Ok(q);
        }
        let mut above: Vec<&(usize, f64, f64)> = excess.iter().filter(|t| t.1 > 1e-13).collect();
        let mut below: Vec<&(usize, f64, f64)> = excess.iter().filter(|t| t.2 > 1e-13).collect();
        above.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
        below.sort_by(|x, y| y.2.total_cmp(&x.2).then(x.0.cmp(&y.0)));
        for t in above.iter().take(ADD_PER_ROUND).chain(below.iter().take(ADD_PER_ROUND)) {
            if !in_set[t.0] {
                in_set[t.0] = true;
                subset.push(t.0);
            }
        }
        subset.sort_unstable();
    }
    Err(Error::LinearProgram("constraint generation did not settle".into()))
}

/// `inf_q osc_b (u − q·x)` with its minimizing slope.
pub fn best_affine(u: &GridFunction, b: &Ball) -> Result<AffineFit> {
    let grid = u.grid();
    let nodes = grid.ball_nodes(b)?;
    let n = grid.dim();
    let mut points = vec![0.0; nodes.len() * n];
    for (k, &i) in nodes.iter().enumerate() {
        grid.write_point(i, &mut points[k * n..(k + 1) * n]);
    }
    let values: Vec<f64> = nodes.iter().map(|&i| u.get(i)).collect();
    fit_points(&points, &values, n, &b.center, b.radius)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayConfig {
    lambda0: f64,
    lambda: f64,
    beta: f64,
    eps: f64,
    levels: usize,
}

impl DecayConfig {
    /// Requires `0 < λ < λ₀ < 1`, `0 < β < 1`, `ε > 0`, at least 3 levels, and
    /// `2λ^{1−β} ≤ 1` so that one level of decay pays for the factor 2.
    pub fn new(lambda0: f64, lambda: f64, beta: f64, eps: f64, levels: usize) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(0.0 < lambda && lambda < lambda0 && lambda0 < 1.0) {
            return bad(format!("need 0 < λ < λ₀ < 1, got λ = {lambda}, λ₀ = {lambda0}"));
        }
        if !(0.0 < beta && beta < 1.0) {
            return bad(format!("β = {beta} outside (0, 1)"));
        }
        if !(eps > 0.0) {
            return bad(format!("ε = {eps} must be positive"));
        }
        if 2.0 * lambda.powf(1.0 - beta) > 1.0 + 1e-12 {
            return bad(format!("2λ^(1−β) = {} exceeds 1", 2.0 * lambda.powf(1.0 - beta)));
        }
        if levels < 3 {
            return bad(format!("{levels} levels requested, at least 3 needed"));
        }
        Ok(Self {
            lambda0,
            lambda,
            beta,
            eps,
            levels,
        })
    }

    /// `λ₀ = (1 + λ)/2`, `ε = 1e-3`.
    pub fn with(lambda: f64, beta: f64, levels: usize) -> Result<Self> {
        Self::new(0.5 * (1.0 + lambda), lambda, beta, 1e-3, levels)
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }
    pub fn levels(&self) -> usize {
        self.levels
    }

    /// `σ = log 2 / (−log λ)`.
    pub fn sigma(&self) -> f64 {
        std::f64::consts::LN_2 / -self.lambda.ln()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayLevel {
    pub k: usize,
    pub r: f64,
    pub psi: f64,
    pub phi: f64,
    pub usable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayProfile {
    pub lambda: f64,
    pub beta: f64,
    pub levels: Vec<DecayLevel>,
    /// Least-squares slope of `log ψ` against `log r` over usable levels.
    pub slope: f64,
    pub beta_hat: f64,
    pub sigma: f64,
    /// Largest deviation of a leave-one-level-out slope from `slope`.
    pub spread: f64,
    /// Largest absolute residual of the log-log fit.
    pub fit_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainLevel {
    pub k: usize,
    pub phi: f64,
    pub bound: f64,
    pub holds: bool,
}

impl DecayProfile {
    /// `Φ(r_k) ≤ λ^{−1−β} 2^{−k} Φ(r_0)` level by level.
    pub fn chain(&self) -> Vec<ChainLevel> {
        let phi0 = self.levels.first().map_or(0.0, |l| l.phi);
        let c = self.lambda.powf(-1.0 - self.beta);
        self.levels
            .iter()
            .map(|l| {
                let bound = c * 0.5f64.powi(l.k as i32) * phi0;
                ChainLevel {
                    k: l.k,
                    phi: l.phi,
                    bound,
                    holds: l.phi <= bound,
                }
            })
            .collect()
    }

    /// Columns `k,r,psi,phi,usable`, then footer rows
    /// `slope`, `beta_hat`, `sigma`, `bootstrap_spread`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,r,psi,phi,usable\n");
        for l in &self.levels {
            let _ = writeln!(s, "{},{:e},{:e},{:e},{}", l.k, l.r, l.psi, l.phi, u8::from(l.usable));
        }
        let _ = writeln!(s, "slope,{:e}", self.slope);
        let _ = writeln!(s, "beta_hat,{:e}", self.beta_hat);
        let _ = writeln!(s, "sigma,{:e}", self.sigma);
        let _ = writeln!(s, "bootstrap_spread,{:e}", self.spread);
        s
    }
}

/// Ordinary least squares `y ≈ a + b x`; returns `(a, b)`.
fn ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}

/// `ψ` at `r_k = λ^k R`, `k < levels`, around `center`.
pub fn decay_profile(u: &GridFunction, center: &[f64], cfg: &DecayConfig, radius: f64) -> Result<DecayProfile> {
    let grid = u.grid();
    let lambda = cfg.lambda;
    let smallest = radius * lambda.powi(cfg.levels as i32 - 1);
    if smallest < 4.0 * grid.h() * (1.0 - 1e-12) {
        return Err(Error::InvalidConfig(format!(
            "smallest radius {smallest:e} below the resolution floor 4h = {:e}",
            4.0 * grid.h()
        )));
    }
    let threshold = 100.0 * f64::EPSILON * u.max_abs();
    let levels = (0..cfg.levels)
        .into_par_iter()
        .map(|k| {
            let r = radius * lambda.powi(k as i32);
            let fit = best_affine(u, &Ball::new(center.to_vec(), r)?)?;
            let psi = fit.osc_value;
            Ok(DecayLevel {
                k,
                r,
                psi,
                phi: r.powf(-1.0 - cfg.beta) * psi,
                usable: psi >= threshold && psi > 0.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let usable: Vec<&DecayLevel> = levels.iter().filter(|l| l.usable).collect();
    if usable.len() < 3 {
        return Err(Error::TooFewLevels);
    }
    let lx: Vec<f64> = usable.iter().map(|l| l.r.ln()).collect();
    let ly: Vec<f64> = usable.iter().map(|l| l.psi.ln()).collect();
    let (a, slope) = ols(&lx, &ly);
    let fit_residual = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - a - slope * x).abs())
        .fold(0.0, f64::max);
    let mut spread = 0.0f64;
    for skip in 0..lx.len() {
        let (x, y): (Vec<f64>, Vec<f64>) = lx
            .iter()
            .zip(&ly)
            .enumerate()
            .filter(|(i, _)| *i != skip)
            .map(|(_, (a, b))| (*a, *b))
            .unzip();
        spread = spread.max((ols(&x, &y).1 - slope).abs());
    }
    Ok(DecayProfile {
        lambda,
        beta: cfg.beta,
        levels,
        slope,
        beta_hat: slope - 1.0,
        sigma: cfg.sigma(),
        spread,
        fit_residual,
    })
}

pub fn unit_grid(n: usize) -> Result<Grid> {
    Grid::cube(n, -1.0, 1.0, UNIT_NODES)
}

/// Samples `x ↦ scale·(u(c + s·x) − q·s·x)` on the unit grid; the input domain
/// must contain `c + s·[−1, 1]ⁿ`.
fn resample(u: &GridFunction, center: &[f64], s: f64, q: &[f64], scale: f64) -> Result<GridFunction> {
    let n = u.grid().dim();
    let unit = unit_grid(n)?;
    let mut values = vec![0.0; unit.len()];
    values
        .par_iter_mut()
        .enumerate()
        .try_for_each(|(i, v)| -> Result<()> {
            let x = unit.point(i);
            let y: Vec<f64> = x.iter().zip(center).map(|(a, c)| c + s * a).collect();
            let lin: f64 = q.iter().zip(&x).map(|(g, a)| g * s * a).sum();
            *v = scale * (u.interpolate(&y).map_err(|_| Error::BallExitsDomain)? - lin);
            Ok(())
        })?;
    GridFunction::new(unit, values)
}

fn unit_oscillation(f: &GridFunction) -> Result<f64> {
    let nodes = f.grid().ball_nodes(&Ball::centered(f.grid().dim(), 1.0)?)?;
    Ok(oscillation_over(f.values(), &nodes))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RescaleState {
    pub k: usize,
    pub q: Vec<f64>,
    /// `u_k` on the unit grid.
    pub u: GridFunction,
    pub osc_unit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RescaleSequence {
    pub states: Vec<RescaleState>,
    /// Set when a requested level needed `λ^k < 4h` and was not produced.
    pub truncated: bool,
}

/// Blow-up sequence `u_0, …, u_K` around the origin. Level `k` is produced
/// only while `λ^k ≥ 4h` on the input grid.
pub fn rescale_sequence(u: &GridFunction, cfg: &DecayConfig, levels: usize) -> Result<RescaleSequence> {
    let n = u.grid().dim();
    let origin = vec![0.0; n];
    let osc0 = oscillation_over(u.values(), &u.grid().ball_nodes(&Ball::centered(n, 1.0)?)?);
    if osc0 >= 1.0 {
        return Err(Error::OscillationTooLarge(osc0));
    }
    let (lambda, beta) = (cfg.lambda, cfg.beta);
    let floor = 4.0 * u.grid().h();
    let u0 = resample(u, &origin, 1.0, &origin, 1.0)?;
    let mut states = vec![RescaleState {
        k: 0,
        q: origin.clone(),
        osc_unit: unit_oscillation(&u0)?,
        u: u0,
    }];
    let mut truncated = false;
    for k in 1..=levels {
        let s = lambda.powi(k as i32);
        if s < floor * (1.0 - 1e-12) {
            truncated = true;
            break;
        }
        let prev = states.last().unwrap();
        let q_tilde = best_affine(&prev.u, &Ball::new(origin.clone(), lambda)?)?.q;
        let coef = 2f64.powi(1 - k as i32) * lambda.powf((k - 1) as f64 * beta);
        let q: Vec<f64> = prev.q.iter().zip(&q_tilde).map(|(a, b)| a + coef * b).collect();
        let scale = 2f64.powi(k as i32) * lambda.powf(-(k as f64) * (1.0 + beta));
        let uk = resample(u, &origin, s, &q, scale)?;
        states.push(RescaleState {
            k,
            q,
            osc_unit: unit_oscillation(&uk)?,
            u: uk,
        });
    }
    Ok(RescaleSequence { states, truncated })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    /// `κ⁻¹ u(c + R·x)` on the unit grid.
    pub u: GridFunction,
    pub kappa: f64,
    pub osc_unit: f64,
    /// `κ⁻¹R²Λ`, the bound inherited by `F(D²u_{κ,R})`.
    pub inherited_bound: f64,
    pub osc_ok: bool,
    pub eps_ok: bool,
}

/// `κ = Λ/ε + R² + osc_{B(c,R)} u + 1`.
pub fn kappa(lambda_bound: f64, eps: f64, radius: f64, osc: f64) -> f64 {
    lambda_bound / eps + radius * radius + osc + 1.0
}

/// Rescales `B(c, R)` to the unit ball and divides by `κ`. Then
/// `osc_{B(0,1)} < 1`, and `−Λ ≤ F(D²u) ≤ Λ` becomes
/// `|F(D²u_{κ,R})| ≤ κ⁻¹R²Λ`, which is `≤ ε` whenever `R ≤ 1`.
pub fn normalize(u: &GridFunction, center: &[f64], radius: f64, lambda_bound: f64, eps: f64) -> Result<Normalized> {
    if !(eps > 0.0 && radius > 0.0 && lambda_bound >= 0.0) {
        return Err(Error::InvalidConfig("normalize needs ε > 0, R > 0, Λ ≥ 0".into()));
    }
    let osc = crate::grid::oscillation(u, &Ball::new(center.to_vec(), radius)?)?;
    let k = kappa(lambda_bound, eps, radius, osc);
    let zero = vec![0.0; center.len()];
    let scaled = resample(u, center, radius, &zero, 1.0 / k)?;
    let osc_unit = unit_oscillation(&scaled)?;
    let inherited_bound = radius * radius * lambda_bound / k;
    Ok(Normalized {
        u: scaled,
        kappa: k,
        osc_unit,
        inherited_bound,
        osc_ok: osc_unit < 1.0,
        eps_ok: inherited_bound <= eps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusSchedule {
    pub r_max: f64,
    pub levels: usize,
}

impl RadiusSchedule {
    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.levels).map(move |j| self.r_max * 0.5f64.powi(j as i32))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampanatoSup {
    pub value: f64,
    pub center: Vec<f64>,
    pub radius: f64,
    pub evaluations: usize,
}

/// `max r^{−1−β} ψ(B(x, r))` over an `m`-per-axis lattice of centers in the
/// box `[lower, upper]` and the dyadic radii of `schedule` that fit inside the
/// domain and are at least `2h`.
pub fn campanato_sup(
    u: &GridFunction,
    lower: &[f64],
    upper: &[f64],
    centers_per_axis: usize,
    beta: f64,
    schedule: RadiusSchedule,
) -> Result<CampanatoSup> {
    let grid = u.grid();
    let n = grid.dim();
    if lower.len() != n || upper.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: lower.len(),
        });
    }
    let interior = |x: &[f64]| grid.domain().dist_to_boundary(x) > 0.0;
    if !interior(lower) || !interior(upper) || lower.iter().zip(upper).any(|(a, b)| a > b) {
        return Err(Error::InvalidConfig("sub-box must lie strictly inside the domain".into()));
    }
    if centers_per_axis == 0 {
        return Err(Error::EmptyNet);
    }
    let m = centers_per_axis;
    let total = m.pow(n as u32);
    let centers: Vec<Vec<f64>> = (0..total)
        .map(|mut idx| {
            (0..n)
                .map(|a| {
                    let k = idx % m;
                    idx /= m;
                    if m == 1 {
                        0.5 * (lower[a] + upper[a])
                    } else {
                        lower[a] + (upper[a] - lower[a]) * k as f64 / (m - 1) as f64
                    }
                })
                .collect()
        })
        .collect();
    let h = grid.h();
    let jobs: Vec<(usize, f64)> = centers
        .iter()
        .enumerate()
        .flat_map(|(c, x)| {
            let d = grid.domain().dist_to_boundary(x);
            schedule
                .radii()
                .filter(move |&r| r <= d && r >= 2.0 * h)
                .map(move |r| (c, r))
                .collect::<Vec<_>>()
        })
        .collect();
    if jobs.is_empty() {
        return Err(Error::EmptyNet);
    }
    let values = jobs
        .par_iter()
        .map(|&(c, r)| {
            let fit = best_affine(u, &Ball::new(centers[c].clone(), r)?)?;
            Ok(r.powf(-1.0 - beta) * fit.osc_value)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (best, value) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    Ok(CampanatoSup {
        value,
        center: centers[jobs[best].0].clone(),
        radius: jobs[best].1,
        evaluations: jobs.len(),
    })
}
