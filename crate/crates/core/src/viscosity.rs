//! Certification of `Λ_lo ≤ F(D²u) ≤ Λ_hi` on grid data.
//!
//! Two checks are offered. [`check_pointwise`] evaluates the scheme `F_h(u)`
//! node by node and is the natural test for solver output. [`check_touching`]
//! works with quadratic test functions
//! `φ(x) = u(x₀) + p·(x−x₀) + ½(x−x₀)ᵀM(x−x₀)` instead and needs no
//! derivatives of `u`, so it applies to kinked data as well:
//!
//! * if `φ − u` attains its maximum over the neighbourhood at `x₀`
//!   (`φ` touches from below) the test requires `F(M) ≤ Λ_hi`;
//! * if `φ − u` attains its minimum there (`φ` touches from above) it requires
//!   `F(M) ≥ Λ_lo`.
//!
//! The module also carries the quartic localisation used to pass viscosity
//! inequalities to uniform limits, a Hölder seminorm estimator and the limit
//! stability experiment built on both checks.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::discretization::{gradient_at, hessian_at, Scheme, StencilConfig};
use crate::error::{Error, Result};
use crate::grid::{Ball, Grid, GridFunction};
use crate::matrix::SymMatrix;
use crate::operators::EllipticOperator;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
}

impl Bounds {
    /// Infinite bounds are allowed and switch the corresponding side off.
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::InvalidConfig(format!("bounds ({lo}, {hi}) are not ordered")));
        }
        Ok(Self { lo, hi })
    }

    /// `(−Λ, Λ)`.
    pub fn symmetric(lambda: f64) -> Self {
        let l = lambda.abs();
        Self { lo: -l, hi: l }
    }

    pub fn scaled(&self, sigma: f64) -> Self {
        debug_assert!(sigma > 0.0);
        Self {
            lo: self.lo * sigma,
            hi: self.hi * sigma,
        }
    }

    pub fn widened(&self, delta: f64) -> Self {
        Self {
            lo: self.lo - delta,
            hi: self.hi + delta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckScheme {
    Pointwise,
    Touching,
}

impl CheckScheme {
    pub fn name(&self) -> &'static str {
        match self {
            CheckScheme::Pointwise => "pointwise",
            CheckScheme::Touching => "touching",
        }
    }
}

/// Margins are `Λ_hi − F` and `F − Λ_lo`; for touching tests the minimum over
/// the triggered tests on that side (`+∞` if none triggered).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeVerdict {
    pub node: usize,
    pub upper_margin: f64,
    pub lower_margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViscosityReport {
    pub scheme: CheckScheme,
    pub bounds: Bounds,
    pub tolerance: f64,
    pub nodes: Vec<NodeVerdict>,
    /// `max (F − Λ_hi)`, `−∞` if nothing was tested on that side.
    pub worst_upper: f64,
    /// `max (Λ_lo − F)`.
    pub worst_lower: f64,
    /// Touching tests that fired (pointwise: evaluated nodes).
    pub triggered: usize,
    pub pass: bool,
}

impl ViscosityReport {
    fn assemble(scheme: CheckScheme, bounds: Bounds, tolerance: f64, nodes: Vec<NodeVerdict>, triggered: usize) -> Self {
        let worst_upper = nodes.iter().map(|v| -v.upper_margin).fold(f64::NEG_INFINITY, f64::max);
        let worst_lower = nodes.iter().map(|v| -v.lower_margin).fold(f64::NEG_INFINITY, f64::max);
        let pass = worst_upper <= tolerance && worst_lower <= tolerance;
        Self {
            scheme,
            bounds,
            tolerance,
            nodes,
            worst_upper,
            worst_lower,
            triggered,
            pass,
        }
    }

    pub fn failing_nodes(&self) -> impl Iterator<Item = &NodeVerdict> {
        self.nodes.iter().filter(|v| !v.pass)
    }

    /// `node,x[,y],scheme,upper_margin,lower_margin,verdict`.
    pub fn to_csv(&self, grid: &Grid) -> String {
        let axes = ["x", "y", "z"];
        let mut s = String::from("node");
        for a in 0..grid.dim() {
            s.push(',');
            s.push_str(axes.get(a).copied().unwrap_or("w"));
        }
        s.push_str(",scheme,upper_margin,lower_margin,verdict\n");
        let mut p = vec![0.0; grid.dim()];
        for v in &self.nodes {
            grid.write_point(v.node, &mut p);
            let _ = write!(s, "{}", v.node);
            for c in &p {
                let _ = write!(s, ",{c:.12e}");
            }
            let _ = writeln!(
                s,
                ",{},{:.12e},{:.12e},{}",
                self.scheme.name(),
                v.upper_margin,
                v.lower_margin,
                if v.pass { "pass" } else { "fail" }
            );
        }
        s
    }
}

/// `10·λ₂·(1 + ‖u‖_∞)·h`.
pub fn default_tolerance(u: &GridFunction, op: &EllipticOperator) -> f64 {
    10.0 * op.params().lambda_max() * (1.0 + u.max_abs()) * u.grid().h()
}

fn verdict(node: usize, upper_margin: f64, lower_margin: f64, tol: f64) -> NodeVerdict {
    NodeVerdict {
        node,
        upper_margin,
        lower_margin,
        pass: upper_margin >= -tol && lower_margin >= -tol,
    }
}

/// Checks `F_h(u) ∈ [Λ_lo − tol, Λ_hi + tol]` wherever the scheme fits.
/// `tol = None` uses [`default_tolerance`].
pub fn check_pointwise(
    u: &GridFunction,
    op: &EllipticOperator,
    bounds: Bounds,
    stencil: StencilConfig,
    tol: Option<f64>,
) -> Result<ViscosityReport> {
    let tol = tol.unwrap_or_else(|| default_tolerance(u, op));
    let scheme = Scheme::new(op, u.grid(), stencil)?;
    let values = u.values();
    let nodes: Vec<NodeVerdict> = (0..u.grid().len())
        .into_par_iter()
        .filter_map(|i| {
            scheme
                .eval_at(values, i)
                .map(|v| verdict(i, bounds.hi - v, v - bounds.lo, tol))
        })
        .collect();
    let n = nodes.len();
    Ok(ViscosityReport::assemble(CheckScheme::Pointwise, bounds, tol, nodes, n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `φ − u` has a local maximum at `x₀`.
    Below,
    /// `φ − u` has a local minimum at `x₀`.
    Above,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TouchingTest {
    pub node: usize,
    pub p: Vec<f64>,
    pub m: SymMatrix,
    pub rho: f64,
    pub side: Side,
}

impl TouchingTest {
    /// `φ(y) − u(y)` relative to `x₀`, for `y` at offset `d`.
    fn phi_minus_u(&self, u0: f64, d: &[f64], uy: f64) -> f64 {
        let lin: f64 = self.p.iter().zip(d).map(|(a, b)| a * b).sum();
        u0 + lin + 0.5 * self.m.quad_form(d) - uy
    }
}

/// Deterministic dictionary generated from the data at each node:
/// gradients `∇_h u ± s·e_i` and Hessians `D²_h u ± s·I`, `D²_h u ± s·e_i⊗e_i`,
/// both sides, for `s`
/// on the ladder `h·2^k ≤ max(1, 2‖D²_h u(x₀)‖_max)` (plus `s = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DictionaryConfig {
    /// Neighbourhood radius in nodes (≥ 2).
    pub rho_nodes: usize,
    pub perturb_gradient: bool,
}

impl Default for DictionaryConfig {
    fn default() -> Self {
        Self {
            rho_nodes: 2,
            perturb_gradient: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dictionary {
    Generated(DictionaryConfig),
    Explicit(Vec<TouchingTest>),
}

impl Default for Dictionary {
    fn default() -> Self {
        Dictionary::Generated(DictionaryConfig::default())
    }
}

fn ladder(h: f64, top: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    let mut s = h;
    while s <= top * (1.0 + 1e-12) {
        out.push(s);
        s *= 2.0;
    }
    out
}

fn generated_tests(u: &GridFunction, node: usize, cfg: &DictionaryConfig) -> Vec<TouchingTest> {
    let grid = u.grid();
    let (Some(p0), Some(h0)) = (gradient_at(grid, u.values(), node), hessian_at(grid, u.values(), node)) else {
        return Vec::new();
    };
    let n = grid.dim();
    let h = grid.h();
    let rho = cfg.rho_nodes as f64 * h;
    let steps = ladder(h, (2.0 * h0.max_abs()).max(1.0));
    let mut grads = vec![p0.clone()];
    if cfg.perturb_gradient {
        for &s in steps.iter().skip(1) {
            for i in 0..n {
                for sign in [-1.0, 1.0] {
                    let mut p = p0.clone();
                    p[i] += sign * s;
                    grads.push(p);
                }
            }
        }
    }
    let mut hessians = vec![h0.clone()];
    for &s in steps.iter().skip(1) {
        for sign in [-1.0, 1.0] {
            hessians.push(h0.shifted(sign * s));
            // rank-one shifts reach data that is flat along some axis
            if n > 1 {
                for i in 0..n {
                    let mut m = h0.clone();
                    m.set(i, i, m.get(i, i) + sign * s);
                    hessians.push(m);
                }
            }
        }
    }
    let mut out = Vec::with_capacity(2 * grads.len() * hessians.len());
    for p in &grads {
        for m in &hessians {
            for side in [Side::Below, Side::Above] {
                out.push(TouchingTest {
                    node,
                    p: p.clone(),
                    m: m.clone(),
                    rho,
                    side,
                });
            }
        }
    }
    out
}

/// Offsets (flat index, displacement) of the grid nodes within `rho` of a node
/// at depth ≥ `ceil(rho/h)`.
fn neighbourhood(grid: &Grid, rho: f64) -> Vec<(isize, Vec<f64>)> {
    let n = grid.dim();
    let h = grid.h();
    let r = (rho / h + 1e-9).floor() as isize;
    let mut out = Vec::new();
    let mut k = vec![-r; n];
    'outer: loop {
        let d: Vec<f64> = k.iter().map(|&v| v as f64 * h).collect();
        let d2: f64 = d.iter().map(|v| v * v).sum();
        if d2 <= rho * rho * (1.0 + 1e-12) && d2 > 0.0 {
            let off: isize = k
                .iter()
                .zip(grid.strides())
                .map(|(&a, &s)| a * s as isize)
                .sum();
            out.push((off, d));
        }
        for a in 0..n {
            if k[a] < r {
                k[a] += 1;
                continue 'outer;
            }
            k[a] = -r;
        }
        break;
    }
    out
}

/// Slack for "attains its maximum": `h³`, floored at roundoff.
pub fn touching_slack(u: &GridFunction) -> f64 {
    let h = u.grid().h();
    (h * h * h).max(1e-12 * (1.0 + u.max_abs()))
}

/// Evaluates touching tests; a test fires when `φ − u` is extremal at `x₀`
/// over the nodes within `ρ`, up to [`touching_slack`].
pub fn check_touching(
    u: &GridFunction,
    op: &EllipticOperator,
    bounds: Bounds,
    dictionary: &Dictionary,
    tol: f64,
) -> Result<ViscosityReport> {
    let grid = u.grid();
    let slack = touching_slack(u);
    let values = u.values();
    let h = grid.h();

    let evaluate = |tests: &[TouchingTest]| -> Result<Option<(NodeVerdict, usize)>> {
        let Some(first) = tests.first() else {
            return Ok(None);
        };
        let node = first.node;
        let mut upper = f64::INFINITY;
        let mut lower = f64::INFINITY;
        let mut fired = 0;
        let mut cached_rho = f64::NAN;
        let mut nbhd = Vec::new();
        for t in tests {
            if t.rho != cached_rho {
                if t.rho < 2.0 * h * (1.0 - 1e-12) {
                    return Err(Error::InvalidConfig(format!("touching radius {} below 2h", t.rho)));
                }
                let reach = (t.rho / h + 1e-9).floor() as usize;
                if grid.depth(node) < reach {
                    return Err(Error::StencilExitsDomain);
                }
                nbhd = neighbourhood(grid, t.rho);
                cached_rho = t.rho;
            }
            let u0 = values[node];
            let fires = nbhd.iter().all(|(off, d)| {
                let y = (node as isize + off) as usize;
                let e = t.phi_minus_u(u0, d, values[y]);
                match t.side {
                    Side::Below => e <= slack,
                    Side::Above => e >= -slack,
                }
            });
            if !fires {
                continue;
            }
            fired += 1;
            let fm = op.eval(&t.m)?;
            match t.side {
                Side::Below => upper = upper.min(bounds.hi - fm),
                Side::Above => lower = lower.min(fm - bounds.lo),
            }
        }
        Ok(Some((verdict(node, upper, lower, tol), fired)))
    };

    let results: Vec<Option<(NodeVerdict, usize)>> = match dictionary {
        Dictionary::Generated(cfg) => {
            if cfg.rho_nodes < 2 {
                return Err(Error::InvalidConfig("touching radius must be at least 2 nodes".into()));
            }
            let nodes: Vec<usize> = (0..grid.len()).filter(|&i| grid.depth(i) >= cfg.rho_nodes).collect();
            if nodes.is_empty() {
                return Err(Error::EmptyDictionary);
            }
            nodes
                .par_iter()
                .map(|&i| evaluate(&generated_tests(u, i, cfg)))
                .collect::<Result<_>>()?
        }
        Dictionary::Explicit(tests) => {
            if tests.is_empty() {
                return Err(Error::EmptyDictionary);
            }
            let mut sorted: Vec<&TouchingTest> = tests.iter().collect();
            sorted.sort_by_key(|t| t.node);
            let mut groups: Vec<Vec<TouchingTest>> = Vec::new();
            for t in sorted {
                if t.node >= grid.len() || t.p.len() != grid.dim() || t.m.dim() != grid.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: grid.dim(),
                        got: t.p.len(),
                    });
                }
                match groups.last_mut() {
                    Some(g) if g[0].node == t.node => g.push(t.clone()),
                    _ => groups.push(vec![t.clone()]),
                }
            }
            groups.par_iter().map(|g| evaluate(g)).collect::<Result<_>>()?
        }
    };
    let mut nodes = Vec::new();
    let mut triggered = 0;
    for (v, f) in results.into_iter().flatten() {
        nodes.push(v);
        triggered += f;
    }
    Ok(ViscosityReport::assemble(CheckScheme::Touching, bounds, tol, nodes, triggered))
}

/// `φ(x) − |x − x₀|⁴`.
pub fn quartic_perturb(phi: &GridFunction, x0: &[f64]) -> Result<GridFunction> {
    let grid = phi.grid();
    if x0.len() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: x0.len(),
        });
    }
    let mut p = vec![0.0; grid.dim()];
    let values = (0..grid.len())
        .map(|i| {
            grid.write_point(i, &mut p);
            let r2: f64 = p.iter().zip(x0).map(|(a, b)| (a - b) * (a - b)).sum();
            phi.get(i) - r2 * r2
        })
        .collect();
    GridFunction::new(grid.clone(), values)
}

/// One node `y` of the region with `(φ̃ − u_k)(y) ≥ (φ̃ − u_k)(x₀)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearMaximizer {
    pub node: usize,
    pub dist4: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationReport {
    pub perturbation: f64,
    pub witnesses: Vec<NearMaximizer>,
    /// Whether every witness satisfies `|y − x₀|⁴ ≤ 2‖u − u_k‖_∞`.
    pub holds: bool,
}

/// Given `φ − u` maximal at node `x₀` over `region`, collects every node where
/// `φ̃ − u_k` (with `φ̃` the quartic perturbation) is at least its value at
/// `x₀`, and checks the localisation `|y − x₀|⁴ ≤ 2‖u − u_k‖_∞`, with the
/// sup norm taken over `region`.
pub fn localization(
    phi: &GridFunction,
    u: &GridFunction,
    u_k: &GridFunction,
    x0: usize,
    region: &Ball,
) -> Result<LocalizationReport> {
    let grid = u.grid();
    let nodes = grid.ball_nodes(region)?;
    if !nodes.contains(&x0) {
        return Err(Error::InvalidConfig("x₀ is not in the region".into()));
    }
    let base = phi.get(x0) - u.get(x0);
    let roundoff = 1e-12 * (1.0 + phi.max_abs() + u.max_abs());
    if nodes.iter().any(|&i| phi.get(i) - u.get(i) > base + roundoff) {
        return Err(Error::InvalidConfig("φ − u is not maximal at x₀".into()));
    }
    let center = grid.point(x0);
    let tilde = quartic_perturb(phi, &center)?;
    let delta = nodes
        .iter()
        .map(|&i| (u.get(i) - u_k.get(i)).abs())
        .fold(0.0, f64::max);
    let at_x0 = tilde.get(x0) - u_k.get(x0);
    let witnesses: Vec<NearMaximizer> = nodes
        .iter()
        .filter(|&&i| tilde.get(i) - u_k.get(i) >= at_x0)
        .map(|&i| {
            let p = grid.point(i);
            let r2: f64 = p.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum();
            NearMaximizer { node: i, dist4: r2 * r2 }
        })
        .collect();
    let holds = witnesses.iter().all(|w| w.dist4 <= 2.0 * delta + roundoff);
    Ok(LocalizationReport {
        perturbation: delta,
        witnesses,
        holds,
    })
}

/// `max |u(x) − u(y)| / |x − y|^γ` over all node pairs of the region closer
/// than `4h`, plus `pair_budget` pairs drawn from a low-discrepancy sequence
/// (all pairs when the region is small enough).
pub fn holder_seminorm(u: &GridFunction, gamma: f64, region: &Ball, pair_budget: usize) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidConfig(format!("Hölder exponent {gamma} outside (0, 1]")));
    }
    let grid = u.grid();
    let nodes = grid.ball_nodes(region)?;
    if nodes.len() < 2 {
        return Err(Error::RegionTooSmall);
    }
    let pts: Vec<Vec<f64>> = nodes.iter().map(|&i| grid.point(i)).collect();
    let vals: Vec<f64> = nodes.iter().map(|&i| u.get(i)).collect();
    let quotient = |a: usize, b: usize| -> f64 {
        let d2: f64 = pts[a].iter().zip(&pts[b]).map(|(x, y)| (x - y) * (x - y)).sum();
        if d2 == 0.0 {
            0.0
        } else {
            (vals[a] - vals[b]).abs() / d2.sqrt().powf(gamma)
        }
    };
    let m = nodes.len();
    if m * (m - 1) / 2 <= pair_budget {
        return Ok((0..m)
            .into_par_iter()
            .map(|a| (a + 1..m).map(|b| quotient(a, b)).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max));
    }

    // short pairs: scan the ±4 node box around each node
    let h = grid.h();
    let near = neighbourhood(grid, 4.0 * h);
    let position: std::collections::HashMap<usize, usize> =
        nodes.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let short = (0..m)
        .into_par_iter()
        .map(|a| {
            let mut best = 0.0f64;
            for (off, _) in &near {
                let j = nodes[a] as isize + off;
                if j < 0 {
                    continue;
                }
                if let Some(&b) = position.get(&(j as usize)) {
                    // offsets can wrap across rows; reject via distance
                    let d2: f64 = pts[a].iter().zip(&pts[b]).map(|(x, y)| (x - y) * (x - y)).sum();
                    if d2 <= 16.0 * h * h * (1.0 + 1e-9) {
                        best = best.max(quotient(a, b));
                    }
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max);

    // additive recurrence with the plastic-number constants
    let g = 1.324_717_957_244_746_f64;
    let (a1, a2) = (1.0 / g, 1.0 / (g * g));
    let sampled = (0..pair_budget)
        .into_par_iter()
        .map(|k| {
            let t = (k + 1) as f64;
            let i = (((0.5 + a1 * t).fract()) * m as f64) as usize;
            let j = (((0.5 + a2 * t).fract()) * m as f64) as usize;
            quotient(i.min(m - 1), j.min(m - 1))
        })
        .reduce(|| 0.0, f64::max);
    Ok(short.max(sampled))
}

/// A sequence `(u_k, Λ_k)` with `Λ_k ≤ F(D²u_k) ≤ Λ_k` converging to a limit.
pub trait LimitFamily: Sync {
    fn member(&self, k: usize) -> Result<(GridFunction, f64)>;
    fn limit(&self) -> Result<(GridFunction, f64)>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitLevel {
    pub k: usize,
    pub lambda_k: f64,
    pub distance: f64,
    pub member_pass: bool,
    pub delta_k: f64,
    pub limit_pointwise_pass: bool,
    pub limit_touching_pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    pub lambda_limit: f64,
    pub levels: Vec<LimitLevel>,
    /// `|Λ_k − Λ_∞|` nonincreasing in `k`.
    pub lambda_monotone: bool,
    /// `‖u_k − u_∞‖_∞` decreased from the first to the last level.
    pub converging: bool,
    pub pass: bool,
}

/// Checks every member against `(−Λ_k, Λ_k)` and the limit against
/// `(−Λ_∞ − δ_k, Λ_∞ + δ_k)` with `δ_k = sup_{j≥k} |Λ_j − Λ_∞| + c₀h`,
/// pointwise and by touching.
pub fn limit_stability_experiment(
    family: &dyn LimitFamily,
    k_max: usize,
    op: &EllipticOperator,
    stencil: StencilConfig,
) -> Result<LimitReport> {
    if k_max == 0 {
        return Err(Error::InvalidConfig("k_max must be positive".into()));
    }
    let (u_inf, lambda_inf) = family.limit()?;
    let members = (1..=k_max)
        .map(|k| family.member(k))
        .collect::<Result<Vec<_>>>()?;
    let tol_inf = default_tolerance(&u_inf, op);
    let mut tail = vec![0.0f64; k_max + 1];
    for k in (0..k_max).rev() {
        tail[k] = tail[k + 1].max((members[k].1 - lambda_inf).abs());
    }
    let mut levels = Vec::with_capacity(k_max);
    for (idx, (u_k, lambda_k)) in members.iter().enumerate() {
        let member = check_pointwise(u_k, op, Bounds::symmetric(*lambda_k), stencil, None)?;
        let delta_k = tail[idx] + tol_inf;
        let bounds = Bounds::symmetric(lambda_inf).widened(delta_k);
        let pw = check_pointwise(&u_inf, op, bounds, stencil, Some(tol_inf))?;
        let touch = check_touching(&u_inf, op, bounds, &Dictionary::default(), tol_inf)?;
        levels.push(LimitLevel {
            k: idx + 1,
            lambda_k: *lambda_k,
            distance: u_k.sup_distance(&u_inf),
            member_pass: member.pass,
            delta_k,
            limit_pointwise_pass: pw.pass,
            limit_touching_pass: touch.pass,
        });
    }
    let lambda_monotone = levels
        .windows(2)
        .all(|w| (w[1].lambda_k - lambda_inf).abs() <= (w[0].lambda_k - lambda_inf).abs() + 1e-15);
    let converging = levels.len() < 2 || levels.last().unwrap().distance < levels[0].distance
        || levels.iter().all(|l| l.distance == 0.0);
    let pass = converging
        && levels
            .iter()
            .all(|l| l.member_pass && l.limit_pointwise_pass && l.limit_touching_pass);
    Ok(LimitReport {
        lambda_limit: lambda_inf,
        levels,
        lambda_monotone,
        converging,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::EllipticityParams;

    fn square(nodes: usize) -> Grid {
        Grid::cube(2, -1.0, 1.0, nodes).unwrap()
    }

    fn line(nodes: usize) -> Grid {
        Grid::cube(1, -1.0, 1.0, nodes).unwrap()
    }

    #[test]
    fn pointwise_examples() {
        let g = square(33);
        let trace = EllipticOperator::trace();
        let harmonic = GridFunction::from_fn(&g, |x| x[0] * x[0] - x[1] * x[1]).unwrap();
        let r = check_pointwise(&harmonic, &trace, Bounds::new(0.0, 0.0).unwrap(), StencilConfig::default(), None).unwrap();
        assert!(r.pass);
        assert!(r.worst_upper.abs() < 1e-10 && r.worst_lower.abs() < 1e-10);

        let quad = GridFunction::from_fn(&g, |x| 0.5 * (x[0] * x[0] + x[1] * x[1])).unwrap();
        let r = check_pointwise(&quad, &trace, Bounds::new(0.0, 0.0).unwrap(), StencilConfig::default(), None).unwrap();
        assert!(!r.pass);
        assert!((r.worst_upper - 2.0).abs() < 1e-9);
    }

    #[test]
    fn bounds_validation() {
        assert!(Bounds::new(1.0, 0.0).is_err());
        assert!(Bounds::new(f64::NAN, 0.0).is_err());
        assert!(Bounds::new(0.0, f64::INFINITY).is_ok());
        assert_eq!(Bounds::symmetric(-2.0), Bounds { lo: -2.0, hi: 2.0 });
    }

    #[test]
    fn constant_passes_every_dictionary() {
        let g = square(17);
        let u = GridFunction::constant(&g, 3.0).unwrap();
        let op = EllipticOperator::pucci_max(EllipticityParams::new(1.0, 2.0).unwrap());
        let b = Bounds::new(0.0, 0.0).unwrap();
        let r = check_touching(&u, &op, b, &Dictionary::default(), 1e-9).unwrap();
        assert!(r.pass && r.triggered > 0);
        let wide = Dictionary::Generated(DictionaryConfig {
            rho_nodes: 4,
            perturb_gradient: false,
        });
        assert!(check_touching(&u, &op, b, &wide, 1e-9).unwrap().pass);
    }

    #[test]
    fn empty_dictionary_rejected() {
        let g = square(9);
        let u = GridFunction::constant(&g, 0.0).unwrap();
        let op = EllipticOperator::trace();
        let b = Bounds::new(0.0, 0.0).unwrap();
        assert_eq!(
            check_touching(&u, &op, b, &Dictionary::Explicit(vec![]), 0.1).unwrap_err(),
            Error::EmptyDictionary
        );
    }

    /// Brute-force 1D enumeration: parabola `½m y²` touches `|y|` from below
    /// at 0 over `|y| ≤ 2h` iff `m ≤ 1/h`.
    #[test]
    fn kink_fails_upper_bound_only() {
        let g = line(65);
        let h = g.h();
        let u = GridFunction::from_fn(&g, |x| x[0].abs()).unwrap();
        let op = EllipticOperator::trace();
        let center = 32;
        for k in 0..40 {
            let m = -5.0 / h + k as f64 * 0.25 / h;
            let t = TouchingTest {
                node: center,
                p: vec![0.0],
                m: SymMatrix::diag(&[m]),
                rho: 2.0 * h,
                side: Side::Below,
            };
            let r = check_touching(&u, &op, Bounds::new(0.0, 0.0).unwrap(), &Dictionary::Explicit(vec![t]), 0.0).unwrap();
            assert_eq!(r.triggered == 1, m <= 1.0 / h + 1e-9, "m = {m}");
            if r.triggered == 1 {
                assert_eq!(r.pass, m <= 0.0);
            }
        }

        let tol = default_tolerance(&u, &op);
        let zero = check_touching(&u, &op, Bounds::new(0.0, 0.0).unwrap(), &Dictionary::default(), tol).unwrap();
        assert!(!zero.pass);
        assert!(zero.worst_upper > 1.0 / h - 1.0);
        assert!(zero.worst_lower <= tol);
        let failing: Vec<usize> = zero.failing_nodes().map(|v| v.node).collect();
        assert_eq!(failing, vec![center]);

        let half = check_touching(&u, &op, Bounds::new(0.0, f64::INFINITY).unwrap(), &Dictionary::default(), tol).unwrap();
        assert!(half.pass);
        // the concave kink is the mirror image
        let v = u.map(|x| -x).unwrap();
        let mirror = check_touching(&v, &op, Bounds::new(f64::NEG_INFINITY, 0.0).unwrap(), &Dictionary::default(), tol).unwrap();
        assert!(mirror.pass);
        let mirror0 = check_touching(&v, &op, Bounds::new(0.0, 0.0).unwrap(), &Dictionary::default(), tol).unwrap();
        assert!(!mirror0.pass && mirror0.worst_lower > 1.0 / h - 1.0);
    }

    #[test]
    fn planar_kink_is_caught_along_its_ridge() {
        let g = square(33);
        let u = GridFunction::from_fn(&g, |x| x[0].abs()).unwrap();
        let op = EllipticOperator::trace();
        let tol = default_tolerance(&u, &op);
        let d = Dictionary::default();
        assert!(check_touching(&u, &op, Bounds::new(0.0, f64::INFINITY).unwrap(), &d, tol).unwrap().pass);
        let r = check_touching(&u, &op, Bounds::new(f64::NEG_INFINITY, 0.0).unwrap(), &d, tol).unwrap();
        assert!(!r.pass);
        assert!(r.failing_nodes().all(|v| g.axis_index(v.node, 0) == 16));
        assert!(r.failing_nodes().count() > 20);
    }

    #[test]
    fn touching_agrees_with_pointwise_on_smooth_data() {
        let g = square(65);
        let tol = 20.0 * g.h();
        let trace = EllipticOperator::trace();
        let pucci = EllipticOperator::pucci_min(EllipticityParams::new(0.5, 1.5).unwrap());
        let harmonic = GridFunction::from_fn(&g, |x| x[0] * x[0] - x[1] * x[1]).unwrap();
        let quad = GridFunction::from_fn(&g, |x| 0.5 * (x[0] * x[0] + x[1] * x[1])).unwrap();
        let wave = GridFunction::from_fn(&g, |x| (x[0]).sin() * (0.5 * x[1]).cos()).unwrap();
        for (u, op, b) in [
            (&harmonic, &trace, Bounds::new(0.0, 0.0).unwrap()),
            (&quad, &trace, Bounds::new(0.0, 0.0).unwrap()),
            (&quad, &trace, Bounds::new(2.0, 2.0).unwrap()),
            (&quad, &pucci, Bounds::new(1.0, 1.0).unwrap()),
            (&wave, &trace, Bounds::new(-1.5, 1.5).unwrap()),
            (&wave, &trace, Bounds::new(0.0, 0.0).unwrap()),
        ] {
            let pw = check_pointwise(u, op, b, StencilConfig::default(), Some(tol)).unwrap();
            let tc = check_touching(u, op, b, &Dictionary::default(), tol).unwrap();
            assert_eq!(pw.pass, tc.pass, "{b:?}");
        }
    }

    #[test]
    fn verdicts_invariant_under_affine_and_scaling() {
        let g = square(33);
        let op = EllipticOperator::pucci_max(EllipticityParams::new(1.0, 2.0).unwrap());
        let u = GridFunction::from_fn(&g, |x| x[0].powi(2) * 0.3 + (x[1] * 1.5).cos()).unwrap();
        let tol = 0.05;
        for b in [
            Bounds::new(-3.0, 3.0).unwrap(),
            Bounds::new(-0.5, 0.5).unwrap(),
            Bounds::new(-10.0, -2.0).unwrap(),
        ] {
            let base = check_pointwise(&u, &op, b, StencilConfig::default(), Some(tol)).unwrap();
            let shifted = u.add_affine(0.7, &[1.3, -2.1]).unwrap();
            let s = check_pointwise(&shifted, &op, b, StencilConfig::default(), Some(tol)).unwrap();
            assert_eq!(base.pass, s.pass);
            let t0 = check_touching(&u, &op, b, &Dictionary::default(), tol).unwrap();
            let t1 = check_touching(&shifted, &op, b, &Dictionary::default(), tol).unwrap();
            assert_eq!(t0.pass, t1.pass);
            for sigma in [0.5, 3.0] {
                let su = u.map(|v| sigma * v).unwrap();
                let r = check_pointwise(&su, &op, b.scaled(sigma), StencilConfig::default(), Some(sigma * tol)).unwrap();
                assert_eq!(base.pass, r.pass);
            }
        }
    }

    #[test]
    fn quartic_examples() {
        let g = square(33);
        let phi = GridFunction::from_fn(&g, |x| x[0] + 2.0 * x[1] * x[1]).unwrap();
        let x0 = [0.0, 0.0];
        let t = quartic_perturb(&phi, &x0).unwrap();
        let c = g.flat_index(&[16, 16]);
        assert_eq!(t.get(c), phi.get(c));
        let d = phi.zip_with(&t, |a, b| a - b).unwrap();
        let hd = hessian_at(&g, d.values(), c).unwrap();
        assert!(hd.max_abs() <= 4.0 * g.h() * g.h());
        let gd = gradient_at(&g, d.values(), c).unwrap();
        assert!(gd.iter().all(|v| v.abs() < 1e-14));
        let e = g.flat_index(&[32, 16]);
        assert!((phi.get(e) - t.get(e) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn localization_inequality() {
        let g = square(65);
        let u = GridFunction::from_fn(&g, |x| x[0] * x[0] - x[1] * x[1]).unwrap();
        let x0 = g.flat_index(&[40, 28]);
        let c = g.point(x0);
        // φ − u = −½|x − x₀|² has its maximum at x₀
        let phi = GridFunction::from_fn(&g, |x| {
            let d2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
            x[0] * x[0] - x[1] * x[1] - 0.5 * d2
        })
        .unwrap();
        let region = Ball::new(c.clone(), 0.4).unwrap();
        for k in 1..=20 {
            let kf = k as f64;
            let uk = GridFunction::from_fn(&g, |x| x[0] * x[0] - x[1] * x[1] + (kf * x[0]).sin() / (kf * kf)).unwrap();
            let rep = localization(&phi, &u, &uk, x0, &region).unwrap();
            assert!(rep.holds, "k = {k}");
            assert!(rep.witnesses.iter().any(|w| w.node == x0));
        }
        assert!(localization(&u, &phi, &u, x0, &region).is_err());
    }

    #[test]
    fn holder_affine_and_constant() {
        let g = square(33);
        let q = [0.6, -0.8];
        let u = GridFunction::from_fn(&g, |x| 1.0 + q[0] * x[0] + q[1] * x[1]).unwrap();
        let ball = Ball::centered(2, 0.9).unwrap();
        let s = holder_seminorm(&u, 1.0, &ball, 20_000).unwrap();
        assert!((s - 1.0).abs() < 0.01, "{s}");
        let c = GridFunction::constant(&g, 2.0).unwrap();
        assert_eq!(holder_seminorm(&c, 0.3, &ball, 1000).unwrap(), 0.0);
        // brute-force oracle on a small region
        let small = Ball::centered(2, 0.3).unwrap();
        let w = GridFunction::from_fn(&g, |x| (3.0 * x[0]).sin() + x[1].abs()).unwrap();
        let nodes = g.ball_nodes(&small).unwrap();
        let mut brute = 0.0f64;
        for &a in &nodes {
            for &b in &nodes {
                if a != b {
                    let (pa, pb) = (g.point(a), g.point(b));
                    let d = ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt();
                    brute = brute.max((w.get(a) - w.get(b)).abs() / d.powf(0.5));
                }
            }
        }
        assert_eq!(holder_seminorm(&w, 0.5, &small, 1_000_000).unwrap(), brute);
        assert!(holder_seminorm(&w, 0.5, &small, 50).unwrap() <= brute);
    }

    #[test]
    fn holder_divergence_witness() {
        let gamma = 0.5;
        let gp = 0.8;
        let mut prev = None;
        for nodes in [17, 33, 65] {
            let g = line(nodes);
            let u = GridFunction::from_fn(&g, |x| x[0].abs().powf(gamma)).unwrap();
            let ball = Ball::centered(1, 1.0).unwrap();
            let s = holder_seminorm(&u, gamma, &ball, 10_000).unwrap();
            assert!(s >= 1.0 - 1e-12 && s.is_finite());
            let sp = holder_seminorm(&u, gp, &ball, 10_000).unwrap();
            let h = g.h();
            assert!((sp / h.powf(gamma - gp) - 1.0).abs() < 0.05, "{sp}");
            if let Some(p) = prev {
                assert!(sp / p > 2f64.powf(gp - gamma) * 0.95);
            }
            prev = Some(sp);
        }
        let g = line(17);
        let u = GridFunction::constant(&g, 0.0).unwrap();
        let tiny = Ball::new(vec![0.01], 0.001).unwrap();
        assert!(holder_seminorm(&u, 0.5, &tiny, 10).is_err());
        let one = Ball::new(vec![0.0], 0.01).unwrap();
        assert_eq!(holder_seminorm(&u, 0.5, &one, 10).unwrap_err(), Error::RegionTooSmall);
    }

    struct Constant(GridFunction, f64);

    impl LimitFamily for Constant {
        fn member(&self, _k: usize) -> Result<(GridFunction, f64)> {
            Ok((self.0.clone(), self.1))
        }
        fn limit(&self) -> Result<(GridFunction, f64)> {
            Ok((self.0.clone(), self.1))
        }
    }

    #[test]
    fn constant_sequence_passes() {
        let g = square(33);
        let u = GridFunction::from_fn(&g, |x| 0.5 * x[0] * x[0]).unwrap();
        let fam = Constant(u, 1.0);
        let rep = limit_stability_experiment(&fam, 4, &EllipticOperator::trace(), StencilConfig::default()).unwrap();
        assert!(rep.pass && rep.lambda_monotone);
        assert_eq!(rep.levels.len(), 4);
    }

    #[test]
    fn csv_shape() {
        let g = square(9);
        let u = GridFunction::constant(&g, 0.0).unwrap();
        let r = check_pointwise(&u, &EllipticOperator::trace(), Bounds::new(0.0, 0.0).unwrap(), StencilConfig::default(), None).unwrap();
        let csv = r.to_csv(&g);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "node,x,y,scheme,upper_margin,lower_margin,verdict");
        assert_eq!(lines.count(), 49);
    }
}
