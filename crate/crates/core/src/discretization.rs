//! Discrete Hessians and the monotone wide-stencil evaluation `F_h(u)`.
//!
//! Linear operators (trace, `⟨A, D²u⟩`, and maxima of those) are applied to
//! the compact central-difference Hessian. Pucci operators in 2D use
//! directional second differences along `K` angles `θ_j = jπ/K` at distance
//! `ρh`, with off-grid points interpolated bilinearly, and take the extremum
//! over the `K/2` orthogonal pairs `(θ_j, θ_j + π/2)`. Every tap set is
//! precomputed once per grid as flat index offsets, so a sweep is a handful of
//! loads per direction.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, PartialField};
use crate::matrix::SymMatrix;
use crate::operators::{pucci_max_weight, pucci_min_weight, EllipticOperator, OperatorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StencilConfig {
    angles: usize,
    radius: usize,
}

impl Default for StencilConfig {
    fn default() -> Self {
        Self { angles: 16, radius: 3 }
    }
}

impl StencilConfig {
    pub fn new(angles: usize, radius: usize) -> Result<Self> {
        if angles < 2 || angles % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "angle count must be even and ≥ 2, got {angles}"
            )));
        }
        if radius < 1 {
            return Err(Error::InvalidConfig("stencil radius must be ≥ 1".into()));
        }
        Ok(Self { angles, radius })
    }

    pub fn angles(&self) -> usize {
        self.angles
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * std::f64::consts::PI / self.angles as f64
    }
}

/// A linear combination `Σ w_k (u[i + o_k] − u[i])`.
#[derive(Debug, Clone, PartialEq)]
struct Taps {
    offsets: Vec<isize>,
    weights: Vec<f64>,
}

impl Taps {
    fn new() -> Self {
        Self {
            offsets: Vec::new(),
            weights: Vec::new(),
        }
    }

    fn push(&mut self, offset: isize, w: f64) {
        if w == 0.0 || offset == 0 {
            return;
        }
        if let Some(k) = self.offsets.iter().position(|&o| o == offset) {
            self.weights[k] += w;
        } else {
            self.offsets.push(offset);
            self.weights.push(w);
        }
    }

    fn scaled_add(&mut self, other: &Taps, s: f64) {
        for (&o, &w) in other.offsets.iter().zip(&other.weights) {
            self.push(o, s * w);
        }
    }

    #[inline]
    fn apply(&self, values: &[f64], idx: usize) -> f64 {
        let c = values[idx];
        let mut acc = 0.0;
        for (&o, &w) in self.offsets.iter().zip(&self.weights) {
            acc += w * (values[(idx as isize + o) as usize] - c);
        }
        acc
    }
}

fn offset(grid: &Grid, steps: &[isize]) -> isize {
    steps
        .iter()
        .zip(grid.strides())
        .map(|(&s, &st)| s * st as isize)
        .sum()
}

fn axis_second_difference(grid: &Grid, a: usize, spacing_nodes: usize) -> Taps {
    let n = grid.dim();
    let hh = spacing_nodes as f64 * grid.h();
    let mut steps = vec![0isize; n];
    let mut t = Taps::new();
    steps[a] = spacing_nodes as isize;
    t.push(offset(grid, &steps), 1.0 / (hh * hh));
    steps[a] = -(spacing_nodes as isize);
    t.push(offset(grid, &steps), 1.0 / (hh * hh));
    t
}

fn cross_difference(grid: &Grid, a: usize, b: usize) -> Taps {
    let n = grid.dim();
    let h = grid.h();
    let w = 1.0 / (4.0 * h * h);
    let mut t = Taps::new();
    for (sa, sb, sign) in [(1, 1, 1.0), (1, -1, -1.0), (-1, 1, -1.0), (-1, -1, 1.0)] {
        let mut steps = vec![0isize; n];
        steps[a] = sa;
        steps[b] = sb;
        t.push(offset(grid, &steps), sign * w);
    }
    t
}

/// Tap set of `Σ A_ab D_ab u` on the compact stencil.
fn linear_taps(grid: &Grid, a: &SymMatrix) -> Taps {
    let mut t = Taps::new();
    for i in 0..grid.dim() {
        t.scaled_add(&axis_second_difference(grid, i, 1), a.get(i, i));
        for j in i + 1..grid.dim() {
            t.scaled_add(&cross_difference(grid, i, j), 2.0 * a.get(i, j));
        }
    }
    t
}

/// Snaps a coordinate (in node units) onto an integer when it is within
/// rounding of one, so axis directions never interpolate.
fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < 1e-9 {
        r
    } else {
        v
    }
}

/// Bilinear taps for `u(x + v) + u(x − v)` in 2D, `v = ρh(cos θ, sin θ)`,
/// scaled by `1/(ρh)²`. The `−2u(x)` term is implicit in [`Taps::apply`].
fn directional_taps(grid: &Grid, theta: f64, radius: usize) -> Taps {
    let rho = radius as f64;
    let scale = 1.0 / (rho * grid.h()).powi(2);
    let mut t = Taps::new();
    for sign in [1.0, -1.0] {
        let fx = snap(sign * rho * theta.cos());
        let fy = snap(sign * rho * theta.sin());
        let (ix, iy) = (fx.floor(), fy.floor());
        let (ax, ay) = (fx - ix, fy - iy);
        let (ix, iy) = (ix as isize, iy as isize);
        for (dx, dy, w) in [
            (0, 0, (1.0 - ax) * (1.0 - ay)),
            (1, 0, ax * (1.0 - ay)),
            (0, 1, (1.0 - ax) * ay),
            (1, 1, ax * ay),
        ] {
            t.push(offset(grid, &[ix + dx, iy + dy]), scale * w);
        }
    }
    t
}

#[derive(Debug, Clone)]
enum SchemeKind {
    /// `max` over the linear functionals (a single entry is a linear operator).
    MaxLinear(Vec<Taps>),
    /// Extremum over groups of `Σ_{d ∈ group} g(D_d u)` with the Pucci weight `g`.
    Directional {
        dirs: Vec<Taps>,
        groups: Vec<Vec<usize>>,
        maximize: bool,
    },
    /// `F` applied to the compact Hessian (Pucci in dimension ≥ 3).
    Hessian,
}

/// `F_h` specialised to one grid: precomputed taps plus the set of nodes on
/// which the stencil fits.
#[derive(Debug, Clone)]
pub struct Scheme {
    op: EllipticOperator,
    grid: Grid,
    kind: SchemeKind,
    reach: usize,
}

impl Scheme {
    pub fn new(op: &EllipticOperator, grid: &Grid, cfg: StencilConfig) -> Result<Self> {
        let n = grid.dim();
        if let Some(d) = op.fixed_dim() {
            if d != n {
                return Err(Error::DimensionMismatch { expected: d, got: n });
            }
        }
        let (kind, reach) = match op.kind() {
            OperatorKind::Trace => (SchemeKind::MaxLinear(vec![linear_taps(grid, &SymMatrix::identity(n))]), 1),
            OperatorKind::Linear(a) => (SchemeKind::MaxLinear(vec![linear_taps(grid, a)]), 1),
            OperatorKind::MaxOfLinear(fam) => (
                SchemeKind::MaxLinear(fam.iter().map(|a| linear_taps(grid, a)).collect()),
                1,
            ),
            OperatorKind::PucciMax | OperatorKind::PucciMin => {
                let maximize = matches!(op.kind(), OperatorKind::PucciMax);
                match n {
                    1 => (
                        SchemeKind::Directional {
                            dirs: vec![axis_second_difference(grid, 0, 1)],
                            groups: vec![vec![0]],
                            maximize,
                        },
                        1,
                    ),
                    2 => {
                        let k = cfg.angles();
                        let dirs = (0..k)
                            .map(|j| directional_taps(grid, cfg.theta(j), cfg.radius()))
                            .collect();
                        let groups = (0..k / 2).map(|j| vec![j, j + k / 2]).collect();
                        (
                            SchemeKind::Directional {
                                dirs,
                                groups,
                                maximize,
                            },
                            cfg.radius(),
                        )
                    }
                    _ => (SchemeKind::Hessian, 1),
                }
            }
        };
        Ok(Self {
            op: op.clone(),
            grid: grid.clone(),
            kind,
            reach,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn operator(&self) -> &EllipticOperator {
        &self.op
    }

    /// Node depth needed for the stencil to fit.
    pub fn reach(&self) -> usize {
        self.reach
    }

    #[inline]
    pub fn fits(&self, idx: usize) -> bool {
        self.grid.depth(idx) >= self.reach
    }

    /// `F_h(u)` at `idx`; the caller guarantees [`Scheme::fits`].
    #[inline]
    pub fn eval_unchecked(&self, values: &[f64], idx: usize) -> f64 {
        match &self.kind {
            SchemeKind::MaxLinear(fs) => fs
                .iter()
                .map(|t| t.apply(values, idx))
                .fold(f64::NEG_INFINITY, f64::max),
            SchemeKind::Directional {
                dirs,
                groups,
                maximize,
            } => {
                let p = self.op.params();
                let (l1, l2) = (p.lambda_min(), p.lambda_max());
                let weight = if *maximize { pucci_max_weight } else { pucci_min_weight };
                let mut best = if *maximize { f64::NEG_INFINITY } else { f64::INFINITY };
                for g in groups {
                    let s: f64 = g.iter().map(|&d| weight(dirs[d].apply(values, idx), l1, l2)).sum();
                    best = if *maximize { best.max(s) } else { best.min(s) };
                }
                best
            }
            SchemeKind::Hessian => {
                let h = hessian_at(&self.grid, values, idx).expect("node fits");
                self.op.eval(&h).expect("dimension checked")
            }
        }
    }

    pub fn eval_at(&self, values: &[f64], idx: usize) -> Option<f64> {
        self.fits(idx).then(|| self.eval_unchecked(values, idx))
    }

    /// `F_h(u)` on every node where the stencil fits; other nodes undefined.
    pub fn apply(&self, values: &[f64]) -> PartialField {
        let out: Vec<f64> = (0..self.grid.len())
            .into_par_iter()
            .map(|i| self.eval_at(values, i).unwrap_or(f64::NAN))
            .collect();
        PartialField::from_values(&self.grid, out).expect("length matches")
    }
}

/// `F_h(u)` at interior nodes; the boundary ring where the stencil does not
/// fit is left undefined (NaN).
pub fn eval_discrete(op: &EllipticOperator, u: &GridFunction, cfg: StencilConfig) -> Result<PartialField> {
    Ok(Scheme::new(op, u.grid(), cfg)?.apply(u.values()))
}

/// Central-difference Hessian at `idx`, or `None` if a neighbour is missing
/// (off-grid or NaN).
pub fn hessian_at(grid: &Grid, values: &[f64], idx: usize) -> Option<SymMatrix> {
    if grid.depth(idx) < 1 {
        return None;
    }
    let n = grid.dim();
    let h2 = grid.h() * grid.h();
    let at = |steps: &[isize]| values[(idx as isize + offset(grid, steps)) as usize];
    let c = values[idx];
    let mut m = SymMatrix::zeros(n);
    let mut steps = vec![0isize; n];
    for a in 0..n {
        steps[a] = 1;
        let p = at(&steps);
        steps[a] = -1;
        let q = at(&steps);
        steps[a] = 0;
        m.set(a, a, ((p - c) + (q - c)) / h2);
        for b in a + 1..n {
            let mut s = |sa: isize, sb: isize| {
                steps[a] = sa;
                steps[b] = sb;
                let v = at(&steps);
                steps[a] = 0;
                steps[b] = 0;
                v
            };
            let v = (s(1, 1) - s(1, -1)) - (s(-1, 1) - s(-1, -1));
            m.set(a, b, v / (4.0 * h2));
        }
    }
    let bad = (0..n).any(|a| (a..n).any(|b| m.get(a, b).is_nan())) || c.is_nan();
    (!bad).then_some(m)
}

/// Central-difference gradient at `idx`.
pub fn gradient_at(grid: &Grid, values: &[f64], idx: usize) -> Option<Vec<f64>> {
    if grid.depth(idx) < 1 {
        return None;
    }
    let g: Vec<f64> = (0..grid.dim())
        .map(|a| {
            let s = grid.strides()[a];
            (values[idx + s] - values[idx - s]) / (2.0 * grid.h())
        })
        .collect();
    g.iter().all(|v| !v.is_nan()).then_some(g)
}

/// Compact Hessians on all nodes of depth ≥ 1.
#[derive(Debug, Clone)]
pub struct HessianField {
    grid: Grid,
    mats: Vec<Option<SymMatrix>>,
}

impl HessianField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn get(&self, idx: usize) -> Option<&SymMatrix> {
        self.mats[idx].as_ref()
    }

    pub fn defined(&self) -> impl Iterator<Item = (usize, &SymMatrix)> + '_ {
        self.mats.iter().enumerate().filter_map(|(i, m)| m.as_ref().map(|m| (i, m)))
    }
}

pub fn discrete_hessian(u: &GridFunction) -> HessianField {
    hessian_field(u.grid(), u.values())
}

pub(crate) fn hessian_field(grid: &Grid, values: &[f64]) -> HessianField {
    let mats = (0..grid.len())
        .into_par_iter()
        .map(|i| hessian_at(grid, values, i))
        .collect();
    HessianField {
        grid: grid.clone(),
        mats,
    }
}

/// `(u(x + ρh e_θ) − 2u(x) + u(x − ρh e_θ)) / (ρh)²` in 2D, interpolating
/// bilinearly off the grid.
pub fn directional_second_difference(u: &GridFunction, node: usize, theta: f64, radius: usize) -> Result<f64> {
    let grid = u.grid();
    if grid.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: grid.dim(),
        });
    }
    let x = grid.point(node);
    let rho = radius as f64 * grid.h();
    let (c, s) = (snap(radius as f64 * theta.cos()), snap(radius as f64 * theta.sin()));
    let v = [c * grid.h(), s * grid.h()];
    let plus = [x[0] + v[0], x[1] + v[1]];
    let minus = [x[0] - v[0], x[1] - v[1]];
    if !grid.contains(&plus) || !grid.contains(&minus) {
        return Err(Error::StencilExitsDomain);
    }
    let up = u.interpolate(&plus)?;
    let um = u.interpolate(&minus)?;
    Ok(((up - u.get(node)) + (um - u.get(node))) / (rho * rho))
}
