//! Uniform isotropic grids on hyper-rectangles, grid functions and discrete
//! balls.
//!
//! Nodes are numbered row-major with the first axis fastest, so in 2D the
//! node `(i, j)` has index `i + nx * j`.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Relative tolerance used when comparing geometric quantities (spacings,
/// ball containment) that are computed from user-supplied reals.
const GEOM_RTOL: f64 = 1e-12;

/// Axis-aligned box `∏ [lower_i, upper_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Domain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidDomain("dimension must be at least 1".into()));
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        for (axis, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::InvalidDomain(format!(
                    "axis {axis}: need finite lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The cube `[lo, hi]^n`.
    pub fn cube(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; n], vec![hi; n])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Distance from `x` to the boundary of the box (negative outside).
    pub fn dist_to_boundary(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&xi, (&lo, &hi))| (xi - lo).min(hi - xi))
            .fold(f64::INFINITY, f64::min)
    }

    fn scale(&self) -> f64 {
        self.lower
            .iter()
            .chain(&self.upper)
            .fold(1.0f64, |m, v| m.max(v.abs()))
    }
}

/// Uniform grid with the same spacing `h` on every axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    domain: Domain,
    nodes: Vec<usize>,
    strides: Vec<usize>,
    h: f64,
}

impl Grid {
    /// Anisotropic spacings are rejected.
    pub fn new(domain: Domain, nodes: Vec<usize>) -> Result<Self> {
        if nodes.len() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                got: nodes.len(),
            });
        }
        if let Some(&bad) = nodes.iter().find(|&&k| k < 3) {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 nodes per axis, got {bad}"
            )));
        }
        let spacings: Vec<f64> = nodes
            .iter()
            .enumerate()
            .map(|(a, &k)| (domain.upper[a] - domain.lower[a]) / (k - 1) as f64)
            .collect();
        let h = spacings[0];
        if spacings.iter().any(|s| (s - h).abs() > GEOM_RTOL * h) {
            return Err(Error::InvalidGrid(format!(
                "spacings differ across axes: {spacings:?}"
            )));
        }
        let mut strides = Vec::with_capacity(nodes.len());
        let mut acc = 1;
        for &k in &nodes {
            strides.push(acc);
            acc *= k;
        }
        Ok(Self {
            domain,
            nodes,
            strides,
            h,
        })
    }

    /// `[lo, hi]^n` with `nodes` nodes per axis.
    pub fn cube(n: usize, lo: f64, hi: f64, nodes: usize) -> Result<Self> {
        Self::new(Domain::cube(n, lo, hi)?, vec![nodes; n])
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes_per_axis(&self) -> &[usize] {
        &self.nodes
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn len(&self) -> usize {
        self.nodes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Per-axis node index of the flat index `idx`.
    #[inline]
    pub fn axis_index(&self, idx: usize, axis: usize) -> usize {
        (idx / self.strides[axis]) % self.nodes[axis]
    }

    pub fn multi_index(&self, idx: usize) -> Vec<usize> {
        (0..self.dim()).map(|a| self.axis_index(idx, a)).collect()
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    #[inline]
    pub fn axis_coord(&self, axis: usize, k: usize) -> f64 {
        self.domain.lower[axis] + k as f64 * self.h
    }

    /// Writes the coordinates of node `idx` into `out`.
    #[inline]
    pub fn write_point(&self, idx: usize, out: &mut [f64]) {
        for (a, o) in out.iter_mut().enumerate() {
            *o = self.axis_coord(a, self.axis_index(idx, a));
        }
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.dim()];
        self.write_point(idx, &mut p);
        p
    }

    /// Number of nodes between `idx` and the nearest boundary node along any
    /// axis; boundary nodes have depth 0.
    #[inline]
    pub fn depth(&self, idx: usize) -> usize {
        (0..self.dim())
            .map(|a| {
                let k = self.axis_index(idx, a);
                k.min(self.nodes[a] - 1 - k)
            })
            .min()
            .unwrap_or(0)
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        self.depth(idx) == 0
    }

    /// Whether `x` lies in the closed box, up to a relative tolerance.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.domain.dist_to_boundary(x) >= -GEOM_RTOL * self.domain.scale()
    }

    /// Nodes of the closed discrete ball `{x : |x − c| ≤ r}`, in row-major
    /// order. The ball must lie inside the domain.
    pub fn ball_nodes(&self, ball: &Ball) -> Result<Vec<usize>> {
        if ball.center.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: ball.center.len(),
            });
        }
        let slack = GEOM_RTOL * self.domain.scale();
        if self.domain.dist_to_boundary(&ball.center) < ball.radius - slack {
            return Err(Error::BallExitsDomain);
        }
        let n = self.dim();
        let mut lo = vec![0usize; n];
        let mut hi = vec![0usize; n];
        for a in 0..n {
            let c = (ball.center[a] - self.domain.lower[a]) / self.h;
            let r = ball.radius / self.h;
            lo[a] = ((c - r - 1e-9).ceil().max(0.0)) as usize;
            hi[a] = ((c + r + 1e-9).floor() as usize).min(self.nodes[a] - 1);
            if lo[a] > hi[a] {
                return Err(Error::EmptyBall);
            }
        }
        let r2 = ball.radius * ball.radius * (1.0 + 2.0 * GEOM_RTOL) + slack * slack;
        let mut out = Vec::new();
        let mut multi = lo.clone();
        let mut p = vec![0.0; n];
        'outer: loop {
            let mut d2 = 0.0;
            for a in 0..n {
                p[a] = self.axis_coord(a, multi[a]);
                let d = p[a] - ball.center[a];
                d2 += d * d;
            }
            if d2 <= r2 {
                out.push(self.flat_index(&multi));
            }
            for a in 0..n {
                if multi[a] < hi[a] {
                    multi[a] += 1;
                    continue 'outer;
                }
                multi[a] = lo[a];
            }
            break;
        }
        if out.is_empty() {
            return Err(Error::EmptyBall);
        }
        Ok(out)
    }
}

/// Closed Euclidean ball.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidConfig(format!("ball radius must be > 0, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn centered(n: usize, radius: f64) -> Result<Self> {
        Self::new(vec![0.0; n], radius)
    }
}

/// Finite real values at every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ValueCount {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let mut p = vec![0.0; grid.dim()];
        let values = (0..grid.len())
            .map(|i| {
                grid.write_point(i, &mut p);
                f(&p)
            })
            .collect();
        Self::new(grid.clone(), values)
    }

    pub fn constant(grid: &Grid, c: f64) -> Result<Self> {
        Self::new(grid.clone(), vec![c; grid.len()])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// Node-wise combination of two functions on the same grid.
    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::InvalidGrid("grid functions live on different grids".into()));
        }
        Self::new(
            self.grid.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// Adds the affine function `c + p·x`.
    pub fn add_affine(&self, c: f64, p: &[f64]) -> Result<Self> {
        let mut x = vec![0.0; self.grid.dim()];
        let values = (0..self.grid.len())
            .map(|i| {
                self.grid.write_point(i, &mut x);
                self.values[i] + c + p.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect();
        Self::new(self.grid.clone(), values)
    }

    /// Sup norm of `self - other`.
    pub fn sup_distance(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Multilinear interpolation at an arbitrary point of the domain.
    pub fn interpolate(&self, x: &[f64]) -> Result<f64> {
        if !self.grid.contains(x) {
            return Err(Error::StencilExitsDomain);
        }
        let n = self.grid.dim();
        let mut base = vec![0usize; n];
        let mut frac = vec![0.0; n];
        for a in 0..n {
            let t = (x[a] - self.grid.domain.lower[a]) / self.grid.h;
            let last = self.grid.nodes[a] - 1;
            let mut k = t.floor();
            if k < 0.0 {
                k = 0.0;
            }
            let mut k = k as usize;
            if k >= last {
                k = last - 1;
            }
            base[a] = k;
            frac[a] = (t - k as f64).clamp(0.0, 1.0);
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut idx = 0;
            for a in 0..n {
                let bit = (corner >> a) & 1;
                w *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
                idx += (base[a] + bit) * self.grid.strides[a];
            }
            if w != 0.0 {
                acc += w * self.values[idx];
            }
        }
        Ok(acc)
    }

    /// Writes the grid-function text format: a header line
    /// `n nx [ny ...] xmin xmax [ymin ymax ...]` followed by one value per line.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = format!("{}", self.grid.dim());
        for k in &self.grid.nodes {
            header.push_str(&format!(" {k}"));
        }
        for a in 0..self.grid.dim() {
            header.push_str(&format!(
                " {:?} {:?}",
                self.grid.domain.lower[a], self.grid.domain.upper[a]
            ));
        }
        writeln!(w, "{header}")?;
        for v in &self.values {
            writeln!(w, "{v:.16e}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate().filter_map(|(i, l)| match l {
            Ok(s) if s.trim().is_empty() => None,
            other => Some((i + 1, other)),
        });
        let (line_no, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let header = header?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        let perr = |msg: String| Error::Parse { line: line_no, msg };
        let n: usize = toks
            .first()
            .ok_or_else(|| perr("empty header".into()))?
            .parse()
            .map_err(|_| perr(format!("bad dimension `{}`", toks[0])))?;
        if n == 0 || toks.len() != 1 + 3 * n {
            return Err(perr(format!(
                "header for dimension {n} needs {} fields, got {}",
                1 + 3 * n,
                toks.len()
            )));
        }
        let nodes = toks[1..=n]
            .iter()
            .map(|t| t.parse::<usize>().map_err(|_| perr(format!("bad node count `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        let bounds = toks[1 + n..]
            .iter()
            .map(|t| t.parse::<f64>().map_err(|_| perr(format!("bad bound `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        let lower = bounds.iter().step_by(2).copied().collect();
        let upper = bounds.iter().skip(1).step_by(2).copied().collect();
        let grid = Grid::new(Domain::new(lower, upper)?, nodes)?;
        let mut values = Vec::with_capacity(grid.len());
        for (line, text) in lines {
            let text = text?;
            let v = text.trim().parse::<f64>().map_err(|_| Error::Parse {
                line,
                msg: format!("bad value `{}`", text.trim()),
            })?;
            values.push(v);
        }
        Self::new(grid, values)
    }
}

/// Values defined on a subset of the grid nodes; undefined nodes hold NaN.
///
/// Produced by stencil evaluations, which cannot be applied on a boundary
/// ring, and by mollification, which lives on a shrunken domain.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialField {
    grid: Grid,
    values: Vec<f64>,
}

impl PartialField {
    pub fn undefined(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![f64::NAN; grid.len()],
        }
    }

    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ValueCount {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn get(&self, idx: usize) -> Option<f64> {
        let v = self.values[idx];
        (!v.is_nan()).then_some(v)
    }

    #[inline]
    pub fn set(&mut self, idx: usize, v: f64) {
        self.values[idx] = v;
    }

    pub fn raw(&self) -> &[f64] {
        &self.values
    }

    pub fn is_defined(&self, idx: usize) -> bool {
        !self.values[idx].is_nan()
    }

    pub fn defined(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_nan())
            .map(|(i, &v)| (i, v))
    }

    pub fn defined_count(&self) -> usize {
        self.values.iter().filter(|v| !v.is_nan()).count()
    }

    pub fn max_abs(&self) -> f64 {
        self.defined().fold(0.0, |m, (_, v)| m.max(v.abs()))
    }

    /// Fills undefined nodes with `fill`.
    pub fn to_grid_function(&self, fill: f64) -> Result<GridFunction> {
        GridFunction::new(
            self.grid.clone(),
            self.values
                .iter()
                .map(|&v| if v.is_nan() { fill } else { v })
                .collect(),
        )
    }
}

/// All node/value pairs of `u` inside `b`, row-major.
pub fn restrict(u: &GridFunction, b: &Ball) -> Result<Vec<(Vec<f64>, f64)>> {
    let nodes = u.grid().ball_nodes(b)?;
    Ok(nodes
        .into_iter()
        .map(|i| (u.grid().point(i), u.get(i)))
        .collect())
}

/// `max − min` of `u` over the discrete ball.
pub fn oscillation(u: &GridFunction, b: &Ball) -> Result<f64> {
    let nodes = u.grid().ball_nodes(b)?;
    Ok(oscillation_over(u.values(), &nodes))
}

pub(crate) fn oscillation_over(values: &[f64], nodes: &[usize]) -> f64 {
    let (lo, hi) = nodes.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
        (lo.min(values[i]), hi.max(values[i]))
    });
    hi - lo
}
