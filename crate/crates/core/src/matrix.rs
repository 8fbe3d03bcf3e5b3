//! Symmetric matrices stored as a packed upper triangle.

use crate::error::{Error, Result};

/// A real symmetric `n × n` matrix. Only the upper triangle is stored, so
/// `M = Mᵀ` holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    upper: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            upper: vec![0.0; n * (n + 1) / 2],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds a matrix from full rows, rejecting anything not exactly symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            for j in 0..n {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::NotSymmetric);
                }
                if i <= j {
                    m.set(i, j, rows[i][j]);
                }
            }
        }
        Ok(m)
    }

    /// `GᵀG` for a row-major `rows × n` matrix `g`; always positive semidefinite.
    pub fn gram(g: &[f64], rows: usize, n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let s: f64 = (0..rows).map(|r| g[r * n + i] * g[r * n + j]).sum();
                m.set(i, j, s);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        // row i starts after rows 0..i, of lengths n, n-1, ...
        i * self.n - i * (i + 1) / 2 + j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[self.slot(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.upper[s] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Frobenius inner product `Σ_ij A_ij M_ij`.
    pub fn inner(&self, other: &SymMatrix) -> Result<f64> {
        self.check_dim(other)?;
        let mut s = 0.0;
        for i in 0..self.n {
            s += self.get(i, i) * other.get(i, i);
            for j in i + 1..self.n {
                s += 2.0 * self.get(i, j) * other.get(i, j);
            }
        }
        Ok(s)
    }

    pub fn frobenius(&self) -> f64 {
        self.inner(self).unwrap_or(0.0).sqrt()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.upper.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            n: self.n,
            upper: self.upper.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &SymMatrix) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            n: self.n,
            upper: self.upper.iter().zip(&other.upper).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<Self> {
        self.add(&other.scaled(-1.0))
    }

    /// `M + s·I`.
    pub fn shifted(&self, s: f64) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m.set(i, i, m.get(i, i) + s);
        }
        m
    }

    /// Quadratic form `vᵀ M v`.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            s += self.get(i, i) * v[i] * v[i];
            for j in i + 1..self.n {
                s += 2.0 * self.get(i, j) * v[i] * v[j];
            }
        }
        s
    }

    fn check_dim(&self, other: &SymMatrix) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        Ok(())
    }

    /// Eigenvalues in ascending order. Closed form for `n ≤ 2`, cyclic Jacobi
    /// sweeps (off-diagonal tolerance 1e-12) otherwise.
    pub fn eigenvalues(&self) -> Vec<f64> {
        match self.n {
            0 => Vec::new(),
            1 => vec![self.get(0, 0)],
            2 => {
                let (a, b, d) = (self.get(0, 0), self.get(0, 1), self.get(1, 1));
                let mean = 0.5 * (a + d);
                let rad = (0.5 * (a - d)).hypot(b);
                vec![mean - rad, mean + rad]
            }
            _ => {
                let mut ev = jacobi_eigenvalues(self);
                ev.sort_by(|a, b| a.total_cmp(b));
                ev
            }
        }
    }
}

fn jacobi_eigenvalues(m: &SymMatrix) -> Vec<f64> {
    let n = m.n;
    let mut a: Vec<f64> = (0..n * n).map(|k| m.get(k / n, k % n)).collect();
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-12 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}
