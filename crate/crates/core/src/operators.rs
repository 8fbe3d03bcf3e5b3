//! Uniformly elliptic, positively 1-homogeneous operators `F` acting on
//! symmetric matrices, and randomized checkers for the ellipticity and
//! homogeneity axioms.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;
use crate::rng::seeded;

/// Ellipticity constants `0 < λ₁ ≤ λ₂ < ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticityParams {
    lambda_min: f64,
    lambda_max: f64,
}

impl EllipticityParams {
    pub fn new(lambda_min: f64, lambda_max: f64) -> Result<Self> {
        if !(lambda_min > 0.0 && lambda_max >= lambda_min && lambda_max.is_finite()) {
            return Err(Error::InvalidOperator(format!(
                "need 0 < λ₁ ≤ λ₂ < ∞, got ({lambda_min}, {lambda_max})"
            )));
        }
        Ok(Self {
            lambda_min,
            lambda_max,
        })
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorKind {
    /// `tr M`
    Trace,
    /// `Σ A_ij M_ij`
    Linear(SymMatrix),
    /// Pucci maximal operator `λ₂ Σ e⁺ − λ₁ Σ e⁻`.
    PucciMax,
    /// Pucci minimal operator `λ₁ Σ e⁺ − λ₂ Σ e⁻`.
    PucciMin,
    /// `max_j ⟨A_j, M⟩`
    MaxOfLinear(Vec<SymMatrix>),
}

/// An operator together with its declared ellipticity constants.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticOperator {
    kind: OperatorKind,
    params: EllipticityParams,
}

fn check_spectrum(a: &SymMatrix, params: &EllipticityParams) -> Result<()> {
    let ev = a.eigenvalues();
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    let slack = 1e-12 * (1.0 + params.lambda_max);
    if lo < params.lambda_min - slack || hi > params.lambda_max + slack {
        return Err(Error::InvalidOperator(format!(
            "coefficient spectrum [{lo}, {hi}] not inside [{}, {}]",
            params.lambda_min, params.lambda_max
        )));
    }
    Ok(())
}

impl EllipticOperator {
    pub fn trace() -> Self {
        Self {
            kind: OperatorKind::Trace,
            params: EllipticityParams::new(1.0, 1.0).expect("valid"),
        }
    }

    /// Linear operator with constants taken from the spectrum of `a`.
    pub fn linear(a: SymMatrix) -> Result<Self> {
        let ev = a.eigenvalues();
        let params = EllipticityParams::new(ev[0], ev[ev.len() - 1])?;
        Ok(Self {
            kind: OperatorKind::Linear(a),
            params,
        })
    }

    /// Linear operator with declared constants; `a` must have its spectrum in
    /// `[λ₁, λ₂]`.
    pub fn linear_with(a: SymMatrix, params: EllipticityParams) -> Result<Self> {
        check_spectrum(&a, &params)?;
        Ok(Self {
            kind: OperatorKind::Linear(a),
            params,
        })
    }

    pub fn pucci_max(params: EllipticityParams) -> Self {
        Self {
            kind: OperatorKind::PucciMax,
            params,
        }
    }

    pub fn pucci_min(params: EllipticityParams) -> Self {
        Self {
            kind: OperatorKind::PucciMin,
            params,
        }
    }

    pub fn max_of_linear(family: Vec<SymMatrix>, params: EllipticityParams) -> Result<Self> {
        if family.is_empty() {
            return Err(Error::InvalidOperator("empty linear family".into()));
        }
        let n = family[0].dim();
        for a in &family {
            if a.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: a.dim(),
                });
            }
            check_spectrum(a, &params)?;
        }
        Ok(Self {
            kind: OperatorKind::MaxOfLinear(family),
            params,
        })
    }

    /// Same kind, but with different declared constants. Used to exercise
    /// the ellipticity checker with deliberately wrong declarations.
    pub fn with_declared_params(&self, params: EllipticityParams) -> Self {
        Self {
            kind: self.kind.clone(),
            params,
        }
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn params(&self) -> EllipticityParams {
        self.params
    }

    /// Dimension the operator is tied to, if any.
    pub fn fixed_dim(&self) -> Option<usize> {
        match &self.kind {
            OperatorKind::Linear(a) => Some(a.dim()),
            OperatorKind::MaxOfLinear(f) => Some(f[0].dim()),
            _ => None,
        }
    }

    pub fn is_pucci(&self) -> bool {
        matches!(self.kind, OperatorKind::PucciMax | OperatorKind::PucciMin)
    }

    pub fn eval(&self, m: &SymMatrix) -> Result<f64> {
        if let Some(n) = self.fixed_dim() {
            if n != m.dim() {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: m.dim(),
                });
            }
        }
        let (l1, l2) = (self.params.lambda_min, self.params.lambda_max);
        Ok(match &self.kind {
            OperatorKind::Trace => m.trace(),
            OperatorKind::Linear(a) => a.inner(m)?,
            OperatorKind::PucciMax => m.eigenvalues().iter().map(|&e| pucci_max_weight(e, l1, l2)).sum(),
            OperatorKind::PucciMin => m.eigenvalues().iter().map(|&e| pucci_min_weight(e, l1, l2)).sum(),
            OperatorKind::MaxOfLinear(family) => {
                let mut best = f64::NEG_INFINITY;
                for a in family {
                    best = best.max(a.inner(m)?);
                }
                best
            }
        })
    }

    /// Scalar profile of `F` on `1 × 1` matrices, i.e. `F(d)` for a single
    /// second derivative `d`. Used by one-dimensional schemes.
    pub fn eval_scalar(&self, d: f64) -> Result<f64> {
        self.eval(&SymMatrix::diag(&[d]))
    }
}

/// `λ₂ e` for `e ≥ 0`, `λ₁ e` for `e < 0`.
#[inline]
pub fn pucci_max_weight(e: f64, l1: f64, l2: f64) -> f64 {
    if e > 0.0 {
        l2 * e
    } else {
        l1 * e
    }
}

/// `λ₁ e` for `e ≥ 0`, `λ₂ e` for `e < 0`.
#[inline]
pub fn pucci_min_weight(e: f64, l1: f64, l2: f64) -> f64 {
    if e > 0.0 {
        l1 * e
    } else {
        l2 * e
    }
}

impl fmt::Display for EllipticOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.params;
        match &self.kind {
            OperatorKind::Trace => write!(f, "trace"),
            OperatorKind::Linear(a) if a.dim() == 2 => {
                write!(f, "linear:{},{},{}", a.get(0, 0), a.get(0, 1), a.get(1, 1))
            }
            OperatorKind::Linear(_) => write!(f, "linear"),
            OperatorKind::PucciMax => write!(f, "pucci+:{},{}", p.lambda_min, p.lambda_max),
            OperatorKind::PucciMin => write!(f, "pucci-:{},{}", p.lambda_min, p.lambda_max),
            OperatorKind::MaxOfLinear(fam) => write!(f, "max-of-linear[{}]", fam.len()),
        }
    }
}

/// Parses `trace`, `linear:a11,a12,a22`, `pucci+:l1,l2` or `pucci-:l1,l2`.
impl FromStr for EllipticOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, tail) = match s.split_once(':') {
            Some((h, t)) => (h, Some(t)),
            None => (s, None),
        };
        let numbers = |tail: Option<&str>, count: usize| -> Result<Vec<f64>> {
            let tail = tail.ok_or_else(|| Error::OperatorSpec(s.to_string()))?;
            let toks: Vec<&str> = tail.split(',').map(str::trim).collect();
            if toks.len() != count {
                return Err(Error::OperatorSpec(tail.to_string()));
            }
            toks.iter()
                .map(|t| {
                    t.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| Error::OperatorSpec((*t).to_string()))
                })
                .collect()
        };
        match head {
            "trace" => match tail {
                None => Ok(Self::trace()),
                Some(t) => Err(Error::OperatorSpec(t.to_string())),
            },
            "linear" => {
                let v = numbers(tail, 3)?;
                let a = SymMatrix::from_rows(&[vec![v[0], v[1]], vec![v[1], v[2]]])?;
                Self::linear(a)
            }
            "pucci+" | "pucci-" => {
                let v = numbers(tail, 2)?;
                let params = EllipticityParams::new(v[0], v[1])?;
                Ok(if head == "pucci+" {
                    Self::pucci_max(params)
                } else {
                    Self::pucci_min(params)
                })
            }
            other => Err(Error::OperatorSpec(other.to_string())),
        }
    }
}

/// Outcome of a randomized axiom check.
#[derive(Debug, Clone, PartialEq)]
pub struct AxiomReport {
    pub pass: bool,
    /// Largest signed violation over all samples (≤ 0 means every sampled
    /// inequality held with room to spare).
    pub worst_violation: f64,
    /// Largest violation divided by the per-sample tolerance; `pass` iff ≤ 1.
    pub worst_ratio: f64,
    pub samples: usize,
}

fn random_symmetric<R: Rng>(rng: &mut R, n: usize, scale: f64) -> SymMatrix {
    let mut m = SymMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            m.set(i, j, scale * rng.gen_range(-1.0..1.0));
        }
    }
    m
}

fn random_psd<R: Rng>(rng: &mut R, n: usize, scale: f64) -> SymMatrix {
    let g: Vec<f64> = (0..n * n).map(|_| scale * rng.gen_range(-1.0..1.0)).collect();
    SymMatrix::gram(&g, n, n)
}

/// Samples `M` symmetric and `N = GᵀG ≥ 0` and checks
/// `λ₁ tr N ≤ F(M+N) − F(M) ≤ λ₂ tr N` within `1e-10·(1 + |tr N|)`.
///
/// The first samples are rank-one coordinate directions `N = e_k e_kᵀ`
/// (with `M` random), which detect an understated `λ₂` for diagonal linear
/// operators deterministically.
pub fn check_uniform_ellipticity<F>(
    f: F,
    params: EllipticityParams,
    n: usize,
    sample_count: usize,
    seed: u64,
) -> AxiomReport
where
    F: Fn(&SymMatrix) -> f64,
{
    let mut rng = seeded(seed);
    let mut worst = f64::NEG_INFINITY;
    let mut worst_ratio = f64::NEG_INFINITY;
    for s in 0..sample_count.max(1) {
        let m_scale = 10f64.powf(rng.gen_range(-1.0..1.0));
        let m = random_symmetric(&mut rng, n, m_scale);
        let nn = if s < n {
            let mut e = SymMatrix::zeros(n);
            e.set(s, s, 1.0);
            e
        } else {
            let n_scale = 10f64.powf(rng.gen_range(-1.0..1.0));
            random_psd(&mut rng, n, n_scale)
        };
        let tr = nn.trace();
        let diff = f(&m.add(&nn).expect("same dim")) - f(&m);
        let violation = (params.lambda_min * tr - diff).max(diff - params.lambda_max * tr);
        let tol = 1e-10 * (1.0 + tr.abs());
        worst = worst.max(violation);
        worst_ratio = worst_ratio.max(violation / tol);
    }
    AxiomReport {
        pass: worst_ratio <= 1.0,
        worst_violation: worst,
        worst_ratio,
        samples: sample_count.max(1),
    }
}

/// `|F(σN) − σF(N)|` for one sample.
pub fn homogeneity_defect<F: Fn(&SymMatrix) -> f64>(f: &F, m: &SymMatrix, sigma: f64) -> f64 {
    (f(&m.scaled(sigma)) - sigma * f(m)).abs()
}

/// Checks `F(σN) = σF(N)` within `1e-10·(1 + |σF(N)|)` for σ drawn from
/// `(0, 10]`. Negative σ is not sampled: Pucci operators are only positively
/// homogeneous.
pub fn check_homogeneity<F>(f: F, n: usize, sample_count: usize, seed: u64) -> AxiomReport
where
    F: Fn(&SymMatrix) -> f64,
{
    let mut rng = seeded(seed);
    let mut worst = f64::NEG_INFINITY;
    let mut worst_ratio = f64::NEG_INFINITY;
    for _ in 0..sample_count.max(1) {
        let scale = 10f64.powf(rng.gen_range(-1.0..1.0));
        let m = random_symmetric(&mut rng, n, scale);
        // (0, 10]
        let sigma = 10.0 * (1.0 - rng.gen::<f64>());
        let defect = homogeneity_defect(&f, &m, sigma);
        let tol = 1e-10 * (1.0 + (sigma * f(&m)).abs());
        worst = worst.max(defect);
        worst_ratio = worst_ratio.max(defect / tol);
    }
    AxiomReport {
        pass: worst_ratio <= 1.0,
        worst_violation: worst,
        worst_ratio,
        samples: sample_count.max(1),
    }
}

impl EllipticOperator {
    pub fn check_uniform_ellipticity(&self, n: usize, sample_count: usize, seed: u64) -> AxiomReport {
        check_uniform_ellipticity(
            |m| self.eval(m).expect("dimension checked by caller"),
            self.params,
            n,
            sample_count,
            seed,
        )
    }

    pub fn check_homogeneity(&self, n: usize, sample_count: usize, seed: u64) -> AxiomReport {
        check_homogeneity(|m| self.eval(m).expect("dimension checked by caller"), n, sample_count, seed)
    }
}
