//! Built-in test data and limit families.
//!
//! Fixtures live on `[−1, 1]ⁿ`. `Fixture::Disc` describes the obstacle
//! problem with `ψ = 1/4 − |x|²`, zero boundary data, `F = Trace`, `g = 0`.

use std::fmt;
use std::str::FromStr;

use crate::discretization::StencilConfig;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::matrix::SymMatrix;
use crate::operators::EllipticOperator;
use crate::solvers::{solve_dirichlet, ObstacleProblem, RelaxationConfig};
use crate::viscosity::LimitFamily;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fixture {
    /// `x₁² − x₂²`
    Harmonic,
    /// `|x|²/2`
    Quad,
    /// `|x₁|`
    Kink,
    /// `|x|^{1+γ}`
    RadialHolder(f64),
    /// Obstacle `1/4 − |x|²`.
    Disc,
}

impl Fixture {
    pub fn grid(n: usize, res: usize) -> Result<Grid> {
        Grid::cube(n, -1.0, 1.0, res)
    }

    /// The fixture's function; the obstacle for `Disc`.
    pub fn sample(&self, grid: &Grid) -> Result<GridFunction> {
        match *self {
            Fixture::Harmonic => {
                if grid.dim() < 2 {
                    return Err(Error::DimensionMismatch { expected: 2, got: grid.dim() });
                }
                GridFunction::from_fn(grid, |x| x[0] * x[0] - x[1] * x[1])
            }
            Fixture::Quad => GridFunction::from_fn(grid, |x| 0.5 * norm2(x)),
            Fixture::Kink => GridFunction::from_fn(grid, |x| x[0].abs()),
            Fixture::RadialHolder(g) => GridFunction::from_fn(grid, |x| norm2(x).sqrt().powf(1.0 + g)),
            Fixture::Disc => GridFunction::from_fn(grid, |x| 0.25 - norm2(x)),
        }
    }

    /// Constant Hessian of the quadratic fixtures.
    pub fn exact_hessian(&self, n: usize) -> Option<SymMatrix> {
        match self {
            Fixture::Harmonic if n >= 2 => {
                let mut m = SymMatrix::zeros(n);
                m.set(0, 0, 2.0);
                m.set(1, 1, -2.0);
                Some(m)
            }
            Fixture::Quad => Some(SymMatrix::identity(n)),
            _ => None,
        }
    }

    pub fn obstacle_problem(&self, grid: &Grid) -> Result<ObstacleProblem> {
        if *self != Fixture::Disc {
            return Err(Error::InvalidObstacle(format!("fixture `{self}` is not an obstacle problem")));
        }
        ObstacleProblem::new(
            EllipticOperator::trace(),
            GridFunction::constant(grid, 0.0)?,
            self.sample(grid)?,
            GridFunction::constant(grid, 0.0)?,
        )
    }
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

impl FromStr for Fixture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "harmonic" => Ok(Fixture::Harmonic),
            "quad" => Ok(Fixture::Quad),
            "kink" => Ok(Fixture::Kink),
            "disc" => Ok(Fixture::Disc),
            other => {
                let g = other
                    .strip_prefix("radial-holder:")
                    .ok_or_else(|| Error::InvalidConfig(format!("unknown fixture `{other}`")))?;
                let g: f64 = g
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad exponent `{g}`")))?;
                if !(g > 0.0 && g <= 1.0) {
                    return Err(Error::InvalidConfig(format!("exponent {g} outside (0, 1]")));
                }
                Ok(Fixture::RadialHolder(g))
            }
        }
    }
}

impl fmt::Display for Fixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fixture::Harmonic => f.write_str("harmonic"),
            Fixture::Quad => f.write_str("quad"),
            Fixture::Kink => f.write_str("kink"),
            Fixture::RadialHolder(g) => write!(f, "radial-holder:{g}"),
            Fixture::Disc => f.write_str("disc"),
        }
    }
}

/// `u_k = u_∞`, `Λ_k = Λ`.
#[derive(Debug, Clone)]
pub struct ConstantFamily {
    pub u: GridFunction,
    pub lambda: f64,
}

impl LimitFamily for ConstantFamily {
    fn member(&self, _k: usize) -> Result<(GridFunction, f64)> {
        Ok((self.u.clone(), self.lambda))
    }

    fn limit(&self) -> Result<(GridFunction, f64)> {
        Ok((self.u.clone(), self.lambda))
    }
}

/// `u_k = x₁² − x₂² + k⁻³ sin(k x₁)`, `Λ_k = 2/k`, limit harmonic with `Λ_∞ = 0`.
#[derive(Debug, Clone)]
pub struct OscillatingHarmonic {
    pub grid: Grid,
}

impl LimitFamily for OscillatingHarmonic {
    fn member(&self, k: usize) -> Result<(GridFunction, f64)> {
        let kf = k as f64;
        let u = GridFunction::from_fn(&self.grid, |x| x[0] * x[0] - x[1] * x[1] + (kf * x[0]).sin() / kf.powi(3))?;
        Ok((u, 2.0 / kf))
    }

    fn limit(&self) -> Result<(GridFunction, f64)> {
        Ok((Fixture::Harmonic.sample(&self.grid)?, 0.0))
    }
}

/// `u_k` solves `F_h u = 1 + 1/k` with `|x|²/4` on the boundary; `Λ_k = 1 + 1/k`.
#[derive(Debug, Clone)]
pub struct DirichletFamily {
    pub op: EllipticOperator,
    pub cfg: RelaxationConfig,
    pub boundary: GridFunction,
}

impl DirichletFamily {
    pub fn new(grid: &Grid, op: EllipticOperator) -> Result<Self> {
        let cfg = RelaxationConfig::standard(grid, &op);
        let boundary = GridFunction::from_fn(grid, |x| 0.25 * norm2(x))?;
        Ok(Self { op, cfg, boundary })
    }

    pub fn with_stencil(mut self, stencil: StencilConfig) -> Self {
        self.cfg = self.cfg.with_stencil(stencil);
        self
    }

    fn solve(&self, rhs: f64) -> Result<GridFunction> {
        let f = GridFunction::constant(self.boundary.grid(), rhs)?;
        Ok(solve_dirichlet(&self.op, &f, &self.boundary, &self.cfg)?.u)
    }
}

impl LimitFamily for DirichletFamily {
    fn member(&self, k: usize) -> Result<(GridFunction, f64)> {
        let l = 1.0 + 1.0 / k as f64;
        Ok((self.solve(l)?, l))
    }

    fn limit(&self) -> Result<(GridFunction, f64)> {
        Ok((self.solve(1.0)?, 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::discrete_hessian;
    use crate::solvers::solve_obstacle;
    use crate::viscosity::limit_stability_experiment;

    #[test]
    fn names_round_trip() {
        for s in ["harmonic", "quad", "kink", "disc", "radial-holder:0.5"] {
            assert_eq!(s.parse::<Fixture>().unwrap().to_string(), s);
        }
        assert!("radial-holder:1.5".parse::<Fixture>().is_err());
        assert!("radial-holder:x".parse::<Fixture>().is_err());
        assert!("wave".parse::<Fixture>().is_err());
    }

    #[test]
    fn quadratic_hessians_match_samples() {
        let g = Fixture::grid(2, 17).unwrap();
        for fx in [Fixture::Harmonic, Fixture::Quad] {
            let want = fx.exact_hessian(2).unwrap();
            let hf = discrete_hessian(&fx.sample(&g).unwrap());
            assert!(hf.defined().all(|(_, m)| m.sub(&want).unwrap().max_abs() < 1e-10));
        }
        assert!(Fixture::Kink.exact_hessian(2).is_none());
        assert!(Fixture::Kink.obstacle_problem(&g).is_err());
    }

    #[test]
    fn disc_obstacle_has_contact() {
        let g = Fixture::grid(2, 33).unwrap();
        let prob = Fixture::Disc.obstacle_problem(&g).unwrap();
        let sol = solve_obstacle(&prob, &RelaxationConfig::standard(&g, prob.operator())).unwrap();
        assert!(sol.report.contact_nodes > 0);
    }

    #[test]
    fn oscillating_family_passes() {
        let g = Fixture::grid(2, 33).unwrap();
        let fam = OscillatingHarmonic { grid: g };
        let r = limit_stability_experiment(&fam, 8, &EllipticOperator::trace(), StencilConfig::default()).unwrap();
        assert!(r.pass && r.lambda_monotone && r.converging, "{r:?}");
    }

    #[test]
    fn dirichlet_family_passes() {
        let g = Fixture::grid(2, 17).unwrap();
        let fam = DirichletFamily::new(&g, EllipticOperator::trace()).unwrap();
        let r = limit_stability_experiment(&fam, 4, &EllipticOperator::trace(), StencilConfig::default()).unwrap();
        assert!(r.pass && r.lambda_monotone && r.converging, "{r:?}");
    }
}
