use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use viscolab::campanato::{decay_profile, normalize, rescale_sequence, DecayConfig};
use viscolab::discretization::{Scheme, StencilConfig};
use viscolab::fixtures::{ConstantFamily, DirichletFamily, Fixture, OscillatingHarmonic};
use viscolab::mollification::{default_sandwich_tolerance, sandwich_check, stability_sweep};
use viscolab::operators::AxiomReport;
use viscolab::solvers::{residual, solve_dirichlet, solve_obstacle, ObstacleProblem, RelaxationConfig};
use viscolab::viscosity::{
    check_pointwise, check_touching, default_tolerance, limit_stability_experiment, Bounds, Dictionary, LimitFamily,
};
use viscolab::{EllipticOperator, Grid, GridFunction, OperatorKind, SymMatrix};

use crate::artifacts::{write_atomic, Manifest, MANIFEST_NAME};
use crate::Args;

/// Bad flags, unreadable input, or a fixture that does not fit the command.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

pub struct Verdict {
    pub pass: bool,
    pub report: PathBuf,
}

const SWEEP_MULTIPLES: [f64; 4] = [24.0, 16.0, 12.0, 8.0];

struct Data {
    u: GridFunction,
    fixture: Option<Fixture>,
    /// Manifest found next to `--input`, if any.
    upstream: Option<Manifest>,
}

fn load(args: &Args) -> Result<Data> {
    match (&args.input, &args.fixture) {
        (Some(_), Some(_)) => Err(usage("give either --input or --fixture, not both")),
        (Some(path), None) => {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let u = GridFunction::read_text(BufReader::new(file))?;
            let sibling = path.parent().unwrap_or(Path::new(".")).join(MANIFEST_NAME);
            let upstream = if sibling.exists() { Some(Manifest::read(&sibling)?) } else { None };
            Ok(Data { u, fixture: None, upstream })
        }
        (None, Some(name)) => {
            let fixture: Fixture = name.parse()?;
            let u = fixture.sample(&grid(args)?)?;
            Ok(Data {
                u,
                fixture: Some(fixture),
                upstream: None,
            })
        }
        (None, None) => Err(usage("one of --input or --fixture is required")),
    }
}

fn grid(args: &Args) -> Result<Grid> {
    if args.res < 17 {
        return Err(usage(format!("--res {} is below 17", args.res)));
    }
    Ok(Fixture::grid(2, args.res)?)
}

fn operator(args: &Args, upstream: Option<&Manifest>) -> Result<EllipticOperator> {
    let spec = args
        .op
        .as_deref()
        .or_else(|| upstream.and_then(|m| m.get("op")))
        .unwrap_or("trace");
    Ok(spec.parse()?)
}

fn parse_bounds(s: &str) -> Result<Bounds> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| usage(format!("bounds `{s}` must be `lo,hi`")))?;
    let num = |t: &str| -> Result<f64> {
        match t.trim() {
            "inf" | "+inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            v => v.parse().map_err(|_| usage(format!("bad bound `{v}`"))),
        }
    };
    Ok(Bounds::new(num(lo)?, num(hi)?)?)
}

/// `--bounds`, else the upstream manifest, else `F(D²u)` for quadratic fixtures.
fn bounds(args: &Args, data: &Data, op: &EllipticOperator) -> Result<Bounds> {
    if let Some(b) = &args.bounds {
        return parse_bounds(b);
    }
    if let Some(m) = &data.upstream {
        if let (Some(lo), Some(hi)) = (m.get("bounds_lo"), m.get("bounds_hi")) {
            return parse_bounds(&format!("{lo},{hi}"));
        }
    }
    if let Some(h) = data.fixture.and_then(|f| f.exact_hessian(data.u.grid().dim())) {
        let v = op.eval(&h)?;
        return Ok(Bounds::new(v, v)?);
    }
    Err(usage("no bounds: pass --bounds lo,hi or an --input with a manifest"))
}

fn base_manifest(command: &str, args: &Args, op: &EllipticOperator, g: &Grid) -> Manifest {
    let mut m = Manifest::default();
    m.set("command", command);
    m.set("version", env!("CARGO_PKG_VERSION"));
    m.set("op", op);
    m.set("dim", g.dim());
    m.set("res", g.nodes_per_axis()[0]);
    m.set("h", g.h());
    if let Some(f) = &args.fixture {
        m.set("fixture", f);
    }
    if let Some(p) = &args.input {
        m.set("input", p.display());
    }
    if let Some(s) = args.seed {
        m.set("seed", s);
    }
    m.set("beta", args.beta);
    m.set("lambda", args.lambda);
    if let Some(e) = args.eps {
        m.set("eps", e);
    }
    m.set("tol_scale", args.tol_scale);
    m
}

fn finish(dir: &Path, mut m: Manifest, pass: bool, report: PathBuf) -> Result<Verdict> {
    m.set("report", report.file_name().map(|s| s.to_string_lossy()).unwrap_or_default());
    m.set("verdict", if pass { "pass" } else { "fail" });
    m.write(dir)?;
    Ok(Verdict { pass, report })
}

pub fn solve(args: &Args) -> Result<Verdict> {
    let g = grid(args)?;
    let name = args.fixture.as_deref().ok_or_else(|| usage("solve needs --fixture"))?;
    let fixture: Fixture = name.parse()?;
    let op = operator(args, None)?;
    let exact = fixture.sample(&g)?;
    let hess = fixture
        .exact_hessian(g.dim())
        .ok_or_else(|| usage(format!("fixture `{fixture}` has no constant right-hand side")))?;
    let rhs = op.eval(&hess)?;
    let f = GridFunction::constant(&g, rhs)?;
    let cfg = RelaxationConfig::standard(&g, &op);
    // exact values where the stencil does not fit, zero elsewhere
    let scheme = Scheme::new(&op, &g, cfg.stencil())?;
    let seed = GridFunction::new(
        g.clone(),
        (0..g.len())
            .map(|i| if scheme.fits(i) { 0.0 } else { exact.get(i) })
            .collect(),
    )?;
    let sol = solve_dirichlet(&op, &f, &seed, &cfg)?;
    let res = residual(&op, &sol.u, &f, cfg.stencil())?;
    let tol = args.tol_scale * default_tolerance(&sol.u, &op);
    let report = check_pointwise(&sol.u, &op, Bounds::new(rhs, rhs)?, cfg.stencil(), Some(tol))?;

    let out = &args.out;
    write_atomic(out, "solution.grid", &sol.u.to_text())?;
    let path = write_atomic(out, "report.csv", &report.to_csv(&g))?;
    let mut m = base_manifest("solve", args, &op, &g);
    m.set("rhs", rhs);
    m.set("tau", cfg.tau());
    m.set("iterations", sol.iterations);
    m.set("solver_residual", sol.residual);
    m.set("solver_tolerance", sol.tolerance);
    m.set("max_residual", res.max_abs());
    m.set("max_error", sol.u.sup_distance(&exact));
    m.set("bounds_lo", rhs);
    m.set("bounds_hi", rhs);
    m.set("check_scheme", report.scheme.name());
    m.set("check_tolerance", tol);
    finish(out, m, report.pass, path)
}

pub fn obstacle(args: &Args) -> Result<Verdict> {
    let g = grid(args)?;
    let op = operator(args, None)?;
    let psi = match (&args.fixture, &args.input) {
        (Some(name), None) => {
            let fx: Fixture = name.parse()?;
            if fx != Fixture::Disc {
                return Err(usage(format!("fixture `{fx}` is not an obstacle problem")));
            }
            fx.sample(&g)?
        }
        _ => load(args)?.u,
    };
    let zero = GridFunction::constant(psi.grid(), 0.0)?;
    let prob = ObstacleProblem::new(op.clone(), zero.clone(), psi, zero)?;
    let g = prob.grid().clone();
    let cfg = RelaxationConfig::standard(&g, &op);
    let sol = solve_obstacle(&prob, &cfg)?;
    let rep = &sol.report;
    let tol = args.tol_scale * default_tolerance(&sol.u, &op);
    let check = check_pointwise(&sol.u, &op, rep.bounds, cfg.stencil(), Some(tol))?;

    let out = &args.out;
    write_atomic(out, "solution.grid", &sol.u.to_text())?;
    write_atomic(out, "obstacle.grid", &prob.obstacle().to_text())?;
    let path = write_atomic(out, "report.csv", &check.to_csv(&g))?;
    let mut m = base_manifest("obstacle", args, &op, &g);
    m.set("tau", cfg.tau());
    m.set("iterations", sol.iterations);
    m.set("solver_residual", sol.residual);
    m.set("solver_tolerance", sol.tolerance);
    m.set("active_nodes", rep.active_nodes);
    m.set("contact_nodes", rep.contact_nodes);
    m.set("contact_fraction", rep.contact_fraction());
    m.set("noncontact_residual", rep.noncontact_residual);
    m.set("contact_excess", rep.contact_excess);
    m.set("bounds_lo", rep.bounds.lo);
    m.set("bounds_hi", rep.bounds.hi);
    m.set("lambda_bound", rep.lambda);
    m.set("check_scheme", check.scheme.name());
    m.set("check_tolerance", tol);
    finish(out, m, check.pass, path)
}

pub fn visc(args: &Args) -> Result<Verdict> {
    let data = load(args)?;
    let op = operator(args, data.upstream.as_ref())?;
    let b = bounds(args, &data, &op)?;
    let u = &data.u;
    let g = u.grid();
    let tol = args.tol_scale * default_tolerance(u, &op);
    let scheme = match args.scheme.as_deref() {
        Some("pointwise") => true,
        Some("touching") => false,
        Some(other) => return Err(usage(format!("unknown scheme `{other}`"))),
        None => data.upstream.is_some(),
    };
    let report = if scheme {
        check_pointwise(u, &op, b, StencilConfig::default(), Some(tol))?
    } else {
        check_touching(u, &op, b, &Dictionary::default(), tol)?
    };
    let out = &args.out;
    let path = write_atomic(out, "visc.csv", &report.to_csv(g))?;
    let mut m = base_manifest("visc", args, &op, g);
    m.set("bounds_lo", b.lo);
    m.set("bounds_hi", b.hi);
    m.set("check_scheme", report.scheme.name());
    m.set("check_tolerance", tol);
    m.set("triggered", report.triggered);
    m.set("failing_nodes", report.failing_nodes().count());
    m.set("worst_upper", report.worst_upper);
    m.set("worst_lower", report.worst_lower);
    finish(out, m, report.pass, path)
}

pub fn campanato(args: &Args) -> Result<Verdict> {
    let data = load(args)?;
    let op = operator(args, data.upstream.as_ref())?;
    let u = &data.u;
    let g = u.grid();
    let n = g.dim();
    let levels = args.levels.unwrap_or(3);
    let cfg = DecayConfig::with(args.lambda, args.beta, levels)?;
    let origin = vec![0.0; n];
    let profile = decay_profile(u, &origin, &cfg, 1.0)?;
    let chain = profile.chain();

    // blow-up of the κ-normalised data
    let lambda_bound = match bounds(args, &data, &op) {
        Ok(b) => b.lo.abs().max(b.hi.abs()),
        Err(_) => 0.0,
    };
    let eps = args.eps.unwrap_or(cfg.eps());
    let nz = normalize(u, &origin, 1.0, lambda_bound, eps)?;
    let scaled = u.map(|v| v / nz.kappa)?;
    let seq = rescale_sequence(&scaled, &cfg, levels)?;

    let mut chain_csv = String::from("k,phi,bound,holds\n");
    for c in &chain {
        let _ = writeln!(chain_csv, "{},{:e},{:e},{}", c.k, c.phi, c.bound, u8::from(c.holds));
    }
    let mut rescale_csv = String::from("k,osc_unit");
    for a in 0..n {
        let _ = write!(rescale_csv, ",q{a}");
    }
    rescale_csv.push('\n');
    for s in &seq.states {
        let _ = write!(rescale_csv, "{},{:e}", s.k, s.osc_unit);
        for q in &s.q {
            let _ = write!(rescale_csv, ",{q:e}");
        }
        rescale_csv.push('\n');
    }
    let out = &args.out;
    let path = write_atomic(out, "decay.csv", &profile.to_csv())?;
    write_atomic(out, "chain.csv", &chain_csv)?;
    write_atomic(out, "rescale.csv", &rescale_csv)?;

    let chain_ok = chain.iter().all(|c| c.holds);
    let osc_ok = seq.states.iter().all(|s| s.osc_unit < 1.0);
    let mut m = base_manifest("campanato", args, &op, g);
    m.set("levels", levels);
    m.set("lambda0", cfg.lambda0());
    m.set("decay_eps", eps);
    m.set("usable_floor", "100*eps*max|u|");
    m.set("beta_hat", profile.beta_hat);
    m.set("sigma", profile.sigma);
    m.set("bootstrap_spread", profile.spread);
    m.set("chain_holds", chain_ok);
    m.set("kappa", nz.kappa);
    m.set("rescale_levels", seq.states.len() - 1);
    m.set("rescale_truncated", seq.truncated);
    m.set("rescale_osc_below_one", osc_ok);
    finish(out, m, chain_ok && osc_ok, path)
}

fn linear_matrix(op: &EllipticOperator, n: usize) -> Result<SymMatrix> {
    match op.kind() {
        OperatorKind::Trace => Ok(SymMatrix::identity(n)),
        OperatorKind::Linear(a) => Ok(a.clone()),
        _ => Err(usage("mollify needs a linear operator (`trace` or `linear:…`)")),
    }
}

pub fn mollify(args: &Args) -> Result<Verdict> {
    let data = load(args)?;
    let op = operator(args, data.upstream.as_ref())?;
    let b = bounds(args, &data, &op)?;
    let u = &data.u;
    let g = u.grid();
    let h = g.h();
    let a = linear_matrix(&op, g.dim())?;
    let f1 = GridFunction::constant(g, b.lo)?;
    let f2 = GridFunction::constant(g, b.hi)?;
    let eps = args.eps.unwrap_or(8.0 * h);
    let tol = args.tol_scale * default_sandwich_tolerance(&f1, &f2);
    let sandwich = sandwich_check(u, &a, &f1, &f2, eps, Some(tol))?;
    let schedule: Vec<f64> = SWEEP_MULTIPLES.iter().map(|k| k * h).collect();
    let room = g.domain().dist_to_boundary(&vec![0.0; g.dim()]);
    if args.radius + schedule[0] + h >= room {
        return Err(usage(format!(
            "--radius {} plus the widest kernel {} does not fit; raise --res or lower --radius",
            args.radius, schedule[0]
        )));
    }
    let sweep = stability_sweep(u, &a, &f1, &f2, &schedule, args.p, args.radius)?;

    let mut sandwich_csv = String::from("node,lower_margin,upper_margin,verdict\n");
    for nd in &sandwich.nodes {
        let ok = nd.lower_margin >= -tol && nd.upper_margin >= -tol;
        let _ = writeln!(
            sandwich_csv,
            "{},{:.12e},{:.12e},{}",
            nd.node,
            nd.lower_margin,
            nd.upper_margin,
            if ok { "pass" } else { "fail" }
        );
    }
    let out = &args.out;
    let path = write_atomic(out, "sandwich.csv", &sandwich_csv)?;
    write_atomic(out, "sweep.csv", &sweep.to_csv())?;
    let mut m = base_manifest("mollify", args, &op, g);
    m.set("bounds_lo", b.lo);
    m.set("bounds_hi", b.hi);
    m.set("sandwich_eps", eps);
    m.set("sandwich_tolerance", tol);
    m.set("sandwich_pass", sandwich.pass);
    m.set("sweep_p", args.p);
    m.set("sweep_radius", args.radius);
    m.set("sweep_ratio", sweep.ratio);
    m.set("sweep_growth", sweep.growth());
    m.set("sweep_bounded", sweep.bounded);
    finish(out, m, sandwich.pass && sweep.bounded, path)
}

pub fn limit(args: &Args) -> Result<Verdict> {
    let g = grid(args)?;
    let op = operator(args, None)?;
    let k_max = args.levels.unwrap_or(8);
    let family: Box<dyn LimitFamily> = match args.family.as_str() {
        "oscillating" => Box::new(OscillatingHarmonic { grid: g.clone() }),
        "dirichlet" => Box::new(DirichletFamily::new(&g, op.clone())?),
        "constant" => {
            let data = load(args)?;
            let b = bounds(args, &data, &op)?;
            Box::new(ConstantFamily {
                lambda: b.lo.abs().max(b.hi.abs()),
                u: data.u,
            })
        }
        other => return Err(usage(format!("unknown family `{other}`"))),
    };
    let report = limit_stability_experiment(family.as_ref(), k_max, &op, StencilConfig::default())?;
    let mut csv = String::from("k,lambda_k,distance,delta_k,member,limit_pointwise,limit_touching\n");
    for l in &report.levels {
        let _ = writeln!(
            csv,
            "{},{:e},{:e},{:e},{},{},{}",
            l.k,
            l.lambda_k,
            l.distance,
            l.delta_k,
            u8::from(l.member_pass),
            u8::from(l.limit_pointwise_pass),
            u8::from(l.limit_touching_pass)
        );
    }
    let out = &args.out;
    let path = write_atomic(out, "limit.csv", &csv)?;
    let mut m = base_manifest("limit", args, &op, &g);
    m.set("family", &args.family);
    m.set("k_max", k_max);
    m.set("lambda_limit", report.lambda_limit);
    m.set("lambda_monotone", report.lambda_monotone);
    m.set("converging", report.converging);
    m.set("c0h", "10*lambda_max*(1+|u_inf|)*h");
    finish(out, m, report.pass, path)
}

pub const PROPS_SAMPLES: usize = 10_000;

pub fn props(args: &Args) -> Result<Verdict> {
    let seed = args.seed.ok_or_else(|| usage("props needs --seed"))?;
    let op = operator(args, None)?;
    let dims: Vec<usize> = match op.fixed_dim() {
        Some(n) => vec![n],
        None => vec![2, 3],
    };
    let mut csv = String::from("check,dim,samples,worst_violation,worst_ratio,pass\n");
    let mut pass = true;
    let mut row = |name: &str, n: usize, r: AxiomReport| {
        pass &= r.pass;
        let _ = writeln!(
            csv,
            "{name},{n},{},{:e},{:e},{}",
            r.samples,
            r.worst_violation,
            r.worst_ratio,
            u8::from(r.pass)
        );
    };
    for &n in &dims {
        row("ellipticity", n, op.check_uniform_ellipticity(n, PROPS_SAMPLES, seed));
        row("homogeneity", n, op.check_homogeneity(n, PROPS_SAMPLES, seed));
    }
    let out = &args.out;
    let path = write_atomic(out, "props.csv", &csv)?;
    let mut m = Manifest::default();
    m.set("command", "props");
    m.set("version", env!("CARGO_PKG_VERSION"));
    m.set("op", &op);
    m.set("seed", seed);
    m.set("samples", PROPS_SAMPLES);
    m.set("rng", "chacha8");
    m.set("tolerance", "1e-10*scale per sample");
    finish(out, m, pass, path)
}

/// Maps an error to the documented exit code: 2 for bad input, 1 when a
/// certification could not be produced, 3 otherwise.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    use viscolab::Error as E;
    if err.downcast_ref::<Usage>().is_some() || err.downcast_ref::<std::io::Error>().is_some() {
        return 2;
    }
    match err.downcast_ref::<E>() {
        Some(
            E::OperatorSpec(_)
            | E::Parse { .. }
            | E::InvalidConfig(_)
            | E::InvalidObstacle(_)
            | E::InvalidGrid(_)
            | E::InvalidDomain(_)
            | E::ValueCount { .. }
            | E::NonFinite(_)
            | E::DimensionMismatch { .. }
            | E::InvalidOperator(_)
            | E::NotPositiveDefinite
            | E::KernelUnderResolved
            | E::BoundsOrder(_)
            | E::BallExitsDomain
            | E::Io(_),
        ) => 2,
        Some(E::TooFewLevels | E::OscillationTooLarge(_)) => 1,
        _ => 3,
    }
}

pub fn ensure_out(out: &Path) -> Result<()> {
    if out.is_file() {
        bail!(usage(format!("--out {} is a file", out.display())));
    }
    Ok(())
}
