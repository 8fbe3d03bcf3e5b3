//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::cell::OnceCell;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::Rng;

use viscolab::campanato::{best_affine, decay_profile, normalize, rescale_sequence, DecayConfig};
use viscolab::discretization::{Scheme, StencilConfig};
use viscolab::fixtures::{ConstantFamily, DirichletFamily, Fixture, OscillatingHarmonic};
use viscolab::mollification::{sandwich_check, stability_sweep};
use viscolab::rng::seeded;
use viscolab::solvers::{residual, solve_dirichlet, RelaxationConfig};
use viscolab::viscosity::{limit_stability_experiment, localization};
use viscolab::{Ball, EllipticOperator, EllipticityParams, Grid, GridFunction, SymMatrix};

type Check = std::result::Result<String, String>;

struct Ctx {
    root: PathBuf,
    obstacle: OnceCell<std::result::Result<PathBuf, String>>,
    harmonic_fine: OnceCell<GridFunction>,
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_viscolab")
}

fn run_cli(args: &[&str]) -> std::result::Result<i32, String> {
    let out = Command::new(bin()).args(args).output().map_err(|e| e.to_string())?;
    Ok(out.status.code().unwrap_or(-1))
}

fn manifest(dir: &Path) -> BTreeMap<String, String> {
    fs::read_to_string(dir.join("manifest.txt"))
        .unwrap_or_default()
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_owned(), v.to_owned()))
        .collect()
}

fn num(m: &BTreeMap<String, String>, key: &str) -> std::result::Result<f64, String> {
    m.get(key)
        .ok_or_else(|| format!("manifest lacks {key}"))?
        .parse()
        .map_err(|e| format!("{key}: {e}"))
}

fn square(nodes: usize) -> Grid {
    Fixture::grid(2, nodes).unwrap()
}

fn builtin_operators() -> Vec<EllipticOperator> {
    let p = EllipticityParams::new(1.0, 2.0).unwrap();
    let a = SymMatrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
    let b = SymMatrix::from_rows(&[vec![1.0, -0.3], vec![-0.3, 1.5]]).unwrap();
    vec![
        EllipticOperator::trace(),
        EllipticOperator::linear(a.clone()).unwrap(),
        EllipticOperator::pucci_max(p),
        EllipticOperator::pucci_min(p),
        EllipticOperator::max_of_linear(vec![a, b], EllipticityParams::new(0.5, 2.5).unwrap()).unwrap(),
    ]
}

fn criterion_1(_: &Ctx) -> Check {
    let mut worst: f64 = 0.0;
    let mut fails = Vec::new();
    for op in builtin_operators() {
        let dims = op.fixed_dim().map_or(vec![2, 3], |n| vec![n]);
        for n in dims {
            let e = op.check_uniform_ellipticity(n, 10_000, 7);
            let h = op.check_homogeneity(n, 10_000, 7);
            worst = worst.max(e.worst_ratio).max(h.worst_ratio);
            if !e.pass || !h.pass {
                fails.push(format!("{op} n={n}"));
            }
        }
    }
    let detail = format!("worst violation/tolerance {worst:.2e}");
    if fails.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; failing {}", fails.join(", ")))
    }
}

/// Exact values where the stencil does not fit, `interior` elsewhere.
fn seeded_boundary(op: &EllipticOperator, exact: &GridFunction, interior: impl Fn(usize) -> f64) -> GridFunction {
    let g = exact.grid();
    let scheme = Scheme::new(op, g, StencilConfig::default()).unwrap();
    GridFunction::new(
        g.clone(),
        (0..g.len()).map(|i| if scheme.fits(i) { interior(i) } else { exact.get(i) }).collect(),
    )
    .unwrap()
}

fn criterion_2(_: &Ctx) -> Check {
    let g = square(33);
    let mut worst_res = 0.0f64;
    for op in builtin_operators() {
        for fx in [Fixture::Harmonic, Fixture::Quad] {
            let exact = fx.sample(&g).unwrap();
            let rhs = op.eval(&fx.exact_hessian(2).unwrap()).unwrap();
            let f = GridFunction::constant(&g, rhs).unwrap();
            let seed = seeded_boundary(&op, &exact, |_| 0.0);
            let cfg = RelaxationConfig::standard(&g, &op);
            let sol = solve_dirichlet(&op, &f, &seed, &cfg).map_err(|e| format!("{op} {fx}: {e}"))?;
            let r = residual(&op, &sol.u, &f, cfg.stencil()).unwrap().max_abs();
            worst_res = worst_res.max(r / sol.tolerance);
            if r > sol.tolerance {
                return Err(format!("{op} {fx}: residual {r:e} > {:e}", sol.tolerance));
            }
            if matches!(op.to_string().as_str(), "trace") || op.to_string().starts_with("linear") {
                let err = sol.u.sup_distance(&exact);
                if err > 1e-6 {
                    return Err(format!("{op} {fx}: compact scheme misses the quadratic by {err:e}"));
                }
            }
        }
    }
    let op = EllipticOperator::trace();
    let mut errors = Vec::new();
    for res in [33, 65, 129] {
        let g = square(res);
        let exact = GridFunction::from_fn(&g, |x| x[0].sin() * x[1].sin()).unwrap();
        let f = exact.map(|v| -2.0 * v).unwrap();
        let seed = seeded_boundary(&op, &exact, |i| exact.get(i));
        let sol = solve_dirichlet(&op, &f, &seed, &RelaxationConfig::standard(&g, &op)).map_err(|e| e.to_string())?;
        errors.push(sol.u.sup_distance(&exact));
    }
    let r1 = errors[0] / errors[1];
    let r2 = errors[1] / errors[2];
    let detail = format!(
        "quadratics within residual tolerance (worst {worst_res:.2}); errors {:.3e} {:.3e} {:.3e}, ratios {r1:.2} {r2:.2}",
        errors[0], errors[1], errors[2]
    );
    if r1 >= 3.5 && r2 >= 3.5 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn obstacle_dir(ctx: &Ctx) -> std::result::Result<PathBuf, String> {
    ctx.obstacle
        .get_or_init(|| {
            let dir = ctx.root.join("obstacle");
            let code = run_cli(&["obstacle", "--res", "129", "--fixture", "disc", "--out", dir.to_str().unwrap()])?;
            if code == 0 {
                Ok(dir)
            } else {
                Err(format!("obstacle exited {code}"))
            }
        })
        .clone()
}

fn criterion_3(ctx: &Ctx) -> Check {
    let dir = obstacle_dir(ctx)?;
    let m = manifest(&dir);
    let visc = ctx.root.join("visc");
    let input = dir.join("solution.grid");
    let code = run_cli(&["visc", "--input", input.to_str().unwrap(), "--out", visc.to_str().unwrap()])?;
    let v = manifest(&visc);
    let frac = num(&m, "contact_fraction")?;
    let same = v.get("bounds_lo") == m.get("bounds_lo") && v.get("bounds_hi") == m.get("bounds_hi");
    let detail = format!(
        "visc exit {code} ({}), bounds [{}, {}], contact fraction {:.2}%",
        v.get("check_scheme").map_or("?", String::as_str),
        m["bounds_lo"],
        m["bounds_hi"],
        100.0 * frac
    );
    if code == 0 && same && v.get("check_scheme").map(String::as_str) == Some("pointwise") && frac >= 0.05 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_4(_: &Ctx) -> Check {
    let trace = EllipticOperator::trace();
    let st = StencilConfig::default();
    let g = square(33);
    let constant = ConstantFamily {
        u: Fixture::Quad.sample(&g).unwrap(),
        lambda: 2.0,
    };
    let mut families = Vec::new();
    families.push(("constant", limit_stability_experiment(&constant, 5, &trace, st)));
    let osc = OscillatingHarmonic { grid: square(65) };
    families.push(("oscillating", limit_stability_experiment(&osc, 10, &trace, st)));
    let dir = DirichletFamily::new(&g, trace.clone()).unwrap();
    families.push(("dirichlet", limit_stability_experiment(&dir, 5, &trace, st)));
    for (name, r) in &families {
        match r {
            Ok(r) if r.pass && r.lambda_monotone => {}
            Ok(r) => return Err(format!("{name} family failed: {r:?}")),
            Err(e) => return Err(format!("{name} family: {e}")),
        }
    }

    let g = square(65);
    let u = Fixture::Harmonic.sample(&g).unwrap();
    let mut rng = seeded(11);
    let mut witnesses = 0;
    for _ in 0..5 {
        let x0 = g.flat_index(&[rng.gen_range(20..45), rng.gen_range(20..45)]);
        let c = g.point(x0);
        let phi = GridFunction::from_fn(&g, |x| {
            let d2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
            x[0] * x[0] - x[1] * x[1] - 0.5 * d2
        })
        .unwrap();
        let region = Ball::new(c.clone(), 0.35).unwrap();
        for k in 1..=20 {
            let kf = k as f64;
            for power in [2, 3] {
                let uk = GridFunction::from_fn(&g, |x| {
                    x[0] * x[0] - x[1] * x[1] + (kf * x[0] + c[1]).sin() / kf.powi(power)
                })
                .unwrap();
                let rep = localization(&phi, &u, &uk, x0, &region).map_err(|e| e.to_string())?;
                witnesses += rep.witnesses.len();
                if !rep.holds {
                    return Err(format!("localization fails at k = {k}"));
                }
            }
        }
    }
    Ok(format!("three families pass; localization holds for {witnesses} near-maximizers, k = 1..20"))
}

/// Exact 1D minimax: the optimum slope is an edge slope of the convex hull.
fn oracle_1d(x: &[f64], v: &[f64]) -> f64 {
    let mut pts: Vec<(f64, f64)> = x.iter().copied().zip(v.iter().copied()).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
    }
    let osc = |q: f64| {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (a, b) in x.iter().zip(v) {
            let r = b - q * a;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        hi - lo
    };
    hull.windows(2)
        .filter(|w| w[1].0 != w[0].0)
        .map(|w| osc((w[1].1 - w[0].1) / (w[1].0 - w[0].0)))
        .fold(osc(0.0), f64::min)
}

/// 2D minimax: dense grid search over `q₁`, golden-section refinement, exact
/// 1D inner problem over `q₂`.
fn oracle_2d(pts: &[[f64; 2]], v: &[f64]) -> f64 {
    let x2: Vec<f64> = pts.iter().map(|p| p[1]).collect();
    let inner = |q1: f64| {
        let w: Vec<f64> = pts.iter().zip(v).map(|(p, b)| b - q1 * p[0]).collect();
        oracle_1d(&x2, &w)
    };
    let spread = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min);
    let width = pts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max)
        - pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
    let l = 2.0 * spread / width + 1.0;
    let steps = 400;
    let dq = 2.0 * l / steps as f64;
    let best = (0..=steps)
        .map(|i| (i, inner(-l + i as f64 * dq)))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap()
        .0;
    let (mut a, mut b) = (-l + (best as f64 - 1.0) * dq, -l + (best as f64 + 1.0) * dq);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (inner(c), inner(d));
    while b - a > 1e-13 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = inner(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = inner(d);
        }
    }
    fc.min(fd).min(inner(0.5 * (a + b)))
}

fn random_fixture(rng: &mut impl Rng, g: &Grid) -> GridFunction {
    let c: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let w = rng.gen_range(1.0..6.0);
    let kink = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
    GridFunction::from_fn(g, |x| {
        let y = x.get(1).copied().unwrap_or(0.0);
        c[0] + c[1] * x[0] + c[2] * y + c[3] * x[0] * x[0] + c[4] * x[0] * y + c[5] * (w * (x[0] - y)).sin()
            + c[6] * x[0] * x[0] * x[0]
            + c[7] * ((x[0] - kink[0]).powi(2) + (y - kink[1]).powi(2)).sqrt()
    })
    .unwrap()
}

fn criterion_5(_: &Ctx) -> Check {
    let mut rng = seeded(5);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let two_d = case % 2 == 1;
        let (g, n) = if two_d {
            (Grid::cube(2, -1.5, 1.5, 61).unwrap(), 2)
        } else {
            (Grid::cube(1, -1.5, 1.5, 601).unwrap(), 1)
        };
        let u = random_fixture(&mut rng, &g);
        let r = 0.1 * 10f64.powf(case as f64 / 49.0);
        let center: Vec<f64> = (0..n).map(|_| rng.gen_range(-(1.45 - r)..(1.45 - r))).collect();
        let ball = Ball::new(center, r).unwrap();
        let fit = best_affine(&u, &ball).map_err(|e| format!("case {case}: {e}"))?;
        let nodes = g.ball_nodes(&ball).unwrap();
        let vals: Vec<f64> = nodes.iter().map(|&i| u.get(i)).collect();
        let oracle = if two_d {
            let pts: Vec<[f64; 2]> = nodes.iter().map(|&i| { let p = g.point(i); [p[0], p[1]] }).collect();
            oracle_2d(&pts, &vals)
        } else {
            let xs: Vec<f64> = nodes.iter().map(|&i| g.point(i)[0]).collect();
            oracle_1d(&xs, &vals)
        };
        let diff = (fit.osc_value - oracle).abs() / oracle.max(1.0);
        worst = worst.max(diff);
        if diff > 1e-9 {
            return Err(format!("case {case} (n={n}, r={r:.3}): lp {:.15e} oracle {oracle:.15e}", fit.osc_value));
        }
    }
    Ok(format!("50 fixtures, radii 0.1..1, worst relative gap {worst:.1e}"))
}

fn harmonic_fine(ctx: &Ctx) -> &GridFunction {
    ctx.harmonic_fine.get_or_init(|| {
        let g = square(2049);
        let exact = Fixture::Harmonic.sample(&g).unwrap();
        let f = GridFunction::constant(&g, 0.0).unwrap();
        let op = EllipticOperator::trace();
        solve_dirichlet(&op, &f, &exact, &RelaxationConfig::standard(&g, &op)).unwrap().u
    })
}

fn criterion_6(ctx: &Ctx) -> Check {
    let g = square(129);
    let cfg = DecayConfig::with(0.25, 0.5, 3).unwrap();
    let origin = [0.0, 0.0];
    let holder = decay_profile(&Fixture::RadialHolder(0.5).sample(&g).unwrap(), &origin, &cfg, 1.0)
        .map_err(|e| e.to_string())?;
    let quad = decay_profile(&Fixture::Quad.sample(&g).unwrap(), &origin, &cfg, 1.0).map_err(|e| e.to_string())?;
    let deep = DecayConfig::with(0.25, 0.5, 5).unwrap();
    let harm = decay_profile(harmonic_fine(ctx), &origin, &deep, 1.0).map_err(|e| e.to_string())?;
    let chain = harm.chain();
    let worst = chain.iter().map(|c| c.phi / c.bound).fold(0.0, f64::max);
    let detail = format!(
        "radial-holder beta_hat {:.4}, quad beta_hat {:.4}, harmonic chain over {} levels (worst phi/bound {worst:.3})",
        holder.beta_hat,
        quad.beta_hat,
        chain.len()
    );
    let ok = (holder.beta_hat - 0.5).abs() <= 0.05
        && (quad.beta_hat - 1.0).abs() <= 0.02
        && chain.len() >= 5
        && chain.iter().all(|c| c.holds);
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_7(ctx: &Ctx) -> Check {
    let u = harmonic_fine(ctx);
    let cfg = DecayConfig::with(0.25, 0.5, 5).unwrap();
    let nz = normalize(u, &[0.0, 0.0], 1.0, 0.0, cfg.eps()).map_err(|e| e.to_string())?;
    let scaled = u.map(|v| v / nz.kappa).unwrap();
    let seq = rescale_sequence(&scaled, &cfg, 5).map_err(|e| e.to_string())?;
    let worst_osc = seq.states.iter().map(|s| s.osc_unit).fold(0.0, f64::max);
    if worst_osc >= 1.0 {
        return Err(format!("osc_unit reaches {worst_osc}"));
    }

    let g = square(129);
    let disc = obstacle_dir(ctx)?.join("solution.grid");
    let disc = GridFunction::read_text(std::io::BufReader::new(fs::File::open(disc).map_err(|e| e.to_string())?))
        .map_err(|e| e.to_string())?;
    let cases = [
        ("harmonic", Fixture::Harmonic.sample(&g).unwrap(), 0.0),
        ("quad", Fixture::Quad.sample(&g).unwrap(), 2.0),
        ("kink", Fixture::Kink.sample(&g).unwrap(), 1.0),
        ("radial-holder:0.5", Fixture::RadialHolder(0.5).sample(&g).unwrap(), 1.0),
        ("disc", disc, 4.0),
    ];
    for (name, u, lam) in cases {
        for r in [0.25, 0.5, 1.0] {
            let nz = normalize(&u, &[0.0, 0.0], r, lam, 1e-3).map_err(|e| format!("{name}: {e}"))?;
            if !(nz.osc_ok && nz.eps_ok) {
                return Err(format!("{name} at R={r}: osc {} bound {}", nz.osc_unit, nz.inherited_bound));
            }
        }
    }
    Ok(format!(
        "{} resolvable levels, max osc_unit {worst_osc:.3}; normalize holds on 5 fixtures",
        seq.states.len() - 1
    ))
}

fn criterion_8(ctx: &Ctx) -> Check {
    let dir = obstacle_dir(ctx)?;
    let m = manifest(&dir);
    let u = GridFunction::read_text(std::io::BufReader::new(
        fs::File::open(dir.join("solution.grid")).map_err(|e| e.to_string())?,
    ))
    .map_err(|e| e.to_string())?;
    let g = u.grid().clone();
    let h = g.h();
    let id = SymMatrix::identity(2);
    let f1 = GridFunction::constant(&g, num(&m, "bounds_lo")?).unwrap();
    let f2 = GridFunction::constant(&g, num(&m, "bounds_hi")?).unwrap();
    let sandwich = sandwich_check(&u, &id, &f1, &f2, 8.0 * h, None).map_err(|e| e.to_string())?;
    let schedule: Vec<f64> = [24.0, 16.0, 12.0, 8.0].iter().map(|k| k * h).collect();
    let mut ratios = Vec::new();
    for p in [2.0, 4.0] {
        let s = stability_sweep(&u, &id, &f1, &f2, &schedule, p, 0.5).map_err(|e| e.to_string())?;
        ratios.push(("disc", p, s.ratio));
        let quad = Fixture::Quad.sample(&g).unwrap();
        let two = GridFunction::constant(&g, 2.0).unwrap();
        let s = stability_sweep(&quad, &id, &two, &two, &schedule, p, 0.5).map_err(|e| e.to_string())?;
        ratios.push(("quad", p, s.ratio));
    }
    let kink = Fixture::Kink.sample(&g).unwrap();
    let one = GridFunction::constant(&g, 1.0).unwrap();
    let minus = GridFunction::constant(&g, -1.0).unwrap();
    let ks = stability_sweep(&kink, &id, &minus, &one, &schedule, 4.0, 0.5).map_err(|e| e.to_string())?;
    let growth = ks.growth();
    let bounded = ratios.iter().all(|r| r.2 <= 2.0);
    let detail = format!(
        "sandwich {} (worst margins {:.2e}/{:.2e}); bounded ratios {}; kink growth {growth:.3} (needs >= 4)",
        if sandwich.pass { "pass" } else { "fail" },
        sandwich.worst_lower,
        sandwich.worst_upper,
        ratios
            .iter()
            .map(|(n, p, r)| format!("{n}@p{p}={r:.3}"))
            .collect::<Vec<_>>()
            .join(" ")
    );
    if sandwich.pass && bounded && growth >= 4.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_9(ctx: &Ctx) -> Check {
    let runs: Vec<Vec<&str>> = vec![
        vec!["props", "--op", "pucci+:1,2", "--seed", "7"],
        vec!["solve", "--fixture", "quad", "--op", "pucci-:1,2", "--res", "33"],
        vec!["obstacle", "--fixture", "disc", "--res", "33"],
        vec!["visc", "--fixture", "kink", "--res", "33", "--bounds", "0,inf"],
        vec!["campanato", "--fixture", "radial-holder:0.5", "--res", "129"],
        vec!["mollify", "--fixture", "quad", "--res", "129"],
        vec!["limit", "--res", "33", "--levels", "4"],
    ];
    let mut compared = 0;
    for (i, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let dir = ctx.root.join(format!("det-{i}-{rep}"));
            let mut full = args.clone();
            let d = dir.to_str().unwrap().to_owned();
            full.extend(["--out", d.as_str()]);
            let code = run_cli(&full)?;
            if code == 2 || code == 3 {
                return Err(format!("`{}` exited {code}", args.join(" ")));
            }
            let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&dir)
                .map_err(|e| e.to_string())?
                .filter_map(|e| e.ok())
                .map(|e| e.path())
                .filter(|p| p.extension().is_some_and(|x| x == "csv" || x == "grid"))
                .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
                .collect();
            files.sort();
            outputs.push(files);
        }
        if outputs[0].is_empty() || outputs[0] != outputs[1] {
            return Err(format!("`{}` artifacts differ between runs", args.join(" ")));
        }
        compared += outputs[0].len();
    }
    Ok(format!("{} commands, {compared} artifacts byte-identical across two runs", runs.len()))
}

fn main() {
    let root = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(format!("acceptance-{}", std::process::id()));
    fs::create_dir_all(&root).unwrap();
    let ctx = Ctx {
        root: root.clone(),
        obstacle: OnceCell::new(),
        harmonic_fine: OnceCell::new(),
    };
    let criteria: [(&str, fn(&Ctx) -> Check); 9] = [
        ("operator axioms", criterion_1),
        ("scheme exactness and convergence", criterion_2),
        ("inequality manufacture", criterion_3),
        ("limit stability", criterion_4),
        ("affine-fit oracle equivalence", criterion_5),
        ("decay-exponent recovery", criterion_6),
        ("blow-up bookkeeping", criterion_7),
        ("mollified estimate", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = f(&ctx);
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {} {name}: PASS [{secs:.1}s] {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {} {name}: FAIL [{secs:.1}s] {d}", i + 1);
            }
        }
    }
    let _ = fs::remove_dir_all(&root);
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
