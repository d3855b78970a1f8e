use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use membrane_core::clement::corpus_row;
use membrane_core::constructions::{
    ansatz_bound, ansatz_grid, mollified_step_profile, oscillatory, regime_select, single_transition_profile,
    udelta_profile,
};
use membrane_core::energy::{evaluate_full, optimal_height, reduced_breakdown};
use membrane_core::minimizer::{minimize, MinimizeOptions};
use membrane_core::seminorm::{fit_coupling_constant, interpolation_report, udelta_family, InterpolationReport};
use membrane_core::sweep::report::emit_report;
use membrane_core::sweep::{classify, default_c_small, run_sweep, COUPLING_FIT_N};
use membrane_core::{
    builtin_well, constructions::supercritical_constant, DoubleWell, Error, Grid1D, Params, SampledField, StartKind,
    SweepConfig,
};
use serde::{Deserialize, Serialize};

use crate::{Cli, Command, ParamArgs, ProfileKind};

const DEFAULT_GRID_N: usize = 1024;

/// Maps an error chain to the process exit code.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::InvariantViolation(_)) => 3,
        Some(
            Error::Config(_)
            | Error::InvalidParameter(_)
            | Error::UnknownWell(_)
            | Error::InvalidGrid(_)
            | Error::Underresolved { .. }
            | Error::Degenerate(_)
            | Error::NotAdmissible(_)
            | Error::NonFinite(_),
        ) => 2,
        _ => 1,
    }
}

/// Fixed parameters for point commands; flags take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointConfig {
    well: Option<String>,
    b: Option<f64>,
    sigma: Option<f64>,
    kappa: Option<f64>,
    lambda: Option<f64>,
    grid_n: Option<usize>,
    seed: Option<u64>,
}

struct Resolved {
    params: Params,
    well: DoubleWell,
    grid_n: Option<usize>,
    seed: u64,
}

fn point_config(cli: &Cli) -> Result<PointConfig> {
    let Some(path) = &cli.config else {
        return Ok(PointConfig::default());
    };
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    Ok(toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?)
}

fn resolve(cli: &Cli, args: &ParamArgs, allow_degenerate: bool) -> Result<Resolved> {
    let cfg = point_config(cli)?;
    let pick = |flag: Option<f64>, file: Option<f64>, name: &str| -> Result<f64> {
        flag.or(file)
            .ok_or_else(|| Error::Config(format!("missing parameter `{name}` (flag --{name} or config key)")).into())
    };
    let b = pick(args.b, cfg.b, "b")?;
    let sigma = pick(args.sigma, cfg.sigma, "sigma")?;
    let kappa = pick(args.kappa, cfg.kappa, "kappa")?;
    let lambda = pick(args.lambda, cfg.lambda, "lambda")?;
    let params = if allow_degenerate {
        Params::probe(b, sigma, kappa, lambda)?
    } else {
        Params::new(b, sigma, kappa, lambda)?
    };
    let well_name = args.well.clone().or(cfg.well).unwrap_or_else(|| "quartic".into());
    Ok(Resolved {
        params,
        well: builtin_well(&well_name)?,
        grid_n: cli.grid_n.or(cfg.grid_n),
        seed: cli.seed.or(cfg.seed).unwrap_or(0),
    })
}

fn grid(n: usize) -> Result<Grid1D> {
    Ok(Grid1D::new(n)?)
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// `x,u,h` rows.
fn field_csv(u: &SampledField, h: &SampledField) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "u", "h"])?;
    for (j, x) in u.grid().points().enumerate() {
        w.serialize((x, u.values()[j], h.values()[j]))?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)?)
}

fn interpolation_csv(reports: &[InterpolationReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["s", "delta", "raw", "normalized"])?;
    for r in reports {
        for ((d, raw), norm) in r.delta_grid.iter().zip(&r.raw_ratio).zip(&r.normalized_ratio) {
            w.write_record([r.s, *d, *raw, *norm].map(|v| v.to_string()))?;
        }
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)?)
}

fn out_dir(cli: &Cli) -> Result<Option<PathBuf>> {
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            Ok(Some(dir.clone()))
        }
        None => Ok(None),
    }
}

fn read_input(path: &Path) -> Result<SampledField> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let col = rdr
        .headers()?
        .iter()
        .position(|h| h.trim() == "u")
        .ok_or_else(|| Error::Config(format!("{}: no `u` column", path.display())))?;
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let v: f64 = rec
            .get(col)
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|e| Error::Config(format!("{}: row {}: {e}", path.display(), i + 2)))?;
        values.push(v);
    }
    Ok(SampledField::new(grid(values.len())?, values)?)
}

#[allow(clippy::too_many_arguments)]
fn profile_field(
    kind: ProfileKind,
    p: &Params,
    w: &DoubleWell,
    g: Grid1D,
    n: Option<u32>,
    epsilon: Option<f64>,
    delta: Option<f64>,
    seed: u64,
) -> Result<SampledField> {
    let start = match kind {
        ProfileKind::Flat => StartKind::Flat,
        ProfileKind::SingleTransition => StartKind::SingleTransition,
        ProfileKind::Random => StartKind::Random { seed },
        ProfileKind::Oscillatory => {
            let (n0, e0) = regime_select(p, w)?;
            StartKind::Oscillatory {
                n: n.unwrap_or(n0),
                epsilon: epsilon.unwrap_or(e0),
            }
        }
        ProfileKind::Udelta => return Ok(udelta_profile(delta.unwrap_or(0.1)).sample_cells(g)),
        ProfileKind::MollifiedStep => {
            let eps = epsilon.unwrap_or(0.05);
            if !(eps > 0.0 && eps < 0.125) {
                return Err(Error::Config(format!("epsilon must lie in (0, 1/8), got {eps}")).into());
            }
            return Ok(mollified_step_profile(eps).sample_cells(g));
        }
    };
    start
        .field(g, p)
        .ok_or_else(|| Error::Config(format!("{start} is not representable on N = {}", g.n_samples())).into())
}

#[derive(Serialize)]
struct Evaluation {
    grid_n: usize,
    params: Params,
    well: String,
    reduced: membrane_core::energy::ReducedBreakdown,
    full: membrane_core::EnergyBreakdown,
    young_bound: f64,
}

#[derive(Serialize)]
struct MinimizeSummary<'a> {
    params: Params,
    well: &'a str,
    grid_n: usize,
    best_energy: f64,
    best_start: &'a StartKind,
    young_bound: f64,
    construction_energy: Option<f64>,
    converged_starts: usize,
    per_start: &'a [membrane_core::minimizer::StartOutcome],
}

#[derive(Serialize)]
struct Construction {
    kind: String,
    grid_n: usize,
    sampled: membrane_core::EnergyBreakdown,
    exact: Option<membrane_core::EnergyBreakdown>,
    bound: Option<f64>,
    n: Option<u32>,
    epsilon: Option<f64>,
    mu: Option<f64>,
}

#[derive(Serialize)]
struct Classification {
    params: Params,
    label: membrane_core::Regime,
    threshold: f64,
    lambda_squared: f64,
    c_small: f64,
    c_big: f64,
}

pub fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Evaluate {
            params,
            profile,
            n,
            epsilon,
            delta,
            input,
        } => {
            let r = resolve(cli, params, false)?;
            let u = match input {
                Some(path) => read_input(path)?,
                None => {
                    let g = grid(r.grid_n.unwrap_or(DEFAULT_GRID_N))?;
                    profile_field(*profile, &r.params, &r.well, g, *n, *epsilon, *delta, r.seed)?
                }
            };
            let h = optimal_height(&u, &r.params)?;
            let eval = Evaluation {
                grid_n: u.len(),
                params: r.params,
                well: r.well.name().to_string(),
                reduced: reduced_breakdown(&u, &r.params, &r.well)?,
                full: evaluate_full(&u, &h, &r.params, &r.well)?,
                young_bound: r.params.young_bound(),
            };
            if let Some(dir) = out_dir(cli)? {
                write_json(&dir.join("evaluation.json"), &eval)?;
                std::fs::write(dir.join("field.csv"), field_csv(&u, &h)?)?;
            }
            print_json(&eval)?;
        }
        Command::Minimize {
            params,
            random_starts,
            max_iters,
            tol_grad,
        } => {
            let r = resolve(cli, params, true)?;
            let n = r.grid_n.unwrap_or(DEFAULT_GRID_N);
            let mut opts = MinimizeOptions::standard(&r.params, &r.well, n, r.seed, *random_starts)?;
            if let Some(m) = max_iters {
                opts.max_iters = *m;
            }
            if let Some(t) = tol_grad {
                opts.tol_grad = *t;
            }
            let result = with_workers(cli.workers, || minimize(&r.params, &r.well, &opts))??;
            let summary = MinimizeSummary {
                params: r.params,
                well: r.well.name(),
                grid_n: n,
                best_energy: result.best_energy,
                best_start: &result.per_start[result.best_start].start,
                young_bound: r.params.young_bound(),
                construction_energy: result.construction_energy(),
                converged_starts: result.converged_starts(),
                per_start: &result.per_start,
            };
            if let Some(dir) = out_dir(cli)? {
                write_json(&dir.join("minimize.json"), &summary)?;
                std::fs::write(dir.join("field.csv"), field_csv(&result.best_u, &result.best_h)?)?;
            }
            print_json(&summary)?;
        }
        Command::Construct {
            params,
            kind,
            n,
            epsilon,
            delta,
        } => {
            let r = resolve(cli, params, true)?;
            let c = construct(cli, &r, *kind, *n, *epsilon, *delta)?;
            print_json(&c)?;
        }
        Command::Interpolate { s, deltas, well } => {
            let w = builtin_well(well.as_deref().unwrap_or("quartic"))?;
            let grid: Vec<f64> = if deltas.is_empty() {
                (0..12)
                    .map(|i| 1e-3 * (400f64).powf(i as f64 / 11.0))
                    .map(|d: f64| d.min(0.4))
                    .collect()
            } else {
                deltas.clone()
            };
            let family = udelta_family(&w);
            let reports = s
                .iter()
                .map(|&order| interpolation_report(&family, order, &grid))
                .collect::<membrane_core::Result<Vec<_>>>()?;
            if let Some(dir) = out_dir(cli)? {
                write_json(&dir.join("interpolation.json"), &reports)?;
                std::fs::write(dir.join("interpolation.csv"), interpolation_csv(&reports)?)?;
            }
            print_json(&reports)?;
        }
        Command::Clement { d, l, m, delta, well } => {
            let w = builtin_well(well.as_deref().unwrap_or("quartic"))?;
            let mut wtr = csv::Writer::from_writer(Vec::new());
            for &dim in d {
                for &cubes in l {
                    for &mm in m {
                        for &dl in delta {
                            wtr.serialize(corpus_row(dim, cubes, mm, dl, &w)?)?;
                        }
                    }
                }
            }
            let text = String::from_utf8(wtr.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)?;
            if let Some(dir) = out_dir(cli)? {
                std::fs::write(dir.join("clement.csv"), &text)?;
            }
            print!("{text}");
        }
        Command::Sweep => {
            let path = cli
                .config
                .as_ref()
                .ok_or_else(|| Error::Config("`sweep` needs --config <file>".into()))?;
            let mut cfg = SweepConfig::from_path(path)?;
            if let Some(n) = cli.grid_n {
                cfg.grid_n = n;
            }
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            if let Some(wk) = cli.workers {
                cfg.workers = wk;
            }
            let outcome = run_sweep(&cfg)?;
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
            let files = emit_report(&outcome, &dir)?;
            println!("{}", files.csv.display());
            println!("{}", files.summary.display());
            println!("{}", files.svg.display());
            if !outcome.violations.is_empty() {
                for v in &outcome.violations {
                    eprintln!("invariant violation: {v}");
                }
                return Ok(ExitCode::from(3));
            }
        }
        Command::Classify { params, c_small, c_big } => {
            let r = resolve(cli, params, false)?;
            let big = c_big.unwrap_or_else(|| supercritical_constant(&r.well));
            let small = match c_small {
                Some(c) => *c,
                None => default_c_small(&r.well, fit_coupling_constant(grid(COUPLING_FIT_N)?, &r.well)?.c_int),
            };
            let label = classify(&r.params, small, big)?;
            print_json(&Classification {
                params: r.params,
                label: label.label,
                threshold: label.threshold,
                lambda_squared: r.params.lambda * r.params.lambda,
                c_small: small,
                c_big: big,
            })?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(Error::Config("workers must be at least 1".into()).into()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
            Ok(pool.install(f))
        }
    }
}

fn construct(
    cli: &Cli,
    r: &Resolved,
    kind: ProfileKind,
    n: Option<u32>,
    epsilon: Option<f64>,
    delta: Option<f64>,
) -> Result<Construction> {
    let p = &r.params;
    let w = &r.well;
    let (u, h, sampled, exact, bound, n_out, eps_out, mu, g) = match kind {
        ProfileKind::Oscillatory => {
            let (n0, e0) = regime_select(p, w)?;
            let (n, eps) = (n.unwrap_or(n0), epsilon.unwrap_or(e0));
            let g = match r.grid_n {
                Some(m) => grid(m)?,
                None => ansatz_grid(n, eps),
            };
            let a = oscillatory(n, eps, p, g)?;
            let sampled = a.energy(p, w)?;
            let exact = a.exact_energy(p, w);
            let bound = Some(ansatz_bound(n, eps, p, w));
            (
                a.u.clone(),
                a.h.clone(),
                sampled,
                Some(exact),
                bound,
                Some(n),
                Some(eps),
                Some(a.mu),
                g,
            )
        }
        other => {
            let g = grid(r.grid_n.unwrap_or(DEFAULT_GRID_N))?;
            let u = match other {
                ProfileKind::SingleTransition => single_transition_profile(p.b).sample_cells(g),
                _ => profile_field(other, p, w, g, n, epsilon, delta, r.seed)?,
            };
            let h = if p.sigma == 0.0 && p.kappa == 0.0 {
                SampledField::zeros(g)
            } else {
                optimal_height(&u, p)?
            };
            let sampled = evaluate_full(&u, &h, p, w)?;
            (u, h, sampled, None, None, None, epsilon, None, g)
        }
    };
    let name = format!("{kind:?}").to_lowercase();
    let c = Construction {
        kind: name,
        grid_n: g.n_samples(),
        sampled,
        exact,
        bound,
        n: n_out,
        epsilon: eps_out,
        mu,
    };
    if let Some(dir) = out_dir(cli)? {
        std::fs::write(dir.join(format!("construction_{}.csv", c.kind)), field_csv(&u, &h)?)?;
        write_json(&dir.join(format!("construction_{}.json", c.kind)), &c)?;
    }
    Ok(c)
}
