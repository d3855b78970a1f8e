//! Multi-start projected-gradient minimization of the reduced functional
//! over `{u : |u| ≤ 1, ∫u = 0}`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructions::{oscillatory_amplitude, oscillatory_profile, regime_select, single_transition_profile};
use crate::energy::{optimal_height, ReducedFunctional, ADMISSIBILITY_TOL};
use crate::error::{Error, Result};
use crate::grid::{fft_forward, fft_inverse, project_box_mean, Grid1D, SampledField};
use crate::params::Params;
use crate::potential::DoubleWell;

/// Initial field for one descent run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StartKind {
    Flat,
    SingleTransition,
    Oscillatory { n: u32, epsilon: f64 },
    Random { seed: u64 },
}

impl std::fmt::Display for StartKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StartKind::Flat => write!(f, "flat"),
            StartKind::SingleTransition => write!(f, "single_transition"),
            StartKind::Oscillatory { n, epsilon } => write!(f, "oscillatory(n={n}, eps={epsilon})"),
            StartKind::Random { seed } => write!(f, "random(seed={seed})"),
        }
    }
}

/// Highest mode of random starts.
const RANDOM_MODES: usize = 16;

impl StartKind {
    /// Admissible starting field on `grid`. `None` if the start cannot be
    /// represented (too many oscillations for the grid).
    pub fn field(&self, grid: Grid1D, p: &Params) -> Option<SampledField> {
        let n = grid.n_samples();
        let raw = match self {
            StartKind::Flat => vec![0.0; n],
            StartKind::SingleTransition => single_transition_profile(p.b).cell_averages(grid),
            StartKind::Oscillatory { n: osc, epsilon } => {
                if *osc == 0 || 8 * *osc as usize > n || !(*epsilon > 0.0 && *epsilon <= 1.0) {
                    return None;
                }
                let mu = oscillatory_amplitude(*osc, *epsilon, p);
                oscillatory_profile(*osc, *epsilon, mu).u.cell_averages(grid)
            }
            StartKind::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let modes = RANDOM_MODES.min(n / 4);
                let coeffs: Vec<(f64, f64)> = (1..=modes)
                    .map(|k| {
                        let a = rng.random_range(-1.0..1.0) / k as f64;
                        let phase = rng.random_range(0.0..std::f64::consts::TAU);
                        (a, phase)
                    })
                    .collect();
                let mut v: Vec<f64> = grid
                    .points()
                    .map(|x| {
                        coeffs
                            .iter()
                            .enumerate()
                            .map(|(i, (a, ph))| a * (std::f64::consts::TAU * (i + 1) as f64 * x + ph).cos())
                            .sum()
                    })
                    .collect();
                let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                if max > 0.0 {
                    let scale = 1.5 / max;
                    v.iter_mut().for_each(|x| *x *= scale);
                }
                v
            }
        };
        SampledField::new(grid, project_box_mean(&raw)).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    pub grid_n: usize,
    pub max_iters: usize,
    /// First trial step; non-positive selects the inverse-Lipschitz guess.
    pub step_init: f64,
    pub armijo_c: f64,
    /// Stop once the projected-gradient norm falls below this.
    pub tol_grad: f64,
    pub starts: Vec<StartKind>,
}

pub const DEFAULT_MAX_ITERS: usize = 20_000;
pub const DEFAULT_TOL_GRAD: f64 = 1e-6;
pub const DEFAULT_RANDOM_STARTS: usize = 3;

impl MinimizeOptions {
    /// The standard start set: flat, single transition, the regime-selected
    /// oscillation and its four neighbours, and `random_starts` seeded fields.
    pub fn standard(p: &Params, w: &DoubleWell, grid_n: usize, seed: u64, random_starts: usize) -> Result<Self> {
        let mut starts = vec![StartKind::Flat, StartKind::SingleTransition];
        if p.kappa > 0.0 {
            let (n, eps) = regime_select(p, w)?;
            starts.push(StartKind::Oscillatory { n, epsilon: eps });
            starts.push(StartKind::Oscillatory { n: n + 1, epsilon: eps });
            if n > 1 {
                starts.push(StartKind::Oscillatory { n: n - 1, epsilon: eps });
            } else {
                starts.push(StartKind::Oscillatory { n: n + 2, epsilon: eps });
            }
            starts.push(StartKind::Oscillatory {
                n,
                epsilon: (2.0 * eps).min(1.0),
            });
            starts.push(StartKind::Oscillatory { n, epsilon: 0.5 * eps });
        }
        starts.extend((0..random_starts as u64).map(|i| StartKind::Random {
            seed: seed.wrapping_add(i),
        }));
        Ok(MinimizeOptions {
            grid_n,
            max_iters: DEFAULT_MAX_ITERS,
            step_init: 0.0,
            armijo_c: 1e-4,
            tol_grad: DEFAULT_TOL_GRAD,
            starts,
        })
    }

    pub fn validate(&self) -> Result<Grid1D> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        if !(self.tol_grad > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tol_grad must be positive, got {}",
                self.tol_grad
            )));
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "armijo_c must lie in (0, 1), got {}",
                self.armijo_c
            )));
        }
        if self.starts.is_empty() {
            return Err(Error::InvalidParameter("at least one start is required".into()));
        }
        Grid1D::new(self.grid_n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartOutcome {
    pub start: StartKind,
    /// Energy of the projected start; `None` if the start was skipped.
    pub initial_energy: Option<f64>,
    pub final_energy: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub projected_gradient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeResult {
    pub best_energy: f64,
    pub best_start: usize,
    pub best_u: SampledField,
    pub best_h: SampledField,
    pub per_start: Vec<StartOutcome>,
}

impl MinimizeResult {
    pub fn converged_starts(&self) -> usize {
        self.per_start.iter().filter(|s| s.converged).count()
    }

    /// Lowest energy among the non-random starts before descent.
    pub fn construction_energy(&self) -> Option<f64> {
        self.per_start
            .iter()
            .filter(|s| !matches!(s.start, StartKind::Random { .. }))
            .filter_map(|s| s.initial_energy)
            .reduce(f64::min)
    }
}

/// L² gradient of the reduced energy.
pub fn gradient_reduced(u: &SampledField, p: &Params, w: &DoubleWell) -> Result<SampledField> {
    u.ensure_admissible(ADMISSIBILITY_TOL)?;
    let f = ReducedFunctional::new(u.len(), p, w)?;
    let (_, g) = f.energy_and_gradient(u.values());
    SampledField::new(u.grid(), g)
}

fn inner(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / a.len() as f64
}

/// `‖u - P(u - α g)‖ / α`.
fn projected_gradient_norm(u: &[f64], g: &[f64], alpha: f64) -> f64 {
    let trial: Vec<f64> = u.iter().zip(g).map(|(x, d)| x - alpha * d).collect();
    let p = project_box_mean(&trial);
    let diff: Vec<f64> = u.iter().zip(&p).map(|(a, b)| a - b).collect();
    inner(&diff, &diff).sqrt() / alpha
}

/// Iterations without relative energy change before a run is declared stalled.
const STALL_WINDOW: usize = 50;
const STALL_RTOL: f64 = 1e-15;
/// Slack on per-step energy monotonicity.
const MONOTONE_SLACK: f64 = 1e-12;

struct Descent {
    u: Vec<f64>,
    energy: f64,
    iterations: usize,
    converged: bool,
    projected_gradient: f64,
}

/// Diagonal Fourier preconditioner `M_k = 1 + max(q_k, 0) / W''_max`, which
/// removes the stiffness of the exchange term.
struct Preconditioner {
    inv: Vec<f64>,
    diag: Vec<f64>,
    /// Safe first step in the preconditioned metric.
    alpha: f64,
}

impl Preconditioner {
    fn new(f: &ReducedFunctional, curvature: f64) -> Self {
        let tau = 1.0 / curvature.max(1e-12);
        let diag: Vec<f64> = f.multipliers().iter().map(|q| 1.0 + tau * q.max(0.0)).collect();
        let lipschitz = f
            .multipliers()
            .iter()
            .zip(&diag)
            .map(|(q, m)| (curvature + q.abs()) / m)
            .fold(0.0, f64::max);
        Preconditioner {
            inv: diag.iter().map(|m| 1.0 / m).collect(),
            diag,
            alpha: 0.5 / lipschitz.max(1e-300),
        }
    }

    fn scale(&self, v: &[f64], weights: &[f64]) -> Vec<f64> {
        let n = v.len() as f64;
        let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        fft_forward(&mut buf);
        for (c, w) in buf.iter_mut().zip(weights) {
            *c *= w / n;
        }
        fft_inverse(&mut buf);
        buf.iter().map(|c| c.re).collect()
    }

    fn apply_inverse(&self, g: &[f64]) -> Vec<f64> {
        self.scale(g, &self.inv)
    }

    fn apply(&self, s: &[f64]) -> Vec<f64> {
        self.scale(s, &self.diag)
    }
}

/// Backtracks `P(u - t d)` from `t = t0` until the Armijo condition holds.
#[allow(clippy::too_many_arguments)]
fn armijo_search(
    f: &ReducedFunctional,
    u: &[f64],
    e: f64,
    g: &[f64],
    d: &[f64],
    t0: f64,
    t_min: f64,
    c: f64,
) -> Option<(Vec<f64>, f64, f64)> {
    let mut t = t0;
    while t >= t_min {
        let trial: Vec<f64> = u.iter().zip(d).map(|(x, di)| x - t * di).collect();
        let cand = project_box_mean(&trial);
        let dir: Vec<f64> = cand.iter().zip(u).map(|(a, b)| a - b).collect();
        let slope = inner(g, &dir);
        if slope < 0.0 {
            let e_cand = f.energy(&cand);
            if e_cand <= e + c * slope {
                return Some((cand, e_cand, t));
            }
        }
        t *= 0.5;
    }
    None
}

fn descend(
    f: &ReducedFunctional,
    pre: &Preconditioner,
    u0: Vec<f64>,
    opts: &MinimizeOptions,
    alpha0: f64,
) -> Result<Descent> {
    let (mut e, mut g) = f.energy_and_gradient(&u0);
    let mut u = u0;
    let mut alpha = if opts.step_init > 0.0 {
        opts.step_init
    } else {
        pre.alpha
    };
    let mut stall = 0;
    let mut pg = projected_gradient_norm(&u, &g, alpha0);
    let mut iterations = 0;
    while iterations < opts.max_iters {
        if pg < opts.tol_grad {
            return Ok(Descent {
                u,
                energy: e,
                iterations,
                converged: true,
                projected_gradient: pg,
            });
        }
        iterations += 1;
        let d = pre.apply_inverse(&g);
        let accepted = armijo_search(f, &u, e, &g, &d, alpha, pre.alpha * 1e-6, opts.armijo_c)
            // plain projected gradient keeps the stationarity guarantee
            .or_else(|| armijo_search(f, &u, e, &g, &g, alpha0, alpha0 * 1e-12, opts.armijo_c));
        let Some((u_new, e_new, _)) = accepted else {
            break;
        };
        if e_new > e + MONOTONE_SLACK * e.abs().max(1.0) {
            return Err(Error::InvariantViolation(format!(
                "energy increased from {e} to {e_new}"
            )));
        }
        let (_, g_new) = f.energy_and_gradient(&u_new);
        let s: Vec<f64> = u_new.iter().zip(&u).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = inner(&s, &y);
        // Barzilai–Borwein step in the preconditioned metric
        alpha = if sy > 0.0 {
            (inner(&s, &pre.apply(&s)) / sy).clamp(pre.alpha, 1e6 * pre.alpha)
        } else {
            (2.0 * alpha).min(1e6 * pre.alpha)
        };
        if (e - e_new).abs() <= STALL_RTOL * e.abs().max(1.0) {
            stall += 1;
        } else {
            stall = 0;
        }
        u = u_new;
        e = e_new;
        g = g_new;
        pg = projected_gradient_norm(&u, &g, alpha0);
        if stall >= STALL_WINDOW {
            break;
        }
    }
    let converged = pg < opts.tol_grad;
    Ok(Descent {
        u,
        energy: e,
        iterations,
        converged,
        projected_gradient: pg,
    })
}

/// Runs every start (in parallel, merged in start order) and keeps the best.
pub fn minimize(p: &Params, w: &DoubleWell, opts: &MinimizeOptions) -> Result<MinimizeResult> {
    if p.kappa <= 0.0 || p.b <= 0.0 {
        return Err(Error::Degenerate(
            "minimization needs b > 0 and kappa > 0; use the construction probes".into(),
        ));
    }
    let grid = opts.validate()?;
    let f = ReducedFunctional::new(grid.n_samples(), p, w)?;
    let alpha0 = 1.0 / (w.curvature_bound() + 2.0 * f.multiplier_bound());
    let pre = Preconditioner::new(&f, w.curvature_bound());
    let runs: Vec<Result<(StartOutcome, Option<Vec<f64>>)>> = opts
        .starts
        .par_iter()
        .map(|start| {
            let Some(u0) = start.field(grid, p) else {
                return Ok((
                    StartOutcome {
                        start: start.clone(),
                        initial_energy: None,
                        final_energy: None,
                        iterations: 0,
                        converged: false,
                        projected_gradient: f64::NAN,
                    },
                    None,
                ));
            };
            let u0 = u0.into_values();
            let e0 = f.energy(&u0);
            let d = descend(&f, &pre, u0, opts, alpha0)?;
            if d.energy > e0 + MONOTONE_SLACK * e0.abs().max(1.0) {
                return Err(Error::InvariantViolation(format!(
                    "descent from {start} worsened {e0} to {}",
                    d.energy
                )));
            }
            Ok((
                StartOutcome {
                    start: start.clone(),
                    initial_energy: Some(e0),
                    final_energy: Some(d.energy),
                    iterations: d.iterations,
                    converged: d.converged,
                    projected_gradient: d.projected_gradient,
                },
                Some(d.u),
            ))
        })
        .collect();
    let mut per_start = Vec::with_capacity(runs.len());
    let mut best: Option<(usize, f64, Vec<f64>)> = None;
    for (i, run) in runs.into_iter().enumerate() {
        let (outcome, u) = run?;
        if let (Some(e), Some(u)) = (outcome.final_energy, u) {
            if best.as_ref().is_none_or(|(_, be, _)| e < *be) {
                best = Some((i, e, u));
            }
        }
        per_start.push(outcome);
    }
    let (best_start, best_energy, u) =
        best.ok_or_else(|| Error::InvalidParameter(format!("no start is representable on N = {}", grid.n_samples())))?;
    if best_energy < p.young_bound() - 1e-6 {
        return Err(Error::InvariantViolation(format!(
            "best energy {best_energy} is below the Young bound {}",
            p.young_bound()
        )));
    }
    let best_u = SampledField::new(grid, u)?;
    best_u.ensure_admissible(ADMISSIBILITY_TOL)?;
    let best_h = optimal_height(&best_u, p)?;
    Ok(MinimizeResult {
        best_energy,
        best_start,
        best_u,
        best_h,
        per_start,
    })
}
