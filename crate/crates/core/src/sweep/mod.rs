//! Parameter sweeps: regime classification, config files, execution.

pub mod fit;
pub mod report;

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructions::supercritical_constant;
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::minimizer::{minimize, MinimizeOptions, DEFAULT_MAX_ITERS, DEFAULT_RANDOM_STARTS, DEFAULT_TOL_GRAD};
use crate::params::Params;
use crate::potential::{builtin_well, DoubleWell};
use crate::seminorm::fit_coupling_constant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Supercritical,
    Subcritical,
    Gap,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Supercritical => "supercritical",
            Regime::Subcritical => "subcritical",
            Regime::Gap => "gap",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeLabel {
    pub label: Regime,
    /// `max{bσ, bκ, (bσκ)^{1/2}, b^{1/2}κ}`.
    pub threshold: f64,
}

/// Supercritical iff `Λ² ≥ c_big · threshold`, subcritical iff
/// `Λ² ≤ c_small · threshold`, gap otherwise.
pub fn classify(p: &Params, c_small: f64, c_big: f64) -> Result<RegimeLabel> {
    if !(c_small > 0.0 && c_big >= c_small && c_big.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < c_small <= c_big, got c_small = {c_small}, c_big = {c_big}"
        )));
    }
    let threshold = p.regime_threshold();
    let l2 = p.lambda * p.lambda;
    let label = if l2 >= c_big * threshold {
        Regime::Supercritical
    } else if l2 <= c_small * threshold {
        Regime::Subcritical
    } else {
        Regime::Gap
    };
    Ok(RegimeLabel { label, threshold })
}

/// `min{1/2, 1/(ĉ_int √8), c_MM/√2}`.
pub fn default_c_small(w: &DoubleWell, c_int: f64) -> f64 {
    0.5f64.min(1.0 / (c_int * 8f64.sqrt())).min(w.c_mm() / 2f64.sqrt())
}

/// Grid on which the coupling constant is fitted.
pub const COUPLING_FIT_N: usize = 1024;

/// Flat sweep description. Exactly one parameter varies on a log grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub name: String,
    #[serde(default = "default_well")]
    pub well: String,
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Fixed values; the axis parameter's entry may be omitted.
    pub b: Option<f64>,
    pub sigma: Option<f64>,
    pub kappa: Option<f64>,
    pub lambda: Option<f64>,
    pub axis: String,
    pub axis_start: f64,
    pub axis_stop: f64,
    pub axis_points: usize,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_tol_grad")]
    pub tol_grad: f64,
    #[serde(default = "default_random_starts")]
    pub random_starts: usize,
    pub c_small: Option<f64>,
    pub c_big: Option<f64>,
}

fn default_well() -> String {
    "quartic".into()
}
fn default_grid_n() -> usize {
    1024
}
fn default_workers() -> usize {
    1
}
fn default_max_iters() -> usize {
    DEFAULT_MAX_ITERS
}
fn default_tol_grad() -> f64 {
    DEFAULT_TOL_GRAD
}
fn default_random_starts() -> usize {
    DEFAULT_RANDOM_STARTS
}

const AXES: [&str; 4] = ["b", "sigma", "kappa", "lambda"];

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SweepConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !AXES.contains(&self.axis.as_str()) {
            return bad(format!("axis must be one of {AXES:?}, got `{}`", self.axis));
        }
        for (name, v) in [
            ("b", self.b),
            ("sigma", self.sigma),
            ("kappa", self.kappa),
            ("lambda", self.lambda),
        ] {
            if name != self.axis && v.is_none() {
                return bad(format!("missing fixed value for `{name}`"));
            }
        }
        if !(self.axis_start > 0.0 && self.axis_stop > 0.0 && self.axis_start.is_finite() && self.axis_stop.is_finite())
        {
            return bad("axis_start and axis_stop must be positive and finite".into());
        }
        if self.axis_points == 0 {
            return bad("axis_points must be at least 1".into());
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if self.max_iters == 0 || !(self.tol_grad > 0.0) {
            return bad("max_iters must be at least 1 and tol_grad positive".into());
        }
        Grid1D::new(self.grid_n).map_err(|e| Error::Config(format!("grid_n: {e}")))?;
        builtin_well(&self.well).map_err(|e| Error::Config(format!("well: {e}")))?;
        for (name, v) in [("c_small", self.c_small), ("c_big", self.c_big)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return bad(format!("{name} must be positive, got {v}"));
                }
            }
        }
        for p in self.points()? {
            Params::new(p.b, p.sigma, p.kappa, p.lambda).map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// Log-spaced axis values, endpoints included.
    pub fn axis_values(&self) -> Vec<f64> {
        if self.axis_points == 1 {
            return vec![self.axis_start];
        }
        let (a, b) = (self.axis_start.ln(), self.axis_stop.ln());
        let m = (self.axis_points - 1) as f64;
        (0..self.axis_points)
            .map(|i| match i {
                0 => self.axis_start,
                _ if i == self.axis_points - 1 => self.axis_stop,
                _ => (a + (b - a) * i as f64 / m).exp(),
            })
            .collect()
    }

    pub fn points(&self) -> Result<Vec<Params>> {
        let base = Params {
            b: self.b.unwrap_or(1.0),
            sigma: self.sigma.unwrap_or(1.0),
            kappa: self.kappa.unwrap_or(1.0),
            lambda: self.lambda.unwrap_or(1.0),
        };
        self.axis_values()
            .into_iter()
            .map(|v| base.with(&self.axis, v))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub params: Params,
    pub regime: RegimeLabel,
    pub min_energy: f64,
    /// Lowest discrete energy of the analytic constructions on the same grid.
    pub construction_energy: f64,
    /// `-Λ²/(2κ)`.
    pub lower_bound_young: f64,
    /// `c_MM min{1, (b/2)^{1/2}}`, the bound on the uncoupled part.
    pub lower_bound_mm: f64,
    pub grid_n: usize,
    pub converged_starts: usize,
}

impl SweepResult {
    /// Sandwich `young ≤ min ≤ construction + 1e-9`; `None` if it holds.
    pub fn sandwich_violation(&self) -> Option<String> {
        let p = &self.params;
        if self.min_energy < self.lower_bound_young - 1e-6 {
            return Some(format!(
                "{p:?}: min energy {} below the Young bound {}",
                self.min_energy, self.lower_bound_young
            ));
        }
        if self.min_energy > self.construction_energy + 1e-9 {
            return Some(format!(
                "{p:?}: min energy {} above the construction energy {}",
                self.min_energy, self.construction_energy
            ));
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub config: SweepConfig,
    pub c_small: f64,
    pub c_big: f64,
    /// Fitted coupling constant when `c_small` was derived from it.
    pub c_int: Option<f64>,
    pub results: Vec<SweepResult>,
    pub violations: Vec<String>,
}

fn run_point(p: Params, cfg: &SweepConfig, w: &DoubleWell, c_small: f64, c_big: f64) -> Result<SweepResult> {
    let regime = classify(&p, c_small, c_big)?;
    let mut opts = MinimizeOptions::standard(&p, w, cfg.grid_n, cfg.seed, cfg.random_starts)?;
    opts.max_iters = cfg.max_iters;
    opts.tol_grad = cfg.tol_grad;
    let r = minimize(&p, w, &opts)?;
    let construction_energy = r
        .construction_energy()
        .ok_or_else(|| Error::InvariantViolation("no construction start was representable".into()))?;
    Ok(SweepResult {
        params: p,
        regime,
        min_energy: r.best_energy,
        construction_energy,
        lower_bound_young: p.young_bound(),
        lower_bound_mm: w.c_mm() * 1f64.min((p.b / 2.0).sqrt()),
        grid_n: cfg.grid_n,
        converged_starts: r.converged_starts(),
    })
}

/// Runs every point on a pool of `workers` threads; results keep config order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    let w = builtin_well(&cfg.well)?;
    let c_big = cfg.c_big.unwrap_or_else(|| supercritical_constant(&w));
    let (c_small, c_int) = match cfg.c_small {
        Some(c) => (c, None),
        None => {
            let fit = fit_coupling_constant(Grid1D::new(COUPLING_FIT_N)?, &w)?;
            (default_c_small(&w, fit.c_int), Some(fit.c_int))
        }
    };
    if c_small > c_big {
        return Err(Error::Config(format!("c_small = {c_small} exceeds c_big = {c_big}")));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    let points = cfg.points()?;
    let results: Vec<SweepResult> = pool.install(|| {
        points
            .par_iter()
            .map(|&p| run_point(p, cfg, &w, c_small, c_big))
            .collect::<Result<Vec<_>>>()
    })?;
    let violations = results.iter().filter_map(SweepResult::sandwich_violation).collect();
    Ok(SweepOutcome {
        config: cfg.clone(),
        c_small,
        c_big,
        c_int,
        results,
        violations,
    })
}
