//! Explicit competitor profiles and their closed-form energy bounds.
//!
//! Every profile is a [`PeriodicProfile`] sampled by exact cell averages, with
//! derivatives taken analytically per piece rather than spectrally.

use serde::{Deserialize, Serialize};

use crate::energy::{evaluate_sampled, DerivativeSamples, EnergyBreakdown};
use crate::error::{Error, Result};
use crate::grid::{Grid1D, SampledField};
use crate::params::Params;
use crate::potential::DoubleWell;
use crate::profile::{PeriodicProfile, Piece};

/// Gauss nodes per piece when integrating `W(u)` exactly on linear pieces.
const WELL_NODES: usize = 8;

/// An order-parameter profile together with a height profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfilePair {
    pub u: PeriodicProfile,
    pub h: PeriodicProfile,
}

impl ProfilePair {
    pub fn flat_height(u: PeriodicProfile) -> Self {
        ProfilePair {
            u,
            h: PeriodicProfile::linear_through(&[(0.0, 0.0), (1.0, 0.0)]),
        }
    }

    /// Cell-averaged samples of `u, u', h, h', h''`.
    pub fn samples(&self, grid: Grid1D) -> DerivativeSamples {
        let du = self.u.derivative();
        let dh = self.h.derivative();
        let d2h = dh.derivative();
        DerivativeSamples {
            u: self.u.sample_cells(grid),
            du: du.cell_averages(grid),
            h: self.h.sample_cells(grid),
            dh: dh.cell_averages(grid),
            d2h: d2h.cell_averages(grid),
        }
    }

    /// Continuum energy by exact piecewise integration.
    pub fn exact_energy(&self, p: &Params, w: &DoubleWell) -> EnergyBreakdown {
        let du = self.u.derivative();
        let dh = self.h.derivative();
        let d2h = dh.derivative();
        EnergyBreakdown::from_terms(
            self.u.integrate_composed(|t| w.evaluate(t), WELL_NODES),
            0.5 * p.b * du.integral_product(&du),
            0.5 * p.sigma * dh.integral_product(&dh),
            0.5 * p.kappa * d2h.integral_product(&d2h),
            p.lambda * self.u.integral_product(&d2h),
        )
    }

    /// Sampled energy on `grid`.
    pub fn energy(&self, grid: Grid1D, p: &Params, w: &DoubleWell) -> Result<EnergyBreakdown> {
        evaluate_sampled(&self.samples(grid), p, w)
    }
}

fn require_resolution(grid: Grid1D, required: f64) -> Result<()> {
    let required = required.ceil() as usize;
    if grid.n_samples() < required {
        return Err(Error::Underresolved {
            required,
            actual: grid.n_samples(),
        });
    }
    Ok(())
}

/// `u = h = 0`.
pub fn flat(grid: Grid1D) -> (SampledField, SampledField) {
    (SampledField::zeros(grid), SampledField::zeros(grid))
}

/// Two linear layers of width `√b/2` at `0` and `1/2`.
pub fn single_transition_profile(b: f64) -> PeriodicProfile {
    let a = 0.5 * b.sqrt().min(1.0);
    PeriodicProfile::linear_through(&[(0.0, -1.0), (a, 1.0), (0.5, 1.0), (0.5 + a, -1.0), (1.0, -1.0)])
}

pub fn single_transition(b: f64, grid: Grid1D) -> Result<SampledField> {
    if !(b > 0.0 && b <= 1.0) {
        return Err(Error::InvalidParameter(format!("b must lie in (0, 1], got {b}")));
    }
    require_resolution(grid, 32.0 / b.sqrt())?;
    Ok(single_transition_profile(b).sample_cells(grid))
}

/// The oscillating curvature ansatz with its samples.
#[derive(Debug, Clone)]
pub struct OscillatoryAnsatz {
    pub n: u32,
    pub epsilon: f64,
    pub mu: f64,
    pub u: SampledField,
    pub h: SampledField,
    profiles: ProfilePair,
    samples: DerivativeSamples,
}

impl OscillatoryAnsatz {
    pub fn profiles(&self) -> &ProfilePair {
        &self.profiles
    }

    pub fn samples(&self) -> &DerivativeSamples {
        &self.samples
    }

    pub fn energy(&self, p: &Params, w: &DoubleWell) -> Result<EnergyBreakdown> {
        evaluate_sampled(&self.samples, p, w)
    }

    pub fn exact_energy(&self, p: &Params, w: &DoubleWell) -> EnergyBreakdown {
        self.profiles.exact_energy(p, w)
    }
}

/// `Λ(1 - ε/2) / (κn² + σ/48)`.
pub fn oscillatory_amplitude(n: u32, epsilon: f64, p: &Params) -> f64 {
    let n2 = (n as f64).powi(2);
    p.lambda * (1.0 - 0.5 * epsilon) / (p.kappa * n2 + p.sigma / 48.0)
}

/// Profiles of the ansatz: `u` switches sign against the curvature of
/// `h = μ h₁(n x)` through `2n` linear layers of width `ε/(2n)`.
pub fn oscillatory_profile(n: u32, epsilon: f64, mu: f64) -> ProfilePair {
    let nf = n as f64;
    let cell = 0.5 / nf;
    let a = 0.25 * epsilon / nf;
    let mut nodes = Vec::with_capacity(6 * n as usize + 1);
    let mut h_pieces = Vec::with_capacity(2 * n as usize);
    for k in 0..2 * n {
        let c = k as f64 * cell;
        // positive curvature on even cells
        let (v, s) = if k % 2 == 0 { (-1.0, 1.0) } else { (1.0, -1.0) };
        nodes.push((c, 0.0));
        nodes.push((c + a, v));
        nodes.push((c + cell - a, v));
        h_pieces.push(Piece {
            start: c,
            end: if k + 1 == 2 * n { 1.0 } else { (k + 1) as f64 * cell },
            coeffs: vec![0.0, -0.25 * s * mu * nf, 0.5 * s * mu * nf * nf],
        });
    }
    nodes.push((1.0, 0.0));
    ProfilePair {
        u: PeriodicProfile::linear_through(&nodes),
        h: PeriodicProfile::new(h_pieces),
    }
}

fn check_ansatz_args(n: u32, epsilon: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1], got {epsilon}"
        )));
    }
    Ok(())
}

/// Minimal grid for the ansatz: `64 n / ε` rounded up to a power of two.
pub fn ansatz_grid(n: u32, epsilon: f64) -> Grid1D {
    Grid1D::power_of_two_at_least((64.0 * n as f64 / epsilon).ceil() as usize)
}

pub fn oscillatory(n: u32, epsilon: f64, p: &Params, grid: Grid1D) -> Result<OscillatoryAnsatz> {
    check_ansatz_args(n, epsilon)?;
    if p.kappa == 0.0 && p.sigma == 0.0 {
        return Err(Error::Degenerate(
            "oscillatory ansatz needs sigma > 0 or kappa > 0".into(),
        ));
    }
    require_resolution(grid, 32.0 * n as f64 / epsilon)?;
    let mu = oscillatory_amplitude(n, epsilon, p);
    let profiles = oscillatory_profile(n, epsilon, mu);
    let samples = profiles.samples(grid);
    Ok(OscillatoryAnsatz {
        n,
        epsilon,
        mu,
        u: samples.u.clone(),
        h: samples.h.clone(),
        profiles,
        samples,
    })
}

/// `K ε + 8bn²/ε - 24Λ²(1 - ε/2)²n² / (σ + 48κn²)` with `K = max W`.
pub fn ansatz_bound(n: u32, epsilon: f64, p: &Params, w: &DoubleWell) -> f64 {
    let n2 = (n as f64).powi(2);
    w.max_w() * epsilon + 8.0 * p.b * n2 / epsilon
        - 24.0 * p.lambda.powi(2) * (1.0 - 0.5 * epsilon).powi(2) * n2 / (p.sigma + 48.0 * p.kappa * n2)
}

/// Case-wise choice of `(n, ε)` for the ansatz.
pub fn regime_select(p: &Params, w: &DoubleWell) -> Result<(u32, f64)> {
    if p.kappa <= 0.0 {
        return Err(Error::Degenerate("regime selection needs kappa > 0".into()));
    }
    let k = w.max_w();
    let (n, eps) = if p.sigma <= p.kappa {
        let eps = if k <= 8.0 * p.b { 1.0 } else { (8.0 * p.b / k).sqrt() };
        (1, eps)
    } else {
        let ratio = p.sigma / p.kappa;
        let n = ratio.sqrt().ceil().max(1.0);
        if n > u32::MAX as f64 {
            return Err(Error::InvalidParameter(format!("sigma/kappa = {ratio} is too large")));
        }
        let eps = if k <= 32.0 * p.b * ratio {
            1.0
        } else {
            (32.0 * p.b * ratio / k).sqrt()
        };
        (n as u32, eps)
    };
    Ok((n, eps.clamp(f64::MIN_POSITIVE, 1.0)))
}

/// `max{2048, 256 √(2K)}`.
pub fn supercritical_constant(w: &DoubleWell) -> f64 {
    2048f64.max(256.0 * (2.0 * w.max_w()).sqrt())
}

/// `(⌊b^{-1/8}⌋, √b)`, the vanishing-`b` choice of the ansatz.
pub fn vanishing_b_choice(b: f64) -> Result<(u32, f64)> {
    if !(b > 0.0 && b <= 1.0) {
        return Err(Error::InvalidParameter(format!("b must lie in (0, 1], got {b}")));
    }
    let n = b.powf(-0.125).floor().max(1.0) as u32;
    Ok((n, b.sqrt()))
}

/// Mean-zero sharp-transition profile: linear layers of width `δ` centred
/// at `0` (from `1` to `-1`) and at `1/2` (from `-1` to `1`).
pub fn udelta_profile(delta: f64) -> PeriodicProfile {
    let a = 0.5 * delta;
    PeriodicProfile::linear_through(&[
        (0.0, 0.0),
        (a, -1.0),
        (0.5 - a, -1.0),
        (0.5 + a, 1.0),
        (1.0 - a, 1.0),
        (1.0, 0.0),
    ])
}

/// Closed-form lower bound on the periodic `H^{1/2}` double integral of the
/// sharp-transition profile: `-8(1/4 - δ/2) - 4 ln(δ / (1/4 + δ/2))`.
pub fn udelta_half_lower_bound(delta: f64) -> f64 {
    -8.0 * (0.25 - 0.5 * delta) - 4.0 * (delta / (0.25 + 0.5 * delta)).ln()
}

/// Sampled sharp-transition profile with its derivative samples.
#[derive(Debug, Clone)]
pub struct UDelta {
    pub delta: f64,
    pub u: SampledField,
    pub du: Vec<f64>,
    pub half_lower_bound: f64,
}

pub fn sampled_udelta(delta: f64, grid: Grid1D) -> Result<UDelta> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1/2), got {delta}"
        )));
    }
    require_resolution(grid, 64.0 / delta)?;
    let prof = udelta_profile(delta);
    Ok(UDelta {
        delta,
        u: prof.sample_cells(grid),
        du: prof.derivative().cell_averages(grid),
        half_lower_bound: udelta_half_lower_bound(delta),
    })
}

/// `±1` plateaus with linear ramps of half-width `ε` at `1/4` and `3/4`.
pub fn mollified_step_profile(epsilon: f64) -> PeriodicProfile {
    PeriodicProfile::linear_through(&[
        (0.0, 1.0),
        (0.25 - epsilon, 1.0),
        (0.25 + epsilon, -1.0),
        (0.75 - epsilon, -1.0),
        (0.75 + epsilon, 1.0),
        (1.0, 1.0),
    ])
}

pub fn mollified_step(epsilon: f64, grid: Grid1D) -> Result<SampledField> {
    check_mollifier(epsilon)?;
    require_resolution(grid, 64.0 / epsilon)?;
    Ok(mollified_step_profile(epsilon).sample_cells(grid))
}

fn check_mollifier(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 0.125) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1/8), got {epsilon}"
        )));
    }
    Ok(())
}

/// Energy of the mollified step at `κ = 0` with `h = (Λ/σ) u`.
///
/// The coupling is taken in its integrated form `-Λ ∫ u' h'`, so the total
/// is `∫W(u) + (b - Λ²/σ)/2 ∫|u'|²`.
pub fn kappa_zero_probe(epsilon: f64, p: &Params, w: &DoubleWell, grid: Grid1D) -> Result<EnergyBreakdown> {
    if p.sigma <= 0.0 {
        return Err(Error::Degenerate("the kappa = 0 probe needs sigma > 0".into()));
    }
    let u = mollified_step(epsilon, grid)?;
    let du = mollified_step_profile(epsilon).derivative().cell_averages(grid);
    let grad = du.iter().map(|d| d * d).sum::<f64>() / du.len() as f64;
    let r = p.lambda / p.sigma;
    Ok(EnergyBreakdown::from_terms(
        crate::energy::well_integral(&u, w),
        0.5 * p.b * grad,
        0.5 * p.sigma * r * r * grad,
        0.0,
        -p.lambda * r * grad,
    ))
}

/// Richardson estimate `2 |E(N) - E(2N)|` of the quadrature error at `N`.
pub fn richardson_slack(energy: impl Fn(Grid1D) -> Result<f64>, grid: Grid1D) -> Result<f64> {
    let coarse = energy(grid)?;
    let fine = energy(grid.refine())?;
    Ok(2.0 * (coarse - fine).abs())
}

/// Sampled ansatz energy and its Richardson slack at `grid`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasuredAnsatz {
    pub energy: f64,
    pub slack: f64,
    pub bound: f64,
}

pub fn measure_ansatz(n: u32, epsilon: f64, p: &Params, w: &DoubleWell, grid: Grid1D) -> Result<MeasuredAnsatz> {
    let e = |g: Grid1D| -> Result<f64> { Ok(oscillatory(n, epsilon, p, g)?.energy(p, w)?.total) };
    let energy = e(grid)?;
    let fine = e(grid.refine())?;
    Ok(MeasuredAnsatz {
        energy,
        slack: 2.0 * (energy - fine).abs(),
        bound: ansatz_bound(n, epsilon, p, w),
    })
}
