//! The coupled functional `F(u, h)`, its height-eliminated reduction and the
//! Modica–Mortola energy.
//!
//! Every quadratic term is evaluated in Fourier space with physical
//! frequencies `ω_k = 2πk` over all represented modes; the Nyquist mode
//! carries `ω = πN`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{forward_transform, inverse_transform, slot_frequency, SampledField, SpectralField};
use crate::params::Params;
use crate::potential::DoubleWell;

/// Tolerance for the admissibility checks of energy evaluations.
pub const ADMISSIBILITY_TOL: f64 = 1e-8;

/// The five integrals of `F(u, h)` and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub well_term: f64,
    pub exchange_term: f64,
    pub tension_term: f64,
    pub bending_term: f64,
    pub coupling_term: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn from_terms(well: f64, exchange: f64, tension: f64, bending: f64, coupling: f64) -> Self {
        EnergyBreakdown {
            well_term: well,
            exchange_term: exchange,
            tension_term: tension,
            bending_term: bending,
            coupling_term: coupling,
            total: well + exchange + tension + bending + coupling,
        }
    }
}

#[inline]
fn omega(k: i64) -> f64 {
    2.0 * PI * k as f64
}

fn check_height(h: &SampledField) -> Result<()> {
    h.ensure_finite()?;
    let m = h.mean();
    if m.abs() > ADMISSIBILITY_TOL {
        return Err(Error::NotAdmissible(format!("height mean {m:e} is not zero")));
    }
    Ok(())
}

fn check_pair(u: &SampledField, h: &SampledField) -> Result<()> {
    if u.grid() != h.grid() {
        return Err(Error::LengthMismatch {
            expected: u.len(),
            actual: h.len(),
        });
    }
    u.ensure_admissible(ADMISSIBILITY_TOL)?;
    check_height(h)
}

pub fn well_integral(u: &SampledField, w: &DoubleWell) -> f64 {
    u.values().iter().map(|&v| w.evaluate(v)).sum::<f64>() / u.len() as f64
}

/// `∫|u'|²` by Parseval.
pub fn gradient_norm_sq(s: &SpectralField) -> f64 {
    s.weighted_sum(|k| omega(k).powi(2))
}

/// `F(u, h)` with spectral derivatives.
pub fn evaluate_full(u: &SampledField, h: &SampledField, p: &Params, w: &DoubleWell) -> Result<EnergyBreakdown> {
    check_pair(u, h)?;
    let uh = forward_transform(u);
    let hh = forward_transform(h);
    let mut exchange = 0.0;
    let mut tension = 0.0;
    let mut bending = 0.0;
    let mut coupling = 0.0;
    for ((k, a), (_, c)) in uh.modes().zip(hh.modes()) {
        let w2 = omega(k).powi(2);
        exchange += w2 * a.norm_sqr();
        tension += w2 * c.norm_sqr();
        bending += w2 * w2 * c.norm_sqr();
        // ∫ u h'' = Σ û_k conj(-ω² ĥ_k)
        coupling -= w2 * (a * c.conj()).re;
    }
    Ok(EnergyBreakdown::from_terms(
        well_integral(u, w),
        0.5 * p.b * exchange,
        0.5 * p.sigma * tension,
        0.5 * p.kappa * bending,
        p.lambda * coupling,
    ))
}

/// Samples of a profile pair together with analytically supplied derivatives.
#[derive(Debug, Clone)]
pub struct DerivativeSamples {
    pub u: SampledField,
    pub du: Vec<f64>,
    pub h: SampledField,
    pub dh: Vec<f64>,
    pub d2h: Vec<f64>,
}

/// `F(u, h)` by the rectangle rule on supplied derivative samples.
pub fn evaluate_sampled(s: &DerivativeSamples, p: &Params, w: &DoubleWell) -> Result<EnergyBreakdown> {
    let n = s.u.len();
    for len in [s.du.len(), s.h.len(), s.dh.len(), s.d2h.len()] {
        if len != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: len,
            });
        }
    }
    check_pair(&s.u, &s.h)?;
    let mean = |f: &dyn Fn(usize) -> f64| (0..n).map(f).sum::<f64>() / n as f64;
    let uv = s.u.values();
    Ok(EnergyBreakdown::from_terms(
        well_integral(&s.u, w),
        0.5 * p.b * mean(&|j| s.du[j] * s.du[j]),
        0.5 * p.sigma * mean(&|j| s.dh[j] * s.dh[j]),
        0.5 * p.kappa * mean(&|j| s.d2h[j] * s.d2h[j]),
        p.lambda * mean(&|j| uv[j] * s.d2h[j]),
    ))
}

fn check_height_solvable(p: &Params) -> Result<()> {
    if p.kappa == 0.0 && p.sigma == 0.0 && p.lambda > 0.0 {
        return Err(Error::Degenerate(
            "sigma = kappa = 0 with lambda > 0: the height problem has no minimizer".into(),
        ));
    }
    Ok(())
}

/// Per-mode height response `ĥ_k / û_k = Λ / (σ + κω_k²)`, zero at `k = 0`.
fn height_response(k: i64, p: &Params) -> f64 {
    if k == 0 || p.lambda == 0.0 {
        return 0.0;
    }
    p.lambda / (p.sigma + p.kappa * omega(k).powi(2))
}

/// Minimizer of `h ↦ F(u, h)` over mean-zero periodic `h`.
pub fn optimal_height(u: &SampledField, p: &Params) -> Result<SampledField> {
    check_height_solvable(p)?;
    u.ensure_finite()?;
    let uh = forward_transform(u);
    let hh = uh.scale_modes(|k| Complex64::new(height_response(k, p), 0.0));
    Ok(inverse_transform(&hh))
}

/// Nonlocal multiplier `ω²/(σ + κω²)` of the eliminated coupling, zero at `k = 0`.
pub fn coupling_multiplier(k: i64, p: &Params) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let w2 = omega(k).powi(2);
    w2 / (p.sigma + p.kappa * w2)
}

/// `(Λ²/2) Σ_{k≠0} ω²/(σ+κω²) |û_k|²`, the energy released by the optimal height.
pub fn coupling_gain(uh: &SpectralField, p: &Params) -> Result<f64> {
    check_height_solvable(p)?;
    if p.lambda == 0.0 {
        return Ok(0.0);
    }
    Ok(0.5 * p.lambda * p.lambda * uh.weighted_sum(|k| coupling_multiplier(k, p)))
}

/// Terms of the reduced functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedBreakdown {
    pub well_term: f64,
    pub exchange_term: f64,
    pub coupling_gain: f64,
    pub total: f64,
}

pub fn reduced_breakdown(u: &SampledField, p: &Params, w: &DoubleWell) -> Result<ReducedBreakdown> {
    u.ensure_admissible(ADMISSIBILITY_TOL)?;
    let uh = forward_transform(u);
    let well = well_integral(u, w);
    let exchange = 0.5 * p.b * gradient_norm_sq(&uh);
    let gain = coupling_gain(&uh, p)?;
    Ok(ReducedBreakdown {
        well_term: well,
        exchange_term: exchange,
        coupling_gain: gain,
        total: well + exchange - gain,
    })
}

/// `∫(W(u) + (b/2)|u'|²) - (Λ²/2) Σ_{k≠0} ω²/(σ+κω²)|û_k|²`.
pub fn reduced_energy(u: &SampledField, p: &Params, w: &DoubleWell) -> Result<f64> {
    Ok(reduced_breakdown(u, p, w)?.total)
}

/// `∫((1/δ)W(u) + δ|u'|²)` with a spectral derivative.
pub fn modica_mortola(u: &SampledField, delta: f64, w: &DoubleWell) -> Result<f64> {
    check_delta(delta)?;
    u.ensure_admissible(ADMISSIBILITY_TOL)?;
    let uh = forward_transform(u);
    Ok(well_integral(u, w) / delta + delta * gradient_norm_sq(&uh))
}

/// `∫((1/δ)W(u) + δ|u'|²)` with supplied derivative samples.
pub fn modica_mortola_sampled(u: &SampledField, du: &[f64], delta: f64, w: &DoubleWell) -> Result<f64> {
    check_delta(delta)?;
    u.ensure_admissible(ADMISSIBILITY_TOL)?;
    if du.len() != u.len() {
        return Err(Error::LengthMismatch {
            expected: u.len(),
            actual: du.len(),
        });
    }
    let grad = du.iter().map(|d| d * d).sum::<f64>() / du.len() as f64;
    Ok(well_integral(u, w) / delta + delta * grad)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    Ok(())
}

/// Reduced functional with precomputed Fourier multipliers, for repeated
/// energy and gradient evaluations on one grid.
#[derive(Debug, Clone)]
pub struct ReducedFunctional {
    well: DoubleWell,
    /// `b ω² - Λ² ω²/(σ + κω²)` per FFT slot.
    multiplier: Vec<f64>,
}

impl ReducedFunctional {
    pub fn new(n: usize, p: &Params, w: &DoubleWell) -> Result<Self> {
        check_height_solvable(p)?;
        let multiplier = (0..n)
            .map(|j| {
                let k = slot_frequency(j, n);
                p.b * omega(k).powi(2) - p.lambda * p.lambda * coupling_multiplier(k, p)
            })
            .collect();
        Ok(ReducedFunctional {
            well: w.clone(),
            multiplier,
        })
    }

    /// Quadratic-part multipliers `q_k` in FFT slot order.
    pub fn multipliers(&self) -> &[f64] {
        &self.multiplier
    }

    /// Largest `|q_k|` of the quadratic part.
    pub fn multiplier_bound(&self) -> f64 {
        self.multiplier.iter().fold(0.0, |m, q| m.max(q.abs()))
    }

    pub fn energy(&self, u: &[f64]) -> f64 {
        let n = u.len();
        let mut buf: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        crate::grid::fft_forward(&mut buf);
        let inv_n2 = 1.0 / (n as f64 * n as f64);
        let quad: f64 = buf
            .iter()
            .zip(&self.multiplier)
            .map(|(c, q)| q * c.norm_sqr())
            .sum::<f64>()
            * inv_n2;
        u.iter().map(|&v| self.well.evaluate(v)).sum::<f64>() / n as f64 + 0.5 * quad
    }

    /// Energy and its L² gradient (inner product `(1/N) Σ`).
    pub fn energy_and_gradient(&self, u: &[f64]) -> (f64, Vec<f64>) {
        let n = u.len();
        let mut buf: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        crate::grid::fft_forward(&mut buf);
        let inv_n = 1.0 / n as f64;
        let mut quad = 0.0;
        for (c, q) in buf.iter_mut().zip(&self.multiplier) {
            quad += q * c.norm_sqr();
            *c *= q * inv_n;
        }
        quad *= inv_n * inv_n;
        crate::grid::fft_inverse(&mut buf);
        let mut well = 0.0;
        let grad = u
            .iter()
            .zip(&buf)
            .map(|(&v, c)| {
                well += self.well.evaluate(v);
                self.well.derivative(v) + c.re
            })
            .collect();
        (well * inv_n + 0.5 * quad, grad)
    }
}
