//! Fractional Sobolev seminorms, their equivalence constants, and the
//! interpolation checks built on them.
//!
//! The Fourier seminorm uses integer frequencies, `Σ_{k≠0} |k|^{2s} |û_k|²`.
//! The Gagliardo double integrals are discretized through the structure
//! function `D(x) = ∫ |u(y + x) - u(y)|² dy`, computed for every lag at once
//! from an FFT autocorrelation.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::energy::{coupling_gain, modica_mortola, ADMISSIBILITY_TOL};
use crate::error::{Error, Result};
use crate::grid::{fft_forward, fft_inverse, forward_transform, Grid1D, SampledField};
use crate::params::Params;
use crate::potential::DoubleWell;
use crate::quadrature::{gauss_integrate, gauss_legendre};

fn check_order(s: f64, allow_one: bool) -> Result<()> {
    let ok = s > 0.0 && (s < 1.0 || (allow_one && s == 1.0));
    if !ok {
        return Err(Error::InvalidParameter(format!(
            "fractional order must lie in (0, 1{}, got {s}",
            if allow_one { "]" } else { ")" }
        )));
    }
    Ok(())
}

/// `Σ_{k≠0} |k|^{2s} |û_k|²`.
pub fn seminorm_fourier(u: &SampledField, s: f64) -> Result<f64> {
    check_order(s, true)?;
    let uh = forward_transform(u);
    Ok(uh.weighted_sum(|k| {
        if k == 0 {
            0.0
        } else {
            (k.unsigned_abs() as f64).powf(2.0 * s)
        }
    }))
}

/// `Σ_k k² |û_k|²`.
pub fn seminorm_h1_integer(u: &SampledField) -> f64 {
    forward_transform(u).weighted_sum(|k| (k * k) as f64)
}

/// Discretized double integral split into the part away from the diagonal
/// and an estimate of the excluded diagonal cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GagliardoEstimate {
    /// Product-rule sum over lags `|x| ≥ h/2`.
    pub off_diagonal: f64,
    /// `∫|u'|² · 2 (h/2)^{2-2s} / (2-2s)` with difference quotients.
    pub diagonal: f64,
    /// Same with the discrete Lipschitz constant squared in place of `∫|u'|²`.
    pub diagonal_bound: f64,
    pub total: f64,
}

/// `∫ x^{1-2s}` over `[a, b]`.
fn power_moment(a: f64, b: f64, s: f64) -> f64 {
    let e = 2.0 - 2.0 * s;
    (b.powf(e) - a.powf(e)) / e
}

/// Weight of lag `m`: the cell integral of `|x|^{-1-2s}` with `D(x)` taken
/// proportional to `x²` inside the cell.
fn lag_weight(m: usize, h: f64, upper: f64, s: f64) -> f64 {
    let a = (m as f64 - 0.5) * h;
    let b = ((m as f64 + 0.5) * h).min(upper);
    if b <= a {
        return 0.0;
    }
    power_moment(a, b, s) / (m as f64 * h).powi(2)
}

fn diagonal_terms(grad_sq: f64, lip_sq: f64, h: f64, s: f64) -> (f64, f64) {
    let cell = 2.0 * power_moment(0.0, 0.5 * h, s);
    (grad_sq * cell, lip_sq * cell)
}

/// `∫_{Π} ∫_{[-1/2, 1/2)} |u(x + y) - u(y)|² / |x|^{1+2s} dx dy`.
pub fn seminorm_double_integral_periodic(u: &SampledField, s: f64) -> Result<GagliardoEstimate> {
    check_order(s, false)?;
    u.ensure_finite()?;
    let n = u.len();
    let h = 1.0 / n as f64;
    let uh = forward_transform(u);
    let mut buf: Vec<Complex64> = uh.coeffs().iter().map(|c| Complex64::new(c.norm_sqr(), 0.0)).collect();
    fft_inverse(&mut buf);
    // R(m) = (1/N) Σ_j u_{j+m} u_j
    let r0 = buf[0].re;
    let mut off = 0.0;
    for (m, r) in buf.iter().enumerate().take(n / 2 + 1).skip(1) {
        let d = (2.0 * (r0 - r.re)).max(0.0);
        // both signs of the lag; the Nyquist lag has two half cells
        off += 2.0 * lag_weight(m, h, 0.5, s) * d;
    }
    let v = u.values();
    let (mut grad_sq, mut lip) = (0.0, 0.0f64);
    for j in 0..n {
        let q = (v[(j + 1) % n] - v[j]) / h;
        grad_sq += q * q;
        lip = lip.max(q.abs());
    }
    grad_sq /= n as f64;
    let (diagonal, diagonal_bound) = diagonal_terms(grad_sq, lip * lip, h, s);
    Ok(GagliardoEstimate {
        off_diagonal: off,
        diagonal,
        diagonal_bound,
        total: off + diagonal,
    })
}

/// `∫_0^ℓ ∫_0^ℓ |u(x) - u(y)|² / |x - y|^{1+2s} dx dy` for midpoint samples
/// `u((i + 1/2) ℓ/N)`.
pub fn seminorm_double_integral_domain(values: &[f64], length: f64, s: f64) -> Result<GagliardoEstimate> {
    check_order(s, false)?;
    if values.len() < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "domain length must be positive, got {length}"
        )));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let n = values.len();
    let h = length / n as f64;
    let padded = (2 * n).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); padded];
    for (b, &v) in buf.iter_mut().zip(values) {
        b.re = v;
    }
    fft_forward(&mut buf);
    for c in &mut buf {
        *c = Complex64::new(c.norm_sqr(), 0.0);
    }
    fft_inverse(&mut buf);
    let scale = 1.0 / padded as f64;
    // prefix[i] = Σ_{j<i} u_j²
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + values[i] * values[i];
    }
    let mut off = 0.0;
    for m in 1..n {
        let corr = buf[m].re * scale;
        let sq = (prefix[n] - prefix[m]) + prefix[n - m];
        // Σ_i |u_{i+m} - u_i|² h, counted for both orderings of (x, y)
        let d = (sq - 2.0 * corr).max(0.0) * h;
        off += 2.0 * lag_weight(m, h, f64::INFINITY, s) * d;
    }
    let (mut grad_sq, mut lip) = (0.0, 0.0f64);
    for w in values.windows(2) {
        let q = (w[1] - w[0]) / h;
        grad_sq += q * q * h;
        lip = lip.max(q.abs());
    }
    let (diagonal, diagonal_bound) = diagonal_terms(grad_sq, lip * lip * length, h, s);
    Ok(GagliardoEstimate {
        off_diagonal: off,
        diagonal,
        diagonal_bound,
        total: off + diagonal,
    })
}

/// `(c_fl, c_fu)` bracketing the periodic double integral by the Fourier
/// seminorm in dimension `d`.
///
/// `c_fu = ∫_{ℝ^d} 4 sin²(π x₁) / |x|^{d+2s} dx`, the exact value of the
/// double integral over all of `ℝ^d` for a unit-frequency mode.
pub fn equivalence_constants(s: f64, d: u32) -> Result<(f64, f64)> {
    check_order(s, false)?;
    if !(d == 1 || d == 2) {
        return Err(Error::InvalidParameter(format!("dimension must be 1 or 2, got {d}")));
    }
    let df = d as f64;
    // π^{(d-1)/2} / Γ((d-1)/2 + 1), the volume of the unit ball in ℝ^{d-1}
    let ball = if d == 1 { 1.0 } else { 2.0 };
    let c_fl = 2f64.powf(2.0 * s - 3.0 - df) * df.powi(-5) / (1.0 - s) * ball;
    let line = 2.0 * half_line_sine_integral(s);
    let c_fu = if d == 1 {
        line
    } else {
        line * PI.sqrt() * gamma(s + 0.5) / gamma(s + 1.0)
    };
    Ok((c_fl, c_fu))
}

/// Truncation radius of the oscillatory tail in [`half_line_sine_integral`].
const SINE_CUTOFF: f64 = 1e4;

/// `∫_0^∞ 4 sin²(π x) / x^{1+2s} dx` by quadrature.
///
/// On `[0, 1]` the substitution `x = t^q`, `q = 1/(2 - 2s)`, removes the
/// endpoint singularity. Beyond 1 the integrand is split as
/// `2/x^{1+2s} - 2 cos(2πx)/x^{1+2s}`; the first part is integrated in closed
/// form, the second up to `SINE_CUTOFF`, past which it is below `1e-6`.
pub fn half_line_sine_integral(s: f64) -> f64 {
    let rule = gauss_legendre(20);
    let q = 1.0 / (2.0 - 2.0 * s);
    let f = |x: f64| 4.0 * (PI * x).sin().powi(2) / x.powf(1.0 + 2.0 * s);
    let near: f64 = (0..64)
        .map(|i| {
            let a = i as f64 / 64.0;
            let b = (i + 1) as f64 / 64.0;
            gauss_integrate(
                |t| {
                    if t == 0.0 {
                        0.0
                    } else {
                        f(t.powf(q)) * q * t.powf(q - 1.0)
                    }
                },
                a,
                b,
                &rule,
            )
        })
        .sum();
    let smooth = 2.0 / (2.0 * s);
    let r = SINE_CUTOFF as usize;
    let osc: f64 = (1..r)
        .map(|i| {
            gauss_integrate(
                |x| 2.0 * (2.0 * PI * x).cos() / x.powf(1.0 + 2.0 * s),
                i as f64,
                (i + 1) as f64,
                &rule,
            )
        })
        .sum();
    near + smooth - osc
}

/// `(lhs, rhs)` of `|u|²_{H^s} ≤ δ^{-2s}‖u‖² + δ^{2-2s}|u|²_{H¹}`.
pub fn linear_interpolation_check(u: &SampledField, s: f64, delta: f64) -> Result<(f64, f64)> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let lhs = seminorm_fourier(u, s)?;
    let rhs = delta.powf(-2.0 * s) * u.l2_norm_sq() + delta.powf(2.0 - 2.0 * s) * seminorm_h1_integer(u);
    if lhs > rhs + 1e-10 {
        return Err(Error::InvariantViolation(format!(
            "linear interpolation fails: {lhs} > {rhs} at s = {s}, delta = {delta}"
        )));
    }
    Ok((lhs, rhs))
}

/// A member of a `δ`-indexed family: the field and its `MM_δ` energy.
#[derive(Debug, Clone)]
pub struct FamilyMember {
    pub u: SampledField,
    pub mm: f64,
}

/// Ratios `|u_δ|²_{H^s} / MM_δ(u_δ)` along a `δ` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolationReport {
    pub s: f64,
    pub delta_grid: Vec<f64>,
    pub raw_ratio: Vec<f64>,
    pub normalized_ratio: Vec<f64>,
    pub sup_normalized: f64,
}

impl InterpolationReport {
    /// `sup / inf` of the normalized ratios.
    pub fn normalized_spread(&self) -> f64 {
        spread(&self.normalized_ratio)
    }

    pub fn raw_spread(&self) -> f64 {
        spread(&self.raw_ratio)
    }
}

pub fn spread(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

/// Normalization of the raw ratio for order `s` at scale `δ`.
pub fn interpolation_normalization(s: f64, delta: f64) -> f64 {
    if (s - 0.5).abs() < 1e-12 {
        1.0 / delta.ln().abs()
    } else if s > 0.5 {
        delta.powf(2.0 * s - 1.0)
    } else {
        1.0
    }
}

pub fn interpolation_report(
    family: impl Fn(f64) -> Result<FamilyMember>,
    s: f64,
    delta_grid: &[f64],
) -> Result<InterpolationReport> {
    check_order(s, false)?;
    if let Some(&d) = delta_grid.iter().find(|&&d| !(d > 0.0 && d < 0.5)) {
        return Err(Error::InvalidParameter(format!("delta {d} outside (0, 1/2)")));
    }
    let mut raw = Vec::with_capacity(delta_grid.len());
    let mut normalized = Vec::with_capacity(delta_grid.len());
    for &delta in delta_grid {
        let m = family(delta)?;
        let r = seminorm_fourier(&m.u, s)? / m.mm;
        raw.push(r);
        normalized.push(r * interpolation_normalization(s, delta));
    }
    let sup = normalized.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(InterpolationReport {
        s,
        delta_grid: delta_grid.to_vec(),
        raw_ratio: raw,
        normalized_ratio: normalized,
        sup_normalized: sup,
    })
}

/// The sharp-transition family on grids with at least 64 cells per layer.
pub fn udelta_family(w: &DoubleWell) -> impl Fn(f64) -> Result<FamilyMember> + '_ {
    move |delta| {
        let grid = Grid1D::power_of_two_at_least((64.0 / delta).ceil() as usize);
        let ud = crate::constructions::sampled_udelta(delta, grid)?;
        let mm = crate::energy::modica_mortola_sampled(&ud.u, &ud.du, delta, w)?;
        Ok(FamilyMember { u: ud.u, mm })
    }
}

/// `Σ_{k≠0} min{1, k²/M²} |û_k|²`.
pub fn min_kernel_sum(u: &SampledField, m: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::InvalidParameter(format!("M must be positive, got {m}")));
    }
    let uh = forward_transform(u);
    Ok(uh.weighted_sum(|k| {
        if k == 0 {
            0.0
        } else {
            ((k * k) as f64 / (m * m)).min(1.0)
        }
    }))
}

/// `(lhs, rhs_factor)` with `lhs` the energy released by the optimal height
/// and `rhs_factor = Λ²/√(κσ) · MM_δ(u)`.
pub fn coupling_interpolation_check(u: &SampledField, p: &Params, delta: f64, w: &DoubleWell) -> Result<(f64, f64)> {
    if !(p.kappa > 0.0 && p.sigma >= p.kappa) {
        return Err(Error::InvalidParameter(format!(
            "need sigma >= kappa > 0, got sigma = {}, kappa = {}",
            p.sigma, p.kappa
        )));
    }
    u.ensure_admissible(ADMISSIBILITY_TOL)?;
    let lhs = coupling_gain(&forward_transform(u), p)?;
    let rhs = p.lambda.powi(2) / (p.kappa * p.sigma).sqrt() * modica_mortola(u, delta, w)?;
    Ok((lhs, rhs))
}

/// `δ` minimizing `MM_δ(u)`, namely `(∫W(u) / ∫|u'|²)^{1/2}`.
pub fn optimal_mm_delta(u: &SampledField, w: &DoubleWell) -> f64 {
    let well = crate::energy::well_integral(u, w);
    let grad = crate::energy::gradient_norm_sq(&forward_transform(u));
    (well / grad).sqrt()
}

/// One corpus entry of the coupling-constant fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingSample {
    pub profile: String,
    pub sigma_over_kappa: f64,
    pub delta: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingFit {
    pub grid_n: usize,
    pub c_int: f64,
    pub samples: Vec<CouplingSample>,
}

/// Empirical `ĉ_int = sup lhs / rhs_factor` over a fixed corpus of sharp
/// transitions, oscillatory profiles and single modes, with `σ/κ` in
/// `{1, 4, 16, 64}` and `δ` chosen to minimize `MM_δ` per profile.
pub fn fit_coupling_constant(grid: Grid1D, w: &DoubleWell) -> Result<CouplingFit> {
    let mut corpus: Vec<(String, SampledField)> = Vec::new();
    for delta in [0.2, 0.1, 0.05, 0.02] {
        let u = crate::profile::PeriodicProfile::sample_cells(&crate::constructions::udelta_profile(delta), grid);
        corpus.push((format!("udelta({delta})"), u));
    }
    for (n, eps) in [(1u32, 1.0), (2, 0.5), (4, 0.5), (8, 0.25)] {
        let u = crate::constructions::oscillatory_profile(n, eps, 0.0)
            .u
            .sample_cells(grid);
        corpus.push((format!("oscillatory({n},{eps})"), u));
    }
    for k in [1u32, 2, 4, 8] {
        let u = SampledField::from_fn(grid, |x| (2.0 * PI * k as f64 * x).cos());
        corpus.push((format!("cos({k})"), u));
    }
    let mut samples = Vec::new();
    let mut c_int = 0.0f64;
    for (name, u) in &corpus {
        let delta = optimal_mm_delta(u, w);
        for ratio_sk in [1.0, 4.0, 16.0, 64.0] {
            let p = Params::new(1.0, ratio_sk, 1.0, 1.0)?;
            let (lhs, rhs) = coupling_interpolation_check(u, &p, delta, w)?;
            let ratio = lhs / rhs;
            c_int = c_int.max(ratio);
            samples.push(CouplingSample {
                profile: name.clone(),
                sigma_over_kappa: ratio_sk,
                delta,
                ratio,
            });
        }
    }
    Ok(CouplingFit {
        grid_n: grid.n_samples(),
        c_int,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{sampled_udelta, udelta_profile};
    use crate::grid::project_euclidean;
    use crate::potential::builtin_well;
    use crate::sweep::fit::linear_fit;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn band_limited(grid: Grid1D, rng: &mut ChaCha8Rng, modes: usize) -> SampledField {
        let amps: Vec<(f64, f64)> = (0..modes)
            .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        SampledField::from_fn(grid, |x| {
            amps.iter()
                .enumerate()
                .map(|(i, (a, b))| {
                    let t = 2.0 * PI * (i + 1) as f64 * x;
                    (a * t.cos() + b * t.sin()) / (i + 1) as f64
                })
                .sum()
        })
    }

    /// Direct O(N²) evaluation of the periodic double sum with the same
    /// lag weights.
    fn direct_periodic(u: &SampledField, s: f64) -> f64 {
        let n = u.len();
        let h = 1.0 / n as f64;
        let v = u.values();
        let mut total = 0.0;
        for m in 1..=n / 2 {
            let d: f64 = (0..n).map(|j| (v[(j + m) % n] - v[j]).powi(2)).sum::<f64>() / n as f64;
            total += 2.0 * lag_weight(m, h, 0.5, s) * d;
        }
        total
    }

    #[test]
    fn fourier_seminorm_examples() {
        let g = Grid1D::new(64).unwrap();
        let c = SampledField::from_fn(g, |x| (2.0 * PI * x).cos());
        for s in [0.1, 0.5, 0.9, 1.0] {
            assert!((seminorm_fourier(&c, s).unwrap() - 0.5).abs() < 1e-14);
        }
        assert!(seminorm_fourier(&SampledField::from_fn(g, |_| 2.0), 0.5).unwrap() < 1e-28);
        assert!(seminorm_fourier(&c, 0.0).is_err());
        assert!(seminorm_fourier(&c, 1.5).is_err());
    }

    #[test]
    fn half_seminorm_of_udelta_grows_logarithmically() {
        let g = Grid1D::new(4096).unwrap();
        let deltas = [0.2, 0.1, 0.05, 0.02];
        let vals: Vec<f64> = deltas
            .iter()
            .map(|&d| seminorm_fourier(&udelta_profile(d).sample_cells(g), 0.5).unwrap())
            .collect();
        let xs: Vec<f64> = deltas.iter().map(|d| (1.0 / d).ln()).collect();
        assert!(linear_fit(&xs, &vals).unwrap().slope > 0.0);
    }

    #[test]
    fn fft_double_sum_matches_direct_sum() {
        let g = Grid1D::new(128).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for s in [0.25, 0.5, 0.75] {
            let u = band_limited(g, &mut rng, 10);
            let fast = seminorm_double_integral_periodic(&u, s).unwrap().off_diagonal;
            let slow = direct_periodic(&u, s);
            assert!((fast - slow).abs() < 1e-10 * slow);
        }
        let c = SampledField::from_fn(g, |_| 0.3);
        assert!(seminorm_double_integral_periodic(&c, 0.5).unwrap().total.abs() < 1e-12);
    }

    #[test]
    fn diagonal_estimate_is_below_its_bound() {
        let g = Grid1D::new(256).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let u = band_limited(g, &mut rng, 6);
        let e = seminorm_double_integral_periodic(&u, 0.5).unwrap();
        assert!(e.diagonal <= e.diagonal_bound);
        assert!(e.diagonal < 0.05 * e.total);
    }

    #[test]
    fn equivalence_constant_values() {
        let (lo, hi) = equivalence_constants(0.5, 1).unwrap();
        assert_eq!(lo, 0.25);
        assert!((hi - 4.0 * PI * PI).abs() < 1e-5);
        // per half line: 2 (2π)^{2s} (-Γ(-2s) cos(πs))
        for s in [0.1, 0.25, 0.4, 0.6, 0.75, 0.9] {
            let (_, hi) = equivalence_constants(s, 1).unwrap();
            let exact = 4.0 * (2.0 * PI).powf(2.0 * s) * (-gamma(-2.0 * s) * (PI * s).cos());
            assert!((hi - exact).abs() < 1e-5 * exact, "s = {s}: {hi} vs {exact}");
        }
        let (_, one) = equivalence_constants(0.25, 1).unwrap();
        assert!((one - 8.0 * PI).abs() < 1e-5);
        for s in [0.25, 0.5, 0.75] {
            for d in [1, 2] {
                let (lo, hi) = equivalence_constants(s, d).unwrap();
                assert!(lo < hi);
            }
        }
        assert!(equivalence_constants(0.5, 3).is_err());
    }

    #[test]
    fn two_dimensional_reduction_factor() {
        // ∫_ℝ (1 + t²)^{-1-s} dt by quadrature
        let rule = gauss_legendre(40);
        for s in [0.25, 0.5, 0.75] {
            let num: f64 = (0..4000)
                .map(|i| {
                    let a = i as f64 * 0.05;
                    gauss_integrate(|t| 2.0 * (1.0 + t * t).powf(-1.0 - s), a, a + 0.05, &rule)
                })
                .sum::<f64>()
                + 2.0 * 200f64.powf(-1.0 - 2.0 * s) / (1.0 + 2.0 * s);
            let (_, one) = equivalence_constants(s, 1).unwrap();
            let (_, two) = equivalence_constants(s, 2).unwrap();
            assert!((two / one - num).abs() < 1e-6, "s = {s}");
        }
    }

    #[test]
    fn sandwich_on_band_limited_fields() {
        let g = Grid1D::new(512).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for s in [0.25, 0.5, 0.75] {
            let (lo, hi) = equivalence_constants(s, 1).unwrap();
            for _ in 0..10 {
                let u = band_limited(g, &mut rng, 12);
                let f = seminorm_fourier(&u, s).unwrap();
                let d = seminorm_double_integral_periodic(&u, s).unwrap().total;
                assert!(lo * f <= d * 1.05 && d <= hi * f * 1.05, "s = {s}: {lo} {d} {hi} {f}");
            }
        }
    }

    #[test]
    fn udelta_double_integral_exceeds_closed_form_bound() {
        let g = Grid1D::new(8192).unwrap();
        let ud = sampled_udelta(0.01, g).unwrap();
        let e = seminorm_double_integral_periodic(&ud.u, 0.5).unwrap();
        assert!(
            e.total >= ud.half_lower_bound - 0.1,
            "{} vs {}",
            e.total,
            ud.half_lower_bound
        );
    }

    #[test]
    fn domain_integral_oracles() {
        let n = 512;
        let c = vec![1.5; n];
        assert!(seminorm_double_integral_domain(&c, 1.0, 0.3).unwrap().total.abs() < 1e-10);
        let s = 0.25;
        let exact = 2.0 / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s));
        let lin = |n: usize| -> f64 {
            let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
            seminorm_double_integral_domain(&xs, 1.0, s).unwrap().total
        };
        let a = lin(512);
        let b = lin(1024);
        assert!((a - b).abs() < 0.01 * b);
        assert!((b - exact).abs() < 0.01 * exact, "{b} vs {exact}");
    }

    #[test]
    fn domain_integral_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n: usize = 200;
        let vals: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let h = 2.0 / n as f64;
        let s = 0.4;
        let fast = seminorm_double_integral_domain(&vals, 2.0, s).unwrap().off_diagonal;
        let mut slow = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let m = i.abs_diff(j);
                    slow += (vals[i] - vals[j]).powi(2) * h * lag_weight(m, h, f64::INFINITY, s);
                }
            }
        }
        assert!((fast - slow).abs() < 1e-9 * slow);
    }

    #[test]
    fn domain_integral_of_restricted_udelta_grows_like_log() {
        let deltas = [0.1, 0.05, 0.02, 0.01, 0.005];
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &d in &deltas {
            let n = (128.0 / d) as usize;
            let prof = udelta_profile(d);
            let vals: Vec<f64> = (0..n).map(|i| prof.eval((i as f64 + 0.5) / n as f64)).collect();
            let e = seminorm_double_integral_domain(&vals, 1.0, 0.5).unwrap().total;
            // continuum MM_δ(u_δ) for the quartic well
            let mm = 8.0 + 16.0 / 15.0;
            xs.push((1.0 / d).ln());
            ys.push(e / mm);
        }
        let fit = linear_fit(&xs, &ys).unwrap();
        assert!(fit.slope > 0.0 && fit.r2 > 0.95);
    }

    #[test]
    fn linear_interpolation_examples() {
        let g = Grid1D::new(64).unwrap();
        let c = SampledField::from_fn(g, |x| (2.0 * PI * x).cos());
        let (l, r) = linear_interpolation_check(&c, 0.5, 1.0).unwrap();
        assert!((l - 0.5).abs() < 1e-14 && (r - 1.0).abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let u = band_limited(g, &mut rng, 16);
            let s = rng.random_range(0.05..0.95);
            let d = rng.random_range(0.01..2.0);
            linear_interpolation_check(&u, s, d).unwrap();
            // optimal δ = ‖u‖ / |u|_{H¹}
            let l2 = u.l2_norm_sq().sqrt();
            let h1 = seminorm_h1_integer(&u).sqrt();
            let (_, r) = linear_interpolation_check(&u, s, l2 / h1).unwrap();
            let target = 2.0 * l2.powf(2.0 * (1.0 - s)) * h1.powf(2.0 * s);
            assert!(r <= 2.0 * target && r >= 0.5 * target);
        }
    }

    #[test]
    fn fourier_seminorm_is_monotone_in_order() {
        let g = Grid1D::new(128).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let u = band_limited(g, &mut rng, 20);
            let mut prev = 0.0;
            for i in 1..=10 {
                let v = seminorm_fourier(&u, i as f64 / 10.0).unwrap();
                assert!(v >= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn interpolation_report_three_cases() {
        let w = builtin_well("quartic").unwrap();
        let fam = udelta_family(&w);
        let grid = [0.4, 0.2, 0.1, 0.05, 0.02, 0.01];
        let r = interpolation_report(&fam, 0.25, &grid).unwrap();
        let at_tenth = r.raw_ratio[2];
        assert!(r.raw_ratio.iter().all(|&x| x <= 2.0 * at_tenth));
        let r = interpolation_report(&fam, 0.5, &grid).unwrap();
        let xs: Vec<f64> = grid.iter().map(|d| (1.0 / d).ln()).collect();
        let fit = linear_fit(&xs, &r.raw_ratio).unwrap();
        assert!(fit.slope > 0.0);
        assert!(r.sup_normalized.is_finite());
        assert!(interpolation_report(&fam, 0.5, &[0.6]).is_err());
    }

    #[test]
    fn min_kernel_examples() {
        let g = Grid1D::new(64).unwrap();
        let c = SampledField::from_fn(g, |x| (2.0 * PI * x).cos());
        assert!((min_kernel_sum(&c, 2.0).unwrap() - 0.125).abs() < 1e-15);
        assert!(min_kernel_sum(&c, 0.0).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let u = band_limited(g, &mut rng, 20).map(|v| v + 0.3);
            let full = u.l2_norm_sq() - u.mean().powi(2);
            assert!((min_kernel_sum(&u, 0.7).unwrap() - full).abs() < 1e-12);
            for m in [2.0, 5.0, 30.0] {
                let v = min_kernel_sum(&u, m).unwrap();
                assert!(v <= u.l2_norm_sq() + 1e-12);
                assert!(v <= seminorm_h1_integer(&u) / (m * m) + 1e-12);
            }
        }
    }

    #[test]
    fn coupling_check_examples() {
        let w = builtin_well("quartic").unwrap();
        let g = Grid1D::new(256).unwrap();
        let c = SampledField::from_fn(g, |x| (2.0 * PI * x).cos());
        let p = Params::new(1.0, 4.0, 1.0, 1.0).unwrap();
        let (lhs, rhs) = coupling_interpolation_check(&c, &p, 0.1, &w).unwrap();
        assert!((lhs - PI * PI / (4.0 + 4.0 * PI * PI)).abs() < 1e-12);
        assert!(rhs > 0.0);
        let p0 = Params::new(1.0, 4.0, 1.0, 0.0).unwrap();
        assert_eq!(coupling_interpolation_check(&c, &p0, 0.1, &w).unwrap().0, 0.0);
        let bad = Params::new(1.0, 0.5, 1.0, 1.0).unwrap();
        assert!(coupling_interpolation_check(&c, &bad, 0.1, &w).is_err());
    }

    #[test]
    fn coupling_fit_is_stable_under_refinement() {
        let w = builtin_well("quartic").unwrap();
        let a = fit_coupling_constant(Grid1D::new(1024).unwrap(), &w).unwrap();
        let b = fit_coupling_constant(Grid1D::new(2048).unwrap(), &w).unwrap();
        assert!(a.c_int > 0.0 && a.c_int.is_finite());
        assert!((a.c_int - b.c_int).abs() <= 0.3 * b.c_int);
    }

    #[test]
    fn optimal_mm_is_bounded_by_the_phi_integral() {
        let w = builtin_well("quartic").unwrap();
        let g = Grid1D::new(1024).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..10 {
            let u = project_euclidean(&band_limited(g, &mut rng, 8).map(|v| 1.5 * v)).unwrap();
            let d = optimal_mm_delta(&u, &w);
            let mm = modica_mortola(&u, d, &w).unwrap();
            // 2 ∫ √W(u) |u'| with the spectral derivative
            let du = crate::grid::inverse_transform(&crate::grid::derivative(&forward_transform(&u), 1).unwrap());
            let phi: f64 = u
                .values()
                .iter()
                .zip(du.values())
                .map(|(&v, &dv)| w.evaluate(v).sqrt() * dv.abs())
                .sum::<f64>()
                / 1024.0;
            assert!(mm >= 2.0 * phi - 1e-9);
            // Young's inequality is an equality only pointwise; the slack is the
            // mismatch between W and |u'|² profiles
            assert!(mm <= 2.0 * phi * 3.0);
        }
    }
}
