//! Uniform periodic grid on `[0, 1)`, sampled fields, discrete Fourier
//! transforms and the admissibility projections.
//!
//! Coefficients are normalized as `û_k = (1/N) Σ_j u(x_j) e^{-2πi k x_j}` and
//! stored in FFT order: slot `j` holds frequency `j` for `j ≤ N/2` and `j - N`
//! otherwise, so the represented range is `k ∈ {-N/2+1, …, N/2}`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Unnormalized forward DFT in place.
pub(crate) fn fft_forward(buf: &mut [Complex64]) {
    plan(buf.len(), false).process(buf);
}

/// Unnormalized inverse DFT in place.
pub(crate) fn fft_inverse(buf: &mut [Complex64]) {
    plan(buf.len(), true).process(buf);
}

/// Integer frequency stored in FFT slot `index` for a length-`n` transform.
#[inline]
pub fn slot_frequency(index: usize, n: usize) -> i64 {
    if index <= n / 2 {
        index as i64
    } else {
        index as i64 - n as i64
    }
}

/// Uniform grid `x_j = j/N` on the unit torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Grid1D {
    n: usize,
}

impl TryFrom<usize> for Grid1D {
    type Error = Error;
    fn try_from(n: usize) -> Result<Self> {
        Grid1D::new(n)
    }
}

impl From<Grid1D> for usize {
    fn from(g: Grid1D) -> usize {
        g.n
    }
}

impl Grid1D {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "sample count must be even and at least 8, got {n}"
            )));
        }
        Ok(Grid1D { n })
    }

    /// Smallest power of two that is at least `max(min_n, 8)`.
    pub fn power_of_two_at_least(min_n: usize) -> Self {
        Grid1D {
            n: min_n.max(8).next_power_of_two(),
        }
    }

    pub fn n_samples(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        j as f64 / self.n as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |j| self.point(j))
    }

    pub fn nyquist(&self) -> i64 {
        (self.n / 2) as i64
    }

    /// Integer frequency of FFT slot `index`.
    pub fn frequency(&self, index: usize) -> i64 {
        slot_frequency(index, self.n)
    }

    /// Physical angular frequency `2πk` of slot `index`.
    pub fn angular_frequency(&self, index: usize) -> f64 {
        2.0 * PI * self.frequency(index) as f64
    }

    pub fn refine(&self) -> Self {
        Grid1D { n: 2 * self.n }
    }
}

/// Real periodic samples on a [`Grid1D`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledField {
    grid: Grid1D,
    values: Vec<f64>,
}

impl SampledField {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_samples() {
            return Err(Error::LengthMismatch {
                expected: grid.n_samples(),
                actual: values.len(),
            });
        }
        Ok(SampledField { grid, values })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        SampledField {
            grid,
            values: vec![0.0; grid.n_samples()],
        }
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        SampledField {
            grid,
            values: grid.points().map(f).collect(),
        }
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        SampledField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `self + t * other`.
    pub fn axpy(&self, t: f64, other: &SampledField) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        SampledField {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + t * b).collect(),
        }
    }

    /// Discrete L² inner product `(1/N) Σ u_j v_j`.
    pub fn dot(&self, other: &SampledField) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>() / self.values.len() as f64
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn first_non_finite(&self) -> Option<usize> {
        self.values.iter().position(|v| !v.is_finite())
    }

    pub(crate) fn ensure_finite(&self) -> Result<()> {
        match self.first_non_finite() {
            Some(i) => Err(Error::NonFinite(i)),
            None => Ok(()),
        }
    }

    /// First violated admissibility constraint at tolerance `tol`, if any.
    pub fn admissibility_violation(&self, tol: f64) -> Option<String> {
        if let Some(i) = self.first_non_finite() {
            return Some(format!("non-finite value at sample {i}"));
        }
        let m = self.max_abs();
        if m > 1.0 + tol {
            return Some(format!("max |u| = {m} exceeds 1"));
        }
        let mean = self.mean();
        if mean.abs() > tol {
            return Some(format!("mean {mean:e} is not zero"));
        }
        None
    }

    pub fn ensure_admissible(&self, tol: f64) -> Result<()> {
        match self.admissibility_violation(tol) {
            Some(msg) => Err(Error::NotAdmissible(msg)),
            None => Ok(()),
        }
    }
}

/// Fourier coefficients of a field on a [`Grid1D`], in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid1D,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: Grid1D, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n_samples() {
            return Err(Error::LengthMismatch {
                expected: grid.n_samples(),
                actual: coeffs.len(),
            });
        }
        Ok(SpectralField { grid, coeffs })
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    /// Coefficients in FFT order.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `û_k`, zero outside the represented range.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let n = self.grid.n_samples() as i64;
        if k <= -n / 2 || k > n / 2 {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[k.rem_euclid(n) as usize]
    }

    /// `(k, û_k)` pairs in FFT order.
    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let n = self.grid.n_samples();
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(j, c)| (slot_frequency(j, n), *c))
    }

    /// `Σ_k weight(k) |û_k|²` over all represented modes.
    pub fn weighted_sum(&self, weight: impl Fn(i64) -> f64) -> f64 {
        self.modes().map(|(k, c)| weight(k) * c.norm_sqr()).sum()
    }

    /// Multiply each coefficient by `f(k)`.
    pub fn scale_modes(&self, f: impl Fn(i64) -> Complex64) -> Self {
        let n = self.grid.n_samples();
        SpectralField {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(j, c)| c * f(slot_frequency(j, n)))
                .collect(),
        }
    }
}

pub fn forward_transform(u: &SampledField) -> SpectralField {
    let n = u.len();
    let mut buf: Vec<Complex64> = u.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_forward(&mut buf);
    let inv = 1.0 / n as f64;
    for c in &mut buf {
        *c *= inv;
    }
    SpectralField {
        grid: u.grid(),
        coeffs: buf,
    }
}

/// Real part of the trigonometric interpolant at the grid points.
pub fn inverse_transform(s: &SpectralField) -> SampledField {
    let (values, _) = inverse_transform_with_residual(s);
    SampledField { grid: s.grid, values }
}

/// Inverse transform returning the real part and the largest discarded
/// imaginary component.
pub fn inverse_transform_with_residual(s: &SpectralField) -> (Vec<f64>, f64) {
    let mut buf = s.coeffs.clone();
    fft_inverse(&mut buf);
    let resid = buf.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
    (buf.into_iter().map(|c| c.re).collect(), resid)
}

/// Spectral derivative of order 1 or 2. Odd orders zero the Nyquist mode.
pub fn derivative(s: &SpectralField, order: u32) -> Result<SpectralField> {
    if !(1..=2).contains(&order) {
        return Err(Error::InvalidParameter(format!(
            "derivative order must be 1 or 2, got {order}"
        )));
    }
    let nyq = s.grid.nyquist();
    Ok(s.scale_modes(|k| {
        if order % 2 == 1 && k == nyq {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(0.0, 2.0 * PI * k as f64).powu(order)
    }))
}

/// Periodic rectangle rule `(1/N) Σ f(x_j)`.
pub fn integrate(f: &SampledField) -> f64 {
    f.values().iter().sum::<f64>() / f.len() as f64
}

/// Outcome of [`project_admissible`].
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub field: SampledField,
    pub rounds: usize,
    pub converged: bool,
}

pub const PROJECTION_TOL: f64 = 1e-10;
pub const PROJECTION_ROUNDS: usize = 200;

/// Alternating projection onto the box `[-1, 1]` and the mean-zero hyperplane.
pub fn project_admissible(u: &SampledField) -> Result<Projection> {
    u.ensure_finite()?;
    let mut v = u.values.clone();
    let n = v.len() as f64;
    for round in 0..=PROJECTION_ROUNDS {
        let mean = v.iter().sum::<f64>() / n;
        let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if mean.abs() <= PROJECTION_TOL && max <= 1.0 + PROJECTION_TOL {
            return Ok(Projection {
                field: SampledField {
                    grid: u.grid,
                    values: v,
                },
                rounds: round,
                converged: true,
            });
        }
        if round == PROJECTION_ROUNDS {
            break;
        }
        for x in &mut v {
            *x = x.clamp(-1.0, 1.0);
        }
        let mean = v.iter().sum::<f64>() / n;
        for x in &mut v {
            *x -= mean;
        }
    }
    Ok(Projection {
        field: SampledField {
            grid: u.grid,
            values: v,
        },
        rounds: PROJECTION_ROUNDS,
        converged: false,
    })
}

/// Exact Euclidean projection onto `{|u_j| ≤ 1, Σ u_j = 0}`.
///
/// The projection is `clamp(u - λ, -1, 1)` with `λ` the root of the
/// monotone mean equation.
pub fn project_euclidean(u: &SampledField) -> Result<SampledField> {
    u.ensure_finite()?;
    let values = project_box_mean(u.values());
    Ok(SampledField { grid: u.grid, values })
}

pub(crate) fn project_box_mean(v: &[f64]) -> Vec<f64> {
    let n = v.len() as f64;
    // φ(λ) = Σ clamp(v - λ) is piecewise linear and non-increasing with
    // slope -#free; safeguarded Newton finds its root in a few passes.
    let phi = |lam: f64| -> (f64, usize) {
        let mut sum = 0.0;
        let mut free = 0;
        for x in v {
            let t = x - lam;
            if t >= 1.0 {
                sum += 1.0;
            } else if t <= -1.0 {
                sum -= 1.0;
            } else {
                sum += t;
                free += 1;
            }
        }
        (sum, free)
    };
    let (lo0, hi0) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let mut lo = lo0 - 1.0;
    let mut hi = hi0 + 1.0;
    let mut lam = v.iter().sum::<f64>() / n;
    for _ in 0..200 {
        let (f, free) = phi(lam);
        if f.abs() <= 1e-14 * n {
            break;
        }
        if f > 0.0 {
            lo = lam;
        } else {
            hi = lam;
        }
        let newton = if free > 0 { lam + f / free as f64 } else { f64::NAN };
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if next == lam || hi - lo <= f64::EPSILON * hi.abs().max(lo.abs()).max(1.0) {
            break;
        }
        lam = next;
    }
    let mut out: Vec<f64> = v.iter().map(|x| (x - lam).clamp(-1.0, 1.0)).collect();
    // remove the root-finding residual from the free entries
    let resid = out.iter().sum::<f64>() / n;
    if resid != 0.0 {
        let free = out.iter().filter(|x| x.abs() < 1.0).count();
        if free > 0 {
            let shift = resid * n / free as f64;
            for x in out.iter_mut().filter(|x| x.abs() < 1.0) {
                *x = (*x - shift).clamp(-1.0, 1.0);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn direct_dft(u: &[f64]) -> Vec<Complex64> {
        let n = u.len();
        (0..n)
            .map(|j| {
                let k = slot_frequency(j, n) as f64;
                u.iter()
                    .enumerate()
                    .map(|(m, &v)| Complex64::from_polar(v, -2.0 * PI * k * m as f64 / n as f64))
                    .sum::<Complex64>()
                    / n as f64
            })
            .collect()
    }

    fn band_limited(grid: Grid1D, amps: &[(f64, f64)]) -> SampledField {
        SampledField::from_fn(grid, |x| {
            amps.iter()
                .enumerate()
                .map(|(i, (a, b))| {
                    let w = 2.0 * PI * (i + 1) as f64 * x;
                    a * w.cos() + b * w.sin()
                })
                .sum()
        })
    }

    #[test]
    fn grid_rejects_odd_and_small() {
        assert!(Grid1D::new(7).is_err());
        assert!(Grid1D::new(6).is_err());
        assert!(Grid1D::new(10).is_ok());
        assert_eq!(Grid1D::power_of_two_at_least(100).n_samples(), 128);
    }

    #[test]
    fn constant_and_single_mode_transforms() {
        let g = Grid1D::new(16).unwrap();
        let s = forward_transform(&SampledField::from_fn(g, |_| 1.0));
        assert!((s.coeff(0).re - 1.0).abs() < 1e-15);
        assert!(s.modes().filter(|(k, _)| *k != 0).all(|(_, c)| c.norm() < 1e-15));

        let s = forward_transform(&SampledField::from_fn(g, |x| (2.0 * PI * x).cos()));
        assert!((s.coeff(1) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((s.coeff(-1) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        let rest: f64 = s.modes().filter(|(k, _)| k.abs() != 1).map(|(_, c)| c.norm()).sum();
        assert!(rest < 1e-14);
    }

    #[test]
    fn fft_matches_direct_sum() {
        let g = Grid1D::new(64).unwrap();
        let u = SampledField::from_fn(g, |x| (x * 7.3).sin() * (1.0 - x) + x * x);
        let fast = forward_transform(&u);
        let slow = direct_dft(u.values());
        for (a, b) in fast.coeffs().iter().zip(&slow) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn derivatives_of_trig_modes() {
        let g = Grid1D::new(16).unwrap();
        let u = SampledField::from_fn(g, |x| (2.0 * PI * x).cos());
        let du = inverse_transform(&derivative(&forward_transform(&u), 1).unwrap());
        for (x, v) in g.points().zip(du.values()) {
            assert!((v + 2.0 * PI * (2.0 * PI * x).sin()).abs() < 1e-12);
        }
        let u = SampledField::from_fn(g, |x| (4.0 * PI * x).cos());
        let d2 = inverse_transform(&derivative(&forward_transform(&u), 2).unwrap());
        for (x, v) in g.points().zip(d2.values()) {
            assert!((v + 16.0 * PI * PI * (4.0 * PI * x).cos()).abs() < 1e-10);
        }
        let c = SampledField::from_fn(g, |_| 3.0);
        let dc = inverse_transform(&derivative(&forward_transform(&c), 1).unwrap());
        assert!(dc.max_abs() < 1e-14);
        assert!(derivative(&forward_transform(&c), 3).is_err());
    }

    #[test]
    fn odd_derivative_drops_nyquist() {
        let g = Grid1D::new(8).unwrap();
        let zigzag = SampledField::from_fn(g, |x| (8.0 * PI * x).cos());
        let d = derivative(&forward_transform(&zigzag), 1).unwrap();
        assert!(d.coeffs().iter().all(|c| c.norm() < 1e-12));
    }

    #[test]
    fn rectangle_rule_examples() {
        let g = Grid1D::new(16).unwrap();
        assert_eq!(integrate(&SampledField::from_fn(g, |_| 1.0)), 1.0);
        assert!(integrate(&SampledField::from_fn(g, |x| (2.0 * PI * x).cos())).abs() < 1e-14);
        let v = integrate(&SampledField::from_fn(g, |x| (2.0 * PI * x).cos().powi(2)));
        assert!((v - 0.5).abs() < 1e-14);
    }

    #[test]
    fn projection_examples() {
        let g = Grid1D::new(64).unwrap();
        let u = SampledField::from_fn(g, |x| 0.5 * (2.0 * PI * x).sin());
        let p = project_admissible(&u).unwrap();
        assert!(p.converged);
        assert_eq!(p.rounds, 0);
        assert_eq!(p.field, u);

        let p = project_admissible(&SampledField::from_fn(g, |_| 0.3)).unwrap();
        assert!(p.field.max_abs() < 1e-15);

        let mut bad = SampledField::zeros(g);
        bad.values_mut()[3] = f64::NAN;
        assert!(matches!(project_admissible(&bad), Err(Error::NonFinite(3))));
    }

    /// Dykstra's algorithm run long enough to serve as a reference projection.
    fn dykstra(v: &[f64], iters: usize) -> Vec<f64> {
        let n = v.len();
        let mut x = v.to_vec();
        let mut p = vec![0.0; n];
        let mut q = vec![0.0; n];
        for _ in 0..iters {
            let y: Vec<f64> = (0..n).map(|i| (x[i] + p[i]).clamp(-1.0, 1.0)).collect();
            for i in 0..n {
                p[i] += x[i] - y[i];
            }
            let z: Vec<f64> = (0..n).map(|i| y[i] + q[i]).collect();
            let m = z.iter().sum::<f64>() / n as f64;
            for i in 0..n {
                x[i] = z[i] - m;
                q[i] = z[i] - x[i];
            }
        }
        x
    }

    #[test]
    fn clipped_cosine_projection_matches_dykstra() {
        let g = Grid1D::new(256).unwrap();
        let u = SampledField::from_fn(g, |x| 2.0 * (2.0 * PI * x).cos());
        let p = project_admissible(&u).unwrap();
        assert!(p.converged);
        assert!((p.field.max_abs() - 1.0).abs() < 1e-12);
        assert!(p.field.mean().abs() <= 1e-10);
        let reference = dykstra(u.values(), 10_000);
        let diff: f64 = p
            .field
            .values()
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            / 256.0;
        assert!(diff.sqrt() < 1e-6);

        let e = project_euclidean(&u).unwrap();
        let diff: f64 = e
            .values()
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            / 256.0;
        assert!(diff.sqrt() < 1e-6);
    }

    #[test]
    fn euclidean_projection_beats_dykstra_on_asymmetric_input() {
        let g = Grid1D::new(64).unwrap();
        let u = SampledField::from_fn(g, |x| 3.0 * x - 0.2 + (9.0 * x).sin());
        let e = project_euclidean(&u).unwrap();
        assert!(e.mean().abs() < 1e-12 && e.max_abs() <= 1.0);
        let reference = dykstra(u.values(), 20_000);
        for (a, b) in e.values().iter().zip(&reference) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    proptest! {
        #[test]
        fn parseval_and_round_trip(amps in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..20),
                                   offset in -1.0f64..1.0) {
            let g = Grid1D::new(64).unwrap();
            let u = band_limited(g, &amps).map(|v| v + offset);
            let s = forward_transform(&u);
            let lhs = integrate(&u.map(|v| v * v));
            let rhs = s.weighted_sum(|_| 1.0);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.max(1e-300));
            let back = inverse_transform(&s);
            let scale = u.max_abs().max(1e-300);
            for (a, b) in u.values().iter().zip(back.values()) {
                prop_assert!((a - b).abs() <= 1e-12 * scale);
            }
        }

        #[test]
        fn real_field_derivatives_stay_real(vals in prop::collection::vec(-1.0f64..1.0, 32)) {
            let g = Grid1D::new(32).unwrap();
            let u = SampledField::new(g, vals).unwrap();
            let s = forward_transform(&u);
            for order in 1..=2 {
                let (_, resid) = inverse_transform_with_residual(&derivative(&s, order).unwrap());
                prop_assert!(resid < 1e-10);
            }
        }

        #[test]
        fn projection_is_idempotent(vals in prop::collection::vec(-3.0f64..3.0, 32)) {
            let g = Grid1D::new(32).unwrap();
            let u = SampledField::new(g, vals).unwrap();
            let p = project_admissible(&u).unwrap();
            let again = project_admissible(&p.field).unwrap();
            if p.converged {
                prop_assert_eq!(&again.field, &p.field);
                prop_assert_eq!(again.rounds, 0);
            }
            let e = project_euclidean(&u).unwrap();
            let e2 = project_euclidean(&e).unwrap();
            for (a, b) in e.values().iter().zip(e2.values()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            prop_assert!(e.mean().abs() < 1e-12);
            prop_assert!(e.max_abs() <= 1.0);
        }
    }
}
