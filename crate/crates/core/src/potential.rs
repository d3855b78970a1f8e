//! Double-well potentials on `[-1, 1]` and their derived constants.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Number of grid points used by the structural checks.
pub const CHECK_GRID: usize = 10_000;
/// Clamp applied to derivatives that diverge at the wells.
pub const DERIVATIVE_CLAMP: f64 = 1e6;

const PHI_CELLS: usize = 2048;
const PHI_TOL: f64 = 1e-10;

/// A double-well potential `W` vanishing exactly at `±1`.
#[derive(Clone)]
pub struct DoubleWell {
    name: String,
    w: ScalarFn,
    dw: ScalarFn,
    phi_table: Arc<Vec<f64>>,
    max_w: f64,
    c_w: f64,
    c_mm: f64,
    curvature_bound: f64,
}

impl fmt::Debug for DoubleWell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DoubleWell")
            .field("name", &self.name)
            .field("max_w", &self.max_w)
            .field("c_w", &self.c_w)
            .field("c_mm", &self.c_mm)
            .finish()
    }
}

/// Names accepted by [`builtin_well`].
pub const BUILTIN_WELLS: [&str; 3] = ["quartic", "quadratic", "logarithmic"];

pub fn builtin_well(name: &str) -> Result<DoubleWell> {
    match name {
        "quartic" => DoubleWell::from_fns(
            "quartic",
            |t| {
                let a = 1.0 - t * t;
                a * a
            },
            |t| -4.0 * t * (1.0 - t * t),
        ),
        "quadratic" => DoubleWell::from_fns("quadratic", |t| 1.0 - t * t, |t| -2.0 * t),
        "logarithmic" => DoubleWell::from_fns("logarithmic", log_well, |t| {
            ((1.0 - t) / (1.0 + t)).ln().clamp(-DERIVATIVE_CLAMP, DERIVATIVE_CLAMP)
        }),
        other => Err(Error::UnknownWell(other.to_string())),
    }
}

fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

fn log_well(t: f64) -> f64 {
    (-xlogx(1.0 - t) - xlogx(1.0 + t) + 2.0 * std::f64::consts::LN_2).max(0.0)
}

fn check_point(i: usize) -> f64 {
    -1.0 + 2.0 * i as f64 / CHECK_GRID as f64
}

impl DoubleWell {
    /// Build a well from `W` and `W'`, verifying the zero set and the
    /// quadratic growth away from the wells on the check grid.
    pub fn from_fns(
        name: &str,
        w: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dw: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let w: ScalarFn = Arc::new(w);
        let dw: ScalarFn = Arc::new(dw);

        for end in [-1.0, 1.0] {
            let v = w(end);
            if !(v.abs() <= 1e-12) {
                return Err(Error::BrokenPotential(format!("{name}: W({end}) = {v}, expected 0")));
            }
        }
        let mut c_w = f64::INFINITY;
        let mut max_w = 0.0f64;
        let mut arg_max = 0.0;
        for i in 1..CHECK_GRID {
            let x = check_point(i);
            let v = w(x);
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::BrokenPotential(format!("{name}: W({x}) = {v} is not positive")));
            }
            let d = (x - 1.0).powi(2).min((x + 1.0).powi(2));
            c_w = c_w.min(v / d);
            if v > max_w {
                max_w = v;
                arg_max = x;
            }
        }
        c_w *= 0.999;
        let max_w = refine_max(&*w, arg_max, 2.0 / CHECK_GRID as f64).max(max_w);

        // min over [-1/2, 1/2], endpoints included exactly
        let half = CHECK_GRID / 2;
        let m = (0..=half)
            .map(|i| w(-0.5 + i as f64 / half as f64))
            .fold(f64::INFINITY, f64::min);
        let c_mm = m.max(m.sqrt());

        let sqrt_w = |t: f64| w(t).max(0.0).sqrt();
        let mut phi_table = Vec::with_capacity(PHI_CELLS + 1);
        let mut acc = 0.0;
        phi_table.push(0.0);
        for i in 0..PHI_CELLS {
            let a = -1.0 + 2.0 * i as f64 / PHI_CELLS as f64;
            let b = -1.0 + 2.0 * (i + 1) as f64 / PHI_CELLS as f64;
            acc += adaptive_simpson(&sqrt_w, a, b, PHI_TOL / PHI_CELLS as f64);
            phi_table.push(acc);
        }

        let mut curvature_bound = 0.0f64;
        let hstep = 1e-5;
        for i in 1..CHECK_GRID {
            let x = check_point(i).clamp(-1.0 + 1e-3, 1.0 - 1e-3);
            let c = (dw(x + hstep) - dw(x - hstep)) / (2.0 * hstep);
            if c.is_finite() {
                curvature_bound = curvature_bound.max(c.abs());
            }
        }

        Ok(DoubleWell {
            name: name.to_string(),
            w,
            dw,
            phi_table: Arc::new(phi_table),
            max_w,
            c_w,
            c_mm,
            curvature_bound,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn evaluate(&self, t: f64) -> f64 {
        debug_assert!(t.abs() <= 1.0 + 1e-9, "W evaluated outside [-1, 1] at {t}");
        (self.w)(t.clamp(-1.0, 1.0))
    }

    #[inline]
    pub fn derivative(&self, t: f64) -> f64 {
        debug_assert!(t.abs() <= 1.0 + 1e-9, "W' evaluated outside [-1, 1] at {t}");
        (self.dw)(t.clamp(-1.0, 1.0))
    }

    /// `φ(z) = ∫_{-1}^{z} √W`.
    pub fn phi(&self, z: f64) -> f64 {
        let z = z.clamp(-1.0, 1.0);
        let pos = (z + 1.0) * 0.5 * PHI_CELLS as f64;
        let i = (pos.floor() as usize).min(PHI_CELLS - 1);
        let a = -1.0 + 2.0 * i as f64 / PHI_CELLS as f64;
        let sqrt_w = |t: f64| self.evaluate(t).max(0.0).sqrt();
        self.phi_table[i] + adaptive_simpson(&sqrt_w, a, z, PHI_TOL / PHI_CELLS as f64)
    }

    /// `max W` on `[-1, 1]`.
    pub fn max_w(&self) -> f64 {
        self.max_w
    }

    /// Largest `c` with `c · min{|x-1|², |x+1|²} ≤ W(x)` on the check grid, times 0.999.
    pub fn c_w(&self) -> f64 {
        self.c_w
    }

    /// `max{m, √m}` with `m = min W` over `[-1/2, 1/2]`.
    pub fn c_mm(&self) -> f64 {
        self.c_mm
    }

    /// Estimate of `max |W''|` away from the wells.
    pub fn curvature_bound(&self) -> f64 {
        self.curvature_bound
    }
}

fn refine_max(w: &(dyn Fn(f64) -> f64 + Send + Sync), center: f64, radius: f64) -> f64 {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut a = (center - radius).max(-1.0);
    let mut b = (center + radius).min(1.0);
    for _ in 0..80 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if w(c) > w(d) {
            b = d;
        } else {
            a = c;
        }
    }
    w(0.5 * (a + b))
}

/// Largest `|z₁ - z₂|² / |φ(z₁) - φ(z₂)|` over pairs of an `m`-point grid.
///
/// Fails when a ratio exceeds `10 · 2/√c_w`, which no well satisfying the
/// growth condition can produce.
pub fn verify_h3_on(w: &DoubleWell, m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "check grid needs at least 2 points, got {m}"
        )));
    }
    let zs: Vec<f64> = (0..m).map(|i| -1.0 + 2.0 * i as f64 / (m - 1) as f64).collect();
    let phis: Vec<f64> = zs.iter().map(|&z| w.phi(z)).collect();
    let limit = 10.0 * 2.0 / w.c_w().sqrt();
    let mut worst = 0.0f64;
    for i in 0..m {
        for j in (i + 1)..m {
            let dphi = (phis[j] - phis[i]).abs();
            if dphi < 1e-12 {
                continue;
            }
            let r = (zs[j] - zs[i]).powi(2) / dphi;
            if r > limit {
                return Err(Error::BrokenPotential(format!(
                    "{}: ratio {r} at ({}, {}) exceeds {limit}",
                    w.name(),
                    zs[i],
                    zs[j]
                )));
            }
            worst = worst.max(r);
        }
    }
    Ok(worst)
}

pub fn verify_h3(w: &DoubleWell) -> Result<f64> {
    verify_h3_on(w, 1000)
}
