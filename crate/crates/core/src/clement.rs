//! Kuhn triangulations of the torus in one and two dimensions, Clément-type
//! piecewise-affine approximation, and the nonlocal kernel decomposition.
//!
//! Simplices are enumerated cube by cube in lexicographic order of the lower
//! corner; in two dimensions the cube `[i, i+1] × [j, j+1]` is split along its
//! main diagonal into the path simplices `v → v + e₁ → v + e₁ + e₂` (index
//! `2c`) and `v → v + e₂ → v + e₁ + e₂` (index `2c + 1`).

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{fft_forward, slot_frequency};
use crate::potential::DoubleWell;
use crate::profile::PeriodicProfile;
use crate::quadrature::{gauss_integrate, gauss_legendre};

/// Quadrature rule on the reference simplex in barycentric coordinates,
/// with weights summing to one (so it computes averages).
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexRule {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Grundmann–Möller rule of index `s` on the `n`-simplex, exact for
/// polynomials of degree `2s + 1`.
pub fn grundmann_moller(n: usize, s: usize) -> SimplexRule {
    let degree = 2 * s + 1;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let volume_inv = factorial(n);
    for i in 0..=s {
        let denom = (degree + n - 2 * i) as f64;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let w =
            sign * 2f64.powi(-2 * s as i32) * denom.powi(degree as i32) / (factorial(i) * factorial(degree + n - i));
        for beta in compositions(s - i, n + 1) {
            points.push(beta.iter().map(|&b| (2 * b + 1) as f64 / denom).collect());
            weights.push(w * volume_inv);
        }
    }
    SimplexRule { points, weights }
}

/// Rule exact to at least `order`.
pub fn rule_for_order(d: usize, order: usize) -> SimplexRule {
    grundmann_moller(d, order.saturating_sub(1).div_ceil(2))
}

/// One simplex: unwrapped integer corners and wrapped vertex ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Simplex {
    pub corners: Vec<[i64; 2]>,
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusTriangulation {
    pub d: u32,
    pub l: usize,
    /// Lattice vertices `v / L`, row-major in two dimensions.
    pub vertices: Vec<[f64; 2]>,
    pub simplices: Vec<Simplex>,
    /// Lowest-index simplex incident to each vertex.
    pub vertex_simplex: Vec<usize>,
}

impl TorusTriangulation {
    pub fn simplex_measure(&self) -> f64 {
        1.0 / (factorial(self.d as usize) * (self.l as f64).powi(self.d as i32))
    }

    pub fn diameter(&self) -> f64 {
        (self.d as f64).sqrt() / self.l as f64
    }

    fn vertex_id(&self, c: [i64; 2]) -> usize {
        let l = self.l as i64;
        let i = c[0].rem_euclid(l) as usize;
        if self.d == 1 {
            i
        } else {
            i * self.l + c[1].rem_euclid(l) as usize
        }
    }

    /// Physical point with barycentric coordinates `bary` in simplex `t`.
    pub fn point_in(&self, t: usize, bary: &[f64]) -> [f64; 2] {
        let mut x = [0.0; 2];
        for (c, b) in self.simplices[t].corners.iter().zip(bary) {
            x[0] += b * c[0] as f64;
            x[1] += b * c[1] as f64;
        }
        let l = self.l as f64;
        [x[0] / l, x[1] / l]
    }

    /// Simplex containing `x` and the barycentric coordinates of `x` in it.
    pub fn locate(&self, x: &[f64]) -> (usize, [f64; 3]) {
        let l = self.l as f64;
        let wrap = |v: f64| {
            let s = (v.rem_euclid(1.0)) * l;
            let i = (s.floor() as usize).min(self.l - 1);
            (i, s - i as f64)
        };
        let (i, xi) = wrap(x[0]);
        if self.d == 1 {
            return (i, [1.0 - xi, xi, 0.0]);
        }
        let (j, eta) = wrap(x[1]);
        let cube = 2 * (i * self.l + j);
        if xi >= eta {
            (cube, [1.0 - xi, xi - eta, eta])
        } else {
            (cube + 1, [1.0 - eta, eta - xi, xi])
        }
    }
}

pub fn build_triangulation(d: u32, l: usize) -> Result<TorusTriangulation> {
    if !(d == 1 || d == 2) {
        return Err(Error::InvalidParameter(format!("dimension must be 1 or 2, got {d}")));
    }
    if l < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 cubes per side, got {l}"
        )));
    }
    let li = l as i64;
    let mut tri = TorusTriangulation {
        d,
        l,
        vertices: Vec::new(),
        simplices: Vec::new(),
        vertex_simplex: Vec::new(),
    };
    if d == 1 {
        tri.vertices = (0..l).map(|i| [i as f64 / l as f64, 0.0]).collect();
        for i in 0..li {
            let corners = vec![[i, 0], [i + 1, 0]];
            let vertices = corners.iter().map(|&c| tri.vertex_id(c)).collect();
            tri.simplices.push(Simplex { corners, vertices });
        }
    } else {
        for i in 0..l {
            for j in 0..l {
                tri.vertices.push([i as f64 / l as f64, j as f64 / l as f64]);
            }
        }
        for i in 0..li {
            for j in 0..li {
                for path in [[[1, 0], [1, 1]], [[0, 1], [1, 1]]] {
                    let corners = vec![
                        [i, j],
                        [i + path[0][0], j + path[0][1]],
                        [i + path[1][0], j + path[1][1]],
                    ];
                    let vertices = corners.iter().map(|&c| tri.vertex_id(c)).collect();
                    tri.simplices.push(Simplex { corners, vertices });
                }
            }
        }
    }
    let mut first = vec![usize::MAX; tri.vertices.len()];
    for (t, s) in tri.simplices.iter().enumerate() {
        for &v in &s.vertices {
            if first[v] == usize::MAX {
                first[v] = t;
            }
        }
    }
    if first.contains(&usize::MAX) {
        return Err(Error::InvariantViolation(
            "a lattice vertex has no incident simplex".into(),
        ));
    }
    tri.vertex_simplex = first;
    // d! L^d simplices of measure 1/(d! L^d) tile the unit torus
    let expected = if d == 1 { l } else { 2 * l * l };
    if tri.simplices.len() != expected {
        return Err(Error::InvariantViolation(format!(
            "expected {expected} simplices, built {}",
            tri.simplices.len()
        )));
    }
    Ok(tri)
}

type PointFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&[f64]) -> [f64; 2] + Send + Sync>;

#[derive(Clone)]
enum FieldKind {
    Profile(PeriodicProfile),
    Product(PeriodicProfile, PeriodicProfile),
    Function { f: PointFn, grad: GradFn },
}

/// A field on the `d`-torus that can be evaluated anywhere.
#[derive(Clone)]
pub struct TorusField {
    d: u32,
    kind: FieldKind,
}

impl std::fmt::Debug for TorusField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.kind {
            FieldKind::Profile(_) => "profile",
            FieldKind::Product(..) => "product",
            FieldKind::Function { .. } => "function",
        };
        f.debug_struct("TorusField")
            .field("d", &self.d)
            .field("kind", &kind)
            .finish()
    }
}

/// Resolution of the composite quadratures used for field integrals.
const FINE_LEVEL_1D: usize = 8192;
const FINE_LEVEL_2D: usize = 512;

impl TorusField {
    /// One-dimensional periodic profile.
    pub fn profile(p: PeriodicProfile) -> Self {
        TorusField {
            d: 1,
            kind: FieldKind::Profile(p),
        }
    }

    /// `a(x₁) b(x₂)` on the 2-torus.
    pub fn product(a: PeriodicProfile, b: PeriodicProfile) -> Self {
        TorusField {
            d: 2,
            kind: FieldKind::Product(a, b),
        }
    }

    /// Field from a point function and its gradient.
    pub fn function(
        d: u32,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&[f64]) -> [f64; 2] + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(d == 1 || d == 2) {
            return Err(Error::InvalidParameter(format!("dimension must be 1 or 2, got {d}")));
        }
        Ok(TorusField {
            d,
            kind: FieldKind::Function {
                f: Arc::new(f),
                grad: Arc::new(grad),
            },
        })
    }

    pub fn dimension(&self) -> u32 {
        self.d
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.kind {
            FieldKind::Profile(p) => p.eval(x[0]),
            FieldKind::Product(a, b) => a.eval(x[0]) * b.eval(x[1]),
            FieldKind::Function { f, .. } => f(x),
        }
    }

    /// Samples on the uniform `n^d` grid, row-major.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        let h = 1.0 / n as f64;
        match self.d {
            1 => (0..n).map(|i| self.eval(&[i as f64 * h, 0.0])).collect(),
            _ => {
                let mut v = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        v.push(self.eval(&[i as f64 * h, j as f64 * h]));
                    }
                }
                v
            }
        }
    }

    /// `∫((1/δ) W(u) + δ |∇u|²)`.
    pub fn modica_mortola(&self, delta: f64, w: &DoubleWell) -> Result<f64> {
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
        }
        let (well, grad) = match &self.kind {
            FieldKind::Profile(p) => {
                let d = p.derivative();
                (p.integrate_composed(|t| w.evaluate(t), 8), d.integral_product(&d))
            }
            FieldKind::Product(a, b) => {
                let (da, db) = (a.derivative(), b.derivative());
                let grad =
                    da.integral_product(&da) * b.integral_product(b) + a.integral_product(a) * db.integral_product(&db);
                (tensor_integral(a, b, |s, t| w.evaluate(s * t)), grad)
            }
            FieldKind::Function { f, grad } => {
                let level = if self.d == 1 { FINE_LEVEL_1D } else { FINE_LEVEL_2D };
                let tri = build_triangulation(self.d, level)?;
                let rule = grundmann_moller(self.d as usize, 2);
                let well = integrate_on(&tri, &rule, |x, _| w.evaluate(f(x).clamp(-1.0, 1.0)));
                let g = integrate_on(&tri, &rule, |x, _| {
                    let v = grad(x);
                    v[0] * v[0] + v[1] * v[1]
                });
                (well, g)
            }
        };
        Ok(well / delta + delta * grad)
    }

    /// `Σ_{k≠0} min{1, |k|²/M²} |û_k|²` from `n^d` point samples.
    pub fn min_kernel_sum(&self, m: f64, n: usize) -> Result<f64> {
        if !(m > 0.0) {
            return Err(Error::InvalidParameter(format!("M must be positive, got {m}")));
        }
        let weight = |k2: f64| if k2 == 0.0 { 0.0 } else { (k2 / (m * m)).min(1.0) };
        Ok(fourier_weighted_sum(self.d, n, &self.sample(n), weight))
    }
}

/// `∫∫ g(a(x), b(y)) dx dy` by tensor Gauss–Legendre over piece rectangles.
fn tensor_integral(a: &PeriodicProfile, b: &PeriodicProfile, g: impl Fn(f64, f64) -> f64) -> f64 {
    let rule = gauss_legendre(8);
    let mut total = 0.0;
    for pa in a.pieces() {
        for pb in b.pieces() {
            total += gauss_integrate(
                |x| {
                    let ax = a.eval(x);
                    gauss_integrate(|y| g(ax, b.eval(y)), pb.start, pb.end, &rule)
                },
                pa.start,
                pa.end,
                &rule,
            );
        }
    }
    total
}

/// `Σ_k weight(|k|²) |û_k|²` for `n^d` samples.
pub fn fourier_weighted_sum(d: u32, n: usize, samples: &[f64], weight: impl Fn(f64) -> f64) -> f64 {
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    if d == 1 {
        fft_forward(&mut buf);
        let norm = 1.0 / (n as f64 * n as f64);
        return (0..n)
            .map(|j| {
                let k = slot_frequency(j, n) as f64;
                weight(k * k) * buf[j].norm_sqr() * norm
            })
            .sum();
    }
    for row in buf.chunks_mut(n) {
        fft_forward(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = buf[i * n + j];
        }
        fft_forward(&mut col);
        for i in 0..n {
            buf[i * n + j] = col[i];
        }
    }
    let norm = 1.0 / (n as f64).powi(4);
    let mut total = 0.0;
    for i in 0..n {
        let k1 = slot_frequency(i, n) as f64;
        for j in 0..n {
            let k2 = slot_frequency(j, n) as f64;
            total += weight(k1 * k1 + k2 * k2) * buf[i * n + j].norm_sqr() * norm;
        }
    }
    total
}

/// `∫ f` over the torus by composite simplex quadrature on `tri`; the closure
/// also receives the simplex index.
fn integrate_on(tri: &TorusTriangulation, rule: &SimplexRule, f: impl Fn(&[f64], usize) -> f64) -> f64 {
    let meas = tri.simplex_measure();
    (0..tri.simplices.len())
        .map(|t| {
            rule.points
                .iter()
                .zip(&rule.weights)
                .map(|(b, w)| w * f(&tri.point_in(t, b), t))
                .sum::<f64>()
                * meas
        })
        .sum()
}

/// Piecewise-affine field on a triangulation.
#[derive(Debug, Clone, PartialEq)]
pub struct PAField {
    pub triangulation: TorusTriangulation,
    pub vertex_values: Vec<f64>,
}

impl PAField {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let (t, b) = self.triangulation.locate(x);
        self.triangulation.simplices[t]
            .vertices
            .iter()
            .zip(b)
            .map(|(&v, w)| w * self.vertex_values[v])
            .sum()
    }

    /// Constant gradient on simplex `t`.
    pub fn gradient(&self, t: usize) -> [f64; 2] {
        let tri = &self.triangulation;
        let s = &tri.simplices[t];
        let v: Vec<f64> = s.vertices.iter().map(|&i| self.vertex_values[i]).collect();
        let l = tri.l as f64;
        if tri.d == 1 {
            return [(v[1] - v[0]) * l, 0.0];
        }
        // first path step along e₁ for even simplices, e₂ for odd ones
        if t.is_multiple_of(2) {
            [(v[1] - v[0]) * l, (v[2] - v[1]) * l]
        } else {
            [(v[2] - v[1]) * l, (v[1] - v[0]) * l]
        }
    }

    /// `‖∇u^{(L)}‖²_{L²}`, exact.
    pub fn gradient_norm_sq(&self) -> f64 {
        let meas = self.triangulation.simplex_measure();
        (0..self.triangulation.simplices.len())
            .map(|t| {
                let g = self.gradient(t);
                (g[0] * g[0] + g[1] * g[1]) * meas
            })
            .sum()
    }
}

/// Vertex values `u^{(L)}(v)` = average of `u` over the chosen incident
/// simplex, by a simplex rule exact to degree `quad_order`.
pub fn clement_approximate(u: &TorusField, tri: &TorusTriangulation, quad_order: usize) -> Result<PAField> {
    if quad_order < 2 {
        return Err(Error::InvalidParameter(format!(
            "quadrature order must be at least 2, got {quad_order}"
        )));
    }
    if u.dimension() != tri.d {
        return Err(Error::InvalidParameter(format!(
            "field has dimension {}, triangulation {}",
            u.dimension(),
            tri.d
        )));
    }
    let rule = rule_for_order(tri.d as usize, quad_order);
    let vertex_values = tri
        .vertex_simplex
        .iter()
        .map(|&t| {
            rule.points
                .iter()
                .zip(&rule.weights)
                .map(|(b, w)| w * u.eval(&tri.point_in(t, b)))
                .sum()
        })
        .collect();
    Ok(PAField {
        triangulation: tri.clone(),
        vertex_values,
    })
}

/// `‖u - u^{(L)}‖²_{L²}` by composite quadrature on a nested refinement.
pub fn l2_error_sq(u: &TorusField, pa: &PAField) -> Result<f64> {
    let coarse = &pa.triangulation;
    let target = if coarse.d == 1 { FINE_LEVEL_1D } else { FINE_LEVEL_2D };
    let factor = target.div_ceil(coarse.l).max(1);
    let fine = build_triangulation(coarse.d, coarse.l * factor)?;
    let rule = grundmann_moller(coarse.d as usize, 2);
    Ok(integrate_on(&fine, &rule, |x, _| (u.eval(x) - pa.eval(x)).powi(2)))
}

/// Both sides of the kernel split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelDecomposition {
    /// `Σ_{k≠0} min{1, |k|²/M²} |û_k|²`.
    pub lhs: f64,
    /// `‖u - u^{(L)}‖²_{L²}`.
    pub term_l2: f64,
    /// `‖∇u^{(L)}‖²_{L²}` with the physical gradient.
    pub term_grad: f64,
}

impl KernelDecomposition {
    pub fn rhs(&self, m: f64) -> f64 {
        2.0 * (self.term_l2 + self.term_grad / (m * m))
    }
}

/// Slack allowed on the kernel split for discretization error.
pub const DECOMPOSITION_SLACK: f64 = 1e-6;

/// Fourier resolution used for the kernel sum.
pub fn fourier_resolution(d: u32) -> usize {
    if d == 1 {
        1 << 14
    } else {
        512
    }
}

pub fn kernel_decomposition_check(u: &TorusField, tri: &TorusTriangulation, m: f64) -> Result<KernelDecomposition> {
    if u.dimension() != tri.d {
        return Err(Error::InvalidParameter(format!(
            "field has dimension {}, triangulation {}",
            u.dimension(),
            tri.d
        )));
    }
    let pa = clement_approximate(u, tri, 4)?;
    let out = KernelDecomposition {
        lhs: u.min_kernel_sum(m, fourier_resolution(tri.d))?,
        term_l2: l2_error_sq(u, &pa)?,
        term_grad: pa.gradient_norm_sq(),
    };
    if out.lhs > out.rhs(m) + DECOMPOSITION_SLACK {
        return Err(Error::InvariantViolation(format!(
            "kernel split fails: {} > {} (d = {}, L = {}, M = {m})",
            out.lhs,
            out.rhs(m),
            tri.d,
            tri.l
        )));
    }
    Ok(out)
}

/// `(1/L + L/M²)` with `L = max(1, ⌊M⌋)`.
pub fn nonlocal_scale(m: f64) -> f64 {
    let l = m.floor().max(1.0);
    1.0 / l + l / (m * m)
}

/// `sup` over the family of `lhs / ((1/L + L/M²) MM_δ(u))`, `L = max(1, ⌊M⌋)`.
pub fn nonlocal_inequality_fit(family: &[TorusField], w: &DoubleWell, m: f64, delta: f64) -> Result<f64> {
    if family.is_empty() {
        return Err(Error::InvalidParameter("empty family".into()));
    }
    let mut best = 0.0f64;
    for u in family {
        let lhs = u.min_kernel_sum(m, fourier_resolution(u.dimension()))?;
        let mm = u.modica_mortola(delta, w)?;
        best = best.max(lhs / (nonlocal_scale(m) * mm));
    }
    Ok(best)
}

/// The checkerboard `ψ_δ(x₁) ψ_δ(x₂)` built from the sharp-transition profile.
pub fn checkerboard(delta: f64) -> TorusField {
    let p = crate::constructions::udelta_profile(delta);
    TorusField::product(p.clone(), p)
}

/// `cos(2πx)` on the 1-torus or `cos(2πx₁) cos(2πx₂)` on the 2-torus.
pub fn cosine_field(d: u32) -> TorusField {
    if d == 1 {
        TorusField::function(
            1,
            |x| (2.0 * PI * x[0]).cos(),
            |x| [-2.0 * PI * (2.0 * PI * x[0]).sin(), 0.0],
        )
        .expect("valid dimension")
    } else {
        TorusField::function(
            2,
            |x| (2.0 * PI * x[0]).cos() * (2.0 * PI * x[1]).cos(),
            |x| {
                [
                    -2.0 * PI * (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).cos(),
                    -2.0 * PI * (2.0 * PI * x[0]).cos() * (2.0 * PI * x[1]).sin(),
                ]
            },
        )
        .expect("valid dimension")
    }
}

/// One row of the constant fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClementRow {
    pub d: u32,
    pub l: usize,
    pub m: f64,
    pub delta: f64,
    pub lhs: f64,
    pub term_l2: f64,
    pub term_grad: f64,
    pub mm: f64,
    /// `lhs / ((1/l + l/M²) MM_δ)`.
    pub fitted_c: f64,
}

/// The standard corpus row for `(d, l, M, δ)`: the sharp-transition profile
/// in one dimension, the checkerboard in two.
pub fn corpus_row(d: u32, l: usize, m: f64, delta: f64, w: &DoubleWell) -> Result<ClementRow> {
    let u = if d == 1 {
        TorusField::profile(crate::constructions::udelta_profile(delta))
    } else {
        checkerboard(delta)
    };
    let tri = build_triangulation(d, l)?;
    let k = kernel_decomposition_check(&u, &tri, m)?;
    let mm = u.modica_mortola(delta, w)?;
    let scale = 1.0 / l as f64 + l as f64 / (m * m);
    Ok(ClementRow {
        d,
        l,
        m,
        delta,
        lhs: k.lhs,
        term_l2: k.term_l2,
        term_grad: k.term_grad,
        mm,
        fitted_c: k.lhs / (scale * mm),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::builtin_well;

    #[test]
    fn gm_rules_are_exact_on_monomials() {
        // average of ξ^a η^b over the unit triangle is 2 a! b! / (a + b + 2)!
        for s in 0..4 {
            let rule = grundmann_moller(2, s);
            let wsum: f64 = rule.weights.iter().sum();
            assert!((wsum - 1.0).abs() < 1e-13);
            for a in 0..=(2 * s + 1) {
                for b in 0..=(2 * s + 1 - a) {
                    let q: f64 = rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(p, w)| w * p[1].powi(a as i32) * p[2].powi(b as i32))
                        .sum();
                    let exact = 2.0 * factorial(a) * factorial(b) / factorial(a + b + 2);
                    assert!((q - exact).abs() < 1e-12, "s={s} a={a} b={b}");
                }
            }
        }
        let rule = grundmann_moller(1, 2);
        for a in 0..=5 {
            let q: f64 = rule
                .points
                .iter()
                .zip(&rule.weights)
                .map(|(p, w)| w * p[1].powi(a))
                .sum();
            assert!((q - 1.0 / (a as f64 + 1.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn triangulation_counts_and_geometry() {
        let t = build_triangulation(1, 4).unwrap();
        assert_eq!(t.simplices.len(), 4);
        assert_eq!(t.simplex_measure(), 0.25);
        assert_eq!(t.diameter(), 0.25);
        let t = build_triangulation(2, 2).unwrap();
        assert_eq!(t.simplices.len(), 8);
        assert_eq!(t.simplex_measure(), 0.125);
        for l in [2, 3, 8] {
            let t = build_triangulation(2, l).unwrap();
            let total: f64 = t.simplices.iter().map(|_| t.simplex_measure()).sum();
            assert!((total - 1.0).abs() < 1e-12);
            for s in &t.simplices {
                let mut diam = 0.0f64;
                for a in &s.corners {
                    for b in &s.corners {
                        let dx = (a[0] - b[0]) as f64 / l as f64;
                        let dy = (a[1] - b[1]) as f64 / l as f64;
                        diam = diam.max((dx * dx + dy * dy).sqrt());
                    }
                }
                assert!((diam - t.diameter()).abs() < 1e-15);
            }
            for (v, &s) in t.vertex_simplex.iter().enumerate() {
                assert!(t.simplices[s].vertices.contains(&v));
                assert!(t.simplices[..s].iter().all(|x| !x.vertices.contains(&v)));
            }
        }
        assert!(build_triangulation(3, 4).is_err());
        assert!(build_triangulation(2, 1).is_err());
    }

    #[test]
    fn simplices_are_interior_disjoint() {
        let t = build_triangulation(2, 5).unwrap();
        let mut state = 12345u64;
        for _ in 0..2000 {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let x = (state >> 11) as f64 / (1u64 << 53) as f64;
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let y = (state >> 11) as f64 / (1u64 << 53) as f64;
            let (found, bary) = t.locate(&[x, y]);
            assert!(bary.iter().all(|&b| b >= -1e-12));
            let pt = t.point_in(found, &bary);
            assert!((pt[0] - x).abs() < 1e-12 && (pt[1] - y).abs() < 1e-12);
            // strictly inside exactly one simplex
            let inside = (0..t.simplices.len())
                .filter(|&s| {
                    let c = &t.simplices[s].corners;
                    let l = t.l as f64;
                    let p = |k: usize| [c[k][0] as f64 / l, c[k][1] as f64 / l];
                    let (a, b, cc) = (p(0), p(1), p(2));
                    let det = (b[0] - a[0]) * (cc[1] - a[1]) - (cc[0] - a[0]) * (b[1] - a[1]);
                    let l1 = ((b[0] - x) * (cc[1] - y) - (cc[0] - x) * (b[1] - y)) / det;
                    let l2 = ((cc[0] - x) * (a[1] - y) - (a[0] - x) * (cc[1] - y)) / det;
                    let l3 = 1.0 - l1 - l2;
                    l1 > 1e-12 && l2 > 1e-12 && l3 > 1e-12
                })
                .count();
            assert!(inside <= 1);
        }
    }

    #[test]
    fn pa_field_is_continuous_across_faces() {
        let t = build_triangulation(2, 6).unwrap();
        let vals: Vec<f64> = (0..t.vertices.len()).map(|i| ((i * 37) % 11) as f64 / 11.0).collect();
        let pa = PAField {
            triangulation: t,
            vertex_values: vals,
        };
        // points on the diagonals, horizontal edges and the periodic seam
        for k in 0..200 {
            let s = k as f64 / 200.0;
            for x in [[s, s], [s, 1.0 / 6.0], [s, 0.0], [0.0, s]] {
                let e = 1e-10;
                let a = pa.eval(&[x[0] + e, x[1] - e]);
                let b = pa.eval(&[x[0] - e, x[1] + e]);
                assert!((a - b).abs() < 1e-8);
            }
        }
        let at_one = pa.eval(&[1.0 - 1e-13, 0.5]);
        let at_zero = pa.eval(&[0.0, 0.5]);
        assert!((at_one - at_zero).abs() < 1e-9);
    }

    #[test]
    fn constants_are_reproduced() {
        let w = builtin_well("quartic").unwrap();
        for d in [1, 2] {
            let c = TorusField::function(d, |_| 0.4, |_| [0.0, 0.0]).unwrap();
            let t = build_triangulation(d, 8).unwrap();
            let pa = clement_approximate(&c, &t, 4).unwrap();
            assert!(pa.vertex_values.iter().all(|&v| (v - 0.4).abs() < 1e-14));
            assert!(l2_error_sq(&c, &pa).unwrap() < 1e-24);
            let k = kernel_decomposition_check(&c, &t, 4.0).unwrap();
            assert!(k.lhs < 1e-24 && k.term_grad < 1e-24);
            assert!(c.modica_mortola(0.5, &w).is_ok());
        }
    }

    #[test]
    fn cosine_error_decreases_with_l() {
        let u = cosine_field(1);
        let err = |l: usize| {
            let t = build_triangulation(1, l).unwrap();
            l2_error_sq(&u, &clement_approximate(&u, &t, 4).unwrap())
                .unwrap()
                .sqrt()
        };
        // one-sided averages shift the profile by h/2: error ≈ π / (√2 L)
        let (e64, e128) = (err(64), err(128));
        assert!((e64 - PI / (2f64.sqrt() * 64.0)).abs() < 1e-3, "{e64}");
        assert!((e64 / e128 - 2.0).abs() < 0.05);
        let u = cosine_field(2);
        let e: Vec<f64> = [8, 16, 32]
            .iter()
            .map(|&l| {
                let t = build_triangulation(2, l).unwrap();
                l2_error_sq(&u, &clement_approximate(&u, &t, 4).unwrap()).unwrap()
            })
            .collect();
        assert!(e[0] > e[1] && e[1] > e[2]);
    }

    #[test]
    fn averages_preserve_the_box() {
        let u = checkerboard(0.05);
        let t = build_triangulation(2, 16).unwrap();
        let pa = clement_approximate(&u, &t, 4).unwrap();
        assert!(pa.vertex_values.iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn kernel_split_examples() {
        let t = build_triangulation(1, 16).unwrap();
        let k = kernel_decomposition_check(&cosine_field(1), &t, 8.0).unwrap();
        assert!(k.lhs <= k.rhs(8.0) + 1e-6);
        assert!((k.lhs - 0.5 / 64.0).abs() < 1e-12);
        let t = build_triangulation(2, 16).unwrap();
        let k = kernel_decomposition_check(&checkerboard(0.05), &t, 16.0).unwrap();
        assert!(k.lhs <= k.rhs(16.0));
        let t1 = build_triangulation(1, 8).unwrap();
        assert!(kernel_decomposition_check(&checkerboard(0.05), &t1, 4.0).is_err());
    }

    #[test]
    fn product_mm_matches_composite_quadrature() {
        let w = builtin_well("quartic").unwrap();
        let delta = 0.1;
        let prod = checkerboard(delta);
        let p = crate::constructions::udelta_profile(delta);
        let dp = p.derivative();
        let (p2, dp2) = (p.clone(), dp.clone());
        let f = TorusField::function(
            2,
            move |x| p.eval(x[0]) * p.eval(x[1]),
            move |x| [dp2.eval(x[0]) * p2.eval(x[1]), p2.eval(x[0]) * dp2.eval(x[1])],
        )
        .unwrap();
        let a = prod.modica_mortola(delta, &w).unwrap();
        let b = f.modica_mortola(delta, &w).unwrap();
        assert!((a - b).abs() < 0.01 * a, "{a} vs {b}");
        let _ = dp;
    }

    #[test]
    fn fitted_constant_saturates_as_delta_shrinks() {
        let w = builtin_well("quartic").unwrap();
        let fam = |ds: &[f64]| -> Vec<TorusField> {
            ds.iter()
                .map(|&d| TorusField::profile(crate::constructions::udelta_profile(d)))
                .collect()
        };
        let coarse = fam(&[0.2, 0.1, 0.05]);
        let pre: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&d| nonlocal_inequality_fit(&coarse, &w, 10.0, d).unwrap())
            .collect();
        assert!(pre[0] < pre[1] && pre[1] < pre[2]);
        // once δ M ≪ 1 the constant stops moving
        let sharp = [0.005, 0.0025, 0.00125];
        let cs: Vec<f64> = sharp
            .iter()
            .map(|&d| nonlocal_inequality_fit(&fam(&[d]), &w, 10.0, d).unwrap())
            .collect();
        let mean = cs.iter().sum::<f64>() / 3.0;
        assert!(cs.iter().all(|c| (c / mean - 1.0).abs() < 0.25), "{cs:?}");
        assert!(pre.iter().all(|&c| c < 1.25 * mean));
        let cos = nonlocal_inequality_fit(&[cosine_field(1)], &w, 10.0, 0.1).unwrap();
        assert!(cos.is_finite() && cos < mean);
        assert!(nonlocal_inequality_fit(&[], &w, 10.0, 0.1).is_err());
    }

    #[test]
    fn saturated_kernel_is_the_variance() {
        let w = builtin_well("quartic").unwrap();
        let p = crate::constructions::udelta_profile(0.1);
        let u = TorusField::profile(p.clone());
        let lhs = u.min_kernel_sum(0.5, 1 << 14).unwrap();
        assert!((lhs - p.integral_product(&p)).abs() < 1e-3);
        let c = nonlocal_inequality_fit(&[u], &w, 0.5, 0.1).unwrap();
        assert!(c.is_finite() && c > 0.0);
    }
}
