//! Periodic piecewise-polynomial profiles on the unit torus.
//!
//! Construction profiles have corners, so they are sampled by exact cell
//! averages: sample `j` is the mean of the profile over `[x_j, x_j + h)`.
//! Cell averages preserve the integral exactly, and dyadic breakpoints fall
//! on cell edges, so piecewise-constant derivatives are sampled without
//! smearing. All energies are translation invariant, so the half-cell offset
//! from the grid points is immaterial.

use crate::grid::{Grid1D, SampledField};
use crate::quadrature::{gauss_integrate, gauss_legendre};

/// Polynomial `Σ c_k (x - start)^k` on `[start, end)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    pub coeffs: Vec<f64>,
}

impl Piece {
    fn eval(&self, x: f64) -> f64 {
        let t = x - self.start;
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    /// `∫_{start}^{x}` of the piece.
    fn antiderivative(&self, x: f64) -> f64 {
        let t = x - self.start;
        self.coeffs
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (k, c)| acc * t + c / (k + 1) as f64)
            * t
    }

    fn derivative(&self) -> Piece {
        let coeffs = if self.coeffs.len() <= 1 {
            vec![0.0]
        } else {
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c)
                .collect()
        };
        Piece {
            start: self.start,
            end: self.end,
            coeffs,
        }
    }

    fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }
}

/// A periodic function given by polynomial pieces that tile `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicProfile {
    pieces: Vec<Piece>,
}

impl PeriodicProfile {
    /// Pieces must be contiguous, start at 0 and end at 1.
    pub fn new(pieces: Vec<Piece>) -> Self {
        assert!(!pieces.is_empty());
        assert!(pieces[0].start.abs() < 1e-15);
        assert!((pieces.last().unwrap().end - 1.0).abs() < 1e-12);
        for w in pieces.windows(2) {
            assert!((w[0].end - w[1].start).abs() < 1e-12, "pieces must be contiguous");
        }
        PeriodicProfile { pieces }
    }

    /// Piecewise-linear profile through `(x_i, y_i)` nodes, `0 = x_0 < … < x_m = 1`.
    pub fn linear_through(nodes: &[(f64, f64)]) -> Self {
        let pieces = nodes
            .windows(2)
            .filter(|w| w[1].0 > w[0].0)
            .map(|w| {
                let slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
                Piece {
                    start: w[0].0,
                    end: w[1].0,
                    coeffs: vec![w[0].1, slope],
                }
            })
            .collect();
        PeriodicProfile::new(pieces)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    fn locate(&self, x: f64) -> usize {
        let i = self.pieces.partition_point(|p| p.end <= x);
        i.min(self.pieces.len() - 1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = x.rem_euclid(1.0);
        self.pieces[self.locate(x)].eval(x)
    }

    pub fn derivative(&self) -> Self {
        PeriodicProfile {
            pieces: self.pieces.iter().map(Piece::derivative).collect(),
        }
    }

    pub fn max_degree(&self) -> usize {
        self.pieces.iter().map(Piece::degree).max().unwrap_or(0)
    }

    /// `∫_a^b` for `0 ≤ a ≤ b ≤ 1`.
    fn integral_within(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let mut total = 0.0;
        let mut i = self.locate(a);
        while i < self.pieces.len() {
            let p = &self.pieces[i];
            if p.start >= b {
                break;
            }
            let lo = a.max(p.start);
            let hi = b.min(p.end);
            if hi > lo {
                total += p.antiderivative(hi) - p.antiderivative(lo);
            }
            i += 1;
        }
        total
    }

    /// `∫_a^b` for any `a ≤ b` with `b - a ≤ 1`, using periodicity.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let shift = a.div_euclid(1.0);
        let (a, b) = (a - shift, b - shift);
        if b <= 1.0 {
            self.integral_within(a, b)
        } else {
            self.integral_within(a, 1.0) + self.integral_within(0.0, b - 1.0)
        }
    }

    pub fn mean(&self) -> f64 {
        self.integral_within(0.0, 1.0)
    }

    /// Exact averages over the cells `[x_j, x_j + h)`.
    pub fn cell_averages(&self, grid: Grid1D) -> Vec<f64> {
        let h = grid.spacing();
        (0..grid.n_samples())
            .map(|j| {
                let a = grid.point(j);
                self.integral(a, a + h) / h
            })
            .collect()
    }

    pub fn sample_cells(&self, grid: Grid1D) -> SampledField {
        SampledField::new(grid, self.cell_averages(grid)).expect("length matches grid")
    }

    pub fn sample_points(&self, grid: Grid1D) -> Vec<f64> {
        grid.points().map(|x| self.eval(x)).collect()
    }

    /// `∫₀¹ f(p(x)) dx` by Gauss–Legendre on each piece.
    pub fn integrate_composed(&self, f: impl Fn(f64) -> f64, nodes: usize) -> f64 {
        let rule = gauss_legendre(nodes);
        self.pieces
            .iter()
            .map(|p| gauss_integrate(|x| f(p.eval(x)), p.start, p.end, &rule))
            .sum()
    }

    /// `∫₀¹ p(x) q(x) dx`, exact for piecewise polynomials.
    pub fn integral_product(&self, other: &PeriodicProfile) -> f64 {
        let deg = self.max_degree() + other.max_degree();
        let rule = gauss_legendre(deg / 2 + 1);
        let mut cuts: Vec<f64> = self
            .pieces
            .iter()
            .map(|p| p.start)
            .chain(other.pieces.iter().map(|p| p.start))
            .chain(std::iter::once(1.0))
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        cuts.windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                let pa = &self.pieces[self.locate(mid)];
                let pb = &other.pieces[other.locate(mid)];
                gauss_integrate(|x| pa.eval(x) * pb.eval(x), w[0], w[1], &rule)
            })
            .sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        PeriodicProfile {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    start: p.start,
                    end: p.end,
                    coeffs: p.coeffs.iter().map(|c| c * s).collect(),
                })
                .collect(),
        }
    }
}
