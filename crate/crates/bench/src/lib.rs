//! Fixtures shared by the benchmarks in `benches/`.

use membrane_core::grid::project_euclidean;
use membrane_core::{Grid1D, Params, SampledField};

/// Admissible field with a few incommensurate modes, clipped by the projection.
pub fn wavy_field(n: usize) -> SampledField {
    let grid = Grid1D::new(n).expect("valid grid size");
    let tau = std::f64::consts::TAU;
    let raw = SampledField::from_fn(grid, |x| {
        1.4 * (tau * x).sin() + 0.6 * (3.0 * tau * x + 0.4).cos() + 0.3 * (7.0 * tau * x + 1.1).sin()
    });
    project_euclidean(&raw).expect("finite field")
}

/// A supercritical parameter point.
pub fn supercritical() -> Params {
    Params::new(1e-3, 1.0, 1.0, 200.0).expect("valid parameters")
}
