//! Shared fixtures for the benchmarks.

use mcflab_core::field::{make_grid, ScalarField};
use mcflab_core::initial_data::{build_datum, DatumSpec};

/// Canonical circle datum on an n×n grid of half-width 2.5.
pub fn circle_datum(n: usize) -> ScalarField {
    let grid = make_grid([0.0, 0.0], 2.5, n).unwrap();
    build_datum(
        &DatumSpec::Circle {
            radius: 1.0,
            width: Some(0.5),
            outside: 1.0,
        },
        &grid,
    )
    .unwrap()
}
