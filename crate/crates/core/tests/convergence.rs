//! Empirical consistency order of the scheme on the translated paraboloid:
//! the sup error inside the untouched window must drop with order ≥ 0.9
//! when the grid is refined.

use mcflab_core::field::make_grid;
use mcflab_core::initial_data::{build_datum, DatumSpec};
use mcflab_core::solver::{evolve, SolverParams};

fn paraboloid_sup_error(n: usize) -> f64 {
    let grid = make_grid([0.0, 0.0], 3.8, n).unwrap();
    let g = build_datum(
        &DatumSpec::Paraboloid {
            flat_radius: 2.8,
            cap_radius: 3.4,
        },
        &grid,
    )
    .unwrap();
    let u = evolve(&g, &SolverParams::new(0.1)).unwrap();
    let mut worst = 0.0f64;
    for frame in u.frames() {
        let t = frame.time_tag();
        for (i, j) in grid.interior(1) {
            let (x, y) = (grid.x(i), grid.y(j));
            let r2 = x * x + y * y;
            if r2 <= 1.0 {
                worst = worst.max((frame.value(i, j) - (r2 + 2.0 * t)).abs());
            }
        }
    }
    worst
}

#[test]
fn paraboloid_error_order_at_least_09() {
    let coarse = paraboloid_sup_error(129);
    let fine = paraboloid_sup_error(257);
    let order = (coarse / fine).log2();
    println!("sup errors: n=129 → {coarse:.3e}, n=257 → {fine:.3e}, order {order:.2}");
    assert!(
        order >= 0.9,
        "empirical order {order:.2} below 0.9 (errors {coarse:.3e} → {fine:.3e})"
    );
}
