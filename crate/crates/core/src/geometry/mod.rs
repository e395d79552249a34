//! Level-set geometry: contour extraction and the measure-theoretic
//! quantities the weak-solution checks consume.
//!
//! A [`Contour`] is the polyline approximation of `{u = s}`, oriented so the
//! sub-level set `{u < s}` lies on the left. A [`FinitePerimeterSet`] pairs
//! the node indicator of `{u < s}` with its extracted boundary, cached
//! perimeter and area. [`ContourField`] attaches per-vertex data (curvature,
//! normal velocity, normals) to a contour, with degenerate-gradient vertices
//! flagged rather than silently dropped.

mod contour;
mod marching;
mod measure;
mod sets;

pub use contour::{contour_to_csv, Contour, ContourField};
pub use marching::marching_squares;
pub use measure::{
    boundary_distance, curvature_on_contour, hausdorff_distance, normal_velocity_on_contour,
    normals_on_contour, velocity_on_existing_contour,
};
pub use sets::{
    normalize_representative, sublevel_set, sym_diff_area, FinitePerimeterSet, IndicatorGrid,
};

/// Polyline length of a contour (sum over all components).
pub fn perimeter(c: &Contour) -> f64 {
    c.perimeter()
}
