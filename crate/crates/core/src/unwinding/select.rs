use num_complex::Complex64;

use crate::hardy::{AnalyticFrame, DiskGrid};

/// Result of the maximal selection principle on one outer function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub a: Complex64,
    /// `<O, e_a> = sqrt(1 - |a|^2) O(a)`.
    pub c: Complex64,
}

/// Grid point maximizing `(1 - |a|^2) |O(a)|^2`.
///
/// The grid is ordered by modulus then argument, and only a strictly larger objective
/// replaces the incumbent, so ties resolve to the smallest `|a|`, then smallest argument.
pub fn maximal_select(outer: &AnalyticFrame, grid: &DiskGrid) -> Selection {
    let mut best = Complex64::new(0.0, 0.0);
    let mut best_value = Complex64::new(0.0, 0.0);
    let mut best_objective = f64::NEG_INFINITY;
    for &a in grid.points() {
        let weight = 1.0 - a.norm_sqr();
        let value = outer.series(a);
        let objective = weight * value.norm_sqr();
        if objective > best_objective {
            best_objective = objective;
            best = a;
            best_value = value;
        }
    }
    Selection {
        a: best,
        c: (1.0 - best.norm_sqr()).sqrt() * best_value,
    }
}
