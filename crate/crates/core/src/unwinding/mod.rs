//! The unwinding decomposition.
//!
//! Level `n` factors the current remainder `F_n = I_n O_n`, picks `a_n` by maximal
//! selection on `O_n`, and forms
//!
//! ```text
//! F_{n+1} = (O_n - c_n e_{a_n}) (1 - conj(a_n) z) / (z - a_n)
//! ```
//!
//! so that `F_n = I_n (c_n e_{a_n} + (z - a_n)/(1 - conj(a_n) z) F_{n+1})`. Unrolled over
//! `N` levels this gives `F+ = sum c_n I_(n) B_n + remainder` with the cumulative inner
//! function `I_(n) = I_1 ... I_n`.

mod select;
mod zeros;

pub use select::{maximal_select, Selection};
pub use zeros::{
    count_zeros, count_zeros_within, extract_zeros, winding_number, ZeroExtraction, EPS_ZERO,
    MAX_ROOTS_PER_LEVEL,
};

use num_complex::Complex64;

use crate::blaschke::{blaschke_factor, evaluator_value};
use crate::hardy::{hardy_project, node, AnalyticFrame, DiskGrid, RealFrame};
use crate::{Error, Result};

/// Default distance kept between extracted zeros and the unit circle.
pub const DEFAULT_DELTA: f64 = 0.05;
/// Largest supported decomposition depth.
pub const MAX_LEVELS: usize = 64;
/// Relative residual energy at which the loop stops early.
pub const EARLY_STOP: f64 = 1e-12;

/// Output of one unwinding level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelResult {
    pub c: Complex64,
    pub a: Complex64,
    /// Zeros of `F_n` divided out at this level.
    pub roots: Vec<Complex64>,
    /// `||F_{n+1}||^2`.
    pub residual_energy: f64,
    /// Number of roots taken from the grid without Newton convergence.
    pub low_precision_roots: usize,
}

/// Per-window decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionRecord {
    pub c0: f64,
    pub levels: Vec<LevelResult>,
    pub len: usize,
    pub window_index: usize,
    /// `||F+||^2` before the first level.
    pub initial_energy: f64,
}

impl DecompositionRecord {
    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    /// Residual energy after the last level, or the initial energy if there are none.
    pub fn residual_energy(&self) -> f64 {
        self.levels
            .last()
            .map_or(self.initial_energy, |l| l.residual_energy)
    }
}

/// One level of the decomposition. Returns the level and the next remainder.
pub fn unwind_step(
    f_n: &AnalyticFrame,
    grid: &DiskGrid,
    delta: f64,
) -> Result<(LevelResult, AnalyticFrame)> {
    if !(f_n.energy() > 0.0) {
        return Err(Error::InvalidInput("cannot unwind a zero remainder".into()));
    }
    let radius = 1.0 - delta;
    let (f_n, m) = match count_zeros_within(f_n, radius) {
        Ok(m) => (f_n.clone(), m),
        Err(Error::IllConditioned { .. }) => {
            let nudged = zeros::perturb(f_n);
            let m = count_zeros_within(&nudged, radius)?;
            (nudged, m)
        }
        Err(e) => return Err(e),
    };
    let peeled = extract_zeros(&f_n, m, grid, delta)?;
    let outer = &peeled.outer_like;
    let Selection { a, c } = maximal_select(outer, grid);
    let len = outer.len();
    let f_next = outer.map_boundary(|k, v| {
        let z = node(k, len);
        (v - c * evaluator_value(a, z)) / blaschke_factor(a, z)
    });
    let level = LevelResult {
        c,
        a,
        low_precision_roots: peeled.low_precision_count(),
        roots: peeled.roots,
        residual_energy: f_next.energy(),
    };
    Ok((level, f_next))
}

/// Decomposes one real window into at most `n_levels` levels.
pub fn unwind(
    frame: &RealFrame,
    n_levels: usize,
    grid: &DiskGrid,
    delta: f64,
) -> Result<DecompositionRecord> {
    let (fp, c0) = hardy_project(frame);
    unwind_analytic(&fp, c0, n_levels, grid, delta)
}

/// Same as [`unwind`] for a frame already in the Hardy space.
pub fn unwind_analytic(
    fp: &AnalyticFrame,
    c0: f64,
    n_levels: usize,
    grid: &DiskGrid,
    delta: f64,
) -> Result<DecompositionRecord> {
    if !(1..=MAX_LEVELS).contains(&n_levels) {
        return Err(Error::InvalidInput(format!(
            "decomposition level must lie in 1..={MAX_LEVELS}, got {n_levels}"
        )));
    }
    let initial_energy = fp.energy();
    let mut record = DecompositionRecord {
        c0,
        levels: Vec::with_capacity(n_levels),
        len: fp.len(),
        window_index: 0,
        initial_energy,
    };
    let mut f = fp.clone();
    for _ in 0..n_levels {
        if !(f.energy() > EARLY_STOP * initial_energy) {
            break;
        }
        let (level, next) = unwind_step(&f, grid, delta)?;
        record.levels.push(level);
        f = next;
    }
    Ok(record)
}
