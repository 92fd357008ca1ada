//! Zero counting by the argument principle and zero extraction by grid search, Newton
//! refinement and Blaschke-factor deflation.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::blaschke::{blaschke_factor, evaluator_value};
use crate::hardy::{node, AnalyticFrame, DiskGrid};
use crate::{Error, Result};

/// Relative floor on boundary modulus below which the winding sum is not trusted.
pub const EPS_ZERO: f64 = 1e-8;
/// Upper bound on zeros extracted in a single level.
pub const MAX_ROOTS_PER_LEVEL: usize = 64;

const NEWTON_STEPS: usize = 20;
const NEWTON_RESIDUAL: f64 = 1e-8;
const NEWTON_STARTS: usize = 8;

/// Winding number of a closed sampled curve around the origin.
///
/// Sums principal-value phase increments `arg(f[k+1] / f[k])`, closing the loop from the
/// last sample back to the first.
pub fn winding_number(samples: &[Complex64]) -> Result<i64> {
    let max = samples.iter().map(|v| v.norm()).fold(0.0_f64, f64::max);
    let min = samples.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    if !(max > 0.0) || !(min > EPS_ZERO * max) {
        return Err(Error::IllConditioned { min, max });
    }
    let n = samples.len();
    let total: f64 = (0..n)
        .map(|k| (samples[(k + 1) % n] / samples[k]).arg())
        .sum();
    Ok((total / (2.0 * PI)).round() as i64)
}

/// Number of zeros of `f` inside the unit disk.
pub fn count_zeros(f: &AnalyticFrame) -> Result<usize> {
    count_zeros_within(f, 1.0)
}

/// Number of zeros of `f` inside the disk of the given radius.
///
/// Arcs whose phase step exceeds a quarter turn are bisected with direct series
/// evaluation, so zeros close to the circle are not miscounted.
pub fn count_zeros_within(f: &AnalyticFrame, radius: f64) -> Result<usize> {
    let samples = f.circle_samples(radius);
    winding_number(&samples)?;
    let len = samples.len();
    let step = 2.0 * PI / len as f64;
    let total: f64 = (0..len)
        .map(|k| {
            let t0 = step * k as f64;
            arc_phase(f, radius, (t0, samples[k]), (t0 + step, samples[(k + 1) % len]), 0)
        })
        .sum();
    let w = (total / (2.0 * PI)).round() as i64;
    usize::try_from(w).map_err(|_| {
        Error::FactorizationFailed(format!("negative winding number {w} on radius {radius}"))
    })
}

const MAX_PHASE_STEP: f64 = PI / 4.0;
const MAX_BISECTIONS: u32 = 30;

fn arc_phase(
    f: &AnalyticFrame,
    radius: f64,
    (t0, v0): (f64, Complex64),
    (t1, v1): (f64, Complex64),
    depth: u32,
) -> f64 {
    let d = (v1 / v0).arg();
    if d.abs() <= MAX_PHASE_STEP || depth == MAX_BISECTIONS {
        return d;
    }
    let tm = 0.5 * (t0 + t1);
    let vm = f.series(Complex64::from_polar(radius, tm));
    if vm.norm() == 0.0 {
        return d;
    }
    arc_phase(f, radius, (t0, v0), (tm, vm), depth + 1)
        + arc_phase(f, radius, (tm, vm), (t1, v1), depth + 1)
}

/// `f * (1 + 1e-6 e_{0.01})`, used to move zeros off a sampling circle.
pub(crate) fn perturb(f: &AnalyticFrame) -> AnalyticFrame {
    let len = f.len();
    let a = Complex64::new(0.01, 0.0);
    f.map_boundary(|k, v| v * (1.0 + 1e-6 * evaluator_value(a, node(k, len))))
}

/// Outcome of peeling the zeros of one frame.
#[derive(Debug, Clone)]
pub struct ZeroExtraction {
    pub roots: Vec<Complex64>,
    /// Roots that came from the grid without Newton convergence.
    pub low_precision: Vec<bool>,
    /// The input with every extracted Blaschke factor divided out.
    pub outer_like: AnalyticFrame,
}

impl ZeroExtraction {
    pub fn low_precision_count(&self) -> usize {
        self.low_precision.iter().filter(|&&x| x).count()
    }
}

/// Extracts `m` zeros of `f` from the disk of radius `1 - delta`.
///
/// Each zero starts at the grid minimizer of `|G_j|`, is polished by damped Newton on
/// the power series, and is divided out on the boundary as `G_j (1 - conj(r) z)/(z - r)`
/// followed by a Hardy projection. The grid moduli are evaluated once and then divided
/// by `|phi_r|` after each deflation, so a zero costs O(grid) rather than O(grid * L).
pub fn extract_zeros(
    f: &AnalyticFrame,
    m: usize,
    grid: &DiskGrid,
    delta: f64,
) -> Result<ZeroExtraction> {
    let radius = 1.0 - delta;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidInput(format!("delta must lie in (0, 1), got {delta}")));
    }
    if grid.r_max() > radius + 1e-12 {
        return Err(Error::InvalidInput(format!(
            "grid radius {} exceeds 1 - delta = {radius}",
            grid.r_max()
        )));
    }
    if m > MAX_ROOTS_PER_LEVEL {
        return Err(Error::FactorizationFailed(format!(
            "{m} zeros exceeds the per-level cap of {MAX_ROOTS_PER_LEVEL}"
        )));
    }
    let len = f.len();
    let mut g = f.clone();
    let mut roots = Vec::with_capacity(m);
    let mut low_precision = Vec::with_capacity(m);
    // |G_j| on the grid, carried from one deflation to the next
    let mut moduli: Vec<f64> = if m > 0 {
        grid.points().iter().map(|&p| g.series(p).norm()).collect()
    } else {
        Vec::new()
    };
    for _ in 0..m {
        let (root, precise) = locate_zero(&g, grid, &moduli, radius, 1.0 - 0.5 * delta);
        roots.push(root);
        low_precision.push(!precise);
        g = g.map_boundary(|k, v| v / blaschke_factor(root, node(k, len)));
        for (value, &p) in moduli.iter_mut().zip(grid.points()) {
            let phi = blaschke_factor(root, p).norm();
            *value = if phi > 1e-9 {
                *value / phi
            } else {
                g.series(p).norm()
            };
        }
    }
    if m > 0 {
        let left = count_zeros_within(&g, radius)?;
        if left != 0 {
            return Err(Error::FactorizationFailed(format!(
                "{left} zeros remain inside radius {radius} after extracting {m}"
            )));
        }
    }
    Ok(ZeroExtraction {
        roots,
        low_precision,
        outer_like: g,
    })
}

/// One zero of `g` in the closed disk of `radius`; `false` when it is only a grid point.
///
/// Newton runs from the grid points of smallest `|g|`, first from up to
/// `NEWTON_STARTS` well-separated ones and then, if none converged inside `radius`,
/// from every remaining point in the same order. A zero counted inside `radius` can
/// drift slightly outward while earlier roots are divided out, so a converged zero
/// within `slack_radius` is taken when nothing converges inside.
fn locate_zero(
    g: &AnalyticFrame,
    grid: &DiskGrid,
    moduli: &[f64],
    radius: f64,
    slack_radius: f64,
) -> (Complex64, bool) {
    let mut ranked: Vec<(f64, Complex64)> = moduli
        .iter()
        .copied()
        .zip(grid.points().iter().copied())
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
    let scale = g.norm();
    let spacing = 5.0 * grid.resolution();
    let inside = |z: Complex64| {
        let r = z.norm();
        if r <= radius {
            Some(z)
        } else if r <= radius * (1.0 + 1e-9) {
            Some(z * (radius / r))
        } else {
            None
        }
    };
    let mut outside: Option<Complex64> = None;
    let mut keep_outside = |z: Complex64| {
        if outside.is_none() && z.norm() <= slack_radius {
            outside = Some(z);
        }
    };

    let mut tried = vec![false; ranked.len()];
    // starts already used and zeros found outside
    let mut seen: Vec<Complex64> = Vec::new();
    let mut starts = 0;
    for (i, &(_, start)) in ranked.iter().enumerate() {
        if starts == NEWTON_STARTS {
            break;
        }
        if seen.iter().any(|t| (t - start).norm() < spacing) {
            continue;
        }
        starts += 1;
        tried[i] = true;
        seen.push(start);
        if let Some(z) = newton(g, start, scale) {
            if let Some(z) = inside(z) {
                return (z, true);
            }
            seen.push(z);
            keep_outside(z);
        }
    }
    for (i, &(_, start)) in ranked.iter().enumerate() {
        if tried[i] {
            continue;
        }
        if let Some(z) = newton(g, start, scale) {
            if let Some(z) = inside(z) {
                return (z, true);
            }
            keep_outside(z);
        }
    }
    match outside {
        Some(z) => (z, true),
        None => (ranked[0].1, false),
    }
}

/// Damped Newton on the power series; `None` unless the residual falls below the target.
fn newton(g: &AnalyticFrame, start: Complex64, scale: f64) -> Option<Complex64> {
    let target = NEWTON_RESIDUAL * scale;
    let mut z = start;
    let (mut value, mut deriv) = g.series_with_derivative(z);
    for _ in 0..NEWTON_STEPS {
        if value.norm() == 0.0 || deriv.norm() == 0.0 {
            break;
        }
        let step = value / deriv;
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let cand = z - step * t;
            if cand.norm() < 1.0 {
                let (v, d) = g.series_with_derivative(cand);
                if v.norm() < value.norm() {
                    z = cand;
                    value = v;
                    deriv = d;
                    moved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !moved || (step * t).norm() < 1e-15 {
            break;
        }
    }
    (value.norm() <= target).then_some(z)
}
