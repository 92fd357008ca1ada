//! Discrete Hardy-space frames on the unit circle.
//!
//! An [`AnalyticFrame`] of length `L` holds the boundary values `F(e^{i 2 pi k / L})` and
//! the spectral coefficients of the same function, with every coefficient at index
//! `k >= ceil(L/2)` held at zero. The pair is kept consistent: every constructor goes
//! through the DFT, and pointwise boundary operations are followed by a projection that
//! discards the upper half of the spectrum.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::fft;
use crate::{Error, Result};

/// Default window length in samples.
pub const DEFAULT_WINDOW: usize = 600;
/// Shortest window accepted by [`RealFrame::new`].
pub const MIN_WINDOW: usize = 8;

/// `ceil(L/2)`: number of spectral slots an analytic frame of length `L` may occupy.
pub fn band_limit(len: usize) -> usize {
    len.div_ceil(2)
}

/// The `k`-th boundary node `e^{i 2 pi k / L}`.
pub fn node(k: usize, len: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * k as f64 / len as f64)
}

/// One fixed-length window of real samples.
#[derive(Debug, Clone, PartialEq)]
pub struct RealFrame {
    samples: Vec<f64>,
    sample_rate_hz: f64,
}

impl RealFrame {
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        if samples.len() < MIN_WINDOW {
            return Err(Error::InvalidInput(format!(
                "frame length {} is below the minimum of {MIN_WINDOW}",
                samples.len()
            )));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidInput(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidInput(format!("sample {i} is not finite")));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    /// Sum of squared samples.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum()
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

/// Boundary values and nonnegative-frequency coefficients of a Hardy-space function.
#[derive(Debug, Clone)]
pub struct AnalyticFrame {
    boundary: Vec<Complex64>,
    coeffs: Vec<Complex64>,
    /// One past the last nonzero coefficient.
    active: usize,
}

impl AnalyticFrame {
    /// Builds a frame from its power-series coefficients. Coefficients at or above
    /// `ceil(L/2)` are dropped.
    pub fn from_coeffs(mut coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "analytic frame needs at least one node");
        let cut = band_limit(coeffs.len());
        coeffs[cut..].fill(Complex64::new(0.0, 0.0));
        let mut boundary = coeffs.clone();
        fft::inverse(&mut boundary);
        let active = active_len(&coeffs);
        Self {
            boundary,
            coeffs,
            active,
        }
    }

    /// Projects arbitrary boundary samples onto the Hardy space.
    pub fn from_boundary(samples: Vec<Complex64>) -> Self {
        assert!(!samples.is_empty(), "analytic frame needs at least one node");
        let mut coeffs = samples;
        let scale = 1.0 / coeffs.len() as f64;
        fft::forward(&mut coeffs);
        for c in coeffs.iter_mut() {
            *c *= scale;
        }
        Self::from_coeffs(coeffs)
    }

    /// Samples `f` at the `len` boundary nodes and projects.
    pub fn from_fn(len: usize, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::from_boundary((0..len).map(|k| f(node(k, len))).collect())
    }

    pub fn zeros(len: usize) -> Self {
        Self::from_coeffs(vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn len(&self) -> usize {
        self.boundary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundary.is_empty()
    }

    pub fn boundary(&self) -> &[Complex64] {
        &self.boundary
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Squared H2 norm, `sum |c_k|^2`.
    pub fn energy(&self) -> f64 {
        self.coeffs[..self.active].iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.energy().sqrt()
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Applies `op(node_index, value)` to every boundary sample and re-projects.
    pub fn map_boundary(&self, op: impl Fn(usize, Complex64) -> Complex64) -> Self {
        Self::from_boundary(
            self.boundary
                .iter()
                .enumerate()
                .map(|(k, &v)| op(k, v))
                .collect(),
        )
    }

    /// Power series value at `z`, `|z| < 1`.
    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        if !(z.norm() < 1.0) {
            return Err(Error::Domain(format!(
                "interior evaluation needs |z| < 1, got |z| = {}",
                z.norm()
            )));
        }
        Ok(self.series(z))
    }

    /// Horner evaluation of the truncated series, no domain check.
    pub(crate) fn series(&self, z: Complex64) -> Complex64 {
        self.coeffs[..self.active]
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Series value and first derivative at `z`.
    pub(crate) fn series_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let mut value = zero;
        let mut deriv = zero;
        for &c in self.coeffs[..self.active].iter().rev() {
            deriv = deriv * z + value;
            value = value * z + c;
        }
        (value, deriv)
    }

    /// Values on the circle of the given radius at the `L` equispaced angles.
    pub fn circle_samples(&self, radius: f64) -> Vec<Complex64> {
        if radius == 1.0 {
            return self.boundary.clone();
        }
        let mut r = 1.0;
        let mut buf: Vec<Complex64> = self
            .coeffs
            .iter()
            .map(|&c| {
                let v = c * r;
                r *= radius;
                v
            })
            .collect();
        fft::inverse(&mut buf);
        buf
    }

    /// Largest relative disagreement between the stored boundary and the inverse DFT
    /// of the stored coefficients.
    pub fn consistency_error(&self) -> f64 {
        let mut synth = self.coeffs.clone();
        fft::inverse(&mut synth);
        let scale = self
            .boundary
            .iter()
            .map(|v| v.norm())
            .fold(0.0_f64, f64::max)
            .max(f64::MIN_POSITIVE);
        synth
            .iter()
            .zip(&self.boundary)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0_f64, f64::max)
            / scale
    }
}

fn active_len(coeffs: &[Complex64]) -> usize {
    coeffs
        .iter()
        .rposition(|c| c.re != 0.0 || c.im != 0.0)
        .map_or(0, |i| i + 1)
}

/// Lifts a real frame to the Hardy space.
///
/// Returns `(F+, c0)` with `c0` the sample mean and `2 Re F+ = F + c0` on the grid for
/// frames without content at the Nyquist bin.
pub fn hardy_project(frame: &RealFrame) -> (AnalyticFrame, f64) {
    let len = frame.len();
    let mut spec: Vec<Complex64> = frame
        .samples()
        .iter()
        .map(|&s| Complex64::new(s, 0.0))
        .collect();
    fft::forward(&mut spec);
    let scale = 1.0 / len as f64;
    for c in spec.iter_mut() {
        *c *= scale;
    }
    let c0 = spec[0].re;
    (AnalyticFrame::from_coeffs(spec), c0)
}

pub fn evaluate_interior(f: &AnalyticFrame, z: Complex64) -> Result<Complex64> {
    f.evaluate(z)
}

/// `(1/L) sum_k f(zeta_k) conj(g(zeta_k))` over the boundary nodes.
pub fn boundary_inner_product(f: &AnalyticFrame, g: &AnalyticFrame) -> Result<Complex64> {
    if f.len() != g.len() {
        return Err(Error::InvalidInput(format!(
            "inner product of frames with lengths {} and {}",
            f.len(),
            g.len()
        )));
    }
    let sum: Complex64 = f
        .boundary()
        .iter()
        .zip(g.boundary())
        .map(|(a, b)| a * b.conj())
        .sum();
    Ok(sum / f.len() as f64)
}

/// Rectangular lattice of candidate points inside the closed disk of radius `r_max`.
#[derive(Debug, Clone)]
pub struct DiskGrid {
    points: Vec<Complex64>,
    resolution: f64,
    r_max: f64,
}

impl DiskGrid {
    /// Points sorted by modulus, then by argument in `[0, 2 pi)`.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Lattice `{(m h, n h)}` intersected with `|a| <= r_max`.
pub fn build_grid(resolution: f64, r_max: f64) -> Result<DiskGrid> {
    if !(resolution > 0.0 && resolution <= 0.5) {
        return Err(Error::InvalidInput(format!(
            "grid resolution must lie in (0, 0.5], got {resolution}"
        )));
    }
    if !(0.5..1.0).contains(&r_max) {
        return Err(Error::InvalidInput(format!(
            "grid radius must lie in [0.5, 1), got {r_max}"
        )));
    }
    let n_max = (r_max / resolution).floor() as i64;
    let mut keyed = Vec::new();
    for m in -n_max..=n_max {
        for n in -n_max..=n_max {
            let p = Complex64::new(m as f64 * resolution, n as f64 * resolution);
            if p.norm() <= r_max {
                let mut arg = p.arg();
                if arg < 0.0 {
                    arg += 2.0 * PI;
                }
                keyed.push((m * m + n * n, arg, p));
            }
        }
    }
    keyed.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    Ok(DiskGrid {
        points: keyed.into_iter().map(|(_, _, p)| p).collect(),
        resolution,
        r_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// O(L^2) DFT written out directly, independent of rustfft.
    fn naive_dft(x: &[f64]) -> Vec<Complex64> {
        let l = x.len();
        (0..l)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(n, &v)| {
                        let t = -2.0 * PI * (k * n % l) as f64 / l as f64;
                        Complex64::from_polar(v, t)
                    })
                    .sum::<Complex64>()
                    / l as f64
            })
            .collect()
    }

    fn band_limited_frame(rng: &mut ChaCha8Rng, len: usize, band: usize) -> AnalyticFrame {
        let mut coeffs = vec![c(0.0, 0.0); len];
        for k in 0..band {
            coeffs[k] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        AnalyticFrame::from_coeffs(coeffs)
    }

    #[test]
    fn frame_rejects_short_and_non_finite() {
        assert!(RealFrame::new(vec![0.0; 7], 360.0).is_err());
        let mut s = vec![0.0; 16];
        s[3] = f64::NAN;
        assert!(matches!(
            RealFrame::new(s, 360.0),
            Err(Error::InvalidInput(_))
        ));
        assert!(RealFrame::new(vec![0.0; 16], 0.0).is_err());
    }

    #[test]
    fn projecting_cosine_gives_half_at_first_bin() {
        let len = 600;
        let samples = (0..len)
            .map(|n| (2.0 * PI * n as f64 / len as f64).cos())
            .collect();
        let (fp, c0) = hardy_project(&RealFrame::new(samples, 360.0).unwrap());
        assert!(c0.abs() < 1e-12);
        assert_relative_eq!(fp.coeffs()[1].re, 0.5, epsilon = 1e-12);
        let others: f64 = fp
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != 1)
            .map(|(_, v)| v.norm())
            .sum();
        assert!(others < 1e-10);
    }

    #[test]
    fn projecting_constant() {
        let (fp, c0) = hardy_project(&RealFrame::new(vec![1.0; 64], 360.0).unwrap());
        assert_relative_eq!(c0, 1.0, epsilon = 1e-14);
        for v in fp.boundary() {
            assert_relative_eq!(v.re, 1.0, epsilon = 1e-12);
            assert!(v.im.abs() < 1e-12);
            assert_relative_eq!(2.0 * v.re, 1.0 + c0, epsilon = 1e-12);
        }
    }

    #[test]
    fn projection_matches_naive_dft() {
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        let samples: Vec<f64> = (0..600).map(|_| rng.gen_range(900.0..1100.0)).collect();
        let oracle = naive_dft(&samples);
        let (fp, _) = hardy_project(&RealFrame::new(samples, 360.0).unwrap());
        for (k, (got, want)) in fp.coeffs().iter().zip(&oracle).enumerate() {
            if k < 300 {
                assert!((got - want).norm() < 1e-9 * want.norm().max(1.0), "bin {k}");
            } else {
                assert_eq!(*got, c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn real_part_relation_holds() {
        // Band-limited real signal, no Nyquist content.
        let len = 600;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let amps: Vec<(f64, f64)> = (0..40)
            .map(|_| (rng.gen_range(-50.0..50.0), rng.gen_range(0.0..6.0)))
            .collect();
        let samples: Vec<f64> = (0..len)
            .map(|n| {
                let t = 2.0 * PI * n as f64 / len as f64;
                1000.0
                    + amps
                        .iter()
                        .enumerate()
                        .map(|(k, (a, ph))| a * ((k + 1) as f64 * t + ph).cos())
                        .sum::<f64>()
            })
            .collect();
        let frame = RealFrame::new(samples.clone(), 360.0).unwrap();
        let (fp, c0) = hardy_project(&frame);
        assert_relative_eq!(c0, samples.iter().sum::<f64>() / len as f64, epsilon = 1e-9);
        for (v, s) in fp.boundary().iter().zip(&samples) {
            assert!((2.0 * v.re - (s + c0)).abs() <= 1e-9 * (s + c0).abs());
        }
        assert!(fp.consistency_error() < 1e-9);
    }

    #[test]
    fn interior_evaluation_examples() {
        let mut one = vec![c(0.0, 0.0); 32];
        one[0] = c(1.0, 0.0);
        let one = AnalyticFrame::from_coeffs(one);
        assert_relative_eq!(one.evaluate(c(0.3, 0.2)).unwrap().re, 1.0);

        let mut z = vec![c(0.0, 0.0); 32];
        z[1] = c(1.0, 0.0);
        let z = AnalyticFrame::from_coeffs(z);
        let v = z.evaluate(c(0.0, 0.5)).unwrap();
        assert!((v - c(0.0, 0.5)).norm() < 1e-15);

        assert!(matches!(z.evaluate(c(1.0, 0.0)), Err(Error::Domain(_))));
        assert!(z.evaluate(c(0.8, 0.7)).is_err());
    }

    #[test]
    fn interior_evaluation_matches_independent_power_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let mut coeffs = vec![c(0.0, 0.0); 32];
        for k in 0..16 {
            coeffs[k] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        let f = AnalyticFrame::from_coeffs(coeffs.clone());
        let z = c(0.4, 0.0);
        // explicit sum of c_k z^k with powi, not Horner
        let oracle: Complex64 = coeffs
            .iter()
            .enumerate()
            .map(|(k, ck)| ck * z.powi(k as i32))
            .sum();
        assert!((f.evaluate(z).unwrap() - oracle).norm() < 1e-12);
        assert_eq!(f.evaluate(c(0.0, 0.0)).unwrap(), coeffs[0]);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = band_limited_frame(&mut rng, 64, 20);
        let z = c(0.3, -0.4);
        let h = 1e-6;
        let fd = (f.series(z + h) - f.series(z - h)) / (2.0 * h);
        let (_, d) = f.series_with_derivative(z);
        assert!((fd - d).norm() < 1e-6 * d.norm().max(1.0));
    }

    #[test]
    fn inner_product_examples() {
        let len = 600;
        let mono = |p: usize| {
            let mut v = vec![c(0.0, 0.0); len];
            v[p] = c(1.0, 0.0);
            AnalyticFrame::from_coeffs(v)
        };
        let ff = boundary_inner_product(&mono(1), &mono(1)).unwrap();
        assert_relative_eq!(ff.re, 1.0, epsilon = 1e-12);
        assert!(ff.im.abs() < 1e-12);
        assert!(boundary_inner_product(&mono(1), &mono(2)).unwrap().norm() < 1e-12);

        let ev = |a: f64| {
            AnalyticFrame::from_fn(len, move |z| {
                let a = c(a, 0.0);
                (1.0 - a.norm_sqr()).sqrt() / (1.0 - a.conj() * z)
            })
        };
        let got = boundary_inner_product(&ev(0.5), &ev(0.3)).unwrap();
        let want = (0.91_f64).sqrt() * (0.75_f64).sqrt() / (1.0 - 0.15);
        assert_relative_eq!(got.re, want, epsilon = 1e-9);
        assert!(got.im.abs() < 1e-12);

        assert!(boundary_inner_product(&mono(1), &AnalyticFrame::zeros(10)).is_err());
    }

    #[test]
    fn grid_small_example() {
        let g = build_grid(0.5, 0.9).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g.points()[0], c(0.0, 0.0));
        assert!(g.points().iter().all(|p| p.norm() <= 0.9));
    }

    #[test]
    fn grid_count_matches_area() {
        let g = build_grid(0.02, 0.95).unwrap();
        let area = (PI * (0.95_f64 / 0.02).powi(2)).floor();
        let n = g.len() as f64;
        assert!(n >= area * 0.98 && n <= area * 1.02, "{n} vs {area}");
        assert!(g.points().iter().all(|p| p.norm() < 1.0));
    }

    #[test]
    fn grid_is_sorted_by_modulus_then_argument() {
        let g = build_grid(0.1, 0.6).unwrap();
        for w in g.points().windows(2) {
            let (a, b) = (w[0], w[1]);
            assert!(a.norm() <= b.norm() + 1e-12);
        }
        // ring at |a| = 0.1 starts at angle 0
        assert_eq!(g.points()[1], c(0.1, 0.0));
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(build_grid(0.0, 0.9).is_err());
        assert!(build_grid(0.02, 1.0).is_err());
        assert!(build_grid(0.02, 0.4).is_err());
    }

    #[test]
    fn grid_covers_the_disk() {
        let h = 0.05;
        let r = 0.9;
        let g = build_grid(h, r).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let z = Complex64::from_polar(r * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..2.0 * PI));
            let d = g
                .points()
                .iter()
                .map(|p| (p - z).norm())
                .fold(f64::INFINITY, f64::min);
            // half-diagonal away from the rim, full diagonal next to it
            let bound = if z.norm() <= r - h * 2f64.sqrt() / 2.0 {
                h * 2f64.sqrt() / 2.0
            } else {
                h * 2f64.sqrt()
            };
            assert!(d <= bound + 1e-12, "z = {z}, d = {d}");
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_frame() -> impl Strategy<Value = AnalyticFrame> {
            proptest::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 1..40).prop_map(|v| {
                let mut coeffs = vec![c(0.0, 0.0); 128];
                for (k, (re, im)) in v.into_iter().enumerate() {
                    coeffs[k] = c(re, im);
                }
                AnalyticFrame::from_coeffs(coeffs)
            })
        }

        proptest! {
            #[test]
            fn projection_is_idempotent(f in arb_frame(), dc in -5.0..5.0f64) {
                // F := 2 Re F+ - c0, project again, expect F+ back
                let mut coeffs = f.coeffs().to_vec();
                coeffs[0] = c(dc, 0.0);
                let fp = AnalyticFrame::from_coeffs(coeffs);
                let samples: Vec<f64> = fp.boundary().iter().map(|v| 2.0 * v.re - dc).collect();
                let (again, c0) = hardy_project(&RealFrame::new(samples, 1.0).unwrap());
                prop_assert!((c0 - dc).abs() <= 1e-9 * (1.0 + dc.abs()));
                let scale = fp.norm().max(1e-12);
                for (a, b) in again.coeffs().iter().zip(fp.coeffs()) {
                    prop_assert!((a - b).norm() <= 1e-9 * scale);
                }
            }

            #[test]
            fn parseval(f in arb_frame()) {
                let ip = boundary_inner_product(&f, &f).unwrap();
                let e: f64 = f.coeffs().iter().map(|v| v.norm_sqr()).sum();
                prop_assert!((ip.re - e).abs() <= 1e-9 * e.max(1e-300));
                prop_assert!(ip.im.abs() <= 1e-9 * e.max(1e-300));
            }
        }
    }

    #[test]
    fn reproducing_identity_on_grid() {
        let len = 600;
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        // band-limited below L/4
        let f = band_limited_frame(&mut rng, len, 150);
        let g = build_grid(0.05, 0.95).unwrap();
        for &a in g.points() {
            let ea = AnalyticFrame::from_fn(len, |z| {
                (1.0 - a.norm_sqr()).sqrt() / (1.0 - a.conj() * z)
            });
            let lhs = boundary_inner_product(&f, &ea).unwrap();
            let rhs = (1.0 - a.norm_sqr()).sqrt() * f.evaluate(a).unwrap();
            assert!((lhs - rhs).norm() <= 1e-6 * f.norm(), "a = {a}");
        }
    }
}
