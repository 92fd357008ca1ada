//! Evaluators, Blaschke factors, finite Blaschke products and modified Blaschke
//! products (the Takenaka-Malmquist system).

use num_complex::Complex64;

use crate::hardy::{node, AnalyticFrame};
use crate::{Error, Result};

/// Slack allowed on `|z| <= 1` for points computed on the unit circle.
const BOUNDARY_SLACK: f64 = 1e-12;

fn check_parameter(a: Complex64, what: &str) -> Result<()> {
    if a.norm() < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{what} must lie in the open unit disk, got |{a}| = {}",
            a.norm()
        )))
    }
}

fn check_point(z: Complex64) -> Result<()> {
    if z.norm() <= 1.0 + BOUNDARY_SLACK {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "evaluation point must satisfy |z| <= 1, got {}",
            z.norm()
        )))
    }
}

/// `(z - a) / (1 - conj(a) z)`, the disk automorphism vanishing at `a`.
#[inline]
pub fn blaschke_factor(a: Complex64, z: Complex64) -> Complex64 {
    (z - a) / (1.0 - a.conj() * z)
}

/// Normalized reproducing kernel `e_a(z) = sqrt(1 - |a|^2) / (1 - conj(a) z)`.
#[inline]
pub(crate) fn evaluator_value(a: Complex64, z: Complex64) -> Complex64 {
    (1.0 - a.norm_sqr()).sqrt() / (1.0 - a.conj() * z)
}

pub fn eval_evaluator(a: Complex64, z: Complex64) -> Result<Complex64> {
    check_parameter(a, "evaluator parameter")?;
    check_point(z)?;
    Ok(evaluator_value(a, z))
}

/// The normalized reproducing kernel of H2 at `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluator {
    a: Complex64,
}

impl Evaluator {
    pub fn new(a: Complex64) -> Result<Self> {
        check_parameter(a, "evaluator parameter")?;
        Ok(Self { a })
    }

    pub fn point(&self) -> Complex64 {
        self.a
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        check_point(z)?;
        Ok(evaluator_value(self.a, z))
    }

    /// The kernel sampled on `len` boundary nodes and projected.
    pub fn to_frame(&self, len: usize) -> AnalyticFrame {
        let a = self.a;
        AnalyticFrame::from_fn(len, move |z| evaluator_value(a, z))
    }
}

/// Finite Blaschke product over a multiset of roots; the empty product is 1.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InnerFunction {
    /// Sorted by ascending modulus.
    roots: Vec<Complex64>,
}

impl InnerFunction {
    pub fn new(mut roots: Vec<Complex64>) -> Result<Self> {
        for &r in &roots {
            check_parameter(r, "inner function root")?;
        }
        roots.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        Ok(Self { roots })
    }

    pub fn identity() -> Self {
        Self::default()
    }

    pub fn roots(&self) -> &[Complex64] {
        &self.roots
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        check_point(z)?;
        Ok(self.value(z))
    }

    pub(crate) fn value(&self, z: Complex64) -> Complex64 {
        self.roots
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, &r| acc * blaschke_factor(r, z))
    }

    /// Values at the `len` boundary nodes, without projection.
    pub fn boundary_values(&self, len: usize) -> Vec<Complex64> {
        (0..len).map(|k| self.value(node(k, len))).collect()
    }
}

pub fn eval_inner(inner: &InnerFunction, z: Complex64) -> Result<Complex64> {
    inner.eval(z)
}

/// `B_n(z) = e_{a_n}(z) * prod_{k<n} (z - a_k)/(1 - conj(a_k) z)` for the parameter
/// list `a_1..a_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModifiedBlaschkeProduct {
    params: Vec<Complex64>,
}

impl ModifiedBlaschkeProduct {
    pub fn new(params: Vec<Complex64>) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::InvalidInput(
                "modified Blaschke product needs at least one parameter".into(),
            ));
        }
        for &a in &params {
            check_parameter(a, "TM parameter")?;
        }
        Ok(Self { params })
    }

    /// Level index `n`.
    pub fn level(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[Complex64] {
        &self.params
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        check_point(z)?;
        Ok(self.value(z))
    }

    pub(crate) fn value(&self, z: Complex64) -> Complex64 {
        let (last, head) = self.params.split_last().expect("non-empty by construction");
        head.iter()
            .fold(evaluator_value(*last, z), |acc, &a| acc * blaschke_factor(a, z))
    }

    pub fn to_frame(&self, len: usize) -> AnalyticFrame {
        AnalyticFrame::from_fn(len, |z| self.value(z))
    }
}

pub fn eval_modified_blaschke(params: &[Complex64], z: Complex64) -> Result<Complex64> {
    ModifiedBlaschkeProduct::new(params.to_vec())?.eval(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hardy::{boundary_inner_product, build_grid};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn evaluator_examples() {
        let v = eval_evaluator(c(0.0, 0.0), c(0.3, -0.9)).unwrap();
        assert_eq!(v, c(1.0, 0.0));
        let v = eval_evaluator(c(0.6, 0.0), c(0.0, 0.0)).unwrap();
        assert_relative_eq!(v.re, 0.8, epsilon = 1e-15);
        assert!(eval_evaluator(c(1.0, 0.0), c(0.0, 0.0)).is_err());
        assert!(eval_evaluator(c(0.2, 0.0), c(1.5, 0.0)).is_err());
    }

    #[test]
    fn evaluator_real_part_peaks_toward_its_parameter() {
        let a = c(-0.5, 0.26);
        let len = 600;
        let e = Evaluator::new(a).unwrap();
        let (k_max, _) = (0..len)
            .map(|k| (k, e.eval(node(k, len)).unwrap().re))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        let peak = node(k_max, len);
        let direction = a / a.norm();
        assert!((peak - direction).norm() < 0.02);
    }

    #[test]
    fn evaluator_has_unit_norm() {
        for a in [c(0.0, 0.0), c(0.3, 0.2), c(-0.88, 0.34), c(0.5, -0.44)] {
            let f = Evaluator::new(a).unwrap().to_frame(600);
            assert_relative_eq!(f.norm(), 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn evaluator_conjugation_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let a = Complex64::from_polar(rng.gen_range(0.0..0.99), rng.gen_range(-3.0..3.0));
            let z = Complex64::from_polar(rng.gen_range(0.0..1.0), rng.gen_range(-3.0..3.0));
            let lhs = eval_evaluator(a.conj(), z.conj()).unwrap();
            let rhs = eval_evaluator(a, z).unwrap().conj();
            assert!((lhs - rhs).norm() < 1e-14);
        }
    }

    #[test]
    fn inner_function_examples() {
        let empty = InnerFunction::identity();
        assert_eq!(empty.eval(c(0.3, 0.4)).unwrap(), c(1.0, 0.0));
        let double_origin = InnerFunction::new(vec![c(0.0, 0.0); 2]).unwrap();
        let v = eval_inner(&double_origin, c(0.0, 0.5)).unwrap();
        assert!((v - c(-0.25, 0.0)).norm() < 1e-15);
        assert!(InnerFunction::new(vec![c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn inner_function_is_unimodular_on_boundary() {
        let inner = InnerFunction::new(vec![c(0.5, 0.0), c(0.0, -0.3)]).unwrap();
        for v in inner.boundary_values(600) {
            assert!((v.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn inner_multiplication_is_isometric() {
        let len = 600;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut coeffs = vec![c(0.0, 0.0); len];
        for k in 0..60 {
            coeffs[k] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        let f = AnalyticFrame::from_coeffs(coeffs);
        let inner = InnerFunction::new(vec![c(0.4, 0.3), c(-0.6, 0.1), c(0.0, 0.0)]).unwrap();
        let iv = inner.boundary_values(len);
        let prod = f.map_boundary(|k, v| v * iv[k]);
        assert_relative_eq!(prod.energy(), f.energy(), max_relative = 1e-6);
    }

    #[test]
    fn modified_blaschke_examples() {
        assert_eq!(
            eval_modified_blaschke(&[c(0.0, 0.0)], c(0.7, 0.1)).unwrap(),
            c(1.0, 0.0)
        );
        let v = eval_modified_blaschke(&[c(0.0, 0.0); 3], c(0.4, 0.0)).unwrap();
        assert_relative_eq!(v.re, 0.16, epsilon = 1e-15);
        let b1 = ModifiedBlaschkeProduct::new(vec![c(0.3, 0.0)]).unwrap();
        let b2 = ModifiedBlaschkeProduct::new(vec![c(0.3, 0.0), c(0.0, -0.2)]).unwrap();
        let ip = boundary_inner_product(&b1.to_frame(600), &b2.to_frame(600)).unwrap();
        assert!(ip.norm() < 1e-6);
        // B_1 = e_{a_1}
        let z = c(0.1, 0.2);
        assert_eq!(b1.eval(z).unwrap(), eval_evaluator(c(0.3, 0.0), z).unwrap());
        assert!(ModifiedBlaschkeProduct::new(vec![]).is_err());
    }

    #[test]
    fn tm_system_is_orthonormal_on_grid_parameters() {
        let len = 600;
        let grid = build_grid(0.02, 0.95).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let params: Vec<Complex64> = (0..6)
                .map(|_| grid.points()[rng.gen_range(0..grid.len())])
                .collect();
            let frames: Vec<AnalyticFrame> = (1..=6)
                .map(|n| {
                    ModifiedBlaschkeProduct::new(params[..n].to_vec())
                        .unwrap()
                        .to_frame(len)
                })
                .collect();
            for i in 0..6 {
                for j in 0..6 {
                    let g = boundary_inner_product(&frames[i], &frames[j]).unwrap();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((g - c(want, 0.0)).norm() < 1e-5, "{i},{j}: {g}");
                }
            }
        }
    }

    #[test]
    fn modified_blaschke_boundary_modulus() {
        let params = vec![c(0.2, 0.1), c(-0.5, 0.3), c(0.6, -0.6)];
        let b = ModifiedBlaschkeProduct::new(params.clone()).unwrap();
        let an = params[2];
        for k in 0..600 {
            let z = node(k, 600);
            let want = (1.0 - an.norm_sqr()).sqrt() / (1.0 - an.conj() * z).norm();
            assert!((b.eval(z).unwrap().norm() - want).abs() < 1e-12);
        }
    }
}
