//! Synthesis of a window from its level parameters.

use num_complex::Complex64;

use super::quantize::{dequantize_with, ParamRecord, QuantizedRecord, Scales};
use crate::blaschke::{blaschke_factor, evaluator_value};
use crate::hardy::node;
use crate::Result;

/// Boundary values of `sum_n c_n I_(n) B_n` at `len` nodes.
pub fn synthesize_analytic(params: &ParamRecord, len: usize) -> Vec<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let mut sum = vec![Complex64::new(0.0, 0.0); len];
    // I_(n) and prod_{k<n} phi_{a_k}, per node
    let mut inner = vec![one; len];
    let mut tail = vec![one; len];
    for l in &params.levels {
        for k in 0..len {
            let z = node(k, len);
            for &r in &l.roots {
                inner[k] *= blaschke_factor(r, z);
            }
            sum[k] += l.c * inner[k] * evaluator_value(l.a, z) * tail[k];
            tail[k] *= blaschke_factor(l.a, z);
        }
    }
    sum
}

/// `2 Re F+_rec - c0` at `len` nodes.
pub fn reconstruct_params(params: &ParamRecord, len: usize) -> Vec<f64> {
    synthesize_analytic(params, len)
        .into_iter()
        .map(|v| 2.0 * v.re - params.c0)
        .collect()
}

/// Reconstructs a quantized window with the default scales.
pub fn reconstruct(q: &QuantizedRecord, len: usize) -> Result<Vec<f64>> {
    reconstruct_with(q, Scales::default(), len)
}

pub fn reconstruct_with(q: &QuantizedRecord, scales: Scales, len: usize) -> Result<Vec<f64>> {
    Ok(reconstruct_params(&dequantize_with(q, scales)?, len))
}
