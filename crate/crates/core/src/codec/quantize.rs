//! Rounding of decomposition parameters to integers.

use num_complex::Complex64;

use crate::unwinding::DecompositionRecord;
use crate::{Error, Result};

/// Integer scale factors applied before rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Scales {
    /// Multiplier for `c0` and the coefficients `c_n`.
    pub c: u16,
    /// Multiplier for the parameters `a_n` and the roots.
    pub ar: u16,
}

impl Scales {
    /// Scale pair stored in the header of unquantized streams.
    pub const BYPASS: Scales = Scales { c: 0, ar: 0 };

    pub fn is_bypass(&self) -> bool {
        self.c == 0 || self.ar == 0
    }
}

impl Default for Scales {
    fn default() -> Self {
        Scales { c: 1, ar: 100 }
    }
}

/// Integer pair `(re, im)`.
pub type IntPair = (i32, i32);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuantizedLevel {
    pub c: IntPair,
    pub a: IntPair,
    pub roots: Vec<IntPair>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct QuantizedRecord {
    pub c0: i32,
    pub levels: Vec<QuantizedLevel>,
}

impl QuantizedRecord {
    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn root_counts(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.roots.len()).collect()
    }
}

/// Continuous parameters of one level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelParams {
    pub c: Complex64,
    pub a: Complex64,
    pub roots: Vec<Complex64>,
}

/// Continuous parameters of one window, as decoded or as produced by the engine.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamRecord {
    pub c0: f64,
    pub levels: Vec<LevelParams>,
}

impl From<&DecompositionRecord> for ParamRecord {
    fn from(rec: &DecompositionRecord) -> Self {
        ParamRecord {
            c0: rec.c0,
            levels: rec
                .levels
                .iter()
                .map(|l| LevelParams {
                    c: l.c,
                    a: l.a,
                    roots: l.roots.clone(),
                })
                .collect(),
        }
    }
}

fn round_i32(x: f64) -> i32 {
    x.round().clamp(i32::MIN as f64, i32::MAX as f64) as i32
}

fn round_pair(z: Complex64, scale: f64) -> IntPair {
    (round_i32(scale * z.re), round_i32(scale * z.im))
}

/// Quantizes with the default scales.
pub fn quantize(rec: &DecompositionRecord) -> QuantizedRecord {
    quantize_params(&ParamRecord::from(rec), Scales::default())
}

/// Rounds `scale.c * c` and `scale.ar * a`, `scale.ar * r` component-wise.
///
/// A level whose coefficient rounds to zero is dropped. Its factor `(z - a)/(1 - conj(a) z)`
/// and its roots move into the root list of the next kept level, which leaves the
/// reconstruction of the later levels unchanged. Roots of trailing dropped levels are
/// discarded.
pub fn quantize_params(rec: &ParamRecord, scales: Scales) -> QuantizedRecord {
    let sc = scales.c as f64;
    let sar = scales.ar as f64;
    let mut levels = Vec::with_capacity(rec.levels.len());
    let mut carried = Vec::new();
    for l in &rec.levels {
        let c = round_pair(l.c, sc);
        carried.extend(l.roots.iter().map(|&r| round_pair(r, sar)));
        let a = round_pair(l.a, sar);
        if c == (0, 0) {
            carried.push(a);
            continue;
        }
        levels.push(QuantizedLevel {
            c,
            a,
            roots: std::mem::take(&mut carried),
        });
    }
    QuantizedRecord {
        c0: round_i32(sc * rec.c0),
        levels,
    }
}

fn unscale(p: IntPair, scale: f64) -> Complex64 {
    Complex64::new(p.0 as f64 / scale, p.1 as f64 / scale)
}

fn unscale_in_disk(p: IntPair, scale: f64, what: &str) -> Result<Complex64> {
    let z = unscale(p, scale);
    if z.norm() < 1.0 {
        Ok(z)
    } else {
        Err(Error::corrupt(
            0,
            format!("dequantized {what} {z} lies outside the unit disk"),
        ))
    }
}

/// Dequantizes with the default scales.
pub fn dequantize(q: &QuantizedRecord) -> Result<ParamRecord> {
    dequantize_with(q, Scales::default())
}

pub fn dequantize_with(q: &QuantizedRecord, scales: Scales) -> Result<ParamRecord> {
    if scales.is_bypass() {
        return Err(Error::InvalidInput("scale factors must be nonzero".into()));
    }
    let sc = scales.c as f64;
    let sar = scales.ar as f64;
    let levels = q
        .levels
        .iter()
        .map(|l| {
            Ok(LevelParams {
                c: unscale(l.c, sc),
                a: unscale_in_disk(l.a, sar, "parameter")?,
                roots: l
                    .roots
                    .iter()
                    .map(|&r| unscale_in_disk(r, sar, "root"))
                    .collect::<Result<_>>()?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ParamRecord {
        c0: q.c0 as f64 / sc,
        levels,
    })
}
