//! Fidelity metrics, a QRS detector and beat matching.

use crate::{Error, Result};

/// Value reported by [`snr`] when the reconstruction is exact.
pub const SNR_CAP_DB: f64 = 99.0;
/// Default matching tolerance in seconds.
pub const DEFAULT_TOLERANCE_S: f64 = 0.010;

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "signals differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

fn error_energy(original: &[f64], reconstructed: &[f64]) -> f64 {
    original
        .iter()
        .zip(reconstructed)
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

/// Percentage root-mean-square difference, `100 sqrt(sum (x - y)^2 / sum x^2)`.
///
/// The denominator is the raw signal energy, not the mean-subtracted one.
pub fn prd(original: &[f64], reconstructed: &[f64]) -> Result<f64> {
    check_lengths(original, reconstructed)?;
    let energy: f64 = original.iter().map(|x| x * x).sum();
    if !(energy > 0.0) {
        return Err(Error::UndefinedMetric("PRD of a zero-energy signal".into()));
    }
    Ok(100.0 * (error_energy(original, reconstructed) / energy).sqrt())
}

/// Signal-to-noise ratio in dB against the mean-subtracted original, capped at
/// [`SNR_CAP_DB`].
pub fn snr(original: &[f64], reconstructed: &[f64]) -> Result<f64> {
    check_lengths(original, reconstructed)?;
    if original.is_empty() {
        return Err(Error::UndefinedMetric("SNR of an empty signal".into()));
    }
    let mean = original.iter().sum::<f64>() / original.len() as f64;
    let variance: f64 = original.iter().map(|x| (x - mean) * (x - mean)).sum();
    if !(variance > 0.0) {
        return Err(Error::UndefinedMetric("SNR of a constant signal".into()));
    }
    let err = error_energy(original, reconstructed);
    if err == 0.0 {
        return Ok(SNR_CAP_DB);
    }
    Ok((10.0 * (variance / err).log10()).min(SNR_CAP_DB))
}

pub fn compression_ratio(n_inp_bits: u64, n_out_bits: u64) -> Result<f64> {
    if n_inp_bits == 0 || n_out_bits == 0 {
        return Err(Error::InvalidInput("bit counts must be positive".into()));
    }
    Ok(n_inp_bits as f64 / n_out_bits as f64)
}

/// Quality score, CR divided by PRD in percent.
pub fn quality_score(cr: f64, prd_percent: f64) -> f64 {
    cr / prd_percent
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityReport {
    pub cr: f64,
    pub prd_percent: f64,
    pub qs: f64,
    pub snr_db: f64,
    pub n_inp_bits: u64,
    pub n_out_bits: u64,
}

impl FidelityReport {
    pub fn new(
        original: &[f64],
        reconstructed: &[f64],
        n_inp_bits: u64,
        n_out_bits: u64,
    ) -> Result<Self> {
        let cr = compression_ratio(n_inp_bits, n_out_bits)?;
        let prd_percent = prd(original, reconstructed)?;
        Ok(Self {
            cr,
            prd_percent,
            qs: quality_score(cr, prd_percent),
            snr_db: snr(original, reconstructed)?,
            n_inp_bits,
            n_out_bits,
        })
    }
}

/// Outcome of matching two detection lists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeatMatchReport {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    /// Percentages; a ratio with an empty denominator counts as 100.
    pub se: f64,
    pub ppv: f64,
    pub f1: f64,
    pub tolerance_s: f64,
}

fn percent(num: usize, den: usize) -> f64 {
    if den == 0 {
        100.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

impl BeatMatchReport {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, tolerance_s: f64) -> Self {
        Self {
            tp,
            fp,
            fn_,
            se: percent(tp, tp + fn_),
            ppv: percent(tp, tp + fp),
            f1: percent(2 * tp, 2 * tp + fn_ + fp),
            tolerance_s,
        }
    }
}

/// One-to-one matching of two sorted index lists.
///
/// Candidate pairs within `tolerance_s` are accepted in order of increasing distance,
/// each index being used at most once.
pub fn match_beats(
    reference: &[usize],
    test: &[usize],
    fs: f64,
    tolerance_s: f64,
) -> BeatMatchReport {
    let within = |d: usize| d as f64 / fs <= tolerance_s * (1.0 + 1e-12);
    let mut pairs = Vec::new();
    let mut lo = 0;
    for (i, &r) in reference.iter().enumerate() {
        while lo < test.len() && test[lo] < r && !within(r - test[lo]) {
            lo += 1;
        }
        for (j, &t) in test.iter().enumerate().skip(lo) {
            let d = r.abs_diff(t);
            if !within(d) {
                if t > r {
                    break;
                }
                continue;
            }
            pairs.push((d, i, j));
        }
    }
    pairs.sort_unstable();
    let mut ref_used = vec![false; reference.len()];
    let mut test_used = vec![false; test.len()];
    let mut tp = 0;
    for (_, i, j) in pairs {
        if !ref_used[i] && !test_used[j] {
            ref_used[i] = true;
            test_used[j] = true;
            tp += 1;
        }
    }
    BeatMatchReport::from_counts(tp, test.len() - tp, reference.len() - tp, tolerance_s)
}

/// Two-moving-average QRS detector.
///
/// The signal is band-passed as the difference of two centered moving averages and
/// squared. A block of interest is a run where the QRS-length average of the squared
/// signal exceeds the beat-length average plus `offset` times its global mean. Blocks
/// narrower than the QRS window or weaker than `floor` are discarded, and each remaining
/// block yields the sample of largest deviation from the local baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QrsDetector {
    /// Short band-pass average, seconds.
    pub fast_s: f64,
    /// Long band-pass average, seconds.
    pub slow_s: f64,
    pub qrs_window_s: f64,
    pub beat_window_s: f64,
    pub offset: f64,
    pub refractory_s: f64,
    /// Minimum band-passed amplitude of a beat, in signal units.
    pub floor: f64,
}

impl Default for QrsDetector {
    fn default() -> Self {
        Self {
            fast_s: 1.0 / 20.0,
            slow_s: 1.0 / 8.0,
            qrs_window_s: 0.120,
            beat_window_s: 0.600,
            offset: 0.08,
            refractory_s: 0.200,
            floor: 20.0,
        }
    }
}

/// Centered moving average with the window clipped at the ends.
fn moving_average(x: &[f64], width: usize) -> Vec<f64> {
    let n = x.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for &v in x {
        prefix.push(prefix.last().copied().unwrap_or(0.0) + v);
    }
    let half = width / 2;
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + width - half).min(n);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

fn samples(seconds: f64, fs: f64) -> usize {
    ((seconds * fs).round() as usize).max(1)
}

impl QrsDetector {
    pub fn detect(&self, signal: &[f64], fs: f64) -> Result<Vec<usize>> {
        if !(fs > 0.0 && fs.is_finite()) {
            return Err(Error::InvalidInput(format!("sampling rate must be positive, got {fs}")));
        }
        if (signal.len() as f64) < 2.0 * fs {
            return Err(Error::InvalidInput(format!(
                "need at least two seconds of signal, got {} samples at {fs} Hz",
                signal.len()
            )));
        }
        let fast = moving_average(signal, samples(self.fast_s, fs));
        let slow = moving_average(signal, samples(self.slow_s, fs));
        let band: Vec<f64> = fast.iter().zip(&slow).map(|(a, b)| a - b).collect();
        let energy: Vec<f64> = band.iter().map(|v| v * v).collect();
        let w1 = samples(self.qrs_window_s, fs);
        let ma_qrs = moving_average(&energy, w1);
        let ma_beat = moving_average(&energy, samples(self.beat_window_s, fs));
        let baseline = moving_average(signal, samples(self.beat_window_s, fs));
        let lift = self.offset * energy.iter().sum::<f64>() / energy.len() as f64;
        let floor = self.floor * self.floor;
        let refractory = samples(self.refractory_s, fs);

        let mut peaks: Vec<usize> = Vec::new();
        let mut i = 0;
        let n = signal.len();
        while i < n {
            if ma_qrs[i] <= ma_beat[i] + lift {
                i += 1;
                continue;
            }
            let start = i;
            while i < n && ma_qrs[i] > ma_beat[i] + lift {
                i += 1;
            }
            if i - start < w1 {
                continue;
            }
            let strongest = energy[start..i].iter().copied().fold(0.0_f64, f64::max);
            if strongest < floor {
                continue;
            }
            let deviation = |k: usize| (signal[k] - baseline[k]).abs();
            let peak = (start..i)
                .max_by(|&a, &b| deviation(a).total_cmp(&deviation(b)).then(b.cmp(&a)))
                .expect("non-empty block");
            match peaks.last_mut() {
                Some(last) if peak - *last < refractory => {
                    if deviation(peak) > deviation(*last) {
                        *last = peak;
                    }
                }
                _ => peaks.push(peak),
            }
        }
        Ok(peaks)
    }
}

/// Runs the default [`QrsDetector`].
pub fn detect_qrs(signal: &[f64], fs: f64) -> Result<Vec<usize>> {
    QrsDetector::default().detect(signal, fs)
}
