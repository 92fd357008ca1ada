//! Whole-session compression, decompression and evaluation.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::codec::{
    dequantize_with, huffman_decode, huffman_encode, quantize_params, reconstruct_params,
    CompressedStream, ParamRecord, Scales, StreamHeader, StreamParams, WindowCode, ADC_BITS,
};
use crate::hardy::{build_grid, DiskGrid, RealFrame, DEFAULT_WINDOW, MIN_WINDOW};
use crate::ingest::{window, EcgRecord};
use crate::metrics::{
    detect_qrs, match_beats, prd, BeatMatchReport, FidelityReport, DEFAULT_TOLERANCE_S,
};
use crate::unwinding::{unwind, DEFAULT_DELTA, MAX_LEVELS};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    pub n_levels: usize,
    pub window_len: usize,
    pub grid_resolution: f64,
    pub r_max: f64,
    pub delta: f64,
    /// Store unquantized parameters without entropy coding.
    pub bypass_quantization: bool,
    /// Worker threads; 0 uses one per core.
    pub worker_count: usize,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            n_levels: 8,
            window_len: DEFAULT_WINDOW,
            grid_resolution: 0.02,
            r_max: 0.95,
            delta: DEFAULT_DELTA,
            bypass_quantization: false,
            worker_count: 0,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_LEVELS).contains(&self.n_levels) {
            return Err(Error::InvalidInput(format!(
                "levels must lie in 1..={MAX_LEVELS}, got {}",
                self.n_levels
            )));
        }
        if self.window_len < MIN_WINDOW || self.window_len > u16::MAX as usize {
            return Err(Error::InvalidInput(format!(
                "window length must lie in {MIN_WINDOW}..={}, got {}",
                u16::MAX,
                self.window_len
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidInput(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        if self.r_max > 1.0 - self.delta + 1e-12 {
            return Err(Error::InvalidInput(format!(
                "r_max {} exceeds 1 - delta = {}",
                self.r_max,
                1.0 - self.delta
            )));
        }
        build_grid(self.grid_resolution, self.r_max).map(|_| ())
    }

    pub fn grid(&self) -> Result<DiskGrid> {
        self.validate()?;
        build_grid(self.grid_resolution, self.r_max)
    }

    fn scales(&self) -> Scales {
        if self.bypass_quantization {
            Scales::BYPASS
        } else {
            Scales::default()
        }
    }

    fn run<T: Send>(&self, job: impl FnOnce() -> T + Send) -> Result<T> {
        if self.worker_count == 0 {
            return Ok(job());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.worker_count)
            .build()
            .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
        Ok(pool.install(job))
    }
}

/// Per-window compression log entry.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowLog {
    pub index: usize,
    pub elapsed: Duration,
    pub levels: usize,
    pub roots: usize,
    pub low_precision_roots: usize,
    /// Reason the window was stored raw.
    pub fallback: Option<String>,
}

#[derive(Debug, Clone)]
pub struct CompressedSession {
    pub stream: CompressedStream,
    pub logs: Vec<WindowLog>,
    /// Input samples not covered by a full window.
    pub dropped_samples: usize,
    pub elapsed: Duration,
}

impl CompressedSession {
    pub fn fallback_count(&self) -> usize {
        self.logs.iter().filter(|l| l.fallback.is_some()).count()
    }

    pub fn n_inp_bits(&self) -> u64 {
        let h = self.stream.header();
        h.params.window_len as u64 * ADC_BITS * h.window_count as u64
    }

    pub fn n_out_bits(&self) -> u64 {
        self.stream.bit_len()
    }
}

fn sample_rate_u16(fs: f64) -> Result<u16> {
    let r = fs.round();
    if (fs - r).abs() > 1e-9 || !(1.0..=u16::MAX as f64).contains(&r) {
        return Err(Error::Encoder(format!(
            "sampling rate {fs} cannot be stored as a 16-bit integer"
        )));
    }
    Ok(r as u16)
}

fn raw_samples(frame: &RealFrame) -> Vec<i32> {
    frame.samples().iter().map(|&s| s.round() as i32).collect()
}

fn encode_window(
    index: usize,
    frame: &RealFrame,
    config: &SessionConfig,
    grid: &DiskGrid,
) -> (WindowCode, WindowLog) {
    let start = Instant::now();
    let mut log = WindowLog {
        index,
        elapsed: Duration::ZERO,
        levels: 0,
        roots: 0,
        low_precision_roots: 0,
        fallback: None,
    };
    let outcome = unwind(frame, config.n_levels, grid, config.delta).and_then(|rec| {
        log.levels = rec.levels.len();
        log.roots = rec.levels.iter().map(|l| l.roots.len()).sum();
        log.low_precision_roots = rec.levels.iter().map(|l| l.low_precision_roots).sum();
        let params = ParamRecord::from(&rec);
        if config.bypass_quantization {
            return Ok(WindowCode::Exact(params));
        }
        let q = quantize_params(&params, Scales::default());
        dequantize_with(&q, Scales::default())?;
        Ok(WindowCode::Quantized(q))
    });
    let code = match outcome {
        Ok(code) => code,
        Err(e) => {
            log.fallback = Some(e.to_string());
            WindowCode::Raw(raw_samples(frame))
        }
    };
    log.elapsed = start.elapsed();
    (code, log)
}

/// Compresses equal-length frames into one stream.
///
/// A window whose decomposition fails is stored raw and flagged in its log entry.
pub fn compress_frames(frames: &[RealFrame], config: &SessionConfig) -> Result<CompressedSession> {
    let grid = config.grid()?;
    let first = frames
        .first()
        .ok_or_else(|| Error::InvalidInput("no frames to compress".into()))?;
    if let Some(f) = frames.iter().find(|f| f.len() != config.window_len) {
        return Err(Error::InvalidInput(format!(
            "frame of length {} does not match window length {}",
            f.len(),
            config.window_len
        )));
    }
    let params = StreamParams {
        window_len: config.window_len as u16,
        sample_rate: sample_rate_u16(first.sample_rate_hz())?,
        levels: config.n_levels as u8,
        scales: config.scales(),
    };
    let start = Instant::now();
    let (stream, logs) = config.run(|| {
        let (codes, logs): (Vec<WindowCode>, Vec<WindowLog>) = frames
            .par_iter()
            .enumerate()
            .map(|(i, f)| encode_window(i, f, config, &grid))
            .unzip();
        huffman_encode(&codes, &params).map(|s| (s, logs))
    })??;
    Ok(CompressedSession {
        stream,
        logs,
        dropped_samples: 0,
        elapsed: start.elapsed(),
    })
}

/// Compresses the first channel of a record.
pub fn compress_record(record: &EcgRecord, config: &SessionConfig) -> Result<CompressedSession> {
    config.validate()?;
    let w = window(record, config.window_len)?;
    if w.frames.is_empty() {
        return Err(Error::InvalidInput(format!(
            "record {} is shorter than one window",
            record.record_id
        )));
    }
    let mut session = compress_frames(&w.frames, config)?;
    session.dropped_samples = w.dropped;
    Ok(session)
}

#[derive(Debug, Clone)]
pub struct DecodedSession {
    pub header: StreamHeader,
    /// Reconstructed samples, windows concatenated.
    pub signal: Vec<f64>,
    pub raw_windows: usize,
    pub elapsed: Duration,
}

fn reconstruct_window(code: &WindowCode, scales: Scales, len: usize) -> Result<Vec<f64>> {
    match code {
        WindowCode::Quantized(q) => Ok(reconstruct_params(&dequantize_with(q, scales)?, len)),
        WindowCode::Exact(p) => Ok(reconstruct_params(p, len)),
        WindowCode::Raw(s) => Ok(s.iter().map(|&v| v as f64).collect()),
    }
}

/// Decodes a stream and reconstructs every window.
pub fn decompress(bytes: &[u8]) -> Result<DecodedSession> {
    let start = Instant::now();
    let (header, windows) = huffman_decode(bytes)?;
    let len = header.params.window_len as usize;
    let scales = header.params.scales;
    let parts: Vec<Vec<f64>> = windows
        .par_iter()
        .map(|w| reconstruct_window(w, scales, len))
        .collect::<Result<_>>()?;
    Ok(DecodedSession {
        raw_windows: windows.iter().filter(|w| w.is_raw()).count(),
        header,
        signal: parts.concat(),
        elapsed: start.elapsed(),
    })
}

/// Evaluation of one record at one decomposition level.
#[derive(Debug, Clone)]
pub struct SessionReport {
    pub record_id: String,
    pub n_levels: usize,
    /// Session figures; PRD over the whole record.
    pub fidelity: FidelityReport,
    /// Mean of the per-window PRD values.
    pub prd_window_mean: f64,
    /// Detections on the reconstruction matched against detections on the original.
    pub beats: Option<BeatMatchReport>,
    pub windows: usize,
    pub fallback_windows: usize,
    pub compress_time: Duration,
    pub decompress_time: Duration,
    pub original: Vec<f64>,
    pub reconstructed: Vec<f64>,
}

pub const CSV_HEADER: &str =
    "record,N,CR,PRD,PRD_window_mean,QS,SNR,Se,PPV,F1,windows,fallback_windows,compress_s,decompress_s";

impl SessionReport {
    pub fn csv_row(&self) -> String {
        let f = &self.fidelity;
        let (se, ppv, f1) = self
            .beats
            .map_or((String::new(), String::new(), String::new()), |b| {
                (format!("{:.3}", b.se), format!("{:.3}", b.ppv), format!("{:.3}", b.f1))
            });
        format!(
            "{},{},{:.4},{:.4},{:.4},{:.4},{:.3},{se},{ppv},{f1},{},{},{:.3},{:.3}",
            self.record_id,
            self.n_levels,
            f.cr,
            f.prd_percent,
            self.prd_window_mean,
            f.qs,
            f.snr_db,
            self.windows,
            self.fallback_windows,
            self.compress_time.as_secs_f64(),
            self.decompress_time.as_secs_f64(),
        )
    }
}

/// Mean PRD over windows with nonzero energy.
pub fn window_prd_mean(original: &[f64], reconstructed: &[f64], len: usize) -> Result<f64> {
    let values: Vec<f64> = original
        .chunks(len)
        .zip(reconstructed.chunks(len))
        .filter_map(|(a, b)| prd(a, b).ok())
        .collect();
    if values.is_empty() {
        return Err(Error::UndefinedMetric("no window with nonzero energy".into()));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Compresses, decompresses and scores the first channel of a record.
pub fn evaluate_record(record: &EcgRecord, config: &SessionConfig) -> Result<SessionReport> {
    let session = compress_record(record, config)?;
    let decoded = decompress(session.stream.bytes())?;
    let covered = decoded.signal.len();
    let original: Vec<f64> = record.channels[0][..covered]
        .iter()
        .map(|&v| v as f64)
        .collect();
    let fidelity = FidelityReport::new(
        &original,
        &decoded.signal,
        session.n_inp_bits(),
        session.n_out_bits(),
    )?;
    let beats = match (
        detect_qrs(&original, record.fs),
        detect_qrs(&decoded.signal, record.fs),
    ) {
        (Ok(r), Ok(t)) => Some(match_beats(&r, &t, record.fs, DEFAULT_TOLERANCE_S)),
        _ => None,
    };
    Ok(SessionReport {
        record_id: record.record_id.clone(),
        n_levels: config.n_levels,
        prd_window_mean: window_prd_mean(&original, &decoded.signal, config.window_len)?,
        fidelity,
        beats,
        windows: session.logs.len(),
        fallback_windows: session.fallback_count(),
        compress_time: session.elapsed,
        decompress_time: decoded.elapsed,
        original,
        reconstructed: decoded.signal,
    })
}
