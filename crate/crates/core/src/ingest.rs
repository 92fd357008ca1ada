//! MIT-BIH style WFDB records: header parsing, format 212 signal files, MIT annotation
//! files, and windowing of the first lead.

use std::fs;
use std::path::{Path, PathBuf};

use crate::hardy::{RealFrame, MIN_WINDOW};
use crate::{Error, Result};

/// Per-signal line of a `.hea` file.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    pub file_name: String,
    pub format: u16,
    pub gain: f64,
    pub adc_resolution: u32,
    pub adc_zero: i32,
    pub initial_value: Option<i32>,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordHeader {
    pub record_name: String,
    pub sampling_frequency: f64,
    pub sample_count: Option<usize>,
    pub signals: Vec<SignalSpec>,
}

/// One annotation from an MIT-format annotation file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Annotation {
    pub sample: usize,
    pub code: u8,
}

impl Annotation {
    /// True for the WFDB beat (QRS) annotation codes.
    pub fn is_beat(&self) -> bool {
        matches!(self.code, 1..=13 | 25 | 30 | 34 | 35 | 37 | 38 | 41)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EcgRecord {
    pub record_id: String,
    pub fs: f64,
    pub adc_resolution_bits: u32,
    /// Two channels of equal length, in ADC units.
    pub channels: [Vec<i32>; 2],
    pub annotations: Option<Vec<Annotation>>,
}

impl EcgRecord {
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels[0].is_empty()
    }

    pub fn beat_count(&self) -> Option<usize> {
        self.annotations
            .as_ref()
            .map(|a| a.iter().filter(|x| x.is_beat()).count())
    }
}

fn leading_number(token: &str) -> &str {
    let end = token
        .char_indices()
        .find(|&(i, ch)| !(ch.is_ascii_digit() || ch == '.' || (i == 0 && (ch == '-' || ch == '+'))))
        .map_or(token.len(), |(i, _)| i);
    &token[..end]
}

fn parse_field<T: std::str::FromStr>(token: Option<&str>, what: &str) -> Result<T> {
    let token = token.ok_or_else(|| Error::Format(format!("header is missing {what}")))?;
    leading_number(token)
        .parse()
        .map_err(|_| Error::Format(format!("cannot parse {what} from {token:?}")))
}

pub fn parse_header(text: &str) -> Result<RecordHeader> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let record_line = lines
        .next()
        .ok_or_else(|| Error::Format("empty header".into()))?;
    let mut tok = record_line.split_whitespace();
    let record_name = tok
        .next()
        .ok_or_else(|| Error::Format("header has no record name".into()))?;
    if record_name.contains('/') {
        return Err(Error::Format("multi-segment records are not supported".into()));
    }
    let n_signals: usize = parse_field(tok.next(), "signal count")?;
    let sampling_frequency = match tok.next() {
        Some(t) => parse_field(Some(t), "sampling frequency")?,
        None => 250.0,
    };
    let sample_count = match tok.next() {
        Some(t) => Some(parse_field(Some(t), "sample count")?),
        None => None,
    };

    let mut signals = Vec::with_capacity(n_signals);
    for _ in 0..n_signals {
        let line = lines
            .next()
            .ok_or_else(|| Error::Format(format!("header declares {n_signals} signals")))?;
        let mut t = line.split_whitespace();
        let file_name = t.next().unwrap_or_default().to_string();
        let format = parse_field(t.next(), "signal format")?;
        let gain = match t.next() {
            Some(g) => parse_field(Some(g), "gain")?,
            None => 200.0,
        };
        let adc_resolution = match t.next() {
            Some(r) => parse_field(Some(r), "ADC resolution")?,
            None => 12,
        };
        let adc_zero = match t.next() {
            Some(z) => parse_field(Some(z), "ADC zero")?,
            None => 0,
        };
        let initial_value = match t.next() {
            Some(v) => Some(parse_field(Some(v), "initial value")?),
            None => None,
        };
        // checksum and block size are not used
        let _ = t.next();
        let _ = t.next();
        let description = t.collect::<Vec<_>>().join(" ");
        signals.push(SignalSpec {
            file_name,
            format,
            gain,
            adc_resolution,
            adc_zero,
            initial_value,
            description,
        });
    }
    Ok(RecordHeader {
        record_name: record_name.to_string(),
        sampling_frequency,
        sample_count,
        signals,
    })
}

fn sign_extend12(v: u16) -> i32 {
    ((v as i32) << 20) >> 20
}

/// Unpacks interleaved two-signal format 212 data.
pub fn decode_212(dat: &[u8]) -> Result<[Vec<i32>; 2]> {
    if dat.len() % 3 != 0 {
        return Err(Error::Format(format!(
            "format 212 data length {} is not a multiple of 3",
            dat.len()
        )));
    }
    let n = dat.len() / 3;
    let mut s0 = Vec::with_capacity(n);
    let mut s1 = Vec::with_capacity(n);
    for b in dat.chunks_exact(3) {
        s0.push(sign_extend12(((b[1] as u16 & 0x0F) << 8) | b[0] as u16));
        s1.push(sign_extend12(((b[1] as u16 & 0xF0) << 4) | b[2] as u16));
    }
    Ok([s0, s1])
}

/// Packs two equal-length channels of 12-bit samples as format 212.
pub fn encode_212(ch0: &[i32], ch1: &[i32]) -> Result<Vec<u8>> {
    if ch0.len() != ch1.len() {
        return Err(Error::InvalidInput("channel lengths differ".into()));
    }
    let mut out = Vec::with_capacity(ch0.len() * 3);
    for (&a, &b) in ch0.iter().zip(ch1) {
        for v in [a, b] {
            if !(-2048..=2047).contains(&v) {
                return Err(Error::InvalidInput(format!("{v} does not fit in 12 bits")));
            }
        }
        let (a, b) = (a as u16 & 0x0FFF, b as u16 & 0x0FFF);
        out.push((a & 0xFF) as u8);
        out.push((((a >> 8) & 0x0F) | ((b >> 8) << 4)) as u8);
        out.push((b & 0xFF) as u8);
    }
    Ok(out)
}

/// Parses a two-signal format 212 record from its header text and signal file bytes.
pub fn parse_wfdb_212(header_text: &[u8], dat: &[u8]) -> Result<EcgRecord> {
    let text = std::str::from_utf8(header_text)
        .map_err(|_| Error::Format("header is not UTF-8".into()))?;
    let header = parse_header(text)?;
    if header.signals.len() != 2 {
        return Err(Error::Format(format!(
            "expected 2 signals, header declares {}",
            header.signals.len()
        )));
    }
    if let Some(s) = header.signals.iter().find(|s| s.format != 212) {
        return Err(Error::Format(format!(
            "unsupported signal format {} (only 212 is supported)",
            s.format
        )));
    }
    if header.signals[0].file_name != header.signals[1].file_name {
        return Err(Error::Format("signals are split across files".into()));
    }
    let channels = decode_212(dat)?;
    if let Some(n) = header.sample_count {
        if n != channels[0].len() {
            return Err(Error::Format(format!(
                "header declares {n} samples, signal file holds {}",
                channels[0].len()
            )));
        }
    }
    Ok(EcgRecord {
        record_id: header.record_name,
        fs: header.sampling_frequency,
        adc_resolution_bits: header.signals[0].adc_resolution,
        channels,
        annotations: None,
    })
}

/// Decodes an MIT-format annotation file.
pub fn parse_annotations(bytes: &[u8]) -> Result<Vec<Annotation>> {
    const SKIP: u16 = 59;
    const AUX: u16 = 63;
    let word = |i: usize| -> Result<u16> {
        bytes
            .get(i..i + 2)
            .map(|b| u16::from_le_bytes([b[0], b[1]]))
            .ok_or_else(|| Error::Format(format!("annotation file truncated at byte {i}")))
    };
    let mut out = Vec::new();
    let mut time: i64 = 0;
    let mut i = 0;
    while i + 1 < bytes.len() {
        let w = word(i)?;
        i += 2;
        let (code, arg) = (w >> 10, w & 0x03FF);
        match code {
            0 if arg == 0 => break,
            SKIP => {
                let hi = word(i)? as u32;
                let lo = word(i + 2)? as u32;
                i += 4;
                time += ((hi << 16) | lo) as i32 as i64;
            }
            60..=62 => {}
            AUX => i += (arg as usize + 1) & !1,
            _ => {
                time += arg as i64;
                let sample = usize::try_from(time)
                    .map_err(|_| Error::Format(format!("negative annotation time {time}")))?;
                out.push(Annotation {
                    sample,
                    code: code as u8,
                });
            }
        }
    }
    Ok(out)
}

/// Resolves `<dir>/<name>`, `<dir>/<name>.hea` or a plain record base path.
fn record_base(path: &Path) -> PathBuf {
    if path.extension().is_some_and(|e| e == "hea" || e == "dat") {
        path.with_extension("")
    } else {
        path.to_path_buf()
    }
}

/// Reads `<base>.hea`, the signal file it names, and `<base>.atr` when present.
pub fn read_record(path: &Path) -> Result<EcgRecord> {
    let base = record_base(path);
    let hea_path = base.with_extension("hea");
    let header_text = fs::read(&hea_path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", hea_path.display()),
        ))
    })?;
    let header = parse_header(
        std::str::from_utf8(&header_text)
            .map_err(|_| Error::Format("header is not UTF-8".into()))?,
    )?;
    let dat_name = header
        .signals
        .first()
        .map(|s| s.file_name.clone())
        .ok_or_else(|| Error::Format("header declares no signals".into()))?;
    let dat_path = base.parent().unwrap_or(Path::new(".")).join(dat_name);
    let dat = fs::read(&dat_path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", dat_path.display()),
        ))
    })?;
    let mut record = parse_wfdb_212(&header_text, &dat)?;
    let atr = base.with_extension("atr");
    if atr.exists() {
        record.annotations = Some(parse_annotations(&fs::read(atr)?)?);
    }
    Ok(record)
}

/// Non-overlapping windows of channel 0.
#[derive(Debug, Clone)]
pub struct Windowing {
    pub frames: Vec<RealFrame>,
    /// Trailing samples that did not fill a window.
    pub dropped: usize,
}

pub fn window(record: &EcgRecord, len: usize) -> Result<Windowing> {
    if len < MIN_WINDOW {
        return Err(Error::InvalidInput(format!(
            "window length {len} is below {MIN_WINDOW}"
        )));
    }
    let lead = &record.channels[0];
    let frames = lead
        .chunks_exact(len)
        .map(|chunk| RealFrame::new(chunk.iter().map(|&s| s as f64).collect(), record.fs))
        .collect::<Result<Vec<_>>>()?;
    Ok(Windowing {
        dropped: lead.len() % len,
        frames,
    })
}
