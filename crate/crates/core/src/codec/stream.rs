//! The compressed container.
//!
//! ```text
//! "BUAF" | version u8 | L u16 | sample_rate u16 | N u8 | window_count u32
//! | scale_c u16 | scale_ar u16 | table_size u16 | table_size x (symbol i32, length u8)
//! | payload
//! ```
//!
//! Multi-byte header fields are big-endian. The payload is MSB-first and zero-padded to a
//! whole byte. In a quantized stream each window is the symbol sequence
//! `c0, level_count, (c.re, c.im, a.re, a.im, root_count, roots...)*`; a raw window is
//! `0, -1` followed by its `L` samples. A stream with both scales zero holds unquantized
//! parameters as big-endian `f64` fields instead of codewords.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use super::bits::{BitReader, BitWriter};
use super::huffman::Codebook;
use super::quantize::{IntPair, LevelParams, ParamRecord, QuantizedLevel, QuantizedRecord, Scales};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"BUAF";
pub const VERSION: u8 = 1;
/// Level count marking a raw window.
const RAW_MARKER: i32 = -1;
const EXACT_RAW_MARKER: u32 = u32::MAX;
const FIXED_HEADER_LEN: usize = 4 + 1 + 2 + 2 + 1 + 4 + 2 + 2 + 2;
const TABLE_ENTRY_LEN: usize = 5;

/// Payload of one window.
#[derive(Debug, Clone, PartialEq)]
pub enum WindowCode {
    Quantized(QuantizedRecord),
    /// Unquantized parameters (bypass streams only).
    Exact(ParamRecord),
    /// Samples stored verbatim after a failed decomposition.
    Raw(Vec<i32>),
}

impl WindowCode {
    pub fn is_raw(&self) -> bool {
        matches!(self, WindowCode::Raw(_))
    }
}

/// Session-wide settings written to the header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamParams {
    pub window_len: u16,
    pub sample_rate: u16,
    pub levels: u8,
    pub scales: Scales,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamHeader {
    pub version: u8,
    pub params: StreamParams,
    pub window_count: u32,
    /// (symbol, code length) sorted by symbol.
    pub table: Vec<(i32, u8)>,
}

impl StreamHeader {
    /// Header size in bytes.
    pub fn byte_len(&self) -> usize {
        FIXED_HEADER_LEN + TABLE_ENTRY_LEN * self.table.len()
    }

    fn write(&self, out: &mut Vec<u8>) {
        let p = &self.params;
        out.extend_from_slice(MAGIC);
        out.push(self.version);
        out.extend_from_slice(&p.window_len.to_be_bytes());
        out.extend_from_slice(&p.sample_rate.to_be_bytes());
        out.push(p.levels);
        out.extend_from_slice(&self.window_count.to_be_bytes());
        out.extend_from_slice(&p.scales.c.to_be_bytes());
        out.extend_from_slice(&p.scales.ar.to_be_bytes());
        out.extend_from_slice(&(self.table.len() as u16).to_be_bytes());
        for &(s, l) in &self.table {
            out.extend_from_slice(&s.to_be_bytes());
            out.push(l);
        }
    }

    /// Parses the header and returns it with the payload offset.
    pub fn parse(bytes: &[u8]) -> Result<(Self, usize)> {
        let mut cur = Cursor { bytes, pos: 0 };
        let magic = cur.take(4)?;
        if magic != MAGIC {
            return Err(Error::corrupt(0, "bad magic"));
        }
        let version = cur.u8()?;
        if version != VERSION {
            return Err(Error::corrupt(4, format!("unsupported version {version}")));
        }
        let window_len = cur.u16()?;
        let sample_rate = cur.u16()?;
        let levels = cur.u8()?;
        let window_count = cur.u32()?;
        let scales = Scales {
            c: cur.u16()?,
            ar: cur.u16()?,
        };
        if (scales.c == 0) != (scales.ar == 0) {
            return Err(Error::corrupt(14, "only one scale factor is zero"));
        }
        let table_size = cur.u16()? as usize;
        let mut table = Vec::with_capacity(table_size);
        for _ in 0..table_size {
            let s = i32::from_be_bytes(cur.take(4)?.try_into().expect("4 bytes"));
            table.push((s, cur.u8()?));
        }
        let header = StreamHeader {
            version,
            params: StreamParams {
                window_len,
                sample_rate,
                levels,
                scales,
            },
            window_count,
            table,
        };
        Ok((header, cur.pos))
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let s = self
            .bytes
            .get(self.pos..self.pos + n)
            .ok_or_else(|| Error::corrupt(self.bytes.len(), "header truncated"))?;
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
}

/// An encoded session.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedStream {
    header: StreamHeader,
    bytes: Vec<u8>,
}

impl CompressedStream {
    /// Wraps serialized bytes after checking the header.
    pub fn from_bytes(bytes: Vec<u8>) -> Result<Self> {
        let (header, _) = StreamHeader::parse(&bytes)?;
        Ok(Self { header, bytes })
    }

    pub fn header(&self) -> &StreamHeader {
        &self.header
    }

    /// The full serialized stream, header included.
    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    /// Stream length in bits, header included.
    pub fn bit_len(&self) -> u64 {
        self.bytes.len() as u64 * 8
    }

    pub fn decode(&self) -> Result<Vec<WindowCode>> {
        Ok(huffman_decode(&self.bytes)?.1)
    }
}

fn push_pair(out: &mut Vec<i32>, p: IntPair) {
    out.push(p.0);
    out.push(p.1);
}

fn len_symbol(n: usize, what: &str) -> Result<i32> {
    i32::try_from(n).map_err(|_| Error::Encoder(format!("{what} {n} does not fit a symbol")))
}

fn symbols(w: &WindowCode, window_len: usize) -> Result<Vec<i32>> {
    let mut out = Vec::new();
    match w {
        WindowCode::Quantized(q) => {
            out.push(q.c0);
            out.push(len_symbol(q.levels.len(), "level count")?);
            for l in &q.levels {
                push_pair(&mut out, l.c);
                push_pair(&mut out, l.a);
                out.push(len_symbol(l.roots.len(), "root count")?);
                for &r in &l.roots {
                    push_pair(&mut out, r);
                }
            }
        }
        WindowCode::Raw(s) => {
            if s.len() != window_len {
                return Err(Error::Encoder(format!(
                    "raw window has {} samples, expected {window_len}",
                    s.len()
                )));
            }
            out.extend([0, RAW_MARKER]);
            out.extend_from_slice(s);
        }
        WindowCode::Exact(_) => {
            return Err(Error::Encoder(
                "unquantized window in a quantized stream".into(),
            ))
        }
    }
    Ok(out)
}

fn write_f64(w: &mut BitWriter, x: f64) {
    w.write_bits(x.to_bits(), 64);
}

fn write_c64(w: &mut BitWriter, z: Complex64) {
    write_f64(w, z.re);
    write_f64(w, z.im);
}

fn write_exact(w: &mut BitWriter, code: &WindowCode, window_len: usize) -> Result<()> {
    match code {
        WindowCode::Exact(p) => {
            let n = u32::try_from(p.levels.len())
                .ok()
                .filter(|&n| n != EXACT_RAW_MARKER)
                .ok_or_else(|| Error::Encoder("too many levels".into()))?;
            w.write_bits(n as u64, 32);
            write_f64(w, p.c0);
            for l in &p.levels {
                write_c64(w, l.c);
                write_c64(w, l.a);
                w.write_bits(l.roots.len() as u64, 32);
                for &r in &l.roots {
                    write_c64(w, r);
                }
            }
        }
        WindowCode::Raw(s) => {
            if s.len() != window_len {
                return Err(Error::Encoder("raw window length mismatch".into()));
            }
            w.write_bits(EXACT_RAW_MARKER as u64, 32);
            for &v in s {
                w.write_bits(v as u32 as u64, 32);
            }
        }
        WindowCode::Quantized(_) => {
            return Err(Error::Encoder(
                "quantized window in an unquantized stream".into(),
            ))
        }
    }
    Ok(())
}

/// Encodes a session.
///
/// Quantized streams use one canonical Huffman code built from the symbol histogram of
/// all windows. With [`Scales::BYPASS`] the windows must be [`WindowCode::Exact`] or
/// [`WindowCode::Raw`] and are stored without entropy coding.
pub fn huffman_encode(windows: &[WindowCode], params: &StreamParams) -> Result<CompressedStream> {
    if windows.is_empty() {
        return Err(Error::Encoder("no windows to encode".into()));
    }
    let window_count = u32::try_from(windows.len())
        .map_err(|_| Error::Encoder("too many windows".into()))?;
    let window_len = params.window_len as usize;
    let bypass = params.scales.is_bypass();
    if bypass && params.scales != Scales::BYPASS {
        return Err(Error::Encoder("scale factors must both be zero or both nonzero".into()));
    }

    let (table, payload) = if bypass {
        let mut w = BitWriter::new();
        for code in windows {
            write_exact(&mut w, code, window_len)?;
        }
        (Vec::new(), w)
    } else {
        let per_window: Vec<Vec<i32>> = windows
            .par_iter()
            .map(|w| symbols(w, window_len))
            .collect::<Result<_>>()?;
        let hist = per_window
            .par_iter()
            .map(|syms| {
                let mut h = BTreeMap::new();
                for &s in syms {
                    *h.entry(s).or_insert(0u64) += 1;
                }
                h
            })
            .reduce(BTreeMap::new, |mut a, b| {
                for (s, c) in b {
                    *a.entry(s).or_insert(0) += c;
                }
                a
            });
        if hist.len() > u16::MAX as usize {
            return Err(Error::Encoder(format!(
                "alphabet of {} symbols exceeds the table limit",
                hist.len()
            )));
        }
        let book = Codebook::from_histogram(&hist)?;
        let mut w = BitWriter::new();
        for syms in &per_window {
            for &s in syms {
                book.write(s, &mut w)?;
            }
        }
        (book.table().to_vec(), w)
    };

    let header = StreamHeader {
        version: VERSION,
        params: *params,
        window_count,
        table,
    };
    let mut bytes = Vec::with_capacity(header.byte_len());
    header.write(&mut bytes);
    let mut payload_bytes = payload.finish();
    bytes.append(&mut payload_bytes);
    Ok(CompressedStream { header, bytes })
}

fn read_count(book: &Codebook, r: &mut BitReader<'_>, limit: usize, what: &str) -> Result<usize> {
    let at = r.byte_offset();
    let v = book.read(r)?;
    usize::try_from(v)
        .ok()
        .filter(|&n| n <= limit)
        .ok_or_else(|| Error::corrupt(at, format!("invalid {what} {v}")))
}

fn read_pair(book: &Codebook, r: &mut BitReader<'_>) -> Result<IntPair> {
    Ok((book.read(r)?, book.read(r)?))
}

fn read_f64(r: &mut BitReader<'_>) -> Result<f64> {
    Ok(f64::from_bits(r.read_bits(64)?))
}

fn read_c64(r: &mut BitReader<'_>) -> Result<Complex64> {
    Ok(Complex64::new(read_f64(r)?, read_f64(r)?))
}

/// Upper bound on any count field, so corrupt input cannot request huge allocations.
fn count_limit(bytes: &[u8]) -> usize {
    bytes.len() * 8
}

fn decode_exact(r: &mut BitReader<'_>, window_len: usize, limit: usize) -> Result<WindowCode> {
    let at = r.byte_offset();
    let n = r.read_bits(32)? as u32;
    if n == EXACT_RAW_MARKER {
        let samples = (0..window_len)
            .map(|_| Ok(r.read_bits(32)? as u32 as i32))
            .collect::<Result<_>>()?;
        return Ok(WindowCode::Raw(samples));
    }
    if n as usize > limit {
        return Err(Error::corrupt(at, format!("invalid level count {n}")));
    }
    let c0 = read_f64(r)?;
    let mut levels = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let c = read_c64(r)?;
        let a = read_c64(r)?;
        let at = r.byte_offset();
        let m = r.read_bits(32)? as usize;
        if m > limit {
            return Err(Error::corrupt(at, format!("invalid root count {m}")));
        }
        let roots = (0..m).map(|_| read_c64(r)).collect::<Result<_>>()?;
        levels.push(LevelParams { c, a, roots });
    }
    Ok(WindowCode::Exact(ParamRecord { c0, levels }))
}

fn decode_quantized(
    book: &Codebook,
    r: &mut BitReader<'_>,
    window_len: usize,
    limit: usize,
) -> Result<WindowCode> {
    let c0 = book.read(r)?;
    let at = r.byte_offset();
    let n = book.read(r)?;
    if n == RAW_MARKER {
        let samples = (0..window_len)
            .map(|_| book.read(r))
            .collect::<Result<_>>()?;
        return Ok(WindowCode::Raw(samples));
    }
    let n = usize::try_from(n)
        .ok()
        .filter(|&n| n <= limit)
        .ok_or_else(|| Error::corrupt(at, format!("invalid level count {n}")))?;
    let mut levels = Vec::with_capacity(n);
    for _ in 0..n {
        let c = read_pair(book, r)?;
        let a = read_pair(book, r)?;
        let m = read_count(book, r, limit, "root count")?;
        let roots = (0..m)
            .map(|_| read_pair(book, r))
            .collect::<Result<_>>()?;
        levels.push(QuantizedLevel { c, a, roots });
    }
    Ok(WindowCode::Quantized(QuantizedRecord { c0, levels }))
}

/// Parses a serialized stream.
pub fn huffman_decode(bytes: &[u8]) -> Result<(StreamHeader, Vec<WindowCode>)> {
    let (header, start) = StreamHeader::parse(bytes)?;
    let window_len = header.params.window_len as usize;
    let limit = count_limit(bytes);
    let mut r = BitReader::new(bytes, start);
    let count = header.window_count as usize;
    if count > limit {
        return Err(Error::corrupt(10, "window count exceeds stream size"));
    }
    let mut windows = Vec::with_capacity(count);
    if header.params.scales.is_bypass() {
        if !header.table.is_empty() {
            return Err(Error::corrupt(start, "unquantized stream carries a code table"));
        }
        for _ in 0..count {
            windows.push(decode_exact(&mut r, window_len, limit)?);
        }
    } else {
        let book = Codebook::from_lengths(header.table.clone())
            .map_err(|e| Error::corrupt(FIXED_HEADER_LEN, e.to_string()))?;
        for _ in 0..count {
            windows.push(decode_quantized(&book, &mut r, window_len, limit)?);
        }
    }
    r.expect_end()?;
    Ok((header, windows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(scales: Scales) -> StreamParams {
        StreamParams {
            window_len: 4,
            sample_rate: 360,
            levels: 8,
            scales,
        }
    }

    fn random_record(rng: &mut ChaCha8Rng) -> QuantizedRecord {
        let pair = |rng: &mut ChaCha8Rng, m: i32| (rng.gen_range(-m..=m), rng.gen_range(-m..=m));
        QuantizedRecord {
            c0: rng.gen_range(-1024..1024),
            levels: (0..rng.gen_range(0..9))
                .map(|_| QuantizedLevel {
                    c: pair(rng, 600),
                    a: pair(rng, 67),
                    roots: (0..rng.gen_range(0..6)).map(|_| pair(rng, 67)).collect(),
                })
                .collect(),
        }
    }

    fn sample_stream() -> (Vec<WindowCode>, CompressedStream) {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut windows: Vec<WindowCode> = (0..20)
            .map(|_| WindowCode::Quantized(random_record(&mut rng)))
            .collect();
        windows.push(WindowCode::Raw(vec![995, -3, 1011, 0]));
        let s = huffman_encode(&windows, &params(Scales::default())).unwrap();
        (windows, s)
    }

    #[test]
    fn header_layout_is_fixed() {
        let windows = vec![WindowCode::Quantized(QuantizedRecord { c0: 5, levels: vec![] })];
        let s = huffman_encode(&windows, &params(Scales::default())).unwrap();
        let b = s.bytes();
        assert_eq!(&b[0..4], b"BUAF");
        assert_eq!(b[4], 1);
        assert_eq!(&b[5..7], &[0, 4]);
        assert_eq!(&b[7..9], &360u16.to_be_bytes());
        assert_eq!(b[9], 8);
        assert_eq!(&b[10..14], &[0, 0, 0, 1]);
        assert_eq!(&b[14..16], &[0, 1]);
        assert_eq!(&b[16..18], &[0, 100]);
        assert_eq!(&b[18..20], &[0, 2]);
        // symbols 0 (level count) and 5 (c0), one bit each
        assert_eq!(&b[20..30], &[0, 0, 0, 0, 1, 0, 0, 0, 5, 1]);
        // 5 -> "1", 0 -> "0"
        assert_eq!(&b[30..], &[0b1000_0000]);
        assert_eq!(s.bit_len(), 31 * 8);
        assert_eq!(s.header().byte_len(), 30);
    }

    #[test]
    fn all_equal_symbols_cost_one_bit_each() {
        let windows = vec![WindowCode::Raw(vec![0; 4])];
        let s = huffman_encode(&windows, &params(Scales::default())).unwrap();
        // symbols 0, -1 marker, then four zeros
        assert_eq!(s.header().table, vec![(-1, 1), (0, 1)]);
        assert_eq!(s.bytes().len(), s.header().byte_len() + 1);
    }

    #[test]
    fn roundtrip_thousand_records() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let windows: Vec<WindowCode> = (0..1000)
            .map(|_| WindowCode::Quantized(random_record(&mut rng)))
            .collect();
        let s = huffman_encode(&windows, &params(Scales::default())).unwrap();
        let (h, back) = huffman_decode(s.bytes()).unwrap();
        assert_eq!(h, *s.header());
        assert_eq!(back, windows);
    }

    #[test]
    fn valid_stream_decodes_exactly() {
        let (windows, s) = sample_stream();
        let again = CompressedStream::from_bytes(s.bytes().to_vec()).unwrap();
        assert_eq!(again.decode().unwrap(), windows);
    }

    #[test]
    fn truncation_is_reported() {
        let (_, s) = sample_stream();
        let b = s.bytes();
        for cut in [b.len() - 1, b.len() / 2, s.header().byte_len() + 1, 12] {
            match huffman_decode(&b[..cut]) {
                Err(Error::CorruptStream { offset, .. }) => assert!(offset <= cut),
                other => panic!("cut {cut}: {other:?}"),
            }
        }
    }

    #[test]
    fn bad_magic_is_reported() {
        let (_, s) = sample_stream();
        let mut b = s.into_bytes();
        b[0] ^= 0x20;
        assert!(matches!(
            huffman_decode(&b),
            Err(Error::CorruptStream { offset: 0, .. })
        ));
    }

    #[test]
    fn trailing_garbage_is_reported() {
        let (_, s) = sample_stream();
        let mut b = s.into_bytes();
        b.push(0);
        assert!(matches!(huffman_decode(&b), Err(Error::CorruptStream { .. })));
    }

    #[test]
    fn exact_stream_roundtrips_bitwise() {
        let windows = vec![
            WindowCode::Exact(ParamRecord {
                c0: 1000.123456789,
                levels: vec![LevelParams {
                    c: Complex64::new(0.1, -1e-300),
                    a: Complex64::new(0.25, 0.5),
                    roots: vec![Complex64::new(-0.3, 0.7)],
                }],
            }),
            WindowCode::Raw(vec![1, -2, 3, -4]),
        ];
        let s = huffman_encode(&windows, &params(Scales::BYPASS)).unwrap();
        assert!(s.header().table.is_empty());
        assert_eq!(s.decode().unwrap(), windows);
    }

    #[test]
    fn mode_mismatch_is_an_encoder_error() {
        let q = vec![WindowCode::Quantized(QuantizedRecord::default())];
        assert!(matches!(
            huffman_encode(&q, &params(Scales::BYPASS)),
            Err(Error::Encoder(_))
        ));
        let e = vec![WindowCode::Exact(ParamRecord::default())];
        assert!(huffman_encode(&e, &params(Scales::default())).is_err());
        assert!(huffman_encode(&[], &params(Scales::default())).is_err());
    }

    #[test]
    fn oversized_alphabet_is_rejected() {
        let samples: Vec<i32> = (0..70_000).collect();
        let p = StreamParams {
            window_len: 0,
            ..params(Scales::default())
        };
        // window_len does not matter for the alphabet check, so feed many raw windows
        let windows: Vec<WindowCode> = samples
            .chunks(1)
            .map(|c| WindowCode::Quantized(QuantizedRecord { c0: c[0], levels: vec![] }))
            .collect();
        assert!(matches!(huffman_encode(&windows, &p), Err(Error::Encoder(_))));
    }

    proptest! {
        #[test]
        fn lossless_stage(seed in any::<u64>(), n in 1usize..40) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let windows: Vec<WindowCode> = (0..n)
                .map(|_| WindowCode::Quantized(random_record(&mut rng)))
                .collect();
            let s = huffman_encode(&windows, &params(Scales::default())).unwrap();
            prop_assert_eq!(s.decode().unwrap(), windows);
        }

        #[test]
        fn random_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
            let mut b = b"BUAF\x01".to_vec();
            b.extend_from_slice(&bytes);
            let _ = huffman_decode(&b);
        }
    }
}
