//! Canonical Huffman codes over `i32` symbols.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use super::bits::{BitReader, BitWriter};
use crate::{Error, Result};

/// Longest codeword the decoder accepts.
pub const MAX_CODE_LEN: u8 = 63;

/// Huffman code lengths for a symbol histogram, in ascending symbol order.
///
/// A single-symbol alphabet gets a 1-bit code. Ties in the merge order are broken by the
/// smallest symbol in each subtree, so the result depends only on the histogram.
pub fn code_lengths(freqs: &BTreeMap<i32, u64>) -> Vec<(i32, u8)> {
    match freqs.len() {
        0 => return Vec::new(),
        1 => return freqs.keys().map(|&s| (s, 1)).collect(),
        _ => {}
    }
    // (weight, min symbol, node id)
    let mut heap = BinaryHeap::new();
    let mut children: Vec<Option<(usize, usize)>> = Vec::new();
    let mut leaf_symbol = Vec::new();
    for (&sym, &w) in freqs {
        let id = children.len();
        children.push(None);
        leaf_symbol.push(Some(sym));
        heap.push(Reverse((w, sym, id)));
    }
    while heap.len() > 1 {
        let Reverse((w1, s1, a)) = heap.pop().expect("len > 1");
        let Reverse((w2, s2, b)) = heap.pop().expect("len > 1");
        let id = children.len();
        children.push(Some((a, b)));
        leaf_symbol.push(None);
        heap.push(Reverse((w1 + w2, s1.min(s2), id)));
    }
    let Reverse((_, _, root)) = heap.pop().expect("one node left");
    let mut out = Vec::with_capacity(freqs.len());
    let mut stack = vec![(root, 0u32)];
    while let Some((node, depth)) = stack.pop() {
        match children[node] {
            Some((a, b)) => {
                stack.push((a, depth + 1));
                stack.push((b, depth + 1));
            }
            None => out.push((
                leaf_symbol[node].expect("leaf"),
                depth.min(u8::MAX as u32) as u8,
            )),
        }
    }
    out.sort_by_key(|&(s, _)| s);
    out
}

/// Canonical code built from (symbol, length) pairs.
#[derive(Debug, Clone)]
pub struct Codebook {
    /// Sorted by symbol.
    table: Vec<(i32, u8)>,
    encode: HashMap<i32, (u64, u8)>,
    /// Symbols in canonical order (length, then symbol).
    ordered: Vec<i32>,
    /// Per length: first canonical code, number of codes, index into `ordered`.
    first: Vec<u64>,
    count: Vec<u64>,
    offset: Vec<usize>,
    max_len: u8,
}

impl Codebook {
    pub fn from_histogram(freqs: &BTreeMap<i32, u64>) -> Result<Self> {
        Self::from_lengths(code_lengths(freqs))
    }

    pub fn from_lengths(mut table: Vec<(i32, u8)>) -> Result<Self> {
        table.sort_by_key(|&(s, _)| s);
        if table.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Encoder("duplicate symbol in code table".into()));
        }
        if let Some(&(s, l)) = table.iter().find(|&&(_, l)| l == 0 || l > MAX_CODE_LEN) {
            return Err(Error::Encoder(format!("symbol {s} has invalid code length {l}")));
        }
        let max_len = table.iter().map(|&(_, l)| l).max().unwrap_or(0);
        // Kraft inequality in units of 2^-max_len
        let kraft: u128 = table
            .iter()
            .map(|&(_, l)| 1u128 << (max_len - l))
            .sum();
        if kraft > 1u128 << max_len {
            return Err(Error::Encoder("code lengths violate the Kraft inequality".into()));
        }

        let mut ordered: Vec<(u8, i32)> = table.iter().map(|&(s, l)| (l, s)).collect();
        ordered.sort();
        let n = max_len as usize + 1;
        let mut count = vec![0u64; n + 1];
        for &(l, _) in &ordered {
            count[l as usize] += 1;
        }
        let mut first = vec![0u64; n + 1];
        let mut offset = vec![0usize; n + 1];
        for l in 1..n {
            first[l + 1] = (first[l] + count[l]) << 1;
            offset[l + 1] = offset[l] + count[l] as usize;
        }
        let mut encode = HashMap::with_capacity(ordered.len());
        let mut next = first.clone();
        for &(l, s) in &ordered {
            encode.insert(s, (next[l as usize], l));
            next[l as usize] += 1;
        }
        Ok(Self {
            table,
            encode,
            ordered: ordered.into_iter().map(|(_, s)| s).collect(),
            first,
            count,
            offset,
            max_len,
        })
    }

    /// (symbol, length) pairs sorted by symbol.
    pub fn table(&self) -> &[(i32, u8)] {
        &self.table
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn codeword(&self, symbol: i32) -> Option<(u64, u8)> {
        self.encode.get(&symbol).copied()
    }

    pub(crate) fn write(&self, symbol: i32, w: &mut BitWriter) -> Result<()> {
        let (code, len) = self
            .codeword(symbol)
            .ok_or_else(|| Error::Encoder(format!("symbol {symbol} is not in the code table")))?;
        w.write_bits(code, len);
        Ok(())
    }

    pub(crate) fn read(&self, r: &mut BitReader<'_>) -> Result<i32> {
        let start = r.byte_offset();
        let mut code = 0u64;
        for l in 1..=self.max_len as usize {
            code = (code << 1) | r.read_bit()? as u64;
            if code >= self.first[l] && code - self.first[l] < self.count[l] {
                return Ok(self.ordered[self.offset[l] + (code - self.first[l]) as usize]);
            }
        }
        Err(Error::corrupt(start, "unknown codeword"))
    }
}
