//! Parameter quantization, entropy coding and reconstruction.

mod bits;
pub mod huffman;
mod quantize;
mod reconstruct;
mod stream;

pub use quantize::{
    dequantize, dequantize_with, quantize, quantize_params, IntPair, LevelParams, ParamRecord,
    QuantizedLevel, QuantizedRecord, Scales,
};
pub use reconstruct::{reconstruct, reconstruct_params, reconstruct_with, synthesize_analytic};
pub use stream::{
    huffman_decode, huffman_encode, CompressedStream, StreamHeader, StreamParams, WindowCode,
    MAGIC, VERSION,
};

/// Source bits per sample used for the compression ratio.
pub const ADC_BITS: u64 = 11;
