//! Baseline compressors and their rate accounting.

mod external;
mod flac;
mod general;
mod png;

use std::sync::Arc;

pub use external::ExternalCodec;
pub use flac::Flac;
pub use general::{Gzip, Lzma2};
pub use png::{Png, CHUNKED_WIDTH, WHOLE_WIDTH};

use crate::error::{Error, Result};

/// Whether a codec sees one 2048-byte chunk or a whole dataset stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Whole,
    Chunked,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Whole => "whole",
            Mode::Chunked => "chunked",
        }
    }
}

/// A lossless byte compressor.
pub trait Codec: Send + Sync {
    fn id(&self) -> &str;
    fn compress(&self, data: &[u8], mode: Mode) -> Result<Vec<u8>>;
    fn decompress(&self, data: &[u8], mode: Mode) -> Result<Vec<u8>>;
}

/// Identifiers of the in-process codecs.
pub const BUILTIN: &[&str] = &["gzip", "lzma2", "png", "flac"];

/// Looks up a built-in codec (`deflate` is an alias of `gzip`), then an
/// external one declared through the environment (see [`ExternalCodec`]).
pub fn codec_by_id(id: &str) -> Result<Box<dyn Codec>> {
    Ok(match id {
        "gzip" | "deflate" => Box::new(Gzip),
        "lzma2" | "xz" => Box::new(Lzma2),
        "png" => Box::new(Png),
        "flac" => Box::new(Flac),
        other => Box::new(ExternalCodec::from_env(other)?),
    })
}

fn adapter_error(id: &str, reason: impl std::fmt::Display) -> Error {
    Error::AdapterUnavailable {
        id: id.to_string(),
        reason: reason.to_string(),
    }
}

/// A codec that passed its startup probe, with its measured header size.
#[derive(Clone)]
pub struct CodecAdapter {
    codec: Arc<dyn Codec>,
    header_bytes: u64,
}

impl std::fmt::Debug for CodecAdapter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CodecAdapter")
            .field("id", &self.codec.id())
            .field("header_bytes", &self.header_bytes)
            .finish()
    }
}

impl CodecAdapter {
    pub fn open(id: &str) -> Result<Self> {
        Self::probe(codec_by_id(id)?)
    }

    /// Round-trips a probe input in both modes and measures the header as the
    /// compressed size of the empty input.
    pub fn probe(codec: Box<dyn Codec>) -> Result<Self> {
        let id = codec.id().to_string();
        let probe: Vec<u8> = (0..3000u32).map(|i| (i * i % 251) as u8 ^ (i >> 4) as u8).collect();
        for mode in [Mode::Whole, Mode::Chunked] {
            for input in [&probe[..], &probe[..1], &[][..]] {
                let packed = codec.compress(input, mode).map_err(|e| adapter_error(&id, e))?;
                let back = codec.decompress(&packed, mode).map_err(|e| adapter_error(&id, e))?;
                if back != input {
                    return Err(adapter_error(&id, "probe did not round-trip"));
                }
            }
        }
        let header_bytes = codec
            .compress(&[], Mode::Chunked)
            .map_err(|e| adapter_error(&id, e))?
            .len() as u64;
        Ok(CodecAdapter {
            codec: Arc::from(codec),
            header_bytes,
        })
    }

    pub fn id(&self) -> &str {
        self.codec.id()
    }

    pub fn codec(&self) -> &dyn Codec {
        self.codec.as_ref()
    }

    pub fn header_bytes(&self) -> u64 {
        self.header_bytes
    }

    /// Compressed size of the whole stream.
    pub fn compress_whole(&self, data: &[u8]) -> Result<u64> {
        Ok(self.codec.compress(data, Mode::Whole)?.len() as u64)
    }

    /// Compressed size of one chunk, header included.
    pub fn compress_chunk(&self, chunk: &[u8]) -> Result<u64> {
        Ok(self.codec.compress(chunk, Mode::Chunked)?.len() as u64)
    }

    /// Sum of per-chunk sizes with the header counted once.
    pub fn compress_chunked<'a>(&self, chunks: impl IntoIterator<Item = &'a [u8]>) -> Result<u64> {
        let mut total = self.header_bytes;
        for chunk in chunks {
            total += self.compress_chunk(chunk)?.saturating_sub(self.header_bytes);
        }
        Ok(total)
    }
}
