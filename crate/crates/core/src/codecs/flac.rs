//! Bytes as 8-bit mono PCM at 16 kHz, one byte per sample (`byte - 128`).

use flacenc::bitsink::ByteSink;
use flacenc::component::BitRepr;
use flacenc::error::Verify;

use super::{adapter_error, Codec, Mode};
use crate::error::{Error, Result};

pub const SAMPLE_RATE: usize = 16_000;

const MIN_BLOCK: usize = 64;
/// "fLaC", metadata block header, then min and max block size (u16 BE each).
const STREAMINFO_BLOCK_BOUNDS: std::ops::Range<usize> = 8..12;

#[derive(Clone, Copy, Debug, Default)]
pub struct Flac;

impl Codec for Flac {
    fn id(&self) -> &str {
        "flac"
    }

    fn compress(&self, data: &[u8], _mode: Mode) -> Result<Vec<u8>> {
        let mut config = flacenc::config::Encoder::default();
        // One block per chunk; the encoder pads a short final block up to
        // the block size.
        config.block_size = data.len().clamp(MIN_BLOCK, config.block_size);
        let config = config
            .into_verified()
            .map_err(|e| adapter_error("flac", format!("{e:?}")))?;
        let samples: Vec<i32> = data.iter().map(|&b| i32::from(b) - 128).collect();
        let source = flacenc::source::MemSource::from_samples(&samples, 1, 8, SAMPLE_RATE);
        let stream = flacenc::encode_with_fixed_block_size(&config, source, config.block_size)
            .map_err(|e| adapter_error("flac", format!("{e:?}")))?;
        let mut sink = ByteSink::new();
        stream
            .write(&mut sink)
            .map_err(|e| adapter_error("flac", format!("{e:?}")))?;
        let mut out = sink.into_inner();
        if data.is_empty() {
            // STREAMINFO block-size bounds of a sample-less stream come out
            // inverted; decoders reject that.
            out[STREAMINFO_BLOCK_BOUNDS].copy_from_slice(&[0, 64, 0, 64]);
        }
        Ok(out)
    }

    fn decompress(&self, data: &[u8], _mode: Mode) -> Result<Vec<u8>> {
        let bad = |e: claxon::Error| Error::corrupt(format!("flac: {e}"));
        let mut reader = claxon::FlacReader::new(std::io::Cursor::new(data)).map_err(bad)?;
        let info = reader.streaminfo();
        if info.channels != 1 || info.bits_per_sample != 8 {
            return Err(Error::corrupt("flac: not 8-bit mono"));
        }
        let expected = info.samples.unwrap_or(0) as usize;
        let mut out = Vec::with_capacity(expected);
        for sample in reader.samples() {
            let s = sample.map_err(bad)?;
            out.push((s + 128) as u8);
        }
        // The final block may carry encoder padding past the declared length.
        if out.len() < expected {
            return Err(Error::corrupt("flac: stream shorter than declared"));
        }
        out.truncate(expected);
        Ok(out)
    }
}
