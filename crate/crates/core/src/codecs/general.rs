use std::io::{Read, Write};

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use xz2::stream::{Check, Filters, LzmaOptions, Stream};

use super::{adapter_error, Codec, Mode};
use crate::error::{Error, Result};

/// DEFLATE in a gzip member, maximum compression.
#[derive(Clone, Copy, Debug, Default)]
pub struct Gzip;

impl Codec for Gzip {
    fn id(&self) -> &str {
        "gzip"
    }

    fn compress(&self, data: &[u8], _mode: Mode) -> Result<Vec<u8>> {
        let mut encoder = GzEncoder::new(Vec::with_capacity(data.len() / 2 + 32), flate2::Compression::best());
        encoder.write_all(data)?;
        Ok(encoder.finish()?)
    }

    fn decompress(&self, data: &[u8], _mode: Mode) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        GzDecoder::new(data)
            .read_to_end(&mut out)
            .map_err(|e| Error::corrupt(format!("gzip: {e}")))?;
        Ok(out)
    }
}

/// LZMA2 in an xz container at preset 9.
///
/// The dictionary is capped at the next power of two above the input: a
/// larger one cannot change the output but costs allocation per chunk.
#[derive(Clone, Copy, Debug, Default)]
pub struct Lzma2;

const MAX_DICT: u64 = 64 << 20;
const MIN_DICT: u64 = 4096;

impl Codec for Lzma2 {
    fn id(&self) -> &str {
        "lzma2"
    }

    fn compress(&self, data: &[u8], _mode: Mode) -> Result<Vec<u8>> {
        let dict = (data.len() as u64).next_power_of_two().clamp(MIN_DICT, MAX_DICT);
        let mut options = LzmaOptions::new_preset(9).map_err(|e| adapter_error("lzma2", e))?;
        options.dict_size(dict as u32);
        let mut filters = Filters::new();
        filters.lzma2(&options);
        let stream = Stream::new_stream_encoder(&filters, Check::Crc64).map_err(|e| adapter_error("lzma2", e))?;
        let mut encoder = xz2::write::XzEncoder::new_stream(Vec::with_capacity(data.len() / 2 + 64), stream);
        encoder.write_all(data)?;
        Ok(encoder.finish()?)
    }

    fn decompress(&self, data: &[u8], _mode: Mode) -> Result<Vec<u8>> {
        let stream = Stream::new_stream_decoder(u64::MAX, 0).map_err(|e| adapter_error("lzma2", e))?;
        let mut out = Vec::new();
        xz2::read::XzDecoder::new_stream(data, stream)
            .read_to_end(&mut out)
            .map_err(|e| Error::corrupt(format!("xz: {e}")))?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeros_shrink_below_two_percent() {
        let zeros = vec![0u8; 1 << 20];
        for codec in [&Gzip as &dyn Codec, &Lzma2] {
            let packed = codec.compress(&zeros, Mode::Whole).unwrap();
            assert!(packed.len() * 50 < zeros.len(), "{}: {}", codec.id(), packed.len());
            assert_eq!(codec.decompress(&packed, Mode::Whole).unwrap(), zeros);
        }
    }

    #[test]
    fn garbage_is_corrupt() {
        assert!(matches!(Gzip.decompress(b"not gzip", Mode::Whole), Err(Error::CorruptStream(_))));
        assert!(matches!(Lzma2.decompress(b"not xz", Mode::Whole), Err(Error::CorruptStream(_))));
    }
}
