//! Bytes as an 8-bit grayscale PNG, one byte per pixel, rows of fixed
//! width. A `tEXt` chunk records the byte count so a short last row can be
//! zero-padded.

use super::{adapter_error, Codec, Mode};
use crate::error::{Error, Result};

/// Row width for single chunks: the 32x64 patch geometry.
pub const CHUNKED_WIDTH: usize = 64;
/// Row width for whole streams; one filter-type byte per 2048 pixels.
pub const WHOLE_WIDTH: usize = 2048;

const LENGTH_KEY: &str = "lmzc-length";

#[derive(Clone, Copy, Debug, Default)]
pub struct Png;

fn width_for(mode: Mode) -> usize {
    match mode {
        Mode::Whole => WHOLE_WIDTH,
        Mode::Chunked => CHUNKED_WIDTH,
    }
}

impl Codec for Png {
    fn id(&self) -> &str {
        "png"
    }

    fn compress(&self, data: &[u8], mode: Mode) -> Result<Vec<u8>> {
        let width = width_for(mode).min(data.len()).max(1);
        let height = data.len().div_ceil(width).max(1);
        let mut pixels = data.to_vec();
        pixels.resize(width * height, 0);
        let mut out = Vec::with_capacity(data.len() + 128);
        {
            let mut encoder = png::Encoder::new(&mut out, width as u32, height as u32);
            encoder.set_color(png::ColorType::Grayscale);
            encoder.set_depth(png::BitDepth::Eight);
            encoder.set_compression(png::Compression::High);
            encoder
                .add_text_chunk(LENGTH_KEY.to_string(), data.len().to_string())
                .map_err(|e| adapter_error("png", e))?;
            let mut writer = encoder.write_header().map_err(|e| adapter_error("png", e))?;
            writer.write_image_data(&pixels).map_err(|e| adapter_error("png", e))?;
            writer.finish().map_err(|e| adapter_error("png", e))?;
        }
        Ok(out)
    }

    fn decompress(&self, data: &[u8], _mode: Mode) -> Result<Vec<u8>> {
        let bad = |e: png::DecodingError| Error::corrupt(format!("png: {e}"));
        let mut reader = png::Decoder::new(std::io::Cursor::new(data)).read_info().map_err(bad)?;
        let info = reader.info();
        if info.color_type != png::ColorType::Grayscale || info.bit_depth != png::BitDepth::Eight {
            return Err(Error::corrupt("png: not 8-bit grayscale"));
        }
        let mut pixels = vec![0u8; reader.output_buffer_size().ok_or_else(|| Error::corrupt("png: image too large"))?];
        let frame = reader.next_frame(&mut pixels).map_err(bad)?;
        pixels.truncate(frame.buffer_size());
        reader.finish().map_err(bad)?;
        let length = reader
            .info()
            .uncompressed_latin1_text
            .iter()
            .find(|t| t.keyword == LENGTH_KEY)
            .and_then(|t| t.text.parse::<usize>().ok())
            .ok_or_else(|| Error::corrupt("png: missing length"))?;
        if length > pixels.len() {
            return Err(Error::corrupt("png: length exceeds image"));
        }
        pixels.truncate(length);
        Ok(pixels)
    }
}
