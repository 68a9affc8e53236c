//! Byte transforms applied before coding.

use crate::coder::BitString;
use crate::error::{Error, Result};

/// Which bit the 7-bit mapping gives up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SevenBitVariant {
    /// Text: clear the most significant bit. Only bytes >= 128 lose a bit.
    Msb,
    /// Image and audio: halve every byte, losing its least significant bit.
    Lsb,
}

impl SevenBitVariant {
    pub fn name(self) -> &'static str {
        match self {
            SevenBitVariant::Msb => "msb",
            SevenBitVariant::Lsb => "lsb",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "msb" => Ok(SevenBitVariant::Msb),
            "lsb" => Ok(SevenBitVariant::Lsb),
            other => Err(Error::invalid(format!("unknown 7-bit variant `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SevenBit {
    /// Every byte below 128.
    pub symbols: Vec<u8>,
    /// Bits charged to the compressed output: one per processed byte.
    pub lost_bits: BitString,
    /// What [`from_seven_bit`] needs besides `symbols`. For `Lsb` this is
    /// `lost_bits`; for `Msb` it is the MSB of every byte, since the charged
    /// bits alone (all ones) do not say which bytes they came from.
    pub side: BitString,
}

pub fn to_seven_bit(bytes: &[u8], variant: SevenBitVariant) -> SevenBit {
    match variant {
        SevenBitVariant::Msb => {
            let symbols = bytes.iter().map(|&b| b & 0x7F).collect();
            let lost_bits = bytes.iter().filter(|&&b| b >= 0x80).map(|_| true).collect();
            let side = bytes.iter().map(|&b| b >= 0x80).collect();
            SevenBit {
                symbols,
                lost_bits,
                side,
            }
        }
        SevenBitVariant::Lsb => {
            let symbols = bytes.iter().map(|&b| b >> 1).collect();
            let lost_bits: BitString = bytes.iter().map(|&b| b & 1 == 1).collect();
            SevenBit {
                symbols,
                side: lost_bits.clone(),
                lost_bits,
            }
        }
    }
}

/// Inverse of [`to_seven_bit`] given the `side` bits. For `Msb` an empty
/// side means no byte had its MSB set.
pub fn from_seven_bit(symbols: &[u8], variant: SevenBitVariant, side: &BitString) -> Result<Vec<u8>> {
    if let Some(&b) = symbols.iter().find(|&&b| b >= 0x80) {
        return Err(Error::corrupt(format!("7-bit symbol {b} out of range")));
    }
    let n = symbols.len() as u64;
    match variant {
        SevenBitVariant::Msb if side.is_empty() => Ok(symbols.to_vec()),
        _ if side.len() != n => Err(Error::corrupt(format!(
            "{} side bits for {n} symbols",
            side.len()
        ))),
        SevenBitVariant::Msb => Ok(symbols
            .iter()
            .zip(side.iter())
            .map(|(&s, high)| s | if high { 0x80 } else { 0 })
            .collect()),
        SevenBitVariant::Lsb => Ok(symbols
            .iter()
            .zip(side.iter())
            .map(|(&s, low)| (s << 1) | u8::from(low))
            .collect()),
    }
}

pub const PATCH_HEIGHT: usize = 32;
pub const PATCH_WIDTH: usize = 64;

/// Non-overlapping 32x64 patches in row-major scan order, each flattened
/// row-major. Border strips that do not fill a patch are dropped.
pub fn extract_image_patches(pixels: &[u8], height: usize, width: usize) -> Result<Vec<Vec<u8>>> {
    if pixels.len() != height * width {
        return Err(Error::invalid(format!(
            "{} pixels for a {height}x{width} image",
            pixels.len()
        )));
    }
    let mut patches = Vec::with_capacity((height / PATCH_HEIGHT) * (width / PATCH_WIDTH));
    for top in (0..height / PATCH_HEIGHT).map(|i| i * PATCH_HEIGHT) {
        for left in (0..width / PATCH_WIDTH).map(|j| j * PATCH_WIDTH) {
            let mut patch = Vec::with_capacity(PATCH_HEIGHT * PATCH_WIDTH);
            for row in top..top + PATCH_HEIGHT {
                let start = row * width + left;
                patch.extend_from_slice(&pixels[start..start + PATCH_WIDTH]);
            }
            patches.push(patch);
        }
    }
    Ok(patches)
}

/// High byte of each sample, offset to unsigned.
pub fn reduce_audio(samples: &[i16]) -> Vec<u8> {
    samples.iter().map(|&s| ((s >> 8) + 128) as u8).collect()
}

/// [`reduce_audio`] over little-endian PCM16 bytes. A trailing odd byte is
/// dropped; the returned flag says whether that happened.
pub fn reduce_audio_le_bytes(bytes: &[u8]) -> (Vec<u8>, bool) {
    let samples: Vec<i16> = bytes
        .chunks_exact(2)
        .map(|pair| i16::from_le_bytes([pair[0], pair[1]]))
        .collect();
    (reduce_audio(&samples), bytes.len() % 2 == 1)
}
