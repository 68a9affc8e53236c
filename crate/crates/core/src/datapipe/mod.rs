//! Dataset ingestion, byte transforms and chunking.

pub mod fixtures;
mod transforms;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use transforms::{
    extract_image_patches, from_seven_bit, reduce_audio, reduce_audio_le_bytes, to_seven_bit, SevenBit,
    SevenBitVariant, PATCH_HEIGHT, PATCH_WIDTH,
};

use crate::coder::BitString;
use crate::error::{Error, Result};

pub const CHUNK_SIZE: usize = 2048;

/// Desk-scale default dataset size.
pub const DEFAULT_DATASET_BYTES: usize = 10 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Text,
    Image,
    Audio,
    Random,
}

impl Modality {
    pub const ALL: [Modality; 4] = [Modality::Text, Modality::Image, Modality::Audio, Modality::Random];

    pub fn name(self) -> &'static str {
        match self {
            Modality::Text => "text",
            Modality::Image => "image",
            Modality::Audio => "audio",
            Modality::Random => "random",
        }
    }

    /// The 7-bit mapping this modality uses.
    pub fn seven_bit_variant(self) -> SevenBitVariant {
        match self {
            Modality::Text | Modality::Random => SevenBitVariant::Msb,
            Modality::Image | Modality::Audio => SevenBitVariant::Lsb,
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Modality::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown modality `{s}`")))
    }
}

/// One evaluation unit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chunk {
    pub payload: Vec<u8>,
    pub modality: Modality,
    pub source_offset: u64,
    pub lost_bits: BitString,
}

/// Consecutive non-overlapping 2048-byte chunks; the last may be shorter.
pub fn chunk_stream(bytes: &[u8], modality: Modality) -> Vec<Chunk> {
    bytes
        .chunks(CHUNK_SIZE)
        .enumerate()
        .map(|(i, payload)| Chunk {
            payload: payload.to_vec(),
            modality,
            source_offset: (i * CHUNK_SIZE) as u64,
            lost_bits: BitString::new(),
        })
        .collect()
}

/// Chunks mapped to 7 bits, each carrying the bits it lost.
pub fn seven_bit_chunks(bytes: &[u8], modality: Modality) -> Vec<Chunk> {
    let variant = modality.seven_bit_variant();
    chunk_stream(bytes, modality)
        .into_iter()
        .map(|mut chunk| {
            let mapped = to_seven_bit(&chunk.payload, variant);
            chunk.payload = mapped.symbols;
            chunk.lost_bits = mapped.lost_bits;
            chunk
        })
        .collect()
}

pub fn chunk_count(total_bytes: u64) -> u64 {
    total_bytes.div_ceil(CHUNK_SIZE as u64)
}

/// Replayable description of a dataset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub modality: Modality,
    pub total_bytes: u64,
    pub chunk_count: u64,
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub transforms: Vec<String>,
}

impl DatasetManifest {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let manifest: DatasetManifest =
            toml::from_str(text).map_err(|e| Error::invalid(format!("bad manifest: {e}")))?;
        if manifest.chunk_count != chunk_count(manifest.total_bytes) {
            return Err(Error::invalid("manifest chunk_count disagrees with total_bytes"));
        }
        Ok(manifest)
    }
}

/// Where a dataset's bytes come from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DatasetSource {
    /// Synthetic corpus (or, for text, the file named by `LMZC_ENWIK8`).
    Fixture { modality: Modality, bytes: usize, seed: u64 },
    /// Raw file read as-is.
    File { modality: Modality, path: PathBuf, limit: Option<usize> },
    /// Directory of PNG/JPEG images, cut into patches.
    ImageDir { path: PathBuf, limit: Option<usize> },
    /// Directory of PCM16 WAV files, reduced to one byte per sample.
    WavDir { path: PathBuf, limit: Option<usize> },
}

/// Environment variable naming a local copy of enwik8 used for the text
/// fixture when present.
pub const ENWIK8_ENV: &str = "LMZC_ENWIK8";

impl DatasetSource {
    pub fn fixture(modality: Modality, bytes: usize) -> Self {
        DatasetSource::Fixture {
            modality,
            bytes,
            seed: fixtures::DEFAULT_SEED,
        }
    }

    /// Parses `text`, `image:4M`, `audio:10M:seed=3`, `file:text:path`,
    /// `images:path` or `wavs:path`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        match parts.as_slice() {
            ["images", path] => Ok(DatasetSource::ImageDir { path: path.into(), limit: None }),
            ["wavs", path] => Ok(DatasetSource::WavDir { path: path.into(), limit: None }),
            ["file", modality, path] => Ok(DatasetSource::File {
                modality: modality.parse()?,
                path: path.into(),
                limit: None,
            }),
            [modality, rest @ ..] => {
                let modality: Modality = modality.parse()?;
                let mut bytes = DEFAULT_DATASET_BYTES;
                let mut seed = fixtures::DEFAULT_SEED;
                for part in rest {
                    if let Some(s) = part.strip_prefix("seed=") {
                        seed = s.parse().map_err(|_| Error::invalid(format!("bad seed `{s}`")))?;
                    } else {
                        bytes = parse_size(part)?;
                    }
                }
                Ok(DatasetSource::Fixture { modality, bytes, seed })
            }
            [] => Err(Error::invalid("empty dataset")),
        }
    }
}

/// `1234`, `64K`, `10M`, `1G` (binary multiples).
pub fn parse_size(text: &str) -> Result<usize> {
    let bad = || Error::invalid(format!("bad size `{text}`"));
    let (digits, shift) = match text.as_bytes().last().map(u8::to_ascii_uppercase) {
        Some(b'K') => (&text[..text.len() - 1], 10),
        Some(b'M') => (&text[..text.len() - 1], 20),
        Some(b'G') => (&text[..text.len() - 1], 30),
        _ => (text, 0),
    };
    let value: usize = digits.parse().map_err(|_| bad())?;
    value.checked_mul(1 << shift).ok_or_else(bad)
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    pub bytes: Vec<u8>,
}

impl Dataset {
    pub fn chunks(&self) -> Vec<Chunk> {
        chunk_stream(&self.bytes, self.manifest.modality)
    }

    pub fn modality(&self) -> Modality {
        self.manifest.modality
    }

    pub fn name(&self) -> &str {
        &self.manifest.name
    }
}

fn truncate(mut bytes: Vec<u8>, limit: Option<usize>) -> Vec<u8> {
    if let Some(limit) = limit {
        bytes.truncate(limit);
    }
    bytes
}

pub fn load_dataset(source: &DatasetSource) -> Result<Dataset> {
    let (name, modality, bytes, origin, seed, transforms) = match source {
        DatasetSource::Fixture { modality, bytes, seed } => {
            let enwik = std::env::var_os(ENWIK8_ENV).map(PathBuf::from);
            match (modality, enwik) {
                (Modality::Text, Some(path)) if path.is_file() => {
                    let mut data = std::fs::read(&path)?;
                    data.truncate(*bytes);
                    let origin = path.display().to_string();
                    (format!("enwik-{}", size_label(data.len())), *modality, data, origin, None, vec![])
                }
                _ => {
                    let data = match modality {
                        Modality::Text => fixtures::make_text_fixture(*bytes, *seed),
                        Modality::Image => fixtures::make_image_fixture(*bytes, *seed),
                        Modality::Audio => fixtures::make_audio_fixture(*bytes, *seed),
                        Modality::Random => fixtures::make_random_fixture(*bytes, *seed),
                    };
                    let transforms = match modality {
                        Modality::Image => vec!["patches_32x64".to_string()],
                        Modality::Audio => vec!["pcm16_high_byte".to_string()],
                        _ => vec![],
                    };
                    let name = format!("{}-{}", modality.name(), size_label(*bytes));
                    (name, *modality, data, format!("synthetic:{}", modality.name()), Some(*seed), transforms)
                }
            }
        }
        DatasetSource::File { modality, path, limit } => {
            let data = truncate(std::fs::read(path)?, *limit);
            (file_stem(path), *modality, data, path.display().to_string(), None, vec![])
        }
        DatasetSource::ImageDir { path, limit } => {
            let data = truncate(load_image_dir(path)?, *limit);
            let transforms = vec!["grayscale".into(), "patches_32x64".into()];
            (file_stem(path), Modality::Image, data, path.display().to_string(), None, transforms)
        }
        DatasetSource::WavDir { path, limit } => {
            let data = truncate(load_wav_dir(path)?, *limit);
            (file_stem(path), Modality::Audio, data, path.display().to_string(), None, vec!["pcm16_high_byte".into()])
        }
    };
    let total = bytes.len() as u64;
    Ok(Dataset {
        manifest: DatasetManifest {
            name,
            modality,
            total_bytes: total,
            chunk_count: chunk_count(total),
            source: origin,
            seed,
            transforms,
        },
        bytes,
    })
}

pub fn size_label(bytes: usize) -> String {
    if bytes >= 1 << 20 && bytes.is_multiple_of(1 << 20) {
        format!("{}M", bytes >> 20)
    } else if bytes >= 1 << 10 && bytes.is_multiple_of(1 << 10) {
        format!("{}K", bytes >> 10)
    } else {
        bytes.to_string()
    }
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into())
}

fn sorted_entries(dir: &Path, extensions: &[&str]) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| extensions.contains(&e.to_ascii_lowercase().as_str()))
        })
        .collect();
    paths.sort();
    Ok(paths)
}

/// Decodes an image file to 8-bit grayscale: (pixels, height, width).
pub fn load_gray_image(path: &Path) -> Result<(Vec<u8>, usize, usize)> {
    let image = image::open(path).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
    let gray = image.to_luma8();
    let (w, h) = gray.dimensions();
    Ok((gray.into_raw(), h as usize, w as usize))
}

/// Patches of every image in `dir` (sorted by name). Images smaller than
/// one patch are skipped with a warning.
pub fn load_image_dir(dir: &Path) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut skipped = 0usize;
    for path in sorted_entries(dir, &["png", "jpg", "jpeg"])? {
        let (pixels, h, w) = load_gray_image(&path)?;
        let patches = extract_image_patches(&pixels, h, w)?;
        if patches.is_empty() {
            skipped += 1;
        }
        out.extend(patches.into_iter().flatten());
    }
    if skipped > 0 {
        log::warn!("{skipped} image(s) smaller than one patch skipped");
    }
    Ok(out)
}

/// Reduced samples of every mono PCM16 WAV in `dir` (sorted by name).
pub fn load_wav_dir(dir: &Path) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for path in sorted_entries(dir, &["wav"])? {
        out.extend(reduce_audio(&load_wav(&path)?));
    }
    Ok(out)
}

/// PCM16 samples of a WAV file (first channel).
pub fn load_wav(path: &Path) -> Result<Vec<i16>> {
    let bad = |e: hound::Error| Error::invalid(format!("{}: {e}", path.display()));
    let mut reader = hound::WavReader::open(path).map_err(bad)?;
    let spec = reader.spec();
    if spec.bits_per_sample != 16 || spec.sample_format != hound::SampleFormat::Int {
        return Err(Error::invalid(format!("{}: not PCM16", path.display())));
    }
    if spec.sample_rate != 16_000 {
        log::warn!("{}: sample rate {} Hz, expected 16000", path.display(), spec.sample_rate);
    }
    let channels = usize::from(spec.channels);
    reader
        .samples::<i16>()
        .step_by(channels)
        .map(|s| s.map_err(bad))
        .collect()
}
