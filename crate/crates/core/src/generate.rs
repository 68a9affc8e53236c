//! Autoregressive sampling from any predictor.
//!
//! Sampling reads the same quantized PMF the coder would use at that
//! position, and feeds the predictor the same `update` calls.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coder::{precision_for, Pmf, Quantizer};
use crate::error::{Error, Result};
use crate::predictors::Predictor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMode {
    /// Most probable symbol, lowest index on ties.
    Argmax,
    /// Inverse-CDF draw from the seeded generator.
    Categorical,
}

impl std::str::FromStr for SamplingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "argmax" => Ok(SamplingMode::Argmax),
            "categorical" | "sample" => Ok(SamplingMode::Categorical),
            other => Err(Error::invalid(format!("unknown sampling mode `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub mode: SamplingMode,
    pub seed: u64,
    /// Categorical draws only from the `top_k` heaviest symbols.
    pub top_k: Option<usize>,
}

impl SamplerConfig {
    pub fn argmax() -> Self {
        SamplerConfig {
            mode: SamplingMode::Argmax,
            seed: 0,
            top_k: None,
        }
    }

    pub fn categorical(seed: u64) -> Self {
        SamplerConfig {
            mode: SamplingMode::Categorical,
            seed,
            top_k: None,
        }
    }
}

/// Sampling state for one generation stream.
pub struct Sampler {
    config: SamplerConfig,
    rng: ChaCha8Rng,
    probabilities: Vec<f64>,
    quantizer: Quantizer,
    pmf: Pmf,
    order: Vec<u32>,
}

impl Sampler {
    pub fn new(config: SamplerConfig, alphabet_size: usize) -> Result<Self> {
        if config.top_k == Some(0) || config.top_k.is_some_and(|k| k > alphabet_size) {
            return Err(Error::invalid(format!(
                "top_k {:?} outside 1..={alphabet_size}",
                config.top_k
            )));
        }
        let precision = precision_for(alphabet_size);
        Ok(Sampler {
            config,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            probabilities: vec![0.0; alphabet_size],
            quantizer: Quantizer::default(),
            pmf: Pmf::uniform(alphabet_size, precision)?,
            order: Vec::new(),
        })
    }

    /// The quantized PMF of the next symbol after `context`.
    pub fn pmf(&mut self, predictor: &mut dyn Predictor, context: &[u32]) -> Result<&Pmf> {
        let window = &context[context.len().saturating_sub(predictor.window())..];
        predictor.predict(window, &mut self.probabilities)?;
        let precision = self.pmf.precision();
        self.quantizer
            .quantize_into(&self.probabilities, precision, &mut self.pmf)?;
        Ok(&self.pmf)
    }

    pub fn sample_next(&mut self, predictor: &mut dyn Predictor, context: &[u32]) -> Result<u32> {
        self.pmf(predictor, context)?;
        Ok(self.choose())
    }

    fn choose(&mut self) -> u32 {
        let pmf = &self.pmf;
        let n = pmf.alphabet_size();
        match (self.config.mode, self.config.top_k) {
            (SamplingMode::Argmax, _) => {
                let mut best = 0;
                for s in 1..n {
                    if pmf.mass(s) > pmf.mass(best) {
                        best = s;
                    }
                }
                best as u32
            }
            (SamplingMode::Categorical, None) => {
                let target = self.rng.random_range(0..pmf.total());
                pmf.symbol_for(target) as u32
            }
            (SamplingMode::Categorical, Some(k)) => {
                self.order.clear();
                self.order.extend(0..n as u32);
                let by_mass = |a: &u32, b: &u32| pmf.mass(*b as usize).cmp(&pmf.mass(*a as usize)).then(a.cmp(b));
                if k < n {
                    self.order.select_nth_unstable_by(k - 1, by_mass);
                }
                let kept = &mut self.order[..k];
                kept.sort_unstable();
                let total: u64 = kept.iter().map(|&s| u64::from(pmf.mass(s as usize))).sum();
                let mut target = self.rng.random_range(0..total);
                for &s in kept.iter() {
                    let m = u64::from(pmf.mass(s as usize));
                    if target < m {
                        return s;
                    }
                    target -= m;
                }
                unreachable!("target below the kept mass")
            }
        }
    }
}

/// Resets `predictor`, replays `context` through `update` as the coder
/// would, then samples `n` symbols, feeding each back.
pub fn generate(predictor: &mut dyn Predictor, context: &[u32], n: usize, config: SamplerConfig) -> Result<Vec<u32>> {
    let alphabet = predictor.alphabet_size();
    if let Some(&s) = context.iter().find(|&&s| s as usize >= alphabet) {
        return Err(Error::invalid(format!("context symbol {s} outside the alphabet of {alphabet}")));
    }
    let mut sampler = Sampler::new(config, alphabet)?;
    let window = predictor.window();
    predictor.reset();
    let mut history: Vec<u32> = Vec::with_capacity(context.len() + n);
    let feed = |predictor: &mut dyn Predictor, history: &[u32], symbol: u32| {
        predictor.update(&history[history.len().saturating_sub(window)..], symbol);
    };
    for &s in context {
        feed(predictor, &history, s);
        history.push(s);
    }
    for _ in 0..n {
        let s = sampler.sample_next(predictor, &history)?;
        feed(predictor, &history, s);
        history.push(s);
    }
    Ok(history.split_off(context.len()))
}

/// Byte-level [`generate`]; 128-symbol predictors see bytes halved and
/// their outputs are doubled back.
pub fn generate_bytes(predictor: &mut dyn Predictor, context: &[u8], n: usize, config: SamplerConfig) -> Result<Vec<u8>> {
    let shift = match predictor.alphabet_size() {
        256 => 0,
        128 => 1,
        other => return Err(Error::invalid(format!("cannot generate bytes from {other} symbols"))),
    };
    let symbols: Vec<u32> = context.iter().map(|&b| u32::from(b >> shift)).collect();
    let out = generate(predictor, &symbols, n, config)?;
    Ok(out.into_iter().map(|s| (s << shift) as u8).collect())
}

/// Record written beside every generated output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationMetadata {
    pub predictor: String,
    pub sampler: SamplerConfig,
    pub context_bytes: usize,
    pub generated_bytes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<usize>,
}

/// Completes every row of a `height x width` image independently: the
/// first `width / 2` pixels are kept, the rest generated from them alone.
pub fn rowwise_image_continuation(
    predictor: &mut dyn Predictor,
    pixels: &[u8],
    height: usize,
    width: usize,
    config: SamplerConfig,
) -> Result<Vec<u8>> {
    if width < 2 || pixels.len() != height * width {
        return Err(Error::invalid(format!(
            "{} pixels do not form {height} rows of width {width} >= 2",
            pixels.len()
        )));
    }
    let split = width / 2;
    let mut out = Vec::with_capacity(pixels.len());
    for row in pixels.chunks_exact(width) {
        out.extend_from_slice(&row[..split]);
        out.extend(generate_bytes(predictor, &row[..split], width - split, config)?);
    }
    Ok(out)
}

pub const AUDIO_CONTEXT: usize = 1024;
pub const AUDIO_CONTINUATION: usize = 1024;

/// Keeps the first 1024 bytes of `chunk` and generates the next 1024.
pub fn audio_continuation(predictor: &mut dyn Predictor, chunk: &[u8], config: SamplerConfig) -> Result<Vec<u8>> {
    if chunk.len() < AUDIO_CONTEXT {
        return Err(Error::InsufficientData(format!(
            "audio continuation needs {AUDIO_CONTEXT} context bytes, got {}",
            chunk.len()
        )));
    }
    let mut out = chunk[..AUDIO_CONTEXT].to_vec();
    out.extend(generate_bytes(predictor, &chunk[..AUDIO_CONTEXT], AUDIO_CONTINUATION, config)?);
    Ok(out)
}

/// Empirical entropy of the byte histogram, in bits per byte.
pub fn empirical_entropy(bytes: &[u8]) -> f64 {
    if bytes.is_empty() {
        return 0.0;
    }
    let mut counts = [0u64; 256];
    for &b in bytes {
        counts[b as usize] += 1;
    }
    let n = bytes.len() as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Mean over rows of the entropy of each row's generated half.
pub fn mean_completion_entropy(image: &[u8], width: usize) -> f64 {
    let rows: Vec<&[u8]> = image.chunks_exact(width).collect();
    if rows.is_empty() {
        return 0.0;
    }
    rows.iter().map(|r| empirical_entropy(&r[width / 2..])).sum::<f64>() / rows.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codecs::Gzip;
    use crate::coder::encode_sequence_logged;
    use crate::predictors::{invert_codec, AdaptiveFreq, CodecCodeLength, CodecInverted, ContextBackoff, Uniform};

    fn sym(s: &[u8]) -> Vec<u32> {
        s.iter().map(|&b| u32::from(b)).collect()
    }

    #[test]
    fn uniform_argmax_is_zero() {
        let out = generate(&mut Uniform::new(256), &[], 3, SamplerConfig::argmax()).unwrap();
        assert_eq!(out, vec![0, 0, 0]);
        assert!(generate(&mut Uniform::new(256), &[1], 0, SamplerConfig::argmax()).unwrap().is_empty());
    }

    #[test]
    fn degenerate_distribution_wins_in_both_modes() {
        let context = vec![b'q'; 4000];
        for config in [SamplerConfig::argmax(), SamplerConfig::categorical(9)] {
            let mut p = AdaptiveFreq::new(256, 0.001).unwrap();
            let out = generate_bytes(&mut p, &context, 5, config).unwrap();
            assert_eq!(out, b"qqqqq");
        }
    }

    #[test]
    fn periodic_context_continues_periodically() {
        let context: Vec<u8> = b"abc".repeat(30);
        let mut p = ContextBackoff::new(256, 2);
        let out = generate_bytes(&mut p, &context, 9, SamplerConfig::argmax()).unwrap();
        assert_eq!(out, b"abcabcabc");
    }

    #[test]
    fn inverted_gzip_repeats_the_period() {
        let context = b"abababab";
        let mut lengths = CodecCodeLength::new(Box::new(Gzip));
        let mut oracle = vec![0.0; 256];
        invert_codec(&mut lengths, context, &mut oracle).unwrap();
        let best = oracle
            .iter()
            .enumerate()
            .fold(0, |b, (i, &p)| if p > oracle[b] { i } else { b });
        let mut p = CodecInverted::new(CodecCodeLength::new(Box::new(Gzip)));
        let out = generate_bytes(&mut p, context, 1, SamplerConfig::argmax()).unwrap();
        assert_eq!(out, vec![best as u8]);
        assert_eq!(out, b"a");
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let context = crate::datapipe::fixtures::make_text_fixture(500, 1);
        let config = SamplerConfig {
            mode: SamplingMode::Categorical,
            seed: 42,
            top_k: Some(20),
        };
        let run = || generate_bytes(&mut ContextBackoff::new(256, 2), &context, 200, config).unwrap();
        assert_eq!(run(), run());
        let other = generate_bytes(&mut ContextBackoff::new(256, 2), &context, 200, SamplerConfig { seed: 43, ..config }).unwrap();
        assert_ne!(run(), other);
    }

    #[test]
    fn top_k_one_is_argmax() {
        let context = crate::datapipe::fixtures::make_text_fixture(800, 2);
        let config = SamplerConfig {
            mode: SamplingMode::Categorical,
            seed: 5,
            top_k: Some(1),
        };
        let a = generate_bytes(&mut ContextBackoff::new(256, 3), &context, 50, config).unwrap();
        let b = generate_bytes(&mut ContextBackoff::new(256, 3), &context, 50, SamplerConfig::argmax()).unwrap();
        assert_eq!(a, b);
        assert!(Sampler::new(SamplerConfig { top_k: Some(300), ..config }, 256).is_err());
    }

    #[test]
    fn sampler_sees_the_coders_distribution() {
        let context = sym(b"the cat sat on the mat; the cat ");
        let mut p = ContextBackoff::new(256, 2);
        let next = generate(&mut p, &context, 1, SamplerConfig::argmax()).unwrap()[0];
        let mut full = context.clone();
        full.push(next);
        let (_, lengths) = encode_sequence_logged(&mut ContextBackoff::new(256, 2), &full).unwrap();
        // The chosen symbol's code length equals the least code length the
        // coder could have paid at that position.
        let mut sampler = Sampler::new(SamplerConfig::argmax(), 256).unwrap();
        let mut q = ContextBackoff::new(256, 2);
        for i in 0..context.len() {
            q.update(&context[..i], context[i]);
        }
        let pmf = sampler.pmf(&mut q, &context).unwrap();
        let least = (0..256).map(|s| pmf.code_length(s)).fold(f64::INFINITY, f64::min);
        assert_eq!(*lengths.last().unwrap(), least);
    }

    #[test]
    fn rows_are_completed_independently() {
        let image = vec![77u8; 4 * 10];
        let mut p = AdaptiveFreq::laplace(256);
        let out = rowwise_image_continuation(&mut p, &image, 4, 10, SamplerConfig::argmax()).unwrap();
        assert_eq!(out, image);
        assert!(rowwise_image_continuation(&mut p, &[1; 9], 9, 1, SamplerConfig::argmax()).is_err());
    }

    #[test]
    fn audio_harness_shape() {
        let chunk = crate::datapipe::fixtures::make_audio_fixture(2048, 1);
        let out = audio_continuation(&mut ContextBackoff::new(256, 2), &chunk, SamplerConfig::argmax()).unwrap();
        assert_eq!(out.len(), 2048);
        assert_eq!(&out[..1024], &chunk[..1024]);
    }

    #[test]
    fn entropy_of_histograms() {
        assert_eq!(empirical_entropy(&[5; 10]), 0.0);
        assert_eq!(empirical_entropy(&[0, 1, 2, 3]), 2.0);
    }
}
