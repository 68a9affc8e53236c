//! Prediction from code lengths: `rho(b | x) ∝ 2^-l(x b)`.
//!
//! `l(x)` is common to every candidate and cancels in the normalization,
//! so only the 256 extensions are measured.

use super::{check_output, ModelFootprint, Predictor, PredictorSpec};
use crate::codecs::{Codec, Mode};
use crate::error::{Error, Result};

/// Smallest probability handed to the coder.
pub const PROBABILITY_FLOOR: f64 = 1.0 / 65536.0;

/// Something that assigns a length in bits to a byte string.
pub trait CodeLength: Send {
    /// Identifier used in the predictor spec.
    fn id(&self) -> String;

    fn code_length(&mut self, data: &[u8]) -> Result<f64>;
}

/// Length of a codec's output, in bits.
pub struct CodecCodeLength {
    codec: Box<dyn Codec>,
}

impl CodecCodeLength {
    pub fn new(codec: Box<dyn Codec>) -> Self {
        CodecCodeLength { codec }
    }
}

impl CodeLength for CodecCodeLength {
    fn id(&self) -> String {
        self.codec.id().to_string()
    }

    fn code_length(&mut self, data: &[u8]) -> Result<f64> {
        let compressed = self
            .codec
            .compress(data, Mode::Chunked)
            .map_err(|e| Error::unavailable(format!("codec {}: {e}", self.codec.id())))?;
        Ok(8.0 * compressed.len() as f64)
    }
}

/// Ideal sequential code length `-sum log2 rho(x_i | x_<i)` of a predictor,
/// evaluated from a reset state.
pub struct PredictorCodeLength<P> {
    predictor: P,
    scratch: Vec<f64>,
    symbols: Vec<u32>,
}

impl<P: Predictor> PredictorCodeLength<P> {
    pub fn new(predictor: P) -> Self {
        let scratch = vec![0.0; predictor.alphabet_size()];
        PredictorCodeLength {
            predictor,
            scratch,
            symbols: Vec::new(),
        }
    }
}

impl<P: Predictor> CodeLength for PredictorCodeLength<P> {
    fn id(&self) -> String {
        self.predictor.spec().to_string()
    }

    fn code_length(&mut self, data: &[u8]) -> Result<f64> {
        self.symbols.clear();
        self.symbols.extend(data.iter().map(|&b| u32::from(b)));
        self.predictor.reset();
        let window = self.predictor.window();
        let mut bits = 0.0;
        for i in 0..self.symbols.len() {
            let context = &self.symbols[i.saturating_sub(window)..i];
            self.predictor.predict(context, &mut self.scratch)?;
            bits -= self.scratch[self.symbols[i] as usize].log2();
            self.predictor.update(context, self.symbols[i]);
        }
        Ok(bits)
    }
}

/// Distribution of the byte following `context` implied by `lengths`,
/// floored at [`PROBABILITY_FLOOR`] and renormalized.
pub fn invert_codec(lengths: &mut dyn CodeLength, context: &[u8], out: &mut [f64]) -> Result<()> {
    check_output(out, 256)?;
    let mut buffer = Vec::with_capacity(context.len() + 1);
    buffer.extend_from_slice(context);
    buffer.push(0);
    let last = context.len();
    for b in 0..=255u8 {
        buffer[last] = b;
        out[usize::from(b)] = lengths.code_length(&buffer)?;
    }
    normalize_lengths(out);
    Ok(())
}

/// Turns candidate code lengths (bits) into a floored distribution in place.
pub(crate) fn normalize_lengths(values: &mut [f64]) {
    let shortest = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut total = 0.0;
    for v in values.iter_mut() {
        *v = (shortest - *v).exp2();
        total += *v;
    }
    let mut floored = 0.0;
    for v in values.iter_mut() {
        *v = (*v / total).max(PROBABILITY_FLOOR);
        floored += *v;
    }
    for v in values.iter_mut() {
        *v /= floored;
    }
}

/// Any [`CodeLength`] used as a byte predictor. Stateless: everything it
/// knows comes from the context.
pub struct CodecInverted {
    lengths: Box<dyn CodeLength>,
    buffer: Vec<u8>,
}

impl CodecInverted {
    pub fn new(lengths: impl CodeLength + 'static) -> Self {
        CodecInverted {
            lengths: Box::new(lengths),
            buffer: Vec::new(),
        }
    }
}

impl Predictor for CodecInverted {
    fn spec(&self) -> PredictorSpec {
        PredictorSpec::codec_inverted(&self.lengths.id())
    }

    fn alphabet_size(&self) -> usize {
        256
    }

    fn predict(&mut self, context: &[u32], out: &mut [f64]) -> Result<()> {
        self.buffer.clear();
        for &s in context {
            let byte = u8::try_from(s).map_err(|_| Error::invalid(format!("symbol {s} is not a byte")))?;
            self.buffer.push(byte);
        }
        invert_codec(self.lengths.as_mut(), &self.buffer, out)
    }

    fn update(&mut self, _context: &[u32], _symbol: u32) {}

    fn reset(&mut self) {}

    fn footprint(&self) -> ModelFootprint {
        ModelFootprint::NONE
    }
}
