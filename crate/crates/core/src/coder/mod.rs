//! Arithmetic coding over quantized predictor outputs.

mod arith;
mod bits;
pub mod exact;
mod pmf;

pub use arith::{CoderState, Decoder, Encoder, STATE_BITS};
pub use bits::BitString;
pub use exact::{exact_decode, exact_encode, ConditionalTable, ExactModel, RationalInterval};
pub use pmf::{
    min_precision, precision_for, quantize, Pmf, Quantizer, DEFAULT_PRECISION, MAX_PRECISION,
    WIDE_PRECISION,
};

use crate::error::{Error, Result};
use crate::predictors::Predictor;

/// Drives a predictor through the coder one symbol at a time, quantizing
/// each conditional exactly as the decoder will.
struct Stepper {
    probabilities: Vec<f64>,
    /// Input of the last quantization; `pmf` is its output.
    previous: Vec<f64>,
    quantizer: Quantizer,
    pmf: Pmf,
    precision: u32,
    window: usize,
}

impl Stepper {
    fn new(predictor: &dyn Predictor) -> Result<Self> {
        let alphabet = predictor.alphabet_size();
        let precision = precision_for(alphabet);
        Ok(Stepper {
            probabilities: vec![0.0; alphabet],
            previous: Vec::new(),
            quantizer: Quantizer::default(),
            pmf: Pmf::uniform(alphabet, precision)?,
            precision,
            window: predictor.window(),
        })
    }

    fn context<'a>(&self, history: &'a [u32]) -> &'a [u32] {
        &history[history.len().saturating_sub(self.window)..]
    }

    fn pmf(&mut self, predictor: &mut dyn Predictor, history: &[u32]) -> Result<&Pmf> {
        let context = self.context(history);
        predictor.predict(context, &mut self.probabilities)?;
        if self.probabilities != self.previous {
            self.quantizer
                .quantize_into(&self.probabilities, self.precision, &mut self.pmf)?;
            std::mem::swap(&mut self.probabilities, &mut self.previous);
            self.probabilities.resize(self.previous.len(), 0.0);
        }
        Ok(&self.pmf)
    }
}

fn check_symbols(data: &[u32], alphabet: usize) -> Result<()> {
    match data.iter().find(|&&s| s as usize >= alphabet) {
        Some(s) => Err(Error::invalid(format!(
            "symbol {s} outside the predictor's alphabet of {alphabet}"
        ))),
        None => Ok(()),
    }
}

/// Encodes `data` under `predictor`, returning the code word and the code
/// length in bits of every symbol under the quantized PMF actually used.
///
/// The predictor is reset first, so the result depends only on its spec,
/// its frozen training state and `data`.
pub fn encode_sequence_logged(
    predictor: &mut dyn Predictor,
    data: &[u32],
) -> Result<(BitString, Vec<f64>)> {
    check_symbols(data, predictor.alphabet_size())?;
    predictor.reset();
    let mut stepper = Stepper::new(predictor)?;
    let mut encoder = Encoder::new();
    let mut lengths = Vec::with_capacity(data.len());
    for (i, &symbol) in data.iter().enumerate() {
        let history = &data[..i];
        let pmf = stepper.pmf(predictor, history)?;
        lengths.push(pmf.code_length(symbol as usize));
        encoder.encode_symbol(pmf, symbol as usize);
        let context = stepper.context(history);
        predictor.update(context, symbol);
    }
    Ok((encoder.finish(), lengths))
}

pub fn encode_sequence(predictor: &mut dyn Predictor, data: &[u32]) -> Result<BitString> {
    encode_sequence_logged(predictor, data).map(|(bits, _)| bits)
}

/// Decodes `n` symbols. The predictor must be identical to the encoding one.
pub fn decode_sequence(
    predictor: &mut dyn Predictor,
    code: &BitString,
    n: usize,
) -> Result<Vec<u32>> {
    predictor.reset();
    let mut stepper = Stepper::new(predictor)?;
    let mut decoder = Decoder::new(code);
    let mut out: Vec<u32> = Vec::with_capacity(n);
    for _ in 0..n {
        let pmf = stepper.pmf(predictor, &out)?;
        let symbol = decoder.decode_symbol(pmf) as u32;
        decoder.check()?;
        let context = stepper.context(&out);
        predictor.update(context, symbol);
        out.push(symbol);
    }
    Ok(out)
}

/// Widens bytes to the symbol type used by predictors.
pub fn bytes_to_symbols(bytes: &[u8]) -> Vec<u32> {
    bytes.iter().map(|&b| u32::from(b)).collect()
}

/// Narrows symbols back to bytes; fails on symbols above 255.
pub fn symbols_to_bytes(symbols: &[u32]) -> Result<Vec<u8>> {
    symbols
        .iter()
        .map(|&s| u8::try_from(s).map_err(|_| Error::corrupt(format!("symbol {s} is not a byte"))))
        .collect()
}
