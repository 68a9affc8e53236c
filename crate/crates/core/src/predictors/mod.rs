//! Sequence predictors: the conditional distributions that drive the coder.

mod adaptive;
mod backoff;
mod inverted;
mod spec;
mod trie;
mod uniform;

use std::sync::Arc;

pub use adaptive::AdaptiveFreq;
pub use backoff::{backoff_probabilities_by_order, backoff_probability, ContextBackoff};
pub use inverted::{invert_codec, CodeLength, CodecCodeLength, CodecInverted, PredictorCodeLength};
pub use spec::{PredictorKind, PredictorSpec, DEFAULT_ALPHABET, SEVEN_BIT_KEY};
pub use trie::ContextStats;
pub use uniform::Uniform;

use crate::artifacts::ArtifactStore;
use crate::bridge::BridgePredictor;
use crate::codecs;
use crate::error::{Error, Result};

/// Context window, in symbols, seen by `predict`.
pub const DEFAULT_WINDOW: usize = 2048;

/// Size of a predictor's persistent state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ModelFootprint {
    pub serialized_bytes: u64,
    pub param_count: u64,
}

impl ModelFootprint {
    pub const NONE: ModelFootprint = ModelFootprint {
        serialized_bytes: 0,
        param_count: 0,
    };

    /// Two bytes per parameter.
    pub fn from_params(param_count: u64) -> Self {
        ModelFootprint {
            serialized_bytes: 2 * param_count,
            param_count,
        }
    }
}

/// A conditional model `rho(next | context)` over `0..alphabet_size`.
///
/// `predict` must be a deterministic function of the spec, the frozen
/// training state, the updates since the last `reset`, and `context`:
/// decoding replays exactly the same calls.
pub trait Predictor: Send {
    fn spec(&self) -> PredictorSpec;

    fn alphabet_size(&self) -> usize;

    /// Longest context the predictor is shown.
    fn window(&self) -> usize {
        DEFAULT_WINDOW
    }

    /// Writes the distribution of the next symbol into `out`
    /// (`out.len() == alphabet_size`). Entries are positive and sum to 1.
    fn predict(&mut self, context: &[u32], out: &mut [f64]) -> Result<()>;

    /// Observes that `symbol` followed `context`.
    fn update(&mut self, context: &[u32], symbol: u32);

    /// Forgets everything learned through `update`.
    fn reset(&mut self);

    fn footprint(&self) -> ModelFootprint;
}

impl<P: Predictor + ?Sized> Predictor for Box<P> {
    fn spec(&self) -> PredictorSpec {
        (**self).spec()
    }
    fn alphabet_size(&self) -> usize {
        (**self).alphabet_size()
    }
    fn window(&self) -> usize {
        (**self).window()
    }
    fn predict(&mut self, context: &[u32], out: &mut [f64]) -> Result<()> {
        (**self).predict(context, out)
    }
    fn update(&mut self, context: &[u32], symbol: u32) {
        (**self).update(context, symbol)
    }
    fn reset(&mut self) {
        (**self).reset()
    }
    fn footprint(&self) -> ModelFootprint {
        (**self).footprint()
    }
}

/// Instantiates the predictor named by `spec`. Trained state referenced by
/// the spec (`trie=<sha256>`) is loaded from `artifacts`.
pub fn build_predictor(
    spec: &PredictorSpec,
    artifacts: Option<&ArtifactStore>,
) -> Result<Box<dyn Predictor>> {
    spec.validate()?;
    let predictor: Box<dyn Predictor> = match spec.kind {
        PredictorKind::Uniform => Box::new(Uniform::new(spec.alphabet_size)),
        PredictorKind::AdaptiveFreq => Box::new(AdaptiveFreq::from_spec(spec)?),
        PredictorKind::ContextBackoff => {
            let base = match spec.get("trie") {
                None => None,
                Some(hash) => {
                    let store = artifacts.ok_or_else(|| {
                        Error::unavailable(format!("trie {hash} needs an artifact directory"))
                    })?;
                    let stats = ContextStats::from_bytes(&store.load(hash)?)?;
                    Some(Arc::new(stats))
                }
            };
            Box::new(ContextBackoff::from_spec(spec, base)?)
        }
        PredictorKind::CodecInverted => {
            let codec = codecs::codec_by_id(spec.require("codec")?)?;
            Box::new(CodecInverted::new(CodecCodeLength::new(codec)))
        }
        PredictorKind::Bridge => Box::new(BridgePredictor::from_spec(spec)?),
    };
    // Spec parameters outside the model's own (e.g. seven_bit) are not
    // reflected back, so compare only the model-defining fields.
    let built = predictor.spec();
    if built.kind != spec.kind || built.alphabet_size != spec.alphabet_size {
        return Err(Error::PredictorMismatch(format!("asked for {spec}, built {built}")));
    }
    Ok(predictor)
}

/// Fills `out` with the uniform distribution.
pub(crate) fn fill_uniform(out: &mut [f64]) {
    let p = 1.0 / out.len() as f64;
    out.fill(p);
}

pub(crate) fn check_output(out: &[f64], alphabet: usize) -> Result<()> {
    if out.len() != alphabet {
        return Err(Error::invalid(format!(
            "output buffer holds {} entries, alphabet has {alphabet}",
            out.len()
        )));
    }
    Ok(())
}
