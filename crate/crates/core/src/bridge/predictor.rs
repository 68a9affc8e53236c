use std::time::Duration;

use super::{complete_distribution, Session, DEFAULT_TOP_K, MAX_CONTEXT};
use crate::error::{Error, Result};
use crate::predictors::{ModelFootprint, Predictor, PredictorSpec};

/// An external process used as a predictor through bridge protocol v1.
pub struct BridgePredictor {
    spec: PredictorSpec,
    session: Session,
    buffer: Vec<u8>,
}

impl BridgePredictor {
    pub fn from_spec(spec: &PredictorSpec) -> Result<Self> {
        let command = spec.require("cmd")?;
        let top_k: usize = spec.parsed_or("top_k", DEFAULT_TOP_K)?;
        let timeout: f64 = spec.parsed_or("timeout", 30.0)?;
        if top_k == 0 {
            return Err(Error::InvalidSpec("top_k must be at least 1".into()));
        }
        if !(timeout.is_finite() && timeout > 0.0) {
            return Err(Error::InvalidSpec(format!("bad timeout {timeout}")));
        }
        let top_k = top_k.min(spec.alphabet_size);
        let session = Session::spawn(command, spec.alphabet_size, top_k, Duration::from_secs_f64(timeout))?;
        let spec = spec.clone().without(crate::predictors::SEVEN_BIT_KEY);
        Ok(BridgePredictor {
            spec,
            session,
            buffer: Vec::new(),
        })
    }

    pub fn session(&self) -> &Session {
        &self.session
    }
}

impl Predictor for BridgePredictor {
    fn spec(&self) -> PredictorSpec {
        self.spec.clone()
    }

    fn alphabet_size(&self) -> usize {
        self.session.alphabet_size()
    }

    fn window(&self) -> usize {
        MAX_CONTEXT
    }

    fn predict(&mut self, context: &[u32], out: &mut [f64]) -> Result<()> {
        self.buffer.clear();
        for &s in context {
            let byte = u8::try_from(s).map_err(|_| Error::invalid(format!("symbol {s} is not a byte")))?;
            self.buffer.push(byte);
        }
        let entries = self.session.predict(&self.buffer)?;
        complete_distribution(&entries, self.session.alphabet_size(), out)
    }

    fn update(&mut self, _context: &[u32], _symbol: u32) {}

    fn reset(&mut self) {}

    fn footprint(&self) -> ModelFootprint {
        ModelFootprint::from_params(self.session.param_count())
    }
}
