use super::{check_output, fill_uniform, ModelFootprint, Predictor, PredictorSpec};
use crate::error::Result;

/// Every symbol equally likely, regardless of context.
#[derive(Clone, Debug)]
pub struct Uniform {
    alphabet_size: usize,
}

impl Uniform {
    pub fn new(alphabet_size: usize) -> Self {
        Uniform { alphabet_size }
    }
}

impl Predictor for Uniform {
    fn spec(&self) -> PredictorSpec {
        PredictorSpec::uniform().with_alphabet(self.alphabet_size)
    }

    fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    fn predict(&mut self, _context: &[u32], out: &mut [f64]) -> Result<()> {
        check_output(out, self.alphabet_size)?;
        fill_uniform(out);
        Ok(())
    }

    fn update(&mut self, _context: &[u32], _symbol: u32) {}

    fn reset(&mut self) {}

    fn footprint(&self) -> ModelFootprint {
        ModelFootprint::NONE
    }
}
