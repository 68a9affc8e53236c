use super::{check_output, ModelFootprint, Predictor, PredictorSpec};
use crate::error::{Error, Result};

/// Order-0 add-alpha estimator `(c_y + alpha) / (n + alpha * |X|)`.
///
/// `alpha = 1` is Laplace, `alpha = 0.5` is Krichevsky-Trofimov. Counts are
/// learned in-context and cleared by `reset`.
#[derive(Clone, Debug)]
pub struct AdaptiveFreq {
    alpha: f64,
    counts: Vec<u64>,
    total: u64,
}

impl AdaptiveFreq {
    pub fn new(alphabet_size: usize, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidSpec(format!("alpha must be positive, got {alpha}")));
        }
        Ok(AdaptiveFreq {
            alpha,
            counts: vec![0; alphabet_size],
            total: 0,
        })
    }

    pub fn laplace(alphabet_size: usize) -> Self {
        Self::new(alphabet_size, 1.0).expect("valid alpha")
    }

    pub fn from_spec(spec: &PredictorSpec) -> Result<Self> {
        Self::new(spec.alphabet_size, spec.parsed_or("alpha", 1.0)?)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn count(&self, symbol: u32) -> u64 {
        self.counts[symbol as usize]
    }

    /// Probability of `symbol` under the current counts.
    pub fn probability(&self, symbol: u32) -> f64 {
        let denominator = self.total as f64 + self.alpha * self.counts.len() as f64;
        (self.counts[symbol as usize] as f64 + self.alpha) / denominator
    }
}

impl Predictor for AdaptiveFreq {
    fn spec(&self) -> PredictorSpec {
        PredictorSpec::adaptive(self.alpha).with_alphabet(self.counts.len())
    }

    fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    fn predict(&mut self, _context: &[u32], out: &mut [f64]) -> Result<()> {
        check_output(out, self.counts.len())?;
        let denominator = self.total as f64 + self.alpha * self.counts.len() as f64;
        for (o, &c) in out.iter_mut().zip(&self.counts) {
            *o = (c as f64 + self.alpha) / denominator;
        }
        Ok(())
    }

    fn update(&mut self, _context: &[u32], symbol: u32) {
        self.counts[symbol as usize] += 1;
        self.total += 1;
    }

    fn reset(&mut self) {
        self.counts.fill(0);
        self.total = 0;
    }

    /// Nothing persists across chunks.
    fn footprint(&self) -> ModelFootprint {
        ModelFootprint::NONE
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplace_after_two_observations() {
        let mut p = AdaptiveFreq::laplace(256);
        p.update(&[], 97);
        p.update(&[97], 97);
        let mut out = vec![0.0; 256];
        p.predict(&[97, 97], &mut out).unwrap();
        assert_eq!(out[97], 3.0 / 258.0);
        assert_eq!(out[98], 1.0 / 258.0);
    }

    #[test]
    fn update_raises_the_observed_symbol() {
        let mut p = AdaptiveFreq::new(256, 0.5).unwrap();
        let mut before = vec![0.0; 256];
        p.predict(&[], &mut before).unwrap();
        p.update(&[], 42);
        let mut after = vec![0.0; 256];
        p.predict(&[42], &mut after).unwrap();
        assert!(after[42] > before[42]);
        p.reset();
        p.predict(&[], &mut after).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn rejects_bad_alpha() {
        assert!(AdaptiveFreq::new(256, 0.0).is_err());
        assert!(AdaptiveFreq::new(256, f64::NAN).is_err());
    }

    #[test]
    fn spec_round_trips() {
        let p = AdaptiveFreq::new(128, 0.5).unwrap();
        assert_eq!(p.spec().to_string(), "adaptive_freq:alpha=0.5,alphabet=128");
    }
}
