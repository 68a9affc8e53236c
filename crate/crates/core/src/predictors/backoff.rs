//! Order-k backoff with PPM method C escapes, no exclusions:
//!
//! ```text
//! P_k(y | s) = c_{s,y} / (n_s + d_s) + d_s / (n_s + d_s) * P_{k-1}(y | s')
//! P_{-1}(y)  = 1 / |X|
//! ```
//!
//! where `s'` drops the oldest symbol of `s`. A context that never occurred
//! (`n_s = 0`) passes `P_{k-1}` through unchanged.

use std::sync::Arc;

use super::trie::ContextStats;
use super::{check_output, ModelFootprint, Predictor, PredictorSpec};
use crate::artifacts::content_hash;
use crate::error::{Error, Result};

/// `P_k(symbol | context)` for a single set of statistics.
pub fn backoff_probability(stats: &ContextStats, context: &[u32], symbol: u32, order: usize) -> f64 {
    let mut p = 1.0 / stats.alphabet_size() as f64;
    for k in 0..=order.min(context.len()) {
        match stats.context_counts(context, k, symbol) {
            Some((n, d, c)) if n > 0 => {
                let denominator = f64::from(n) + f64::from(d);
                p = (f64::from(c) + f64::from(d) * p) / denominator;
            }
            Some(_) => {}
            None => break,
        }
    }
    p
}

/// `P_k(symbol | context)` for every `k` in `0..=max_order` from one walk
/// down the statistics; orders beyond the available context repeat the
/// deepest value.
pub fn backoff_probabilities_by_order(
    stats: &ContextStats,
    context: &[u32],
    symbol: u32,
    max_order: usize,
    path: &mut Vec<u32>,
    out: &mut Vec<f64>,
) {
    out.clear();
    stats.path(context, max_order, path);
    let mut p = 1.0 / stats.alphabet_size() as f64;
    for k in 0..=max_order {
        if let Some(&index) = path.get(k) {
            let node = stats.node(index);
            if node.total > 0 {
                let denominator = f64::from(node.total) + f64::from(node.distinct());
                p = (f64::from(node.count(symbol)) + f64::from(node.distinct()) * p) / denominator;
            }
        }
        out.push(p);
    }
}

/// Backoff predictor over a frozen trained base (optional) plus counts
/// learned in-context since the last reset (when `adapt`).
///
/// Where both exist, counts of the same context are summed.
#[derive(Clone, Debug)]
pub struct ContextBackoff {
    alphabet_size: usize,
    max_order: usize,
    adapt: bool,
    base: Option<(Arc<ContextStats>, String)>,
    live: ContextStats,
    footprint: ModelFootprint,
    base_path: Vec<u32>,
    live_path: Vec<u32>,
}

impl ContextBackoff {
    /// Untrained model that learns only in-context.
    pub fn new(alphabet_size: usize, max_order: usize) -> Self {
        ContextBackoff {
            alphabet_size,
            max_order,
            adapt: true,
            base: None,
            live: ContextStats::new(alphabet_size, max_order),
            footprint: ModelFootprint::NONE,
            base_path: Vec::new(),
            live_path: Vec::new(),
        }
    }

    /// Model over trained statistics, used up to `max_order`.
    pub fn trained(base: Arc<ContextStats>, max_order: usize, adapt: bool) -> Self {
        let hash = content_hash(&base.to_bytes());
        Self::with_base(base, hash, max_order, adapt)
    }

    fn with_base(base: Arc<ContextStats>, hash: String, max_order: usize, adapt: bool) -> Self {
        let alphabet_size = base.alphabet_size();
        let order = max_order.min(base.max_order());
        let footprint = ModelFootprint {
            serialized_bytes: base.serialized_lengths()[order],
            param_count: 0,
        };
        ContextBackoff {
            alphabet_size,
            max_order,
            adapt,
            base: Some((base, hash)),
            live: ContextStats::new(alphabet_size, max_order),
            footprint,
            base_path: Vec::new(),
            live_path: Vec::new(),
        }
    }

    pub fn from_spec(spec: &PredictorSpec, base: Option<Arc<ContextStats>>) -> Result<Self> {
        let max_order: usize = spec.parsed_or("max_order", 3)?;
        let adapt: bool = spec.parsed_or("adapt", true)?;
        let mut model = match (spec.get("trie"), base) {
            (Some(hash), Some(base)) => {
                if base.alphabet_size() != spec.alphabet_size {
                    return Err(Error::PredictorMismatch(format!(
                        "trie {hash} has alphabet {}, spec says {}",
                        base.alphabet_size(),
                        spec.alphabet_size
                    )));
                }
                Self::with_base(base, hash.to_string(), max_order, adapt)
            }
            (None, None) => Self::new(spec.alphabet_size, max_order),
            (Some(hash), None) => {
                return Err(Error::unavailable(format!("trained statistics {hash} not supplied")));
            }
            (None, Some(_)) => {
                return Err(Error::invalid("trained statistics given but spec names no trie"));
            }
        };
        model.adapt = adapt;
        Ok(model)
    }

    pub fn base(&self) -> Option<&Arc<ContextStats>> {
        self.base.as_ref().map(|(b, _)| b)
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }
}

impl Predictor for ContextBackoff {
    fn spec(&self) -> PredictorSpec {
        let spec = PredictorSpec::backoff(self.max_order)
            .with("adapt", self.adapt)
            .with_alphabet(self.alphabet_size);
        match &self.base {
            Some((_, hash)) => spec.with("trie", hash),
            None => spec,
        }
    }

    fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    fn predict(&mut self, context: &[u32], out: &mut [f64]) -> Result<()> {
        check_output(out, self.alphabet_size)?;
        match &self.base {
            Some((base, _)) => base.path(context, self.max_order, &mut self.base_path),
            None => self.base_path.clear(),
        }
        if self.adapt {
            self.live.path(context, self.max_order, &mut self.live_path);
        } else {
            self.live_path.clear();
        }
        let base = self.base.as_ref().map(|(b, _)| b.as_ref());
        let levels = self.base_path.len().max(self.live_path.len());

        // out = scale * raw; scaling is deferred so each level only touches
        // the symbols it has counts for.
        out.fill(1.0 / self.alphabet_size as f64);
        let mut scale = 1.0f64;
        for k in 0..levels {
            let b = base.zip(self.base_path.get(k)).map(|(s, &i)| s.node(i));
            let l = self.live_path.get(k).map(|&i| self.live.node(i));
            let mut n = 0u64;
            let mut d = 0u64;
            if let Some(b) = b {
                n += u64::from(b.total);
                d += u64::from(b.distinct());
            }
            if let Some(l) = l {
                n += u64::from(l.total);
                d += l
                    .entries
                    .iter()
                    .filter(|e| b.is_none_or(|b| b.count(e.0) == 0))
                    .count() as u64;
            }
            if n == 0 {
                continue;
            }
            let denominator = (n + d) as f64;
            scale *= d as f64 / denominator;
            let weight = 1.0 / (denominator * scale);
            for node in b.into_iter().chain(l) {
                for &(y, c) in &node.entries {
                    out[y as usize] += f64::from(c) * weight;
                }
            }
        }
        if scale != 1.0 {
            for o in out.iter_mut() {
                *o *= scale;
            }
        }
        Ok(())
    }

    fn update(&mut self, context: &[u32], symbol: u32) {
        if self.adapt {
            self.live.update(context, symbol);
        }
    }

    fn reset(&mut self) {
        self.live.clear();
    }

    fn footprint(&self) -> ModelFootprint {
        self.footprint
    }
}
