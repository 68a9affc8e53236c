use std::io::Write;

use super::{adjusted_rate, csv_error};
use crate::coder::bytes_to_symbols;
use crate::datapipe::CHUNK_SIZE;
use crate::error::{Error, Result};
use crate::predictors::{backoff_probabilities_by_order, ContextStats};

#[derive(Clone, Debug, PartialEq)]
pub struct SweepCell {
    pub dataset: String,
    pub raw_bytes: u64,
    pub order: usize,
    /// Trie dump truncated to `order`.
    pub model_bytes: u64,
    pub raw_rate: f64,
    pub adjusted_rate: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepTable {
    pub cells: Vec<SweepCell>,
}

impl SweepTable {
    pub fn datasets(&self) -> Vec<&str> {
        let mut names: Vec<&str> = Vec::new();
        for c in &self.cells {
            if !names.contains(&c.dataset.as_str()) {
                names.push(&c.dataset);
            }
        }
        names
    }

    pub fn row(&self, dataset: &str) -> Vec<&SweepCell> {
        self.cells.iter().filter(|c| c.dataset == dataset).collect()
    }

    /// Cell with the lowest adjusted rate; the smaller model on ties.
    pub fn argmin(&self, dataset: &str) -> Option<&SweepCell> {
        self.row(dataset).into_iter().min_by(|a, b| {
            a.adjusted_rate
                .total_cmp(&b.adjusted_rate)
                .then(a.model_bytes.cmp(&b.model_bytes))
        })
    }

    /// Datasets whose raw rate rises somewhere along increasing order.
    pub fn raw_rate_violations(&self) -> Vec<(&str, usize)> {
        let mut out = Vec::new();
        for name in self.datasets() {
            let row = self.row(name);
            for w in row.windows(2) {
                if w[1].raw_rate > w[0].raw_rate {
                    out.push((name, w[1].order));
                }
            }
        }
        out
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer
            .write_record([
                "dataset",
                "raw_bytes",
                "order",
                "model_bytes",
                "raw_rate",
                "adjusted_rate",
                "argmin",
            ])
            .map_err(csv_error)?;
        for c in &self.cells {
            let best = self.argmin(&c.dataset).is_some_and(|b| b.order == c.order);
            writer
                .write_record([
                    c.dataset.clone(),
                    c.raw_bytes.to_string(),
                    c.order.to_string(),
                    c.model_bytes.to_string(),
                    format!("{:.4}", c.raw_rate),
                    format!("{:.4}", c.adjusted_rate),
                    best.to_string(),
                ])
                .map_err(csv_error)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// For each dataset, trains a byte trie of the largest order on its
/// chunks, then charges each order `k` its in-sample code length
/// `-sum log2 P_k` plus the trie dump truncated to `k`. Contexts never
/// cross chunk boundaries.
pub fn scaling_sweep(datasets: &[(&str, &[u8])], orders: &[usize]) -> Result<SweepTable> {
    if orders.is_empty() || orders.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("sweep orders must be non-empty and increasing"));
    }
    let max_order = *orders.last().expect("non-empty");
    let mut table = SweepTable::default();
    for &(name, bytes) in datasets {
        if bytes.is_empty() {
            return Err(Error::InsufficientData(format!("dataset {name} is empty")));
        }
        let mut stats = ContextStats::new(256, max_order);
        for chunk in bytes.chunks(CHUNK_SIZE) {
            stats.train(&bytes_to_symbols(chunk));
        }
        let lengths = stats.serialized_lengths();
        let mut bits = vec![0.0f64; max_order + 1];
        let mut path = Vec::new();
        let mut probabilities = Vec::new();
        for chunk in bytes.chunks(CHUNK_SIZE) {
            let symbols = bytes_to_symbols(chunk);
            for i in 0..symbols.len() {
                let context = &symbols[i.saturating_sub(max_order)..i];
                backoff_probabilities_by_order(&stats, context, symbols[i], max_order, &mut path, &mut probabilities);
                for (total, p) in bits.iter_mut().zip(&probabilities) {
                    *total -= p.log2();
                }
            }
        }
        drop(stats);
        let raw_bytes = bytes.len() as u64;
        for &order in orders {
            let raw_rate = 100.0 * bits[order] / (8.0 * raw_bytes as f64);
            table.cells.push(SweepCell {
                dataset: name.to_string(),
                raw_bytes,
                order,
                model_bytes: lengths[order],
                raw_rate,
                adjusted_rate: adjusted_rate(raw_rate, lengths[order], raw_bytes),
            });
        }
    }
    Ok(table)
}
