//! Bridge protocol v1: external predictors over line-delimited JSON.
//!
//! The client spawns the predictor process and talks to it over its
//! standard input and output, one JSON object per line, strictly
//! alternating request and response.
//!
//! ```text
//! > {"type":"hello","protocol":1,"alphabet_size":128,"top_k":100}
//! < {"type":"ready","protocol":1,"alphabet_size":128,"param_count":200000}
//! > {"type":"predict","id":1,"context":"aGVsbG8=","alphabet_size":128,"top_k":100}
//! < {"type":"prediction","id":1,"entries":[[32,-1.25],[101,-2.5]]}
//! ```
//!
//! `context` is base64 (standard alphabet, padded) of at most 2048 bytes,
//! each below `alphabet_size`. Request ids start at 1 and increase by one.
//! `entries` holds at most `top_k` distinct `[symbol, log2 probability]`
//! pairs with finite, non-positive log-probabilities. A server that cannot
//! answer replies `{"type":"error","message":...}` and exits non-zero.
//!
//! Responses must be a pure function of the request: the decoder replays
//! the same requests and needs the same answers.

mod predictor;
pub mod reference;
mod session;

use base64::Engine;
use serde::{Deserialize, Serialize};

pub use predictor::BridgePredictor;
pub use session::{replay_transcript, Session, TranscriptMismatch};

use crate::error::{Error, Result};

pub const PROTOCOL_VERSION: u32 = 1;
pub const MAX_CONTEXT: usize = 2048;
pub const DEFAULT_TOP_K: usize = 100;

/// Mass given to every symbol outside the reported top k.
pub const FLOOR: f64 = 1.0 / 65536.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Message {
    Hello {
        protocol: u32,
        alphabet_size: usize,
        top_k: usize,
    },
    Ready {
        protocol: u32,
        alphabet_size: usize,
        param_count: u64,
    },
    Predict {
        id: u64,
        context: String,
        alphabet_size: usize,
        top_k: usize,
    },
    Prediction {
        id: u64,
        entries: Vec<(u32, f64)>,
    },
    Error {
        message: String,
    },
}

impl Message {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("messages always serialize")
    }

    pub fn from_line(line: &str) -> Result<Self> {
        serde_json::from_str(line.trim_end()).map_err(|e| Error::Protocol(format!("malformed line: {e}")))
    }
}

pub fn encode_context(context: &[u8]) -> String {
    base64::engine::general_purpose::STANDARD.encode(context)
}

pub fn decode_context(text: &str) -> Result<Vec<u8>> {
    base64::engine::general_purpose::STANDARD
        .decode(text)
        .map_err(|e| Error::Protocol(format!("bad base64 context: {e}")))
}

/// Checks a response's entries against the protocol invariants.
pub fn validate_entries(entries: &[(u32, f64)], alphabet_size: usize, top_k: usize) -> Result<()> {
    if entries.is_empty() {
        return Err(Error::Protocol("empty prediction".into()));
    }
    if entries.len() > top_k {
        return Err(Error::Protocol(format!("{} entries for top_k {top_k}", entries.len())));
    }
    let mut seen = vec![false; alphabet_size];
    for &(symbol, log2p) in entries {
        let slot = seen
            .get_mut(symbol as usize)
            .ok_or_else(|| Error::Protocol(format!("symbol {symbol} outside alphabet {alphabet_size}")))?;
        if std::mem::replace(slot, true) {
            return Err(Error::Protocol(format!("duplicate symbol {symbol}")));
        }
        if !log2p.is_finite() || log2p > 0.0 {
            return Err(Error::Protocol(format!("bad log-probability {log2p} for symbol {symbol}")));
        }
    }
    Ok(())
}

/// Full distribution from top-k log2-probabilities: the reported symbols
/// share `1 - (alphabet_size - k) * 2^-16` in proportion to their
/// probabilities, every other symbol gets `2^-16`.
pub fn complete_distribution(entries: &[(u32, f64)], alphabet_size: usize, out: &mut [f64]) -> Result<()> {
    validate_entries(entries, alphabet_size, alphabet_size)?;
    if out.len() != alphabet_size {
        return Err(Error::invalid("output length differs from alphabet size"));
    }
    let rest = alphabet_size - entries.len();
    let reported = 1.0 - rest as f64 * FLOOR;
    if reported <= 0.0 {
        return Err(Error::Protocol(format!(
            "{} entries leave no mass for the top k of alphabet {alphabet_size}",
            entries.len()
        )));
    }
    out.fill(FLOOR);
    // Shift by the largest log-probability so tiny masses do not underflow.
    let top = entries.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = entries.iter().map(|e| (e.1 - top).exp2()).sum();
    for &(symbol, log2p) in entries {
        out[symbol as usize] = reported * (log2p - top).exp2() / total;
    }
    Ok(())
}
