//! Reference server for bridge protocol v1.
//!
//! Its model is an order-`k` backoff predictor fitted to each request's
//! context alone, so answers depend on nothing but the request.

use std::io::{BufRead, Write};

use super::{decode_context, Message, MAX_CONTEXT, PROTOCOL_VERSION};
use crate::error::{Error, Result};
use crate::predictors::{ContextBackoff, Predictor};

#[derive(Clone, Copy, Debug)]
pub struct ReferenceConfig {
    /// Reported in the handshake; the model itself has no parameters.
    pub param_count: u64,
    pub max_order: usize,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        ReferenceConfig {
            param_count: 0,
            max_order: 2,
        }
    }
}

/// Top-k `(symbol, log2 p)` of the reference model, most probable first,
/// ties towards the lower symbol.
pub fn reference_prediction(context: &[u8], alphabet_size: usize, top_k: usize, max_order: usize) -> Result<Vec<(u32, f64)>> {
    if context.len() > MAX_CONTEXT {
        return Err(Error::Protocol(format!("context of {} bytes", context.len())));
    }
    let mut model = ContextBackoff::new(alphabet_size, max_order);
    let symbols: Vec<u32> = context.iter().map(|&b| u32::from(b)).collect();
    if let Some(&s) = symbols.iter().find(|&&s| s as usize >= alphabet_size) {
        return Err(Error::Protocol(format!("context byte {s} outside alphabet {alphabet_size}")));
    }
    for i in 0..symbols.len() {
        model.update(&symbols[..i], symbols[i]);
    }
    let mut probabilities = vec![0.0; alphabet_size];
    model.predict(&symbols, &mut probabilities)?;
    let mut ranked: Vec<(u32, f64)> = probabilities
        .iter()
        .enumerate()
        .map(|(s, &p)| (s as u32, p))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(top_k.max(1));
    for entry in &mut ranked {
        entry.1 = entry.1.log2();
    }
    Ok(ranked)
}

/// Serves one session until end of input. Malformed requests get an error
/// line and end the session with an error.
pub fn serve(input: impl BufRead, mut output: impl Write, config: ReferenceConfig) -> Result<()> {
    let mut alphabet = None;
    let mut expected_id = 1u64;
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let reply = match (Message::from_line(&line), alphabet) {
            (Ok(Message::Hello { protocol, alphabet_size, .. }), None)
                if protocol == PROTOCOL_VERSION && (2..=256).contains(&alphabet_size) =>
            {
                alphabet = Some(alphabet_size);
                Ok(Message::Ready {
                    protocol: PROTOCOL_VERSION,
                    alphabet_size,
                    param_count: config.param_count,
                })
            }
            (Ok(Message::Predict { id, context, alphabet_size, top_k }), Some(served)) => {
                if id != expected_id {
                    Err(Error::Protocol(format!("expected request id {expected_id}, got {id}")))
                } else if alphabet_size != served {
                    Err(Error::Protocol(format!("alphabet {alphabet_size} after handshake for {served}")))
                } else {
                    expected_id += 1;
                    decode_context(&context)
                        .and_then(|ctx| reference_prediction(&ctx, served, top_k, config.max_order))
                        .map(|entries| Message::Prediction { id, entries })
                }
            }
            (Ok(other), _) => Err(Error::Protocol(format!("unexpected message {other:?}"))),
            (Err(e), _) => Err(e),
        };
        match reply {
            Ok(message) => {
                writeln!(output, "{}", message.to_line())?;
                output.flush()?;
            }
            Err(e) => {
                writeln!(output, "{}", Message::Error { message: e.to_string() }.to_line())?;
                output.flush()?;
                return Err(e);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bridge::{complete_distribution, encode_context};

    fn run(lines: &[Message]) -> (Result<()>, Vec<Message>) {
        let input: String = lines.iter().map(|m| m.to_line() + "\n").collect();
        let mut output = Vec::new();
        let result = serve(input.as_bytes(), &mut output, ReferenceConfig { param_count: 42, max_order: 2 });
        let replies = String::from_utf8(output)
            .unwrap()
            .lines()
            .map(|l| Message::from_line(l).unwrap())
            .collect();
        (result, replies)
    }

    fn hello() -> Message {
        Message::Hello {
            protocol: 1,
            alphabet_size: 128,
            top_k: 5,
        }
    }

    fn predict(id: u64, context: &[u8]) -> Message {
        Message::Predict {
            id,
            context: encode_context(context),
            alphabet_size: 128,
            top_k: 5,
        }
    }

    #[test]
    fn handshake_and_predictions() {
        let (result, replies) = run(&[hello(), predict(1, b"abababa"), predict(2, b"abababa")]);
        result.unwrap();
        assert_eq!(
            replies[0],
            Message::Ready {
                protocol: 1,
                alphabet_size: 128,
                param_count: 42
            }
        );
        let Message::Prediction { id, entries } = &replies[1] else {
            panic!("{:?}", replies[1])
        };
        assert_eq!(*id, 1);
        assert_eq!(entries.len(), 5);
        assert_eq!(entries[0].0, u32::from(b'b'));
        let Message::Prediction { entries: again, .. } = &replies[2] else {
            panic!()
        };
        assert_eq!(entries, again);
        let mut out = vec![0.0; 128];
        complete_distribution(entries, 128, &mut out).unwrap();
    }

    #[test]
    fn rejects_out_of_order_ids_and_bytes() {
        let (result, replies) = run(&[hello(), predict(2, b"x")]);
        assert!(result.is_err());
        assert!(matches!(replies.last(), Some(Message::Error { .. })));
        let (result, _) = run(&[hello(), predict(1, &[200])]);
        assert!(result.is_err());
        let (result, _) = run(&[predict(1, b"x")]);
        assert!(result.is_err());
    }
}
