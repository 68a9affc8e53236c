use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::time::Duration;

use super::{encode_context, validate_entries, Message, MAX_CONTEXT, PROTOCOL_VERSION};
use crate::error::{Error, Result};

/// A child process with line-oriented stdin/stdout and a read timeout.
struct Pipe {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    timeout: Duration,
    command: String,
}

impl Pipe {
    fn spawn(command: &str, timeout: Duration) -> Result<Self> {
        let argv: Vec<&str> = command.split_whitespace().collect();
        let (program, args) = argv
            .split_first()
            .ok_or_else(|| Error::InvalidSpec("empty bridge command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::unavailable(format!("cannot start `{command}`: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, lines) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let failed = line.is_err();
                if tx.send(line).is_err() || failed {
                    break;
                }
            }
        });
        Ok(Pipe {
            child,
            stdin,
            lines,
            timeout,
            command: command.to_string(),
        })
    }

    fn send(&mut self, line: &str) -> Result<()> {
        let sent = self
            .stdin
            .write_all(line.as_bytes())
            .and_then(|_| self.stdin.write_all(b"\n"))
            .and_then(|_| self.stdin.flush());
        sent.map_err(|e| Error::unavailable(format!("`{}` stopped reading: {e}", self.command)))
    }

    fn receive(&mut self) -> Result<String> {
        match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => Err(Error::unavailable(format!("reading from `{}`: {e}", self.command))),
            Err(RecvTimeoutError::Timeout) => Err(Error::unavailable(format!(
                "`{}` did not answer within {:?}",
                self.command, self.timeout
            ))),
            Err(RecvTimeoutError::Disconnected) => {
                let status = self.child.try_wait().ok().flatten();
                Err(Error::unavailable(format!(
                    "`{}` closed its output (exit status {status:?})",
                    self.command
                )))
            }
        }
    }
}

impl Drop for Pipe {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// One connection to an external predictor, past the handshake.
pub struct Session {
    pipe: Pipe,
    alphabet_size: usize,
    top_k: usize,
    param_count: u64,
    next_id: u64,
}

impl Session {
    pub fn spawn(command: &str, alphabet_size: usize, top_k: usize, timeout: Duration) -> Result<Self> {
        let mut pipe = Pipe::spawn(command, timeout)?;
        pipe.send(
            &Message::Hello {
                protocol: PROTOCOL_VERSION,
                alphabet_size,
                top_k,
            }
            .to_line(),
        )?;
        let reply = Message::from_line(&pipe.receive()?).map_err(unavailable)?;
        let param_count = match reply {
            Message::Ready {
                protocol,
                alphabet_size: served,
                param_count,
            } => {
                if protocol != PROTOCOL_VERSION {
                    return Err(Error::PredictorMismatch(format!("server speaks protocol {protocol}")));
                }
                if served != alphabet_size {
                    return Err(Error::PredictorMismatch(format!(
                        "server predicts over {served} symbols, expected {alphabet_size}"
                    )));
                }
                param_count
            }
            Message::Error { message } => return Err(Error::unavailable(message)),
            other => return Err(Error::unavailable(format!("expected ready, got {other:?}"))),
        };
        Ok(Session {
            pipe,
            alphabet_size,
            top_k,
            param_count,
            next_id: 1,
        })
    }

    pub fn param_count(&self) -> u64 {
        self.param_count
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn top_k(&self) -> usize {
        self.top_k
    }

    /// Top-k `(symbol, log2 p)` for the symbol after `context`.
    pub fn predict(&mut self, context: &[u8]) -> Result<Vec<(u32, f64)>> {
        if context.len() > MAX_CONTEXT {
            return Err(Error::invalid(format!("context of {} bytes exceeds {MAX_CONTEXT}", context.len())));
        }
        let id = self.next_id;
        self.next_id += 1;
        self.pipe.send(
            &Message::Predict {
                id,
                context: encode_context(context),
                alphabet_size: self.alphabet_size,
                top_k: self.top_k,
            }
            .to_line(),
        )?;
        match Message::from_line(&self.pipe.receive()?).map_err(unavailable)? {
            Message::Prediction { id: got, entries } => {
                if got != id {
                    return Err(Error::Protocol(format!("response id {got} for request {id}")));
                }
                validate_entries(&entries, self.alphabet_size, self.top_k)?;
                Ok(entries)
            }
            Message::Error { message } => Err(Error::unavailable(message)),
            other => Err(Error::Protocol(format!("expected prediction, got {other:?}"))),
        }
    }
}

fn unavailable(e: Error) -> Error {
    Error::unavailable(e.to_string())
}

/// A transcript line whose reply differed from the recorded one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranscriptMismatch {
    pub line: usize,
    pub expected: String,
    pub actual: String,
}

/// Replays a recorded session against `command`.
///
/// Transcript lines start with `> ` (sent to the server verbatim) or `< `
/// (the exact line the server must answer with); other lines are ignored.
pub fn replay_transcript(command: &str, transcript: &str, timeout: Duration) -> Result<Vec<TranscriptMismatch>> {
    let mut pipe = Pipe::spawn(command, timeout)?;
    let mut mismatches = Vec::new();
    for (index, line) in transcript.lines().enumerate() {
        if let Some(request) = line.strip_prefix("> ") {
            pipe.send(request)?;
        } else if let Some(expected) = line.strip_prefix("< ") {
            let actual = pipe.receive()?;
            if actual != expected {
                mismatches.push(TranscriptMismatch {
                    line: index + 1,
                    expected: expected.to_string(),
                    actual,
                });
            }
        }
    }
    Ok(mismatches)
}
