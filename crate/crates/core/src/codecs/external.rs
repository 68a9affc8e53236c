//! Codecs provided by external programs that filter stdin to stdout.
//!
//! A codec `id` is declared by two environment variables holding
//! whitespace-separated command lines:
//!
//! ```text
//! LMZC_CODEC_<ID>_COMPRESS="zstd -19 -c"
//! LMZC_CODEC_<ID>_DECOMPRESS="zstd -d -c"
//! ```
//!
//! `<ID>` is the id upper-cased with `-` replaced by `_`.

use std::io::{Read, Write};
use std::process::{Command, Stdio};

use super::{adapter_error, Codec, Mode};
use crate::error::Result;

#[derive(Clone, Debug)]
pub struct ExternalCodec {
    id: String,
    compress: Vec<String>,
    decompress: Vec<String>,
}

fn env_key(id: &str, role: &str) -> String {
    format!("LMZC_CODEC_{}_{role}", id.to_uppercase().replace('-', "_"))
}

fn split(command: &str) -> Vec<String> {
    command.split_whitespace().map(str::to_string).collect()
}

impl ExternalCodec {
    pub fn new(id: &str, compress: &str, decompress: &str) -> Result<Self> {
        let (compress, decompress) = (split(compress), split(decompress));
        if compress.is_empty() || decompress.is_empty() {
            return Err(adapter_error(id, "empty command line"));
        }
        Ok(ExternalCodec {
            id: id.to_string(),
            compress,
            decompress,
        })
    }

    pub fn from_env(id: &str) -> Result<Self> {
        let read = |role: &str| {
            let key = env_key(id, role);
            std::env::var(&key).map_err(|_| adapter_error(id, format!("not built in and {key} is not set")))
        };
        Self::new(id, &read("COMPRESS")?, &read("DECOMPRESS")?)
    }

    fn run(&self, argv: &[String], input: &[u8]) -> Result<Vec<u8>> {
        let mut child = Command::new(&argv[0])
            .args(&argv[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| adapter_error(&self.id, format!("{}: {e}", argv[0])))?;
        let mut stdin = child.stdin.take().expect("piped stdin");
        let mut stdout = child.stdout.take().expect("piped stdout");
        // Feed stdin from a second thread so a full stdout pipe cannot deadlock.
        let output = std::thread::scope(|scope| {
            let writer = scope.spawn(move || stdin.write_all(input));
            let mut out = Vec::new();
            let read = stdout.read_to_end(&mut out);
            let wrote = writer.join().expect("writer thread");
            read.and(wrote).map(|_| out)
        });
        let status = child.wait()?;
        let output = output.map_err(|e| adapter_error(&self.id, e))?;
        if !status.success() {
            return Err(adapter_error(&self.id, format!("{} exited with {status}", argv[0])));
        }
        Ok(output)
    }
}

impl Codec for ExternalCodec {
    fn id(&self) -> &str {
        &self.id
    }

    fn compress(&self, data: &[u8], _mode: Mode) -> Result<Vec<u8>> {
        self.run(&self.compress, data)
    }

    fn decompress(&self, data: &[u8], _mode: Mode) -> Result<Vec<u8>> {
        self.run(&self.decompress, data)
    }
}
