//! `lmzc`: lossless compression driven by sequence predictors, plus the
//! rate-evaluation harness.
//!
//! Exit codes: 0 success, 2 bad arguments, 3 predictor or codec
//! unavailable, 4 I/O, 5 corrupt stream, 6 unknown container version.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lmzc::Error;

#[derive(Parser)]
#[command(name = "lmzc", version, about = "Compress with sequence predictors and measure compression rates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Code a file into an LMZC container and print its raw rate.
    Compress(commands::CompressArgs),
    /// Restore the original bytes of a container.
    Decompress(commands::DecompressArgs),
    /// Rate table (CSV) for compressors over datasets.
    Eval(commands::EvalArgs),
    /// Sample a continuation of a byte prompt.
    Generate(commands::GenerateArgs),
    /// Complete the right half of every row of a grayscale image.
    GenerateImage(commands::GenerateImageArgs),
    /// Continue the first 1024 samples of an audio chunk.
    GenerateAudio(commands::GenerateAudioArgs),
    /// Adjusted rate of backoff orders across datasets of growing size.
    Sweep(commands::SweepArgs),
    /// Mean rate by position inside a chunk.
    Curve(commands::CurveArgs),
    /// Train context statistics and store them as an artifact.
    TrainTrie(commands::TrainTrieArgs),
    /// Learn a byte-pair vocabulary.
    TrainBpe(commands::TrainBpeArgs),
    /// Rate of backoff models over BPE tokens, per vocab size.
    Tokenize(commands::TokenizeArgs),
    /// Write a dataset and its manifest.
    Fixture(commands::FixtureArgs),
}

const EXIT_BAD_ARGUMENTS: u8 = 2;
const EXIT_UNAVAILABLE: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_CORRUPT: u8 = 5;
const EXIT_UNKNOWN_VERSION: u8 = 6;

fn exit_code(error: &Error) -> u8 {
    match error {
        Error::PredictorUnavailable(_) | Error::AdapterUnavailable { .. } | Error::Protocol(_) => EXIT_UNAVAILABLE,
        Error::Io(_) => EXIT_IO,
        Error::CorruptStream(_) | Error::PredictorMismatch(_) => EXIT_CORRUPT,
        Error::UnknownVersion(_) => EXIT_UNKNOWN_VERSION,
        Error::InvalidDistribution(_)
        | Error::Precision { .. }
        | Error::InvalidSpec(_)
        | Error::InvalidArgument(_)
        | Error::InsufficientData(_) => EXIT_BAD_ARGUMENTS,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compress(args) => commands::compress(args),
        Command::Decompress(args) => commands::decompress(args),
        Command::Eval(args) => commands::eval(args),
        Command::Generate(args) => commands::generate(args),
        Command::GenerateImage(args) => commands::generate_image(args),
        Command::GenerateAudio(args) => commands::generate_audio(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Curve(args) => commands::curve(args),
        Command::TrainTrie(args) => commands::train_trie(args),
        Command::TrainBpe(args) => commands::train_bpe(args),
        Command::Tokenize(args) => commands::tokenize(args),
        Command::Fixture(args) => commands::fixture(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lmzc: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// `path` with `suffix` appended to its file name.
fn with_suffix(path: &std::path::Path, suffix: &str) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}
