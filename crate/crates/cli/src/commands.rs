use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use lmzc::artifacts::ArtifactStore;
use lmzc::codecs::{CodecAdapter, Mode};
use lmzc::coder::bytes_to_symbols;
use lmzc::container::{self, Container};
use lmzc::datapipe::{
    fixtures, load_dataset, load_gray_image, load_wav, reduce_audio, to_seven_bit, Dataset, DatasetSource,
    CHUNK_SIZE,
};
use lmzc::eval::{
    curve_to_csv, evaluate_codec, evaluate_predictor, in_context_curve, line_plot_svg, raw_rate, scaling_sweep,
    write_csv, RateReport, Series,
};
use lmzc::generate::{
    audio_continuation, generate_bytes, rowwise_image_continuation, GenerationMetadata, SamplerConfig, SamplingMode,
};
use lmzc::predictors::{build_predictor, ContextStats, Predictor, PredictorSpec, SEVEN_BIT_KEY};
use lmzc::tokenize::{self, tokenized_rate};
use lmzc::{Error, Result};
use serde_json::json;

use crate::with_suffix;

const DEFAULT_COMPRESSORS: &str = "gzip;lzma2;png;flac;backoff";

#[derive(Args)]
pub struct CompressArgs {
    input: PathBuf,
    /// Predictor spec, e.g. `backoff:order=3` or `uniform:alphabet=128`.
    #[arg(long, short, default_value = "backoff")]
    model: String,
    /// Defaults to the input path plus `.lmzc`.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// 7-bit transform for 128-symbol predictors: `msb` or `lsb`.
    #[arg(long)]
    seven_bit: Option<String>,
    /// Artifact directory; defaults to the container's directory.
    #[arg(long)]
    artifacts: Option<PathBuf>,
}

#[derive(Args)]
pub struct DecompressArgs {
    input: PathBuf,
    /// Defaults to the input path without `.lmzc`, or plus `.out`.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Artifact directory; defaults to the container's directory.
    #[arg(long)]
    artifacts: Option<PathBuf>,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Dataset sources separated by `;` (e.g. `text:10M;random:1M;images:dir`).
    #[arg(long, default_value = "text")]
    datasets: String,
    /// Codec ids and predictor specs separated by `;`. Empty gives a
    /// header-only table.
    #[arg(long, default_value = DEFAULT_COMPRESSORS)]
    compressors: String,
    /// Code every 2048-byte chunk independently (the default).
    #[arg(long)]
    chunked: bool,
    /// Code each dataset as one stream.
    #[arg(long)]
    whole: bool,
    /// CSV path; standard output when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    artifacts: Option<PathBuf>,
}

#[derive(Args)]
pub struct SamplerArgs {
    /// `argmax` or `categorical`.
    #[arg(long, default_value = "argmax")]
    sampler: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Categorical draws restricted to the k most probable symbols.
    #[arg(long)]
    top_k: Option<usize>,
}

impl SamplerArgs {
    fn config(&self) -> Result<SamplerConfig> {
        let mode: SamplingMode = self.sampler.parse()?;
        log::info!("sampler {mode:?} seed {}", self.seed);
        Ok(SamplerConfig {
            mode,
            seed: self.seed,
            top_k: self.top_k,
        })
    }
}

#[derive(Args)]
pub struct GenerateArgs {
    #[arg(long, short, default_value = "backoff")]
    model: String,
    /// File whose bytes are the prompt.
    #[arg(long, conflicts_with = "prompt")]
    context: Option<PathBuf>,
    #[arg(long)]
    prompt: Option<String>,
    /// Bytes to generate.
    #[arg(long, default_value_t = 256)]
    length: usize,
    #[command(flatten)]
    sampler: SamplerArgs,
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long)]
    artifacts: Option<PathBuf>,
}

#[derive(Args)]
pub struct GenerateImageArgs {
    #[arg(long, short, default_value = "backoff")]
    model: String,
    /// Image file; a synthetic image when absent.
    #[arg(long)]
    image: Option<PathBuf>,
    #[arg(long, default_value_t = 32)]
    height: usize,
    #[arg(long, default_value_t = 64)]
    width: usize,
    /// Seed of the synthetic image.
    #[arg(long, default_value_t = fixtures::DEFAULT_SEED)]
    fixture_seed: u64,
    #[command(flatten)]
    sampler: SamplerArgs,
    /// PNG output.
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long)]
    artifacts: Option<PathBuf>,
}

#[derive(Args)]
pub struct GenerateAudioArgs {
    #[arg(long, short, default_value = "backoff")]
    model: String,
    /// PCM16 WAV file; a synthetic chunk when absent.
    #[arg(long)]
    wav: Option<PathBuf>,
    #[arg(long, default_value_t = fixtures::DEFAULT_SEED)]
    fixture_seed: u64,
    #[command(flatten)]
    sampler: SamplerArgs,
    /// WAV output (16 kHz, 16-bit, reduced samples widened back).
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long)]
    artifacts: Option<PathBuf>,
}

#[derive(Args)]
pub struct SweepArgs {
    /// Text dataset sources separated by `;`, any order.
    #[arg(long, default_value = "text:1M;text:10M;text:100M")]
    datasets: String,
    /// Backoff orders: `0-5` or `0;2;4`.
    #[arg(long, default_value = "0-5")]
    orders: String,
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// SVG of adjusted rate against model bytes.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args)]
pub struct CurveArgs {
    #[arg(long, short, default_value = "backoff")]
    model: String,
    #[arg(long, default_value = "text")]
    dataset: String,
    /// Chunks averaged.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    plot: Option<PathBuf>,
    #[arg(long)]
    artifacts: Option<PathBuf>,
}

#[derive(Args)]
pub struct TrainTrieArgs {
    /// Training dataset source (`file:text:corpus.txt`, `text:10M`, ...).
    #[arg(long, default_value = "text")]
    dataset: String,
    #[arg(long, default_value_t = 3)]
    order: usize,
    /// 256, or 128 for the 7-bit transformed bytes.
    #[arg(long, default_value_t = 256)]
    alphabet: usize,
    #[arg(long, default_value = "artifacts")]
    artifacts: PathBuf,
}

#[derive(Args)]
pub struct TrainBpeArgs {
    #[arg(long, default_value = "text:1M")]
    dataset: String,
    #[arg(long, default_value_t = 1024)]
    vocab: usize,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
pub struct TokenizeArgs {
    /// Text source; the last `--held-out` bytes are held out.
    #[arg(long, default_value = "text:2M")]
    dataset: String,
    #[arg(long, default_value = "128K")]
    held_out: String,
    #[arg(long, default_value = "256;1024;2048;5120;10240;20480")]
    vocabs: String,
    #[arg(long, default_value = "0-2")]
    orders: String,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct FixtureArgs {
    /// Dataset source, e.g. `text:10M` or `audio:1M:seed=7`.
    source: String,
    #[arg(long, short)]
    out: PathBuf,
}

fn io_context(path: &Path, e: io::Error) -> Error {
    Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn read_file(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    fs::read(path.as_ref()).map_err(|e| io_context(path.as_ref(), e))
}

fn write_file(path: impl AsRef<Path>, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path.as_ref(), bytes).map_err(|e| io_context(path.as_ref(), e))
}

fn split_list(text: &str) -> Vec<&str> {
    text.split(';').map(str::trim).filter(|s| !s.is_empty()).collect()
}

/// `a-b` (inclusive) or a `;`/`,` separated list.
fn parse_numbers(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidArgument(format!("bad number list `{text}`"));
    if let Some((a, b)) = text.split_once('-') {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        return if a <= b { Ok((a..=b).collect()) } else { Err(bad()) };
    }
    text.split([';', ','])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| bad()))
        .collect()
}

fn open_store(dir: Option<&Path>) -> Result<Option<ArtifactStore>> {
    dir.map(ArtifactStore::open).transpose()
}

fn open_predictor(model: &str, artifacts: Option<&Path>) -> Result<Box<dyn Predictor>> {
    let spec: PredictorSpec = model.parse()?;
    let store = match spec.get("trie") {
        Some(_) => open_store(Some(artifacts.unwrap_or(Path::new("."))))?,
        None => None,
    };
    build_predictor(&spec, store.as_ref())
}

fn load(source: &str) -> Result<Dataset> {
    let dataset = load_dataset(&DatasetSource::parse(source)?)?;
    log::info!(
        "dataset {} ({} bytes, seed {:?})",
        dataset.name(),
        dataset.bytes.len(),
        dataset.manifest.seed
    );
    Ok(dataset)
}

/// Writes `<path>.meta.json`: the command line plus `extra`.
fn write_metadata(path: &Path, mut extra: serde_json::Value) -> Result<()> {
    let argv: Vec<String> = std::env::args().collect();
    if let Some(map) = extra.as_object_mut() {
        map.insert("argv".into(), json!(argv));
        map.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    }
    let text = serde_json::to_string_pretty(&extra).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    write_file(with_suffix(path, ".meta.json"), text + "\n")?;
    Ok(())
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(path) => write_file(path, bytes)?,
        None => io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

pub fn compress(args: CompressArgs) -> Result<()> {
    let mut spec: PredictorSpec = args.model.parse()?;
    if let Some(variant) = &args.seven_bit {
        spec = spec.with(SEVEN_BIT_KEY, variant);
    }
    let data = read_file(&args.input)?;
    let out = args.out.unwrap_or_else(|| with_suffix(&args.input, ".lmzc"));
    let store = ArtifactStore::open(args.artifacts.unwrap_or_else(|| parent_dir(&out)))?;
    let packed = container::compress(&data, &spec, Some(&store))?;
    let bytes = packed.container.to_bytes();
    write_file(&out, &bytes)?;
    log::info!("{} -> {} ({} container bytes)", args.input.display(), out.display(), bytes.len());
    if data.is_empty() {
        println!("raw_rate: N/A");
    } else {
        let rate = raw_rate(packed.container.compressed_bytes(), packed.lost_bits, data.len() as u64);
        println!("raw_rate: {rate:.4}");
    }
    Ok(())
}

pub fn decompress(args: DecompressArgs) -> Result<()> {
    let bytes = read_file(&args.input)?;
    let parsed = Container::from_bytes(&bytes)?;
    let store = ArtifactStore::open(args.artifacts.unwrap_or_else(|| parent_dir(&args.input)))?;
    let data = container::decompress(&parsed, Some(&store))?;
    let out = args.out.unwrap_or_else(|| match args.input.extension() {
        Some(ext) if ext == "lmzc" => args.input.with_extension(""),
        _ => with_suffix(&args.input, ".out"),
    });
    write_file(out, data)?;
    Ok(())
}

enum Compressor {
    Codec(String),
    Predictor(PredictorSpec),
}

impl Compressor {
    /// Predictor specs carry parameters or name a predictor kind; anything
    /// else is a codec id.
    fn parse(text: &str) -> Result<Self> {
        match text.parse::<PredictorSpec>() {
            Ok(spec) => Ok(Compressor::Predictor(spec)),
            Err(e) if text.contains([':', '=']) => Err(e),
            Err(_) => Ok(Compressor::Codec(text.to_string())),
        }
    }
}

fn is_unavailable(e: &Error) -> bool {
    matches!(e, Error::AdapterUnavailable { .. } | Error::PredictorUnavailable(_))
}

pub fn eval(args: EvalArgs) -> Result<()> {
    let compressors = split_list(&args.compressors)
        .into_iter()
        .map(Compressor::parse)
        .collect::<Result<Vec<_>>>()?;
    let datasets = split_list(&args.datasets)
        .into_iter()
        .map(load)
        .collect::<Result<Vec<_>>>()?;
    let mut modes = Vec::new();
    if args.chunked || !args.whole {
        modes.push(Mode::Chunked);
    }
    if args.whole {
        modes.push(Mode::Whole);
    }
    let store = open_store(args.artifacts.as_deref())?;
    let adapters: Vec<Option<Result<CodecAdapter>>> = compressors
        .iter()
        .map(|c| match c {
            Compressor::Codec(id) => Some(CodecAdapter::open(id)),
            Compressor::Predictor(_) => None,
        })
        .collect();
    let mut reports = Vec::new();
    for &mode in &modes {
        for dataset in &datasets {
            let raw = dataset.bytes.len() as u64;
            for (compressor, adapter) in compressors.iter().zip(&adapters) {
                let report = match (compressor, adapter) {
                    (Compressor::Codec(id), Some(Err(e))) => {
                        log::warn!("{e}");
                        RateReport::unavailable(mode, id, dataset.name(), raw)
                    }
                    (_, Some(Ok(adapter))) => evaluate_codec(adapter, dataset, mode)?,
                    (Compressor::Predictor(spec), _) => match build_predictor(spec, store.as_ref())
                        .and_then(|mut p| evaluate_predictor(p.as_mut(), dataset, mode))
                    {
                        Ok(report) => report,
                        Err(e) if is_unavailable(&e) => {
                            log::warn!("{e}");
                            RateReport::unavailable(mode, &spec.canonical(), dataset.name(), raw)
                        }
                        Err(e) => return Err(e),
                    },
                    (Compressor::Codec(_), None) => unreachable!("codecs always get an adapter slot"),
                };
                reports.push(report);
            }
        }
    }
    let mut csv = Vec::new();
    write_csv(&reports, &mut csv)?;
    write_output(args.out.as_deref(), &csv)?;
    if let Some(out) = &args.out {
        let manifests: Vec<_> = datasets.iter().map(|d| json!(d.manifest)).collect();
        write_metadata(out, json!({ "command": "eval", "datasets": manifests }))?;
    }
    Ok(())
}

fn generation_metadata(
    predictor: &dyn Predictor,
    sampler: SamplerConfig,
    context_bytes: usize,
    generated_bytes: usize,
) -> GenerationMetadata {
    GenerationMetadata {
        predictor: predictor.spec().canonical(),
        sampler,
        context_bytes,
        generated_bytes,
        height: None,
        width: None,
    }
}

fn write_generation_metadata(out: &Path, metadata: &GenerationMetadata) -> Result<()> {
    let value = serde_json::to_value(metadata).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    write_metadata(out, value)
}

pub fn generate(args: GenerateArgs) -> Result<()> {
    let config = args.sampler.config()?;
    let context = match (&args.context, &args.prompt) {
        (Some(path), _) => read_file(path)?,
        (None, Some(text)) => text.as_bytes().to_vec(),
        (None, None) => Vec::new(),
    };
    let mut predictor = open_predictor(&args.model, args.artifacts.as_deref())?;
    let generated = generate_bytes(predictor.as_mut(), &context, args.length, config)?;
    write_file(&args.out, &generated)?;
    let metadata = generation_metadata(predictor.as_ref(), config, context.len(), generated.len());
    write_generation_metadata(&args.out, &metadata)
}

fn image_error(e: image::ImageError) -> Error {
    Error::Io(io::Error::other(e))
}

pub fn generate_image(args: GenerateImageArgs) -> Result<()> {
    let config = args.sampler.config()?;
    let (pixels, height, width) = match &args.image {
        Some(path) => load_gray_image(path)?,
        None => {
            log::info!("synthetic image seed {}", args.fixture_seed);
            (fixtures::make_image(args.height, args.width, args.fixture_seed), args.height, args.width)
        }
    };
    let mut predictor = open_predictor(&args.model, args.artifacts.as_deref())?;
    let completed = rowwise_image_continuation(predictor.as_mut(), &pixels, height, width, config)?;
    let context = height * (width / 2);
    image::GrayImage::from_raw(width as u32, height as u32, completed)
        .expect("continuation keeps the image size")
        .save_with_format(&args.out, image::ImageFormat::Png)
        .map_err(image_error)?;
    let mut metadata = generation_metadata(predictor.as_ref(), config, context, pixels.len() - context);
    metadata.height = Some(height);
    metadata.width = Some(width);
    write_generation_metadata(&args.out, &metadata)
}

pub fn generate_audio(args: GenerateAudioArgs) -> Result<()> {
    let config = args.sampler.config()?;
    let chunk = match &args.wav {
        Some(path) => {
            let mut reduced = reduce_audio(&load_wav(path)?);
            reduced.truncate(CHUNK_SIZE);
            reduced
        }
        None => {
            log::info!("synthetic audio seed {}", args.fixture_seed);
            fixtures::make_audio_fixture(CHUNK_SIZE, args.fixture_seed)
        }
    };
    let mut predictor = open_predictor(&args.model, args.artifacts.as_deref())?;
    let samples = audio_continuation(predictor.as_mut(), &chunk, config)?;
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: fixtures::AUDIO_RATE as u32,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let wav_error = |e: hound::Error| Error::Io(io::Error::other(e));
    let mut writer = hound::WavWriter::create(&args.out, spec).map_err(wav_error)?;
    for &b in &samples {
        writer.write_sample((i16::from(b) - 128) << 8).map_err(wav_error)?;
    }
    writer.finalize().map_err(wav_error)?;
    let metadata = generation_metadata(
        predictor.as_ref(),
        config,
        lmzc::generate::AUDIO_CONTEXT,
        samples.len() - lmzc::generate::AUDIO_CONTEXT,
    );
    write_generation_metadata(&args.out, &metadata)
}

pub fn sweep(args: SweepArgs) -> Result<()> {
    let orders = parse_numbers(&args.orders)?;
    let mut datasets = split_list(&args.datasets)
        .into_iter()
        .map(load)
        .collect::<Result<Vec<_>>>()?;
    datasets.sort_by_key(|d| d.bytes.len());
    let named: Vec<(&str, &[u8])> = datasets.iter().map(|d| (d.name(), d.bytes.as_slice())).collect();
    let table = scaling_sweep(&named, &orders)?;
    let mut csv = Vec::new();
    table.write_csv(&mut csv)?;
    match &args.out {
        Some(path) => write_file(path, &csv)?,
        None => io::stdout().lock().write_all(&csv)?,
    }
    let mut argmins = Vec::new();
    for name in table.datasets() {
        let best = table.argmin(name).expect("every dataset has cells");
        eprintln!(
            "argmin {name}: order {} model_bytes {} adjusted_rate {:.4}",
            best.order, best.model_bytes, best.adjusted_rate
        );
        argmins.push(json!({ "dataset": name, "order": best.order, "model_bytes": best.model_bytes }));
    }
    if let Some(plot) = &args.plot {
        let series: Vec<Series> = table
            .datasets()
            .into_iter()
            .map(|name| Series {
                name: name.to_string(),
                points: table
                    .row(name)
                    .iter()
                    .map(|c| (c.model_bytes as f64, c.adjusted_rate))
                    .collect(),
            })
            .collect();
        let svg = line_plot_svg("Adjusted rate by model size", "model bytes", "adjusted rate (%)", &series, true, false);
        write_file(plot, svg)?;
    }
    if let Some(out) = &args.out {
        write_metadata(out, json!({ "command": "sweep", "orders": orders, "argmin": argmins }))?;
    }
    Ok(())
}

pub fn curve(args: CurveArgs) -> Result<()> {
    let dataset = load(&args.dataset)?;
    let mut predictor = open_predictor(&args.model, args.artifacts.as_deref())?;
    let curve = in_context_curve(predictor.as_mut(), &dataset.bytes, dataset.modality(), args.samples)?;
    let mut csv = Vec::new();
    curve_to_csv(&curve, &mut csv)?;
    write_output(args.out.as_deref(), &csv)?;
    if let Some(plot) = &args.plot {
        let series = [Series {
            name: predictor.spec().canonical(),
            points: curve.points.iter().map(|p| (p.position as f64, p.mean_rate)).collect(),
        }];
        let svg = line_plot_svg("Rate by position in chunk", "position", "mean rate (%)", &series, true, false);
        write_file(plot, svg)?;
    }
    if let Some(out) = &args.out {
        write_metadata(
            out,
            json!({
                "command": "curve",
                "predictor": predictor.spec().canonical(),
                "dataset": dataset.manifest,
                "sequences": curve.sequences,
            }),
        )?;
    }
    Ok(())
}

pub fn train_trie(args: TrainTrieArgs) -> Result<()> {
    let dataset = load(&args.dataset)?;
    let mut stats = ContextStats::new(args.alphabet, args.order);
    for chunk in dataset.bytes.chunks(CHUNK_SIZE) {
        let symbols = match args.alphabet {
            256 => bytes_to_symbols(chunk),
            128 => bytes_to_symbols(&to_seven_bit(chunk, dataset.modality().seven_bit_variant()).symbols),
            other => return Err(Error::InvalidArgument(format!("alphabet {other} is neither 256 nor 128"))),
        };
        stats.train(&symbols);
    }
    let store = ArtifactStore::open(&args.artifacts)?;
    let bytes = stats.to_bytes();
    let hash = store.store(&bytes)?;
    log::info!("trie {hash}: {} nodes, {} bytes", stats.node_count(), bytes.len());
    let spec = PredictorSpec::backoff(args.order)
        .with_alphabet(args.alphabet)
        .with("trie", &hash);
    println!("{}", spec.canonical());
    Ok(())
}

pub fn train_bpe(args: TrainBpeArgs) -> Result<()> {
    let dataset = load(&args.dataset)?;
    let vocab = tokenize::train_bpe(&dataset.bytes, args.vocab)?;
    if vocab.vocab_size() < args.vocab {
        log::warn!("corpus supports only {} tokens", vocab.vocab_size());
    }
    write_file(&args.out, vocab.to_text())?;
    println!("vocab_size: {}", vocab.vocab_size());
    Ok(())
}

pub fn tokenize(args: TokenizeArgs) -> Result<()> {
    let dataset = load(&args.dataset)?;
    let held = lmzc::datapipe::parse_size(&args.held_out)?;
    if held == 0 || held >= dataset.bytes.len() {
        return Err(Error::InvalidArgument(format!(
            "held-out size {held} must be positive and below the dataset's {} bytes",
            dataset.bytes.len()
        )));
    }
    let (train, held_out) = dataset.bytes.split_at(dataset.bytes.len() - held);
    let rows = tokenized_rate(train, held_out, &parse_numbers(&args.vocabs)?, &parse_numbers(&args.orders)?)?;
    let mut csv = String::from("vocab_size,max_order,tokens_per_chunk,raw_rate,model_bytes\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{:.4},{:.4},{}\n",
            r.vocab_size, r.max_order, r.tokens_per_chunk, r.raw_rate, r.model_bytes
        ));
    }
    write_output(args.out.as_deref(), csv.as_bytes())
}

pub fn fixture(args: FixtureArgs) -> Result<()> {
    let dataset = load(&args.source)?;
    write_file(&args.out, &dataset.bytes)?;
    write_file(with_suffix(&args.out, ".toml"), dataset.manifest.to_toml())?;
    Ok(())
}
