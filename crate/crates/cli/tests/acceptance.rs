//! Acceptance suite: one `PASS`/`FAIL` line per criterion.
//!
//! A criterion that cannot be met on this machine prints `FAIL` with the
//! reason and `(known gap)`; the process exits non-zero only when some other
//! criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use lmzc::codecs::{CodecAdapter, Mode, BUILTIN};
use lmzc::coder::{
    bytes_to_symbols, decode_sequence, encode_sequence, encode_sequence_logged,
    exact::{dyadic_interval, dyadic_refine, ratio},
    exact_encode, symbols_to_bytes, ConditionalTable, RationalInterval,
};
use lmzc::datapipe::{fixtures, load_dataset, Dataset, DatasetSource, Modality, CHUNK_SIZE};
use lmzc::eval::{adjusted_rate, evaluate_codec, evaluate_predictor, in_context_curve, scaling_sweep};
use lmzc::predictors::{
    build_predictor, invert_codec, AdaptiveFreq, ContextBackoff, Predictor, PredictorCodeLength, PredictorSpec,
};
use lmzc::tokenize::{decode_tokens, encode_tokens, mean_tokens_per_chunk, tokenized_rate, train_bpe};

const FIXTURE_BYTES: usize = 10 << 20;
const SEED: u64 = 0x5eed;

enum Verdict {
    Pass,
    Fail,
    /// Not achievable on this machine; the reason is in the detail.
    KnownGap,
}

struct Outcome {
    verdict: Verdict,
    detail: String,
}

impl Outcome {
    fn check(ok: bool, detail: String) -> Self {
        let verdict = if ok { Verdict::Pass } else { Verdict::Fail };
        Outcome { verdict, detail }
    }
}

type Check<'a> = Box<dyn FnOnce() -> Result<Outcome, String> + 'a>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Small deterministic stream of pseudo-random words.
struct Draws {
    bytes: Vec<u8>,
    at: usize,
}

impl Draws {
    fn new(seed: u64, n: usize) -> Self {
        Draws { bytes: fixtures::make_random_fixture(8 * n, seed), at: 0 }
    }

    fn next(&mut self) -> u64 {
        let word = u64::from_le_bytes(self.bytes[self.at..self.at + 8].try_into().unwrap());
        self.at += 8;
        word
    }

    fn below(&mut self, n: usize) -> usize {
        (self.next() % n as u64) as usize
    }
}

fn exact_golden() -> Result<Outcome, String> {
    let start = Instant::now();
    let (a, i) = (0, 1);
    let model = ConditionalTable::new(3)
        .with_ratio_row(&[], &[(45, 100), (30, 100), (25, 100)])
        .and_then(|t| t.with_ratio_row(&[a], &[(20, 100), (60, 100), (20, 100)]))
        .map_err(err)?;
    let (steps, _) = exact_encode(&model, &[a, i]).map_err(err)?;
    let first = RationalInterval::new(ratio(0, 1), ratio(45, 100)).map_err(err)?;
    let second = RationalInterval::new(ratio(9, 100), ratio(36, 100)).map_err(err)?;
    let target = RationalInterval::new(ratio(322, 1000), ratio(341, 1000)).map_err(err)?;
    let code = dyadic_refine(&target);
    let bits: String = code.iter().map(|b| if b { '1' } else { '0' }).collect();
    let elapsed = start.elapsed();
    let ok = steps[0] == first
        && steps[1] == second
        && bits == "0101010"
        && target.covers(&dyadic_interval(&code))
        && elapsed < Duration::from_secs(1);
    Ok(Outcome::check(ok, format!("steps {:?} {:?}, [0.322,0.341) -> {bits}", steps[0], steps[1])))
}

fn round_trip(chunks: &[(&str, Vec<&[u8]>)], bridge_cmd: &str) -> Result<Outcome, String> {
    let fast = ["uniform", "adaptive_freq", "context_backoff"];
    let start = Instant::now();
    let mut count = 0usize;
    for spec in fast {
        let spec: PredictorSpec = spec.parse().map_err(err)?;
        let mut predictor = build_predictor(&spec, None).map_err(err)?;
        for (name, list) in chunks {
            for (k, chunk) in list.iter().enumerate() {
                let symbols = bytes_to_symbols(chunk);
                let code = encode_sequence(predictor.as_mut(), &symbols).map_err(err)?;
                let back = decode_sequence(predictor.as_mut(), &code, symbols.len()).map_err(err)?;
                if symbols_to_bytes(&back).map_err(err)? != *chunk {
                    return Ok(Outcome::check(false, format!("{spec} differs on {name} chunk {k}")));
                }
                count += 1;
            }
        }
    }
    let fast_time = start.elapsed();

    // The slow predictors see one chunk per fixture; codec_inverted only a
    // prefix of it.
    const INVERTED_PREFIX: usize = 256;
    let slow = [
        (PredictorSpec::bridge(bridge_cmd), CHUNK_SIZE),
        (PredictorSpec::codec_inverted("gzip"), INVERTED_PREFIX),
    ];
    let mut slow_times = Vec::new();
    for (spec, limit) in &slow {
        let slow_start = Instant::now();
        let mut predictor = build_predictor(spec, None).map_err(err)?;
        for (name, list) in chunks {
            let chunk = &list[0][..list[0].len().min(*limit)];
            let symbols = bytes_to_symbols(chunk);
            let code = encode_sequence(predictor.as_mut(), &symbols).map_err(err)?;
            let back = decode_sequence(predictor.as_mut(), &code, symbols.len()).map_err(err)?;
            if symbols_to_bytes(&back).map_err(err)? != chunk {
                return Ok(Outcome::check(false, format!("{} differs on {name}", spec.kind.name())));
            }
        }
        slow_times.push(slow_start.elapsed().as_secs_f64());
    }
    // Later positions have longer contexts and dearer candidates, so scaling
    // the prefix time up is a lower bound.
    let per_inverted_chunk = slow_times[1] / chunks.len() as f64 * (CHUNK_SIZE / INVERTED_PREFIX) as f64;
    let total_chunks: usize = chunks.iter().map(|(_, l)| l.len()).sum();
    Ok(Outcome {
        verdict: Verdict::KnownGap,
        detail: format!(
            "{count} chunk round trips lossless for {} in {:.0}s (limit 600s); bridge lossless on {n} full chunks \
             in {:.0}s; codec_inverted lossless on {n} prefixes of {INVERTED_PREFIX} bytes in {:.0}s, so all \
             {total_chunks} chunks would take at least {:.0} h",
            fast.join(", "),
            fast_time.as_secs_f64(),
            slow_times[0],
            slow_times[1],
            per_inverted_chunk * total_chunks as f64 / 3600.0,
            n = chunks.len(),
        ),
    })
}

fn code_length_bound(chunks: &[(&str, Vec<&[u8]>)]) -> Result<Outcome, String> {
    const SAMPLES: usize = 1000;
    let mut draws = Draws::new(SEED, 2 * SAMPLES);
    let mut predictors: Vec<Box<dyn Predictor>> = ["uniform", "adaptive_freq", "kt", "context_backoff"]
        .iter()
        .map(|s| build_predictor(&s.parse().map_err(err)?, None).map_err(err))
        .collect::<Result<_, _>>()?;
    let mut worst_slack = f64::INFINITY;
    for n in 0..SAMPLES {
        let (name, list) = &chunks[draws.below(chunks.len())];
        let k = draws.below(list.len());
        let predictor = &mut predictors[n % 4];
        let (code, lengths) = encode_sequence_logged(predictor.as_mut(), &bytes_to_symbols(list[k])).map_err(err)?;
        let bound = lengths.iter().sum::<f64>().ceil() + 2.0;
        let slack = bound - code.len() as f64;
        if slack < 0.0 {
            return Ok(Outcome::check(
                false,
                format!("{} on {name} chunk {k}: {} bits > bound {bound}", predictor.spec(), code.len()),
            ));
        }
        worst_slack = worst_slack.min(slack);
    }
    Ok(Outcome::check(true, format!("{SAMPLES} chunks, smallest slack {worst_slack} bits")))
}

fn random_baseline(random: &Dataset) -> Result<Outcome, String> {
    let mut ok = true;
    let mut parts = Vec::new();
    for spec in ["uniform", "adaptive_freq"] {
        let mut predictor = build_predictor(&spec.parse().map_err(err)?, None).map_err(err)?;
        let rate = evaluate_predictor(predictor.as_mut(), random, Mode::Whole).map_err(err)?.raw_rate().unwrap();
        ok &= (99.0..=101.0).contains(&rate);
        parts.push(format!("{spec} {rate:.3}"));
    }
    for id in BUILTIN {
        let adapter = CodecAdapter::open(id).map_err(err)?;
        let rate = evaluate_codec(&adapter, random, Mode::Whole).map_err(err)?.raw_rate().unwrap();
        let ceiling = if *id == "flac" { 110.0 } else { 101.0 };
        ok &= (99.0..=ceiling).contains(&rate);
        parts.push(format!("{id} {rate:.3}"));
    }
    Ok(Outcome::check(ok, format!("whole mode on {}: {}", random.name(), parts.join(", "))))
}

fn chunked_deflate(text: &Dataset) -> Result<Outcome, String> {
    let start = Instant::now();
    let adapter = CodecAdapter::open("gzip").map_err(err)?;
    let rate = evaluate_codec(&adapter, text, Mode::Chunked).map_err(err)?.raw_rate().unwrap();
    let elapsed = start.elapsed();
    let ok = (45.6..=50.6).contains(&rate) && elapsed < Duration::from_secs(15 * 60);
    Ok(Outcome::check(
        ok,
        format!("gzip chunked on {} ({}): {rate:.2} in [45.6, 50.6]", text.name(), text.manifest.source),
    ))
}

fn adjusted_identity(text: &Dataset) -> Result<Outcome, String> {
    let mut ok = true;
    // Measured reports: the difference is the model term up to float rounding.
    let mut worst = 0.0f64;
    for spec in ["context_backoff", "kt"] {
        let mut predictor = build_predictor(&spec.parse().map_err(err)?, None).map_err(err)?;
        let mut report = evaluate_predictor(predictor.as_mut(), text, Mode::Chunked).map_err(err)?;
        report.model_bytes = 123_457;
        let (raw, adjusted) = (report.raw_rate().unwrap(), report.adjusted_rate().unwrap());
        let term = 100.0 * report.model_bytes as f64 / report.raw_bytes as f64;
        let error = ((adjusted - raw) - term).abs();
        ok &= error <= 4.0 * f64::EPSILON * adjusted;
        worst = worst.max(error);
    }
    let chinchilla = adjusted_rate(8.3, 140_000_000_000, 1_000_000_000);
    ok &= (chinchilla - 14008.3).abs() < 1e-6;
    // A published raw 17.0 stands for anything in [16.95, 17.05).
    let transformer = adjusted_rate(17.0, 6_400_000, 1_000_000_000);
    let low = adjusted_rate(16.95, 6_400_000, 1_000_000_000);
    let high = adjusted_rate(17.05, 6_400_000, 1_000_000_000);
    ok &= low <= 17.7 + 0.05 && high >= 17.7 - 0.05;
    Ok(Outcome::check(
        ok,
        format!(
            "measured identity off by at most {worst:.1e}; 8.3 -> {chinchilla:.1} with 140 GB over 1 GB; \
             17.0 -> {transformer:.2} ({low:.2}..{high:.2}) with 6.4 MB over 1 GB"
        ),
    ))
}

fn inversion_oracle() -> Result<Outcome, String> {
    const CONTEXTS: usize = 100;
    let mut draws = Draws::new(SEED + 1, 2 * CONTEXTS);
    let source = fixtures::make_text_fixture(1 << 20, SEED);
    let mut lengths = PredictorCodeLength::new(AdaptiveFreq::laplace(256));
    let mut inverted = vec![0.0; 256];
    let mut direct = vec![0.0; 256];
    let mut worst = 0.0f64;
    for n in 0..CONTEXTS {
        let len = draws.below(512);
        let context: Vec<u8> = if n % 2 == 0 {
            fixtures::make_random_fixture(len, SEED + n as u64)
        } else {
            let at = draws.below(source.len() - len);
            source[at..at + len].to_vec()
        };
        invert_codec(&mut lengths, &context, &mut inverted).map_err(err)?;
        let mut model = AdaptiveFreq::laplace(256);
        let symbols = bytes_to_symbols(&context);
        for (i, &s) in symbols.iter().enumerate() {
            model.update(&symbols[..i], s);
        }
        model.predict(&symbols, &mut direct).map_err(err)?;
        for (a, b) in inverted.iter().zip(&direct) {
            worst = worst.max((a - b).abs());
        }
    }
    let unit = 1.0 / 65536.0;
    Ok(Outcome::check(worst <= unit, format!("{CONTEXTS} contexts, largest error {:.3e} (unit {unit:.3e})", worst)))
}

fn in_context(text: &Dataset) -> Result<Outcome, String> {
    let mut predictor = ContextBackoff::new(256, 3);
    let curve = in_context_curve(&mut predictor, &text.bytes, Modality::Text, 100).map_err(err)?;
    let (early, late) = (curve.rate_at(256).unwrap(), curve.rate_at(2048).unwrap());
    Ok(Outcome::check(
        late < early,
        format!("context_backoff order 3 over 100 chunks of {}: {early:.2} at 256, {late:.2} at 2048", text.name()),
    ))
}

fn scaling(text: &Dataset) -> Result<Outcome, String> {
    let start = Instant::now();
    let sizes = [1usize << 20, 10 << 20, 100 << 20];
    let names = ["1M", "10M", "100M"];
    let data: Vec<(&str, &[u8])> = names.iter().zip(sizes).map(|(n, s)| (*n, &text.bytes[..s])).collect();
    let table = scaling_sweep(&data, &[0, 1, 2, 3, 4, 5]).map_err(err)?;
    let argmins: Vec<_> = names.iter().map(|n| table.argmin(n).unwrap()).collect();
    let growing = argmins.windows(2).all(|w| w[0].model_bytes <= w[1].model_bytes);
    let small_not_largest = argmins[0].order != 5;
    let elapsed = start.elapsed();
    let summary: Vec<String> = argmins
        .iter()
        .map(|c| format!("{}: order {} ({} model bytes, {:.2})", c.dataset, c.order, c.model_bytes, c.adjusted_rate))
        .collect();
    Ok(Outcome::check(
        growing && small_not_largest && elapsed < Duration::from_secs(30 * 60),
        format!("argmin {} in {:.0}s", summary.join("; "), elapsed.as_secs_f64()),
    ))
}

fn bpe_suite(text: &Dataset) -> Result<Outcome, String> {
    const STRINGS: usize = 10_000;
    let sizes = [256usize, 1024, 2048, 5120, 10240, 20480];
    let (train, rest) = text.bytes.split_at(1 << 20);
    let held_out = &rest[..64 * CHUNK_SIZE];
    let vocab = train_bpe(train, 20480).map_err(err)?;

    let mut draws = Draws::new(SEED + 2, 3 * STRINGS);
    for n in 0..STRINGS {
        let len = draws.below(300);
        let s = if n % 2 == 0 {
            fixtures::make_random_fixture(len, SEED + n as u64)
        } else {
            let at = draws.below(train.len() - len);
            train[at..at + len].to_vec()
        };
        let size = sizes[draws.below(sizes.len())];
        let truncated = vocab.truncated(size);
        let back = decode_tokens(&truncated, &encode_tokens(&truncated, &s)).map_err(err)?;
        if back != s {
            return Ok(Outcome::check(false, format!("string {n} changed under vocab {size}")));
        }
    }
    let per_chunk: Vec<f64> = sizes.iter().map(|&s| mean_tokens_per_chunk(&vocab.truncated(s), train)).collect();
    let monotone = per_chunk.windows(2).all(|w| w[1] <= w[0]);
    let rows = tokenized_rate(train, held_out, &sizes, &[0]).map_err(err)?;
    let byte_level = rows[0].raw_rate;
    let best = rows[1..].iter().min_by(|a, b| a.raw_rate.total_cmp(&b.raw_rate)).unwrap();
    Ok(Outcome::check(
        monotone && best.raw_rate < byte_level,
        format!(
            "{STRINGS} strings lossless; tokens per chunk {}; order 0 rate {byte_level:.2} at byte level vs {:.2} at vocab {}",
            per_chunk.iter().map(|t| format!("{t:.0}")).collect::<Vec<_>>().join(" > "),
            best.raw_rate,
            best.vocab_size
        ),
    ))
}

fn irreproducible(bridge_cmd: &str, adjusted_passed: bool) -> Result<Outcome, String> {
    let predictor = build_predictor(&PredictorSpec::bridge(bridge_cmd), None).map_err(err)?;
    let footprint = predictor.footprint();
    let ok = adjusted_passed && footprint.serialized_bytes == 2 * footprint.param_count && footprint.param_count == 1234;
    Ok(Outcome::check(
        ok,
        "large-model raw rates are out of reach at desk scale; covered by the adjusted-rate fixtures and the bridge \
         path, whose handshake reports 1234 parameters (2468 model bytes)"
            .into(),
    ))
}

fn main() -> ExitCode {
    let bridge_cmd = concat!(env!("CARGO_BIN_EXE_lmzc-bridge-ref"), " --param-count 1234 --max-order 2");
    let load = |modality, bytes| load_dataset(&DatasetSource::fixture(modality, bytes)).expect("fixture loads");
    let fixtures: Vec<Dataset> =
        [Modality::Text, Modality::Image, Modality::Audio, Modality::Random].iter().map(|&m| load(m, FIXTURE_BYTES)).collect();
    let chunk_lists: Vec<(&str, Vec<&[u8]>)> =
        fixtures.iter().map(|d| (d.name(), d.bytes.chunks(CHUNK_SIZE).collect())).collect();
    let large_text = load(Modality::Text, 100 << 20);
    let small_text = load(Modality::Text, 1 << 20);

    let mut adjusted_passed = false;
    let checks: Vec<(&str, Check)> = vec![
        ("exact-coder-golden", Box::new(exact_golden)),
        ("round-trip", Box::new(|| round_trip(&chunk_lists, bridge_cmd))),
        ("code-length-bound", Box::new(|| code_length_bound(&chunk_lists))),
        ("random-baseline", Box::new(|| random_baseline(&fixtures[3]))),
        ("chunked-deflate", Box::new(|| chunked_deflate(&large_text))),
        ("adjusted-rate-identity", Box::new(|| adjusted_identity(&small_text))),
        ("inversion-oracle", Box::new(inversion_oracle)),
        ("in-context-curve", Box::new(|| in_context(&fixtures[0]))),
        ("scaling-sweep", Box::new(|| scaling(&large_text))),
        ("bpe-suite", Box::new(|| bpe_suite(&fixtures[0]))),
    ];

    let mut unexpected = 0;
    let mut report = |name: &str, outcome: Result<Outcome, String>, elapsed: Duration| -> bool {
        let (tag, detail, passed) = match outcome {
            Ok(Outcome { verdict: Verdict::Pass, detail }) => ("PASS", detail, true),
            Ok(Outcome { verdict: Verdict::Fail, detail }) => {
                unexpected += 1;
                ("FAIL", detail, false)
            }
            Ok(Outcome { verdict: Verdict::KnownGap, detail }) => ("FAIL", format!("{detail} (known gap)"), false),
            Err(e) => {
                unexpected += 1;
                ("FAIL", format!("error: {e}"), false)
            }
        };
        println!("{tag} {name} [{:.1}s]: {detail}", elapsed.as_secs_f64());
        passed
    };
    for (name, check) in checks {
        let start = Instant::now();
        let passed = report(name, check(), start.elapsed());
        if name == "adjusted-rate-identity" {
            adjusted_passed = passed;
        }
    }
    let start = Instant::now();
    report("irreproducible-claims", irreproducible(bridge_cmd, adjusted_passed), start.elapsed());

    if unexpected > 0 {
        println!("{unexpected} unexpected failure(s)");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
