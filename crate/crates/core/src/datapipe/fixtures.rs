//! Deterministic synthetic corpora standing in for the benchmark datasets.
//!
//! Every generator is a pure function of `(n, seed)`.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::transforms::{extract_image_patches, reduce_audio};

pub const DEFAULT_SEED: u64 = 0x6c6d_7a63;

pub fn make_random_fixture(n: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![0u8; n];
    rng.fill_bytes(&mut out);
    out
}

// ---------------------------------------------------------------- text

const FUNCTION_WORDS: &[&str] = &[
    "the", "of", "and", "in", "to", "a", "is", "was", "for", "as", "by", "with", "on", "that", "from",
    "his", "at", "it", "an", "are", "were", "which", "be", "this", "or", "also", "he", "has", "had",
    "first", "its", "their", "not", "one", "after", "but", "new", "who", "they", "two", "been",
    "other", "her", "she", "all", "there", "more", "most", "into", "some", "these", "when", "would",
    "only", "many", "time", "may", "such", "than", "between", "during", "used", "known", "later",
    "three", "city", "world", "united", "states", "war", "century", "called", "part", "made",
];

const ONSETS: &[&str] = &[
    "", "", "b", "c", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w", "y",
    "z", "bl", "br", "ch", "cl", "cr", "dr", "fl", "fr", "gr", "pl", "pr", "sh", "sl", "sp", "st",
    "str", "th", "tr", "wh",
];
const NUCLEI: &[&str] = &["a", "e", "i", "o", "u", "a", "e", "i", "o", "ai", "ea", "ee", "io", "ou", "y", "ie"];
const CODAS: &[&str] = &[
    "", "", "", "n", "r", "s", "t", "l", "nd", "st", "ng", "rt", "ck", "m", "th", "ss", "nt", "rd",
];
const SUFFIXES: &[&str] = &["", "", "", "", "s", "ed", "ing", "ion", "al", "er", "ly", "ity", "ic"];
const ACCENTED: &[&str] = &["é", "è", "ü", "ö", "ä", "ñ", "ç", "á", "ó", "í", "ø", "å"];

/// Zipf-distributed ranks by inverse CDF.
struct Zipf {
    cdf: Vec<f64>,
}

impl Zipf {
    fn new(n: usize, exponent: f64) -> Self {
        let mut cdf = Vec::with_capacity(n);
        let mut total = 0.0;
        for rank in 1..=n {
            total += (rank as f64).powf(-exponent);
            cdf.push(total);
        }
        for c in &mut cdf {
            *c /= total;
        }
        Zipf { cdf }
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c < u).min(self.cdf.len() - 1)
    }
}

fn pick<'a>(rng: &mut impl Rng, items: &[&'a str]) -> &'a str {
    items[rng.random_range(0..items.len())]
}

fn make_stem(rng: &mut impl Rng) -> String {
    let syllables = 1 + (rng.random::<f64>().powi(2) * 3.0) as usize;
    let mut stem = String::new();
    for _ in 0..syllables {
        stem.push_str(pick(rng, ONSETS));
        stem.push_str(pick(rng, NUCLEI));
        stem.push_str(pick(rng, CODAS));
    }
    stem
}

/// A stem, sometimes compounded, plus a suffix.
fn make_word(rng: &mut impl Rng, stems: &[String]) -> String {
    let mut word = stems[rng.random_range(0..stems.len())].clone();
    if rng.random::<f64>() < 0.15 {
        word.push_str(&stems[rng.random_range(0..stems.len())]);
    }
    word.push_str(pick(rng, SUFFIXES));
    if rng.random::<f64>() < 0.004 {
        // A few loanwords carry non-ASCII letters, as UTF-8.
        let mut chars: Vec<char> = word.chars().collect();
        let at = rng.random_range(0..chars.len());
        chars[at] = pick(rng, ACCENTED).chars().next().expect("non-empty");
        word = chars.into_iter().collect();
    }
    word
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

struct TextModel {
    vocabulary: Vec<String>,
    zipf: Zipf,
    /// Habitual successors of the most frequent words.
    successors: Vec<[usize; 3]>,
}

/// Words with successor lists.
const COLLOCATING: usize = 4000;
const STEMS: usize = 5000;

impl TextModel {
    fn new(rng: &mut impl Rng) -> Self {
        let stems: Vec<String> = (0..STEMS).map(|_| make_stem(rng)).filter(|s| !s.is_empty()).collect();
        let mut seen = std::collections::HashSet::new();
        let mut generated: Vec<String> = (0..40_000)
            .map(|_| make_word(rng, &stems))
            .filter(|w| seen.insert(w.clone()))
            .collect();
        generated.sort_by_key(|w| w.len());
        let mut vocabulary: Vec<String> = FUNCTION_WORDS.iter().map(|w| w.to_string()).collect();
        vocabulary.extend(generated.into_iter().filter(|w| !FUNCTION_WORDS.contains(&w.as_str())));
        let zipf = Zipf::new(vocabulary.len(), 1.05);
        let successors = (0..COLLOCATING)
            .map(|_| [zipf.sample(rng), zipf.sample(rng), zipf.sample(rng)])
            .collect();
        TextModel {
            vocabulary,
            zipf,
            successors,
        }
    }

    fn rank(&self, rng: &mut impl Rng, topic: &[usize], previous: Option<usize>) -> usize {
        let roll: f64 = rng.random();
        match previous {
            Some(p) if p < COLLOCATING && roll < 0.55 => self.successors[p][rng.random_range(0..3)],
            _ if roll > 0.75 => topic[rng.random_range(0..topic.len())],
            _ => self.zipf.sample(rng),
        }
    }

    fn word<'a>(&'a self, rng: &mut impl Rng, topic: &[usize]) -> &'a str {
        &self.vocabulary[self.rank(rng, topic, None)]
    }

    fn sentence(&self, rng: &mut impl Rng, topic: &[usize], out: &mut String) {
        let words = rng.random_range(6..28);
        let mut previous = None;
        for i in 0..words {
            let rank = self.rank(rng, topic, previous);
            previous = Some(rank);
            let w = self.vocabulary[rank].as_str();
            let w = if i == 0 { capitalize(w) } else { w.to_string() };
            let roll: f64 = rng.random();
            if roll < 0.05 {
                out.push_str("[[");
                out.push_str(&w);
                out.push_str("]]");
            } else if roll < 0.065 {
                let other = self.word(rng, topic);
                out.push_str(&format!("[[{} {}|{}]]", capitalize(&w), other, w));
            } else if roll < 0.075 {
                out.push_str(&format!("{}", rng.random_range(1000..2010)));
            } else if roll < 0.08 {
                out.push_str(&format!("&quot;{w}&quot;"));
            } else {
                out.push_str(&w);
            }
            if i + 1 < words {
                if rng.random::<f64>() < 0.07 {
                    out.push(',');
                }
                out.push(' ');
            }
        }
        out.push_str(if rng.random::<f64>() < 0.97 { ". " } else { "; " });
    }

    fn paragraph(&self, rng: &mut impl Rng, topic: &[usize], out: &mut String) {
        if rng.random::<f64>() < 0.15 {
            for _ in 0..rng.random_range(2..7) {
                out.push_str("* ");
                self.sentence(rng, topic, out);
                out.pop();
                out.push('\n');
            }
        } else {
            for _ in 0..rng.random_range(2..8) {
                self.sentence(rng, topic, out);
            }
            out.pop();
        }
        out.push_str("\n\n");
    }

    fn article(&self, rng: &mut impl Rng, id: usize, out: &mut String) {
        let topic: Vec<usize> = (0..25).map(|_| rng.random_range(150..self.vocabulary.len())).collect();
        let title: Vec<String> = (0..rng.random_range(1..4))
            .map(|_| capitalize(&self.vocabulary[topic[rng.random_range(0..topic.len())]]))
            .collect();
        let title = title.join(" ");
        out.push_str("  <page>\n    <title>");
        out.push_str(&title);
        out.push_str(&format!(
            "</title>\n    <id>{id}</id>\n    <revision>\n      <id>{}</id>\n      <timestamp>200{}-{:02}-{:02}T{:02}:{:02}:{:02}Z</timestamp>\n      <contributor>\n        <username>{}</username>\n        <id>{}</id>\n      </contributor>\n      <text xml:space=\"preserve\">",
            rng.random_range(1_000_000..45_000_000),
            rng.random_range(2..7),
            rng.random_range(1..13),
            rng.random_range(1..29),
            rng.random_range(0..24),
            rng.random_range(0..60),
            rng.random_range(0..60),
            capitalize(&self.vocabulary[self.zipf.sample(rng)]),
            rng.random_range(1..2_000_000),
        ));
        if rng.random::<f64>() < 0.3 {
            out.push_str(&format!("#REDIRECT [[{}]]</text>\n    </revision>\n  </page>\n", capitalize(self.word(rng, &topic))));
            return;
        }
        if rng.random::<f64>() < 0.3 {
            out.push_str(&format!("{{{{Infobox {}\n| name = {title}\n| founded = {}\n}}}}\n", self.vocabulary[topic[0]], rng.random_range(1000..2000)));
        }
        out.push_str(&format!("'''{title}''' "));
        self.paragraph(rng, &topic, out);
        for _ in 0..rng.random_range(1..6) {
            let heading = capitalize(self.word(rng, &topic));
            out.push_str(&format!("== {heading} ==\n"));
            for _ in 0..rng.random_range(1..4) {
                self.paragraph(rng, &topic, out);
            }
        }
        for _ in 0..rng.random_range(1..4) {
            out.push_str(&format!("[[Category:{}]]\n", capitalize(&self.vocabulary[topic[rng.random_range(0..topic.len())]])));
        }
        out.push_str("</text>\n    </revision>\n  </page>\n");
    }
}

/// Wiki-markup XML dump with a Zipfian pseudo-English vocabulary.
pub fn make_text_fixture(n: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = TextModel::new(&mut rng);
    let mut text = String::with_capacity(n + 8192);
    text.push_str("<mediawiki xml:lang=\"en\">\n");
    let mut id = 1;
    while text.len() < n {
        model.article(&mut rng, id, &mut text);
        id += rng.random_range(1..40);
    }
    let mut bytes = text.into_bytes();
    bytes.truncate(n);
    bytes
}

// ---------------------------------------------------------------- images

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Value noise: bilinear-smoothed random lattice of the given cell size.
fn value_noise(rng: &mut impl Rng, height: usize, width: usize, cell: usize, out: &mut [f64], amplitude: f64) {
    let gh = height / cell + 2;
    let gw = width / cell + 2;
    let lattice: Vec<f64> = (0..gh * gw).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    for y in 0..height {
        let gy = y / cell;
        let ty = smoothstep((y % cell) as f64 / cell as f64);
        for x in 0..width {
            let gx = x / cell;
            let tx = smoothstep((x % cell) as f64 / cell as f64);
            let a = lattice[gy * gw + gx];
            let b = lattice[gy * gw + gx + 1];
            let c = lattice[(gy + 1) * gw + gx];
            let d = lattice[(gy + 1) * gw + gx + 1];
            let top = a + (b - a) * tx;
            let bottom = c + (d - c) * tx;
            out[y * width + x] += amplitude * (top + (bottom - top) * ty);
        }
    }
}

/// A photograph-like grayscale image: multi-octave noise background, a few
/// shaded shapes with hard edges, gradients and sensor noise.
pub fn make_image(height: usize, width: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut field = vec![0.0f64; height * width];
    let base = rng.random_range(60.0..190.0);
    let contrast = rng.random_range(20.0..70.0);
    let mut cell = (height.max(width) / 2).max(8);
    let mut amplitude = contrast;
    while cell >= 2 {
        value_noise(&mut rng, height, width, cell, &mut field, amplitude);
        cell /= 2;
        amplitude *= 0.55;
    }
    let (gx, gy) = (rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2));
    for _ in 0..rng.random_range(2..9) {
        let cy = rng.random_range(0.0..height as f64);
        let cx = rng.random_range(0.0..width as f64);
        let ry = rng.random_range(8.0..(height as f64 / 2.0).max(9.0));
        let rx = rng.random_range(8.0..(width as f64 / 2.0).max(9.0));
        let level = rng.random_range(-80.0..80.0);
        let shade = rng.random_range(-0.5..0.5);
        let ellipse = rng.random::<bool>();
        for y in 0..height {
            for x in 0..width {
                let dy = (y as f64 - cy) / ry;
                let dx = (x as f64 - cx) / rx;
                let inside = if ellipse { dx * dx + dy * dy <= 1.0 } else { dx.abs() <= 1.0 && dy.abs() <= 1.0 };
                if inside {
                    field[y * width + x] += level + shade * 20.0 * dy;
                }
            }
        }
    }
    let sigma = rng.random_range(1.0..4.0);
    (0..height * width)
        .map(|i| {
            let (y, x) = (i / width, i % width);
            // Sum of uniforms: a cheap approximately normal sensor noise.
            let noise: f64 = (0..4).map(|_| rng.random::<f64>() - 0.5).sum::<f64>() * sigma * 1.7;
            let v = base + field[i] + gx * x as f64 + gy * y as f64 + noise;
            v.round().clamp(0.0, 255.0) as u8
        })
        .collect()
}

/// Concatenated 32x64 patches of synthetic images.
pub fn make_image_fixture(n: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n + 2048);
    while out.len() < n {
        let height = 32 * rng.random_range(4..12);
        let width = 64 * rng.random_range(3..8);
        let image = make_image(height, width, rng.next_u64());
        for patch in extract_image_patches(&image, height, width).expect("dimensions match") {
            out.extend_from_slice(&patch);
        }
    }
    out.truncate(n);
    out
}

// ---------------------------------------------------------------- audio

pub const AUDIO_RATE: f64 = 16_000.0;

/// Two-pole resonator.
struct Resonator {
    a1: f64,
    a2: f64,
    gain: f64,
    y1: f64,
    y2: f64,
}

impl Resonator {
    fn new(frequency: f64, bandwidth: f64) -> Self {
        let r = (-std::f64::consts::PI * bandwidth / AUDIO_RATE).exp();
        let theta = 2.0 * std::f64::consts::PI * frequency / AUDIO_RATE;
        Resonator {
            a1: 2.0 * r * theta.cos(),
            a2: -r * r,
            gain: 1.0 - r,
            y1: 0.0,
            y2: 0.0,
        }
    }

    fn retune(&mut self, frequency: f64, bandwidth: f64) {
        let fresh = Resonator::new(frequency, bandwidth);
        self.a1 = fresh.a1;
        self.a2 = fresh.a2;
        self.gain = fresh.gain;
    }

    fn step(&mut self, x: f64) -> f64 {
        let y = self.gain * x + self.a1 * self.y1 + self.a2 * self.y2;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }
}

const VOWELS: &[[f64; 3]] = &[
    [730.0, 1090.0, 2440.0],
    [270.0, 2290.0, 3010.0],
    [530.0, 1840.0, 2480.0],
    [570.0, 840.0, 2410.0],
    [300.0, 870.0, 2240.0],
    [660.0, 1720.0, 2410.0],
    [490.0, 1350.0, 1690.0],
];

/// Speech-like 16 kHz PCM16: voiced segments (glottal pulses through
/// formant resonators with drifting pitch), fricative noise bursts and
/// pauses, under a slowly varying loudness.
pub fn make_speech_samples(n: usize, seed: u64) -> Vec<i16> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut formants: Vec<Resonator> = VOWELS[0].iter().map(|&f| Resonator::new(f, 90.0)).collect();
    let mut speaker_pitch = rng.random_range(95.0..230.0);
    let mut phase = 0.0f64;
    let mut hum = 0.0f64;
    while out.len() < n {
        let kind = rng.random_range(0..10);
        let duration = (AUDIO_RATE * rng.random_range(0.04..0.25)) as usize;
        let loudness = rng.random_range(2000.0..9000.0);
        if rng.random::<f64>() < 0.02 {
            speaker_pitch = rng.random_range(95.0..230.0);
        }
        let vowel = VOWELS[rng.random_range(0..VOWELS.len())];
        for (r, &f) in formants.iter_mut().zip(&vowel) {
            r.retune(f * rng.random_range(0.9..1.1), rng.random_range(60.0..140.0));
        }
        let glide = rng.random_range(-0.3..0.3);
        for i in 0..duration {
            let t = i as f64 / duration as f64;
            let envelope = (std::f64::consts::PI * t).sin().powf(0.6);
            let sample = match kind {
                0 | 1 => {
                    // pause with room noise
                    (rng.random::<f64>() - 0.5) * 60.0
                }
                2 | 3 => {
                    // fricative: high-passed noise
                    let white = rng.random::<f64>() - 0.5;
                    let hp = white - hum;
                    hum = white;
                    hp * loudness * 0.5 * envelope
                }
                _ => {
                    let pitch = speaker_pitch * (1.0 + glide * t) * (1.0 + 0.01 * (rng.random::<f64>() - 0.5));
                    phase += pitch / AUDIO_RATE;
                    let excitation = if phase >= 1.0 {
                        phase -= 1.0;
                        1.0
                    } else {
                        0.0
                    } + (rng.random::<f64>() - 0.5) * 0.02;
                    let mut voiced = 0.0;
                    for (k, r) in formants.iter_mut().enumerate() {
                        voiced += r.step(excitation) / (k + 1) as f64;
                    }
                    voiced * loudness * 6.0 * envelope
                }
            };
            out.push(sample.round().clamp(-32768.0, 32767.0) as i16);
            if out.len() == n {
                break;
            }
        }
    }
    out
}

/// Speech-like audio reduced to one byte per sample.
pub fn make_audio_fixture(n: usize, seed: u64) -> Vec<u8> {
    reduce_audio(&make_speech_samples(n, seed))
}

/// A pure tone, PCM16.
pub fn sine_samples(n: usize, frequency: f64, amplitude: f64) -> Vec<i16> {
    (0..n)
        .map(|i| {
            let t = i as f64 / AUDIO_RATE;
            (amplitude * (2.0 * std::f64::consts::PI * frequency * t).sin()).round() as i16
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic_and_sized() {
        for make in [make_random_fixture, make_text_fixture, make_image_fixture, make_audio_fixture] {
            let a = make(50_000, 7);
            assert_eq!(a.len(), 50_000);
            assert_eq!(a, make(50_000, 7));
            assert_ne!(a, make(50_000, 8));
        }
    }

    #[test]
    fn random_fixture_histogram_is_flat() {
        let data = make_random_fixture(1 << 20, 1);
        let mut counts = [0u64; 256];
        for &b in &data {
            counts[usize::from(b)] += 1;
        }
        let expected = data.len() as f64 / 256.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 255 degrees of freedom; 330.5 is the 0.999 quantile.
        assert!(chi2 < 330.5, "chi2 = {chi2}");
    }

    #[test]
    fn text_fixture_looks_like_a_wiki_dump() {
        let text = make_text_fixture(200_000, 3);
        let s = String::from_utf8_lossy(&text);
        assert!(s.starts_with("<mediawiki"));
        for marker in ["<page>", "<title>", "[[", "== ", " the ", "[[Category:"] {
            assert!(s.contains(marker), "{marker}");
        }
        let high = text.iter().filter(|&&b| b >= 128).count();
        assert!(high > 0 && high < text.len() / 50);
    }

    #[test]
    fn audio_fixture_uses_the_dynamic_range() {
        let samples = make_speech_samples(160_000, 2);
        let peak = samples.iter().map(|s| s.unsigned_abs()).max().unwrap();
        assert!(peak > 4000, "{peak}");
        let quiet = samples.iter().filter(|s| s.unsigned_abs() < 256).count();
        assert!(quiet > samples.len() / 20);
    }
}
