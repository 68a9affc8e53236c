//! Byte-level byte-pair encoding used as a lossless pre-compressor.
//!
//! Token ids `0..256` are the bytes; merge `i` creates token `256 + i`.
//!
//! Vocab file format (UTF-8 text):
//!
//! ```text
//! lmzc-bpe 1
//! merges <count>
//! <left> <right>  # <hex expansion of the new token>
//! ...
//! ```
//!
//! Everything after `#` on a line is ignored on load.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::Write as _;
use std::sync::Arc;

use rustc_hash::FxHashMap;

use crate::coder::encode_sequence;
use crate::datapipe::CHUNK_SIZE;
use crate::error::{Error, Result};
use crate::predictors::{ContextBackoff, ContextStats, Predictor};

pub const BYTE_TOKENS: usize = 256;

const VOCAB_MAGIC: &str = "lmzc-bpe 1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BpeVocab {
    merges: Vec<(u32, u32)>,
    expansions: Vec<Vec<u8>>,
}

impl Default for BpeVocab {
    fn default() -> Self {
        Self::identity()
    }
}

impl BpeVocab {
    pub fn identity() -> Self {
        BpeVocab {
            merges: Vec::new(),
            expansions: (0..=255u8).map(|b| vec![b]).collect(),
        }
    }

    /// Builds a vocab from merges; each merge may only use earlier tokens.
    pub fn from_merges(merges: Vec<(u32, u32)>) -> Result<Self> {
        let mut vocab = Self::identity();
        for (left, right) in merges {
            vocab.push_merge(left, right)?;
        }
        Ok(vocab)
    }

    fn push_merge(&mut self, left: u32, right: u32) -> Result<u32> {
        let size = self.vocab_size() as u32;
        if left >= size || right >= size {
            return Err(Error::corrupt(format!("merge ({left}, {right}) uses unknown tokens")));
        }
        let mut bytes = self.expansions[left as usize].clone();
        bytes.extend_from_slice(&self.expansions[right as usize]);
        self.expansions.push(bytes);
        self.merges.push((left, right));
        Ok(size)
    }

    pub fn vocab_size(&self) -> usize {
        BYTE_TOKENS + self.merges.len()
    }

    pub fn merges(&self) -> &[(u32, u32)] {
        &self.merges
    }

    pub fn expansion(&self, token: u32) -> Option<&[u8]> {
        self.expansions.get(token as usize).map(Vec::as_slice)
    }

    /// The vocab made of the first `vocab_size - 256` merges.
    pub fn truncated(&self, vocab_size: usize) -> Self {
        let keep = vocab_size.saturating_sub(BYTE_TOKENS).min(self.merges.len());
        BpeVocab {
            merges: self.merges[..keep].to_vec(),
            expansions: self.expansions[..BYTE_TOKENS + keep].to_vec(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{VOCAB_MAGIC}\nmerges {}\n", self.merges.len());
        for (i, &(left, right)) in self.merges.iter().enumerate() {
            let bytes = &self.expansions[BYTE_TOKENS + i];
            writeln!(out, "{left} {right}  # {}", hex::encode(bytes)).expect("write to string");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        match lines.next() {
            Some(VOCAB_MAGIC) => {}
            Some(other) if other.starts_with("lmzc-bpe ") => {
                return Err(Error::corrupt(format!("unsupported vocab version `{other}`")))
            }
            _ => return Err(Error::corrupt("not a vocab file")),
        }
        let count: usize = lines
            .next()
            .and_then(|l| l.strip_prefix("merges "))
            .and_then(|n| n.trim().parse().ok())
            .ok_or_else(|| Error::corrupt("vocab file lacks a merge count"))?;
        let mut vocab = Self::identity();
        for line in lines {
            let mut fields = line.split_whitespace().map(str::parse::<u32>);
            match (fields.next(), fields.next(), fields.next()) {
                (Some(Ok(left)), Some(Ok(right)), None) => {
                    vocab.push_merge(left, right)?;
                }
                _ => return Err(Error::corrupt(format!("bad merge line `{line}`"))),
            }
        }
        if vocab.merges.len() != count {
            return Err(Error::corrupt(format!(
                "vocab declares {count} merges, holds {}",
                vocab.merges.len()
            )));
        }
        Ok(vocab)
    }
}

const NIL: usize = usize::MAX;

/// Doubly linked token sequence; removed slots are marked dead.
struct Sequence {
    tokens: Vec<u32>,
    prev: Vec<usize>,
    next: Vec<usize>,
    alive: Vec<bool>,
}

impl Sequence {
    fn new(tokens: Vec<u32>) -> Self {
        let n = tokens.len();
        Sequence {
            prev: (0..n).map(|i| if i == 0 { NIL } else { i - 1 }).collect(),
            next: (0..n).map(|i| if i + 1 == n { NIL } else { i + 1 }).collect(),
            alive: vec![true; n],
            tokens,
        }
    }

    /// Replaces the pair starting at `i` by `token`; returns the removed slot.
    fn merge_at(&mut self, i: usize, token: u32) -> usize {
        let j = self.next[i];
        self.tokens[i] = token;
        self.alive[j] = false;
        let after = self.next[j];
        self.next[i] = after;
        if after != NIL {
            self.prev[after] = i;
        }
        j
    }

    fn pair_at(&self, i: usize) -> Option<(u32, u32)> {
        if !self.alive[i] {
            return None;
        }
        let j = self.next[i];
        (j != NIL).then(|| (self.tokens[i], self.tokens[j]))
    }

    fn collect(&self) -> Vec<u32> {
        let mut out = Vec::new();
        let mut i = if self.tokens.is_empty() { NIL } else { 0 };
        while i != NIL {
            out.push(self.tokens[i]);
            i = self.next[i];
        }
        out
    }
}

/// Greedy BPE training.
///
/// The count of a pair is its number of adjacent occurrences in the current
/// token sequence (overlaps included). Each step merges the most frequent
/// pair, ties going to the smaller left then the smaller right token, and
/// rewrites its occurrences left to right without overlap. Training stops
/// at `vocab_size` or when no pair occurs twice.
pub fn train_bpe(corpus: &[u8], vocab_size: usize) -> Result<BpeVocab> {
    if corpus.len() < 2 {
        return Err(Error::InsufficientData("BPE training needs at least 2 bytes".into()));
    }
    if vocab_size < BYTE_TOKENS {
        return Err(Error::invalid(format!("vocab size {vocab_size} below {BYTE_TOKENS}")));
    }
    let mut seq = Sequence::new(corpus.iter().map(|&b| u32::from(b)).collect());
    let mut counts: FxHashMap<(u32, u32), u64> = FxHashMap::default();
    let mut positions: FxHashMap<(u32, u32), Vec<usize>> = FxHashMap::default();
    for i in 0..corpus.len() - 1 {
        let pair = (seq.tokens[i], seq.tokens[i + 1]);
        *counts.entry(pair).or_default() += 1;
        positions.entry(pair).or_default().push(i);
    }
    // Entries may be stale; one holding the current count always exists.
    let mut heap: BinaryHeap<(u64, Reverse<u32>, Reverse<u32>)> =
        counts.iter().map(|(&(a, b), &c)| (c, Reverse(a), Reverse(b))).collect();

    let mut vocab = BpeVocab::identity();
    let mut touched: Vec<(u32, u32)> = Vec::new();
    while vocab.vocab_size() < vocab_size {
        let Some((stored, Reverse(a), Reverse(b))) = heap.pop() else { break };
        let current = counts.get(&(a, b)).copied().unwrap_or(0);
        if stored != current {
            if stored > current && current > 0 {
                heap.push((current, Reverse(a), Reverse(b)));
            }
            continue;
        }
        if current < 2 {
            break;
        }
        let token = vocab.push_merge(a, b)?;
        let mut sites = positions.remove(&(a, b)).unwrap_or_default();
        sites.sort_unstable();
        sites.dedup();
        touched.clear();
        let mut bump = |pair: (u32, u32), delta: i64, counts: &mut FxHashMap<(u32, u32), u64>| {
            let c = counts.entry(pair).or_default();
            *c = c.checked_add_signed(delta).expect("pair count stays non-negative");
            touched.push(pair);
        };
        for i in sites {
            if seq.pair_at(i) != Some((a, b)) {
                continue;
            }
            let before = seq.prev[i];
            let after = seq.next[seq.next[i]];
            if before != NIL {
                bump((seq.tokens[before], a), -1, &mut counts);
            }
            if after != NIL {
                bump((b, seq.tokens[after]), -1, &mut counts);
            }
            bump((a, b), -1, &mut counts);
            seq.merge_at(i, token);
            if before != NIL {
                let pair = (seq.tokens[before], token);
                bump(pair, 1, &mut counts);
                positions.entry(pair).or_default().push(before);
            }
            if after != NIL {
                let pair = (token, seq.tokens[after]);
                bump(pair, 1, &mut counts);
                positions.entry(pair).or_default().push(i);
            }
        }
        touched.sort_unstable();
        touched.dedup();
        for &pair in &touched {
            let c = counts[&pair];
            if c == 0 {
                counts.remove(&pair);
                positions.remove(&pair);
            } else if pair.0 == token || pair.1 == token {
                heap.push((c, Reverse(pair.0), Reverse(pair.1)));
            }
        }
    }
    Ok(vocab)
}

/// Applies the merges in training order, each exhaustively and left to
/// right, exactly as training rewrote its corpus.
pub fn encode_tokens(vocab: &BpeVocab, bytes: &[u8]) -> Vec<u32> {
    let mut seq = Sequence::new(bytes.iter().map(|&b| u32::from(b)).collect());
    if vocab.merges.is_empty() || bytes.len() < 2 {
        return seq.collect();
    }
    let ranks: FxHashMap<(u32, u32), u32> =
        vocab.merges.iter().enumerate().map(|(r, &pair)| (pair, r as u32)).collect();
    // A merge only creates pairs of higher rank, so popping (rank, position)
    // replays the merges in order, each left to right.
    let mut heap: BinaryHeap<Reverse<(u32, usize)>> = (0..bytes.len() - 1)
        .filter_map(|i| seq.pair_at(i).and_then(|p| ranks.get(&p)).map(|&r| Reverse((r, i))))
        .collect();
    while let Some(Reverse((rank, i))) = heap.pop() {
        let expected = vocab.merges[rank as usize];
        if seq.pair_at(i) != Some(expected) {
            continue;
        }
        let token = BYTE_TOKENS as u32 + rank;
        seq.merge_at(i, token);
        let before = seq.prev[i];
        if before != NIL {
            if let Some(&r) = seq.pair_at(before).and_then(|p| ranks.get(&p)) {
                heap.push(Reverse((r, before)));
            }
        }
        if let Some(&r) = seq.pair_at(i).and_then(|p| ranks.get(&p)) {
            heap.push(Reverse((r, i)));
        }
    }
    seq.collect()
}

pub fn decode_tokens(vocab: &BpeVocab, tokens: &[u32]) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(tokens.len() * 2);
    for &t in tokens {
        let bytes = vocab
            .expansion(t)
            .ok_or_else(|| Error::corrupt(format!("token {t} outside a vocab of {}", vocab.vocab_size())))?;
        out.extend_from_slice(bytes);
    }
    Ok(out)
}

/// Mean token count of the corpus' 2048-byte chunks, each encoded alone.
pub fn mean_tokens_per_chunk(vocab: &BpeVocab, corpus: &[u8]) -> f64 {
    let chunks: Vec<&[u8]> = corpus.chunks(CHUNK_SIZE).collect();
    if chunks.is_empty() {
        return 0.0;
    }
    let total: usize = chunks.iter().map(|c| encode_tokens(vocab, c).len()).sum();
    total as f64 / chunks.len() as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct TokenizedRate {
    pub vocab_size: usize,
    pub max_order: usize,
    /// Mean tokens per training chunk.
    pub tokens_per_chunk: f64,
    /// Payload bits over held-out bytes, in percent.
    pub raw_rate: f64,
    pub model_bytes: u64,
}

/// For each vocab size (256 is the byte-level baseline) and backoff order:
/// tokenizes `train` and trains the trie on its chunks, then codes each
/// held-out chunk's tokens under the frozen trie with in-chunk adaptation.
/// Rates divide by the original byte count.
pub fn tokenized_rate(
    train: &[u8],
    held_out: &[u8],
    vocab_sizes: &[usize],
    orders: &[usize],
) -> Result<Vec<TokenizedRate>> {
    if held_out.is_empty() {
        return Err(Error::InsufficientData("no held-out bytes".into()));
    }
    let largest = vocab_sizes.iter().copied().max().unwrap_or(BYTE_TOKENS);
    let full = train_bpe(train, largest)?;
    let max_order = orders.iter().copied().max().unwrap_or(0);
    let mut rows = Vec::new();
    for &size in vocab_sizes {
        let vocab = full.truncated(size);
        let alphabet = size.max(BYTE_TOKENS);
        let train_chunks: Vec<Vec<u32>> =
            train.chunks(CHUNK_SIZE).map(|c| encode_tokens(&vocab, c)).collect();
        let tokens_per_chunk =
            train_chunks.iter().map(Vec::len).sum::<usize>() as f64 / train_chunks.len() as f64;
        let mut stats = ContextStats::new(alphabet, max_order);
        for chunk in &train_chunks {
            stats.train(chunk);
        }
        let stats = Arc::new(stats);
        let held_chunks: Vec<Vec<u32>> =
            held_out.chunks(CHUNK_SIZE).map(|c| encode_tokens(&vocab, c)).collect();
        for &order in orders {
            let mut model = ContextBackoff::trained(Arc::clone(&stats), order, true);
            let mut bits = 0u64;
            for chunk in &held_chunks {
                bits += encode_sequence(&mut model, chunk)?.len();
            }
            rows.push(TokenizedRate {
                vocab_size: size,
                max_order: order,
                tokens_per_chunk,
                raw_rate: 100.0 * bits as f64 / (8.0 * held_out.len() as f64),
                model_bytes: model.footprint().serialized_bytes,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Training by recounting every pair from scratch at each step.
    fn brute_force_train(corpus: &[u8], vocab_size: usize) -> Vec<(u32, u32)> {
        let mut tokens: Vec<u32> = corpus.iter().map(|&b| u32::from(b)).collect();
        let mut merges = Vec::new();
        while BYTE_TOKENS + merges.len() < vocab_size {
            let mut counts = std::collections::BTreeMap::new();
            for w in tokens.windows(2) {
                *counts.entry((w[0], w[1])).or_insert(0u64) += 1;
            }
            let best = counts
                .iter()
                .max_by(|x, y| x.1.cmp(y.1).then(y.0.cmp(x.0)))
                .map(|(&p, &c)| (p, c));
            let Some((pair, count)) = best else { break };
            if count < 2 {
                break;
            }
            let token = (BYTE_TOKENS + merges.len()) as u32;
            merges.push(pair);
            tokens = apply_merge(&tokens, pair, token);
        }
        merges
    }

    fn apply_merge(tokens: &[u32], pair: (u32, u32), token: u32) -> Vec<u32> {
        let mut out = Vec::with_capacity(tokens.len());
        let mut i = 0;
        while i < tokens.len() {
            if i + 1 < tokens.len() && (tokens[i], tokens[i + 1]) == pair {
                out.push(token);
                i += 2;
            } else {
                out.push(tokens[i]);
                i += 1;
            }
        }
        out
    }

    fn brute_force_encode(vocab: &BpeVocab, bytes: &[u8]) -> Vec<u32> {
        let mut tokens: Vec<u32> = bytes.iter().map(|&b| u32::from(b)).collect();
        for (r, &pair) in vocab.merges().iter().enumerate() {
            tokens = apply_merge(&tokens, pair, (BYTE_TOKENS + r) as u32);
        }
        tokens
    }

    #[test]
    fn abab_gets_one_merge() {
        let vocab = train_bpe(b"abababab", 257).unwrap();
        assert_eq!(vocab.merges(), &[(97, 98)]);
        assert_eq!(brute_force_train(b"abababab", 257), vec![(97, 98)]);
        let tokens = encode_tokens(&vocab, b"abab");
        assert_eq!(tokens, vec![256, 256]);
        assert_eq!(decode_tokens(&vocab, &tokens).unwrap(), b"abab");
    }

    #[test]
    fn identity_vocab() {
        let vocab = train_bpe(b"abababab", 256).unwrap();
        assert_eq!(vocab, BpeVocab::identity());
        assert_eq!(encode_tokens(&vocab, b"xyz"), vec![120, 121, 122]);
        assert!(train_bpe(b"a", 300).is_err());
    }

    #[test]
    fn stops_when_no_pair_repeats() {
        let vocab = train_bpe(b"abcdef", 1000).unwrap();
        assert_eq!(vocab.vocab_size(), 256);
        let vocab = train_bpe(b"aaaa", 1000).unwrap();
        // (a,a) x3, then (aa,aa) x1.
        assert_eq!(vocab.merges(), &[(97, 97)]);
    }

    #[test]
    fn unknown_token_is_corrupt() {
        assert!(matches!(
            decode_tokens(&BpeVocab::identity(), &[256]),
            Err(Error::CorruptStream(_))
        ));
    }

    #[test]
    fn vocab_text_round_trip() {
        let corpus = crate::datapipe::fixtures::make_text_fixture(20_000, 1);
        let vocab = train_bpe(&corpus, 400).unwrap();
        let text = vocab.to_text();
        assert!(text.starts_with("lmzc-bpe 1\nmerges 144\n"));
        assert_eq!(BpeVocab::from_text(&text).unwrap(), vocab);
        assert!(BpeVocab::from_text(&text.replace("lmzc-bpe 1", "lmzc-bpe 2")).is_err());
        assert!(BpeVocab::from_text("lmzc-bpe 1\nmerges 1\n300 1\n").is_err());
    }

    #[test]
    fn larger_vocabs_extend_smaller_ones() {
        let corpus = crate::datapipe::fixtures::make_text_fixture(50_000, 2);
        let big = train_bpe(&corpus, 1024).unwrap();
        let small = train_bpe(&corpus, 512).unwrap();
        assert_eq!(big.truncated(512), small);
        let lengths: Vec<f64> = [256, 300, 512, 1024]
            .iter()
            .map(|&v| mean_tokens_per_chunk(&big.truncated(v), &corpus))
            .collect();
        assert!(lengths.windows(2).all(|w| w[1] <= w[0]), "{lengths:?}");
        assert!(lengths[3] < lengths[0]);
    }

    proptest! {
        #[test]
        fn training_matches_brute_force(
            corpus in proptest::collection::vec(prop_oneof![Just(b'a'), Just(b'b'), Just(b'c'), any::<u8>()], 2..300),
            extra in 0usize..40,
        ) {
            let vocab = train_bpe(&corpus, 256 + extra).unwrap();
            prop_assert_eq!(vocab.merges().to_vec(), brute_force_train(&corpus, 256 + extra));
            // Encoding the training corpus reproduces training's rewrite.
            prop_assert_eq!(encode_tokens(&vocab, &corpus), brute_force_encode(&vocab, &corpus));
        }

        #[test]
        fn encoding_is_lossless(
            corpus in proptest::collection::vec(0u8..6, 2..400),
            input in proptest::collection::vec(any::<u8>(), 0..300),
        ) {
            let vocab = train_bpe(&corpus, 320).unwrap();
            let shifted: Vec<u8> = input.iter().map(|b| b % 8).collect();
            for bytes in [&input, &shifted] {
                let tokens = encode_tokens(&vocab, bytes);
                prop_assert_eq!(&tokens, &brute_force_encode(&vocab, bytes));
                prop_assert_eq!(&decode_tokens(&vocab, &tokens).unwrap(), bytes);
            }
        }
    }
}
