//! Finite-precision binary arithmetic coder.
//!
//! The coder keeps a 32-bit interval `[low, high]` (inclusive upper end) and
//! rescales it whenever it falls into one half of the code space (E1/E2) or
//! straddles the middle inside the central half (E3, recorded as pending
//! bits). After every symbol the interval is wider than a quarter of the
//! code space, so a PMF with at most `2^30` total mass never assigns an
//! empty sub-interval.

use super::bits::BitString;
use super::pmf::Pmf;
use crate::error::{Error, Result};

/// Bits of coder state.
pub const STATE_BITS: u32 = 32;

const TOP: u64 = (1 << STATE_BITS) - 1;
const HALF: u64 = 1 << (STATE_BITS - 1);
const QUARTER: u64 = 1 << (STATE_BITS - 2);
const THREE_QUARTERS: u64 = HALF + QUARTER;

/// Snapshot of the coder registers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoderState {
    pub low: u64,
    pub high: u64,
    /// Unresolved E3 rescalings (encoder only).
    pub pending_bits: u64,
    /// Current window into the code word (decoder only).
    pub code_register: u64,
}

impl CoderState {
    pub fn fresh() -> Self {
        CoderState {
            low: 0,
            high: TOP,
            pending_bits: 0,
            code_register: 0,
        }
    }

    /// Width of the current interval.
    pub fn width(&self) -> u64 {
        self.high - self.low + 1
    }
}

#[inline]
fn narrow(low: u64, high: u64, pmf: &Pmf, symbol: usize) -> (u64, u64) {
    let range = high - low + 1;
    let (lo, hi) = pmf.range(symbol);
    let shift = pmf.precision();
    let new_high = low + ((range * u64::from(hi)) >> shift) - 1;
    let new_low = low + ((range * u64::from(lo)) >> shift);
    (new_low, new_high)
}

#[derive(Clone, Debug)]
pub struct Encoder {
    state: CoderState,
    out: BitString,
}

impl Default for Encoder {
    fn default() -> Self {
        Self::new()
    }
}

impl Encoder {
    pub fn new() -> Self {
        Encoder {
            state: CoderState::fresh(),
            out: BitString::new(),
        }
    }

    pub fn state(&self) -> CoderState {
        self.state
    }

    /// Bits written so far (pending bits excluded).
    pub fn bits(&self) -> &BitString {
        &self.out
    }

    #[inline]
    fn emit(&mut self, bit: bool) {
        self.out.push(bit);
        let pending = std::mem::take(&mut self.state.pending_bits);
        self.out.push_repeated(!bit, pending);
    }

    /// Narrows the interval to `symbol`'s slice of `pmf` and renormalizes.
    /// Returns the number of bits written by this call.
    pub fn encode_symbol(&mut self, pmf: &Pmf, symbol: usize) -> u64 {
        debug_assert!(symbol < pmf.alphabet_size());
        let before = self.out.len();
        let (mut low, mut high) = narrow(self.state.low, self.state.high, pmf, symbol);
        loop {
            if high < HALF {
                self.emit(false);
            } else if low >= HALF {
                self.emit(true);
                low -= HALF;
                high -= HALF;
            } else if low >= QUARTER && high < THREE_QUARTERS {
                self.state.pending_bits += 1;
                low -= QUARTER;
                high -= QUARTER;
            } else {
                break;
            }
            low <<= 1;
            high = (high << 1) | 1;
        }
        self.state.low = low;
        self.state.high = high;
        self.out.len() - before
    }

    /// Terminates the code word with the fewest bits that pin a value inside
    /// the final interval (trailing bits read by the decoder are zeros).
    pub fn finish(mut self) -> BitString {
        let CoderState {
            low, pending_bits, ..
        } = self.state;
        if low == 0 && pending_bits == 0 {
            // The implicit all-zero tail already lies in [low, high].
            return self.out;
        }
        // After renormalization low < HALF <= high, so HALF is always inside.
        self.emit(true);
        self.out
    }
}

/// Decoder over a code word; reads zeros once the code word is exhausted.
#[derive(Clone, Debug)]
pub struct Decoder<'a> {
    state: CoderState,
    bits: &'a BitString,
    position: u64,
}

impl<'a> Decoder<'a> {
    pub fn new(bits: &'a BitString) -> Self {
        let mut decoder = Decoder {
            state: CoderState::fresh(),
            bits,
            position: 0,
        };
        for _ in 0..STATE_BITS {
            let bit = decoder.next_bit();
            decoder.state.code_register = (decoder.state.code_register << 1) | bit;
        }
        decoder
    }

    pub fn state(&self) -> CoderState {
        self.state
    }

    /// Bits consumed so far, including implicit zero padding.
    pub fn position(&self) -> u64 {
        self.position
    }

    /// True once the decoder has consumed more padding than any well-formed
    /// code word can demand.
    pub fn overrun(&self) -> bool {
        self.position > self.bits.len() + u64::from(STATE_BITS)
    }

    #[inline]
    fn next_bit(&mut self) -> u64 {
        let bit = self.bits.get(self.position).unwrap_or(false);
        self.position += 1;
        u64::from(bit)
    }

    pub fn decode_symbol(&mut self, pmf: &Pmf) -> usize {
        let CoderState {
            low,
            high,
            code_register,
            ..
        } = self.state;
        let range = high - low + 1;
        let shift = pmf.precision();
        let target = ((((code_register - low) + 1) << shift) - 1) / range;
        let symbol = pmf.symbol_for(target as u32);

        let (mut low, mut high) = narrow(low, high, pmf, symbol);
        let mut value = code_register;
        loop {
            if high < HALF {
                // nothing to subtract
            } else if low >= HALF {
                low -= HALF;
                high -= HALF;
                value -= HALF;
            } else if low >= QUARTER && high < THREE_QUARTERS {
                low -= QUARTER;
                high -= QUARTER;
                value -= QUARTER;
            } else {
                break;
            }
            low <<= 1;
            high = (high << 1) | 1;
            value = (value << 1) | self.next_bit();
        }
        self.state.low = low;
        self.state.high = high;
        self.state.code_register = value;
        symbol
    }

    /// Errors if the decoder has read past what any valid code word provides.
    pub fn check(&self) -> Result<()> {
        if self.overrun() {
            Err(Error::corrupt(format!(
                "decoder demanded {} bits from a {}-bit code word",
                self.position,
                self.bits.len()
            )))
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coder::pmf::quantize;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_pmf(rng: &mut impl Rng, n: usize) -> Pmf {
        let weights: Vec<f64> = (0..n).map(|_| rng.random::<f64>().powi(4) + 1e-9).collect();
        let total: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        quantize(&probs, 16).unwrap()
    }

    #[test]
    fn halving_case_emits_zero() {
        let pmf = quantize(&[0.5, 0.5], 16).unwrap();
        let mut enc = Encoder::new();
        let emitted = enc.encode_symbol(&pmf, 0);
        assert_eq!(emitted, 1);
        assert_eq!(enc.bits().to_string(), "0");
        let state = enc.state();
        assert_eq!((state.low, state.high), (0, TOP));
    }

    #[test]
    fn fig1_symbols_round_trip() {
        let pmf = quantize(&[0.45, 0.3, 0.25], 16).unwrap();
        let message = [0usize, 1, 2, 1];
        let mut enc = Encoder::new();
        for &s in &message {
            enc.encode_symbol(&pmf, s);
        }
        let bits = enc.finish();
        let mut dec = Decoder::new(&bits);
        let decoded: Vec<usize> = message.iter().map(|_| dec.decode_symbol(&pmf)).collect();
        assert_eq!(decoded, message);
        dec.check().unwrap();
    }

    #[test]
    fn near_certain_symbol_costs_almost_nothing() {
        let mut probs = vec![0.0; 256];
        probs[7] = 1.0;
        let pmf = quantize(&probs, 16).unwrap();
        let mut enc = Encoder::new();
        for _ in 0..10_000 {
            enc.encode_symbol(&pmf, 7);
        }
        let bits = enc.finish();
        // 10^4 * -log2((65536 - 255) / 65536) is about 56 bits.
        assert!(bits.len() <= 60, "{} bits", bits.len());
        let mut dec = Decoder::new(&bits);
        assert!((0..10_000).all(|_| dec.decode_symbol(&pmf) == 7));
    }

    #[test]
    fn interval_stays_wide_after_every_symbol() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pmf = random_pmf(&mut rng, 256);
        let mut enc = Encoder::new();
        for _ in 0..20_000 {
            enc.encode_symbol(&pmf, rng.random_range(0..256));
            let state = enc.state();
            assert!(state.low < state.high);
            assert!(state.width() > QUARTER);
        }
    }

    #[test]
    fn hundred_thousand_random_symbols_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pmfs: Vec<Pmf> = (0..64)
            .map(|i| random_pmf(&mut rng, 2 + (i * 37) % 255))
            .collect();
        let script: Vec<(usize, usize)> = (0..100_000)
            .map(|_| {
                let p = rng.random_range(0..pmfs.len());
                (p, rng.random_range(0..pmfs[p].alphabet_size()))
            })
            .collect();
        let mut enc = Encoder::new();
        for &(p, s) in &script {
            enc.encode_symbol(&pmfs[p], s);
        }
        let bits = enc.finish();
        let mut dec = Decoder::new(&bits);
        for &(p, s) in &script {
            assert_eq!(dec.decode_symbol(&pmfs[p]), s);
        }
        dec.check().unwrap();
    }

    #[test]
    fn empty_message_is_empty_code() {
        assert!(Encoder::new().finish().is_empty());
    }

    proptest! {
        #[test]
        fn length_within_two_bits_of_ideal(
            seed in any::<u64>(),
            symbols in proptest::collection::vec(0usize..40, 0..400),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pmf = random_pmf(&mut rng, 40);
            let mut enc = Encoder::new();
            let mut ideal = 0.0;
            for &s in &symbols {
                ideal += pmf.code_length(s);
                enc.encode_symbol(&pmf, s);
            }
            let bits = enc.finish();
            prop_assert!(bits.len() as f64 <= ideal.ceil() + 2.0);
            let mut dec = Decoder::new(&bits);
            for &s in &symbols {
                prop_assert_eq!(dec.decode_symbol(&pmf), s);
            }
        }
    }
}
