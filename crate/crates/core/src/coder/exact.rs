//! Arbitrary-precision reference coder.
//!
//! Works on exact rationals, so interval boundaries are the true nested
//! intervals and the code word is the shortest dyadic interval contained in
//! the final one. Cost grows with the message; meant for short messages and
//! as an oracle for the finite-precision coder.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::bits::BitString;
use crate::error::{Error, Result};

/// Half-open interval `[low, high)` with exact rational endpoints.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalInterval {
    pub low: BigRational,
    pub high: BigRational,
}

impl RationalInterval {
    pub fn unit() -> Self {
        RationalInterval {
            low: BigRational::zero(),
            high: BigRational::one(),
        }
    }

    pub fn new(low: BigRational, high: BigRational) -> Result<Self> {
        if low.is_negative() || high > BigRational::one() || low >= high {
            return Err(Error::invalid(format!("not a sub-interval of [0,1): [{low}, {high})")));
        }
        Ok(RationalInterval { low, high })
    }

    pub fn width(&self) -> BigRational {
        &self.high - &self.low
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.low <= x && x < &self.high
    }

    /// Whether `other` lies entirely inside `self`.
    pub fn covers(&self, other: &RationalInterval) -> bool {
        self.low <= other.low && other.high <= self.high
    }
}

impl fmt::Debug for RationalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.low, self.high)
    }
}

/// Exact conditional distributions `rho(. | history)`.
pub trait ExactModel {
    fn alphabet_size(&self) -> usize;
    fn conditionals(&self, history: &[usize]) -> Result<Vec<BigRational>>;
}

/// A model given as an explicit table from histories to conditionals.
#[derive(Clone, Debug, Default)]
pub struct ConditionalTable {
    alphabet_size: usize,
    rows: BTreeMap<Vec<usize>, Vec<BigRational>>,
}

impl ConditionalTable {
    pub fn new(alphabet_size: usize) -> Self {
        ConditionalTable {
            alphabet_size,
            rows: BTreeMap::new(),
        }
    }

    /// Adds the row for `history`. Probabilities must be positive and sum to one.
    pub fn with_row(mut self, history: &[usize], probabilities: Vec<BigRational>) -> Result<Self> {
        if probabilities.len() != self.alphabet_size {
            return Err(Error::InvalidDistribution(format!(
                "row has {} entries for alphabet {}",
                probabilities.len(),
                self.alphabet_size
            )));
        }
        if probabilities.iter().any(|p| !p.is_positive()) {
            return Err(Error::InvalidDistribution("non-positive probability".into()));
        }
        let total: BigRational = probabilities.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidDistribution(format!("row sums to {total}")));
        }
        self.rows.insert(history.to_vec(), probabilities);
        Ok(self)
    }

    /// Convenience for decimal probabilities written as (numerator, denominator).
    pub fn with_ratio_row(self, history: &[usize], ratios: &[(i64, i64)]) -> Result<Self> {
        let row = ratios.iter().map(|&(n, d)| ratio(n, d)).collect();
        self.with_row(history, row)
    }
}

impl ExactModel for ConditionalTable {
    fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    fn conditionals(&self, history: &[usize]) -> Result<Vec<BigRational>> {
        self.rows
            .get(history)
            .cloned()
            .ok_or_else(|| Error::invalid(format!("no conditional for history {history:?}")))
    }
}

pub fn ratio(numerator: i64, denominator: i64) -> BigRational {
    BigRational::new(BigInt::from(numerator), BigInt::from(denominator))
}

/// Sub-interval of `current` assigned to `symbol`.
pub fn sub_interval(
    current: &RationalInterval,
    conditionals: &[BigRational],
    symbol: usize,
) -> RationalInterval {
    let width = current.width();
    let below: BigRational = conditionals[..symbol].iter().sum();
    let through = &below + &conditionals[symbol];
    RationalInterval {
        low: &current.low + &width * below,
        high: &current.low + &width * through,
    }
}

/// Encodes `symbols` exactly. Returns the interval after every step and the
/// code word: the shortest bit string whose dyadic interval lies in the
/// final interval.
pub fn exact_encode(
    model: &dyn ExactModel,
    symbols: &[usize],
) -> Result<(Vec<RationalInterval>, BitString)> {
    let mut current = RationalInterval::unit();
    let mut steps = Vec::with_capacity(symbols.len());
    for (k, &symbol) in symbols.iter().enumerate() {
        if symbol >= model.alphabet_size() {
            return Err(Error::invalid(format!("symbol {symbol} outside the alphabet")));
        }
        let conditionals = model.conditionals(&symbols[..k])?;
        current = sub_interval(&current, &conditionals, symbol);
        steps.push(current.clone());
    }
    let code = dyadic_refine(&current);
    Ok((steps, code))
}

/// Dyadic interval `[k / 2^m, (k + 1) / 2^m)` named by a bit string.
pub fn dyadic_interval(bits: &BitString) -> RationalInterval {
    let mut numerator = BigInt::zero();
    for bit in bits.iter() {
        numerator = (numerator << 1u32) + BigInt::from(u8::from(bit));
    }
    let denominator = BigInt::one() << bits.len() as usize;
    RationalInterval {
        low: BigRational::new(numerator.clone(), denominator.clone()),
        high: BigRational::new(numerator + BigInt::one(), denominator),
    }
}

/// Halves `[0, 1)` towards `target` until the dyadic interval fits inside
/// `target`; this is the shortest such bit string.
pub fn dyadic_refine(target: &RationalInterval) -> BitString {
    let mut m = 0usize;
    loop {
        let scale = BigRational::from_integer(BigInt::one() << m);
        let scaled_low = &target.low * &scale;
        let k = scaled_low.ceil();
        let upper = (&k + BigRational::one()) / &scale;
        if upper <= target.high {
            let k = k.to_integer();
            return (0..m).rev().map(|i| k.bit(i as u64)).collect();
        }
        m += 1;
    }
}

/// Decodes `n` symbols from a code word produced by [`exact_encode`].
pub fn exact_decode(model: &dyn ExactModel, code: &BitString, n: usize) -> Result<Vec<usize>> {
    let point = dyadic_interval(code).low;
    let mut current = RationalInterval::unit();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let conditionals = model.conditionals(&out)?;
        let symbol = (0..model.alphabet_size())
            .find(|&y| sub_interval(&current, &conditionals, y).contains(&point))
            .ok_or_else(|| Error::corrupt("code point outside every sub-interval"))?;
        current = sub_interval(&current, &conditionals, symbol);
        out.push(symbol);
    }
    Ok(out)
}

/// `-log2` of the width of an interval, as a float.
pub fn information_content(interval: &RationalInterval) -> f64 {
    let w = interval.width();
    let (n, d) = (w.numer(), w.denom());
    let bits = |x: &BigInt| -> f64 {
        let b = x.bits();
        let shift = b.saturating_sub(60);
        let top: BigInt = x >> shift as usize;
        let top: i64 = top.try_into().unwrap_or(i64::MAX);
        (top as f64).log2() + shift as f64
    };
    bits(d) - bits(n)
}
