//! Quantized probability mass functions.
//!
//! Every distribution that reaches the arithmetic coder goes through
//! [`quantize`], so the rule implemented here is part of the container
//! format: encoder and decoder must derive bit-identical integer masses from
//! identical model outputs.

use crate::error::{Error, Result};

/// PMF precision used for byte-sized alphabets.
pub const DEFAULT_PRECISION: u32 = 16;

/// PMF precision used for large (token) alphabets.
pub const WIDE_PRECISION: u32 = 20;

/// Largest supported precision; keeps `range * cumulative` inside 64 bits.
pub const MAX_PRECISION: u32 = 24;

/// Sum tolerance accepted from model outputs before quantization.
pub const SUM_TOLERANCE: f64 = 1e-6;

const FIXED_POINT_SCALE: f64 = (1u64 << 52) as f64;

/// PMF precision for an alphabet: 16 bits up to 4096 symbols, 20 bits beyond.
pub fn precision_for(alphabet_size: usize) -> u32 {
    if alphabet_size > 4096 {
        WIDE_PRECISION
    } else {
        DEFAULT_PRECISION
    }
}

/// Smallest precision that leaves every symbol at least a little headroom.
pub fn min_precision(alphabet_size: usize) -> u32 {
    let bits = usize::BITS - (alphabet_size.max(1) - 1).leading_zeros();
    bits + 2
}

/// A fixed-point probability mass function. `cumulative[0] = 0`,
/// `cumulative[n] = 2^precision` and every symbol has non-zero mass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pmf {
    cumulative: Vec<u32>,
    precision: u32,
}

impl Pmf {
    pub fn from_masses(masses: &[u32], precision: u32) -> Result<Self> {
        if precision > MAX_PRECISION {
            return Err(Error::Precision {
                bits: precision,
                alphabet: masses.len(),
            });
        }
        let mut cumulative = Vec::with_capacity(masses.len() + 1);
        let mut acc = 0u64;
        cumulative.push(0);
        for &m in masses {
            if m == 0 {
                return Err(Error::InvalidDistribution("zero mass".into()));
            }
            acc += u64::from(m);
            cumulative.push(acc.min(u64::from(u32::MAX)) as u32);
        }
        if acc != 1u64 << precision {
            return Err(Error::InvalidDistribution(format!(
                "masses sum to {acc}, expected 2^{precision}"
            )));
        }
        Ok(Pmf {
            cumulative,
            precision,
        })
    }

    pub fn uniform(alphabet_size: usize, precision: u32) -> Result<Self> {
        let probs = vec![1.0 / alphabet_size as f64; alphabet_size];
        quantize(&probs, precision)
    }

    pub fn alphabet_size(&self) -> usize {
        self.cumulative.len() - 1
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn total(&self) -> u32 {
        1 << self.precision
    }

    pub fn cumulative(&self) -> &[u32] {
        &self.cumulative
    }

    #[inline]
    pub fn range(&self, symbol: usize) -> (u32, u32) {
        (self.cumulative[symbol], self.cumulative[symbol + 1])
    }

    #[inline]
    pub fn mass(&self, symbol: usize) -> u32 {
        self.cumulative[symbol + 1] - self.cumulative[symbol]
    }

    pub fn masses(&self) -> impl Iterator<Item = u32> + '_ {
        self.cumulative.windows(2).map(|w| w[1] - w[0])
    }

    /// Symbol whose cumulative range contains `target` (`target < total`).
    #[inline]
    pub fn symbol_for(&self, target: u32) -> usize {
        // partition_point yields the first index with cumulative > target.
        self.cumulative.partition_point(|&c| c <= target) - 1
    }

    pub fn probability(&self, symbol: usize) -> f64 {
        f64::from(self.mass(symbol)) / f64::from(self.total())
    }

    /// Ideal code length of `symbol` in bits under this PMF.
    pub fn code_length(&self, symbol: usize) -> f64 {
        f64::from(self.precision) - f64::from(self.mass(symbol)).log2()
    }
}

/// Quantizes a real-valued distribution; see [`Quantizer::quantize_into`].
pub fn quantize(probabilities: &[f64], precision: u32) -> Result<Pmf> {
    let mut pmf = Pmf {
        cumulative: Vec::new(),
        precision,
    };
    Quantizer::default().quantize_into(probabilities, precision, &mut pmf)?;
    Ok(pmf)
}

/// Reusable scratch space for quantization in coding loops.
#[derive(Default)]
pub struct Quantizer {
    fixed: Vec<u64>,
    remainders: Vec<u64>,
    candidates: Vec<u64>,
    buckets: Vec<u32>,
    masses: Vec<u32>,
}

impl Quantizer {
    /// Quantizes `probabilities` to integer masses summing to `2^precision`.
    ///
    /// Each probability is first converted to 52-bit fixed point with
    /// round-half-to-even. With `S` the sum of the fixed-point values and
    /// `M = 2^precision - n`, symbol `i` gets `floor(v_i * M / S) + 1`; the
    /// leftover units go one each to the largest remainders, lower index
    /// first on ties. When the inputs sum to exactly one this is
    /// `floor(p_i * M) + 1`.
    pub fn quantize_into(
        &mut self,
        probabilities: &[f64],
        precision: u32,
        out: &mut Pmf,
    ) -> Result<()> {
        let n = probabilities.len();
        if n == 0 {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        if precision < min_precision(n) || precision > MAX_PRECISION {
            return Err(Error::Precision {
                bits: precision,
                alphabet: n,
            });
        }

        self.fixed.resize(n, 0);
        let mut sum = 0.0f64;
        let mut fixed_sum = 0u64;
        let mut valid = true;
        for (slot, &p) in self.fixed.iter_mut().zip(probabilities) {
            valid &= (0.0..f64::INFINITY).contains(&p);
            sum += p;
            // Integral and below 2^63, so the i64 conversion is exact.
            let v = round_ties_even(p * FIXED_POINT_SCALE) as i64 as u64;
            fixed_sum = fixed_sum.wrapping_add(v);
            *slot = v;
        }
        if !valid {
            let bad = probabilities.iter().find(|p| !(**p >= 0.0 && p.is_finite()));
            return Err(Error::InvalidDistribution(format!("bad probability {}", bad.expect("one is bad"))));
        }
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {sum}"
            )));
        }

        let spread = (1u64 << precision) - n as u64;
        let divisor = fixed_sum;
        let estimate = spread as f64 / divisor as f64;
        self.remainders.resize(n, 0);
        self.masses.resize(n, 0);
        let mut assigned = 0u64;
        for ((&v, mass), remainder) in self.fixed.iter().zip(&mut self.masses).zip(&mut self.remainders) {
            let (q, r) = exact_div_rem(v, spread, divisor, estimate);
            assigned += q;
            *mass = q as u32 + 1;
            *remainder = r;
        }

        let residual = spread - assigned;
        debug_assert!(residual < n as u64);
        if residual > 0 {
            // Every remainder above the k-th largest gets a unit; the rest go
            // to the lowest indices holding exactly that remainder.
            let k = residual as usize;
            let (threshold, mut level) =
                kth_largest(&self.remainders, &mut self.candidates, &mut self.buckets, k);
            for (mass, &r) in self.masses.iter_mut().zip(&self.remainders) {
                if r > threshold {
                    *mass += 1;
                } else if r == threshold && level > 0 {
                    *mass += 1;
                    level -= 1;
                }
            }
        }

        out.precision = precision;
        out.cumulative.resize(n + 1, 0);
        out.cumulative[0] = 0;
        let mut acc = 0u32;
        for (slot, &m) in out.cumulative[1..].iter_mut().zip(&self.masses) {
            acc += m;
            *slot = acc;
        }
        debug_assert_eq!(u64::from(acc), 1u64 << precision);
        Ok(())
    }
}

/// The `k`-th largest of `values` and how many copies of it belong among
/// the `k` largest. Radix selection on the spread of the remaining
/// candidates, which ends as soon as they are all equal.
fn kth_largest(values: &[u64], candidates: &mut Vec<u64>, buckets: &mut Vec<u32>, k: usize) -> (u64, usize) {
    const BUCKET_BITS: u32 = 8;
    const SMALL: usize = 16;
    debug_assert!(0 < k && k <= values.len());
    candidates.clear();
    candidates.extend_from_slice(values);
    // The answer is the `wanted`-th largest of `candidates`.
    let mut wanted = k;
    loop {
        let (min, max) = candidates
            .iter()
            .fold((u64::MAX, 0), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if min == max {
            return (min, wanted);
        }
        if candidates.len() <= SMALL {
            let len = candidates.len();
            let (_, &mut threshold, larger) = candidates.select_nth_unstable(len - wanted);
            let larger = larger.iter().filter(|&&v| v > threshold).count();
            return (threshold, wanted - larger);
        }
        let shift = (u64::BITS - (max - min).leading_zeros()).saturating_sub(BUCKET_BITS);
        buckets.clear();
        buckets.resize(1 << BUCKET_BITS, 0);
        for &v in candidates.iter() {
            buckets[((v - min) >> shift) as usize] += 1;
        }
        let mut cut = 0u64;
        for b in (0..buckets.len()).rev() {
            let count = buckets[b] as usize;
            if count >= wanted {
                cut = b as u64;
                break;
            }
            wanted -= count;
        }
        candidates.retain(|&v| (v - min) >> shift == cut);
    }
}

/// Same as `f64::round_ties_even` for non-negative finite `x`, without the
/// libm call on targets lacking a rounding instruction.
#[inline]
fn round_ties_even(x: f64) -> f64 {
    if x >= FIXED_POINT_SCALE {
        // Already integral.
        x
    } else {
        // Below 2^52 the sum's ulp is 1, so the addition rounds to nearest
        // even and the subtraction is exact.
        (x + FIXED_POINT_SCALE) - FIXED_POINT_SCALE
    }
}

/// `(v * spread) / divisor` and its remainder, exactly. `estimate` is
/// `spread / divisor` in floating point and is off by at most one unit;
/// the remainder is computed modulo 2^64, where the true value of any
/// candidate within a few units of the quotient is representable.
#[inline]
fn exact_div_rem(v: u64, spread: u64, divisor: u64, estimate: f64) -> (u64, u64) {
    let mut q = (v as i64 as f64 * estimate) as i64 as u64;
    let mut r = v.wrapping_mul(spread).wrapping_sub(q.wrapping_mul(divisor)) as i64;
    while r < 0 {
        q -= 1;
        r += divisor as i64;
    }
    while r as u64 >= divisor {
        q += 1;
        r -= divisor as i64;
    }
    (q, r as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_matches_std() {
        let scale = FIXED_POINT_SCALE;
        for x in [0.0, 0.5, 1.5, 2.5, 3.49999, 1e-300, scale - 0.5, scale - 1.5, scale, scale * 1.5, 12345.5] {
            assert_eq!(round_ties_even(x), x.round_ties_even(), "{x}");
        }
    }

    #[test]
    fn uniform_four_symbols() {
        let pmf = quantize(&[0.25; 4], 4).unwrap();
        assert_eq!(pmf.cumulative(), &[0, 4, 8, 12, 16]);
    }

    #[test]
    fn fig1_model_quantized() {
        // Hand evaluation with exact decimals, M = 65536 - 3 = 65533:
        //   0.45 M = 29489.85, 0.30 M = 19659.9, 0.25 M = 16383.25
        //   floors + 1 = 29490, 19660, 16384 (sum 65534), two units left over
        //   go to remainders .9 (I) and .85 (A).
        let pmf = quantize(&[0.45, 0.3, 0.25], 16).unwrap();
        assert_eq!(pmf.cumulative(), &[0, 29491, 49152, 65536]);
    }

    #[test]
    fn point_mass_over_bytes() {
        let mut probs = vec![0.0; 256];
        probs[0] = 1.0;
        let pmf = quantize(&probs, 16).unwrap();
        assert_eq!(pmf.mass(0), 65536 - 255);
        assert!((1..256).all(|s| pmf.mass(s) == 1));
    }

    #[test]
    fn rejects_negative_and_unnormalized() {
        assert!(matches!(
            quantize(&[1.5, -0.5], 16),
            Err(Error::InvalidDistribution(_))
        ));
        assert!(matches!(
            quantize(&[0.5, 0.4], 16),
            Err(Error::InvalidDistribution(_))
        ));
        assert!(matches!(
            quantize(&[f64::NAN, 1.0], 16),
            Err(Error::InvalidDistribution(_))
        ));
    }

    #[test]
    fn rejects_small_precision() {
        // 256 symbols need at least 8 + 2 bits.
        let probs = vec![1.0 / 256.0; 256];
        assert!(matches!(quantize(&probs, 9), Err(Error::Precision { .. })));
        assert!(quantize(&probs, 10).is_ok());
    }

    #[test]
    fn tolerates_slightly_unnormalized_input() {
        let probs = [0.5 + 4e-7, 0.5];
        let pmf = quantize(&probs, 20).unwrap();
        assert_eq!(pmf.cumulative()[2], 1 << 20);
    }

    #[test]
    fn symbol_lookup_matches_ranges() {
        let pmf = quantize(&[0.1, 0.2, 0.3, 0.4], 12).unwrap();
        for s in 0..4 {
            let (lo, hi) = pmf.range(s);
            assert_eq!(pmf.symbol_for(lo), s);
            assert_eq!(pmf.symbol_for(hi - 1), s);
        }
    }

    #[test]
    fn min_precision_values() {
        assert_eq!(min_precision(2), 3);
        assert_eq!(min_precision(3), 4);
        assert_eq!(min_precision(256), 10);
        assert_eq!(min_precision(257), 11);
    }

    /// The rule as documented, with 128-bit division and a full sort.
    fn reference_masses(probabilities: &[f64], precision: u32) -> Vec<u32> {
        let n = probabilities.len();
        let fixed: Vec<u128> = probabilities
            .iter()
            .map(|p| (p * 2f64.powi(52)).round_ties_even() as u128)
            .collect();
        let sum: u128 = fixed.iter().sum();
        let spread = (1u128 << precision) - n as u128;
        let mut masses: Vec<u32> = fixed.iter().map(|v| (v * spread / sum) as u32 + 1).collect();
        let assigned: u128 = fixed.iter().map(|v| v * spread / sum).sum();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| ((fixed[b] * spread) % sum).cmp(&((fixed[a] * spread) % sum)).then(a.cmp(&b)));
        for &i in &order[..(spread - assigned) as usize] {
            masses[i] += 1;
        }
        masses
    }

    fn distribution(weights: Vec<f64>) -> Vec<f64> {
        let total: f64 = weights.iter().sum();
        weights.into_iter().map(|w| w / total).collect()
    }

    fn weights(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(
            prop_oneof![3 => 0.0..1.0f64, 1 => Just(0.0), 1 => (0.0..1.0f64).prop_map(|x| x.powi(12))],
            2..max_len,
        )
        .prop_filter("some weight", |w| w.iter().sum::<f64>() > 1e-9)
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn agrees_with_the_reference(w in weights(600), precision in 12u32..=20) {
            let probs = distribution(w);
            prop_assume!(precision >= min_precision(probs.len()));
            let pmf = quantize(&probs, precision).unwrap();
            prop_assert_eq!(pmf.masses().collect::<Vec<_>>(), reference_masses(&probs, precision));
        }

        #[test]
        fn ties_go_to_the_lower_index(n in 2usize..300, extra in 0usize..5) {
            let mut probs = vec![1.0 / n as f64; n];
            if extra > 0 && n > extra {
                probs[0] += 1e-9;
                probs[extra] -= 1e-9;
            }
            let pmf = quantize(&probs, 16).unwrap();
            prop_assert_eq!(pmf.masses().collect::<Vec<_>>(), reference_masses(&probs, 16));
        }

        #[test]
        fn kth_largest_matches_sorting(
            values in prop::collection::vec(prop_oneof![0u64..4, any::<u64>(), (0u64..8).prop_map(|s| s << 40)], 1..400),
            pick in any::<prop::sample::Index>(),
        ) {
            let k = pick.index(values.len()) + 1;
            let mut sorted = values.clone();
            sorted.sort_unstable_by(|a, b| b.cmp(a));
            let threshold = sorted[k - 1];
            let copies = sorted[..k].iter().filter(|&&v| v == threshold).count();
            prop_assert_eq!(kth_largest(&values, &mut Vec::new(), &mut Vec::new(), k), (threshold, copies));
        }
    }

    #[test]
    fn wide_alphabets_agree_with_the_reference() {
        let probs = distribution((0..5000).map(|i| 1.0 + (i % 7) as f64 + 1.0 / (1.0 + i as f64)).collect());
        let pmf = quantize(&probs, WIDE_PRECISION).unwrap();
        assert_eq!(pmf.masses().collect::<Vec<_>>(), reference_masses(&probs, WIDE_PRECISION));
    }
}
