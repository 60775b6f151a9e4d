//! k-free partitions: no union of blocks has exactly `k` elements.

use serde::{Deserialize, Serialize};

use super::{block_stats, SetPartition};
use crate::error::{input, Error, Result};

/// Size guard for [`is_k_free`]; the Monte Carlo paths never need k-free queries.
pub const DEFAULT_KFREE_LIMIT: usize = 65_536;

/// Subset sums of block sizes, as a bitset over `0..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KfreeSpectrum {
    n: usize,
    words: Vec<u64>,
}

impl KfreeSpectrum {
    fn empty(n: usize) -> Self {
        let mut words = vec![0u64; n / 64 + 1];
        words[0] = 1;
        KfreeSpectrum { n, words }
    }

    /// `bits |= bits << shift`, truncated to `0..=n`.
    fn or_shifted(&mut self, shift: usize) {
        let word_shift = shift / 64;
        let bit_shift = shift % 64;
        let len = self.words.len();
        for i in (word_shift..len).rev() {
            let src = i - word_shift;
            let mut v = self.words[src] << bit_shift;
            if bit_shift > 0 && src > 0 {
                v |= self.words[src - 1] >> (64 - bit_shift);
            }
            self.words[i] |= v;
        }
        let tail = (self.n + 1) % 64;
        if tail != 0 {
            self.words[len - 1] &= (1u64 << tail) - 1;
        }
    }

    pub fn from_sizes(n: usize, sizes: &[usize]) -> Self {
        let mut spec = KfreeSpectrum::empty(n);
        let mut sorted = sizes.to_vec();
        sorted.sort_unstable();
        let mut i = 0;
        while i < sorted.len() {
            let size = sorted[i];
            let mut mult = sorted[i..].iter().take_while(|&&s| s == size).count();
            i += mult;
            // binary decomposition of the multiplicity: 1, 2, 4, .., remainder
            let mut chunk = 1;
            while mult > 0 {
                let take = chunk.min(mult);
                spec.or_shifted(take * size);
                mult -= take;
                chunk *= 2;
            }
        }
        spec
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Whether `s` is a sum of sizes of some set of blocks (0 is the empty union).
    pub fn contains(&self, s: usize) -> bool {
        s <= self.n && self.words[s / 64] >> (s % 64) & 1 == 1
    }

    /// Achievable sums in `1..=n`, ascending.
    pub fn sums(&self) -> Vec<usize> {
        (1..=self.n).filter(|&s| self.contains(s)).collect()
    }

    /// True when no achievable sum lies in `[a, b]`.
    pub fn free_on(&self, a: usize, b: usize) -> bool {
        (a..=b.min(self.n)).all(|s| !self.contains(s))
    }
}

pub fn kfree_spectrum(p: &SetPartition) -> KfreeSpectrum {
    KfreeSpectrum::from_sizes(p.n(), &p.block_sizes())
}

pub fn is_k_free(p: &SetPartition, k: usize) -> Result<bool> {
    is_k_free_with_limit(p, k, DEFAULT_KFREE_LIMIT)
}

pub fn is_k_free_with_limit(p: &SetPartition, k: usize, limit: usize) -> Result<bool> {
    let n = p.n();
    if k == 0 || k >= n {
        return input(format!("k-free query needs 0 < k < n, got k = {k}, n = {n}"));
    }
    if n > limit {
        return Err(Error::Capacity(format!(
            "k-free query on n = {n} exceeds the limit {limit}"
        )));
    }
    Ok(!kfree_spectrum(p).contains(k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LemmaOutcome {
    NotApplicable,
    Pass,
    Fail,
}

impl LemmaOutcome {
    fn check(hypothesis: bool, conclusion: bool) -> Self {
        match (hypothesis, conclusion) {
            (false, _) => LemmaOutcome::NotApplicable,
            (true, true) => LemmaOutcome::Pass,
            (true, false) => LemmaOutcome::Fail,
        }
    }
}

/// Outcomes of the four k-free block-size properties for one `(p, a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KfreeReport {
    /// k-free on `[a, b]` implies a block of size at least `b - a`.
    pub wide_gap: LemmaOutcome,
    /// k-free on `[a, b]` with `2a <= b` implies a block of size at least `b`.
    pub doubled_gap: LemmaOutcome,
    /// `h` singletons and `b`-free with `b > h` implies a block of size at least `h`.
    pub singletons: LemmaOutcome,
    /// k-free on `[a, b]` with `2a <= b`: blocks of size at least `a` cover at least `n - a`.
    pub big_cover: LemmaOutcome,
}

impl KfreeReport {
    pub fn outcomes(&self) -> [LemmaOutcome; 4] {
        [self.wide_gap, self.doubled_gap, self.singletons, self.big_cover]
    }

    pub fn failures(&self) -> usize {
        self.outcomes()
            .iter()
            .filter(|&&o| o == LemmaOutcome::Fail)
            .count()
    }
}

pub fn verify_kfree_properties(p: &SetPartition, a: usize, b: usize) -> Result<KfreeReport> {
    verify_kfree_with_spectrum(p, &p.block_sizes(), &kfree_spectrum(p), a, b)
}

/// Same as [`verify_kfree_properties`] with the block sizes and spectrum
/// precomputed, for scans over many `(a, b)`.
pub fn verify_kfree_with_spectrum(
    p: &SetPartition,
    sizes: &[usize],
    spectrum: &KfreeSpectrum,
    a: usize,
    b: usize,
) -> Result<KfreeReport> {
    let n = p.n();
    if !(1 <= a && a < b && b < n) {
        return input(format!("need 1 <= a < b < n, got a = {a}, b = {b}, n = {n}"));
    }
    let largest = sizes.iter().copied().max().unwrap_or(0);
    let free = spectrum.free_on(a, b);
    let h = sizes.iter().filter(|&&s| s == 1).count();
    let big_union: usize = sizes.iter().filter(|&&s| s >= a).sum();
    debug_assert_eq!(h, block_stats(p).singletons);
    Ok(KfreeReport {
        wide_gap: LemmaOutcome::check(free, largest >= b - a),
        doubled_gap: LemmaOutcome::check(free && 2 * a <= b, largest >= b),
        singletons: LemmaOutcome::check(!spectrum.contains(b) && b > h, largest >= h),
        big_cover: LemmaOutcome::check(free && 2 * a <= b, big_union + a >= n),
    })
}
