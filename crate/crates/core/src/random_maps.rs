//! Deterministic sampling of uniform random maps `[n] -> [n]`.
//!
//! Every trial owns its generator, derived from `(master_seed, stream_index)`:
//!
//! 1. `mixed = mix64(master_seed ^ stream_index)`, where `mix64` is the
//!    SplitMix64 finalizer (Stafford "Mix13": xor-shift 30, multiply by
//!    `0xbf58476d1ce4e5b9`, xor-shift 27, multiply by `0x94d049bb133111eb`,
//!    xor-shift 31).
//! 2. The generator is xoshiro256++ seeded with `seed_from_u64(mixed)`, which
//!    expands the 64-bit value into the 256-bit state with SplitMix64.
//!
//! Bounded integers use Lemire's multiply-shift with rejection on 64-bit
//! words: draw `x`, form the 128-bit product `m = x * range`; if the low word
//! of `m` is below `(2^64 - range) mod range` redraw, else return `m >> 64`.
//! A map is `n` such draws, element 0 first.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::partition::{
    meet_raw, partition_from_map, union_map_fibers, DisjointSets, MeetScratch, SetPartition,
};

/// SplitMix64 output finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        SeedSpec {
            master_seed,
            stream_index,
        }
    }
}

/// Per-trial generator state.
#[derive(Debug, Clone)]
pub struct TrialRng(Xoshiro256PlusPlus);

impl TrialRng {
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform integer in `[0, range)`; `range` must be positive.
    #[inline]
    pub fn bounded(&mut self, range: u64) -> u64 {
        debug_assert!(range > 0);
        let mut m = self.next_u64() as u128 * range as u128;
        if (m as u64) < range {
            let threshold = range.wrapping_neg() % range;
            while (m as u64) < threshold {
                m = self.next_u64() as u128 * range as u128;
            }
        }
        (m >> 64) as u64
    }
}

pub fn derive_trial_rng(seed: SeedSpec) -> TrialRng {
    let mixed = mix64(seed.master_seed ^ seed.stream_index);
    TrialRng(Xoshiro256PlusPlus::seed_from_u64(mixed))
}

/// One map `[n] -> [n]`, values 0-indexed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapSample {
    values: Vec<u32>,
}

impl MapSample {
    pub fn new(values: Vec<u32>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return input("empty map");
        }
        if values.iter().any(|&v| v as usize >= n) {
            return input(format!("map value outside [0, {n})"));
        }
        Ok(MapSample { values })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn partition(&self) -> SetPartition {
        partition_from_map(&self.values).expect("map sample is valid by construction")
    }
}

impl AsRef<[u32]> for MapSample {
    fn as_ref(&self) -> &[u32] {
        &self.values
    }
}

/// Overwrites `buf` with a uniform map of size `buf.len()`.
#[inline]
pub fn fill_uniform_map(buf: &mut [u32], rng: &mut TrialRng) {
    let n = buf.len() as u64;
    for v in buf.iter_mut() {
        *v = rng.bounded(n) as u32;
    }
}

pub fn sample_uniform_map(n: usize, rng: &mut TrialRng) -> Result<MapSample> {
    if n == 0 {
        return input("map size must be at least 1");
    }
    if n > u32::MAX as usize / 2 {
        return input(format!("map size {n} too large"));
    }
    let mut values = vec![0u32; n];
    fill_uniform_map(&mut values, rng);
    Ok(MapSample { values })
}

fn check_nt(n: usize, t: usize) -> Result<()> {
    if n == 0 {
        return input("n must be at least 1");
    }
    if t == 0 {
        return input("t must be at least 1");
    }
    Ok(())
}

/// Scratch buffers for repeated infimum trials of one size.
#[derive(Debug, Default, Clone)]
pub struct InfWorkspace {
    map: Vec<u32>,
    acc: Vec<u32>,
    tmp: Vec<u32>,
    meet: MeetScratch,
}

impl InfWorkspace {
    /// Meet of `t` fresh map partitions. Returns raw labels (not canonical)
    /// and the number of blocks, which also bounds the labels. Draws exactly `t * n` values.
    pub(crate) fn sample_inf(&mut self, n: usize, t: usize, rng: &mut TrialRng) -> (&[u32], usize) {
        self.acc.clear();
        self.acc.resize(n, 0);
        fill_uniform_map(&mut self.acc, rng);
        let mut bound = n;
        self.map.resize(n, 0);
        for _ in 1..t {
            fill_uniform_map(&mut self.map, rng);
            bound = meet_raw(&self.acc, bound, &self.map, n, &mut self.tmp, &mut self.meet);
            std::mem::swap(&mut self.acc, &mut self.tmp);
        }
        if t == 1 {
            // compact the map values so the count is the number of blocks
            self.map.iter_mut().for_each(|v| *v = 0);
            bound = meet_raw(&self.acc, n, &self.map, 1, &mut self.tmp, &mut self.meet);
            std::mem::swap(&mut self.acc, &mut self.tmp);
        }
        (&self.acc, bound)
    }
}

/// Scratch buffers for repeated supremum trials of one size.
#[derive(Debug, Clone)]
pub struct SupWorkspace {
    map: Vec<u32>,
    head: Vec<u32>,
    pub(crate) dsu: DisjointSets,
}

impl SupWorkspace {
    pub fn new(n: usize) -> Self {
        SupWorkspace {
            map: vec![0; n],
            head: vec![0; n],
            dsu: DisjointSets::new(n),
        }
    }

    /// Unions the fibers of one fresh map into the current forest.
    pub(crate) fn absorb_map(&mut self, rng: &mut TrialRng) {
        fill_uniform_map(&mut self.map, rng);
        union_map_fibers(&mut self.dsu, &mut self.head, &self.map);
    }

    /// Supremum of `t` fresh map partitions, left in `self.dsu`.
    pub(crate) fn sample_sup(&mut self, t: usize, rng: &mut TrialRng) {
        self.dsu.reset();
        for _ in 0..t {
            self.absorb_map(rng);
        }
    }
}

pub fn inf_of_random_maps(n: usize, t: usize, rng: &mut TrialRng) -> Result<SetPartition> {
    check_nt(n, t)?;
    let mut ws = InfWorkspace::default();
    let (raw, bound) = ws.sample_inf(n, t, rng);
    let (labels, blocks) = crate::partition::canonicalize(raw, bound);
    Ok(SetPartition::from_canonical(labels, blocks))
}

pub fn sup_of_random_maps(n: usize, t: usize, rng: &mut TrialRng) -> Result<SetPartition> {
    check_nt(n, t)?;
    let mut ws = SupWorkspace::new(n);
    ws.sample_sup(t, rng);
    let blocks = ws.dsu.components();
    Ok(SetPartition::from_canonical(ws.dsu.labels(), blocks))
}
