//! Set partitions of `{0, .., n-1}` and the lattice operations on them.
//!
//! Elements are 0-indexed: element `i` here is element `i + 1` of the
//! 1-indexed ground set `{1, .., n}`. The text form of a partition is the
//! comma-separated label array, e.g. `"0,0,1"` for `{{0,1},{2}}`.

mod dsu;
mod enumerate;
mod kfree;

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};

pub use dsu::DisjointSets;
pub use enumerate::{all_partitions, AllPartitions};
pub use kfree::{
    is_k_free, is_k_free_with_limit, kfree_spectrum, verify_kfree_properties,
    verify_kfree_with_spectrum, KfreeReport, KfreeSpectrum, LemmaOutcome, DEFAULT_KFREE_LIMIT,
};

const UNSET: u32 = u32::MAX;

/// A partition of `{0, .., n-1}` in canonical first-occurrence labeling.
///
/// `labels[0] == 0` and each label is at most one more than the maximum of
/// the labels before it, so two partitions are equal iff their label arrays are.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct SetPartition {
    labels: Vec<u32>,
    num_blocks: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockStats {
    pub num_blocks: usize,
    /// Size of the largest block (`L`).
    pub largest_block: usize,
    /// Number of one-element blocks (`M`).
    pub singletons: usize,
    /// Block size -> number of blocks of that size.
    pub size_histogram: BTreeMap<usize, usize>,
}

/// Relabels `raw` (values < `bound`) into first-occurrence order.
/// Returns the canonical labels and the number of distinct labels.
pub(crate) fn canonicalize(raw: &[u32], bound: usize) -> (Vec<u32>, usize) {
    let mut fresh = vec![UNSET; bound];
    let mut next = 0u32;
    let labels = raw
        .iter()
        .map(|&r| {
            let slot = &mut fresh[r as usize];
            if *slot == UNSET {
                *slot = next;
                next += 1;
            }
            *slot
        })
        .collect();
    (labels, next as usize)
}

/// Meet of two labelings given as raw label arrays with label bounds.
///
/// Elements are bucketed by their `a` label; inside a bucket each distinct
/// `b` label receives a fresh id. Output labels are raw (not canonical) and
/// bounded by the returned count.
pub(crate) fn meet_raw(
    a: &[u32],
    a_bound: usize,
    b: &[u32],
    b_bound: usize,
    out: &mut Vec<u32>,
    scratch: &mut MeetScratch,
) -> usize {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len();
    scratch.prepare(a_bound, b_bound, n);
    let MeetScratch {
        start,
        order,
        slot,
        stamp,
    } = scratch;
    for &x in a {
        start[x as usize + 1] += 1;
    }
    for i in 0..a_bound {
        start[i + 1] += start[i];
    }
    for (i, &x) in a.iter().enumerate() {
        let pos = &mut start[x as usize];
        order[*pos as usize] = i as u32;
        *pos += 1;
    }
    // After the scatter, start[x] is the end of bucket x; bucket x starts at
    // the end of bucket x - 1.
    out.clear();
    out.resize(n, 0);
    let mut next = 0u32;
    let mut begin = 0usize;
    for bucket in 0..a_bound {
        let end = start[bucket] as usize;
        for &i in &order[begin..end] {
            let q = b[i as usize] as usize;
            if stamp[q] != bucket as u32 {
                stamp[q] = bucket as u32;
                slot[q] = next;
                next += 1;
            }
            out[i as usize] = slot[q];
        }
        begin = end;
    }
    next as usize
}

/// Reusable buffers for [`meet_raw`].
#[derive(Debug, Default, Clone)]
pub(crate) struct MeetScratch {
    start: Vec<u32>,
    order: Vec<u32>,
    slot: Vec<u32>,
    stamp: Vec<u32>,
}

impl MeetScratch {
    fn prepare(&mut self, a_bound: usize, b_bound: usize, n: usize) {
        self.start.clear();
        self.start.resize(a_bound + 1, 0);
        self.order.clear();
        self.order.resize(n, 0);
        self.slot.clear();
        self.slot.resize(b_bound, 0);
        self.stamp.clear();
        self.stamp.resize(b_bound, UNSET);
    }
}

fn check_map(n: usize, map: &[u32]) -> Result<()> {
    if map.len() != n {
        return input(format!("map has length {}, expected {}", map.len(), n));
    }
    if let Some((i, &v)) = map.iter().enumerate().find(|&(_, &v)| v as usize >= n) {
        return input(format!("map value {v} at position {i} is outside [0, {n})"));
    }
    Ok(())
}

fn same_size(p: &SetPartition, q: &SetPartition) -> Result<()> {
    if p.n() != q.n() {
        return input(format!(
            "partitions of different ground sets ({} vs {})",
            p.n(),
            q.n()
        ));
    }
    Ok(())
}

impl SetPartition {
    /// Builds a partition from arbitrary block labels; equal labels share a block.
    pub fn from_labels(labels: &[u32]) -> Result<Self> {
        if labels.is_empty() {
            return input("partition of an empty ground set");
        }
        let bound = *labels.iter().max().unwrap() as usize + 1;
        if bound > labels.len().max(1) * 4 + 1024 {
            // sparse labels: compress through a map instead of a dense table
            let mut seen = std::collections::HashMap::new();
            let mut out = Vec::with_capacity(labels.len());
            for &l in labels {
                let next = seen.len() as u32;
                out.push(*seen.entry(l).or_insert(next));
            }
            let num_blocks = seen.len();
            return Ok(SetPartition {
                labels: out,
                num_blocks,
            });
        }
        let (labels, num_blocks) = canonicalize(labels, bound);
        Ok(SetPartition { labels, num_blocks })
    }

    /// Wraps labels that are already canonical.
    pub(crate) fn from_canonical(labels: Vec<u32>, num_blocks: usize) -> Self {
        debug_assert!(is_canonical(&labels));
        SetPartition { labels, num_blocks }
    }

    /// All-singletons partition (`p_min`).
    pub fn finest(n: usize) -> Result<Self> {
        if n == 0 {
            return input("partition of an empty ground set");
        }
        Ok(SetPartition {
            labels: (0..n as u32).collect(),
            num_blocks: n,
        })
    }

    /// One-block partition (`p_max`).
    pub fn coarsest(n: usize) -> Result<Self> {
        if n == 0 {
            return input("partition of an empty ground set");
        }
        Ok(SetPartition {
            labels: vec![0; n],
            num_blocks: 1,
        })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn num_blocks(&self) -> usize {
        self.num_blocks
    }

    pub fn is_finest(&self) -> bool {
        self.num_blocks == self.n()
    }

    pub fn is_coarsest(&self) -> bool {
        self.num_blocks == 1
    }

    /// Blocks as sorted element lists, ordered by their smallest element.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.num_blocks];
        for (i, &l) in self.labels.iter().enumerate() {
            blocks[l as usize].push(i);
        }
        blocks
    }

    /// Block sizes indexed by block label.
    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.num_blocks];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }

    pub fn same_block(&self, i: usize, j: usize) -> bool {
        self.labels[i] == self.labels[j]
    }
}

fn is_canonical(labels: &[u32]) -> bool {
    let mut next = 0u32;
    for &l in labels {
        if l > next {
            return false;
        }
        if l == next {
            next += 1;
        }
    }
    true
}

impl TryFrom<Vec<u32>> for SetPartition {
    type Error = Error;

    fn try_from(labels: Vec<u32>) -> Result<Self> {
        SetPartition::from_labels(&labels)
    }
}

impl From<SetPartition> for Vec<u32> {
    fn from(p: SetPartition) -> Vec<u32> {
        p.labels
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.labels.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for SetPartition {
    type Err = Error;

    /// Parses a comma-separated label array. Labels need not be canonical.
    fn from_str(s: &str) -> Result<Self> {
        let labels = s
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<u32>()
                    .map_err(|e| Error::Input(format!("bad label {tok:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        SetPartition::from_labels(&labels)
    }
}

/// Partition into the non-empty preimages of `map`.
pub fn partition_from_map(map: &[u32]) -> Result<SetPartition> {
    let n = map.len();
    if n == 0 {
        return input("empty map");
    }
    check_map(n, map)?;
    let (labels, num_blocks) = canonicalize(map, n);
    Ok(SetPartition { labels, num_blocks })
}

/// Infimum: blocks are the non-empty pairwise intersections of blocks.
pub fn meet(p: &SetPartition, q: &SetPartition) -> Result<SetPartition> {
    same_size(p, q)?;
    let mut raw = Vec::new();
    let mut scratch = MeetScratch::default();
    let count = meet_raw(
        &p.labels,
        p.num_blocks,
        &q.labels,
        q.num_blocks,
        &mut raw,
        &mut scratch,
    );
    let (labels, num_blocks) = canonicalize(&raw, count);
    Ok(SetPartition { labels, num_blocks })
}

/// Supremum: the finest partition coarser than both.
pub fn join(p: &SetPartition, q: &SetPartition) -> Result<SetPartition> {
    same_size(p, q)?;
    join_all(&[p.clone(), q.clone()])
}

/// Supremum of a non-empty family of partitions of the same ground set.
pub fn join_all(parts: &[SetPartition]) -> Result<SetPartition> {
    let Some(first) = parts.first() else {
        return input("join of an empty family");
    };
    let n = first.n();
    let mut dsu = DisjointSets::new(n);
    let mut head = vec![UNSET; n];
    for p in parts {
        same_size(first, p)?;
        head[..p.num_blocks].iter_mut().for_each(|h| *h = UNSET);
        for (i, &l) in p.labels.iter().enumerate() {
            match head[l as usize] {
                UNSET => head[l as usize] = i as u32,
                h => {
                    dsu.union(i, h as usize);
                }
            }
        }
    }
    let num_blocks = dsu.components();
    Ok(SetPartition::from_canonical(dsu.labels(), num_blocks))
}

/// Merges the fibers of `map` into `dsu`. `head` must have length `n` and
/// is overwritten.
pub(crate) fn union_map_fibers(dsu: &mut DisjointSets, head: &mut [u32], map: &[u32]) {
    head.iter_mut().for_each(|h| *h = UNSET);
    for (i, &v) in map.iter().enumerate() {
        match head[v as usize] {
            UNSET => head[v as usize] = i as u32,
            h => {
                dsu.union(i, h as usize);
            }
        }
    }
}

/// Supremum of the map partitions of `maps` without building the
/// intermediate partitions. O(t n) union-find operations, O(n) memory.
pub fn join_streaming<M: AsRef<[u32]>>(n: usize, maps: &[M]) -> Result<SetPartition> {
    if n == 0 {
        return input("empty ground set");
    }
    if maps.is_empty() {
        return input("join of an empty family of maps");
    }
    let mut dsu = DisjointSets::new(n);
    let mut head = vec![UNSET; n];
    for map in maps {
        let map = map.as_ref();
        check_map(n, map)?;
        union_map_fibers(&mut dsu, &mut head, map);
    }
    let num_blocks = dsu.components();
    Ok(SetPartition::from_canonical(dsu.labels(), num_blocks))
}

/// `p ⪯ q`: every block of `p` lies inside a block of `q`.
pub fn refines(p: &SetPartition, q: &SetPartition) -> Result<bool> {
    same_size(p, q)?;
    let mut target = vec![UNSET; p.num_blocks];
    for (&pl, &ql) in p.labels.iter().zip(&q.labels) {
        let t = &mut target[pl as usize];
        if *t == UNSET {
            *t = ql;
        } else if *t != ql {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn block_stats(p: &SetPartition) -> BlockStats {
    let mut size_histogram = BTreeMap::new();
    for s in p.block_sizes() {
        *size_histogram.entry(s).or_insert(0) += 1;
    }
    BlockStats {
        num_blocks: p.num_blocks,
        largest_block: size_histogram.keys().next_back().copied().unwrap_or(0),
        singletons: size_histogram.get(&1).copied().unwrap_or(0),
        size_histogram,
    }
}

/// Connected components of the graph on `{0, .., n-1}` with an edge between
/// `i` and `j` whenever some map sends them to the same value.
///
/// Deliberately avoids union-find: adjacency lists plus breadth-first search,
/// so it can serve as an independent check on [`join_streaming`]. Fibers are
/// connected as cliques, so the cost is quadratic in fiber size.
pub fn graph_components_oracle<M: AsRef<[u32]>>(n: usize, maps: &[M]) -> Result<SetPartition> {
    if n == 0 {
        return input("empty ground set");
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for map in maps {
        let map = map.as_ref();
        check_map(n, map)?;
        let mut fibers: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, &v) in map.iter().enumerate() {
            fibers[v as usize].push(i);
        }
        for fiber in &fibers {
            for (a, &i) in fiber.iter().enumerate() {
                for &j in &fiber[a + 1..] {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
    }
    let mut labels = vec![UNSET; n];
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for s in 0..n {
        if labels[s] != UNSET {
            continue;
        }
        labels[s] = next;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if labels[w] == UNSET {
                    labels[w] = next;
                    queue.push_back(w);
                }
            }
        }
        next += 1;
    }
    Ok(SetPartition::from_canonical(labels, next as usize))
}
