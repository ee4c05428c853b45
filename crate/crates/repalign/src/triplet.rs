//! Canonical triplet spaces.
//!
//! A triplet asks "is stimulus `i` closer to `j` than to `k`?". Fixing `j < k`
//! leaves `n(n-1)(n-2)/2` unique triplets; their answers, packed in a canonical
//! order, form an agent's triplet space. The canonical order is anchor-major:
//! all triplets anchored at stimulus 0 first, then anchor 1, and so on, with
//! the `(j, k)` pairs for each anchor enumerated lexicographically over the
//! indices excluding the anchor.
//!
//! Comparisons use exact `<` on distances. An exact tie yields bit 0 and a set
//! bit in the tie mask, so that downstream metrics can either count or exclude
//! tied positions.

use crate::agent::{pairwise_distances, Agent, DistanceMatrix};
use crate::bits::PackedBits;
use crate::error::{Error, Result};

/// Number of unique triplets over `n` stimuli: `n(n-1)(n-2)/2`.
pub fn triplet_count(n: usize) -> usize {
    n * n.saturating_sub(1) * n.saturating_sub(2) / 2
}

/// Number of `(j, k)` pairs per anchor: `(n-1)(n-2)/2`.
pub fn pairs_per_anchor(n: usize) -> usize {
    n.saturating_sub(1) * n.saturating_sub(2) / 2
}

/// Flat index of the canonical triplet `(i, j, k)` with `j < k`.
pub fn triplet_index(i: usize, j: usize, k: usize, n: usize) -> Result<usize> {
    if i >= n || j >= n || k >= n {
        return Err(Error::Contract(format!(
            "triplet ({i}, {j}, {k}) out of range for n = {n}"
        )));
    }
    if i == j || i == k || j == k {
        return Err(Error::Contract(format!("triplet indices ({i}, {j}, {k}) must be distinct")));
    }
    if j >= k {
        return Err(Error::Contract(format!("canonical triplet requires j < k, got ({j}, {k})")));
    }
    // Rank of j and k among the indices excluding i.
    let a = if j < i { j } else { j - 1 };
    let b = if k < i { k } else { k - 1 };
    let m = n - 1;
    let pair_rank = a * m - a * (a + 1) / 2 + (b - a - 1);
    Ok(i * pairs_per_anchor(n) + pair_rank)
}

/// Inverse of [`triplet_index`].
pub fn triplet_unindex(index: usize, n: usize) -> Result<(usize, usize, usize)> {
    let total = triplet_count(n);
    if index >= total {
        return Err(Error::Contract(format!(
            "triplet index {index} out of range {total} for n = {n}"
        )));
    }
    let per_anchor = pairs_per_anchor(n);
    let i = index / per_anchor;
    let mut rest = index % per_anchor;
    let m = n - 1;
    // Row a of the pair triangle holds m - 1 - a entries.
    let mut a = 0;
    while rest >= m - 1 - a {
        rest -= m - 1 - a;
        a += 1;
    }
    let b = a + 1 + rest;
    let j = if a < i { a } else { a + 1 };
    let k = if b < i { b } else { b + 1 };
    Ok((i, j, k))
}

/// The packed answers to every canonical triplet, plus a tie mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripletSpace {
    n: usize,
    bits: PackedBits,
    ties: PackedBits,
}

impl TripletSpace {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of triplets, `n(n-1)(n-2)/2`.
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &PackedBits {
        &self.bits
    }

    pub fn ties(&self) -> &PackedBits {
        &self.ties
    }

    /// Answer at a flat canonical index.
    pub fn get(&self, index: usize) -> bool {
        self.bits.get(index)
    }

    pub fn is_tie(&self, index: usize) -> bool {
        self.ties.get(index)
    }

    /// Answer for triplet `(i, j, k)` with `j < k`.
    pub fn bit(&self, i: usize, j: usize, k: usize) -> Result<bool> {
        Ok(self.bits.get(triplet_index(i, j, k, self.n)?))
    }

    pub fn n_ties(&self) -> usize {
        self.ties.count_ones()
    }

    /// Build directly from packed bits; lengths must match `n`.
    pub fn from_bits(n: usize, bits: PackedBits, ties: PackedBits) -> Result<TripletSpace> {
        let expect = triplet_count(n);
        if bits.len() != expect || ties.len() != expect {
            return Err(Error::Contract(format!(
                "bit vector length {} (ties {}) does not match n(n-1)(n-2)/2 = {expect}",
                bits.len(),
                ties.len()
            )));
        }
        Ok(TripletSpace { n, bits, ties })
    }
}

/// Bits and tie mask for one anchor, in canonical pair order.
fn anchor_bits(dm: &DistanceMatrix, i: usize) -> (PackedBits, PackedBits) {
    let n = dm.n();
    let mut bits = PackedBits::with_capacity(pairs_per_anchor(n));
    let mut ties = PackedBits::with_capacity(pairs_per_anchor(n));
    for j in 0..n {
        if j == i {
            continue;
        }
        let dij = dm.get(i, j);
        for k in (j + 1)..n {
            if k == i {
                continue;
            }
            let dik = dm.get(i, k);
            bits.push(dij < dik);
            ties.push(dij == dik);
        }
    }
    (bits, ties)
}

/// Triplet space of a distance matrix.
///
/// Assembled anchor by anchor; the per-anchor chunks are independent, so the
/// result is identical however the chunks are computed.
pub fn triplet_space_from_distances(dm: &DistanceMatrix) -> Result<TripletSpace> {
    let n = dm.n();
    if n < 3 {
        return Err(Error::Input(format!("triplet space requires n >= 3, got {n}")));
    }
    let mut bits = PackedBits::with_capacity(triplet_count(n));
    let mut ties = PackedBits::with_capacity(triplet_count(n));
    for i in 0..n {
        let (b, t) = anchor_bits(dm, i);
        bits.extend_bits(&b);
        ties.extend_bits(&t);
    }
    TripletSpace::from_bits(n, bits, ties)
}

/// Triplet space of an agent.
pub fn triplet_space(agent: &Agent) -> Result<TripletSpace> {
    if agent.n() < 3 {
        return Err(Error::Input(format!("triplet space requires n >= 3, got {}", agent.n())));
    }
    triplet_space_from_distances(&pairwise_distances(agent)?)
}
