//! Packed bit vectors used by the triplet spaces.
//!
//! Unused high bits of the last block are kept zero, so block-wise popcounts
//! need no tail masking.

/// A fixed-order bit vector packed into `u64` blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedBits {
    blocks: Vec<u64>,
    len: usize,
}

impl PackedBits {
    pub fn new() -> Self {
        PackedBits { blocks: Vec::new(), len: 0 }
    }

    pub fn with_capacity(bits: usize) -> Self {
        PackedBits { blocks: Vec::with_capacity(bits.div_ceil(64)), len: 0 }
    }

    /// All-zero vector of the given length.
    pub fn zeros(len: usize) -> Self {
        PackedBits { blocks: vec![0; len.div_ceil(64)], len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, bit: bool) {
        let slot = self.len / 64;
        if slot == self.blocks.len() {
            self.blocks.push(0);
        }
        if bit {
            self.blocks[slot] |= 1u64 << (self.len % 64);
        }
        self.len += 1;
    }

    pub fn get(&self, index: usize) -> bool {
        assert!(index < self.len, "bit index {index} out of range {}", self.len);
        self.blocks[index / 64] >> (index % 64) & 1 == 1
    }

    pub fn set(&mut self, index: usize, bit: bool) {
        assert!(index < self.len, "bit index {index} out of range {}", self.len);
        let mask = 1u64 << (index % 64);
        if bit {
            self.blocks[index / 64] |= mask;
        } else {
            self.blocks[index / 64] &= !mask;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    /// Hamming distance to `other`.
    pub fn xor_count(&self, other: &PackedBits) -> usize {
        assert_eq!(self.len, other.len, "length mismatch in xor_count");
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// Hamming distance to `other`, ignoring positions where `mask` is set.
    pub fn xor_count_masked(&self, other: &PackedBits, mask: &PackedBits) -> usize {
        assert_eq!(self.len, other.len, "length mismatch in xor_count_masked");
        assert_eq!(self.len, mask.len, "mask length mismatch in xor_count_masked");
        self.blocks
            .iter()
            .zip(&other.blocks)
            .zip(&mask.blocks)
            .map(|((a, b), m)| ((a ^ b) & !m).count_ones() as usize)
            .sum()
    }

    /// Number of positions set in `self | other`.
    pub fn union_count(&self, other: &PackedBits) -> usize {
        assert_eq!(self.len, other.len, "length mismatch in union_count");
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    /// Elementwise OR.
    pub fn union(&self, other: &PackedBits) -> PackedBits {
        assert_eq!(self.len, other.len, "length mismatch in union");
        PackedBits {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a | b).collect(),
            len: self.len,
        }
    }

    /// Bitwise complement (tail bits stay zero).
    pub fn complement(&self) -> PackedBits {
        let mut blocks: Vec<u64> = self.blocks.iter().map(|b| !b).collect();
        let tail = self.len % 64;
        if tail != 0 {
            if let Some(last) = blocks.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
        PackedBits { blocks, len: self.len }
    }

    /// Append all bits of `other`, preserving order. Used to assemble
    /// per-anchor chunks into one canonical vector.
    pub fn extend_bits(&mut self, other: &PackedBits) {
        for i in 0..other.len {
            self.push(other.get(i));
        }
    }
}

impl Default for PackedBits {
    fn default() -> Self {
        Self::new()
    }
}
