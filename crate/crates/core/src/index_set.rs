use std::fmt;

use serde::{Serialize, Serializer};

const WORD: usize = 64;

/// A subset `I` of `{0, .., n-1}` stored as a fixed-width bit pattern.
///
/// Indices are 0-based internally; [`IndexSet::to_one_based`] and the
/// `Display`/`Serialize` impls use the 1-based convention of external I/O.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet {
    dim: usize,
    words: Vec<u64>,
}

impl IndexSet {
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            words: vec![0; dim.div_ceil(WORD)],
        }
    }

    pub fn full(dim: usize) -> Self {
        let mut set = Self::empty(dim);
        for (w, word) in set.words.iter_mut().enumerate() {
            let bits = (dim - w * WORD).min(WORD);
            *word = if bits == WORD { u64::MAX } else { (1u64 << bits) - 1 };
        }
        set
    }

    /// Builds a set from a bit mask; bit `k` selects index `k`. Requires `dim <= 64`.
    pub fn from_mask(dim: usize, mask: u64) -> Self {
        assert!(dim <= WORD, "mask construction needs dim <= 64");
        let mut set = Self::empty(dim);
        if dim > 0 {
            let keep = if dim == WORD { u64::MAX } else { (1u64 << dim) - 1 };
            set.words[0] = mask & keep;
        }
        set
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(dim: usize, indices: I) -> Self {
        let mut set = Self::empty(dim);
        for i in indices {
            set.insert(i);
        }
        set
    }

    /// Builds a set from 1-based indices, rejecting anything outside `1..=dim`.
    pub fn from_one_based<I: IntoIterator<Item = usize>>(dim: usize, indices: I) -> Option<Self> {
        let mut set = Self::empty(dim);
        for i in indices {
            if i == 0 || i > dim {
                return None;
            }
            set.insert(i - 1);
        }
        Some(set)
    }

    /// The low 64 bits of the pattern, when the whole set fits in them.
    pub fn mask(&self) -> Option<u64> {
        (self.dim <= WORD).then(|| self.words.first().copied().unwrap_or(0))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.dim && self.words[i / WORD] >> (i % WORD) & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.dim, "index {i} out of range for dimension {}", self.dim);
        self.words[i / WORD] |= 1 << (i % WORD);
    }

    pub fn remove(&mut self, i: usize) {
        assert!(i < self.dim, "index {i} out of range for dimension {}", self.dim);
        self.words[i / WORD] &= !(1 << (i % WORD));
    }

    pub fn toggle(&mut self, i: usize) {
        assert!(i < self.dim, "index {i} out of range for dimension {}", self.dim);
        self.words[i / WORD] ^= 1 << (i % WORD);
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim).filter(move |&i| self.contains(i))
    }

    /// Members of the complement `{0..n} \ I` in increasing order.
    pub fn complement_iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim).filter(move |&i| !self.contains(i))
    }

    pub fn complement(&self) -> Self {
        Self::from_indices(self.dim, self.complement_iter())
    }

    pub fn members(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn complement_members(&self) -> Vec<usize> {
        self.complement_iter().collect()
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.dim == other.dim && self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.iter().map(|i| i + 1).collect()
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IndexSet(n={}, {})", self.dim, self)
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        f.write_str("}")
    }
}

impl Serialize for IndexSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter().map(|i| i + 1))
    }
}
