use std::fmt::Debug;
use std::hash::Hash;

/// A set of colors stored as a bit mask.
pub trait ColorMask: Copy + Eq + Ord + Hash + Debug + Send + Sync + 'static {
    /// Largest number of distinct colors the mask can hold.
    const CAPACITY: usize;

    fn empty() -> Self;
    fn insert(&mut self, color: usize);
    fn contains(&self, color: usize) -> bool;
    fn union(&self, other: &Self) -> Self;
    fn difference(&self, other: &Self) -> Self;
    fn is_disjoint(&self, other: &Self) -> bool;
    fn count(&self) -> usize;

    fn colors(&self) -> Vec<usize> {
        (0..Self::CAPACITY).filter(|&c| self.contains(c)).collect()
    }
}

impl ColorMask for u64 {
    const CAPACITY: usize = 64;

    fn empty() -> Self {
        0
    }

    fn insert(&mut self, color: usize) {
        *self |= 1 << color;
    }

    fn contains(&self, color: usize) -> bool {
        color < 64 && self & (1 << color) != 0
    }

    fn union(&self, other: &Self) -> Self {
        self | other
    }

    fn difference(&self, other: &Self) -> Self {
        self & !other
    }

    fn is_disjoint(&self, other: &Self) -> bool {
        self & other == 0
    }

    fn count(&self) -> usize {
        self.count_ones() as usize
    }
}

pub const WIDE_WORDS: usize = 8;

/// Fixed-width multi-word mask for more than 64 colors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WideMask([u64; WIDE_WORDS]);

impl ColorMask for WideMask {
    const CAPACITY: usize = 64 * WIDE_WORDS;

    fn empty() -> Self {
        WideMask([0; WIDE_WORDS])
    }

    fn insert(&mut self, color: usize) {
        self.0[color / 64] |= 1 << (color % 64);
    }

    fn contains(&self, color: usize) -> bool {
        color < Self::CAPACITY && self.0[color / 64] & (1 << (color % 64)) != 0
    }

    fn union(&self, other: &Self) -> Self {
        let mut out = *self;
        for (w, o) in out.0.iter_mut().zip(other.0) {
            *w |= o;
        }
        out
    }

    fn difference(&self, other: &Self) -> Self {
        let mut out = *self;
        for (w, o) in out.0.iter_mut().zip(other.0) {
            *w &= !o;
        }
        out
    }

    fn is_disjoint(&self, other: &Self) -> bool {
        self.0.iter().zip(other.0).all(|(a, b)| a & b == 0)
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
}
