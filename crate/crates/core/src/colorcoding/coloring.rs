use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::Element;

/// Assignment of a color in `[0, num_colors)` to every ground element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring {
    colors: Vec<u16>,
    num_colors: usize,
}

impl Coloring {
    pub fn new(colors: Vec<u16>, num_colors: usize) -> Result<Self> {
        if num_colors == 0 || num_colors > u16::MAX as usize + 1 {
            return Err(Error::Config(format!(
                "unsupported color count {num_colors}"
            )));
        }
        if let Some(c) = colors.iter().find(|&&c| c as usize >= num_colors) {
            return Err(Error::invalid(format!("color {c} out of range")));
        }
        Ok(Coloring { colors, num_colors })
    }

    pub fn color(&self, e: Element) -> usize {
        self.colors[e as usize] as usize
    }

    pub fn num_colors(&self) -> usize {
        self.num_colors
    }

    pub fn ground_size(&self) -> usize {
        self.colors.len()
    }

    /// True when the given elements receive pairwise distinct colors.
    pub fn is_injective_on(&self, elements: &[Element]) -> bool {
        let mut seen = vec![false; self.num_colors];
        elements.iter().all(|&e| {
            let c = self.color(e);
            !std::mem::replace(&mut seen[c], true)
        })
    }
}

/// Each element colored independently and uniformly from `num_colors`.
pub fn random_coloring(ground_size: usize, num_colors: usize, seed: u64) -> Coloring {
    assert!(num_colors >= 1, "need at least one color");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let colors = (0..ground_size)
        .map(|_| rng.random_range(0..num_colors) as u16)
        .collect();
    Coloring { colors, num_colors }
}

/// SplitMix64 finalizer, used to derive independent per-trial seeds.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A family of colorings addressed by index.
pub trait ColoringFamily: Sync {
    /// The `index`-th coloring, or `None` past the end of a finite family.
    fn coloring(&self, index: u64) -> Option<Coloring>;

    /// Number of colorings, if finite.
    fn size(&self) -> Option<u64>;
}

pub struct RandomFamily {
    ground_size: usize,
    num_colors: usize,
    seed: u64,
}

impl RandomFamily {
    pub fn new(ground_size: usize, num_colors: usize, seed: u64) -> Self {
        RandomFamily {
            ground_size,
            num_colors,
            seed,
        }
    }
}

impl ColoringFamily for RandomFamily {
    fn coloring(&self, index: u64) -> Option<Coloring> {
        Some(random_coloring(
            self.ground_size,
            self.num_colors,
            derive_seed(self.seed, index),
        ))
    }

    fn size(&self) -> Option<u64> {
        None
    }
}

/// Every assignment of colors to a small set of relevant elements; all other
/// elements get color 0. Any subset of the relevant elements that can be
/// colored injectively is colored injectively by some member.
pub struct ExhaustiveFamily {
    ground_size: usize,
    num_colors: usize,
    relevant: Vec<Element>,
    total: u64,
}

impl ExhaustiveFamily {
    pub fn new(
        ground_size: usize,
        num_colors: usize,
        relevant: Vec<Element>,
        max_colorings: u64,
    ) -> Result<Self> {
        let mut total: u64 = 1;
        for _ in &relevant {
            total = total
                .checked_mul(num_colors as u64)
                .filter(|&t| t <= max_colorings)
                .ok_or_else(|| {
                    Error::Config(format!(
                        "exhaustive coloring of {} elements with {num_colors} colors exceeds cap {max_colorings}",
                        relevant.len()
                    ))
                })?;
        }
        Ok(ExhaustiveFamily {
            ground_size,
            num_colors,
            relevant,
            total,
        })
    }
}

impl ColoringFamily for ExhaustiveFamily {
    fn coloring(&self, index: u64) -> Option<Coloring> {
        if index >= self.total {
            return None;
        }
        let mut colors = vec![0u16; self.ground_size];
        let mut rest = index;
        for &e in &self.relevant {
            colors[e as usize] = (rest % self.num_colors as u64) as u16;
            rest /= self.num_colors as u64;
        }
        Some(Coloring {
            colors,
            num_colors: self.num_colors,
        })
    }

    fn size(&self) -> Option<u64> {
        Some(self.total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_color_is_constant() {
        let c = random_coloring(50, 1, 9);
        assert!((0..50).all(|e| c.color(e) == 0));
    }

    #[test]
    fn seeded_colorings_repeat() {
        assert_eq!(random_coloring(100, 7, 3), random_coloring(100, 7, 3));
        assert_ne!(random_coloring(100, 7, 3), random_coloring(100, 7, 4));
    }

    #[test]
    fn color_frequencies_are_uniform() {
        let n = 100_000;
        let kt = 9;
        let c = random_coloring(n, kt, 2024);
        let mut counts = vec![0usize; kt];
        for e in 0..n as u32 {
            counts[c.color(e)] += 1;
        }
        let p = 1.0 / kt as f64;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for &cnt in &counts {
            assert!(
                (cnt as f64 - n as f64 * p).abs() <= 5.0 * sigma,
                "{counts:?}"
            );
        }
    }

    #[test]
    fn exhaustive_family_enumerates_all() {
        let fam = ExhaustiveFamily::new(5, 3, vec![1, 3], 100).unwrap();
        assert_eq!(fam.size(), Some(9));
        let mut seen = std::collections::HashSet::new();
        for i in 0..9 {
            let c = fam.coloring(i).unwrap();
            assert_eq!(c.color(0), 0);
            seen.insert((c.color(1), c.color(3)));
        }
        assert_eq!(seen.len(), 9);
        assert!(fam.coloring(9).is_none());
        assert!(ExhaustiveFamily::new(5, 3, vec![0, 1, 2, 3, 4], 100).is_err());
    }
}
