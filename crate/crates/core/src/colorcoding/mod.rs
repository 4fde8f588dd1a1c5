//! Color coding: random colorings of the ground set, the colorful-walk table
//! over the auxiliary graph, and the searches for the three canonical
//! improvement shapes.

mod coloring;
mod dp;
mod mask;
mod search;

pub use coloring::{
    derive_seed, random_coloring, Coloring, ColoringFamily, ExhaustiveFamily, RandomFamily,
};
pub use dp::{build_dp, find_colorful_cycle, find_colorful_path, DpTable, EdgeColorInfo, Step};
pub use mask::{ColorMask, WideMask, WIDE_WORDS};
pub use search::{find_in_table, search_canonical, DEFAULT_MAX_ENTRIES};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Probability that `k*i` fixed elements receive distinct colors when each of
/// them is colored uniformly from `k*t` colors:
/// `(kt)! / ((kt - ki)! (kt)^(ki))`, evaluated as the product
/// `prod_{j < ki} (kt - j) / kt`.
pub fn colorful_probability_lower_bound<T: Scalar>(k: usize, t: usize, i: usize) -> Result<T> {
    if k == 0 || i == 0 || i > t {
        return Err(Error::invalid(format!(
            "need k >= 1 and 1 <= i <= t, got k={k}, t={t}, i={i}"
        )));
    }
    let kt = T::of_usize(k * t);
    let mut p = T::one();
    for j in 0..k * i {
        p = p * T::of_usize(k * t - j) / kt.clone();
    }
    Ok(p)
}
