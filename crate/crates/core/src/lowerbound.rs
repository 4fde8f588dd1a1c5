//! Random instances on which local search of bounded size is stuck at ratio
//! `k/3`: a partition `S` of `3kn` elements into `3n` k-sets, and a random
//! partition of the same elements into `kn` triples, rejected until no small
//! sub-collection of `S` is unstable.

use itertools::Itertools;
use num::bigint::{BigInt, BigUint};
use num::rational::BigRational;
use num::traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::colorcoding::derive_seed;
use crate::error::{Error, Result};
use crate::instance::{pad_to_k, Element, Instance, Packing, SetId};
use crate::scalar::Scalar;

pub type Triple = [Element; 3];

fn factorial(m: usize) -> BigUint {
    (1..=m).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

pub fn binomial(n: usize, r: usize) -> BigUint {
    if r > n {
        return BigUint::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigUint::one();
    for i in 0..r {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Number of partitions of `m` elements into unordered triples,
/// `m! / (6^(m/3) (m/3)!)`.
pub fn tau(m: usize) -> Result<BigUint> {
    if !m.is_multiple_of(3) {
        return Err(Error::invalid(format!(
            "tau needs a multiple of 3, got {m}"
        )));
    }
    let q = m / 3;
    Ok(factorial(m) / (BigUint::from(6u32).pow(q as u32) * factorial(q)))
}

/// Probability that `a` fixed disjoint triples all occur in a uniform random
/// triple partition of `3kn` elements: `tau(3kn - 3a) / tau(3kn)`.
pub fn occurrence_probability<T: Scalar>(k: usize, n: usize, a: usize) -> Result<T> {
    if a > k * n {
        return Err(Error::invalid(format!("a = {a} exceeds kn = {}", k * n)));
    }
    let m = 3 * k * n;
    Ok(T::from_ratio(&tau(m - 3 * a)?, &tau(m)?))
}

/// Uniform random partition of `[0, ground_size)` into triples: shuffle, then
/// group consecutive positions.
pub fn random_triple_partition_with<R: Rng + ?Sized>(
    ground_size: usize,
    rng: &mut R,
) -> Result<Vec<Triple>> {
    if !ground_size.is_multiple_of(3) {
        return Err(Error::invalid(format!(
            "ground size {ground_size} is not a multiple of 3"
        )));
    }
    let mut perm: Vec<Element> = (0..ground_size as Element).collect();
    perm.shuffle(rng);
    Ok(perm.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect())
}

pub fn random_triple_partition(ground_size: usize, seed: u64) -> Result<Vec<Triple>> {
    random_triple_partition_with(ground_size, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// The fixed packing `S_j = {jk, ..., jk + k - 1}` for `j < 3n`.
pub fn s_partition(k: usize, n: usize) -> Vec<Vec<Element>> {
    (0..3 * n)
        .map(|j| ((j * k) as Element..((j + 1) * k) as Element).collect())
        .collect()
}

/// For every triple, the sorted list of `S`-sets it touches.
fn triple_owners(s: &[Vec<Element>], r: &[Triple]) -> Result<Vec<Vec<usize>>> {
    let mut owner = std::collections::HashMap::new();
    for (j, set) in s.iter().enumerate() {
        for &e in set {
            if owner.insert(e, j).is_some() {
                return Err(Error::invalid(format!("element {e} lies in two sets of S")));
            }
        }
    }
    r.iter()
        .map(|tr| {
            let mut o =
                tr.iter()
                    .map(|e| {
                        owner.get(e).copied().ok_or_else(|| {
                            Error::invalid(format!("element {e} is not covered by S"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
            o.sort_unstable();
            o.dedup();
            Ok(o)
        })
        .collect()
}

fn unstable_by_owners(owners: &[Vec<usize>], a: &[usize]) -> bool {
    if a.is_empty() {
        return false;
    }
    let inside = owners
        .iter()
        .filter(|o| o.iter().all(|j| a.contains(j)))
        .count();
    inside >= a.len()
}

/// Whether at least `|A|` triples of `r` lie entirely inside the union of the
/// `S`-sets indexed by `a`.
pub fn is_unstable(s: &[Vec<Element>], r: &[Triple], a: &[usize]) -> Result<bool> {
    if let Some(&j) = a.iter().find(|&&j| j >= s.len()) {
        return Err(Error::invalid(format!("collection index {j} out of range")));
    }
    Ok(unstable_by_owners(&triple_owners(s, r)?, a))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stability {
    /// No unstable collection of size `1..=max_a`.
    Certified { max_a: usize },
    /// Smallest unstable collection, lexicographically first among its size.
    Unstable { witness: Vec<usize> },
}

/// Checks every sub-collection of `S` with at most `t_max` sets.
/// `max_collections` bounds the total number inspected.
pub fn certify_stability(
    s: &[Vec<Element>],
    r: &[Triple],
    t_max: usize,
    max_collections: u64,
) -> Result<Stability> {
    let owners = triple_owners(s, r)?;
    let mut inspected = 0u64;
    for a in 1..=t_max.min(s.len()) {
        let count = binomial(s.len(), a);
        if BigUint::from(inspected) + &count > BigUint::from(max_collections) {
            return Err(Error::Budget(format!(
                "certifying collections of size {a} needs {count} more checks, \
                 over the budget of {max_collections}"
            )));
        }
        for combo in (0..s.len()).combinations(a) {
            inspected += 1;
            if unstable_by_owners(&owners, &combo) {
                return Ok(Stability::Unstable { witness: combo });
            }
        }
    }
    Ok(Stability::Certified {
        max_a: t_max.min(s.len()),
    })
}

/// Number of unstable collections of exactly `a` sets.
pub fn count_unstable(s: &[Vec<Element>], r: &[Triple], a: usize) -> Result<u64> {
    let owners = triple_owners(s, r)?;
    Ok((0..s.len())
        .combinations(a)
        .filter(|c| unstable_by_owners(&owners, c))
        .count() as u64)
}

/// Upper bound on the probability that a fixed collection of `a` sets is
/// unstable: `C(ka, 3a) C(kn, a) / C(3kn, 3a)`.
pub fn instability_probability_bound<T: Scalar>(k: usize, n: usize, a: usize) -> T {
    T::from_ratio(
        &(binomial(k * a, 3 * a) * binomial(k * n, a)),
        &binomial(3 * k * n, 3 * a),
    )
}

/// Upper bound on the expected number of unstable collections of size `a`:
/// `C(3n, a) C(ka, 3a) C(kn, a) / C(3kn, 3a)`.
pub fn expected_unstable_exact<T: Scalar>(k: usize, n: usize, a: usize) -> T {
    T::from_ratio(
        &(binomial(3 * n, a) * binomial(k * a, 3 * a) * binomial(k * n, a)),
        &binomial(3 * k * n, 3 * a),
    )
}

/// `(e^5 k a / (9 n))^a`.
pub fn expected_unstable_closed_form(k: usize, n: usize, a: usize) -> f64 {
    (5f64.exp() * k as f64 * a as f64 / (9.0 * n as f64)).powi(a as i32)
}

/// A rational strictly below `e`: the first 20 terms of `sum 1/j!`.
fn e_lower() -> BigRational {
    (0..20).fold(BigRational::zero(), |acc, j| {
        acc + BigRational::new(BigInt::one(), BigInt::from(factorial(j)))
    })
}

/// Exact check that the binomial expression does not exceed the closed form.
/// The closed form is evaluated with a rational lower bound for `e`, so a
/// `true` answer holds for the real value as well.
pub fn exact_within_closed_form(k: usize, n: usize, a: usize) -> bool {
    let exact: BigRational = expected_unstable_exact(k, n, a);
    let e = e_lower();
    let base = e.pow(5) * BigRational::new(BigInt::from(k * a), BigInt::from(9 * n));
    exact <= base.pow(a as i32)
}

/// Largest `t` with `t <= 9n / (2 e^5 k)`; zero at desk-scale `n`.
pub fn asymptotic_t(k: usize, n: usize) -> usize {
    (9.0 * n as f64 / (2.0 * 5f64.exp() * k as f64)).floor() as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GapParams {
    pub k: usize,
    pub n: usize,
    pub t: usize,
    pub seed: u64,
    pub max_attempts: u64,
    /// Budget of sub-collections inspected per certification.
    pub max_collections: u64,
}

impl GapParams {
    pub fn new(k: usize, n: usize, t: usize, seed: u64) -> Self {
        GapParams {
            k,
            n,
            t,
            seed,
            max_attempts: 10_000,
            max_collections: 5_000_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GapInstance {
    pub k: usize,
    pub n: usize,
    pub seed: u64,
    pub t_certified: usize,
    /// Rejected partitions before the accepted one.
    pub rejections: u64,
    pub triples: Vec<Triple>,
    /// Sets `0..3n` are `S`, sets `3n..3n + kn` are the padded triples.
    pub instance: Instance,
}

impl GapInstance {
    pub fn s_ids(&self) -> std::ops::Range<SetId> {
        0..3 * self.n
    }

    pub fn o_ids(&self) -> std::ops::Range<SetId> {
        3 * self.n..3 * self.n + self.k * self.n
    }

    pub fn s_packing(&self) -> Packing {
        Packing::new(&self.instance, self.s_ids()).expect("S is a packing")
    }

    pub fn o_packing(&self) -> Packing {
        Packing::new(&self.instance, self.o_ids()).expect("O is a packing")
    }

    pub fn metadata(&self) -> String {
        format!(
            "k = {}\nn = {}\nt_certified = {}\nseed = {}\nrejections = {}\n",
            self.k, self.n, self.t_certified, self.seed, self.rejections
        )
    }
}

/// Rejection-samples triple partitions until one is certified stable up to
/// `params.t`, then pads the triples to k-sets with fresh elements.
pub fn generate_gap_instance(params: &GapParams) -> Result<GapInstance> {
    let GapParams { k, n, t, seed, .. } = *params;
    if k < 3 || n == 0 || t == 0 {
        return Err(Error::invalid(format!(
            "need k >= 3, n >= 1 and t >= 1, got k={k}, n={n}, t={t}"
        )));
    }
    let s = s_partition(k, n);
    for attempt in 0..params.max_attempts {
        let mut triples = random_triple_partition(3 * k * n, derive_seed(seed, attempt))?;
        match certify_stability(&s, &triples, t, params.max_collections)? {
            Stability::Unstable { .. } => continue,
            Stability::Certified { max_a } => {
                for tr in &mut triples {
                    tr.sort_unstable();
                }
                triples.sort_unstable();
                let raw: Vec<Vec<Element>> = s
                    .iter()
                    .cloned()
                    .chain(triples.iter().map(|tr| tr.to_vec()))
                    .collect();
                return Ok(GapInstance {
                    k,
                    n,
                    seed,
                    t_certified: max_a,
                    rejections: attempt,
                    triples,
                    instance: pad_to_k(&raw, k)?,
                });
            }
        }
    }
    let bounds = (1..=t)
        .map(|a| format!("a={a}: {:.4}", expected_unstable_exact::<f64>(k, n, a)))
        .join(", ");
    Err(Error::Budget(format!(
        "no stable partition in {} attempts for k={k}, n={n}, t={t}; \
         expected unstable collections {bounds}; try a smaller t",
        params.max_attempts
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn tau_small_values() {
        let vals: Vec<u64> = [0, 3, 6, 9, 12]
            .iter()
            .map(|&m| tau(m).unwrap().try_into().unwrap())
            .collect();
        assert_eq!(vals, vec![1, 1, 10, 280, 15400]);
        assert!(tau(4).is_err());
    }

    #[test]
    fn occurrence_examples() {
        assert!(occurrence_probability::<BigRational>(3, 2, 0)
            .unwrap()
            .is_one());
        assert!(occurrence_probability::<BigRational>(1, 1, 1)
            .unwrap()
            .is_one());
        assert_eq!(
            occurrence_probability::<BigRational>(2, 1, 1).unwrap(),
            ratio(1, 10)
        );
        assert!(occurrence_probability::<f64>(1, 1, 2).is_err());
    }

    #[test]
    fn partition_covers_ground() {
        let r = random_triple_partition(12, 3).unwrap();
        let mut all: Vec<Element> = r.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..12).collect::<Vec<_>>());
        assert!(random_triple_partition(7, 0).is_err());
        assert!(random_triple_partition(0, 0).unwrap().is_empty());
    }

    #[test]
    fn instability_examples() {
        let s = s_partition(3, 1);
        let r = vec![[0, 1, 2], [3, 4, 6], [5, 7, 8]];
        assert!(!is_unstable(&s, &r, &[]).unwrap());
        assert!(is_unstable(&s, &r, &[0]).unwrap());
        assert!(!is_unstable(&s, &r, &[1]).unwrap());
        assert!(is_unstable(&s, &r, &[1, 2]).unwrap());
        assert!(is_unstable(&s, &r, &[7]).is_err());
    }

    #[test]
    fn straddling_triples_certify_size_one() {
        let s = s_partition(3, 1);
        let r = vec![[0, 3, 6], [1, 4, 7], [2, 5, 8]];
        // every triple touches all three sets
        assert_eq!(
            certify_stability(&s, &r, 2, 1000).unwrap(),
            Stability::Certified { max_a: 2 }
        );
        assert_eq!(
            certify_stability(&s, &r, 3, 1000).unwrap(),
            Stability::Unstable {
                witness: vec![0, 1, 2]
            }
        );
    }

    #[test]
    fn planted_pair_is_detected() {
        // two triples inside S_1 and S_2 together, none inside a single set
        let s = s_partition(3, 2);
        let r = vec![
            [3, 4, 6],
            [5, 7, 8],
            [0, 9, 12],
            [1, 10, 15],
            [2, 13, 16],
            [11, 14, 17],
        ];
        assert_eq!(
            certify_stability(&s, &r, 3, 1000).unwrap(),
            Stability::Unstable {
                witness: vec![1, 2]
            }
        );
    }

    #[test]
    fn certification_budget() {
        let s = s_partition(3, 4);
        let r = random_triple_partition(36, 1).unwrap();
        assert!(matches!(
            certify_stability(&s, &r, 6, 10),
            Err(Error::Budget(_)) | Ok(Stability::Unstable { .. })
        ));
    }

    #[test]
    fn expected_bound_example() {
        let exact: BigRational = expected_unstable_exact(3, 10, 1);
        assert_eq!(exact, ratio(900, 117480));
        assert!(expected_unstable_exact::<BigRational>(2, 5, 2).is_zero());
        assert!(exact_within_closed_form(3, 10, 1));
    }

    #[test]
    fn closed_form_sum_below_one() {
        let (k, n) = (3, 2000);
        let t = asymptotic_t(k, n);
        assert!(t >= 1);
        let sum: f64 = (1..=t)
            .map(|a| expected_unstable_closed_form(k, n, a))
            .sum();
        assert!(sum < 1.0);
    }

    #[test]
    fn gap_instance_shapes() {
        let g = generate_gap_instance(&GapParams::new(6, 2, 2, 1)).unwrap();
        assert_eq!(g.s_ids().len(), 6);
        assert_eq!(g.o_ids().len(), 12);
        assert!(g.instance.is_maximal(&g.s_packing()));
        assert_eq!(g.o_packing().len(), 12);
        assert!(g.metadata().contains("t_certified = 2"));
    }

    #[test]
    fn gap_rejects_bad_params() {
        assert!(generate_gap_instance(&GapParams::new(2, 2, 1, 0)).is_err());
        let mut p = GapParams::new(3, 1, 3, 0);
        p.max_attempts = 3;
        // a = 3 covers the whole ground, always unstable
        assert!(matches!(generate_gap_instance(&p), Err(Error::Budget(_))));
    }
}
