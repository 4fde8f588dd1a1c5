//! k-set packing instances, packings, and the line-oriented instance format.
//!
//! ```text
//! # comment
//! p setpack <k> <num_sets> <ground_size>
//! s <e1> <e2> ... <ek>
//! ```
//!
//! Set ids are positions in input order. Elements are dense in
//! `[0, ground_size)` and every set holds exactly `k` ascending elements.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type Element = u32;
pub type SetId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KSet {
    elements: Vec<Element>,
}

impl KSet {
    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Nonempty intersection, by a merge over the sorted element lists.
    pub fn intersects(&self, other: &KSet) -> bool {
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.elements, &other.elements);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    k: usize,
    sets: Vec<KSet>,
    ground_size: usize,
}

impl Instance {
    /// Validates and builds an instance. Each set is sorted; duplicate
    /// elements inside a set, wrong cardinality, out-of-range elements and
    /// repeated sets are rejected.
    pub fn new(k: usize, sets: Vec<Vec<Element>>, ground_size: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k must be positive"));
        }
        let mut out = Vec::with_capacity(sets.len());
        let mut seen = HashSet::with_capacity(sets.len());
        for (id, mut elems) in sets.into_iter().enumerate() {
            elems.sort_unstable();
            if elems.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::invalid(format!("set {id} repeats an element")));
            }
            if elems.len() != k {
                return Err(Error::invalid(format!(
                    "set {id} has {} elements, expected {k}",
                    elems.len()
                )));
            }
            if let Some(&e) = elems.last() {
                if e as usize >= ground_size {
                    return Err(Error::invalid(format!(
                        "set {id} uses element {e} outside ground of size {ground_size}"
                    )));
                }
            }
            let set = KSet { elements: elems };
            if !seen.insert(set.clone()) {
                return Err(Error::invalid(format!(
                    "set {id} duplicates an earlier set"
                )));
            }
            out.push(set);
        }
        Ok(Instance {
            k,
            sets: out,
            ground_size,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_sets(&self) -> usize {
        self.sets.len()
    }

    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    pub fn sets(&self) -> &[KSet] {
        &self.sets
    }

    pub fn set(&self, id: SetId) -> &KSet {
        &self.sets[id]
    }

    /// Two sets conflict when they share an element. A set always conflicts
    /// with itself.
    pub fn conflicts(&self, a: SetId, b: SetId) -> bool {
        a == b || self.sets[a].intersects(&self.sets[b])
    }

    pub fn check_id(&self, id: SetId) -> Result<()> {
        if id < self.sets.len() {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "set id {id} out of range for {} sets",
                self.sets.len()
            )))
        }
    }

    pub fn is_packing<'a, I>(&self, ids: I) -> Result<bool>
    where
        I: IntoIterator<Item = &'a SetId>,
    {
        let mut used = vec![false; self.ground_size];
        let mut seen = HashSet::new();
        let mut disjoint = true;
        for &id in ids {
            self.check_id(id)?;
            if !seen.insert(id) {
                continue;
            }
            for &e in self.sets[id].elements() {
                let slot = &mut used[e as usize];
                if *slot {
                    disjoint = false;
                }
                *slot = true;
            }
        }
        Ok(disjoint)
    }

    /// True when every set outside `packing` conflicts with some member.
    pub fn is_maximal(&self, packing: &Packing) -> bool {
        let occupied = packing.occupancy(self);
        (0..self.sets.len()).all(|id| {
            packing.contains(id)
                || self.sets[id]
                    .elements()
                    .iter()
                    .any(|&e| occupied[e as usize])
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "p setpack {} {} {}",
            self.k,
            self.sets.len(),
            self.ground_size
        );
        for set in &self.sets {
            out.push('s');
            for e in set.elements() {
                let _ = write!(out, " {e}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize, usize, usize)> = None;
        let mut raw: Vec<(usize, Vec<Element>)> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = match line.find('#') {
                Some(p) => &line[..p],
                None => line,
            };
            let mut tokens = line.split_whitespace();
            let Some(tag) = tokens.next() else { continue };
            match tag {
                "p" => {
                    if header.is_some() {
                        return Err(Error::parse(lineno, "duplicate header"));
                    }
                    if tokens.next() != Some("setpack") {
                        return Err(Error::parse(lineno, "expected `p setpack <k> <n> <g>`"));
                    }
                    let nums: Vec<usize> = tokens
                        .map(|t| t.parse::<usize>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|e| Error::parse(lineno, format!("bad header field: {e}")))?;
                    let [k, n, g] = nums[..] else {
                        return Err(Error::parse(lineno, "header needs exactly 3 numbers"));
                    };
                    if k == 0 {
                        return Err(Error::parse(lineno, "k must be positive"));
                    }
                    header = Some((k, n, g, lineno));
                }
                "s" => {
                    let Some((k, _, g, _)) = header else {
                        return Err(Error::parse(lineno, "set line before header"));
                    };
                    let elems: Vec<Element> = tokens
                        .map(|t| t.parse::<Element>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|e| Error::parse(lineno, format!("bad element: {e}")))?;
                    if elems.len() != k {
                        return Err(Error::parse(
                            lineno,
                            format!("set has {} elements, expected {k}", elems.len()),
                        ));
                    }
                    if elems.windows(2).any(|w| w[0] >= w[1]) {
                        return Err(Error::parse(lineno, "elements must be strictly ascending"));
                    }
                    if elems.iter().any(|&e| e as usize >= g) {
                        return Err(Error::parse(lineno, "element outside ground set"));
                    }
                    raw.push((lineno, elems));
                }
                other => {
                    return Err(Error::parse(lineno, format!("unknown line type `{other}`")));
                }
            }
        }
        let Some((k, n, g, hline)) = header else {
            return Err(Error::parse(1, "missing `p setpack` header"));
        };
        if raw.len() != n {
            return Err(Error::parse(
                hline,
                format!("header declares {n} sets, found {}", raw.len()),
            ));
        }
        let mut seen = HashSet::with_capacity(raw.len());
        for (lineno, elems) in &raw {
            if !seen.insert(elems.as_slice()) {
                return Err(Error::parse(*lineno, "duplicate set"));
            }
        }
        Instance::new(k, raw.into_iter().map(|(_, e)| e).collect(), g)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Pads every raw set to exactly `k` elements with fresh, unshared elements.
///
/// Padding ids start right after the largest raw element and are handed out
/// in set-id order. Raw sets are canonicalized (sorted, deduplicated) first;
/// two raw sets with the same elements are rejected.
pub fn pad_to_k(raw_sets: &[Vec<Element>], k: usize) -> Result<Instance> {
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    let mut canon: Vec<Vec<Element>> = Vec::with_capacity(raw_sets.len());
    let mut seen = HashSet::new();
    for (id, set) in raw_sets.iter().enumerate() {
        let uniq: BTreeSet<Element> = set.iter().copied().collect();
        if uniq.is_empty() || uniq.len() > k {
            return Err(Error::invalid(format!(
                "raw set {id} has cardinality {}, expected 1..={k}",
                uniq.len()
            )));
        }
        let v: Vec<Element> = uniq.into_iter().collect();
        if !seen.insert(v.clone()) {
            return Err(Error::invalid(format!(
                "raw set {id} duplicates an earlier set"
            )));
        }
        canon.push(v);
    }
    let mut next = canon
        .iter()
        .filter_map(|s| s.last())
        .max()
        .map_or(0, |&m| m + 1);
    for set in &mut canon {
        while set.len() < k {
            set.push(next);
            next += 1;
        }
    }
    Instance::new(k, canon, next as usize)
}

/// Uniform random instance: `num_sets` distinct k-subsets of `[0, ground)`.
pub fn random_instance(k: usize, num_sets: usize, ground: usize, seed: u64) -> Result<Instance> {
    if k == 0 || k > ground {
        return Err(Error::invalid(format!(
            "need 1 <= k <= ground, got k={k}, ground={ground}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut sets = Vec::with_capacity(num_sets);
    let max_attempts = 1000 * num_sets.max(1);
    let mut attempts = 0;
    while sets.len() < num_sets {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::invalid(format!(
                "could not draw {num_sets} distinct {k}-sets from {ground} elements"
            )));
        }
        let mut s: Vec<Element> = sample(&mut rng, ground, k)
            .into_iter()
            .map(|e| e as Element)
            .collect();
        s.sort_unstable();
        if seen.insert(s.clone()) {
            sets.push(s);
        }
    }
    Instance::new(k, sets, ground)
}

/// A collection of mutually disjoint sets of one instance.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Packing {
    members: BTreeSet<SetId>,
}

impl Packing {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(instance: &Instance, ids: impl IntoIterator<Item = SetId>) -> Result<Self> {
        let members: BTreeSet<SetId> = ids.into_iter().collect();
        if !instance.is_packing(&members)? {
            return Err(Error::invalid("sets are not pairwise disjoint"));
        }
        Ok(Packing { members })
    }

    pub(crate) fn from_members_unchecked(members: BTreeSet<SetId>) -> Self {
        Packing { members }
    }

    pub fn members(&self) -> &BTreeSet<SetId> {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, id: SetId) -> bool {
        self.members.contains(&id)
    }

    pub(crate) fn insert(&mut self, id: SetId) {
        self.members.insert(id);
    }

    /// `occupancy[e]` is true when element `e` belongs to a member set.
    pub fn occupancy(&self, instance: &Instance) -> Vec<bool> {
        let mut occ = vec![false; instance.ground_size()];
        for &id in &self.members {
            for &e in instance.set(id).elements() {
                occ[e as usize] = true;
            }
        }
        occ
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pad_keeps_full_sets() {
        let inst = pad_to_k(&[vec![0, 1, 2], vec![3, 4, 5]], 3).unwrap();
        assert_eq!(inst.ground_size(), 6);
        assert_eq!(inst.set(0).elements(), &[0, 1, 2]);
        assert_eq!(inst.set(1).elements(), &[3, 4, 5]);
    }

    #[test]
    fn pad_uses_fresh_elements() {
        let inst = pad_to_k(&[vec![0, 1], vec![0, 2]], 3).unwrap();
        assert_eq!(inst.set(0).elements(), &[0, 1, 3]);
        assert_eq!(inst.set(1).elements(), &[0, 2, 4]);
        assert_eq!(inst.ground_size(), 5);
        assert!(inst.conflicts(0, 1));
    }

    #[test]
    fn pad_rejects_duplicates_and_bad_sizes() {
        assert!(matches!(
            pad_to_k(&[vec![0], vec![0]], 3),
            Err(Error::InvalidInput(_))
        ));
        assert!(pad_to_k(&[vec![]], 3).is_err());
        assert!(pad_to_k(&[vec![0, 1, 2, 3]], 3).is_err());
    }

    #[test]
    fn conflict_rules() {
        let inst = Instance::new(3, vec![vec![0, 1, 2], vec![3, 4, 5], vec![2, 3, 4]], 6).unwrap();
        assert!(!inst.conflicts(0, 1));
        assert!(inst.conflicts(0, 2));
        assert!(inst.conflicts(1, 1));
    }

    #[test]
    fn packing_checks() {
        let inst = Instance::new(3, vec![vec![0, 1, 2], vec![3, 4, 5], vec![2, 6, 7]], 8).unwrap();
        assert!(inst.is_packing(&[]).unwrap());
        assert!(inst.is_packing(&[0, 1]).unwrap());
        assert!(!inst.is_packing(&[0, 2]).unwrap());
        assert!(inst.is_packing(&[7]).is_err());
    }

    #[test]
    fn parse_minimal_file() {
        let inst = Instance::parse("p setpack 3 2 6\ns 0 1 2\ns 3 4 5\n").unwrap();
        assert_eq!(inst.k(), 3);
        assert_eq!(inst.num_sets(), 2);
    }

    #[test]
    fn parse_errors_name_lines() {
        let err = Instance::parse("p setpack 3 2 6\ns 0 1 2\ns\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = Instance::parse("# c\np setpack 3 2 6\ns 0 1 2\ns 0 1 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
        let err = Instance::parse("p setpack 3 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = Instance::parse("s 1 2 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        assert!(Instance::parse("p setpack 3 1 6\ns 2 1 0\n").is_err());
        assert!(Instance::parse("p setpack 3 2 6\ns 0 1 2\n").is_err());
    }

    #[test]
    fn comments_and_whitespace_are_normalized() {
        let text = "# header\n  p setpack 2 2 4  # trailing\n\ns 0   1\ns 2 3\n";
        let inst = Instance::parse(text).unwrap();
        assert_eq!(inst.to_text(), "p setpack 2 2 4\ns 0 1\ns 2 3\n");
    }

    #[test]
    fn maximality() {
        let inst = Instance::new(2, vec![vec![0, 1], vec![1, 2], vec![3, 4]], 5).unwrap();
        let p = Packing::new(&inst, [0]).unwrap();
        assert!(!inst.is_maximal(&p));
        let p = Packing::new(&inst, [0, 2]).unwrap();
        assert!(inst.is_maximal(&p));
    }

    #[test]
    fn random_instances_are_valid_and_seeded() {
        let a = random_instance(3, 20, 30, 1).unwrap();
        let b = random_instance(3, 20, 30, 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.num_sets(), 20);
        assert!(random_instance(3, 5, 3, 0).is_err());
    }
}
