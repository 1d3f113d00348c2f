//! Enumeration of preference orders, canonical intensity relations and
//! profile spaces.
//!
//! For a fixed preference order the canonical relations inducing it are the
//! linear extensions of the interval-containment poset on the `k` oriented
//! pairs: a pair spanning a longer stretch of the order must outrank every
//! pair it spans.

mod orbit;

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{
    pair_count, pair_index, CanonicalIntensity, ObjectId, OrderedPair, PreferenceOrder, Profile,
};
use crate::perm;

pub use orbit::{canonical_encoding, OrbitRep, SymmetryGroup, SymmetryUnit};

/// Default ceiling on the number of profiles a full sweep may visit.
pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// Random streams are cut into blocks of this many profiles, each with its
/// own ChaCha stream, so results do not depend on how blocks are scheduled.
pub const RANDOM_BLOCK: u64 = 4096;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EnumerateError {
    #[error("n = {n} is outside the supported range {min}..={max}")]
    UnsupportedSize { n: usize, min: usize, max: usize },
    #[error("refusing to enumerate {count} profiles (budget {budget})")]
    BudgetExceeded { count: u128, budget: u128 },
    #[error("symmetry reduction is only implemented for n <= {max} (got {n})")]
    SymmetryUnsupported { n: usize, max: usize },
}

fn check_range(n: usize, min: usize, max: usize) -> Result<(), EnumerateError> {
    if (min..=max).contains(&n) {
        Ok(())
    } else {
        Err(EnumerateError::UnsupportedSize { n, min, max })
    }
}

/// All `n!` strict orders over `n` objects in lexicographic order of their
/// rankings.
pub fn all_preference_orders(n: usize) -> Result<Vec<PreferenceOrder>, EnumerateError> {
    check_range(n, 3, 8)?;
    Ok(perm::permutations(n)
        .into_iter()
        .map(|p| PreferenceOrder::from_ranking_unchecked(p.into_iter().map(ObjectId).collect()))
        .collect())
}

/// Pairs oriented by a preference order, partially ordered by strict
/// containment of the stretches they span.
#[derive(Debug, Clone)]
pub struct ContainmentPoset {
    order: PreferenceOrder,
    elements: Vec<OrderedPair>,
    /// `below[e]`: bitmask of elements strictly inside `e`.
    below: Vec<u32>,
    /// `above[e]`: bitmask of elements strictly containing `e`.
    above: Vec<u32>,
}

/// Builds the containment poset for `order`.
pub fn containment_poset(order: &PreferenceOrder) -> ContainmentPoset {
    let n = order.n();
    let mut spans = Vec::with_capacity(pair_count(n));
    for p in 0..n {
        for q in p + 1..n {
            spans.push((p, q));
        }
    }
    let elements = spans
        .iter()
        .map(|&(p, q)| OrderedPair {
            first: order.ranking()[p],
            second: order.ranking()[q],
        })
        .collect();
    let k = spans.len();
    let mut below = vec![0u32; k];
    let mut above = vec![0u32; k];
    for (e, &(p, q)) in spans.iter().enumerate() {
        for (f, &(r, s)) in spans.iter().enumerate() {
            if e != f && p <= r && s <= q {
                below[e] |= 1 << f;
                above[f] |= 1 << e;
            }
        }
    }
    ContainmentPoset {
        order: order.clone(),
        elements,
        below,
        above,
    }
}

impl ContainmentPoset {
    pub fn order(&self) -> &PreferenceOrder {
        &self.order
    }

    /// Oriented pairs, ordered by the positions they span.
    pub fn elements(&self) -> &[OrderedPair] {
        &self.elements
    }

    fn element(&self, pair: OrderedPair) -> Option<usize> {
        self.elements.iter().position(|&e| e == pair)
    }

    /// True iff `outer` strictly contains `inner`.
    pub fn contains(&self, outer: OrderedPair, inner: OrderedPair) -> bool {
        match (self.element(outer), self.element(inner)) {
            (Some(o), Some(i)) => self.below[o] >> i & 1 == 1,
            _ => false,
        }
    }

    pub fn minimal(&self) -> Vec<OrderedPair> {
        (0..self.elements.len())
            .filter(|&e| self.below[e] == 0)
            .map(|e| self.elements[e])
            .collect()
    }

    pub fn maximal(&self) -> Vec<OrderedPair> {
        (0..self.elements.len())
            .filter(|&e| self.above[e] == 0)
            .map(|e| self.elements[e])
            .collect()
    }

    /// Calls `f` with the rank (`k` down to `1`) of every element, once per
    /// linear extension, in deterministic order.
    pub fn for_each_extension(&self, mut f: impl FnMut(&[u8])) {
        let k = self.elements.len();
        let mut ranks = vec![0u8; k];
        let full = if k == 32 { u32::MAX } else { (1u32 << k) - 1 };
        self.extend(full, k as u8, &mut ranks, &mut f);
    }

    fn extend(&self, remaining: u32, rank: u8, ranks: &mut [u8], f: &mut impl FnMut(&[u8])) {
        if remaining == 0 {
            f(ranks);
            return;
        }
        let mut candidates = remaining;
        while candidates != 0 {
            let e = candidates.trailing_zeros() as usize;
            candidates &= candidates - 1;
            if self.above[e] & remaining == 0 {
                ranks[e] = rank;
                self.extend(remaining & !(1 << e), rank - 1, ranks, f);
            }
        }
    }

    /// Converts an element-rank vector into a canonical relation.
    fn relation(&self, ranks: &[u8]) -> CanonicalIntensity {
        let n = self.order.n();
        let mut values = vec![0i8; n * (n - 1)];
        for (pair, &r) in self.elements.iter().zip(ranks) {
            let (a, b) = (pair.first.index(), pair.second.index());
            values[pair_index(n, a, b)] = r as i8;
            values[pair_index(n, b, a)] = -(r as i8);
        }
        CanonicalIntensity::from_values_unchecked(n, values)
    }

    /// Number of linear extensions, by dynamic programming over up-sets.
    pub fn count_extensions(&self) -> u64 {
        let k = self.elements.len();
        let mut memo: HashMap<u32, u64> = HashMap::new();
        self.count_from(0, k, &mut memo)
    }

    fn count_from(&self, placed: u32, k: usize, memo: &mut HashMap<u32, u64>) -> u64 {
        if placed.count_ones() as usize == k {
            return 1;
        }
        if let Some(&c) = memo.get(&placed) {
            return c;
        }
        let mut total = 0;
        for e in 0..k {
            if placed >> e & 1 == 0 && self.above[e] & !placed == 0 {
                total += self.count_from(placed | 1 << e, k, memo);
            }
        }
        memo.insert(placed, total);
        total
    }
}

/// Every canonical relation inducing the poset's order.
pub fn linear_extensions(poset: &ContainmentPoset) -> Vec<CanonicalIntensity> {
    let mut out = Vec::new();
    poset.for_each_extension(|ranks| out.push(poset.relation(ranks)));
    out
}

/// All canonical strict intensity relations for `n` objects: linear
/// extensions grouped by preference order, orders in lexicographic sequence.
pub fn all_intensity_relations(n: usize) -> Result<Vec<CanonicalIntensity>, EnumerateError> {
    check_range(n, 3, 6)?;
    let mut out = Vec::new();
    for order in all_preference_orders(n)? {
        out.extend(linear_extensions(&containment_poset(&order)));
    }
    Ok(out)
}

/// Streams every relation for `n` without materialising the list.
pub fn for_each_intensity_relation(
    n: usize,
    mut f: impl FnMut(&CanonicalIntensity),
) -> Result<u64, EnumerateError> {
    check_range(n, 3, 6)?;
    let mut count = 0;
    for order in all_preference_orders(n)? {
        let poset = containment_poset(&order);
        poset.for_each_extension(|ranks| {
            count += 1;
            f(&poset.relation(ranks));
        });
    }
    Ok(count)
}

/// Relation count `n! * e(P)` from the extension count of one order's poset.
pub fn count_intensity_relations(n: usize) -> Result<u64, EnumerateError> {
    check_range(n, 3, 8)?;
    let identity = PreferenceOrder::from_ranking_unchecked((0..n as u8).map(ObjectId).collect());
    Ok(perm::factorial(n) * containment_poset(&identity).count_extensions())
}

/// Indexed list of every relation for one `n`, shared by profile iteration
/// and the sweeps. Relation `r` induces preference order `r / per_order`.
#[derive(Debug, Clone)]
pub struct RelationTable {
    n: usize,
    per_order: usize,
    relations: Vec<CanonicalIntensity>,
    lookup: HashMap<Vec<i8>, u32>,
}

impl RelationTable {
    pub fn new(n: usize) -> Result<Self, EnumerateError> {
        check_range(n, 3, 5)?;
        let relations = all_intensity_relations(n)?;
        let per_order = relations.len() / perm::factorial(n) as usize;
        let lookup = relations
            .iter()
            .enumerate()
            .map(|(i, s)| (s.values().to_vec(), i as u32))
            .collect();
        Ok(RelationTable {
            n,
            per_order,
            relations,
            lookup,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn per_order(&self) -> usize {
        self.per_order
    }

    pub fn relations(&self) -> &[CanonicalIntensity] {
        &self.relations
    }

    pub fn get(&self, index: u32) -> &CanonicalIntensity {
        &self.relations[index as usize]
    }

    pub fn index_of(&self, s: &CanonicalIntensity) -> Option<u32> {
        self.lookup.get(s.values()).copied()
    }

    /// Lexicographic rank of the preference order relation `index` induces.
    pub fn order_rank(&self, index: u32) -> usize {
        index as usize / self.per_order
    }

    /// Size of the full profile space, `R^n`.
    pub fn profile_count(&self) -> u128 {
        (self.relations.len() as u128).pow(self.n as u32)
    }

    /// Relation indices of the profile at `index` in `0..R^n`; agent 0 is
    /// the most significant digit.
    pub fn profile_indices_at(&self, mut index: u128) -> Vec<u32> {
        let r = self.relations.len() as u128;
        let mut digits = vec![0u32; self.n];
        for d in digits.iter_mut().rev() {
            *d = (index % r) as u32;
            index /= r;
        }
        digits
    }

    pub fn profile(&self, indices: &[u32]) -> Profile {
        Profile::new(indices.iter().map(|&i| self.get(i).clone()).collect())
            .expect("table relations share n")
    }

    pub fn agents<'a>(&'a self, indices: &[u32]) -> Vec<&'a CanonicalIntensity> {
        indices.iter().map(|&i| self.get(i)).collect()
    }

    /// The `count` random profiles of block `block` for `seed`.
    pub fn random_block(&self, seed: u64, block: u64, count: u64) -> Vec<Vec<u32>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(block);
        let r = self.relations.len() as u32;
        (0..count)
            .map(|_| (0..self.n).map(|_| rng.gen_range(0..r)).collect())
            .collect()
    }
}

/// Uniform sampler over all relations for `n`, for sizes where the full
/// list is too large to hold. Draws a uniform preference order, then a
/// uniform linear extension using up-set counts.
pub struct RelationSampler {
    n: usize,
    poset: ContainmentPoset,
    /// Linear extensions of the elements not yet placed, keyed by the placed set.
    counts: HashMap<u32, u64>,
}

impl RelationSampler {
    pub fn new(n: usize) -> Result<Self, EnumerateError> {
        check_range(n, 3, 7)?;
        let identity =
            PreferenceOrder::from_ranking_unchecked((0..n as u8).map(ObjectId).collect());
        let poset = containment_poset(&identity);
        let mut counts = HashMap::new();
        poset.count_from(0, poset.elements.len(), &mut counts);
        Ok(RelationSampler { n, poset, counts })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn remaining(&self, placed: u32) -> u64 {
        if placed.count_ones() as usize == self.poset.elements.len() {
            1
        } else {
            self.counts[&placed]
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> CanonicalIntensity {
        let k = self.poset.elements.len();
        let mut ranks = vec![0u8; k];
        let mut placed = 0u32;
        for rank in (1..=k as u8).rev() {
            let mut pick = rng.gen_range(0..self.remaining(placed));
            for (e, above) in self.poset.above.iter().enumerate() {
                if placed >> e & 1 == 0 && above & !placed == 0 {
                    let c = self.remaining(placed | 1 << e);
                    if pick < c {
                        ranks[e] = rank;
                        placed |= 1 << e;
                        break;
                    }
                    pick -= c;
                }
            }
        }
        let mut order: Vec<u8> = (0..self.n as u8).collect();
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), rng);
        self.poset.relation(&ranks).relabel(&order)
    }
}

/// How [`profile_iterator`] walks the profile space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IterMode {
    Full,
    SymmetryReduced,
    Random { seed: u64, count: u64 },
}

/// Iterator over profiles of one size. See [`IterMode`].
pub struct ProfileIterator<'a> {
    table: &'a RelationTable,
    state: IterState,
}

enum IterState {
    Full {
        next: u128,
        end: u128,
    },
    Symmetry {
        reps: std::vec::IntoIter<OrbitRep>,
    },
    Random {
        seed: u64,
        produced: u64,
        count: u64,
        buffer: std::vec::IntoIter<Vec<u32>>,
    },
}

pub fn profile_iterator(
    table: &RelationTable,
    mode: IterMode,
    budget: u128,
) -> Result<ProfileIterator<'_>, EnumerateError> {
    let state = match mode {
        IterMode::Full => {
            let count = table.profile_count();
            if count > budget {
                return Err(EnumerateError::BudgetExceeded { count, budget });
            }
            IterState::Full {
                next: 0,
                end: count,
            }
        }
        IterMode::SymmetryReduced => {
            let group = SymmetryGroup::new(table)?;
            let mut reps = Vec::new();
            for unit in group.units() {
                group.for_each_rep(unit, |rep| reps.push(rep.clone()));
            }
            IterState::Symmetry {
                reps: reps.into_iter(),
            }
        }
        IterMode::Random { seed, count } => IterState::Random {
            seed,
            produced: 0,
            count,
            buffer: Vec::new().into_iter(),
        },
    };
    Ok(ProfileIterator { table, state })
}

impl ProfileIterator<'_> {
    /// Relation indices of the next profile; [`Iterator::next`] wraps this.
    pub fn next_indices(&mut self) -> Option<Vec<u32>> {
        match &mut self.state {
            IterState::Full { next, end } => {
                if *next >= *end {
                    return None;
                }
                let indices = self.table.profile_indices_at(*next);
                *next += 1;
                Some(indices)
            }
            IterState::Symmetry { reps } => reps.next().map(|r| r.relations),
            IterState::Random {
                seed,
                produced,
                count,
                buffer,
            } => {
                if *produced >= *count {
                    return None;
                }
                if buffer.len() == 0 {
                    let block = *produced / RANDOM_BLOCK;
                    let len = RANDOM_BLOCK.min(*count - block * RANDOM_BLOCK);
                    *buffer = self.table.random_block(*seed, block, len).into_iter();
                }
                *produced += 1;
                buffer.next()
            }
        }
    }
}

impl Iterator for ProfileIterator<'_> {
    type Item = Profile;

    fn next(&mut self) -> Option<Profile> {
        self.next_indices().map(|i| self.table.profile(&i))
    }
}
