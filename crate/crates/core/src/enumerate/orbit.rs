//! Orbit representatives of the profile space under simultaneous object
//! relabelling and agent relabelling.
//!
//! A profile is a tuple of relation indices. Agent relabelling makes it a
//! multiset, so representatives are sorted tuples. Object relabelling acts
//! freely on relations (only the identity fixes a preference order), and
//! every orbit has a member whose smallest relation lies in the block of
//! relations inducing the identity order `a > b > ...`. The representative
//! of an orbit is its lexicographically smallest sorted tuple.

use super::{EnumerateError, RelationTable};
use crate::perm;

/// Largest `n` with a precomputed action table.
pub const MAX_SYMMETRY_N: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitRep {
    /// Sorted relation indices.
    pub relations: Vec<u32>,
    /// Number of profiles (ordered tuples) in the orbit.
    pub orbit_size: u64,
}

/// The prefix `(first, second)` of representative tuples; the unit of work in
/// symmetry-reduced sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymmetryUnit {
    pub first: u32,
    pub second: u32,
}

pub struct SymmetryGroup {
    n: usize,
    relation_count: u32,
    per_order: u32,
    perms: Vec<Vec<u8>>,
    /// `action[p * R + r]`: index of relation `r` relabelled by `perms[p]`.
    action: Vec<u32>,
    /// Permutation index sending relation `r` into the identity-order block.
    normalizer: Vec<u16>,
}

impl SymmetryGroup {
    pub fn new(table: &RelationTable) -> Result<Self, EnumerateError> {
        let n = table.n();
        if n > MAX_SYMMETRY_N {
            return Err(EnumerateError::SymmetryUnsupported {
                n,
                max: MAX_SYMMETRY_N,
            });
        }
        let perms = perm::permutations(n);
        let r = table.len();
        let mut action = Vec::with_capacity(perms.len() * r);
        for p in &perms {
            for s in table.relations() {
                let moved = s.relabel(p);
                action.push(
                    table
                        .index_of(&moved)
                        .expect("relabelling preserves validity"),
                );
            }
        }
        let normalizer = (0..r as u32)
            .map(|i| {
                let ranking: Vec<u8> = perms[table.order_rank(i)].clone();
                perm::rank(&perm::inverse(&ranking)) as u16
            })
            .collect();
        Ok(SymmetryGroup {
            n,
            relation_count: r as u32,
            per_order: table.per_order() as u32,
            perms,
            action,
            normalizer,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn act(&self, p: usize, r: u32) -> u32 {
        self.action[p * self.relation_count as usize + r as usize]
    }

    /// Work units in sweep order.
    pub fn units(&self) -> Vec<SymmetryUnit> {
        let mut out = Vec::new();
        for first in 0..self.per_order {
            for second in first..self.relation_count {
                out.push(SymmetryUnit { first, second });
            }
        }
        out
    }

    /// Representative of the orbit containing the (unsorted) tuple.
    pub fn canonicalize(&self, tuple: &[u32]) -> Vec<u32> {
        let mut best: Option<Vec<u32>> = None;
        for &m in tuple {
            let candidate = self.image(self.normalizer[m as usize] as usize, tuple);
            if best.as_ref().is_none_or(|b| candidate < *b) {
                best = Some(candidate);
            }
        }
        best.expect("non-empty tuple")
    }

    fn image(&self, p: usize, tuple: &[u32]) -> Vec<u32> {
        let mut out: Vec<u32> = tuple.iter().map(|&r| self.act(p, r)).collect();
        out.sort_unstable();
        out
    }

    /// Orbit size if `sorted` is a representative, `None` otherwise.
    pub fn orbit_size(&self, sorted: &[u32]) -> Option<u64> {
        debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
        if sorted[0] >= self.per_order {
            return None;
        }
        let mut buf = vec![0u32; sorted.len()];
        let mut stabilizer: Vec<u16> = Vec::with_capacity(sorted.len());
        for &m in sorted {
            let p = self.normalizer[m as usize];
            if stabilizer.contains(&p) {
                continue;
            }
            for (b, &r) in buf.iter_mut().zip(sorted) {
                *b = self.act(p as usize, r);
            }
            buf.sort_unstable();
            match buf.as_slice().cmp(sorted) {
                std::cmp::Ordering::Less => return None,
                std::cmp::Ordering::Equal => stabilizer.push(p),
                std::cmp::Ordering::Greater => {}
            }
        }
        let group = perm::factorial(self.n);
        let mut arrangements = perm::factorial(sorted.len());
        let mut run = 1;
        for i in 1..=sorted.len() {
            if i < sorted.len() && sorted[i] == sorted[i - 1] {
                run += 1;
            } else {
                arrangements /= perm::factorial(run);
                run = 1;
            }
        }
        Some(group / stabilizer.len() as u64 * arrangements)
    }

    /// Calls `f` for each representative whose first two entries are `unit`.
    pub fn for_each_rep(&self, unit: SymmetryUnit, mut f: impl FnMut(&OrbitRep)) {
        let mut tuple = vec![0u32; self.n];
        tuple[0] = unit.first;
        if self.n == 1 {
            return;
        }
        tuple[1] = unit.second;
        self.fill(2, &mut tuple, &mut f);
    }

    fn fill(&self, depth: usize, tuple: &mut Vec<u32>, f: &mut impl FnMut(&OrbitRep)) {
        if depth == tuple.len() {
            if let Some(orbit_size) = self.orbit_size(tuple) {
                f(&OrbitRep {
                    relations: tuple.clone(),
                    orbit_size,
                });
            }
            return;
        }
        for r in tuple[depth - 1]..self.relation_count {
            tuple[depth] = r;
            self.fill(depth + 1, tuple, f);
        }
    }

    /// Every relabelled image of a tuple: `n!` object permutations times
    /// `n!` agent permutations, as ordered tuples.
    pub fn orbit(&self, tuple: &[u32]) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        for p in 0..self.perms.len() {
            let moved: Vec<u32> = tuple.iter().map(|&r| self.act(p, r)).collect();
            for agents in &self.perms {
                out.push(agents.iter().map(|&a| moved[a as usize]).collect());
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

/// Orbit invariant by explicit minimisation: the lexicographically smallest
/// concatenation of flat value arrays over all `n! * n!` relabellings.
pub fn canonical_encoding(table: &RelationTable, tuple: &[u32]) -> Vec<i8> {
    let n = table.n();
    let perms = perm::permutations(n);
    let mut best: Option<Vec<i8>> = None;
    for objects in &perms {
        let moved: Vec<_> = tuple
            .iter()
            .map(|&r| table.get(r).relabel(objects))
            .collect();
        for agents in &perms {
            let enc: Vec<i8> = agents
                .iter()
                .flat_map(|&a| moved[a as usize].values().iter().copied())
                .collect();
            if best.as_ref().is_none_or(|b| enc < *b) {
                best = Some(enc);
            }
        }
    }
    best.expect("n >= 1")
}
