//! Property checks over seeded random profiles. Each returns the first
//! counterexample found, so the same checks back both the property target
//! and the acceptance run.

use intensity::efficiency::{
    dominance_digraph, flipped_pairs, intensity_efficient_set, pareto_set, Allocation,
    AllocationSpace,
};
use intensity::enumerate::RelationTable;
use intensity::io::labels;
use intensity::model::Profile;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{oracle_edges, oracle_efficient, random_profiles};

type Check = Result<(), String>;

fn lines(p: &Profile) -> String {
    p.agents()
        .iter()
        .map(|s| s.ranking_line())
        .collect::<Vec<_>>()
        .join(" | ")
}

fn sorted(mut v: Vec<String>) -> Vec<String> {
    v.sort();
    v
}

/// Never both `x D y` and `y D x`, and never `x D x`.
pub fn asymmetric(table: &RelationTable, count: u64, seed: u64) -> Check {
    let space = AllocationSpace::new(table.n()).unwrap();
    for p in random_profiles(table, count, seed) {
        let g = space.digraph_of(&p);
        for &(x, y) in g.edges() {
            if x == y || g.edges().binary_search(&(y, x)).is_ok() {
                return Err(format!("{}: edge {x}->{y} breaks asymmetry", lines(&p)));
            }
        }
    }
    Ok(())
}

/// Every edge joins allocations that swap at least one pair of objects.
pub fn edges_need_flip(table: &RelationTable, count: u64, seed: u64) -> Check {
    let space = AllocationSpace::new(table.n()).unwrap();
    for p in random_profiles(table, count, seed) {
        let g = space.digraph_of(&p);
        for (x, y) in g.edge_allocations() {
            if flipped_pairs(x, y).is_empty() {
                return Err(format!("{}: {x} D {y} without a flipped pair", lines(&p)));
            }
        }
    }
    Ok(())
}

/// Efficient set and edges match the from-scratch oracle; the fast path
/// agrees with the free functions; the efficient set sits inside the Pareto
/// set and equals it when there are no edges.
pub fn matches_oracle(table: &RelationTable, count: u64, seed: u64) -> Check {
    let space = AllocationSpace::new(table.n()).unwrap();
    for p in random_profiles(table, count, seed) {
        let g = space.digraph_of(&p);
        let efficient = sorted(labels(&g.undominated()));
        if efficient != oracle_efficient(&p) {
            return Err(format!(
                "{}: efficient set {efficient:?} differs from oracle",
                lines(&p)
            ));
        }
        let edges: Vec<(String, String)> = {
            let mut e: Vec<_> = g
                .edge_allocations()
                .map(|(x, y)| (x.label(), y.label()))
                .collect();
            e.sort();
            e
        };
        if edges != oracle_edges(&p) {
            return Err(format!("{}: edges differ from oracle", lines(&p)));
        }
        let slow = dominance_digraph(&p);
        if slow.nodes() != g.nodes() || slow.edges() != g.edges() {
            return Err(format!("{}: fast digraph differs", lines(&p)));
        }
        let pareto = sorted(labels(&pareto_set(&p)));
        if !efficient.iter().all(|x| pareto.contains(x)) {
            return Err(format!(
                "{}: efficient allocation outside Pareto set",
                lines(&p)
            ));
        }
        if g.edges().is_empty() && efficient != pareto {
            return Err(format!("{}: no edges but efficient != Pareto", lines(&p)));
        }
        let verdict = space.verdict(&p.agents().iter().collect::<Vec<_>>());
        if verdict.efficient != efficient.len() || verdict.edges != edges.len() {
            return Err(format!("{}: verdict counts disagree", lines(&p)));
        }
    }
    Ok(())
}

/// Renaming objects or agents maps the efficient set accordingly.
pub fn equivariant(table: &RelationTable, count: u64, seed: u64) -> Check {
    let n = table.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut perm: Vec<u8> = (0..n as u8).collect();
    for p in random_profiles(table, count, seed) {
        let base = intensity_efficient_set(&p);

        perm.shuffle(&mut rng);
        let moved = intensity_efficient_set(&p.relabel_objects(&perm));
        let expect: Vec<Allocation> = base.iter().map(|x| x.relabel_objects(&perm)).collect();
        if sorted(labels(&moved)) != sorted(labels(&expect)) {
            return Err(format!(
                "{}: object relabelling {perm:?} not equivariant",
                lines(&p)
            ));
        }

        perm.shuffle(&mut rng);
        let moved = intensity_efficient_set(&p.permute_agents(&perm));
        let expect: Vec<Allocation> = base.iter().map(|x| x.permute_agents(&perm)).collect();
        if sorted(labels(&moved)) != sorted(labels(&expect)) {
            return Err(format!(
                "{}: agent permutation {perm:?} not equivariant",
                lines(&p)
            ));
        }
    }
    Ok(())
}
