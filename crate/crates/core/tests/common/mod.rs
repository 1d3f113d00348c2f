//! Helpers shared by the integration targets: seeded profile generators and
//! a from-scratch evaluation of the definitions that shares nothing with the
//! library's efficiency code beyond reading intensity values.

#![allow(dead_code)]

use intensity::enumerate::RelationTable;
use intensity::model::{CanonicalIntensity, ObjectId, Profile};

pub fn ranking(line: &str, n: usize) -> CanonicalIntensity {
    intensity::io::parse_ranking_line(line, n).unwrap()
}

pub fn profile_of(lines: &[&str]) -> Profile {
    let n = lines.len();
    Profile::new(lines.iter().map(|l| ranking(l, n)).collect()).unwrap()
}

pub fn example3() -> Profile {
    profile_of(&["ac>ab>bc", "ac>bc>ab", "ac>ab>bc"])
}

/// `count` uniform profiles, reproducible from `seed`.
pub fn random_profiles(table: &RelationTable, count: u64, seed: u64) -> Vec<Profile> {
    let mut out = Vec::new();
    let mut block = 0;
    while (out.len() as u64) < count {
        let want = (count - out.len() as u64).min(4096);
        for indices in table.random_block(seed, block, want) {
            out.push(table.profile(&indices));
        }
        block += 1;
    }
    out
}

/// Permutations of `0..n` in no particular order.
pub fn perms(n: usize) -> Vec<Vec<u8>> {
    fn go(prefix: &mut Vec<u8>, n: usize, out: &mut Vec<Vec<u8>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for o in 0..n as u8 {
            if !prefix.contains(&o) {
                prefix.push(o);
                go(prefix, n, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), n, &mut out);
    out
}

fn s(p: &Profile, agent: usize, a: u8, b: u8) -> i64 {
    p.agent(agent).value(ObjectId(a), ObjectId(b)) as i64
}

fn prefers(p: &Profile, agent: usize, a: u8, b: u8) -> bool {
    s(p, agent, a, b) > 0
}

pub fn oracle_pareto(p: &Profile) -> Vec<Vec<u8>> {
    let n = p.n();
    let all = perms(n);
    let dominated = |x: &Vec<u8>| {
        all.iter().any(|y| {
            let weak = (0..n).all(|i| y[i] == x[i] || prefers(p, i, y[i], x[i]));
            weak && (0..n).any(|i| prefers(p, i, y[i], x[i]))
        })
    };
    all.iter().filter(|x| !dominated(x)).cloned().collect()
}

/// Dominance straight from the definition: for every agent pair that swaps,
/// the agent holding `a` under `x` must care at least as much about `a` over
/// `b` as the other, strictly for some pair.
pub fn oracle_dominates(p: &Profile, x: &[u8], y: &[u8]) -> bool {
    let n = p.n();
    let mut any = false;
    let mut strict = false;
    for i in 0..n {
        for j in 0..n {
            if i == j || x[i] == x[j] || x[i] != y[j] || x[j] != y[i] {
                continue;
            }
            any = true;
            let (lhs, rhs) = (s(p, i, x[i], x[j]), s(p, j, y[j], y[i]));
            if lhs < rhs {
                return false;
            }
            strict |= lhs > rhs;
        }
    }
    any && strict
}

pub fn label(x: &[u8]) -> String {
    x.iter().map(|&o| (b'a' + o) as char).collect()
}

/// Efficient allocations by the direct definition, as sorted labels.
pub fn oracle_efficient(p: &Profile) -> Vec<String> {
    let pe = oracle_pareto(p);
    let mut out: Vec<String> = pe
        .iter()
        .filter(|y| !pe.iter().any(|x| oracle_dominates(p, x, y)))
        .map(|x| label(x))
        .collect();
    out.sort();
    out
}

/// Edges of the dominance relation by the direct definition, sorted.
pub fn oracle_edges(p: &Profile) -> Vec<(String, String)> {
    let pe = oracle_pareto(p);
    let mut out = Vec::new();
    for x in &pe {
        for y in &pe {
            if oracle_dominates(p, x, y) {
                out.push((label(x), label(y)));
            }
        }
    }
    out.sort();
    out
}

pub mod props;
