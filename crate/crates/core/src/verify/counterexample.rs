//! The five-agent profile with no intensity-efficient allocation.
//!
//! Agents 1 to 3 share the order `a > b > c > d > e` with three distinct
//! intensity rankings. Agents 4 and 5 are only pinned down by their top
//! choices (`d` and `c`), so a concrete run needs explicit completions.

use serde::Serialize;
use thiserror::Error;

use crate::efficiency::{
    elementary_cycles, find_cycle, flipped_pairs, Allocation, AllocationSpace, DominanceDigraph,
};
use crate::enumerate::RelationTable;
use crate::io;
use crate::model::{CanonicalIntensity, ModelError, ObjectId, OrderedPair, Profile};

pub const AGENT_1: &str = "ae>ad>be>bd>ac>ce>ab>bc>cd>de";
pub const AGENT_2: &str = "ae>ad>be>ac>bd>ce>cd>ab>bc>de";
pub const AGENT_3: &str = "ae>ad>ac>be>bd>ce>cd>de>ab>bc";
/// Order `d > a > b > c > e`; `(d,e)` spans the whole order so it is ranked 10.
pub const DEFAULT_AGENT_4: &str = "de>dc>db>da>ae>ac>ab>be>bc>ce";
/// Order `c > e > a > b > d` with `s(c,e) = 1`.
pub const DEFAULT_AGENT_5: &str = "cd>cb>ed>ca>eb>ad>ea>bd>ab>ce";

const TOP_4: ObjectId = ObjectId(3);
const TOP_5: ObjectId = ObjectId(2);

#[derive(Debug, Error)]
pub enum CounterexampleError {
    #[error("agent {agent} completion must rank {expected} first, ranks {got} first")]
    TopChoice {
        agent: usize,
        expected: String,
        got: String,
    },
    #[error("completion for agent {agent} has n = {got}, expected 5")]
    Size { agent: usize, got: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn relation(line: &str) -> CanonicalIntensity {
    io::parse_ranking_line(line, 5).expect("built-in ranking is canonical")
}

/// The three fixed agents of the counterexample.
pub fn fixed_agents() -> [CanonicalIntensity; 3] {
    [relation(AGENT_1), relation(AGENT_2), relation(AGENT_3)]
}

pub fn default_completions() -> (CanonicalIntensity, CanonicalIntensity) {
    (relation(DEFAULT_AGENT_4), relation(DEFAULT_AGENT_5))
}

pub fn build_table2_profile(
    completion4: &CanonicalIntensity,
    completion5: &CanonicalIntensity,
) -> Result<Profile, CounterexampleError> {
    for (agent, s, top) in [(4, completion4, TOP_4), (5, completion5, TOP_5)] {
        if s.n() != 5 {
            return Err(CounterexampleError::Size { agent, got: s.n() });
        }
        if s.top() != top {
            return Err(CounterexampleError::TopChoice {
                agent,
                expected: top.name(5),
                got: s.top().name(5),
            });
        }
    }
    let [s1, s2, s3] = fixed_agents();
    Ok(Profile::new(vec![
        s1,
        s2,
        s3,
        completion4.clone(),
        completion5.clone(),
    ])?)
}

pub fn default_profile() -> Profile {
    let (c4, c5) = default_completions();
    build_table2_profile(&c4, &c5).expect("default completions are valid")
}

/// The six displayed allocations, named as in the cycle `s D t D x D y D w D z D s`.
pub const LISTED: [(&str, &str); 6] = [
    ("s", "cabde"),
    ("t", "cbade"),
    ("x", "abcde"),
    ("y", "acbde"),
    ("w", "bcade"),
    ("z", "bacde"),
];

/// `s_higher(preferred, other) > s_lower(preferred, other)`, agents 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CitedInequality {
    pub higher: usize,
    pub lower: usize,
    pub preferred: char,
    pub other: char,
}

impl CitedInequality {
    const fn new(higher: usize, lower: usize, preferred: char, other: char) -> Self {
        CitedInequality {
            higher,
            lower,
            preferred,
            other,
        }
    }

    fn pair(&self) -> OrderedPair {
        OrderedPair::new(self.preferred as u8 - b'a', self.other as u8 - b'a')
    }
}

/// Each step `(dominator, dominated, inequality)`, following the argument
/// that starts from `s` and walks backwards around the cycle.
pub const CYCLE_STEPS: [(&str, &str, CitedInequality); 6] = [
    ("z", "s", CitedInequality::new(1, 3, 'b', 'c')),
    ("w", "z", CitedInequality::new(3, 2, 'a', 'c')),
    ("y", "w", CitedInequality::new(1, 3, 'a', 'b')),
    ("x", "y", CitedInequality::new(2, 3, 'b', 'c')),
    ("t", "x", CitedInequality::new(3, 1, 'a', 'c')),
    ("s", "t", CitedInequality::new(2, 3, 'a', 'b')),
];

/// The cycle in dominance order.
pub const CYCLE_ORDER: [&str; 6] = ["s", "t", "x", "y", "w", "z"];

pub fn listed(name: &str) -> Allocation {
    let label = LISTED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, l)| *l)
        .expect("known allocation name");
    Allocation::parse(label).expect("listed allocation is a bijection")
}

#[derive(Debug, Clone, Serialize)]
pub struct StepCheck {
    pub dominator: String,
    pub dominated: String,
    pub inequality: CitedInequality,
    pub higher_value: i8,
    pub lower_value: i8,
    /// The only flipped pair between the two allocations is the cited one.
    pub sole_flip: bool,
    pub inequality_holds: bool,
    pub edge_present: bool,
}

impl StepCheck {
    pub fn verified(&self) -> bool {
        self.sole_flip && self.inequality_holds && self.edge_present
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleReport {
    pub completion4: String,
    pub completion5: String,
    pub pareto_count: usize,
    pub pareto: Vec<String>,
    pub six_listed_present: bool,
    pub steps: Vec<StepCheck>,
    /// Every edge of `s D t D x D y D w D z D s` holds via its cited inequality.
    pub cycle_verified: bool,
    /// Shortest cycle reported by SCC-based detection on the subgraph of the
    /// six listed allocations.
    pub detected_cycle: Option<Vec<String>>,
    /// Every elementary cycle of that subgraph.
    pub listed_cycles: Vec<Vec<String>>,
    /// The six-cycle is among `listed_cycles`, up to rotation.
    pub six_cycle_detected: bool,
    /// Cycle reported by detection on the whole dominance digraph.
    pub global_cycle: Option<Vec<String>>,
    pub ie_set: Vec<String>,
    pub edge_count: usize,
}

impl CounterexampleReport {
    /// Non-existence confirmed: the cycle holds and nothing is efficient.
    pub fn confirmed(&self) -> bool {
        self.six_listed_present
            && self.cycle_verified
            && self.six_cycle_detected
            && self.ie_set.is_empty()
    }
}

fn same_cycle(found: &[String], expected: &[String]) -> bool {
    found.len() == expected.len()
        && (0..expected.len())
            .any(|r| (0..expected.len()).all(|i| found[i] == expected[(i + r) % expected.len()]))
}

pub fn verify_counterexample(profile: &Profile) -> CounterexampleReport {
    let space = AllocationSpace::new(profile.n()).expect("n = 5 is supported");
    verify_with(&space, profile)
}

pub(crate) fn verify_with(space: &AllocationSpace, profile: &Profile) -> CounterexampleReport {
    let graph = space.digraph_of(profile);
    report_for(profile, &graph)
}

fn report_for(profile: &Profile, graph: &DominanceDigraph) -> CounterexampleReport {
    let six_listed_present = LISTED
        .iter()
        .all(|(name, _)| graph.node_index(&listed(name)).is_some());

    let steps: Vec<StepCheck> = CYCLE_STEPS
        .iter()
        .map(|&(from, to, ineq)| {
            let (x, y) = (listed(from), listed(to));
            let pair = ineq.pair();
            let higher_value = profile
                .agent(ineq.higher - 1)
                .value(pair.first, pair.second);
            let lower_value = profile.agent(ineq.lower - 1).value(pair.first, pair.second);
            let flips = flipped_pairs(&x, &y);
            let (i, j) = (ineq.higher - 1, ineq.lower - 1);
            let sole_flip = flips.len() == 1 && {
                let f = flips[0];
                (f.i, f.j, f.a, f.b) == (i.min(j), i.max(j), x.object(i.min(j)), x.object(i.max(j)))
                    && x.object(i) == pair.first
                    && x.object(j) == pair.second
            };
            StepCheck {
                dominator: x.label(),
                dominated: y.label(),
                inequality: ineq,
                higher_value,
                lower_value,
                sole_flip,
                inequality_holds: higher_value > lower_value,
                edge_present: graph.has_edge(&x, &y),
            }
        })
        .collect();
    let cycle_verified = steps.iter().all(StepCheck::verified);

    let six: Vec<Allocation> = CYCLE_ORDER.iter().map(|n| listed(n)).collect();
    let expected: Vec<String> = six.iter().map(Allocation::label).collect();
    let sub = graph.induced(&six);
    let detected_cycle = find_cycle(&sub).map(|c| io::labels(&c));
    let listed_cycles: Vec<Vec<String>> = elementary_cycles(&sub, 1000)
        .iter()
        .map(|c| io::labels(c))
        .collect();
    let six_cycle_detected =
        six_listed_present && listed_cycles.iter().any(|c| same_cycle(c, &expected));

    let (c4, c5) = (profile.agent(3), profile.agent(4));
    CounterexampleReport {
        completion4: c4.ranking_line(),
        completion5: c5.ranking_line(),
        pareto_count: graph.nodes().len(),
        pareto: io::labels(graph.nodes()),
        six_listed_present,
        steps,
        cycle_verified,
        detected_cycle,
        listed_cycles,
        six_cycle_detected,
        global_cycle: find_cycle(graph).map(|c| io::labels(&c)),
        ie_set: io::labels(&graph.undominated()),
        edge_count: graph.edges().len(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompletionSearch {
    pub completion4: Option<String>,
    pub completion5: Option<String>,
    /// Pairs evaluated, including the successful one.
    pub tried: u64,
    /// Admissible pairs: relations ranking `d` first times relations ranking `c` first.
    pub space: u64,
}

impl CompletionSearch {
    pub fn found(&self) -> bool {
        self.completion4.is_some()
    }
}

/// Walks admissible completions until one confirms non-existence.
///
/// Agent 5 is the outer loop, agent 4 the inner. Agent-5 candidates are
/// tried by ascending `s_5(c,e)`, agent-4 candidates by descending
/// `s_4(d,e)`, ties in enumeration order.
pub fn search_completions() -> CompletionSearch {
    search_completions_with(|_| true, |_| true, None)
}

/// [`search_completions`] restricted by per-agent filters and an optional cap
/// on the number of pairs evaluated.
pub fn search_completions_with(
    keep4: impl Fn(&CanonicalIntensity) -> bool,
    keep5: impl Fn(&CanonicalIntensity) -> bool,
    limit: Option<u64>,
) -> CompletionSearch {
    let table = RelationTable::new(5).expect("n = 5 table");
    let space_alloc = AllocationSpace::new(5).expect("n = 5");
    let top = |s: &CanonicalIntensity, o: ObjectId| s.induced_preference().ranking()[0] == o;
    let fours: Vec<&CanonicalIntensity> =
        table.relations().iter().filter(|s| top(s, TOP_4)).collect();
    let fives: Vec<&CanonicalIntensity> =
        table.relations().iter().filter(|s| top(s, TOP_5)).collect();
    let space = (fours.len() * fives.len()) as u64;
    let mut candidates4: Vec<&CanonicalIntensity> =
        fours.into_iter().filter(|s| keep4(s)).collect();
    let mut candidates5: Vec<&CanonicalIntensity> =
        fives.into_iter().filter(|s| keep5(s)).collect();
    let (c, d, e) = (ObjectId(2), ObjectId(3), ObjectId(4));
    candidates4.sort_by_key(|s| std::cmp::Reverse(s.value(d, e)));
    candidates5.sort_by_key(|s| s.value(c, e));
    let [s1, s2, s3] = fixed_agents();

    let mut tried = 0;
    for c5 in &candidates5 {
        for c4 in &candidates4 {
            if limit.is_some_and(|l| tried >= l) {
                return CompletionSearch {
                    completion4: None,
                    completion5: None,
                    tried,
                    space,
                };
            }
            tried += 1;
            let agents = [&s1, &s2, &s3, *c4, *c5];
            let v = space_alloc.verdict(&agents);
            if v.efficient == 0 {
                let profile = build_table2_profile(c4, c5).expect("admissible by construction");
                if verify_with(&space_alloc, &profile).confirmed() {
                    return CompletionSearch {
                        completion4: Some(c4.ranking_line()),
                        completion5: Some(c5.ranking_line()),
                        tried,
                        space,
                    };
                }
            }
        }
    }
    CompletionSearch {
        completion4: None,
        completion5: None,
        tried,
        space,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_agents_induce_the_common_order() {
        for s in fixed_agents() {
            assert_eq!(s.induced_preference().label(), "a>b>c>d>e");
        }
        let (c4, c5) = default_completions();
        assert_eq!(c4.induced_preference().label(), "d>a>b>c>e");
        assert_eq!(c4.value(ObjectId(3), ObjectId(4)), 10);
        assert_eq!(c5.induced_preference().label(), "c>e>a>b>d");
        assert_eq!(c5.value(ObjectId(2), ObjectId(4)), 1);
    }

    #[test]
    fn default_agent4_is_first_extension_of_its_order() {
        use crate::enumerate::{containment_poset, linear_extensions};
        use crate::model::PreferenceOrder;
        let order = PreferenceOrder::new([3, 0, 1, 2, 4].map(ObjectId).to_vec()).unwrap();
        let first = linear_extensions(&containment_poset(&order)).remove(0);
        assert_eq!(first.ranking_line(), DEFAULT_AGENT_4);
    }

    #[test]
    fn top_choice_constraint() {
        let (c4, c5) = default_completions();
        assert!(build_table2_profile(&c4, &c5).is_ok());
        let alt5 = relation("ce>cd>ae>cb>ad>be>ca>bd>ab>de");
        assert_eq!(alt5.induced_preference().label(), "c>a>b>d>e");
        assert!(build_table2_profile(&c4, &alt5).is_ok());
        let [s1, ..] = fixed_agents();
        assert!(matches!(
            build_table2_profile(&s1, &c5),
            Err(CounterexampleError::TopChoice { agent: 4, .. })
        ));
        assert!(matches!(
            build_table2_profile(&c4, &c4),
            Err(CounterexampleError::TopChoice { agent: 5, .. })
        ));
    }

    #[test]
    fn cycle_inequalities_take_the_expected_values() {
        let report = verify_counterexample(&default_profile());
        let values: Vec<(i8, i8)> = report
            .steps
            .iter()
            .map(|s| (s.higher_value, s.lower_value))
            .collect();
        assert_eq!(values, vec![(3, 1), (8, 7), (4, 2), (2, 1), (8, 6), (3, 2)]);
        assert!(report
            .steps
            .iter()
            .all(|s| s.sole_flip && s.inequality_holds));
    }

    #[test]
    fn default_completions_confirm_non_existence() {
        let report = verify_counterexample(&default_profile());
        assert!(report.confirmed());
        assert_eq!((report.pareto_count, report.edge_count), (18, 43));
    }

    #[test]
    fn cycle_survives_other_completions() {
        let (c4, _) = default_completions();
        let alt5 = relation("ce>cd>ae>cb>ad>be>ca>bd>ab>de");
        let report = verify_counterexample(&build_table2_profile(&c4, &alt5).unwrap());
        assert!(report.cycle_verified && report.six_cycle_detected);
        assert!(!report.ie_set.is_empty());
    }

    fn last_is(s: &CanonicalIntensity, o: ObjectId) -> bool {
        s.induced_preference().ranking().last() == Some(&o)
    }

    #[test]
    fn agent5_ranking_e_last_never_confirms() {
        let (c4, _) = default_completions();
        let found = search_completions_with(|s| *s == c4, |s| last_is(s, ObjectId(4)), None);
        assert!(!found.found());
        assert_eq!(found.tried, 4608);
    }

    #[test]
    fn agent4_ranking_e_last_confirms_at_once() {
        let (_, c5) = default_completions();
        let found = search_completions_with(|s| last_is(s, ObjectId(4)), |s| *s == c5, None);
        assert!(found.found());
        assert_eq!(found.tried, 1);
    }
}
