//! Canonical strict preference-intensity relations.
//!
//! An agent's intensity relation ranks the ordered pairs of distinct objects.
//! In canonical form the pair ranked `r`-th from the bottom among the
//! positively oriented pairs carries value `r`, its reverse carries `-r`, and
//! the diagonal is implicitly zero. Values therefore range over `-k..=k` with
//! `k = n(n-1)/2`.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Largest problem size any type in this crate accepts.
pub const MAX_OBJECTS: usize = 8;

/// Number of unordered pairs of distinct objects, `C(n, 2)`.
pub const fn pair_count(n: usize) -> usize {
    n * (n - 1) / 2
}

/// An object of `X`, identified by its position `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjectId(pub u8);

impl ObjectId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Display name: `a`, `b`, ... for small problems, `o0`, `o1`, ... past 26 objects.
    pub fn name(self, n: usize) -> String {
        if n <= 26 {
            char::from(b'a' + self.0).to_string()
        } else {
            format!("o{}", self.0)
        }
    }
}

/// An ordered pair `(first, second)` of distinct objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrderedPair {
    pub first: ObjectId,
    pub second: ObjectId,
}

impl OrderedPair {
    pub fn new(first: u8, second: u8) -> Self {
        OrderedPair {
            first: ObjectId(first),
            second: ObjectId(second),
        }
    }

    pub fn reversed(self) -> Self {
        OrderedPair {
            first: self.second,
            second: self.first,
        }
    }

    pub fn label(self, n: usize) -> String {
        format!("{}{}", self.first.name(n), self.second.name(n))
    }
}

/// Flat slot of an off-diagonal ordered pair: lexicographic over `(first, second)`
/// with the diagonal skipped. Every module indexes intensity values through this.
#[inline]
pub fn pair_index(n: usize, first: usize, second: usize) -> usize {
    debug_assert!(first != second && first < n && second < n);
    first * (n - 1) + second - usize::from(second > first)
}

/// Inverse of [`pair_index`].
pub fn pair_at(n: usize, index: usize) -> OrderedPair {
    let first = index / (n - 1);
    let rest = index % (n - 1);
    let second = if rest >= first { rest + 1 } else { rest };
    OrderedPair::new(first as u8, second as u8)
}

/// Every off-diagonal ordered pair in slot order.
pub fn ordered_pairs(n: usize) -> impl Iterator<Item = OrderedPair> {
    (0..n * (n - 1)).map(move |i| pair_at(n, i))
}

/// The axiom a [`Violation`] breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axiom {
    SkewSymmetry,
    Strictness,
    Chain,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axiom::SkewSymmetry => "skew-symmetry",
            Axiom::Strictness => "strictness",
            Axiom::Chain => "chain condition",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Violation {
    /// `s(b,a) != -s(a,b)`.
    SkewSymmetry { pair: OrderedPair },
    /// A value outside `{-k..k} \ {0}`.
    OutOfRange { pair: OrderedPair, value: i64 },
    /// Two distinct positively valued pairs share a value.
    DuplicateValue {
        first: OrderedPair,
        second: OrderedPair,
        value: i64,
    },
    /// `s(a,b) > 0`, `s(b,c) > 0` but `s(a,c)` does not exceed both.
    Chain {
        a: ObjectId,
        b: ObjectId,
        c: ObjectId,
    },
}

impl Violation {
    pub fn axiom(&self) -> Axiom {
        match self {
            Violation::SkewSymmetry { .. } => Axiom::SkewSymmetry,
            Violation::OutOfRange { .. } | Violation::DuplicateValue { .. } => Axiom::Strictness,
            Violation::Chain { .. } => Axiom::Chain,
        }
    }

    /// Witness pairs in the order they were found.
    pub fn witness(&self) -> Vec<OrderedPair> {
        match *self {
            Violation::SkewSymmetry { pair } | Violation::OutOfRange { pair, .. } => {
                vec![pair, pair.reversed()]
            }
            Violation::DuplicateValue { first, second, .. } => vec![first, second],
            Violation::Chain { a, b, c } => vec![
                OrderedPair {
                    first: a,
                    second: b,
                },
                OrderedPair {
                    first: b,
                    second: c,
                },
                OrderedPair {
                    first: a,
                    second: c,
                },
            ],
        }
    }

    pub fn describe(&self, n: usize) -> String {
        match *self {
            Violation::SkewSymmetry { pair } => format!(
                "skew-symmetry: s({}) != -s({})",
                pair.label(n),
                pair.reversed().label(n)
            ),
            Violation::OutOfRange { pair, value } => format!(
                "strictness: s({}) = {value} is outside the canonical range",
                pair.label(n)
            ),
            Violation::DuplicateValue {
                first,
                second,
                value,
            } => format!(
                "strictness: s({}) = s({}) = {value}",
                first.label(n),
                second.label(n)
            ),
            Violation::Chain { a, b, c } => format!(
                "chain condition: {0}>{1}>{2} but s({0}{2}) does not exceed s({0}{1}) and s({1}{2})",
                a.name(n),
                b.name(n),
                c.name(n)
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        ValidationReport {
            valid: violations.is_empty(),
            violations,
        }
    }

    pub fn has(&self, axiom: Axiom) -> bool {
        self.violations.iter().any(|v| v.axiom() == axiom)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.valid {
            return f.write_str("valid");
        }
        write!(f, "{} violation(s)", self.violations.len())
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("problem size {0} is outside the supported range 2..={MAX_OBJECTS}")]
    UnsupportedSize(usize),
    #[error("incomplete map: no value for pair {0:?}")]
    IncompleteMap(OrderedPair),
    #[error("object {object} out of range for n = {n}")]
    ObjectOutOfRange { object: usize, n: usize },
    #[error("diagonal pair ({0:?}, {0:?}) in ranking")]
    DiagonalPair(ObjectId),
    #[error("ranking lists {got} pairs, expected {expected}")]
    RankingLength { got: usize, expected: usize },
    #[error("ranking lists the pair {{{:?}, {:?}}} twice", .0.first, .0.second)]
    DuplicatePair(OrderedPair),
    #[error("invalid intensity relation: {}", describe_all(.report, *.n))]
    Invalid { report: ValidationReport, n: usize },
    #[error("profile of size {n} has {agents} agents")]
    AgentCount { n: usize, agents: usize },
    #[error("agent {agent} has size {got}, profile has {n}")]
    MixedSizes { agent: usize, got: usize, n: usize },
}

fn describe_all(report: &ValidationReport, n: usize) -> String {
    report
        .violations
        .iter()
        .map(|v| v.describe(n))
        .collect::<Vec<_>>()
        .join("; ")
}

fn check_size(n: usize) -> Result<(), ModelError> {
    if (2..=MAX_OBJECTS).contains(&n) {
        Ok(())
    } else {
        Err(ModelError::UnsupportedSize(n))
    }
}

/// Checks a raw pair map against skew-symmetry, canonical strictness and the
/// chain condition, collecting every violation.
pub fn validate_intensity(
    raw: &BTreeMap<OrderedPair, i64>,
    n: usize,
) -> Result<ValidationReport, ModelError> {
    check_size(n)?;
    let mut values = vec![0i64; n * (n - 1)];
    for pair in ordered_pairs(n) {
        let v = *raw.get(&pair).ok_or(ModelError::IncompleteMap(pair))?;
        values[pair_index(n, pair.first.index(), pair.second.index())] = v;
    }
    for pair in raw.keys() {
        let (a, b) = (pair.first.index(), pair.second.index());
        if a >= n || b >= n {
            return Err(ModelError::ObjectOutOfRange {
                object: a.max(b),
                n,
            });
        }
        if a == b {
            return Err(ModelError::DiagonalPair(pair.first));
        }
    }
    Ok(validate_values(&values, n))
}

fn validate_values(values: &[i64], n: usize) -> ValidationReport {
    let k = pair_count(n) as i64;
    let at = |a: usize, b: usize| {
        if a == b {
            0
        } else {
            values[pair_index(n, a, b)]
        }
    };
    let mut violations = Vec::new();

    for a in 0..n {
        for b in a + 1..n {
            if at(a, b) != -at(b, a) {
                violations.push(Violation::SkewSymmetry {
                    pair: OrderedPair::new(a as u8, b as u8),
                });
            }
        }
    }

    let mut seen: BTreeMap<i64, OrderedPair> = BTreeMap::new();
    for pair in ordered_pairs(n) {
        let v = at(pair.first.index(), pair.second.index());
        if v == 0 || v.abs() > k {
            violations.push(Violation::OutOfRange { pair, value: v });
            continue;
        }
        if v > 0 {
            match seen.get(&v) {
                Some(&earlier) => violations.push(Violation::DuplicateValue {
                    first: earlier,
                    second: pair,
                    value: v,
                }),
                None => {
                    seen.insert(v, pair);
                }
            }
        }
    }

    for a in 0..n {
        for b in 0..n {
            if b == a || at(a, b) <= 0 {
                continue;
            }
            for c in 0..n {
                if c == a || c == b || at(b, c) <= 0 {
                    continue;
                }
                let ac = at(a, c);
                if ac <= at(a, b) || ac <= at(b, c) {
                    violations.push(Violation::Chain {
                        a: ObjectId(a as u8),
                        b: ObjectId(b as u8),
                        c: ObjectId(c as u8),
                    });
                }
            }
        }
    }

    ValidationReport::from_violations(violations)
}

/// One agent's strict intensity relation in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalIntensity {
    n: usize,
    values: Vec<i8>,
}

impl CanonicalIntensity {
    /// Builds from a full raw map, validating it.
    pub fn from_map(raw: &BTreeMap<OrderedPair, i64>, n: usize) -> Result<Self, ModelError> {
        let report = validate_intensity(raw, n)?;
        if !report.valid {
            return Err(ModelError::Invalid { report, n });
        }
        let mut values = vec![0i8; n * (n - 1)];
        for (pair, &v) in raw {
            values[pair_index(n, pair.first.index(), pair.second.index())] = v as i8;
        }
        Ok(CanonicalIntensity { n, values })
    }

    /// Builds from a descending ranking of positively oriented pairs: the
    /// first pair gets `k`, the last gets `1`.
    pub fn from_ranking(pairs: &[OrderedPair], n: usize) -> Result<Self, ModelError> {
        check_size(n)?;
        let k = pair_count(n);
        if pairs.len() != k {
            return Err(ModelError::RankingLength {
                got: pairs.len(),
                expected: k,
            });
        }
        let mut values = vec![0i64; n * (n - 1)];
        for (rank, &pair) in pairs.iter().enumerate() {
            let (a, b) = (pair.first.index(), pair.second.index());
            if a >= n || b >= n {
                return Err(ModelError::ObjectOutOfRange {
                    object: a.max(b),
                    n,
                });
            }
            if a == b {
                return Err(ModelError::DiagonalPair(pair.first));
            }
            let slot = pair_index(n, a, b);
            if values[slot] != 0 {
                return Err(ModelError::DuplicatePair(pair));
            }
            let v = (k - rank) as i64;
            values[slot] = v;
            values[pair_index(n, b, a)] = -v;
        }
        let report = validate_values(&values, n);
        if !report.valid {
            return Err(ModelError::Invalid { report, n });
        }
        Ok(CanonicalIntensity {
            n,
            values: values.into_iter().map(|v| v as i8).collect(),
        })
    }

    /// Trusted constructor for values already known to be canonical.
    pub(crate) fn from_values_unchecked(n: usize, values: Vec<i8>) -> Self {
        debug_assert!(
            validate_values(&values.iter().map(|&v| i64::from(v)).collect::<Vec<_>>(), n).valid
        );
        CanonicalIntensity { n, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `s(a, b)`, zero on the diagonal.
    #[inline]
    pub fn value(&self, a: ObjectId, b: ObjectId) -> i8 {
        if a == b {
            0
        } else {
            self.values[pair_index(self.n, a.index(), b.index())]
        }
    }

    #[inline]
    pub(crate) fn value_idx(&self, a: usize, b: usize) -> i8 {
        if a == b {
            0
        } else {
            self.values[pair_index(self.n, a, b)]
        }
    }

    /// Flat values in [`pair_index`] order.
    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn to_map(&self) -> BTreeMap<OrderedPair, i64> {
        ordered_pairs(self.n)
            .map(|p| (p, i64::from(self.value(p.first, p.second))))
            .collect()
    }

    /// Positively oriented pairs from highest to lowest value.
    pub fn ranking(&self) -> Vec<OrderedPair> {
        let mut ranked: Vec<(i8, OrderedPair)> = ordered_pairs(self.n)
            .map(|p| (self.value(p.first, p.second), p))
            .filter(|&(v, _)| v > 0)
            .collect();
        ranked.sort_by_key(|x| std::cmp::Reverse(x.0));
        ranked.into_iter().map(|(_, p)| p).collect()
    }

    /// Ranking-line text: `ac>ab>bc`.
    pub fn ranking_line(&self) -> String {
        self.ranking()
            .iter()
            .map(|p| p.label(self.n))
            .collect::<Vec<_>>()
            .join(">")
    }

    /// Strict order with `a` before `b` iff `s(a,b) > 0`.
    pub fn induced_preference(&self) -> PreferenceOrder {
        // Canonical relations are transitive, so the number of objects an object
        // beats is its reverse position.
        let n = self.n;
        let mut ranking: Vec<ObjectId> = (0..n as u8).map(ObjectId).collect();
        let wins = |o: &ObjectId| {
            (0..n)
                .filter(|&other| self.value_idx(o.index(), other) > 0)
                .count()
        };
        ranking.sort_by_key(|o| std::cmp::Reverse(wins(o)));
        PreferenceOrder::from_ranking_unchecked(ranking)
    }

    /// The object ranked first by this agent.
    pub fn top(&self) -> ObjectId {
        self.induced_preference().ranking()[0]
    }

    /// Relation after renaming every object `o` to `perm[o]`.
    pub fn relabel(&self, perm: &[u8]) -> Self {
        let n = self.n;
        let mut values = vec![0i8; n * (n - 1)];
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    values[pair_index(n, perm[a] as usize, perm[b] as usize)] =
                        self.values[pair_index(n, a, b)];
                }
            }
        }
        CanonicalIntensity { n, values }
    }
}

/// A strict total order over objects, best first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PreferenceOrder {
    ranking: Vec<ObjectId>,
    position: Vec<u8>,
}

impl PreferenceOrder {
    pub fn new(ranking: Vec<ObjectId>) -> Result<Self, ModelError> {
        let n = ranking.len();
        check_size(n)?;
        let mut seen = vec![false; n];
        for o in &ranking {
            if o.index() >= n {
                return Err(ModelError::ObjectOutOfRange {
                    object: o.index(),
                    n,
                });
            }
            if std::mem::replace(&mut seen[o.index()], true) {
                return Err(ModelError::DuplicatePair(OrderedPair {
                    first: *o,
                    second: *o,
                }));
            }
        }
        Ok(Self::from_ranking_unchecked(ranking))
    }

    pub(crate) fn from_ranking_unchecked(ranking: Vec<ObjectId>) -> Self {
        let mut position = vec![0u8; ranking.len()];
        for (p, o) in ranking.iter().enumerate() {
            position[o.index()] = p as u8;
        }
        PreferenceOrder { ranking, position }
    }

    pub fn n(&self) -> usize {
        self.ranking.len()
    }

    pub fn ranking(&self) -> &[ObjectId] {
        &self.ranking
    }

    /// 0 for the best object.
    pub fn position(&self, o: ObjectId) -> usize {
        self.position[o.index()] as usize
    }

    pub fn prefers(&self, a: ObjectId, b: ObjectId) -> bool {
        self.position(a) < self.position(b)
    }

    pub fn label(&self) -> String {
        let n = self.n();
        self.ranking
            .iter()
            .map(|o| o.name(n))
            .collect::<Vec<_>>()
            .join(">")
    }
}

/// Free-function form of [`CanonicalIntensity::induced_preference`].
pub fn induced_preference(s: &CanonicalIntensity) -> PreferenceOrder {
    s.induced_preference()
}

/// Free-function form of [`CanonicalIntensity::from_ranking`].
pub fn intensity_from_ranking(
    pairs: &[OrderedPair],
    n: usize,
) -> Result<CanonicalIntensity, ModelError> {
    CanonicalIntensity::from_ranking(pairs, n)
}

/// One canonical relation per agent; as many agents as objects.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Profile {
    n: usize,
    agents: Vec<CanonicalIntensity>,
}

impl Profile {
    pub fn new(agents: Vec<CanonicalIntensity>) -> Result<Self, ModelError> {
        let n = agents.len();
        check_size(n)?;
        for (i, s) in agents.iter().enumerate() {
            if s.n() != n {
                return Err(ModelError::MixedSizes {
                    agent: i,
                    got: s.n(),
                    n,
                });
            }
        }
        Ok(Profile { n, agents })
    }

    /// Like [`Profile::new`] but for an explicitly stated size.
    pub fn with_size(n: usize, agents: Vec<CanonicalIntensity>) -> Result<Self, ModelError> {
        if agents.len() != n {
            return Err(ModelError::AgentCount {
                n,
                agents: agents.len(),
            });
        }
        Self::new(agents)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn agents(&self) -> &[CanonicalIntensity] {
        &self.agents
    }

    pub fn agent(&self, i: usize) -> &CanonicalIntensity {
        &self.agents[i]
    }

    /// Renames objects inside every agent's relation.
    pub fn relabel_objects(&self, perm: &[u8]) -> Self {
        Profile {
            n: self.n,
            agents: self.agents.iter().map(|s| s.relabel(perm)).collect(),
        }
    }

    /// New agent `i` is old agent `perm[i]`.
    pub fn permute_agents(&self, perm: &[u8]) -> Self {
        Profile {
            n: self.n,
            agents: perm
                .iter()
                .map(|&p| self.agents[p as usize].clone())
                .collect(),
        }
    }
}
