//! Profile documents, ranking lines and DOT output.
//!
//! A profile document lists, per agent, the positively oriented pairs from
//! most to least intense:
//!
//! ```json
//! {
//!   "n": 3,
//!   "objects": ["a", "b", "c"],
//!   "agents": [
//!     {"id": 1, "ranking": [["a", "c"], ["a", "b"], ["b", "c"]]},
//!     {"id": 2, "ranking": [["a", "c"], ["b", "c"], ["a", "b"]]},
//!     {"id": 3, "ranking": [["a", "c"], ["a", "b"], ["b", "c"]]}
//!   ]
//! }
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::efficiency::{Allocation, DominanceDigraph};
use crate::model::{
    pair_count, CanonicalIntensity, ModelError, ObjectId, OrderedPair, Profile, MAX_OBJECTS,
};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: {message}")]
    Axiom {
        path: String,
        message: String,
        #[source]
        source: ModelError,
    },
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> IoError {
    IoError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentDocument {
    pub id: usize,
    pub ranking: Vec<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileDocument {
    pub n: usize,
    pub objects: Vec<String>,
    pub agents: Vec<AgentDocument>,
}

fn default_names(n: usize) -> Vec<String> {
    (0..n as u8).map(|i| ObjectId(i).name(n)).collect()
}

impl ProfileDocument {
    /// Document for a profile using the default object names `a`, `b`, ...
    pub fn from_profile(profile: &Profile) -> Self {
        Self::from_profile_named(profile, &default_names(profile.n()))
    }

    pub fn from_profile_named(profile: &Profile, objects: &[String]) -> Self {
        let agents = profile
            .agents()
            .iter()
            .enumerate()
            .map(|(i, s)| AgentDocument {
                id: i + 1,
                ranking: s
                    .ranking()
                    .iter()
                    .map(|p| {
                        [
                            objects[p.first.index()].clone(),
                            objects[p.second.index()].clone(),
                        ]
                    })
                    .collect(),
            })
            .collect();
        ProfileDocument {
            n: profile.n(),
            objects: objects.to_vec(),
            agents,
        }
    }

    pub fn parse(text: &str) -> Result<Self, IoError> {
        serde_json::from_str(text).map_err(|e| IoError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// Validates the document and builds the profile it describes.
    pub fn to_profile(&self) -> Result<Profile, IoError> {
        let n = self.n;
        if !(2..=MAX_OBJECTS).contains(&n) {
            return Err(schema(
                "n",
                format!("must be in 2..={MAX_OBJECTS}, got {n}"),
            ));
        }
        if self.objects.len() != n {
            return Err(schema(
                "objects",
                format!(
                    "objects length must equal n ({} != {n})",
                    self.objects.len()
                ),
            ));
        }
        let mut index: HashMap<&str, u8> = HashMap::new();
        for (i, name) in self.objects.iter().enumerate() {
            if index.insert(name.as_str(), i as u8).is_some() {
                return Err(schema(
                    format!("objects[{i}]"),
                    format!("duplicate name {name:?}"),
                ));
            }
        }
        if self.agents.len() != n {
            return Err(schema(
                "agents",
                format!("agents length must equal n ({} != {n})", self.agents.len()),
            ));
        }
        let k = pair_count(n);
        let mut relations = Vec::with_capacity(n);
        for (a, agent) in self.agents.iter().enumerate() {
            let base = format!("agents[{a}]");
            if agent.id != a + 1 {
                return Err(schema(
                    format!("{base}.id"),
                    format!("expected {}, got {}", a + 1, agent.id),
                ));
            }
            if agent.ranking.len() != k {
                return Err(schema(
                    format!("{base}.ranking"),
                    format!("ranking length must be {k}, got {}", agent.ranking.len()),
                ));
            }
            let mut pairs = Vec::with_capacity(k);
            for (r, [first, second]) in agent.ranking.iter().enumerate() {
                let lookup = |name: &String, slot: usize| {
                    index.get(name.as_str()).copied().ok_or_else(|| {
                        schema(
                            format!("{base}.ranking[{r}][{slot}]"),
                            format!("unknown object {name:?}"),
                        )
                    })
                };
                pairs.push(OrderedPair::new(lookup(first, 0)?, lookup(second, 1)?));
            }
            let s =
                CanonicalIntensity::from_ranking(&pairs, n).map_err(|source| IoError::Axiom {
                    path: format!("{base}.ranking"),
                    message: source.to_string(),
                    source,
                })?;
            relations.push(s);
        }
        Profile::new(relations).map_err(|e| schema("agents", e.to_string()))
    }

    /// Normalised text form: fixed key order, one agent per line.
    pub fn to_text(&self) -> String {
        let quote = |s: &str| serde_json::to_string(s).expect("string serialises");
        let mut out = String::new();
        out.push_str("{\n");
        let _ = writeln!(out, "  \"n\": {},", self.n);
        let names: Vec<String> = self.objects.iter().map(|s| quote(s)).collect();
        let _ = writeln!(out, "  \"objects\": [{}],", names.join(", "));
        out.push_str("  \"agents\": [\n");
        for (i, agent) in self.agents.iter().enumerate() {
            let pairs: Vec<String> = agent
                .ranking
                .iter()
                .map(|[a, b]| format!("[{}, {}]", quote(a), quote(b)))
                .collect();
            let sep = if i + 1 == self.agents.len() { "" } else { "," };
            let _ = writeln!(
                out,
                "    {{\"id\": {}, \"ranking\": [{}]}}{sep}",
                agent.id,
                pairs.join(", ")
            );
        }
        out.push_str("  ]\n}\n");
        out
    }
}

/// Parses and validates a profile document.
pub fn parse_profile(text: &str) -> Result<Profile, IoError> {
    ProfileDocument::parse(text)?.to_profile()
}

/// Normalised document text for a profile with default object names.
pub fn serialize_profile(profile: &Profile) -> String {
    ProfileDocument::from_profile(profile).to_text()
}

/// Re-serialises a document after validation, keeping its object names.
pub fn normalize(text: &str) -> Result<String, IoError> {
    let doc = ProfileDocument::parse(text)?;
    let profile = doc.to_profile()?;
    Ok(ProfileDocument::from_profile_named(&profile, &doc.objects).to_text())
}

/// Parses a ranking line such as `ac>ab>bc` (single-letter object names).
pub fn parse_ranking_line(line: &str, n: usize) -> Result<CanonicalIntensity, IoError> {
    let mut pairs = Vec::new();
    for (r, token) in line.trim().split('>').enumerate() {
        let bytes = token.as_bytes();
        let valid = |b: u8| b.is_ascii_lowercase() && ((b - b'a') as usize) < n;
        if bytes.len() != 2 || !valid(bytes[0]) || !valid(bytes[1]) {
            return Err(schema(format!("pair {r}"), format!("bad pair {token:?}")));
        }
        pairs.push(OrderedPair::new(bytes[0] - b'a', bytes[1] - b'a'));
    }
    CanonicalIntensity::from_ranking(&pairs, n).map_err(|source| IoError::Axiom {
        path: "ranking".into(),
        message: source.to_string(),
        source,
    })
}

fn dot_id(label: &str) -> String {
    format!("\"{}\"", label.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT rendering of a dominance digraph. Undominated nodes get a double
/// border; nodes and edges are emitted in label order.
pub fn emit_dot(g: &DominanceDigraph) -> String {
    let mut labels: Vec<(String, bool)> = Vec::with_capacity(g.nodes().len());
    let indeg = g.in_degrees();
    for (x, d) in g.nodes().iter().zip(&indeg) {
        labels.push((x.label(), *d == 0));
    }
    let mut nodes = labels.clone();
    nodes.sort();
    let mut edges: Vec<(String, String)> = g
        .edges()
        .iter()
        .map(|&(a, b)| (labels[a].0.clone(), labels[b].0.clone()))
        .collect();
    edges.sort();

    let mut out = String::from("digraph dominance {\n");
    for (label, efficient) in &nodes {
        if *efficient {
            let _ = writeln!(out, "  {} [peripheries=2];", dot_id(label));
        } else {
            let _ = writeln!(out, "  {};", dot_id(label));
        }
    }
    for (a, b) in &edges {
        let _ = writeln!(out, "  {} -> {};", dot_id(a), dot_id(b));
    }
    out.push_str("}\n");
    out
}

/// Labels of a list of allocations, for reports.
pub fn labels(allocations: &[Allocation]) -> Vec<String> {
    allocations.iter().map(Allocation::label).collect()
}
