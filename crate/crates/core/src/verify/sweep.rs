//! Existence sweeps over profile spaces.
//!
//! A sweep is split into numbered units (index chunks, orbit prefixes or
//! random blocks). Units are independent, so they run on a worker pool and
//! can be logged to a checkpoint file as they finish; a rerun with the same
//! checkpoint skips logged units. The report is assembled from unit records
//! sorted by unit number and so does not depend on scheduling or on how
//! many runs it took to finish.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::efficiency::{find_cycle, AllocationSpace, EfficiencyError};
use crate::enumerate::{
    EnumerateError, RelationSampler, RelationTable, SymmetryGroup, SymmetryUnit, RANDOM_BLOCK,
};
use crate::io::{self, IoError, ProfileDocument};
use crate::model::{CanonicalIntensity, Profile};

/// Profiles per unit in unreduced exhaustive sweeps.
pub const EXHAUSTIVE_CHUNK: u64 = 4096;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Enumerate(#[from] EnumerateError),
    #[error(transparent)]
    Efficiency(#[from] EfficiencyError),
    #[error("n = {n} is not supported for {mode} sweeps")]
    UnsupportedSize { n: usize, mode: &'static str },
    #[error("checkpoint {path}: {message}")]
    Checkpoint { path: PathBuf, message: String },
    #[error("checkpoint {path}: {source}")]
    CheckpointIo {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("could not build worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    Exhaustive,
    Symmetry,
    Random,
}

impl SweepMode {
    fn name(self) -> &'static str {
        match self {
            SweepMode::Exhaustive => "exhaustive",
            SweepMode::Symmetry => "symmetry",
            SweepMode::Random => "random",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    /// Worker threads; 0 means one per core.
    pub jobs: usize,
    pub checkpoint: Option<PathBuf>,
    /// Largest profile count an unreduced exhaustive sweep may visit.
    pub budget: u128,
    /// Witnesses kept per unit and in the final report.
    pub witness_cap: usize,
    /// Stop after this many new units (for staged runs); `None` runs to the end.
    pub max_units: Option<usize>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            jobs: 0,
            checkpoint: None,
            budget: crate::enumerate::DEFAULT_BUDGET,
            witness_cap: 100,
            max_units: None,
        }
    }
}

/// A profile whose efficient set is empty or whose dominance relation is cyclic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Witness {
    /// One ranking line per agent.
    pub rankings: Vec<String>,
    pub efficient: usize,
    pub cycle: Vec<String>,
}

impl Witness {
    pub fn profile(&self, n: usize) -> Result<Profile, IoError> {
        let agents = self
            .rankings
            .iter()
            .map(|line| io::parse_ranking_line(line, n))
            .collect::<Result<Vec<_>, _>>()?;
        Profile::new(agents).map_err(|e| IoError::Schema {
            path: "rankings".into(),
            message: e.to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Header {
    n: usize,
    mode: SweepMode,
    seed: Option<u64>,
    samples: Option<u64>,
    units: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
struct UnitRecord {
    unit: u64,
    checked: u64,
    covered: u64,
    failures: u64,
    cycles: u64,
    failures_covered: u64,
    cycles_covered: u64,
    failure_witnesses: Vec<Witness>,
    cycle_witnesses: Vec<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct LogLine {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    header: Option<Header>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    record: Option<UnitRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub rankings: Vec<String>,
    pub efficient: usize,
    pub cycle: Vec<String>,
    pub profile: ProfileDocument,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExistenceReport {
    pub n: usize,
    pub mode: SweepMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Profiles (or orbit representatives) evaluated.
    pub profiles_checked: u64,
    /// Profiles those evaluations stand for; equals `profiles_checked`
    /// except in symmetry-reduced sweeps.
    pub profiles_covered: u64,
    /// Evaluated profiles with an empty efficient set.
    pub failures_count: u64,
    /// Evaluated profiles with a dominance cycle.
    pub cycles_count: u64,
    /// Profiles covered by the failures (orbit-weighted).
    pub failures_covered: u64,
    pub cycles_covered: u64,
    pub failures: Vec<WitnessReport>,
    pub cycles: Vec<WitnessReport>,
    pub units_total: u64,
    pub units_done: u64,
    pub units_resumed: u64,
    pub complete: bool,
    pub elapsed_ms: u128,
}

impl ExistenceReport {
    pub fn holds(&self) -> bool {
        self.failures_count == 0 && self.cycles_count == 0
    }

    /// JSON without the timing and resume bookkeeping, identical for any
    /// schedule that covers the same units.
    pub fn deterministic_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serialises");
        if let Some(map) = v.as_object_mut() {
            map.remove("elapsed_ms");
            map.remove("units_resumed");
        }
        serde_json::to_string(&v).expect("value serialises")
    }

    pub fn summary(&self) -> String {
        let line = format!(
            "{} profiles checked, {} failures, {} cycles",
            self.profiles_checked, self.failures_count, self.cycles_count
        );
        match self.mode {
            SweepMode::Symmetry => format!(
                "{line} (orbit representatives; {} profiles covered, {} failures, {} cycles)",
                self.profiles_covered, self.failures_covered, self.cycles_covered
            ),
            _ => line,
        }
    }
}

/// Source of profiles for one sweep.
enum Plan {
    Exhaustive {
        table: RelationTable,
        total: u128,
    },
    Symmetry {
        table: RelationTable,
        group: Box<SymmetryGroup>,
        units: Vec<SymmetryUnit>,
    },
    RandomTable {
        table: RelationTable,
        seed: u64,
        samples: u64,
    },
    RandomSampled {
        sampler: RelationSampler,
        seed: u64,
        samples: u64,
    },
}

impl Plan {
    fn unit_count(&self) -> u64 {
        match self {
            Plan::Exhaustive { total, .. } => total.div_ceil(EXHAUSTIVE_CHUNK as u128) as u64,
            Plan::Symmetry { units, .. } => units.len() as u64,
            Plan::RandomTable { samples, .. } | Plan::RandomSampled { samples, .. } => {
                samples.div_ceil(RANDOM_BLOCK)
            }
        }
    }
}

struct Evaluator<'a> {
    space: &'a AllocationSpace,
    cap: usize,
    record: UnitRecord,
}

impl Evaluator<'_> {
    fn check(&mut self, agents: &[&CanonicalIntensity], weight: u64) {
        self.record.checked += 1;
        self.record.covered += weight;
        let v = self.space.verdict(agents);
        let failed = v.efficient == 0;
        if !failed && !v.cyclic {
            return;
        }
        let witness = || {
            let g = self.space.digraph(agents);
            Witness {
                rankings: agents.iter().map(|s| s.ranking_line()).collect(),
                efficient: v.efficient,
                cycle: find_cycle(&g).map(|c| io::labels(&c)).unwrap_or_default(),
            }
        };
        if failed {
            self.record.failures += 1;
            self.record.failures_covered += weight;
            if self.record.failure_witnesses.len() < self.cap {
                self.record.failure_witnesses.push(witness());
            }
        }
        if v.cyclic {
            self.record.cycles += 1;
            self.record.cycles_covered += weight;
            if self.record.cycle_witnesses.len() < self.cap {
                self.record.cycle_witnesses.push(witness());
            }
        }
    }
}

fn run_unit(plan: &Plan, space: &AllocationSpace, unit: u64, cap: usize) -> UnitRecord {
    let mut ev = Evaluator {
        space,
        cap,
        record: UnitRecord {
            unit,
            ..UnitRecord::default()
        },
    };
    match plan {
        Plan::Exhaustive { table, total } => {
            let start = unit as u128 * EXHAUSTIVE_CHUNK as u128;
            let end = (start + EXHAUSTIVE_CHUNK as u128).min(*total);
            for index in start..end {
                let indices = table.profile_indices_at(index);
                ev.check(&table.agents(&indices), 1);
            }
        }
        Plan::Symmetry {
            table,
            group,
            units,
        } => {
            group.for_each_rep(units[unit as usize], |rep| {
                ev.check(&table.agents(&rep.relations), rep.orbit_size);
            });
        }
        Plan::RandomTable {
            table,
            seed,
            samples,
        } => {
            let len = RANDOM_BLOCK.min(samples - unit * RANDOM_BLOCK);
            for indices in table.random_block(*seed, unit, len) {
                ev.check(&table.agents(&indices), 1);
            }
        }
        Plan::RandomSampled {
            sampler,
            seed,
            samples,
        } => {
            let len = RANDOM_BLOCK.min(samples - unit * RANDOM_BLOCK);
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            rng.set_stream(unit);
            for _ in 0..len {
                let agents: Vec<CanonicalIntensity> =
                    (0..sampler.n()).map(|_| sampler.sample(&mut rng)).collect();
                ev.check(&agents.iter().collect::<Vec<_>>(), 1);
            }
        }
    }
    ev.record
}

struct Checkpoint {
    path: PathBuf,
    writer: File,
}

impl Checkpoint {
    /// Opens or creates the log, returning the records already in it.
    fn open(path: &Path, header: &Header) -> Result<(Self, Vec<UnitRecord>), SweepError> {
        let io_err = |source| SweepError::CheckpointIo {
            path: path.to_path_buf(),
            source,
        };
        let mut records = Vec::new();
        if path.exists() {
            let reader = BufReader::new(File::open(path).map_err(io_err)?);
            let lines: Vec<String> = reader.lines().collect::<Result<_, _>>().map_err(io_err)?;
            let mut parsed = Vec::new();
            for (i, line) in lines.iter().enumerate() {
                match serde_json::from_str::<LogLine>(line) {
                    Ok(l) => parsed.push(l),
                    // A partially written final line from an interrupted run.
                    Err(_) if i + 1 == lines.len() => {}
                    Err(e) => {
                        return Err(SweepError::Checkpoint {
                            path: path.to_path_buf(),
                            message: format!("line {}: {e}", i + 1),
                        })
                    }
                }
            }
            match parsed.first().and_then(|l| l.header.as_ref()) {
                Some(h) if h == header => {}
                Some(h) => {
                    return Err(SweepError::Checkpoint {
                        path: path.to_path_buf(),
                        message: format!("written by a different sweep: {h:?}"),
                    })
                }
                None if parsed.is_empty() => {}
                None => {
                    return Err(SweepError::Checkpoint {
                        path: path.to_path_buf(),
                        message: "missing header line".into(),
                    })
                }
            }
            let mut seen = std::collections::HashSet::new();
            for r in parsed.into_iter().filter_map(|l| l.record) {
                if r.unit < header.units && seen.insert(r.unit) {
                    records.push(r);
                }
            }
        }
        // Rewrite without any torn tail so appends start on a clean line.
        let mut text = line_of(&LogLine {
            header: Some(header.clone()),
            record: None,
        });
        for r in &records {
            text.push_str(&line_of(&LogLine {
                header: None,
                record: Some(r.clone()),
            }));
        }
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, text).map_err(io_err)?;
        fs::rename(&tmp, path).map_err(io_err)?;
        let writer = OpenOptions::new().append(true).open(path).map_err(io_err)?;
        Ok((
            Checkpoint {
                path: path.to_path_buf(),
                writer,
            },
            records,
        ))
    }

    fn append(&mut self, record: &UnitRecord) -> Result<(), SweepError> {
        let line = line_of(&LogLine {
            header: None,
            record: Some(record.clone()),
        });
        self.writer
            .write_all(line.as_bytes())
            .and_then(|_| self.writer.flush())
            .map_err(|source| SweepError::CheckpointIo {
                path: self.path.clone(),
                source,
            })
    }
}

fn line_of(l: &LogLine) -> String {
    let mut s = serde_json::to_string(l).expect("log line serialises");
    s.push('\n');
    s
}

fn run(
    plan: Plan,
    n: usize,
    mode: SweepMode,
    seed: Option<u64>,
    samples: Option<u64>,
    opts: &SweepOptions,
) -> Result<ExistenceReport, SweepError> {
    let started = Instant::now();
    let space = AllocationSpace::new(n)?;
    let header = Header {
        n,
        mode,
        seed,
        samples,
        units: plan.unit_count(),
    };
    let (checkpoint, mut records) = match &opts.checkpoint {
        Some(path) => {
            let (c, r) = Checkpoint::open(path, &header)?;
            (Some(c), r)
        }
        None => (None, Vec::new()),
    };
    let resumed = records.len() as u64;
    let done: std::collections::HashSet<u64> = records.iter().map(|r| r.unit).collect();
    let mut pending: Vec<u64> = (0..header.units).filter(|u| !done.contains(u)).collect();
    if let Some(max) = opts.max_units {
        pending.truncate(max);
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()?;
    let checkpoint = Mutex::new(checkpoint);
    let fresh: Vec<UnitRecord> = pool.install(|| {
        pending
            .par_iter()
            .map(|&unit| {
                let record = run_unit(&plan, &space, unit, opts.witness_cap);
                if let Some(c) = checkpoint.lock().expect("checkpoint lock").as_mut() {
                    c.append(&record)?;
                }
                Ok(record)
            })
            .collect::<Result<Vec<_>, SweepError>>()
    })?;
    records.extend(fresh);
    records.sort_by_key(|r| r.unit);

    let doc = |w: &Witness| -> WitnessReport {
        let profile = w
            .profile(n)
            .expect("witness rankings were produced from canonical relations");
        WitnessReport {
            rankings: w.rankings.clone(),
            efficient: w.efficient,
            cycle: w.cycle.clone(),
            profile: ProfileDocument::from_profile(&profile),
        }
    };
    let cap = opts.witness_cap;
    let failures = records
        .iter()
        .flat_map(|r| &r.failure_witnesses)
        .take(cap)
        .map(doc)
        .collect();
    let cycles = records
        .iter()
        .flat_map(|r| &r.cycle_witnesses)
        .take(cap)
        .map(doc)
        .collect();
    Ok(ExistenceReport {
        n,
        mode,
        seed,
        profiles_checked: records.iter().map(|r| r.checked).sum(),
        profiles_covered: records.iter().map(|r| r.covered).sum(),
        failures_count: records.iter().map(|r| r.failures).sum(),
        cycles_count: records.iter().map(|r| r.cycles).sum(),
        failures_covered: records.iter().map(|r| r.failures_covered).sum(),
        cycles_covered: records.iter().map(|r| r.cycles_covered).sum(),
        failures,
        cycles,
        units_total: header.units,
        units_done: records.len() as u64,
        units_resumed: resumed,
        complete: records.len() as u64 == header.units,
        elapsed_ms: started.elapsed().as_millis(),
    })
}

/// Checks every profile for `n` (or one profile per symmetry orbit) for a
/// non-empty efficient set and acyclic dominance.
pub fn verify_existence_exhaustive(
    n: usize,
    symmetry: bool,
    opts: &SweepOptions,
) -> Result<ExistenceReport, SweepError> {
    let table = RelationTable::new(n)?;
    if symmetry {
        let group = SymmetryGroup::new(&table)?;
        let units = group.units();
        let plan = Plan::Symmetry {
            table,
            group: Box::new(group),
            units,
        };
        run(plan, n, SweepMode::Symmetry, None, None, opts)
    } else {
        let total = table.profile_count();
        if total > opts.budget {
            return Err(EnumerateError::BudgetExceeded {
                count: total,
                budget: opts.budget,
            }
            .into());
        }
        run(
            Plan::Exhaustive { table, total },
            n,
            SweepMode::Exhaustive,
            None,
            None,
            opts,
        )
    }
}

/// Checks `samples` uniformly drawn profiles. Draws are a pure function of
/// `seed`, so any recorded witness can be regenerated.
pub fn verify_existence_random(
    n: usize,
    samples: u64,
    seed: u64,
    opts: &SweepOptions,
) -> Result<ExistenceReport, SweepError> {
    let plan = match n {
        3..=5 => Plan::RandomTable {
            table: RelationTable::new(n)?,
            seed,
            samples,
        },
        6 => Plan::RandomSampled {
            sampler: RelationSampler::new(n)?,
            seed,
            samples,
        },
        _ => {
            return Err(SweepError::UnsupportedSize {
                n,
                mode: SweepMode::Random.name(),
            })
        }
    };
    run(plan, n, SweepMode::Random, Some(seed), Some(samples), opts)
}
