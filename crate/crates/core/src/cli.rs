//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 when a check
//! finds a witness (a failure of existence, or an unconfirmed counterexample).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::efficiency::{dominance_digraph, find_cycle};
use crate::enumerate::{count_intensity_relations, for_each_intensity_relation};
use crate::io::{emit_dot, labels, parse_profile};
use crate::verify::counterexample::default_profile;
use crate::verify::{
    build_table2_profile, search_completions, verify_counterexample, verify_existence_exhaustive,
    verify_existence_random, SweepOptions,
};

#[derive(Debug, Parser)]
#[command(
    name = "intensity",
    version,
    about = "Intensity-efficient allocations under canonical strict intensities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Count (or list) the canonical strict intensity relations for n objects.
    Enumerate {
        #[arg(long)]
        n: usize,
        /// Write every relation as a ranking line.
        #[arg(long)]
        list: bool,
        /// Destination for --list (stdout by default).
        #[arg(long, requires = "list")]
        out: Option<PathBuf>,
    },
    /// Report the Pareto set, dominance edges and efficient set of a profile.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        /// Write the dominance digraph in DOT format.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Print a JSON report instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Check that every profile has an efficient allocation and no cycles.
    VerifyExistence(VerifyArgs),
    /// Verify the five-object counterexample.
    Counterexample {
        /// Search for completions of agents 4 and 5 instead of using the defaults.
        #[arg(long)]
        search_completions: bool,
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    n: usize,
    /// Visit every profile.
    #[arg(long, conflicts_with_all = ["samples", "seed"], required_unless_present = "samples")]
    exhaustive: bool,
    /// Number of uniformly random profiles.
    #[arg(long, requires = "seed")]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// With --exhaustive, visit one profile per symmetry orbit.
    #[arg(long, requires = "exhaustive")]
    symmetry: bool,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Resumable JSON-lines log of finished work units.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Write the full report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write each recorded witness as a loadable profile document.
    #[arg(long)]
    witness_dir: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match execute(cli.command, &mut out) {
        Ok(code) => code,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn write_file(path: &PathBuf, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn execute(command: Command, out: &mut impl Write) -> Result<i32> {
    match command {
        Command::Enumerate { n, list, out: dest } => {
            if !list {
                let count = count_intensity_relations(n)?;
                writeln!(out, "{count}")?;
                return Ok(0);
            }
            let mut sink: Box<dyn Write> = match &dest {
                Some(path) => Box::new(BufWriter::new(
                    File::create(path).with_context(|| format!("creating {}", path.display()))?,
                )),
                None => Box::new(BufWriter::new(&mut *out)),
            };
            let mut failed = None;
            for_each_intensity_relation(n, |s| {
                if failed.is_none() {
                    if let Err(e) = writeln!(sink, "{}", s.ranking_line()) {
                        failed = Some(e);
                    }
                }
            })?;
            if let Some(e) = failed {
                return Err(e.into());
            }
            sink.flush()?;
            Ok(0)
        }
        Command::Analyze { input, dot, json } => {
            let text = std::fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let profile = parse_profile(&text).with_context(|| input.display().to_string())?;
            let g = dominance_digraph(&profile);
            let pareto = labels(g.nodes());
            let edges: Vec<[String; 2]> = g
                .edge_allocations()
                .map(|(x, y)| [x.label(), y.label()])
                .collect();
            let efficient = labels(&g.undominated());
            let cycle = find_cycle(&g).map(|c| labels(&c));
            if json {
                let v = serde_json::json!({
                    "pareto": pareto,
                    "edges": edges,
                    "efficient": efficient,
                    "cycle": cycle,
                });
                writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
            } else {
                writeln!(out, "Pareto set {{{}}}", pareto.join(", "))?;
                for [x, y] in &edges {
                    writeln!(out, "{x} D {y}")?;
                }
                writeln!(out, "IE set {{{}}}", efficient.join(", "))?;
                if let Some(c) = &cycle {
                    writeln!(out, "cycle {}", c.join(" -> "))?;
                }
            }
            if let Some(path) = &dot {
                write_file(path, &emit_dot(&g))?;
            }
            Ok(0)
        }
        Command::VerifyExistence(args) => {
            let opts = SweepOptions {
                jobs: args.jobs,
                checkpoint: args.checkpoint.clone(),
                ..SweepOptions::default()
            };
            let report = match (args.exhaustive, args.samples, args.seed) {
                (true, _, _) => verify_existence_exhaustive(args.n, args.symmetry, &opts)?,
                (false, Some(samples), Some(seed)) => {
                    verify_existence_random(args.n, samples, seed, &opts)?
                }
                _ => bail!("either --exhaustive or --samples with --seed is required"),
            };
            if let Some(path) = &args.report {
                write_file(path, &serde_json::to_string_pretty(&report)?)?;
            }
            if let Some(dir) = &args.witness_dir {
                std::fs::create_dir_all(dir)
                    .with_context(|| format!("creating {}", dir.display()))?;
                for (kind, list) in [("failure", &report.failures), ("cycle", &report.cycles)] {
                    for (i, w) in list.iter().enumerate() {
                        write_file(
                            &dir.join(format!("{kind}-{i:03}.json")),
                            &w.profile.to_text(),
                        )?;
                    }
                }
            }
            writeln!(out, "{}", report.summary())?;
            for w in report.failures.iter().chain(&report.cycles) {
                writeln!(
                    out,
                    "witness [{}] efficient={} cycle={}",
                    w.rankings.join(" | "),
                    w.efficient,
                    w.cycle.join("->")
                )?;
            }
            Ok(if report.holds() { 0 } else { 2 })
        }
        Command::Counterexample {
            search_completions: search,
            dot,
            json,
        } => {
            let profile = if search {
                let found = search_completions();
                writeln!(
                    out,
                    "search: {} of {} completion pairs tried",
                    found.tried, found.space
                )?;
                match (&found.completion4, &found.completion5) {
                    (Some(c4), Some(c5)) => build_table2_profile(
                        &crate::io::parse_ranking_line(c4, 5)?,
                        &crate::io::parse_ranking_line(c5, 5)?,
                    )?,
                    _ => {
                        writeln!(out, "no completion confirms non-existence")?;
                        return Ok(2);
                    }
                }
            } else {
                default_profile()
            };
            let report = verify_counterexample(&profile);
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
            } else {
                writeln!(out, "agent 4: {}", report.completion4)?;
                writeln!(out, "agent 5: {}", report.completion5)?;
                writeln!(
                    out,
                    "Pareto set ({}) {{{}}}",
                    report.pareto_count,
                    report.pareto.join(", ")
                )?;
                for step in &report.steps {
                    writeln!(
                        out,
                        "{} D {}: {} vs {} [{}]",
                        step.dominator,
                        step.dominated,
                        step.higher_value,
                        step.lower_value,
                        if step.verified() { "ok" } else { "FAILED" }
                    )?;
                }
                writeln!(
                    out,
                    "six-cycle {}",
                    if report.six_cycle_detected {
                        "detected"
                    } else {
                        "not detected"
                    }
                )?;
                writeln!(out, "IE set {{{}}}", report.ie_set.join(", "))?;
                writeln!(
                    out,
                    "non-existence {}",
                    if report.confirmed() {
                        "confirmed"
                    } else {
                        "NOT confirmed"
                    }
                )?;
            }
            if let Some(path) = &dot {
                write_file(path, &emit_dot(&dominance_digraph(&profile)))?;
            }
            Ok(if report.confirmed() { 0 } else { 2 })
        }
    }
}
