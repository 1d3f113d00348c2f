//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! Run alone with `cargo test --release --test acceptance`.

mod common;

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use intensity::efficiency::{dominance_digraph, pareto_set, Allocation};
use intensity::enumerate::{
    all_preference_orders, containment_poset, count_intensity_relations, RelationTable,
};
use intensity::io::labels;
use intensity::model::Profile;
use intensity::verify::counterexample::{default_profile, listed};
use intensity::verify::{
    search_completions, verify_counterexample, verify_existence_exhaustive,
    verify_existence_random, SweepOptions,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    check(
        elapsed < limit,
        format!("{what} took {elapsed:?}, limit {limit:?}"),
    )
}

fn bin(args: &[&str]) -> (i32, String, Duration) {
    let start = Instant::now();
    let o = Command::new(env!("CARGO_BIN_EXE_intensity"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        o.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&o.stdout).into_owned(),
        start.elapsed(),
    )
}

fn relation_counts() -> Outcome {
    let mut notes = Vec::new();
    for (n, expect, limit) in [
        ("3", "12", Duration::from_secs(1)),
        ("4", "384", Duration::from_secs(1)),
        ("5", "92160", Duration::from_secs(60)),
    ] {
        let (code, out, elapsed) = bin(&["enumerate", "--n", n]);
        check(
            code == 0 && out.trim() == expect,
            format!("n={n}: got {out:?}"),
        )?;
        within(elapsed, limit, &format!("enumerate --n {n}"))?;
        notes.push(format!("n={n}: {expect} in {elapsed:.1?}"));
    }
    // The listing path produces the same numbers by explicit enumeration.
    for (n, expect) in [(3, 12), (4, 384), (5, 92160)] {
        let got = RelationTable::new(n).unwrap().len();
        check(got == expect, format!("table n={n}: {got}"))?;
    }
    Ok(notes.join(", "))
}

/// Generate-and-filter: every assignment of ranks 1..k to the pairs
/// oriented by `order`, kept when the axioms hold. Written from the
/// definitions, independent of the library's validator.
fn brute_force_per_order(order: &[usize]) -> (usize, usize) {
    let n = order.len();
    let mut pos = vec![0; n];
    for (i, &o) in order.iter().enumerate() {
        pos[o] = i;
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .filter(|&(a, b)| a != b)
        .filter(|&(a, b)| pos[a] < pos[b])
        .collect();
    let k = pairs.len();
    let mut candidates = 0;
    let mut kept = 0;
    for ranks in common::perms(k) {
        candidates += 1;
        let mut s = vec![vec![0i32; n]; n];
        for (&(a, b), &r) in pairs.iter().zip(&ranks) {
            s[a][b] = r as i32 + 1;
            s[b][a] = -(r as i32 + 1);
        }
        let chain = (0..n).all(|a| {
            (0..n).all(|b| {
                (0..n).all(|c| {
                    a == b
                        || b == c
                        || a == c
                        || s[a][b] <= 0
                        || s[b][c] <= 0
                        || s[a][c] > s[a][b].max(s[b][c])
                })
            })
        });
        if chain {
            kept += 1;
        }
    }
    (candidates, kept)
}

fn per_order_counts() -> Outcome {
    for (n, expect) in [(3usize, 2u64), (4, 16), (5, 768)] {
        for order in all_preference_orders(n).unwrap() {
            let got = containment_poset(&order).count_extensions();
            check(
                got == expect,
                format!("n={n} order {}: {got}", order.label()),
            )?;
        }
        let total = count_intensity_relations(n).unwrap();
        check(
            total == expect * (1..=n as u64).product::<u64>(),
            format!("n={n}: total {total} is not orders x {expect}"),
        )?;
    }
    let mut candidates3 = 0;
    for order in common::perms(3) {
        let order: Vec<usize> = order.iter().map(|&o| o as usize).collect();
        let (c, kept) = brute_force_per_order(&order);
        candidates3 += c;
        check(kept == 2, format!("n=3 brute force kept {kept}"))?;
    }
    check(candidates3 == 36, format!("n=3: {candidates3} candidates"))?;
    for order in common::perms(4) {
        let order: Vec<usize> = order.iter().map(|&o| o as usize).collect();
        let (c, kept) = brute_force_per_order(&order);
        check(
            c == 720 && kept == 16,
            format!("n=4 {order:?}: {kept} of {c}"),
        )?;
    }
    Ok("2/16/768 per order; brute force 36 candidates (n=3), 720 per order (n=4)".into())
}

fn example_golden() -> Outcome {
    let p = common::example3();
    let start = Instant::now();
    let g = dominance_digraph(&p);
    let efficient = labels(&g.undominated());
    let elapsed = start.elapsed();
    check(
        labels(g.nodes()).len() == 6,
        "Pareto set is not all six allocations",
    )?;
    let edges: BTreeSet<(String, String)> = g
        .edge_allocations()
        .map(|(x, y)| (x.label(), y.label()))
        .collect();
    let expect: BTreeSet<(String, String)> = [
        ("abc", "bac"),
        ("cba", "cab"),
        ("abc", "acb"),
        ("cba", "bca"),
    ]
    .iter()
    .map(|&(a, b)| (a.to_string(), b.to_string()))
    .collect();
    check(edges == expect, format!("edges {edges:?}"))?;
    check(efficient == ["abc", "cba"], format!("IE set {efficient:?}"))?;
    within(elapsed, Duration::from_millis(10), "example analysis")?;
    Ok(format!("IE set {{abc, cba}} in {elapsed:.1?}"))
}

fn three_object_sweep() -> Outcome {
    let (code, out, elapsed) = bin(&[
        "verify-existence",
        "--n",
        "3",
        "--exhaustive",
        "--jobs",
        "1",
    ]);
    check(
        code == 0 && out == "1728 profiles checked, 0 failures, 0 cycles\n",
        format!("exit {code}: {out:?}"),
    )?;
    within(elapsed, Duration::from_secs(10), "n=3 sweep")?;
    // Independent confirmation through the oracle.
    let t = RelationTable::new(3).unwrap();
    for index in 0..t.profile_count() {
        let p = t.profile(&t.profile_indices_at(index));
        check(
            !common::oracle_efficient(&p).is_empty(),
            format!("oracle: profile {index} empty"),
        )?;
    }
    Ok(format!(
        "1728 profiles, 0 failures, 0 cycles in {elapsed:.1?}"
    ))
}

/// Values compared by each step's inequality, from the fixed agents.
const CITED: [(&str, &str, i8, i8); 6] = [
    ("z", "s", 3, 1),
    ("w", "z", 8, 7),
    ("y", "w", 4, 2),
    ("x", "y", 2, 1),
    ("t", "x", 8, 6),
    ("s", "t", 3, 2),
];

fn counterexample() -> Outcome {
    let start = Instant::now();
    let profile = default_profile();
    let report = verify_counterexample(&profile);
    let pareto: Vec<Allocation> = pareto_set(&profile);
    for name in ["s", "t", "x", "y", "w", "z"] {
        check(
            pareto.contains(&listed(name)),
            format!("(a) {name} not Pareto efficient"),
        )?;
    }
    check(report.six_listed_present, "(a) report disagrees")?;
    for (step, &(from, to, hi, lo)) in report.steps.iter().zip(&CITED) {
        check(
            step.dominator == listed(from).label() && step.dominated == listed(to).label(),
            format!("(b) step order {} D {}", step.dominator, step.dominated),
        )?;
        check(
            step.higher_value == hi && step.lower_value == lo && step.verified(),
            format!(
                "(b) {from} D {to}: {} vs {} (expected {hi} vs {lo})",
                step.higher_value, step.lower_value
            ),
        )?;
    }
    check(report.cycle_verified, "(b) cycle not verified")?;
    check(
        report.six_cycle_detected,
        "(c) six-cycle not found by cycle detection",
    )?;
    check(
        report.ie_set.is_empty(),
        format!("(d) IE set {:?}", report.ie_set),
    )?;
    check(
        common::oracle_efficient(&profile).is_empty(),
        "(d) oracle finds an efficient allocation",
    )?;
    let search = search_completions();
    check(
        search.found(),
        format!("search failed after {} pairs", search.tried),
    )?;
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(300), "counterexample")?;
    Ok(format!(
        "(a)-(d) hold; Pareto set {}, {} edges; search confirms after {} of {} pairs; {elapsed:.1?}",
        report.pareto_count, report.edge_count, search.tried, search.space
    ))
}

fn property_suite() -> Outcome {
    use common::props;
    let start = Instant::now();
    for (n, seed) in [(3, 101), (4, 102), (5, 103)] {
        let t = RelationTable::new(n).unwrap();
        props::asymmetric(&t, 1000, seed)?;
        props::edges_need_flip(&t, 1000, seed)?;
        props::equivariant(&t, 1000, seed)?;
        props::matches_oracle(&t, 1000, seed)?;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(120), "property suite")?;
    Ok(format!("3 x 1000 profiles, 0 violations in {elapsed:.1?}"))
}

fn replay(n: usize, w: &serde_json::Value, failure: bool) -> Result<(), String> {
    let text = serde_json::to_string(&w["profile"]).unwrap();
    let p: Profile = intensity::io::parse_profile(&text).map_err(|e| e.to_string())?;
    check(p.n() == n, "witness has wrong size")?;
    if failure {
        check(
            common::oracle_efficient(&p).is_empty(),
            "failure witness does not replay",
        )?;
    }
    let cycle: Vec<String> = w["cycle"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap().to_string())
        .collect();
    check(!cycle.is_empty(), "witness without a cycle")?;
    let edges = common::oracle_edges(&p);
    for i in 0..cycle.len() {
        let e = (cycle[i].clone(), cycle[(i + 1) % cycle.len()].clone());
        check(
            edges.contains(&e),
            format!("cycle edge {e:?} does not replay"),
        )?;
    }
    Ok(())
}

fn without_timing(mut v: serde_json::Value) -> serde_json::Value {
    let m = v.as_object_mut().unwrap();
    m.remove("elapsed_ms");
    m.remove("units_resumed");
    v
}

fn four_object_sweeps() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("random.json");
    let (code, out, elapsed) = bin(&[
        "verify-existence",
        "--n",
        "4",
        "--samples",
        "1000000",
        "--seed",
        "1",
        "--report",
        report_path.to_str().unwrap(),
    ]);
    within(elapsed, Duration::from_secs(300), "n=4 random sweep")?;
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    check(
        report["profiles_checked"] == 1_000_000,
        "random sweep incomplete",
    )?;
    let witnesses =
        report["failures_count"].as_u64().unwrap() + report["cycles_count"].as_u64().unwrap();
    check(
        code == if witnesses == 0 { 0 } else { 2 },
        format!("exit code {code}"),
    )?;
    for w in report["failures"].as_array().unwrap() {
        replay(4, w, true)?;
    }
    for w in report["cycles"].as_array().unwrap() {
        replay(4, w, false)?;
    }
    // Same seed, staged through a checkpoint with a torn final line.
    let log = dir.path().join("random.log");
    let staged = SweepOptions {
        checkpoint: Some(log.clone()),
        max_units: Some(100),
        ..SweepOptions::default()
    };
    verify_existence_random(4, 1_000_000, 1, &staged).map_err(|e| e.to_string())?;
    tear(&log);
    let resumed = verify_existence_random(
        4,
        1_000_000,
        1,
        &SweepOptions {
            max_units: None,
            ..staged.clone()
        },
    )
    .map_err(|e| e.to_string())?;
    check(
        resumed.units_resumed == 100,
        format!("resumed {} units", resumed.units_resumed),
    )?;
    check(
        without_timing(serde_json::to_value(&resumed).unwrap()) == without_timing(report.clone()),
        "staged random report differs from the uninterrupted one",
    )?;
    let random_line = out.lines().next().unwrap_or_default().to_string();

    // Symmetry-reduced exhaustive sweep, staged the same way.
    let start = Instant::now();
    let log = dir.path().join("symmetry.log");
    let staged = SweepOptions {
        checkpoint: Some(log.clone()),
        max_units: Some(3000),
        ..SweepOptions::default()
    };
    let first = verify_existence_exhaustive(4, true, &staged).map_err(|e| e.to_string())?;
    check(!first.complete, "first stage should stop early")?;
    tear(&log);
    let full_opts = SweepOptions {
        max_units: None,
        ..staged
    };
    let sym = verify_existence_exhaustive(4, true, &full_opts).map_err(|e| e.to_string())?;
    let sym_elapsed = start.elapsed();
    check(sym.complete, "symmetry sweep incomplete")?;
    check(
        sym.profiles_covered as u128 == 384u128.pow(4),
        format!("covered {} profiles", sym.profiles_covered),
    )?;
    // Replaying from the finished log alone reproduces the report exactly.
    let replayed = verify_existence_exhaustive(4, true, &full_opts).map_err(|e| e.to_string())?;
    check(
        replayed.units_resumed == replayed.units_total,
        "replay recomputed units",
    )?;
    check(
        replayed.deterministic_json() == sym.deterministic_json(),
        "report from checkpoint log differs",
    )?;
    // Regression values from an uninterrupted run.
    check(
        (sym.profiles_checked, sym.failures_count, sym.cycles_count) == (38_348_352, 1098, 18_345)
            && (sym.failures_covered, sym.cycles_covered) == (333_360, 9_462_672),
        format!("verdict changed: {}", sym.summary()),
    )?;
    let json = serde_json::to_value(&sym).unwrap();
    for w in json["failures"].as_array().unwrap().iter().take(10) {
        replay(4, w, true)?;
    }
    // The n = 3 sweep staged and straight agree byte for byte.
    let log3 = dir.path().join("n3.log");
    let part = SweepOptions {
        checkpoint: Some(log3.clone()),
        max_units: Some(5),
        ..SweepOptions::default()
    };
    verify_existence_exhaustive(3, true, &part).map_err(|e| e.to_string())?;
    let staged3 = verify_existence_exhaustive(
        3,
        true,
        &SweepOptions {
            max_units: None,
            ..part
        },
    )
    .map_err(|e| e.to_string())?;
    let straight3 = verify_existence_exhaustive(3, true, &SweepOptions::default())
        .map_err(|e| e.to_string())?;
    check(
        staged3.deterministic_json() == straight3.deterministic_json(),
        "n=3 staged differs",
    )?;
    Ok(format!(
        "random: {random_line} in {elapsed:.1?}, witnesses replay; symmetry: {} in {sym_elapsed:.1?}, resumable and reproducible from its log",
        sym.summary()
    ))
}

/// Simulates an interrupted write by appending half a record.
fn tear(log: &std::path::Path) {
    use std::io::Write;
    let mut f = std::fs::OpenOptions::new().append(true).open(log).unwrap();
    f.write_all(br#"{"record":{"unit":99999,"chec"#).unwrap();
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("relation counts", relation_counts),
        ("per-order factorization", per_order_counts),
        ("three-object example", example_golden),
        ("existence for three objects", three_object_sweep),
        ("five-object counterexample", counterexample),
        ("property suite", property_suite),
        ("four-object sweeps", four_object_sweeps),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
