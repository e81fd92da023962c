//! Acceptance criteria 1-9. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails. Criteria 1-8 run under rayon pools of 1, 2
//! and 8 threads; the 1-thread run decides them and criterion 9 compares
//! the reports of all three byte for byte.

use hypermatch_core::absorbing::{lattice_absorbing_pipeline, npm_via_absorption, AbsorbParams, LatticePipelineParams};
use hypermatch_core::combin::{binomial, for_each_combination};
use hypermatch_core::hgraph::DEFAULT_NODE_BUDGET;
use hypermatch_core::reachability::{reach_count, reach_partition};
use hypermatch_core::thresholds::g_optimize;
use hypermatch_core::verify::{
    bound_cases, degree_formula_cases, divisibility_barrier_cases, half_point_cases, lattice_claim_cases,
    lattice_random_cases, space_barrier_cases, zero_cases, VerifyReport, VerifyStatus,
};
use hypermatch_core::{generate, Hypergraph, Matching, Model, ReachParams};
use std::fmt::Write as _;
use std::process::ExitCode;
use std::time::{Duration, Instant};

struct Outcome {
    pass: bool,
    summary: String,
    /// Deterministic detail compared across thread counts.
    report: String,
    elapsed: Duration,
}

fn from_verify(report: VerifyReport) -> (bool, String, String) {
    let pass = report.status == VerifyStatus::Pass;
    let mut summary = format!("{}/{} cases", report.passed(), report.cases.len());
    if !report.notes.is_empty() {
        let _ = write!(summary, ", {} skipped", report.notes.len());
    }
    for c in report.cases.iter().filter(|c| !c.pass).take(3) {
        let _ = write!(summary, "; failed {}: expected {}, got {}", c.id, c.expected, c.got);
    }
    (pass, summary, format!("{report:?}"))
}

fn threshold_anchor() -> (bool, String, String) {
    let t = g_optimize(6, 3, 1).expect("valid parameters");
    let pass = (t.g - 0.2831).abs() <= 1e-3 && (t.x_star - 0.605).abs() <= 5e-3;
    (pass, format!("g(6,3,1) = {:.6}, x* = {:.6}", t.g, t.x_star), format!("{t:?}"))
}

fn bounds() -> (bool, String, String) {
    from_verify(VerifyReport::combine("bounds", vec![bound_cases(10), half_point_cases(40)]))
}

fn zero() -> (bool, String, String) {
    from_verify(zero_cases(8))
}

fn barriers() -> (bool, String, String) {
    from_verify(VerifyReport::combine(
        "barriers",
        vec![
            divisibility_barrier_cases(4, 14, DEFAULT_NODE_BUDGET),
            space_barrier_cases(3..=3, 15, 4, DEFAULT_NODE_BUDGET),
        ],
    ))
}

fn degree_formulas() -> (bool, String, String) {
    from_verify(degree_formula_cases(4, 14))
}

fn lattice() -> (bool, String, String) {
    from_verify(VerifyReport::combine("lattice", vec![lattice_claim_cases(), lattice_random_cases(0, 200)]))
}

fn reachability() -> (bool, String, String) {
    let params = ReachParams::default();
    let mut report = String::new();
    let mut bad = Vec::new();
    let mut checked = 0;
    for n in 4..=12usize {
        let h = Hypergraph::complete(n, 3).expect("valid");
        for i in 1..=2usize {
            let want = binomial((n - 2) as u64, (3 * i - 1) as u64).expect("small");
            for_each_combination(n, 2, |pair| {
                let got = reach_count(&h, pair[0], pair[1], i, &params).expect("valid pair");
                checked += 1;
                if !got.exact || got.value != want as f64 {
                    bad.push(format!("n={n} i={i} {pair:?}: {} vs {want}", got.value));
                }
            });
            let _ = writeln!(report, "n={n} i={i} want={want}");
        }
    }
    let mut edges = Vec::new();
    for base in [0u32, 7] {
        for_each_combination(7, 3, |e| edges.push(e.iter().map(|&v| v + base).collect::<Vec<u32>>()));
    }
    let two = Hypergraph::build(14, 3, &edges).expect("valid");
    let p = reach_partition(&two, &params).expect("valid parameters");
    let _ = writeln!(report, "{p:?}");
    let pass = bad.is_empty() && p.r() == 2 && p.trash().is_empty();
    let mut summary = format!("{checked} exact reach counts, two disjoint K_7: r = {}", p.r());
    for b in bad.iter().take(3) {
        let _ = write!(summary, "; {b}");
    }
    (pass, summary, report)
}

// the hard invariant: certified and exactly floor(n/k) edges
fn check(h: &Hypergraph, m: &Matching, name: &str, seed: u64, report: &mut String, invalid: &mut Vec<String>) {
    if m.certify(h).is_err() || m.size() != h.n() / h.k() {
        invalid.push(format!("{name} seed {seed}"));
    }
    let _ = writeln!(report, "{name} {seed} {:?}", m.edges());
}

fn pipelines() -> (bool, String, String) {
    let mut report = String::new();
    let mut invalid = Vec::new();
    let mut absorb_ok = 0;
    for seed in 0..100 {
        let h = generate(32, 6, Model::Random { p: 0.9, seed }).expect("valid");
        match npm_via_absorption(&h, &AbsorbParams { seed, ..Default::default() }) {
            Ok((m, _)) => {
                absorb_ok += 1;
                check(&h, &m, "absorb4", seed, &mut report, &mut invalid);
            }
            Err(f) => {
                let _ = writeln!(report, "absorb4 {seed} failed {:?}: {}", f.stage, f.message);
            }
        }
    }
    let mut lattice_ok = 0;
    for seed in 0..100 {
        let h = generate(13, 3, Model::Random { p: 0.9, seed }).expect("valid");
        match lattice_absorbing_pipeline(&h, &LatticePipelineParams { seed, ..Default::default() }) {
            Ok((m, _)) => {
                lattice_ok += 1;
                check(&h, &m, "lattice", seed, &mut report, &mut invalid);
            }
            Err(f) => {
                let _ = writeln!(report, "lattice {seed} failed {:?}: {}", f.stage, f.message);
            }
        }
    }
    let pass = absorb_ok >= 95 && lattice_ok >= 95 && invalid.is_empty();
    let summary = format!(
        "absorb4 {absorb_ok}/100, lattice {lattice_ok}/100, invalid outputs: {}",
        if invalid.is_empty() { "none".to_string() } else { invalid.join(", ") }
    );
    (pass, summary, report)
}

type Criterion = (&'static str, Duration, fn() -> (bool, String, String));

const CRITERIA: [Criterion; 8] = [
    ("threshold anchor", Duration::from_secs(5), threshold_anchor),
    ("bounds on g", Duration::from_secs(120), bounds),
    ("zero cases", Duration::from_secs(60), zero),
    ("barrier verification", Duration::from_secs(300), barriers),
    ("degree formulas", Duration::from_secs(120), degree_formulas),
    ("lattice oracles", Duration::from_secs(60), lattice),
    ("reachability", Duration::from_secs(120), reachability),
    ("pipelines", Duration::from_secs(600), pipelines),
];

fn run_all() -> Vec<Outcome> {
    CRITERIA
        .iter()
        .map(|&(_, limit, f)| {
            let start = Instant::now();
            let (pass, summary, report) = f();
            let elapsed = start.elapsed();
            let mut summary = summary;
            if elapsed > limit {
                let _ = write!(summary, "; over the {}s limit", limit.as_secs());
            }
            Outcome { pass: pass && elapsed <= limit, summary, report, elapsed }
        })
        .collect()
}

fn main() -> ExitCode {
    let mut runs = Vec::new();
    for threads in [1, 2, 8] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
        runs.push((threads, pool.install(run_all)));
    }
    let mut all = true;
    for (i, out) in runs[0].1.iter().enumerate() {
        all &= out.pass;
        println!(
            "criterion {} [{}]: {} ({}; {:.1}s)",
            i + 1,
            CRITERIA[i].0,
            if out.pass { "PASS" } else { "FAIL" },
            out.summary,
            out.elapsed.as_secs_f64()
        );
    }
    let mut differing = Vec::new();
    for (threads, outs) in &runs[1..] {
        for (i, out) in outs.iter().enumerate() {
            if out.report != runs[0].1[i].report || out.pass != runs[0].1[i].pass {
                differing.push(format!("criterion {} at {threads} threads", i + 1));
            }
        }
    }
    let same = differing.is_empty();
    all &= same;
    println!(
        "criterion 9 [determinism]: {} (reports of criteria 1-8 under 1, 2 and 8 threads {})",
        if same { "PASS" } else { "FAIL" },
        if same { "are byte-identical".to_string() } else { format!("differ: {}", differing.join(", ")) }
    );
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
