//! The twelve acceptance criteria, one pass/fail line each.

use std::process::Command;
use std::time::Instant;

use qclab::bench::{choose_t, run_probe, ProbeConfig};
use qclab::conflict::sabotage;
use qclab::verify::{composition_run, run_suite, SuiteConfig};
use qclab::{PartialFunction, Rational, TreeSearchBudget};

type Outcome = Result<String, String>;
type Check = Box<dyn Fn() -> Outcome>;

fn suites(names: &[&str]) -> Outcome {
    let cfg = SuiteConfig::default();
    let mut parts = Vec::new();
    for name in names {
        let out = run_suite(name, &cfg).map_err(|e| format!("{name}: {e}"))?;
        if !out.passed() {
            return Err(format!(
                "{out}; first counterexample: {:?}",
                out.counterexamples.first()
            ));
        }
        parts.push(out.to_string());
    }
    Ok(parts.join("; "))
}

fn rat(p: i64, q: i64) -> Rational {
    Rational::new(p.into(), q.into())
}

/// Value of a 2×2 zero-sum game without a saddle point.
fn two_by_two(a: Rational, b: Rational, c: Rational, d: Rational) -> Rational {
    (a.clone() * d.clone() - b.clone() * c.clone()) / (a + d - b - c)
}

fn sabotage_mechanism() -> Outcome {
    let suite = suites(&["sabotage"])?;
    // Rows: query x1 first, x2 first. Columns: separate 00 from 01, from 10.
    let hand = two_by_two(rat(2, 1), rat(1, 1), rat(1, 1), rat(2, 1));
    let rs = sabotage::<Rational>(&PartialFunction::or(2), &TreeSearchBudget::default())
        .map_err(|e| e.to_string())?
        .value;
    if rs != hand || hand != rat(3, 2) {
        return Err(format!("RS(OR2) = {rs}, hand game value {hand}"));
    }
    Ok(format!("{suite}; RS(OR2) = {rs} matches the 2x2 hand game"))
}

fn composition() -> Outcome {
    let run = composition_run(&TreeSearchBudget::default()).map_err(|e| e.to_string())?;
    if run.depth != 4 {
        return Err(format!("depth(A') = {}, expected 4", run.depth));
    }
    let bound = run.bound();
    for (z, ok, e) in &run.per_z {
        if *ok != rat(1, 1) || *e > bound {
            return Err(format!("z = {z}: success {ok}, expected queries {e}, bound {bound}"));
        }
    }
    let worst = run.per_z.iter().map(|r| r.2.clone()).max().unwrap_or_default();
    Ok(format!("success 1 on every z; max E[z-queries] = {worst} <= {bound}"))
}

fn f0g0() -> Outcome {
    // Smallest odd t with t >= 8(1 + sqrt(2 ln 3)).
    let real = 8.0 * (1.0 + (2.0 * 3f64.ln()).sqrt());
    let hand = (real.ceil() as usize) | 1;
    let t = choose_t(1.0 / 3.0, 1600).map_err(|e| e.to_string())?;
    if t != 21 || hand != 21 {
        return Err(format!("t = {t}, hand {hand}"));
    }
    let cfg = ProbeConfig::new(1600, 1.0 / 3.0, 200, 0).map_err(|e| e.to_string())?;
    let s = run_probe(&cfg).map_err(|e| e.to_string())?;
    if s.probes_per_trial != Some(21 * 1600) {
        return Err(format!("probes per trial {:?}", s.probes_per_trial));
    }
    let gate = 1.0 / 3.0 + 3.0 * s.gate_sigma();
    let line = format!(
        "error rate {} over 200 trials (gate {gate:.4}); worst trial had {} wrong blocks; 33600 probes per trial",
        s.error_rate(),
        s.worst_wrong
    );
    if s.within_gate() {
        Ok(line)
    } else {
        Err(line)
    }
}

fn cli(args: &[&str], threads: Option<&str>) -> Result<Vec<u8>, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qclab"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("QCLAB_THREADS", t);
    }
    let out = cmd.output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} exited with {}", out.status));
    }
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let runs: [&[&str]; 4] = [
        &["bench", "f0g0", "--trials", "40", "--seed", "11"],
        &["bench", "catalog", "--seed", "5", "--format", "json"],
        &["verify", "simulation", "--samples", "20", "--seed", "3"],
        &[
            "bench",
            "run",
            concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/simulation-check.json"),
        ],
    ];
    for args in runs {
        let a = cli(args, None)?;
        let b = cli(args, None)?;
        let c = cli(args, Some("1"))?;
        if a != b || a != c {
            return Err(format!("{args:?} differs between runs"));
        }
    }
    Ok(format!(
        "{} commands byte-identical across repeats and thread counts",
        runs.len()
    ))
}

fn main() {
    let criteria: Vec<(&str, Check)> = vec![
        (
            "process chart equals the pushforward chart",
            Box::new(|| suites(&["simulation"])),
        ),
        ("walk mass is one on computing trees", Box::new(|| suites(&["walk"]))),
        ("chi of point pairs equals sep", Box::new(|| suites(&["point-pairs"]))),
        ("singleton chibar bound equals sabotage", Box::new(sabotage_mechanism)),
        ("direct sum of expected counts", Box::new(|| suites(&["direct-sum"]))),
        ("E[N_1] equals chi for t = 1", Box::new(|| suites(&["single-block"]))),
        ("composed algorithm is correct within budget", Box::new(composition)),
        (
            "truncated trees keep error below 1/2",
            Box::new(|| suites(&["truncation"])),
        ),
        (
            "information inequalities and identities",
            Box::new(|| suites(&["pinsker", "mutin", "chain-rule"])),
        ),
        ("f0 o g0 majority-probe protocol", Box::new(f0g0)),
        (
            "search oracles match exhaustive enumeration",
            Box::new(|| suites(&["oracle"])),
        ),
        ("CLI reports are deterministic", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS ({secs:.1}s) {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL ({secs:.1}s) {name}: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
