//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints exactly one `PASS`/`FAIL` line; the process fails if any hard
//! criterion fails. Criterion 7 is a timing benchmark and only reports.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use sha2::{Digest, Sha256};

use gtscheme::cli::bench_construction;
use gtscheme::gvcode::{
    dif, goal, verify_distance, ConstructionState, GeneratorMatrix, Mode,
};
use gtscheme::params::{derive_params, minimal_length, CodeParams, Rational};
use gtscheme::scheme::{build_gt_scheme_with, simulate, BuildOptions};
use gtscheme::ssf::{reduce_code, verify_ssf, DEFAULT_SSF_BUDGET};
use gtscheme::{construct_code, ConstructOptions};

type Check = std::result::Result<String, String>;

/// `(id, name, hard, check)`
type Criterion = (u32, &'static str, bool, fn() -> Check);

fn main() {
    let criteria: Vec<Criterion> = vec![
        (1, "golden Reed-Solomon (9,3)-SSF", true, golden_ssf),
        (2, "GV construction correctness grid", true, gv_grid),
        (3, "exact-mode expected goal monotone", true, monotone_goal),
        (4, "Dif calibration against exact tails", true, dif_calibration),
        (5, "end-to-end GT round-trip", true, round_trip),
        (6, "size bound tracking", true, size_bound),
        (7, "complexity scaling (soft)", false, complexity),
        (8, "CLI determinism", true, determinism),
    ];
    let mut hard_failures = 0;
    for (id, name, hard, check) in criteria {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check)
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {id}: PASS {name} [{secs:.2}s] {detail}"),
            Err(detail) if hard => {
                hard_failures += 1;
                println!("criterion {id}: FAIL {name} [{secs:.2}s] {detail}");
            }
            Err(detail) => println!("criterion {id}: FAIL (soft, reported only) {name} [{secs:.2}s] {detail}"),
        }
    }
    if hard_failures > 0 {
        eprintln!("{hard_failures} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration, what: &str) -> std::result::Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("{what} took {took:?}, limit {limit:?}"))
}

fn golden_ssf() -> Check {
    let start = Instant::now();
    let p = CodeParams::new(3, 3, 2, Rational::new(2, 3)).map_err(|e| e.to_string())?;
    let g = GeneratorMatrix::new(p, vec![1, 0, 1, 1, 1, 2]).map_err(|e| e.to_string())?;
    let s = reduce_code(&g, 9).map_err(|e| e.to_string())?;
    let expected: Vec<Vec<u64>> = vec![
        vec![1, 4, 7],
        vec![2, 5, 8],
        vec![3, 6, 9],
        vec![1, 6, 8],
        vec![2, 4, 9],
        vec![3, 5, 7],
        vec![1, 5, 9],
        vec![2, 6, 7],
        vec![3, 4, 8],
    ];
    ensure(s.tests() == expected.as_slice(), || format!("got {:?}", s.tests()))?;
    let verdict = verify_ssf(&s, 3, DEFAULT_SSF_BUDGET);
    ensure(verdict.is_valid(), || format!("verify_ssf: {verdict:?}"))?;
    within(start, Duration::from_secs(1), "golden example")?;
    Ok("9/9 sets in order, 3-SSF verified".into())
}

/// `(q, k, delta)` with `q^k <= 2^16`, `k <= 8`.
fn grid() -> Vec<(u32, u32, Rational)> {
    let mut out = Vec::new();
    for q in [2u32, 3, 5, 7, 11] {
        for r in 2u64..=5 {
            let delta = Rational::new(r - 1, r);
            // positive rate needs delta < 1 - 1/q
            if delta >= Rational::new(q as u64 - 1, q as u64) {
                continue;
            }
            for k in 1..=8u32 {
                if (q as u64).pow(k) <= 1 << 16 {
                    out.push((q, k, delta));
                }
            }
        }
    }
    // binary codes cannot reach delta = (r-1)/r >= 1/2; cover them at smaller delta
    for delta in [Rational::new(1, 4), Rational::new(1, 3), Rational::new(2, 5)] {
        for k in 1..=8 {
            out.push((2, k, delta));
        }
    }
    out
}

fn gv_grid() -> Check {
    let start = Instant::now();
    let grid = grid();
    let mut runs = 0;
    let mut failures = Vec::new();
    for &(q, k, delta) in &grid {
        let m = minimal_length(q, k, delta).map_err(|e| e.to_string())?;
        let p = CodeParams::new(q, m, k, delta).map_err(|e| e.to_string())?;
        for mode in [Mode::Fast, Mode::Exact] {
            // the built-in check and exact fallback are off: this measures the raw mode
            let opts = ConstructOptions { mode, verify: false, ..Default::default() };
            let g = construct_code(&p, &opts).map_err(|e| e.to_string())?.matrix;
            let d = verify_distance(&g, u64::MAX).map_err(|e| e.to_string())?;
            runs += 1;
            if d < p.min_weight() {
                failures.push(format!("{p} {mode}: distance {d}"));
            }
        }
    }
    ensure(grid.len() >= 50, || format!("grid has only {} sets", grid.len()))?;
    ensure(failures.is_empty(), || failures.join("; "))?;
    within(start, Duration::from_secs(300), "grid")?;
    Ok(format!("{} parameter sets, {runs} constructions, 0 failures", grid.len()))
}

fn monotone_goal() -> Check {
    let instances: Vec<(u32, u32, Rational)> = vec![
        (2, 4, Rational::new(1, 4)),
        (2, 7, Rational::new(1, 3)),
        (2, 10, Rational::new(1, 4)),
        (3, 3, Rational::new(1, 2)),
        (3, 6, Rational::new(1, 2)),
        (5, 2, Rational::new(1, 2)),
        (5, 3, Rational::new(2, 3)),
        (5, 4, Rational::new(3, 4)),
        (7, 2, Rational::new(2, 3)),
        (7, 3, Rational::new(4, 5)),
        (11, 2, Rational::new(4, 5)),
        (31, 2, Rational::new(9, 10)),
    ];
    let one = BigRational::from_integer(BigInt::from(1));
    let mut steps = 0usize;
    for &(q, k, delta) in &instances {
        let m = minimal_length(q, k, delta).map_err(|e| e.to_string())?;
        let p = CodeParams::new(q, m, k, delta).map_err(|e| e.to_string())?;
        ensure(p.num_messages() <= 1 << 10, || format!("{p}: q^k too large"))?;
        let mut state = ConstructionState::new(&p).map_err(|e| e.to_string())?;
        let mut prev = state.expected_goal(u64::MAX).map_err(|e| e.to_string())?;
        ensure(prev < one, || format!("{p}: initial E(goal) = {prev} >= 1"))?;
        while !state.is_complete() {
            let letter = state.weights_exact().argmax();
            state.commit(letter);
            let next = state.expected_goal(u64::MAX).map_err(|e| e.to_string())?;
            ensure(next <= prev, || {
                format!("{p}: E(goal) rose from {prev} to {next} at step {steps}")
            })?;
            prev = next;
            steps += 1;
        }
        let g = state.into_matrix().map_err(|e| e.to_string())?;
        ensure(prev.is_zero(), || format!("{p}: final E(goal) = {prev}"))?;
        ensure(goal(&g) == 0, || format!("{p}: final goal {}", goal(&g)))?;
    }
    Ok(format!("{} instances, {steps} steps, exact rationals", instances.len()))
}

/// `q^R Pr(X < need)` for `X ~ B(R, 1 - 1/q)`, from a Pascal triangle.
fn oracle_tail(pascal: &[Vec<BigUint>], q: u32, trials: usize, need: i64) -> BigUint {
    let mut sum = BigUint::zero();
    let mut pow = BigUint::from(1u32);
    for (s, c) in pascal[trials].iter().enumerate() {
        if (s as i64) >= need {
            break;
        }
        sum += c * &pow;
        pow *= q - 1;
    }
    sum
}

fn dif_calibration() -> Check {
    const MAX_REMAINING: usize = 64;
    let mut pascal: Vec<Vec<BigUint>> = vec![vec![BigUint::from(1u32)]];
    for n in 1..=MAX_REMAINING {
        let prev = &pascal[n - 1];
        let mut row = vec![BigUint::from(1u32); n + 1];
        for s in 1..n {
            row[s] = &prev[s - 1] + &prev[s];
        }
        pascal.push(row);
    }
    let m = MAX_REMAINING as u32 + 1;
    let mut checked = 0u64;
    let mut worst = 0f64;
    for q in [2u32, 3, 5, 7] {
        let qq = q as u64;
        let mut deltas = vec![Rational::new(1, 4), Rational::new(qq - 1, qq), Rational::new(qq - 1, 2 * qq)];
        if q > 2 {
            deltas.push(Rational::new(1, 2));
        }
        for delta in deltas {
            let p = CodeParams::new(q, m, 1, delta).map_err(|e| e.to_string())?;
            let need = p.min_weight() as i64;
            for i in 1..=m {
                let remaining = (m - i) as usize;
                let denom = BigUint::from(q).pow(remaining as u32);
                for c in 0..i {
                    // bad iff c + (row i nonzero) + X < need; vanishing minus nonvanishing
                    let d = need - c as i64;
                    let a = oracle_tail(&pascal, q, remaining, d);
                    let b = oracle_tail(&pascal, q, remaining, d - 1);
                    let exact = BigRational::new(
                        BigInt::from(a) - BigInt::from(b),
                        BigInt::from(denom.clone()),
                    );
                    let got = dif(i, c, &p);
                    let want = exact.to_f64().unwrap();
                    checked += 1;
                    if want == 0.0 {
                        ensure(got == 0.0, || format!("q={q} {p} i={i} c={c}: {got} != 0"))?;
                        continue;
                    }
                    let rel = ((got - want) / want).abs();
                    worst = worst.max(rel);
                    ensure(rel <= 1e-9, || {
                        format!("q={q} {p} i={i} c={c}: dif {got:e} vs exact {want:e}, rel {rel:e}")
                    })?;
                }
            }
        }
    }
    Ok(format!("{checked} (q, R, c) cases, worst relative error {worst:.2e}"))
}

fn round_trip() -> Check {
    let start = Instant::now();
    let opts = BuildOptions::default();
    let small = simulate(9, 2, 46, 0, &opts).map_err(|e| e.to_string())?;
    ensure(small.exhaustive && small.trials == 46 && small.recovered == 46, || {
        format!("(9,2): {}/{} recovered, exhaustive={}", small.recovered, small.trials, small.exhaustive)
    })?;
    let large = simulate(10_000, 5, 1000, 0, &opts).map_err(|e| e.to_string())?;
    ensure(large.trials == 1000 && large.recovered == 1000, || {
        format!("(10^4,5): {}/{} recovered, witness {:?}", large.recovered, large.trials, large.witness)
    })?;
    within(start, Duration::from_secs(120), "round trip")?;
    Ok(format!(
        "(9,2) 46/46 exhaustive with t={}, (10^4,5) 1000/1000 with t={}",
        small.t, large.t
    ))
}

fn size_bound() -> Check {
    let mut rows = Vec::new();
    let mut worst = 0f64;
    for n in [100u64, 1_000, 10_000, 100_000] {
        for r in [2u64, 4, 8] {
            let params = derive_params(n, r + 1).map_err(|e| e.to_string())?;
            let Some(code) = params.code else {
                rows.push(format!("n={n} r={r} trivial"));
                continue;
            };
            let built = build_gt_scheme_with(n, r, &BuildOptions::default()).map_err(|e| e.to_string())?;
            let t = built.scheme.num_tests() as u64;
            ensure(t <= code.m as u64 * code.q as u64, || format!("n={n} r={r}: t={t} > mq"))?;
            ensure((code.q as u64) < 4 * (r + 1), || format!("n={n} r={r}: q={} too large", code.q))?;
            let ratio = t as f64 / ((r * r) as f64 * (n as f64).ln());
            worst = worst.max(ratio);
            ensure(ratio <= 40.0, || format!("n={n} r={r}: t/(r^2 ln n) = {ratio:.2}"))?;
            rows.push(format!("n={n} r={r} t={t} ratio={ratio:.2}"));
        }
    }
    Ok(format!("max t/(r^2 ln n) = {worst:.2}; {}", rows.join(", ")))
}

fn complexity() -> Check {
    let rows = bench_construction(2, 64, 14, 3, Rational::new(1, 10), Mode::Fast, 3)
        .map_err(|e| e.to_string())?;
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    let text = ratios.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join(", ");
    ensure(ratios.iter().all(|x| (1.5..=3.0).contains(x)), || {
        format!("ratios per doubling of q^k at m=64: {text}")
    })?;
    Ok(format!("ratios per doubling of q^k at m=64: {text}"))
}

fn gtscheme(dir: &Path, args: &[&str]) -> std::result::Result<(i32, String), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_gtscheme"))
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    let code = out.status.code().unwrap_or(-1);
    // wall-clock fields are the only intended nondeterminism on stdout
    let stdout: Vec<String> = String::from_utf8_lossy(&out.stdout)
        .split_whitespace()
        .filter(|tok| !tok.contains("_ms="))
        .map(str::to_string)
        .collect();
    Ok((code, stdout.join(" ")))
}

fn digest(path: &Path) -> std::result::Result<String, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(format!("{:x}", Sha256::digest(bytes)))
}

fn determinism() -> Check {
    let scratch = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = scratch.path();
    std::fs::write(
        root.join("rs.gts"),
        "GTS v1\nn=9 r=3 t=9\n1 4 7\n2 5 8\n3 6 9\n1 6 8\n2 4 9\n3 5 7\n1 5 9\n2 6 7\n3 4 8\n",
    )
    .map_err(|e| e.to_string())?;
    // (name, args, output file or "" for stdout-only commands)
    let commands: Vec<(&str, Vec<&str>, &str)> = vec![
        ("params", vec!["params", "-n", "10000", "-r", "5", "--gt"], ""),
        ("build-code", vec!["build-code", "-n", "10000", "-r", "6", "-o", "OUT"], "code.gvc"),
        ("build-code exact", vec!["build-code", "--q", "5", "--m", "25", "--k", "3", "--delta", "1/2", "--mode", "exact", "-o", "OUT"], "exact.gvc"),
        ("build-scheme", vec!["build-scheme", "-n", "2000", "-r", "3", "--gt", "-o", "OUT"], "scheme.gts"),
        ("build-scheme threads", vec!["build-scheme", "-n", "2000", "-r", "3", "--gt", "--threads", "4", "-o", "OUT"], "scheme4.gts"),
        ("verify-code", vec!["verify-code", "-i", "code.gvc"], ""),
        ("verify-ssf", vec!["verify-ssf", "-i", "rs.gts", "-r", "3"], ""),
        ("verify-ssf sampled", vec!["verify-ssf", "-i", "scheme.gts", "--trials", "200", "--seed", "7"], ""),
        ("outcomes", vec!["outcomes", "-i", "scheme.gts", "-d", "3,77,1999", "-o", "OUT"], "o.gto"),
        ("decode", vec!["decode", "-i", "scheme.gts", "--outcomes", "o.gto", "-o", "OUT"], "d.txt"),
        ("simulate", vec!["simulate", "-n", "500", "-r", "3", "--trials", "300", "--seed", "11", "-o", "OUT"], "sim.txt"),
        ("bench", vec!["bench", "--k", "6", "--steps", "1", "--repeat", "1"], ""),
    ];
    let mut checked = Vec::new();
    for (name, args, file) in &commands {
        let mut seen = Vec::new();
        for run in 0..2 {
            let target = format!("{run}-{file}");
            let args: Vec<&str> = args.iter().map(|a| if *a == "OUT" { target.as_str() } else { a }).collect();
            let (code, stdout) = gtscheme(root, &args)?;
            ensure(code == 0, || format!("{name}: exit {code}"))?;
            let hash = if file.is_empty() { String::new() } else { digest(&root.join(&target))? };
            // later commands read the first run's files
            if !file.is_empty() && run == 0 {
                std::fs::copy(root.join(&target), root.join(file)).map_err(|e| e.to_string())?;
            }
            if *name == "bench" {
                seen.push((String::new(), hash));
            } else {
                seen.push((stdout, hash));
            }
        }
        ensure(seen[0] == seen[1], || format!("{name}: runs differ: {:?}", seen))?;
        checked.push(*name);
    }
    ensure(
        digest(&root.join("scheme.gts"))? == digest(&root.join("scheme4.gts"))?,
        || "--threads 4 changed the scheme file".into(),
    )?;
    Ok(format!("{} command runs hash-identical, threads 1 == threads 4", checked.len()))
}
