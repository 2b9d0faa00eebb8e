//! Command-line front-end. Output files are canonical and never contain
//! timings, so identical flags give byte-identical files; wall-clock figures
//! only go to stdout.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{GtError, Result};
use crate::format;
use crate::gvcode::{construct_code, verify_distance, ConstructOptions, Mode, Verification};
use crate::params::{derive_params, CodeParams, ParamsReport, Rational};
use crate::scheme::{self, BuildOptions, Construction, DefectiveSet};
use crate::ssf::{verify_ssf, verify_ssf_sampled, SsfVerdict, DEFAULT_SSF_BUDGET};

/// Version of the `--json` report layout.
pub const JSON_SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "gtscheme", version, about = "Explicit non-adaptive group testing schemes")]
struct Cli {
    /// Worker threads (1 gives the reference single-threaded run).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    /// Print a machine-readable report instead of the text summary.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Derive q, k, m for an (n, r) family.
    Params(Target),
    /// Construct a generator matrix and write it as GVC.
    BuildCode(BuildCode),
    /// Construct a scheme and write it as GTS.
    BuildScheme(BuildScheme),
    /// Check a GVC file's minimum distance against its delta.
    VerifyCode(VerifyCode),
    /// Check that a GTS file is an (n, r)-SSF.
    VerifySsf(VerifySsf),
    /// Compute test outcomes for a defective set.
    Outcomes(OutcomesCmd),
    /// Recover the defective set from outcomes.
    Decode(Decode),
    /// Build a scheme and round-trip random defective sets through it.
    Simulate(Simulate),
    /// Time the code construction at fixed m while q^k doubles.
    Bench(Bench),
}

#[derive(Args, Debug)]
struct Target {
    #[arg(short = 'n')]
    n: u64,
    /// SSF strength; with --gt, the number of defectives to identify.
    #[arg(short = 'r')]
    r: u64,
    /// Interpret -r as a defective count (strength r + 1).
    #[arg(long)]
    gt: bool,
}

impl Target {
    fn strength(&self) -> Result<u64> {
        if self.gt {
            self.r
                .checked_add(1)
                .ok_or_else(|| GtError::usage("r too large"))
        } else {
            Ok(self.r)
        }
    }
}

#[derive(Args, Debug)]
struct ModeArgs {
    #[arg(long, default_value = "fast")]
    mode: Mode,
    /// Accepted for uniformity; construction is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest q^k the distance check will enumerate.
    #[arg(long, default_value_t = crate::gvcode::DEFAULT_VERIFY_BUDGET)]
    budget: u64,
}

impl ModeArgs {
    fn options(&self) -> ConstructOptions {
        ConstructOptions {
            mode: self.mode,
            verify: true,
            verify_budget: self.budget,
        }
    }
}

#[derive(Args, Debug)]
struct BuildCode {
    #[arg(short = 'n', requires = "r", conflicts_with_all = ["q", "m", "k", "delta"])]
    n: Option<u64>,
    #[arg(short = 'r')]
    r: Option<u64>,
    #[arg(long, requires_all = ["m", "k", "delta"])]
    q: Option<u32>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    k: Option<u32>,
    /// Relative distance as a fraction, e.g. 1/2.
    #[arg(long)]
    delta: Option<String>,
    #[command(flatten)]
    mode: ModeArgs,
    #[arg(short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BuildScheme {
    #[command(flatten)]
    target: Target,
    #[command(flatten)]
    mode: ModeArgs,
    #[arg(short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyCode {
    #[arg(short = 'i')]
    input: PathBuf,
    #[arg(long, default_value_t = crate::gvcode::DEFAULT_VERIFY_BUDGET)]
    budget: u64,
}

#[derive(Args, Debug)]
struct VerifySsf {
    #[arg(short = 'i')]
    input: PathBuf,
    /// Strength to check; defaults to the one recorded in the file.
    #[arg(short = 'r')]
    r: Option<u64>,
    /// Cap on elementary checks for the exhaustive verifier.
    #[arg(long, default_value_t = DEFAULT_SSF_BUDGET)]
    budget: u128,
    /// Check this many random sets instead of all of them.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct OutcomesCmd {
    #[arg(short = 'i')]
    input: PathBuf,
    /// Defective items, comma or space separated (may be empty).
    #[arg(short = 'd', allow_hyphen_values = true)]
    defectives: String,
    #[arg(short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Decode {
    /// Scheme file (GTS).
    #[arg(short = 'i')]
    input: PathBuf,
    /// Outcome file (GTO).
    #[arg(long)]
    outcomes: PathBuf,
    /// Largest defective set to accept; defaults to the scheme strength minus one.
    #[arg(short = 'r')]
    r: Option<u64>,
    #[arg(short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Simulate {
    #[arg(short = 'n')]
    n: u64,
    /// Number of defectives.
    #[arg(short = 'r')]
    r: u64,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[command(flatten)]
    mode: ModeArgs,
    #[arg(short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Bench {
    #[arg(long, default_value_t = 2)]
    q: u32,
    #[arg(long, default_value_t = 64)]
    m: u32,
    /// Smallest message length; three doublings of q^k follow when q = 2.
    #[arg(long, default_value_t = 12)]
    k: u32,
    #[arg(long, default_value_t = 3)]
    steps: u32,
    #[arg(long, default_value = "1/10")]
    delta: String,
    #[arg(long, default_value = "fast")]
    mode: Mode,
    /// Repetitions per size; the fastest is reported.
    #[arg(long, default_value_t = 3)]
    repeat: u32,
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code: 0 success, 1 failed verification, 2 bad usage or input.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.max(1))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(Outcome { report, ok }) => {
            emit(&cli, &report);
            if ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code for an error: 1 when a check ran and failed, 2 otherwise.
pub fn exit_code(e: &GtError) -> i32 {
    match e {
        GtError::Verification(_) | GtError::Inconsistent(_) | GtError::Unverifiable { .. } => 1,
        _ => 2,
    }
}

struct Outcome {
    report: Report,
    ok: bool,
}

struct Report {
    command: &'static str,
    /// `key=value` pairs for the text summary, in order.
    text: Vec<(String, String)>,
    json: Value,
}

impl Report {
    fn new(command: &'static str) -> Self {
        Report {
            command,
            text: Vec::new(),
            json: json!({}),
        }
    }

    fn field(mut self, key: &str, value: impl ToString + Serialize) -> Self {
        self.text.push((key.to_string(), value.to_string()));
        self.json[key] = serde_json::to_value(value).expect("serializable");
        self
    }

    fn json_only(mut self, key: &str, value: impl Serialize) -> Self {
        self.json[key] = serde_json::to_value(value).expect("serializable");
        self
    }
}

fn emit(cli: &Cli, report: &Report) {
    if cli.json {
        let mut v = report.json.clone();
        v["schema_version"] = json!(JSON_SCHEMA_VERSION);
        v["command"] = json!(report.command);
        println!("{}", serde_json::to_string_pretty(&v).expect("json"));
    } else {
        let line: Vec<String> = report.text.iter().map(|(k, v)| format!("{k}={v}")).collect();
        println!("{}", line.join(" "));
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Params(t) => params(t),
        Command::BuildCode(b) => build_code(b),
        Command::BuildScheme(b) => build_scheme(b),
        Command::VerifyCode(v) => verify_code(v),
        Command::VerifySsf(v) => verify_ssf_cmd(v),
        Command::Outcomes(o) => outcomes(o),
        Command::Decode(d) => decode(d),
        Command::Simulate(s) => simulate(s),
        Command::Bench(b) => bench(b),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| GtError::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Option<PathBuf>, text: &str) -> Result<()> {
    if let Some(path) = path {
        fs::write(path, text).map_err(|e| GtError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

// parse errors are reported with the file name in front of the line number
fn in_file<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        GtError::Parse { line, msg } => GtError::Parse {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        other => other,
    })
}

fn parse_delta(s: &str) -> Result<Rational> {
    let (a, b) = s
        .split_once('/')
        .ok_or_else(|| GtError::usage(format!("delta must be <num>/<den>, got {s:?}")))?;
    let a: u64 = a.trim().parse().map_err(|_| GtError::usage(format!("bad delta {s:?}")))?;
    let b: u64 = b.trim().parse().map_err(|_| GtError::usage(format!("bad delta {s:?}")))?;
    if b == 0 {
        return Err(GtError::usage("delta denominator is zero"));
    }
    Ok(Rational::new(a, b))
}

fn fraction(r: Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn ms(start: Instant) -> f64 {
    (start.elapsed().as_secs_f64() * 1e6).round() / 1e3
}

fn verification_fields(report: Report, v: &Verification, used: Mode) -> Report {
    let report = report.field("mode_used", used.to_string());
    match v {
        Verification::Verified { min_distance } => report
            .field("verification", "verified")
            .field("min_distance", *min_distance),
        Verification::Unverified { messages, budget } => report
            .field("verification", "unverified")
            .json_only("messages", messages)
            .json_only("budget", budget),
        Verification::Skipped => report.field("verification", "skipped"),
    }
}

fn params(t: &Target) -> Result<Outcome> {
    let p = derive_params(t.n, t.strength()?)?;
    let r = ParamsReport::from(&p);
    let mut report = Report::new("params");
    if let Some(c) = p.code {
        report = report
            .field("delta", fraction(c.delta))
            .field("q", c.q)
            .field("k", c.k)
            .field("m", c.m);
    }
    report = report
        .field("t_bound", p.t_bound())
        .field("trivial", p.trivial())
        .json_only("n", r.n)
        .json_only("r", r.r)
        .json_only("gv_rate_margin", r.gv_rate_margin);
    Ok(Outcome { report, ok: true })
}

fn build_code(b: &BuildCode) -> Result<Outcome> {
    let params = match (b.n, b.q) {
        (Some(n), None) => {
            let r = b.r.ok_or_else(|| GtError::usage("-n needs -r"))?;
            derive_params(n, r)?.code.ok_or_else(|| {
                GtError::usage(format!("(n={n}, r={r}) uses singleton tests; no code is needed"))
            })?
        }
        (None, Some(q)) => {
            let delta = parse_delta(b.delta.as_deref().unwrap_or_default())?;
            CodeParams::new(q, b.m.unwrap_or_default(), b.k.unwrap_or_default(), delta)?
        }
        _ => return Err(GtError::usage("give either -n and -r, or --q --m --k --delta")),
    };
    let start = Instant::now();
    let built = construct_code(&params, &b.mode.options())?;
    let wall = ms(start);
    write(&b.output, &format::write_code(&built.matrix))?;
    let report = Report::new("build-code")
        .field("q", params.q)
        .field("k", params.k)
        .field("m", params.m)
        .field("delta", fraction(params.delta))
        .field("target_distance", params.min_weight());
    let report = verification_fields(report, &built.verification, built.used)
        .field("wall_ms", wall);
    Ok(Outcome { report, ok: true })
}

fn construction_report(command: &'static str, c: &Construction) -> Report {
    let s = &c.scheme;
    let mut report = Report::new(command)
        .field("n", s.n())
        .field("r", s.strength())
        .field("t", s.num_tests())
        .field("trivial", c.params.trivial());
    if let Some(p) = c.params.code {
        report = report
            .field("q", p.q)
            .field("k", p.k)
            .field("m", p.m)
            .field("delta", fraction(p.delta));
    }
    report = report.field("total_incidence", s.total_size());
    if let Some(code) = &c.code {
        report = verification_fields(report, &code.verification, code.used);
    }
    report
}

fn build_scheme(b: &BuildScheme) -> Result<Outcome> {
    let opts = BuildOptions { code: b.mode.options() };
    let start = Instant::now();
    let c = scheme::build_scheme_with(b.target.n, b.target.strength()?, &opts)?;
    let wall = ms(start);
    write(&b.output, &format::write_scheme(&c.scheme))?;
    let report = construction_report("build-scheme", &c).field("wall_ms", wall);
    Ok(Outcome { report, ok: true })
}

fn verify_code(v: &VerifyCode) -> Result<Outcome> {
    let g = in_file(&v.input, format::read_code(&read(&v.input)?))?;
    let p = *g.params();
    let start = Instant::now();
    let d = verify_distance(&g, v.budget)?;
    let ok = d >= p.min_weight();
    let report = Report::new("verify-code")
        .field("q", p.q)
        .field("k", p.k)
        .field("m", p.m)
        .field("delta", fraction(p.delta))
        .field("target_distance", p.min_weight())
        .field("min_distance", d)
        .field("verdict", if ok { "pass" } else { "fail" })
        .field("wall_ms", ms(start));
    Ok(Outcome { report, ok })
}

fn verify_ssf_cmd(v: &VerifySsf) -> Result<Outcome> {
    let s = in_file(&v.input, format::read_scheme(&read(&v.input)?))?;
    let r = v.r.unwrap_or(s.strength());
    let start = Instant::now();
    let verdict = match v.trials {
        Some(trials) => verify_ssf_sampled(&s, r, trials, v.seed),
        None => verify_ssf(&s, r, v.budget),
    };
    let mut report = Report::new("verify-ssf")
        .field("n", s.n())
        .field("r", r)
        .field("t", s.num_tests())
        .field("sampled", v.trials.is_some());
    let ok = verdict.is_valid();
    report = match &verdict {
        SsfVerdict::Valid => report.field("verdict", "valid"),
        SsfVerdict::Violation { set, item } => report
            .field("verdict", "violation")
            .field("item", *item)
            .field("set", join(set, ",")),
        SsfVerdict::Unverified { required, budget } => report
            .field("verdict", "unverified")
            .json_only("required", required.to_string())
            .json_only("budget", budget.to_string()),
    };
    Ok(Outcome {
        report: report.field("wall_ms", ms(start)),
        ok,
    })
}

fn join(items: &[u64], sep: &str) -> String {
    items.iter().map(u64::to_string).collect::<Vec<_>>().join(sep)
}

fn parse_items(s: &str) -> Result<DefectiveSet> {
    let items = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<u64>()
                .map_err(|_| GtError::usage(format!("bad item {t:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DefectiveSet::new(items))
}

fn outcomes(o: &OutcomesCmd) -> Result<Outcome> {
    let s = in_file(&o.input, format::read_scheme(&read(&o.input)?))?;
    let d = parse_items(&o.defectives)?;
    let out = scheme::outcomes(&s, &d)?;
    write(&o.output, &format::write_outcomes(&out))?;
    let report = Report::new("outcomes")
        .field("t", out.len())
        .field("positives", out.positives())
        .json_only("defectives", d.items());
    Ok(Outcome { report, ok: true })
}

fn decode(d: &Decode) -> Result<Outcome> {
    let s = in_file(&d.input, format::read_scheme(&read(&d.input)?))?;
    let o = in_file(&d.outcomes, format::read_outcomes(&read(&d.outcomes)?))?;
    let r = d.r.unwrap_or(s.strength().saturating_sub(1));
    let found = scheme::decode(&s, &o, r)?;
    write(&d.output, &format!("{}\n", join(found.items(), " ")))?;
    let report = Report::new("decode")
        .field("count", found.len())
        .field("defectives", join(found.items(), ","));
    Ok(Outcome { report, ok: true })
}

fn simulate(s: &Simulate) -> Result<Outcome> {
    let opts = BuildOptions { code: s.mode.options() };
    let rep = scheme::simulate(s.n, s.r, s.trials, s.mode.seed, &opts)?;
    let ok = rep.passed();
    let mut text = format!(
        "n={} r={} t={} trials={} exhaustive={} recovered={} failures={}\n",
        rep.n, rep.r, rep.t, rep.trials, rep.exhaustive, rep.recovered, rep.failures
    );
    if let Some(w) = &rep.witness {
        text.push_str(&format!("witness={}\n", join(w, ",")));
    }
    write(&s.output, &text)?;
    let mut report = Report::new("simulate")
        .field("n", rep.n)
        .field("r", rep.r)
        .field("t", rep.t)
        .field("trivial", rep.trivial);
    if let (Some(q), Some(k), Some(m), Some(delta)) = (rep.q, rep.k, rep.m, rep.delta.clone()) {
        report = report.field("q", q).field("k", k).field("m", m).field("delta", delta);
    }
    report = report
        .field("trials", rep.trials)
        .field("exhaustive", rep.exhaustive)
        .field("recovered", rep.recovered)
        .field("failures", rep.failures)
        .json_only("witness", &rep.witness)
        .json_only("total_incidence", rep.total_incidence)
        .field("build_ms", (rep.build_ms * 1e3).round() / 1e3)
        .field("decode_ms", (rep.decode_ms * 1e3).round() / 1e3);
    Ok(Outcome { report, ok })
}

/// One row of the scaling benchmark.
#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub q: u32,
    pub k: u32,
    pub m: u32,
    pub messages: u64,
    pub ms: f64,
    /// Time relative to the previous row; `None` for the first.
    pub ratio: Option<f64>,
}

/// Times `construct_code` (unverified) at fixed `m` for `k, k+1, ...`,
/// keeping the fastest of `repeat` runs per size.
pub fn bench_construction(
    q: u32,
    m: u32,
    k0: u32,
    steps: u32,
    delta: Rational,
    mode: Mode,
    repeat: u32,
) -> Result<Vec<BenchRow>> {
    let mut rows: Vec<BenchRow> = Vec::new();
    for k in k0..=k0 + steps {
        let p = CodeParams::new(q, m, k, delta)?;
        let opts = ConstructOptions { mode, verify: false, ..Default::default() };
        let mut best = f64::INFINITY;
        for _ in 0..repeat.max(1) {
            let start = Instant::now();
            construct_code(&p, &opts)?;
            best = best.min(start.elapsed().as_secs_f64() * 1e3);
        }
        let ratio = rows.last().map(|prev| best / prev.ms);
        rows.push(BenchRow { q, k, m, messages: p.num_messages(), ms: best, ratio });
    }
    Ok(rows)
}

fn bench(b: &Bench) -> Result<Outcome> {
    let rows = bench_construction(b.q, b.m, b.k, b.steps, parse_delta(&b.delta)?, b.mode, b.repeat)?;
    let mut report = Report::new("bench")
        .field("q", b.q)
        .field("m", b.m)
        .field("mode", b.mode.to_string());
    for row in &rows {
        report = report.field(&format!("ms_k{}", row.k), (row.ms * 1e3).round() / 1e3);
    }
    let ratios: Vec<String> = rows
        .iter()
        .filter_map(|r| r.ratio)
        .map(|x| format!("{x:.2}"))
        .collect();
    report = report.field("ratios", ratios.join(",")).json_only("rows", &rows);
    Ok(Outcome { report, ok: true })
}
