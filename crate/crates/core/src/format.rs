//! Line-oriented text formats: `GVC v1` codes, `GTS v1` schemes and
//! `GTO v1` outcome vectors. Writers emit the canonical form (no trailing
//! whitespace, newline-terminated); readers report 1-based line numbers.

use std::fmt::Write as _;

use crate::error::{GtError, Result};
use crate::gvcode::GeneratorMatrix;
use crate::params::{CodeParams, Rational};
use crate::scheme::OutcomeVector;
use crate::ssf::Scheme;

pub const CODE_MAGIC: &str = "GVC v1";
pub const SCHEME_MAGIC: &str = "GTS v1";
pub const OUTCOME_MAGIC: &str = "GTO v1";

pub fn write_code(g: &GeneratorMatrix) -> String {
    let p = g.params();
    let mut out = format!("{CODE_MAGIC}\n{p}\n");
    for i in 0..g.rows() {
        let row: Vec<String> = g.row(i).iter().map(u32::to_string).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_scheme(s: &Scheme) -> String {
    let mut out = format!(
        "{SCHEME_MAGIC}\nn={} r={} t={}\n",
        s.n(),
        s.strength(),
        s.num_tests()
    );
    for t in s.tests() {
        let mut first = true;
        for x in t {
            if !first {
                out.push(' ');
            }
            first = false;
            write!(out, "{x}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_outcomes(o: &OutcomeVector) -> String {
    let bits: String = o.bits().iter().map(|&b| if b { '1' } else { '0' }).collect();
    format!("{OUTCOME_MAGIC}\nt={}\n{bits}\n", o.len())
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    total: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines { inner: text.lines().enumerate(), total: text.lines().count() }
    }

    fn next_line(&mut self, what: &str) -> Result<(usize, &'a str)> {
        match self.inner.next() {
            Some((i, l)) => Ok((i + 1, l)),
            None => Err(GtError::parse(
                self.total + 1,
                format!("unexpected end of input, expected {what}"),
            )),
        }
    }

    fn finish(mut self) -> Result<()> {
        match self.inner.next() {
            None => Ok(()),
            Some((i, _)) => Err(GtError::parse(i + 1, "unexpected trailing content")),
        }
    }
}

fn expect_magic(lines: &mut Lines<'_>, magic: &str) -> Result<()> {
    let (no, line) = lines.next_line("header")?;
    if line != magic {
        return Err(GtError::parse(no, format!("expected header {magic:?}, found {line:?}")));
    }
    Ok(())
}

// parses "a=1 b=2 ..." with exactly the given keys in order
fn key_values<'a>(no: usize, line: &'a str, keys: &[&str]) -> Result<Vec<&'a str>> {
    let fields: Vec<&str> = line.split(' ').collect();
    if fields.len() != keys.len() {
        return Err(GtError::parse(
            no,
            format!("expected {} fields ({}), found {:?}", keys.len(), keys.join(" "), line),
        ));
    }
    fields
        .iter()
        .zip(keys)
        .map(|(field, key)| {
            field
                .strip_prefix(key)
                .and_then(|rest| rest.strip_prefix('='))
                .ok_or_else(|| GtError::parse(no, format!("expected {key}=<value>, found {field:?}")))
        })
        .collect()
}

fn number<T: std::str::FromStr>(no: usize, s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| GtError::parse(no, format!("invalid {what} {s:?}")))
}

fn rational(no: usize, s: &str) -> Result<Rational> {
    let (a, b) = s
        .split_once('/')
        .ok_or_else(|| GtError::parse(no, format!("delta must be <num>/<den>, found {s:?}")))?;
    let (a, b): (u64, u64) = (number(no, a, "numerator")?, number(no, b, "denominator")?);
    if b == 0 {
        return Err(GtError::parse(no, "zero denominator"));
    }
    Ok(Rational::new(a, b))
}

fn with_line<T>(no: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        GtError::Parse { .. } => e,
        other => GtError::parse(no, other.to_string()),
    })
}

pub fn read_code(text: &str) -> Result<GeneratorMatrix> {
    let mut lines = Lines::new(text);
    expect_magic(&mut lines, CODE_MAGIC)?;
    let (no, line) = lines.next_line("parameter line")?;
    let v = key_values(no, line, &["q", "m", "k", "delta"])?;
    let q: u32 = number(no, v[0], "q")?;
    let m: u32 = number(no, v[1], "m")?;
    let k: u32 = number(no, v[2], "k")?;
    let delta = rational(no, v[3])?;
    let params = with_line(no, CodeParams::new(q, m, k, delta))?;
    let mut entries = Vec::with_capacity(m as usize * k as usize);
    for _ in 0..m {
        let (no, line) = lines.next_line("matrix row")?;
        let row: Vec<&str> = line.split(' ').collect();
        if row.len() != k as usize {
            return Err(GtError::parse(no, format!("expected {k} entries, found {}", row.len())));
        }
        for d in row {
            let x: u32 = number(no, d, "entry")?;
            if x >= q {
                return Err(GtError::parse(no, format!("entry {x} not in [0, {q})")));
            }
            entries.push(x);
        }
    }
    lines.finish()?;
    GeneratorMatrix::new(params, entries)
}

pub fn read_scheme(text: &str) -> Result<Scheme> {
    let mut lines = Lines::new(text);
    expect_magic(&mut lines, SCHEME_MAGIC)?;
    let (no, line) = lines.next_line("parameter line")?;
    let v = key_values(no, line, &["n", "r", "t"])?;
    let n: u64 = number(no, v[0], "n")?;
    let r: u64 = number(no, v[1], "r")?;
    let t: usize = number(no, v[2], "t")?;
    let mut tests = Vec::with_capacity(t);
    for _ in 0..t {
        let (no, line) = lines.next_line("test line")?;
        let items = if line.is_empty() {
            Vec::new()
        } else {
            line.split(' ')
                .map(|x| number::<u64>(no, x, "item"))
                .collect::<Result<Vec<_>>>()?
        };
        if items.windows(2).any(|w| w[0] >= w[1]) {
            return Err(GtError::parse(no, "items must be strictly increasing"));
        }
        if let Some(&bad) = items.iter().find(|&&x| x == 0 || x > n) {
            return Err(GtError::parse(no, format!("item {bad} outside [1, {n}]")));
        }
        tests.push(items);
    }
    lines.finish()?;
    Scheme::new(n, r, tests)
}

pub fn read_outcomes(text: &str) -> Result<OutcomeVector> {
    let mut lines = Lines::new(text);
    expect_magic(&mut lines, OUTCOME_MAGIC)?;
    let (no, line) = lines.next_line("parameter line")?;
    let v = key_values(no, line, &["t"])?;
    let t: usize = number(no, v[0], "t")?;
    let (no, line) = lines.next_line("outcome bits")?;
    if line.len() != t {
        return Err(GtError::parse(no, format!("expected {t} outcome bits, found {}", line.len())));
    }
    let bits = line
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(GtError::parse(no, format!("outcome bit must be 0 or 1, found {other:?}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    lines.finish()?;
    Ok(OutcomeVector::new(bits))
}
