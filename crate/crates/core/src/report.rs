//! CSV writers. Every file starts with one `#` metadata line followed by a
//! header row.

use std::io::{self, Write};

use sha2::{Digest, Sha256};

use crate::approx::ApproxPoint;
use crate::guesswork::{BoundCheck, RankTable, SetReport};
use crate::rate::RateCurve;
use crate::source::{Alphabet, CategoricalSource};

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hex SHA-256 of the source description bytes.
pub fn source_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Metadata {
    pub source_sha256: String,
    pub source_kind: String,
    pub n: Option<usize>,
    /// Initial distribution of chain sources.
    pub initial: Option<String>,
    /// Further `key=value` pairs, written in order.
    pub extra: Vec<(String, String)>,
}

impl Metadata {
    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.extra.push((key.to_string(), value.to_string()));
        self
    }

    pub fn line(&self) -> String {
        let mut parts = vec![
            format!("tool={TOOL}"),
            format!("version={VERSION}"),
            format!("source_sha256={}", self.source_sha256),
            format!("source_kind={}", self.source_kind),
        ];
        if let Some(n) = self.n {
            parts.push(format!("n={n}"));
        }
        if let Some(init) = &self.initial {
            parts.push(format!("initial={init}"));
        }
        parts.extend(self.extra.iter().map(|(k, v)| format!("{k}={v}")));
        format!("# {}", parts.join(" "))
    }
}

/// Shortest round-trip decimal, switching to exponent form for very small or
/// very large magnitudes.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn csv_io(e: csv::Error) -> io::Error {
    if e.is_io_error() {
        if let csv::ErrorKind::Io(inner) = e.into_kind() {
            return inner;
        }
        unreachable!()
    }
    io::Error::other(e)
}

fn start<W: Write>(mut out: W, meta: &Metadata, header: &[&str]) -> io::Result<csv::Writer<W>> {
    writeln!(out, "{}", meta.line())?;
    let mut w = csv::WriterBuilder::new().from_writer(out);
    w.write_record(header).map_err(csv_io)?;
    Ok(w)
}

fn row<W: Write>(w: &mut csv::Writer<W>, fields: &[String]) -> io::Result<()> {
    w.write_record(fields).map_err(csv_io)
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> io::Result<()> {
    w.flush()
}

/// `string, logprob_nats, G, R` in rank order.
pub fn write_rank_table<W: Write>(out: W, meta: &Metadata, table: &RankTable) -> io::Result<()> {
    let mut w = start(out, meta, &["string", "logprob_nats", "G", "R"])?;
    for r in table.records() {
        row(
            &mut w,
            &[
                table.render(r.code),
                fmt_f64(r.log_prob),
                r.guesswork.to_string(),
                r.reverse_guesswork.to_string(),
            ],
        )?;
    }
    finish(w)
}

/// `G, probability`: the guesswork PMF staircase.
pub fn write_pmf<W: Write>(out: W, meta: &Metadata, table: &RankTable) -> io::Result<()> {
    let mut w = start(out, meta, &["G", "probability"])?;
    for (k, p) in table.guesswork_pmf() {
        row(&mut w, &[k.to_string(), fmt_f64(p)])?;
    }
    finish(w)
}

/// `set_name, member` for the sets A, B, D and E.
pub fn write_sets<W: Write>(out: W, meta: &Metadata, table: &RankTable, report: &SetReport) -> io::Result<()> {
    let mut w = start(out, meta, &["set_name", "member"])?;
    for (name, set) in [("A", &report.a), ("B", &report.b), ("D", &report.d), ("E", &report.e)] {
        for &code in &set.members {
            row(&mut w, &[name.to_string(), table.render(code)])?;
        }
    }
    finish(w)
}

/// `bound_id, lhs, rhs, pass`, where `pass` is `pass`, `vacuous_pass` or `fail`.
pub fn write_bounds<W: Write>(out: W, meta: &Metadata, bounds: &[BoundCheck]) -> io::Result<()> {
    let mut w = start(out, meta, &["bound_id", "lhs", "rhs", "pass"])?;
    for b in bounds {
        row(
            &mut w,
            &[b.id.to_string(), fmt_f64(b.lhs), fmt_f64(b.rhs), b.status.as_str().to_string()],
        )?;
    }
    finish(w)
}

pub fn write_rate_curve<W: Write>(out: W, meta: &Metadata, curve: &RateCurve) -> io::Result<()> {
    let mut w = start(out, meta, &["kind", "alpha", "t_nats", "J_nats", "dJdt", "d2Jdt2"])?;
    for s in &curve.samples {
        row(
            &mut w,
            &[
                curve.kind.as_str().to_string(),
                fmt_f64(s.alpha),
                fmt_f64(s.t),
                fmt_f64(s.j),
                fmt_f64(s.djdt),
                fmt_f64(s.d2jdt2),
            ],
        )?;
    }
    finish(w)
}

pub fn write_approx_curve<W: Write>(out: W, meta: &Metadata, points: &[ApproxPoint]) -> io::Result<()> {
    let mut w = start(out, meta, &["branch", "alpha", "level_nats", "approx_rank", "probability"])?;
    for p in points {
        row(
            &mut w,
            &[
                p.branch.as_str().to_string(),
                fmt_f64(p.alpha),
                fmt_f64(p.level),
                fmt_f64(p.approx_rank),
                fmt_f64(p.probability),
            ],
        )?;
    }
    finish(w)
}

/// `series, rank, probability` with the exact staircase (`exact`) followed by
/// the two approximation branches, for plotting on shared axes.
pub fn write_overlay<W: Write>(out: W, meta: &Metadata, table: &RankTable, points: &[ApproxPoint]) -> io::Result<()> {
    let mut w = start(out, meta, &["series", "rank", "probability"])?;
    for (k, p) in table.guesswork_pmf() {
        row(&mut w, &["exact".to_string(), k.to_string(), fmt_f64(p)])?;
    }
    for p in points {
        row(
            &mut w,
            &[p.branch.as_str().to_string(), fmt_f64(p.approx_rank), fmt_f64(p.probability)],
        )?;
    }
    finish(w)
}

/// `alpha, p_<symbol>...`: points of the tilted family on the simplex.
pub fn write_tilt_family<W: Write>(
    out: W,
    meta: &Metadata,
    alphabet: &Alphabet,
    family: &[(f64, CategoricalSource)],
) -> io::Result<()> {
    let header: Vec<String> = std::iter::once("alpha".to_string())
        .chain(alphabet.symbols().iter().map(|s| format!("p_{s}")))
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut w = start(out, meta, &header)?;
    for (alpha, t) in family {
        let fields: Vec<String> = std::iter::once(fmt_f64(*alpha))
            .chain(t.probs().iter().map(|p| fmt_f64(*p)))
            .collect();
        row(&mut w, &fields)?;
    }
    finish(w)
}
