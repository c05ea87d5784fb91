//! Artifact formats: CSV tables with a provenance comment line, and a small
//! little-endian binary format for fields and measures.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use lqg_core::field::{Field, FieldTag};
use lqg_core::measure::{QuantumMeasure, Regularization};
use lqg_core::{DomainKind, DomainSpec};

use crate::config::RunConfig;

/// `(version, config hash, seed)` carried by every artifact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    pub fn of(cfg: &RunConfig) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash: cfg.hash(),
            seed: cfg.seed,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "lqg {} config={} seed={}",
            self.version, self.config_hash, self.seed
        )
    }

    pub fn parse(line: &str) -> Option<Self> {
        let mut it = line.trim_start_matches('#').split_whitespace();
        if it.next()? != "lqg" {
            return None;
        }
        let version = it.next()?.to_string();
        let config_hash = it.next()?.strip_prefix("config=")?.to_string();
        let seed = it.next()?.strip_prefix("seed=")?.parse().ok()?;
        Some(Self {
            version,
            config_hash,
            seed,
        })
    }
}

/// A CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(i64),
    Real(f64),
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(if b { "true" } else { "false" }.into())
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Text(s) => quote(s),
            Cell::Int(i) => i.to_string(),
            // shortest representation that round-trips
            Cell::Real(x) => format!("{x:?}"),
        }
    }
}

/// A table with named columns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    /// RFC 4180 body (header row plus records, CRLF line ends).
    pub fn body(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = self.columns.iter().map(|c| quote(c)).collect();
        out.push_str(&header.join(","));
        out.push_str("\r\n");
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push_str("\r\n");
        }
        out
    }

    pub fn to_csv(&self, prov: &Provenance) -> String {
        format!("# {}\r\n{}", prov.line(), self.body())
    }

    pub fn write(&self, path: &Path, prov: &Provenance) -> Result<()> {
        fs::write(path, self.to_csv(prov)).with_context(|| format!("writing {}", path.display()))
    }
}

/// Splits a CSV written by [`Table::to_csv`] into provenance and records.
/// Handles quoted fields.
pub fn read_csv(text: &str) -> Result<(Option<Provenance>, Vec<Vec<String>>)> {
    let mut prov = None;
    let mut body = text;
    if let Some(rest) = text.strip_prefix('#') {
        let end = rest.find('\n').unwrap_or(rest.len());
        prov = Provenance::parse(rest[..end].trim_end_matches('\r'));
        body = &rest[(end + 1).min(rest.len())..];
    }
    let mut records = Vec::new();
    let mut row = Vec::new();
    let mut cell = String::new();
    let mut quoted = false;
    let mut chars = body.chars().peekable();
    while let Some(c) = chars.next() {
        match (quoted, c) {
            (true, '"') if chars.peek() == Some(&'"') => {
                chars.next();
                cell.push('"');
            }
            (true, '"') => quoted = false,
            (true, c) => cell.push(c),
            (false, '"') => quoted = true,
            (false, ',') => row.push(std::mem::take(&mut cell)),
            (false, '\r') => {}
            (false, '\n') => {
                row.push(std::mem::take(&mut cell));
                records.push(std::mem::take(&mut row));
            }
            (false, c) => cell.push(c),
        }
    }
    ensure!(!quoted, "unterminated quoted field");
    if !cell.is_empty() || !row.is_empty() {
        row.push(cell);
        records.push(row);
    }
    Ok((prov, records))
}

const FIELD_MAGIC: &[u8; 4] = b"LQGF";
const MEASURE_MAGIC: &[u8; 4] = b"LQGM";
const FORMAT_VERSION: u8 = 1;

fn put_header(out: &mut Vec<u8>, magic: &[u8; 4], spec: &DomainSpec) {
    out.extend_from_slice(magic);
    out.push(FORMAT_VERSION);
    out.push(spec.kind().code());
    out.extend_from_slice(&(spec.n() as u32).to_le_bytes());
    out.extend_from_slice(&spec.side().to_le_bytes());
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        ensure!(self.buf.len() >= n, "truncated file");
        let (a, b) = self.buf.split_at(n);
        self.buf = b;
        Ok(a)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into()?))
    }

    fn values(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }

    fn header(&mut self, magic: &[u8; 4]) -> Result<DomainSpec> {
        ensure!(self.take(4)? == magic, "bad magic");
        let v = self.u8()?;
        ensure!(v == FORMAT_VERSION, "unsupported format version {v}");
        let code = self.u8()?;
        let kind =
            DomainKind::from_code(code).with_context(|| format!("unknown domain code {code}"))?;
        let n = self.u32()? as usize;
        let side = self.f64()?;
        Ok(DomainSpec::new(kind, n, side)?)
    }
}

fn tag_arg(tag: FieldTag) -> u64 {
    match tag {
        FieldTag::Lowpass(n) => n as u64,
        _ => 0,
    }
}

/// Layout: magic `LQGF`, version, domain code, `n: u32`, `side: f64`,
/// `seed: u64`, tag code, tag argument `u64`, then the vertex values
/// as `f64`, all little-endian.
pub fn encode_field(field: &Field) -> Vec<u8> {
    let spec = field.spec();
    let mut out = Vec::with_capacity(40 + 8 * spec.len());
    put_header(&mut out, FIELD_MAGIC, spec);
    out.extend_from_slice(&field.seed().to_le_bytes());
    out.push(field.tag().code());
    out.extend_from_slice(&tag_arg(field.tag()).to_le_bytes());
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_field(bytes: &[u8]) -> Result<Field> {
    let mut r = Reader { buf: bytes };
    let spec = r.header(FIELD_MAGIC)?;
    let seed = r.u64()?;
    let tag = match (r.u8()?, r.u64()?) {
        (0, _) => FieldTag::Centered,
        (1, _) => FieldTag::Shifted,
        (2, n) => FieldTag::Lowpass(n as usize),
        (c, _) => bail!("unknown field tag {c}"),
    };
    let values = r.values(spec.len())?;
    ensure!(r.buf.is_empty(), "trailing bytes");
    Ok(Field::from_values(spec, values, seed, tag)?)
}

fn reg_arg(reg: Regularization) -> f64 {
    match reg {
        Regularization::Circle(eps) => eps,
        Regularization::Projected(n) => n as f64,
        _ => 0.0,
    }
}

/// Layout: magic `LQGM`, the domain header, `gamma: f64`, regularization
/// code and argument (`f64`), then one `f64` mass per vertex.
pub fn encode_measure(m: &QuantumMeasure) -> Vec<u8> {
    let spec = m.spec();
    let mut out = Vec::with_capacity(40 + 8 * spec.len());
    put_header(&mut out, MEASURE_MAGIC, spec);
    out.extend_from_slice(&m.gamma().to_le_bytes());
    out.push(m.regularization().code());
    out.extend_from_slice(&reg_arg(m.regularization()).to_le_bytes());
    for v in m.masses() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_measure(bytes: &[u8]) -> Result<QuantumMeasure> {
    let mut r = Reader { buf: bytes };
    let spec = r.header(MEASURE_MAGIC)?;
    let gamma = r.f64()?;
    let reg = match (r.u8()?, r.f64()?) {
        (0, eps) => Regularization::Circle(eps),
        (1, _) => Regularization::Discrete,
        (2, n) => Regularization::Projected(n as usize),
        (3, _) => Regularization::Given,
        (c, _) => bail!("unknown regularization {c}"),
    };
    let masses = r.values(spec.len())?;
    ensure!(r.buf.is_empty(), "trailing bytes");
    Ok(QuantumMeasure::from_masses(&spec, gamma, reg, masses)?)
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    f.write_all(bytes)?;
    Ok(())
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    fs::File::open(path)
        .with_context(|| format!("opening {}", path.display()))?
        .read_to_end(&mut buf)?;
    Ok(buf)
}

/// Human-readable summary of a float list, used in reports.
pub fn join_floats(xs: &[f64]) -> String {
    let mut s = String::new();
    for (k, x) in xs.iter().enumerate() {
        if k > 0 {
            s.push(';');
        }
        let _ = write!(s, "{x}");
    }
    s
}
