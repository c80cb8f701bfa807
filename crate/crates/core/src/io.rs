//! Temporal edge lists (`.tel`), embedding files and JSON reports.
//!
//! A `.tel` row is `src dst t [weight]`, separated by whitespace or commas.
//! Lines starting with `#` are comments, except two directives written by
//! [`write_edge_list`] so that isolated nodes and trailing empty snapshots
//! survive a round trip:
//!
//! ```text
//! #! snapshots 3
//! #! node alice
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{DynamicEmbedding, DynamicNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Delimiter {
    /// Commas if the row has any, whitespace otherwise.
    #[default]
    Auto,
    Whitespace,
    Comma,
}

impl FromStr for Delimiter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Delimiter::Auto),
            "whitespace" | "space" => Ok(Delimiter::Whitespace),
            "comma" | "," => Ok(Delimiter::Comma),
            _ => Err(Error::InvalidArgument(format!("unknown delimiter '{s}'"))),
        }
    }
}

fn split_row(line: &str, delimiter: Delimiter) -> Vec<&str> {
    let comma = match delimiter {
        Delimiter::Auto => line.contains(','),
        Delimiter::Whitespace => false,
        Delimiter::Comma => true,
    };
    if comma {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

#[derive(Default)]
struct Interner {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl Interner {
    fn get(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        self.ids.push(id.to_string());
        self.index.insert(id.to_string(), self.ids.len() - 1);
        self.ids.len() - 1
    }
}

/// Parses a temporal edge list.
///
/// Node ids map to dense indices in first-seen order and become the labels
/// of the returned network. Repeated directed rows accumulate; each
/// undirected weight is then `max(w_ij, w_ji)`. Self-loops are dropped with
/// a warning.
pub fn parse_edge_list(reader: impl BufRead, delimiter: Delimiter) -> Result<DynamicNetwork> {
    let mut nodes = Interner::default();
    let mut declared_t = 0;
    let mut directed: Vec<HashMap<(usize, usize), f64>> = Vec::new();
    let mut rows = 0;
    for (k, line) in reader.lines().enumerate() {
        let line_no = k + 1;
        let line = line?;
        let line = line.trim();
        if let Some(directive) = line.strip_prefix("#!") {
            let mut parts = directive.split_whitespace();
            match (parts.next(), parts.next()) {
                (Some("snapshots"), Some(t)) => {
                    declared_t = t
                        .parse()
                        .map_err(|_| Error::Parse { line: line_no, message: format!("bad snapshot count '{t}'") })?;
                }
                (Some("node"), Some(id)) => {
                    nodes.get(id);
                }
                _ => return Err(Error::Parse { line: line_no, message: format!("unknown directive '{line}'") }),
            }
            continue;
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields = split_row(line, delimiter);
        if !(3..=4).contains(&fields.len()) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 'src dst t [weight]', found {} fields", fields.len()),
            });
        }
        let t: usize = fields[2]
            .parse()
            .map_err(|_| Error::Parse { line: line_no, message: format!("bad time index '{}'", fields[2]) })?;
        let w: f64 = match fields.get(3) {
            Some(s) => s
                .parse()
                .ok()
                .filter(|w: &f64| w.is_finite() && *w > 0.0)
                .ok_or_else(|| Error::Parse { line: line_no, message: format!("weight '{s}' is not positive") })?,
            None => 1.0,
        };
        rows += 1;
        let (i, j) = (nodes.get(fields[0]), nodes.get(fields[1]));
        if i == j {
            log::warn!("line {line_no}: self-loop on '{}' dropped", fields[0]);
            continue;
        }
        if directed.len() <= t {
            directed.resize_with(t + 1, HashMap::new);
        }
        *directed[t].entry((i, j)).or_insert(0.0) += w;
    }
    if rows == 0 && nodes.ids.is_empty() {
        return Err(Error::Parse { line: 0, message: "edge list is empty".into() });
    }
    let t = directed.len().max(declared_t).max(1);
    directed.resize_with(t, HashMap::new);
    let edges: Vec<Vec<(usize, usize, f64)>> = directed
        .iter()
        .map(|snap| {
            let mut undirected: BTreeMap<(usize, usize), f64> = BTreeMap::new();
            for (&(i, j), &w) in snap {
                let e = undirected.entry((i.min(j), i.max(j))).or_insert(0.0);
                *e = e.max(w);
            }
            undirected.into_iter().map(|((i, j), w)| (i, j, w)).collect()
        })
        .collect();
    DynamicNetwork::from_edges(nodes.ids.len(), &edges)?.with_labels(nodes.ids)
}

pub fn load_edge_list(path: impl AsRef<Path>, delimiter: Delimiter) -> Result<DynamicNetwork> {
    parse_edge_list(BufReader::new(fs::File::open(path)?), delimiter)
}

/// Writes every undirected edge once per snapshot, preceded by directives
/// that fix `T` and the node order.
pub fn write_edge_list(network: &DynamicNetwork, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "#! snapshots {}", network.t())?;
    for i in 0..network.n() {
        writeln!(out, "#! node {}", network.label(i))?;
    }
    for (t, a) in network.snapshots().iter().enumerate() {
        for (i, j, w) in a.triplets().filter(|&(i, j, _)| i < j) {
            writeln!(out, "{} {} {t} {w}", network.label(i), network.label(j))?;
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingFormat {
    #[default]
    Csv,
    Json,
}

impl EmbeddingFormat {
    /// `.json` selects JSON; anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => EmbeddingFormat::Json,
            _ => EmbeddingFormat::Csv,
        }
    }
}

impl FromStr for EmbeddingFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(EmbeddingFormat::Csv),
            "json" => Ok(EmbeddingFormat::Json),
            _ => Err(Error::InvalidArgument(format!("unknown embedding format '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Block {
    Anchor,
    Dynamic,
}

/// One embedding row; `time` is `None` exactly for anchor rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRecord {
    pub block: Block,
    pub time: Option<usize>,
    pub node: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct EmbeddingFile {
    n: usize,
    t: usize,
    d: usize,
    rows: Vec<EmbeddingRecord>,
}

pub fn embedding_records(emb: &DynamicEmbedding) -> Vec<EmbeddingRecord> {
    let (n, t) = (emb.n(), emb.t());
    let anchor = (0..emb.anchor().nrows())
        .map(|i| EmbeddingRecord { block: Block::Anchor, time: None, node: i, values: emb.anchor().row(i).iter().copied().collect() });
    let dynamic = (0..n * t).map(|r| EmbeddingRecord {
        block: Block::Dynamic,
        time: Some(r / n),
        node: r % n,
        values: emb.dynamic().row(r).iter().copied().collect(),
    });
    anchor.chain(dynamic).collect()
}

fn from_records(n: usize, t: usize, d: usize, rows: &[EmbeddingRecord]) -> Result<DynamicEmbedding> {
    let mut anchor: Option<DMatrix<f64>> = None;
    let mut dynamic = DMatrix::zeros(n * t, d);
    let mut seen = vec![false; n * t];
    for (k, rec) in rows.iter().enumerate() {
        let bad = |message: String| Error::Parse { line: k + 2, message };
        if rec.values.len() != d {
            return Err(bad(format!("expected {d} values, found {}", rec.values.len())));
        }
        if rec.node >= n {
            return Err(bad(format!("node {} outside 0..{n}", rec.node)));
        }
        match (rec.block, rec.time) {
            (Block::Anchor, None) => {
                let a = anchor.get_or_insert_with(|| DMatrix::zeros(n, d));
                a.row_mut(rec.node).copy_from_slice(&rec.values);
            }
            (Block::Dynamic, Some(s)) if s < t => {
                dynamic.row_mut(s * n + rec.node).copy_from_slice(&rec.values);
                seen[s * n + rec.node] = true;
            }
            _ => return Err(bad("block and time disagree".into())),
        }
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(Error::InvalidArgument(format!("no row for node {} at time {}", missing % n, missing / n)));
    }
    DynamicEmbedding::new(n, t, anchor, dynamic)
}

/// Shortest decimal that parses back to the same `f64`.
fn push_float(line: &mut String, x: f64) {
    write!(line, ",{x:e}").expect("writing to a String cannot fail");
}

pub fn write_embedding(emb: &DynamicEmbedding, path: impl AsRef<Path>, format: EmbeddingFormat) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    match format {
        EmbeddingFormat::Csv => {
            let dims: Vec<String> = (0..emb.d()).map(|k| format!("dim_{k}")).collect();
            writeln!(out, "# n={} t={} d={}", emb.n(), emb.t(), emb.d())?;
            writeln!(out, "block,time,node,{}", dims.join(","))?;
            for rec in embedding_records(emb) {
                let mut line = match rec.time {
                    None => format!("anchor,,{}", rec.node),
                    Some(t) => format!("dynamic,{t},{}", rec.node),
                };
                rec.values.iter().for_each(|&x| push_float(&mut line, x));
                writeln!(out, "{line}")?;
            }
        }
        EmbeddingFormat::Json => {
            let file = EmbeddingFile { n: emb.n(), t: emb.t(), d: emb.d(), rows: embedding_records(emb) };
            serde_json::to_writer(&mut out, &file)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn parse_csv_embedding(text: &str) -> Result<DynamicEmbedding> {
    let mut lines = text.lines().enumerate();
    let (_, meta) = lines.next().ok_or(Error::Parse { line: 1, message: "file is empty".into() })?;
    let field = |key: &str| -> Result<usize> {
        meta.split_whitespace()
            .find_map(|kv| kv.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Parse { line: 1, message: format!("missing '{key}=' in '# n=.. t=.. d=..' line") })
    };
    let (n, t, d) = (field("n")?, field("t")?, field("d")?);
    lines.next();
    let mut rows = Vec::new();
    for (k, line) in lines {
        let bad = |message: String| Error::Parse { line: k + 1, message };
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != d + 3 {
            return Err(bad(format!("expected {} columns, found {}", d + 3, cells.len())));
        }
        let block = match cells[0] {
            "anchor" => Block::Anchor,
            "dynamic" => Block::Dynamic,
            other => return Err(bad(format!("unknown block '{other}'"))),
        };
        let time = match cells[1] {
            "" => None,
            s => Some(s.parse().map_err(|_| bad(format!("bad time '{s}'")))?),
        };
        let node = cells[2].parse().map_err(|_| bad(format!("bad node '{}'", cells[2])))?;
        let values = cells[3..]
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| bad(format!("bad value '{s}'"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(EmbeddingRecord { block, time, node, values });
    }
    from_records(n, t, d, &rows)
}

pub fn read_embedding(path: impl AsRef<Path>) -> Result<DynamicEmbedding> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    match EmbeddingFormat::from_path(path) {
        EmbeddingFormat::Csv => parse_csv_embedding(&text),
        EmbeddingFormat::Json => {
            let file: EmbeddingFile = serde_json::from_str(&text)?;
            from_records(file.n, file.t, file.d, &file.rows)
        }
    }
}

/// Pretty-printed JSON of any serializable value (reports, specs).
pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(fs::File::open(path)?))?)
}

/// Node selection: `all`, or a comma list of indices and inclusive ranges `a..b`.
pub fn parse_nodes(spec: &str, n: usize) -> Result<Vec<usize>> {
    let spec = spec.trim();
    if spec == "all" {
        return Ok((0..n).collect());
    }
    let bad = || Error::InvalidArgument(format!("bad node list '{spec}'"));
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim) {
        match part.split_once("..") {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if let Some(&i) = out.iter().find(|&&i| i >= n) {
        return Err(Error::OutOfRange { index: i, limit: n });
    }
    Ok(out)
}

/// `time,label` rows.
pub fn write_labels(labels: &[usize], path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "time,label")?;
    for (t, l) in labels.iter().enumerate() {
        writeln!(out, "{t},{l}")?;
    }
    out.flush()?;
    Ok(())
}
