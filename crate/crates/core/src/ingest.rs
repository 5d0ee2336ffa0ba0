//! SNAP edge lists: parsing, id remapping, stream orders and a binary cache.
//!
//! Vertex ids are remapped densely in order of first appearance, so a stream
//! read in file order sees new vertices in the same order as the raw file.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::{DirectedEdge, DirectedEdgeList, VertexId};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: cannot parse {content:?}")]
    Malformed { line: usize, content: String },
    #[error("line {line}: expected {expected} columns, found {found}")]
    MixedColumns {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("time order needs a third (timestamp) column")]
    MissingTimestamps,
    #[error("too many distinct vertices for 32-bit ids")]
    TooManyVertices,
    #[error("bad cache file {path}: {reason}")]
    BadCache { path: PathBuf, reason: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> IngestError + '_ {
    move |source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ParseOptions {
    pub dedupe: bool,
    pub drop_self_loops: bool,
}

/// Counts gathered while reading. Duplicates and self-loops are counted
/// whether or not they are kept.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct IngestStats {
    pub n: usize,
    pub m: usize,
    pub lines: usize,
    pub duplicates: usize,
    pub self_loops: usize,
}

/// A parsed file: the edges under dense ids plus the id table back to the
/// file's labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedGraph {
    pub edges: DirectedEdgeList,
    pub original_ids: Vec<u64>,
    pub stats: IngestStats,
}

/// Pull-based reader yielding remapped edges one line at a time.
pub struct SnapEdgeReader<R> {
    input: R,
    options: ParseOptions,
    buf: String,
    line: usize,
    columns: Option<usize>,
    ids: HashMap<u64, VertexId>,
    original: Vec<u64>,
    seen: HashSet<(VertexId, VertexId)>,
    stats: IngestStats,
}

impl SnapEdgeReader<BufReader<File>> {
    pub fn open(path: &Path, options: ParseOptions) -> Result<Self, IngestError> {
        let f = File::open(path).map_err(io_err(path))?;
        Ok(Self::new(BufReader::new(f), options))
    }
}

impl<R: BufRead> SnapEdgeReader<R> {
    pub fn new(input: R, options: ParseOptions) -> Self {
        Self {
            input,
            options,
            buf: String::new(),
            line: 0,
            columns: None,
            ids: HashMap::new(),
            original: Vec::new(),
            seen: HashSet::new(),
            stats: IngestStats::default(),
        }
    }

    /// Vertices seen so far.
    pub fn n_seen(&self) -> usize {
        self.original.len()
    }

    pub fn stats(&self) -> IngestStats {
        self.stats
    }

    pub fn into_parts(self) -> (Vec<u64>, IngestStats) {
        (self.original, self.stats)
    }

    fn remap(&mut self, label: u64) -> Result<VertexId, IngestError> {
        if let Some(&id) = self.ids.get(&label) {
            return Ok(id);
        }
        let id = VertexId::try_from(self.original.len()).map_err(|_| IngestError::TooManyVertices)?;
        self.ids.insert(label, id);
        self.original.push(label);
        self.stats.n = self.original.len();
        Ok(id)
    }

    fn parse_line(&mut self) -> Result<Option<(u64, u64, Option<u64>)>, IngestError> {
        let text = self.buf.trim();
        if text.is_empty() || text.starts_with('#') {
            return Ok(None);
        }
        let malformed = || IngestError::Malformed {
            line: self.line,
            content: text.to_string(),
        };
        let fields: Vec<u64> = text
            .split_whitespace()
            .map(u64::from_str)
            .collect::<Result<_, _>>()
            .map_err(|_| malformed())?;
        if !(2..=3).contains(&fields.len()) {
            return Err(malformed());
        }
        match self.columns {
            None => self.columns = Some(fields.len()),
            Some(c) if c != fields.len() => {
                return Err(IngestError::MixedColumns {
                    line: self.line,
                    expected: c,
                    found: fields.len(),
                })
            }
            Some(_) => {}
        }
        Ok(Some((fields[0], fields[1], fields.get(2).copied())))
    }
}

impl<R: BufRead> Iterator for SnapEdgeReader<R> {
    type Item = Result<DirectedEdge, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.input.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => {
                    return Some(Err(IngestError::Io {
                        path: PathBuf::from("<input>"),
                        source: e,
                    }))
                }
            }
            self.line += 1;
            self.stats.lines = self.line;
            let (a, b, ts) = match self.parse_line() {
                Ok(Some(x)) => x,
                Ok(None) => continue,
                Err(e) => return Some(Err(e)),
            };
            let ids = self.remap(a).and_then(|u| Ok((u, self.remap(b)?)));
            let (u, v) = match ids {
                Ok(x) => x,
                Err(e) => return Some(Err(e)),
            };
            if u == v {
                self.stats.self_loops += 1;
                if self.options.drop_self_loops {
                    continue;
                }
            }
            if !self.seen.insert((u, v)) {
                self.stats.duplicates += 1;
                if self.options.dedupe {
                    continue;
                }
            }
            self.stats.m += 1;
            return Some(Ok(DirectedEdge {
                source: u,
                target: v,
                timestamp: ts,
            }));
        }
    }
}

pub fn parse_snap_reader<R: BufRead>(input: R, options: ParseOptions) -> Result<ParsedGraph, IngestError> {
    let mut reader = SnapEdgeReader::new(input, options);
    let edges = reader.by_ref().collect::<Result<Vec<_>, _>>()?;
    let (original_ids, stats) = reader.into_parts();
    Ok(ParsedGraph {
        edges: DirectedEdgeList {
            edges,
            n_vertices: original_ids.len(),
        },
        original_ids,
        stats,
    })
}

pub fn parse_snap(path: &Path, options: ParseOptions) -> Result<ParsedGraph, IngestError> {
    let f = File::open(path).map_err(io_err(path))?;
    parse_snap_reader(BufReader::new(f), options)
}

/// Writes `u v` or `u v ts` lines using the dense ids.
pub fn write_snap<W: Write>(el: &DirectedEdgeList, mut out: W) -> io::Result<()> {
    for e in &el.edges {
        match e.timestamp {
            Some(ts) => writeln!(out, "{} {} {}", e.source, e.target, ts)?,
            None => writeln!(out, "{} {}", e.source, e.target)?,
        }
    }
    out.flush()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StreamOrder {
    File,
    Shuffled(u64),
    Time,
}

impl FromStr for StreamOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "file" => Ok(Self::File),
            "time" => Ok(Self::Time),
            _ => s
                .strip_prefix("shuffle:")
                .and_then(|seed| seed.parse().ok())
                .map(Self::Shuffled)
                .ok_or_else(|| format!("unknown order {s:?}; use file, shuffle:SEED or time")),
        }
    }
}

impl std::fmt::Display for StreamOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::File => write!(f, "file"),
            Self::Shuffled(seed) => write!(f, "shuffle:{seed}"),
            Self::Time => write!(f, "time"),
        }
    }
}

pub fn order_stream(mut el: DirectedEdgeList, order: StreamOrder) -> Result<DirectedEdgeList, IngestError> {
    match order {
        StreamOrder::File => {}
        StreamOrder::Shuffled(seed) => el.edges.shuffle(&mut ChaCha8Rng::seed_from_u64(seed)),
        StreamOrder::Time => {
            if !el.edges.is_empty() && !el.has_timestamps() {
                return Err(IngestError::MissingTimestamps);
            }
            el.edges.sort_by_key(|e| e.timestamp);
        }
    }
    Ok(el)
}

const CACHE_MAGIC: &[u8; 5] = b"DGEL1";

/// Binary form: magic, `u32` n, `u64` m, then `m` records of `u32 u32 u64`
/// (little endian). A timestamp of 0 is read back as absent when every
/// record has 0.
pub fn write_cache<W: Write>(el: &DirectedEdgeList, out: W) -> io::Result<()> {
    let mut out = BufWriter::new(out);
    out.write_all(CACHE_MAGIC)?;
    out.write_all(&(el.n_vertices as u32).to_le_bytes())?;
    out.write_all(&(el.edges.len() as u64).to_le_bytes())?;
    for e in &el.edges {
        out.write_all(&e.source.to_le_bytes())?;
        out.write_all(&e.target.to_le_bytes())?;
        out.write_all(&e.timestamp.unwrap_or(0).to_le_bytes())?;
    }
    out.flush()
}

pub fn read_cache<R: Read>(input: R, path: &Path) -> Result<DirectedEdgeList, IngestError> {
    let bad = |reason: &str| IngestError::BadCache {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    let mut input = BufReader::new(input);
    let mut head = [0u8; 17];
    input.read_exact(&mut head).map_err(|_| bad("truncated header"))?;
    if &head[..5] != CACHE_MAGIC {
        return Err(bad("wrong magic"));
    }
    let n = u32::from_le_bytes(head[5..9].try_into().unwrap()) as usize;
    let m = u64::from_le_bytes(head[9..17].try_into().unwrap()) as usize;
    let mut edges = Vec::with_capacity(m);
    let mut rec = [0u8; 16];
    let mut any_ts = false;
    for _ in 0..m {
        input.read_exact(&mut rec).map_err(|_| bad("truncated records"))?;
        let u = u32::from_le_bytes(rec[0..4].try_into().unwrap());
        let v = u32::from_le_bytes(rec[4..8].try_into().unwrap());
        let ts = u64::from_le_bytes(rec[8..16].try_into().unwrap());
        if u as usize >= n || v as usize >= n {
            return Err(bad("vertex id out of range"));
        }
        any_ts |= ts != 0;
        edges.push(DirectedEdge {
            source: u,
            target: v,
            timestamp: Some(ts),
        });
    }
    if !any_ts {
        edges.iter_mut().for_each(|e| e.timestamp = None);
    }
    Ok(DirectedEdgeList { edges, n_vertices: n })
}

/// Hex SHA-256 of a file's bytes.
pub fn content_hash(path: &Path) -> Result<String, IngestError> {
    let mut f = File::open(path).map_err(io_err(path))?;
    let mut hasher = Sha256::new();
    io::copy(&mut f, &mut hasher).map_err(io_err(path))?;
    Ok(hex::encode(hasher.finalize()))
}

/// Parses `input`, or loads the cached binary form if one exists for the
/// same content and options. Returns the edges, the stats (recomputed from
/// the edges on a cache hit, with duplicate and self-loop counts taken from
/// the cached edges), and whether the cache was used.
pub fn load_edges(
    input: &Path,
    options: ParseOptions,
    cache_dir: Option<&Path>,
) -> Result<(DirectedEdgeList, IngestStats, bool), IngestError> {
    let Some(dir) = cache_dir else {
        let parsed = parse_snap(input, options)?;
        return Ok((parsed.edges, parsed.stats, false));
    };
    let key = format!(
        "{}-{}{}.dgel",
        content_hash(input)?,
        options.dedupe as u8,
        options.drop_self_loops as u8
    );
    let path = dir.join(key);
    if path.exists() {
        let f = File::open(&path).map_err(io_err(&path))?;
        let el = read_cache(f, &path)?;
        let mut seen = HashSet::new();
        let stats = IngestStats {
            n: el.n_vertices,
            m: el.len(),
            lines: 0,
            duplicates: el.pairs().filter(|p| !seen.insert(*p)).count(),
            self_loops: el.pairs().filter(|(u, v)| u == v).count(),
        };
        return Ok((el, stats, true));
    }
    let parsed = parse_snap(input, options)?;
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let tmp = path.with_extension("tmp");
    let f = File::create(&tmp).map_err(io_err(&tmp))?;
    write_cache(&parsed.edges, f).map_err(io_err(&tmp))?;
    std::fs::rename(&tmp, &path).map_err(io_err(&path))?;
    Ok((parsed.edges, parsed.stats, false))
}
