//! Files written by the harness: CSV tables with JSON sidecars, graph JSON,
//! optimization records and trajectory logs.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rydvqa_core::dynamics::Channel;
use rydvqa_core::graph::UdGraph;
use rydvqa_core::variational::OptimizationRecord;
use serde::{Deserialize, Serialize};

use crate::error::{io, Error, Result};

pub const SOFTWARE: &str = "rydvqa";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            // Shortest representation that parses back to the same bits.
            Cell::Float(v) => write!(f, "{v:?}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Seeds are written as text: they use all 64 bits.
pub fn seed_cell(seed: u64) -> Cell {
    Cell::Text(seed.to_string())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: Vec<String>) -> Self {
        Self {
            name: name.to_string(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width in {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

pub fn header(fixed: &[&str], stages: usize, tail: &[&str]) -> Vec<String> {
    let mut h: Vec<String> = fixed.iter().map(|s| s.to_string()).collect();
    h.extend((1..=stages).map(|k| format!("t_{k}")));
    h.extend(tail.iter().map(|s| s.to_string()));
    h
}

#[derive(Serialize)]
struct Sidecar<'a, C: Serialize> {
    software: &'static str,
    version: &'static str,
    file: &'a str,
    columns: &'a [String],
    rows: usize,
    config: &'a C,
}

/// Write `dir/<name>.csv` and the sidecar `dir/<name>.json`.
pub fn write_table<C: Serialize>(dir: &Path, table: &Table, config: &C) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(io(dir))?;
    let csv_path = dir.join(format!("{}.csv", table.name));
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|c| c.to_string()))?;
    }
    w.flush().map_err(io(&csv_path))?;
    let file = format!("{}.csv", table.name);
    let sidecar = Sidecar {
        software: SOFTWARE,
        version: VERSION,
        file: &file,
        columns: &table.header,
        rows: table.rows.len(),
        config,
    };
    write_json(&sidecar_path(&csv_path), &sidecar)?;
    Ok(csv_path)
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io(dir))?;
    }
    let f = fs::File::create(path).map_err(io(path))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(io(path))?;
    w.flush().map_err(io(path))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(io(path))?;
    Ok(serde_json::from_str(&text)?)
}

/// A CSV file read back as strings.
pub struct CsvFile {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvFile {
    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let header = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|r| r.iter().map(str::to_string).collect()))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Self { header, rows })
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("missing column {name:?}")))
    }

    pub fn get<T: std::str::FromStr>(&self, row: usize, name: &str) -> Result<T> {
        let c = self.column(name)?;
        let cell = self
            .rows
            .get(row)
            .ok_or_else(|| Error::Format(format!("row {row} out of range")))?
            .get(c)
            .ok_or_else(|| Error::Format(format!("row {row} is short")))?;
        cell.parse()
            .map_err(|_| Error::Format(format!("cannot parse {name} = {cell:?}")))
    }
}

/// On-disk graph layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub box_side: f64,
    pub blockade_radius: f64,
    pub positions: Vec<[f64; 2]>,
    pub edges: Vec<[usize; 2]>,
    /// Generator seed as a decimal string; empty for hand-placed graphs.
    pub seed: String,
}

impl GraphFile {
    pub fn from_graph(g: &UdGraph) -> Self {
        Self {
            n: g.n_atoms(),
            box_side: g.box_side(),
            blockade_radius: g.blockade_radius(),
            positions: g.positions().to_vec(),
            edges: g.edges().iter().map(|&(i, j)| [i, j]).collect(),
            seed: g.seed().map(|s| s.to_string()).unwrap_or_default(),
        }
    }

    /// Rebuild the graph; the stored edge list must match the positions.
    pub fn to_graph(&self) -> Result<UdGraph> {
        if self.positions.len() != self.n {
            return Err(Error::Format("graph: n does not match positions".into()));
        }
        let seed = if self.seed.is_empty() {
            None
        } else {
            Some(
                self.seed
                    .parse::<u64>()
                    .map_err(|_| Error::Format("graph: bad seed".into()))?,
            )
        };
        let g = UdGraph::from_positions(self.positions.clone(), self.box_side)?.with_seed(seed);
        let edges: Vec<[usize; 2]> = g.edges().iter().map(|&(i, j)| [i, j]).collect();
        if edges != self.edges {
            return Err(Error::Format(
                "graph: edge list does not match positions".into(),
            ));
        }
        Ok(g)
    }
}

pub fn write_graph(path: &Path, g: &UdGraph) -> Result<()> {
    write_json(path, &GraphFile::from_graph(g))
}

pub fn read_graph(path: &Path) -> Result<UdGraph> {
    read_json::<GraphFile>(path)?.to_graph()
}

/// An optimization record with the context needed to interpret it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledRecord {
    pub graph_id: usize,
    pub density: f64,
    pub gamma_se: f64,
    pub label: String,
    pub record: OptimizationRecord,
}

pub fn records_table(name: &str, stages: usize, records: &[LabeledRecord]) -> Table {
    let mut t = Table::new(
        name,
        header(
            &["graph_id", "density", "gamma_se", "label", "restart"],
            stages,
            &[
                "best_objective",
                "approximation_ratio",
                "evaluations",
                "converged",
            ],
        ),
    );
    for r in records {
        let mut row: Vec<Cell> = vec![
            r.graph_id.into(),
            r.density.into(),
            r.gamma_se.into(),
            r.label.as_str().into(),
            r.record.restart_index.into(),
        ];
        row.extend(r.record.best_params.iter().map(|&p| Cell::from(p)));
        row.extend([
            r.record.best_objective.into(),
            r.record.approximation_ratio.into(),
            r.record.evaluations.into(),
            r.record.converged.into(),
        ]);
        t.push(row);
    }
    t
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpLine {
    pub t: f64,
    pub atom: usize,
    pub channel: Channel,
}

/// One line of a trajectory log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryLine {
    pub index: usize,
    pub seed: String,
    pub jumps: Vec<JumpLine>,
    pub final_bitstring_sample: String,
}

pub fn write_jsonl<T: Serialize>(path: &Path, lines: &[T]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io(dir))?;
    }
    let f = fs::File::create(path).map_err(io(path))?;
    let mut w = BufWriter::new(f);
    for line in lines {
        serde_json::to_writer(&mut w, line)?;
        w.write_all(b"\n").map_err(io(path))?;
    }
    w.flush().map_err(io(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_exactly() {
        for v in [0.1, 1.0 / 3.0, -2.5e-17, 1e300, 0.0] {
            let s = Cell::Float(v).to_string();
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn graph_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = UdGraph::random(7, 2.6, 42).unwrap();
        let p = dir.path().join("g.json");
        write_graph(&p, &g).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.contains("\"seed\": \"42\""));
        assert_eq!(read_graph(&p).unwrap(), g);

        let h = UdGraph::from_positions(vec![[0.0, 0.0], [0.5, 0.0]], 1.0).unwrap();
        write_graph(&p, &h).unwrap();
        assert_eq!(read_graph(&p).unwrap(), h);
    }

    #[test]
    fn tampered_edges_are_rejected() {
        let g = UdGraph::from_positions(vec![[0.0, 0.0], [0.5, 0.0]], 1.0).unwrap();
        let mut f = GraphFile::from_graph(&g);
        f.edges.clear();
        assert!(f.to_graph().is_err());
    }

    #[test]
    fn table_and_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new("demo", header(&["a"], 2, &["b"]));
        t.push(vec![1usize.into(), 0.5.into(), 0.25.into(), "x".into()]);
        let p = write_table(dir.path(), &t, &serde_json::json!({"k": 1})).unwrap();
        let back = CsvFile::read(&p).unwrap();
        assert_eq!(back.header, vec!["a", "t_1", "t_2", "b"]);
        assert_eq!(back.get::<f64>(0, "t_2").unwrap(), 0.25);
        let side: serde_json::Value = read_json(&sidecar_path(&p)).unwrap();
        assert_eq!(side["version"], VERSION);
        assert_eq!(side["config"]["k"], 1);
        assert_eq!(side["rows"], 1);
    }
}
