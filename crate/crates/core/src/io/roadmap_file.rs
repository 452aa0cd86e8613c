use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;

use super::robot_spec::{parse_robot_spec, robot_hash, robot_spec_to_toml};
use crate::chain::{Configuration, TaskPoint};
use crate::error::{Error, Result};
use crate::grr::{BuildReport, GrrParams, ResolutionRoadmap};
use crate::query::QueryContext;
use crate::robots::RobotModel;
use crate::taskgraph::{GridMeta, TaskGraph, TaskMetricWeights};

pub const FORMAT_VERSION: u32 = 1;

const MAGIC: &str = "grr-roadmap";

/// Everything stored in a roadmap file.
#[derive(Clone, Debug)]
pub struct LoadedRoadmap {
    pub model: RobotModel,
    pub graph: TaskGraph,
    pub roadmap: ResolutionRoadmap,
}

impl LoadedRoadmap {
    pub fn into_context(self) -> Result<QueryContext> {
        QueryContext::new(self.model.chain, self.graph, self.roadmap)
    }
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("value serializes")
}

/// Serializes a roadmap with its robot spec and build parameters. Floats are
/// written in shortest round-trip form, so reading restores them exactly.
pub fn write_roadmap(model: &RobotModel, graph: &TaskGraph, roadmap: &ResolutionRoadmap) -> Result<String> {
    let grid = graph
        .grid()
        .ok_or_else(|| Error::invalid("only grid-built task graphs can be saved"))?;
    if !roadmap.matches(graph) {
        return Err(Error::invalid("roadmap was not built over this task graph"));
    }
    let spec = robot_spec_to_toml(model);
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {FORMAT_VERSION}");
    let _ = writeln!(out, "robot-hash {}", robot_hash(model));
    let _ = writeln!(out, "robot-spec {}", spec.lines().count());
    for line in spec.lines() {
        let _ = writeln!(out, "{line}");
    }
    let _ = writeln!(out, "grid {}", json(grid));
    let _ = writeln!(out, "metric {}", json(graph.metric()));
    let _ = writeln!(out, "params {}", json(roadmap.params()));
    let _ = writeln!(out, "report {}", json(roadmap.report()));
    let _ = writeln!(out, "vertices {}", graph.len());
    for (i, v) in graph.vertices().iter().enumerate() {
        let t = v.translation;
        let _ = write!(out, "{i} {} {} {}", t.x, t.y, t.z);
        match roadmap.assignment(i) {
            Some(q) => {
                for x in q.values() {
                    let _ = write!(out, " {x}");
                }
            }
            None => out.push_str(" -"),
        }
        out.push('\n');
    }
    let _ = writeln!(out, "edges {}", roadmap.resolved_edges().len());
    for (a, b) in roadmap.resolved_edges() {
        let _ = writeln!(out, "{a} {b}");
    }
    out.push_str("end\n");
    Ok(out)
}

pub fn save_roadmap(path: impl AsRef<Path>, model: &RobotModel, graph: &TaskGraph, roadmap: &ResolutionRoadmap) -> Result<()> {
    std::fs::write(path, write_roadmap(model, graph, roadmap)?)?;
    Ok(())
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self, section: &str) -> Result<&'a str> {
        match self.iter.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l)
            }
            None => Err(Error::parse("roadmap", format!("truncated file: missing section '{section}'"))),
        }
    }

    fn err(&self, msg: impl std::fmt::Display) -> Error {
        Error::parse(format!("roadmap line {}", self.line), msg)
    }

    /// Next line, which must start with `key`; returns the rest.
    fn section(&mut self, key: &str) -> Result<&'a str> {
        let l = self.next_line(key)?;
        match l.split_once(' ') {
            Some((k, rest)) if k == key => Ok(rest),
            _ => Err(self.err(format!("expected section '{key}'"))),
        }
    }

    fn json_section<T: serde::de::DeserializeOwned>(&mut self, key: &str) -> Result<T> {
        let rest = self.section(key)?;
        serde_json::from_str(rest).map_err(|e| self.err(format!("{key}: {e}")))
    }

    fn count_section(&mut self, key: &str) -> Result<usize> {
        let rest = self.section(key)?;
        rest.trim().parse().map_err(|e| self.err(format!("{key} count: {e}")))
    }
}

fn parse_f64(s: &str, lines: &Lines) -> Result<f64> {
    s.parse().map_err(|e| lines.err(format!("bad number '{s}': {e}")))
}

/// Parses roadmap file text. With `expected`, the stored robot must match it.
pub fn read_roadmap(text: &str, expected: Option<&RobotModel>) -> Result<LoadedRoadmap> {
    let mut lines = Lines {
        iter: text.lines().enumerate(),
        line: 0,
    };
    let version = lines.section(MAGIC).map_err(|_| Error::parse("roadmap", "not a roadmap file"))?;
    let version: u32 = version.trim().parse().map_err(|e| lines.err(format!("version: {e}")))?;
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let stored_hash = lines.section("robot-hash")?.trim().to_string();
    let n_spec = lines.count_section("robot-spec")?;
    let mut spec = String::new();
    for _ in 0..n_spec {
        spec.push_str(lines.next_line("robot-spec")?);
        spec.push('\n');
    }
    let model = parse_robot_spec(&spec)?;
    let actual = robot_hash(&model);
    if actual != stored_hash {
        return Err(Error::HashMismatch {
            expected: stored_hash,
            found: actual,
        });
    }
    if let Some(m) = expected {
        let h = robot_hash(m);
        if h != stored_hash {
            return Err(Error::HashMismatch {
                expected: stored_hash,
                found: h,
            });
        }
    }
    let grid: GridMeta = lines.json_section("grid")?;
    let metric: TaskMetricWeights = lines.json_section("metric")?;
    let params: GrrParams = lines.json_section("params")?;
    let report: BuildReport = lines.json_section("report")?;
    let n = lines.count_section("vertices")?;
    let dof = model.chain.dof();
    let mut vertices = Vec::with_capacity(n);
    let mut assignments = Vec::with_capacity(n);
    for i in 0..n {
        let l = lines.next_line("vertices")?;
        let fields: Vec<&str> = l.split_ascii_whitespace().collect();
        if fields.first().map(|f| f.parse::<usize>()) != Some(Ok(i)) {
            return Err(lines.err(format!("expected vertex {i}")));
        }
        if fields.len() < 5 {
            return Err(lines.err("vertex line is too short"));
        }
        let t = Vector3::new(
            parse_f64(fields[1], &lines)?,
            parse_f64(fields[2], &lines)?,
            parse_f64(fields[3], &lines)?,
        );
        vertices.push(TaskPoint {
            translation: t,
            orientation: model.orientation,
        });
        let q = &fields[4..];
        if q == ["-"] {
            assignments.push(None);
        } else if q.len() == dof {
            let v = q.iter().map(|s| parse_f64(s, &lines)).collect::<Result<Vec<_>>>()?;
            assignments.push(Some(Configuration::new(v)));
        } else {
            return Err(lines.err(format!("vertex {i}: expected {dof} joint values or '-'")));
        }
    }
    let m = lines.count_section("edges")?;
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let l = lines.next_line("edges")?;
        let mut it = l.split_ascii_whitespace().map(str::parse::<usize>);
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(a)), Some(Ok(b)), None) => edges.push((a, b)),
            _ => return Err(lines.err("expected an edge 'a b'")),
        }
    }
    if lines.next_line("end")? != "end" {
        return Err(lines.err("expected 'end'"));
    }
    let graph = TaskGraph::from_grid_vertices(vertices, grid, metric)?;
    let roadmap = ResolutionRoadmap::from_parts(&model.chain, &graph, assignments, edges, params, report)?;
    Ok(LoadedRoadmap { model, graph, roadmap })
}

pub fn load_roadmap(path: impl AsRef<Path>, expected: Option<&RobotModel>) -> Result<LoadedRoadmap> {
    let text = std::fs::read_to_string(path)?;
    read_roadmap(&text, expected)
}
