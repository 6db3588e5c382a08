//! Display model for a tag graph: ten font-size classes for vertices and
//! ten line-width classes for edges, via min-max normalization over the
//! graph, plus canonical JSON and DOT renderings.

use std::fmt::Write as _;

use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::clustering::TagGraph;

pub const BIN_COUNT: u8 = 10;
/// Class assigned when every value in the graph is equal.
pub const DEGENERATE_BIN: u8 = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisplayVertex {
    pub tag: String,
    pub freq: u32,
    pub size: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplayEdge {
    pub a: String,
    pub b: String,
    #[serde(serialize_with = "six_decimals")]
    pub phi: f64,
    pub width: u8,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DisplayGraph {
    pub vertices: Vec<DisplayVertex>,
    pub edges: Vec<DisplayEdge>,
}

fn six_decimals<S: Serializer>(phi: &f64, s: S) -> Result<S::Ok, S::Error> {
    let raw = RawValue::from_string(format!("{phi:.6}")).map_err(serde::ser::Error::custom)?;
    raw.serialize(s)
}

/// Maps `x` in `[min, max]` to a class in `1..=10`.
pub fn min_max_bin(x: f64, min: f64, max: f64) -> u8 {
    if max <= min {
        return DEGENERATE_BIN;
    }
    if x >= max {
        return BIN_COUNT;
    }
    let scaled = (f64::from(BIN_COUNT - 1) * (x - min) / (max - min)).floor();
    (1.0 + scaled).clamp(1.0, f64::from(BIN_COUNT)) as u8
}

fn bin_all(values: &[f64]) -> Vec<u8> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values.iter().map(|&x| min_max_bin(x, min, max)).collect()
}

/// Font-size class per vertex, in `graph.vertices()` order.
pub fn bin_vertices(graph: &TagGraph) -> Vec<u8> {
    let freqs: Vec<f64> = graph.vertices().iter().map(|v| f64::from(v.freq)).collect();
    bin_all(&freqs)
}

/// Line-width class per edge, in `graph.edges()` order.
pub fn bin_edges(graph: &TagGraph) -> Vec<u8> {
    let phis: Vec<f64> = graph.edges().iter().map(|e| e.phi).collect();
    bin_all(&phis)
}

impl DisplayGraph {
    pub fn from_graph(graph: &TagGraph) -> Self {
        let vertices = graph
            .vertices()
            .iter()
            .zip(bin_vertices(graph))
            .map(|(v, size)| DisplayVertex {
                tag: v.tag.clone(),
                freq: v.freq,
                size,
            })
            .collect();
        let edges = graph
            .edges()
            .iter()
            .zip(bin_edges(graph))
            .map(|(e, width)| DisplayEdge {
                a: e.a.clone(),
                b: e.b.clone(),
                phi: e.phi,
                width,
            })
            .collect();
        DisplayGraph { vertices, edges }
    }

    fn sorted(&self) -> (Vec<&DisplayVertex>, Vec<&DisplayEdge>) {
        let mut vs: Vec<&DisplayVertex> = self.vertices.iter().collect();
        vs.sort_by(|x, y| x.tag.cmp(&y.tag));
        let mut es: Vec<&DisplayEdge> = self.edges.iter().collect();
        es.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));
        (vs, es)
    }

    /// Canonical JSON: vertices sorted by tag, edges by `(a, b)`, phi with
    /// six decimals.
    pub fn to_json(&self) -> Vec<u8> {
        #[derive(Serialize)]
        struct Canonical<'a> {
            vertices: Vec<&'a DisplayVertex>,
            edges: Vec<&'a DisplayEdge>,
        }
        let (vertices, edges) = self.sorted();
        serde_json::to_vec(&Canonical { vertices, edges }).expect("display graph serializes")
    }

    /// Undirected DOT with `fontsize = 8 + 2 * size` and `penwidth = width`.
    pub fn to_dot(&self) -> Vec<u8> {
        let (vertices, edges) = self.sorted();
        let mut out = String::from("graph tags {\n");
        for v in vertices {
            let _ = writeln!(
                out,
                "  {} [freq={}, fontsize={}];",
                dot_id(&v.tag),
                v.freq,
                8 + 2 * u32::from(v.size)
            );
        }
        for e in edges {
            let _ = writeln!(
                out,
                "  {} -- {} [phi={:.6}, penwidth={}];",
                dot_id(&e.a),
                dot_id(&e.b),
                e.phi,
                e.width
            );
        }
        out.push_str("}\n");
        out.into_bytes()
    }
}

fn dot_id(s: &str) -> String {
    let mut quoted = String::with_capacity(s.len() + 2);
    quoted.push('"');
    for c in s.chars() {
        match c {
            '"' => quoted.push_str("\\\""),
            '\\' => quoted.push_str("\\\\"),
            '\n' => quoted.push_str("\\n"),
            _ => quoted.push(c),
        }
    }
    quoted.push('"');
    quoted
}
