//! Growing a single tag cluster from the strongest seed pair of a hit set.
//!
//! Three growth rules are supported:
//!
//! * **single-link**: a tag joins when its coincidence value with *some*
//!   member reaches the threshold; the edge that admitted it is recorded.
//! * **complete-link**: a tag joins only when it reaches the threshold with
//!   *every* member; all member pairs become edges.
//! * **group-average**: a single-link pass is run, the mean of the admitting
//!   similarities becomes the new threshold (capped at the seed pair's own
//!   value), and single-link is rerun with it.
//!
//! Candidates are visited most frequent first, ties broken by tag order,
//! and comparisons are inclusive. Tags that never co-occur inside the hit
//! set are never joined, even at threshold 0.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::TagId;
use crate::similarity::Measure;
use crate::view::HitSetView;

pub const DEFAULT_SUPPORT_FLOOR: u32 = 50;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClusterError {
    #[error("no tag pair co-occurs in at least {support_floor} bookmarks")]
    NoSeedPair { support_floor: u32 },
    #[error("threshold {0} is outside [0, 1]")]
    InvalidThreshold(f64),
    #[error("support floor must be at least 1")]
    InvalidSupportFloor,
    #[error("invalid seed pair: {0}")]
    InvalidSeeds(&'static str),
    #[error("seed pair similarity {phi} is below the complete-link threshold {threshold}")]
    SeedsBelowThreshold { phi: f64, threshold: f64 },
    #[error("edge {0}-{1} references a tag that is not a vertex")]
    DanglingEdge(String, String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Linkage {
    #[serde(rename = "single")]
    SingleLink,
    #[serde(rename = "complete")]
    CompleteLink,
    #[serde(rename = "group_average")]
    GroupAverage,
}

impl Linkage {
    pub const ALL: [Linkage; 3] = [Linkage::SingleLink, Linkage::CompleteLink, Linkage::GroupAverage];

    pub fn as_str(self) -> &'static str {
        match self {
            Linkage::SingleLink => "single",
            Linkage::CompleteLink => "complete",
            Linkage::GroupAverage => "group_average",
        }
    }
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
#[error("unknown clustering method {0:?} (expected single, complete or group_average)")]
pub struct ParseLinkageError(String);

impl FromStr for Linkage {
    type Err = ParseLinkageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "single" => Ok(Linkage::SingleLink),
            "complete" => Ok(Linkage::CompleteLink),
            "group_average" => Ok(Linkage::GroupAverage),
            other => Err(ParseLinkageError(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClusterParams {
    pub measure: Measure,
    pub method: Linkage,
    pub threshold: f64,
    /// Minimum number of bookmarks the seed pair must share.
    pub support_floor: u32,
}

impl ClusterParams {
    pub fn new(measure: Measure, method: Linkage, threshold: f64, support_floor: u32) -> Result<Self, ClusterError> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(ClusterError::InvalidThreshold(threshold));
        }
        if support_floor == 0 {
            return Err(ClusterError::InvalidSupportFloor);
        }
        Ok(Self {
            measure,
            method,
            threshold,
            support_floor,
        })
    }
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self {
            measure: Measure::Cosine,
            method: Linkage::SingleLink,
            threshold: 0.5,
            support_floor: DEFAULT_SUPPORT_FLOOR,
        }
    }
}

/// The pair a cluster grows from; `first < second`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedPair {
    pub first: TagId,
    pub second: TagId,
    pub phi: f64,
    pub cooc: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphVertex {
    pub tag: String,
    pub freq: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub a: String,
    pub b: String,
    pub phi: f64,
}

/// Undirected weighted tag graph. Vertices are sorted by tag, edges by
/// `(a, b)` with `a < b`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TagGraph {
    vertices: Vec<GraphVertex>,
    edges: Vec<GraphEdge>,
}

impl TagGraph {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a graph from loose parts. Edges are re-oriented so `a < b`;
    /// a later duplicate of an unordered pair or vertex replaces the earlier one.
    pub fn from_parts<V, E>(vertices: V, edges: E) -> Result<Self, ClusterError>
    where
        V: IntoIterator<Item = (String, u32)>,
        E: IntoIterator<Item = (String, String, f64)>,
    {
        let vertices: BTreeMap<String, u32> = vertices.into_iter().collect();
        let mut edge_map: BTreeMap<(String, String), f64> = BTreeMap::new();
        for (x, y, phi) in edges {
            if !vertices.contains_key(&x) || !vertices.contains_key(&y) || x == y {
                return Err(ClusterError::DanglingEdge(x, y));
            }
            let key = if x < y { (x, y) } else { (y, x) };
            edge_map.insert(key, phi);
        }
        Ok(Self {
            vertices: vertices
                .into_iter()
                .map(|(tag, freq)| GraphVertex { tag, freq })
                .collect(),
            edges: edge_map
                .into_iter()
                .map(|((a, b), phi)| GraphEdge { a, b, phi })
                .collect(),
        })
    }

    fn from_ids(view: &HitSetView<'_>, members: &[TagId], edges: &[(TagId, TagId, f64)]) -> Self {
        let index = view.index();
        let mut vs: Vec<TagId> = members.to_vec();
        vs.sort_unstable();
        let mut es: Vec<(TagId, TagId, f64)> = edges
            .iter()
            .map(|&(x, y, phi)| if x < y { (x, y, phi) } else { (y, x, phi) })
            .collect();
        es.sort_unstable_by_key(|e| (e.0, e.1));
        es.dedup_by_key(|e| (e.0, e.1));
        Self {
            vertices: vs
                .into_iter()
                .map(|t| GraphVertex {
                    tag: index.tag_name(t).to_owned(),
                    freq: view.doc_freq(t),
                })
                .collect(),
            edges: es
                .into_iter()
                .map(|(x, y, phi)| GraphEdge {
                    a: index.tag_name(x).to_owned(),
                    b: index.tag_name(y).to_owned(),
                    phi,
                })
                .collect(),
        }
    }

    pub fn vertices(&self) -> &[GraphVertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains_vertex(&self, tag: &str) -> bool {
        self.vertices.binary_search_by(|v| v.tag.as_str().cmp(tag)).is_ok()
    }

    pub fn vertex_tags(&self) -> impl Iterator<Item = &str> {
        self.vertices.iter().map(|v| v.tag.as_str())
    }

    /// Adds an isolated vertex unless the tag is already present.
    pub fn ensure_vertex(&mut self, tag: &str, freq: u32) {
        if let Err(pos) = self.vertices.binary_search_by(|v| v.tag.as_str().cmp(tag)) {
            self.vertices.insert(
                pos,
                GraphVertex {
                    tag: tag.to_owned(),
                    freq,
                },
            );
        }
    }

    pub fn is_connected(&self) -> bool {
        let Some(start) = self.vertices.first() else {
            return true;
        };
        let mut reached: HashSet<&str> = HashSet::from([start.tag.as_str()]);
        loop {
            let before = reached.len();
            for e in &self.edges {
                if reached.contains(e.a.as_str()) || reached.contains(e.b.as_str()) {
                    reached.insert(&e.a);
                    reached.insert(&e.b);
                }
            }
            if reached.len() == before {
                break;
            }
        }
        reached.len() == self.vertices.len()
    }
}

/// Picks the most similar pair sharing at least `support_floor` hits.
/// Ties go to the larger co-occurrence, then to the lexicographically
/// smaller pair.
pub fn select_seed_pair(view: &HitSetView<'_>, measure: Measure, support_floor: u32) -> Result<SeedPair, ClusterError> {
    let mut best: Option<SeedPair> = None;
    for (x, y, g) in view.pairs() {
        if g < support_floor {
            continue;
        }
        let candidate = SeedPair {
            first: x,
            second: y,
            phi: view.similarity(measure, x, y),
            cooc: g,
        };
        let better = match &best {
            None => true,
            Some(cur) => candidate
                .phi
                .total_cmp(&cur.phi)
                .then(candidate.cooc.cmp(&cur.cooc))
                .then((cur.first, cur.second).cmp(&(candidate.first, candidate.second)))
                .is_gt(),
        };
        if better {
            best = Some(candidate);
        }
    }
    best.ok_or(ClusterError::NoSeedPair { support_floor })
}

fn check_seeds(view: &HitSetView<'_>, seeds: &SeedPair) -> Result<(), ClusterError> {
    if seeds.first == seeds.second {
        return Err(ClusterError::InvalidSeeds("seed tags must be distinct"));
    }
    if view.cooc(seeds.first, seeds.second) == 0 {
        return Err(ClusterError::InvalidSeeds("seed tags do not co-occur in the hit set"));
    }
    Ok(())
}

struct Expansion {
    members: Vec<TagId>,
    /// Seed edge first, then one admitting edge per joined tag.
    edges: Vec<(TagId, TagId, f64)>,
}

fn expand(view: &HitSetView<'_>, seeds: &SeedPair, measure: Measure, threshold: f64) -> Expansion {
    let seed_phi = view.similarity(measure, seeds.first, seeds.second);
    let mut members = vec![seeds.first, seeds.second];
    let mut joined: HashSet<TagId> = members.iter().copied().collect();
    let mut edges = vec![(seeds.first, seeds.second, seed_phi)];

    // `members` grows while it is scanned.
    let mut cursor = 0;
    while cursor < members.len() {
        let member = members[cursor];
        for &candidate in view.neighbors(member) {
            if joined.contains(&candidate) {
                continue;
            }
            let phi = view.similarity(measure, member, candidate);
            if phi >= threshold {
                joined.insert(candidate);
                members.push(candidate);
                edges.push((member, candidate, phi));
            }
        }
        cursor += 1;
    }
    Expansion { members, edges }
}

pub fn single_link(view: &HitSetView<'_>, seeds: &SeedPair, params: &ClusterParams) -> Result<TagGraph, ClusterError> {
    check_seeds(view, seeds)?;
    let grown = expand(view, seeds, params.measure, params.threshold);
    Ok(TagGraph::from_ids(view, &grown.members, &grown.edges))
}

pub fn complete_link(
    view: &HitSetView<'_>,
    seeds: &SeedPair,
    params: &ClusterParams,
) -> Result<TagGraph, ClusterError> {
    check_seeds(view, seeds)?;
    let measure = params.measure;
    let seed_phi = view.similarity(measure, seeds.first, seeds.second);
    if seed_phi < params.threshold {
        return Err(ClusterError::SeedsBelowThreshold {
            phi: seed_phi,
            threshold: params.threshold,
        });
    }

    let mut members = vec![seeds.first, seeds.second];
    // Only tags co-occurring with the first seed can ever qualify. A rejected
    // candidate stays rejected since the member set only grows, so one pass
    // reaches the fixed point.
    for &candidate in view.neighbors(seeds.first) {
        if candidate == seeds.second {
            continue;
        }
        let fits = members
            .iter()
            .all(|&m| view.cooc(m, candidate) > 0 && view.similarity(measure, m, candidate) >= params.threshold);
        if fits {
            members.push(candidate);
        }
    }

    let mut edges = Vec::with_capacity(members.len() * (members.len() - 1) / 2);
    for (i, &x) in members.iter().enumerate() {
        for &y in &members[i + 1..] {
            edges.push((x, y, view.similarity(measure, x, y)));
        }
    }
    Ok(TagGraph::from_ids(view, &members, &edges))
}

/// Threshold of the final group-average pass: the mean similarity of the
/// edges admitted by a single-link pass at `params.threshold`, lowered to
/// the seed pair's similarity if that is smaller. `None` when that pass
/// admits no tag.
pub fn group_average_threshold(
    view: &HitSetView<'_>,
    seeds: &SeedPair,
    params: &ClusterParams,
) -> Result<Option<f64>, ClusterError> {
    check_seeds(view, seeds)?;
    let first_pass = expand(view, seeds, params.measure, params.threshold);
    let admitted = &first_pass.edges[1..];
    if admitted.is_empty() {
        return Ok(None);
    }
    let total: f64 = admitted.iter().map(|e| e.2).sum();
    let mean = total / admitted.len() as f64;
    let seed_phi = first_pass.edges[0].2;
    Ok(Some(if seed_phi < mean { seed_phi } else { mean }))
}

pub fn group_average(
    view: &HitSetView<'_>,
    seeds: &SeedPair,
    params: &ClusterParams,
) -> Result<TagGraph, ClusterError> {
    match group_average_threshold(view, seeds, params)? {
        None => {
            let seed_phi = view.similarity(params.measure, seeds.first, seeds.second);
            Ok(TagGraph::from_ids(
                view,
                &[seeds.first, seeds.second],
                &[(seeds.first, seeds.second, seed_phi)],
            ))
        }
        Some(threshold) => {
            let grown = expand(view, seeds, params.measure, threshold);
            Ok(TagGraph::from_ids(view, &grown.members, &grown.edges))
        }
    }
}

/// Selects the seed pair and grows the cluster with `params.method`.
pub fn cluster(view: &HitSetView<'_>, params: &ClusterParams) -> Result<TagGraph, ClusterError> {
    let seeds = select_seed_pair(view, params.measure, params.support_floor)?;
    match params.method {
        Linkage::SingleLink => single_link(view, &seeds, params),
        Linkage::CompleteLink => complete_link(view, &seeds, params),
        Linkage::GroupAverage => group_average(view, &seeds, params),
    }
}
