//! Query execution and click-to-AND refinement.
//!
//! A query is a base tag plus an ordered list of refinement tags, all
//! ANDed together. One call to [`execute`] intersects the posting lists,
//! grows the tag cluster inside the hit set, ranks and pages the hits and
//! bins the graph for display.

use serde::Serialize;
use thiserror::Error;

use crate::clustering::{cluster, ClusterError, ClusterParams, TagGraph};
use crate::corpus::{normalize_tag, BookmarkId, FolksonomyIndex, TagId};
use crate::ranking::{rank_absolute, rank_wdf_itf, Hit, HitSetStats, Ranking};
use crate::view::HitSetView;
use crate::viz::DisplayGraph;

pub const DEFAULT_PAGE_SIZE: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QueryError {
    #[error("query term is empty")]
    EmptyTerm,
    #[error("an edge needs two distinct tags, got {0:?} twice")]
    SameEndpoints(String),
    #[error("page and page size must be at least 1")]
    InvalidPage,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Query {
    base: String,
    refinements: Vec<String>,
}

impl Query {
    pub fn new(base: &str) -> Result<Self, QueryError> {
        let base = normalize_tag(base);
        if base.is_empty() {
            return Err(QueryError::EmptyTerm);
        }
        Ok(Self {
            base,
            refinements: Vec::new(),
        })
    }

    /// Base plus refinements in order; empty refinement terms are an error,
    /// repeats are dropped.
    pub fn with_refinements<I, S>(base: &str, refinements: I) -> Result<Self, QueryError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut query = Self::new(base)?;
        for term in refinements {
            query = query.refine_vertex(term.as_ref())?;
        }
        Ok(query)
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn refinements(&self) -> &[String] {
        &self.refinements
    }

    /// Base followed by the refinements.
    pub fn terms(&self) -> Vec<String> {
        std::iter::once(self.base.clone())
            .chain(self.refinements.iter().cloned())
            .collect()
    }

    fn contains(&self, tag: &str) -> bool {
        self.base == tag || self.refinements.iter().any(|t| t == tag)
    }

    /// ANDs a clicked vertex onto the query. Adding a term already present
    /// returns the query unchanged.
    pub fn refine_vertex(&self, tag: &str) -> Result<Query, QueryError> {
        let tag = normalize_tag(tag);
        if tag.is_empty() {
            return Err(QueryError::EmptyTerm);
        }
        let mut next = self.clone();
        if !next.contains(&tag) {
            next.refinements.push(tag);
        }
        Ok(next)
    }

    /// ANDs both endpoints of a clicked edge onto the query.
    pub fn refine_edge(&self, a: &str, b: &str) -> Result<Query, QueryError> {
        let (na, nb) = (normalize_tag(a), normalize_tag(b));
        if na == nb {
            return Err(QueryError::SameEndpoints(na));
        }
        self.refine_vertex(&na)?.refine_vertex(&nb)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QueryOptions {
    #[serde(flatten)]
    pub cluster: ClusterParams,
    pub ranking: Ranking,
    /// 1-based.
    pub page: usize,
    pub page_size: usize,
}

impl Default for QueryOptions {
    fn default() -> Self {
        Self {
            cluster: ClusterParams::default(),
            ranking: Ranking::default(),
            page: 1,
            page_size: DEFAULT_PAGE_SIZE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultHit {
    pub rank: usize,
    pub url: String,
    pub title: Option<String>,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryResult {
    pub query: Query,
    pub hit_count: usize,
    pub hits: Vec<ResultHit>,
    pub graph: DisplayGraph,
    pub params: QueryOptions,
}

/// Everything [`execute`] computes before paging and display binning.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub hits: Vec<BookmarkId>,
    pub graph: TagGraph,
    pub ranked: Vec<(BookmarkId, f64)>,
    /// Why no cluster was grown, if none was.
    pub cluster_error: Option<ClusterError>,
}

fn resolve(index: &FolksonomyIndex, terms: &[String]) -> Option<Vec<TagId>> {
    terms.iter().map(|t| index.tag_id(t)).collect()
}

/// Bookmarks carrying every term of the query.
pub fn hit_set(index: &FolksonomyIndex, query: &Query) -> Vec<BookmarkId> {
    match resolve(index, &query.terms()) {
        Some(ids) => index.intersect(&ids),
        None => Vec::new(),
    }
}

/// Runs a query without paging or display binning.
pub fn evaluate(index: &FolksonomyIndex, query: &Query, params: &ClusterParams, ranking: Ranking) -> Evaluation {
    let terms = query.terms();
    let hits = hit_set(index, query);
    if hits.is_empty() {
        return Evaluation {
            hits,
            graph: TagGraph::empty(),
            ranked: Vec::new(),
            cluster_error: None,
        };
    }

    let view = HitSetView::new(index, &hits);
    let (mut graph, cluster_error) = match cluster(&view, params) {
        Ok(g) => (g, None),
        Err(e) => (TagGraph::empty(), Some(e)),
    };
    let term_ids = resolve(index, &terms).expect("non-empty hit set implies known terms");
    for (term, id) in terms.iter().zip(term_ids) {
        graph.ensure_vertex(term, view.doc_freq(id));
    }

    let entries: Vec<Hit<'_>> = hits
        .iter()
        .map(|&id| Hit {
            id,
            bookmark: index.bookmark(id),
        })
        .collect();
    let ranked = match ranking {
        Ranking::Absolute => rank_absolute(&entries, &terms),
        Ranking::WdfItf => {
            // Token statistics come from the base term's hits and stay fixed
            // while the query is refined.
            let initial = index.postings_for(query.base()).unwrap_or(&[]);
            let stats = HitSetStats::from_bookmarks(initial.iter().map(|&id| index.bookmark(id)));
            rank_wdf_itf(&entries, &terms, &stats)
        }
    }
    .expect("hits carry every query term");

    Evaluation {
        hits,
        graph,
        ranked: ranked.into_iter().map(|r| (r.id, r.score)).collect(),
        cluster_error,
    }
}

pub fn execute(index: &FolksonomyIndex, query: &Query, options: &QueryOptions) -> Result<QueryResult, QueryError> {
    if options.page == 0 || options.page_size == 0 {
        return Err(QueryError::InvalidPage);
    }
    let eval = evaluate(index, query, &options.cluster, options.ranking);
    let start = (options.page - 1).saturating_mul(options.page_size);
    let hits = eval
        .ranked
        .iter()
        .enumerate()
        .skip(start)
        .take(options.page_size)
        .map(|(i, &(id, score))| {
            let b = index.bookmark(id);
            ResultHit {
                rank: i + 1,
                url: b.url.clone(),
                title: b.title.clone(),
                score,
            }
        })
        .collect();
    Ok(QueryResult {
        query: query.clone(),
        hit_count: eval.hits.len(),
        hits,
        graph: DisplayGraph::from_graph(&eval.graph),
        params: *options,
    })
}

impl QueryResult {
    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("query result serializes")
    }
}
