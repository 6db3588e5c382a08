//! Tag co-occurrence clustering and Boolean query refinement over
//! tag-annotated bookmark corpora.
//!
//! The pipeline for one query round trip:
//!
//! 1. [`corpus::load_corpus`] parses JSONL bookmarks and
//!    [`corpus::build_index`] builds posting lists and co-occurrence counts.
//! 2. [`query::execute`] intersects the posting lists of the query terms,
//!    restricts tag statistics to the hits ([`view::HitSetView`]), grows a
//!    cluster from the strongest seed pair ([`clustering`]) and ranks the
//!    hits ([`ranking`]).
//! 3. [`viz::DisplayGraph`] bins vertex frequencies and edge similarities
//!    into ten display classes and renders JSON or DOT.

pub mod clustering;
pub mod corpus;
pub mod fixtures;
pub mod query;
pub mod ranking;
pub mod similarity;
pub mod view;
pub mod viz;

pub use clustering::{ClusterError, ClusterParams, Linkage, SeedPair, TagGraph};
pub use corpus::{build_index, load_corpus, Bookmark, BookmarkId, Corpus, CorpusError, FolksonomyIndex, TagId};
pub use query::{execute, Query, QueryError, QueryOptions, QueryResult};
pub use ranking::{HitSetStats, Ranking, RankingError};
pub use similarity::{CoincidenceValue, Measure, SimilarityInput};
pub use view::HitSetView;
pub use viz::DisplayGraph;
