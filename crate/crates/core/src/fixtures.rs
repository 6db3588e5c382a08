//! Small reference corpora shared by tests, benches and docs.

use crate::corpus::{load_corpus, Corpus};

/// Five bookmarks over three tags, every count 1:
/// b1={recipe,cooking}, b2={recipe,cooking,seafood}, b3={recipe,seafood},
/// b4={cooking}, b5={recipe}.
pub const C5_JSONL: &str = r#"{"url":"https://example.org/b1","title":"b1","tags":["recipe","cooking"]}
{"url":"https://example.org/b2","title":"b2","tags":["recipe","cooking","seafood"]}
{"url":"https://example.org/b3","title":"b3","tags":["recipe","seafood"]}
{"url":"https://example.org/b4","title":"b4","tags":["cooking"]}
{"url":"https://example.org/b5","title":"b5","tags":["recipe"]}
"#;

pub fn c5_corpus() -> Corpus {
    load_corpus(C5_JSONL.as_bytes()).expect("C5 fixture parses")
}
