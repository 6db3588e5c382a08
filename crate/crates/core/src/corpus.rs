//! Bookmark corpus ingestion and the immutable folksonomy index.
//!
//! A corpus is read from JSONL, one bookmark per line:
//!
//! ```text
//! {"url": "https://example.org/a", "title": "A", "tags": {"recipe": 3, "cooking": 1}}
//! {"url": "https://example.org/b", "tags": ["recipe", "seafood"]}
//! ```
//!
//! A bare tag list counts each entry once. Tags are normalized (trim,
//! lowercase, NFC) and entries that collapse onto the same tag accumulate.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::BufRead;

use serde::Deserialize;
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("read error: {0}")]
    Io(#[from] std::io::Error),
}

/// Canonical form of a tag or query term.
pub fn normalize_tag(raw: &str) -> String {
    raw.trim().to_lowercase().nfc().collect()
}

/// One deduplicated resource together with its per-tag user counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bookmark {
    pub url: String,
    pub title: Option<String>,
    /// Number of users that assigned each tag to this bookmark.
    pub tag_counts: BTreeMap<String, u32>,
}

impl Bookmark {
    /// Number of tag assignments on this bookmark (each tag weighted by its count).
    pub fn total_tags(&self) -> u64 {
        self.tag_counts.values().map(|&c| u64::from(c)).sum()
    }

    pub fn freq(&self, tag: &str) -> u32 {
        self.tag_counts.get(tag).copied().unwrap_or(0)
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.tag_counts.contains_key(tag)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub bookmarks: Vec<Bookmark>,
    /// Records skipped because their url was already present.
    pub duplicates_dropped: usize,
    /// Records skipped because no tag survived normalization.
    pub malformed_dropped: usize,
}

#[derive(Deserialize)]
struct RawRecord {
    url: String,
    #[serde(default)]
    title: Option<String>,
    tags: RawTags,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawTags {
    Counts(BTreeMap<String, u32>),
    List(Vec<String>),
}

/// Parses a JSONL bookmark stream. Later records repeating an already seen
/// url are dropped and counted.
pub fn load_corpus<R: BufRead>(input: R) -> Result<Corpus, CorpusError> {
    let mut corpus = Corpus::default();
    let mut seen: HashSet<String> = HashSet::new();

    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;

        let url = raw.url.trim().to_string();
        if url.is_empty() {
            return Err(CorpusError::Parse {
                line: line_no,
                message: "empty url".into(),
            });
        }

        let mut tag_counts: BTreeMap<String, u32> = BTreeMap::new();
        let entries: Vec<(String, u32)> = match raw.tags {
            RawTags::Counts(map) => map.into_iter().collect(),
            RawTags::List(list) => list.into_iter().map(|t| (t, 1)).collect(),
        };
        for (tag, count) in entries {
            if count == 0 {
                return Err(CorpusError::Parse {
                    line: line_no,
                    message: format!("tag {tag:?} has count 0; counts must be positive"),
                });
            }
            let tag = normalize_tag(&tag);
            if tag.is_empty() {
                continue;
            }
            let slot = tag_counts.entry(tag).or_insert(0);
            *slot = slot.saturating_add(count);
        }

        if tag_counts.is_empty() {
            corpus.malformed_dropped += 1;
            continue;
        }
        if !seen.insert(url.clone()) {
            corpus.duplicates_dropped += 1;
            continue;
        }
        corpus.bookmarks.push(Bookmark {
            url,
            title: raw.title,
            tag_counts,
        });
    }
    Ok(corpus)
}

/// Dense id of a tag; ids follow lexicographic order of the tag strings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TagId(pub u32);

/// Position of a bookmark in its corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BookmarkId(pub u32);

impl TagId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl BookmarkId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Orders an unordered tag pair so the smaller id comes first.
pub(crate) fn pair_key(x: TagId, y: TagId) -> (TagId, TagId) {
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}

/// Posting lists and pairwise co-occurrence counts over a corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FolksonomyIndex {
    corpus: Corpus,
    tags: Vec<String>,
    lookup: HashMap<String, TagId>,
    postings: Vec<Vec<BookmarkId>>,
    doc_tags: Vec<Vec<(TagId, u32)>>,
    cooc: HashMap<(TagId, TagId), u32>,
}

pub fn build_index(corpus: Corpus) -> FolksonomyIndex {
    let universe: std::collections::BTreeSet<&str> = corpus
        .bookmarks
        .iter()
        .flat_map(|b| b.tag_counts.keys().map(String::as_str))
        .collect();
    let tags: Vec<String> = universe.into_iter().map(str::to_owned).collect();
    let lookup: HashMap<String, TagId> = tags
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), TagId(i as u32)))
        .collect();

    let mut postings = vec![Vec::new(); tags.len()];
    let mut doc_tags = Vec::with_capacity(corpus.bookmarks.len());
    let mut cooc: HashMap<(TagId, TagId), u32> = HashMap::new();

    for (i, bookmark) in corpus.bookmarks.iter().enumerate() {
        let id = BookmarkId(i as u32);
        // BTreeMap iteration keeps these sorted by tag string, hence by id.
        let entries: Vec<(TagId, u32)> = bookmark.tag_counts.iter().map(|(t, &c)| (lookup[t], c)).collect();
        for (pos, &(tag, _)) in entries.iter().enumerate() {
            postings[tag.index()].push(id);
            for &(other, _) in &entries[pos + 1..] {
                *cooc.entry((tag, other)).or_insert(0) += 1;
            }
        }
        doc_tags.push(entries);
    }

    FolksonomyIndex {
        corpus,
        tags,
        lookup,
        postings,
        doc_tags,
        cooc,
    }
}

impl FolksonomyIndex {
    pub fn empty() -> Self {
        build_index(Corpus::default())
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn bookmark_count(&self) -> usize {
        self.corpus.bookmarks.len()
    }

    /// All tags in lexicographic order.
    pub fn tag_universe(&self) -> &[String] {
        &self.tags
    }

    pub fn tag_id(&self, tag: &str) -> Option<TagId> {
        self.lookup.get(tag).copied()
    }

    pub fn tag_name(&self, id: TagId) -> &str {
        &self.tags[id.index()]
    }

    pub fn bookmark(&self, id: BookmarkId) -> &Bookmark {
        &self.corpus.bookmarks[id.index()]
    }

    /// Tags of one bookmark with their counts, sorted by tag id.
    pub fn bookmark_tags(&self, id: BookmarkId) -> &[(TagId, u32)] {
        &self.doc_tags[id.index()]
    }

    /// Ascending ids of the bookmarks carrying `tag`.
    pub fn postings(&self, tag: TagId) -> &[BookmarkId] {
        &self.postings[tag.index()]
    }

    pub fn postings_for(&self, tag: &str) -> Option<&[BookmarkId]> {
        self.tag_id(tag).map(|id| self.postings(id))
    }

    /// Number of bookmarks carrying both tags. Zero for identical tags.
    pub fn cooc(&self, x: TagId, y: TagId) -> u32 {
        if x == y {
            return 0;
        }
        self.cooc.get(&pair_key(x, y)).copied().unwrap_or(0)
    }

    /// Every co-occurring pair `(x, y, g)` with `x < y`, in no particular order.
    pub fn cooc_pairs(&self) -> impl Iterator<Item = (TagId, TagId, u32)> + '_ {
        self.cooc.iter().map(|(&(x, y), &g)| (x, y, g))
    }

    /// Bookmarks carrying every tag in `tags`. An empty slice matches nothing.
    pub fn intersect(&self, tags: &[TagId]) -> Vec<BookmarkId> {
        let mut lists: Vec<&[BookmarkId]> = tags.iter().map(|&t| self.postings(t)).collect();
        lists.sort_by_key(|l| l.len());
        let Some((first, rest)) = lists.split_first() else {
            return Vec::new();
        };
        let mut acc: Vec<BookmarkId> = first.to_vec();
        for list in rest {
            acc = intersect_sorted(&acc, list);
            if acc.is_empty() {
                break;
            }
        }
        acc
    }

    /// The `n` tags carried by the most bookmarks, ties in lexicographic order.
    pub fn top_tags(&self, n: usize) -> Vec<(&str, usize)> {
        let mut all: Vec<(&str, usize)> = self
            .tags
            .iter()
            .zip(&self.postings)
            .map(|(t, p)| (t.as_str(), p.len()))
            .collect();
        all.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        all.truncate(n);
        all
    }
}

fn intersect_sorted(a: &[BookmarkId], b: &[BookmarkId]) -> Vec<BookmarkId> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{c5_corpus, C5_JSONL};

    fn load(s: &str) -> Corpus {
        load_corpus(s.as_bytes()).unwrap()
    }

    #[test]
    fn duplicate_url_keeps_first() {
        let c = load(
            "{\"url\":\"u1\",\"title\":\"first\",\"tags\":[\"a\"]}\n{\"url\":\"u1\",\"title\":\"second\",\"tags\":[\"b\"]}\n",
        );
        assert_eq!(c.bookmarks.len(), 1);
        assert_eq!(c.duplicates_dropped, 1);
        assert_eq!(c.bookmarks[0].title.as_deref(), Some("first"));
    }

    #[test]
    fn normalization_merges_and_accumulates() {
        let c = load(r#"{"url":"u1","tags":["Recipe"," recipe "]}"#);
        assert_eq!(c.bookmarks.len(), 1);
        let expected: BTreeMap<String, u32> = [("recipe".to_string(), 2)].into();
        assert_eq!(c.bookmarks[0].tag_counts, expected);
    }

    #[test]
    fn count_map_form() {
        let c = load(r#"{"url":"u1","tags":{"Recipe":3,"cooking":1,"RECIPE":2}}"#);
        assert_eq!(c.bookmarks[0].freq("recipe"), 5);
        assert_eq!(c.bookmarks[0].total_tags(), 6);
    }

    #[test]
    fn nfc_normalization() {
        // "cafe\u{301}" (decomposed) and "café" (precomposed) are one tag
        let c = load("{\"url\":\"u\",\"tags\":[\"cafe\\u0301\",\"CAF\\u00c9\"]}");
        assert_eq!(c.bookmarks[0].tag_counts.len(), 1);
        assert_eq!(c.bookmarks[0].freq("caf\u{e9}"), 2);
    }

    #[test]
    fn tagless_record_is_malformed_not_duplicate() {
        let c = load("{\"url\":\"u1\",\"tags\":[\"  \"]}\n{\"url\":\"u1\",\"tags\":[\"x\"]}\n");
        assert_eq!(c.malformed_dropped, 1);
        assert_eq!(c.duplicates_dropped, 0);
        assert_eq!(c.bookmarks.len(), 1);
    }

    #[test]
    fn bad_json_names_line() {
        let input = "{\"url\":\"u1\",\"tags\":[\"a\"]}\n{\"url\":\"u2\",\"tags\":[\"a\"]}\n{not json\n";
        match load_corpus(input.as_bytes()) {
            Err(CorpusError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        let err = load_corpus(input.as_bytes()).unwrap_err();
        assert!(err.to_string().starts_with("line 3:"));
    }

    #[test]
    fn zero_count_rejected() {
        assert!(matches!(
            load_corpus(r#"{"url":"u","tags":{"a":0}}"#.as_bytes()),
            Err(CorpusError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn empty_input_is_empty_corpus() {
        let c = load("");
        assert!(c.bookmarks.is_empty());
        assert_eq!(c.duplicates_dropped, 0);
        let idx = build_index(c);
        assert!(idx.tag_universe().is_empty());
        assert!(idx.top_tags(5).is_empty());
    }

    #[test]
    fn c5_posting_sizes() {
        let idx = build_index(c5_corpus());
        let len = |t: &str| idx.postings_for(t).unwrap().len();
        assert_eq!(len("recipe"), 4);
        assert_eq!(len("cooking"), 3);
        assert_eq!(len("seafood"), 2);
        assert_eq!(idx.tag_universe(), ["cooking", "recipe", "seafood"]);
    }

    #[test]
    fn c5_cooccurrence() {
        let idx = build_index(c5_corpus());
        let id = |t: &str| idx.tag_id(t).unwrap();
        assert_eq!(idx.cooc(id("recipe"), id("cooking")), 2);
        assert_eq!(idx.cooc(id("recipe"), id("seafood")), 2);
        assert_eq!(idx.cooc(id("cooking"), id("seafood")), 1);
        assert_eq!(idx.cooc(id("seafood"), id("cooking")), 1);
        assert_eq!(idx.cooc(id("recipe"), id("recipe")), 0);
    }

    #[test]
    fn c5_fixture_shape() {
        let c = load(C5_JSONL);
        assert_eq!(c.bookmarks.len(), 5);
        let b2: Vec<&str> = c.bookmarks[1].tag_counts.keys().map(String::as_str).collect();
        assert_eq!(b2, ["cooking", "recipe", "seafood"]);
        assert!(c.bookmarks.iter().all(|b| b.tag_counts.values().all(|&n| n == 1)));
    }

    #[test]
    fn single_tag_bookmark_has_no_pairs() {
        let idx = build_index(load(r#"{"url":"u","tags":["only"]}"#));
        assert_eq!(idx.cooc_pairs().count(), 0);
    }

    #[test]
    fn top_tags_tie_break() {
        let idx = build_index(c5_corpus());
        assert_eq!(idx.top_tags(2), vec![("recipe", 4), ("cooking", 3)]);
        assert_eq!(idx.top_tags(10).len(), 3);
    }

    #[test]
    fn intersect_postings() {
        let idx = build_index(c5_corpus());
        let ids: Vec<TagId> = ["recipe", "seafood"].iter().map(|t| idx.tag_id(t).unwrap()).collect();
        assert_eq!(idx.intersect(&ids), vec![BookmarkId(1), BookmarkId(2)]);
        assert!(idx.intersect(&[]).is_empty());
    }
}
