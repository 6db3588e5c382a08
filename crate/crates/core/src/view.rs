//! Tag statistics restricted to a subset of bookmarks (usually a query's hits).

use std::cmp::Reverse;
use std::collections::HashMap;

use crate::corpus::{pair_key, BookmarkId, FolksonomyIndex, TagId};
use crate::ranking::HitSetStats;
use crate::similarity::Measure;

/// Bookmark counts `a`, pair co-occurrences `g` and token statistics over a
/// fixed set of hits.
#[derive(Debug, Clone)]
pub struct HitSetView<'a> {
    index: &'a FolksonomyIndex,
    hits: Vec<BookmarkId>,
    doc_freq: HashMap<TagId, u32>,
    cooc: HashMap<(TagId, TagId), u32>,
    /// All tags of the view, most frequent first, ties by tag order.
    by_frequency: Vec<TagId>,
    /// Co-occurring tags of each tag, in `by_frequency` order.
    neighbors: HashMap<TagId, Vec<TagId>>,
    stats: HitSetStats,
}

impl<'a> HitSetView<'a> {
    /// `hits` need not be sorted; duplicates are ignored.
    pub fn new(index: &'a FolksonomyIndex, hits: &[BookmarkId]) -> Self {
        let mut hits = hits.to_vec();
        hits.sort_unstable();
        hits.dedup();

        let mut doc_freq: HashMap<TagId, u32> = HashMap::new();
        let mut cooc: HashMap<(TagId, TagId), u32> = HashMap::new();
        for &id in &hits {
            let tags = index.bookmark_tags(id);
            for (pos, &(tag, _)) in tags.iter().enumerate() {
                *doc_freq.entry(tag).or_insert(0) += 1;
                for &(other, _) in &tags[pos + 1..] {
                    *cooc.entry((tag, other)).or_insert(0) += 1;
                }
            }
        }

        let mut by_frequency: Vec<TagId> = doc_freq.keys().copied().collect();
        by_frequency.sort_unstable_by_key(|t| (Reverse(doc_freq[t]), *t));
        let position: HashMap<TagId, usize> = by_frequency.iter().enumerate().map(|(i, &t)| (t, i)).collect();

        let mut neighbors: HashMap<TagId, Vec<TagId>> = HashMap::new();
        for &(x, y) in cooc.keys() {
            neighbors.entry(x).or_default().push(y);
            neighbors.entry(y).or_default().push(x);
        }
        for list in neighbors.values_mut() {
            list.sort_unstable_by_key(|t| position[t]);
        }

        let stats = HitSetStats::from_bookmarks(hits.iter().map(|&id| index.bookmark(id)));

        Self {
            index,
            hits,
            doc_freq,
            cooc,
            by_frequency,
            neighbors,
            stats,
        }
    }

    /// View over every bookmark of the index.
    pub fn whole(index: &'a FolksonomyIndex) -> Self {
        let all: Vec<BookmarkId> = (0..index.bookmark_count() as u32).map(BookmarkId).collect();
        Self::new(index, &all)
    }

    pub fn index(&self) -> &'a FolksonomyIndex {
        self.index
    }

    /// Sorted, deduplicated hit ids.
    pub fn hits(&self) -> &[BookmarkId] {
        &self.hits
    }

    pub fn hit_count(&self) -> usize {
        self.hits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }

    /// Number of hits carrying `tag`.
    pub fn doc_freq(&self, tag: TagId) -> u32 {
        self.doc_freq.get(&tag).copied().unwrap_or(0)
    }

    /// Number of hits carrying both tags.
    pub fn cooc(&self, x: TagId, y: TagId) -> u32 {
        if x == y {
            return 0;
        }
        self.cooc.get(&pair_key(x, y)).copied().unwrap_or(0)
    }

    /// Coincidence value of two distinct tags within the hits; 0 when either
    /// tag is absent.
    pub fn similarity(&self, measure: Measure, x: TagId, y: TagId) -> f64 {
        measure
            .coincidence(self.doc_freq(x), self.doc_freq(y), self.cooc(x, y))
            .map(f64::from)
            .unwrap_or(0.0)
    }

    pub fn tags_by_frequency(&self) -> &[TagId] {
        &self.by_frequency
    }

    /// Tags sharing at least one hit with `tag`, most frequent first.
    pub fn neighbors(&self, tag: TagId) -> &[TagId] {
        self.neighbors.get(&tag).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Every co-occurring pair `(x, y, g)` with `x < y`, in no particular order.
    pub fn pairs(&self) -> impl Iterator<Item = (TagId, TagId, u32)> + '_ {
        self.cooc.iter().map(|(&(x, y), &g)| (x, y, g))
    }

    pub fn stats(&self) -> &HitSetStats {
        &self.stats
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::build_index;
    use crate::fixtures::c5_corpus;

    #[test]
    fn restricted_counts_on_recipe_hits() {
        let idx = build_index(c5_corpus());
        let id = |t: &str| idx.tag_id(t).unwrap();
        let hits = idx.postings(id("recipe")).to_vec();
        let view = HitSetView::new(&idx, &hits);
        assert_eq!(view.hit_count(), 4);
        assert_eq!(view.doc_freq(id("recipe")), 4);
        assert_eq!(view.doc_freq(id("cooking")), 2);
        assert_eq!(view.doc_freq(id("seafood")), 2);
        assert_eq!(view.cooc(id("cooking"), id("seafood")), 1);
        let phi = view.similarity(Measure::Cosine, id("cooking"), id("seafood"));
        assert!((phi - 0.5).abs() < 1e-12);
        assert_eq!(view.stats().total_tokens, 8);
    }

    #[test]
    fn frequency_order_breaks_ties_lexicographically() {
        let idx = build_index(c5_corpus());
        let view = HitSetView::whole(&idx);
        let names: Vec<&str> = view.tags_by_frequency().iter().map(|&t| idx.tag_name(t)).collect();
        assert_eq!(names, ["recipe", "cooking", "seafood"]);
        let seafood = idx.tag_id("seafood").unwrap();
        let nb: Vec<&str> = view.neighbors(seafood).iter().map(|&t| idx.tag_name(t)).collect();
        assert_eq!(nb, ["recipe", "cooking"]);
    }

    #[test]
    fn absent_tag_similarity_is_zero() {
        let idx = build_index(c5_corpus());
        let b4 = [BookmarkId(3)];
        let view = HitSetView::new(&idx, &b4);
        let recipe = idx.tag_id("recipe").unwrap();
        let cooking = idx.tag_id("cooking").unwrap();
        assert_eq!(view.similarity(Measure::Dice, recipe, cooking), 0.0);
        assert!(view.neighbors(cooking).is_empty());
    }
}
