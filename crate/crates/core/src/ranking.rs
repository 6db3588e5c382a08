//! Hit ordering by accumulated tag counts or by WDF*ITF.
//!
//! WDF*ITF scores a bookmark `b` for query tags `t` as
//!
//! ```text
//! sum_t  log2(freq(t,b) + 1) / log2(L(b))  *  (log2(M / m(t)) + 1)
//! ```
//!
//! where `L(b)` is the bookmark's total tag count, and `M` and `m(t)` are
//! the total tag count and the count of `t` over the *initial* hit set.
//! A bookmark with `L(b) = 1` gets WDF 1.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Bookmark, BookmarkId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RankingError {
    #[error("no query tags to rank by")]
    EmptyQuery,
    #[error("hit {url} does not carry query tag {tag:?}")]
    MissingTag { url: String, tag: String },
    #[error("query tag {0:?} does not occur in the ranking statistics")]
    UnknownTag(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ranking {
    #[default]
    Absolute,
    WdfItf,
}

impl Ranking {
    pub fn as_str(self) -> &'static str {
        match self {
            Ranking::Absolute => "absolute",
            Ranking::WdfItf => "wdf_itf",
        }
    }
}

impl fmt::Display for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
#[error("unknown ranking {0:?} (expected absolute or wdf_itf)")]
pub struct ParseRankingError(String);

impl FromStr for Ranking {
    type Err = ParseRankingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "absolute" => Ok(Ranking::Absolute),
            "wdf_itf" => Ok(Ranking::WdfItf),
            other => Err(ParseRankingError(other.to_string())),
        }
    }
}

/// Tag token totals of a hit set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HitSetStats {
    /// Sum of `L(b)` over the hits.
    pub total_tokens: u64,
    /// Per-tag sum of `freq(t, b)` over the hits.
    pub tag_occurrences: BTreeMap<String, u64>,
}

impl HitSetStats {
    pub fn from_bookmarks<'a, I>(bookmarks: I) -> Self
    where
        I: IntoIterator<Item = &'a Bookmark>,
    {
        let mut stats = HitSetStats::default();
        for b in bookmarks {
            for (tag, &count) in &b.tag_counts {
                *stats.tag_occurrences.entry(tag.clone()).or_insert(0) += u64::from(count);
                stats.total_tokens += u64::from(count);
            }
        }
        stats
    }

    pub fn occurrences(&self, tag: &str) -> u64 {
        self.tag_occurrences.get(tag).copied().unwrap_or(0)
    }
}

/// A bookmark in the hit set together with its id.
#[derive(Debug, Clone, Copy)]
pub struct Hit<'a> {
    pub id: BookmarkId,
    pub bookmark: &'a Bookmark,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedHit {
    pub id: BookmarkId,
    pub score: f64,
    /// 1-based.
    pub rank: usize,
}

pub fn wdf(freq: u32, total_tags: u64) -> f64 {
    if total_tags <= 1 {
        return 1.0;
    }
    (f64::from(freq) + 1.0).log2() / (total_tags as f64).log2()
}

pub fn itf(total_tokens: u64, occurrences: u64) -> f64 {
    (total_tokens as f64 / occurrences as f64).log2() + 1.0
}

fn check_hits(hits: &[Hit<'_>], query_tags: &[String]) -> Result<(), RankingError> {
    if query_tags.is_empty() {
        return Err(RankingError::EmptyQuery);
    }
    for hit in hits {
        if let Some(tag) = query_tags.iter().find(|t| !hit.bookmark.has_tag(t)) {
            return Err(RankingError::MissingTag {
                url: hit.bookmark.url.clone(),
                tag: tag.clone(),
            });
        }
    }
    Ok(())
}

/// Sorts by score descending, then larger `L(b)`, then url.
fn order(hits: &[Hit<'_>], scores: Vec<f64>) -> Vec<RankedHit> {
    let mut scored: Vec<(&Hit<'_>, f64)> = hits.iter().zip(scores).collect();
    scored.sort_by(|(ha, sa), (hb, sb)| {
        sb.partial_cmp(sa)
            .unwrap_or(Ordering::Equal)
            .then_with(|| hb.bookmark.total_tags().cmp(&ha.bookmark.total_tags()))
            .then_with(|| ha.bookmark.url.cmp(&hb.bookmark.url))
    });
    scored
        .into_iter()
        .enumerate()
        .map(|(i, (hit, score))| RankedHit {
            id: hit.id,
            score,
            rank: i + 1,
        })
        .collect()
}

/// Scores each hit by the summed counts of the query tags.
pub fn rank_absolute(hits: &[Hit<'_>], query_tags: &[String]) -> Result<Vec<RankedHit>, RankingError> {
    check_hits(hits, query_tags)?;
    let scores = hits
        .iter()
        .map(|h| query_tags.iter().map(|t| f64::from(h.bookmark.freq(t))).sum())
        .collect();
    Ok(order(hits, scores))
}

pub fn rank_wdf_itf(
    hits: &[Hit<'_>],
    query_tags: &[String],
    stats: &HitSetStats,
) -> Result<Vec<RankedHit>, RankingError> {
    check_hits(hits, query_tags)?;
    let mut weights = Vec::with_capacity(query_tags.len());
    for tag in query_tags {
        let m = stats.occurrences(tag);
        if m == 0 {
            return Err(RankingError::UnknownTag(tag.clone()));
        }
        weights.push(itf(stats.total_tokens, m));
    }
    let scores = hits
        .iter()
        .map(|h| {
            let len = h.bookmark.total_tags();
            query_tags
                .iter()
                .zip(&weights)
                .map(|(t, w)| wdf(h.bookmark.freq(t), len) * w)
                .sum()
        })
        .collect();
    Ok(order(hits, scores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::c5_corpus;
    use proptest::prelude::*;

    fn bookmark(url: &str, tags: &[(&str, u32)]) -> Bookmark {
        Bookmark {
            url: url.into(),
            title: None,
            tag_counts: tags.iter().map(|&(t, c)| (t.to_string(), c)).collect(),
        }
    }

    fn hits(bs: &[Bookmark]) -> Vec<Hit<'_>> {
        bs.iter()
            .enumerate()
            .map(|(i, b)| Hit {
                id: BookmarkId(i as u32),
                bookmark: b,
            })
            .collect()
    }

    fn q(tags: &[&str]) -> Vec<String> {
        tags.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn absolute_sums_counts() {
        let bs = vec![
            bookmark("b3", &[("recipe", 3), ("seafood", 5)]),
            bookmark("b2", &[("recipe", 10), ("seafood", 4)]),
        ];
        let ranked = rank_absolute(&hits(&bs), &q(&["recipe", "seafood"])).unwrap();
        assert_eq!(ranked[0].id, BookmarkId(1));
        assert_eq!(ranked[0].score, 14.0);
        assert_eq!(ranked[1].score, 8.0);
        assert_eq!(ranked[1].rank, 2);
    }

    #[test]
    fn absolute_uniform_counts_fall_to_tie_break() {
        let bs = vec![
            bookmark("u-b", &[("a", 1), ("b", 1)]),
            bookmark("u-a", &[("a", 1), ("b", 1)]),
            bookmark("u-c", &[("a", 1), ("b", 1), ("c", 1)]),
        ];
        let ranked = rank_absolute(&hits(&bs), &q(&["a", "b"])).unwrap();
        assert!(ranked.iter().all(|r| r.score == 2.0));
        let order: Vec<u32> = ranked.iter().map(|r| r.id.0).collect();
        assert_eq!(order, [2, 1, 0]);
    }

    #[test]
    fn single_hit_ranks_first() {
        let bs = vec![bookmark("x", &[("a", 7)])];
        let ranked = rank_absolute(&hits(&bs), &q(&["a"])).unwrap();
        assert_eq!(ranked.len(), 1);
        assert_eq!(ranked[0].rank, 1);
    }

    #[test]
    fn empty_query_is_an_error() {
        let bs = vec![bookmark("x", &[("a", 1)])];
        assert_eq!(rank_absolute(&hits(&bs), &[]), Err(RankingError::EmptyQuery));
        assert!(matches!(
            rank_absolute(&hits(&bs), &q(&["b"])),
            Err(RankingError::MissingTag { .. })
        ));
    }

    fn c5_recipe_subset() -> Vec<Bookmark> {
        c5_corpus().bookmarks.into_iter().take(3).collect()
    }

    #[test]
    fn wdf_itf_c5_example() {
        let bs = c5_recipe_subset();
        let stats = HitSetStats::from_bookmarks(&bs);
        assert_eq!(stats.total_tokens, 7);
        assert_eq!(stats.occurrences("recipe"), 3);
        let ranked = rank_wdf_itf(&hits(&bs), &q(&["recipe"]), &stats).unwrap();
        // Recomputed independently with natural logs: the base cancels in the
        // WDF ratio, and ITF = ln(7/3)/ln 2 + 1.
        let itf_expected = (7.0f64 / 3.0).ln() / 2f64.ln() + 1.0;
        let wdf_b2 = 2f64.ln() / 3f64.ln();
        let by_id: BTreeMap<u32, f64> = ranked.iter().map(|r| (r.id.0, r.score)).collect();
        assert!((by_id[&0] - itf_expected).abs() < 1e-12);
        assert!((by_id[&1] - wdf_b2 * itf_expected).abs() < 1e-12);
        assert!((by_id[&2] - itf_expected).abs() < 1e-12);
        assert!((by_id[&0] - 2.2224).abs() < 1e-3);
        assert!((by_id[&1] - 1.4022).abs() < 1e-3);
        let order: Vec<u32> = ranked.iter().map(|r| r.id.0).collect();
        assert_eq!(order, [0, 2, 1]);
    }

    #[test]
    fn doubling_counts_preserves_order() {
        let bs = c5_recipe_subset();
        let doubled: Vec<Bookmark> = bs
            .iter()
            .map(|b| Bookmark {
                tag_counts: b.tag_counts.iter().map(|(t, c)| (t.clone(), c * 2)).collect(),
                ..b.clone()
            })
            .collect();
        let r1 = rank_wdf_itf(&hits(&bs), &q(&["recipe"]), &HitSetStats::from_bookmarks(&bs)).unwrap();
        let r2 = rank_wdf_itf(&hits(&doubled), &q(&["recipe"]), &HitSetStats::from_bookmarks(&doubled)).unwrap();
        let ids = |r: &[RankedHit]| r.iter().map(|h| h.id).collect::<Vec<_>>();
        assert_eq!(ids(&r1), ids(&r2));
        assert!((r1[0].score - r2[0].score).abs() > 1e-6);
    }

    #[test]
    fn itf_is_one_for_sole_tag() {
        assert_eq!(itf(12, 12), 1.0);
        assert_eq!(wdf(1, 1), 1.0);
    }

    #[test]
    fn ranking_names_round_trip() {
        for r in [Ranking::Absolute, Ranking::WdfItf] {
            assert_eq!(r.as_str().parse::<Ranking>().unwrap(), r);
        }
    }

    proptest! {
        #[test]
        fn wdf_in_unit_interval(counts in proptest::collection::vec(1u32..20, 2..8), pick in 0usize..8) {
            let len: u64 = counts.iter().map(|&c| u64::from(c)).sum();
            let freq = counts[pick % counts.len()];
            // freq + 1 <= L holds whenever the bookmark has at least two tags.
            let w = wdf(freq, len);
            prop_assert!(w > 0.0 && w <= 1.0, "wdf={w} freq={freq} len={len}");
        }

        #[test]
        fn absolute_ranking_ignores_input_order(
            counts in proptest::collection::vec((1u32..10, 1u32..10), 1..12),
            seed in any::<u64>(),
        ) {
            let bs: Vec<Bookmark> = counts
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| bookmark(&format!("u{i:02}"), &[("x", x), ("y", y)]))
                .collect();
            let mut shuffled = bs.clone();
            let n = shuffled.len();
            shuffled.rotate_left((seed as usize) % n);
            let query = q(&["x", "y"]);
            let urls = |v: &[Bookmark]| {
                let h = hits(v);
                rank_absolute(&h, &query)
                    .unwrap()
                    .iter()
                    .map(|r| (v[r.id.0 as usize].url.clone(), r.score))
                    .collect::<Vec<_>>()
            };
            prop_assert_eq!(urls(&bs), urls(&shuffled));
        }
    }
}
