//! Invariants of the index, hit-set views, clustering and query refinement,
//! checked against brute-force recomputation over small random corpora.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use tagclust_core::clustering::{complete_link, select_seed_pair, single_link};
use tagclust_core::query::{evaluate, hit_set};
use tagclust_core::{build_index, Bookmark, ClusterParams, Corpus, HitSetView, Linkage, Measure, Query, Ranking};

fn corpus_strategy(max_tags: usize, max_docs: usize) -> impl Strategy<Value = Corpus> {
    proptest::collection::vec(proptest::collection::btree_map(0..max_tags, 1u32..4, 1..6), 1..max_docs).prop_map(
        |docs| Corpus {
            bookmarks: docs
                .into_iter()
                .enumerate()
                .map(|(i, tags)| Bookmark {
                    url: format!("https://example.org/{i}"),
                    title: None,
                    tag_counts: tags.into_iter().map(|(t, c)| (format!("t{t:02}"), c)).collect(),
                })
                .collect(),
            duplicates_dropped: 0,
            malformed_dropped: 0,
        },
    )
}

fn brute_postings(corpus: &Corpus, tag: &str) -> BTreeSet<usize> {
    corpus
        .bookmarks
        .iter()
        .enumerate()
        .filter(|(_, b)| b.has_tag(tag))
        .map(|(i, _)| i)
        .collect()
}

fn brute_filter(corpus: &Corpus, terms: &[String]) -> BTreeSet<usize> {
    corpus
        .bookmarks
        .iter()
        .enumerate()
        .filter(|(_, b)| terms.iter().all(|t| b.has_tag(t)))
        .map(|(i, _)| i)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cooc_equals_posting_intersection(corpus in corpus_strategy(12, 40)) {
        let index = build_index(corpus.clone());
        let tags = index.tag_universe().to_vec();
        for x in &tags {
            let px = brute_postings(&corpus, x);
            prop_assert_eq!(index.postings_for(x).unwrap().len(), px.len());
            for y in &tags {
                if x == y { continue; }
                let g = px.intersection(&brute_postings(&corpus, y)).count() as u32;
                let (ix, iy) = (index.tag_id(x).unwrap(), index.tag_id(y).unwrap());
                prop_assert_eq!(index.cooc(ix, iy), g);
                prop_assert!(g <= px.len().min(brute_postings(&corpus, y).len()) as u32);
            }
        }
    }

    #[test]
    fn posting_total_matches_distinct_tags(corpus in corpus_strategy(12, 40)) {
        let expected: usize = corpus.bookmarks.iter().map(|b| b.tag_counts.len()).sum();
        let index = build_index(corpus);
        let total: usize = index.tag_universe().iter().map(|t| index.postings_for(t).unwrap().len()).sum();
        prop_assert_eq!(total, expected);
    }

    #[test]
    fn reindexing_is_deterministic(corpus in corpus_strategy(10, 30)) {
        prop_assert_eq!(build_index(corpus.clone()), build_index(corpus));
    }

    #[test]
    fn view_similarity_matches_filtered_subcorpus(corpus in corpus_strategy(8, 30), q in 0usize..8) {
        let index = build_index(corpus.clone());
        let base = format!("t{q:02}");
        let Ok(query) = Query::new(&base) else { return Ok(()); };
        let hits = hit_set(&index, &query);
        let view = HitSetView::new(&index, &hits);
        let sub: Vec<&Bookmark> = corpus.bookmarks.iter().filter(|b| b.has_tag(&base)).collect();
        let count = |t: &str| sub.iter().filter(|b| b.has_tag(t)).count() as u32;
        let both = |x: &str, y: &str| sub.iter().filter(|b| b.has_tag(x) && b.has_tag(y)).count() as u32;
        for x in index.tag_universe() {
            for y in index.tag_universe() {
                if x >= y || count(x) == 0 || count(y) == 0 { continue; }
                let (ix, iy) = (index.tag_id(x).unwrap(), index.tag_id(y).unwrap());
                for m in Measure::ALL {
                    let expected = m.coincidence(count(x), count(y), both(x, y)).unwrap().value();
                    prop_assert!((view.similarity(m, ix, iy) - expected).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn hit_set_matches_filter_and_shrinks(
        corpus in corpus_strategy(8, 40),
        terms in proptest::collection::vec(0usize..8, 1..4),
    ) {
        let index = build_index(corpus.clone());
        let terms: Vec<String> = terms.iter().map(|t| format!("t{t:02}")).collect();
        let mut query = Query::new(&terms[0]).unwrap();
        let mut previous: BTreeSet<usize> = hit_set(&index, &query).iter().map(|b| b.index()).collect();
        for t in &terms[1..] {
            query = query.refine_vertex(t).unwrap();
            let now: BTreeSet<usize> = hit_set(&index, &query).iter().map(|b| b.index()).collect();
            prop_assert!(now.is_subset(&previous));
            previous = now;
        }
        prop_assert_eq!(previous, brute_filter(&corpus, &query.terms()));
    }

    #[test]
    fn refinement_order_does_not_matter(
        corpus in corpus_strategy(6, 40),
        a in 0usize..6, b in 0usize..6, c in 0usize..6,
    ) {
        let index = build_index(corpus);
        let t = |i: usize| format!("t{i:02}");
        let q1 = Query::with_refinements(&t(a), [t(b), t(c)]).unwrap();
        let q2 = Query::with_refinements(&t(a), [t(c), t(b)]).unwrap();
        let params = ClusterParams::new(Measure::Cosine, Linkage::SingleLink, 0.3, 1).unwrap();
        let e1 = evaluate(&index, &q1, &params, Ranking::Absolute);
        let e2 = evaluate(&index, &q2, &params, Ranking::Absolute);
        prop_assert_eq!(&e1.hits, &e2.hits);
        prop_assert_eq!(&e1.graph, &e2.graph);
        prop_assert_eq!(&e1.ranked, &e2.ranked);
    }

    #[test]
    fn single_link_is_connected_and_monotone(corpus in corpus_strategy(10, 40), m in 0usize..3) {
        let index = build_index(corpus);
        let view = HitSetView::whole(&index);
        let measure = Measure::ALL[m];
        let Ok(seeds) = select_seed_pair(&view, measure, 1) else { return Ok(()); };
        let mut previous: Option<BTreeSet<String>> = None;
        for t in [0.9, 0.7, 0.5, 0.3, 0.1, 0.0] {
            let p = ClusterParams::new(measure, Linkage::SingleLink, t, 1).unwrap();
            let g = single_link(&view, &seeds, &p).unwrap();
            prop_assert!(g.is_connected());
            let vs: BTreeSet<String> = g.vertex_tags().map(str::to_owned).collect();
            if let Some(prev) = &previous {
                prop_assert!(prev.is_subset(&vs));
            }
            previous = Some(vs);
        }
    }

    #[test]
    fn complete_link_members_pairwise_above_threshold(corpus in corpus_strategy(10, 40), t in 0.0f64..1.0) {
        let index = build_index(corpus);
        let view = HitSetView::whole(&index);
        let Ok(seeds) = select_seed_pair(&view, Measure::Dice, 1) else { return Ok(()); };
        let p = ClusterParams::new(Measure::Dice, Linkage::CompleteLink, t, 1).unwrap();
        let Ok(g) = complete_link(&view, &seeds, &p) else { return Ok(()); };
        let n = g.vertices().len();
        prop_assert_eq!(g.edges().len(), n * (n - 1) / 2);
        let phis: BTreeMap<(&str, &str), f64> =
            g.edges().iter().map(|e| ((e.a.as_str(), e.b.as_str()), e.phi)).collect();
        for phi in phis.values() {
            prop_assert!(*phi >= t);
        }
    }

    #[test]
    fn clustering_is_deterministic(corpus in corpus_strategy(10, 30), m in 0usize..3) {
        let index = build_index(corpus);
        let view = HitSetView::whole(&index);
        for method in Linkage::ALL {
            let p = ClusterParams::new(Measure::ALL[m], method, 0.4, 1).unwrap();
            let a = tagclust_core::clustering::cluster(&view, &p);
            let b = tagclust_core::clustering::cluster(&view, &p);
            prop_assert_eq!(a, b);
        }
    }
}
