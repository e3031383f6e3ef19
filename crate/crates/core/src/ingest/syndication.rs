use std::collections::{BTreeMap, BTreeSet};

use chrono::Duration;

use super::NewsMention;

/// Trims and collapses internal whitespace; comparison stays case-sensitive.
pub fn normalize_title(title: &str) -> String {
    title.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Undirected outlet graph; an edge counts identical-title collisions
/// between two outlets within the window.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SyndicationGraph {
    pub nodes: BTreeSet<String>,
    /// Keyed by `(min, max)` domain pair.
    pub edges: BTreeMap<(String, String), u64>,
}

impl SyndicationGraph {
    pub fn weight(&self, a: &str, b: &str) -> u64 {
        let key = if a <= b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        };
        self.edges.get(&key).copied().unwrap_or(0)
    }
}

fn title_groups(news: &[NewsMention]) -> BTreeMap<String, Vec<usize>> {
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, n) in news.iter().enumerate() {
        groups.entry(normalize_title(&n.title)).or_default().push(i);
    }
    groups
}

pub fn build_syndication_graph(news: &[NewsMention], window: Duration) -> SyndicationGraph {
    let mut graph = SyndicationGraph::default();
    for n in news {
        graph.nodes.insert(n.outlet_domain.clone());
    }
    for (_, mut members) in title_groups(news) {
        members.sort_by_key(|&i| news[i].timestamp);
        for (k, &i) in members.iter().enumerate() {
            for &j in &members[k + 1..] {
                if news[j].timestamp - news[i].timestamp > window {
                    break;
                }
                let (a, b) = (&news[i].outlet_domain, &news[j].outlet_domain);
                if a == b {
                    continue;
                }
                let key = if a < b {
                    (a.clone(), b.clone())
                } else {
                    (b.clone(), a.clone())
                };
                *graph.edges.entry(key).or_insert(0) += 1;
            }
        }
    }
    graph
}

/// Keeps one mention per normalized title: earliest timestamp, then most
/// daily visits (missing counts as 0), then smallest outlet domain.
/// Survivors keep their input order.
pub fn dedup_syndication(news: &[NewsMention]) -> Vec<NewsMention> {
    let mut keep = vec![false; news.len()];
    for (_, members) in title_groups(news) {
        let best = members
            .iter()
            .copied()
            .min_by(|&a, &b| {
                let (x, y) = (&news[a], &news[b]);
                x.timestamp
                    .cmp(&y.timestamp)
                    .then_with(|| {
                        y.daily_visits
                            .unwrap_or(0)
                            .cmp(&x.daily_visits.unwrap_or(0))
                    })
                    .then_with(|| x.outlet_domain.cmp(&y.outlet_domain))
                    .then_with(|| x.article_id.cmp(&y.article_id))
            })
            .expect("title group is nonempty");
        keep[best] = true;
    }
    news.iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(n, _)| n.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Timestamp;
    use proptest::prelude::*;

    fn mention(
        id: &str,
        outlet: &str,
        minute: i64,
        title: &str,
        visits: Option<u64>,
    ) -> NewsMention {
        let base: Timestamp = "2021-06-01T00:00:00Z".parse().unwrap();
        NewsMention {
            article_id: id.into(),
            outlet_domain: outlet.into(),
            timestamp: base + Duration::minutes(minute),
            title: title.into(),
            dois: Default::default(),
            trust_score: None,
            daily_visits: visits,
        }
    }

    #[test]
    fn window_edges() {
        let hour = Duration::hours(1);
        let g = build_syndication_graph(
            &[
                mention("1", "a.com", 0, "Same", None),
                mention("2", "b.com", 30, "Same", None),
            ],
            hour,
        );
        assert_eq!(g.weight("a.com", "b.com"), 1);
        assert_eq!(g.weight("b.com", "a.com"), 1);
        let g = build_syndication_graph(
            &[
                mention("1", "a.com", 0, "Same", None),
                mention("2", "b.com", 120, "Same", None),
            ],
            hour,
        );
        assert!(g.edges.is_empty());
        assert_eq!(g.nodes.len(), 2);
    }

    #[test]
    fn whitespace_is_collapsed_but_case_kept() {
        assert_eq!(normalize_title("  New   study\tfinds "), "New study finds");
        assert_ne!(normalize_title("Study"), normalize_title("study"));
    }

    fn brute_force(news: &[NewsMention], window: Duration) -> BTreeMap<(String, String), u64> {
        let mut edges = BTreeMap::new();
        for i in 0..news.len() {
            for j in 0..news.len() {
                let (a, b) = (&news[i], &news[j]);
                if a.outlet_domain < b.outlet_domain
                    && normalize_title(&a.title) == normalize_title(&b.title)
                    && (a.timestamp - b.timestamp).abs() <= window
                {
                    *edges
                        .entry((a.outlet_domain.clone(), b.outlet_domain.clone()))
                        .or_insert(0) += 1;
                }
            }
        }
        edges
    }

    #[test]
    fn five_outlets_three_titles_match_brute_force() {
        let titles = ["Vaccine study", "Mask  study", "Variant paper"];
        let outlets = ["a.com", "b.com", "c.com", "d.com", "e.com"];
        let mut news = Vec::new();
        let mut id = 0;
        for (t, title) in titles.iter().enumerate() {
            for (o, outlet) in outlets.iter().enumerate() {
                id += 1;
                let minute = (o as i64 * 25 + t as i64 * 7) % 150;
                news.push(mention(&id.to_string(), outlet, minute, title, None));
            }
        }
        let g = build_syndication_graph(&news, Duration::hours(1));
        assert_eq!(g.edges, brute_force(&news, Duration::hours(1)));
        assert!(!g.edges.is_empty());
    }

    #[test]
    fn earliest_then_most_popular_survives() {
        let out = dedup_syndication(&[
            mention("late", "a.com", 10, "T", Some(9999)),
            mention("early", "b.com", 0, "T", Some(1)),
        ]);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].article_id, "early");

        let out = dedup_syndication(&[
            mention("small", "a.com", 0, "T", Some(10)),
            mention("big", "z.com", 0, "T", Some(1000)),
        ]);
        assert_eq!(out[0].article_id, "big");

        let out = dedup_syndication(&[
            mention("unknown", "a.com", 0, "T", None),
            mention("known", "z.com", 0, "T", Some(1)),
        ]);
        assert_eq!(out[0].article_id, "known");
    }

    #[test]
    fn distinct_titles_pass_through() {
        let news = vec![
            mention("1", "a.com", 0, "One", None),
            mention("2", "a.com", 1, "Two", None),
        ];
        assert_eq!(dedup_syndication(&news), news);
    }

    proptest! {
        #[test]
        fn dedup_is_idempotent_and_conserving(
            rows in prop::collection::vec((0usize..4, 0usize..5, 0i64..200, prop::option::of(0u64..50)), 0..40)
        ) {
            let news: Vec<NewsMention> = rows
                .iter()
                .enumerate()
                .map(|(i, &(t, o, m, v))| mention(&i.to_string(), &format!("o{o}.com"), m, &format!("title {t}"), v))
                .collect();
            let once = dedup_syndication(&news);
            let twice = dedup_syndication(&once);
            prop_assert_eq!(&once, &twice);
            let titles: BTreeSet<String> = once.iter().map(|n| normalize_title(&n.title)).collect();
            prop_assert_eq!(titles.len(), once.len());
            let all: BTreeSet<String> = news.iter().map(|n| normalize_title(&n.title)).collect();
            prop_assert_eq!(all.len(), once.len());

            let g = build_syndication_graph(&news, Duration::hours(1));
            prop_assert_eq!(&g.edges, &brute_force(&news, Duration::hours(1)));
        }
    }
}
