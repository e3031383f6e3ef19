//! Independent reference implementations shared by the integration and
//! acceptance targets. None of these call into the library's numerics.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use chrono::{Duration, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sciflow::coactivity::{self, CoRetweetParams};
use sciflow::ingest::{Corpus, PostEvent, PostKind, Timestamp};

fn post(id: String, author: &str, ts: Timestamp, target: Option<(&str, &str)>) -> PostEvent {
    PostEvent {
        post_id: id,
        author_id: author.to_string(),
        timestamp: ts,
        kind: if target.is_some() {
            PostKind::Retweet
        } else {
            PostKind::Original
        },
        retweeted_post_id: target.map(|t| t.0.to_string()),
        retweeted_author_id: target.map(|t| t.1.to_string()),
        dois: BTreeSet::new(),
        topic_label: None,
        emotion_label: None,
        terms: vec!["x".into()],
        hashtags: Vec::new(),
    }
}

/// `users` accounts retweeting six source posts at random times over three
/// days; a few self retweets by the source are mixed in.
pub fn random_retweet_corpus(seed: u64, users: usize) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t0 = Utc.with_ymd_and_hms(2021, 3, 1, 0, 0, 0).unwrap();
    let sources: Vec<String> = (0..6).map(|i| format!("s{i}")).collect();
    let mut posts: Vec<PostEvent> = sources
        .iter()
        .map(|s| post(s.clone(), "src", t0, None))
        .collect();
    let mut n = 0;
    for u in 0..users {
        let id = format!("u{u}");
        for _ in 0..rng.random_range(2..25) {
            let s = &sources[rng.random_range(0..sources.len())];
            let at = t0 + Duration::seconds(rng.random_range(1..72 * 3600));
            posts.push(post(format!("r{n}"), &id, at, Some((s, "src"))));
            n += 1;
        }
    }
    for k in 0..3 {
        posts.push(post(
            format!("self{k}"),
            "src",
            t0 + Duration::hours(k),
            Some((&sources[0], "src")),
        ));
    }
    Corpus::from_records(Vec::new(), posts, Vec::new())
        .unwrap()
        .0
}

/// Dense double-loop TF-IDF cosine over windowed retweet counts, keyed by
/// ordered user pair.
pub fn cosine_oracle(
    corpus: &Corpus,
    params: &CoRetweetParams,
) -> (Vec<String>, BTreeMap<(String, String), f64>) {
    let kept: Vec<&PostEvent> = corpus
        .posts()
        .iter()
        .filter(|p| p.kind == PostKind::Retweet)
        .filter(|p| {
            params.include_self_retweets || p.retweeted_author_id.as_deref() != Some(&p.author_id)
        })
        .collect();
    let mut per_user: BTreeMap<&str, usize> = BTreeMap::new();
    let mut per_post: BTreeMap<&str, usize> = BTreeMap::new();
    for p in &kept {
        *per_user.entry(&p.author_id).or_default() += 1;
        *per_post
            .entry(p.retweeted_post_id.as_deref().unwrap())
            .or_default() += 1;
    }
    let users: Vec<String> = per_user
        .iter()
        .filter(|(_, c)| **c >= params.min_user_retweets)
        .map(|(u, _)| u.to_string())
        .collect();
    let origin = corpus
        .posts()
        .iter()
        .map(|p| p.timestamp)
        .chain(corpus.news().iter().map(|n| n.timestamp))
        .min()
        .unwrap();
    let w = params.window.num_milliseconds();
    let mut counts: BTreeMap<(String, i64, String), f64> = BTreeMap::new();
    for p in &kept {
        let target = p.retweeted_post_id.clone().unwrap();
        if !users.contains(&p.author_id) || per_post[target.as_str()] < params.min_post_retweets {
            continue;
        }
        let ms = (p.timestamp - origin).num_milliseconds();
        *counts
            .entry((p.author_id.clone(), ms.div_euclid(w), target))
            .or_default() += 1.0;
    }
    let columns: Vec<(i64, String)> = counts
        .keys()
        .map(|(_, w, t)| (*w, t.clone()))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut m = vec![vec![0.0; columns.len()]; users.len()];
    for ((u, win, t), c) in &counts {
        let i = users.iter().position(|x| x == u).unwrap();
        let j = columns
            .iter()
            .position(|x| x.0 == *win && &x.1 == t)
            .unwrap();
        m[i][j] = *c;
    }
    let n = users.len() as f64;
    for j in 0..columns.len() {
        let df = m.iter().filter(|row| row[j] > 0.0).count() as f64;
        let idf = ((1.0 + n) / (1.0 + df)).ln() + 1.0;
        for row in m.iter_mut() {
            row[j] *= idf;
        }
    }
    let mut sims = BTreeMap::new();
    for a in 0..users.len() {
        for b in 0..users.len() {
            if a == b {
                continue;
            }
            let dot: f64 = (0..columns.len()).map(|j| m[a][j] * m[b][j]).sum();
            let na: f64 = m[a].iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb: f64 = m[b].iter().map(|x| x * x).sum::<f64>().sqrt();
            let c = if na == 0.0 || nb == 0.0 {
                0.0
            } else {
                dot / (na * nb)
            };
            sims.insert((users[a].clone(), users[b].clone()), c);
        }
    }
    (users, sims)
}

/// Largest absolute gap between library edge weights and the oracle; `None`
/// if the node sets differ.
pub fn cosine_gap(corpus: &Corpus, params: &CoRetweetParams) -> Option<f64> {
    let g = coactivity::build_coretweet_graph(corpus, params)
        .unwrap()
        .graph;
    let (users, sims) = cosine_oracle(corpus, params);
    if g.nodes() != users.as_slice() {
        return None;
    }
    let mut gap: f64 = 0.0;
    for ((a, b), want) in &sims {
        let got = g.weight(g.node_index(a).unwrap(), g.node_index(b).unwrap());
        gap = gap.max((got - want).abs());
    }
    Some(gap)
}

pub fn h_index_brute(counts: &[u64]) -> u64 {
    (0..=counts.len() as u64)
        .filter(|&h| counts.iter().filter(|&&c| c >= h).count() as u64 >= h)
        .max()
        .unwrap_or(0)
}

/// Exhaustive minimal interval over grid index pairs: fewest steps, then
/// earliest start, with trapezoid mass at least `min_mass`.
pub fn brute_interval(grid: &[f64], density: &[f64], min_mass: f64) -> (usize, usize) {
    let n = grid.len();
    let mut best = (0, n - 1);
    for i in 0..n {
        let mut mass = 0.0;
        for j in i + 1..n {
            mass += 0.5 * (density[j - 1] + density[j]) * (grid[j] - grid[j - 1]);
            if mass >= min_mass - 1e-12 {
                if j - i < best.1 - best.0 {
                    best = (i, j);
                }
                break;
            }
        }
    }
    best
}

/// Every entry of two directories, compared byte for byte.
pub fn dirs_identical(a: &std::path::Path, b: &std::path::Path) -> bool {
    let list = |d: &std::path::Path| {
        let mut v: Vec<_> = std::fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        v.sort();
        v
    };
    let (la, lb) = (list(a), list(b));
    la == lb
        && la
            .iter()
            .all(|f| std::fs::read(a.join(f)).unwrap() == std::fs::read(b.join(f)).unwrap())
}
