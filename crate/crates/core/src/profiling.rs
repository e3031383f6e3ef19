//! Topical concentration, vocabulary and emotion profiles, and bot-score
//! comparisons for user groups.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{Corpus, Emotion, PostEvent, UserRecord};
use crate::par;
use crate::spreaders::{bootstrap_profile_test, iteration_rng, sample_indices, GroupComparison};
use crate::stats::{self, welch_t};

/// Which posts count toward a group's topic distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventBase {
    #[default]
    Retweets,
    Originals,
    All,
}

impl EventBase {
    fn admits(&self, p: &PostEvent) -> bool {
        match self {
            EventBase::Retweets => p.is_retweet(),
            EventBase::Originals => !p.is_retweet(),
            EventBase::All => true,
        }
    }
}

impl std::str::FromStr for EventBase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "retweets" => Ok(EventBase::Retweets),
            "originals" => Ok(EventBase::Originals),
            "all" => Ok(EventBase::All),
            other => Err(Error::InvalidParameter(format!(
                "unknown event base `{other}`"
            ))),
        }
    }
}

pub const DEFAULT_STOPLIST: &str = include_str!("../data/stoplist.txt");

pub fn parse_stoplist(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect()
}

pub const DEFAULT_BOT_MARKERS: [&str; 8] = [
    "bot", "science", "paper", "hub", "medrxiv", "biorxiv", "preprint", "article",
];

pub fn gini(values: &[f64]) -> Result<f64> {
    stats::gini(values)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicDistribution {
    pub group: String,
    pub counts: BTreeMap<String, u64>,
    pub shares: BTreeMap<String, f64>,
    pub gini: f64,
}

/// All topic labels appearing on posts of the given base.
pub fn topic_vocabulary(corpus: &Corpus, base: EventBase) -> Vec<String> {
    corpus
        .posts()
        .iter()
        .filter(|p| base.admits(p))
        .filter_map(|p| p.topic_label.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

fn user_topic_counts<'c>(
    corpus: &'c Corpus,
    base: EventBase,
    vocab: &[String],
) -> BTreeMap<&'c str, Vec<f64>> {
    let mut out: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for p in corpus.posts().iter().filter(|p| base.admits(p)) {
        let Some(topic) = p.topic_label.as_deref() else {
            continue;
        };
        let Ok(k) = vocab.binary_search_by(|v| v.as_str().cmp(topic)) else {
            continue;
        };
        out.entry(&p.author_id)
            .or_insert_with(|| vec![0.0; vocab.len()])[k] += 1.0;
    }
    out
}

fn summed<'a>(rows: impl Iterator<Item = &'a Vec<f64>>, width: usize) -> Vec<f64> {
    let mut acc = vec![0.0; width];
    for r in rows {
        for (a, v) in acc.iter_mut().zip(r) {
            *a += v;
        }
    }
    acc
}

/// Topic counts over the corpus-wide vocabulary (zero-count topics kept)
/// and their Gini coefficient.
pub fn topic_distribution(
    label: &str,
    group: &BTreeSet<String>,
    corpus: &Corpus,
    base: EventBase,
) -> Result<TopicDistribution> {
    let vocab = topic_vocabulary(corpus, base);
    let per_user = user_topic_counts(corpus, base, &vocab);
    let totals = summed(
        group.iter().filter_map(|u| per_user.get(u.as_str())),
        vocab.len(),
    );
    let sum: f64 = totals.iter().sum();
    if sum == 0.0 {
        return Err(Error::InsufficientData(format!(
            "group `{label}` has no topic-labeled posts"
        )));
    }
    Ok(TopicDistribution {
        group: label.to_string(),
        counts: vocab
            .iter()
            .cloned()
            .zip(totals.iter().map(|&c| c as u64))
            .collect(),
        shares: vocab
            .iter()
            .cloned()
            .zip(totals.iter().map(|c| c / sum))
            .collect(),
        gini: stats::gini(&totals)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GiniComparison {
    pub group_a: String,
    pub group_b: String,
    pub base: EventBase,
    pub group_gini: f64,
    pub mean_diff: f64,
    pub standard_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub iterations: usize,
    /// Population users without any topic-labeled posts in the base.
    pub excluded: usize,
}

/// Gini(group) minus Gini of equal-size random draws from the population,
/// with a percentile 95% interval and the bootstrap standard error.
pub fn bootstrap_gini_diff(
    group: &BTreeSet<String>,
    population: &BTreeSet<String>,
    corpus: &Corpus,
    base: EventBase,
    iterations: usize,
    seed: u64,
) -> Result<GiniComparison> {
    if iterations < 2 {
        return Err(Error::InvalidParameter(
            "bootstrap gini needs >= 2 iterations".into(),
        ));
    }
    let vocab = topic_vocabulary(corpus, base);
    let per_user = user_topic_counts(corpus, base, &vocab);
    let group_totals = summed(
        group.iter().filter_map(|u| per_user.get(u.as_str())),
        vocab.len(),
    );
    let group_gini = stats::gini(&group_totals)
        .map_err(|_| Error::Undefined("group topic data is degenerate".into()))?;

    let pool: Vec<&Vec<f64>> = population
        .iter()
        .filter_map(|u| per_user.get(u.as_str()))
        .collect();
    let excluded = population.len() - pool.len();
    let k = group.len();
    if pool.len() < k {
        return Err(Error::InsufficientData(format!(
            "population has {} users with topic data, group needs {k}",
            pool.len()
        )));
    }
    let diffs = par::map_range(iterations, |i| {
        let mut rng = iteration_rng(seed, i);
        let rows = sample_indices(&mut rng, pool.len(), k)
            .into_iter()
            .map(|j| pool[j]);
        stats::gini(&summed(rows, vocab.len())).map(|g| group_gini - g)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()
    .map_err(|_| Error::Undefined("bootstrap sample without topic data".into()))?;

    let mean_diff = stats::mean(&diffs);
    let (ci_low, ci_high) = stats::percentile_ci(&diffs, 0.95)?;
    Ok(GiniComparison {
        group_a: "group".into(),
        group_b: "bootstrap sample".into(),
        base,
        group_gini,
        mean_diff,
        standard_error: stats::variance(&diffs).sqrt(),
        ci_low,
        ci_high,
        iterations,
        excluded,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TermField {
    Terms,
    Hashtags,
}

/// Relative token frequencies over the group's original posts, stoplist
/// removed; descending, ties by term.
pub fn term_frequencies(
    group: &BTreeSet<String>,
    corpus: &Corpus,
    field: TermField,
    stoplist: &BTreeSet<String>,
    top_k: usize,
) -> Vec<(String, f64)> {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for p in corpus.originals().filter(|p| group.contains(&p.author_id)) {
        let tokens = match field {
            TermField::Terms => &p.terms,
            TermField::Hashtags => &p.hashtags,
        };
        for t in tokens {
            let t = t.trim_start_matches('#').to_lowercase();
            if t.is_empty() || stoplist.contains(&t) {
                continue;
            }
            *counts.entry(t).or_insert(0) += 1;
        }
    }
    let total: u64 = counts.values().sum();
    let mut out: Vec<(String, f64)> = counts
        .into_iter()
        .map(|(t, c)| (t, c as f64 / total as f64))
        .collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out.truncate(top_k);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmotionRow {
    pub group: String,
    pub labeled_posts: usize,
    /// Percent per label in [`Emotion::ALL`] order; `None` when the group
    /// has no labeled original posts.
    pub percentages: Option<[f64; 7]>,
}

pub fn emotion_shares(groups: &[(String, BTreeSet<String>)], corpus: &Corpus) -> Vec<EmotionRow> {
    par::map(groups, |(label, members)| {
        let mut counts = [0usize; 7];
        for p in corpus
            .originals()
            .filter(|p| members.contains(&p.author_id))
        {
            if let Some(e) = p.emotion_label {
                counts[e.index()] += 1;
            }
        }
        let total: usize = counts.iter().sum();
        EmotionRow {
            group: label.clone(),
            labeled_posts: total,
            percentages: (total > 0).then(|| counts.map(|c| 100.0 * c as f64 / total as f64)),
        }
    })
}

pub fn emotion_labels() -> [&'static str; 7] {
    Emotion::ALL.map(|e| e.as_str())
}

/// Users with at least `min_posts` posts in the corpus.
pub fn active_users(corpus: &Corpus, min_posts: usize) -> BTreeSet<String> {
    let mut n: BTreeMap<&str, usize> = BTreeMap::new();
    for p in corpus.posts() {
        *n.entry(&p.author_id).or_insert(0) += 1;
    }
    n.into_iter()
        .filter(|(_, c)| *c >= min_posts)
        .map(|(u, _)| u.to_string())
        .collect()
}

/// Welch t on bot scores, plain or bootstrapped `(iterations, seed)`.
pub fn botscore_comparison(
    partition_a: &BTreeSet<String>,
    partition_b: &BTreeSet<String>,
    corpus: &Corpus,
    bootstrap: Option<(usize, u64)>,
) -> Result<GroupComparison> {
    let scores: BTreeMap<String, f64> = corpus
        .users()
        .iter()
        .filter_map(|(id, u)| u.bot_score.map(|b| (id.clone(), b)))
        .collect();
    if let Some((iterations, seed)) = bootstrap {
        return bootstrap_profile_test(
            "bot_score",
            partition_a,
            partition_b,
            &scores,
            iterations,
            seed,
        );
    }
    let pick = |set: &BTreeSet<String>| -> Vec<f64> {
        set.iter().filter_map(|u| scores.get(u).copied()).collect()
    };
    let (a, b) = (pick(partition_a), pick(partition_b));
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "bot-score comparison needs >= 2 scored users per group (got {} and {})",
            a.len(),
            b.len()
        )));
    }
    let r = welch_t(&a, &b)?;
    Ok(GroupComparison {
        metric: "bot_score".into(),
        group_a: "a".into(),
        group_b: "b".into(),
        t_statistic: r.statistic,
        p_value: r.p_value,
        iterations: 1,
        mean_a: stats::mean(&a),
        mean_b: stats::mean(&b),
        excluded: partition_a.len() + partition_b.len() - a.len() - b.len(),
    })
}

/// Fraction of users whose id or display name contains any marker,
/// case-insensitively.
pub fn overt_bot_name_share<'a>(
    users: impl IntoIterator<Item = &'a UserRecord>,
    markers: &[&str],
) -> f64 {
    let markers: Vec<String> = markers.iter().map(|m| m.to_lowercase()).collect();
    let (mut hits, mut total) = (0usize, 0usize);
    for u in users {
        total += 1;
        let id = u.user_id.to_lowercase();
        let name = u.display_name.as_deref().unwrap_or("").to_lowercase();
        if markers.iter().any(|m| id.contains(m) || name.contains(m)) {
            hits += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{PostKind, Timestamp};
    use proptest::prelude::*;

    fn pairwise_gini(x: &[f64]) -> f64 {
        let n = x.len() as f64;
        let mu = x.iter().sum::<f64>() / n;
        let mut s = 0.0;
        for a in x {
            for b in x {
                s += (a - b).abs();
            }
        }
        s / (2.0 * n * n * mu)
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini(&[5.0, 5.0, 5.0, 5.0]).unwrap(), 0.0);
        assert!((gini(&[0.0, 0.0, 0.0, 10.0]).unwrap() - 0.75).abs() < 1e-12);
        assert!((pairwise_gini(&[0.0, 0.0, 0.0, 10.0]) - 0.75).abs() < 1e-12);
        assert!(gini(&[0.0; 3]).is_err());
    }

    proptest! {
        #[test]
        fn gini_matches_pairwise_and_is_bounded(
            x in prop::collection::vec(0u32..100, 1..30).prop_filter("positive", |v| v.iter().any(|&a| a > 0)),
            c in 1u32..50,
        ) {
            let x: Vec<f64> = x.into_iter().map(f64::from).collect();
            let g = gini(&x).unwrap();
            prop_assert!((g - pairwise_gini(&x)).abs() < 1e-12);
            let n = x.len() as f64;
            prop_assert!(g >= 0.0 && g <= (n - 1.0) / n + 1e-12);
            let scaled: Vec<f64> = x.iter().map(|v| v * f64::from(c)).collect();
            prop_assert!((gini(&scaled).unwrap() - g).abs() < 1e-12);
            let doubled: Vec<f64> = x.iter().chain(x.iter()).copied().collect();
            prop_assert!((gini(&doubled).unwrap() - g).abs() < 1e-12);
        }
    }

    fn post(id: usize, author: &str, terms: &[&str], emotion: Option<Emotion>) -> PostEvent {
        PostEvent {
            post_id: format!("p{id}"),
            author_id: author.into(),
            timestamp: "2021-01-01T00:00:00Z".parse::<Timestamp>().unwrap()
                + chrono::Duration::minutes(id as i64),
            kind: PostKind::Original,
            retweeted_post_id: None,
            retweeted_author_id: None,
            dois: Default::default(),
            topic_label: None,
            emotion_label: emotion,
            terms: terms.iter().map(|s| s.to_string()).collect(),
            hashtags: vec!["#COVID19".into(), "#Vaccines".into()],
        }
    }

    #[test]
    fn term_frequency_counts_and_stoplist() {
        let (c, _) = Corpus::from_records(
            vec![],
            vec![post(0, "a", &["vaccine", "vaccine", "study"], None)],
            vec![],
        )
        .unwrap();
        let g: BTreeSet<String> = ["a".to_string()].into();
        let tf = term_frequencies(&g, &c, TermField::Terms, &BTreeSet::new(), 10);
        assert_eq!(tf[0].0, "vaccine");
        assert!((tf[0].1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((tf[1].1 - 1.0 / 3.0).abs() < 1e-15);
        let stop: BTreeSet<String> = ["vaccine".to_string()].into();
        let tf = term_frequencies(&g, &c, TermField::Terms, &stop, 10);
        assert_eq!(tf, vec![("study".to_string(), 1.0)]);
        let tags = term_frequencies(
            &g,
            &c,
            TermField::Hashtags,
            &parse_stoplist(DEFAULT_STOPLIST),
            10,
        );
        assert_eq!(tags, vec![("vaccines".to_string(), 1.0)]);
    }

    #[test]
    fn emotion_rows_normalize() {
        let posts = vec![
            post(0, "a", &["x"], Some(Emotion::Neutral)),
            post(1, "a", &["x"], Some(Emotion::Neutral)),
            post(2, "b", &["x"], Some(Emotion::Fear)),
            post(3, "b", &["x"], Some(Emotion::Neutral)),
            post(4, "c", &["x"], None),
        ];
        let (c, _) = Corpus::from_records(vec![], posts, vec![]).unwrap();
        let groups = vec![
            ("a".to_string(), ["a".to_string()].into()),
            ("b".to_string(), ["b".to_string()].into()),
            ("c".to_string(), ["c".to_string()].into()),
        ];
        let rows = emotion_shares(&groups, &c);
        assert_eq!(
            rows[0].percentages.unwrap()[Emotion::Neutral.index()],
            100.0
        );
        let b = rows[1].percentages.unwrap();
        assert_eq!(
            (b[Emotion::Fear.index()], b[Emotion::Neutral.index()]),
            (50.0, 50.0)
        );
        assert!((b.iter().sum::<f64>() - 100.0).abs() < 1e-9);
        assert_eq!(rows[2].percentages, None);
    }

    #[test]
    fn overt_names() {
        let mk = |id: &str, name: Option<&str>| {
            let mut u = UserRecord::unlabeled(id);
            u.display_name = name.map(str::to_string);
            u
        };
        assert_eq!(
            overt_bot_name_share([&mk("paperbot123", None)], &DEFAULT_BOT_MARKERS),
            1.0
        );
        assert_eq!(
            overt_bot_name_share([&mk("alice", None)], &DEFAULT_BOT_MARKERS),
            0.0
        );
        let users = [
            mk("alice", None),
            mk("bob", Some("MedRxiv Feed")),
            mk("carol", None),
            mk("dave", Some("Dave")),
            mk("PreprintWatch", None),
            mk("erin", None),
        ];
        assert!(
            (overt_bot_name_share(users.iter(), &DEFAULT_BOT_MARKERS) - 1.0 / 3.0).abs() < 1e-15
        );
    }

    fn topic_corpus() -> Corpus {
        let mut posts = Vec::new();
        let mut n = 0;
        for u in 0..20 {
            for t in 0..4 {
                // users 0..4 post only topic 0; the rest spread evenly
                let topic = if u < 4 { 0 } else { t };
                let mut p = post(n, &format!("u{u:02}"), &["x"], None);
                p.topic_label = Some(format!("t{topic}"));
                posts.push(p);
                n += 1;
            }
        }
        Corpus::from_records(vec![], posts, vec![]).unwrap().0
    }

    #[test]
    fn topic_distribution_keeps_zero_topics() {
        let c = topic_corpus();
        let g: BTreeSet<String> = (0..4).map(|u| format!("u{u:02}")).collect();
        let d = topic_distribution("g", &g, &c, EventBase::Originals).unwrap();
        assert_eq!(d.counts.len(), 4);
        assert_eq!(d.counts["t0"], 16);
        assert_eq!(d.counts["t3"], 0);
        assert!((d.gini - 0.75).abs() < 1e-12);
        assert!(topic_distribution("g", &g, &c, EventBase::Retweets).is_err());
    }

    #[test]
    fn bootstrap_gini_matches_loop_oracle() {
        let c = topic_corpus();
        let g: BTreeSet<String> = (0..4).map(|u| format!("u{u:02}")).collect();
        let pop: BTreeSet<String> = (4..20).map(|u| format!("u{u:02}")).collect();
        let r = bootstrap_gini_diff(&g, &pop, &c, EventBase::Originals, 50, 9).unwrap();
        // every draw from the even population has per-topic counts 4,4,4,4
        assert!((r.mean_diff - 0.75).abs() < 1e-12);
        assert!(r.standard_error.abs() < 1e-12);
        assert_eq!((r.ci_low, r.ci_high), (r.mean_diff, r.mean_diff));

        let mixed: BTreeSet<String> = (0..20).map(|u| format!("u{u:02}")).collect();
        let r = bootstrap_gini_diff(&g, &mixed, &c, EventBase::Originals, 64, 3).unwrap();
        let pool: Vec<String> = mixed.iter().cloned().collect();
        let mut diffs = Vec::new();
        for i in 0..64 {
            let mut rng = iteration_rng(3, i);
            let mut counts = [0.0f64; 4];
            for j in sample_indices(&mut rng, pool.len(), 4) {
                let u: usize = pool[j][1..].parse().unwrap();
                for t in 0..4 {
                    counts[if u < 4 { 0 } else { t }] += 1.0;
                }
            }
            diffs.push(0.75 - pairwise_gini(&counts));
        }
        let m = diffs.iter().sum::<f64>() / 64.0;
        assert!((r.mean_diff - m).abs() < 1e-12);
        assert!(r.ci_low <= r.mean_diff && r.mean_diff <= r.ci_high);
        assert_eq!(
            r,
            bootstrap_gini_diff(&g, &mixed, &c, EventBase::Originals, 64, 3).unwrap()
        );
    }
}
