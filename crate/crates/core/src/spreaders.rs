//! h-index superspreaders and group comparisons.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coactivity::selection_size;
use crate::error::{Error, Result};
use crate::ingest::{hours, Corpus, Stance};
use crate::par;
use crate::stats::{self, chi_square_1dof, kendall_tau_b, welch_t, TestResult};

/// Largest h such that at least h entries are >= h.
pub fn h_index(counts: &[u64]) -> u64 {
    let mut sorted = counts.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    sorted
        .iter()
        .enumerate()
        .take_while(|(i, &c)| c > *i as u64)
        .count() as u64
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpreaderScore {
    pub user_id: String,
    pub h_index: u64,
    pub original_post_count: usize,
    /// Per-post retweet tallies, descending.
    pub retweet_counts: Vec<u64>,
}

/// Scores every user with at least one post, retweets included. A user's
/// scored posts are their originals plus any post of theirs referenced by a
/// retweet; tallies count the retweets present in the corpus.
pub fn spreader_scores(corpus: &Corpus) -> Vec<SpreaderScore> {
    let mut per_user: BTreeMap<&str, HashMap<&str, u64>> = BTreeMap::new();
    for p in corpus.originals() {
        per_user
            .entry(&p.author_id)
            .or_default()
            .entry(&p.post_id)
            .or_insert(0);
    }
    for rt in corpus.retweets() {
        per_user.entry(&rt.author_id).or_default();
        if let (Some(author), Some(post)) = (
            rt.retweeted_author_id.as_deref(),
            rt.retweeted_post_id.as_deref(),
        ) {
            *per_user.entry(author).or_default().entry(post).or_insert(0) += 1;
        }
    }
    per_user
        .into_iter()
        .map(|(user, posts)| {
            let mut counts: Vec<u64> = posts.into_values().collect();
            counts.sort_unstable_by(|a, b| b.cmp(a));
            SpreaderScore {
                user_id: user.to_string(),
                h_index: h_index(&counts),
                original_post_count: counts.len(),
                retweet_counts: counts,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreaderSelection {
    pub percentile: f64,
    /// All scored users in rank order.
    pub ranked: Vec<SpreaderScore>,
    pub selected: BTreeSet<String>,
}

impl SpreaderSelection {
    pub fn score(&self, user: &str) -> Option<&SpreaderScore> {
        self.ranked.iter().find(|s| s.user_id == user)
    }
}

/// Top `ceil(percentile * N)` users by h-index; ties by post count, then id.
pub fn select_superspreaders(corpus: &Corpus, percentile: f64) -> Result<SpreaderSelection> {
    if !(percentile > 0.0 && percentile < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "percentile {percentile} outside (0,1)"
        )));
    }
    let mut ranked = spreader_scores(corpus);
    ranked.sort_by(|a, b| {
        b.h_index
            .cmp(&a.h_index)
            .then_with(|| b.original_post_count.cmp(&a.original_post_count))
            .then_with(|| a.user_id.cmp(&b.user_id))
    });
    let k = selection_size(percentile, ranked.len());
    let selected = ranked[..k].iter().map(|s| s.user_id.clone()).collect();
    Ok(SpreaderSelection {
        percentile,
        ranked,
        selected,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupComparison {
    pub metric: String,
    pub group_a: String,
    pub group_b: String,
    pub t_statistic: f64,
    pub p_value: f64,
    pub iterations: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    /// Users dropped because the metric was undefined for them.
    pub excluded: usize,
}

/// Stream for bootstrap iteration `i`; independent of worker count.
pub fn iteration_rng(seed: u64, iteration: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ iteration as u64)
}

/// `k` distinct indices from `0..n` by partial Fisher–Yates.
pub fn sample_indices<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k.min(n) {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(k.min(n));
    pool
}

/// Compares `target` against equal-size random draws (without replacement)
/// from `population`, which should not contain the target users. Reports the
/// mean Welch t and mean p over iterations.
pub fn bootstrap_profile_test(
    metric_name: &str,
    target: &BTreeSet<String>,
    population: &BTreeSet<String>,
    metric: &BTreeMap<String, f64>,
    iterations: usize,
    seed: u64,
) -> Result<GroupComparison> {
    if iterations == 0 {
        return Err(Error::InvalidParameter("iterations must be >= 1".into()));
    }
    let values = |set: &BTreeSet<String>| -> (Vec<f64>, usize) {
        let v: Vec<f64> = set
            .iter()
            .filter_map(|u| metric.get(u).copied())
            .filter(|x| x.is_finite())
            .collect();
        let missing = set.len() - v.len();
        (v, missing)
    };
    let (a, miss_a) = values(target);
    let (pop, miss_b) = values(population);
    if a.len() < 2 || pop.len() < a.len() {
        return Err(Error::InsufficientData(format!(
            "bootstrap needs |population| >= |target| >= 2 (target {}, population {})",
            a.len(),
            pop.len()
        )));
    }
    let k = a.len();
    let runs = par::map_range(iterations, |i| {
        let mut rng = iteration_rng(seed, i);
        let sample: Vec<f64> = sample_indices(&mut rng, pop.len(), k)
            .into_iter()
            .map(|j| pop[j])
            .collect();
        let r = welch_t(&a, &sample).expect("sizes checked");
        (r.statistic, r.p_value, stats::mean(&sample))
    });
    let n = iterations as f64;
    Ok(GroupComparison {
        metric: metric_name.to_string(),
        group_a: "target".into(),
        group_b: "bootstrap sample".into(),
        t_statistic: runs.iter().map(|r| r.0).sum::<f64>() / n,
        p_value: (runs.iter().map(|r| r.1).sum::<f64>() / n).clamp(0.0, 1.0),
        iterations,
        mean_a: stats::mean(&a),
        mean_b: runs.iter().map(|r| r.2).sum::<f64>() / n,
        excluded: miss_a + miss_b,
    })
}

/// Per-user profile variables used in group comparisons.
pub fn profile_metrics(corpus: &Corpus) -> BTreeMap<&'static str, BTreeMap<String, f64>> {
    let reference = corpus
        .posts()
        .last()
        .map(|p| p.timestamp)
        .into_iter()
        .chain(corpus.news().last().map(|n| n.timestamp))
        .max();
    let mut posts: HashMap<&str, (usize, usize)> = HashMap::new();
    for p in corpus.posts() {
        let e = posts.entry(&p.author_id).or_insert((0, 0));
        e.0 += 1;
        if p.is_retweet() {
            e.1 += 1;
        }
    }
    let mut out: BTreeMap<&'static str, BTreeMap<String, f64>> = BTreeMap::new();
    for (id, u) in corpus.users() {
        out.entry("followers")
            .or_default()
            .insert(id.clone(), u.followers as f64);
        out.entry("following")
            .or_default()
            .insert(id.clone(), u.following as f64);
        out.entry("verified")
            .or_default()
            .insert(id.clone(), f64::from(u8::from(u.verified)));
        if let (Some(created), Some(reference)) = (u.created_at, reference) {
            let days = (hours(&reference) - hours(&created)) / 24.0;
            out.entry("account_age_days")
                .or_default()
                .insert(id.clone(), days);
        }
        if let Some(b) = u.bot_score {
            out.entry("bot_score").or_default().insert(id.clone(), b);
        }
        if let Some(&(total, rts)) = posts.get(id.as_str()) {
            out.entry("retweet_share")
                .or_default()
                .insert(id.clone(), rts as f64 / total as f64);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContingencyResult {
    /// `[contrarian, conformist]`
    pub observed: [u64; 2],
    pub expected: [u64; 2],
    pub test: TestResult,
}

fn stance_counts(group: &BTreeSet<String>, corpus: &Corpus) -> [u64; 2] {
    let mut c = [0u64; 2];
    for u in group {
        match corpus.stance_of(u) {
            Stance::Contrarian => c[0] += 1,
            Stance::Conformist => c[1] += 1,
            Stance::Unlabeled => {}
        }
    }
    c
}

/// Expected counts scale the reference stance proportions to the observed
/// group's size, rounded to the nearest integer; chi-square with 1 dof.
pub fn stance_contingency(
    observed_group: &BTreeSet<String>,
    reference_population: &BTreeSet<String>,
    corpus: &Corpus,
) -> Result<ContingencyResult> {
    let observed = stance_counts(observed_group, corpus);
    let reference = stance_counts(reference_population, corpus);
    let n_obs = observed[0] + observed[1];
    let n_ref = reference[0] + reference[1];
    if n_obs == 0 || n_ref == 0 {
        return Err(Error::InsufficientData(
            "stance contingency needs known stances in both groups".into(),
        ));
    }
    let expected = reference.map(|r| (r as f64 / n_ref as f64 * n_obs as f64).round() as u64);
    let test = chi_square_1dof(observed.map(|x| x as f64), expected.map(|x| x as f64))?;
    Ok(ContingencyResult {
        observed,
        expected,
        test,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetClass {
    ContrarianSuperspreader,
    OtherContrarian,
    ConformistSuperspreader,
    OtherConformist,
    Unlabeled,
}

impl TargetClass {
    pub const LABELED: [TargetClass; 4] = [
        TargetClass::ContrarianSuperspreader,
        TargetClass::OtherContrarian,
        TargetClass::ConformistSuperspreader,
        TargetClass::OtherConformist,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossoverReport {
    pub counts: BTreeMap<TargetClass, usize>,
    /// Percentages over the four labeled classes.
    pub shares: BTreeMap<TargetClass, f64>,
    /// Fraction of contrarian superspreaders retweeted at least once.
    pub contrarian_superspreader_coverage: Option<f64>,
    pub conformist_superspreader_coverage: Option<f64>,
    pub empty: bool,
}

pub fn amplification_crossover(
    coordinated: &BTreeSet<String>,
    superspreaders: &BTreeSet<String>,
    corpus: &Corpus,
) -> Result<CrossoverReport> {
    if coordinated.is_empty() || superspreaders.is_empty() {
        return Err(Error::InsufficientData(
            "crossover needs nonempty groups".into(),
        ));
    }
    let mut counts: BTreeMap<TargetClass, usize> = BTreeMap::new();
    let mut reached: BTreeSet<&str> = BTreeSet::new();
    for rt in corpus.retweets() {
        if !coordinated.contains(&rt.author_id) {
            continue;
        }
        let Some(target) = rt.retweeted_author_id.as_deref() else {
            continue;
        };
        if target == rt.author_id {
            continue;
        }
        let ss = superspreaders.contains(target);
        let class = match (corpus.stance_of(target), ss) {
            (Stance::Contrarian, true) => TargetClass::ContrarianSuperspreader,
            (Stance::Contrarian, false) => TargetClass::OtherContrarian,
            (Stance::Conformist, true) => TargetClass::ConformistSuperspreader,
            (Stance::Conformist, false) => TargetClass::OtherConformist,
            (Stance::Unlabeled, _) => TargetClass::Unlabeled,
        };
        *counts.entry(class).or_insert(0) += 1;
        if ss {
            reached.insert(target);
        }
    }
    let labeled: usize = TargetClass::LABELED
        .iter()
        .map(|c| counts.get(c).copied().unwrap_or(0))
        .sum();
    let shares = if labeled > 0 {
        TargetClass::LABELED
            .iter()
            .map(|c| {
                (
                    *c,
                    100.0 * counts.get(c).copied().unwrap_or(0) as f64 / labeled as f64,
                )
            })
            .collect()
    } else {
        BTreeMap::new()
    };
    let coverage = |stance: Stance| {
        let pool: Vec<&String> = superspreaders
            .iter()
            .filter(|u| corpus.stance_of(u) == stance)
            .collect();
        (!pool.is_empty()).then(|| {
            pool.iter().filter(|u| reached.contains(u.as_str())).count() as f64 / pool.len() as f64
        })
    };
    Ok(CrossoverReport {
        empty: counts.is_empty(),
        contrarian_superspreader_coverage: coverage(Stance::Contrarian),
        conformist_superspreader_coverage: coverage(Stance::Conformist),
        counts,
        shares,
    })
}

/// Kendall tau-b between two orderings, over their common items.
pub fn rank_correlation(ranking_a: &[String], ranking_b: &[String]) -> Result<TestResult> {
    let pos_b: HashMap<&str, usize> = ranking_b
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let (x, y): (Vec<f64>, Vec<f64>) = ranking_a
        .iter()
        .enumerate()
        .filter_map(|(i, s)| pos_b.get(s.as_str()).map(|&j| (i as f64, j as f64)))
        .unzip();
    if x.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "rank correlation needs >= 2 common items (got {})",
            x.len()
        )));
    }
    kendall_tau_b(&x, &y)
}

/// Like [`rank_correlation`] but ranks by scores, so equal scores tie.
pub fn rank_correlation_scored(a: &[(String, f64)], b: &[(String, f64)]) -> Result<TestResult> {
    let score_b: HashMap<&str, f64> = b.iter().map(|(s, v)| (s.as_str(), *v)).collect();
    let (x, y): (Vec<f64>, Vec<f64>) = a
        .iter()
        .filter_map(|(s, v)| score_b.get(s.as_str()).map(|w| (*v, *w)))
        .unzip();
    if x.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "rank correlation needs >= 2 common items (got {})",
            x.len()
        )));
    }
    kendall_tau_b(&x, &y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{PostEvent, PostKind, UserRecord};
    use proptest::prelude::*;

    fn brute_h(counts: &[u64]) -> u64 {
        (0..=counts.len() as u64)
            .filter(|&h| counts.iter().filter(|&&c| c >= h).count() as u64 >= h)
            .max()
            .unwrap_or(0)
    }

    #[test]
    fn h_index_examples() {
        assert_eq!(h_index(&[10; 10]), 10);
        assert_eq!(h_index(&[]), 0);
        assert_eq!(h_index(&[5, 3, 3, 1]), 3);
        assert_eq!(brute_h(&[5, 3, 3, 1]), 3);
    }

    proptest! {
        #[test]
        fn h_index_properties(mut counts in prop::collection::vec(0u64..40, 0..60), extra in 0u64..40) {
            let h = h_index(&counts);
            prop_assert_eq!(h, brute_h(&counts));
            prop_assert!(h <= counts.len() as u64);
            prop_assert!(h <= counts.iter().copied().max().unwrap_or(0));
            counts.reverse();
            prop_assert_eq!(h_index(&counts), h);
            counts.push(extra);
            prop_assert!(h_index(&counts) >= h);
        }
    }

    fn users_with(stances: &[(&str, Stance)]) -> Vec<UserRecord> {
        stances
            .iter()
            .map(|(id, s)| {
                let mut u = UserRecord::unlabeled(*id);
                u.stance = *s;
                u
            })
            .collect()
    }

    fn original(id: &str, author: &str, minute: i64) -> PostEvent {
        PostEvent {
            post_id: id.into(),
            author_id: author.into(),
            timestamp: "2021-01-01T00:00:00Z"
                .parse::<crate::ingest::Timestamp>()
                .unwrap()
                + chrono::Duration::minutes(minute),
            kind: PostKind::Original,
            retweeted_post_id: None,
            retweeted_author_id: None,
            dois: ["d".to_string()].into(),
            topic_label: None,
            emotion_label: None,
            terms: vec![],
            hashtags: vec![],
        }
    }

    fn retweet(id: &str, author: &str, of: &str, of_author: &str, minute: i64) -> PostEvent {
        let mut p = original(id, author, minute);
        p.kind = PostKind::Retweet;
        p.retweeted_post_id = Some(of.into());
        p.retweeted_author_id = Some(of_author.into());
        p
    }

    #[test]
    fn unique_maximum_selected_and_ties_deterministic() {
        let mut posts = Vec::new();
        for u in 0..100 {
            posts.push(original(&format!("p{u}"), &format!("u{u:03}"), u));
        }
        for i in 0..5 {
            posts.push(original(&format!("star{i}"), "u050", 200 + i));
            for r in 0..5 {
                posts.push(retweet(
                    &format!("rt{i}-{r}"),
                    &format!("u{r:03}"),
                    &format!("star{i}"),
                    "u050",
                    300,
                ));
            }
        }
        let (c, _) = Corpus::from_records(vec![], posts, vec![]).unwrap();
        let sel = select_superspreaders(&c, 0.01).unwrap();
        assert_eq!(sel.selected.len(), 1);
        assert!(sel.selected.contains("u050"));
        assert_eq!(sel.score("u050").unwrap().h_index, 5);

        let flat: Vec<PostEvent> = (0..100)
            .map(|u| original(&format!("q{u}"), &format!("v{u:03}"), u))
            .collect();
        let (c, _) = Corpus::from_records(vec![], flat, vec![]).unwrap();
        let sel = select_superspreaders(&c, 0.05).unwrap();
        assert_eq!(sel.selected.len(), 5);
        assert!(sel.selected.contains("v000") && sel.selected.contains("v004"));
    }

    #[test]
    fn contingency_reproduces_table() {
        let mut users = Vec::new();
        let mut observed = BTreeSet::new();
        let mut reference = BTreeSet::new();
        for i in 0..306 {
            let id = format!("c{i}");
            users.push((
                id.clone(),
                if i < 295 {
                    Stance::Contrarian
                } else {
                    Stance::Conformist
                },
            ));
            observed.insert(id);
        }
        // reference proportion 89/306 contrarian
        for i in 0..3060 {
            let id = format!("r{i}");
            users.push((
                id.clone(),
                if i < 890 {
                    Stance::Contrarian
                } else {
                    Stance::Conformist
                },
            ));
            reference.insert(id);
        }
        let recs = users_with(
            &users
                .iter()
                .map(|(a, b)| (a.as_str(), *b))
                .collect::<Vec<_>>(),
        );
        let (c, _) = Corpus::from_records(recs, vec![], vec![]).unwrap();
        let r = stance_contingency(&observed, &reference, &c).unwrap();
        assert_eq!(r.expected, [89, 217]);
        assert_eq!(r.observed, [295, 11]);
        assert!((r.test.statistic - 672.37).abs() < 0.1);

        let same = stance_contingency(&reference, &reference, &c).unwrap();
        assert_eq!(same.test.statistic, 0.0);
    }

    #[test]
    fn crossover_degenerate_case() {
        let recs = users_with(&[
            ("ss", Stance::Contrarian),
            ("a", Stance::Contrarian),
            ("b", Stance::Conformist),
        ]);
        let posts = vec![
            original("p", "ss", 0),
            retweet("r1", "a", "p", "ss", 1),
            retweet("r2", "b", "p", "ss", 2),
        ];
        let (c, _) = Corpus::from_records(recs, posts, vec![]).unwrap();
        let coord: BTreeSet<String> = ["a".to_string(), "b".to_string()].into();
        let ss: BTreeSet<String> = ["ss".to_string()].into();
        let r = amplification_crossover(&coord, &ss, &c).unwrap();
        assert_eq!(r.shares[&TargetClass::ContrarianSuperspreader], 100.0);
        assert_eq!(r.contrarian_superspreader_coverage, Some(1.0));
        assert_eq!(r.conformist_superspreader_coverage, None);
        let total: f64 = r.shares.values().sum();
        assert!((total - 100.0).abs() < 1e-9);

        let none: BTreeSet<String> = ["ss".to_string()].into();
        assert!(amplification_crossover(&none, &ss, &c).unwrap().empty);
    }

    #[test]
    fn rank_correlation_cases() {
        let a: Vec<String> = (0..10).map(|i| format!("x{i}")).collect();
        let rev: Vec<String> = a.iter().rev().cloned().collect();
        assert!((rank_correlation(&a, &a).unwrap().statistic - 1.0).abs() < 1e-12);
        assert!((rank_correlation(&a, &rev).unwrap().statistic + 1.0).abs() < 1e-12);
        let mut swapped = a.clone();
        swapped.swap(0, 1);
        swapped.swap(4, 7);
        swapped.swap(8, 9);
        // pair-counting oracle
        let pos: HashMap<&String, usize> =
            swapped.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let (mut c, mut d) = (0i64, 0i64);
        for i in 0..10 {
            for j in i + 1..10 {
                if pos[&a[i]] < pos[&a[j]] {
                    c += 1
                } else {
                    d += 1
                }
            }
        }
        let oracle = (c - d) as f64 / 45.0;
        assert!((rank_correlation(&a, &swapped).unwrap().statistic - oracle).abs() < 1e-12);
        assert!(rank_correlation(&a[..1], &a).is_err());
    }

    #[test]
    fn bootstrap_null_and_separation() {
        let metric: BTreeMap<String, f64> = (0..40).map(|i| (format!("u{i:02}"), 3.0)).collect();
        let target: BTreeSet<String> = (0..5).map(|i| format!("u{i:02}")).collect();
        let pop: BTreeSet<String> = (5..40).map(|i| format!("u{i:02}")).collect();
        let r = bootstrap_profile_test("m", &target, &pop, &metric, 200, 7).unwrap();
        assert!(r.t_statistic.abs() < 1e-12);
        assert!((r.p_value - 1.0).abs() < 1e-12);

        let metric: BTreeMap<String, f64> = (0..40)
            .map(|i| {
                let noise = ((i * 37) % 11) as f64 / 10.0 - 0.5;
                (format!("u{i:02}"), if i < 5 { 10.0 + noise } else { noise })
            })
            .collect();
        let r = bootstrap_profile_test("m", &target, &pop, &metric, 200, 7).unwrap();
        assert!(r.p_value < 0.001);
        assert!(r.t_statistic > 0.0);
    }

    #[test]
    fn bootstrap_counts_exclusions() {
        let mut metric: BTreeMap<String, f64> =
            (0..20).map(|i| (format!("u{i:02}"), i as f64)).collect();
        metric.remove("u10");
        let target: BTreeSet<String> = (0..3).map(|i| format!("u{i:02}")).collect();
        let pop: BTreeSet<String> = (3..20).map(|i| format!("u{i:02}")).collect();
        let r = bootstrap_profile_test("m", &target, &pop, &metric, 10, 1).unwrap();
        assert_eq!(r.excluded, 1);
    }
}
