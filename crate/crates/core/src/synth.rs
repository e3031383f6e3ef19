//! Synthetic corpora with planted ground truth: coordination rings,
//! fixed-h superspreaders, and lagged news coverage per DOI.
//!
//! Generation is single-threaded and consumes one ChaCha stream in a fixed
//! order, so a scenario always produces the same records.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use chrono::Duration;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson, Zipf};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{
    write_corpus, Corpus, Credential, Emotion, NewsMention, PostEvent, PostKind, Stance, Timestamp,
    UserRecord,
};
use crate::spreaders::sample_indices;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Scenario {
    pub seed: u64,
    pub start: Timestamp,
    pub duration_days: f64,
    pub background_users: usize,
    /// Shares of contrarian and conformist background users; the rest are
    /// unlabeled.
    pub contrarian_share: f64,
    pub conformist_share: f64,
    /// Retweets per background user per hour.
    pub background_rate: f64,
    pub source_accounts: usize,
    pub source_posts: usize,
    /// Zipf exponent of source-post popularity.
    pub popularity_exponent: f64,
    pub topics: usize,
    pub rings: Vec<RingSpec>,
    pub spreaders: Vec<SpreaderSpec>,
    pub news: Option<NewsSpec>,
    /// Background users reported as a stance-agnostic reference group.
    pub reference_group: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RingSpec {
    pub size: usize,
    pub shared_posts: usize,
    /// Each member retweets within this many minutes of the shared post.
    pub jitter_minutes: f64,
    /// All shared posts carry a single topic.
    pub narrow_topic: bool,
}

impl Default for RingSpec {
    fn default() -> Self {
        RingSpec {
            size: 10,
            shared_posts: 15,
            jitter_minutes: 5.0,
            narrow_topic: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreaderSpec {
    pub h: u64,
    pub stance: Stance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NewsSpec {
    pub dois: usize,
    pub outlets_per_class: usize,
    pub hc_trust: (f64, f64),
    pub lc_trust: (f64, f64),
    /// Mentions per DOI for each of the four actor classes.
    pub mentions_per_class: usize,
    /// Share of a class's mentions drawn from its burst; the rest are spread
    /// uniformly over the DOI's lifetime.
    pub burst_fraction: f64,
    pub burst_sd_hours: f64,
    /// Per-DOI delay of news bursts behind superspreader bursts.
    pub lag_mean_hours: f64,
    pub lag_sd_hours: f64,
    pub tail_before_hours: f64,
    pub tail_after_hours: f64,
    /// Original posts per DOI by background users.
    pub other_posts_per_doi: usize,
    /// Chance that an article is re-published verbatim by a second outlet.
    pub syndication_rate: f64,
    /// Extra low-volume DOIs mentioned only by aligned stance/outlet pairs.
    pub aligned_dois: usize,
}

impl Default for NewsSpec {
    fn default() -> Self {
        NewsSpec {
            dois: 100,
            outlets_per_class: 20,
            hc_trust: (0.7, 0.98),
            lc_trust: (0.05, 0.5),
            mentions_per_class: 60,
            burst_fraction: 0.4,
            burst_sd_hours: 1.0,
            lag_mean_hours: 6.0,
            lag_sd_hours: 1.0,
            tail_before_hours: 24.0,
            tail_after_hours: 96.0,
            other_posts_per_doi: 60,
            syndication_rate: 0.05,
            aligned_dois: 0,
        }
    }
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            seed: 0,
            start: "2021-01-01T00:00:00Z".parse().expect("valid literal"),
            duration_days: 60.0,
            background_users: 500,
            contrarian_share: 0.3,
            conformist_share: 0.5,
            background_rate: 0.02,
            source_accounts: 20,
            source_posts: 300,
            popularity_exponent: 1.0,
            topics: 10,
            rings: vec![RingSpec::default()],
            spreaders: default_spreaders(),
            news: Some(NewsSpec {
                aligned_dois: 20,
                ..NewsSpec::default()
            }),
            reference_group: 10,
        }
    }
}

fn default_spreaders() -> Vec<SpreaderSpec> {
    (0..6)
        .map(|i| SpreaderSpec {
            h: 40 - i,
            stance: if i % 2 == 0 {
                Stance::Conformist
            } else {
                Stance::Contrarian
            },
        })
        .collect()
}

impl Scenario {
    /// Background activity plus one ring; no spreaders or news.
    pub fn coordination(seed: u64) -> Self {
        Scenario {
            seed,
            spreaders: Vec::new(),
            news: None,
            ..Scenario::default()
        }
    }

    /// Spreaders and lagged news coverage; `lagged = false` gives the null
    /// case with simultaneous bursts.
    pub fn pathways(seed: u64, lagged: bool) -> Self {
        let news = if lagged {
            NewsSpec::default()
        } else {
            NewsSpec {
                lag_mean_hours: 0.0,
                lag_sd_hours: 0.0,
                ..NewsSpec::default()
            }
        };
        Scenario {
            seed,
            rings: Vec::new(),
            news: Some(news),
            ..Scenario::default()
        }
    }

    pub fn preset(name: &str, seed: u64) -> Result<Self> {
        match name {
            "full" => Ok(Scenario {
                seed,
                ..Scenario::default()
            }),
            "coordination" => Ok(Scenario::coordination(seed)),
            "pathways" => Ok(Scenario::pathways(seed, true)),
            "pathways-null" => Ok(Scenario::pathways(seed, false)),
            other => Err(Error::InvalidParameter(format!(
                "unknown scenario preset `{other}`"
            ))),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InfeasibleScenario(m));
        if self.duration_days <= 0.0 || self.background_rate < 0.0 || self.popularity_exponent < 0.0
        {
            return bad("duration must be positive and rates nonnegative".into());
        }
        if self.contrarian_share < 0.0
            || self.conformist_share < 0.0
            || self.contrarian_share + self.conformist_share > 1.0
        {
            return bad("stance shares must be nonnegative and sum to at most 1".into());
        }
        if self.topics == 0 {
            return bad("need at least one topic".into());
        }
        if self.background_rate > 0.0 && (self.source_posts == 0 || self.source_accounts == 0) {
            return bad("background retweets need source posts".into());
        }
        if self.reference_group > self.background_users {
            return bad("reference group larger than background population".into());
        }
        for s in &self.spreaders {
            if s.h as usize > self.background_users {
                return bad(format!(
                    "target h-index {} exceeds {} possible retweeters",
                    s.h, self.background_users
                ));
            }
        }
        if let Some(n) = &self.news {
            if n.outlets_per_class == 0
                || !(0.0..=1.0).contains(&n.burst_fraction)
                || !(0.0..=1.0).contains(&n.syndication_rate)
            {
                return bad("news spec needs outlets and fractions in [0,1]".into());
            }
            for (lo, hi) in [n.hc_trust, n.lc_trust] {
                if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
                    return bad(format!("trust range ({lo}, {hi}) outside [0,1]"));
                }
            }
            if n.dois + n.aligned_dois > 0 {
                for stance in [Stance::Conformist, Stance::Contrarian] {
                    if !self.spreaders.iter().any(|s| s.stance == stance) {
                        return bad(format!("DOI mentions need a {} spreader", stance.as_str()));
                    }
                }
                if n.other_posts_per_doi > 0 && self.background_users == 0 {
                    return bad("other DOI posts need background users".into());
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlantedDoi {
    pub doi: String,
    pub anchor: Timestamp,
    /// News burst delay behind the superspreader burst.
    pub lag_hours: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct GroundTruth {
    pub rings: Vec<BTreeSet<String>>,
    /// Accounts whose posts each ring amplifies.
    pub ring_targets: Vec<String>,
    pub spreaders: BTreeMap<String, u64>,
    pub reference_group: BTreeSet<String>,
    pub background: BTreeSet<String>,
    pub dois: Vec<PlantedDoi>,
    pub outlet_classes: BTreeMap<String, String>,
    /// Factuality label per outlet: high, mixed or low.
    pub outlet_labels: BTreeMap<String, String>,
}

impl GroundTruth {
    pub fn ring_members(&self) -> BTreeSet<String> {
        self.rings.iter().flatten().cloned().collect()
    }

    pub fn labels_csv(&self) -> String {
        let mut out = String::from("domain,label\n");
        for (d, l) in &self.outlet_labels {
            let _ = writeln!(out, "{d},{l}");
        }
        out
    }
}

const WORDS: [&str; 16] = [
    "study",
    "data",
    "results",
    "patients",
    "risk",
    "cases",
    "analysis",
    "evidence",
    "research",
    "health",
    "trial",
    "model",
    "infection",
    "hospital",
    "report",
    "cohort",
];
const CONTRARIAN_WORDS: [&str; 6] = [
    "mandate",
    "freedom",
    "ivermectin",
    "lockdown",
    "censorship",
    "truth",
];
const CONFORMIST_WORDS: [&str; 6] = [
    "vaccine", "efficacy", "masks", "science", "boosters", "immunity",
];

struct Gen {
    rng: ChaCha8Rng,
    start: Timestamp,
    posts: Vec<PostEvent>,
    news: Vec<NewsMention>,
}

impl Gen {
    fn at_hours(&self, h: f64) -> Timestamp {
        self.start + Duration::milliseconds((h * 3.6e6).round() as i64)
    }

    fn next_post_id(&self) -> String {
        format!("p{:07}", self.posts.len())
    }

    fn terms(&mut self, stance: Stance) -> Vec<String> {
        let mut t: Vec<String> = WORDS
            .choose_multiple(&mut self.rng, 3)
            .map(|s| s.to_string())
            .collect();
        let extra = match stance {
            Stance::Contrarian => CONTRARIAN_WORDS.choose(&mut self.rng),
            Stance::Conformist => CONFORMIST_WORDS.choose(&mut self.rng),
            Stance::Unlabeled => None,
        };
        t.extend(extra.map(|s| s.to_string()));
        t
    }

    fn hashtags(&mut self, stance: Stance) -> Vec<String> {
        let mut h = Vec::new();
        if self.rng.random_bool(0.5) {
            h.push("#covid19".to_string());
        }
        match stance {
            Stance::Contrarian if self.rng.random_bool(0.6) => h.push("#nomandates".into()),
            Stance::Conformist if self.rng.random_bool(0.6) => h.push("#getvaccinated".into()),
            _ if self.rng.random_bool(0.3) => h.push("#science".into()),
            _ => {}
        }
        h
    }

    fn emotion(&mut self, stance: Stance) -> Option<Emotion> {
        let weights: [u32; 7] = match stance {
            Stance::Contrarian => [4, 2, 3, 1, 6, 1, 2],
            Stance::Conformist => [1, 1, 2, 2, 10, 1, 2],
            Stance::Unlabeled => [1, 1, 1, 1, 8, 1, 1],
        };
        let total: u32 = weights.iter().sum();
        let mut x = self.rng.random_range(0..total);
        for (e, w) in Emotion::ALL.iter().zip(weights) {
            if x < w {
                return Some(*e);
            }
            x -= w;
        }
        None
    }

    fn original(
        &mut self,
        author: &str,
        stance: Stance,
        ts: Timestamp,
        topic: String,
        dois: BTreeSet<String>,
    ) -> usize {
        let post = PostEvent {
            post_id: self.next_post_id(),
            author_id: author.to_string(),
            timestamp: ts,
            kind: PostKind::Original,
            retweeted_post_id: None,
            retweeted_author_id: None,
            dois,
            topic_label: Some(topic),
            emotion_label: self.emotion(stance),
            terms: self.terms(stance),
            hashtags: self.hashtags(stance),
        };
        self.posts.push(post);
        self.posts.len() - 1
    }

    fn retweet(&mut self, user: &str, source: usize, ts: Timestamp) {
        let src = &self.posts[source];
        let post = PostEvent {
            post_id: self.next_post_id(),
            author_id: user.to_string(),
            timestamp: ts,
            kind: PostKind::Retweet,
            retweeted_post_id: Some(src.post_id.clone()),
            retweeted_author_id: Some(src.author_id.clone()),
            dois: src.dois.clone(),
            topic_label: src.topic_label.clone(),
            emotion_label: None,
            terms: src.terms.clone(),
            hashtags: src.hashtags.clone(),
        };
        self.posts.push(post);
    }
}

fn topic_name(k: usize) -> String {
    format!("topic_{k:02}")
}

fn user(id: String, stance: Stance, rng: &mut ChaCha8Rng, start: Timestamp) -> UserRecord {
    let marker = rng.random_bool(0.05);
    UserRecord {
        display_name: Some(if marker {
            format!("{id} science bot")
        } else {
            format!("User {id}")
        }),
        user_id: id,
        stance,
        followers: rng.random_range(10..50_000),
        following: rng.random_range(10..5_000),
        created_at: Some(start - Duration::days(rng.random_range(30..4_000))),
        verified: rng.random_bool(0.1),
        credential: Credential::Unlabeled,
        bot_score: Some(match stance {
            Stance::Contrarian => rng.random_range(0.1..0.9),
            _ => rng.random_range(0.0..0.7),
        }),
    }
}

pub fn generate(scenario: &Scenario) -> Result<(Corpus, GroundTruth)> {
    scenario.validate()?;
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(scenario.seed),
        start: scenario.start,
        posts: Vec::new(),
        news: Vec::new(),
    };
    let hours = scenario.duration_days * 24.0;
    let mut truth = GroundTruth::default();
    let mut users = Vec::new();

    let background: Vec<String> = (0..scenario.background_users)
        .map(|i| format!("u{i:04}"))
        .collect();
    for id in &background {
        let x: f64 = g.rng.random();
        let stance = if x < scenario.contrarian_share {
            Stance::Contrarian
        } else if x < scenario.contrarian_share + scenario.conformist_share {
            Stance::Conformist
        } else {
            Stance::Unlabeled
        };
        users.push(user(id.clone(), stance, &mut g.rng, scenario.start));
    }
    truth.background = background.iter().cloned().collect();
    truth.reference_group = background[..scenario.reference_group]
        .iter()
        .cloned()
        .collect();

    // Source posts predate the observation window so every retweet follows
    // its source.
    let sources: Vec<String> = (0..scenario.source_accounts)
        .map(|i| format!("src{i:02}"))
        .collect();
    for id in &sources {
        users.push(user(
            id.clone(),
            Stance::Conformist,
            &mut g.rng,
            scenario.start,
        ));
    }
    let mut pool = Vec::with_capacity(scenario.source_posts);
    for k in 0..scenario.source_posts {
        let back = g.rng.random_range(0.0..24.0);
        let ts = g.at_hours(-back);
        let topic = topic_name(g.rng.random_range(0..scenario.topics));
        pool.push(g.original(
            &sources[k % sources.len()],
            Stance::Conformist,
            ts,
            topic,
            BTreeSet::new(),
        ));
    }

    if scenario.background_rate > 0.0 && !pool.is_empty() {
        let count = Poisson::new(scenario.background_rate * hours)
            .map_err(|e| Error::InfeasibleScenario(e.to_string()))?;
        let popularity = Zipf::new(pool.len() as f64, scenario.popularity_exponent)
            .map_err(|e| Error::InfeasibleScenario(e.to_string()))?;
        for id in &background {
            let n = count.sample(&mut g.rng) as usize;
            for _ in 0..n {
                let h = g.rng.random_range(0.0..hours);
                let ts = g.at_hours(h);
                let rank = popularity.sample(&mut g.rng) as usize;
                g.retweet(id, pool[rank.clamp(1, pool.len()) - 1], ts);
            }
        }
    }

    for (r, spec) in scenario.rings.iter().enumerate() {
        let target = format!("amp{r}");
        users.push(user(
            target.clone(),
            Stance::Contrarian,
            &mut g.rng,
            scenario.start,
        ));
        let members: Vec<String> = (0..spec.size).map(|i| format!("ring{r}_{i:02}")).collect();
        for m in &members {
            users.push(user(
                m.clone(),
                Stance::Contrarian,
                &mut g.rng,
                scenario.start,
            ));
        }
        for _ in 0..spec.shared_posts {
            let post_h = g.rng.random_range(0.0..hours);
            let topic = if spec.narrow_topic {
                topic_name(0)
            } else {
                topic_name(g.rng.random_range(0..scenario.topics))
            };
            let ts = g.at_hours(post_h);
            let src = g.original(&target, Stance::Contrarian, ts, topic, BTreeSet::new());
            for m in &members {
                let delay = g.rng.random_range(0.0..=spec.jitter_minutes) / 60.0;
                let ts = g.at_hours(post_h + delay);
                g.retweet(m, src, ts);
            }
        }
        truth.rings.push(members.into_iter().collect());
        truth.ring_targets.push(target);
    }

    let mut spreaders_by_stance: BTreeMap<Stance, Vec<String>> = BTreeMap::new();
    for (i, spec) in scenario.spreaders.iter().enumerate() {
        let id = format!("ss{i:02}");
        let mut u = user(id.clone(), spec.stance, &mut g.rng, scenario.start);
        u.credential = [
            Credential::Physician,
            Credential::Scientist,
            Credential::NonScientific,
        ][i % 3];
        users.push(u);
        // h posts with exactly h retweets and h posts with fewer.
        let h = spec.h as usize;
        for k in 0..2 * h {
            let retweets = if k < h {
                h
            } else {
                g.rng.random_range(0..h.max(1))
            };
            let post_h = g.rng.random_range(0.0..(hours - 72.0).max(1.0));
            let topic = topic_name(g.rng.random_range(0..scenario.topics));
            let ts = g.at_hours(post_h);
            let src = g.original(&id, spec.stance, ts, topic, BTreeSet::new());
            for j in sample_indices(&mut g.rng, background.len(), retweets) {
                let delay = g.rng.random_range(0.0..72.0);
                let ts = g.at_hours(post_h + delay);
                g.retweet(&background[j], src, ts);
            }
        }
        spreaders_by_stance
            .entry(spec.stance)
            .or_default()
            .push(id.clone());
        truth.spreaders.insert(id, spec.h);
    }

    if let Some(spec) = &scenario.news {
        plant_news(
            &mut g,
            spec,
            scenario,
            &background,
            &spreaders_by_stance,
            &mut truth,
        )?;
    }

    let (corpus, _) = Corpus::from_records(users, g.posts, g.news)?;
    Ok((corpus, truth))
}

fn plant_news(
    g: &mut Gen,
    spec: &NewsSpec,
    scenario: &Scenario,
    background: &[String],
    spreaders: &BTreeMap<Stance, Vec<String>>,
    truth: &mut GroundTruth,
) -> Result<()> {
    let hours = scenario.duration_days * 24.0;
    let mut outlets: BTreeMap<&str, Vec<(String, f64)>> = BTreeMap::new();
    for (class, (lo, hi)) in [("HC", spec.hc_trust), ("LC", spec.lc_trust)] {
        for i in 0..spec.outlets_per_class {
            let domain = format!("{}{i:02}.example", class.to_lowercase());
            let trust = if hi > lo {
                g.rng.random_range(lo..=hi)
            } else {
                lo
            };
            truth
                .outlet_classes
                .insert(domain.clone(), class.to_string());
            let label = match class {
                "HC" => "high",
                _ if i % 2 == 0 => "low",
                _ => "mixed",
            };
            truth
                .outlet_labels
                .insert(domain.clone(), label.to_string());
            outlets.entry(class).or_default().push((domain, trust));
        }
    }
    let burst = Normal::new(0.0, spec.burst_sd_hours.max(0.0))
        .map_err(|e| Error::InfeasibleScenario(e.to_string()))?;
    let lag = Normal::new(spec.lag_mean_hours, spec.lag_sd_hours.max(0.0))
        .map_err(|e| Error::InfeasibleScenario(e.to_string()))?;
    let n_burst = (spec.mentions_per_class as f64 * spec.burst_fraction).round() as usize;
    let margin = spec.tail_before_hours.max(0.0);
    let latest = (hours - spec.tail_after_hours).max(margin + 1.0);

    for d in 0..spec.dois + spec.aligned_dois {
        let doi = format!("10.5555/synth.{d:04}");
        let anchor = g.rng.random_range(margin..latest);
        let planted = d < spec.dois;
        let delay = if planted { lag.sample(&mut g.rng) } else { 0.0 };
        // aligned DOIs: even ones pair contrarian spreaders with LC outlets
        let classes: Vec<(&str, Stance)> = if planted {
            vec![
                ("SP", Stance::Conformist),
                ("SP", Stance::Contrarian),
                ("LC", Stance::Unlabeled),
                ("HC", Stance::Unlabeled),
            ]
        } else if d % 2 == 0 {
            vec![("SP", Stance::Contrarian), ("LC", Stance::Unlabeled)]
        } else {
            vec![("SP", Stance::Conformist), ("HC", Stance::Unlabeled)]
        };
        let per_class = if planted {
            spec.mentions_per_class
        } else {
            (spec.mentions_per_class / 6).max(1)
        };
        let dois: BTreeSet<String> = [doi.clone()].into();
        for (kind, stance) in classes {
            let centre = if kind == "SP" { anchor } else { anchor + delay };
            for k in 0..per_class {
                let t = if k < n_burst.min(per_class) {
                    centre + burst.sample(&mut g.rng)
                } else {
                    g.rng.random_range(
                        anchor - spec.tail_before_hours..=anchor + spec.tail_after_hours,
                    )
                };
                let ts = g.at_hours(t);
                if kind == "SP" {
                    let author = spreaders[&stance]
                        .choose(&mut g.rng)
                        .expect("validated")
                        .clone();
                    let topic = topic_name(g.rng.random_range(0..scenario.topics));
                    g.original(&author, stance, ts, topic, dois.clone());
                } else {
                    let (domain, trust) =
                        outlets[kind].choose(&mut g.rng).expect("validated").clone();
                    let title = format!("New findings on {doi} ({kind} {k})");
                    let visits = g.rng.random_range(100..1_000_000u64);
                    push_article(g, &domain, ts, &title, &dois, trust, visits);
                    if g.rng.random_bool(spec.syndication_rate) {
                        let (copy, ctrust) =
                            outlets[kind].choose(&mut g.rng).expect("validated").clone();
                        if copy != domain {
                            let ts = ts + Duration::minutes(g.rng.random_range(1..120));
                            let visits = g.rng.random_range(100..1_000_000u64);
                            push_article(g, &copy, ts, &title, &dois, ctrust, visits);
                        }
                    }
                }
            }
        }
        if planted {
            for _ in 0..spec.other_posts_per_doi {
                let author = background.choose(&mut g.rng).expect("validated").clone();
                let t = g
                    .rng
                    .random_range(anchor - spec.tail_before_hours..=anchor + spec.tail_after_hours);
                let ts = g.at_hours(t);
                let topic = topic_name(g.rng.random_range(0..scenario.topics));
                g.original(&author, Stance::Unlabeled, ts, topic, dois.clone());
            }
            truth.dois.push(PlantedDoi {
                doi,
                anchor: g.at_hours(anchor),
                lag_hours: delay,
            });
        }
    }
    Ok(())
}

fn push_article(
    g: &mut Gen,
    domain: &str,
    ts: Timestamp,
    title: &str,
    dois: &BTreeSet<String>,
    trust: f64,
    visits: u64,
) {
    let article = NewsMention {
        article_id: format!("n{:07}", g.news.len()),
        outlet_domain: domain.to_string(),
        timestamp: ts,
        title: title.to_string(),
        dois: dois.clone(),
        trust_score: Some(trust),
        daily_visits: Some(visits),
    };
    g.news.push(article);
}

/// Writes the corpus JSONL files, `groundtruth.json`, `factuality.csv` and
/// the scenario itself.
pub fn write_scenario(
    dir: &Path,
    scenario: &Scenario,
    corpus: &Corpus,
    truth: &GroundTruth,
) -> Result<()> {
    write_corpus(corpus, dir)?;
    let put = |name: &str, body: String| {
        let p = dir.join(name);
        fs::write(&p, body).map_err(|e| Error::io(&p, e))
    };
    put(
        "groundtruth.json",
        serde_json::to_string_pretty(truth)? + "\n",
    )?;
    put(
        "scenario.json",
        serde_json::to_string_pretty(scenario)? + "\n",
    )?;
    put("factuality.csv", truth.labels_csv())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Detection {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn score_detection(truth: &BTreeSet<String>, detected: &BTreeSet<String>) -> Result<Detection> {
    if truth.is_empty() {
        return Err(Error::InvalidParameter("ground truth is empty".into()));
    }
    let hits = truth.intersection(detected).count() as f64;
    let precision = if detected.is_empty() {
        0.0
    } else {
        hits / detected.len() as f64
    };
    let recall = hits / truth.len() as f64;
    let f1 = if hits == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(Detection {
        precision,
        recall,
        f1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spreaders::spreader_scores;

    fn set(ids: &[&str]) -> BTreeSet<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn detection_scores() {
        let t = set(&["a", "b", "c", "d"]);
        assert_eq!(
            score_detection(&t, &t).unwrap(),
            Detection {
                precision: 1.0,
                recall: 1.0,
                f1: 1.0
            }
        );
        let none = score_detection(&t, &set(&["x"])).unwrap();
        assert_eq!((none.precision, none.recall, none.f1), (0.0, 0.0, 0.0));
        let half = score_detection(&t, &set(&["a", "b", "x", "y"])).unwrap();
        assert_eq!((half.precision, half.recall, half.f1), (0.5, 0.5, 0.5));
        assert!(score_detection(&BTreeSet::new(), &t).is_err());
    }

    #[test]
    fn planted_spreaders_have_exact_h() {
        let mut s = Scenario::pathways(3, true);
        s.news = None;
        s.spreaders = vec![
            SpreaderSpec {
                h: 12,
                stance: Stance::Conformist,
            },
            SpreaderSpec {
                h: 30,
                stance: Stance::Contrarian,
            },
        ];
        let (c, truth) = generate(&s).unwrap();
        let scores = spreader_scores(&c);
        for (id, h) in &truth.spreaders {
            let got = scores.iter().find(|x| &x.user_id == id).unwrap().h_index;
            assert_eq!(got, *h);
        }
    }

    #[test]
    fn infeasible_h_rejected() {
        let mut s = Scenario::coordination(0);
        s.background_users = 5;
        s.reference_group = 0;
        s.spreaders = vec![SpreaderSpec {
            h: 12,
            stance: Stance::Conformist,
        }];
        assert!(matches!(generate(&s), Err(Error::InfeasibleScenario(_))));
    }

    #[test]
    fn ring_is_planted_and_seeded() {
        let s = Scenario::coordination(1);
        let (c, truth) = generate(&s).unwrap();
        assert_eq!(truth.rings[0].len(), 10);
        let (c2, _) = generate(&s).unwrap();
        assert_eq!(c.posts(), c2.posts());
        let ring_rts = c
            .retweets()
            .filter(|p| truth.rings[0].contains(&p.author_id))
            .count();
        assert_eq!(ring_rts, 150);
    }

    #[test]
    fn news_lag_is_recoverable() {
        let s = Scenario::pathways(2, true);
        let (c, truth) = generate(&s).unwrap();
        let median_hours = |xs: &mut Vec<f64>| {
            xs.sort_by(f64::total_cmp);
            xs[xs.len() / 2]
        };
        let mut gaps = Vec::new();
        for d in &truth.dois {
            let refs = &c.doi_index()[&d.doi];
            let near =
                |t: Timestamp| ((t - d.anchor).num_milliseconds() as f64 / 3.6e6).abs() < 15.0;
            let mut sp: Vec<f64> = refs
                .posts
                .iter()
                .map(|&k| &c.posts()[k])
                .filter(|p| truth.spreaders.contains_key(&p.author_id) && near(p.timestamp))
                .map(|p| (p.timestamp - d.anchor).num_milliseconds() as f64 / 3.6e6)
                .collect();
            let mut nw: Vec<f64> = refs
                .news
                .iter()
                .map(|&k| &c.news()[k])
                .filter(|n| near(n.timestamp))
                .map(|n| (n.timestamp - d.anchor).num_milliseconds() as f64 / 3.6e6)
                .collect();
            gaps.push(median_hours(&mut nw) - median_hours(&mut sp) - d.lag_hours);
        }
        let mut g = gaps.clone();
        assert!(
            median_hours(&mut g).abs() < 1.5,
            "{:?}",
            median_hours(&mut g)
        );
    }
}
