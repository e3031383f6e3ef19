//! Canonical data model and corpus loading.

mod load;
mod media;
mod syndication;

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use load::{load_corpus, load_exclusion_list, write_corpus, LoadOptions};
pub use media::{rolling_media_series, MediaDay};
pub use syndication::{
    build_syndication_graph, dedup_syndication, normalize_title, SyndicationGraph,
};

pub type Timestamp = DateTime<Utc>;

/// Hours since the Unix epoch.
pub fn hours(ts: &Timestamp) -> f64 {
    ts.timestamp() as f64 / 3600.0 + f64::from(ts.timestamp_subsec_nanos()) / 3.6e12
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(rename_all = "snake_case")]
pub enum Stance {
    Contrarian,
    Conformist,
    #[default]
    Unlabeled,
}

impl Stance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stance::Contrarian => "contrarian",
            Stance::Conformist => "conformist",
            Stance::Unlabeled => "unlabeled",
        }
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(rename_all = "snake_case")]
pub enum Credential {
    Physician,
    Scientist,
    ScienceCommunicator,
    ScienceOrg,
    OtherAuthority,
    NonScientific,
    #[default]
    Unlabeled,
}

impl Credential {
    pub fn as_str(&self) -> &'static str {
        match self {
            Credential::Physician => "physician",
            Credential::Scientist => "scientist",
            Credential::ScienceCommunicator => "science_communicator",
            Credential::ScienceOrg => "science_org",
            Credential::OtherAuthority => "other_authority",
            Credential::NonScientific => "non_scientific",
            Credential::Unlabeled => "unlabeled",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Emotion {
    Anger,
    Disgust,
    Fear,
    Joy,
    Neutral,
    Sadness,
    Surprise,
}

impl Emotion {
    pub const ALL: [Emotion; 7] = [
        Emotion::Anger,
        Emotion::Disgust,
        Emotion::Fear,
        Emotion::Joy,
        Emotion::Neutral,
        Emotion::Sadness,
        Emotion::Surprise,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Emotion::Anger => "anger",
            Emotion::Disgust => "disgust",
            Emotion::Fear => "fear",
            Emotion::Joy => "joy",
            Emotion::Neutral => "neutral",
            Emotion::Sadness => "sadness",
            Emotion::Surprise => "surprise",
        }
    }

    pub fn index(&self) -> usize {
        *self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PostKind {
    Original,
    Retweet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserRecord {
    pub user_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub display_name: Option<String>,
    #[serde(default)]
    pub stance: Stance,
    #[serde(default)]
    pub followers: u64,
    #[serde(default)]
    pub following: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<Timestamp>,
    #[serde(default)]
    pub verified: bool,
    #[serde(default)]
    pub credential: Credential,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bot_score: Option<f64>,
}

impl UserRecord {
    /// Placeholder for an author referenced by a post but absent from the
    /// users file.
    pub fn unlabeled(user_id: impl Into<String>) -> Self {
        UserRecord {
            user_id: user_id.into(),
            display_name: None,
            stance: Stance::Unlabeled,
            followers: 0,
            following: 0,
            created_at: None,
            verified: false,
            credential: Credential::Unlabeled,
            bot_score: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostEvent {
    pub post_id: String,
    pub author_id: String,
    pub timestamp: Timestamp,
    pub kind: PostKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retweeted_post_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retweeted_author_id: Option<String>,
    #[serde(default)]
    pub dois: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic_label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emotion_label: Option<Emotion>,
    #[serde(default)]
    pub terms: Vec<String>,
    #[serde(default)]
    pub hashtags: Vec<String>,
}

impl PostEvent {
    pub fn is_retweet(&self) -> bool {
        self.kind == PostKind::Retweet
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewsMention {
    pub article_id: String,
    pub outlet_domain: String,
    pub timestamp: Timestamp,
    pub title: String,
    #[serde(default)]
    pub dois: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trust_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub daily_visits: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DoiRefs {
    pub posts: Vec<usize>,
    pub news: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub posts: usize,
    pub news: usize,
    pub users: usize,
    pub synthesized_users: usize,
    pub dropped_lines: usize,
    pub excluded_news: usize,
}

/// Validated, immutable corpus. Posts and news are ordered by
/// `(timestamp, id)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    users: BTreeMap<String, UserRecord>,
    posts: Vec<PostEvent>,
    news: Vec<NewsMention>,
    doi_index: BTreeMap<String, DoiRefs>,
}

fn invalid(kind: &'static str, id: &str, message: impl Into<String>) -> Error {
    Error::InvalidRecord {
        kind,
        id: id.to_string(),
        message: message.into(),
    }
}

fn validate_post(p: &PostEvent) -> Result<()> {
    if p.post_id.is_empty() {
        return Err(invalid("post", &p.post_id, "empty post_id"));
    }
    if p.author_id.is_empty() {
        return Err(invalid("post", &p.post_id, "empty author_id"));
    }
    match (p.kind, &p.retweeted_post_id) {
        (PostKind::Retweet, None) => {
            return Err(invalid(
                "post",
                &p.post_id,
                "retweet without retweeted_post_id",
            ))
        }
        (PostKind::Original, Some(_)) => {
            return Err(invalid(
                "post",
                &p.post_id,
                "original post carries retweeted_post_id",
            ))
        }
        _ => {}
    }
    if p.dois.is_empty() && p.terms.is_empty() {
        return Err(invalid(
            "post",
            &p.post_id,
            "neither dois nor terms present",
        ));
    }
    Ok(())
}

fn validate_news(n: &mut NewsMention) -> Result<()> {
    n.outlet_domain = n.outlet_domain.trim().to_lowercase();
    if n.article_id.is_empty() {
        return Err(invalid("news", &n.article_id, "empty article_id"));
    }
    if n.outlet_domain.is_empty() {
        return Err(invalid("news", &n.article_id, "empty outlet_domain"));
    }
    if let Some(t) = n.trust_score {
        if !(0.0..=1.0).contains(&t) {
            return Err(invalid(
                "news",
                &n.article_id,
                format!("trust_score {t} outside [0,1]"),
            ));
        }
    }
    Ok(())
}

fn validate_user(u: &UserRecord) -> Result<()> {
    if u.user_id.is_empty() {
        return Err(invalid("user", "", "empty user_id"));
    }
    if let Some(b) = u.bot_score {
        if !(0.0..=1.0).contains(&b) {
            return Err(invalid(
                "user",
                &u.user_id,
                format!("bot_score {b} outside [0,1]"),
            ));
        }
    }
    Ok(())
}

impl Corpus {
    /// Validates and indexes raw records. Authors referenced by posts but
    /// missing from `users` get unlabeled placeholder records.
    pub fn from_records(
        users: Vec<UserRecord>,
        mut posts: Vec<PostEvent>,
        mut news: Vec<NewsMention>,
    ) -> Result<(Corpus, LoadReport)> {
        let mut report = LoadReport::default();
        let mut user_map = BTreeMap::new();
        for u in users {
            validate_user(&u)?;
            if user_map.contains_key(&u.user_id) {
                return Err(Error::DuplicateId {
                    kind: "user",
                    id: u.user_id,
                });
            }
            user_map.insert(u.user_id.clone(), u);
        }
        report.users = user_map.len();

        let mut seen = BTreeSet::new();
        for p in &posts {
            validate_post(p)?;
            if !seen.insert(p.post_id.as_str()) {
                return Err(Error::DuplicateId {
                    kind: "post",
                    id: p.post_id.clone(),
                });
            }
        }
        let mut seen = BTreeSet::new();
        for n in news.iter_mut() {
            validate_news(n)?;
        }
        for n in &news {
            if !seen.insert(n.article_id.as_str()) {
                return Err(Error::DuplicateId {
                    kind: "news",
                    id: n.article_id.clone(),
                });
            }
        }

        for p in &posts {
            let refs = std::iter::once(&p.author_id).chain(p.retweeted_author_id.iter());
            for id in refs {
                if !user_map.contains_key(id) {
                    user_map.insert(id.clone(), UserRecord::unlabeled(id.clone()));
                    report.synthesized_users += 1;
                }
            }
        }

        posts.sort_by(|a, b| {
            a.timestamp
                .cmp(&b.timestamp)
                .then_with(|| a.post_id.cmp(&b.post_id))
        });
        news.sort_by(|a, b| {
            a.timestamp
                .cmp(&b.timestamp)
                .then_with(|| a.article_id.cmp(&b.article_id))
        });
        report.posts = posts.len();
        report.news = news.len();

        let mut corpus = Corpus {
            users: user_map,
            posts,
            news,
            doi_index: BTreeMap::new(),
        };
        corpus.reindex();
        Ok((corpus, report))
    }

    fn reindex(&mut self) {
        let mut index: BTreeMap<String, DoiRefs> = BTreeMap::new();
        for (i, p) in self.posts.iter().enumerate() {
            for d in &p.dois {
                index.entry(d.clone()).or_default().posts.push(i);
            }
        }
        for (i, n) in self.news.iter().enumerate() {
            for d in &n.dois {
                index.entry(d.clone()).or_default().news.push(i);
            }
        }
        self.doi_index = index;
    }

    /// Same users and posts with a replacement news list (e.g. after
    /// syndication dedup).
    pub fn with_news(&self, news: Vec<NewsMention>) -> Result<Corpus> {
        let users = self.users.values().cloned().collect();
        Corpus::from_records(users, self.posts.clone(), news).map(|(c, _)| c)
    }

    pub fn users(&self) -> &BTreeMap<String, UserRecord> {
        &self.users
    }

    pub fn user(&self, id: &str) -> Option<&UserRecord> {
        self.users.get(id)
    }

    pub fn stance_of(&self, id: &str) -> Stance {
        self.users.get(id).map(|u| u.stance).unwrap_or_default()
    }

    pub fn posts(&self) -> &[PostEvent] {
        &self.posts
    }

    pub fn news(&self) -> &[NewsMention] {
        &self.news
    }

    pub fn doi_index(&self) -> &BTreeMap<String, DoiRefs> {
        &self.doi_index
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty() && self.news.is_empty()
    }

    pub fn retweets(&self) -> impl Iterator<Item = &PostEvent> {
        self.posts.iter().filter(|p| p.is_retweet())
    }

    pub fn originals(&self) -> impl Iterator<Item = &PostEvent> {
        self.posts.iter().filter(|p| !p.is_retweet())
    }

    /// Earliest timestamp across posts and news.
    pub fn earliest(&self) -> Option<Timestamp> {
        let p = self.posts.first().map(|p| p.timestamp);
        let n = self.news.first().map(|n| n.timestamp);
        match (p, n) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}
