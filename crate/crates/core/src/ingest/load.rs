use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::{Corpus, LoadReport, NewsMention, PostEvent, UserRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Outlet domains (e.g. news aggregators) whose mentions are dropped.
    pub exclude_domains: BTreeSet<String>,
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<(Vec<T>, usize)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    let mut dropped = 0;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            dropped += 1;
            continue;
        }
        let record = serde_json::from_str(line).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok((out, dropped))
}

/// Loads the three JSONL inputs into a validated [`Corpus`].
pub fn load_corpus(
    posts_path: &Path,
    news_path: &Path,
    users_path: Option<&Path>,
    options: &LoadOptions,
) -> Result<(Corpus, LoadReport)> {
    let (posts, d1) = read_jsonl::<PostEvent>(posts_path)?;
    let (news, d2) = read_jsonl::<NewsMention>(news_path)?;
    let (users, d3) = match users_path {
        Some(p) => read_jsonl::<UserRecord>(p)?,
        None => (Vec::new(), 0),
    };

    let before = news.len();
    let news: Vec<NewsMention> = news
        .into_iter()
        .filter(|n| {
            !options
                .exclude_domains
                .contains(&n.outlet_domain.trim().to_lowercase())
        })
        .collect();
    let excluded = before - news.len();

    let (corpus, mut report) = Corpus::from_records(users, posts, news)?;
    report.dropped_lines = d1 + d2 + d3;
    report.excluded_news = excluded;
    Ok((corpus, report))
}

/// One domain per line; blank lines and `#` comments ignored.
pub fn load_exclusion_list(path: &Path) -> Result<BTreeSet<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect())
}

fn write_jsonl<'a, T: Serialize + 'a>(
    path: &Path,
    rows: impl Iterator<Item = &'a T>,
) -> Result<()> {
    let mut buf = Vec::new();
    for r in rows {
        serde_json::to_writer(&mut buf, r)?;
        buf.push(b'\n');
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

/// Writes `posts.jsonl`, `news.jsonl` and `users.jsonl` into `dir`.
pub fn write_corpus(corpus: &Corpus, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_jsonl(&dir.join("posts.jsonl"), corpus.posts().iter())?;
    write_jsonl(&dir.join("news.jsonl"), corpus.news().iter())?;
    write_jsonl(&dir.join("users.jsonl"), corpus.users().values())
}
