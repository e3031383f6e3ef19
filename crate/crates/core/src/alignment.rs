//! Outlet and superspreader alignment in a shared DOI space, neighbor trust
//! profiles, and trust-score binarization.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{Corpus, NewsMention};
use crate::par;
use crate::stats::{self, roc_curve, welch_t, youden_index, RocPoint, TestResult};
use crate::vectors::{dot, l2_normalize, tfidf, SparseRow};

/// Cutoff used when no labeled factuality set is available.
pub const DEFAULT_TRUST_THRESHOLD: f64 = 0.647;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Outlet,
    User,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoiVector {
    pub entity: String,
    pub kind: EntityKind,
    /// TF-IDF weight per DOI.
    pub values: BTreeMap<String, f64>,
}

/// Outlets and superspreaders as rows of one TF-IDF matrix.
#[derive(Debug, Clone)]
pub struct DoiSpace {
    pub vocabulary: Vec<String>,
    pub vectors: Vec<DoiVector>,
    /// Unit-norm rows parallel to `vectors`.
    unit: Vec<SparseRow>,
    pub excluded_outlets: usize,
    pub excluded_users: usize,
}

impl DoiSpace {
    pub fn position(&self, kind: EntityKind, id: &str) -> Option<usize> {
        self.vectors
            .iter()
            .position(|v| v.kind == kind && v.entity == id)
    }

    pub fn similarity(&self, i: usize, j: usize) -> f64 {
        dot(&self.unit[i], &self.unit[j]).clamp(0.0, 1.0)
    }

    pub fn outlets(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vectors.len()).filter(|&i| self.vectors[i].kind == EntityKind::Outlet)
    }
}

/// Counts articles per outlet and posts per superspreader for each DOI, then
/// weights the combined matrix with TF-IDF. Entities without DOIs are dropped.
pub fn build_doi_vectors(corpus: &Corpus, superspreaders: &BTreeSet<String>) -> Result<DoiSpace> {
    if superspreaders.is_empty() {
        return Err(Error::InsufficientData("no superspreaders to align".into()));
    }
    if corpus.news().is_empty() {
        return Err(Error::InsufficientData(
            "no news mentions to align against".into(),
        ));
    }
    let mut counts: BTreeMap<(EntityKind, &str), BTreeMap<&str, f64>> = BTreeMap::new();
    let mut outlets = BTreeSet::new();
    for n in corpus.news() {
        outlets.insert(n.outlet_domain.as_str());
        for d in &n.dois {
            *counts
                .entry((EntityKind::Outlet, &n.outlet_domain))
                .or_default()
                .entry(d)
                .or_insert(0.0) += 1.0;
        }
    }
    for p in corpus
        .posts()
        .iter()
        .filter(|p| superspreaders.contains(&p.author_id))
    {
        for d in &p.dois {
            *counts
                .entry((EntityKind::User, &p.author_id))
                .or_default()
                .entry(d)
                .or_insert(0.0) += 1.0;
        }
    }
    let vocabulary: Vec<String> = counts
        .values()
        .flat_map(|m| m.keys().map(|d| d.to_string()))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let col = |d: &str| vocabulary.binary_search_by(|v| v.as_str().cmp(d)).unwrap();

    let keys: Vec<(EntityKind, &str)> = counts.keys().copied().collect();
    let raw: Vec<SparseRow> = counts
        .values()
        .map(|m| m.iter().map(|(d, c)| (col(d), *c)).collect())
        .collect();
    let weighted = tfidf(&raw, vocabulary.len());
    let excluded_outlets =
        outlets.len() - keys.iter().filter(|k| k.0 == EntityKind::Outlet).count();
    let excluded_users =
        superspreaders.len() - keys.iter().filter(|k| k.0 == EntityKind::User).count();
    let vectors = keys
        .iter()
        .zip(&weighted)
        .map(|(&(kind, id), row)| DoiVector {
            entity: id.to_string(),
            kind,
            values: row
                .iter()
                .map(|&(c, w)| (vocabulary[c].clone(), w))
                .collect(),
        })
        .collect();
    Ok(DoiSpace {
        unit: weighted.iter().map(|r| l2_normalize(r)).collect(),
        vocabulary,
        vectors,
        excluded_outlets,
        excluded_users,
    })
}

/// Mean of the non-null trust scores reported for each outlet.
pub fn outlet_trust(news: &[NewsMention]) -> BTreeMap<String, f64> {
    let mut acc: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for n in news {
        if let Some(t) = n.trust_score {
            let e = acc.entry(&n.outlet_domain).or_insert((0.0, 0));
            e.0 += t;
            e.1 += 1;
        }
    }
    acc.into_iter()
        .map(|(d, (s, c))| (d.to_string(), s / c as f64))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Neighbor {
    pub outlet: String,
    pub similarity: f64,
    pub trust: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborProfile {
    pub superspreader: String,
    pub k: usize,
    pub neighbors: Vec<Neighbor>,
    /// No outlet has positive similarity (or the user has no DOIs).
    pub empty: bool,
}

/// Top-k outlets by similarity, ties by domain; zero-similarity outlets are
/// never neighbors.
pub fn knn_outlets(
    space: &DoiSpace,
    user: &str,
    k: usize,
    trust: &BTreeMap<String, f64>,
) -> Result<NeighborProfile> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let mut neighbors: Vec<Neighbor> = match space.position(EntityKind::User, user) {
        None => Vec::new(),
        Some(u) => space
            .outlets()
            .map(|o| (o, space.similarity(u, o)))
            .filter(|(_, s)| *s > 0.0)
            .map(|(o, s)| {
                let outlet = space.vectors[o].entity.clone();
                Neighbor {
                    trust: trust.get(&outlet).copied(),
                    outlet,
                    similarity: s,
                }
            })
            .collect(),
    };
    neighbors.sort_by(|a, b| {
        b.similarity
            .total_cmp(&a.similarity)
            .then_with(|| a.outlet.cmp(&b.outlet))
    });
    neighbors.truncate(k);
    Ok(NeighborProfile {
        superspreader: user.to_string(),
        k,
        empty: neighbors.is_empty(),
        neighbors,
    })
}

pub fn knn_all(
    space: &DoiSpace,
    users: &[String],
    k: usize,
    trust: &BTreeMap<String, f64>,
) -> Result<Vec<NeighborProfile>> {
    par::map(users, |u| knn_outlets(space, u, k, trust))
        .into_iter()
        .collect()
}

/// Observation unit for neighbor tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    /// One mean per superspreader.
    #[default]
    Superspreader,
    /// Every neighbor is an observation.
    Neighbor,
}

impl std::str::FromStr for Unit {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "superspreader" => Ok(Unit::Superspreader),
            "neighbor" => Ok(Unit::Neighbor),
            other => Err(Error::InvalidParameter(format!("unknown unit `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborTests {
    pub k: usize,
    pub unit: Unit,
    pub trust: TestResult,
    pub similarity: TestResult,
    pub mean_trust: (f64, f64),
    pub mean_similarity: (f64, f64),
}

fn observations(
    profiles: &[NeighborProfile],
    unit: Unit,
    value: impl Fn(&Neighbor) -> Option<f64>,
) -> Vec<f64> {
    let mut out = Vec::new();
    for p in profiles {
        let vals: Vec<f64> = p.neighbors.iter().filter_map(&value).collect();
        match unit {
            Unit::Superspreader if !vals.is_empty() => out.push(stats::mean(&vals)),
            Unit::Superspreader => {}
            Unit::Neighbor => out.extend(vals),
        }
    }
    out
}

/// Welch tests (group a vs b) on neighbor trust and neighbor similarity.
pub fn group_neighbor_tests(
    a: &[NeighborProfile],
    b: &[NeighborProfile],
    unit: Unit,
) -> Result<NeighborTests> {
    let a: Vec<NeighborProfile> = a.iter().filter(|p| !p.empty).cloned().collect();
    let b: Vec<NeighborProfile> = b.iter().filter(|p| !p.empty).cloned().collect();
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "neighbor tests need >= 2 nonempty profiles per group (got {} and {})",
            a.len(),
            b.len()
        )));
    }
    let k = a[0].k;
    let (ta, tb) = (
        observations(&a, unit, |n| n.trust),
        observations(&b, unit, |n| n.trust),
    );
    let (sa, sb) = (
        observations(&a, unit, |n| Some(n.similarity)),
        observations(&b, unit, |n| Some(n.similarity)),
    );
    Ok(NeighborTests {
        k,
        unit,
        trust: welch_t(&ta, &tb)?,
        similarity: welch_t(&sa, &sb)?,
        mean_trust: (stats::mean(&ta), stats::mean(&tb)),
        mean_similarity: (stats::mean(&sa), stats::mean(&sb)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Factuality {
    Trustworthy,
    Questionable,
}

/// Reads `domain,label` rows with label in {low, mixed, high}; low and mixed
/// collapse to questionable. A leading header row is skipped.
pub fn load_factuality(path: &Path) -> Result<BTreeMap<String, Factuality>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let malformed = |message: String| Error::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let (domain, label) = line
            .split_once(',')
            .ok_or_else(|| malformed("expected `domain,label`".into()))?;
        let class = match label.trim().to_lowercase().as_str() {
            "high" => Factuality::Trustworthy,
            "low" | "mixed" => Factuality::Questionable,
            _ if i == 0 => continue,
            other => return Err(malformed(format!("unknown factuality label `{other}`"))),
        };
        out.insert(domain.trim().to_lowercase(), class);
    }
    Ok(out)
}

/// Joins labels with outlet trust scores; unscored domains are skipped.
pub fn labeled_scores(
    trust: &BTreeMap<String, f64>,
    labels: &BTreeMap<String, Factuality>,
) -> Vec<(f64, Factuality)> {
    labels
        .iter()
        .filter_map(|(d, c)| trust.get(d).map(|t| (*t, *c)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrustCut {
    pub threshold: f64,
    pub youden_j: f64,
    pub f1: f64,
    pub roc_points: Vec<RocPoint>,
}

impl TrustCut {
    /// A bare threshold without a fitted curve.
    pub fn fixed(threshold: f64) -> Self {
        TrustCut {
            threshold,
            youden_j: f64::NAN,
            f1: f64::NAN,
            roc_points: Vec::new(),
        }
    }
}

/// Threshold maximizing Youden's J with trustworthy as the positive class.
pub fn youden_cut(labeled: &[(f64, Factuality)]) -> Result<TrustCut> {
    let scores: Vec<f64> = labeled.iter().map(|l| l.0).collect();
    let positive: Vec<bool> = labeled
        .iter()
        .map(|l| l.1 == Factuality::Trustworthy)
        .collect();
    let roc_points = roc_curve(&scores, &positive)?;
    let best = roc_points[youden_index(&roc_points)];
    let (mut tp, mut fp, mut fn_) = (0.0, 0.0, 0.0);
    for (s, p) in scores.iter().zip(&positive) {
        match (*s >= best.threshold, *p) {
            (true, true) => tp += 1.0,
            (true, false) => fp += 1.0,
            (false, true) => fn_ += 1.0,
            (false, false) => {}
        }
    }
    let f1 = if tp == 0.0 {
        0.0
    } else {
        2.0 * tp / (2.0 * tp + fp + fn_)
    };
    Ok(TrustCut {
        threshold: best.threshold,
        youden_j: best.tpr - best.fpr,
        f1,
        roc_points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum OutletClass {
    #[serde(rename = "HC")]
    High,
    #[serde(rename = "LC")]
    Low,
}

impl OutletClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            OutletClass::High => "HC",
            OutletClass::Low => "LC",
        }
    }
}

/// HC iff trust >= threshold; outlets without a score map to `None`.
pub fn binarize_outlets(
    news: &[NewsMention],
    threshold: f64,
) -> BTreeMap<String, Option<OutletClass>> {
    let trust = outlet_trust(news);
    news.iter()
        .map(|n| {
            let class = trust.get(&n.outlet_domain).map(|&t| {
                if t >= threshold {
                    OutletClass::High
                } else {
                    OutletClass::Low
                }
            });
            (n.outlet_domain.clone(), class)
        })
        .collect()
}
