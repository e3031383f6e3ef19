//! Co-retweet similarity network and coordinated-account extraction.
//!
//! Users are represented by windowed retweet vectors: one column per
//! `(time window, retweeted post)` pair, holding how often the user retweeted
//! that post inside that window. Rows are TF-IDF weighted and compared by
//! cosine similarity. Coordinated accounts are the top percentile of
//! eigenvector centrality in the resulting graph.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::Duration;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::UndirectedGraph;
use crate::ingest::{Corpus, PostEvent, Stance, UserRecord};
use crate::par;
use crate::vectors::{pairwise_cosine, tfidf, SparseRow};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoRetweetParams {
    pub window: Duration,
    pub min_user_retweets: usize,
    pub min_post_retweets: usize,
    pub include_self_retweets: bool,
}

impl Default for CoRetweetParams {
    fn default() -> Self {
        CoRetweetParams {
            window: Duration::minutes(30),
            min_user_retweets: 5,
            min_post_retweets: 10,
            include_self_retweets: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowedRetweetMatrix {
    /// Row labels, ascending.
    pub users: Vec<String>,
    /// Column labels `(window index, retweeted post id)`, ascending.
    pub columns: Vec<(i64, String)>,
    /// Raw counts per row.
    pub rows: Vec<SparseRow>,
}

fn counted_retweets<'a>(
    corpus: &'a Corpus,
    params: &CoRetweetParams,
) -> impl Iterator<Item = &'a PostEvent> + 'a {
    let include_self = params.include_self_retweets;
    corpus.retweets().filter(move |p| {
        include_self || p.retweeted_author_id.as_deref() != Some(p.author_id.as_str())
    })
}

/// Filters on raw totals first (users with at least `min_user_retweets`
/// retweets, posts with at least `min_post_retweets`), then buckets the
/// surviving retweets into fixed windows aligned to the corpus's earliest
/// timestamp.
pub fn windowed_retweet_matrix(
    corpus: &Corpus,
    params: &CoRetweetParams,
) -> Result<WindowedRetweetMatrix> {
    if params.window <= Duration::zero() {
        return Err(Error::InvalidParameter("window must be positive".into()));
    }
    let mut user_totals: BTreeMap<&str, usize> = BTreeMap::new();
    let mut post_totals: HashMap<&str, usize> = HashMap::new();
    for rt in counted_retweets(corpus, params) {
        *user_totals.entry(&rt.author_id).or_insert(0) += 1;
        if let Some(target) = rt.retweeted_post_id.as_deref() {
            *post_totals.entry(target).or_insert(0) += 1;
        }
    }
    let users: Vec<String> = user_totals
        .iter()
        .filter(|(_, &n)| n >= params.min_user_retweets)
        .map(|(u, _)| u.to_string())
        .collect();
    let row_of: HashMap<&str, usize> = users
        .iter()
        .enumerate()
        .map(|(i, u)| (u.as_str(), i))
        .collect();

    let Some(origin) = corpus.earliest() else {
        return Ok(WindowedRetweetMatrix {
            users,
            columns: Vec::new(),
            rows: Vec::new(),
        });
    };
    let window_ms = params.window.num_milliseconds();

    let mut cells: BTreeMap<(usize, (i64, &str)), f64> = BTreeMap::new();
    for rt in counted_retweets(corpus, params) {
        let Some(&row) = row_of.get(rt.author_id.as_str()) else {
            continue;
        };
        let Some(target) = rt.retweeted_post_id.as_deref() else {
            continue;
        };
        if post_totals.get(target).copied().unwrap_or(0) < params.min_post_retweets {
            continue;
        }
        let w = (rt.timestamp - origin)
            .num_milliseconds()
            .div_euclid(window_ms);
        *cells.entry((row, (w, target))).or_insert(0.0) += 1.0;
    }
    let col_keys: BTreeSet<(i64, &str)> = cells.keys().map(|(_, c)| *c).collect();
    let col_of: BTreeMap<(i64, &str), usize> =
        col_keys.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let mut rows: Vec<SparseRow> = vec![Vec::new(); users.len()];
    for ((row, col), v) in cells {
        rows[row].push((col_of[&col], v));
    }
    for r in rows.iter_mut() {
        r.sort_by_key(|x| x.0);
    }
    Ok(WindowedRetweetMatrix {
        users,
        columns: col_keys
            .into_iter()
            .map(|(w, p)| (w, p.to_string()))
            .collect(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    pub graph: UndirectedGraph,
    pub params: CoRetweetParams,
    /// Set when the filters removed every user.
    pub empty_warning: bool,
}

pub fn build_coretweet_graph(corpus: &Corpus, params: &CoRetweetParams) -> Result<SimilarityGraph> {
    if corpus.posts().is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let m = windowed_retweet_matrix(corpus, params)?;
    let weighted = tfidf(&m.rows, m.columns.len());
    let sims = pairwise_cosine(&weighted, m.columns.len());
    let edges = sims
        .iter()
        .enumerate()
        .flat_map(|(i, list)| list.iter().map(move |&(j, w)| (i, j, w)));
    let graph = UndirectedGraph::from_edges(m.users.clone(), edges);
    Ok(SimilarityGraph {
        empty_warning: graph.node_count() == 0,
        graph,
        params: *params,
    })
}

/// Power iteration on `I + A / max_weight` from a uniform start, L2
/// normalized each step; converged when the L1 change drops below
/// `n * tol`. Scores are max-normalized to 1. On disconnected graphs this
/// lands on the dominant component.
pub fn eigenvector_centrality(
    graph: &UndirectedGraph,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::InvalidParameter(
            "centrality of an empty graph".into(),
        ));
    }
    let scale = graph.max_weight();
    if scale == 0.0 {
        return Ok(vec![1.0; n]);
    }
    let mut x = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let mut y = par::map_range(n, |i| {
            x[i] + graph
                .neighbors(i)
                .iter()
                .map(|&(j, w)| w / scale * x[j])
                .sum::<f64>()
        });
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        y.iter_mut().for_each(|v| *v /= norm);
        residual = y.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = y;
        if residual < n as f64 * tol {
            let max = x.iter().copied().fold(0.0, f64::max);
            return Ok(x.into_iter().map(|v| (v / max).max(0.0)).collect());
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual,
    })
}

/// Population the selection percentile is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PercentileBase {
    #[default]
    AllNodes,
    PositiveCentrality,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkStats {
    pub node_count: usize,
    pub edge_count: usize,
    pub pct_contrarian: Option<f64>,
    pub density: f64,
    pub modularity: Option<f64>,
    pub avg_path_length: Option<f64>,
    pub avg_clustering_coefficient: Option<f64>,
    pub diameter: Option<usize>,
    pub connected_components: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoordinationResult {
    /// Selected users, highest centrality first.
    pub selected: Vec<String>,
    pub coordinated: BTreeSet<String>,
    pub centrality: BTreeMap<String, f64>,
    pub percentile: f64,
    pub base: PercentileBase,
    /// Induced subgraph over `coordinated`, nodes in ascending id order.
    pub subgraph: UndirectedGraph,
    /// Partition of the coordinated nodes; ids are positions + 1.
    pub subclusters: Vec<Vec<String>>,
    pub stats: NetworkStats,
}

impl CoordinationResult {
    pub fn subcluster_of(&self, user: &str) -> Option<usize> {
        self.subclusters
            .iter()
            .position(|c| c.iter().any(|u| u == user))
            .map(|i| i + 1)
    }
}

/// Components larger than this are split by greedy modularity.
pub const REFINE_ABOVE: usize = 50;

pub(crate) fn selection_size(percentile: f64, n: usize) -> usize {
    (((percentile * n as f64) - 1e-9).ceil().max(0.0) as usize).min(n)
}

/// Selects the `ceil(percentile * N)` most central nodes (ties by user id).
pub fn extract_coordinated(
    graph: &SimilarityGraph,
    centrality: &[f64],
    percentile: f64,
    base: PercentileBase,
    users: &BTreeMap<String, UserRecord>,
) -> Result<CoordinationResult> {
    if !(percentile > 0.0 && percentile < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "percentile {percentile} outside (0,1)"
        )));
    }
    let g = &graph.graph;
    if centrality.len() != g.node_count() {
        return Err(Error::InvalidParameter("centrality length mismatch".into()));
    }
    let population = match base {
        PercentileBase::AllNodes => g.node_count(),
        PercentileBase::PositiveCentrality => centrality.iter().filter(|c| **c > 0.0).count(),
    };
    let k = selection_size(percentile, population);

    let mut order: Vec<usize> = (0..g.node_count()).collect();
    order.sort_by(|&a, &b| {
        centrality[b]
            .total_cmp(&centrality[a])
            .then_with(|| g.nodes()[a].cmp(&g.nodes()[b]))
    });
    order.truncate(k);
    let selected: Vec<String> = order.iter().map(|&i| g.nodes()[i].clone()).collect();

    let mut keep = order.clone();
    keep.sort_by(|&a, &b| g.nodes()[a].cmp(&g.nodes()[b]));
    let subgraph = g.induced(&keep);

    let mut subclusters = Vec::new();
    for comp in subgraph.connected_components() {
        if comp.len() > REFINE_ABOVE {
            let inner = subgraph.induced(&comp);
            for part in inner.greedy_modularity(true) {
                subclusters.push(part.iter().map(|&i| inner.nodes()[i].clone()).collect());
            }
        } else {
            subclusters.push(
                comp.iter()
                    .map(|&i| subgraph.nodes()[i].clone())
                    .collect::<Vec<_>>(),
            );
        }
    }

    let stats = network_stats(&subgraph, users);
    Ok(CoordinationResult {
        coordinated: selected.iter().cloned().collect(),
        selected,
        centrality: g
            .nodes()
            .iter()
            .cloned()
            .zip(centrality.iter().copied())
            .collect(),
        percentile,
        base,
        subgraph,
        subclusters,
        stats,
    })
}

/// Structural statistics; path metrics use unweighted hops on the largest
/// connected component, modularity uses the greedy partition.
pub fn network_stats(
    graph: &UndirectedGraph,
    users: &BTreeMap<String, UserRecord>,
) -> NetworkStats {
    let n = graph.node_count();
    let e = graph.edge_count();
    let (mut contra, mut known) = (0usize, 0usize);
    for id in graph.nodes() {
        match users.get(id).map(|u| u.stance) {
            Some(Stance::Contrarian) => {
                contra += 1;
                known += 1;
            }
            Some(Stance::Conformist) => known += 1,
            _ => {}
        }
    }
    let components = graph.connected_components();
    let density = if n < 2 {
        0.0
    } else {
        2.0 * e as f64 / (n * (n - 1)) as f64
    };
    let modularity = (e > 0).then(|| graph.modularity(&graph.greedy_modularity(false), false));
    let clustering =
        (n > 0).then(|| (0..n).map(|i| graph.local_clustering(i)).sum::<f64>() / n as f64);

    let largest = components
        .iter()
        .max_by(|a, b| a.len().cmp(&b.len()).then_with(|| b[0].cmp(&a[0])));
    let (avg_path, diameter) = match largest {
        Some(comp) if comp.len() >= 2 => {
            let dists = par::map(comp, |&s| {
                let hops = graph.bfs_hops(s);
                let mut sum = 0usize;
                let mut max = 0usize;
                for &t in comp {
                    if let Some(d) = hops[t] {
                        sum += d;
                        max = max.max(d);
                    }
                }
                (sum, max)
            });
            let total: usize = dists.iter().map(|d| d.0).sum();
            let diam = dists.iter().map(|d| d.1).max().unwrap_or(0);
            let pairs = comp.len() * (comp.len() - 1);
            (Some(total as f64 / pairs as f64), Some(diam))
        }
        _ => (None, None),
    };

    NetworkStats {
        node_count: n,
        edge_count: e,
        pct_contrarian: (known > 0).then(|| 100.0 * contra as f64 / known as f64),
        density,
        modularity,
        avg_path_length: avg_path,
        avg_clustering_coefficient: clustering,
        diameter,
        connected_components: components.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RetweetTarget {
    pub user_id: String,
    pub count: usize,
    pub stance: Stance,
    pub is_superspreader: bool,
}

/// Retweets authored by `group`, tallied by retweeted author, descending
/// (ties by user id). Self-retweets are not counted.
pub fn top_retweeted_in(
    group: &BTreeSet<String>,
    corpus: &Corpus,
    superspreaders: &BTreeSet<String>,
) -> Vec<RetweetTarget> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for rt in corpus.retweets() {
        if !group.contains(&rt.author_id) {
            continue;
        }
        if let Some(target) = rt.retweeted_author_id.as_deref() {
            if target != rt.author_id {
                *counts.entry(target).or_insert(0) += 1;
            }
        }
    }
    let mut out: Vec<RetweetTarget> = counts
        .into_iter()
        .map(|(u, c)| RetweetTarget {
            user_id: u.to_string(),
            count: c,
            stance: corpus.stance_of(u),
            is_superspreader: superspreaders.contains(u),
        })
        .collect();
    out.sort_by(|a, b| {
        b.count
            .cmp(&a.count)
            .then_with(|| a.user_id.cmp(&b.user_id))
    });
    out
}
