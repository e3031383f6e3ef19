//! End-to-end runs: configuration, stage orchestration and output files.
//!
//! Every stage renders its outputs into memory first; files are written only
//! after the whole run succeeds, together with a manifest of config and
//! input/output digests.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{Duration, SecondsFormat};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::alignment::{self, NeighborTests, OutletClass, TrustCut, Unit, DEFAULT_TRUST_THRESHOLD};
use crate::coactivity::{
    self, CoRetweetParams, CoordinationResult, PercentileBase, SimilarityGraph,
};
use crate::error::{Error, Result};
use crate::export::{coordinated_dot, coordinated_graphml, num, opt, opt_num, precedence_dot, Csv};
use crate::ingest::{self, Corpus, LoadOptions, LoadReport, Stance, Timestamp};
use crate::pathways::{self, Bandwidth, PathwayParams, PeakMode};
use crate::profiling::{self, EventBase, TermField};
use crate::spreaders::{self, SpreaderSelection};
use crate::synth::{self, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    Coord,
    Spreaders,
    Profile,
    Align,
    Pathways,
    Syndication,
    All,
}

impl Stage {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Coord => "coord",
            Stage::Spreaders => "spreaders",
            Stage::Profile => "profile",
            Stage::Align => "align",
            Stage::Pathways => "pathways",
            Stage::Syndication => "syndication",
            Stage::All => "all",
        }
    }

    fn includes(&self, other: Stage) -> bool {
        *self == Stage::All || *self == other
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub posts: Option<PathBuf>,
    pub news: Option<PathBuf>,
    pub users: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub exclude_aggregators: Option<PathBuf>,
    pub stoplist: Option<PathBuf>,
    pub out: PathBuf,
    pub window_min: i64,
    pub min_user_rt: usize,
    pub min_post_rt: usize,
    pub include_self_retweets: bool,
    /// Percentages, e.g. 1.0 for the top 1%.
    pub centrality_pct: f64,
    pub robustness_pcts: Vec<f64>,
    pub percentile_base: PercentileBase,
    pub centrality_tol: f64,
    pub centrality_max_iter: usize,
    pub spreader_pct: f64,
    pub knn: Vec<usize>,
    pub unit: Unit,
    pub grid: usize,
    pub bandwidth: Bandwidth,
    pub min_mass: f64,
    /// Hours; the unadjusted region is always reported as lookback 0.
    pub lookback: Vec<f64>,
    pub min_media: usize,
    pub min_social: usize,
    pub min_class_mentions: usize,
    pub peaks: PeakMode,
    pub boot_iters: usize,
    pub seed: u64,
    pub gini_base: EventBase,
    pub top_terms: usize,
    pub syndication_window_min: i64,
    pub media_window_days: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            posts: None,
            news: None,
            users: None,
            labels: None,
            exclude_aggregators: None,
            stoplist: None,
            out: PathBuf::from("out"),
            window_min: 30,
            min_user_rt: 5,
            min_post_rt: 10,
            include_self_retweets: false,
            centrality_pct: 1.0,
            robustness_pcts: vec![0.5, 1.0, 2.0],
            percentile_base: PercentileBase::AllNodes,
            centrality_tol: 1e-10,
            centrality_max_iter: 10_000,
            spreader_pct: 1.0,
            knn: vec![1, 5, 10],
            unit: Unit::Superspreader,
            grid: 512,
            bandwidth: Bandwidth::Silverman,
            min_mass: 0.5,
            lookback: vec![3.0, 6.0, 12.0],
            min_media: 100,
            min_social: 100,
            min_class_mentions: 3,
            peaks: PeakMode::ClassConditional,
            boot_iters: 10_000,
            seed: 0,
            gini_base: EventBase::Retweets,
            top_terms: 20,
            syndication_window_min: 60,
            media_window_days: 7,
        }
    }
}

fn bad(key: &str, value: &str) -> Error {
    Error::InvalidParameter(format!("invalid value `{value}` for `{key}`"))
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| bad(key, value))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(key, value)),
    }
}

impl RunConfig {
    /// Applies one `key = value` setting; keys match the long flag names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let path = || Some(PathBuf::from(v));
        match key {
            "input" => self.input = path(),
            "posts" => self.posts = path(),
            "news" => self.news = path(),
            "users" => self.users = path(),
            "labels" => self.labels = path(),
            "exclude-aggregators" => self.exclude_aggregators = path(),
            "stoplist" => self.stoplist = path(),
            "out" => self.out = PathBuf::from(v),
            "window-min" => self.window_min = parse(key, v)?,
            "min-user-rt" => self.min_user_rt = parse(key, v)?,
            "min-post-rt" => self.min_post_rt = parse(key, v)?,
            "include-self-retweets" => self.include_self_retweets = parse_bool(key, v)?,
            "centrality-pct" => self.centrality_pct = parse(key, v)?,
            "robustness-pcts" => self.robustness_pcts = parse_list(key, v)?,
            "percentile-base" => {
                self.percentile_base = match v {
                    "all" => PercentileBase::AllNodes,
                    "positive" => PercentileBase::PositiveCentrality,
                    _ => return Err(bad(key, v)),
                }
            }
            "centrality-tol" => self.centrality_tol = parse(key, v)?,
            "centrality-max-iter" => self.centrality_max_iter = parse(key, v)?,
            "spreader-pct" => self.spreader_pct = parse(key, v)?,
            "knn" => self.knn = parse_list(key, v)?,
            "unit" => self.unit = v.parse()?,
            "grid" => self.grid = parse(key, v)?,
            "bandwidth" => self.bandwidth = v.parse()?,
            "min-mass" => self.min_mass = parse(key, v)?,
            "lookback" => self.lookback = parse_list(key, v)?,
            "min-media" => self.min_media = parse(key, v)?,
            "min-social" => self.min_social = parse(key, v)?,
            "min-class-mentions" => self.min_class_mentions = parse(key, v)?,
            "peaks" => self.peaks = v.parse()?,
            "boot-iters" => self.boot_iters = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "gini-base" => self.gini_base = v.parse()?,
            "top-terms" => self.top_terms = parse(key, v)?,
            "syndication-window-min" => self.syndication_window_min = parse(key, v)?,
            "media-window-days" => self.media_window_days = parse(key, v)?,
            _ => return Err(Error::InvalidParameter(format!("unknown setting `{key}`"))),
        }
        Ok(())
    }

    /// Reads a flat `key = value` file; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "{}:{}: expected `key = value`",
                    path.display(),
                    i + 1
                ))
            })?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    /// Canonical non-path settings, as hashed into the manifest.
    pub fn settings(&self) -> BTreeMap<&'static str, String> {
        let list = |xs: &[f64]| {
            xs.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let base = match self.percentile_base {
            PercentileBase::AllNodes => "all",
            PercentileBase::PositiveCentrality => "positive",
        };
        let bandwidth = match self.bandwidth {
            Bandwidth::Silverman => "silverman".to_string(),
            Bandwidth::Hours(h) => h.to_string(),
        };
        let peaks = match self.peaks {
            PeakMode::ClassConditional => "class",
            PeakMode::Global => "global",
        };
        let lower = |v: serde_json::Value| v.as_str().unwrap_or_default().to_string();
        BTreeMap::from([
            ("window-min", self.window_min.to_string()),
            ("min-user-rt", self.min_user_rt.to_string()),
            ("min-post-rt", self.min_post_rt.to_string()),
            (
                "include-self-retweets",
                self.include_self_retweets.to_string(),
            ),
            ("centrality-pct", self.centrality_pct.to_string()),
            ("robustness-pcts", list(&self.robustness_pcts)),
            ("percentile-base", base.to_string()),
            ("centrality-tol", self.centrality_tol.to_string()),
            ("centrality-max-iter", self.centrality_max_iter.to_string()),
            ("spreader-pct", self.spreader_pct.to_string()),
            (
                "knn",
                self.knn
                    .iter()
                    .map(|k| k.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("unit", lower(json!(self.unit))),
            ("grid", self.grid.to_string()),
            ("bandwidth", bandwidth),
            ("min-mass", self.min_mass.to_string()),
            ("lookback", list(&self.lookback)),
            ("min-media", self.min_media.to_string()),
            ("min-social", self.min_social.to_string()),
            ("min-class-mentions", self.min_class_mentions.to_string()),
            ("peaks", peaks.to_string()),
            ("boot-iters", self.boot_iters.to_string()),
            ("seed", self.seed.to_string()),
            ("gini-base", lower(json!(self.gini_base))),
            ("top-terms", self.top_terms.to_string()),
            (
                "syndication-window-min",
                self.syndication_window_min.to_string(),
            ),
            ("media-window-days", self.media_window_days.to_string()),
        ])
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        let pct_ok = |p: f64| p > 0.0 && p < 100.0;
        if self.window_min <= 0 || self.syndication_window_min < 0 {
            return bad("windows must be positive");
        }
        if !pct_ok(self.centrality_pct)
            || !pct_ok(self.spreader_pct)
            || !self.robustness_pcts.iter().all(|p| pct_ok(*p))
        {
            return bad("percentiles must lie in (0, 100)");
        }
        if self.knn.is_empty() || self.knn.contains(&0) {
            return bad("knn needs at least one k >= 1");
        }
        if self.grid < 2 || !(0.0..=1.0).contains(&self.min_mass) {
            return bad("grid must have >= 2 points and min-mass lie in [0, 1]");
        }
        if self.lookback.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return bad("lookbacks must be nonnegative hours");
        }
        if self.boot_iters < 2 || self.media_window_days == 0 || self.centrality_max_iter == 0 {
            return bad("boot-iters must be >= 2, media-window-days and centrality-max-iter >= 1");
        }
        if self.posts.is_none() && self.input.is_none() {
            return bad("no input: pass --input DIR or --posts/--news");
        }
        Ok(())
    }

    fn resolve(&self, explicit: &Option<PathBuf>, name: &str) -> Option<PathBuf> {
        explicit
            .clone()
            .or_else(|| self.input.as_ref().map(|d| d.join(name)))
    }

    fn posts_path(&self) -> Option<PathBuf> {
        self.resolve(&self.posts, "posts.jsonl")
    }

    fn news_path(&self) -> Option<PathBuf> {
        self.resolve(&self.news, "news.jsonl")
    }

    /// Users and labels are optional; the defaults are used only if present.
    fn optional(&self, explicit: &Option<PathBuf>, name: &str) -> Option<PathBuf> {
        match explicit {
            Some(p) => Some(p.clone()),
            None => self
                .input
                .as_ref()
                .map(|d| d.join(name))
                .filter(|p| p.exists()),
        }
    }

    fn pathway_params(&self) -> PathwayParams {
        let mut lookbacks = vec![0.0];
        lookbacks.extend(self.lookback.iter().copied().filter(|l| *l > 0.0));
        PathwayParams {
            min_media: self.min_media,
            min_social: self.min_social,
            grid_points: self.grid,
            bandwidth: self.bandwidth,
            min_mass: self.min_mass,
            lookbacks,
            min_class_mentions: self.min_class_mentions,
            peaks: self.peaks,
        }
    }

    fn coretweet_params(&self) -> CoRetweetParams {
        CoRetweetParams {
            window: Duration::minutes(self.window_min),
            min_user_retweets: self.min_user_rt,
            min_post_retweets: self.min_post_rt,
            include_self_retweets: self.include_self_retweets,
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn ts(t: Timestamp) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

/// Loaded inputs shared by all stages.
struct Ctx<'a> {
    cfg: &'a RunConfig,
    raw_news: Vec<ingest::NewsMention>,
    corpus: Corpus,
    report: LoadReport,
    inputs: BTreeMap<&'static str, String>,
    outputs: BTreeMap<String, String>,
    superspreaders: Option<SpreaderSelection>,
    coordination: Option<(SimilarityGraph, Vec<f64>, CoordinationResult)>,
    cut: Option<TrustCut>,
}

impl<'a> Ctx<'a> {
    fn load(cfg: &'a RunConfig) -> Result<Self> {
        let posts = cfg
            .posts_path()
            .ok_or_else(|| Error::InvalidParameter("no posts file".into()))?;
        let news = cfg
            .news_path()
            .ok_or_else(|| Error::InvalidParameter("no news file".into()))?;
        let users = cfg.optional(&cfg.users, "users.jsonl");
        let mut inputs = BTreeMap::new();
        let mut digest = |role: &'static str, p: &Path| -> Result<()> {
            let bytes = fs::read(p).map_err(|e| Error::io(p, e))?;
            inputs.insert(role, sha256_hex(&bytes));
            Ok(())
        };
        digest("posts", &posts)?;
        digest("news", &news)?;
        if let Some(u) = &users {
            digest("users", u)?;
        }
        let mut options = LoadOptions::default();
        if let Some(p) = &cfg.exclude_aggregators {
            digest("exclude_aggregators", p)?;
            options.exclude_domains = ingest::load_exclusion_list(p)?;
        }
        if let Some(p) = cfg.optional(&cfg.labels, "factuality.csv") {
            digest("labels", &p)?;
        }
        if let Some(p) = &cfg.stoplist {
            digest("stoplist", p)?;
        }
        let (raw, report) = ingest::load_corpus(&posts, &news, users.as_deref(), &options)?;
        if raw.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let raw_news = raw.news().to_vec();
        let corpus = raw.with_news(ingest::dedup_syndication(&raw_news))?;
        Ok(Ctx {
            cfg,
            raw_news,
            corpus,
            report,
            inputs,
            outputs: BTreeMap::new(),
            superspreaders: None,
            coordination: None,
            cut: None,
        })
    }

    fn put(&mut self, name: &str, body: String) {
        self.outputs.insert(name.to_string(), body);
    }

    fn superspreaders(&mut self) -> Result<&SpreaderSelection> {
        if self.superspreaders.is_none() {
            let s = spreaders::select_superspreaders(&self.corpus, self.cfg.spreader_pct / 100.0)
                .map_err(|e| e.within("spreaders"))?;
            self.superspreaders = Some(s);
        }
        Ok(self.superspreaders.as_ref().expect("just set"))
    }

    fn coordination(&mut self) -> Result<&(SimilarityGraph, Vec<f64>, CoordinationResult)> {
        if self.coordination.is_none() {
            let cfg = self.cfg;
            let run = || -> Result<_> {
                let graph =
                    coactivity::build_coretweet_graph(&self.corpus, &cfg.coretweet_params())?;
                let centrality = coactivity::eigenvector_centrality(
                    &graph.graph,
                    cfg.centrality_tol,
                    cfg.centrality_max_iter,
                )?;
                let result = coactivity::extract_coordinated(
                    &graph,
                    &centrality,
                    cfg.centrality_pct / 100.0,
                    cfg.percentile_base,
                    self.corpus.users(),
                )?;
                Ok((graph, centrality, result))
            };
            self.coordination = Some(run().map_err(|e| e.within("coactivity"))?);
        }
        Ok(self.coordination.as_ref().expect("just set"))
    }

    fn trust_cut(&mut self) -> Result<TrustCut> {
        if self.cut.is_none() {
            let cut = match self.cfg.optional(&self.cfg.labels, "factuality.csv") {
                Some(p) => {
                    let labels = alignment::load_factuality(&p)?;
                    let trust = alignment::outlet_trust(self.corpus.news());
                    alignment::youden_cut(&alignment::labeled_scores(&trust, &labels))
                        .map_err(|e| e.within("alignment"))?
                }
                None => TrustCut::fixed(DEFAULT_TRUST_THRESHOLD),
            };
            self.cut = Some(cut);
        }
        Ok(self.cut.clone().expect("just set"))
    }

    fn stance_members(&self, stance: Stance) -> BTreeSet<String> {
        self.corpus
            .users()
            .iter()
            .filter(|(_, u)| u.stance == stance)
            .map(|(id, _)| id.clone())
            .collect()
    }
}

fn ingest_outputs(ctx: &mut Ctx) -> Result<()> {
    let body = json!({
        "load": ctx.report,
        "news_after_dedup": ctx.corpus.news().len(),
        "syndicated_removed": ctx.raw_news.len() - ctx.corpus.news().len(),
    });
    ctx.put("load_report.json", to_json(&body)?);
    Ok(())
}

fn syndication_outputs(ctx: &mut Ctx) -> Result<()> {
    let graph = ingest::build_syndication_graph(
        &ctx.raw_news,
        Duration::minutes(ctx.cfg.syndication_window_min),
    );
    let mut edges = Csv::new(&["outlet_a", "outlet_b", "weight"]);
    for ((a, b), w) in &graph.edges {
        edges.row(&[a.as_str(), b, &w.to_string()]);
    }
    ctx.put("syndication_edges.csv", edges.finish());
    let series = ingest::rolling_media_series(ctx.corpus.news(), ctx.cfg.media_window_days)
        .map_err(|e| e.within("ingest"))?;
    let mut csv = Csv::new(&[
        "date",
        "outlet_count",
        "total_visits",
        "mean_trust",
        "rolling_outlet_count",
        "rolling_total_visits",
        "rolling_mean_trust",
    ]);
    for d in series {
        csv.row(&[
            d.date.to_string(),
            d.outlet_count.to_string(),
            d.total_visits.to_string(),
            opt_num(d.mean_trust),
            num(d.rolling_outlet_count),
            num(d.rolling_total_visits),
            opt_num(d.rolling_mean_trust),
        ]);
    }
    ctx.put("media_series.csv", csv.finish());
    Ok(())
}

const STATS_HEADER: [&str; 10] = [
    "threshold",
    "#nodes",
    "%contrarian",
    "Density",
    "Modularity",
    "Avg. path length",
    "Avg. clustering coefficient",
    "Diameter",
    "Connected components",
    "#edges",
];

fn stats_row(pct: f64, s: &coactivity::NetworkStats) -> Vec<String> {
    vec![
        format!("{pct}%"),
        s.node_count.to_string(),
        opt_num(s.pct_contrarian),
        num(s.density),
        opt_num(s.modularity),
        opt_num(s.avg_path_length),
        opt_num(s.avg_clustering_coefficient),
        opt(s.diameter),
        s.connected_components.to_string(),
        s.edge_count.to_string(),
    ]
}

fn coord_outputs(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let supers = ctx.superspreaders()?.selected.clone();
    let (graph, centrality, result) = ctx.coordination()?.clone();
    let users = ctx.corpus.users();
    let graphml = coordinated_graphml(&result, users);
    let dot = coordinated_dot(&result, users);

    let mut members = Csv::new(&["rank", "user_id", "centrality", "stance", "subcluster"]);
    for (rank, id) in result.selected.iter().enumerate() {
        members.row(&[
            (rank + 1).to_string(),
            id.clone(),
            num(result.centrality[id]),
            ctx.corpus.stance_of(id).as_str().to_string(),
            opt(result.subcluster_of(id)),
        ]);
    }
    let mut main = Csv::new(&STATS_HEADER);
    main.row(&stats_row(cfg.centrality_pct, &result.stats));
    let mut robust = Csv::new(&STATS_HEADER);
    for &p in &cfg.robustness_pcts {
        let r = coactivity::extract_coordinated(
            &graph,
            &centrality,
            p / 100.0,
            cfg.percentile_base,
            users,
        )
        .map_err(|e| e.within("coactivity"))?;
        robust.row(&stats_row(p, &r.stats));
    }

    let nodes: BTreeSet<String> = graph.graph.nodes().iter().cloned().collect();
    let contingency = spreaders::stance_contingency(&result.coordinated, &nodes, &ctx.corpus).ok();
    let crossover =
        spreaders::amplification_crossover(&result.coordinated, &supers, &ctx.corpus).ok();
    let top: Vec<_> = coactivity::top_retweeted_in(&result.coordinated, &ctx.corpus, &supers)
        .into_iter()
        .take(20)
        .collect();
    let summary = json!({
        "graph_nodes": graph.graph.node_count(),
        "graph_edges": graph.graph.edge_count(),
        "empty_warning": graph.empty_warning,
        "selected": result.selected.len(),
        "subclusters": result.subclusters,
        "stance_contingency": contingency,
        "crossover": crossover,
        "top_retweeted": top,
    });

    ctx.put("coordinated.graphml", graphml);
    ctx.put("coordinated.dot", dot);
    ctx.put("coordinated.csv", members.finish());
    ctx.put("network_stats.csv", main.finish());
    ctx.put("network_stats_robustness.csv", robust.finish());
    ctx.put("coordination.json", to_json(&summary)?);
    Ok(())
}

fn spreader_outputs(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let sel = ctx.superspreaders()?.clone();
    let mut csv = Csv::new(&["user_id", "h_index", "stance", "credential", "selected"]);
    for s in &sel.ranked {
        let (stance, cred) = ctx
            .corpus
            .user(&s.user_id)
            .map(|u| (u.stance.as_str(), u.credential.as_str()))
            .unwrap_or(("unlabeled", "unlabeled"));
        csv.row(&[
            &s.user_id,
            &s.h_index.to_string(),
            stance,
            cred,
            &sel.selected.contains(&s.user_id).to_string(),
        ]);
    }
    ctx.put("spreaders.csv", csv.finish());

    let metrics = spreaders::profile_metrics(&ctx.corpus);
    let posters: BTreeSet<&str> = ctx
        .corpus
        .posts()
        .iter()
        .map(|p| p.author_id.as_str())
        .collect();
    let mut rows = Csv::new(&[
        "metric",
        "group_a",
        "group_b",
        "t_statistic",
        "p_value",
        "iterations",
        "mean_a",
        "mean_b",
        "excluded",
    ]);
    for stance in [Stance::Contrarian, Stance::Conformist] {
        let members = ctx.stance_members(stance);
        let target: BTreeSet<String> = members.intersection(&sel.selected).cloned().collect();
        let population: BTreeSet<String> = members
            .iter()
            .filter(|u| !sel.selected.contains(*u) && posters.contains(u.as_str()))
            .cloned()
            .collect();
        for (k, (name, values)) in metrics.iter().enumerate() {
            let seed = cfg.seed.wrapping_add(k as u64);
            let Ok(mut c) = spreaders::bootstrap_profile_test(
                name,
                &target,
                &population,
                values,
                cfg.boot_iters,
                seed,
            ) else {
                continue;
            };
            c.group_a = format!("{}_superspreaders", stance.as_str());
            c.group_b = format!("{}_others", stance.as_str());
            rows.row(&[
                c.metric,
                c.group_a,
                c.group_b,
                num(c.t_statistic),
                num(c.p_value),
                c.iterations.to_string(),
                num(c.mean_a),
                num(c.mean_b),
                c.excluded.to_string(),
            ]);
        }
    }
    ctx.outputs.insert("comparisons.csv".into(), rows.finish());
    Ok(())
}

fn profile_outputs(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let coordinated = ctx.coordination()?.2.coordinated.clone();
    let supers = ctx.superspreaders()?.selected.clone();
    let contrarians = ctx.stance_members(Stance::Contrarian);
    let conformists = ctx.stance_members(Stance::Conformist);
    let corpus = &ctx.corpus;
    let groups: Vec<(String, BTreeSet<String>)> = vec![
        ("coordinated".into(), coordinated.clone()),
        ("contrarian".into(), contrarians.clone()),
        ("conformist".into(), conformists.clone()),
        (
            "contrarian_superspreaders".into(),
            supers.intersection(&contrarians).cloned().collect(),
        ),
        (
            "conformist_superspreaders".into(),
            supers.intersection(&conformists).cloned().collect(),
        ),
    ];

    let mut shares = Csv::new(&["group", "topic", "count", "share"]);
    let mut ginis = BTreeMap::new();
    for (label, members) in &groups {
        let Ok(d) = profiling::topic_distribution(label, members, corpus, cfg.gini_base) else {
            continue;
        };
        for (topic, count) in &d.counts {
            shares.row(&[
                label.as_str(),
                topic,
                &count.to_string(),
                &num(d.shares[topic]),
            ]);
        }
        ginis.insert(label.clone(), d.gini);
    }

    // Bootstrap populations: active users (by the co-retweet user floor)
    // outside the coordinated set.
    let mut retweets: BTreeMap<&str, usize> = BTreeMap::new();
    for rt in corpus.retweets() {
        *retweets.entry(&rt.author_id).or_insert(0) += 1;
    }
    let active: BTreeSet<String> = retweets
        .iter()
        .filter(|(u, n)| **n >= cfg.min_user_rt && !coordinated.contains(**u))
        .map(|(u, _)| u.to_string())
        .collect();
    let active_contrarian: BTreeSet<String> = active.intersection(&contrarians).cloned().collect();
    let mut comparisons = Vec::new();
    for (label, population) in [
        ("active_contrarian", &active_contrarian),
        ("active_all", &active),
    ] {
        let r = profiling::bootstrap_gini_diff(
            &coordinated,
            population,
            corpus,
            cfg.gini_base,
            cfg.boot_iters,
            cfg.seed,
        );
        comparisons.push(match r {
            Ok(mut c) => {
                c.group_a = "coordinated".into();
                c.group_b = label.into();
                json!(c)
            }
            Err(e) => json!({ "group_a": "coordinated", "group_b": label, "error": e.to_string() }),
        });
    }
    ctx.outputs
        .insert("topicshares.csv".into(), shares.finish());
    ctx.outputs.insert(
        "gini.json".into(),
        to_json(&json!({ "base": cfg.gini_base, "gini": ginis, "comparisons": comparisons }))?,
    );

    let stoplist = match &cfg.stoplist {
        Some(p) => profiling::parse_stoplist(&fs::read_to_string(p).map_err(|e| Error::io(p, e))?),
        None => profiling::parse_stoplist(profiling::DEFAULT_STOPLIST),
    };
    let mut terms = Csv::new(&["group", "field", "rank", "term", "share"]);
    for (label, members) in &groups {
        for (field, name) in [
            (TermField::Terms, "terms"),
            (TermField::Hashtags, "hashtags"),
        ] {
            for (rank, (term, share)) in
                profiling::term_frequencies(members, corpus, field, &stoplist, cfg.top_terms)
                    .into_iter()
                    .enumerate()
            {
                terms.row(&[
                    label.as_str(),
                    name,
                    &(rank + 1).to_string(),
                    &term,
                    &num(share),
                ]);
            }
        }
    }
    ctx.outputs.insert("terms.csv".into(), terms.finish());

    let mut header = vec!["group".to_string(), "labeled_posts".to_string()];
    header.extend(profiling::emotion_labels().iter().map(|s| s.to_string()));
    let mut emotions = Csv::new(&header);
    for row in profiling::emotion_shares(&groups, corpus) {
        let mut r = vec![row.group.clone(), row.labeled_posts.to_string()];
        match row.percentages {
            Some(p) => r.extend(p.iter().map(|x| num(*x))),
            None => r.extend(std::iter::repeat_n(String::new(), 7)),
        }
        emotions.row(&r);
    }
    ctx.outputs.insert("emotions.csv".into(), emotions.finish());

    let eligible = profiling::active_users(corpus, 10);
    let coord_eligible: BTreeSet<String> = coordinated.intersection(&eligible).cloned().collect();
    let others: BTreeSet<String> = eligible
        .intersection(&contrarians)
        .filter(|u| !coordinated.contains(*u))
        .cloned()
        .collect();
    let bots = profiling::botscore_comparison(&coord_eligible, &others, corpus, None)
        .map(|c| json!(c))
        .unwrap_or_else(|e| json!({ "error": e.to_string() }));
    let names = |set: &BTreeSet<String>| {
        profiling::overt_bot_name_share(
            set.iter().filter_map(|u| corpus.user(u)),
            &profiling::DEFAULT_BOT_MARKERS,
        )
    };
    let body = json!({
        "botscore_coordinated_vs_other_contrarian": bots,
        "overt_bot_name_share": { "coordinated": names(&coordinated), "other_contrarian": names(&others) },
    });
    ctx.outputs.insert("bots.json".into(), to_json(&body)?);
    Ok(())
}

fn align_outputs(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let cut = ctx.trust_cut()?;
    let supers = ctx.superspreaders()?.selected.clone();
    let corpus = &ctx.corpus;
    let space = alignment::build_doi_vectors(corpus, &supers).map_err(|e| e.within("alignment"))?;
    let trust = alignment::outlet_trust(corpus.news());
    let users: Vec<String> = supers.iter().cloned().collect();
    let mut neighbors = Csv::new(&[
        "superspreader",
        "k",
        "rank",
        "outlet",
        "similarity",
        "trust",
    ]);
    let mut tests = Csv::new(&[
        "k",
        "unit",
        "trust_t",
        "trust_p",
        "mean_trust_contrarian",
        "mean_trust_conformist",
        "similarity_t",
        "similarity_p",
        "mean_similarity_contrarian",
        "mean_similarity_conformist",
    ]);
    for &k in &cfg.knn {
        let profiles = alignment::knn_all(&space, &users, k, &trust)?;
        for p in &profiles {
            for (rank, n) in p.neighbors.iter().enumerate() {
                neighbors.row(&[
                    &p.superspreader,
                    &k.to_string(),
                    &(rank + 1).to_string(),
                    &n.outlet,
                    &num(n.similarity),
                    &opt_num(n.trust),
                ]);
            }
        }
        let by = |s: Stance| {
            profiles
                .iter()
                .filter(|p| corpus.stance_of(&p.superspreader) == s)
                .cloned()
                .collect::<Vec<_>>()
        };
        if let Ok(NeighborTests {
            trust,
            similarity,
            mean_trust,
            mean_similarity,
            ..
        }) = alignment::group_neighbor_tests(
            &by(Stance::Contrarian),
            &by(Stance::Conformist),
            cfg.unit,
        ) {
            tests.row(&[
                k.to_string(),
                json!(cfg.unit).as_str().unwrap_or_default().to_string(),
                num(trust.statistic),
                num(trust.p_value),
                num(mean_trust.0),
                num(mean_trust.1),
                num(similarity.statistic),
                num(similarity.p_value),
                num(mean_similarity.0),
                num(mean_similarity.1),
            ]);
        }
    }
    let body = json!({
        "threshold": cut.threshold,
        "J": cut.youden_j,
        "F1": cut.f1,
        "source": if cut.roc_points.is_empty() { "default" } else { "labels" },
        "roc_points": cut.roc_points,
        "excluded_outlets": space.excluded_outlets,
        "excluded_superspreaders": space.excluded_users,
    });
    ctx.put("trustcut.json", to_json(&body)?);
    ctx.put("neighbors.csv", neighbors.finish());
    ctx.put("neighbor_tests.csv", tests.finish());
    Ok(())
}

fn pathway_outputs(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let cut = ctx.trust_cut()?;
    let supers = ctx.superspreaders()?.selected.clone();
    let corpus = &ctx.corpus;
    let classes: BTreeMap<String, Option<OutletClass>> =
        alignment::binarize_outlets(corpus.news(), cut.threshold);
    let report = pathways::analyze(corpus, &supers, &classes, &cfg.pathway_params())
        .map_err(|e| e.within("pathways"))?;

    let mut regions = Csv::new(&["doi", "region_start", "region_end", "mass", "lookback"]);
    for r in &report.results {
        for g in &r.regions {
            regions.row(&[
                &g.doi,
                &ts(g.start_time()),
                &ts(g.end_time()),
                &num(g.mass),
                &format!("{}h", r.lookback),
            ]);
        }
    }
    let mut peaks = Csv::new(&["doi", "class", "peak_time", "mentions"]);
    if let Some(main) = report.results.first() {
        for p in &main.peaks {
            for (class, count) in &p.counts {
                let time = p
                    .peaks
                    .get(class)
                    .map(|h| ts(pathways::at_offset(p.origin, *h)));
                peaks.row(&[
                    &p.doi,
                    class.as_str(),
                    &time.unwrap_or_default(),
                    &count.to_string(),
                ]);
            }
        }
        ctx.outputs
            .insert("precedence.dot".into(), precedence_dot(&main.graph));
    }
    let results: Vec<_> = report
        .results
        .iter()
        .map(|r| {
            json!({
                "lookback_hours": r.lookback,
                "dois_with_peaks": r.graph.dois,
                "skipped": r.skipped,
                "raw": r.graph.raw,
                "ties": r.graph.ties,
                "normalized": r.graph.normalized,
                "median_delta_hours": r.graph.median_delta,
                "tests": r.tests,
            })
        })
        .collect();
    let body = json!({
        "classes": pathways::PathClass::ALL,
        "eligible_dois": report.eligible.len(),
        "degenerate_dois": report.degenerate,
        "base_rates": report.base_rates,
        "expected_counts": "proportional to class mention totals across eligible DOIs",
        "trust_threshold": cut.threshold,
        "results": results,
    });
    ctx.put("regions.csv", regions.finish());
    ctx.put("peaks.csv", peaks.finish());
    ctx.put("precedence.json", to_json(&body)?);
    Ok(())
}

/// Runs a stage and returns its rendered outputs, keyed by file name; the
/// manifest is included.
pub fn render(stage: Stage, cfg: &RunConfig) -> Result<BTreeMap<String, String>> {
    cfg.validate()?;
    let mut ctx = Ctx::load(cfg).map_err(|e| e.within("ingest"))?;
    if stage.includes(Stage::Ingest) {
        ingest_outputs(&mut ctx)?;
    }
    if stage.includes(Stage::Syndication) {
        syndication_outputs(&mut ctx)?;
    }
    if stage.includes(Stage::Coord) {
        coord_outputs(&mut ctx).map_err(|e| e.within("coactivity"))?;
    }
    if stage.includes(Stage::Spreaders) {
        spreader_outputs(&mut ctx).map_err(|e| e.within("spreaders"))?;
    }
    if stage.includes(Stage::Profile) {
        profile_outputs(&mut ctx).map_err(|e| e.within("profiling"))?;
    }
    if stage.includes(Stage::Align) {
        align_outputs(&mut ctx).map_err(|e| e.within("alignment"))?;
    }
    if stage.includes(Stage::Pathways) {
        pathway_outputs(&mut ctx).map_err(|e| e.within("pathways"))?;
    }
    let settings = cfg.settings();
    let canonical: String = settings.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
    let outputs: BTreeMap<&String, String> = ctx
        .outputs
        .iter()
        .map(|(k, v)| (k, sha256_hex(v.as_bytes())))
        .collect();
    let manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "stage": stage.as_str(),
        "config_sha256": sha256_hex(canonical.as_bytes()),
        "config": settings,
        "inputs": ctx.inputs,
        "outputs": outputs,
    });
    ctx.outputs
        .insert("manifest.json".into(), to_json(&manifest)?);
    Ok(ctx.outputs)
}

pub fn write_outputs(dir: &Path, outputs: &BTreeMap<String, String>) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, body) in outputs {
        let p = dir.join(name);
        fs::write(&p, body).map_err(|e| Error::io(&p, e))?;
    }
    Ok(())
}

pub fn run(stage: Stage, cfg: &RunConfig) -> Result<Vec<String>> {
    let outputs = render(stage, cfg)?;
    write_outputs(&cfg.out, &outputs)?;
    Ok(outputs.into_keys().collect())
}

/// Generates a scenario into `dir`.
pub fn simulate(scenario: &Scenario, dir: &Path) -> Result<synth::GroundTruth> {
    let (corpus, truth) = synth::generate(scenario).map_err(|e| e.within("synth"))?;
    synth::write_scenario(dir, scenario, &corpus, &truth)?;
    Ok(truth)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settings_round_trip_through_set() {
        let mut cfg = RunConfig::default();
        cfg.set("knn", "2,4").unwrap();
        cfg.set("peaks", "global").unwrap();
        cfg.set("bandwidth", "1.5").unwrap();
        let mut copy = RunConfig::default();
        for (k, v) in cfg.settings() {
            copy.set(k, &v).unwrap();
        }
        assert_eq!(copy, cfg);
    }

    #[test]
    fn flags_override_file_and_bad_values_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.conf");
        fs::write(&p, "# sweep\nwindow-min = 15\nseed=3\n").unwrap();
        let mut cfg = RunConfig::default();
        cfg.apply_file(&p).unwrap();
        cfg.set("seed", "9").unwrap();
        assert_eq!((cfg.window_min, cfg.seed), (15, 9));
        for (k, v) in [
            ("window-min", "abc"),
            ("nope", "1"),
            ("percentile-base", "top"),
        ] {
            assert_eq!(cfg.set(k, v).unwrap_err().exit_code(), 2);
        }
        cfg.input = Some(dir.path().into());
        cfg.centrality_pct = 0.0;
        assert_eq!(cfg.validate().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn lookback_zero_always_leads() {
        let mut cfg = RunConfig::default();
        cfg.set("lookback", "6,0,12").unwrap();
        assert_eq!(cfg.pathway_params().lookbacks, vec![0.0, 6.0, 12.0]);
    }
}
