//! Per-DOI temporal density regions, class peaks, and the class-level
//! precedence graph.
//!
//! Times inside a DOI are hours relative to its first mention, so shifting a
//! corpus in time leaves every derived quantity except absolute timestamps
//! unchanged.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::alignment::OutletClass;
use crate::error::{Error, Result};
use crate::ingest::{Corpus, Stance, Timestamp};
use crate::par;
use crate::stats::{self, chi_square_1dof, TestResult};

/// Actor classes compared by precedence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum PathClass {
    #[serde(rename = "PSP")]
    Psp,
    #[serde(rename = "ASP")]
    Asp,
    #[serde(rename = "LC")]
    Lc,
    #[serde(rename = "HC")]
    Hc,
}

impl PathClass {
    pub const ALL: [PathClass; 4] = [PathClass::Psp, PathClass::Asp, PathClass::Lc, PathClass::Hc];

    pub fn as_str(&self) -> &'static str {
        match self {
            PathClass::Psp => "PSP",
            PathClass::Asp => "ASP",
            PathClass::Lc => "LC",
            PathClass::Hc => "HC",
        }
    }

    pub fn index(&self) -> usize {
        *self as usize
    }

    pub fn is_social(&self) -> bool {
        matches!(self, PathClass::Psp | PathClass::Asp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    Silverman,
    /// Fixed bandwidth in hours.
    Hours(f64),
}

impl std::str::FromStr for Bandwidth {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "silverman" {
            return Ok(Bandwidth::Silverman);
        }
        match s.parse::<f64>() {
            Ok(h) if h > 0.0 && h.is_finite() => Ok(Bandwidth::Hours(h)),
            _ => Err(Error::InvalidParameter(format!(
                "bandwidth must be `silverman` or positive hours, got `{s}`"
            ))),
        }
    }
}

/// How class peaks pick their kernel bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakMode {
    /// Bandwidth from the class's own in-region mentions.
    #[default]
    ClassConditional,
    /// The DOI-wide bandwidth applied to class mentions.
    Global,
}

impl std::str::FromStr for PeakMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "class" => Ok(PeakMode::ClassConditional),
            "global" => Ok(PeakMode::Global),
            other => Err(Error::InvalidParameter(format!(
                "unknown peak mode `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathwayParams {
    pub min_media: usize,
    pub min_social: usize,
    pub grid_points: usize,
    pub bandwidth: Bandwidth,
    pub min_mass: f64,
    /// Lookbacks in hours; 0 is the unadjusted region.
    pub lookbacks: Vec<f64>,
    pub min_class_mentions: usize,
    pub peaks: PeakMode,
}

impl Default for PathwayParams {
    fn default() -> Self {
        PathwayParams {
            min_media: 100,
            min_social: 100,
            grid_points: 512,
            bandwidth: Bandwidth::Silverman,
            min_mass: 0.5,
            lookbacks: vec![0.0, 3.0, 6.0, 12.0],
            min_class_mentions: 3,
            peaks: PeakMode::ClassConditional,
        }
    }
}

/// DOIs with at least `min_media` news and `min_social` post mentions.
pub fn eligible_dois(corpus: &Corpus, min_media: usize, min_social: usize) -> BTreeSet<String> {
    corpus
        .doi_index()
        .iter()
        .filter(|(_, r)| r.news.len() >= min_media && r.posts.len() >= min_social)
        .map(|(d, _)| d.clone())
        .collect()
}

/// Silverman's rule: 0.9 min(sd, IQR/1.34) n^(-1/5), falling back to sd
/// when the IQR vanishes.
pub fn silverman_bandwidth(xs: &[f64]) -> f64 {
    let sd = stats::variance(xs).sqrt();
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = stats::quantile_sorted(&sorted, 0.75) - stats::quantile_sorted(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * (xs.len() as f64).powf(-0.2)
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect()
}

pub fn trapezoid(grid: &[f64], y: &[f64]) -> f64 {
    grid.windows(2)
        .zip(y.windows(2))
        .map(|(g, v)| 0.5 * (v[0] + v[1]) * (g[1] - g[0]))
        .sum()
}

/// Gaussian KDE evaluated on `grid`, rescaled to unit trapezoid integral.
pub fn kde(xs: &[f64], grid: &[f64], bandwidth: f64) -> Vec<f64> {
    let inv = 1.0 / bandwidth;
    let mut y: Vec<f64> = grid
        .iter()
        .map(|g| {
            xs.iter()
                .map(|x| (-0.5 * ((g - x) * inv).powi(2)).exp())
                .sum()
        })
        .collect();
    let area = trapezoid(grid, &y);
    if area > 0.0 {
        for v in &mut y {
            *v /= area;
        }
    }
    y
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityRegion {
    pub doi: String,
    /// Time of the first mention; grid and region offsets are hours after it.
    pub origin: Timestamp,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
    pub region_start: f64,
    pub region_end: f64,
    pub mass: f64,
    pub lookback: f64,
    /// All mentions share one timestamp.
    pub degenerate: bool,
}

impl DensityRegion {
    pub fn start_time(&self) -> Timestamp {
        at_offset(self.origin, self.region_start)
    }

    pub fn end_time(&self) -> Timestamp {
        at_offset(self.origin, self.region_end)
    }

    /// Integral of the piecewise-linear density over [a, b].
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        if self.degenerate {
            return 1.0;
        }
        let interp = |t: f64| {
            let k = self
                .grid
                .partition_point(|g| *g <= t)
                .clamp(1, self.grid.len() - 1);
            let (g0, g1) = (self.grid[k - 1], self.grid[k]);
            let w = ((t - g0) / (g1 - g0)).clamp(0.0, 1.0);
            self.density[k - 1] * (1.0 - w) + self.density[k] * w
        };
        let mut xs = vec![a];
        xs.extend(self.grid.iter().copied().filter(|g| *g > a && *g < b));
        xs.push(b);
        let ys: Vec<f64> = xs.iter().map(|&t| interp(t)).collect();
        trapezoid(&xs, &ys)
    }
}

pub fn at_offset(origin: Timestamp, hours: f64) -> Timestamp {
    origin + chrono::Duration::milliseconds((hours * 3.6e6).round() as i64)
}

/// Hours of each timestamp after the earliest one, with that earliest time.
pub fn offsets(times: &[Timestamp]) -> Option<(Timestamp, Vec<f64>)> {
    let origin = *times.iter().min()?;
    Some((
        origin,
        times
            .iter()
            .map(|t| (*t - origin).num_milliseconds() as f64 / 3.6e6)
            .collect(),
    ))
}

/// Shortest grid-aligned interval `(i, j)` with trapezoid mass at least
/// `min_mass`; ties go to the earliest start.
pub fn shortest_interval(grid: &[f64], density: &[f64], min_mass: f64) -> (usize, usize) {
    let n = grid.len();
    let mut cum = vec![0.0; n];
    for k in 1..n {
        cum[k] = cum[k - 1] + 0.5 * (density[k - 1] + density[k]) * (grid[k] - grid[k - 1]);
    }
    let target = min_mass - 1e-12;
    let mut best = (0, n - 1);
    let mut j = 0;
    for i in 0..n {
        j = j.max(i);
        while j < n && cum[j] - cum[i] < target {
            j += 1;
        }
        if j == n {
            break;
        }
        if j - i < best.1 - best.0 {
            best = (i, j);
        }
    }
    best
}

pub fn density_region(
    doi: &str,
    mentions: &[Timestamp],
    grid_points: usize,
    bandwidth: Bandwidth,
    min_mass: f64,
) -> Result<DensityRegion> {
    if grid_points < 2 {
        return Err(Error::InvalidParameter(
            "density grid needs >= 2 points".into(),
        ));
    }
    if !(0.0..=1.0).contains(&min_mass) {
        return Err(Error::InvalidParameter(format!(
            "min_mass must lie in [0, 1], got {min_mass}"
        )));
    }
    let (origin, xs) = offsets(mentions)
        .ok_or_else(|| Error::InsufficientData(format!("DOI {doi} has no mentions")))?;
    let last = xs.iter().copied().fold(0.0, f64::max);
    if last == 0.0 {
        return Ok(DensityRegion {
            doi: doi.to_string(),
            origin,
            grid: vec![0.0],
            density: vec![1.0],
            bandwidth: 0.0,
            region_start: 0.0,
            region_end: 0.0,
            mass: 1.0,
            lookback: 0.0,
            degenerate: true,
        });
    }
    let bw = match bandwidth {
        Bandwidth::Silverman => silverman_bandwidth(&xs),
        Bandwidth::Hours(h) => h,
    };
    let grid = linspace(0.0, last, grid_points);
    let density = kde(&xs, &grid, bw);
    let (i, j) = shortest_interval(&grid, &density, min_mass);
    let mut region = DensityRegion {
        doi: doi.to_string(),
        origin,
        region_start: grid[i],
        region_end: grid[j],
        grid,
        density,
        bandwidth: bw,
        mass: 0.0,
        lookback: 0.0,
        degenerate: false,
    };
    region.mass = region.mass_between(region.region_start, region.region_end);
    Ok(region)
}

/// Moves the start to the earliest mention in `[start - lookback, start)`.
pub fn apply_lookback(
    region: &DensityRegion,
    mentions: &[Timestamp],
    lookback_hours: f64,
) -> Result<DensityRegion> {
    if lookback_hours < 0.0 || !lookback_hours.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "lookback must be >= 0, got {lookback_hours}"
        )));
    }
    let mut out = region.clone();
    out.lookback = lookback_hours;
    let lo = region.region_start - lookback_hours;
    let earliest = mentions
        .iter()
        .map(|t| (*t - region.origin).num_milliseconds() as f64 / 3.6e6)
        .filter(|&x| x >= lo && x < region.region_start)
        .fold(f64::INFINITY, f64::min);
    if earliest.is_finite() {
        out.region_start = earliest;
        out.mass = out.mass_between(earliest, out.region_end);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassPeaks {
    pub doi: String,
    pub origin: Timestamp,
    /// Peak offset in hours after `origin`, per class with enough mentions.
    pub peaks: BTreeMap<PathClass, f64>,
    /// In-region mention counts per class (including omitted classes).
    pub counts: BTreeMap<PathClass, usize>,
}

/// A DOI's mentions tagged with the class of whoever made them.
#[derive(Debug, Clone, Default)]
pub struct DoiMentions {
    /// Every news and superspreader mention, classified or not.
    pub all: Vec<Timestamp>,
    pub by_class: BTreeMap<PathClass, Vec<Timestamp>>,
}

/// Collects news and superspreader mentions per DOI.
pub fn collect_mentions(
    corpus: &Corpus,
    dois: &BTreeSet<String>,
    superspreaders: &BTreeSet<String>,
    outlet_classes: &BTreeMap<String, Option<OutletClass>>,
) -> BTreeMap<String, DoiMentions> {
    let mut out: BTreeMap<String, DoiMentions> = dois
        .iter()
        .map(|d| (d.clone(), DoiMentions::default()))
        .collect();
    for (doi, m) in out.iter_mut() {
        let Some(refs) = corpus.doi_index().get(doi) else {
            continue;
        };
        for &k in &refs.news {
            let n = &corpus.news()[k];
            m.all.push(n.timestamp);
            let class = match outlet_classes.get(&n.outlet_domain).copied().flatten() {
                Some(OutletClass::High) => Some(PathClass::Hc),
                Some(OutletClass::Low) => Some(PathClass::Lc),
                None => None,
            };
            if let Some(c) = class {
                m.by_class.entry(c).or_default().push(n.timestamp);
            }
        }
        for &k in &refs.posts {
            let p = &corpus.posts()[k];
            if !superspreaders.contains(&p.author_id) {
                continue;
            }
            m.all.push(p.timestamp);
            let class = match corpus.stance_of(&p.author_id) {
                Stance::Conformist => Some(PathClass::Psp),
                Stance::Contrarian => Some(PathClass::Asp),
                Stance::Unlabeled => None,
            };
            if let Some(c) = class {
                m.by_class.entry(c).or_default().push(p.timestamp);
            }
        }
    }
    out
}

/// Per-class KDE peaks over in-region mentions; ties go to the earliest grid
/// point.
pub fn class_peaks(
    region: &DensityRegion,
    mentions: &DoiMentions,
    grid_points: usize,
    min_class_mentions: usize,
    mode: PeakMode,
) -> ClassPeaks {
    let mut peaks = BTreeMap::new();
    let mut counts = BTreeMap::new();
    let grid = linspace(region.region_start, region.region_end, grid_points.max(2));
    for (&class, times) in &mentions.by_class {
        let xs: Vec<f64> = times
            .iter()
            .map(|t| (*t - region.origin).num_milliseconds() as f64 / 3.6e6)
            .filter(|&x| x >= region.region_start && x <= region.region_end)
            .collect();
        counts.insert(class, xs.len());
        if xs.len() < min_class_mentions.max(1) {
            continue;
        }
        let own = silverman_bandwidth(&xs);
        let bw = match mode {
            PeakMode::ClassConditional if own > 0.0 => own,
            _ => region.bandwidth,
        };
        let peak = if bw > 0.0 && region.region_end > region.region_start {
            let y = kde(&xs, &grid, bw);
            let mut best = 0;
            for (k, v) in y.iter().enumerate() {
                if *v > y[best] {
                    best = k;
                }
            }
            grid[best]
        } else {
            xs.iter().copied().fold(f64::INFINITY, f64::min)
        };
        peaks.insert(class, peak);
    }
    ClassPeaks {
        doi: region.doi.clone(),
        origin: region.origin,
        peaks,
        counts,
    }
}

type Matrix<T> = [[T; 4]; 4];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrecedenceGraph {
    pub classes: [PathClass; 4],
    /// `raw[a][b]`: DOIs where a's peak precedes b's.
    pub raw: Matrix<u64>,
    /// Symmetric exact-tie counts.
    pub ties: Matrix<u64>,
    /// Row-normalized percentages of `raw`.
    pub normalized: Matrix<f64>,
    /// Median of (b's peak - a's peak) in hours over DOIs where a precedes b.
    pub median_delta: Matrix<Option<f64>>,
    pub dois: usize,
}

impl PrecedenceGraph {
    /// a's share of decided a/b orderings, in percent.
    pub fn pair_share(&self, a: PathClass, b: PathClass) -> Option<f64> {
        let (ab, ba) = (
            self.raw[a.index()][b.index()],
            self.raw[b.index()][a.index()],
        );
        (ab + ba > 0).then(|| 100.0 * ab as f64 / (ab + ba) as f64)
    }
}

pub fn precedence_graph(peaks: &[ClassPeaks]) -> PrecedenceGraph {
    let mut raw = [[0u64; 4]; 4];
    let mut ties = [[0u64; 4]; 4];
    let mut deltas: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); 4]; 4];
    let mut dois = 0;
    let mut sorted: Vec<&ClassPeaks> = peaks.iter().collect();
    sorted.sort_by(|a, b| a.doi.cmp(&b.doi));
    for cp in sorted {
        if cp.peaks.len() >= 2 {
            dois += 1;
        }
        for (&a, &ta) in &cp.peaks {
            for (&b, &tb) in &cp.peaks {
                if a == b {
                    continue;
                }
                if ta < tb {
                    raw[a.index()][b.index()] += 1;
                    deltas[a.index()][b.index()].push(tb - ta);
                } else if ta == tb {
                    ties[a.index()][b.index()] += 1;
                }
            }
        }
    }
    let mut normalized = [[0.0; 4]; 4];
    for (a, row) in raw.iter().enumerate() {
        let total: u64 = row.iter().sum();
        if total > 0 {
            for b in 0..4 {
                normalized[a][b] = 100.0 * row[b] as f64 / total as f64;
            }
        }
    }
    let median_delta =
        std::array::from_fn(|a| std::array::from_fn(|b| stats::median(&deltas[a][b])));
    PrecedenceGraph {
        classes: PathClass::ALL,
        raw,
        ties,
        normalized,
        median_delta,
        dois,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairTest {
    pub a: PathClass,
    pub b: PathClass,
    pub wins_a: u64,
    pub wins_b: u64,
    pub expected_a: f64,
    pub expected_b: f64,
    pub test: TestResult,
    pub median_delta_a_first: Option<f64>,
    pub median_delta_b_first: Option<f64>,
}

/// Chi-square per class pair, expecting wins in proportion to base rates.
/// Pairs without decided orderings or with a zero base rate are skipped.
pub fn precedence_tests(
    graph: &PrecedenceGraph,
    base_rates: &BTreeMap<PathClass, f64>,
) -> Vec<PairTest> {
    let mut out = Vec::new();
    for (i, &a) in PathClass::ALL.iter().enumerate() {
        for &b in &PathClass::ALL[i + 1..] {
            let (wa, wb) = (
                graph.raw[a.index()][b.index()],
                graph.raw[b.index()][a.index()],
            );
            let (ra, rb) = (
                base_rates.get(&a).copied().unwrap_or(0.0),
                base_rates.get(&b).copied().unwrap_or(0.0),
            );
            if wa + wb == 0 || ra <= 0.0 || rb <= 0.0 {
                continue;
            }
            let n = (wa + wb) as f64;
            let expected = [n * ra / (ra + rb), n * rb / (ra + rb)];
            let Ok(test) = chi_square_1dof([wa as f64, wb as f64], expected) else {
                continue;
            };
            out.push(PairTest {
                a,
                b,
                wins_a: wa,
                wins_b: wb,
                expected_a: expected[0],
                expected_b: expected[1],
                test,
                median_delta_a_first: graph.median_delta[a.index()][b.index()],
                median_delta_b_first: graph.median_delta[b.index()][a.index()],
            });
        }
    }
    out
}

/// Class mention totals across the given DOIs.
pub fn base_rates(mentions: &BTreeMap<String, DoiMentions>) -> BTreeMap<PathClass, f64> {
    let mut out = BTreeMap::new();
    for m in mentions.values() {
        for (c, ts) in &m.by_class {
            *out.entry(*c).or_insert(0.0) += ts.len() as f64;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LookbackResult {
    pub lookback: f64,
    pub regions: Vec<DensityRegion>,
    pub peaks: Vec<ClassPeaks>,
    pub graph: PrecedenceGraph,
    pub tests: Vec<PairTest>,
    /// DOIs where no class produced a peak.
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathwayReport {
    pub eligible: BTreeSet<String>,
    pub base_rates: BTreeMap<PathClass, f64>,
    pub results: Vec<LookbackResult>,
    /// DOIs without enough distinct mentions for a density region.
    pub degenerate: usize,
}

pub fn analyze(
    corpus: &Corpus,
    superspreaders: &BTreeSet<String>,
    outlet_classes: &BTreeMap<String, Option<OutletClass>>,
    params: &PathwayParams,
) -> Result<PathwayReport> {
    let eligible = eligible_dois(corpus, params.min_media, params.min_social);
    let mentions = collect_mentions(corpus, &eligible, superspreaders, outlet_classes);
    let entries: Vec<(&String, &DoiMentions)> =
        mentions.iter().filter(|(_, m)| !m.all.is_empty()).collect();
    let regions = par::map(&entries, |(doi, m)| {
        density_region(
            doi,
            &m.all,
            params.grid_points,
            params.bandwidth,
            params.min_mass,
        )
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let degenerate = regions.iter().filter(|r| r.degenerate).count();

    let mut results = Vec::new();
    for &lb in &params.lookbacks {
        let per_doi = par::map_range(
            entries.len(),
            |k| -> Result<Option<(DensityRegion, ClassPeaks)>> {
                let (_, m) = entries[k];
                if regions[k].degenerate {
                    return Ok(None);
                }
                let r = apply_lookback(&regions[k], &m.all, lb)?;
                let p = class_peaks(
                    &r,
                    m,
                    params.grid_points,
                    params.min_class_mentions,
                    params.peaks,
                );
                Ok(Some((r, p)))
            },
        )
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let (lb_regions, peaks): (Vec<_>, Vec<_>) = per_doi.into_iter().flatten().unzip();
        let skipped = peaks
            .iter()
            .filter(|p: &&ClassPeaks| p.peaks.is_empty())
            .count();
        let graph = precedence_graph(&peaks);
        let tests = precedence_tests(&graph, &base_rates(&mentions));
        results.push(LookbackResult {
            lookback: lb,
            regions: lb_regions,
            peaks,
            graph,
            tests,
            skipped,
        });
    }
    Ok(PathwayReport {
        base_rates: base_rates(&mentions),
        eligible,
        results,
        degenerate,
    })
}
