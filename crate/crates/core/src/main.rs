use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sciflow::pipeline::{self, RunConfig, Stage};
use sciflow::synth::Scenario;
use sciflow::{par, Error, Result};

#[derive(Parser)]
#[command(
    name = "sciflow",
    version,
    about = "Coordination, superspreader and precedence analysis for DOI-mentioning posts and news"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for parallel stages; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate inputs.
    Ingest(RunArgs),
    /// Co-retweet network and coordinated accounts.
    Coord(RunArgs),
    /// h-index superspreaders and profile comparisons.
    Spreaders(RunArgs),
    /// Topic, term, emotion and bot profiles.
    Profile(RunArgs),
    /// Trust cut and outlet neighbors of superspreaders.
    Align(RunArgs),
    /// Density regions and class precedence.
    Pathways(RunArgs),
    /// Syndication graph and media time series.
    Syndication(RunArgs),
    /// Generate a synthetic corpus with ground truth.
    Simulate(SimArgs),
    /// Every analysis stage.
    All(RunArgs),
}

#[derive(Args)]
struct SimArgs {
    /// Scenario JSON; overrides --preset.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// full | coordination | pathways | pathways-null
    #[arg(long, default_value = "full")]
    preset: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Every value flag maps to the config key of the same name.
#[derive(Args)]
struct RunArgs {
    /// Directory holding posts.jsonl, news.jsonl and optionally users.jsonl, factuality.csv.
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    posts: Option<String>,
    #[arg(long)]
    news: Option<String>,
    #[arg(long)]
    users: Option<String>,
    /// Outlet factuality labels (domain,label) for the trust cut.
    #[arg(long)]
    labels: Option<String>,
    /// Flat `key = value` file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    window_min: Option<String>,
    #[arg(long)]
    min_user_rt: Option<String>,
    #[arg(long)]
    min_post_rt: Option<String>,
    #[arg(long)]
    include_self_retweets: Option<String>,
    /// Percent of nodes kept by eigenvector centrality.
    #[arg(long)]
    centrality_pct: Option<String>,
    #[arg(long)]
    robustness_pcts: Option<String>,
    /// all | positive
    #[arg(long)]
    percentile_base: Option<String>,
    #[arg(long)]
    centrality_tol: Option<String>,
    #[arg(long)]
    centrality_max_iter: Option<String>,
    /// Percent of users kept by h-index.
    #[arg(long)]
    spreader_pct: Option<String>,
    #[arg(long)]
    knn: Option<String>,
    /// superspreader | neighbor
    #[arg(long)]
    unit: Option<String>,
    #[arg(long)]
    grid: Option<String>,
    /// silverman or hours
    #[arg(long)]
    bandwidth: Option<String>,
    #[arg(long)]
    min_mass: Option<String>,
    /// Comma-separated hours.
    #[arg(long)]
    lookback: Option<String>,
    #[arg(long)]
    min_media: Option<String>,
    #[arg(long)]
    min_social: Option<String>,
    #[arg(long)]
    min_class_mentions: Option<String>,
    /// class | global
    #[arg(long)]
    peaks: Option<String>,
    #[arg(long)]
    boot_iters: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// retweets | originals | all
    #[arg(long)]
    gini_base: Option<String>,
    #[arg(long)]
    top_terms: Option<String>,
    #[arg(long)]
    syndication_window_min: Option<String>,
    #[arg(long)]
    media_window_days: Option<String>,
    #[arg(long)]
    exclude_aggregators: Option<String>,
    #[arg(long)]
    stoplist: Option<String>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(p) = &self.config {
            cfg.apply_file(p)?;
        }
        let flags = [
            ("input", &self.input),
            ("posts", &self.posts),
            ("news", &self.news),
            ("users", &self.users),
            ("labels", &self.labels),
            ("out", &self.out),
            ("window-min", &self.window_min),
            ("min-user-rt", &self.min_user_rt),
            ("min-post-rt", &self.min_post_rt),
            ("include-self-retweets", &self.include_self_retweets),
            ("centrality-pct", &self.centrality_pct),
            ("robustness-pcts", &self.robustness_pcts),
            ("percentile-base", &self.percentile_base),
            ("centrality-tol", &self.centrality_tol),
            ("centrality-max-iter", &self.centrality_max_iter),
            ("spreader-pct", &self.spreader_pct),
            ("knn", &self.knn),
            ("unit", &self.unit),
            ("grid", &self.grid),
            ("bandwidth", &self.bandwidth),
            ("min-mass", &self.min_mass),
            ("lookback", &self.lookback),
            ("min-media", &self.min_media),
            ("min-social", &self.min_social),
            ("min-class-mentions", &self.min_class_mentions),
            ("peaks", &self.peaks),
            ("boot-iters", &self.boot_iters),
            ("seed", &self.seed),
            ("gini-base", &self.gini_base),
            ("top-terms", &self.top_terms),
            ("syndication-window-min", &self.syndication_window_min),
            ("media-window-days", &self.media_window_days),
            ("exclude-aggregators", &self.exclude_aggregators),
            ("stoplist", &self.stoplist),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        Ok(cfg)
    }
}

fn simulate(args: &SimArgs) -> Result<()> {
    let scenario = match &args.scenario {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            serde_json::from_str::<Scenario>(&text)
                .map_err(|e| Error::InvalidParameter(format!("{}: {e}", p.display())))?
        }
        None => Scenario::preset(&args.preset, args.seed)?,
    };
    let truth = pipeline::simulate(&scenario, &args.out)?;
    eprintln!(
        "wrote {} ({} ring members, {} planted spreaders, {} planted DOIs)",
        args.out.display(),
        truth.ring_members().len(),
        truth.spreaders.len(),
        truth.dois.len()
    );
    Ok(())
}

fn dispatch(command: &Command) -> Result<()> {
    let (stage, args) = match command {
        Command::Simulate(s) => return simulate(s),
        Command::Ingest(a) => (Stage::Ingest, a),
        Command::Coord(a) => (Stage::Coord, a),
        Command::Spreaders(a) => (Stage::Spreaders, a),
        Command::Profile(a) => (Stage::Profile, a),
        Command::Align(a) => (Stage::Align, a),
        Command::Pathways(a) => (Stage::Pathways, a),
        Command::Syndication(a) => (Stage::Syndication, a),
        Command::All(a) => (Stage::All, a),
    };
    let cfg = args.config()?;
    let written = pipeline::run(stage, &cfg)?;
    eprintln!("wrote {} files to {}", written.len(), cfg.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.threads {
        Some(0) => Err(Error::InvalidParameter(
            "--threads must be at least 1".into(),
        )),
        Some(n) => par::with_threads(n, || dispatch(&cli.command)),
        None => dispatch(&cli.command),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
