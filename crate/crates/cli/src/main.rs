//! `threadlens`: analyze, restructure and validate threaded discussions.
//!
//! Exit codes: 0 on success, 1 when the input is well-formed but fails
//! validation, 2 on I/O, parse and usage errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::{fs, io};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use threadlens::codec::{self, Canonical};
use threadlens::dedup::detect_duplicates;
use threadlens::metrics::metrics_report;
use threadlens::restructure::restructure;
use threadlens::topics::{assignment_from_labels, cluster_keywords, TopicError, DEFAULT_LINK_THRESHOLD};
use threadlens::{
    DuplicateFlags, MetricsReport, PostId, Projection, RestructurePlan, SimilarityConfig, Thread,
    TopicAssignment,
};

#[derive(Parser)]
#[command(name = "threadlens", version, about = "Measure and restructure threaded discussions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report redundancy, topic dispersion and degree of hierarchy.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        dedup: DedupArgs,
        #[arg(long, value_enum, default_value_t = ProjectionArg::Dfs)]
        projection: ProjectionArg,
        /// JSON array of post ids in the preferred reading order.
        #[arg(long)]
        ideal: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Remove duplicates and group posts into one sub-thread per topic.
    Restructure {
        file: PathBuf,
        #[command(flatten)]
        dedup: DedupArgs,
        #[arg(long, value_enum, default_value_t = ProjectionArg::Dfs)]
        projection: ProjectionArg,
        /// Cluster posts by keywords when topic labels are missing.
        #[arg(long)]
        cluster: bool,
        #[arg(long, default_value_t = DEFAULT_LINK_THRESHOLD, value_parser = open_unit)]
        cluster_threshold: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check that a thread file parses and forms a valid tree.
    Validate {
        file: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct DedupArgs {
    /// Jaccard threshold for flagging a duplicate.
    #[arg(long, default_value_t = SimilarityConfig::DEFAULT_THRESHOLD, value_parser = half_open_unit)]
    tau: f64,
    /// Words per shingle.
    #[arg(long, default_value_t = SimilarityConfig::DEFAULT_SHINGLE_SIZE, value_parser = positive)]
    k: usize,
}

impl DedupArgs {
    fn config(&self) -> SimilarityConfig {
        SimilarityConfig::new(self.k, self.tau).expect("ranges checked by the parser")
    }
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, env = "THREADLENS_FORMAT", default_value_t = Format::Text)]
    format: Format,
    /// Write the JSON result here instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProjectionArg {
    Dfs,
    Depth,
}

impl From<ProjectionArg> for Projection {
    fn from(p: ProjectionArg) -> Self {
        match p {
            ProjectionArg::Dfs => Projection::DfsIndex,
            ProjectionArg::Depth => Projection::Depth,
        }
    }
}

fn half_open_unit(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is outside (0, 1]"))
    }
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn open_unit(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is outside (0, 1)"))
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Io { .. } | CliError::Parse { .. } => 2,
        }
    }

    fn invalid(e: impl std::fmt::Display) -> Self {
        CliError::Invalid(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn load_thread(path: &Path) -> Result<Thread, CliError> {
    let text = read(path)?;
    let (thread_id, posts) = codec::parse_records(&text).map_err(|e| CliError::Parse {
        path: path.to_owned(),
        message: e.to_string(),
    })?;
    let thread = Thread::build(thread_id, posts).map_err(CliError::invalid)?;
    for w in thread.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(thread)
}

fn emit(output: &OutputArgs, body: &str) -> Result<(), CliError> {
    match &output.output {
        Some(path) => fs::write(path, format!("{body}\n")).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            println!("{body}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output serializes")
}

/// Labels from the posts; an unlabeled thread yields an empty assignment.
fn labels_or_empty(thread: &Thread) -> Result<TopicAssignment, CliError> {
    match assignment_from_labels(thread) {
        Ok(a) => Ok(a),
        Err(TopicError::NoLabelsPresent) => Ok(TopicAssignment::empty()),
        Err(e) => Err(CliError::invalid(e)),
    }
}

fn analyze(
    file: &Path,
    config: SimilarityConfig,
    projection: Projection,
    ideal: Option<&Path>,
    output: &OutputArgs,
) -> Result<(), CliError> {
    let thread = load_thread(file)?;
    let flags = detect_duplicates(&thread, &config);
    let labels = labels_or_empty(&thread)?;
    let missing = labels.unassigned(&thread).len();
    if missing > 0 && !thread.is_empty() {
        eprintln!("note: {missing} of {} posts carry no topic label", thread.len());
    }
    let ideal = match ideal {
        Some(path) => {
            let text = read(path)?;
            let ids: Vec<PostId> = serde_json::from_str(&text).map_err(|e| CliError::Parse {
                path: path.to_owned(),
                message: e.to_string(),
            })?;
            Some(ids)
        }
        None => None,
    };
    let report = metrics_report(&thread, &labels, &flags, ideal.as_deref(), projection)
        .map_err(CliError::invalid)?;
    match output.format {
        Format::Json => emit(output, &report.to_json()),
        Format::Text => emit(output, report.to_string().trim_end()),
    }
}

#[derive(Serialize)]
struct RestructureOutput<'a> {
    thread: Canonical<'a>,
    plan: &'a RestructurePlan,
    before: &'a MetricsReport,
    after: &'a MetricsReport,
}

/// Posted labels win; clustering fills in the rest when enabled.
fn restructure_labels(
    thread: &Thread,
    flags: &DuplicateFlags,
    cluster: Option<f64>,
) -> Result<TopicAssignment, CliError> {
    let labels = labels_or_empty(thread)?;
    let missing: Vec<&PostId> = labels
        .unassigned(thread)
        .into_iter()
        .filter(|id| !flags.is_flagged(id))
        .collect();
    if missing.is_empty() {
        return Ok(labels);
    }
    let Some(threshold) = cluster else {
        return Err(CliError::Invalid(format!(
            "post `{}` has no topic label ({} unlabeled); pass --cluster to assign topics by keywords",
            missing[0],
            missing.len()
        )));
    };
    let clusters = cluster_keywords(thread, threshold).map_err(CliError::invalid)?;
    let merged = thread.posts().iter().map(|p| {
        let topic = labels
            .topic_of(&p.id)
            .or_else(|| clusters.topic_of(&p.id))
            .expect("clustering covers every post")
            .clone();
        (p.id.clone(), topic)
    });
    TopicAssignment::new(thread, merged).map_err(CliError::invalid)
}

fn run_restructure(
    file: &Path,
    config: SimilarityConfig,
    projection: Projection,
    cluster: Option<f64>,
    output: &OutputArgs,
) -> Result<(), CliError> {
    let thread = load_thread(file)?;
    let flags = detect_duplicates(&thread, &config);
    let labels = restructure_labels(&thread, &flags, cluster)?;
    let result = restructure(&thread, &flags, &labels, projection).map_err(CliError::invalid)?;
    let json = to_json(&RestructureOutput {
        thread: Canonical(&result.thread),
        plan: &result.plan,
        before: &result.before,
        after: &result.after,
    });
    match (output.format, &output.output) {
        (Format::Json, _) => emit(output, &json),
        (Format::Text, target) => {
            if target.is_some() {
                emit(output, &json)?;
            }
            let roots = result
                .plan
                .topic_roots
                .iter()
                .map(|(t, p)| format!("{t}={p}"))
                .collect::<Vec<_>>()
                .join(", ");
            println!("before:\n{}", indent(&result.before.to_string()));
            println!("after:\n{}", indent(&result.after.to_string()));
            println!(
                "plan: {} removed, {} moved, topic roots: {}",
                result.plan.removals.len(),
                result.plan.moves.len(),
                if roots.is_empty() { "none".into() } else { roots }
            );
            Ok(())
        }
    }
}

fn indent(text: &str) -> String {
    text.lines()
        .map(|l| format!("  {l}"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Serialize)]
struct ValidateOutput {
    valid: bool,
    posts: usize,
    first_level: usize,
    warnings: Vec<String>,
}

fn validate(file: &Path, output: &OutputArgs) -> Result<(), CliError> {
    let thread = load_thread(file)?;
    let summary = ValidateOutput {
        valid: true,
        posts: thread.len(),
        first_level: thread.first_level().len(),
        warnings: thread.warnings().iter().map(|w| w.to_string()).collect(),
    };
    match output.format {
        Format::Json => emit(output, &to_json(&summary)),
        Format::Text => emit(
            output,
            &format!(
                "valid: {} posts, {} first-level, {} warnings",
                summary.posts,
                summary.first_level,
                summary.warnings.len()
            ),
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Analyze {
            file,
            dedup,
            projection,
            ideal,
            output,
        } => analyze(file, dedup.config(), (*projection).into(), ideal.as_deref(), output),
        Command::Restructure {
            file,
            dedup,
            projection,
            cluster,
            cluster_threshold,
            output,
        } => run_restructure(
            file,
            dedup.config(),
            (*projection).into(),
            cluster.then_some(*cluster_threshold),
            output,
        ),
        Command::Validate { file, output } => validate(file, output),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
