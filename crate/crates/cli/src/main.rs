//! Pipeline driver: filtering, dedup, metrics, repository analysis,
//! pair sanitization, and the plan/budget calculators as subcommands over
//! newline-delimited record streams.
//!
//! Exit codes: 0 success, 1 validation or usage error, 2 I/O error. Every
//! run writes its report — to `--report PATH` when given, to stderr
//! otherwise — even when a stage fails partway.

mod commands;
mod report;
mod stream;

use std::time::Instant;

use clap::{Parser, Subcommand};

use codecorpus::config::PipelineConfig;
use codecorpus::dedup::content_digest;

use commands::filters::StreamStage;
use commands::Ctx;
use report::RunReport;
use stream::CliError;

#[derive(Parser)]
#[command(
    name = "codecorpus",
    version,
    about = "Code corpus curation pipeline",
    after_help = "Record streams are newline-delimited JSON objects with fields \
                  id, kind, language, content, path, repo_id, meta."
)]
struct Cli {
    /// Pipeline configuration file (TOML); defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<String>,
    /// Where to write the run report (stderr when omitted).
    #[arg(long, global = true, value_name = "PATH")]
    report: Option<String>,
    /// Worker threads for per-record stages.
    #[arg(long, global = true, default_value_t = 1, value_name = "N")]
    workers: usize,
    /// Override one config key, e.g. --threshold url_ip_ratio=0.5.
    #[arg(long = "threshold", global = true, value_name = "KEY=VALUE")]
    thresholds: Vec<String>,
    /// Input stream path, `-` for stdin.
    #[arg(long, global = true, default_value = "-", value_name = "PATH")]
    input: String,
    /// Output stream path, `-` for stdout.
    #[arg(long, global = true, default_value = "-", value_name = "PATH")]
    output: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply the source-code rule set to a record stream.
    FilterSource,
    /// Apply the code-related-text rule set to a record stream.
    FilterText,
    /// Near-deduplicate a record stream by MinHash similarity.
    Dedup {
        /// Write `kept_id<TAB>removed_id` cluster lines here.
        #[arg(long, value_name = "PATH")]
        clusters: Option<String>,
    },
    /// Run several stream stages in sequence in one process.
    Pipeline {
        /// Comma-separated stages: filter-source, filter-text, dedup.
        #[arg(long, value_delimiter = ',', required = true)]
        stages: Vec<String>,
    },
    /// Annotate source records with code metrics in meta.
    Metrics,
    /// Filter records through ordered scorer stages.
    Cascade {
        /// Stage spec, repeatable: SCORER>=T or SCORER==T
        /// (scorers: default, meta:KEY).
        #[arg(long = "stage", value_name = "SPEC", required = true)]
        stages: Vec<String>,
    },
    /// Build the import dependency graph of a repository stream.
    RepoGraph {
        /// Repository id to select when the stream holds several.
        #[arg(long)]
        repo: Option<String>,
    },
    /// Topologically sort a serialized graph (`u<TAB>v` lines).
    Toposort,
    /// Concatenate repositories in dependency order and gate on quality.
    RepoConcat,
    /// Sanitize code-comment pair records.
    Coco {
        /// rules, semantic, or full.
        #[arg(long, default_value = "rules")]
        mode: String,
        /// Canned scorer responses (JSONL of {"id", "response"}).
        #[arg(long, value_name = "PATH")]
        responses: Option<String>,
        /// Write request/response transcripts here (JSONL).
        #[arg(long, value_name = "PATH")]
        audit: Option<String>,
    },
    /// Print stage plans, token quotas, and expansion arithmetic.
    Plan {
        #[arg(long, default_value = "table1")]
        preset: String,
        /// Pre-training stage name (stage1, stage2, annealing).
        #[arg(long)]
        stage: Option<String>,
        /// Print the supervised fine-tuning schedule.
        #[arg(long)]
        sft: bool,
        /// Print the preference-optimization schedule.
        #[arg(long)]
        dpo: bool,
        /// Synthesis expansion: SEEDS,K,N.
        #[arg(long, value_name = "SEEDS,K,N")]
        expand: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Print parameter and FLOPs budgets for an architecture preset.
    Budget {
        #[arg(long, default_value = "moe-lite")]
        preset: String,
        #[arg(long, default_value_t = 4096)]
        context: u64,
        /// Second preset to compare FLOPs against.
        #[arg(long)]
        compare: Option<String>,
        #[arg(long)]
        json: bool,
    },
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::FilterSource => "filter-source",
        Command::FilterText => "filter-text",
        Command::Dedup { .. } => "dedup",
        Command::Pipeline { .. } => "pipeline",
        Command::Metrics => "metrics",
        Command::Cascade { .. } => "cascade",
        Command::RepoGraph { .. } => "repo-graph",
        Command::Toposort => "toposort",
        Command::RepoConcat => "repo-concat",
        Command::Coco { .. } => "coco",
        Command::Plan { .. } => "plan",
        Command::Budget { .. } => "budget",
    }
}

fn resolve_config(cli: &Cli) -> Result<PipelineConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("cannot read config {path}: {e}")))?;
            PipelineConfig::from_toml_str(&text)?
        }
        None => PipelineConfig::default(),
    };
    for spec in &cli.thresholds {
        let (key, value) = spec.split_once('=').ok_or_else(|| {
            CliError::usage(format!("--threshold {spec:?} must look like KEY=VALUE"))
        })?;
        cfg.apply_override(key.trim(), value.trim())?;
    }
    Ok(cfg)
}

fn parse_expand(spec: &str) -> Result<(u64, u64, u64), CliError> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::usage(format!(
            "--expand {spec:?} must look like SEEDS,K,N"
        )));
    }
    let parse = |s: &str| {
        s.trim()
            .parse::<u64>()
            .map_err(|_| CliError::usage(format!("--expand {spec:?} has a non-integer field")))
    };
    Ok((parse(parts[0])?, parse(parts[1])?, parse(parts[2])?))
}

fn dispatch(cli: &Cli, ctx: &Ctx, report: &mut RunReport) -> Result<(), CliError> {
    match &cli.command {
        Command::FilterSource => {
            commands::filters::run_pipeline(&[StreamStage::FilterSource], ctx, &mut report.stages)
        }
        Command::FilterText => {
            commands::filters::run_pipeline(&[StreamStage::FilterText], ctx, &mut report.stages)
        }
        Command::Dedup { clusters } => {
            let records = stream::read_records(&ctx.input)?.records;
            let (kept, stage) = commands::dedup::apply_dedup(records, ctx, clusters.as_deref())?;
            report.stages.push(stage);
            stream::write_records(kept.iter(), &ctx.output)
        }
        Command::Pipeline { stages } => {
            let stages: Result<Vec<StreamStage>, CliError> =
                stages.iter().map(|s| StreamStage::parse(s)).collect();
            commands::filters::run_pipeline(&stages?, ctx, &mut report.stages)
        }
        Command::Metrics => commands::metrics::run_metrics(ctx, &mut report.stages),
        Command::Cascade { stages } => {
            commands::metrics::run_cascade(stages, ctx, &mut report.stages)
        }
        Command::RepoGraph { repo } => {
            commands::repo::run_repo_graph(repo.as_deref(), ctx, &mut report.stages)
        }
        Command::Toposort => commands::repo::run_toposort(ctx, &mut report.stages),
        Command::RepoConcat => commands::repo::run_repo_concat(ctx, &mut report.stages),
        Command::Coco {
            mode,
            responses,
            audit,
        } => {
            let mode = commands::coco::CocoMode::parse(mode)?;
            commands::coco::run_coco(
                mode,
                responses.as_deref(),
                audit.as_deref(),
                ctx,
                &mut report.stages,
            )
        }
        Command::Plan {
            preset,
            stage,
            sft,
            dpo,
            expand,
            json,
        } => {
            let post = match (sft, dpo) {
                (true, true) => {
                    return Err(CliError::usage("--sft and --dpo are mutually exclusive"))
                }
                (true, false) => Some("sft"),
                (false, true) => Some("dpo"),
                (false, false) => None,
            };
            let expansion = expand.as_deref().map(parse_expand).transpose()?;
            commands::plan::run_plan(preset, stage.as_deref(), post, expansion, *json, ctx)
        }
        Command::Budget {
            preset,
            context,
            compare,
            json,
        } => commands::plan::run_budget(preset, *context, compare.as_deref(), *json, ctx),
    }
}

fn write_report(report: &RunReport, destination: Option<&str>) {
    let json = report.to_json();
    match destination {
        Some(path) => {
            if let Err(e) = std::fs::write(path, json + "\n") {
                eprintln!("failed to write report to {path}: {e}");
            }
        }
        None => eprintln!("{json}"),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own usage/help text.
            let _ = e.print();
            std::process::exit(if e.use_stderr() { 1 } else { 0 });
        }
    };

    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers.max(1))
        .build_global();

    let started = Instant::now();
    let cfg = match resolve_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {}", e.message());
            std::process::exit(e.exit_code());
        }
    };
    let digest = content_digest(&cfg.canonical_string());
    let mut report = RunReport::new(command_name(&cli.command), digest);
    let ctx = Ctx {
        cfg,
        input: cli.input.clone(),
        output: cli.output.clone(),
    };

    let result = dispatch(&cli, &ctx, &mut report);
    report.wall_time_ms = started.elapsed().as_millis();

    for stage in &report.stages {
        debug_assert!(stage.conserved(), "stage {} lost records", stage.name);
    }
    write_report(&report, cli.report.as_deref());

    match result {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {}", e.message());
            std::process::exit(e.exit_code());
        }
    }
}
