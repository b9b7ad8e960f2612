//! Batch verification CLI for the filtered skew power series kernel.
//!
//! Exit codes: 0 all selected suites pass, 1 at least one suite fails,
//! 2 configuration or instance error.

mod config;
mod report;
mod suites;

use clap::{Parser, Subcommand};
use config::{load_config, ConfigError, Instance};
use rand_chacha::rand_core::SeedableRng;
use report::{val_json, Report, SuiteRecord};
use skewpow::{decompose, BoundedSeries};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;
use suites::{Suite, SuiteOutcome, REGISTRY};

#[derive(Parser)]
#[command(name = "skewpow", version, about = "certified checks for skew power series instances")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the suites selected in a config and write a JSON report.
    Verify { config: PathBuf },
    /// Split a seeded sample series into its p^m crossed-product components.
    Decompose {
        config: PathBuf,
        #[arg(long)]
        m: u32,
    },
    /// Staged reductions.
    Pipeline {
        #[command(subcommand)]
        which: PipelineCmd,
    },
    /// List every suite id with its citation, in report order.
    ListSuites,
}

#[derive(Subcommand)]
enum PipelineCmd {
    /// Reduce the configured instance to standard form over a scalar extension.
    Sfoh { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Verify { config } => cmd_verify(&config),
        Cmd::Decompose { config, m } => cmd_decompose(&config, m),
        Cmd::Pipeline {
            which: PipelineCmd::Sfoh { config },
        } => cmd_pipeline_sfoh(&config),
        Cmd::ListSuites => {
            for s in REGISTRY {
                println!("{:<24} {}", s.id, s.citation);
            }
            return ExitCode::SUCCESS;
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}

fn build_instance(path: &PathBuf) -> Result<Instance, ConfigError> {
    let cfg = load_config(path)?;
    suites::validate_selection(&cfg)?;
    Instance::build(cfg)
}

fn run_suite(suite: &Suite, inst: &Instance) -> SuiteRecord {
    let mut rng = suites::suite_rng(inst.cfg.seed, suite.id);
    let outcome = match (suite.run)(inst, &mut rng) {
        Ok(o) => o,
        Err(e) => SuiteOutcome {
            pass: false,
            detail: format!("error: {e}"),
            ..Default::default()
        },
    };
    SuiteRecord {
        suite: suite.id.to_string(),
        citation: suite.citation.to_string(),
        instance: inst.cfg.id.clone(),
        pass: outcome.pass,
        residuals: outcome.residuals.into_iter().map(val_json).collect(),
        counters: outcome.counters,
        detail: outcome.detail,
    }
}

fn cmd_verify(path: &PathBuf) -> Result<bool, ConfigError> {
    let inst = build_instance(path)?;
    let mut records = vec![];
    // registry order == suite-id order == report order
    for suite in REGISTRY {
        if !inst.cfg.suites.iter().any(|s| s == suite.id) {
            continue;
        }
        let started = Instant::now();
        let record = run_suite(suite, &inst);
        let ms = started.elapsed().as_secs_f64() * 1e3;
        println!(
            "{:<24} {:<32} {}  ({ms:.1} ms)",
            record.suite,
            record.citation,
            if record.pass { "pass" } else { "FAIL" },
        );
        records.push(record);
    }
    let pass = records.iter().all(|r| r.pass);
    let report = Report {
        schema: report::SCHEMA,
        instance: inst.cfg.id.clone(),
        seed: inst.cfg.seed,
        pass,
        records,
    };
    let written = report::write_report(&report, &report::report_dir())
        .map_err(|e| ConfigError(format!("cannot write report: {e}")))?;
    println!("report: {}", written.display());
    Ok(pass)
}

fn cmd_decompose(path: &PathBuf, m: u32) -> Result<bool, ConfigError> {
    if m == 0 || m > 6 {
        return Err(ConfigError("--m must lie in 1..=6".into()));
    }
    let inst = build_instance(path)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(inst.cfg.seed);
    let f = BoundedSeries::random_poly(&inst.datum, &mut rng, 6, 0, inst.cfg.xcap);
    let dec = decompose(&f, m).map_err(|e| ConfigError(format!("decomposition failed: {e}")))?;
    println!("sample series: {}", f.render());
    for (i, comp) in dec.components.iter().enumerate() {
        println!("component g^{i}: {}", comp.render());
    }
    let ok = dec
        .recompose()
        .map(|back| back.eq_at_truncation(&f))
        .unwrap_or(false);
    println!("roundtrip: {}", if ok { "pass" } else { "FAIL" });
    Ok(ok)
}

fn cmd_pipeline_sfoh(path: &PathBuf) -> Result<bool, ConfigError> {
    let mut inst = build_instance(path)?;
    if inst.cfg.pipeline.is_none() {
        return Err(ConfigError("pipeline sfoh needs a [pipeline] table".into()));
    }
    // the report for the standalone verb carries exactly this one suite
    inst.cfg.suites = vec!["sfoh-pipeline".into()];
    let suite = suites::find("sfoh-pipeline").expect("registered suite");
    let record = run_suite(suite, &inst);
    println!(
        "{:<24} {:<32} {}",
        record.suite,
        record.citation,
        if record.pass { "pass" } else { "FAIL" },
    );
    println!("{}", record.detail);
    let pass = record.pass;
    let report = Report {
        schema: report::SCHEMA,
        instance: format!("{}-sfoh", inst.cfg.id),
        seed: inst.cfg.seed,
        pass,
        records: vec![record],
    };
    let written = report::write_report(&report, &report::report_dir())
        .map_err(|e| ConfigError(format!("cannot write report: {e}")))?;
    println!("report: {}", written.display());
    Ok(pass)
}
