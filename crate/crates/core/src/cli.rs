//! Command-line front end and run-directory management.
//!
//! A run directory is filled by four subcommands in order:
//!
//! | subcommand | writes |
//! |---|---|
//! | `gen` | `config.json`, `target.mini`, `mutants.json`, `manifest.json` |
//! | `run` | `seed/`, `phase1.json`, `supermutants.json`, `logs/`, `verdicts.json` |
//! | `analyze` | `matrix.csv`, `curves.csv`, `report.json` |
//! | `report` | `report.md` |
//!
//! Exit codes: 0 on success, 2 for unparsable targets or configurations,
//! 3 for a run directory that is incomplete, corrupt or was edited after
//! `gen`.

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};
use thiserror::Error;

use crate::analysis::{analyze, curves_csv, report_markdown, ScoreReport};
use crate::corpus;
use crate::minilang::{parse_named, OracleKind, OracleMode, Program};
use crate::mutation::{Mutation, MutationOperator};
use crate::pipeline::{
    finish, prepare, with_jobs, CampaignRecord, MutationPhase, PipelineConfig, PipelineRun, Prepared, SupermutantPlan,
    VerdictsDocument,
};

pub const RUN_DIR_ENV: &str = "MUTAFUZZ_RUN_DIR";

#[derive(Debug, Parser)]
#[command(name = "mutafuzz", version, about = "Evaluate fuzzers by mutation analysis")]
pub struct Cli {
    /// Concurrent campaigns; results do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Derive all trial seeds from this value (applied by `gen`).
    #[arg(long, global = true)]
    pub seed_override: Option<u64>,
    /// Oracle to record in the configuration (applied by `gen`).
    #[arg(long, global = true, value_parser = ["crash", "diff"])]
    pub oracle: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a target and enumerate its mutants into a new run directory.
    Gen {
        /// A `.mini` file, or the name of a bundled target.
        target: String,
        /// Pipeline configuration (JSON); defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(env = RUN_DIR_ENV, default_value = "run")]
        out_dir: PathBuf,
    },
    /// Run the coverage phase, the static pass and the mutation phase.
    Run {
        #[arg(env = RUN_DIR_ENV, default_value = "run")]
        out_dir: PathBuf,
    },
    /// Build the kill matrix, curves and scores.
    Analyze {
        #[arg(env = RUN_DIR_ENV, default_value = "run")]
        out_dir: PathBuf,
    },
    /// Render the analysis as markdown.
    Report {
        #[arg(env = RUN_DIR_ENV, default_value = "run")]
        out_dir: PathBuf,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    RunDir(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::RunDir(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phases {
    pub gen: bool,
    pub phase1: bool,
    pub phase2: bool,
    pub analyze: bool,
    pub report: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub target_name: String,
    pub config_digest: String,
    pub target_digest: String,
    pub phases: Phases,
    /// Unix seconds at which each phase completed.
    pub timestamps: BTreeMap<String, u64>,
}

impl RunManifest {
    fn stamp(&mut self, phase: &str) {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        self.timestamps.insert(phase.to_string(), now);
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Parses arguments, runs the subcommand and returns the exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let jobs = cli.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if !matches!(cli.command, Command::Gen { .. }) && (cli.oracle.is_some() || cli.seed_override.is_some()) {
        return Err(CliError::Input("--oracle and --seed-override are recorded by `gen`; regenerate the run to change them".into()));
    }
    match &cli.command {
        Command::Gen { target, config, out_dir } => cmd_gen(target, config.as_deref(), out_dir, cli),
        Command::Run { out_dir } => cmd_run(out_dir, jobs),
        Command::Analyze { out_dir } => cmd_analyze(out_dir, jobs),
        Command::Report { out_dir } => cmd_report(out_dir),
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn read_run_file(dir: &Path, name: &str) -> Result<Vec<u8>, CliError> {
    fs::read(dir.join(name)).map_err(|e| CliError::RunDir(format!("cannot read {}: {e}", dir.join(name).display())))
}

fn read_json<T: serde::de::DeserializeOwned>(dir: &Path, name: &str) -> Result<T, CliError> {
    let bytes = read_run_file(dir, name)?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::RunDir(format!("{} is corrupt: {e}", dir.join(name).display())))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| CliError::Io { path: parent.to_path_buf(), source })?;
    }
    fs::write(path, bytes).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write(path, text)
}

fn load_target(target: &str) -> Result<(String, String), CliError> {
    let path = Path::new(target);
    if path.is_file() {
        let bytes = read(path)?;
        let src = String::from_utf8(bytes).map_err(|_| CliError::Input(format!("{target} is not UTF-8")))?;
        let name = path.file_stem().map_or_else(|| target.to_string(), |s| s.to_string_lossy().into_owned());
        return Ok((name, src));
    }
    match corpus::target(target) {
        Some(t) => Ok((t.name.to_string(), t.source.to_string())),
        None => {
            let names: Vec<&str> = corpus::TARGETS.iter().map(|t| t.name).collect();
            Err(CliError::Input(format!("{target}: no such file or bundled target (bundled: {})", names.join(", "))))
        }
    }
}

fn parse_config(text: &[u8]) -> Result<PipelineConfig, CliError> {
    let config: PipelineConfig = serde_json::from_slice(text).map_err(|e| {
        let names: Vec<&str> = MutationOperator::ALL.iter().map(|o| o.name()).collect();
        CliError::Input(format!("invalid configuration: {e} (operators: {})", names.join(", ")))
    })?;
    config.validate().map_err(|e| CliError::Input(e.to_string()))?;
    Ok(config)
}

pub fn cmd_gen(target: &str, config: Option<&Path>, out_dir: &Path, cli: &Cli) -> Result<(), CliError> {
    let (name, source) = load_target(target)?;
    let program = parse_named(&source, &name).map_err(|e| CliError::Input(format!("{name}: {e}")))?;
    let mut config = match config {
        Some(p) => parse_config(&read(p)?)?,
        None => PipelineConfig::default(),
    };
    if let Some(o) = &cli.oracle {
        config.oracle.kind = o.parse::<OracleKind>().map_err(CliError::Input)?;
    }
    if let Some(s) = cli.seed_override {
        config = config.with_seed_override(s);
    }
    let mutations = crate::pipeline::generate_mutations(&program, &config).map_err(|e| CliError::Input(e.to_string()))?;

    fs::create_dir_all(out_dir).map_err(|source| CliError::Io { path: out_dir.to_path_buf(), source })?;
    let config_text = format!("{}\n", serde_json::to_string_pretty(&config).unwrap());
    write(&out_dir.join("config.json"), &config_text)?;
    write(&out_dir.join("target.mini"), &source)?;
    write(&out_dir.join("mutants.json"), format!("{}\n", crate::mutation::mutations_to_json(&mutations)))?;
    let mut manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        target_name: name.clone(),
        config_digest: sha256_hex(config_text.as_bytes()),
        target_digest: sha256_hex(source.as_bytes()),
        phases: Phases { gen: true, ..Phases::default() },
        timestamps: BTreeMap::new(),
    };
    manifest.stamp("gen");
    write_json(&out_dir.join("manifest.json"), &manifest)?;

    println!("{name}: {} mutants", mutations.len());
    for op in MutationOperator::ALL {
        let n = mutations.iter().filter(|m| m.operator == op).count();
        if config.operators.contains(&op) {
            println!("  {:<5} {n}", op.name());
        }
    }
    Ok(())
}

/// The loaded, digest-checked contents of a run directory.
pub struct RunDir {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub config: PipelineConfig,
    pub program: Program,
    pub mutations: Vec<Mutation>,
}

impl RunDir {
    pub fn open(dir: &Path) -> Result<Self, CliError> {
        let manifest: RunManifest = read_json(dir, "manifest.json")?;
        if !manifest.phases.gen {
            return Err(CliError::RunDir(format!("{}: `gen` did not complete", dir.display())));
        }
        let config_bytes = read_run_file(dir, "config.json")?;
        let target_bytes = read_run_file(dir, "target.mini")?;
        if sha256_hex(&config_bytes) != manifest.config_digest {
            return Err(CliError::RunDir("config.json changed since `gen`".into()));
        }
        if sha256_hex(&target_bytes) != manifest.target_digest {
            return Err(CliError::RunDir("target.mini changed since `gen`".into()));
        }
        let config: PipelineConfig =
            serde_json::from_slice(&config_bytes).map_err(|e| CliError::RunDir(format!("config.json is corrupt: {e}")))?;
        let source = String::from_utf8(target_bytes).map_err(|_| CliError::RunDir("target.mini is not UTF-8".into()))?;
        let program = parse_named(&source, &manifest.target_name).map_err(|e| CliError::RunDir(format!("target.mini: {e}")))?;
        let mutations: Vec<Mutation> = read_json(dir, "mutants.json")?;
        Ok(RunDir { dir: dir.to_path_buf(), manifest, config, program, mutations })
    }

    fn save_manifest(&self) -> Result<(), CliError> {
        write_json(&self.dir.join("manifest.json"), &self.manifest)
    }

    fn require(&self, done: bool, what: &str) -> Result<(), CliError> {
        if done {
            Ok(())
        } else {
            Err(CliError::RunDir(format!("{}: {what} has not completed", self.dir.display())))
        }
    }

    /// Reassembles the pipeline result written by `run`.
    pub fn load_run(&self) -> Result<PipelineRun, CliError> {
        self.require(self.manifest.phases.phase2, "`run`")?;
        let prepared: Prepared = read_json(&self.dir, "phase1.json")?;
        let index: LogIndex = read_json(&self.dir, "logs/index.json")?;
        let campaigns = index
            .campaigns
            .iter()
            .map(|rel| read_json::<CampaignRecord>(&self.dir, rel))
            .collect::<Result<Vec<_>, _>>()?;
        let doc: VerdictsDocument = read_json(&self.dir, "verdicts.json")?;
        let Prepared { mutations, coverage, seed, static_pass, graph, supermutants } = prepared;
        Ok(PipelineRun {
            mutations,
            coverage,
            seed,
            static_pass,
            graph,
            supermutants,
            mutation_phase: MutationPhase { campaigns, backlog: index.backlog },
            verdicts: doc.mutations,
            warnings: doc.warnings,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct LogIndex {
    /// Paths relative to the run directory, in scheduling order.
    campaigns: Vec<String>,
    backlog: Vec<(String, usize, SupermutantPlan)>,
}

pub fn cmd_run(out_dir: &Path, jobs: usize) -> Result<(), CliError> {
    let mut rd = RunDir::open(out_dir)?;
    if rd.manifest.phases.phase2 {
        println!("{}: run already complete", out_dir.display());
        return Ok(());
    }
    let config = rd.config.clone();
    let program = rd.program.clone();
    let pipeline_err = |e: crate::pipeline::PipelineError| CliError::Input(e.to_string());

    let prepared: Prepared = if rd.manifest.phases.phase1 {
        read_json(out_dir, "phase1.json")?
    } else {
        let mutations = rd.mutations.clone();
        let prepared = with_jobs(jobs, || prepare(&program, mutations, &config)).map_err(pipeline_err)?;
        for (i, input) in prepared.seed.inputs.iter().enumerate() {
            write(&out_dir.join("seed").join(format!("{i:04}.bin")), input.bytes())?;
        }
        for lane in &prepared.coverage.lanes {
            write_json(&out_dir.join("logs").join(&lane.fuzzer).join(lane.trial.to_string()).join("coverage.json"), &lane.log)?;
        }
        write_json(&out_dir.join("phase1.json"), &prepared)?;
        rd.manifest.phases.phase1 = true;
        rd.manifest.stamp("phase1");
        rd.save_manifest()?;
        prepared
    };

    let run = with_jobs(jobs, || finish(&program, prepared, &config)).map_err(pipeline_err)?;
    let mut index = LogIndex { campaigns: Vec::new(), backlog: run.mutation_phase.backlog.clone() };
    let mut groups: BTreeMap<String, Vec<u32>> = BTreeMap::new();
    for c in &run.mutation_phase.campaigns {
        let rel = format!("logs/{}/{}/{}.json", c.fuzzer, c.trial, c.supermutant);
        write_json(&out_dir.join(&rel), c)?;
        index.campaigns.push(rel);
        groups.insert(c.supermutant.clone(), c.group.clone());
    }
    for p in &run.supermutants {
        groups.insert(p.id.clone(), p.group.clone());
    }
    write_json(&out_dir.join("logs/index.json"), &index)?;
    write_json(&out_dir.join("supermutants.json"), &groups)?;
    write_json(&out_dir.join("verdicts.json"), &run.verdicts_document())?;
    rd.manifest.phases.phase2 = true;
    rd.manifest.stamp("phase2");
    rd.save_manifest()?;

    println!("{}: {} mutants", out_dir.display(), run.verdicts.len());
    for (class, n) in run.class_counts() {
        println!("  {class:<13} {n}");
    }
    for w in &run.warnings {
        println!("  warning: {}", serde_json::to_string(w).unwrap());
    }
    Ok(())
}

pub fn cmd_analyze(out_dir: &Path, jobs: usize) -> Result<(), CliError> {
    let mut rd = RunDir::open(out_dir)?;
    let run = rd.load_run()?;
    let oracle: OracleMode = rd.config.oracle;
    let analysis = with_jobs(jobs, || analyze(&rd.program, &run, oracle, rd.config.fuel()))
        .map_err(|e| CliError::RunDir(e.to_string()))?;
    write(&out_dir.join("matrix.csv"), analysis.matrix.to_csv())?;
    write(&out_dir.join("curves.csv"), curves_csv(&analysis.curves))?;
    write_json(&out_dir.join("report.json"), &analysis.report)?;
    rd.manifest.phases.analyze = true;
    rd.manifest.stamp("analyze");
    rd.save_manifest()?;
    let r = &analysis.report;
    println!(
        "{}: killed {}/{} (raw {:.3}, headline {:.3}), chao1 {:.2}, residual risk {:.2}",
        out_dir.display(),
        r.killed,
        r.total,
        r.raw_score,
        r.headline_score,
        r.chao1.estimate,
        r.residual_risk
    );
    Ok(())
}

pub fn cmd_report(out_dir: &Path) -> Result<(), CliError> {
    let mut rd = RunDir::open(out_dir)?;
    rd.require(rd.manifest.phases.analyze, "`analyze`")?;
    let report: ScoreReport = read_json(out_dir, "report.json")?;
    let md = report_markdown(&report, &rd.program.source_name);
    write(&out_dir.join("report.md"), md)?;
    rd.manifest.phases.report = true;
    rd.manifest.stamp("report");
    rd.save_manifest()?;
    println!("{}", out_dir.join("report.md").display());
    Ok(())
}
