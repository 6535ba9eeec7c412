//! Runs the full two-phase pipeline on a bundled target with small budgets
//! and prints the mutant taxonomy.
//!
//! `cargo run --release --example split_pipeline -- [target] [crash|diff]`

use mutafuzz::corpus;
use mutafuzz::minilang::{OracleKind, OracleMode};
use mutafuzz::pipeline::{run_pipeline, PipelineConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "boundary".into());
    let kind: OracleKind = args.next().as_deref().unwrap_or("diff").parse().unwrap();
    let program = corpus::target(&name).expect("bundled target").parse().unwrap();
    let config = PipelineConfig {
        oracle: OracleMode { kind, hangs_are_kills: false },
        phase1_budget: 10_000,
        saturation_window: 2_000,
        phase2_budget: 2_000,
        trials: 3,
        trial_seeds: vec![1, 2, 3],
        ..PipelineConfig::default()
    };
    let run = run_pipeline(&program, &config, 1).unwrap();

    println!("{name} under the {kind} oracle: {} mutants", run.mutations.len());
    println!("  coverage seed: {} inputs covering {} elements", run.seed.len(), run.seed.covered.len());
    println!("  static pass killed {}", run.static_pass.killed.len());
    println!(
        "  {} supermutants, {} campaigns ({} aborted on violations)",
        run.supermutants.len(),
        run.mutation_phase.campaigns.len(),
        run.mutation_phase.campaigns.iter().filter(|c| c.aborted()).count()
    );
    for (class, n) in run.class_counts() {
        println!("  {class:<13} {n}");
    }
    for v in run.verdicts.iter().filter(|v| v.flag.is_some()).take(10) {
        let m = &run.mutations[v.mutation_id as usize];
        println!("  #{:<3} {:<12} {:?}  {} -> {}", m.mutation_id, v.class, v.flag.unwrap(), m.original.lines().next().unwrap_or(""), m.replacement);
    }
}
