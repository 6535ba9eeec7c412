//! Builds the kill matrix of a pipeline run's final test suite and derives
//! the minimal mutant set, the Chao1 estimate and the residual risk.
//!
//! `cargo run --release --example kill_matrix -- [target]`

use std::collections::BTreeSet;

use mutafuzz::analysis::{build_kill_matrix, chao1_estimate, minimal_mutant_set, minimal_set_score, raw_score, residual_risk};
use mutafuzz::corpus;
use mutafuzz::pipeline::{run_pipeline, MutantClass, PipelineConfig};

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "gcd".into());
    let program = corpus::target(&name).expect("bundled target").parse().unwrap();
    let config = PipelineConfig {
        phase1_budget: 10_000,
        saturation_window: 2_000,
        phase2_budget: 2_000,
        trials: 2,
        trial_seeds: vec![1, 2],
        ..PipelineConfig::default()
    };
    let run = run_pipeline(&program, &config, 1).unwrap();
    let suite = run.final_suite();
    let matrix = build_kill_matrix(&program, &run.mutations, &suite, config.oracle, config.fuel()).unwrap();

    let minimal = minimal_mutant_set(&matrix);
    let killed: BTreeSet<u32> = run
        .verdicts
        .iter()
        .filter(|v| matches!(v.class, MutantClass::Trivial | MutantClass::Intelligent))
        .map(|v| v.mutation_id)
        .collect();
    let chao1 = chao1_estimate(&matrix);

    println!("{name}: {} mutants x {} tests", matrix.mutants.len(), matrix.tests.len());
    println!("  killable          {}", matrix.killable().count());
    println!("  dominators        {:?}", minimal.dominators);
    println!("  duplicate groups  {}", minimal.duplicate_groups.len());
    println!("  raw score         {:.3}", raw_score(run.mutations.len(), matrix.killable().count()));
    println!("  minimal-set score {:.3}", minimal_set_score(&matrix, &killed));
    println!("  chao1             {:.2} (S_obs {}, f1 {}, f2 {})", chao1.estimate, chao1.s_obs, chao1.f1, chao1.f2);
    println!("  residual risk     {:.2}", residual_risk(&chao1, matrix.killable().count()));

    // Duplicating a mutant inflates the raw score but not the minimal-set one.
    if let Some(&d) = minimal.dominators.first() {
        let dup = matrix.with_duplicate_row(matrix.row_of(d).unwrap(), 9_999);
        let mut killed_dup = killed.clone();
        if killed.contains(&d) {
            killed_dup.insert(9_999);
        }
        println!(
            "  dominator #{d} duplicated: raw {:.3}, minimal-set {:.3}",
            raw_score(dup.mutants.len(), dup.killable().count()),
            minimal_set_score(&dup, &killed_dup)
        );
    }
}
