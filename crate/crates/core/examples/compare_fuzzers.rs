//! Compares the random and greybox fuzzers on per-trial kill counts with
//! bootstrap intervals on the median.
//!
//! `cargo run --release --example compare_fuzzers -- [target]`

use std::collections::BTreeSet;

use mutafuzz::analysis::compare_fuzzers;
use mutafuzz::corpus;
use mutafuzz::minilang::OracleMode;
use mutafuzz::pipeline::{run_pipeline, PipelineConfig};

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "tlv".into());
    let program = corpus::target(&name).expect("bundled target").parse().unwrap();
    let config = PipelineConfig {
        oracle: OracleMode::DIFFERENTIAL,
        phase1_budget: 10_000,
        saturation_window: 2_000,
        phase2_budget: 2_000,
        trials: 5,
        trial_seeds: (1..=5).collect(),
        ..PipelineConfig::default()
    };
    let run = run_pipeline(&program, &config, 1).unwrap();

    let per_trial: Vec<(String, Vec<usize>)> = config
        .fuzzer_names()
        .into_iter()
        .map(|f| {
            let kills = (0..config.trials)
                .map(|t| run.mutation_phase.lane(&f, t).flat_map(|c| c.log.killed()).collect::<BTreeSet<_>>().len())
                .collect();
            (f, kills)
        })
        .collect();
    let ranking = compare_fuzzers(&per_trial).unwrap();
    println!("{name}: non-trivial kills per trial");
    for s in &ranking.summaries {
        println!("  {:<8} {:?}  median {}  95% CI [{}, {}]", s.fuzzer, s.per_trial, s.median, s.ci_low, s.ci_high);
    }
    for (a, b) in &ranking.ties {
        println!("  {a} and {b} are statistically tied");
    }
}
