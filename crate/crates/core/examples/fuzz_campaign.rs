//! Runs the random and greybox fuzzers against the staged magic-value
//! target and prints how coverage grows in virtual time.
//!
//! `cargo run --example fuzz_campaign -- [budget]`

use mutafuzz::corpus;
use mutafuzz::fuzzing::{run_campaign, CampaignTarget, FuzzerConfig, FuzzerKind};
use mutafuzz::minilang::OracleMode;

fn main() {
    let budget: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100_000);
    let program = corpus::target("magic").unwrap().parse().unwrap();
    for kind in [FuzzerKind::Random, FuzzerKind::Greybox] {
        let config = FuzzerConfig::new(kind, 7);
        let log = run_campaign(&CampaignTarget::coverage(&program), &config, budget, OracleMode::CRASH).unwrap();
        println!(
            "{kind}: {} executions, {} coverage elements, {} corpus entries",
            log.executions,
            log.coverage_events.len(),
            log.corpus_final.len()
        );
        for (vtime, total) in log.coverage_curve() {
            println!("  vtime {vtime:>7}  coverage {total}");
        }
    }
}
