//! Groups mutations into supermutants from coverage profiles and
//! adjudicates a few executions of one of them.
//!
//! `cargo run --example supermutants -- [target]`

use mutafuzz::corpus;
use mutafuzz::fuzzing::next_input_random;
use mutafuzz::minilang::{execute, OracleMode, TestInput};
use mutafuzz::mutation::{enumerate_mutations, MutationOperator};
use mutafuzz::rng::SplitMix64;
use mutafuzz::supermutant::{
    adjudicate_execution, build_conflict_graph, group_supermutants, Profile, Supermutant, Verdict,
    DEFAULT_MAX_GROUP_SIZE,
};

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "gcd".into());
    let program = corpus::target(&name).expect("bundled target").parse().unwrap();
    let mutations = enumerate_mutations(&program, &MutationOperator::ALL);

    let mut rng = SplitMix64::new(1);
    let inputs: Vec<TestInput> = (0..200).map(|_| next_input_random(&mut rng, 16)).collect();
    let profiles: Vec<Profile> = inputs
        .iter()
        .map(|i| Profile { input: i.clone(), nodes: execute(&program, i, 10_000).nodes.iter().collect() })
        .collect();

    let graph = build_conflict_graph(&program, &mutations, &profiles);
    let groups = group_supermutants(&graph, DEFAULT_MAX_GROUP_SIZE);
    println!(
        "{name}: {} mutations, {} conflict edges, {} supermutants",
        mutations.len(),
        graph.edges().len(),
        groups.len()
    );
    for (i, g) in groups.iter().enumerate().take(8) {
        println!("  sm{i:03} {g:?}");
    }

    let largest = groups.iter().max_by_key(|g| g.len()).unwrap();
    let sm = Supermutant::build("largest", &program, &mutations, largest).unwrap();
    let mut tally = [0usize; 4];
    for _ in 0..2_000 {
        let input = next_input_random(&mut rng, 16);
        let base = execute(&program, &input, 10_000);
        let r = execute(&sm.mutant.program, &input, 10_000);
        let slot = match adjudicate_execution(&sm, &r, &base, OracleMode::DIFFERENTIAL) {
            Verdict::Killed(_) => 0,
            Verdict::NoEffect => 1,
            Verdict::IndependenceViolation(_) => 2,
            Verdict::HarnessDefect => 3,
        };
        tally[slot] += 1;
    }
    println!(
        "\n{} members, 2000 random inputs: {} kill verdicts, {} no effect, {} independence violations, {} harness defects",
        sm.group.len(),
        tally[0],
        tally[1],
        tally[2],
        tally[3]
    );
}
