//! Lists the first-order mutants of a bundled target and shows how the
//! two oracles judge one of them.
//!
//! `cargo run --example enumerate_mutants -- [target]`

use mutafuzz::corpus;
use mutafuzz::minilang::{execute, kills, OracleMode, TestInput};
use mutafuzz::mutation::{apply_mutations, enumerate_mutations, MutationOperator};

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "demo".into());
    let target = corpus::target(&name).expect("bundled target");
    let program = target.parse().unwrap();
    let mutations = enumerate_mutations(&program, &MutationOperator::ALL);

    println!("{}: {} mutants", target.name, mutations.len());
    for op in MutationOperator::ALL {
        let n = mutations.iter().filter(|m| m.operator == op).count();
        println!("  {:<5} {n:>3}  {}", op.name(), op.description());
    }
    println!();
    for m in mutations.iter().take(12) {
        println!("  #{:<3} {}:{:<3} {:<5} {} -> {}", m.mutation_id, m.line, m.col, m.operator.name(), m.original, m.replacement);
    }

    // Run every mutant on one input and count kills under each oracle.
    let input = TestInput::from_i32(6);
    let original = execute(&program, &input, 10_000);
    let (mut crash, mut diff) = (0, 0);
    for m in &mutations {
        let mutant = apply_mutations(&program, std::slice::from_ref(m)).unwrap();
        let r = execute(&mutant.program, &input, 10_000);
        crash += kills(&original, &r, OracleMode::CRASH) as usize;
        diff += kills(&original, &r, OracleMode::DIFFERENTIAL) as usize;
    }
    println!("\non input {}: {crash} killed by the crash oracle, {diff} by the differential oracle", input.to_hex());
}
