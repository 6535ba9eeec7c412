//! Parses a MiniLang program and runs it on a few inputs, showing the
//! outcome, output and coverage of each run.
//!
//! `cargo run --example parse_and_run`

use mutafuzz::minilang::{execute, parse, pretty_print, CoverageElement, TestInput};

const SOURCE: &str = "
fn main() {
    x = read_int();
    if (x > 10) {
        print(x * 2);
    } else {
        print(100 / (x - 5));
    }
}
";

fn main() {
    let program = parse(SOURCE).expect("valid program");
    println!("{}", pretty_print(&program));
    println!("{} AST nodes\n", program.node_count());

    for v in [42, 7, 5] {
        let r = execute(&program, &TestInput::from_i32(v), 1_000);
        let branches = r.coverage.iter().filter(|e| matches!(e, CoverageElement::Branch(..))).count();
        println!(
            "x = {v:>3}: {:<28} output {:?}  fuel {:>2}  stmts+branches {} ({} branch outcomes)",
            r.outcome.to_string(),
            r.output_str(),
            r.fuel_used,
            r.coverage.len(),
            branches
        );
    }
}
