//! Fuzzer evaluation by mutation analysis.
//!
//! Targets are written in [`minilang`], a small instrumented language.
//! [`mutation`] enumerates first-order mutants, [`fuzzing`] runs random and
//! greybox campaigns in virtual time, and [`supermutant`] packs mutations
//! that no input reaches together into one program. [`pipeline`] ties these
//! into the two-phase run (coverage seed and static pass, then per-fuzzer
//! campaigns), and [`analysis`] turns the result into kill matrices, minimal
//! mutant sets, kill curves and residual-risk estimates.
//!
//! ```
//! use mutafuzz::minilang::{execute, parse, Outcome, TestInput};
//!
//! let p = parse("fn main() { x = read_int(); print(100 / (x - 5)); }").unwrap();
//! let r = execute(&p, &TestInput::from_i32(5), 1_000);
//! assert!(matches!(r.outcome, Outcome::Crash { .. }));
//! ```

pub mod minilang;
pub mod rng;
pub mod mutation;
pub mod fuzzing;
pub mod supermutant;
pub mod pipeline;
pub mod analysis;
pub mod corpus;
pub mod cli;
