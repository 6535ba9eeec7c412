//! Built-in fuzzers and the campaign loop.
//!
//! Two input generators are provided: a hidden-box random fuzzer that draws
//! fresh inputs without looking at any feedback, and a coverage-guided
//! greybox fuzzer that keeps a corpus of coverage-increasing inputs and
//! havoc-mutates uniformly chosen entries. Time is virtual: one unit per
//! target execution.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

use crate::minilang::{execute, CoverageElement, MutationId, NodeId, OracleMode, Outcome, Program, TestInput};
use crate::rng::SplitMix64;
use crate::supermutant::{adjudicate, Verdict};

pub const DEFAULT_FUEL_PER_EXEC: u64 = 10_000;

/// Upper bound on stacked havoc edits per mutation.
pub const HAVOC_MAX_STACK: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FuzzerKind {
    Random,
    Greybox,
}

impl fmt::Display for FuzzerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FuzzerKind::Random => "random",
            FuzzerKind::Greybox => "greybox",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuzzerConfig {
    pub kind: FuzzerKind,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default = "default_max_input_len")]
    pub max_input_len: usize,
    #[serde(default = "default_fuel")]
    pub fuel_per_exec: u64,
    #[serde(default = "default_corpus")]
    pub initial_corpus: Vec<TestInput>,
}

fn default_max_input_len() -> usize {
    crate::minilang::DEFAULT_MAX_INPUT_LEN
}

fn default_fuel() -> u64 {
    DEFAULT_FUEL_PER_EXEC
}

fn default_corpus() -> Vec<TestInput> {
    vec![TestInput::default()]
}

impl FuzzerConfig {
    pub fn new(kind: FuzzerKind, rng_seed: u64) -> Self {
        FuzzerConfig {
            kind,
            rng_seed,
            max_input_len: default_max_input_len(),
            fuel_per_exec: default_fuel(),
            initial_corpus: default_corpus(),
        }
    }

    pub fn validate(&self) -> Result<(), FuzzError> {
        if self.fuel_per_exec == 0 {
            return Err(FuzzError::InvalidConfig("fuel_per_exec must be positive".into()));
        }
        if self.max_input_len == 0 {
            return Err(FuzzError::InvalidConfig("max_input_len must be at least 1".into()));
        }
        if self.kind == FuzzerKind::Greybox && self.initial_corpus.is_empty() {
            return Err(FuzzError::InvalidConfig("greybox fuzzing needs a non-empty initial corpus".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FuzzError {
    #[error("invalid fuzzer configuration: {0}")]
    InvalidConfig(String),
}

/// A fresh random input: length uniform in `0..=max_input_len`, bytes uniform.
pub fn next_input_random(rng: &mut SplitMix64, max_input_len: usize) -> TestInput {
    let len = rng.index(max_input_len + 1);
    TestInput((0..len).map(|_| rng.byte()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Edit {
    BitFlip,
    Overwrite,
    AddSub,
    DeleteSpan,
    DuplicateSpan,
    InsertRandom,
    Truncate,
}

const EDITS: [Edit; 7] = [
    Edit::BitFlip,
    Edit::Overwrite,
    Edit::AddSub,
    Edit::DeleteSpan,
    Edit::DuplicateSpan,
    Edit::InsertRandom,
    Edit::Truncate,
];

/// Longest span touched by a single delete or duplicate edit.
const MAX_SPAN: usize = 16;

/// Applies a stack of 1 to 8 random edits to `input`.
///
/// On an empty buffer only insertion applies. The result is clamped to
/// `max_input_len` after every edit.
pub fn havoc_mutate(input: &TestInput, rng: &mut SplitMix64, max_input_len: usize) -> TestInput {
    let mut data = input.0.clone();
    data.truncate(max_input_len);
    let stack = 1 + rng.below(HAVOC_MAX_STACK);
    for _ in 0..stack {
        let edit = if data.is_empty() { Edit::InsertRandom } else { EDITS[rng.index(EDITS.len())] };
        let len = data.len();
        match edit {
            Edit::BitFlip => {
                let pos = rng.index(len);
                data[pos] ^= 1 << rng.below(8);
            }
            Edit::Overwrite => {
                let pos = rng.index(len);
                data[pos] = rng.byte();
            }
            Edit::AddSub => {
                let pos = rng.index(len);
                let delta = 1 + rng.below(8) as u8;
                data[pos] = if rng.coin() { data[pos].wrapping_add(delta) } else { data[pos].wrapping_sub(delta) };
            }
            Edit::DeleteSpan => {
                let start = rng.index(len);
                let n = 1 + rng.index((len - start).min(MAX_SPAN));
                data.drain(start..start + n);
            }
            Edit::DuplicateSpan => {
                let start = rng.index(len);
                let n = 1 + rng.index((len - start).min(MAX_SPAN));
                let at = rng.index(len + 1);
                let span: Vec<u8> = data[start..start + n].to_vec();
                data.splice(at..at, span);
            }
            Edit::InsertRandom => {
                let at = rng.index(len + 1);
                let n = 1 + rng.index(8);
                let bytes: Vec<u8> = (0..n).map(|_| rng.byte()).collect();
                data.splice(at..at, bytes);
            }
            Edit::Truncate => {
                let keep = rng.index(len);
                data.truncate(keep);
            }
        }
        data.truncate(max_input_len);
    }
    TestInput(data)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageEvent {
    pub vtime: u64,
    pub element: CoverageElement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeEvent {
    pub vtime: u64,
    pub node: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KillEvent {
    pub vtime: u64,
    pub mutation_id: MutationId,
    pub input: TestInput,
    /// Where the mutant crashed, when it did. The kill is attributed to the
    /// covered mutation regardless of this site.
    pub crash_node: Option<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationCover {
    pub mutation_id: MutationId,
    pub vtime: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationEvent {
    pub vtime: u64,
    pub mutations: Vec<MutationId>,
    pub input: TestInput,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    /// Execution at which the entry was first run; 0 for initial entries the
    /// budget never reached.
    pub vtime: u64,
    pub input: TestInput,
}

/// Everything observable about one campaign, in virtual time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignLog {
    pub executions: u64,
    /// How many leading executions replayed the initial corpus.
    pub seed_executions: u64,
    pub coverage_events: Vec<CoverageEvent>,
    /// First evaluation of each AST node.
    pub node_events: Vec<NodeEvent>,
    pub kill_events: Vec<KillEvent>,
    /// First time each tracked mutation was reached, sorted by mutation id.
    pub covered_mutations: Vec<MutationCover>,
    /// First time each tracked mutation was reached by a generated input
    /// (not a replayed seed), sorted by mutation id.
    pub generated_covers: Vec<MutationCover>,
    /// Initial corpus followed by every input that added coverage.
    pub corpus_final: Vec<CorpusEntry>,
    /// Set when the campaign stopped because one input reached two or more
    /// grouped mutations.
    pub violation: Option<ViolationEvent>,
    /// Executions where behavior changed although no tracked mutation ran.
    pub harness_defects: Vec<u64>,
    /// Last coverage increase, when the saturation window elapsed after it.
    pub saturated_at: Option<u64>,
}

impl CampaignLog {
    pub fn killed(&self) -> impl Iterator<Item = MutationId> + '_ {
        self.kill_events.iter().map(|k| k.mutation_id)
    }

    pub fn first_cover(&self, m: MutationId) -> Option<u64> {
        self.covered_mutations
            .binary_search_by_key(&m, |c| c.mutation_id)
            .ok()
            .map(|i| self.covered_mutations[i].vtime)
    }

    /// Cumulative coverage size after each coverage-increasing execution.
    pub fn coverage_curve(&self) -> Vec<(u64, usize)> {
        let mut curve: Vec<(u64, usize)> = Vec::new();
        for (i, e) in self.coverage_events.iter().enumerate() {
            match curve.last_mut() {
                Some(last) if last.0 == e.vtime => last.1 = i + 1,
                _ => curve.push((e.vtime, i + 1)),
            }
        }
        curve
    }
}

/// What a campaign runs against and when it may stop.
#[derive(Debug, Clone, Copy)]
pub struct CampaignTarget<'a> {
    /// The program executed on every input: the original, or a mutant.
    pub program: &'a Program,
    /// Mutations applied in `program` whose kills are tracked.
    pub group: &'a [MutationId],
    /// The unmutated program kills are judged against.
    pub baseline: &'a Program,
    /// Stop once this many executions pass without new coverage.
    pub saturation_window: Option<u64>,
    /// Also execute the baseline when no tracked mutation ran, reporting any
    /// behavioral difference as a harness defect.
    pub audit_uncovered: bool,
}

impl<'a> CampaignTarget<'a> {
    /// Fuzz a program with no tracked mutations.
    pub fn coverage(program: &'a Program) -> Self {
        CampaignTarget { program, group: &[], baseline: program, saturation_window: None, audit_uncovered: false }
    }

    pub fn mutant(program: &'a Program, group: &'a [MutationId], baseline: &'a Program) -> Self {
        CampaignTarget { program, group, baseline, saturation_window: None, audit_uncovered: false }
    }
}

/// Runs one fuzzing campaign of at most `budget_execs` executions.
///
/// The initial corpus is replayed first, in order. Afterwards the random
/// fuzzer draws fresh inputs and the greybox fuzzer mutates a uniformly
/// chosen corpus entry, keeping the result iff it reaches a coverage element
/// unseen in this campaign. The campaign ends early once every tracked
/// mutation is killed, when an independence violation is observed, or when
/// the saturation window elapses.
pub fn run_campaign(
    target: &CampaignTarget<'_>,
    config: &FuzzerConfig,
    budget_execs: u64,
    oracle: OracleMode,
) -> Result<CampaignLog, FuzzError> {
    config.validate()?;
    if budget_execs == 0 {
        return Err(FuzzError::InvalidConfig("budget must be positive".into()));
    }
    let program = target.program;
    let n = program.node_count();
    let mut rng = SplitMix64::new(config.rng_seed);
    let mut seen_cov = FixedBitSet::with_capacity(3 * n);
    let mut seen_nodes = FixedBitSet::with_capacity(n);
    let mut group: Vec<MutationId> = target.group.to_vec();
    group.sort_unstable();
    group.dedup();
    let mut alive = group.clone();

    let mut log = CampaignLog {
        executions: 0,
        seed_executions: 0,
        coverage_events: Vec::new(),
        node_events: Vec::new(),
        kill_events: Vec::new(),
        covered_mutations: Vec::new(),
        generated_covers: Vec::new(),
        corpus_final: config.initial_corpus.iter().map(|i| CorpusEntry { vtime: 0, input: i.clone() }).collect(),
        violation: None,
        harness_defects: Vec::new(),
        saturated_at: None,
    };
    let mut corpus: Vec<TestInput> = config.initial_corpus.clone();
    let mut last_new = 0u64;

    while log.executions < budget_execs {
        let seed_idx = log.executions as usize;
        let replaying = seed_idx < config.initial_corpus.len();
        let input = if replaying {
            config.initial_corpus[seed_idx].clone()
        } else {
            match config.kind {
                FuzzerKind::Random => next_input_random(&mut rng, config.max_input_len),
                FuzzerKind::Greybox => {
                    let parent = &corpus[rng.index(corpus.len())];
                    havoc_mutate(parent, &mut rng, config.max_input_len)
                }
            }
        };
        log.executions += 1;
        let vtime = log.executions;
        if replaying {
            log.seed_executions = vtime;
            log.corpus_final[seed_idx].vtime = vtime;
        }

        let result = execute(program, &input, config.fuel_per_exec);

        let mut fresh = false;
        for e in result.coverage.iter() {
            let idx = cov_index(e);
            if !seen_cov.contains(idx) {
                seen_cov.insert(idx);
                log.coverage_events.push(CoverageEvent { vtime, element: e });
                fresh = true;
            }
        }
        for node in result.nodes.iter() {
            if !seen_nodes.contains(node as usize) {
                seen_nodes.insert(node as usize);
                log.node_events.push(NodeEvent { vtime, node });
            }
        }
        for &m in &result.mutations_covered {
            if let Err(pos) = log.covered_mutations.binary_search_by_key(&m, |c| c.mutation_id) {
                log.covered_mutations.insert(pos, MutationCover { mutation_id: m, vtime });
            }
            if !replaying {
                if let Err(pos) = log.generated_covers.binary_search_by_key(&m, |c| c.mutation_id) {
                    log.generated_covers.insert(pos, MutationCover { mutation_id: m, vtime });
                }
            }
        }
        if fresh {
            last_new = vtime;
            if !replaying {
                corpus.push(input.clone());
                log.corpus_final.push(CorpusEntry { vtime, input: input.clone() });
            }
        }

        if !group.is_empty() {
            let reached = result.mutations_covered.iter().any(|m| group.binary_search(m).is_ok());
            if reached || target.audit_uncovered {
                let base = execute(target.baseline, &input, config.fuel_per_exec);
                match adjudicate(&group, &alive, &result, &base, oracle) {
                    Verdict::Killed(m) => {
                        alive.retain(|&a| a != m);
                        let crash_node = match result.outcome {
                            Outcome::Crash { node, .. } => Some(node),
                            _ => None,
                        };
                        log.kill_events.push(KillEvent { vtime, mutation_id: m, input, crash_node });
                    }
                    Verdict::IndependenceViolation(mutations) => {
                        log.violation = Some(ViolationEvent { vtime, mutations, input });
                        break;
                    }
                    Verdict::HarnessDefect => log.harness_defects.push(vtime),
                    Verdict::NoEffect => {}
                }
            }
            if alive.is_empty() {
                break;
            }
        }

        if let Some(window) = target.saturation_window {
            if vtime - last_new >= window {
                log.saturated_at = Some(last_new);
                break;
            }
        }
    }
    Ok(log)
}

fn cov_index(e: CoverageElement) -> usize {
    match e {
        CoverageElement::Stmt(n) => 3 * n as usize,
        CoverageElement::Branch(n, t) => 3 * n as usize + 1 + t as usize,
    }
}
