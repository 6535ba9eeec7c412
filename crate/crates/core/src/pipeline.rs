//! The staged evaluation.
//!
//! 1. Coverage phase: every fuzzer fuzzes the original program until its
//!    coverage saturates or the phase-1 budget runs out.
//! 2. The union of coverage-increasing inputs is minimized by greedy set
//!    cover into the coverage seed.
//! 3. Static pass: each first-order mutant is run on the seed inputs that
//!    reach its node. Mutants killed here are trivial and cost nothing more.
//! 4. Mutation phase: survivors are grouped into supermutants and every
//!    (fuzzer, trial, supermutant) gets one campaign seeded with the
//!    coverage seed. A campaign that observes an independence violation is
//!    discarded, its supermutant is split, and the parts are rerun fresh.
//! 5. Classification into trivial, intelligent, stubborn, live-covered and
//!    uncovered mutants.
//!
//! Every random choice derives from the trial seeds, the fuzzer and the
//! mutation ids involved, never from scheduling order, so `jobs` affects
//! wall time only.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use thiserror::Error;

use crate::fuzzing::{run_campaign, CampaignLog, CampaignTarget, FuzzError, FuzzerConfig, FuzzerKind};
use crate::minilang::{
    execute, kills, CoverageElement, ExecutionResult, MutationId, NodeId, OracleKind, OracleMode, Program, TestInput,
};
use crate::mutation::{
    apply_mutations, enumerate_mutations, sample_mutations, Mutation, MutationError, MutationOperator, SamplingStrategy,
};
use crate::rng::{derive_seed, label};
use crate::supermutant::{
    build_conflict_graph, group_supermutants, lookup, split_on_violation, ConflictGraph, Profile, Supermutant,
    SupermutantError, DEFAULT_MAX_GROUP_SIZE,
};

pub const DEFAULT_PHASE1_BUDGET: u64 = 50_000;
pub const DEFAULT_SATURATION_WINDOW: u64 = 10_000;
pub const DEFAULT_PHASE2_BUDGET: u64 = 20_000;
pub const DEFAULT_TRIALS: usize = 5;
/// Rounds of violation splits before the remaining campaigns are reported
/// as a backlog instead of run.
pub const DEFAULT_MAX_SPLIT_ROUNDS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub fuzzers: Vec<FuzzerConfig>,
    pub oracle: OracleMode,
    pub operators: Vec<MutationOperator>,
    pub mutant_sampling: SamplingStrategy,
    pub phase1_budget: u64,
    pub saturation_window: u64,
    pub phase2_budget: u64,
    pub trials: usize,
    pub trial_seeds: Vec<u64>,
    pub max_group_size: usize,
    pub max_split_rounds: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            fuzzers: vec![FuzzerConfig::new(FuzzerKind::Random, 0), FuzzerConfig::new(FuzzerKind::Greybox, 0)],
            oracle: OracleMode::CRASH,
            operators: MutationOperator::ALL.to_vec(),
            mutant_sampling: SamplingStrategy::All,
            phase1_budget: DEFAULT_PHASE1_BUDGET,
            saturation_window: DEFAULT_SATURATION_WINDOW,
            phase2_budget: DEFAULT_PHASE2_BUDGET,
            trials: DEFAULT_TRIALS,
            trial_seeds: (1..=DEFAULT_TRIALS as u64).collect(),
            max_group_size: DEFAULT_MAX_GROUP_SIZE,
            max_split_rounds: DEFAULT_MAX_SPLIT_ROUNDS,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: &str| Err(PipelineError::InvalidConfig(m.to_string()));
        if self.fuzzers.is_empty() {
            return bad("at least one fuzzer is required");
        }
        for (i, f) in self.fuzzers.iter().enumerate() {
            f.validate()?;
            if self.fuzzers[..i].iter().any(|g| g.kind == f.kind) {
                return Err(PipelineError::InvalidConfig(format!("fuzzer `{}` listed twice", f.kind)));
            }
            if f.fuel_per_exec != self.fuzzers[0].fuel_per_exec || f.max_input_len != self.fuzzers[0].max_input_len {
                return bad("all fuzzers must share fuel_per_exec and max_input_len");
            }
        }
        if self.operators.is_empty() {
            return bad("no mutation operators enabled");
        }
        if self.phase1_budget == 0 || self.phase2_budget == 0 || self.saturation_window == 0 {
            return bad("budgets and the saturation window must be positive");
        }
        if self.trials == 0 {
            return bad("at least one trial is required");
        }
        if self.trial_seeds.len() != self.trials {
            return Err(PipelineError::InvalidConfig(format!(
                "{} trial seeds given for {} trials",
                self.trial_seeds.len(),
                self.trials
            )));
        }
        if self.max_group_size == 0 {
            return bad("max_group_size must be at least 1");
        }
        Ok(())
    }

    /// Replaces the trial seeds with seeds derived from `seed`.
    pub fn with_seed_override(mut self, seed: u64) -> Self {
        self.trial_seeds = (0..self.trials as u64).map(|t| derive_seed(seed, &[t])).collect();
        self
    }

    pub fn fuel(&self) -> u64 {
        self.fuzzers[0].fuel_per_exec
    }

    pub fn fuzzer_names(&self) -> Vec<String> {
        self.fuzzers.iter().map(|f| f.kind.to_string()).collect()
    }

    fn lanes(&self) -> Vec<(usize, usize)> {
        (0..self.fuzzers.len()).flat_map(|f| (0..self.trials).map(move |t| (f, t))).collect()
    }

    fn coverage_seed_for(&self, fuzzer: usize, trial: usize) -> u64 {
        let f = &self.fuzzers[fuzzer];
        derive_seed(self.trial_seeds[trial], &[label(&f.kind.to_string()), f.rng_seed, label("coverage")])
    }

    fn mutation_seed_for(&self, fuzzer: usize, trial: usize, group: &[MutationId]) -> u64 {
        let f = &self.fuzzers[fuzzer];
        let mut labels = vec![label(&f.kind.to_string()), f.rng_seed, label("mutation")];
        labels.extend(group.iter().map(|&m| m as u64));
        derive_seed(self.trial_seeds[trial], &labels)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error("invalid pipeline configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Fuzz(#[from] FuzzError),
    #[error(transparent)]
    Mutation(#[from] MutationError),
    #[error(transparent)]
    Supermutant(#[from] SupermutantError),
}

/// Non-fatal conditions worth surfacing in reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "warning", rename_all = "snake_case")]
pub enum Warning {
    /// Phase 1 produced no input at all.
    EmptyCoverageSeed,
    /// Supermutants were grouped without any profile to separate them.
    UnprofiledGrouping,
    /// Campaigns still pending when the split-round cap was reached.
    BudgetExhaustedWithViolationBacklog { pending: usize },
    /// Executions where behavior changed although no grouped mutation ran.
    HarnessDefects { count: usize },
}

/// One phase-1 input with its behavior on the original program.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusItem {
    pub input: TestInput,
    /// Earliest phase-1 vtime at which any lane ran this input.
    pub vtime: u64,
    pub coverage: Vec<CoverageElement>,
    pub nodes: BTreeSet<NodeId>,
}

impl CorpusItem {
    pub fn profile(program: &Program, input: TestInput, vtime: u64, fuel: u64) -> Self {
        let r = execute(program, &input, fuel);
        CorpusItem { input, vtime, coverage: r.coverage.iter().collect(), nodes: r.nodes.iter().collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageLane {
    pub fuzzer: String,
    pub trial: usize,
    pub log: CampaignLog,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoveragePhase {
    pub lanes: Vec<CoverageLane>,
    /// Union of the lanes' corpora, deduplicated by bytes, ordered by
    /// (vtime, length, bytes).
    pub corpus: Vec<CorpusItem>,
}

impl CoveragePhase {
    pub fn lane(&self, fuzzer: &str, trial: usize) -> Option<&CampaignLog> {
        self.lanes.iter().find(|l| l.fuzzer == fuzzer && l.trial == trial).map(|l| &l.log)
    }

    pub fn covered(&self) -> BTreeSet<CoverageElement> {
        self.corpus.iter().flat_map(|c| c.coverage.iter().copied()).collect()
    }
}

/// Fuzzes the original program with every (fuzzer, trial) until the
/// coverage saturates or `phase1_budget` runs out.
pub fn run_coverage_phase(program: &Program, config: &PipelineConfig) -> Result<CoveragePhase, PipelineError> {
    config.validate()?;
    let names = config.fuzzer_names();
    let lanes: Vec<CoverageLane> = config
        .lanes()
        .into_par_iter()
        .map(|(f, t)| {
            let mut fc = config.fuzzers[f].clone();
            fc.rng_seed = config.coverage_seed_for(f, t);
            let mut target = CampaignTarget::coverage(program);
            target.saturation_window = Some(config.saturation_window);
            let log = run_campaign(&target, &fc, config.phase1_budget, config.oracle)?;
            Ok(CoverageLane { fuzzer: names[f].clone(), trial: t, log })
        })
        .collect::<Result<_, FuzzError>>()?;

    let mut earliest: HashMap<&TestInput, u64> = HashMap::new();
    for lane in &lanes {
        for e in lane.log.corpus_final.iter().filter(|e| e.vtime > 0) {
            let v = earliest.entry(&e.input).or_insert(e.vtime);
            *v = (*v).min(e.vtime);
        }
    }
    let mut inputs: Vec<(u64, &TestInput)> = earliest.into_iter().map(|(i, v)| (v, i)).collect();
    inputs.sort_by(|a, b| (a.0, a.1.len(), a.1.bytes()).cmp(&(b.0, b.1.len(), b.1.bytes())));
    let corpus = inputs
        .into_par_iter()
        .map(|(v, i)| CorpusItem::profile(program, i.clone(), v, config.fuel()))
        .collect();
    Ok(CoveragePhase { lanes, corpus })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageSeed {
    pub inputs: Vec<TestInput>,
    pub covered: BTreeSet<CoverageElement>,
    /// Nodes each seed input evaluates on the original, parallel to `inputs`.
    pub profiles: Vec<Profile>,
}

impl CoverageSeed {
    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }
}

/// Greedy set cover: repeatedly takes the item adding the most uncovered
/// elements, preferring the earliest vtime, then the shorter input, then
/// the smaller bytes.
pub fn minimize_corpus(corpus: &[CorpusItem]) -> CoverageSeed {
    let covered: BTreeSet<CoverageElement> = corpus.iter().flat_map(|c| c.coverage.iter().copied()).collect();
    let mut uncovered = covered.clone();
    let mut remaining: Vec<&CorpusItem> = corpus.iter().collect();
    let mut seed = CoverageSeed { inputs: Vec::new(), covered, profiles: Vec::new() };
    while !uncovered.is_empty() {
        let gain = |c: &CorpusItem| c.coverage.iter().filter(|e| uncovered.contains(e)).count();
        let (pos, best) = remaining
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                (std::cmp::Reverse(gain(a)), a.vtime, a.input.len(), a.input.bytes()).cmp(&(
                    std::cmp::Reverse(gain(b)),
                    b.vtime,
                    b.input.len(),
                    b.input.bytes(),
                ))
            })
            .map(|(i, c)| (i, *c))
            .expect("uncovered elements come from some item");
        for e in &best.coverage {
            uncovered.remove(e);
        }
        seed.inputs.push(best.input.clone());
        seed.profiles.push(Profile { input: best.input.clone(), nodes: best.nodes.clone() });
        remaining.swap_remove(pos);
    }
    seed
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaticKill {
    /// Index into the coverage seed.
    pub seed_index: usize,
    pub input: TestInput,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaticPass {
    pub killed: BTreeMap<MutationId, StaticKill>,
    pub survivors: Vec<MutationId>,
    /// Mutations whose node some seed input reaches.
    pub covered: BTreeSet<MutationId>,
    /// Seed executions spent per mutation.
    pub executions: BTreeMap<MutationId, u64>,
}

/// Runs each first-order mutant on the seed inputs that reach its node and
/// stops at the first kill.
pub fn static_kill_pass(
    program: &Program,
    mutations: &[Mutation],
    seed: &CoverageSeed,
    oracle: OracleMode,
    fuel: u64,
) -> Result<StaticPass, PipelineError> {
    let originals: Vec<ExecutionResult> = seed.inputs.par_iter().map(|i| execute(program, i, fuel)).collect();
    let rows: Vec<(MutationId, Option<StaticKill>, u64)> = mutations
        .par_iter()
        .map(|m| {
            let mutant = apply_mutations(program, std::slice::from_ref(m))?;
            let mut spent = 0;
            for (i, p) in seed.profiles.iter().enumerate() {
                if !p.nodes.contains(&m.node_id) {
                    continue;
                }
                spent += 1;
                let r = execute(&mutant.program, &seed.inputs[i], fuel);
                if kills(&originals[i], &r, oracle) {
                    return Ok((m.mutation_id, Some(StaticKill { seed_index: i, input: seed.inputs[i].clone() }), spent));
                }
            }
            Ok((m.mutation_id, None, spent))
        })
        .collect::<Result<_, MutationError>>()?;

    let mut pass = StaticPass::default();
    for (m, kill, spent) in rows {
        if spent > 0 {
            pass.covered.insert(m);
        }
        pass.executions.insert(m, spent);
        match kill {
            Some(k) => {
                pass.killed.insert(m, k);
            }
            None => pass.survivors.push(m),
        }
    }
    Ok(pass)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupermutantPlan {
    pub id: String,
    pub group: Vec<MutationId>,
}

/// Groups `survivors` using the seed profiles; ids are `sm000`, `sm001`, ….
pub fn plan_supermutants(
    program: &Program,
    table: &[Mutation],
    survivors: &[MutationId],
    seed: &CoverageSeed,
    max_group_size: usize,
) -> Result<(ConflictGraph, Vec<SupermutantPlan>), PipelineError> {
    let live = lookup(table, survivors)?;
    let graph = build_conflict_graph(program, &live, &seed.profiles);
    let plans = group_supermutants(&graph, max_group_size)
        .into_iter()
        .enumerate()
        .map(|(i, group)| SupermutantPlan { id: format!("sm{i:03}"), group })
        .collect();
    Ok((graph, plans))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignRecord {
    pub fuzzer: String,
    pub trial: usize,
    pub supermutant: String,
    pub group: Vec<MutationId>,
    pub rng_seed: u64,
    pub log: CampaignLog,
}

impl CampaignRecord {
    /// A campaign that hit an independence violation; its results are not
    /// attributed and its supermutant was split and rerun.
    pub fn aborted(&self) -> bool {
        self.log.violation.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationPhase {
    /// In scheduling order: initial supermutants by lane, then each round
    /// of split parts.
    pub campaigns: Vec<CampaignRecord>,
    /// Campaigns never run because the split-round cap was reached.
    pub backlog: Vec<(String, usize, SupermutantPlan)>,
}

impl MutationPhase {
    pub fn completed(&self) -> impl Iterator<Item = &CampaignRecord> {
        self.campaigns.iter().filter(|c| !c.aborted())
    }

    pub fn lane<'a>(&'a self, fuzzer: &'a str, trial: usize) -> impl Iterator<Item = &'a CampaignRecord> + 'a {
        self.completed().filter(move |c| c.fuzzer == fuzzer && c.trial == trial)
    }
}

struct Task {
    fuzzer: usize,
    trial: usize,
    plan: SupermutantPlan,
}

/// One campaign per (fuzzer, trial, supermutant), splitting and rerunning on
/// independence violations. Campaigns of a round run in parallel on the
/// current rayon pool; their results are applied in a fixed order.
pub fn run_mutation_phase(
    program: &Program,
    table: &[Mutation],
    plans: &[SupermutantPlan],
    graph: &ConflictGraph,
    seed: &CoverageSeed,
    config: &PipelineConfig,
) -> Result<MutationPhase, PipelineError> {
    config.validate()?;
    let names = config.fuzzer_names();
    let corpus = if seed.is_empty() { vec![TestInput::default()] } else { seed.inputs.clone() };
    let mut graphs: Vec<ConflictGraph> = config.lanes().iter().map(|_| graph.clone()).collect();
    let lane_index = |f: usize, t: usize| f * config.trials + t;

    let mut pending: Vec<Task> = config
        .lanes()
        .into_iter()
        .flat_map(|(f, t)| plans.iter().map(move |p| Task { fuzzer: f, trial: t, plan: p.clone() }))
        .collect();
    let mut phase = MutationPhase { campaigns: Vec::new(), backlog: Vec::new() };
    let mut round = 0;
    while !pending.is_empty() {
        if round > config.max_split_rounds {
            phase.backlog = pending.into_iter().map(|t| (names[t.fuzzer].clone(), t.trial, t.plan)).collect();
            break;
        }
        let done: Vec<(Supermutant, CampaignRecord)> = pending
            .par_iter()
            .map(|task| {
                let sm = Supermutant::build(task.plan.id.clone(), program, table, &task.plan.group)?;
                let mut fc = config.fuzzers[task.fuzzer].clone();
                fc.rng_seed = config.mutation_seed_for(task.fuzzer, task.trial, &sm.group);
                fc.initial_corpus = corpus.clone();
                let target = CampaignTarget::mutant(&sm.mutant.program, &sm.group, program);
                let log = run_campaign(&target, &fc, config.phase2_budget, config.oracle)?;
                let record = CampaignRecord {
                    fuzzer: names[task.fuzzer].clone(),
                    trial: task.trial,
                    supermutant: sm.id.clone(),
                    group: sm.group.clone(),
                    rng_seed: fc.rng_seed,
                    log,
                };
                Ok((sm, record))
            })
            .collect::<Result<_, PipelineError>>()?;

        let mut next = Vec::new();
        for ((sm, record), task) in done.into_iter().zip(&pending) {
            if let Some(v) = &record.log.violation {
                let g = &mut graphs[lane_index(task.fuzzer, task.trial)];
                for part in split_on_violation(&sm, &v.mutations, program, table, g)? {
                    next.push(Task {
                        fuzzer: task.fuzzer,
                        trial: task.trial,
                        plan: SupermutantPlan { id: part.id, group: part.group },
                    });
                }
            }
            phase.campaigns.push(record);
        }
        pending = next;
        round += 1;
    }
    Ok(phase)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutantClass {
    /// Killed by the static pass over the coverage seed.
    Trivial,
    /// Killed during a mutation-phase campaign.
    Intelligent,
    /// Reached by a fuzzer-generated input in the mutation phase, never killed.
    Stubborn,
    /// Reached only by replaying seed inputs, never killed.
    LiveCovered,
    Uncovered,
}

impl MutantClass {
    pub const ALL: [MutantClass; 5] =
        [MutantClass::Trivial, MutantClass::Intelligent, MutantClass::Stubborn, MutantClass::LiveCovered, MutantClass::Uncovered];

    pub fn name(self) -> &'static str {
        match self {
            MutantClass::Trivial => "trivial",
            MutantClass::Intelligent => "intelligent",
            MutantClass::Stubborn => "stubborn",
            MutantClass::LiveCovered => "live-covered",
            MutantClass::Uncovered => "uncovered",
        }
    }
}

impl fmt::Display for MutantClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Extra label for covered mutations no campaign killed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutantFlag {
    /// The differential oracle distinguishes it on the final static suite.
    CandidateImmortal,
    /// Nothing in the final static suite distinguishes it.
    CandidateEquivalent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KillRecord {
    pub fuzzer: String,
    pub trial: usize,
    pub vtime: u64,
    pub input: TestInput,
    pub crash_node: Option<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutantVerdict {
    pub mutation_id: MutationId,
    pub class: MutantClass,
    pub flag: Option<MutantFlag>,
    pub static_kill: Option<TestInput>,
    pub killed_by: Vec<KillRecord>,
    /// Mutation-phase first-cover vtime per fuzzer, indexed by trial.
    pub first_covered: BTreeMap<String, Vec<Option<u64>>>,
}

/// Coverage seed followed by every kill input, deduplicated by bytes.
pub fn final_suite(seed: &CoverageSeed, phase: &MutationPhase) -> Vec<TestInput> {
    let mut seen: BTreeSet<&TestInput> = BTreeSet::new();
    let mut suite = Vec::new();
    let kill_inputs = phase.completed().flat_map(|c| c.log.kill_events.iter().map(|k| &k.input));
    for i in seed.inputs.iter().chain(kill_inputs) {
        if seen.insert(i) {
            suite.push(i.clone());
        }
    }
    suite
}

/// Assigns each mutation in `table` exactly one class and flags covered
/// survivors by replaying the final static suite under the differential
/// oracle.
pub fn classify(
    program: &Program,
    table: &[Mutation],
    static_pass: &StaticPass,
    phase: &MutationPhase,
    seed: &CoverageSeed,
    config: &PipelineConfig,
) -> Result<Vec<MutantVerdict>, PipelineError> {
    let names = config.fuzzer_names();
    let mut verdicts: BTreeMap<MutationId, MutantVerdict> = table
        .iter()
        .map(|m| {
            let first_covered = names.iter().map(|n| (n.clone(), vec![None; config.trials])).collect();
            let v = MutantVerdict {
                mutation_id: m.mutation_id,
                class: MutantClass::Uncovered,
                flag: None,
                static_kill: static_pass.killed.get(&m.mutation_id).map(|k| k.input.clone()),
                killed_by: Vec::new(),
                first_covered,
            };
            (m.mutation_id, v)
        })
        .collect();

    let mut fuzzed: BTreeSet<MutationId> = BTreeSet::new();
    let mut replayed: BTreeSet<MutationId> = static_pass.covered.clone();
    for c in phase.completed() {
        for cov in &c.log.covered_mutations {
            let v = verdicts.get_mut(&cov.mutation_id).expect("campaign mutations come from the table");
            v.first_covered.get_mut(&c.fuzzer).expect("known fuzzer")[c.trial] = Some(cov.vtime);
            replayed.insert(cov.mutation_id);
        }
        fuzzed.extend(c.log.generated_covers.iter().map(|g| g.mutation_id));
        for k in &c.log.kill_events {
            verdicts.get_mut(&k.mutation_id).expect("known mutation").killed_by.push(KillRecord {
                fuzzer: c.fuzzer.clone(),
                trial: c.trial,
                vtime: k.vtime,
                input: k.input.clone(),
                crash_node: k.crash_node,
            });
        }
    }

    for v in verdicts.values_mut() {
        let m = v.mutation_id;
        v.class = if static_pass.killed.contains_key(&m) {
            MutantClass::Trivial
        } else if !v.killed_by.is_empty() {
            MutantClass::Intelligent
        } else if fuzzed.contains(&m) {
            MutantClass::Stubborn
        } else if replayed.contains(&m) {
            MutantClass::LiveCovered
        } else {
            MutantClass::Uncovered
        };
        v.killed_by.sort_by(|a, b| (names.iter().position(|n| *n == a.fuzzer), a.trial, a.vtime).cmp(&(
            names.iter().position(|n| *n == b.fuzzer),
            b.trial,
            b.vtime,
        )));
    }

    let suspects: Vec<MutationId> = verdicts
        .values()
        .filter(|v| matches!(v.class, MutantClass::Stubborn | MutantClass::LiveCovered))
        .map(|v| v.mutation_id)
        .collect();
    let suite = final_suite(seed, phase);
    let fuel = config.fuel();
    let originals: Vec<ExecutionResult> = suite.par_iter().map(|i| execute(program, i, fuel)).collect();
    let diff = OracleMode { kind: OracleKind::Differential, hangs_are_kills: config.oracle.hangs_are_kills };
    let flags: Vec<(MutationId, MutantFlag)> = lookup(table, &suspects)?
        .par_iter()
        .map(|m| {
            let mutant = apply_mutations(program, std::slice::from_ref(m))?;
            let distinguished = suite.iter().zip(&originals).any(|(i, o)| {
                o.nodes.contains(m.node_id) && kills(o, &execute(&mutant.program, i, fuel), diff)
            });
            let flag = if distinguished { MutantFlag::CandidateImmortal } else { MutantFlag::CandidateEquivalent };
            Ok((m.mutation_id, flag))
        })
        .collect::<Result<_, MutationError>>()?;
    for (m, f) in flags {
        verdicts.get_mut(&m).expect("known mutation").flag = Some(f);
    }
    Ok(verdicts.into_values().collect())
}

/// Everything one pipeline run produces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineRun {
    pub mutations: Vec<Mutation>,
    pub coverage: CoveragePhase,
    pub seed: CoverageSeed,
    pub static_pass: StaticPass,
    pub graph: ConflictGraph,
    pub supermutants: Vec<SupermutantPlan>,
    pub mutation_phase: MutationPhase,
    pub verdicts: Vec<MutantVerdict>,
    pub warnings: Vec<Warning>,
}

impl PipelineRun {
    pub fn verdict(&self, m: MutationId) -> Option<&MutantVerdict> {
        self.verdicts.binary_search_by_key(&m, |v| v.mutation_id).ok().map(|i| &self.verdicts[i])
    }

    pub fn class_counts(&self) -> BTreeMap<MutantClass, usize> {
        class_counts(&self.verdicts)
    }

    pub fn final_suite(&self) -> Vec<TestInput> {
        final_suite(&self.seed, &self.mutation_phase)
    }

    /// The `verdicts.json` document.
    pub fn verdicts_document(&self) -> VerdictsDocument {
        VerdictsDocument {
            total: self.verdicts.len(),
            counts: self.class_counts().into_iter().map(|(c, n)| (c.name().to_string(), n)).collect(),
            warnings: self.warnings.clone(),
            mutations: self.verdicts.clone(),
        }
    }
}

pub fn class_counts(verdicts: &[MutantVerdict]) -> BTreeMap<MutantClass, usize> {
    let mut counts: BTreeMap<MutantClass, usize> = MutantClass::ALL.iter().map(|&c| (c, 0)).collect();
    for v in verdicts {
        *counts.get_mut(&v.class).unwrap() += 1;
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictsDocument {
    pub total: usize,
    pub counts: BTreeMap<String, usize>,
    pub warnings: Vec<Warning>,
    pub mutations: Vec<MutantVerdict>,
}

/// The state after phase 1, the static pass and grouping: everything the
/// mutation phase needs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prepared {
    pub mutations: Vec<Mutation>,
    pub coverage: CoveragePhase,
    pub seed: CoverageSeed,
    pub static_pass: StaticPass,
    pub graph: ConflictGraph,
    pub supermutants: Vec<SupermutantPlan>,
}

/// Enumerates and samples the mutations `config` asks for.
pub fn generate_mutations(program: &Program, config: &PipelineConfig) -> Result<Vec<Mutation>, PipelineError> {
    let all = enumerate_mutations(program, &config.operators);
    Ok(sample_mutations(&all, &config.mutant_sampling)?)
}

/// Phase 1, minimization, the static pass and grouping.
pub fn prepare(program: &Program, mutations: Vec<Mutation>, config: &PipelineConfig) -> Result<Prepared, PipelineError> {
    config.validate()?;
    let coverage = run_coverage_phase(program, config)?;
    let seed = minimize_corpus(&coverage.corpus);
    let static_pass = static_kill_pass(program, &mutations, &seed, config.oracle, config.fuel())?;
    let (graph, supermutants) =
        plan_supermutants(program, &mutations, &static_pass.survivors, &seed, config.max_group_size)?;
    Ok(Prepared { mutations, coverage, seed, static_pass, graph, supermutants })
}

/// The mutation phase and classification on top of [`prepare`].
pub fn finish(program: &Program, prepared: Prepared, config: &PipelineConfig) -> Result<PipelineRun, PipelineError> {
    let Prepared { mutations, coverage, seed, static_pass, graph, supermutants } = prepared;
    let mutation_phase = run_mutation_phase(program, &mutations, &supermutants, &graph, &seed, config)?;
    let verdicts = classify(program, &mutations, &static_pass, &mutation_phase, &seed, config)?;

    let mut warnings = Vec::new();
    if seed.is_empty() {
        warnings.push(Warning::EmptyCoverageSeed);
    }
    if !graph.profiled && graph.vertex_count() > 1 {
        warnings.push(Warning::UnprofiledGrouping);
    }
    if !mutation_phase.backlog.is_empty() {
        warnings.push(Warning::BudgetExhaustedWithViolationBacklog { pending: mutation_phase.backlog.len() });
    }
    let defects: usize = mutation_phase.completed().map(|c| c.log.harness_defects.len()).sum();
    if defects > 0 {
        warnings.push(Warning::HarnessDefects { count: defects });
    }
    Ok(PipelineRun { mutations, coverage, seed, static_pass, graph, supermutants, mutation_phase, verdicts, warnings })
}

/// Runs the whole pipeline on a pool of `jobs` threads.
pub fn run_pipeline(program: &Program, config: &PipelineConfig, jobs: usize) -> Result<PipelineRun, PipelineError> {
    with_jobs(jobs, || {
        let mutations = generate_mutations(program, config)?;
        let prepared = prepare(program, mutations, config)?;
        finish(program, prepared, config)
    })
}

/// Runs `f` on a dedicated rayon pool of `jobs` threads (at least one).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool")
        .install(f)
}
