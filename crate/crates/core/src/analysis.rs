//! Post-hoc analytics over a finished pipeline run: the kill matrix of the
//! final static suite, subsumption (duplicates, redundancy, dominators),
//! Chao1 richness and residual risk, kill-time curves and fuzzer ranking.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use thiserror::Error;

use crate::minilang::{execute, kills, ExecutionResult, MutationId, OracleMode, Program, TestInput};
use crate::mutation::{apply_mutations, Mutation, MutationError};
use crate::pipeline::{MutantClass, MutantFlag, PipelineRun};
use crate::rng::SplitMix64;

pub const BOOTSTRAP_RESAMPLES: usize = 10_000;
pub const BOOTSTRAP_SEED: u64 = 0xB007_5712_A9E5_EED5;
/// Live mutants listed for manual killability audit.
pub const AUDIT_SAMPLE_SIZE: usize = 10;
const AUDIT_SEED: u64 = 0xA0D1_7000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("fuzzer ranking needs at least two trials, got {0}")]
    InsufficientTrials(usize),
    #[error(transparent)]
    Mutation(#[from] MutationError),
}

/// Mutants × tests kill table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KillMatrix {
    pub mutants: Vec<MutationId>,
    pub tests: Vec<TestInput>,
    cells: Vec<Vec<bool>>,
}

impl KillMatrix {
    /// `rows[i][j]` is the cell for `mutants[i]` and `tests[j]`.
    pub fn from_rows(mutants: Vec<MutationId>, tests: Vec<TestInput>, rows: Vec<Vec<bool>>) -> Self {
        assert_eq!(mutants.len(), rows.len(), "one row per mutant");
        assert!(rows.iter().all(|r| r.len() == tests.len()), "one cell per test");
        KillMatrix { mutants, tests, cells: rows }
    }

    pub fn get(&self, row: usize, test: usize) -> bool {
        self.cells[row][test]
    }

    pub fn row_of(&self, m: MutationId) -> Option<usize> {
        self.mutants.iter().position(|&x| x == m)
    }

    /// K(m) as test indices.
    pub fn kill_set(&self, row: usize) -> BTreeSet<usize> {
        self.cells[row].iter().enumerate().filter(|(_, &c)| c).map(|(j, _)| j).collect()
    }

    pub fn killable(&self) -> impl Iterator<Item = MutationId> + '_ {
        self.mutants.iter().zip(&self.cells).filter(|(_, r)| r.contains(&true)).map(|(&m, _)| m)
    }

    /// A copy with `row` repeated under `new_id`.
    pub fn with_duplicate_row(&self, row: usize, new_id: MutationId) -> KillMatrix {
        let mut m = self.clone();
        m.mutants.push(new_id);
        m.cells.push(self.cells[row].clone());
        m
    }

    /// Keeps only the rows whose mutation satisfies `keep`.
    pub fn restrict(&self, keep: impl Fn(MutationId) -> bool) -> KillMatrix {
        let (mutants, cells) =
            self.mutants.iter().zip(&self.cells).filter(|(&m, _)| keep(m)).map(|(&m, r)| (m, r.clone())).unzip();
        KillMatrix { mutants, tests: self.tests.clone(), cells }
    }

    /// `mutation_id,t0,t1,…` then one 0/1 row per mutant.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("mutation_id");
        for j in 0..self.tests.len() {
            write!(out, ",t{j}").unwrap();
        }
        out.push('\n');
        for (m, row) in self.mutants.iter().zip(&self.cells) {
            write!(out, "{m}").unwrap();
            for &c in row {
                out.push_str(if c { ",1" } else { ",0" });
            }
            out.push('\n');
        }
        out
    }
}

/// Replays `suite` against every first-order mutant. Cells whose test does
/// not reach the mutated node on the original are false without execution.
pub fn build_kill_matrix(
    program: &Program,
    mutations: &[Mutation],
    suite: &[TestInput],
    oracle: OracleMode,
    fuel: u64,
) -> Result<KillMatrix, AnalysisError> {
    let originals: Vec<ExecutionResult> = suite.par_iter().map(|t| execute(program, t, fuel)).collect();
    let rows = mutations
        .par_iter()
        .map(|m| {
            let mutant = apply_mutations(program, std::slice::from_ref(m))?;
            Ok(suite
                .iter()
                .zip(&originals)
                .map(|(t, o)| o.nodes.contains(m.node_id) && kills(o, &execute(&mutant.program, t, fuel), oracle))
                .collect())
        })
        .collect::<Result<Vec<Vec<bool>>, MutationError>>()?;
    Ok(KillMatrix::from_rows(mutations.iter().map(|m| m.mutation_id).collect(), suite.to_vec(), rows))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimalSet {
    pub dominators: Vec<MutationId>,
    /// Classes of two or more mutants with equal non-empty kill sets.
    pub duplicate_groups: Vec<Vec<MutationId>>,
    /// `(a, b)` with K(b) ⊆ K(a): every test killing b kills a.
    pub redundant_pairs: Vec<(MutationId, MutationId)>,
}

pub fn minimal_mutant_set(matrix: &KillMatrix) -> MinimalSet {
    let mut classes: BTreeMap<BTreeSet<usize>, Vec<MutationId>> = BTreeMap::new();
    let mut rows: Vec<(MutationId, BTreeSet<usize>)> = Vec::new();
    for (i, &m) in matrix.mutants.iter().enumerate() {
        let k = matrix.kill_set(i);
        if !k.is_empty() {
            classes.entry(k.clone()).or_default().push(m);
            rows.push((m, k));
        }
    }
    let mut out = MinimalSet::default();
    for (a, ka) in &rows {
        for (b, kb) in &rows {
            if a != b && kb.is_subset(ka) {
                out.redundant_pairs.push((*a, *b));
            }
        }
    }
    out.redundant_pairs.sort_unstable();
    for (k, members) in &classes {
        let mut members = members.clone();
        members.sort_unstable();
        let minimal = classes.keys().all(|other| !(other.len() < k.len() && other.is_subset(k)));
        if minimal {
            out.dominators.push(members[0]);
        }
        if members.len() >= 2 {
            out.duplicate_groups.push(members);
        }
    }
    out.dominators.sort_unstable();
    out.duplicate_groups.sort();
    out
}

/// Bias-corrected Chao1 over kill abundances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chao1 {
    pub estimate: f64,
    pub s_obs: usize,
    pub f1: usize,
    pub f2: usize,
}

/// Ŝ = S_obs + f1(f1−1) / (2(f2+1)); zero abundances are ignored.
pub fn chao1_from_abundances(abundances: &[usize]) -> Chao1 {
    let s_obs = abundances.iter().filter(|&&a| a > 0).count();
    let f1 = abundances.iter().filter(|&&a| a == 1).count();
    let f2 = abundances.iter().filter(|&&a| a == 2).count();
    let estimate = if s_obs == 0 {
        0.0
    } else {
        s_obs as f64 + (f1 * f1.saturating_sub(1)) as f64 / (2 * (f2 + 1)) as f64
    };
    Chao1 { estimate, s_obs, f1, f2 }
}

pub fn chao1_estimate(matrix: &KillMatrix) -> Chao1 {
    let abundances: Vec<usize> = (0..matrix.mutants.len()).map(|i| matrix.kill_set(i).len()).collect();
    chao1_from_abundances(&abundances)
}

/// max(0, Ŝ − killed).
pub fn residual_risk(chao1: &Chao1, killed: usize) -> f64 {
    (chao1.estimate - killed as f64).max(0.0)
}

/// When a fuzzer's trial detected a mutant, in phase-1 plus phase-2 time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KillTime {
    pub fuzzer: String,
    pub trial: usize,
    pub mutation_id: MutationId,
    pub class: MutantClass,
    /// Phase-1 first cover of the node, else the phase-2 first cover of the
    /// mutation.
    pub first_cover: u64,
    /// Phase-2 vtime of the kill; zero for trivial mutants.
    pub kill_vtime: u64,
    pub vtime: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissingCoverageTime {
    pub fuzzer: String,
    pub trial: usize,
    pub mutation_id: MutationId,
}

/// Per-(fuzzer, trial) detection times. Trivial mutants count when the
/// lane's phase 1 covered their node; intelligent ones when the lane's
/// campaign killed them.
pub fn kill_times(run: &PipelineRun) -> (Vec<KillTime>, Vec<MissingCoverageTime>) {
    let node_of: BTreeMap<MutationId, u32> = run.mutations.iter().map(|m| (m.mutation_id, m.node_id)).collect();
    let mut times = Vec::new();
    let mut missing = Vec::new();
    for lane in &run.coverage.lanes {
        let node_cover: BTreeMap<u32, u64> = lane.log.node_events.iter().map(|e| (e.node, e.vtime)).collect();
        for &m in run.static_pass.killed.keys() {
            match node_cover.get(&node_of[&m]) {
                Some(&t) => times.push(KillTime {
                    fuzzer: lane.fuzzer.clone(),
                    trial: lane.trial,
                    mutation_id: m,
                    class: MutantClass::Trivial,
                    first_cover: t,
                    kill_vtime: 0,
                    vtime: t,
                }),
                None => missing.push(MissingCoverageTime { fuzzer: lane.fuzzer.clone(), trial: lane.trial, mutation_id: m }),
            }
        }
        for c in run.mutation_phase.lane(&lane.fuzzer, lane.trial) {
            for k in &c.log.kill_events {
                let first_cover = node_cover
                    .get(&node_of[&k.mutation_id])
                    .copied()
                    .or_else(|| c.log.first_cover(k.mutation_id))
                    .expect("a killed mutation was covered");
                times.push(KillTime {
                    fuzzer: lane.fuzzer.clone(),
                    trial: lane.trial,
                    mutation_id: k.mutation_id,
                    class: MutantClass::Intelligent,
                    first_cover,
                    kill_vtime: k.vtime,
                    vtime: first_cover + k.vtime,
                });
            }
        }
    }
    (times, missing)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub fuzzer: String,
    pub trial: usize,
    pub vtime: u64,
    pub kills: usize,
}

/// Cumulative kills per (fuzzer, trial), one point per distinct vtime,
/// sorted by (fuzzer, trial, vtime).
pub fn kill_curve(times: &[KillTime]) -> Vec<CurvePoint> {
    let mut by_lane: BTreeMap<(&str, usize), BTreeMap<u64, usize>> = BTreeMap::new();
    for t in times {
        *by_lane.entry((&t.fuzzer, t.trial)).or_default().entry(t.vtime).or_default() += 1;
    }
    let mut points = Vec::new();
    for ((fuzzer, trial), steps) in by_lane {
        let mut total = 0;
        for (vtime, n) in steps {
            total += n;
            points.push(CurvePoint { fuzzer: fuzzer.to_string(), trial, vtime, kills: total });
        }
    }
    points
}

pub fn curves_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("fuzzer,trial,vtime,kills\n");
    for p in points {
        writeln!(out, "{},{},{},{}", p.fuzzer, p.trial, p.vtime, p.kills).unwrap();
    }
    out
}

/// Per-vtime median of the cumulative kill counts over `trials` trials of
/// one fuzzer; a trial without points counts as zero.
pub fn median_curve(points: &[CurvePoint], fuzzer: &str, trials: usize) -> Vec<(u64, f64)> {
    let mine: Vec<&CurvePoint> = points.iter().filter(|p| p.fuzzer == fuzzer).collect();
    let vtimes: BTreeSet<u64> = mine.iter().map(|p| p.vtime).collect();
    vtimes
        .into_iter()
        .map(|v| {
            let mut at: Vec<f64> = (0..trials)
                .map(|t| {
                    mine.iter().filter(|p| p.trial == t && p.vtime <= v).map(|p| p.kills).max().unwrap_or(0) as f64
                })
                .collect();
            (v, median(&mut at))
        })
        .collect()
}

/// Median of `values`; the mean of the middle pair for even lengths.
pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of nothing");
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Percentile bootstrap interval of the median. The values are sorted
/// first, so the result does not depend on trial order.
pub fn bootstrap_median_interval(values: &[f64], resamples: usize, seed: u64) -> (f64, f64) {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut rng = SplitMix64::new(seed);
    let mut buf = vec![0.0; sorted.len()];
    let mut medians: Vec<f64> = (0..resamples)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = sorted[rng.index(sorted.len())];
            }
            median(&mut buf)
        })
        .collect();
    medians.sort_by(f64::total_cmp);
    let lo = (resamples as f64 * 0.025).floor() as usize;
    let hi = ((resamples as f64 * 0.975).ceil() as usize).saturating_sub(1);
    (medians[lo], medians[hi.min(resamples - 1)])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzerSummary {
    pub fuzzer: String,
    pub per_trial: Vec<usize>,
    pub median: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    /// Best first.
    pub summaries: Vec<FuzzerSummary>,
    /// Pairs whose intervals overlap.
    pub ties: Vec<(String, String)>,
}

impl Ranking {
    pub fn summary(&self, fuzzer: &str) -> Option<&FuzzerSummary> {
        self.summaries.iter().find(|s| s.fuzzer == fuzzer)
    }

    pub fn tied(&self, a: &str, b: &str) -> bool {
        self.ties.iter().any(|(x, y)| (x == a && y == b) || (x == b && y == a))
    }
}

/// Ranks fuzzers by their median per-trial kill count, with bootstrap 95%
/// intervals; overlapping intervals are statistical ties.
pub fn compare_fuzzers(per_trial: &[(String, Vec<usize>)]) -> Result<Ranking, AnalysisError> {
    if let Some((_, v)) = per_trial.iter().find(|(_, v)| v.len() < 2) {
        return Err(AnalysisError::InsufficientTrials(v.len()));
    }
    let mut summaries: Vec<FuzzerSummary> = per_trial
        .iter()
        .map(|(name, kills)| {
            let mut vals: Vec<f64> = kills.iter().map(|&k| k as f64).collect();
            let (ci_low, ci_high) = bootstrap_median_interval(&vals, BOOTSTRAP_RESAMPLES, BOOTSTRAP_SEED);
            FuzzerSummary { fuzzer: name.clone(), per_trial: kills.clone(), median: median(&mut vals), ci_low, ci_high }
        })
        .collect();
    summaries.sort_by(|a, b| {
        b.median.total_cmp(&a.median).then(b.ci_low.total_cmp(&a.ci_low)).then(a.fuzzer.cmp(&b.fuzzer))
    });
    let mut ties = Vec::new();
    for (i, a) in summaries.iter().enumerate() {
        for b in &summaries[i + 1..] {
            if a.ci_low <= b.ci_high && b.ci_low <= a.ci_high {
                ties.push((a.fuzzer.clone(), b.fuzzer.clone()));
            }
        }
    }
    Ok(Ranking { summaries, ties })
}

/// Dominators killed over dominators; zero when nothing is killable.
pub fn minimal_set_score(matrix: &KillMatrix, killed: &BTreeSet<MutationId>) -> f64 {
    let dominators = minimal_mutant_set(matrix).dominators;
    if dominators.is_empty() {
        return 0.0;
    }
    dominators.iter().filter(|d| killed.contains(d)).count() as f64 / dominators.len() as f64
}

pub fn raw_score(total: usize, killed: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        killed as f64 / total as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzerScore {
    pub fuzzer: String,
    /// Mutants detected by any trial of this fuzzer, trivial ones included.
    pub killed: usize,
    pub live: usize,
    pub residual_risk: f64,
    /// Intelligent kills per trial.
    pub trivial_excluded_kills: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub total: usize,
    pub class_counts: BTreeMap<String, usize>,
    pub killed: usize,
    pub live: usize,
    pub raw_score: f64,
    pub trivial_excluded_score: f64,
    /// Over the minimal set of all mutants.
    pub minimal_set_score: f64,
    /// Over the minimal set of non-trivial mutants: the headline number.
    pub headline_score: f64,
    pub dominators: Vec<MutationId>,
    pub duplicate_groups: usize,
    pub redundant_pairs: usize,
    pub chao1: Chao1,
    pub residual_risk: f64,
    pub per_fuzzer: Vec<FuzzerScore>,
    pub ranking: Option<Ranking>,
    pub candidate_equivalent: Vec<MutationId>,
    pub candidate_immortal: Vec<MutationId>,
    /// Live mutants sampled with a fixed seed for manual audit.
    pub audit_sample: Vec<MutationId>,
    pub missing_coverage_times: usize,
    pub warnings: Vec<String>,
    pub final_suite: Vec<TestInput>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub matrix: KillMatrix,
    pub minimal: MinimalSet,
    pub kill_times: Vec<KillTime>,
    pub curves: Vec<CurvePoint>,
    pub report: ScoreReport,
}

/// Runs every analysis over a finished run.
pub fn analyze(program: &Program, run: &PipelineRun, oracle: OracleMode, fuel: u64) -> Result<Analysis, AnalysisError> {
    let suite = run.final_suite();
    let matrix = build_kill_matrix(program, &run.mutations, &suite, oracle, fuel)?;
    let minimal = minimal_mutant_set(&matrix);
    let chao1 = chao1_estimate(&matrix);
    let (times, missing) = kill_times(run);
    let curves = kill_curve(&times);

    let class_of: BTreeMap<MutationId, MutantClass> = run.verdicts.iter().map(|v| (v.mutation_id, v.class)).collect();
    let killed: BTreeSet<MutationId> = class_of
        .iter()
        .filter(|(_, c)| matches!(c, MutantClass::Trivial | MutantClass::Intelligent))
        .map(|(&m, _)| m)
        .collect();
    let total = run.verdicts.len();
    let trivial = class_of.values().filter(|&&c| c == MutantClass::Trivial).count();
    let non_trivial = matrix.restrict(|m| class_of[&m] != MutantClass::Trivial);

    let fuzzers: Vec<String> = {
        let mut seen = Vec::new();
        for l in &run.coverage.lanes {
            if !seen.contains(&l.fuzzer) {
                seen.push(l.fuzzer.clone());
            }
        }
        seen
    };
    let trials = run.coverage.lanes.iter().map(|l| l.trial + 1).max().unwrap_or(0);
    let per_fuzzer: Vec<FuzzerScore> = fuzzers
        .iter()
        .map(|f| {
            let mine: Vec<&KillTime> = times.iter().filter(|t| &t.fuzzer == f).collect();
            let detected: BTreeSet<MutationId> = mine.iter().map(|t| t.mutation_id).collect();
            let trivial_excluded_kills = (0..trials)
                .map(|tr| mine.iter().filter(|t| t.trial == tr && t.class == MutantClass::Intelligent).count())
                .collect();
            FuzzerScore {
                fuzzer: f.clone(),
                killed: detected.len(),
                live: total - detected.len(),
                residual_risk: residual_risk(&chao1, detected.len()),
                trivial_excluded_kills,
            }
        })
        .collect();
    let per_trial: Vec<(String, Vec<usize>)> =
        per_fuzzer.iter().map(|s| (s.fuzzer.clone(), s.trivial_excluded_kills.clone())).collect();

    let mut warnings: Vec<String> = run.warnings.iter().map(|w| serde_json::to_string(w).unwrap()).collect();
    let ranking = match compare_fuzzers(&per_trial) {
        Ok(r) => Some(r),
        Err(e) => {
            warnings.push(e.to_string());
            None
        }
    };
    if killed.is_empty() {
        warnings.push("no mutant was killed; the richness estimate is uninformative".into());
    }
    if !missing.is_empty() {
        warnings.push(format!("{} trivial kills lack a phase-1 coverage time", missing.len()));
    }

    let flagged = |f: MutantFlag| -> Vec<MutationId> {
        run.verdicts.iter().filter(|v| v.flag == Some(f)).map(|v| v.mutation_id).collect()
    };
    let live_ids: Vec<MutationId> = class_of.keys().filter(|m| !killed.contains(m)).copied().collect();
    let audit_sample = audit_sample(&live_ids);

    let report = ScoreReport {
        total,
        class_counts: run.verdicts_document().counts,
        killed: killed.len(),
        live: total - killed.len(),
        raw_score: raw_score(total, killed.len()),
        trivial_excluded_score: raw_score(total - trivial, killed.len() - trivial),
        minimal_set_score: minimal_set_score(&matrix, &killed),
        headline_score: minimal_set_score(&non_trivial, &killed),
        dominators: minimal.dominators.clone(),
        duplicate_groups: minimal.duplicate_groups.len(),
        redundant_pairs: minimal.redundant_pairs.len(),
        chao1,
        residual_risk: residual_risk(&chao1, killed.len()),
        per_fuzzer,
        ranking,
        candidate_equivalent: flagged(MutantFlag::CandidateEquivalent),
        candidate_immortal: flagged(MutantFlag::CandidateImmortal),
        audit_sample,
        missing_coverage_times: missing.len(),
        warnings,
        final_suite: suite,
    };
    Ok(Analysis { matrix, minimal, kill_times: times, curves, report })
}

fn audit_sample(live: &[MutationId]) -> Vec<MutationId> {
    let mut pool = live.to_vec();
    let mut rng = SplitMix64::new(AUDIT_SEED);
    let n = pool.len().min(AUDIT_SAMPLE_SIZE);
    for i in 0..n {
        let j = i + rng.index(pool.len() - i);
        pool.swap(i, j);
    }
    let mut chosen = pool[..n].to_vec();
    chosen.sort_unstable();
    chosen
}

/// Human-readable summary.
pub fn report_markdown(report: &ScoreReport, target: &str) -> String {
    let mut s = String::new();
    let pct = |x: f64| format!("{:.1}%", 100.0 * x);
    writeln!(s, "# Mutation analysis of `{target}`\n").unwrap();
    writeln!(s, "## Mutant taxonomy\n").unwrap();
    writeln!(s, "| class | count |\n|---|---:|").unwrap();
    for c in MutantClass::ALL {
        writeln!(s, "| {} | {} |", c, report.class_counts.get(c.name()).copied().unwrap_or(0)).unwrap();
    }
    writeln!(s, "| **total** | **{}** |\n", report.total).unwrap();
    writeln!(s, "Covered but unkilled: {} candidate-equivalent, {} candidate-immortal.\n", report.candidate_equivalent.len(), report.candidate_immortal.len()).unwrap();

    writeln!(s, "## Scores\n").unwrap();
    writeln!(s, "| score | value |\n|---|---:|").unwrap();
    writeln!(s, "| headline (minimal set, trivial excluded) | {} |", pct(report.headline_score)).unwrap();
    writeln!(s, "| minimal set | {} |", pct(report.minimal_set_score)).unwrap();
    writeln!(s, "| trivial excluded | {} |", pct(report.trivial_excluded_score)).unwrap();
    writeln!(s, "| raw ({} / {}) | {} |\n", report.killed, report.total, pct(report.raw_score)).unwrap();
    writeln!(
        s,
        "Minimal set: {} dominators, {} duplicate groups, {} redundant pairs.\n",
        report.dominators.len(),
        report.duplicate_groups,
        report.redundant_pairs
    )
    .unwrap();

    writeln!(s, "## Fuzzer ranking\n").unwrap();
    match &report.ranking {
        Some(r) => {
            writeln!(s, "Intelligent kills per trial, median and bootstrap 95% interval.\n").unwrap();
            writeln!(s, "| rank | fuzzer | per trial | median | 95% interval |\n|---:|---|---|---:|---|").unwrap();
            for (i, f) in r.summaries.iter().enumerate() {
                writeln!(s, "| {} | {} | {:?} | {} | [{}, {}] |", i + 1, f.fuzzer, f.per_trial, f.median, f.ci_low, f.ci_high).unwrap();
            }
            if r.ties.is_empty() {
                writeln!(s, "\nNo statistical ties.\n").unwrap();
            } else {
                for (a, b) in &r.ties {
                    writeln!(s, "\n{a} and {b} are tied (overlapping intervals).").unwrap();
                }
                s.push('\n');
            }
        }
        None => writeln!(s, "Not ranked: fewer than two trials.\n").unwrap(),
    }

    writeln!(s, "## Residual risk\n").unwrap();
    let c = &report.chao1;
    writeln!(
        s,
        "Chao1 estimates {:.2} killable mutants (S_obs = {}, f1 = {}, f2 = {}); {} were killed, leaving a residual risk of {:.2}. {} mutants remain alive.\n",
        c.estimate, c.s_obs, c.f1, c.f2, report.killed, report.residual_risk, report.live
    )
    .unwrap();
    writeln!(s, "| fuzzer | detected | live | residual risk |\n|---|---:|---:|---:|").unwrap();
    for f in &report.per_fuzzer {
        writeln!(s, "| {} | {} | {} | {:.2} |", f.fuzzer, f.killed, f.live, f.residual_risk).unwrap();
    }
    s.push('\n');
    if !report.audit_sample.is_empty() {
        writeln!(s, "Live mutants sampled for manual audit: {:?}\n", report.audit_sample).unwrap();
    }
    if !report.warnings.is_empty() {
        writeln!(s, "## Warnings\n").unwrap();
        for w in &report.warnings {
            writeln!(s, "- {w}").unwrap();
        }
        s.push('\n');
    }
    writeln!(s, "## Glossary\n").unwrap();
    writeln!(s, "- trivial: killed by the coverage seed alone.").unwrap();
    writeln!(s, "- intelligent: killed only by a fuzzer's own campaign.").unwrap();
    writeln!(s, "- stubborn: reached by fuzzer-generated inputs, never killed.").unwrap();
    writeln!(s, "- live-covered: reached only by replayed seed inputs, never killed.").unwrap();
    writeln!(s, "- candidate-equivalent: no input in the final suite changes its behavior.").unwrap();
    writeln!(s, "- candidate-immortal: the differential oracle can kill it, the configured oracle did not.").unwrap();
    writeln!(s, "- Real faults are coupled to simple mutants in the vast majority (above 99%) of cases, and most failures involve one or two faults; both figures are quoted context, not measured here.").unwrap();
    s
}
