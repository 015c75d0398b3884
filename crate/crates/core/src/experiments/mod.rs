//! Protocol runners. Every runner supports exact enumeration of all branches
//! except natural dephasing, whose continuous detuning distribution is only
//! sampled.

mod bell;
mod dephasing;
mod qec;
mod walker;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use bell::{bell_branches, run_bell, BellBranch, BellResult};
pub use dephasing::{run_natural_dephasing, DephasingVariant};
pub use qec::{
    correct_injected_error, run_encoding, run_multi_round_qec, run_single_round_qec, EncodingReport, SingleRoundVariant,
};

use crate::code::{LogicalBasis, LogicalFrame, LogicalReadout, Syndrome};
use crate::error::{Error, Result};
use crate::feedback::FrameUpdate;
use crate::measurement::{AncillaState, AssignmentConvention};
use crate::parallel::{map_trials, trial_rng, Execution};
use walker::{Chooser, Path};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    /// Every measurement, readout and error branch with its exact weight.
    #[default]
    Exact,
    MonteCarlo,
}

impl FromStr for RunMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" | "exact_enumeration" => Ok(RunMode::Exact),
            "monte_carlo" | "mc" => Ok(RunMode::MonteCarlo),
            _ => Err(Error::InvalidArgument(format!("unknown mode {s:?}"))),
        }
    }
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunMode::Exact => "exact",
            RunMode::MonteCarlo => "monte_carlo",
        })
    }
}

/// A single assignment convention, or the average over all four.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ConventionChoice {
    Fixed(AssignmentConvention),
    Symmetrized,
}

impl ConventionChoice {
    pub fn conventions(self) -> Vec<AssignmentConvention> {
        match self {
            ConventionChoice::Fixed(c) => vec![c],
            ConventionChoice::Symmetrized => AssignmentConvention::ALL.to_vec(),
        }
    }
}

impl Default for ConventionChoice {
    fn default() -> Self {
        ConventionChoice::Fixed(AssignmentConvention::OPTIMAL)
    }
}

impl FromStr for ConventionChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "symmetrized" {
            Ok(ConventionChoice::Symmetrized)
        } else {
            s.parse().map(ConventionChoice::Fixed)
        }
    }
}

impl fmt::Display for ConventionChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConventionChoice::Fixed(c) => c.fmt(f),
            ConventionChoice::Symmetrized => f.write_str("symmetrized"),
        }
    }
}

impl TryFrom<String> for ConventionChoice {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ConventionChoice> for String {
    fn from(c: ConventionChoice) -> String {
        c.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub mode: RunMode,
    /// Monte Carlo trials per grid point; ignored in exact mode.
    pub trials: u64,
    pub seed: u64,
    pub execution: Execution,
    pub readout: LogicalReadout,
    /// Keep a per-trial [`ExperimentRecord`] (Monte Carlo only).
    pub keep_records: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            mode: RunMode::Exact,
            trials: 10_000,
            seed: 0,
            execution: Execution::default(),
            readout: LogicalReadout::default(),
            keep_records: false,
        }
    }
}

impl RunOptions {
    pub fn exact() -> Self {
        Self::default()
    }

    pub fn monte_carlo(trials: u64, seed: u64) -> Self {
        Self { mode: RunMode::MonteCarlo, trials, seed, ..Self::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub reported: [AncillaState; 2],
    pub true_syndrome: Syndrome,
    pub detected: Syndrome,
    pub update: FrameUpdate,
}

/// Full trace of one Monte Carlo trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub point: usize,
    pub x: f64,
    pub trial_index: u64,
    pub basis: Option<LogicalBasis>,
    pub convention: Option<AssignmentConvention>,
    pub rounds: Vec<RoundRecord>,
    pub frame: LogicalFrame,
    pub fidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub x: f64,
    pub fidelity: f64,
    pub stderr: f64,
    /// Detected syndrome categories of the first stabilizer round.
    pub syndrome: Option<[f64; 4]>,
    /// Actual (pre-readout) syndrome categories of the first stabilizer round.
    pub true_syndrome: Option<[f64; 4]>,
    /// Probability of a detected no-error syndrome in each stabilizer round.
    pub round_no_error: Vec<f64>,
    /// Monte Carlo trials behind the point; 0 for exact enumeration.
    pub trials: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub experiment: String,
    pub variant: String,
    pub mode: RunMode,
    pub seed: u64,
    pub points: Vec<SweepPoint>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub records: Vec<ExperimentRecord>,
}

/// Terminal branch of one trial (or of one group in exact mode).
pub(crate) struct Leaf {
    pub weight: f64,
    pub value: f64,
    pub rounds: Vec<RoundRecord>,
    pub frame: LogicalFrame,
}

impl Leaf {
    fn from_path(path: &Path, value: f64) -> Self {
        Leaf { weight: path.weight, value, rounds: path.rounds.clone(), frame: path.frame }
    }
}

/// Reported fidelity `offset + coeff * sum_g mean_g` over the trial groups.
#[derive(Clone, Copy)]
pub(crate) struct Estimator {
    offset: f64,
    coeff: f64,
}

impl Estimator {
    /// Process fidelity from groups that cycle through the six logical states.
    fn process(groups: usize) -> Self {
        Estimator { offset: -0.5, coeff: 1.5 / groups as f64 }
    }

    fn mean(groups: usize) -> Self {
        Estimator { offset: 0.0, coeff: 1.0 / groups as f64 }
    }
}

/// Labels of one trial group.
#[derive(Clone, Copy)]
pub(crate) struct Group {
    pub basis: Option<LogicalBasis>,
    pub convention: Option<AssignmentConvention>,
}

#[derive(Default)]
struct Accumulator {
    weight: Vec<f64>,
    sum: Vec<f64>,
    sumsq: Vec<f64>,
    syndrome: Vec<[f64; 4]>,
    true_syndrome: [f64; 4],
    total: f64,
}

impl Accumulator {
    fn new(groups: usize) -> Self {
        Self { weight: vec![0.0; groups], sum: vec![0.0; groups], sumsq: vec![0.0; groups], ..Self::default() }
    }

    fn add(&mut self, group: usize, leaf: &Leaf) {
        let w = leaf.weight;
        self.weight[group] += w;
        self.sum[group] += w * leaf.value;
        self.sumsq[group] += w * leaf.value * leaf.value;
        self.total += w;
        if self.syndrome.len() < leaf.rounds.len() {
            self.syndrome.resize(leaf.rounds.len(), [0.0; 4]);
        }
        for (r, round) in leaf.rounds.iter().enumerate() {
            self.syndrome[r][round.detected.category()] += w;
        }
        if let Some(first) = leaf.rounds.first() {
            self.true_syndrome[first.true_syndrome.category()] += w;
        }
    }

    fn finish(self, x: f64, est: Estimator, trials: u64, sampled: bool) -> Result<SweepPoint> {
        let mut fidelity = est.offset;
        let mut var = 0.0;
        for g in 0..self.weight.len() {
            let n = self.weight[g];
            if n <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "no trials landed in group {g}; use at least {} trials",
                    self.weight.len()
                )));
            }
            let mean = self.sum[g] / n;
            fidelity += est.coeff * mean;
            if sampled {
                let v = (self.sumsq[g] / n - mean * mean).max(0.0);
                // Unbiased variance of the group mean.
                if n > 1.0 {
                    var += est.coeff * est.coeff * v / (n - 1.0);
                }
            }
        }
        let total = self.total;
        let norm = |c: [f64; 4]| c.map(|v| v / total);
        Ok(SweepPoint {
            x,
            fidelity,
            stderr: var.sqrt(),
            syndrome: self.syndrome.first().copied().map(norm),
            true_syndrome: if self.syndrome.is_empty() { None } else { Some(norm(self.true_syndrome)) },
            round_no_error: self.syndrome.iter().map(|c| c[0] / total).collect(),
            trials: if sampled { trials } else { 0 },
        })
    }
}

/// Runs one grid point. `run` produces the leaves of one group: all branches
/// in exact mode, a single sampled branch otherwise. Monte Carlo trial `i`
/// belongs to group `i % groups.len()`.
pub(crate) fn run_point<F>(
    point: usize,
    x: f64,
    groups: &[Group],
    est: Estimator,
    opts: &RunOptions,
    run: F,
) -> Result<(SweepPoint, Vec<ExperimentRecord>)>
where
    F: Fn(usize, &mut Chooser) -> Result<Vec<Leaf>> + Sync + Send,
{
    let mut acc = Accumulator::new(groups.len());
    let mut records = Vec::new();
    match opts.mode {
        RunMode::Exact => {
            for g in 0..groups.len() {
                let leaves = run(g, &mut Chooser::Exact)?;
                let total: f64 = leaves.iter().map(|l| l.weight).sum();
                for mut leaf in leaves {
                    leaf.weight /= total;
                    acc.add(g, &leaf);
                }
            }
        }
        RunMode::MonteCarlo => {
            if opts.trials == 0 {
                return Err(Error::InvalidArgument("trials must be at least 1".into()));
            }
            let n_groups = groups.len() as u64;
            let leaves = map_trials(opts.trials, opts.execution, |i| {
                let mut rng = trial_rng(opts.seed, point as u64, i);
                let mut leaves = run((i % n_groups) as usize, &mut Chooser::Sample(&mut rng))?;
                debug_assert_eq!(leaves.len(), 1);
                Ok(leaves.remove(0))
            })?;
            for (i, leaf) in leaves.into_iter().enumerate() {
                let g = i % groups.len();
                acc.add(g, &leaf);
                if opts.keep_records {
                    records.push(ExperimentRecord {
                        point,
                        x,
                        trial_index: i as u64,
                        basis: groups[g].basis,
                        convention: groups[g].convention,
                        rounds: leaf.rounds,
                        frame: leaf.frame,
                        fidelity: leaf.value,
                    });
                }
            }
        }
    }
    Ok((acc.finish(x, est, opts.trials, opts.mode == RunMode::MonteCarlo)?, records))
}

pub(crate) fn sweep<F>(
    experiment: &str,
    variant: String,
    grid: &[f64],
    groups: &[Group],
    est: Estimator,
    opts: &RunOptions,
    run: F,
) -> Result<SweepResult>
where
    F: Fn(f64, usize, &mut Chooser) -> Result<Vec<Leaf>> + Sync + Send,
{
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    let mut points = Vec::with_capacity(grid.len());
    let mut records = Vec::new();
    for (i, &x) in grid.iter().enumerate() {
        let (p, r) = run_point(i, x, groups, est, opts, |g, ch| run(x, g, ch))?;
        points.push(p);
        records.extend(r);
    }
    Ok(SweepResult { experiment: experiment.into(), variant, mode: opts.mode, seed: opts.seed, points, records })
}

fn logical_groups(bases: &[LogicalBasis], conventions: &[AssignmentConvention]) -> Vec<Group> {
    conventions
        .iter()
        .flat_map(|&c| bases.iter().map(move |&b| Group { basis: Some(b), convention: Some(c) }))
        .collect()
}
