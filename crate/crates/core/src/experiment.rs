//! Experiment configuration and run reports.
//!
//! Configurations and reports are JSON with snake_case keys; complex numbers
//! are `[re, im]` pairs and coefficient tables are row-major with `m'` as
//! the row. Reports are byte-stable for a fixed configuration apart from
//! the `wall_time_ms` field.

use std::fs::OpenOptions;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analysis::{self, PartitionReport, PptVerdict, RankProfile, SeparableCut};
use crate::channels::{self, build, ChannelSpec};
use crate::par::Execution;
use crate::protocol::{self, Assignment, DistributionVerdict, Join, Mode, Receiver, Transcript};
use crate::rng;
use crate::telecloning::{self, CloningParams, ExpansionPair, ExpansionReport};
use crate::tensor::{Bipartition, PureState};
use crate::weyl::{self, all_labels, WeylLabel};
use crate::{Result, RicError, C64, MAX_DIM};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Teleclone,
    Ric,
    EndToEnd,
    Analyze,
    Search,
    Verify,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Teleclone => "teleclone",
            Task::Ric => "ric",
            Task::EndToEnd => "end_to_end",
            Task::Analyze => "analyze",
            Task::Search => "search",
            Task::Verify => "verify",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomChannel {
    pub seed: u64,
    #[serde(default)]
    pub u: usize,
    #[serde(default)]
    pub v: usize,
}

/// An explicit channel, or a seeded random general pure channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelConfig {
    Random { random_general_pure: RandomChannel },
    Spec(ChannelSpec),
}

impl ChannelConfig {
    pub fn resolve(&self, d: usize) -> ChannelSpec {
        match self {
            ChannelConfig::Spec(s) => s.clone(),
            ChannelConfig::Random {
                random_general_pure: r,
            } => ChannelSpec::random_general_pure(d, r.seed, r.u, r.v),
        }
    }
}

/// `"fig1" | "fig2" | "fig3"` or an explicit holder map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AssignmentChoice {
    Preset(String),
    Custom(Assignment),
}

impl AssignmentChoice {
    pub fn resolve(&self) -> Result<Assignment> {
        match self {
            AssignmentChoice::Preset(name) => Assignment::preset(name)
                .ok_or_else(|| RicError::InvalidAssignment(format!("unknown preset `{name}`"))),
            AssignmentChoice::Custom(a) => {
                a.validate()?;
                Ok(*a)
            }
        }
    }
}

impl Default for AssignmentChoice {
    fn default() -> Self {
        AssignmentChoice::Preset("fig1".into())
    }
}

/// Explicit amplitudes, or a Haar-random state from a seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputConfig {
    Amplitudes(Vec<C64>),
    Seeded { seed: u64 },
}

impl Default for InputConfig {
    fn default() -> Self {
        InputConfig::Seeded { seed: 1 }
    }
}

fn default_p() -> f64 {
    0.5
}

fn default_samples() -> usize {
    200
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub task: Task,
    #[serde(default)]
    pub channel: Option<ChannelConfig>,
    #[serde(default)]
    pub assignment: AssignmentChoice,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default)]
    pub input: InputConfig,
    /// `None` picks enumeration for `d ≤ 3` and sampling otherwise.
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Dimensions for the verification task; defaults to `[dim]`.
    #[serde(default)]
    pub verify_dims: Option<Vec<usize>>,
    /// Output directory for drivers that write reports to disk.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl ExperimentConfig {
    pub fn new(dim: usize, task: Task) -> Self {
        ExperimentConfig {
            dim,
            task,
            channel: None,
            assignment: AssignmentChoice::default(),
            p: default_p(),
            q: None,
            input: InputConfig::default(),
            mode: None,
            seed: 0,
            samples: default_samples(),
            verify_dims: None,
            out: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Fills every defaulted field with its concrete value.
    pub fn normalized(&self) -> Self {
        let mut c = self.clone();
        c.q = Some(self.q.unwrap_or(1.0 - self.p));
        c.mode = Some(self.effective_mode());
        if c.task == Task::Verify && c.verify_dims.is_none() {
            c.verify_dims = Some(vec![self.dim]);
        }
        c
    }

    pub fn effective_mode(&self) -> Mode {
        self.mode
            .clone()
            .unwrap_or_else(|| Mode::default_for(self.dim, self.samples, self.seed))
    }

    pub fn params(&self) -> Result<CloningParams> {
        CloningParams::with_pq(self.dim, self.p, self.q.unwrap_or(1.0 - self.p))
    }

    pub fn channel_spec(&self) -> ChannelSpec {
        self.channel
            .as_ref()
            .map(|c| c.resolve(self.dim))
            .unwrap_or(ChannelSpec::Ghz { c: 0 })
    }

    pub fn input_state(&self) -> Result<PureState> {
        match &self.input {
            InputConfig::Amplitudes(a) => PureState::new(vec!["in".into()], self.dim, a.clone()),
            InputConfig::Seeded { seed } => {
                rng::haar_state(&mut rng::seeded(*seed), self.dim, "in")
            }
        }
    }

    /// Revalidates every referenced invariant.
    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(RicError::InvalidDimension(self.dim));
        }
        if self.dim > MAX_DIM {
            return Err(RicError::DimensionTooLarge(self.dim));
        }
        self.params()?;
        self.channel_spec().validate(self.dim)?;
        self.assignment.resolve()?;
        self.input_state()?;
        if let Some(Mode::Sample { samples: 0, .. }) = self.mode {
            return Err(RicError::InvalidConfig(
                "sample mode needs at least one sample".into(),
            ));
        }
        if let Some(ds) = &self.verify_dims {
            if let Some(&bad) = ds.iter().find(|&&d| ![2, 3, 5, 7].contains(&d)) {
                return Err(RicError::InvalidConfig(format!(
                    "verification dimension {bad} not in {{2,3,5,7}}"
                )));
            }
        }
        Ok(())
    }
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub task: String,
    pub d: usize,
    pub channel_tag: String,
    pub assignment: String,
    pub branches: usize,
    pub min_fidelity: f64,
    pub mean_fidelity: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TelecloneReport {
    pub params: CloningParams,
    pub clone_fidelities: (f64, f64),
    pub distributor: Vec<(WeylLabel, f64, f64)>,
    pub expansions: Vec<ExpansionReport>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub stabilizers: Vec<Vec<C64>>,
    pub stabilizer_phase_law: Vec<Vec<C64>>,
    pub partitions: Vec<PartitionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_profile: Option<RankProfile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MessageCost {
    pub messages: usize,
    pub bits_per_message: u32,
    pub total_bits: u32,
    /// The same cost counted in dits: two per message.
    pub total_dits: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub d: usize,
    pub passed: bool,
    pub value: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub summary: Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_probability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub messages: Option<MessageCost>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transcripts: Option<Vec<Transcript>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub telecloning: Option<TelecloneReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distributions: Option<Vec<DistributionVerdict>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ledger: Option<Vec<CheckResult>>,
    pub wall_time_ms: f64,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn summary(
    cfg: &ExperimentConfig,
    channel_tag: &str,
    assignment: &str,
    branches: usize,
    min: f64,
    mean: f64,
) -> Summary {
    Summary {
        task: cfg.task.as_str().into(),
        d: cfg.dim,
        channel_tag: channel_tag.into(),
        assignment: assignment.into(),
        branches,
        min_fidelity: min,
        mean_fidelity: mean,
        seed: cfg.seed,
    }
}

fn empty_report(cfg: ExperimentConfig, s: Summary) -> RunReport {
    RunReport {
        config: cfg,
        summary: s,
        total_probability: None,
        messages: None,
        transcripts: None,
        telecloning: None,
        analysis: None,
        distributions: None,
        ledger: None,
        wall_time_ms: 0.0,
    }
}

/// Number of Haar-random inputs used by correction searches.
pub const SEARCH_INPUTS: usize = 4;

/// Executes one configured experiment.
pub fn run(config: &ExperimentConfig, exec: Execution) -> Result<RunReport> {
    config.validate()?;
    let start = Instant::now();
    let cfg = config.normalized();
    let d = cfg.dim;
    let mode = cfg.effective_mode();
    let mut report = match cfg.task {
        Task::Teleclone => {
            let params = cfg.params()?;
            let phi = cfg.input_state()?;
            let branches = telecloning::distribute(&phi, &params, &mode)?;
            let min = branches.iter().map(|b| b.fidelity).fold(1.0, f64::min);
            let mean = branches.iter().map(|b| b.fidelity).sum::<f64>() / branches.len() as f64;
            let expansions = [ExpansionPair::OneA, ExpansionPair::TwoA]
                .iter()
                .map(|p| telecloning::expansion_check(&params, *p, &phi))
                .collect::<Result<_>>()?;
            let mut r = empty_report(
                cfg.clone(),
                summary(&cfg, "telecloning", "-", branches.len(), min, mean),
            );
            r.total_probability = Some(branches.iter().map(|b| b.probability).sum());
            r.telecloning = Some(TelecloneReport {
                params,
                clone_fidelities: telecloning::clone_fidelities(&phi, &params)?,
                distributor: branches
                    .iter()
                    .map(|b| (b.outcome, b.probability, b.fidelity))
                    .collect(),
                expansions,
            });
            r
        }
        Task::Ric => {
            let params = cfg.params()?;
            let phi = cfg.input_state()?;
            let spec = cfg.channel_spec();
            let channel = build(&spec, d)?;
            let assignment = cfg.assignment.resolve()?;
            let clone = telecloning::clone_state(&phi, &params)?;
            let run = protocol::run_ric(&clone, &phi, &channel, &assignment, &mode, exec)?;
            let bits = protocol::bits_per_message(d);
            let mut r = empty_report(
                cfg.clone(),
                summary(
                    &cfg,
                    spec.tag(),
                    &assignment.name(),
                    run.transcripts.len(),
                    run.min_fidelity(),
                    run.mean_fidelity(),
                ),
            );
            r.total_probability = Some(run.total_probability());
            r.messages = Some(MessageCost {
                messages: 3,
                bits_per_message: bits,
                total_bits: 3 * bits,
                total_dits: 6,
            });
            r.transcripts = Some(run.transcripts);
            r
        }
        Task::EndToEnd => {
            let params = cfg.params()?;
            let phi = cfg.input_state()?;
            let spec = cfg.channel_spec();
            let channel = build(&spec, d)?;
            let assignment = cfg.assignment.resolve()?;
            let e = protocol::end_to_end(&phi, &params, &channel, &assignment, &mode, exec)?;
            let mut r = empty_report(
                cfg.clone(),
                summary(
                    &cfg,
                    spec.tag(),
                    &assignment.name(),
                    e.ric_branches,
                    e.min_fidelity,
                    e.mean_fidelity,
                ),
            );
            r.total_probability = Some(e.total_probability);
            r
        }
        Task::Analyze => {
            let spec = cfg.channel_spec();
            let channel = build(&spec, d)?;
            let (u, v) = spec.offsets();
            let analysis = AnalysisReport {
                stabilizers: channels::stabilizer_expectations(&channel)?,
                stabilizer_phase_law: channels::stabilizer_phase_law(u, v, d),
                partitions: analysis::ppt_report(&channel.density())?,
                rank_profile: channel.pure().map(analysis::rank_profile).transpose()?,
            };
            let mut r = empty_report(cfg.clone(), summary(&cfg, spec.tag(), "-", 0, 1.0, 1.0));
            r.analysis = Some(analysis);
            r
        }
        Task::Search => {
            let params = cfg.params()?;
            let spec = cfg.channel_spec();
            let channel = build(&spec, d)?;
            let receiver = match cfg.assignment.resolve()? {
                a if matches!(cfg.assignment, AssignmentChoice::Custom(_)) => a.receiver,
                _ => Receiver::Qudit5,
            };
            let inputs = rng::haar_inputs(cfg.seed, d, SEARCH_INPUTS)?;
            let verdicts =
                protocol::search_distributions(&inputs, &params, &channel, receiver, exec)?;
            let working = verdicts.iter().filter(|v| v.works).count();
            let mut r = empty_report(
                cfg.clone(),
                summary(
                    &cfg,
                    spec.tag(),
                    "all",
                    verdicts.len(),
                    working as f64 / 6.0,
                    working as f64 / 6.0,
                ),
            );
            r.distributions = Some(verdicts);
            r
        }
        Task::Verify => {
            let dims = cfg.verify_dims.clone().unwrap_or_else(|| vec![d]);
            let ledger = verify_suite(&dims, exec)?;
            let passed = ledger.iter().filter(|c| c.passed).count();
            let frac = if ledger.is_empty() {
                1.0
            } else {
                passed as f64 / ledger.len() as f64
            };
            let mut r = empty_report(
                cfg.clone(),
                summary(&cfg, "-", "-", ledger.len(), frac, frac),
            );
            r.ledger = Some(ledger);
            r
        }
    };
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

pub const CSV_COLUMNS: [&str; 8] = [
    "task",
    "d",
    "channel_tag",
    "assignment",
    "branches",
    "min_fidelity",
    "mean_fidelity",
    "seed",
];

/// Appends one summary row, writing the header first if the file is new.
pub fn append_csv(path: &Path, row: &Summary) -> Result<()> {
    let fresh = !path.exists() || std::fs::metadata(path)?.len() == 0;
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(fresh)
        .from_writer(file);
    w.serialize(row)?;
    w.flush()?;
    Ok(())
}

fn check(name: &str, d: usize, passed: bool, value: f64, detail: impl Into<String>) -> CheckResult {
    CheckResult {
        name: name.into(),
        d,
        passed,
        value,
        detail: detail.into(),
    }
}

fn fig_run_min_fidelity(
    d: usize,
    spec: &ChannelSpec,
    assignment: &Assignment,
    exec: Execution,
) -> Result<f64> {
    let params = CloningParams::symmetric(d)?;
    let channel = build(spec, d)?;
    let mode = Mode::default_for(d, 200, 11);
    let mut worst = 1.0f64;
    for phi in rng::haar_inputs(5, d, 2)? {
        let clone = telecloning::clone_state(&phi, &params)?;
        worst = worst.min(
            protocol::run_ric(&clone, &phi, &channel, assignment, &mode, exec)?.min_fidelity(),
        );
    }
    Ok(worst)
}

/// Runs every identity and protocol check for each dimension in `dims`.
/// Dimension 7 runs the cheap algebraic checks only. Failures are data.
pub fn verify_suite(dims: &[usize], exec: Execution) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for &d in dims {
        if !(2..=MAX_DIM).contains(&d) {
            return Err(RicError::InvalidConfig(format!("cannot verify d={d}")));
        }
        let full = d <= 5;
        let r = weyl::product_to_bell_residual(d);
        out.push(check(
            "product_to_bell_reconstruction",
            d,
            r < 1e-12,
            r,
            "max residual over all j,k",
        ));
        let r = weyl::composition_residual(d);
        out.push(check(
            "weyl_composition_law",
            d,
            r < 1e-12,
            r,
            "max deviation over all label pairs",
        ));
        let r = channels::stabilizer_commutator_max(d)?;
        out.push(check(
            "stabilizers_commute",
            d,
            r < 1e-12,
            r,
            "max commutator norm",
        ));
        let ghz = build(&ChannelSpec::Ghz { c: 0 }, d)?;
        let r = channels::stabilizer_expectations(&ghz)?
            .iter()
            .flatten()
            .map(|x| (x - C64::new(1.0, 0.0)).norm())
            .fold(0.0, f64::max);
        out.push(check(
            "stabilizer_expectations_ghz",
            d,
            r < 1e-10,
            r,
            "max |<S> - 1|",
        ));
        if d <= 3 {
            let mut worst = 0.0f64;
            for a in all_labels(d) {
                for b in all_labels(d) {
                    worst = worst.max(weyl::swap_identity_residual(a, b, d)?);
                }
            }
            out.push(check(
                "entanglement_swapping_identity",
                d,
                worst < 1e-12,
                worst,
                "all label tuples",
            ));
        }
        if full {
            let r = channels::bound_symmetry_residual(d)?;
            out.push(check(
                "bound_state_two_forms_agree",
                d,
                r < 1e-12,
                r,
                "max entrywise difference",
            ));
            let params = CloningParams::symmetric(d)?;
            let inputs = rng::haar_inputs(3, d, 5)?;
            let fids: Vec<f64> = inputs
                .iter()
                .map(|p| telecloning::clone_fidelities(p, &params).map(|f| f.0))
                .collect::<Result<_>>()?;
            let spread = fids.iter().cloned().fold(f64::MIN, f64::max)
                - fids.iter().cloned().fold(f64::MAX, f64::min);
            let expected = (d as f64 + 3.0) / (2.0 * (d as f64 + 1.0));
            let dev = (fids[0] - expected).abs().max(spread);
            out.push(check(
                "symmetric_clone_fidelity",
                d,
                dev < 1e-10,
                fids[0],
                format!("expected (d+3)/(2(d+1)) = {expected}"),
            ));
            let mut worst = 1.0f64;
            for phi in &inputs[..2] {
                for b in telecloning::distribute(phi, &params, &Mode::Enumerate)? {
                    worst = worst.min(b.fidelity);
                }
            }
            out.push(check(
                "distributor_corrections_restore_clones",
                d,
                worst > 1.0 - 1e-10,
                worst,
                "min fidelity over outcomes",
            ));
            let f = fig_run_min_fidelity(d, &ChannelSpec::Ghz { c: 0 }, &Assignment::fig1(), exec)?;
            out.push(check(
                "ric_fig1_ghz",
                d,
                f > 1.0 - 1e-10,
                f,
                "min branch fidelity",
            ));
            let f = fig_run_min_fidelity(
                d,
                &ChannelSpec::random_general_pure(d, 7, 1, 2),
                &Assignment::fig2(),
                exec,
            )?;
            out.push(check(
                "ric_fig2_random_channel",
                d,
                f > 1.0 - 1e-10,
                f,
                "min branch fidelity",
            ));
            let rho = build(&ChannelSpec::BoundSmolinLike, d)?.density();
            for c in [SeparableCut::ThreeFour, SeparableCut::ThreeSix] {
                let r = analysis::separable_decomposition_residual(&rho, c)?;
                out.push(check(
                    &format!("bound_state_separable_{}", c.bipartition()),
                    d,
                    r < 1e-12,
                    r,
                    "explicit product mixture",
                ));
            }
            let pr = analysis::partition_report(
                &rho,
                &Bipartition::from_names(&["3", "5"], &["4", "6"])?,
            )?;
            let expect_npt = d > 2;
            let ok = (pr.verdict == PptVerdict::Npt) == expect_npt;
            out.push(check(
                "bound_state_cut_35_46",
                d,
                ok,
                pr.min_pt_eigenvalue,
                if expect_npt {
                    "expected NPT"
                } else {
                    "expected PPT"
                },
            ));
            for j in [Join::ThreeFour, Join::ThreeSix] {
                let u = protocol::unlock_bound(&rho, j)?;
                let target = (d as f64).log2();
                let worst = u
                    .outcomes
                    .iter()
                    .map(|o| (o.marginal_entropy_bits - target).abs())
                    .fold(0.0, f64::max);
                out.push(check(
                    &format!("unlock_{:?}", j).to_lowercase(),
                    d,
                    worst < 1e-10,
                    worst,
                    "max |S - log2 d|",
                ));
            }
        }
        if d <= 3 {
            let params = CloningParams::symmetric(d)?;
            let inputs = rng::haar_inputs(13, d, SEARCH_INPUTS)?;
            let channel = build(&ChannelSpec::random_general_pure(d, 7, 0, 0), d)?;
            let s =
                protocol::correction_search(&inputs, &params, &channel, &Assignment::fig3(), exec)?;
            let expect_fail = d > 2;
            let ok = (s.uncorrectable() > 0) == expect_fail;
            out.push(check(
                "fig3_random_channel",
                d,
                ok,
                s.uncorrectable() as f64,
                if expect_fail {
                    "expected uncorrectable branches"
                } else {
                    "expected every branch correctable"
                },
            ));
        }
        if d == 2 {
            let r = channels::telecloning_overlap(&CloningParams::symmetric(2)?)?;
            out.push(check(
                "telecloning_like_equals_telecloning_channel",
                d,
                r > 1.0 - 1e-10,
                r,
                "fidelity under (t',1,2,a) -> (3,4,5,6)",
            ));
        }
    }
    Ok(out)
}
