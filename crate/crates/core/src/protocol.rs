//! The three-party concentration protocol and the bound-state unlocking.
//!
//! Alice, Bob and Charlie hold the clone qudits `a`, `1`, `2` and one
//! channel qudit each. Each performs a Bell measurement on a pair of their
//! own qudits and sends the outcome to Diana, who applies one Weyl
//! correction to the channel qudit she keeps.
//!
//! Measurement pairs: Alice measures `(channel qudit, a)`, Bob measures
//! `(1, channel qudit)`, Charlie measures `(2, channel qudit)`.
//!
//! Diana deduces `(u', v') = outcome(holder of 4) + outcome(holder of 3)`,
//! takes `(u'', v'')` from the holder of the relay qudit, forms
//! `m''' = u'' + u' − u`, `n''' = v'' + v' − v` and applies
//! `ω^{−m'''n'''} U^{m''', −n'''}`.
//!
//! Which qudit of the `(5, 6)` pair Diana keeps is set by [`Receiver`]. With
//! the Bell basis and channel written as `|B^{m,n}⟩ = (I⊗U^{m,n})|B^{0,0}⟩`
//! and `Σ C |B^{m',n'}⟩_{34}|B^{u−m',v−n'}⟩_{56}`, the deduction rule is
//! exact for generic coefficients when Diana keeps qudit 5
//! ([`Receiver::Qudit5`], the default) and qudit 6 is the relay. Keeping
//! qudit 6 ([`Receiver::Qudit6`]) is also supported; for `d > 2` it only
//! works for channels whose coefficients are supported on a single `n'`
//! column, such as the GHZ family.
//!
//! Mixed channels run through their purification; the purifying qudits
//! `X, Y` are never touched and are traced out of Diana's final state.

use std::fmt;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::channels::{Channel, ChannelSpec};
use crate::par::Execution;
use crate::rng::seeded;
use crate::telecloning::{self, CloningParams, ANCILLA, CLONE_1, CLONE_2};
use crate::tensor::{labels, DensityOperator, Label, PureState};
use crate::weyl::{all_labels, bell, omega_table, weyl, weyl_adjoint, WeylLabel};
use crate::{Result, RicError, C64, ZERO_PROBABILITY};

/// Fidelity threshold for a Weyl correction to count as exact in searches.
pub const SEARCH_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Every joint outcome exactly once, with its probability.
    Enumerate,
    /// `samples` joint outcomes drawn by Born weight from a seeded generator.
    Sample { samples: usize, seed: u64 },
}

impl Mode {
    /// Enumeration for `d ≤ 3`, sampling otherwise.
    pub fn default_for(d: usize, samples: usize, seed: u64) -> Self {
        if d <= 3 {
            Mode::Enumerate
        } else {
            Mode::Sample { samples, seed }
        }
    }
}

/// Draws `count` indices with probability proportional to `weights`.
pub fn sample_indices(weights: &[f64], count: usize, seed: u64) -> Result<Vec<usize>> {
    let dist = WeightedIndex::new(weights)
        .map_err(|e| RicError::InvalidConfig(format!("sampling weights: {e}")))?;
    let mut rng = seeded(seed);
    Ok((0..count).map(|_| dist.sample(&mut rng)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Alice,
    Bob,
    Charlie,
    Diana,
}

impl Party {
    pub const SENDERS: [Party; 3] = [Party::Alice, Party::Bob, Party::Charlie];

    /// The clone-side qudit each sender holds.
    pub fn clone_qudit(self) -> Option<&'static str> {
        match self {
            Party::Alice => Some(ANCILLA),
            Party::Bob => Some(CLONE_1),
            Party::Charlie => Some(CLONE_2),
            Party::Diana => None,
        }
    }

    /// The ordered pair this party measures when holding `channel_qudit`.
    pub fn measured_pair(self, channel_qudit: &Label) -> Result<[Label; 2]> {
        let own: Label = self
            .clone_qudit()
            .ok_or_else(|| RicError::InvalidAssignment("Diana does not measure".into()))?
            .into();
        Ok(match self {
            Party::Alice => [channel_qudit.clone(), own],
            _ => [own, channel_qudit.clone()],
        })
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Party::Alice => "alice",
            Party::Bob => "bob",
            Party::Charlie => "charlie",
            Party::Diana => "diana",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Receiver {
    #[default]
    Qudit5,
    Qudit6,
}

impl Receiver {
    /// The qudit Diana keeps.
    pub fn kept(self) -> Label {
        match self {
            Receiver::Qudit5 => "5".into(),
            Receiver::Qudit6 => "6".into(),
        }
    }

    /// The other qudit of the `(5, 6)` pair, handed to a sender.
    pub fn relay(self) -> Label {
        match self {
            Receiver::Qudit5 => "6".into(),
            Receiver::Qudit6 => "5".into(),
        }
    }
}

/// Who holds channel qudits 3, 4 and the relay qudit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    pub three: Party,
    pub four: Party,
    pub relay: Party,
    #[serde(default)]
    pub receiver: Receiver,
}

impl Assignment {
    pub fn new(three: Party, four: Party, relay: Party, receiver: Receiver) -> Result<Self> {
        let a = Assignment {
            three,
            four,
            relay,
            receiver,
        };
        a.validate()?;
        Ok(a)
    }

    /// 3 → Alice, 4 → Bob, relay → Charlie.
    pub fn fig1() -> Self {
        Assignment {
            three: Party::Alice,
            four: Party::Bob,
            relay: Party::Charlie,
            receiver: Receiver::Qudit5,
        }
    }

    /// 3 → Alice, 4 → Charlie, relay → Bob.
    pub fn fig2() -> Self {
        Assignment {
            three: Party::Alice,
            four: Party::Charlie,
            relay: Party::Bob,
            receiver: Receiver::Qudit5,
        }
    }

    /// 3 → Bob, 4 → Charlie, relay → Alice.
    pub fn fig3() -> Self {
        Assignment {
            three: Party::Bob,
            four: Party::Charlie,
            relay: Party::Alice,
            receiver: Receiver::Qudit5,
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "fig1" => Some(Self::fig1()),
            "fig2" => Some(Self::fig2()),
            "fig3" => Some(Self::fig3()),
            _ => None,
        }
    }

    pub fn with_receiver(self, receiver: Receiver) -> Self {
        Assignment { receiver, ..self }
    }

    /// All six bijections for one receiver choice.
    pub fn all(receiver: Receiver) -> Vec<Self> {
        use Party::*;
        let perms = [
            [Alice, Bob, Charlie],
            [Alice, Charlie, Bob],
            [Bob, Alice, Charlie],
            [Bob, Charlie, Alice],
            [Charlie, Alice, Bob],
            [Charlie, Bob, Alice],
        ];
        perms
            .iter()
            .map(|[a, b, c]| Assignment {
                three: *a,
                four: *b,
                relay: *c,
                receiver,
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let ps = [self.three, self.four, self.relay];
        if ps.contains(&Party::Diana) {
            return Err(RicError::InvalidAssignment(
                "Diana only keeps the receiving qudit".into(),
            ));
        }
        if ps[0] == ps[1] || ps[0] == ps[2] || ps[1] == ps[2] {
            return Err(RicError::InvalidAssignment(
                "each sender holds exactly one channel qudit".into(),
            ));
        }
        Ok(())
    }

    /// The channel qudit held by `party`.
    pub fn qudit_of(&self, party: Party) -> Option<Label> {
        if party == self.three {
            Some("3".into())
        } else if party == self.four {
            Some("4".into())
        } else if party == self.relay {
            Some(self.receiver.relay())
        } else {
            None
        }
    }

    /// Short name: the preset name, or the explicit mapping.
    pub fn name(&self) -> String {
        let suffix = match self.receiver {
            Receiver::Qudit5 => "",
            Receiver::Qudit6 => "@6",
        };
        for p in ["fig1", "fig2", "fig3"] {
            let a = Self::preset(p).expect("preset");
            if (a.three, a.four, a.relay) == (self.three, self.four, self.relay) {
                return format!("{p}{suffix}");
            }
        }
        format!(
            "3={},4={},{}={}{suffix}",
            self.three,
            self.four,
            self.receiver.relay(),
            self.relay
        )
    }

    /// Whether Alice holds qudit 3, the shape shared by the two working presets.
    pub fn alice_holds_three(&self) -> bool {
        self.three == Party::Alice
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub party: Party,
    pub pair: [Label; 2],
    pub outcome: WeylLabel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correction {
    pub qudit: Label,
    pub phase: C64,
    pub label: WeylLabel,
}

/// Record of one joint-outcome branch of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub branch: usize,
    pub assignment: Assignment,
    pub measurements: Vec<Measurement>,
    /// `(u', v')`.
    pub combined: WeylLabel,
    /// `(u'', v'')`.
    pub relay_outcome: WeylLabel,
    /// `(m''', n''')`.
    pub deduced: WeylLabel,
    pub correction: Correction,
    pub probability: f64,
    /// Diana's final fidelity with the target; `None` for impossible branches.
    pub fidelity: Option<f64>,
}

impl Transcript {
    pub fn outcome_of(&self, party: Party) -> Option<WeylLabel> {
        self.measurements
            .iter()
            .find(|m| m.party == party)
            .map(|m| m.outcome)
    }
}

/// Diana's deduction for a given triple of outcomes.
pub fn deduce(
    assignment: &Assignment,
    outcomes: &[(Party, WeylLabel)],
    offsets: (usize, usize),
    d: usize,
) -> Result<(WeylLabel, WeylLabel, WeylLabel)> {
    let of = |p: Party| {
        outcomes
            .iter()
            .find(|(q, _)| *q == p)
            .map(|(_, o)| *o)
            .ok_or_else(|| RicError::IncompleteTranscript(format!("missing outcome from {p}")))
    };
    let combined = of(assignment.four)?.add(of(assignment.three)?, d);
    let relay = of(assignment.relay)?;
    let (u, v) = offsets;
    let deduced = WeylLabel::new(
        relay.m as i64 + combined.m as i64 - u as i64,
        relay.n as i64 + combined.n as i64 - v as i64,
        d,
    );
    Ok((combined, relay, deduced))
}

/// The correction `ω^{−m'''n'''} U^{m''', −n'''}` for deduced `(m''', n''')`.
pub fn correction_for(deduced: WeylLabel, d: usize) -> (C64, WeylLabel) {
    weyl_adjoint(deduced, d)
}

/// Unnormalized post-measurement vectors of every joint outcome.
///
/// Leaf `(o_1, o_2, o_3)` sits at block `(o_1 d² + o_2) d² + o_3`; each block
/// is a `d × r` row-major matrix, Diana's qudit first and any untouched
/// purifying qudits after it.
pub(crate) struct Leaves {
    pub d: usize,
    /// Parties in measurement order.
    pub order: [Party; 3],
    pub pairs: [[Label; 2]; 3],
    pub cols: usize,
    pub data: Vec<C64>,
}

impl Leaves {
    pub fn count(&self) -> usize {
        self.d.pow(6)
    }

    pub fn block(&self, i: usize) -> &[C64] {
        let w = self.d * self.cols;
        &self.data[i * w..(i + 1) * w]
    }

    pub fn outcomes(&self, i: usize) -> [WeylLabel; 3] {
        let dd = self.d * self.d;
        [
            WeylLabel::from_index(i / (dd * dd), self.d),
            WeylLabel::from_index((i / dd) % dd, self.d),
            WeylLabel::from_index(i % dd, self.d),
        ]
    }

    pub fn probability(&self, i: usize) -> f64 {
        self.block(i).iter().map(|x| x.norm_sqr()).sum()
    }

    /// Fidelity of Diana's state on branch `i` with `target` after applying `op`.
    pub fn fidelity(&self, i: usize, op: &nalgebra::DMatrix<C64>, target: &[C64]) -> f64 {
        let d = self.d;
        let b = self.block(i);
        let p = self.probability(i);
        // row vector t† op, then contract with each column of the block
        let row: Vec<C64> = (0..d)
            .map(|k| (0..d).map(|r| target[r].conj() * op[(r, k)]).sum())
            .collect();
        let mut acc = 0.0;
        for c in 0..self.cols {
            let amp: C64 = (0..d).map(|k| row[k] * b[k * self.cols + c]).sum();
            acc += amp.norm_sqr();
        }
        acc / p
    }
}

/// Applies `⟨B^{m,n}|` to the leading pair index of a row-major `(d², k)` array.
fn bell_row(input: &[C64], outcome: usize, d: usize, k: usize, w: &[C64], out: &mut [C64]) {
    let (m, n) = (outcome / d, outcome % d);
    let s = 1.0 / (d as f64).sqrt();
    out.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
    for j in 0..d {
        let coef = w[(d - (j * m) % d) % d] * s;
        let src = &input[(j * d + (j + n) % d) * k..][..k];
        for (o, x) in out.iter_mut().zip(src) {
            *o += coef * x;
        }
    }
}

pub(crate) fn compute_leaves(
    clone: &PureState,
    channel: &Channel,
    assignment: &Assignment,
    order: [Party; 3],
    exec: Execution,
) -> Result<Leaves> {
    assignment.validate()?;
    let d = channel.dim();
    if clone.dim() != d {
        return Err(RicError::DimensionMismatch(d, clone.dim()));
    }
    let clone_labels = labels(&[CLONE_1, CLONE_2, ANCILLA]);
    if !clone.register().same_set(&clone_labels) {
        return Err(RicError::LabelMismatch);
    }
    let engine = channel.engine_state();
    let global = clone.tensor(engine)?;
    let mut pairs: Vec<[Label; 2]> = Vec::with_capacity(3);
    for p in order {
        let q = assignment
            .qudit_of(p)
            .ok_or_else(|| RicError::InvalidAssignment(format!("{p} holds no qudit")))?;
        pairs.push(p.measured_pair(&q)?);
    }
    let kept = assignment.receiver.kept();
    let mut full: Vec<Label> = pairs.iter().flatten().cloned().collect();
    full.push(kept.clone());
    let extra: Vec<Label> = engine
        .labels()
        .iter()
        .filter(|l| !full.contains(l))
        .cloned()
        .collect();
    full.extend(extra.iter().cloned());
    let arranged = global.permute(&full)?;
    let amps = arranged.amplitudes();

    let dd = d * d;
    let cols = d.pow(extra.len() as u32);
    let leaf = d * cols;
    let k1 = dd * dd * leaf;
    let k2 = dd * leaf;
    let w = omega_table(d);
    let chunks = exec.map_range(dd, |o1| {
        let mut s1 = vec![C64::new(0.0, 0.0); k1];
        bell_row(amps, o1, d, k1, &w, &mut s1);
        let mut out = vec![C64::new(0.0, 0.0); dd * dd * leaf];
        let mut s2 = vec![C64::new(0.0, 0.0); k2];
        for o2 in 0..dd {
            bell_row(&s1, o2, d, k2, &w, &mut s2);
            for o3 in 0..dd {
                let dst = &mut out[(o2 * dd + o3) * leaf..][..leaf];
                bell_row(&s2, o3, d, leaf, &w, dst);
            }
        }
        out
    });
    let pairs: [[Label; 2]; 3] = pairs.try_into().expect("three pairs");
    Ok(Leaves {
        d,
        order,
        pairs,
        cols,
        data: chunks.concat(),
    })
}

fn transcript_for(
    leaves: &Leaves,
    i: usize,
    assignment: &Assignment,
    offsets: (usize, usize),
    target: &[C64],
) -> Result<Transcript> {
    let d = leaves.d;
    let outs = leaves.outcomes(i);
    let mut measurements: Vec<Measurement> = (0..3)
        .map(|k| Measurement {
            party: leaves.order[k],
            pair: leaves.pairs[k].clone(),
            outcome: outs[k],
        })
        .collect();
    measurements.sort_by_key(|m| m.party);
    let tagged: Vec<(Party, WeylLabel)> =
        measurements.iter().map(|m| (m.party, m.outcome)).collect();
    let (combined, relay_outcome, deduced) = deduce(assignment, &tagged, offsets, d)?;
    let (phase, label) = correction_for(deduced, d);
    let probability = leaves.probability(i);
    let fidelity = (probability > ZERO_PROBABILITY)
        .then(|| leaves.fidelity(i, &(weyl(label, d) * phase), target));
    Ok(Transcript {
        branch: canonical_branch(&measurements, d),
        assignment: *assignment,
        measurements,
        combined,
        relay_outcome,
        deduced,
        correction: Correction {
            qudit: assignment.receiver.kept(),
            phase,
            label,
        },
        probability,
        fidelity,
    })
}

/// Branch index with outcomes ordered Alice, Bob, Charlie.
fn canonical_branch(sorted: &[Measurement], d: usize) -> usize {
    sorted
        .iter()
        .fold(0, |acc, m| acc * d * d + m.outcome.index(d))
}

/// Result of one protocol run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RicRun {
    pub d: usize,
    pub mode: Mode,
    pub transcripts: Vec<Transcript>,
}

impl RicRun {
    /// Sum of branch probabilities (enumeration only).
    pub fn total_probability(&self) -> f64 {
        self.transcripts.iter().map(|t| t.probability).sum()
    }

    pub fn possible(&self) -> impl Iterator<Item = &Transcript> {
        self.transcripts.iter().filter(|t| t.fidelity.is_some())
    }

    pub fn min_fidelity(&self) -> f64 {
        self.possible()
            .filter_map(|t| t.fidelity)
            .fold(1.0, f64::min)
    }

    /// Probability-weighted mean when enumerating, plain mean when sampling.
    pub fn mean_fidelity(&self) -> f64 {
        match self.mode {
            Mode::Enumerate => {
                let total: f64 = self.possible().map(|t| t.probability).sum();
                self.possible()
                    .map(|t| t.probability * t.fidelity.unwrap_or(0.0))
                    .sum::<f64>()
                    / total
            }
            Mode::Sample { .. } => {
                let n = self.possible().count().max(1) as f64;
                self.possible().filter_map(|t| t.fidelity).sum::<f64>() / n
            }
        }
    }
}

/// Runs the concentration protocol on `clone` (a state on `1, 2, a`),
/// scoring Diana's corrected qudit against `target`.
pub fn run_ric(
    clone: &PureState,
    target: &PureState,
    channel: &Channel,
    assignment: &Assignment,
    mode: &Mode,
    exec: Execution,
) -> Result<RicRun> {
    run_ric_ordered(
        clone,
        target,
        channel,
        assignment,
        mode,
        Party::SENDERS,
        exec,
    )
}

/// As [`run_ric`], with an explicit order for the three measurements.
pub fn run_ric_ordered(
    clone: &PureState,
    target: &PureState,
    channel: &Channel,
    assignment: &Assignment,
    mode: &Mode,
    order: [Party; 3],
    exec: Execution,
) -> Result<RicRun> {
    let d = channel.dim();
    if target.labels().len() != 1 || target.dim() != d {
        return Err(RicError::InvalidConfig(
            "target must be a single qudit of the channel dimension".into(),
        ));
    }
    let leaves = compute_leaves(clone, channel, assignment, order, exec)?;
    let offsets = channel.spec().offsets();
    let indices: Vec<usize> = match mode {
        Mode::Enumerate => (0..leaves.count()).collect(),
        Mode::Sample { samples, seed } => {
            let weights: Vec<f64> = (0..leaves.count()).map(|i| leaves.probability(i)).collect();
            sample_indices(&weights, *samples, *seed)?
        }
    };
    let mut transcripts = exec
        .map(&indices, |&i| {
            transcript_for(&leaves, i, assignment, offsets, target.amplitudes())
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    if *mode == Mode::Enumerate {
        transcripts.sort_by_key(|t| t.branch);
    }
    Ok(RicRun {
        d,
        mode: mode.clone(),
        transcripts,
    })
}

/// Verdict of the correction search for one joint outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchVerdict {
    pub branch: usize,
    /// The Weyl label that restores every test input, if any.
    pub correction: Option<WeylLabel>,
    /// Whether the found label agrees with Diana's deduction rule.
    pub matches_rule: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorrectionSearch {
    pub assignment: Assignment,
    pub verdicts: Vec<BranchVerdict>,
}

impl CorrectionSearch {
    pub fn all_correctable(&self) -> bool {
        self.verdicts.iter().all(|v| v.correction.is_some())
    }

    pub fn uncorrectable(&self) -> usize {
        self.verdicts
            .iter()
            .filter(|v| v.correction.is_none())
            .count()
    }
}

/// For each joint outcome, searches all `d²` Weyl operators for one that maps
/// Diana's conditional state to the input for every test input at once.
///
/// Outcomes impossible for every input are skipped; an input for which an
/// outcome is impossible imposes no constraint on it.
pub fn correction_search(
    inputs: &[PureState],
    params: &CloningParams,
    channel: &Channel,
    assignment: &Assignment,
    exec: Execution,
) -> Result<CorrectionSearch> {
    let d = channel.dim();
    let per_input: Vec<Leaves> = inputs
        .iter()
        .map(|phi| {
            compute_leaves(
                &telecloning::clone_state(phi, params)?,
                channel,
                assignment,
                Party::SENDERS,
                exec,
            )
        })
        .collect::<Result<_>>()?;
    let ops: Vec<(WeylLabel, nalgebra::DMatrix<C64>)> =
        all_labels(d).map(|l| (l, weyl(l, d))).collect();
    let offsets = channel.spec().offsets();
    let count = d.pow(6);
    let verdicts = exec.map_range(count, |i| -> Result<Option<BranchVerdict>> {
        let live: Vec<usize> = (0..inputs.len())
            .filter(|&k| per_input[k].probability(i) > ZERO_PROBABILITY)
            .collect();
        if live.is_empty() {
            return Ok(None);
        }
        let correction = ops
            .iter()
            .find(|(_, op)| {
                live.iter().all(|&k| {
                    per_input[k].fidelity(i, op, inputs[k].amplitudes()) > 1.0 - SEARCH_TOL
                })
            })
            .map(|(l, _)| *l);
        let outs = per_input[0].outcomes(i);
        let tagged: Vec<(Party, WeylLabel)> = Party::SENDERS.iter().copied().zip(outs).collect();
        let (_, _, deduced) = deduce(assignment, &tagged, offsets, d)?;
        let rule = correction_for(deduced, d).1;
        Ok(Some(BranchVerdict {
            branch: i,
            correction,
            matches_rule: correction == Some(rule),
        }))
    });
    let verdicts = verdicts
        .into_iter()
        .filter_map(|v| v.transpose())
        .collect::<Result<Vec<_>>>()?;
    Ok(CorrectionSearch {
        assignment: *assignment,
        verdicts,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistributionVerdict {
    pub assignment: Assignment,
    pub name: String,
    pub works: bool,
    pub uncorrectable_branches: usize,
    pub rule_exact: bool,
}

/// Runs the correction search for all six assignments.
pub fn search_distributions(
    inputs: &[PureState],
    params: &CloningParams,
    channel: &Channel,
    receiver: Receiver,
    exec: Execution,
) -> Result<Vec<DistributionVerdict>> {
    Assignment::all(receiver)
        .iter()
        .map(|a| {
            let s = correction_search(inputs, params, channel, a, exec)?;
            Ok(DistributionVerdict {
                assignment: *a,
                name: a.name(),
                works: s.all_correctable(),
                uncorrectable_branches: s.uncorrectable(),
                rule_exact: s.verdicts.iter().all(|v| v.matches_rule),
            })
        })
        .collect()
}

/// Summary of telecloning followed by concentration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EndToEnd {
    pub distributor_branches: usize,
    pub ric_branches: usize,
    pub total_probability: f64,
    pub min_fidelity: f64,
    pub mean_fidelity: f64,
    pub distributor_min_fidelity: f64,
    /// Per distributor outcome, the concentration run on the corrected clones.
    pub runs: Vec<(WeylLabel, f64, RicRun)>,
}

/// Distributes `phi` with the telecloning machine, then concentrates the
/// clones on every distributor branch.
pub fn end_to_end(
    phi: &PureState,
    params: &CloningParams,
    channel: &Channel,
    assignment: &Assignment,
    mode: &Mode,
    exec: Execution,
) -> Result<EndToEnd> {
    let dist = telecloning::distribute(phi, params, &Mode::Enumerate)?;
    let mut runs = Vec::with_capacity(dist.len());
    for (k, b) in dist.iter().enumerate() {
        let sub_mode = match mode {
            Mode::Enumerate => Mode::Enumerate,
            Mode::Sample { samples, seed } => {
                // split the sample budget across distributor outcomes by probability
                let n = (*samples as f64 * b.probability).round().max(1.0) as usize;
                Mode::Sample {
                    samples: n,
                    seed: seed.wrapping_add(k as u64),
                }
            }
        };
        let run = run_ric(&b.state, phi, channel, assignment, &sub_mode, exec)?;
        runs.push((b.outcome, b.probability, run));
    }
    let ric_branches = runs.iter().map(|(_, _, r)| r.transcripts.len()).sum();
    let min_fidelity = runs
        .iter()
        .map(|(_, _, r)| r.min_fidelity())
        .fold(1.0, f64::min);
    let total_probability = runs.iter().map(|(_, p, r)| p * r.total_probability()).sum();
    let mean_fidelity = runs
        .iter()
        .map(|(_, p, r)| p * r.mean_fidelity())
        .sum::<f64>()
        / runs.iter().map(|(_, p, _)| p).sum::<f64>();
    let distributor_min_fidelity = dist.iter().map(|b| b.fidelity).fold(1.0, f64::min);
    Ok(EndToEnd {
        distributor_branches: dist.len(),
        ric_branches,
        total_probability,
        min_fidelity,
        mean_fidelity,
        distributor_min_fidelity,
        runs,
    })
}

/// The two joins that unlock the bound state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Join {
    ThreeFour,
    ThreeSix,
}

impl Join {
    pub fn parse(a: &str, b: &str) -> Result<Self> {
        match (a, b) {
            ("3", "4") | ("4", "3") => Ok(Join::ThreeFour),
            ("3", "6") | ("6", "3") => Ok(Join::ThreeSix),
            _ => Err(RicError::JoinNotAllowed(a.into(), b.into())),
        }
    }

    pub fn joined(self) -> [Label; 2] {
        match self {
            Join::ThreeFour => ["3".into(), "4".into()],
            Join::ThreeSix => ["3".into(), "6".into()],
        }
    }

    pub fn remaining(self) -> [Label; 2] {
        match self {
            Join::ThreeFour => ["5".into(), "6".into()],
            Join::ThreeSix => ["4".into(), "5".into()],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UnlockOutcome {
    pub outcome: WeylLabel,
    pub probability: f64,
    pub largest_eigenvalue: f64,
    pub marginal_entropy_bits: f64,
    /// The Bell state the remaining pair is left in, when it is one.
    pub bell_state: Option<WeylLabel>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UnlockReport {
    pub join: Join,
    pub remaining: [Label; 2],
    pub outcomes: Vec<UnlockOutcome>,
}

/// Bell measurement on the joined pair; reports the remaining pair's state.
pub fn unlock_bound(rho: &DensityOperator, join: Join) -> Result<UnlockReport> {
    let d = rho.dim();
    let pair = join.joined();
    let rest = join.remaining();
    let mut outcomes = Vec::new();
    for l in all_labels(d) {
        let pr = rho.project(&pair, &bell(l, d, pair[0].clone(), pair[1].clone())?)?;
        let Some(state) = pr.state else {
            outcomes.push(UnlockOutcome {
                outcome: l,
                probability: pr.probability,
                largest_eigenvalue: 0.0,
                marginal_entropy_bits: 0.0,
                bell_state: None,
            });
            continue;
        };
        let state = state.aligned_to(&rest)?;
        let largest_eigenvalue = state.largest_eigenvalue();
        let marginal_entropy_bits = state.partial_trace(&rest[..1])?.entropy_bits();
        let bell_state = all_labels(d).find(|b| {
            bell(*b, d, rest[0].clone(), rest[1].clone())
                .and_then(|s| state.fidelity(&s))
                .is_ok_and(|f| f > 1.0 - 1e-10)
        });
        outcomes.push(UnlockOutcome {
            outcome: l,
            probability: pr.probability,
            largest_eigenvalue,
            marginal_entropy_bits,
            bell_state,
        });
    }
    Ok(UnlockReport {
        join,
        remaining: rest,
        outcomes,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalMessage {
    pub sender: Party,
    pub payload: WeylLabel,
    /// Bits on the wire: the smallest `b` with `2^b ≥ d²`.
    pub bits: u32,
}

/// Bits needed for one outcome `(m, n)`.
pub fn bits_per_message(d: usize) -> u32 {
    let symbols = (d * d) as u64;
    64 - (symbols - 1).leading_zeros()
}

/// The three messages Diana receives on a branch.
pub fn message_log(transcript: &Transcript, d: usize) -> Result<Vec<ClassicalMessage>> {
    if transcript.measurements.len() != 3 {
        return Err(RicError::IncompleteTranscript(format!(
            "{} measurements",
            transcript.measurements.len()
        )));
    }
    Party::SENDERS
        .iter()
        .map(|&p| {
            let payload = transcript
                .outcome_of(p)
                .ok_or_else(|| RicError::IncompleteTranscript(format!("no outcome from {p}")))?;
            Ok(ClassicalMessage {
                sender: p,
                payload,
                bits: bits_per_message(d),
            })
        })
        .collect()
}

/// Mixed-channel weight table paired with its per-term pure channels.
pub fn double_bell_terms(spec: &ChannelSpec, d: usize) -> Option<Vec<(f64, ChannelSpec)>> {
    let w = spec.weights(d)?;
    let (u, v) = spec.offsets();
    Some(
        all_labels(d)
            .filter(|l| w[l.m][l.n] > 0.0)
            .map(|l| {
                (
                    w[l.m][l.n],
                    ChannelSpec::DoubleBell {
                        m: l.m,
                        n: l.n,
                        u,
                        v,
                    },
                )
            })
            .collect(),
    )
}
