//! Universal 1→2 telecloning of a qudit.
//!
//! The distributor holds the input on `t` and port `t'` of the four-qudit
//! channel `(t', 1, 2, a)`. Qudits 1 and 2 carry the clones (Bob and
//! Charlie), `a` is Alice's ancilla.

use serde::{Deserialize, Serialize};

use crate::protocol::Mode;
use crate::tensor::{labels, Label, PureState, Register};
use crate::weyl::{all_labels, bell, weyl, WeylLabel};
use crate::{Result, RicError, C64};

pub const INPUT: &str = "t";
pub const PORT: &str = "t'";
pub const CLONE_1: &str = "1";
pub const CLONE_2: &str = "2";
pub const ANCILLA: &str = "a";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloningParams {
    pub d: usize,
    pub p: f64,
    pub q: f64,
    /// `1/√(1+(d−1)(p²+q²))`.
    pub normalizer: f64,
}

impl CloningParams {
    pub fn new(d: usize, p: f64) -> Result<Self> {
        Self::with_pq(d, p, 1.0 - p)
    }

    pub fn with_pq(d: usize, p: f64, q: f64) -> Result<Self> {
        if d < 2 {
            return Err(RicError::InvalidDimension(d));
        }
        if d > crate::MAX_DIM {
            return Err(RicError::DimensionTooLarge(d));
        }
        if !(0.0..=1.0).contains(&p) || (p + q - 1.0).abs() > 1e-12 {
            return Err(RicError::InvalidParams(format!(
                "need 0 <= p <= 1 and p + q = 1, got p={p}, q={q}"
            )));
        }
        let normalizer = 1.0 / (1.0 + (d as f64 - 1.0) * (p * p + q * q)).sqrt();
        Ok(CloningParams {
            d,
            p,
            q,
            normalizer,
        })
    }

    pub fn symmetric(d: usize) -> Result<Self> {
        Self::new(d, 0.5)
    }

    /// The same machine with the roles of the two clones exchanged.
    pub fn swapped(&self) -> Self {
        CloningParams {
            p: self.q,
            q: self.p,
            ..*self
        }
    }

    pub fn coefficients(&self) -> CloneCoefficients {
        let d = self.d as f64;
        let s = d.sqrt();
        let big_q = self.normalizer;
        CloneCoefficients {
            alpha: big_q * (1.0 + (d - 1.0) * self.p) / s,
            beta: big_q * (1.0 - self.p) / s,
            gamma: big_q * self.q / s,
        }
    }
}

/// Bell-pair expansion weights of the clone state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloneCoefficients {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl CloneCoefficients {
    /// `α² + (d−1)β² + d(d−1)γ²`, which is 1 for valid parameters.
    pub fn weight(&self, d: usize) -> f64 {
        let d = d as f64;
        self.alpha.powi(2) + (d - 1.0) * self.beta.powi(2) + d * (d - 1.0) * self.gamma.powi(2)
    }

    /// The `d×d` table these weights predict: `(0,0) → α`, `(m≥1, 0) → β`, `n≥1 → γ`.
    pub fn table(&self, d: usize) -> Vec<Vec<f64>> {
        (0..d)
            .map(|m| {
                (0..d)
                    .map(|n| match (m, n) {
                        (0, 0) => self.alpha,
                        (_, 0) => self.beta,
                        _ => self.gamma,
                    })
                    .collect()
            })
            .collect()
    }
}

/// Amplitudes of `|φ_j⟩` over `(1, 2, a)`, added into `out` with weight `w`.
fn add_phi_j(out: &mut [C64], params: &CloningParams, j: usize, w: C64) {
    let d = params.d;
    let big_q = params.normalizer;
    let idx = |x: usize, y: usize, z: usize| (x * d + y) * d + z;
    out[idx(j, j, j)] += w * big_q;
    for r in 1..d {
        let jr = (j + r) % d;
        out[idx(j, jr, jr)] += w * (big_q * params.p);
        out[idx(jr, j, jr)] += w * (big_q * params.q);
    }
}

/// `(1/√d) Σ_j |j⟩_{t'} |φ_j⟩_{12a}`.
pub fn telecloning_channel(params: &CloningParams) -> Result<PureState> {
    let d = params.d;
    let mut amps = vec![C64::new(0.0, 0.0); d.pow(4)];
    let s = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    for j in 0..d {
        add_phi_j(&mut amps[j * d * d * d..(j + 1) * d * d * d], params, j, s);
    }
    PureState::new(labels(&[PORT, CLONE_1, CLONE_2, ANCILLA]), d, amps)
}

fn check_input(phi: &PureState, d: usize) -> Result<()> {
    if phi.labels().len() != 1 {
        return Err(RicError::InvalidConfig(
            "input must be a single qudit".into(),
        ));
    }
    if phi.dim() != d {
        return Err(RicError::DimensionMismatch(d, phi.dim()));
    }
    Ok(())
}

/// `Σ_j x_j |φ_j⟩` on `(1, 2, a)`.
pub fn clone_state(phi: &PureState, params: &CloningParams) -> Result<PureState> {
    check_input(phi, params.d)?;
    let mut amps = vec![C64::new(0.0, 0.0); params.d.pow(3)];
    for (j, &x) in phi.amplitudes().iter().enumerate() {
        add_phi_j(&mut amps, params, j, x);
    }
    PureState::new(labels(&[CLONE_1, CLONE_2, ANCILLA]), params.d, amps)
}

/// Fidelity of a one-qudit reduced state with `phi`, ignoring labels.
pub(crate) fn single_qudit_fidelity(
    rho: &crate::tensor::DensityOperator,
    phi: &PureState,
) -> Result<f64> {
    let target = PureState::from_parts(rho.register().clone(), phi.amplitudes().to_vec());
    rho.fidelity(&target)
}

/// Fidelities of the two clones (qudits 1 and 2) with the input.
pub fn clone_fidelities(phi: &PureState, params: &CloningParams) -> Result<(f64, f64)> {
    let psi = clone_state(phi, params)?;
    let f1 = single_qudit_fidelity(&psi.reduced(&[CLONE_1.into()])?, phi)?;
    let f2 = single_qudit_fidelity(&psi.reduced(&[CLONE_2.into()])?, phi)?;
    Ok((f1, f2))
}

/// Local corrections for distributor outcome `(m, n)`:
/// `U^{m,-n}` on both clones and `U^{-m,-n}` on the ancilla.
pub fn distributor_corrections(outcome: WeylLabel, d: usize) -> [(Label, WeylLabel); 3] {
    let (m, n) = (outcome.m as i64, outcome.n as i64);
    [
        (CLONE_1.into(), WeylLabel::new(m, -n, d)),
        (CLONE_2.into(), WeylLabel::new(m, -n, d)),
        (ANCILLA.into(), WeylLabel::new(-m, -n, d)),
    ]
}

#[derive(Clone, Debug)]
pub struct DistributionBranch {
    pub outcome: WeylLabel,
    pub probability: f64,
    pub corrections: [(Label, WeylLabel); 3],
    /// Corrected state on `(1, 2, a)`.
    pub state: PureState,
    /// Overlap with the ideal clone state (phase-insensitive).
    pub fidelity: f64,
}

/// Uncorrected post-measurement states on `(1, 2, a)` for every outcome.
fn distributor_branches(
    phi: &PureState,
    params: &CloningParams,
) -> Result<Vec<(WeylLabel, f64, Option<PureState>)>> {
    check_input(phi, params.d)?;
    let d = params.d;
    let input = PureState::from_parts(
        Register::new(vec![INPUT.into()], d)?,
        phi.amplitudes().to_vec(),
    );
    let global = input.tensor(&telecloning_channel(params)?)?;
    let pair = labels(&[INPUT, PORT]);
    all_labels(d)
        .map(|l| {
            let pr = global.project(&pair, &bell(l, d, INPUT, PORT)?)?;
            Ok((l, pr.probability, pr.state))
        })
        .collect()
}

fn apply_all(state: &PureState, ops: &[(Label, WeylLabel)], d: usize) -> Result<PureState> {
    ops.iter()
        .try_fold(state.clone(), |s, (l, w)| s.apply_local(l, &weyl(*w, d)))
}

/// Runs the distribution step: a Bell measurement on `(t, t')` followed by
/// the local corrections. Enumeration returns every outcome once; sampling
/// draws outcomes by their Born weights.
pub fn distribute(
    phi: &PureState,
    params: &CloningParams,
    mode: &Mode,
) -> Result<Vec<DistributionBranch>> {
    let d = params.d;
    let ideal = clone_state(phi, params)?;
    let mut all = Vec::with_capacity(d * d);
    for (outcome, probability, state) in distributor_branches(phi, params)? {
        let Some(state) = state else { continue };
        let corrections = distributor_corrections(outcome, d);
        let state = apply_all(&state, &corrections, d)?;
        let fidelity = ideal.fidelity(&state)?;
        all.push(DistributionBranch {
            outcome,
            probability,
            corrections,
            state,
            fidelity,
        });
    }
    match mode {
        Mode::Enumerate => Ok(all),
        Mode::Sample { samples, seed } => {
            let weights: Vec<f64> = all.iter().map(|b| b.probability).collect();
            let picks = crate::protocol::sample_indices(&weights, *samples, *seed)?;
            Ok(picks.into_iter().map(|i| all[i].clone()).collect())
        }
    }
}

/// Every correction triple (on 1, 2, a) that restores the ideal clone state
/// for all `inputs`, per distributor outcome.
pub fn distributor_correction_search(
    params: &CloningParams,
    inputs: &[PureState],
) -> Result<Vec<(WeylLabel, Vec<[WeylLabel; 3]>)>> {
    let d = params.d;
    let per_input: Vec<_> = inputs
        .iter()
        .map(|phi| {
            Ok((
                clone_state(phi, params)?,
                distributor_branches(phi, params)?,
            ))
        })
        .collect::<Result<_>>()?;
    let ops: Vec<WeylLabel> = all_labels(d).collect();
    let names = [CLONE_1, CLONE_2, ANCILLA].map(Label::from);
    let mut out = Vec::new();
    for (k, outcome) in all_labels(d).enumerate() {
        let mut found = Vec::new();
        for &a in &ops {
            for &b in &ops {
                for &c in &ops {
                    let triple = [
                        (names[0].clone(), a),
                        (names[1].clone(), b),
                        (names[2].clone(), c),
                    ];
                    let mut ok = true;
                    for (ideal, branches) in &per_input {
                        let Some(state) = &branches[k].2 else {
                            continue;
                        };
                        if ideal.fidelity(&apply_all(state, &triple, d)?)? < 1.0 - 1e-9 {
                            ok = false;
                            break;
                        }
                    }
                    if ok {
                        found.push([a, b, c]);
                    }
                }
            }
        }
        out.push((outcome, found));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionPair {
    /// Bell basis on `(1, a)`, remainder on 2.
    OneA,
    /// Bell basis on `(2, a)`, remainder on 1.
    TwoA,
}

impl ExpansionPair {
    fn labels(self) -> (Vec<Label>, &'static str) {
        match self {
            ExpansionPair::OneA => (labels(&[CLONE_1, ANCILLA]), CLONE_2),
            ExpansionPair::TwoA => (labels(&[CLONE_2, ANCILLA]), CLONE_1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// Matches the weights computed from `(p, q)`.
    AsPrinted,
    /// Matches the weights computed from `(q, p)`.
    Swapped,
    /// Both hold (the symmetric machine).
    Both,
    Neither,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub pair: ExpansionPair,
    /// Coefficient `c_{mn}` of `|B^{m,n}⟩ ⊗ U^{-m,n}|φ⟩`, row `m`.
    pub table: Vec<Vec<C64>>,
    /// Largest norm of the part of each Bell component not along `U^{-m,n}|φ⟩`.
    pub shape_residual: f64,
    pub residual_as_printed: f64,
    pub residual_swapped: f64,
    pub convention: Convention,
}

/// Expands the clone state over the Bell basis of `pair` and compares the
/// weights against those predicted by `(p, q)` and by `(q, p)`.
pub fn expansion_check(
    params: &CloningParams,
    pair: ExpansionPair,
    phi: &PureState,
) -> Result<ExpansionReport> {
    let d = params.d;
    let psi = clone_state(phi, params)?;
    let (bell_pair, _) = pair.labels();
    let mut table = vec![vec![C64::new(0.0, 0.0); d]; d];
    let mut shape_residual = 0.0f64;
    for l in all_labels(d) {
        let chi = psi.contract(
            &bell_pair,
            &bell(l, d, bell_pair[0].clone(), bell_pair[1].clone())?,
        )?;
        let rotated = weyl(WeylLabel::new(-(l.m as i64), l.n as i64, d), d)
            * nalgebra::DVector::from_column_slice(phi.amplitudes());
        let c: C64 = rotated
            .iter()
            .zip(chi.amplitudes())
            .map(|(r, x)| r.conj() * x)
            .sum();
        let off: f64 = rotated
            .iter()
            .zip(chi.amplitudes())
            .map(|(r, x)| (x - c * r).norm_sqr())
            .sum::<f64>()
            .sqrt();
        shape_residual = shape_residual.max(off);
        table[l.m][l.n] = c;
    }
    let diff = |pred: Vec<Vec<f64>>| {
        let mut worst = 0.0f64;
        for m in 0..d {
            for n in 0..d {
                worst = worst.max((table[m][n] - C64::new(pred[m][n], 0.0)).norm());
            }
        }
        worst
    };
    let residual_as_printed = diff(params.coefficients().table(d));
    let residual_swapped = diff(params.swapped().coefficients().table(d));
    let tol = 1e-10;
    let convention = match (residual_as_printed < tol, residual_swapped < tol) {
        (true, true) => Convention::Both,
        (true, false) => Convention::AsPrinted,
        (false, true) => Convention::Swapped,
        (false, false) => Convention::Neither,
    };
    Ok(ExpansionReport {
        pair,
        table,
        shape_residual,
        residual_as_printed,
        residual_swapped,
        convention,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InequalityReport {
    /// Row per input, column per outcome index `m·d+n` of the Bell measurement on `(1, 2)`.
    pub probabilities: Vec<Vec<f64>>,
    /// Largest spread of one outcome's probability across the inputs.
    pub max_variation: f64,
}

/// Outcome probabilities of a Bell measurement on the two clones, per input.
/// If the clone state had a Bell-pair expansion on `(1, 2)` with the input
/// rotated onto `a`, these would not depend on the input.
pub fn inequality_witness(
    params: &CloningParams,
    inputs: &[PureState],
) -> Result<InequalityReport> {
    if inputs.len() < 2 {
        return Err(RicError::InvalidConfig("need at least two inputs".into()));
    }
    let d = params.d;
    let pair = labels(&[CLONE_1, CLONE_2]);
    let probabilities: Vec<Vec<f64>> = inputs
        .iter()
        .map(|phi| {
            let psi = clone_state(phi, params)?;
            all_labels(d)
                .map(|l| {
                    Ok(psi
                        .project(&pair, &bell(l, d, CLONE_1, CLONE_2)?)?
                        .probability)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let max_variation = (0..d * d)
        .map(|k| {
            let col = probabilities.iter().map(|row| row[k]);
            col.clone().fold(f64::MIN, f64::max) - col.fold(f64::MAX, f64::min)
        })
        .fold(0.0, f64::max);
    Ok(InequalityReport {
        probabilities,
        max_variation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::haar_inputs;
    use approx::assert_abs_diff_eq;

    #[test]
    fn parameter_validation() {
        assert!(matches!(
            CloningParams::new(8, 0.5),
            Err(RicError::DimensionTooLarge(8))
        ));
        assert!(matches!(
            CloningParams::new(1, 0.5),
            Err(RicError::InvalidDimension(1))
        ));
        assert!(CloningParams::new(3, 1.5).is_err());
        assert!(CloningParams::with_pq(3, 0.5, 0.4).is_err());
        let p = CloningParams::new(3, 0.8).unwrap();
        assert_abs_diff_eq!(
            p.normalizer,
            1.0 / (1.0 + 2.0 * (0.64 + 0.04f64)).sqrt(),
            epsilon = 1e-15
        );
        assert_eq!(p.swapped().p, p.q);
    }

    #[test]
    fn expansion_weights_are_normalized() {
        for d in 2..=7 {
            for p in [0.0, 0.2, 0.5, 0.9, 1.0] {
                let params = CloningParams::new(d, p).unwrap();
                assert_abs_diff_eq!(params.coefficients().weight(d), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn asymmetric_fidelities_match_independent_oracle() {
        // reduced-state fidelities computed independently with numpy einsum
        let cases = [
            (2, 0.3, 0.6898734177215189, 0.9430379746835442),
            (3, 0.8, 0.9661016949152541, 0.45762711864406774),
            (4, 0.25, 0.4130434782608695, 0.9347826086956521),
        ];
        for (d, p, f1, f2) in cases {
            let params = CloningParams::new(d, p).unwrap();
            for phi in haar_inputs(17, d, 6).unwrap() {
                let (a, b) = clone_fidelities(&phi, &params).unwrap();
                assert_abs_diff_eq!(a, f1, epsilon = 1e-10);
                assert_abs_diff_eq!(b, f2, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn channel_and_clone_state_are_normalized() {
        for d in [2, 3, 5] {
            let params = CloningParams::new(d, 0.7).unwrap();
            assert_abs_diff_eq!(
                telecloning_channel(&params).unwrap().norm_sqr(),
                1.0,
                epsilon = 1e-12
            );
            let phi = &haar_inputs(1, d, 1).unwrap()[0];
            assert_abs_diff_eq!(
                clone_state(phi, &params).unwrap().norm_sqr(),
                1.0,
                epsilon = 1e-12
            );
        }
        let params = CloningParams::symmetric(3).unwrap();
        let wrong = &haar_inputs(1, 2, 1).unwrap()[0];
        assert!(matches!(
            clone_state(wrong, &params),
            Err(RicError::DimensionMismatch(3, 2))
        ));
    }

    #[test]
    fn distribution_is_deterministic() {
        for d in [2, 3, 4] {
            let params = CloningParams::new(d, 0.35).unwrap();
            for phi in haar_inputs(9, d, 3).unwrap() {
                let branches = distribute(&phi, &params, &Mode::Enumerate).unwrap();
                assert_eq!(branches.len(), d * d);
                for b in &branches {
                    assert_abs_diff_eq!(b.probability, 1.0 / (d * d) as f64, epsilon = 1e-12);
                    assert_abs_diff_eq!(b.fidelity, 1.0, epsilon = 1e-10);
                }
            }
        }
        let phi = &haar_inputs(2, 3, 1).unwrap()[0];
        let sampled = distribute(
            phi,
            &CloningParams::symmetric(3).unwrap(),
            &Mode::Sample {
                samples: 25,
                seed: 4,
            },
        )
        .unwrap();
        assert_eq!(sampled.len(), 25);
    }

    #[test]
    fn correction_search_finds_exactly_the_rule() {
        for d in [2, 3] {
            let params = CloningParams::new(d, 0.6).unwrap();
            let inputs = haar_inputs(12, d, 3).unwrap();
            for (outcome, found) in distributor_correction_search(&params, &inputs).unwrap() {
                let rule = distributor_corrections(outcome, d).map(|(_, w)| w);
                assert_eq!(found, vec![rule], "d={d} outcome {outcome}");
            }
        }
    }

    #[test]
    fn expansion_conventions() {
        let phi = &haar_inputs(3, 3, 1).unwrap()[0];
        let asym = CloningParams::new(3, 0.8).unwrap();
        let one = expansion_check(&asym, ExpansionPair::OneA, phi).unwrap();
        let two = expansion_check(&asym, ExpansionPair::TwoA, phi).unwrap();
        assert_eq!(one.convention, Convention::Swapped);
        assert_eq!(two.convention, Convention::AsPrinted);
        assert!(one.shape_residual < 1e-12 && two.shape_residual < 1e-12);
        let sym = expansion_check(
            &CloningParams::symmetric(3).unwrap(),
            ExpansionPair::OneA,
            phi,
        )
        .unwrap();
        assert_eq!(sym.convention, Convention::Both);

        // qubit, p = 1: the (1,a) pair carries the input in equal-weight Bell components
        let phi2 = &haar_inputs(3, 2, 1).unwrap()[0];
        let edge = expansion_check(
            &CloningParams::new(2, 1.0).unwrap(),
            ExpansionPair::OneA,
            phi2,
        )
        .unwrap();
        for row in &edge.table {
            for c in row {
                assert_abs_diff_eq!(c.norm(), 0.5, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn witness_needs_two_inputs() {
        let params = CloningParams::symmetric(3).unwrap();
        assert!(inequality_witness(&params, &haar_inputs(1, 3, 1).unwrap()).is_err());
        let r = inequality_witness(&params, &haar_inputs(1, 3, 3).unwrap()).unwrap();
        assert_eq!(r.probabilities.len(), 3);
        for row in &r.probabilities {
            assert_abs_diff_eq!(row.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
    }
}
