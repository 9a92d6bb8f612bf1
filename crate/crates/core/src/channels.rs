//! Four-qudit channels on `(3, 4, 5, 6)` for remote concentration and
//! their purifications on `(3, 4, 5, 6, X, Y)`. The stabilizer family is
//! `S^{jk} = U^{-j,k}_3 U^{j,k}_4 U^{-j,k}_5 U^{j,k}_6`.
//!
//! Every pure family is a special case of
//! `Σ C_{m'n'} |B^{m',n'}⟩_{34} |B^{u-m',v-n'}⟩_{56}`; the mixed families
//! replace the superposition by a mixture with weights `W_{m'n'}`.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::rng::{complex_gaussians, seeded};
use crate::telecloning::{telecloning_channel, CloningParams};
use crate::tensor::{labels, DensityOperator, Label, PureState};
use crate::weyl::{all_labels, bell, bell_amplitudes, omega_pow, WeylLabel, WeylString};
use crate::{Result, RicError, C64};

pub const CHANNEL_QUDITS: [&str; 4] = ["3", "4", "5", "6"];
pub const PURIFIER: [&str; 2] = ["X", "Y"];

const WEIGHT_TOL: f64 = 1e-9;

pub fn channel_labels() -> Vec<Label> {
    labels(&CHANNEL_QUDITS)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelSpec {
    /// Coefficient table `c[m'][n']` plus the offsets `u, v`.
    GeneralPure {
        c: Vec<Vec<C64>>,
        u: usize,
        v: usize,
    },
    Ghz {
        c: usize,
    },
    TelecloningLike {
        alpha: f64,
        beta: f64,
        gamma: f64,
    },
    DoubleBell {
        m: usize,
        n: usize,
        u: usize,
        v: usize,
    },
    /// Weight table `w[m'][n']` of the Bell-pair mixture.
    MixedCorrelated {
        w: Vec<Vec<f64>>,
        u: usize,
        v: usize,
    },
    BoundSmolinLike,
}

impl ChannelSpec {
    pub fn tag(&self) -> &'static str {
        match self {
            ChannelSpec::GeneralPure { .. } => "general_pure",
            ChannelSpec::Ghz { .. } => "ghz",
            ChannelSpec::TelecloningLike { .. } => "telecloning_like",
            ChannelSpec::DoubleBell { .. } => "double_bell",
            ChannelSpec::MixedCorrelated { .. } => "mixed_correlated",
            ChannelSpec::BoundSmolinLike => "bound_smolin_like",
        }
    }

    pub fn is_mixed(&self) -> bool {
        matches!(
            self,
            ChannelSpec::MixedCorrelated { .. } | ChannelSpec::BoundSmolinLike
        )
    }

    /// Complex-Gaussian coefficient table, normalized.
    pub fn random_general_pure(d: usize, seed: u64, u: usize, v: usize) -> Self {
        let mut rng = seeded(seed);
        let flat = complex_gaussians(&mut rng, d * d);
        let norm = flat.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let c = flat
            .chunks(d)
            .map(|row| row.iter().map(|x| x / norm).collect())
            .collect();
        ChannelSpec::GeneralPure {
            c,
            u: u % d,
            v: v % d,
        }
    }

    /// Coefficients taken from a telecloning machine.
    pub fn telecloning_like(params: &CloningParams) -> Self {
        let k = params.coefficients();
        ChannelSpec::TelecloningLike {
            alpha: k.alpha,
            beta: k.beta,
            gamma: k.gamma,
        }
    }

    pub fn uniform_mixed(d: usize) -> Self {
        ChannelSpec::MixedCorrelated {
            w: vec![vec![1.0 / (d * d) as f64; d]; d],
            u: 0,
            v: 0,
        }
    }

    /// The `(u, v)` offsets of the family.
    pub fn offsets(&self) -> (usize, usize) {
        match self {
            ChannelSpec::GeneralPure { u, v, .. }
            | ChannelSpec::DoubleBell { u, v, .. }
            | ChannelSpec::MixedCorrelated { u, v, .. } => (*u, *v),
            _ => (0, 0),
        }
    }

    /// The general-form coefficient table of a pure family.
    pub fn coefficients(&self, d: usize) -> Option<Vec<Vec<C64>>> {
        let zero = C64::new(0.0, 0.0);
        match self {
            ChannelSpec::GeneralPure { c, .. } => Some(c.clone()),
            ChannelSpec::Ghz { c } => {
                let s = 1.0 / (d as f64).sqrt();
                Some(
                    (0..d)
                        .map(|_| {
                            (0..d)
                                .map(|n| if n == *c { C64::new(s, 0.0) } else { zero })
                                .collect()
                        })
                        .collect(),
                )
            }
            ChannelSpec::TelecloningLike { alpha, beta, gamma } => Some(
                (0..d)
                    .map(|m| {
                        (0..d)
                            .map(|n| {
                                C64::new(
                                    match (m, n) {
                                        (0, 0) => *alpha,
                                        (_, 0) => *beta,
                                        _ => *gamma,
                                    },
                                    0.0,
                                )
                            })
                            .collect()
                    })
                    .collect(),
            ),
            ChannelSpec::DoubleBell { m, n, .. } => Some(
                (0..d)
                    .map(|a| {
                        (0..d)
                            .map(|b| {
                                if (a, b) == (*m, *n) {
                                    C64::new(1.0, 0.0)
                                } else {
                                    zero
                                }
                            })
                            .collect()
                    })
                    .collect(),
            ),
            _ => None,
        }
    }

    /// The weight table of a mixed family.
    pub fn weights(&self, d: usize) -> Option<Vec<Vec<f64>>> {
        match self {
            ChannelSpec::MixedCorrelated { w, .. } => Some(w.clone()),
            ChannelSpec::BoundSmolinLike => Some(vec![vec![1.0 / (d * d) as f64; d]; d]),
            _ => None,
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if d < 2 {
            return Err(RicError::InvalidDimension(d));
        }
        if d > crate::MAX_DIM {
            return Err(RicError::DimensionTooLarge(d));
        }
        let bad = |msg: String| Err(RicError::InvalidChannel(msg));
        let (u, v) = self.offsets();
        if u >= d || v >= d {
            return bad(format!("offsets ({u},{v}) out of range for d={d}"));
        }
        let square = |lens: Vec<usize>| lens.len() == d && lens.iter().all(|&c| c == d);
        match self {
            ChannelSpec::GeneralPure { c, .. } => {
                if !square(c.iter().map(Vec::len).collect()) {
                    return bad(format!("coefficient table must be {d}x{d}"));
                }
            }
            ChannelSpec::Ghz { c } if *c >= d => return bad(format!("c={c} out of range")),
            ChannelSpec::DoubleBell { m, n, .. } if *m >= d || *n >= d => {
                return bad(format!("({m},{n}) out of range"));
            }
            ChannelSpec::MixedCorrelated { w, .. } => {
                if !square(w.iter().map(Vec::len).collect()) {
                    return bad(format!("weight table must be {d}x{d}"));
                }
                if w.iter().flatten().any(|x| *x < 0.0 || !x.is_finite()) {
                    return bad("weights must be nonnegative".into());
                }
            }
            _ => {}
        }
        if let Some(c) = self.coefficients(d) {
            let total: f64 = c.iter().flatten().map(|x| x.norm_sqr()).sum();
            if (total - 1.0).abs() > WEIGHT_TOL {
                return bad(format!("squared coefficients sum to {total}"));
            }
        }
        if let Some(w) = self.weights(d) {
            let total: f64 = w.iter().flatten().sum();
            if (total - 1.0).abs() > WEIGHT_TOL {
                return bad(format!("weights sum to {total}"));
            }
        }
        Ok(())
    }
}

/// `|B^{m',n'}⟩_{34} |B^{u-m',v-n'}⟩_{56}` amplitudes.
fn double_bell_amplitudes(first: WeylLabel, u: usize, v: usize, d: usize) -> Vec<C64> {
    let second = WeylLabel::new(u as i64 - first.m as i64, v as i64 - first.n as i64, d);
    let a = bell_amplitudes(first, d);
    let b = bell_amplitudes(second, d);
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

pub fn double_bell_state(first: WeylLabel, u: usize, v: usize, d: usize) -> Result<PureState> {
    PureState::new(channel_labels(), d, double_bell_amplitudes(first, u, v, d))
}

fn general_pure(c: &[Vec<C64>], u: usize, v: usize, d: usize) -> Result<PureState> {
    let mut amps = vec![C64::new(0.0, 0.0); d.pow(4)];
    for l in all_labels(d) {
        let coef = c[l.m][l.n];
        if coef.norm_sqr() == 0.0 {
            continue;
        }
        for (x, y) in amps.iter_mut().zip(double_bell_amplitudes(l, u, v, d)) {
            *x += coef * y;
        }
    }
    PureState::new(channel_labels(), d, amps)
}

fn mixed(w: &[Vec<f64>], u: usize, v: usize, d: usize) -> Result<DensityOperator> {
    let items = all_labels(d)
        .filter(|l| w[l.m][l.n] > 0.0)
        .map(|l| Ok((w[l.m][l.n], double_bell_state(l, u, v, d)?)))
        .collect::<Result<Vec<_>>>()?;
    DensityOperator::mixture(&items)
}

fn purification(w: &[Vec<f64>], u: usize, v: usize, d: usize) -> Result<PureState> {
    let mut amps = vec![C64::new(0.0, 0.0); d.pow(6)];
    for l in all_labels(d) {
        let c = w[l.m][l.n].sqrt();
        if c == 0.0 {
            continue;
        }
        let pair = double_bell_amplitudes(l, u, v, d);
        let xy = bell_amplitudes(l, d);
        for (i, p) in pair.iter().enumerate() {
            if p.norm_sqr() == 0.0 {
                continue;
            }
            for (k, q) in xy.iter().enumerate() {
                amps[i * d * d + k] += p * q * c;
            }
        }
    }
    let mut names = CHANNEL_QUDITS.to_vec();
    names.extend(PURIFIER);
    PureState::new(labels(&names), d, amps)
}

#[derive(Clone, Debug)]
pub enum ChannelState {
    Pure(PureState),
    Mixed {
        density: DensityOperator,
        purification: PureState,
    },
}

/// A constructed channel together with the description it was built from.
#[derive(Clone, Debug)]
pub struct Channel {
    spec: ChannelSpec,
    d: usize,
    state: ChannelState,
}

impl Channel {
    pub fn spec(&self) -> &ChannelSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn state(&self) -> &ChannelState {
        &self.state
    }

    pub fn is_mixed(&self) -> bool {
        matches!(self.state, ChannelState::Mixed { .. })
    }

    pub fn pure(&self) -> Option<&PureState> {
        match &self.state {
            ChannelState::Pure(s) => Some(s),
            ChannelState::Mixed { .. } => None,
        }
    }

    /// Density operator on `(3, 4, 5, 6)`.
    pub fn density(&self) -> DensityOperator {
        match &self.state {
            ChannelState::Pure(s) => s.to_density(),
            ChannelState::Mixed { density, .. } => density.clone(),
        }
    }

    /// The pure state the protocol engine evolves: the channel itself, or
    /// its purification with `X, Y` left untouched.
    pub fn engine_state(&self) -> &PureState {
        match &self.state {
            ChannelState::Pure(s) => s,
            ChannelState::Mixed { purification, .. } => purification,
        }
    }
}

pub fn build(spec: &ChannelSpec, d: usize) -> Result<Channel> {
    spec.validate(d)?;
    let (u, v) = spec.offsets();
    let state = if let Some(c) = spec.coefficients(d) {
        ChannelState::Pure(general_pure(&c, u, v, d)?)
    } else {
        let w = spec.weights(d).expect("mixed family has weights");
        ChannelState::Mixed {
            density: mixed(&w, u, v, d)?,
            purification: purification(&w, u, v, d)?,
        }
    };
    Ok(Channel {
        spec: spec.clone(),
        d,
        state,
    })
}

/// Purification `Σ √W |B^{m',n'}⟩_{34}|B^{u-m',v-n'}⟩_{56}|B^{m',n'}⟩_{XY}` of a mixed family.
pub fn purify(spec: &ChannelSpec, d: usize) -> Result<PureState> {
    spec.validate(d)?;
    let (u, v) = spec.offsets();
    let w = spec
        .weights(d)
        .ok_or_else(|| RicError::InvalidChannel(format!("{} is not a mixed family", spec.tag())))?;
    purification(&w, u, v, d)
}

/// The bound state prepared by applying `U^{m,n}` to qudit 4 and
/// `U^{-m,-n}` to qudit 6 of `|B^{0,0}⟩_{34}|B^{0,0}⟩_{56}` for a uniformly
/// random `(m, n)`. `samples == 0` gives the exact uniform mixture.
pub fn build_bound_by_twirl(d: usize, seed: u64, samples: usize) -> Result<DensityOperator> {
    let start = double_bell_state(WeylLabel::IDENTITY, 0, 0, d)?;
    let twirled = |l: WeylLabel| -> Result<PureState> {
        WeylString::new(d, vec![("4".into(), l), ("6".into(), l.neg(d))])?.apply(&start)
    };
    let items = if samples == 0 {
        let w = 1.0 / (d * d) as f64;
        all_labels(d)
            .map(|l| Ok((w, twirled(l)?)))
            .collect::<Result<Vec<_>>>()?
    } else {
        let mut rng = seeded(seed);
        let mut counts = vec![0usize; d * d];
        for _ in 0..samples {
            counts[rng.random_range(0..d * d)] += 1;
        }
        counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| {
                Ok((
                    c as f64 / samples as f64,
                    twirled(WeylLabel::from_index(i, d))?,
                ))
            })
            .collect::<Result<Vec<_>>>()?
    };
    DensityOperator::mixture(&items)
}

/// The bound state written as a Bell mixture on the pairs `(3, 6)` and `(5, 4)`.
pub fn bound_state_alternative_form(d: usize) -> Result<DensityOperator> {
    let w = 1.0 / (d * d) as f64;
    let items = all_labels(d)
        .map(|l| {
            let s = bell(l, d, "3", "6")?.tensor(&bell(l.neg(d), d, "5", "4")?)?;
            Ok((w, s))
        })
        .collect::<Result<Vec<_>>>()?;
    DensityOperator::mixture(&items)?.permute(&channel_labels())
}

/// Largest entrywise difference between the two forms of the bound state.
pub fn bound_symmetry_residual(d: usize) -> Result<f64> {
    let direct = build(&ChannelSpec::BoundSmolinLike, d)?.density();
    direct.max_abs_diff(&bound_state_alternative_form(d)?)
}

/// `S^{jk}` as a Weyl string on `(3, 4, 5, 6)`.
pub fn stabilizer(j: usize, k: usize, d: usize) -> Result<WeylString> {
    let minus = WeylLabel::new(-(j as i64), k as i64, d);
    let plus = WeylLabel::new(j as i64, k as i64, d);
    WeylString::new(
        d,
        vec![
            ("3".into(), minus),
            ("4".into(), plus),
            ("5".into(), minus),
            ("6".into(), plus),
        ],
    )
}

/// Table of `tr(S^{jk} ρ)` with row `j` and column `k`.
pub fn stabilizer_expectations(channel: &Channel) -> Result<Vec<Vec<C64>>> {
    let d = channel.dim();
    (0..d)
        .map(|j| {
            (0..d)
                .map(|k| {
                    let s = stabilizer(j, k, d)?;
                    match channel.state() {
                        ChannelState::Pure(p) => s.expectation_pure(p),
                        ChannelState::Mixed { density, .. } => s.expectation_density(density),
                    }
                })
                .collect()
        })
        .collect()
}

/// The eigenvalue `ω^{jv−ku}` of `S^{jk}` on any channel with offsets `(u, v)`.
pub fn stabilizer_phase_law(u: usize, v: usize, d: usize) -> Vec<Vec<C64>> {
    (0..d)
        .map(|j| {
            (0..d)
                .map(|k| omega_pow(d, (j * v) as i64 - (k * u) as i64))
                .collect()
        })
        .collect()
}

/// `‖S^a S^b − S^b S^a‖` (operator norm) from the factor-wise commutation phases.
pub fn commutator_norm(a: &WeylString, b: &WeylString, d: usize) -> f64 {
    let mut phase = 0i64;
    for (l, x) in a.factors() {
        if let Some((_, y)) = b.factors().iter().find(|(m, _)| m == l) {
            phase += (x.m * y.n) as i64 - (y.m * x.n) as i64;
        }
    }
    (C64::new(1.0, 0.0) - omega_pow(d, phase)).norm()
}

/// Largest commutator norm over all pairs of stabilizers.
pub fn stabilizer_commutator_max(d: usize) -> Result<f64> {
    let all: Vec<WeylString> = all_labels(d)
        .map(|l| stabilizer(l.m, l.n, d))
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for a in &all {
        for b in &all {
            worst = worst.max(commutator_norm(a, b, d));
        }
    }
    Ok(worst)
}

/// Overlap of the telecloning-like channel with the telecloning channel of
/// `params`, identifying `(t', 1, 2, a)` with `(3, 4, 5, 6)`.
pub fn telecloning_overlap(params: &CloningParams) -> Result<f64> {
    let d = params.d;
    let like = build(&ChannelSpec::telecloning_like(params), d)?;
    let tc = telecloning_channel(params)?;
    let relabelled = PureState::new(channel_labels(), d, tc.into_amplitudes())?;
    like.pure().expect("pure family").fidelity(&relabelled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{Bipartition, SCHMIDT_TOL};
    use approx::assert_abs_diff_eq;

    fn cut_34_56() -> Bipartition {
        Bipartition::from_names(&["3", "4"], &["5", "6"]).unwrap()
    }

    #[test]
    fn ghz_family_is_the_four_qudit_ghz_state() {
        for d in [2, 3, 4] {
            let g = build(&ChannelSpec::Ghz { c: 0 }, d).unwrap();
            let s = 1.0 / (d as f64).sqrt();
            let mut want = vec![C64::new(0.0, 0.0); d.pow(4)];
            for j in 0..d {
                want[((j * d + j) * d + j) * d + j] = C64::new(s, 0.0);
            }
            let target = PureState::new(channel_labels(), d, want).unwrap();
            assert_abs_diff_eq!(
                g.pure().unwrap().fidelity(&target).unwrap(),
                1.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn schmidt_rank_across_the_pairs() {
        let d = 3;
        let ghz = build(&ChannelSpec::Ghz { c: 1 }, d).unwrap();
        assert_eq!(
            ghz.pure()
                .unwrap()
                .schmidt_rank(&cut_34_56(), SCHMIDT_TOL)
                .unwrap(),
            3
        );
        let flat = vec![vec![C64::new(1.0 / 3.0, 0.0); 3]; 3];
        let uniform = build(
            &ChannelSpec::GeneralPure {
                c: flat,
                u: 0,
                v: 0,
            },
            d,
        )
        .unwrap();
        assert_eq!(
            uniform
                .pure()
                .unwrap()
                .schmidt_rank(&cut_34_56(), SCHMIDT_TOL)
                .unwrap(),
            9
        );
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(
            ChannelSpec::Ghz { c: 0 }.validate(8),
            Err(RicError::DimensionTooLarge(8))
        ));
        assert!(matches!(
            ChannelSpec::Ghz { c: 3 }.validate(3),
            Err(RicError::InvalidChannel(_))
        ));
        assert!(ChannelSpec::DoubleBell {
            m: 0,
            n: 0,
            u: 3,
            v: 0
        }
        .validate(3)
        .is_err());
        let unnormalized = vec![vec![C64::new(1.0, 0.0); 2]; 2];
        assert!(ChannelSpec::GeneralPure {
            c: unnormalized,
            u: 0,
            v: 0
        }
        .validate(2)
        .is_err());
        let ragged = vec![vec![C64::new(1.0, 0.0)], vec![]];
        assert!(ChannelSpec::GeneralPure {
            c: ragged,
            u: 0,
            v: 0
        }
        .validate(2)
        .is_err());
        let negative = vec![vec![1.5, -0.5], vec![0.0, 0.0]];
        assert!(ChannelSpec::MixedCorrelated {
            w: negative,
            u: 0,
            v: 0
        }
        .validate(2)
        .is_err());
        assert!(
            ChannelSpec::telecloning_like(&CloningParams::new(5, 0.3).unwrap())
                .validate(5)
                .is_ok()
        );
    }

    #[test]
    fn spec_json_uses_kind_tag() {
        let spec = ChannelSpec::DoubleBell {
            m: 1,
            n: 2,
            u: 0,
            v: 1,
        };
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"kind":"double_bell","m":1,"n":2,"u":0,"v":1}"#);
        let back: ChannelSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        let bound: ChannelSpec = serde_json::from_str(r#"{"kind":"bound_smolin_like"}"#).unwrap();
        assert_eq!(bound.tag(), "bound_smolin_like");
    }

    #[test]
    fn purification_reduces_to_the_mixture() {
        for d in [2, 3] {
            let spec = ChannelSpec::MixedCorrelated {
                w: (0..d)
                    .map(|m| {
                        (0..d)
                            .map(|n| if (m + n) % 2 == 0 { 1.0 } else { 0.0 })
                            .collect()
                    })
                    .collect(),
                u: 1,
                v: 0,
            };
            let total: f64 = spec.weights(d).unwrap().iter().flatten().sum();
            let spec = match spec {
                ChannelSpec::MixedCorrelated { w, u, v } => ChannelSpec::MixedCorrelated {
                    w: w.iter()
                        .map(|r| r.iter().map(|x| x / total).collect())
                        .collect(),
                    u,
                    v,
                },
                _ => unreachable!(),
            };
            let ch = build(&spec, d).unwrap();
            assert!(ch.is_mixed());
            let rho = ch.density();
            assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-12);
            let traced = purify(&spec, d)
                .unwrap()
                .reduced(&channel_labels())
                .unwrap();
            assert!(traced.max_abs_diff(&rho).unwrap() < 1e-12);
        }
        assert!(purify(&ChannelSpec::Ghz { c: 0 }, 2).is_err());
    }

    #[test]
    fn twirl_reproduces_the_bound_state() {
        for d in [2, 3] {
            let target = build(&ChannelSpec::BoundSmolinLike, d).unwrap().density();
            let exact = build_bound_by_twirl(d, 0, 0).unwrap();
            assert!(exact.max_abs_diff(&target).unwrap() < 1e-12);
            let sampled = build_bound_by_twirl(d, 7, 10_000).unwrap();
            assert!(sampled.trace_distance(&target).unwrap() < 0.05);
        }
    }

    #[test]
    fn stabilizers_commute_and_weyl_pairs_do_not() {
        for d in [2, 3, 5, 7] {
            assert!(stabilizer_commutator_max(d).unwrap() < 1e-12);
        }
        let x = WeylString::new(2, vec![("3".into(), WeylLabel::new(0, 1, 2))]).unwrap();
        let z = WeylString::new(2, vec![("3".into(), WeylLabel::new(1, 0, 2))]).unwrap();
        assert_abs_diff_eq!(commutator_norm(&x, &z, 2), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn offsets_set_the_stabilizer_eigenvalues() {
        let d = 3;
        let spec = ChannelSpec::DoubleBell {
            m: 2,
            n: 0,
            u: 2,
            v: 1,
        };
        let table = stabilizer_expectations(&build(&spec, d).unwrap()).unwrap();
        let law = stabilizer_phase_law(2, 1, d);
        for (row, want) in table.iter().zip(&law) {
            for (a, b) in row.iter().zip(want) {
                assert!((a - b).norm() < 1e-12);
            }
        }
        // j=1, k=0 gives ω^{v}
        assert!((law[1][0] - omega_pow(3, 1)).norm() < 1e-15);
    }

    #[test]
    fn qubit_telecloning_like_channel_is_the_telecloning_channel() {
        for p in [0.5, 0.8] {
            let f = telecloning_overlap(&CloningParams::new(2, p).unwrap()).unwrap();
            assert_abs_diff_eq!(f, 1.0, epsilon = 1e-10);
        }
    }
}
