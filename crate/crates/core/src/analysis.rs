//! Entanglement structure of four-qudit channels on `(3, 4, 5, 6)`.
//!
//! Partial-transpose spectra are reported across the three 2:2 cuts.
//! Schmidt-rank profiles serve as an LOCC-inequivalence witness for pure
//! channels, and the bound state gets an explicit separable decomposition.

use serde::{Deserialize, Serialize};

use crate::channels::{build, channel_labels, ChannelSpec};
use crate::tensor::{hermitian_eigenvalues, Bipartition, DensityOperator, PureState, SCHMIDT_TOL};
use crate::weyl::{all_labels, bell};
use crate::{Result, RicError};

/// A partial-transpose eigenvalue below this is a certificate of NPT.
pub const NPT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PptVerdict {
    Ppt,
    Npt,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartitionReport {
    pub partition: String,
    pub min_pt_eigenvalue: f64,
    pub verdict: PptVerdict,
}

fn cut(left: [&str; 2], right: [&str; 2]) -> Bipartition {
    Bipartition::from_names(&left, &right).expect("fixed cut")
}

/// The three 2:2 cuts, each written with qudit 3 on the left.
pub fn two_two_cuts() -> [Bipartition; 3] {
    [
        cut(["3", "4"], ["5", "6"]),
        cut(["3", "5"], ["4", "6"]),
        cut(["3", "6"], ["4", "5"]),
    ]
}

/// The four 1:3 cuts followed by the three 2:2 cuts.
pub fn all_cuts() -> Vec<Bipartition> {
    let names = ["3", "4", "5", "6"];
    let mut cuts: Vec<Bipartition> = names
        .iter()
        .map(|one| {
            let rest: Vec<&str> = names.iter().copied().filter(|n| n != one).collect();
            Bipartition::from_names(&[one], &rest).expect("fixed cut")
        })
        .collect();
    cuts.extend(two_two_cuts());
    cuts
}

pub fn partition_report(rho: &DensityOperator, part: &Bipartition) -> Result<PartitionReport> {
    let min = hermitian_eigenvalues(&rho.partial_transpose(part)?)[0];
    let verdict = if min < -NPT_TOL {
        PptVerdict::Npt
    } else {
        PptVerdict::Ppt
    };
    Ok(PartitionReport {
        partition: part.to_string(),
        min_pt_eigenvalue: min,
        verdict,
    })
}

/// PPT/NPT verdicts across the three 2:2 cuts.
pub fn ppt_report(rho: &DensityOperator) -> Result<Vec<PartitionReport>> {
    two_two_cuts()
        .iter()
        .map(|c| partition_report(rho, c))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparableCut {
    /// `{3,4}|{5,6}`: Bell products on `(3,4)` and `(5,6)`.
    ThreeFour,
    /// `{3,6}|{4,5}`: Bell products on `(3,6)` and `(5,4)`.
    ThreeSix,
}

impl SeparableCut {
    pub fn bipartition(self) -> Bipartition {
        match self {
            SeparableCut::ThreeFour => cut(["3", "4"], ["5", "6"]),
            SeparableCut::ThreeSix => cut(["3", "6"], ["4", "5"]),
        }
    }

    pub fn from_bipartition(part: &Bipartition) -> Result<Self> {
        for c in [SeparableCut::ThreeFour, SeparableCut::ThreeSix] {
            let b = c.bipartition();
            let same = |x: &[crate::tensor::Label], y: &[crate::tensor::Label]| {
                x.len() == y.len() && x.iter().all(|l| y.contains(l))
            };
            if (same(part.left(), b.left()) && same(part.right(), b.right()))
                || (same(part.left(), b.right()) && same(part.right(), b.left()))
            {
                return Ok(c);
            }
        }
        Err(RicError::BipartitionMismatch)
    }
}

/// Rebuilds the bound state as an explicit mixture of products `σ ⊗ τ`
/// across `cut` and returns the largest entrywise deviation from `rho`.
pub fn separable_decomposition_residual(rho: &DensityOperator, cut: SeparableCut) -> Result<f64> {
    let d = rho.dim();
    let ((a, b), (c, e)) = match cut {
        SeparableCut::ThreeFour => (("3", "4"), ("5", "6")),
        SeparableCut::ThreeSix => (("3", "6"), ("5", "4")),
    };
    let w = 1.0 / (d * d) as f64;
    let n = d.pow(4);
    let mut acc = nalgebra::DMatrix::zeros(n, n);
    for l in all_labels(d) {
        let sigma = bell(l, d, a, b)?.to_density();
        let tau = bell(l.neg(d), d, c, e)?.to_density();
        let prod = sigma.tensor(&tau)?.permute(&channel_labels())?;
        acc += prod.matrix() * crate::C64::new(w, 0.0);
    }
    let rebuilt = DensityOperator::new(channel_labels(), d, acc)?;
    rho.max_abs_diff(&rebuilt)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankProfile {
    /// `(cut, Schmidt rank)` for the four 1:3 and three 2:2 cuts.
    pub ranks: Vec<(String, usize)>,
}

impl RankProfile {
    pub fn rank(&self, cut: &str) -> Option<usize> {
        self.ranks.iter().find(|(c, _)| c == cut).map(|(_, r)| *r)
    }
}

pub fn rank_profile(state: &PureState) -> Result<RankProfile> {
    let ranks = all_cuts()
        .iter()
        .map(|c| Ok((c.to_string(), state.schmidt_rank(c, SCHMIDT_TOL)?)))
        .collect::<Result<_>>()?;
    Ok(RankProfile { ranks })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Equivalence {
    Inequivalent,
    Inconclusive,
}

/// Differing Schmidt-rank profiles rule out LOCC interconversion of pure
/// states; equal profiles decide nothing.
pub fn inequivalence_witness(a: &PureState, b: &PureState) -> Result<Equivalence> {
    if a.dim() != b.dim() {
        return Err(RicError::DimensionMismatch(a.dim(), b.dim()));
    }
    if !a.register().same_set(b.labels()) {
        return Err(RicError::LabelMismatch);
    }
    Ok(if rank_profile(a)? == rank_profile(b)? {
        Equivalence::Inconclusive
    } else {
        Equivalence::Inequivalent
    })
}

/// Largest deviation of the bound state under each transposition of two
/// channel qudits.
pub fn bound_swap_deviations(d: usize) -> Result<Vec<(String, f64)>> {
    let rho = build(&ChannelSpec::BoundSmolinLike, d)?.density();
    let names = ["3", "4", "5", "6"];
    let mut out = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            let mut order = channel_labels();
            order.swap(i, j);
            // reading the swapped order back under the original labels
            let swapped = DensityOperator::from_parts(
                rho.register().clone(),
                rho.permute(&order)?.matrix().clone(),
            );
            out.push((
                format!("{}<->{}", names[i], names[j]),
                rho.max_abs_diff(&swapped)?,
            ));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::telecloning::CloningParams;

    #[test]
    fn cut_lists() {
        let names: Vec<String> = all_cuts().iter().map(|c| c.to_string()).collect();
        assert_eq!(
            names,
            [
                "{3}|{4,5,6}",
                "{4}|{3,5,6}",
                "{5}|{3,4,6}",
                "{6}|{3,4,5}",
                "{3,4}|{5,6}",
                "{3,5}|{4,6}",
                "{3,6}|{4,5}"
            ]
        );
        let flipped = Bipartition::from_names(&["5", "4"], &["6", "3"]).unwrap();
        assert_eq!(
            SeparableCut::from_bipartition(&flipped).unwrap(),
            SeparableCut::ThreeSix
        );
        let other = Bipartition::from_names(&["3", "5"], &["4", "6"]).unwrap();
        assert!(SeparableCut::from_bipartition(&other).is_err());
    }

    #[test]
    fn ghz_is_npt_on_every_cut() {
        let rho = build(&ChannelSpec::Ghz { c: 0 }, 2).unwrap().density();
        for r in ppt_report(&rho).unwrap() {
            assert_eq!(r.verdict, PptVerdict::Npt, "{}", r.partition);
            assert!((r.min_pt_eigenvalue + 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn qutrit_bound_state_spectrum() {
        let rho = build(&ChannelSpec::BoundSmolinLike, 3).unwrap().density();
        let reports = ppt_report(&rho).unwrap();
        let verdicts: Vec<PptVerdict> = reports.iter().map(|r| r.verdict).collect();
        assert_eq!(
            verdicts,
            [PptVerdict::Ppt, PptVerdict::Npt, PptVerdict::Ppt]
        );
        assert!((reports[1].min_pt_eigenvalue + 1.0 / 27.0).abs() < 1e-12);
        let json = serde_json::to_string(&reports[1]).unwrap();
        assert!(json.contains("\"NPT\""));
    }

    #[test]
    fn rank_profiles_separate_families() {
        for d in [2, 3] {
            let ghz = build(&ChannelSpec::Ghz { c: 0 }, d).unwrap();
            let tl = build(
                &ChannelSpec::telecloning_like(&CloningParams::symmetric(d).unwrap()),
                d,
            )
            .unwrap();
            let p = rank_profile(tl.pure().unwrap()).unwrap();
            assert_eq!(p.rank("{3,4}|{5,6}"), Some(d * d));
            assert_eq!(p.rank("{1}|{2}"), None);
            assert_eq!(
                inequivalence_witness(ghz.pure().unwrap(), tl.pure().unwrap()).unwrap(),
                Equivalence::Inequivalent
            );
            assert_eq!(
                inequivalence_witness(ghz.pure().unwrap(), ghz.pure().unwrap()).unwrap(),
                Equivalence::Inconclusive
            );
        }
        let a = build(&ChannelSpec::Ghz { c: 0 }, 2).unwrap();
        let b = build(&ChannelSpec::Ghz { c: 0 }, 3).unwrap();
        assert!(matches!(
            inequivalence_witness(a.pure().unwrap(), b.pure().unwrap()),
            Err(RicError::DimensionMismatch(2, 3))
        ));
    }

    #[test]
    fn qubit_bound_state_is_symmetric() {
        let dev = bound_swap_deviations(2).unwrap();
        assert_eq!(dev.len(), 6);
        assert!(dev.iter().all(|(_, x)| *x < 1e-12));
        // the qutrit state is not invariant under every swap
        assert!(bound_swap_deviations(3)
            .unwrap()
            .iter()
            .any(|(_, x)| *x > 1e-3));
    }
}
