//! Weyl–Heisenberg operators `U^{m,n} = Σ_k ω^{km}|k+n⟩⟨k|` and the
//! generalized Bell basis `|B^{m,n}⟩ = (I ⊗ U^{m,n})|B^{0,0}⟩`.
//!
//! Labels are always reduced into `[0, d)`. Phases are carried exactly as
//! complex doubles; only comparisons are phase-insensitive.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::tensor::{Label, PureState, Register};
use crate::{Result, RicError, C64};

/// `e^{2πi/d}`.
pub fn omega(d: usize) -> Result<C64> {
    if d < 2 {
        return Err(RicError::InvalidDimension(d));
    }
    Ok(omega_pow(d, 1))
}

/// `ω^k` with `k` reduced mod `d` before evaluating the exponential.
pub fn omega_pow(d: usize, k: i64) -> C64 {
    let r = k.rem_euclid(d as i64) as f64;
    C64::from_polar(1.0, 2.0 * PI * r / d as f64)
}

/// All `d` powers `ω^0 … ω^{d-1}`.
pub fn omega_table(d: usize) -> Vec<C64> {
    (0..d as i64).map(|k| omega_pow(d, k)).collect()
}

fn reduce(x: i64, d: usize) -> usize {
    x.rem_euclid(d as i64) as usize
}

/// The pair `(m, n)` indexing `U^{m,n}` (phase index `m`, shift index `n`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WeylLabel {
    pub m: usize,
    pub n: usize,
}

/// Bell states share the Weyl labelling.
pub type BellLabel = WeylLabel;

impl WeylLabel {
    /// Reduces arbitrary integers into `[0, d)`.
    pub fn new(m: i64, n: i64, d: usize) -> Self {
        WeylLabel {
            m: reduce(m, d),
            n: reduce(n, d),
        }
    }

    pub const IDENTITY: WeylLabel = WeylLabel { m: 0, n: 0 };

    /// Componentwise sum mod `d`.
    pub fn add(self, other: WeylLabel, d: usize) -> Self {
        WeylLabel {
            m: (self.m + other.m) % d,
            n: (self.n + other.n) % d,
        }
    }

    pub fn neg(self, d: usize) -> Self {
        WeylLabel::new(-(self.m as i64), -(self.n as i64), d)
    }

    pub fn sub(self, other: WeylLabel, d: usize) -> Self {
        self.add(other.neg(d), d)
    }

    /// Flat index `m·d + n`, the row of [`bell_basis_matrix`].
    pub fn index(self, d: usize) -> usize {
        self.m * d + self.n
    }

    pub fn from_index(i: usize, d: usize) -> Self {
        WeylLabel { m: i / d, n: i % d }
    }
}

impl std::fmt::Display for WeylLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.m, self.n)
    }
}

/// All `d²` labels in index order.
pub fn all_labels(d: usize) -> impl Iterator<Item = WeylLabel> {
    (0..d * d).map(move |i| WeylLabel::from_index(i, d))
}

/// Dense `d×d` matrix of `U^{m,n}`.
pub fn weyl(label: WeylLabel, d: usize) -> DMatrix<C64> {
    let mut u = DMatrix::zeros(d, d);
    for k in 0..d {
        u[((k + label.n) % d, k)] = omega_pow(d, (k * label.m) as i64);
    }
    u
}

/// `(U^{-m,n})† = ω^{-mn} U^{m,-n}`, returned as `(ω^{-mn}, (m, -n))`.
pub fn weyl_adjoint(label: WeylLabel, d: usize) -> (C64, WeylLabel) {
    let phase = omega_pow(d, -((label.m * label.n) as i64));
    (phase, WeylLabel::new(label.m as i64, -(label.n as i64), d))
}

/// Amplitudes of `|B^{m,n}⟩` over two qudits: `(1/√d) Σ_j ω^{jm}|j⟩|j+n⟩`.
pub fn bell_amplitudes(label: BellLabel, d: usize) -> Vec<C64> {
    let s = 1.0 / (d as f64).sqrt();
    let mut v = vec![C64::new(0.0, 0.0); d * d];
    for j in 0..d {
        v[j * d + (j + label.n) % d] = omega_pow(d, (j * label.m) as i64) * s;
    }
    v
}

/// `|B^{m,n}⟩` on the ordered pair `(first, second)`.
pub fn bell(
    label: BellLabel,
    d: usize,
    first: impl Into<Label>,
    second: impl Into<Label>,
) -> Result<PureState> {
    let reg = Register::new(vec![first.into(), second.into()], d)?;
    Ok(PureState::from_parts(reg, bell_amplitudes(label, d)))
}

/// `d²×d²` matrix whose row `m·d+n` is `⟨B^{m,n}|`.
pub fn bell_basis_matrix(d: usize) -> DMatrix<C64> {
    let mut b = DMatrix::zeros(d * d, d * d);
    for l in all_labels(d) {
        for (c, a) in bell_amplitudes(l, d).into_iter().enumerate() {
            b[(l.index(d), c)] = a.conj();
        }
    }
    b
}

/// Coefficients of `|j⟩|k⟩` in the Bell basis:
/// `|j⟩|k⟩ = (1/√d) Σ_r ω^{-jr}|B^{r, k-j}⟩`.
pub fn product_to_bell(j: usize, k: usize, d: usize) -> Vec<(BellLabel, C64)> {
    let s = 1.0 / (d as f64).sqrt();
    (0..d)
        .map(|r| {
            (
                WeylLabel::new(r as i64, k as i64 - j as i64, d),
                omega_pow(d, -((j * r) as i64)) * s,
            )
        })
        .collect()
}

/// Largest reconstruction error of the product-to-Bell expansion over all `j, k`.
pub fn product_to_bell_residual(d: usize) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..d {
        for k in 0..d {
            let mut v = vec![C64::new(0.0, 0.0); d * d];
            for (l, c) in product_to_bell(j, k, d) {
                for (x, b) in v.iter_mut().zip(bell_amplitudes(l, d)) {
                    *x += c * b;
                }
            }
            v[j * d + k] -= C64::new(1.0, 0.0);
            worst = worst.max(v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt());
        }
    }
    worst
}

/// Norm of `LHS − RHS` of the entanglement-swapping identity
///
/// `|B^{m,n}⟩_{XY}|B^{m',n'}⟩_{X'Y'} =
///  (1/d) Σ_{a,b} ω^{ab} |B^{m+a, n'+b}⟩_{XY'} |B^{m'-a, n-b}⟩_{X'Y}`.
pub fn swap_identity_residual(first: WeylLabel, second: WeylLabel, d: usize) -> Result<f64> {
    let lhs = bell(first, d, "X", "Y")?.tensor(&bell(second, d, "X'", "Y'")?)?;
    let order = lhs.labels().to_vec();
    let mut acc = vec![C64::new(0.0, 0.0); lhs.amplitudes().len()];
    for a in 0..d as i64 {
        for b in 0..d as i64 {
            let l1 = WeylLabel::new(first.m as i64 + a, second.n as i64 + b, d);
            let l2 = WeylLabel::new(second.m as i64 - a, first.n as i64 - b, d);
            let term = bell(l1, d, "X", "Y'")?
                .tensor(&bell(l2, d, "X'", "Y")?)?
                .permute(&order)?;
            let w = omega_pow(d, a * b) / d as f64;
            for (x, t) in acc.iter_mut().zip(term.amplitudes()) {
                *x += w * t;
            }
        }
    }
    Ok(acc
        .iter()
        .zip(lhs.amplitudes())
        .map(|(r, l)| (r - l).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// Largest deviation from `U^{m,n}U^{m',n'} = ω^{mn'} U^{m+m',n+n'}` over all label pairs.
pub fn composition_residual(d: usize) -> f64 {
    let mut worst = 0.0f64;
    for a in all_labels(d) {
        let ua = weyl(a, d);
        for b in all_labels(d) {
            let lhs = &ua * weyl(b, d);
            let rhs = weyl(a.add(b, d), d) * omega_pow(d, (a.m * b.n) as i64);
            worst = worst.max((lhs - rhs).iter().map(|x| x.norm()).fold(0.0, f64::max));
        }
    }
    worst
}

/// A tensor product of single-qudit Weyl operators on named qudits.
///
/// Every such operator maps each basis vector to a phased basis vector, so
/// applying it and taking expectations never needs the dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct WeylString {
    d: usize,
    factors: Vec<(Label, WeylLabel)>,
}

impl WeylString {
    pub fn new(d: usize, factors: Vec<(Label, WeylLabel)>) -> Result<Self> {
        Register::new(factors.iter().map(|(l, _)| l.clone()).collect(), d)?;
        Ok(WeylString { d, factors })
    }

    pub fn factors(&self) -> &[(Label, WeylLabel)] {
        &self.factors
    }

    fn factor_on(&self, label: &Label) -> WeylLabel {
        self.factors
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, w)| *w)
            .unwrap_or(WeylLabel::IDENTITY)
    }

    /// For every basis index of `reg`, its image index and phase.
    fn action(&self, reg: &Register) -> Result<Vec<(usize, C64)>> {
        for (l, _) in &self.factors {
            reg.position(l)?;
        }
        let d = self.d;
        let ws: Vec<WeylLabel> = reg.labels().iter().map(|l| self.factor_on(l)).collect();
        let n = ws.len();
        let mut out = Vec::with_capacity(reg.size());
        let mut digits = vec![0usize; n];
        for _ in 0..reg.size() {
            let mut img = 0usize;
            let mut ph = 0usize;
            for (k, w) in ws.iter().enumerate() {
                img = img * d + (digits[k] + w.n) % d;
                ph += digits[k] * w.m;
            }
            out.push((img, omega_pow(d, ph as i64)));
            for k in (0..n).rev() {
                digits[k] += 1;
                if digits[k] < d {
                    break;
                }
                digits[k] = 0;
            }
        }
        Ok(out)
    }

    /// Dense matrix in the label order of `order`.
    pub fn matrix(&self, order: &[Label]) -> Result<DMatrix<C64>> {
        let reg = Register::new(order.to_vec(), self.d)?;
        let mut m = DMatrix::zeros(reg.size(), reg.size());
        for (col, (row, ph)) in self.action(&reg)?.into_iter().enumerate() {
            m[(row, col)] = ph;
        }
        Ok(m)
    }

    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        let mut out = vec![C64::new(0.0, 0.0); state.amplitudes().len()];
        for (i, (img, ph)) in self.action(state.register())?.into_iter().enumerate() {
            out[img] = ph * state.amplitudes()[i];
        }
        Ok(PureState::from_parts(state.register().clone(), out))
    }

    /// `⟨ψ|S|ψ⟩`.
    pub fn expectation_pure(&self, state: &PureState) -> Result<C64> {
        let amps = state.amplitudes();
        Ok(self
            .action(state.register())?
            .into_iter()
            .enumerate()
            .map(|(i, (img, ph))| amps[img].conj() * ph * amps[i])
            .sum())
    }

    /// `tr(S ρ)`.
    pub fn expectation_density(&self, rho: &crate::tensor::DensityOperator) -> Result<C64> {
        let m = rho.matrix();
        Ok(self
            .action(rho.register())?
            .into_iter()
            .enumerate()
            .map(|(j, (img, ph))| ph * m[(j, img)])
            .sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn omega_values() {
        assert!(close(omega(2).unwrap(), C64::new(-1.0, 0.0)));
        assert!(close(omega(4).unwrap(), C64::new(0.0, 1.0)));
        assert!(close(omega(3).unwrap(), C64::new(-0.5, 3f64.sqrt() / 2.0)));
        assert!(matches!(omega(1), Err(RicError::InvalidDimension(1))));
        assert!(close(omega_pow(5, -1), omega_pow(5, 4)));
    }

    #[test]
    fn weyl_shifts_and_phases() {
        // U^{1,1}|1> = ω|2> for qutrits
        let u = weyl(WeylLabel::new(1, 1, 3), 3);
        assert!(close(u[(2, 1)], omega_pow(3, 1)));
        assert!(close(u[(0, 1)], C64::new(0.0, 0.0)));
        for d in 2..=5 {
            for l in all_labels(d) {
                let u = weyl(l, d);
                let err = (u.adjoint() * &u - DMatrix::identity(d, d))
                    .iter()
                    .map(|x| x.norm())
                    .fold(0.0, f64::max);
                assert!(err < 1e-12);
            }
        }
    }

    #[test]
    fn adjoint_rule() {
        let (phase, l) = weyl_adjoint(WeylLabel::new(1, 2, 3), 3);
        assert!(close(phase, omega_pow(3, -2)));
        assert_eq!(l, WeylLabel { m: 1, n: 1 });
        for d in [2, 3, 4] {
            for l in all_labels(d) {
                let lhs = weyl(WeylLabel::new(-(l.m as i64), l.n as i64, d), d).adjoint();
                let (ph, out) = weyl_adjoint(l, d);
                let err = (lhs - weyl(out, d) * ph)
                    .iter()
                    .map(|x| x.norm())
                    .fold(0.0, f64::max);
                assert!(err < 1e-12, "d={d} {l}");
            }
        }
    }

    #[test]
    fn qubit_singlet_label() {
        let s = 1.0 / 2f64.sqrt();
        let b = bell_amplitudes(WeylLabel::new(1, 1, 2), 2);
        let want = [0.0, s, -s, 0.0];
        for (x, w) in b.iter().zip(want) {
            assert_abs_diff_eq!(x.re, w, epsilon = 1e-12);
            assert_abs_diff_eq!(x.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn bell_basis_is_orthonormal() {
        for d in 2..=7 {
            let b = bell_basis_matrix(d);
            let err = (&b * b.adjoint() - DMatrix::identity(d * d, d * d))
                .iter()
                .map(|x| x.norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-12, "d={d}");
        }
    }

    #[test]
    fn identities_hold_through_d7() {
        for d in 2..=7 {
            assert!(product_to_bell_residual(d) < 1e-12);
            assert!(composition_residual(d) < 1e-12);
        }
        for d in [2, 3] {
            for a in all_labels(d) {
                for b in all_labels(d) {
                    assert!(swap_identity_residual(a, b, d).unwrap() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn label_arithmetic() {
        let d = 5;
        let a = WeylLabel::new(-1, 7, d);
        assert_eq!(a, WeylLabel { m: 4, n: 2 });
        assert_eq!(a.add(a.neg(d), d), WeylLabel::IDENTITY);
        assert_eq!(WeylLabel::from_index(a.index(d), d), a);
        assert_eq!(a.sub(WeylLabel::new(1, 1, d), d), WeylLabel { m: 3, n: 1 });
        assert_eq!(a.to_string(), "(4,2)");
    }

    #[test]
    fn string_matrix_matches_kronecker_product() {
        let d = 3;
        let (x, y) = (WeylLabel::new(1, 2, d), WeylLabel::new(2, 1, d));
        let s = WeylString::new(d, vec![("a".into(), x), ("b".into(), y)]).unwrap();
        let dense = s.matrix(&crate::tensor::labels(&["a", "b"])).unwrap();
        let kron = weyl(x, d).kronecker(&weyl(y, d));
        assert!((dense - kron).iter().all(|z| z.norm() < 1e-12));
        // order matters for the dense form but not for expectations
        let flipped = s.matrix(&crate::tensor::labels(&["b", "a"])).unwrap();
        assert!((flipped - weyl(y, d).kronecker(&weyl(x, d)))
            .iter()
            .all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn expectations_agree_between_pure_and_density() {
        let d = 3;
        let psi = bell(WeylLabel::new(1, 2, d), d, "a", "b").unwrap();
        let s = WeylString::new(
            d,
            vec![
                ("a".into(), WeylLabel::new(1, 1, d)),
                ("b".into(), WeylLabel::new(2, 1, d)),
            ],
        )
        .unwrap();
        let e1 = s.expectation_pure(&psi).unwrap();
        let e2 = s.expectation_density(&psi.to_density()).unwrap();
        assert!(close(e1, e2));
        assert!((s.apply(&psi).unwrap().inner(&psi).unwrap() - e1.conj()).norm() < 1e-12);
        assert!(WeylString::new(
            d,
            vec![
                ("a".into(), WeylLabel::IDENTITY),
                ("a".into(), WeylLabel::IDENTITY)
            ]
        )
        .is_err());
    }
}
