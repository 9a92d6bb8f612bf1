//! Dense complex states and operators over ordered, labelled qudit registers.
//!
//! Every register carries one common local dimension `d`. Flat indices are
//! big-endian in base `d` over the label order, so the first label is the
//! most significant digit. Values are immutable; every operation returns a
//! new value.

use std::collections::HashSet;
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::{Result, RicError, C64, ZERO_PROBABILITY};

/// Tolerance on squared norms and traces.
pub const NORM_TOL: f64 = 1e-9;
/// Tolerance on Hermiticity of density operators.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted for a density operator.
pub const POSITIVITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(String);

impl Label {
    pub fn new(name: impl Into<String>) -> Self {
        Label(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label(s.to_owned())
    }
}

impl From<String> for Label {
    fn from(s: String) -> Self {
        Label(s)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Shorthand for building a label list.
pub fn labels(names: &[&str]) -> Vec<Label> {
    names.iter().map(|&n| Label::from(n)).collect()
}

fn strides(dim: usize, n: usize) -> Vec<usize> {
    let mut s = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dim;
    }
    s
}

/// For a reordering where new position `k` holds old position `perm[k]`,
/// returns the old flat index of every new flat index.
fn gather_map(dim: usize, perm: &[usize]) -> Vec<usize> {
    let n = perm.len();
    let old = strides(dim, n);
    let step: Vec<usize> = perm.iter().map(|&p| old[p]).collect();
    let size = dim.pow(n as u32);
    let mut map = Vec::with_capacity(size);
    let mut digits = vec![0usize; n];
    let mut idx = 0usize;
    for _ in 0..size {
        map.push(idx);
        for k in (0..n).rev() {
            digits[k] += 1;
            idx += step[k];
            if digits[k] < dim {
                break;
            }
            idx -= step[k] * dim;
            digits[k] = 0;
        }
    }
    map
}

fn to_row_major(m: &DMatrix<C64>) -> Vec<C64> {
    let (r, c) = m.shape();
    let mut out = Vec::with_capacity(r * c);
    for i in 0..r {
        for j in 0..c {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Register {
    labels: Vec<Label>,
    dim: usize,
}

impl Register {
    pub fn new(labels: Vec<Label>, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(RicError::InvalidDimension(dim));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l) {
                return Err(RicError::DuplicateLabel(l.to_string()));
            }
        }
        Ok(Register { labels, dim })
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of amplitudes, `d^len`.
    pub fn size(&self) -> usize {
        self.dim.pow(self.labels.len() as u32)
    }

    pub fn position(&self, label: &Label) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| RicError::UnknownLabel(label.to_string()))
    }

    pub fn contains(&self, label: &Label) -> bool {
        self.labels.contains(label)
    }

    pub fn same_set(&self, other: &[Label]) -> bool {
        other.len() == self.labels.len() && other.iter().all(|l| self.contains(l))
    }

    fn permutation_to(&self, order: &[Label]) -> Result<Vec<usize>> {
        if order.len() != self.labels.len() {
            return Err(RicError::NotAPermutation);
        }
        let mut used = vec![false; order.len()];
        let mut perm = Vec::with_capacity(order.len());
        for l in order {
            let p = self.position(l).map_err(|_| RicError::NotAPermutation)?;
            if used[p] {
                return Err(RicError::NotAPermutation);
            }
            used[p] = true;
            perm.push(p);
        }
        Ok(perm)
    }

    fn concat(&self, other: &Register) -> Result<Register> {
        if self.dim != other.dim {
            return Err(RicError::DimensionMismatch(self.dim, other.dim));
        }
        if let Some(l) = other.labels.iter().find(|l| self.contains(l)) {
            return Err(RicError::LabelCollision(l.to_string()));
        }
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        Ok(Register {
            labels,
            dim: self.dim,
        })
    }

    /// Labels of `subset` validated against the register, plus the remaining
    /// labels in register order.
    fn split(&self, subset: &[Label]) -> Result<Vec<Label>> {
        let mut seen = HashSet::new();
        for l in subset {
            self.position(l)?;
            if !seen.insert(l) {
                return Err(RicError::DuplicateLabel(l.to_string()));
            }
        }
        Ok(self
            .labels
            .iter()
            .filter(|l| !seen.contains(l))
            .cloned()
            .collect())
    }
}

/// A split of a register into two disjoint, covering groups.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    left: Vec<Label>,
    right: Vec<Label>,
}

impl Bipartition {
    pub fn new(left: Vec<Label>, right: Vec<Label>) -> Result<Self> {
        if left.is_empty() || right.is_empty() {
            return Err(RicError::EmptySelection);
        }
        let mut seen = HashSet::new();
        for l in left.iter().chain(right.iter()) {
            if !seen.insert(l) {
                return Err(RicError::LabelCollision(l.to_string()));
            }
        }
        Ok(Bipartition { left, right })
    }

    pub fn from_names(left: &[&str], right: &[&str]) -> Result<Self> {
        Bipartition::new(labels(left), labels(right))
    }

    pub fn left(&self) -> &[Label] {
        &self.left
    }

    pub fn right(&self) -> &[Label] {
        &self.right
    }

    fn check_covers(&self, reg: &Register) -> Result<()> {
        if self.left.len() + self.right.len() != reg.len()
            || !self
                .left
                .iter()
                .chain(self.right.iter())
                .all(|l| reg.contains(l))
        {
            return Err(RicError::BipartitionMismatch);
        }
        Ok(())
    }

    fn ordered(&self) -> Vec<Label> {
        self.left.iter().chain(self.right.iter()).cloned().collect()
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |ls: &[Label]| ls.iter().map(Label::as_str).collect::<Vec<_>>().join(",");
        write!(f, "{{{}}}|{{{}}}", join(&self.left), join(&self.right))
    }
}

/// Result of projecting part of a pure state onto a target state.
#[derive(Clone, Debug)]
pub struct Projection {
    pub probability: f64,
    /// Renormalized post-measurement state on the remaining labels, or
    /// `None` when the branch probability is at or below the zero cutoff.
    pub state: Option<PureState>,
}

#[derive(Clone, Debug)]
pub struct MixedProjection {
    pub probability: f64,
    pub state: Option<DensityOperator>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    reg: Register,
    amps: Vec<C64>,
}

impl PureState {
    pub fn new(labels: Vec<Label>, dim: usize, amps: Vec<C64>) -> Result<Self> {
        let reg = Register::new(labels, dim)?;
        if amps.len() != reg.size() {
            return Err(RicError::ShapeMismatch {
                expected: reg.size(),
                got: amps.len(),
            });
        }
        let n2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(RicError::NotNormalized(n2));
        }
        Ok(PureState { reg, amps })
    }

    /// Builds a state from arbitrary nonzero amplitudes, rescaling to unit norm.
    pub fn normalized(labels: Vec<Label>, dim: usize, mut amps: Vec<C64>) -> Result<Self> {
        let reg = Register::new(labels, dim)?;
        if amps.len() != reg.size() {
            return Err(RicError::ShapeMismatch {
                expected: reg.size(),
                got: amps.len(),
            });
        }
        let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if n <= f64::EPSILON {
            return Err(RicError::NotNormalized(0.0));
        }
        amps.iter_mut().for_each(|a| *a /= n);
        Ok(PureState { reg, amps })
    }

    pub(crate) fn from_parts(reg: Register, amps: Vec<C64>) -> Self {
        debug_assert_eq!(reg.size(), amps.len());
        PureState { reg, amps }
    }

    /// Computational basis state with one digit per label.
    pub fn basis(labels: Vec<Label>, dim: usize, digits: &[usize]) -> Result<Self> {
        let reg = Register::new(labels, dim)?;
        if digits.len() != reg.len() {
            return Err(RicError::ShapeMismatch {
                expected: reg.len(),
                got: digits.len(),
            });
        }
        let mut idx = 0;
        for &k in digits {
            if k >= dim {
                return Err(RicError::InvalidConfig(format!(
                    "basis digit {k} out of range"
                )));
            }
            idx = idx * dim + k;
        }
        let mut amps = vec![C64::new(0.0, 0.0); reg.size()];
        amps[idx] = C64::new(1.0, 0.0);
        Ok(PureState { reg, amps })
    }

    pub fn register(&self) -> &Register {
        &self.reg
    }

    pub fn labels(&self) -> &[Label] {
        self.reg.labels()
    }

    pub fn dim(&self) -> usize {
        self.reg.dim()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Multiplies every amplitude by `c`.
    pub fn scaled(&self, c: C64) -> Self {
        PureState {
            reg: self.reg.clone(),
            amps: self.amps.iter().map(|a| a * c).collect(),
        }
    }

    pub fn tensor(&self, other: &PureState) -> Result<Self> {
        let reg = self.reg.concat(&other.reg)?;
        let mut amps = Vec::with_capacity(reg.size());
        for a in &self.amps {
            amps.extend(other.amps.iter().map(|b| a * b));
        }
        Ok(PureState { reg, amps })
    }

    pub fn permute(&self, order: &[Label]) -> Result<Self> {
        let perm = self.reg.permutation_to(order)?;
        let map = gather_map(self.dim(), &perm);
        Ok(PureState {
            reg: Register {
                labels: order.to_vec(),
                dim: self.dim(),
            },
            amps: map.iter().map(|&i| self.amps[i]).collect(),
        })
    }

    /// The same state re-indexed to the given label order.
    pub fn aligned_to(&self, order: &[Label]) -> Result<Self> {
        if order == self.labels() {
            return Ok(self.clone());
        }
        if !self.reg.same_set(order) {
            return Err(RicError::LabelMismatch);
        }
        self.permute(order)
    }

    /// `⟨self|other⟩`, after aligning `other` to this label order.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(RicError::DimensionMismatch(self.dim(), other.dim()));
        }
        let o = other.aligned_to(self.labels())?;
        Ok(self
            .amps
            .iter()
            .zip(o.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Euclidean distance between amplitude vectors (phase sensitive).
    pub fn distance(&self, other: &PureState) -> Result<f64> {
        let o = other.aligned_to(self.labels())?;
        Ok(self
            .amps
            .iter()
            .zip(o.amps.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// `|⟨self|other⟩|²`; insensitive to global phases.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Contracts `subset` with the bra of `target` without renormalizing.
    pub(crate) fn contract(&self, subset: &[Label], target: &PureState) -> Result<PureState> {
        if target.dim() != self.dim() {
            return Err(RicError::DimensionMismatch(self.dim(), target.dim()));
        }
        let rest = self.reg.split(subset)?;
        let target = target.aligned_to(subset)?;
        let mut order = subset.to_vec();
        order.extend(rest.iter().cloned());
        let p = self.permute(&order)?;
        let r = self.dim().pow(rest.len() as u32);
        let mut out = vec![C64::new(0.0, 0.0); r];
        for (s, t) in target.amps.iter().enumerate() {
            let tc = t.conj();
            if tc.norm_sqr() == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(&p.amps[s * r..(s + 1) * r]) {
                *o += tc * a;
            }
        }
        Ok(PureState {
            reg: Register {
                labels: rest,
                dim: self.dim(),
            },
            amps: out,
        })
    }

    /// Projects `subset` onto `target` (a normalized state on exactly those
    /// labels).
    pub fn project(&self, subset: &[Label], target: &PureState) -> Result<Projection> {
        let tn = target.norm_sqr();
        if (tn - 1.0).abs() > NORM_TOL {
            return Err(RicError::NotNormalized(tn));
        }
        let raw = self.contract(subset, target)?;
        let probability = raw.norm_sqr();
        let state = (probability > ZERO_PROBABILITY)
            .then(|| raw.scaled(C64::new(1.0 / probability.sqrt(), 0.0)));
        Ok(Projection { probability, state })
    }

    /// Applies a `d×d` operator to one qudit.
    pub fn apply_local(&self, label: &Label, op: &DMatrix<C64>) -> Result<Self> {
        let d = self.dim();
        if op.shape() != (d, d) {
            return Err(RicError::ShapeMismatch {
                expected: d * d,
                got: op.len(),
            });
        }
        let pos = self.reg.position(label)?;
        let stride = strides(d, self.reg.len())[pos];
        let mut out = vec![C64::new(0.0, 0.0); self.amps.len()];
        let block = stride * d;
        for base in (0..self.amps.len()).step_by(block) {
            for off in 0..stride {
                let start = base + off;
                for i in 0..d {
                    let mut acc = C64::new(0.0, 0.0);
                    for j in 0..d {
                        let o = op[(i, j)];
                        if o.norm_sqr() != 0.0 {
                            acc += o * self.amps[start + j * stride];
                        }
                    }
                    out[start + i * stride] = acc;
                }
            }
        }
        Ok(PureState {
            reg: self.reg.clone(),
            amps: out,
        })
    }

    pub fn to_density(&self) -> DensityOperator {
        let v = nalgebra::DVector::from_column_slice(&self.amps);
        DensityOperator {
            reg: self.reg.clone(),
            matrix: &v * v.adjoint(),
        }
    }

    /// Reduced state on `keep` (in the order given).
    pub fn reduced(&self, keep: &[Label]) -> Result<DensityOperator> {
        if keep.is_empty() {
            return Err(RicError::EmptySelection);
        }
        let rest = self.reg.split(keep)?;
        let mut order = keep.to_vec();
        order.extend(rest.iter().cloned());
        let p = self.permute(&order)?;
        let k = self.dim().pow(keep.len() as u32);
        let r = self.dim().pow(rest.len() as u32);
        let m = DMatrix::from_row_slice(k, r, &p.amps);
        Ok(DensityOperator {
            reg: Register {
                labels: keep.to_vec(),
                dim: self.dim(),
            },
            matrix: &m * m.adjoint(),
        })
    }

    /// Singular values of the amplitudes reshaped across `part`, descending.
    pub fn schmidt_coefficients(&self, part: &Bipartition) -> Result<Vec<f64>> {
        part.check_covers(&self.reg)?;
        let p = self.permute(&part.ordered())?;
        let rows = self.dim().pow(part.left.len() as u32);
        let cols = self.dim().pow(part.right.len() as u32);
        let m = DMatrix::from_row_slice(rows, cols, &p.amps);
        let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        Ok(sv)
    }

    /// Number of singular values above `tol` times the largest one.
    pub fn schmidt_rank(&self, part: &Bipartition, tol: f64) -> Result<usize> {
        let sv = self.schmidt_coefficients(part)?;
        let top = sv.first().copied().unwrap_or(0.0);
        Ok(sv.iter().filter(|&&s| s > tol * top).count())
    }
}

/// Default relative cutoff for Schmidt ranks.
pub const SCHMIDT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    reg: Register,
    matrix: DMatrix<C64>,
}

impl DensityOperator {
    /// Rejects matrices that are not valid density operators.
    pub fn new(labels: Vec<Label>, dim: usize, matrix: DMatrix<C64>) -> Result<Self> {
        let reg = Register::new(labels, dim)?;
        let n = reg.size();
        if matrix.shape() != (n, n) {
            return Err(RicError::ShapeMismatch {
                expected: n * n,
                got: matrix.len(),
            });
        }
        let dev = hermitian_deviation(&matrix);
        if dev > HERMITIAN_TOL {
            return Err(RicError::NotHermitian(dev));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(RicError::BadTrace(tr.re));
        }
        let min = hermitian_eigenvalues(&matrix)[0];
        if min < -POSITIVITY_TOL {
            return Err(RicError::NotPositive(min));
        }
        Ok(DensityOperator { reg, matrix })
    }

    pub(crate) fn from_parts(reg: Register, matrix: DMatrix<C64>) -> Self {
        DensityOperator { reg, matrix }
    }

    pub fn from_pure(state: &PureState) -> Self {
        state.to_density()
    }

    /// Weighted mixture of pure states; weights must be nonnegative and sum to 1.
    pub fn mixture(items: &[(f64, PureState)]) -> Result<Self> {
        let Some((_, first)) = items.first() else {
            return Err(RicError::EmptySelection);
        };
        let total: f64 = items.iter().map(|(w, _)| *w).sum();
        if items.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > NORM_TOL {
            return Err(RicError::BadTrace(total));
        }
        let n = first.reg.size();
        let mut m = DMatrix::<C64>::zeros(n, n);
        for (w, s) in items {
            if *w == 0.0 {
                continue;
            }
            let s = s.aligned_to(first.labels())?;
            let v = nalgebra::DVector::from_column_slice(&s.amps);
            m += (&v * v.adjoint()) * C64::new(*w, 0.0);
        }
        Ok(DensityOperator {
            reg: first.reg.clone(),
            matrix: m,
        })
    }

    pub fn maximally_mixed(labels: Vec<Label>, dim: usize) -> Result<Self> {
        let reg = Register::new(labels, dim)?;
        let n = reg.size();
        let matrix = DMatrix::<C64>::identity(n, n) * C64::new(1.0 / n as f64, 0.0);
        Ok(DensityOperator { reg, matrix })
    }

    pub fn register(&self) -> &Register {
        &self.reg
    }

    pub fn labels(&self) -> &[Label] {
        self.reg.labels()
    }

    pub fn dim(&self) -> usize {
        self.reg.dim()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<Self> {
        let reg = self.reg.concat(&other.reg)?;
        Ok(DensityOperator {
            reg,
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    /// Re-indexes the matrix viewed as a rank-`2n` tensor (row digits then
    /// column digits) under an axis permutation.
    fn regather(&self, perm: &[usize]) -> DMatrix<C64> {
        let size = self.reg.size();
        let flat = to_row_major(&self.matrix);
        let map = gather_map(self.dim(), perm);
        DMatrix::from_fn(size, size, |i, j| flat[map[i * size + j]])
    }

    pub fn permute(&self, order: &[Label]) -> Result<Self> {
        let perm = self.reg.permutation_to(order)?;
        let n = perm.len();
        let full: Vec<usize> = perm
            .iter()
            .copied()
            .chain(perm.iter().map(|p| p + n))
            .collect();
        Ok(DensityOperator {
            reg: Register {
                labels: order.to_vec(),
                dim: self.dim(),
            },
            matrix: self.regather(&full),
        })
    }

    pub fn aligned_to(&self, order: &[Label]) -> Result<Self> {
        if order == self.labels() {
            return Ok(self.clone());
        }
        if !self.reg.same_set(order) {
            return Err(RicError::LabelMismatch);
        }
        self.permute(order)
    }

    /// Traces out everything except `keep`; the result follows the order of `keep`.
    pub fn partial_trace(&self, keep: &[Label]) -> Result<Self> {
        if keep.is_empty() {
            return Err(RicError::EmptySelection);
        }
        let rest = self.reg.split(keep)?;
        let mut order = keep.to_vec();
        order.extend(rest.iter().cloned());
        let p = self.aligned_to(&order)?;
        let k = self.dim().pow(keep.len() as u32);
        let r = self.dim().pow(rest.len() as u32);
        let m = DMatrix::from_fn(k, k, |i, j| {
            (0..r).map(|t| p.matrix[(i * r + t, j * r + t)]).sum()
        });
        Ok(DensityOperator {
            reg: Register {
                labels: keep.to_vec(),
                dim: self.dim(),
            },
            matrix: m,
        })
    }

    /// Projects `subset` onto the pure `target`; returns the branch probability
    /// and the renormalized state of the remaining labels.
    pub fn project(&self, subset: &[Label], target: &PureState) -> Result<MixedProjection> {
        let tn = target.norm_sqr();
        if (tn - 1.0).abs() > NORM_TOL {
            return Err(RicError::NotNormalized(tn));
        }
        let rest = self.reg.split(subset)?;
        if rest.is_empty() {
            return Err(RicError::EmptySelection);
        }
        let target = target.aligned_to(subset)?;
        let mut order = subset.to_vec();
        order.extend(rest.iter().cloned());
        let p = self.aligned_to(&order)?;
        let s = target.amps.len();
        let r = self.dim().pow(rest.len() as u32);
        let t = &target.amps;
        let m = DMatrix::from_fn(r, r, |i, j| {
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..s {
                for b in 0..s {
                    acc += t[a].conj() * p.matrix[(a * r + i, b * r + j)] * t[b];
                }
            }
            acc
        });
        let probability = m.trace().re;
        let state = (probability > ZERO_PROBABILITY).then(|| {
            DensityOperator::from_parts(
                Register {
                    labels: rest,
                    dim: self.dim(),
                },
                m / C64::new(probability, 0.0),
            )
        });
        Ok(MixedProjection { probability, state })
    }

    /// `⟨y|ρ|y⟩`.
    pub fn fidelity(&self, target: &PureState) -> Result<f64> {
        if target.dim() != self.dim() {
            return Err(RicError::DimensionMismatch(self.dim(), target.dim()));
        }
        let y = target.aligned_to(self.labels())?;
        let v = nalgebra::DVector::from_column_slice(&y.amps);
        Ok((v.adjoint() * &self.matrix * &v)[(0, 0)].re)
    }

    /// Transposes the indices of `part.right()`; the result is Hermitian but
    /// generally not positive.
    pub fn partial_transpose(&self, part: &Bipartition) -> Result<DMatrix<C64>> {
        part.check_covers(&self.reg)?;
        let n = self.reg.len();
        let mut full: Vec<usize> = (0..2 * n).collect();
        for l in part.right() {
            let k = self.reg.position(l)?;
            full.swap(k, k + n);
        }
        Ok(self.regather(&full))
    }

    /// Ascending spectrum.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn largest_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().expect("nonempty spectrum")
    }

    /// Von Neumann entropy in bits.
    pub fn entropy_bits(&self) -> f64 {
        self.eigenvalues()
            .into_iter()
            .filter(|&l| l > 1e-15)
            .map(|l| -l * l.log2())
            .sum()
    }

    /// Conjugates one qudit by `op`: `ρ ↦ (op ⊗ I) ρ (op ⊗ I)†`.
    pub fn conjugate_local(&self, label: &Label, op: &DMatrix<C64>) -> Result<Self> {
        let d = self.dim();
        let pos = self.reg.position(label)?;
        let n = self.reg.len();
        let left = DMatrix::<C64>::identity(d.pow(pos as u32), d.pow(pos as u32));
        let right =
            DMatrix::<C64>::identity(d.pow((n - pos - 1) as u32), d.pow((n - pos - 1) as u32));
        let full = left.kronecker(op).kronecker(&right);
        Ok(DensityOperator {
            reg: self.reg.clone(),
            matrix: &full * &self.matrix * full.adjoint(),
        })
    }

    /// Largest entrywise difference after aligning `other` to this order.
    pub fn max_abs_diff(&self, other: &DensityOperator) -> Result<f64> {
        let o = other.aligned_to(self.labels())?;
        Ok(self
            .matrix
            .iter()
            .zip(o.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Half the trace norm of the difference.
    pub fn trace_distance(&self, other: &DensityOperator) -> Result<f64> {
        let o = other.aligned_to(self.labels())?;
        let diff = &self.matrix - &o.matrix;
        Ok(0.5
            * hermitian_eigenvalues(&diff)
                .iter()
                .map(|l| l.abs())
                .sum::<f64>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weyl::{bell, WeylLabel};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn ghz(d: usize, names: &[&str]) -> PureState {
        let n = names.len();
        let mut amps = vec![c(0.0); d.pow(n as u32)];
        for j in 0..d {
            let idx = (0..n).fold(0, |acc, _| acc * d + j);
            amps[idx] = c(1.0);
        }
        PureState::normalized(labels(names), d, amps).unwrap()
    }

    #[test]
    fn register_rejects_bad_input() {
        assert!(matches!(
            Register::new(labels(&["a"]), 1),
            Err(RicError::InvalidDimension(1))
        ));
        assert!(matches!(
            Register::new(labels(&["a", "a"]), 2),
            Err(RicError::DuplicateLabel(_))
        ));
        let r = Register::new(labels(&["x", "y", "z"]), 3).unwrap();
        assert_eq!(r.size(), 27);
        assert_eq!(r.position(&"z".into()).unwrap(), 2);
        assert!(matches!(
            r.position(&"w".into()),
            Err(RicError::UnknownLabel(_))
        ));
        assert!(r.same_set(&labels(&["z", "x", "y"])));
        assert!(!r.same_set(&labels(&["z", "x"])));
    }

    #[test]
    fn big_endian_basis_index() {
        let s = PureState::basis(labels(&["a", "b", "c"]), 3, &[1, 0, 2]).unwrap();
        let hot: Vec<usize> = s
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > 0.5)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(hot, vec![9 + 2]);
        let p = s.permute(&labels(&["c", "a", "b"])).unwrap();
        assert_eq!(
            p,
            PureState::basis(labels(&["c", "a", "b"]), 3, &[2, 1, 0]).unwrap()
        );
    }

    #[test]
    fn construction_validates_norm_and_length() {
        assert!(matches!(
            PureState::new(labels(&["a"]), 2, vec![c(1.0), c(1.0)]),
            Err(RicError::NotNormalized(_))
        ));
        assert!(PureState::new(labels(&["a"]), 2, vec![c(1.0)]).is_err());
        assert!(PureState::normalized(labels(&["a"]), 2, vec![c(0.0), c(0.0)]).is_err());
        let m = DMatrix::from_row_slice(2, 2, &[c(0.5), c(1.0), c(0.0), c(0.5)]);
        assert!(matches!(
            DensityOperator::new(labels(&["a"]), 2, m),
            Err(RicError::NotHermitian(_))
        ));
        let neg = DMatrix::from_row_slice(2, 2, &[c(1.5), c(0.0), c(0.0), c(-0.5)]);
        assert!(matches!(
            DensityOperator::new(labels(&["a"]), 2, neg),
            Err(RicError::NotPositive(_))
        ));
    }

    #[test]
    fn tensor_collision_and_dimension_errors() {
        let a = PureState::basis(labels(&["a"]), 2, &[0]).unwrap();
        let b = PureState::basis(labels(&["a"]), 2, &[1]).unwrap();
        assert!(matches!(a.tensor(&b), Err(RicError::LabelCollision(_))));
        let e = PureState::basis(labels(&["e"]), 3, &[1]).unwrap();
        assert!(matches!(
            a.tensor(&e),
            Err(RicError::DimensionMismatch(2, 3))
        ));
    }

    #[test]
    fn ghz_projection_and_reduction() {
        let d = 3;
        let g = ghz(d, &["a", "b", "c"]);
        let target = PureState::basis(labels(&["b"]), d, &[2]).unwrap();
        let pr = g.project(&labels(&["b"]), &target).unwrap();
        assert!((pr.probability - 1.0 / 3.0).abs() < 1e-12);
        let post = pr.state.unwrap();
        assert!(
            (post
                .fidelity(&PureState::basis(labels(&["a", "c"]), d, &[2, 2]).unwrap())
                .unwrap()
                - 1.0)
                .abs()
                < 1e-12
        );
        let rho = g.reduced(&labels(&["c"])).unwrap();
        assert!(
            rho.max_abs_diff(&DensityOperator::maximally_mixed(labels(&["c"]), d).unwrap())
                .unwrap()
                < 1e-12
        );
        assert!((rho.entropy_bits() - 3f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn schmidt_ranks() {
        let g = ghz(3, &["a", "b", "c", "e"]);
        let cut = Bipartition::from_names(&["a", "b"], &["c", "e"]).unwrap();
        assert_eq!(g.schmidt_rank(&cut, SCHMIDT_TOL).unwrap(), 3);
        let prod = bell(WeylLabel::new(0, 0, 3), 3, "a", "c")
            .unwrap()
            .tensor(&bell(WeylLabel::new(1, 1, 3), 3, "b", "e").unwrap())
            .unwrap();
        assert_eq!(prod.schmidt_rank(&cut, SCHMIDT_TOL).unwrap(), 9);
        let bad = Bipartition::from_names(&["a"], &["b"]).unwrap();
        assert!(matches!(
            g.schmidt_rank(&bad, SCHMIDT_TOL),
            Err(RicError::BipartitionMismatch)
        ));
    }

    #[test]
    fn bell_partial_transpose_is_negative() {
        let rho = bell(WeylLabel::IDENTITY, 2, "a", "b").unwrap().to_density();
        let pt = rho
            .partial_transpose(&Bipartition::from_names(&["a"], &["b"]).unwrap())
            .unwrap();
        let ev = hermitian_eigenvalues(&pt);
        assert!((ev[0] + 0.5).abs() < 1e-12);
        assert!(hermitian_deviation(&pt) < 1e-15);
    }

    #[test]
    fn density_projection_matches_pure_projection() {
        let g = ghz(2, &["a", "b", "c"]);
        let t = bell(WeylLabel::new(1, 0, 2), 2, "a", "b").unwrap();
        let pure = g.project(&labels(&["a", "b"]), &t).unwrap();
        let mixed = g.to_density().project(&labels(&["a", "b"]), &t).unwrap();
        assert!((pure.probability - mixed.probability).abs() < 1e-12);
        let want = pure.state.unwrap().to_density();
        assert!(mixed.state.unwrap().max_abs_diff(&want).unwrap() < 1e-12);
    }

    #[test]
    fn local_operators_and_mixtures() {
        let x = crate::weyl::weyl(WeylLabel::new(0, 1, 2), 2);
        let s = PureState::basis(labels(&["a", "b"]), 2, &[0, 0]).unwrap();
        let flipped = s.apply_local(&"b".into(), &x).unwrap();
        assert_eq!(
            flipped,
            PureState::basis(labels(&["a", "b"]), 2, &[0, 1]).unwrap()
        );
        let rho = s.to_density().conjugate_local(&"b".into(), &x).unwrap();
        assert!(rho.max_abs_diff(&flipped.to_density()).unwrap() < 1e-15);
        let mix = DensityOperator::mixture(&[(0.5, s.clone()), (0.5, flipped.clone())]).unwrap();
        assert!((mix.trace().re - 1.0).abs() < 1e-12);
        assert!((mix.trace_distance(&s.to_density()).unwrap() - 0.5).abs() < 1e-12);
        assert!((mix.largest_eigenvalue() - 0.5).abs() < 1e-12);
        assert!(matches!(
            DensityOperator::mixture(&[(0.7, s)]),
            Err(RicError::BadTrace(_))
        ));
    }

    #[test]
    fn partial_trace_of_product() {
        let a = bell(WeylLabel::new(1, 0, 3), 3, "a", "b")
            .unwrap()
            .to_density();
        let b = DensityOperator::maximally_mixed(labels(&["c"]), 3).unwrap();
        let joint = a
            .tensor(&b)
            .unwrap()
            .permute(&labels(&["c", "a", "b"]))
            .unwrap();
        let back = joint.partial_trace(&labels(&["b", "a"])).unwrap();
        assert!(back.max_abs_diff(&a).unwrap() < 1e-12);
    }
}
