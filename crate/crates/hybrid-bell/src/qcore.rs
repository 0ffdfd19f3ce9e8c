//! Minimal dense complex linear algebra for the few-qubit state spaces of
//! the experiment: kets, operators, tensor products, Born-rule
//! probabilities, and the dephasing channel used by the noise model.
//!
//! The composite basis order is fixed once for the whole crate:
//! `(A_path, A_pol, B_pol)`, with path labels ordered `a < b` before the
//! beam splitter (`c < d` after) and polarization labels `H < V`. Basis
//! index `i` decomposes as `i = path * 4 + a_pol * 2 + b_pol`.

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

/// Hard cap on composite dimension; the experiment needs at most 8.
pub const MAX_DIM: usize = 64;

/// Tolerance for algebraic identities (unitarity, norms, probabilities).
pub const ALG_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum QcoreError {
    #[error("dimension mismatch: operator is {op_rows}x{op_cols}, state has dim {state_dim}")]
    DimensionMismatch {
        op_rows: usize,
        op_cols: usize,
        state_dim: usize,
    },
    #[error("composite dimension {0} exceeds the cap of {MAX_DIM}")]
    DimensionOverflow(usize),
    #[error("amplitudes must be finite")]
    NonFiniteAmplitude,
    #[error("operator does not satisfy its {kind:?} invariant (max deviation {deviation:.3e})")]
    KindInvariantViolated { kind: OperatorKind, deviation: f64 },
    #[error("born_probability requires a projector, got {0:?}")]
    NotAProjector(OperatorKind),
    #[error("visibility {0} outside [0, 1]")]
    VisibilityOutOfRange(f64),
    #[error("unknown subsystem index {index} for {count} subsystems")]
    UnknownSubsystem { index: usize, count: usize },
    #[error("subsystem dimension mismatch: operator is {op_dim}-dimensional, subsystem is {subsystem_dim}")]
    SubsystemMismatch { op_dim: usize, subsystem_dim: usize },
}

/// The three subsystems of the composite space, in basis order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    APath,
    APol,
    BPol,
}

impl Subsystem {
    /// Position of this subsystem in the fixed composite order.
    pub fn index(self) -> usize {
        match self {
            Subsystem::APath => 0,
            Subsystem::APol => 1,
            Subsystem::BPol => 2,
        }
    }
}

/// Path labels change names across the fiber beam splitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathStage {
    BeforeBs,
    AfterBs,
}

/// Human-readable labels for the 8 composite basis states, e.g. `"a,H,V"`.
pub fn composite_labels(stage: PathStage) -> [String; 8] {
    let paths = match stage {
        PathStage::BeforeBs => ["a", "b"],
        PathStage::AfterBs => ["c", "d"],
    };
    let pols = ["H", "V"];
    let mut out: Vec<String> = Vec::with_capacity(8);
    for p in paths {
        for ap in pols {
            for bp in pols {
                out.push(format!("{p},{ap},{bp}"));
            }
        }
    }
    out.try_into().unwrap()
}

/// A pure state over a tensor product of small subsystems.
///
/// Immutable after construction; all operations return new values.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    dims: Vec<usize>,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn new(dims: Vec<usize>, amps: Vec<C64>) -> Result<Self, QcoreError> {
        let dim: usize = dims.iter().product();
        if dim > MAX_DIM {
            return Err(QcoreError::DimensionOverflow(dim));
        }
        assert_eq!(dim, amps.len(), "amplitude count must match dimension");
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(QcoreError::NonFiniteAmplitude);
        }
        Ok(Self { dims, amps })
    }

    /// Single-subsystem ket with the given two amplitudes.
    pub fn qubit(a0: C64, a1: C64) -> Self {
        Self::new(vec![2], vec![a0, a1]).expect("two finite amplitudes")
    }

    /// Basis state |index⟩ of the given subsystem layout.
    pub fn basis(dims: Vec<usize>, index: usize) -> Self {
        let dim: usize = dims.iter().product();
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Self::new(dims, amps).expect("unit basis vector")
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        assert!(n > 0.0, "cannot normalize the zero vector");
        Self {
            dims: self.dims.clone(),
            amps: self.amps.iter().map(|a| a / n).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dims, other.dims);
        Self {
            dims: self.dims.clone(),
            amps: self
                .amps
                .iter()
                .zip(&other.amps)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            dims: self.dims.clone(),
            amps: self.amps.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!(self.dim(), other.dim());
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Kronecker product of two states, left factor major.
pub fn tensor(s1: &StateVector, s2: &StateVector) -> Result<StateVector, QcoreError> {
    let dim = s1.dim() * s2.dim();
    if dim > MAX_DIM {
        return Err(QcoreError::DimensionOverflow(dim));
    }
    let mut dims = s1.dims.clone();
    dims.extend_from_slice(&s2.dims);
    let mut amps = Vec::with_capacity(dim);
    for a in &s1.amps {
        for b in &s2.amps {
            amps.push(a * b);
        }
    }
    StateVector::new(dims, amps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Unitary,
    Isometry,
    Projector,
}

/// A complex matrix acting on (part of) the composite space.
///
/// Row-major entries. The declared kind is checked numerically at
/// construction: `U†U = UU† = 1`, `V†V = 1`, or `P² = P = P†`, each
/// within [`ALG_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct ElementOperator {
    rows: usize,
    cols: usize,
    entries: Vec<C64>,
    kind: OperatorKind,
}

impl ElementOperator {
    pub fn new(
        rows: usize,
        cols: usize,
        entries: Vec<C64>,
        kind: OperatorKind,
    ) -> Result<Self, QcoreError> {
        assert_eq!(rows * cols, entries.len());
        if rows > MAX_DIM || cols > MAX_DIM {
            return Err(QcoreError::DimensionOverflow(rows.max(cols)));
        }
        let op = Self {
            rows,
            cols,
            entries,
            kind,
        };
        let deviation = op.kind_deviation();
        if deviation > ALG_TOL {
            return Err(QcoreError::KindInvariantViolated { kind, deviation });
        }
        Ok(op)
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            entries[i * n + i] = C64::new(1.0, 0.0);
        }
        Self {
            rows: n,
            cols: n,
            entries,
            kind: OperatorKind::Unitary,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.cols + j]
    }

    pub fn dagger(&self) -> Self {
        let mut entries = vec![C64::new(0.0, 0.0); self.entries.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                entries[j * self.rows + i] = self.at(i, j).conj();
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            entries,
            kind: self.kind,
        }
    }

    /// Matrix product `self * other`. The kind of the result is the weakest
    /// of the two: projector/isometry composition is not tracked beyond
    /// what matrix algebra guarantees, so the product carries
    /// `Isometry` unless both factors are unitary or either is a projector.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut entries = vec![C64::new(0.0, 0.0); self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.at(i, k);
                if aik.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    entries[i * other.cols + j] += aik * other.at(k, j);
                }
            }
        }
        let kind = match (self.kind, other.kind) {
            (OperatorKind::Unitary, OperatorKind::Unitary) => OperatorKind::Unitary,
            (OperatorKind::Projector, _) | (_, OperatorKind::Projector) => OperatorKind::Projector,
            _ => OperatorKind::Isometry,
        };
        Self {
            rows: self.rows,
            cols: other.cols,
            entries,
            kind,
        }
    }

    /// Rank-1 projector |v̂⟩⟨v̂| onto the (normalized) direction of `v`.
    pub fn projector_onto(v: &StateVector) -> Self {
        let v = v.normalized();
        let n = v.dim();
        let mut entries = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = v.amps[i] * v.amps[j].conj();
            }
        }
        Self {
            rows: n,
            cols: n,
            entries,
            kind: OperatorKind::Projector,
        }
    }

    /// Max deviation from the declared kind invariant.
    pub fn kind_deviation(&self) -> f64 {
        match self.kind {
            OperatorKind::Unitary => {
                if self.rows != self.cols {
                    return f64::INFINITY;
                }
                let dag = self.dagger();
                let a = max_dev_from_identity(&dag.matmul_raw(self));
                let b = max_dev_from_identity(&self.matmul_raw(&dag));
                a.max(b)
            }
            OperatorKind::Isometry => max_dev_from_identity(&self.dagger().matmul_raw(self)),
            OperatorKind::Projector => {
                if self.rows != self.cols {
                    return f64::INFINITY;
                }
                let mut dev: f64 = 0.0;
                let sq = self.matmul_raw(self);
                for i in 0..self.rows {
                    for j in 0..self.cols {
                        dev = dev.max((sq.at(i, j) - self.at(i, j)).norm());
                        dev = dev.max((self.at(i, j) - self.at(j, i).conj()).norm());
                    }
                }
                dev
            }
        }
    }

    /// Product without kind bookkeeping, for invariant checks.
    fn matmul_raw(&self, other: &Self) -> Self {
        let mut p = self.clone();
        p.kind = OperatorKind::Projector; // irrelevant, never validated
        let mut entries = vec![C64::new(0.0, 0.0); self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.at(i, k);
                for j in 0..other.cols {
                    entries[i * other.cols + j] += aik * other.at(k, j);
                }
            }
        }
        p.rows = self.rows;
        p.cols = other.cols;
        p.entries = entries;
        p
    }
}

fn max_dev_from_identity(m: &ElementOperator) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..m.rows {
        for j in 0..m.cols {
            let expect = if i == j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            };
            dev = dev.max((m.at(i, j) - expect).norm());
        }
    }
    dev
}

/// Applies `op` to `s`. For a projector the result is left unnormalized so
/// that its squared norm is the Born probability of the projected subspace.
pub fn apply(op: &ElementOperator, s: &StateVector) -> Result<StateVector, QcoreError> {
    if op.cols != s.dim() {
        return Err(QcoreError::DimensionMismatch {
            op_rows: op.rows,
            op_cols: op.cols,
            state_dim: s.dim(),
        });
    }
    let mut amps = vec![C64::new(0.0, 0.0); op.rows];
    for (i, out) in amps.iter_mut().enumerate() {
        for j in 0..op.cols {
            *out += op.at(i, j) * s.amps[j];
        }
    }
    // Dims of the output: a square operator preserves the layout; the PBS
    // isometry prepends the path subsystem, and more generally the caller
    // must know the output layout. We keep the input layout when square and
    // fall back to a single flat subsystem otherwise; constructors that
    // change the layout re-wrap the result.
    let dims = if op.rows == op.cols {
        s.dims.clone()
    } else {
        vec![op.rows]
    };
    StateVector::new(dims, amps)
}

/// Reinterprets a state's flat dimension as the given subsystem layout.
pub fn with_layout(s: &StateVector, dims: Vec<usize>) -> StateVector {
    assert_eq!(dims.iter().product::<usize>(), s.dim());
    StateVector::new(dims, s.amps.clone()).expect("same amplitudes")
}

/// Embeds a square operator on one subsystem into the composite space,
/// acting as the identity elsewhere. Preserves the operator kind.
pub fn lift_to_composite(
    op: &ElementOperator,
    target: usize,
    dims: &[usize],
) -> Result<ElementOperator, QcoreError> {
    if target >= dims.len() {
        return Err(QcoreError::UnknownSubsystem {
            index: target,
            count: dims.len(),
        });
    }
    if op.rows != op.cols || op.rows != dims[target] {
        return Err(QcoreError::SubsystemMismatch {
            op_dim: op.rows,
            subsystem_dim: dims[target],
        });
    }
    let total: usize = dims.iter().product();
    if total > MAX_DIM {
        return Err(QcoreError::DimensionOverflow(total));
    }
    let before: usize = dims[..target].iter().product();
    let d = dims[target];
    let after: usize = dims[target + 1..].iter().product();
    let mut entries = vec![C64::new(0.0, 0.0); total * total];
    for b in 0..before {
        for i in 0..d {
            for j in 0..d {
                let v = op.at(i, j);
                if v.norm_sqr() == 0.0 {
                    continue;
                }
                for a in 0..after {
                    let row = (b * d + i) * after + a;
                    let col = (b * d + j) * after + a;
                    entries[row * total + col] = v;
                }
            }
        }
    }
    Ok(ElementOperator {
        rows: total,
        cols: total,
        entries,
        kind: op.kind,
    })
}

/// Born probability ⟨s|P|s⟩ of a projector, clamped to [0, 1] within
/// [`ALG_TOL`] slack only.
pub fn born_probability(p: &ElementOperator, s: &StateVector) -> Result<f64, QcoreError> {
    if p.kind != OperatorKind::Projector {
        return Err(QcoreError::NotAProjector(p.kind));
    }
    let ps = apply(p, s)?;
    let prob = s.inner(&ps).re;
    debug_assert!(prob > -ALG_TOL && prob < 1.0 + ALG_TOL);
    Ok(prob.clamp(0.0, 1.0))
}

/// A mixed state; carrier for the path-dephasing noise channel.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    dims: Vec<usize>,
    entries: Vec<C64>,
}

impl DensityOperator {
    pub fn from_pure(s: &StateVector) -> Self {
        let n = s.dim();
        let mut entries = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = s.amps[i] * s.amps[j].conj();
            }
        }
        Self {
            dims: s.dims.clone(),
            entries,
        }
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.dim() + j]
    }

    pub fn trace(&self) -> f64 {
        let n = self.dim();
        (0..n).map(|i| self.entries[i * n + i].re).sum()
    }

    /// ρ → M ρ M†. With a unitary this is evolution; with a projector the
    /// trace of the result is the outcome probability.
    pub fn conjugate_by(&self, m: &ElementOperator) -> Result<Self, QcoreError> {
        let n = self.dim();
        if m.cols != n {
            return Err(QcoreError::DimensionMismatch {
                op_rows: m.rows,
                op_cols: m.cols,
                state_dim: n,
            });
        }
        // tmp = M ρ
        let mut tmp = vec![C64::new(0.0, 0.0); m.rows * n];
        for i in 0..m.rows {
            for k in 0..n {
                let mik = m.at(i, k);
                if mik.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    tmp[i * n + j] += mik * self.entries[k * n + j];
                }
            }
        }
        // out = tmp M†
        let mut entries = vec![C64::new(0.0, 0.0); m.rows * m.rows];
        for i in 0..m.rows {
            for j in 0..m.rows {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..n {
                    acc += tmp[i * n + k] * m.at(j, k).conj();
                }
                entries[i * m.rows + j] = acc;
            }
        }
        let dims = if m.rows == self.dim() {
            self.dims.clone()
        } else {
            vec![m.rows]
        };
        Ok(Self { dims, entries })
    }

    /// Tr(P ρ) for a projector, clamped like [`born_probability`].
    pub fn probability(&self, p: &ElementOperator) -> Result<f64, QcoreError> {
        if p.kind() != OperatorKind::Projector {
            return Err(QcoreError::NotAProjector(p.kind()));
        }
        let n = self.dim();
        if p.cols != n {
            return Err(QcoreError::DimensionMismatch {
                op_rows: p.rows,
                op_cols: p.cols,
                state_dim: n,
            });
        }
        let mut tr = 0.0;
        for i in 0..n {
            for k in 0..n {
                tr += (p.at(i, k) * self.entries[k * n + i]).re;
            }
        }
        debug_assert!(tr > -ALG_TOL && tr < 1.0 + ALG_TOL + 1e-12);
        Ok(tr.clamp(0.0, 1.0))
    }

    /// Partial trace over every subsystem except `keep`.
    pub fn reduced(&self, keep: usize) -> Vec<C64> {
        let dims = &self.dims;
        let before: usize = dims[..keep].iter().product();
        let d = dims[keep];
        let after: usize = dims[keep + 1..].iter().product();
        let n = self.dim();
        let mut out = vec![C64::new(0.0, 0.0); d * d];
        for b in 0..before {
            for a in 0..after {
                for i in 0..d {
                    for j in 0..d {
                        let row = (b * d + i) * after + a;
                        let col = (b * d + j) * after + a;
                        out[i * d + j] += self.entries[row * n + col];
                    }
                }
            }
        }
        out
    }
}

/// Mixes the pure state with its path-decohered version:
/// ρ = V |s⟩⟨s| + (1−V) D(|s⟩⟨s|), where D zeroes every coherence between
/// distinct basis states of the dephasing subsystem. Fringe terms involving
/// that subsystem scale linearly with V; populations are untouched.
pub fn dephase_mix(
    s: &StateVector,
    visibility: f64,
    dephasing_subsystem: usize,
) -> Result<DensityOperator, QcoreError> {
    if !(0.0..=1.0).contains(&visibility) || !visibility.is_finite() {
        return Err(QcoreError::VisibilityOutOfRange(visibility));
    }
    if dephasing_subsystem >= s.dims.len() {
        return Err(QcoreError::UnknownSubsystem {
            index: dephasing_subsystem,
            count: s.dims.len(),
        });
    }
    let mut rho = DensityOperator::from_pure(s);
    let dims = s.dims.clone();
    let after: usize = dims[dephasing_subsystem + 1..].iter().product();
    let d = dims[dephasing_subsystem];
    let n = s.dim();
    let sub_index = |i: usize| (i / after) % d;
    for i in 0..n {
        for j in 0..n {
            if sub_index(i) != sub_index(j) {
                rho.entries[i * n + j] *= visibility;
            }
        }
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn ket_h() -> StateVector {
        StateVector::qubit(c(1.0, 0.0), c(0.0, 0.0))
    }

    fn ket_v() -> StateVector {
        StateVector::qubit(c(0.0, 0.0), c(1.0, 0.0))
    }

    fn ket_plus() -> StateVector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::qubit(c(s, 0.0), c(s, 0.0))
    }

    #[test]
    fn tensor_of_basis_states() {
        let hv = tensor(&ket_h(), &ket_v()).unwrap();
        assert_eq!(hv.dim(), 4);
        assert_abs_diff_eq!(hv.amplitudes()[1].re, 1.0, epsilon = 1e-12);
        assert!(hv
            .amplitudes()
            .iter()
            .enumerate()
            .all(|(i, a)| i == 1 || a.norm() < 1e-12));
    }

    #[test]
    fn tensor_of_superposition() {
        let s = tensor(&ket_plus(), &ket_h()).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let expect = [r, 0.0, r, 0.0];
        for (a, e) in s.amplitudes().iter().zip(expect) {
            assert_abs_diff_eq!(a.re, e, epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn bell_state_from_tensor_calls_has_unit_norm() {
        // (|H⟩_A|V⟩_B + |V⟩_A|H⟩_B)/√2
        let hv = tensor(&ket_h(), &ket_v()).unwrap();
        let vh = tensor(&ket_v(), &ket_h()).unwrap();
        let bell = hv.add(&vh).scale(c(std::f64::consts::FRAC_1_SQRT_2, 0.0));
        assert_abs_diff_eq!(bell.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn tensor_overflow_is_rejected() {
        let s8 = StateVector::basis(vec![2, 2, 2], 0);
        let s16 = tensor(&s8, &s8).unwrap();
        assert!(matches!(
            tensor(&s16, &s16),
            Err(QcoreError::DimensionOverflow(_))
        ));
    }

    #[test]
    fn identity_apply_is_noop() {
        let s = ket_plus();
        let out = apply(&ElementOperator::identity(2), &s).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn projector_leaves_born_weight() {
        let p = ElementOperator::projector_onto(&ket_h());
        let out = apply(&p, &ket_plus()).unwrap();
        assert_abs_diff_eq!(out.norm() * out.norm(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn apply_dimension_mismatch() {
        let p = ElementOperator::projector_onto(&ket_h());
        let s = StateVector::basis(vec![2, 2], 0);
        assert!(matches!(
            apply(&p, &s),
            Err(QcoreError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn lift_identity_is_identity() {
        let id = ElementOperator::identity(2);
        let lifted = lift_to_composite(&id, 1, &[2, 2, 2]).unwrap();
        assert_eq!(lifted.rows(), 8);
        for i in 0..8 {
            for j in 0..8 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(lifted.at(i, j).re, expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn lift_pauli_z_on_b_pol() {
        let z = ElementOperator::new(
            2,
            2,
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
            OperatorKind::Unitary,
        )
        .unwrap();
        let lifted = lift_to_composite(&z, 2, &[2, 2, 2]).unwrap();
        for i in 0..8 {
            let expect = if i % 2 == 0 { 1.0 } else { -1.0 };
            assert_abs_diff_eq!(lifted.at(i, i).re, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn lift_unknown_subsystem() {
        let id = ElementOperator::identity(2);
        assert!(matches!(
            lift_to_composite(&id, 3, &[2, 2, 2]),
            Err(QcoreError::UnknownSubsystem { .. })
        ));
    }

    #[test]
    fn born_on_diagonal_projector() {
        let p = ElementOperator::projector_onto(&ket_h());
        assert_abs_diff_eq!(born_probability(&p, &ket_plus()).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn born_rejects_non_projector() {
        let id2 = ElementOperator::identity(2);
        assert!(matches!(
            born_probability(&id2, &ket_plus()),
            Err(QcoreError::NotAProjector(_))
        ));
    }

    #[test]
    fn completeness_over_basis_projectors() {
        let s = StateVector::new(
            vec![2, 2],
            vec![c(0.3, 0.1), c(0.2, -0.4), c(0.5, 0.2), c(0.1, 0.0)],
        )
        .unwrap()
        .normalized();
        let total: f64 = (0..4)
            .map(|i| {
                let p = ElementOperator::projector_onto(&StateVector::basis(vec![2, 2], i));
                born_probability(&p, &s).unwrap()
            })
            .sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn dephase_full_visibility_is_pure() {
        let s = tensor(&ket_plus(), &ket_h()).unwrap();
        let rho = dephase_mix(&s, 1.0, 0).unwrap();
        let pure = DensityOperator::from_pure(&s);
        for i in 0..4 {
            for j in 0..4 {
                assert_abs_diff_eq!(rho.at(i, j).re, pure.at(i, j).re, epsilon = 1e-12);
                assert_abs_diff_eq!(rho.at(i, j).im, pure.at(i, j).im, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn dephase_zero_visibility_kills_coherence() {
        let rho = dephase_mix(&ket_plus(), 0.0, 0).unwrap();
        assert_abs_diff_eq!(rho.at(0, 0).re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.at(1, 1).re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.at(0, 1).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn dephase_rejects_bad_visibility() {
        assert!(matches!(
            dephase_mix(&ket_plus(), 1.2, 0),
            Err(QcoreError::VisibilityOutOfRange(_))
        ));
    }

    fn random_unitary_2x2(a: f64, b: f64, g: f64) -> ElementOperator {
        // U = e^{iγZ/…} parametrized via Euler-like angles; always unitary.
        let (ca, sa) = (a.cos(), a.sin());
        let e1 = C64::from_polar(1.0, b);
        let e2 = C64::from_polar(1.0, g);
        ElementOperator::new(
            2,
            2,
            vec![
                e1 * ca,
                e2 * sa,
                -e2.conj() * sa,
                e1.conj() * ca,
            ],
            OperatorKind::Unitary,
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn lifted_unitary_stays_unitary(
            a in 0.0..std::f64::consts::TAU,
            b in 0.0..std::f64::consts::TAU,
            g in 0.0..std::f64::consts::TAU,
            target in 0usize..3,
        ) {
            let u = random_unitary_2x2(a, b, g);
            let lifted = lift_to_composite(&u, target, &[2, 2, 2]).unwrap();
            prop_assert!(lifted.kind_deviation() < 1e-9);
        }

        #[test]
        fn norm_preserved_through_unitary_chain(
            a in 0.0..std::f64::consts::TAU,
            b in 0.0..std::f64::consts::TAU,
            g in 0.0..std::f64::consts::TAU,
            re in -1.0f64..1.0,
            im in -1.0f64..1.0,
        ) {
            prop_assume!(re.abs() + im.abs() > 1e-3);
            let s = StateVector::qubit(c(re, im), c(0.4, -0.3)).normalized();
            let u = random_unitary_2x2(a, b, g);
            let out = apply(&u, &apply(&u, &s).unwrap()).unwrap();
            prop_assert!((out.norm() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn tensor_is_associative(
            x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0,
        ) {
            prop_assume!(x.abs() > 1e-3 && y.abs() > 1e-3 && z.abs() > 1e-3);
            let s1 = StateVector::qubit(c(x, 0.2), c(0.5, -0.1)).normalized();
            let s2 = StateVector::qubit(c(y, -0.4), c(0.3, 0.6)).normalized();
            let s3 = StateVector::qubit(c(z, 0.1), c(-0.2, 0.7)).normalized();
            let left = tensor(&tensor(&s1, &s2).unwrap(), &s3).unwrap();
            let right = tensor(&s1, &tensor(&s2, &s3).unwrap()).unwrap();
            for (a, b) in left.amplitudes().iter().zip(right.amplitudes()) {
                prop_assert!((a - b).norm() < 1e-12);
            }
        }

        #[test]
        fn dephase_preserves_trace_and_diagonal(v in 0.0f64..=1.0) {
            let s = tensor(&ket_plus(), &ket_v()).unwrap();
            let rho = dephase_mix(&s, v, 0).unwrap();
            prop_assert!((rho.trace() - 1.0).abs() < 1e-12);
            let pure = DensityOperator::from_pure(&s);
            for i in 0..4 {
                prop_assert!((rho.at(i, i) - pure.at(i, i)).norm() < 1e-12);
            }
        }
    }
}
