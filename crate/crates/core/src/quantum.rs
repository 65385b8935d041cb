//! Pure states on composite systems, the qubit gate set, and bipartite
//! entanglement measures.
//!
//! Amplitudes are stored row-major with the first subsystem most
//! significant, so for `dims = [dA, dB]` the amplitude of `|a⟩|b⟩` sits at
//! `a·dB + b`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::numerics::{
    self, c64, inner, svd, ComplexScalar, DenseMatrix, DenseVector, NumericsError,
    DEFAULT_TOLERANCE,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("subsystem dims {dims:?} do not match vector length {len}")]
    DimsLength { dims: Vec<usize>, len: usize },
    #[error("subsystem dims differ: {left:?} vs {right:?}")]
    DimsMismatch { left: Vec<usize>, right: Vec<usize> },
    #[error("split {split} does not cut {dims:?} into two nonempty parts")]
    BadSplit { split: usize, dims: Vec<usize> },
    #[error("invalid gate targets {targets:?} for dims {dims:?}")]
    InvalidTargets {
        targets: Vec<usize>,
        dims: Vec<usize>,
    },
    #[error("expected a two-qubit state, got dims {dims:?}")]
    NotTwoQubit { dims: Vec<usize> },
    #[error("state is entangled across the cut (second Schmidt coefficient {second_coefficient})")]
    Entangled { second_coefficient: f64 },
    #[error("unknown state set '{0}' (expected 'phi' or 'psi')")]
    UnknownStateSet(String),
}

/// Normalized state vector together with its subsystem dimensions.
#[derive(Clone, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    vector: DenseVector,
}

impl PureState {
    /// Accepts `vector` only if `|‖vector‖ − 1| ≤ tol`.
    pub fn new(dims: Vec<usize>, vector: DenseVector, tol: f64) -> Result<Self, QuantumError> {
        if dims.is_empty() || dims.contains(&0) || dims.iter().product::<usize>() != vector.dim() {
            return Err(QuantumError::DimsLength {
                dims,
                len: vector.dim(),
            });
        }
        let norm = vector.norm();
        if (norm - 1.0).abs() > tol {
            return Err(QuantumError::NotNormalized { norm });
        }
        Ok(Self { dims, vector })
    }

    pub fn from_amplitudes(
        dims: Vec<usize>,
        amps: Vec<ComplexScalar>,
    ) -> Result<Self, QuantumError> {
        Self::new(dims, DenseVector::new(amps)?, DEFAULT_TOLERANCE)
    }

    /// Rescales `vector` to unit norm first.
    pub fn normalizing(dims: Vec<usize>, vector: DenseVector) -> Result<Self, QuantumError> {
        let norm = vector.norm();
        let vector = vector
            .normalized()
            .ok_or(QuantumError::NotNormalized { norm })?;
        Self::new(dims, vector, DEFAULT_TOLERANCE)
    }

    pub fn qubit(alpha: ComplexScalar, beta: ComplexScalar) -> Result<Self, QuantumError> {
        Self::from_amplitudes(vec![2], vec![alpha, beta])
    }

    pub fn zero() -> Self {
        Self::basis(&[2], 0)
    }

    pub fn one() -> Self {
        Self::basis(&[2], 1)
    }

    pub fn plus() -> Self {
        Self::real_qubit(FRAC_1_SQRT_2, FRAC_1_SQRT_2)
    }

    pub fn minus() -> Self {
        Self::real_qubit(FRAC_1_SQRT_2, -FRAC_1_SQRT_2)
    }

    fn real_qubit(a: f64, b: f64) -> Self {
        Self {
            dims: vec![2],
            vector: DenseVector::from_real(&[a, b]).expect("finite"),
        }
    }

    /// Computational basis state with flat index `index`.
    pub fn basis(dims: &[usize], index: usize) -> Self {
        Self {
            dims: dims.to_vec(),
            vector: DenseVector::basis(dims.iter().product(), index),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.vector.dim()
    }

    pub fn vector(&self) -> &DenseVector {
        &self.vector
    }

    pub fn amplitudes(&self) -> &[ComplexScalar] {
        self.vector.amplitudes()
    }

    /// `self ⊗ other`, subsystems concatenated.
    pub fn tensor(&self, other: &Self) -> Result<Self, QuantumError> {
        let vector = numerics::tensor(&self.vector, &other.vector)?;
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Ok(Self { dims, vector })
    }

    /// Haar-random state: complex Gaussian amplitudes, normalized.
    pub fn random<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Self {
        let dim: usize = dims.iter().product();
        let amps: Vec<ComplexScalar> = (0..dim)
            .map(|_| {
                let u1: f64 = 1.0 - rng.gen::<f64>();
                let u2: f64 = rng.gen();
                ComplexScalar::from_polar((-2.0 * u1.ln()).sqrt(), 2.0 * std::f64::consts::PI * u2)
            })
            .collect();
        Self::normalizing(dims.to_vec(), DenseVector::new(amps).expect("finite")).expect("nonzero")
    }

    pub fn with_phase(&self, theta: f64) -> Self {
        Self {
            dims: self.dims.clone(),
            vector: self.vector.scale(ComplexScalar::from_polar(1.0, theta)),
        }
    }

    pub fn inner(&self, other: &Self) -> Result<ComplexScalar, QuantumError> {
        self.require_same_dims(other)?;
        Ok(inner(&self.vector, &other.vector)?)
    }

    pub(crate) fn require_same_dims(&self, other: &Self) -> Result<(), QuantumError> {
        if self.dims != other.dims {
            return Err(QuantumError::DimsMismatch {
                left: self.dims.clone(),
                right: other.dims.clone(),
            });
        }
        Ok(())
    }

    /// Total dimensions on either side of `split`.
    pub fn split_dims(&self, split: usize) -> Result<(usize, usize), QuantumError> {
        if split == 0 || split >= self.dims.len() {
            return Err(QuantumError::BadSplit {
                split,
                dims: self.dims.clone(),
            });
        }
        Ok((
            self.dims[..split].iter().product(),
            self.dims[split..].iter().product(),
        ))
    }

    /// The `dimA × dimB` matrix `M[a][b]` of amplitudes across `split`.
    pub fn coefficient_matrix(&self, split: usize) -> Result<DenseMatrix, QuantumError> {
        let (da, db) = self.split_dims(split)?;
        Ok(DenseMatrix::from_fn(da, db, |a, b| self.vector[a * db + b]))
    }

    /// Projects subsystem `index` onto `outcome` (a normalized vector on that
    /// subsystem) and removes it. Returns the branch probability and the
    /// renormalized remainder, or `None` when the branch has zero weight.
    pub fn measure_subsystem(
        &self,
        index: usize,
        outcome: &DenseVector,
    ) -> Result<(f64, Option<PureState>), QuantumError> {
        if index >= self.dims.len() || self.dims.len() < 2 || outcome.dim() != self.dims[index] {
            return Err(QuantumError::InvalidTargets {
                targets: vec![index],
                dims: self.dims.clone(),
            });
        }
        let d = self.dims[index];
        let inner_size: usize = self.dims[index + 1..].iter().product();
        let outer_size: usize = self.dims[..index].iter().product();
        let mut amps = Vec::with_capacity(outer_size * inner_size);
        for o in 0..outer_size {
            for r in 0..inner_size {
                let z: ComplexScalar = (0..d)
                    .map(|k| outcome[k].conj() * self.vector[(o * d + k) * inner_size + r])
                    .sum();
                amps.push(z);
            }
        }
        let reduced = DenseVector::new(amps)?;
        let probability = reduced.norm_sqr();
        let mut dims = self.dims.clone();
        dims.remove(index);
        let post = if probability > 0.0 {
            Some(PureState::normalizing(dims, reduced)?)
        } else {
            None
        };
        Ok((probability, post))
    }
}

impl fmt::Debug for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PureState{:?} {:?}", self.dims, self.vector)
    }
}

/// Identifier of one of the two three-state families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateSetId {
    /// Bob's starting states `(|0⟩, |0⟩, |+⟩)`.
    Phi,
    /// Target states `(|0⟩, |1⟩, |+⟩)`.
    Psi,
}

impl FromStr for StateSetId {
    type Err = QuantumError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "phi" => Ok(Self::Phi),
            "psi" => Ok(Self::Psi),
            other => Err(QuantumError::UnknownStateSet(other.to_string())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PaperStateSet {
    pub id: StateSetId,
    pub states: Vec<PureState>,
}

pub fn paper_states(id: StateSetId) -> PaperStateSet {
    let states = match id {
        StateSetId::Phi => vec![PureState::zero(), PureState::zero(), PureState::plus()],
        StateSetId::Psi => vec![PureState::zero(), PureState::one(), PureState::plus()],
    };
    PaperStateSet { id, states }
}

/// `|+⟩|0⟩`: the uniform superposition of the first two cloning inputs.
pub fn plus_zero() -> PureState {
    PureState::plus()
        .tensor(&PureState::zero())
        .expect("small dims")
}

/// `(|00⟩ + |11⟩)/√2`.
pub fn bell_state() -> PureState {
    PureState::from_amplitudes(
        vec![2, 2],
        vec![
            c64(FRAC_1_SQRT_2, 0.0),
            c64(0.0, 0.0),
            c64(0.0, 0.0),
            c64(FRAC_1_SQRT_2, 0.0),
        ],
    )
    .expect("normalized")
}

/// `(|0⟩ + i|1⟩)(|0⟩ + i|1⟩)/2`, the separable probe for the deletion process.
pub fn deletion_probe_input() -> PureState {
    let y = PureState::qubit(c64(FRAC_1_SQRT_2, 0.0), c64(0.0, FRAC_1_SQRT_2)).expect("normalized");
    y.tensor(&y).expect("small dims")
}

/// Coefficients of [`deletion_probe_input`] over `|ψ_i⟩|ψ_i⟩`:
/// `((1−i)/2, −(1+i)/2, i)`.
pub fn deletion_probe_coefficients() -> [ComplexScalar; 3] {
    [c64(0.5, -0.5), c64(-0.5, -0.5), c64(0.0, 1.0)]
}

/// `(|−⟩|0⟩ + i|+⟩|1⟩)/√2`.
pub fn deletion_probe_output() -> PureState {
    PureState::from_amplitudes(
        vec![2, 2],
        vec![c64(0.5, 0.0), c64(0.0, 0.5), c64(-0.5, 0.0), c64(0.0, 0.5)],
    )
    .expect("normalized")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    X,
    Z,
    H,
    Cnot,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot => 2,
            _ => 1,
        }
    }

    pub fn matrix(self) -> DenseMatrix {
        let r = FRAC_1_SQRT_2;
        let rows: &[&[f64]] = match self {
            GateKind::X => &[&[0.0, 1.0], &[1.0, 0.0]],
            GateKind::Z => &[&[1.0, 0.0], &[0.0, -1.0]],
            GateKind::H => &[&[r, r], &[r, -r]],
            GateKind::Cnot => &[
                &[1.0, 0.0, 0.0, 0.0],
                &[0.0, 1.0, 0.0, 0.0],
                &[0.0, 0.0, 0.0, 1.0],
                &[0.0, 0.0, 1.0, 0.0],
            ],
        };
        DenseMatrix::from_real_rows(rows).expect("static gate")
    }
}

/// A named gate on specific subsystems; for CNOT the control comes first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateSpec {
    pub kind: GateKind,
    pub targets: Vec<usize>,
}

impl GateSpec {
    pub fn x(q: usize) -> Self {
        Self {
            kind: GateKind::X,
            targets: vec![q],
        }
    }
    pub fn z(q: usize) -> Self {
        Self {
            kind: GateKind::Z,
            targets: vec![q],
        }
    }
    pub fn h(q: usize) -> Self {
        Self {
            kind: GateKind::H,
            targets: vec![q],
        }
    }
    pub fn cnot(control: usize, target: usize) -> Self {
        Self {
            kind: GateKind::Cnot,
            targets: vec![control, target],
        }
    }
}

pub fn apply_gate(gate: &GateSpec, state: &PureState) -> Result<PureState, QuantumError> {
    let qubits_ok = gate.targets.len() == gate.kind.arity()
        && gate.targets.iter().all(|&t| state.dims.get(t) == Some(&2));
    if !qubits_ok {
        return Err(QuantumError::InvalidTargets {
            targets: gate.targets.clone(),
            dims: state.dims.clone(),
        });
    }
    apply_operator(&gate.kind.matrix(), &gate.targets, state)
}

/// Applies `op` to the listed subsystems (in that order, first most
/// significant), identity elsewhere. The result is renormalized, so `op`
/// should be unitary on the relevant subspace.
pub fn apply_operator(
    op: &DenseMatrix,
    targets: &[usize],
    state: &PureState,
) -> Result<PureState, QuantumError> {
    let dims = &state.dims;
    let invalid = || QuantumError::InvalidTargets {
        targets: targets.to_vec(),
        dims: dims.clone(),
    };
    if targets.is_empty() || targets.iter().any(|&t| t >= dims.len()) {
        return Err(invalid());
    }
    for (i, t) in targets.iter().enumerate() {
        if targets[..i].contains(t) {
            return Err(invalid());
        }
    }
    let sub_dims: Vec<usize> = targets.iter().map(|&t| dims[t]).collect();
    let sub_size: usize = sub_dims.iter().product();
    if !op.is_square() || op.rows() != sub_size {
        return Err(invalid());
    }

    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    // flat offset of each targeted sub-index
    let offsets: Vec<usize> = (0..sub_size)
        .map(|mut s| {
            let mut off = 0;
            for (k, &t) in targets.iter().enumerate().rev() {
                off += (s % sub_dims[k]) * strides[t];
                s /= sub_dims[k];
            }
            off
        })
        .collect();

    let total = state.dim();
    let mut out = vec![ComplexScalar::default(); total];
    for (idx, slot) in out.iter_mut().enumerate() {
        let mut row = 0;
        let mut base = idx;
        for (k, &t) in targets.iter().enumerate() {
            let digit = (idx / strides[t]) % dims[t];
            row = row * sub_dims[k] + digit;
            base -= digit * strides[t];
        }
        *slot = (0..sub_size)
            .map(|col| op[(row, col)] * state.vector[base + offsets[col]])
            .sum();
    }
    PureState::normalizing(dims.clone(), DenseVector::new(out)?)
}

/// Schmidt coefficients across `split`, nonincreasing, `min(dimA, dimB)` of them.
pub fn schmidt_coefficients(state: &PureState, split: usize) -> Result<Vec<f64>, QuantumError> {
    Ok(numerics::singular_values(&state.coefficient_matrix(split)?))
}

/// `2|ad − bc|` for a two-qubit state with amplitudes `(a, b, c, d)`.
pub fn concurrence(state: &PureState) -> Result<f64, QuantumError> {
    if state.dims != [2, 2] {
        return Err(QuantumError::NotTwoQubit {
            dims: state.dims.clone(),
        });
    }
    let z = state.amplitudes();
    Ok((2.0 * (z[0] * z[3] - z[1] * z[2]).norm()).min(1.0))
}

/// Pure-state concurrence for any cut, `2·sqrt(Σ_{k<l} σ_k²σ_l²)` over the
/// Schmidt coefficients. Coincides with [`concurrence`] for two qubits.
pub fn pure_concurrence(state: &PureState, split: usize) -> Result<f64, QuantumError> {
    if state.dims == [2, 2] && split == 1 {
        return concurrence(state);
    }
    let p: Vec<f64> = schmidt_coefficients(state, split)?
        .iter()
        .map(|s| s * s)
        .collect();
    let mut acc = 0.0;
    for k in 0..p.len() {
        for l in (k + 1)..p.len() {
            acc += p[k] * p[l];
        }
    }
    Ok(2.0 * acc.sqrt())
}

/// Splits a product state into `(factorA, factorB)`. `factorA` has its first
/// non-negligible amplitude real positive; the global phase is carried by
/// `factorB`.
pub fn product_factorize(
    state: &PureState,
    split: usize,
    tol: f64,
) -> Result<(PureState, PureState), QuantumError> {
    let m = state.coefficient_matrix(split)?;
    let d = svd(&m);
    let second = d.sigma.get(1).copied().unwrap_or(0.0);
    if d.sigma[0] < 1.0 - tol {
        return Err(QuantumError::Entangled {
            second_coefficient: second,
        });
    }
    let mut a = d.u.column(0);
    if let Some(first) = a.amplitudes().iter().find(|z| z.norm() > tol.max(1e-12)) {
        let phase = first.conj() / first.norm();
        a = a.scale(phase);
    }
    let a = a.normalized().expect("unit singular vector");
    let (da, db) = (m.rows(), m.cols());
    let b_amps: Vec<ComplexScalar> = (0..db)
        .map(|j| (0..da).map(|i| a[i].conj() * m[(i, j)]).sum())
        .collect();
    let b = DenseVector::new(b_amps)?;
    let factor_a = PureState::normalizing(state.dims[..split].to_vec(), a)?;
    let factor_b = PureState::normalizing(state.dims[split..].to_vec(), b)?;
    Ok((factor_a, factor_b))
}

/// `‖a − e^{iθ} b‖` for the phase θ that minimizes it.
pub fn phase_aligned_distance(a: &PureState, b: &PureState) -> Result<f64, QuantumError> {
    let ov = b.inner(a)?;
    let phase = if ov.norm() > 0.0 {
        ov / ov.norm()
    } else {
        c64(1.0, 0.0)
    };
    Ok(a.vector().distance(&b.vector().scale(phase))?)
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &PureState, b: &PureState) -> Result<f64, QuantumError> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}
