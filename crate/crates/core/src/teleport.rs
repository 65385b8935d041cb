//! One shared Bell pair plus classical messages: qubit teleportation and a
//! remote CNOT between Alice's and Bob's qubits.
//!
//! Both protocols are checked branch by branch. In enumerate mode every
//! measurement record is followed; sample mode draws one record from a
//! seeded generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::numerics::DenseVector;
use crate::quantum::{apply_gate, bell_state, GateSpec, PureState, QuantumError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TeleportError {
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error("input is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("expected input dims {expected:?}, got {actual:?}")]
    WrongDims {
        expected: Vec<usize>,
        actual: Vec<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceLedger {
    pub ebits_consumed: u32,
    pub cbits_a_to_b: u32,
    pub cbits_b_to_a: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Enumerate,
    Sample { seed: u64 },
}

#[derive(Debug, Clone)]
pub struct BranchOutcome {
    pub measurement_bits: Vec<u8>,
    pub probability: f64,
    pub post_state: PureState,
}

#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub branches: Vec<BranchOutcome>,
    pub ledger: ResourceLedger,
}

pub const TELEPORT_LEDGER: ResourceLedger = ResourceLedger {
    ebits_consumed: 1,
    cbits_a_to_b: 2,
    cbits_b_to_a: 0,
};

pub const NONLOCAL_CNOT_LEDGER: ResourceLedger = ResourceLedger {
    ebits_consumed: 1,
    cbits_a_to_b: 1,
    cbits_b_to_a: 1,
};

const NORM_TOLERANCE: f64 = 1e-9;

fn check_input(input: &PureState, dims: &[usize]) -> Result<(), TeleportError> {
    if input.dims() != dims {
        return Err(TeleportError::WrongDims {
            expected: dims.to_vec(),
            actual: input.dims().to_vec(),
        });
    }
    let norm = input.vector().norm();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(TeleportError::NotNormalized { norm });
    }
    Ok(())
}

fn computational(bit: u8) -> DenseVector {
    DenseVector::basis(2, bit as usize)
}

fn hadamard_basis(bit: u8) -> DenseVector {
    if bit == 0 {
        PureState::plus().vector().clone()
    } else {
        PureState::minus().vector().clone()
    }
}

/// Runs `branch` for every two-bit record, or for one record drawn with the
/// branch probabilities.
fn run_branches(
    mode: Mode,
    ledger: ResourceLedger,
    branch: impl Fn(u8, u8) -> Result<Option<BranchOutcome>, TeleportError>,
) -> Result<ProtocolRun, TeleportError> {
    let mut all = Vec::with_capacity(4);
    for first in 0..2u8 {
        for second in 0..2u8 {
            if let Some(b) = branch(first, second)? {
                all.push(b);
            }
        }
    }
    let branches = match mode {
        Mode::Enumerate => all,
        Mode::Sample { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let draw: f64 = rng.gen();
            let mut acc = 0.0;
            let mut chosen = all.len() - 1;
            for (k, b) in all.iter().enumerate() {
                acc += b.probability;
                if draw < acc {
                    chosen = k;
                    break;
                }
            }
            vec![all.swap_remove(chosen)]
        }
    };
    Ok(ProtocolRun { branches, ledger })
}

/// Teleports `input` from Alice to Bob through a shared `(|00⟩+|11⟩)/√2`.
pub fn teleport(input: &PureState, mode: Mode) -> Result<ProtocolRun, TeleportError> {
    check_input(input, &[2])?;
    // qubits: 0 = input (Alice), 1 = Alice's half of the pair, 2 = Bob's half
    let mut state = input.tensor(&bell_state())?;
    state = apply_gate(&GateSpec::cnot(0, 1), &state)?;
    state = apply_gate(&GateSpec::h(0), &state)?;

    run_branches(mode, TELEPORT_LEDGER, |m_z, m_x| {
        let (p1, rest) = state.measure_subsystem(0, &computational(m_z))?;
        let Some(rest) = rest else { return Ok(None) };
        let (p2, bob) = rest.measure_subsystem(0, &computational(m_x))?;
        let Some(mut bob) = bob else { return Ok(None) };
        if m_x == 1 {
            bob = apply_gate(&GateSpec::x(0), &bob)?;
        }
        if m_z == 1 {
            bob = apply_gate(&GateSpec::z(0), &bob)?;
        }
        Ok(Some(BranchOutcome {
            measurement_bits: vec![m_z, m_x],
            probability: p1 * p2,
            post_state: bob,
        }))
    })
}

/// CNOT with Alice's qubit as control and Bob's as target, using one shared
/// Bell pair, one bit Alice→Bob and one bit Bob→Alice.
pub fn nonlocal_cnot(input: &PureState, mode: Mode) -> Result<ProtocolRun, TeleportError> {
    check_input(input, &[2, 2])?;
    // qubits: 0 = A, 1 = B, 2 = Alice's half, 3 = Bob's half
    let mut state = input.tensor(&bell_state())?;
    state = apply_gate(&GateSpec::cnot(0, 2), &state)?;

    run_branches(mode, NONLOCAL_CNOT_LEDGER, |m, n| {
        // Alice measures her half; the bit goes to Bob
        let (p1, rest) = state.measure_subsystem(2, &computational(m))?;
        let Some(mut rest) = rest else {
            return Ok(None);
        };
        // qubits now: 0 = A, 1 = B, 2 = Bob's half
        if m == 1 {
            rest = apply_gate(&GateSpec::x(2), &rest)?;
        }
        rest = apply_gate(&GateSpec::cnot(2, 1), &rest)?;
        // Bob measures his half in the ± basis; the bit goes to Alice
        let (p2, out) = rest.measure_subsystem(2, &hadamard_basis(n))?;
        let Some(mut out) = out else { return Ok(None) };
        if n == 1 {
            out = apply_gate(&GateSpec::z(0), &out)?;
        }
        Ok(Some(BranchOutcome {
            measurement_bits: vec![m, n],
            probability: p1 * p2,
            post_state: out,
        }))
    })
}
