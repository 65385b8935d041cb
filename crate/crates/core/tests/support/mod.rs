//! Seeded generators, independent oracles and the property suite shared by
//! the `properties` and `acceptance` test targets.

#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, RngSeed, TestCaseError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qcatalysis::catalysis::{
    classify, deletion_family_sweep, reversibility_overlap, REVERSIBILITY_TARGET,
};
use qcatalysis::cli::{
    emit_report, parse_spec_file, run_scenario, write_spec_file, Format, RunConfig,
};
use qcatalysis::numerics::{
    c64, combine, gram, hermitian_eigen, hermitian_eigenvalues, inner, span_coefficients, tensor,
    ComplexScalar, DenseMatrix, DenseVector,
};
use qcatalysis::process::{
    apply_process, construct_isometry, decide, gram_matrix, output_density, FeasibilityVerdict,
    InfeasibilityReason, ProcessSpec,
};
use qcatalysis::quantum::{
    apply_gate, apply_operator, concurrence, fidelity, paper_states, phase_aligned_distance,
    product_factorize, schmidt_coefficients, GateSpec, PureState, StateSetId,
};
use qcatalysis::teleport::{nonlocal_cnot, teleport, Mode, NONLOCAL_CNOT_LEDGER, TELEPORT_LEDGER};

pub const TOL: f64 = 1e-9;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> ComplexScalar {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    ComplexScalar::from_polar((-2.0 * u1.ln()).sqrt(), 2.0 * std::f64::consts::PI * u2)
        * 0.5f64.sqrt()
}

pub fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> DenseVector {
    DenseVector::new((0..dim).map(|_| gaussian(rng)).collect()).unwrap()
}

pub fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> DenseVector {
    random_vector(rng, dim).normalized().unwrap()
}

/// Haar-ish unitary: Gram–Schmidt on Gaussian columns.
pub fn random_unitary(rng: &mut ChaCha8Rng, dim: usize) -> DenseMatrix {
    let mut cols: Vec<DenseVector> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v = random_vector(rng, dim);
        for _ in 0..2 {
            for q in &cols {
                let c = inner(q, &v).unwrap();
                v = v.sub(&q.scale(c)).unwrap();
            }
        }
        if let Some(v) = v.normalized() {
            cols.push(v);
        }
    }
    DenseMatrix::from_columns(&cols).unwrap()
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let z = if i == j {
                c64(gaussian(rng).re, 0.0)
            } else {
                gaussian(rng)
            };
            a[(i, j)] = z;
            a[(j, i)] = z.conj();
        }
    }
    a
}

fn state(dims: &[usize], v: DenseVector) -> PureState {
    PureState::new(dims.to_vec(), v, 1e-12).unwrap()
}

/// Sampling families for random process specs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Outputs are a fixed unitary applied to the inputs: always realizable.
    Unitary,
    /// Unrelated random outputs: mostly infeasible.
    RandomOutputs,
    /// Inputs built so that `G_in = G_out ∘ E` for an explicit environment.
    Dilated,
    /// Like `Dilated`, with outputs drawn from two orthogonal states so that
    /// some environment overlaps are left free.
    BasisOutputs,
}

pub const FAMILIES: [Family; 4] = [
    Family::Unitary,
    Family::RandomOutputs,
    Family::Dilated,
    Family::BasisOutputs,
];

impl Family {
    /// Whether a realizing environment exists by construction.
    pub fn realizable_by_construction(self) -> bool {
        !matches!(self, Family::RandomOutputs)
    }
}

fn input_min_eigenvalue(vs: &[DenseVector]) -> f64 {
    hermitian_eigenvalues(&gram(vs).unwrap(), 1e-12).unwrap()[0]
}

/// Columns of `g^{1/2}`: vectors whose Gram matrix is `g`.
fn gram_square_root_columns(g: &DenseMatrix) -> Vec<DenseVector> {
    let eig = hermitian_eigen(g, 1e-14).unwrap();
    let n = g.rows();
    let mut root = DenseMatrix::zeros(n, n);
    for k in 0..n {
        let s = eig.values[k].max(0.0).sqrt();
        let v = eig.vectors.column(k);
        for i in 0..n {
            for j in 0..n {
                root[(i, j)] += v[i] * v[j].conj() * s;
            }
        }
    }
    (0..n).map(|j| root.column(j)).collect()
}

/// Random spec with `dimA, dimB ≤ 3`, `n ≤ 4` and independent inputs
/// (smallest Gram eigenvalue above 1e-6).
pub fn random_spec(rng: &mut ChaCha8Rng, family: Family) -> ProcessSpec {
    loop {
        let da = rng.gen_range(1..=3usize);
        let db = rng.gen_range(1..=3usize);
        let d = da * db;
        let n = rng.gen_range(1..=d.min(4));
        let dims = [da, db];
        let (ins, outs): (Vec<DenseVector>, Vec<DenseVector>) = match family {
            Family::Unitary => {
                let u = random_unitary(rng, d);
                let ins: Vec<_> = (0..n).map(|_| random_unit(rng, d)).collect();
                let outs = ins.iter().map(|a| u.matvec(a).unwrap()).collect();
                (ins, outs)
            }
            Family::RandomOutputs => (
                (0..n).map(|_| random_unit(rng, d)).collect(),
                (0..n).map(|_| random_unit(rng, d)).collect(),
            ),
            Family::Dilated | Family::BasisOutputs => {
                let outs: Vec<_> = if family == Family::Dilated {
                    (0..n).map(|_| random_unit(rng, d)).collect()
                } else {
                    let e0 = random_unit(rng, d);
                    let e1 = random_vector(rng, d);
                    let c = inner(&e0, &e1).unwrap();
                    let e1 = e1
                        .sub(&e0.scale(c))
                        .unwrap()
                        .normalized()
                        .unwrap_or_else(|| e0.clone());
                    (0..n)
                        .map(|_| {
                            if rng.gen_bool(0.5) {
                                e1.clone()
                            } else {
                                e0.clone()
                            }
                        })
                        .collect()
                };
                let k = if family == Family::Dilated {
                    rng.gen_range(1..=2usize)
                } else {
                    4
                };
                let envs: Vec<_> = (0..n).map(|_| random_unit(rng, k)).collect();
                let g_in = DenseMatrix::from_fn(n, n, |i, j| {
                    inner(&outs[i], &outs[j]).unwrap() * inner(&envs[i], &envs[j]).unwrap()
                });
                let u = random_unitary(rng, d);
                let ins: Option<Vec<_>> = gram_square_root_columns(&g_in)
                    .into_iter()
                    .map(|c| {
                        let mut padded = c.into_amplitudes();
                        padded.resize(d, c64(0.0, 0.0));
                        u.matvec(&DenseVector::new(padded).unwrap())
                            .unwrap()
                            .normalized()
                    })
                    .collect();
                match ins {
                    Some(ins) => (ins, outs),
                    None => continue,
                }
            }
        };
        if input_min_eigenvalue(&ins) <= 1e-6 {
            continue;
        }
        let pairs = ins
            .into_iter()
            .zip(outs)
            .map(|(a, b)| (state(&dims, a), state(&dims, b)))
            .collect();
        return ProcessSpec::new(da, db, pairs).unwrap();
    }
}

/// In-span random input for `spec`.
pub fn random_in_span(rng: &mut ChaCha8Rng, spec: &ProcessSpec) -> PureState {
    let vs: Vec<DenseVector> = spec.inputs().iter().map(|s| s.vector().clone()).collect();
    let alpha: Vec<ComplexScalar> = (0..vs.len()).map(|_| gaussian(rng)).collect();
    PureState::normalizing(
        vec![spec.dim_a(), spec.dim_b()],
        combine(&vs, &alpha).unwrap(),
    )
    .unwrap()
}

/// Outcome of checking one spec against the oracles.
#[derive(Debug, Default, Clone, Copy)]
pub struct OracleTally {
    pub realizable: usize,
    pub modulus: usize,
    pub other_infeasible: usize,
    pub undetermined: usize,
}

/// Checks a verdict against independently computed quantities: the
/// dilation must be unitary and reproduce every pair; a modulus certificate
/// must exhibit `|G_in| > |G_out| + tol` at the cited pair; constructions
/// known to be realizable must not be reported infeasible.
pub fn check_verdict(
    spec: &ProcessSpec,
    family: Family,
    tally: &mut OracleTally,
) -> Result<(), String> {
    let verdict = decide(spec, TOL).map_err(|e| format!("decide failed: {e}"))?;
    match &verdict {
        FeasibilityVerdict::Realizable { completed_gram } => {
            tally.realizable += 1;
            let n = spec.len();
            for i in 0..n {
                if (completed_gram[(i, i)] - c64(1.0, 0.0)).norm() > TOL {
                    return Err(format!(
                        "completed gram diagonal {i} is {}",
                        completed_gram[(i, i)]
                    ));
                }
            }
            let min = hermitian_eigenvalues(completed_gram, 1e-12).map_err(|e| e.to_string())?[0];
            if min < -TOL {
                return Err(format!("completed gram not PSD: {min}"));
            }
            let d =
                construct_isometry(spec, &verdict, TOL).map_err(|e| format!("isometry: {e}"))?;
            let v = &d.unitary;
            let vdv = v.adjoint().matmul(v).unwrap();
            let err = vdv.max_abs_diff(&DenseMatrix::identity(v.rows())).unwrap();
            if err > TOL {
                return Err(format!("V†V deviates from I by {err:e}"));
            }
            let e0 = DenseVector::basis(d.env_dim, 0);
            for (k, p) in spec.pairs().iter().enumerate() {
                let image = v.matvec(&tensor(p.input.vector(), &e0).unwrap()).unwrap();
                let target = tensor(p.output.vector(), &d.environment_states[k]).unwrap();
                let dist = image.distance(&target).unwrap();
                if dist > TOL {
                    return Err(format!("pair {k} reproduced with error {dist:e}"));
                }
                // the environment states must realize the completed Gram matrix
                for (l, s) in d.environment_states.iter().enumerate() {
                    let g = inner(&d.environment_states[k], s).unwrap();
                    if (g - completed_gram[(k, l)]).norm() > 1e-8 {
                        return Err(format!("environment overlap ({k},{l}) is {g}"));
                    }
                }
            }
        }
        FeasibilityVerdict::Infeasible { certificate } => {
            if family.realizable_by_construction() {
                return Err(format!(
                    "realizable construction reported infeasible: {certificate:?}"
                ));
            }
            if certificate.reason == InfeasibilityReason::ModulusViolation {
                tally.modulus += 1;
                let (i, j) = certificate.pair;
                let p = spec.pairs();
                let gin = inner(p[i].input.vector(), p[j].input.vector())
                    .unwrap()
                    .norm();
                let gout = inner(p[i].output.vector(), p[j].output.vector())
                    .unwrap()
                    .norm();
                if gin <= gout + TOL {
                    return Err(format!(
                        "unsound certificate at ({i},{j}): |G_in| {gin} vs |G_out| {gout}"
                    ));
                }
            } else {
                tally.other_infeasible += 1;
            }
        }
        FeasibilityVerdict::Undetermined { .. } => tally.undetermined += 1,
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Property suite

pub struct Property {
    pub module: &'static str,
    pub name: &'static str,
    pub cases: u32,
    pub run: fn(u32) -> Result<(), String>,
}

fn runner(cases: u32, salt: u8) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        rng_algorithm: RngAlgorithm::ChaCha,
        rng_seed: RngSeed::Fixed(u64::from(salt) + 1),
        ..Config::default()
    };
    TestRunner::new(config)
}

fn fail(msg: impl Into<String>) -> TestCaseError {
    TestCaseError::fail(msg.into())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(fail(msg()))
    }
}

fn run_seeded(
    cases: u32,
    salt: u8,
    body: impl Fn(&mut ChaCha8Rng) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner(cases, salt)
        .run(&any::<u64>(), |seed| body(&mut rng(seed)))
        .map_err(|e| e.to_string())
}

fn tensor_norm(cases: u32) -> Result<(), String> {
    run_seeded(cases, 1, |r| {
        let (du, dv) = (r.gen_range(1..=6), r.gen_range(1..=6));
        let u = random_vector(r, du);
        let v = random_vector(r, dv);
        let lhs = tensor(&u, &v).unwrap().norm();
        ensure((lhs - u.norm() * v.norm()).abs() <= 1e-12, || {
            format!("{lhs}")
        })
    })
}

fn inner_conjugate_symmetry(cases: u32) -> Result<(), String> {
    run_seeded(cases, 2, |r| {
        let d = r.gen_range(1..=8);
        let u = random_vector(r, d);
        let v = random_vector(r, d);
        let diff = (inner(&u, &v).unwrap() - inner(&v, &u).unwrap().conj()).norm();
        ensure(diff <= 1e-12, || format!("{diff:e}"))
    })
}

fn eigen_trace_and_reconstruction(cases: u32) -> Result<(), String> {
    run_seeded(cases, 3, |r| {
        let d = r.gen_range(1..=6);
        let m = random_hermitian(r, d);
        let eig = hermitian_eigen(&m, 1e-12).map_err(|e| fail(e.to_string()))?;
        let sum: f64 = eig.values.iter().sum();
        ensure((sum - m.trace().re).abs() <= TOL, || {
            format!("sum {sum} trace {}", m.trace())
        })?;
        let err = eig.reconstruct().max_abs_diff(&m).unwrap();
        ensure(err <= TOL, || format!("reconstruction error {err:e}"))?;
        ensure(eig.values.windows(2).all(|w| w[0] <= w[1]), || {
            "eigenvalues not ascending".into()
        })
    })
}

fn span_resynthesis(cases: u32) -> Result<(), String> {
    run_seeded(cases, 4, |r| {
        let d = r.gen_range(1..=6);
        let k = r.gen_range(1..=d);
        let basis: Vec<_> = (0..k).map(|_| random_unit(r, d)).collect();
        if input_min_eigenvalue(&basis) <= 1e-6 {
            return Ok(());
        }
        let target = random_vector(r, d);
        let fit = span_coefficients(&basis, &target, TOL).map_err(|e| fail(e.to_string()))?;
        let dist = combine(&basis, &fit.coefficients)
            .unwrap()
            .distance(&target)
            .unwrap();
        ensure((dist - fit.residual).abs() <= TOL, || {
            format!("distance {dist} residual {}", fit.residual)
        })
    })
}

fn random_gate(r: &mut ChaCha8Rng, qubits: usize) -> GateSpec {
    let q = r.gen_range(0..qubits);
    match r.gen_range(0..4) {
        0 => GateSpec::x(q),
        1 => GateSpec::z(q),
        2 => GateSpec::h(q),
        _ => {
            let mut t = r.gen_range(0..qubits - 1);
            if t >= q {
                t += 1;
            }
            GateSpec::cnot(q, t)
        }
    }
}

fn gates_preserve_norm_and_self_inverse(cases: u32) -> Result<(), String> {
    run_seeded(cases, 5, |r| {
        let qubits = r.gen_range(2..=4);
        let s = PureState::random(&vec![2; qubits], r);
        let g = random_gate(r, qubits);
        let once = apply_gate(&g, &s).map_err(|e| fail(e.to_string()))?;
        let twice = apply_gate(&g, &once).map_err(|e| fail(e.to_string()))?;
        ensure((once.vector().norm() - 1.0).abs() <= 1e-12, || {
            "norm changed".into()
        })?;
        let d = twice.vector().distance(s.vector()).unwrap();
        ensure(d <= 1e-12, || {
            format!("{g:?} twice moved the state by {d:e}")
        })
    })
}

fn concurrence_schmidt(cases: u32) -> Result<(), String> {
    run_seeded(cases, 6, |r| {
        let s = PureState::random(&[2, 2], r);
        let c = concurrence(&s).unwrap();
        let sc = schmidt_coefficients(&s, 1).unwrap();
        let expected = 2.0 * sc[0] * sc.get(1).copied().unwrap_or(0.0);
        ensure((c - expected).abs() <= TOL, || {
            format!("concurrence {c} vs {expected}")
        })
    })
}

fn factorize_reproduces(cases: u32) -> Result<(), String> {
    run_seeded(cases, 7, |r| {
        let (da, db) = (r.gen_range(1..=4), r.gen_range(1..=4));
        let s = if r.gen_bool(0.7) {
            let a = PureState::random(&[da], r);
            let b = PureState::random(&[db], r);
            a.tensor(&b).unwrap().with_phase(r.gen_range(0.0..6.3))
        } else {
            PureState::random(&[da, db], r)
        };
        let s = PureState::new(vec![da, db], s.vector().clone(), 1e-12).unwrap();
        if let Ok((a, b)) = product_factorize(&s, 1, TOL) {
            let back = a.tensor(&b).unwrap();
            let d = back.vector().distance(s.vector()).unwrap();
            ensure(d <= TOL, || format!("reassembled state off by {d:e}"))?;
        }
        Ok(())
    })
}

fn concurrence_local_invariance(cases: u32) -> Result<(), String> {
    run_seeded(cases, 8, |r| {
        let s = PureState::random(&[2, 2], r);
        let ua = random_unitary(r, 2);
        let ub = random_unitary(r, 2);
        let moved = apply_operator(&ua, &[0], &s).unwrap();
        let moved = apply_operator(&ub, &[1], &moved).unwrap();
        let (c0, c1) = (concurrence(&s).unwrap(), concurrence(&moved).unwrap());
        ensure((c0 - c1).abs() <= TOL, || format!("{c0} vs {c1}"))
    })
}

fn gram_psd_unit_diagonal(cases: u32) -> Result<(), String> {
    run_seeded(cases, 9, |r| {
        let d = r.gen_range(1..=6);
        let n = r.gen_range(1..=6);
        let states: Vec<_> = (0..n).map(|_| PureState::random(&[d], r)).collect();
        let g = gram_matrix(&states).unwrap();
        for i in 0..n {
            ensure((g[(i, i)] - c64(1.0, 0.0)).norm() <= 1e-12, || {
                format!("diagonal {}", g[(i, i)])
            })?;
        }
        let min = hermitian_eigenvalues(&g, 1e-12).unwrap()[0];
        ensure(min >= -TOL, || format!("min eigenvalue {min}"))
    })
}

fn verdict_oracle(cases: u32) -> Result<(), String> {
    run_seeded(cases, 10, |r| {
        let family = FAMILIES[r.gen_range(0..4)];
        let spec = random_spec(r, family);
        check_verdict(&spec, family, &mut OracleTally::default()).map_err(fail)
    })
}

fn apply_process_matches_isometry(cases: u32) -> Result<(), String> {
    run_seeded(cases, 11, |r| {
        let spec = random_spec(r, Family::Unitary);
        let verdict = decide(&spec, TOL).unwrap();
        let d = construct_isometry(&spec, &verdict, TOL).map_err(|e| fail(e.to_string()))?;
        ensure(d.env_dim == 1, || format!("env_dim {}", d.env_dim))?;
        for _ in 0..2 {
            let input = random_in_span(r, &spec);
            let out =
                apply_process(&spec, &verdict, &input, TOL).map_err(|e| fail(e.to_string()))?;
            // project out the one-dimensional environment
            let sigma = d.environment_states[0][0];
            let image = d
                .unitary
                .matvec(&d.embed(input.vector()))
                .unwrap()
                .scale(sigma.conj());
            let dist = image.distance(out.vector()).unwrap();
            ensure(dist <= TOL, || {
                format!("apply_process differs from the isometry by {dist:e}")
            })?;
        }
        Ok(())
    })
}

fn output_density_valid(cases: u32) -> Result<(), String> {
    run_seeded(cases, 12, |r| {
        let family = if r.gen_bool(0.5) {
            Family::Dilated
        } else {
            Family::BasisOutputs
        };
        let spec = random_spec(r, family);
        let verdict = decide(&spec, TOL).unwrap();
        if !verdict.is_realizable() {
            return Ok(());
        }
        let input = random_in_span(r, &spec);
        let rho = output_density(&spec, &verdict, &input, TOL).map_err(|e| fail(e.to_string()))?;
        let herm = rho.matrix.hermitian_deviation().unwrap_or(f64::INFINITY);
        ensure(herm <= TOL, || format!("not Hermitian: {herm:e}"))?;
        ensure((rho.trace() - 1.0).abs() <= TOL, || {
            format!("trace {}", rho.trace())
        })?;
        let min = rho.min_eigenvalue().unwrap();
        ensure(min >= -TOL, || format!("min eigenvalue {min}"))
    })
}

fn witness_soundness(cases: u32) -> Result<(), String> {
    run_seeded(cases, 13, |r| {
        let spec = random_spec(r, Family::Unitary);
        let report = classify(&spec, TOL).map_err(|e| fail(e.to_string()))?;
        for w in &report.witnesses {
            let c_in = qcatalysis::quantum::pure_concurrence(&w.input, 1).unwrap();
            let c_out = qcatalysis::quantum::pure_concurrence(&w.output, 1).unwrap();
            ensure(c_in <= TOL, || format!("witness input concurrence {c_in}"))?;
            ensure(c_out > 1e-6, || {
                format!("witness output concurrence {c_out}")
            })?;
            let direct = apply_process(&spec, &report.verdict, &w.input, TOL)
                .map_err(|e| fail(e.to_string()))?;
            let d = phase_aligned_distance(&direct, &w.output).unwrap();
            ensure(d <= TOL, || format!("witness output off by {d:e}"))?;
        }
        if matches!(
            report.classification,
            qcatalysis::catalysis::Classification::QuantumCatalysis(_)
        ) {
            ensure(
                report.catalyst.overall && report.verdict.is_realizable(),
                || "inconsistent report".into(),
            )?;
        }
        Ok(())
    })
}

fn sweep_properties(cases: u32) -> Result<(), String> {
    runner(cases, 14)
        .run(&(2usize..=24), |steps| {
            let points = deletion_family_sweep(steps, TOL).map_err(|e| fail(e.to_string()))?;
            ensure(points.len() == steps, || "point count".into())?;
            for p in &points {
                let ov = p.overlap.norm();
                let expected =
                    ((c64(1.0, 0.0) + ComplexScalar::from_polar(1.0, p.delta)) * 0.5).norm();
                ensure((ov - expected).abs() <= 1e-12, || {
                    format!("overlap {ov} vs {expected}")
                })?;
                ensure((p.out_concurrence <= TOL) == (ov <= TOL), || {
                    format!("biconditional at {}", p.delta)
                })?;
                if ov > 1e-3 {
                    ensure(p.out_concurrence > 1e-6, || format!("weak at {}", p.delta))?;
                }
                for u in [p.u, p.v] {
                    let dev = (reversibility_overlap(u).norm() - REVERSIBILITY_TARGET).abs();
                    ensure(dev <= 1e-12, || format!("reversibility {dev:e}"))?;
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn classify_deterministic(cases: u32) -> Result<(), String> {
    run_seeded(cases, 15, |r| {
        let family = FAMILIES[r.gen_range(0..4)];
        let spec = random_spec(r, family);
        let a = classify(&spec, TOL);
        let b = classify(&spec, TOL);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                ensure(a.verdict == b.verdict && a.catalyst == b.catalyst, || {
                    "verdict differs".into()
                })?;
                ensure(a.classification.label() == b.classification.label(), || {
                    "label differs".into()
                })?;
                ensure(a.witnesses.len() == b.witnesses.len(), || {
                    "witness count differs".into()
                })?;
                for (x, y) in a.witnesses.iter().zip(&b.witnesses) {
                    ensure(x.input == y.input && x.output == y.output, || {
                        "witness differs".into()
                    })?;
                }
                Ok(())
            }
            (Err(a), Err(b)) => ensure(a == b, || "errors differ".into()),
            _ => Err(fail("one run failed")),
        }
    })
}

fn teleport_exact(cases: u32) -> Result<(), String> {
    run_seeded(cases, 16, |r| {
        let input = PureState::random(&[2], r);
        let run = teleport(&input, Mode::Enumerate).map_err(|e| fail(e.to_string()))?;
        ensure(
            run.ledger == TELEPORT_LEDGER && run.branches.len() == 4,
            || "ledger/branches".into(),
        )?;
        let total: f64 = run.branches.iter().map(|b| b.probability).sum();
        ensure((total - 1.0).abs() <= 1e-12, || format!("total {total}"))?;
        for b in &run.branches {
            ensure((b.probability - 0.25).abs() <= 1e-12, || {
                format!("p {}", b.probability)
            })?;
            let f = fidelity(&b.post_state, &input).unwrap();
            ensure(f >= 1.0 - 1e-12, || format!("fidelity {f}"))?;
        }
        Ok(())
    })
}

fn nonlocal_cnot_exact(cases: u32) -> Result<(), String> {
    run_seeded(cases, 17, |r| {
        let input = PureState::random(&[2, 2], r);
        let target = apply_gate(&GateSpec::cnot(0, 1), &input).unwrap();
        let run = nonlocal_cnot(&input, Mode::Enumerate).map_err(|e| fail(e.to_string()))?;
        ensure(
            run.ledger == NONLOCAL_CNOT_LEDGER && run.branches.len() == 4,
            || "ledger/branches".into(),
        )?;
        let total: f64 = run.branches.iter().map(|b| b.probability).sum();
        ensure((total - 1.0).abs() <= 1e-12, || format!("total {total}"))?;
        for b in &run.branches {
            let f = fidelity(&b.post_state, &target).unwrap();
            ensure(f >= 1.0 - 1e-12, || format!("fidelity {f}"))?;
        }
        let sampled = nonlocal_cnot(&input, Mode::Sample { seed: r.gen() })
            .map_err(|e| fail(e.to_string()))?;
        ensure(sampled.ledger == NONLOCAL_CNOT_LEDGER, || {
            "sampled ledger".into()
        })
    })
}

fn spec_file_round_trip(cases: u32) -> Result<(), String> {
    run_seeded(cases, 18, |r| {
        let family = FAMILIES[r.gen_range(0..4)];
        let spec = random_spec(r, family);
        let back =
            parse_spec_file(&write_spec_file(&spec), TOL).map_err(|e| fail(e.to_string()))?;
        let (a, b) = (classify(&spec, TOL), classify(&back, TOL));
        match (a, b) {
            (Ok(a), Ok(b)) => {
                ensure(a.verdict == b.verdict, || "verdict differs".into())?;
                ensure(a.catalyst == b.catalyst, || "catalyst differs".into())?;
                ensure(a.classification.label() == b.classification.label(), || {
                    "label differs".into()
                })?;
                ensure(
                    a.witnesses
                        .iter()
                        .map(|w| w.output.clone())
                        .collect::<Vec<_>>()
                        == b.witnesses
                            .iter()
                            .map(|w| w.output.clone())
                            .collect::<Vec<_>>(),
                    || "witnesses differ".into(),
                )
            }
            (Err(a), Err(b)) => ensure(a == b, || "errors differ".into()),
            _ => Err(fail("round trip changed success")),
        }
    })
}

fn report_bytes_deterministic(cases: u32) -> Result<(), String> {
    let names = [
        "teleport",
        "nonlocal-cnot",
        "no-info-cloning",
        "cloning",
        "deletion",
    ];
    runner(cases, 19)
        .run(&(0usize..names.len(), any::<u64>()), |(k, seed)| {
            let config = RunConfig {
                seed,
                ..RunConfig::default()
            };
            let a = run_scenario(names[k], &config).map_err(|e| fail(e.to_string()))?;
            let b = run_scenario(names[k], &config).map_err(|e| fail(e.to_string()))?;
            ensure(a.exit_code == 0, || {
                format!("{} failed {:?}", names[k], a.failed_assertions())
            })?;
            ensure(
                emit_report(&a, Format::Json) == emit_report(&b, Format::Json),
                || format!("{} json differs", names[k]),
            )
        })
        .map_err(|e| e.to_string())
}

fn paper_sets_fixed(cases: u32) -> Result<(), String> {
    run_seeded(cases, 20, |_| {
        for id in [StateSetId::Phi, StateSetId::Psi] {
            let set = paper_states(id);
            ensure(set.states.len() == 3, || "three states".into())?;
            for s in &set.states {
                ensure((s.vector().norm() - 1.0).abs() <= 1e-15, || {
                    "unit norm".into()
                })?;
            }
        }
        Ok(())
    })
}

pub fn suite() -> Vec<Property> {
    vec![
        Property {
            module: "numerics",
            name: "tensor_norm_multiplies",
            cases: 200,
            run: tensor_norm,
        },
        Property {
            module: "numerics",
            name: "inner_conjugate_symmetric",
            cases: 200,
            run: inner_conjugate_symmetry,
        },
        Property {
            module: "numerics",
            name: "eigen_trace_and_reconstruction",
            cases: 150,
            run: eigen_trace_and_reconstruction,
        },
        Property {
            module: "numerics",
            name: "span_resynthesis_matches_residual",
            cases: 150,
            run: span_resynthesis,
        },
        Property {
            module: "quantum",
            name: "gates_unitary_and_self_inverse",
            cases: 200,
            run: gates_preserve_norm_and_self_inverse,
        },
        Property {
            module: "quantum",
            name: "concurrence_is_twice_schmidt_product",
            cases: 200,
            run: concurrence_schmidt,
        },
        Property {
            module: "quantum",
            name: "factorization_reassembles",
            cases: 150,
            run: factorize_reproduces,
        },
        Property {
            module: "quantum",
            name: "concurrence_local_unitary_invariant",
            cases: 150,
            run: concurrence_local_invariance,
        },
        Property {
            module: "quantum",
            name: "paper_state_sets",
            cases: 1,
            run: paper_sets_fixed,
        },
        Property {
            module: "process",
            name: "gram_psd_unit_diagonal",
            cases: 200,
            run: gram_psd_unit_diagonal,
        },
        Property {
            module: "process",
            name: "verdicts_match_oracle",
            cases: 150,
            run: verdict_oracle,
        },
        Property {
            module: "process",
            name: "apply_process_matches_isometry",
            cases: 100,
            run: apply_process_matches_isometry,
        },
        Property {
            module: "process",
            name: "output_density_valid",
            cases: 100,
            run: output_density_valid,
        },
        Property {
            module: "catalysis",
            name: "witnesses_sound",
            cases: 30,
            run: witness_soundness,
        },
        Property {
            module: "catalysis",
            name: "sweep_biconditional_and_reversibility",
            cases: 8,
            run: sweep_properties,
        },
        Property {
            module: "catalysis",
            name: "classify_deterministic",
            cases: 15,
            run: classify_deterministic,
        },
        Property {
            module: "teleport",
            name: "teleport_exact",
            cases: 200,
            run: teleport_exact,
        },
        Property {
            module: "teleport",
            name: "nonlocal_cnot_exact",
            cases: 200,
            run: nonlocal_cnot_exact,
        },
        Property {
            module: "cli",
            name: "spec_file_round_trip",
            cases: 20,
            run: spec_file_round_trip,
        },
        Property {
            module: "cli",
            name: "report_bytes_deterministic",
            cases: 10,
            run: report_bytes_deterministic,
        },
    ]
}

pub fn run_property(name: &str) {
    let p = suite()
        .into_iter()
        .find(|p| p.name == name)
        .expect("known property");
    if let Err(e) = (p.run)(p.cases) {
        panic!("{}::{} failed: {e}", p.module, p.name);
    }
}
