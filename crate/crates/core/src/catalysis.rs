//! Catalysis classification: is Alice's factor left untouched, and can the
//! interaction turn a separable superposition of the specified inputs into
//! an entangled state?

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use thiserror::Error;

use crate::numerics::{c64, span_coefficients, ComplexScalar};
use crate::process::{
    apply_coefficients, decide, environment_deviation, Certificate, FeasibilityVerdict,
    ProcessError, ProcessSpec,
};
use crate::quantum::{
    deletion_probe_input, fidelity, paper_states, plus_zero, product_factorize, pure_concurrence,
    PureState, QuantumError, StateSetId,
};

/// Outputs must exceed this concurrence to count as entangled.
pub const WITNESS_THRESHOLD: f64 = 1e-6;

/// Number of quasi-random coefficient vectors tried after the canonical
/// candidates.
pub const SAMPLE_COUNT: usize = 10_000;

/// Witnesses within this distance of the best concurrence are all reported.
pub const WITNESS_TIE_WINDOW: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalysisError {
    #[error(transparent)]
    Process(#[from] ProcessError),
    #[error("sweep needs at least 2 steps, got {0}")]
    InvalidSteps(usize),
}

impl From<QuantumError> for CatalysisError {
    fn from(e: QuantumError) -> Self {
        Self::Process(e.into())
    }
}

/// Where a witness candidate came from.
#[derive(Debug, Clone, PartialEq)]
pub enum WitnessSource {
    /// `(a_i + a_j)/‖a_i + a_j‖`.
    PairSuperposition(usize, usize),
    /// `|+⟩|0⟩`.
    PlusZero,
    /// `(|0⟩+i|1⟩)(|0⟩+i|1⟩)/2`.
    DeletionProbe,
    /// Quasi-random coefficient vector number `k`.
    Sampled(usize),
}

impl WitnessSource {
    pub fn label(&self) -> String {
        match self {
            Self::PairSuperposition(i, j) => format!("pair_superposition({i},{j})"),
            Self::PlusZero => "plus_zero".to_string(),
            Self::DeletionProbe => "deletion_probe".to_string(),
            Self::Sampled(k) => format!("sampled({k})"),
        }
    }
}

/// Separable input whose coherent image is entangled.
#[derive(Debug, Clone)]
pub struct WitnessRecord {
    pub input: PureState,
    pub output: PureState,
    pub concurrence_in: f64,
    pub concurrence_out: f64,
    /// Expansion of `input` over the spec inputs.
    pub coefficients: Vec<ComplexScalar>,
    pub candidate_index: usize,
    pub source: WitnessSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairIntactness {
    pub pair: usize,
    pub intact: bool,
    /// Fidelity of Alice's factors before and after, when both factorize.
    pub fidelity: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalystCheck {
    pub pairs: Vec<PairIntactness>,
    pub overall: bool,
}

impl CatalystCheck {
    pub fn first_failure(&self) -> Option<usize> {
        self.pairs.iter().find(|p| !p.intact).map(|p| p.pair)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NotCatalysisReason {
    Infeasible(Certificate),
    Undetermined { free_entries: usize },
    CatalystDisturbed { pair: usize },
}

impl NotCatalysisReason {
    pub fn label(&self) -> String {
        match self {
            Self::Infeasible(c) => c.reason.as_str().to_string(),
            Self::Undetermined { .. } => "undetermined".to_string(),
            Self::CatalystDisturbed { pair } => format!("catalyst_disturbed_at_pair_{pair}"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Classification {
    QuantumCatalysis(WitnessRecord),
    NoEntanglingWitnessFound,
    NotCatalysis(NotCatalysisReason),
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Self::QuantumCatalysis(_) => "QuantumCatalysis",
            Self::NoEntanglingWitnessFound => "NoEntanglingWitnessFound",
            Self::NotCatalysis(_) => "NotCatalysis",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CatalysisReport {
    pub verdict: FeasibilityVerdict,
    pub catalyst: CatalystCheck,
    pub coherence_preserving: bool,
    pub classification: Classification,
    /// Two inputs Bob cannot tell apart must end in distinguishable states.
    pub bob_alone_impossible: bool,
    /// Every witness tied (within [`WITNESS_TIE_WINDOW`]) with the best one.
    pub witnesses: Vec<WitnessRecord>,
}

/// For each pair, both sides must factor across A|B with the same A factor.
pub fn catalyst_intact(spec: &ProcessSpec, tol: f64) -> CatalystCheck {
    let pairs: Vec<PairIntactness> = spec
        .pairs()
        .iter()
        .enumerate()
        .map(|(k, pair)| {
            let factors = product_factorize(&pair.input, 1, tol)
                .and_then(|(a_in, _)| Ok((a_in, product_factorize(&pair.output, 1, tol)?.0)));
            match factors {
                Ok((a_in, a_out)) => {
                    let f = fidelity(&a_in, &a_out).unwrap_or(0.0);
                    PairIntactness {
                        pair: k,
                        intact: f >= 1.0 - tol,
                        fidelity: Some(f),
                        failure: (f < 1.0 - tol).then(|| "alice_factor_changed".to_string()),
                    }
                }
                Err(e) => PairIntactness {
                    pair: k,
                    intact: false,
                    fidelity: None,
                    failure: Some(e.to_string()),
                },
            }
        })
        .collect();
    let overall = pairs.iter().all(|p| p.intact);
    CatalystCheck { pairs, overall }
}

/// True when two inputs share Bob's factor but their outputs do not.
pub fn bob_alone_impossible(spec: &ProcessSpec, tol: f64) -> bool {
    let bob = |s: &PureState| product_factorize(s, 1, tol).ok().map(|(_, b)| b);
    let ins: Vec<_> = spec.pairs().iter().map(|p| bob(&p.input)).collect();
    let outs: Vec<_> = spec.pairs().iter().map(|p| bob(&p.output)).collect();
    let n = spec.len();
    for i in 0..n {
        for j in (i + 1)..n {
            if let (Some(bi), Some(bj), Some(oi), Some(oj)) = (&ins[i], &ins[j], &outs[i], &outs[j])
            {
                let same_in = fidelity(bi, bj).unwrap_or(0.0) >= 1.0 - tol;
                let distinct_out = fidelity(oi, oj).unwrap_or(1.0) <= 1.0 - tol;
                if same_in && distinct_out {
                    return true;
                }
            }
        }
    }
    false
}

fn radical_inverse(mut index: usize, base: usize) -> f64 {
    let inv = 1.0 / base as f64;
    let mut factor = inv;
    let mut acc = 0.0;
    while index > 0 {
        acc += (index % base) as f64 * factor;
        index /= base;
        factor *= inv;
    }
    acc
}

fn first_primes(count: usize) -> Vec<usize> {
    let mut primes = Vec::with_capacity(count);
    let mut candidate = 2;
    while primes.len() < count {
        if primes.iter().all(|p| candidate % p != 0) {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes
}

/// Quasi-random points on the complex unit sphere in `n` dimensions: Halton
/// coordinates (index starting at `seed + 1`), Box–Muller to complex
/// Gaussians, normalized.
pub fn sphere_samples(n: usize, count: usize, seed: usize) -> Vec<Vec<ComplexScalar>> {
    let primes = first_primes(2 * n);
    (0..count)
        .map(|k| {
            let index = seed + k + 1;
            let v: Vec<ComplexScalar> = (0..n)
                .map(|d| {
                    let u1 = radical_inverse(index, primes[2 * d]);
                    let u2 = radical_inverse(index, primes[2 * d + 1]);
                    ComplexScalar::from_polar((-2.0 * u1.ln()).sqrt(), 2.0 * PI * u2)
                })
                .collect();
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.into_iter().map(|z| z / norm).collect()
        })
        .collect()
}

struct Candidate {
    source: WitnessSource,
    coefficients: Vec<ComplexScalar>,
}

fn canonical_candidates(spec: &ProcessSpec, tol: f64) -> Vec<Candidate> {
    let n = spec.len();
    let inputs = spec.inputs();
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let sum = inputs[i]
                .vector()
                .add(inputs[j].vector())
                .expect("same dims");
            let norm = sum.norm();
            if norm <= tol {
                continue;
            }
            let mut coefficients = vec![c64(0.0, 0.0); n];
            coefficients[i] = c64(1.0 / norm, 0.0);
            coefficients[j] = c64(1.0 / norm, 0.0);
            out.push(Candidate {
                source: WitnessSource::PairSuperposition(i, j),
                coefficients,
            });
        }
    }
    if spec.dim_a() == 2 && spec.dim_b() == 2 {
        let basis: Vec<_> = inputs.iter().map(|s| s.vector().clone()).collect();
        for (source, probe) in [
            (WitnessSource::PlusZero, plus_zero()),
            (WitnessSource::DeletionProbe, deletion_probe_input()),
        ] {
            if let Ok(fit) = span_coefficients(&basis, probe.vector(), tol) {
                if fit.in_span(tol) {
                    out.push(Candidate {
                        source,
                        coefficients: fit.coefficients,
                    });
                }
            }
        }
    }
    out
}

/// All witnesses tied with the best one, in candidate order. Requires the
/// environments to be identical.
pub fn find_entangling_witnesses(
    spec: &ProcessSpec,
    verdict: &FeasibilityVerdict,
    tol: f64,
) -> Result<Vec<WitnessRecord>, ProcessError> {
    let e = verdict
        .completed_gram()
        .ok_or(ProcessError::NotRealizable)?;
    let deviation = environment_deviation(e);
    if deviation > tol {
        return Err(ProcessError::EnvironmentsDiffer { deviation });
    }

    let n = spec.len();
    let inputs: Vec<_> = spec.inputs().iter().map(|s| s.vector().clone()).collect();
    let dims = vec![spec.dim_a(), spec.dim_b()];
    let mut candidates = canonical_candidates(spec, tol);
    for (k, c) in sphere_samples(n, SAMPLE_COUNT, 0).into_iter().enumerate() {
        candidates.push(Candidate {
            source: WitnessSource::Sampled(k),
            coefficients: c,
        });
    }

    let mut found: Vec<WitnessRecord> = Vec::new();
    for (index, cand) in candidates.into_iter().enumerate() {
        let raw = crate::numerics::combine(&inputs, &cand.coefficients)?;
        let norm = raw.norm();
        if norm <= tol {
            continue;
        }
        let coefficients: Vec<ComplexScalar> = cand.coefficients.iter().map(|z| z / norm).collect();
        let input = PureState::normalizing(dims.clone(), raw)?;
        let concurrence_in = pure_concurrence(&input, 1)?;
        if concurrence_in > tol {
            continue;
        }
        let output = apply_coefficients(spec, &coefficients)?;
        let concurrence_out = pure_concurrence(&output, 1)?;
        if concurrence_out <= WITNESS_THRESHOLD {
            continue;
        }
        found.push(WitnessRecord {
            input,
            output,
            concurrence_in,
            concurrence_out,
            coefficients,
            candidate_index: index,
            source: cand.source,
        });
    }

    let best = found
        .iter()
        .map(|w| w.concurrence_out)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut kept: Vec<WitnessRecord> = Vec::new();
    for w in found {
        if w.concurrence_out < best - WITNESS_TIE_WINDOW {
            continue;
        }
        let duplicate = kept
            .iter()
            .any(|k| fidelity(&k.input, &w.input).unwrap_or(0.0) >= 1.0 - tol);
        if !duplicate {
            kept.push(w);
        }
    }
    Ok(kept)
}

/// The best witness; ties go to the lowest candidate index.
pub fn find_entangling_witness(
    spec: &ProcessSpec,
    verdict: &FeasibilityVerdict,
    tol: f64,
) -> Result<Option<WitnessRecord>, ProcessError> {
    Ok(find_entangling_witnesses(spec, verdict, tol)?
        .into_iter()
        .next())
}

pub fn classify(spec: &ProcessSpec, tol: f64) -> Result<CatalysisReport, ProcessError> {
    let verdict = decide(spec, tol)?;
    let catalyst = catalyst_intact(spec, tol);
    let coherence_preserving = verdict
        .completed_gram()
        .is_some_and(|e| environment_deviation(e) <= tol);
    let bob_alone_impossible = bob_alone_impossible(spec, tol);

    let mut witnesses = Vec::new();
    let classification = match &verdict {
        FeasibilityVerdict::Infeasible { certificate } => {
            Classification::NotCatalysis(NotCatalysisReason::Infeasible(*certificate))
        }
        FeasibilityVerdict::Undetermined { free_entries } => {
            Classification::NotCatalysis(NotCatalysisReason::Undetermined {
                free_entries: *free_entries,
            })
        }
        FeasibilityVerdict::Realizable { .. } => match catalyst.first_failure() {
            Some(pair) => {
                Classification::NotCatalysis(NotCatalysisReason::CatalystDisturbed { pair })
            }
            None if coherence_preserving => {
                witnesses = find_entangling_witnesses(spec, &verdict, tol)?;
                match witnesses.first() {
                    Some(w) => Classification::QuantumCatalysis(w.clone()),
                    None => Classification::NoEntanglingWitnessFound,
                }
            }
            None => Classification::NoEntanglingWitnessFound,
        },
    };

    Ok(CatalysisReport {
        verdict,
        catalyst,
        coherence_preserving,
        classification,
        bob_alone_impossible,
        witnesses,
    })
}

/// `((1+e^{iu})|0⟩ + (1−e^{iu})|1⟩)/2`: every qubit state with overlap
/// exactly 1/√2 with `|+⟩`, up to global phase.
pub fn deletion_family_state(u: f64) -> PureState {
    let e = ComplexScalar::from_polar(1.0, u);
    let one = c64(1.0, 0.0);
    PureState::qubit((one + e) * 0.5, (one - e) * 0.5).expect("unit norm for every u")
}

/// `|ψ_i⟩|ψ_i⟩ → |ψ_i⟩|φ′_i⟩` with `φ′₁ = f(u)`, `φ′₂ = f(v)`, `φ′₃ = |+⟩`.
pub fn deletion_family_spec(u: f64, v: f64) -> Result<ProcessSpec, ProcessError> {
    let psi = paper_states(StateSetId::Psi).states;
    let leftover = [
        deletion_family_state(u),
        deletion_family_state(v),
        PureState::plus(),
    ];
    let pairs = (0..3)
        .map(|i| Ok((psi[i].tensor(&psi[i])?, psi[i].tensor(&leftover[i])?)))
        .collect::<Result<Vec<_>, QuantumError>>()?;
    ProcessSpec::new(2, 2, pairs)
}

#[derive(Debug, Clone)]
pub struct DeletionFamilyPoint {
    pub u: f64,
    pub v: f64,
    /// `v − u`.
    pub delta: f64,
    /// `⟨φ′₁|φ′₂⟩ = (1 + e^{iΔ})/2`.
    pub overlap: ComplexScalar,
    /// Concurrence of the image of the separable deletion probe.
    pub out_concurrence: f64,
    pub classification: &'static str,
}

/// Sweeps `Δ = 2πk/steps`, `k = 0..steps`, with `u = 0`.
pub fn deletion_family_sweep(
    steps: usize,
    tol: f64,
) -> Result<Vec<DeletionFamilyPoint>, CatalysisError> {
    if steps < 2 {
        return Err(CatalysisError::InvalidSteps(steps));
    }
    let probe = deletion_probe_input();
    (0..steps)
        .map(|k| {
            let u = 0.0;
            let delta = PI * (2 * k) as f64 / steps as f64;
            let v = u + delta;
            let spec = deletion_family_spec(u, v)?;
            let report = classify(&spec, tol)?;
            let output = crate::process::apply_process(&spec, &report.verdict, &probe, tol)?;
            let overlap = deletion_family_state(u).inner(&deletion_family_state(v))?;
            Ok(DeletionFamilyPoint {
                u,
                v,
                delta,
                overlap,
                out_concurrence: pure_concurrence(&output, 1)?,
                classification: report.classification.label(),
            })
        })
        .collect()
}

/// `⟨φ′(u)|+⟩`, which the family pins to 1/√2.
pub fn reversibility_overlap(u: f64) -> ComplexScalar {
    deletion_family_state(u)
        .inner(&PureState::plus())
        .expect("single qubits")
}

/// Required `⟨φ′_j|+⟩` for the deletion family.
pub const REVERSIBILITY_TARGET: f64 = FRAC_1_SQRT_2;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{
        cloning_spec, deletion_spec, identity_spec, no_information_cloning_spec,
        InfeasibilityReason,
    };
    use crate::quantum::{bell_state, deletion_probe_output};

    const TOL: f64 = 1e-9;

    #[test]
    fn catalyst_intact_examples() {
        for spec in [cloning_spec(), deletion_spec()] {
            let check = catalyst_intact(&spec, TOL);
            assert!(check.overall);
            assert_eq!(check.pairs.len(), 3);
        }
        let flipped = ProcessSpec::new(
            2,
            2,
            vec![(PureState::basis(&[2, 2], 0), PureState::basis(&[2, 2], 2))],
        )
        .unwrap();
        let check = catalyst_intact(&flipped, TOL);
        assert!(!check.overall);
        assert_eq!(check.first_failure(), Some(0));
        assert_eq!(check.pairs[0].fidelity, Some(0.0));
    }

    #[test]
    fn entangled_output_is_not_intact() {
        let spec = ProcessSpec::new(2, 2, vec![(plus_zero(), bell_state())]).unwrap();
        let check = catalyst_intact(&spec, TOL);
        assert!(!check.overall);
        assert!(check.pairs[0].fidelity.is_none());
    }

    #[test]
    fn cloning_witness() {
        let spec = cloning_spec();
        let verdict = decide(&spec, TOL).unwrap();
        let w = find_entangling_witness(&spec, &verdict, TOL)
            .unwrap()
            .unwrap();
        assert!((fidelity(&w.input, &plus_zero()).unwrap() - 1.0).abs() < 1e-12);
        assert!(w.concurrence_in <= TOL);
        assert!((w.concurrence_out - 1.0).abs() < 1e-9);
        assert_eq!(w.source, WitnessSource::PairSuperposition(0, 1));
    }

    #[test]
    fn deletion_witness() {
        let spec = deletion_spec();
        let verdict = decide(&spec, TOL).unwrap();
        let ws = find_entangling_witnesses(&spec, &verdict, TOL).unwrap();
        let w = ws
            .iter()
            .find(|w| w.source == WitnessSource::DeletionProbe)
            .expect("probe is a maximal witness");
        assert!((w.concurrence_out - 1.0).abs() < 1e-9);
        assert!((fidelity(&w.output, &deletion_probe_output()).unwrap() - 1.0).abs() < 1e-12);
        let expected = crate::quantum::deletion_probe_coefficients();
        for (a, b) in w.coefficients.iter().zip(expected) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn identity_has_no_witness() {
        let spec = identity_spec(&[
            PureState::basis(&[2, 2], 0),
            plus_zero(),
            PureState::basis(&[2, 2], 3),
        ])
        .unwrap();
        let verdict = decide(&spec, TOL).unwrap();
        assert!(find_entangling_witness(&spec, &verdict, TOL)
            .unwrap()
            .is_none());
        let report = classify(&spec, TOL).unwrap();
        assert!(matches!(
            report.classification,
            Classification::NoEntanglingWitnessFound
        ));
    }

    #[test]
    fn classify_examples() {
        let report = classify(&cloning_spec(), TOL).unwrap();
        assert!(matches!(
            report.classification,
            Classification::QuantumCatalysis(_)
        ));
        assert!(report.bob_alone_impossible);
        assert!(report.coherence_preserving);

        let report = classify(&no_information_cloning_spec(), TOL).unwrap();
        match report.classification {
            Classification::NotCatalysis(NotCatalysisReason::Infeasible(c)) => {
                assert_eq!(c.reason, InfeasibilityReason::ModulusViolation);
                assert!((c.magnitude - 2f64.sqrt()).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }

        let report = classify(&deletion_spec(), TOL).unwrap();
        assert!(matches!(
            report.classification,
            Classification::QuantumCatalysis(_)
        ));
        assert!(!report.bob_alone_impossible);
    }

    #[test]
    fn classify_is_deterministic() {
        let a = classify(&deletion_spec(), TOL).unwrap();
        let b = classify(&deletion_spec(), TOL).unwrap();
        assert_eq!(a.witnesses.len(), b.witnesses.len());
        for (x, y) in a.witnesses.iter().zip(&b.witnesses) {
            assert_eq!(x.candidate_index, y.candidate_index);
            assert_eq!(x.input, y.input);
            assert_eq!(x.concurrence_out, y.concurrence_out);
        }
    }

    #[test]
    fn family_states_keep_reversibility_overlap() {
        for k in 0..50 {
            let u = k as f64 * 0.37;
            assert!((reversibility_overlap(u) - c64(REVERSIBILITY_TARGET, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn sweep_endpoints() {
        let points = deletion_family_sweep(4, TOL).unwrap();
        assert_eq!(points.len(), 4);
        // Δ = 0 is the original deletion
        assert!((points[0].overlap - c64(1.0, 0.0)).norm() < 1e-12);
        assert!((points[0].out_concurrence - 1.0).abs() < 1e-9);
        // Δ = π makes φ′₂ = |1⟩ and the process the identity
        assert!(points[2].overlap.norm() < 1e-9);
        assert!(points[2].out_concurrence < 1e-9);
        assert_eq!(points[2].classification, "NoEntanglingWitnessFound");
        for p in [&points[1], &points[3]] {
            assert!(p.out_concurrence > WITNESS_THRESHOLD);
        }
        assert!(matches!(
            deletion_family_sweep(1, TOL),
            Err(CatalysisError::InvalidSteps(1))
        ));
    }

    #[test]
    fn halton_samples_are_unit_and_distinct() {
        let s = sphere_samples(3, 100, 0);
        for v in &s {
            let n: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
        assert_ne!(s[0], s[1]);
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert_eq!(first_primes(4), vec![2, 3, 5, 7]);
    }
}
