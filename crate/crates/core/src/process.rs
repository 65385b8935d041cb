//! Realizability of a pure-state map `|a_i⟩ → |b_i⟩` on A⊗B.
//!
//! Any physical realization is a unitary on system plus environment with
//! `U |a_i⟩|e₀⟩ = |b_i⟩|Σ_i⟩`. Taking inner products gives
//! `⟨a_i|a_j⟩ = ⟨b_i|b_j⟩·⟨Σ_i|Σ_j⟩`, which pins down the environment overlaps
//! wherever `⟨b_i|b_j⟩ ≠ 0`. The map is realizable exactly when the pinned
//! overlaps can be completed to a Gram matrix (PSD, unit diagonal).

use std::f64::consts::PI;

use thiserror::Error;

use crate::numerics::{
    self, c64, combine, hermitian_eigen, inner, span_coefficients, ComplexScalar, DenseMatrix,
    DenseVector, NumericsError, MAX_DIM,
};
use crate::quantum::{paper_states, PureState, QuantumError, StateSetId};

/// Eigenvalues of the completed environment Gram matrix at or below this
/// value do not get an environment dimension.
pub const ENVIRONMENT_RANK_CUTOFF: f64 = 1e-9;

/// More free entries than this and the completion search is declined.
pub const MAX_FREE_ENTRIES: usize = 3;

const COARSE_STEPS: usize = 20;
const REFINE_ROUNDS: usize = 2;
const REFINE_HALF_WIDTH: i32 = 10;
const MAX_CYCLIC_PASSES: usize = 32;
const SEED_RADIAL: usize = 4;
const SEED_ANGULAR: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProcessError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error("a process needs at least one pair")]
    Empty,
    #[error("pair {pair} {side} state has dims {dims:?}, expected [{dim_a}, {dim_b}]")]
    StateDims {
        pair: usize,
        side: &'static str,
        dims: Vec<usize>,
        dim_a: usize,
        dim_b: usize,
    },
    #[error("input states are linearly dependent (smallest Gram eigenvalue {min_eigenvalue:e})")]
    DependentInputs { min_eigenvalue: f64 },
    #[error("verdict is not Realizable")]
    NotRealizable,
    #[error(
        "environment states are not identical (max |E_ij − 1| = {deviation:e}); use output_density"
    )]
    EnvironmentsDiffer { deviation: f64 },
    #[error("input lies outside the span of the specified inputs (residual {residual:e})")]
    OutsideSpan { residual: f64 },
    #[error("dilated pair Gram matrices disagree by {deviation:e}")]
    GramMismatch { deviation: f64 },
}

#[derive(Debug, Clone)]
pub struct StatePair {
    pub input: PureState,
    pub output: PureState,
}

/// Ordered list of input/output pairs on A⊗B.
#[derive(Debug, Clone)]
pub struct ProcessSpec {
    dim_a: usize,
    dim_b: usize,
    pairs: Vec<StatePair>,
    input_gram_min_eigenvalue: f64,
}

impl ProcessSpec {
    /// Checks shapes and records the smallest eigenvalue of the input Gram
    /// matrix. Linear dependence is reported later by [`environment_gram`],
    /// after the pairwise overlap checks have had a chance to certify
    /// infeasibility.
    pub fn new(
        dim_a: usize,
        dim_b: usize,
        pairs: Vec<(PureState, PureState)>,
    ) -> Result<Self, ProcessError> {
        if pairs.is_empty() {
            return Err(ProcessError::Empty);
        }
        for (k, (input, output)) in pairs.iter().enumerate() {
            for (side, s) in [("input", input), ("output", output)] {
                if s.dims() != [dim_a, dim_b] {
                    return Err(ProcessError::StateDims {
                        pair: k,
                        side,
                        dims: s.dims().to_vec(),
                        dim_a,
                        dim_b,
                    });
                }
            }
        }
        let pairs: Vec<StatePair> = pairs
            .into_iter()
            .map(|(input, output)| StatePair { input, output })
            .collect();
        let inputs: Vec<DenseVector> = pairs.iter().map(|p| p.input.vector().clone()).collect();
        let g = numerics::gram(&inputs)?;
        let input_gram_min_eigenvalue = hermitian_eigen(&g, 1e-9)?.min_eigenvalue();
        Ok(Self {
            dim_a,
            dim_b,
            pairs,
            input_gram_min_eigenvalue,
        })
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[StatePair] {
        &self.pairs
    }

    pub fn inputs(&self) -> Vec<PureState> {
        self.pairs.iter().map(|p| p.input.clone()).collect()
    }

    pub fn outputs(&self) -> Vec<PureState> {
        self.pairs.iter().map(|p| p.output.clone()).collect()
    }

    pub fn input_gram_min_eigenvalue(&self) -> f64 {
        self.input_gram_min_eigenvalue
    }

    pub fn inputs_independent(&self, tol: f64) -> bool {
        self.input_gram_min_eigenvalue > tol
    }

    fn input_vectors(&self) -> Vec<DenseVector> {
        self.pairs
            .iter()
            .map(|p| p.input.vector().clone())
            .collect()
    }

    fn output_vectors(&self) -> Vec<DenseVector> {
        self.pairs
            .iter()
            .map(|p| p.output.vector().clone())
            .collect()
    }
}

fn pairwise_spec(
    a_side: &[PureState],
    b_in: &[PureState],
    b_out: &[PureState],
) -> Result<ProcessSpec, ProcessError> {
    let pairs = a_side
        .iter()
        .zip(b_in.iter().zip(b_out))
        .map(|(a, (bi, bo))| Ok((a.tensor(bi)?, a.tensor(bo)?)))
        .collect::<Result<Vec<_>, QuantumError>>()?;
    ProcessSpec::new(2, 2, pairs)
}

/// `|ψ_i⟩|φ_i⟩ → |ψ_i⟩|ψ_i⟩`.
pub fn cloning_spec() -> ProcessSpec {
    let phi = paper_states(StateSetId::Phi).states;
    let psi = paper_states(StateSetId::Psi).states;
    pairwise_spec(&psi, &phi, &psi).expect("static spec")
}

/// `|ψ_i⟩|ψ_i⟩ → |ψ_i⟩|φ_i⟩`.
pub fn deletion_spec() -> ProcessSpec {
    let phi = paper_states(StateSetId::Phi).states;
    let psi = paper_states(StateSetId::Psi).states;
    pairwise_spec(&psi, &psi, &phi).expect("static spec")
}

/// `|ψ_i⟩|0⟩ → |ψ_i⟩|ψ_i⟩`: Bob starts with no information at all.
pub fn no_information_cloning_spec() -> ProcessSpec {
    let psi = paper_states(StateSetId::Psi).states;
    let blank = vec![PureState::zero(); 3];
    pairwise_spec(&psi, &blank, &psi).expect("static spec")
}

/// Every state mapped to itself.
pub fn identity_spec(states: &[PureState]) -> Result<ProcessSpec, ProcessError> {
    let first = states.first().ok_or(ProcessError::Empty)?;
    let (da, db) = first.split_dims(1)?;
    ProcessSpec::new(
        da,
        db,
        states.iter().map(|s| (s.clone(), s.clone())).collect(),
    )
}

/// `G[i][j] = ⟨s_i|s_j⟩`.
pub fn gram_matrix(states: &[PureState]) -> Result<DenseMatrix, ProcessError> {
    if let Some(first) = states.first() {
        for s in states {
            first.require_same_dims(s)?;
        }
    }
    let vectors: Vec<DenseVector> = states.iter().map(|s| s.vector().clone()).collect();
    Ok(numerics::gram(&vectors)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GramEntry {
    Determined(ComplexScalar),
    Free,
}

/// Required environment overlaps `⟨Σ_i|Σ_j⟩`; unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentGram {
    n: usize,
    entries: Vec<GramEntry>,
}

impl EnvironmentGram {
    fn all_free(n: usize) -> Self {
        let mut entries = vec![GramEntry::Free; n * n];
        for i in 0..n {
            entries[i * n + i] = GramEntry::Determined(c64(1.0, 0.0));
        }
        Self { n, entries }
    }

    /// Builds a pattern from the upper triangle; the lower triangle is
    /// filled in by conjugation.
    pub fn from_upper(n: usize, upper: &[((usize, usize), GramEntry)]) -> Self {
        let mut eg = Self::all_free(n);
        for &((i, j), e) in upper {
            eg.set(i, j, e);
        }
        eg
    }

    fn set(&mut self, i: usize, j: usize, e: GramEntry) {
        let n = self.n;
        self.entries[i * n + j] = e;
        self.entries[j * n + i] = match e {
            GramEntry::Determined(z) => GramEntry::Determined(z.conj()),
            GramEntry::Free => GramEntry::Free,
        };
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> GramEntry {
        self.entries[i * self.n + j]
    }

    /// Free entries `(i, j)` with `i < j`, row-major.
    pub fn free_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|i| ((i + 1)..self.n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.entry(i, j) == GramEntry::Free)
            .collect()
    }

    /// Matrix with the free entries (upper triangle, in `free_pairs` order)
    /// set to `values`.
    pub fn completion(&self, values: &[ComplexScalar]) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                if let GramEntry::Determined(z) = self.entry(i, j) {
                    m[(i, j)] = z;
                }
            }
        }
        for (&(i, j), &z) in self.free_pairs().iter().zip(values) {
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfeasibilityReason {
    /// `|⟨a_i|a_j⟩| > |⟨b_i|b_j⟩|`: would need `|⟨Σ_i|Σ_j⟩| > 1`.
    ModulusViolation,
    /// `⟨b_i|b_j⟩ = 0` while `⟨a_i|a_j⟩ ≠ 0`.
    OutputNullInputNot,
    /// No unit-disk completion of the free entries is PSD.
    PsdViolation,
}

impl InfeasibilityReason {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::ModulusViolation => "modulus_violation",
            Self::OutputNullInputNot => "output_null_input_not",
            Self::PsdViolation => "psd_violation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    /// Zero-based pair indices, `i < j`.
    pub pair: (usize, usize),
    pub reason: InfeasibilityReason,
    /// `|G_in/G_out|` for modulus violations, `|G_in|` for null outputs, the
    /// best achievable minimum eigenvalue for PSD violations.
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeasibilityVerdict {
    Realizable { completed_gram: DenseMatrix },
    Infeasible { certificate: Certificate },
    Undetermined { free_entries: usize },
}

impl FeasibilityVerdict {
    pub fn status(&self) -> &'static str {
        match self {
            Self::Realizable { .. } => "Realizable",
            Self::Infeasible { .. } => "Infeasible",
            Self::Undetermined { .. } => "Undetermined",
        }
    }

    pub fn completed_gram(&self) -> Option<&DenseMatrix> {
        match self {
            Self::Realizable { completed_gram } => Some(completed_gram),
            _ => None,
        }
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            Self::Infeasible { certificate } => Some(certificate),
            _ => None,
        }
    }

    pub fn is_realizable(&self) -> bool {
        matches!(self, Self::Realizable { .. })
    }

    fn require_gram(&self) -> Result<&DenseMatrix, ProcessError> {
        self.completed_gram().ok_or(ProcessError::NotRealizable)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GramOutcome {
    Constrained(EnvironmentGram),
    Infeasible(Certificate),
}

/// Environment overlaps forced by the spec, or the first pair (row-major)
/// whose overlaps no environment can satisfy.
pub fn environment_gram(spec: &ProcessSpec, tol: f64) -> Result<GramOutcome, ProcessError> {
    let n = spec.len();
    let ins = spec.input_vectors();
    let outs = spec.output_vectors();
    let mut eg = EnvironmentGram::all_free(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let g_in = inner(&ins[i], &ins[j])?;
            let g_out = inner(&outs[i], &outs[j])?;
            if g_out.norm() > tol {
                let ratio = g_in / g_out;
                if g_in.norm() > g_out.norm() + tol {
                    return Ok(GramOutcome::Infeasible(Certificate {
                        pair: (i, j),
                        reason: InfeasibilityReason::ModulusViolation,
                        magnitude: ratio.norm(),
                    }));
                }
                let ratio = if ratio.norm() > 1.0 {
                    ratio / ratio.norm()
                } else {
                    ratio
                };
                eg.set(i, j, GramEntry::Determined(ratio));
            } else if g_in.norm() > tol {
                return Ok(GramOutcome::Infeasible(Certificate {
                    pair: (i, j),
                    reason: InfeasibilityReason::OutputNullInputNot,
                    magnitude: g_in.norm(),
                }));
            }
        }
    }
    if !spec.inputs_independent(tol) {
        return Err(ProcessError::DependentInputs {
            min_eigenvalue: spec.input_gram_min_eigenvalue(),
        });
    }
    Ok(GramOutcome::Constrained(eg))
}

/// Grid point in polar form.
#[derive(Debug, Clone, Copy)]
struct Polar {
    r: f64,
    theta: f64,
}

impl Polar {
    fn value(self) -> ComplexScalar {
        if self.r == 0.0 {
            c64(0.0, 0.0)
        } else {
            ComplexScalar::from_polar(self.r, self.theta)
        }
    }
}

/// Origin, then moduli `1/radial..1` ascending, each with `angular` phases.
fn polar_grid(radial: usize, angular: usize) -> Vec<Polar> {
    let mut grid = vec![Polar { r: 0.0, theta: 0.0 }];
    for ri in 1..=radial {
        for ti in 0..angular {
            grid.push(Polar {
                r: ri as f64 / radial as f64,
                theta: 2.0 * PI * ti as f64 / angular as f64,
            });
        }
    }
    grid
}

fn local_grid(center: Polar, round: usize) -> Vec<Polar> {
    let scale = 10f64.powi(round as i32);
    let dr = 1.0 / (COARSE_STEPS as f64 * scale);
    let dtheta = 2.0 * PI / (COARSE_STEPS as f64 * scale);
    let mut radii: Vec<f64> = (-REFINE_HALF_WIDTH..=REFINE_HALF_WIDTH)
        .map(|k| (center.r + k as f64 * dr).clamp(0.0, 1.0))
        .collect();
    radii.dedup();
    let phases: Vec<f64> = if center.r == 0.0 {
        // the phase is meaningless at the origin; cover the full circle
        (0..COARSE_STEPS)
            .map(|t| 2.0 * PI * t as f64 / COARSE_STEPS as f64)
            .collect()
    } else {
        (-REFINE_HALF_WIDTH..=REFINE_HALF_WIDTH)
            .map(|k| center.theta + k as f64 * dtheta)
            .collect()
    };
    let mut grid = Vec::with_capacity(radii.len() * phases.len());
    for &r in &radii {
        if r == 0.0 {
            grid.push(Polar { r, theta: 0.0 });
            continue;
        }
        for &theta in &phases {
            grid.push(Polar { r, theta });
        }
    }
    grid
}

struct CompletionSearch<'a> {
    eg: &'a EnvironmentGram,
    tol: f64,
    best: Vec<Polar>,
    best_score: f64,
}

enum SearchStep {
    Feasible(Vec<Polar>),
    Continue,
}

impl<'a> CompletionSearch<'a> {
    fn score(&self, point: &[Polar]) -> f64 {
        let values: Vec<ComplexScalar> = point.iter().map(|p| p.value()).collect();
        let m = self.eg.completion(&values);
        hermitian_eigen(&m, f64::INFINITY)
            .map(|e| e.min_eigenvalue())
            .unwrap_or(f64::NEG_INFINITY)
    }

    fn visit(&mut self, point: &[Polar]) -> SearchStep {
        let s = self.score(point);
        if s >= -self.tol {
            return SearchStep::Feasible(point.to_vec());
        }
        if s > self.best_score {
            self.best_score = s;
            self.best = point.to_vec();
        }
        SearchStep::Continue
    }

    /// Lexicographic scan over the product of per-entry grids, first entry
    /// most significant.
    fn product_scan(&mut self, grids: &[Vec<Polar>]) -> SearchStep {
        let k = grids.len();
        let mut idx = vec![0usize; k];
        loop {
            let point: Vec<Polar> = (0..k).map(|e| grids[e][idx[e]]).collect();
            if let SearchStep::Feasible(p) = self.visit(&point) {
                return SearchStep::Feasible(p);
            }
            let mut e = k;
            loop {
                if e == 0 {
                    return SearchStep::Continue;
                }
                e -= 1;
                idx[e] += 1;
                if idx[e] < grids[e].len() {
                    break;
                }
                idx[e] = 0;
            }
        }
    }

    /// Sweeps one entry at a time over its grid, others held at the best
    /// point, until a full pass brings no improvement.
    fn cyclic_scan(&mut self, grids: impl Fn(&Polar) -> Vec<Polar>) -> SearchStep {
        for _ in 0..MAX_CYCLIC_PASSES {
            let before = self.best_score;
            for e in 0..self.best.len() {
                let grid = grids(&self.best[e]);
                let mut point = self.best.clone();
                for candidate in grid {
                    point[e] = candidate;
                    if let SearchStep::Feasible(p) = self.visit(&point) {
                        return SearchStep::Feasible(p);
                    }
                }
            }
            if self.best_score <= before {
                break;
            }
        }
        SearchStep::Continue
    }
}

/// Completes the free entries of `eg` over the closed unit disk so the
/// result is PSD within `tol`.
///
/// The all-ones completion (identical environments, minimal dilation) is
/// tried first, then the origin, then a coarse grid with modulus step 0.05
/// and phase step 2π/20. Up to two free entries are scanned jointly; three
/// are seeded from a sparser joint grid and then swept one entry at a time.
/// Two ×10 refinement rounds around the best point follow before
/// infeasibility is declared. The first feasible point in scan order wins.
pub fn complete_psd(eg: &EnvironmentGram, tol: f64) -> FeasibilityVerdict {
    let free = eg.free_pairs();
    if free.len() > MAX_FREE_ENTRIES {
        return FeasibilityVerdict::Undetermined {
            free_entries: free.len(),
        };
    }
    let k = free.len();
    let origin = vec![Polar { r: 0.0, theta: 0.0 }; k];
    let ones = vec![Polar { r: 1.0, theta: 0.0 }; k];
    let mut search = CompletionSearch {
        eg,
        tol,
        best: origin.clone(),
        best_score: f64::NEG_INFINITY,
    };
    let realizable = |point: &[Polar]| FeasibilityVerdict::Realizable {
        completed_gram: eg.completion(&point.iter().map(|p| p.value()).collect::<Vec<_>>()),
    };

    for start in [&ones, &origin] {
        if let SearchStep::Feasible(p) = search.visit(start) {
            return realizable(&p);
        }
    }
    if k > 0 {
        let coarse = polar_grid(COARSE_STEPS, COARSE_STEPS);
        let step = if k <= 2 {
            search.product_scan(&vec![coarse.clone(); k])
        } else {
            match search.product_scan(&vec![polar_grid(SEED_RADIAL, SEED_ANGULAR); k]) {
                SearchStep::Continue => search.cyclic_scan(|_| coarse.clone()),
                feasible => feasible,
            }
        };
        if let SearchStep::Feasible(p) = step {
            return realizable(&p);
        }
        for round in 1..=REFINE_ROUNDS {
            let step = if k <= 2 {
                let grids: Vec<Vec<Polar>> =
                    search.best.iter().map(|&c| local_grid(c, round)).collect();
                search.product_scan(&grids)
            } else {
                search.cyclic_scan(|&c| local_grid(c, round))
            };
            if let SearchStep::Feasible(p) = step {
                return realizable(&p);
            }
        }
    }

    let values: Vec<ComplexScalar> = search.best.iter().map(|p| p.value()).collect();
    let worst = eg.completion(&values);
    let pair = hermitian_eigen(&worst, f64::INFINITY)
        .map(|e| dominant_pair(&e.vectors.column(0)))
        .unwrap_or((0, 1.min(eg.n() - 1)));
    FeasibilityVerdict::Infeasible {
        certificate: Certificate {
            pair,
            reason: InfeasibilityReason::PsdViolation,
            magnitude: search.best_score,
        },
    }
}

/// The two indices carrying the most weight in `v`, ascending.
fn dominant_pair(v: &DenseVector) -> (usize, usize) {
    let mut idx: Vec<usize> = (0..v.dim()).collect();
    idx.sort_by(|&a, &b| v[b].norm().total_cmp(&v[a].norm()).then(a.cmp(&b)));
    let (a, b) = (idx[0], *idx.get(1).unwrap_or(&idx[0]));
    (a.min(b), a.max(b))
}

/// `environment_gram` followed by `complete_psd`.
pub fn decide(spec: &ProcessSpec, tol: f64) -> Result<FeasibilityVerdict, ProcessError> {
    Ok(match environment_gram(spec, tol)? {
        GramOutcome::Infeasible(certificate) => FeasibilityVerdict::Infeasible { certificate },
        GramOutcome::Constrained(eg) => complete_psd(&eg, tol),
    })
}

/// Explicit unitary `V` on A⊗B⊗E with `V(|a_i⟩|e₀⟩) = |b_i⟩|Σ_i⟩`.
#[derive(Debug, Clone)]
pub struct Dilation {
    pub unitary: DenseMatrix,
    pub env_dim: usize,
    /// `|Σ_i⟩`, first one phase-fixed (first significant component real
    /// positive).
    pub environment_states: Vec<DenseVector>,
}

impl Dilation {
    /// `|a⟩|e₀⟩`.
    pub fn embed(&self, a: &DenseVector) -> DenseVector {
        numerics::tensor(a, &DenseVector::basis(self.env_dim, 0))
            .expect("dimension checked at construction")
    }

    /// Largest entry of `V†V − I`.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.unitary.rows();
        self.unitary
            .adjoint()
            .matmul(&self.unitary)
            .and_then(|p| p.max_abs_diff(&DenseMatrix::identity(n)))
            .unwrap_or(f64::INFINITY)
    }

    /// Per pair, `‖V|a_i⟩|e₀⟩ − |b_i⟩|Σ_i⟩‖`.
    pub fn pair_errors(&self, spec: &ProcessSpec) -> Result<Vec<f64>, ProcessError> {
        spec.pairs()
            .iter()
            .zip(&self.environment_states)
            .map(|(p, sigma)| {
                let image = self.unitary.matvec(&self.embed(p.input.vector()))?;
                let target = numerics::tensor(p.output.vector(), sigma)?;
                Ok(image.distance(&target)?)
            })
            .collect()
    }

    /// Per pair, `|⟨b_i|⟨Σ_i| V |a_i⟩|e₀⟩|²`.
    pub fn pair_fidelities(&self, spec: &ProcessSpec) -> Result<Vec<f64>, ProcessError> {
        spec.pairs()
            .iter()
            .zip(&self.environment_states)
            .map(|(p, sigma)| {
                let image = self.unitary.matvec(&self.embed(p.input.vector()))?;
                let target = numerics::tensor(p.output.vector(), sigma)?;
                Ok(inner(&target, &image)?.norm_sqr())
            })
            .collect()
    }
}

/// Environment vectors with Gram matrix `e` (rank-truncated at
/// [`ENVIRONMENT_RANK_CUTOFF`]).
fn environment_vectors(e: &DenseMatrix) -> Result<Vec<DenseVector>, ProcessError> {
    let eig = hermitian_eigen(e, 1e-6)?;
    let n = e.rows();
    let kept: Vec<usize> = (0..n)
        .filter(|&k| eig.values[k] > ENVIRONMENT_RANK_CUTOFF)
        .collect();
    let kept = if kept.is_empty() { vec![n - 1] } else { kept };
    let mut sigmas: Vec<DenseVector> = (0..n)
        .map(|i| {
            let amps = kept
                .iter()
                .map(|&k| eig.vectors[(i, k)].conj() * eig.values[k].max(0.0).sqrt())
                .collect();
            DenseVector::new(amps)
        })
        .collect::<Result<_, _>>()?;
    if let Some(z) = sigmas[0]
        .amplitudes()
        .iter()
        .copied()
        .find(|z| z.norm() > 1e-12)
    {
        let phase = z.conj() / z.norm();
        sigmas = sigmas.iter().map(|s| s.scale(phase)).collect();
    }
    Ok(sigmas
        .into_iter()
        .map(|s| s.normalized().unwrap_or(s))
        .collect())
}

/// `X (X†X)^{-1/2}`: orthonormal columns spanning the same space as `vectors`.
fn orthonormalize(vectors: &[DenseVector]) -> Result<Vec<DenseVector>, ProcessError> {
    let g = numerics::gram(vectors)?;
    let eig = hermitian_eigen(&g, 1e-6)?;
    let n = vectors.len();
    let inv_sqrt = DenseMatrix::from_fn(n, n, |i, j| {
        (0..n)
            .map(|k| eig.vectors[(i, k)] * eig.vectors[(j, k)].conj() / eig.values[k].sqrt())
            .sum()
    });
    (0..n)
        .map(|j| {
            let coeffs: Vec<ComplexScalar> = (0..n).map(|i| inv_sqrt[(i, j)]).collect();
            Ok(combine(vectors, &coeffs)?)
        })
        .collect()
}

/// Orthonormal basis of the complement of span(`q`) in C^dim, built from
/// computational basis vectors by repeated Gram–Schmidt.
fn orthonormal_complement(q: &[DenseVector], dim: usize) -> Result<Vec<DenseVector>, ProcessError> {
    let mut basis: Vec<DenseVector> = q.to_vec();
    let mut out = Vec::new();
    for k in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut v = DenseVector::basis(dim, k);
        for _ in 0..2 {
            for b in &basis {
                v = v.sub(&b.scale(inner(b, &v)?))?;
            }
        }
        if v.norm() > 1e-6 {
            let v = v.normalized().expect("nonzero");
            basis.push(v.clone());
            out.push(v);
        }
    }
    Ok(out)
}

pub fn construct_isometry(
    spec: &ProcessSpec,
    verdict: &FeasibilityVerdict,
    tol: f64,
) -> Result<Dilation, ProcessError> {
    let e = verdict.require_gram()?;
    let sigmas = environment_vectors(e)?;
    let env_dim = sigmas[0].dim();
    let total = spec.dim_a * spec.dim_b * env_dim;
    if total > MAX_DIM {
        return Err(NumericsError::DimensionTooLarge { dim: total }.into());
    }
    let e0 = DenseVector::basis(env_dim, 0);
    let xs: Vec<DenseVector> = spec
        .input_vectors()
        .iter()
        .map(|a| numerics::tensor(a, &e0))
        .collect::<Result<_, _>>()?;
    let ys: Vec<DenseVector> = spec
        .output_vectors()
        .iter()
        .zip(&sigmas)
        .map(|(b, s)| numerics::tensor(b, s))
        .collect::<Result<_, _>>()?;

    let deviation = numerics::gram(&xs)?.max_abs_diff(&numerics::gram(&ys)?)?;
    if deviation > 100.0 * tol {
        return Err(ProcessError::GramMismatch { deviation });
    }

    let qx = orthonormalize(&xs)?;
    let qy = orthonormalize(&ys)?;
    let px = orthonormal_complement(&qx, total)?;
    let py = orthonormal_complement(&qy, total)?;
    if px.len() != py.len() {
        return Err(ProcessError::GramMismatch { deviation });
    }
    // V = Σ_k |qy_k⟩⟨qx_k| + Σ_k |py_k⟩⟨px_k|
    let mut v = DenseMatrix::zeros(total, total);
    for (from, to) in qx.iter().zip(&qy).chain(px.iter().zip(&py)) {
        for r in 0..total {
            if to[r] == ComplexScalar::default() {
                continue;
            }
            for c in 0..total {
                v[(r, c)] += to[r] * from[c].conj();
            }
        }
    }
    Ok(Dilation {
        unitary: v,
        env_dim,
        environment_states: sigmas,
    })
}

/// Largest `|E_ij − 1|`.
pub fn environment_deviation(completed_gram: &DenseMatrix) -> f64 {
    completed_gram
        .entries()
        .iter()
        .map(|z| (z - c64(1.0, 0.0)).norm())
        .fold(0.0, f64::max)
}

/// Whether every environment ends in the same state, so superpositions of
/// the inputs map coherently.
pub fn is_coherence_preserving(verdict: &FeasibilityVerdict, tol: f64) -> bool {
    verdict
        .completed_gram()
        .is_some_and(|e| environment_deviation(e) <= tol)
}

/// Expansion coefficients of `input` over the spec inputs; errors when the
/// input is outside their span.
pub fn input_coefficients(
    spec: &ProcessSpec,
    input: &PureState,
    tol: f64,
) -> Result<Vec<ComplexScalar>, ProcessError> {
    let fit = span_coefficients(&spec.input_vectors(), input.vector(), tol)?;
    if !fit.in_span(tol) {
        return Err(ProcessError::OutsideSpan {
            residual: fit.residual,
        });
    }
    Ok(fit.coefficients)
}

/// Linear extension of the map to superpositions of the inputs; requires
/// identical environments.
pub fn apply_process(
    spec: &ProcessSpec,
    verdict: &FeasibilityVerdict,
    input: &PureState,
    tol: f64,
) -> Result<PureState, ProcessError> {
    let e = verdict.require_gram()?;
    let deviation = environment_deviation(e);
    if deviation > tol {
        return Err(ProcessError::EnvironmentsDiffer { deviation });
    }
    let alpha = input_coefficients(spec, input, tol)?;
    apply_coefficients(spec, &alpha)
}

/// `Σ α_i |b_i⟩`, normalized.
pub fn apply_coefficients(
    spec: &ProcessSpec,
    alpha: &[ComplexScalar],
) -> Result<PureState, ProcessError> {
    let out = combine(&spec.output_vectors(), alpha)?;
    Ok(PureState::normalizing(vec![spec.dim_a, spec.dim_b], out)?)
}

/// Density matrix on A⊗B.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub dims: Vec<usize>,
    pub matrix: DenseMatrix,
}

impl DensityMatrix {
    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.matrix
            .matmul(&self.matrix)
            .map(|m| m.trace().re)
            .unwrap_or(f64::NAN)
    }

    pub fn min_eigenvalue(&self) -> Result<f64, ProcessError> {
        Ok(hermitian_eigen(&self.matrix, 1e-6)?.min_eigenvalue())
    }

    pub fn pure(state: &PureState) -> Self {
        let v = state.vector();
        let d = v.dim();
        Self {
            dims: state.dims().to_vec(),
            matrix: DenseMatrix::from_fn(d, d, |i, j| v[i] * v[j].conj()),
        }
    }
}

/// Reduced output state on A⊗B for a superposed input when environments
/// may differ: `ρ = Σ_ij α_i conj(α_j) ⟨Σ_j|Σ_i⟩ |b_i⟩⟨b_j|`, trace-normalized.
pub fn output_density(
    spec: &ProcessSpec,
    verdict: &FeasibilityVerdict,
    input: &PureState,
    tol: f64,
) -> Result<DensityMatrix, ProcessError> {
    let e = verdict.require_gram()?;
    let alpha = input_coefficients(spec, input, tol)?;
    let outs = spec.output_vectors();
    let d = spec.dim_a * spec.dim_b;
    let n = spec.len();
    let mut rho = DenseMatrix::zeros(d, d);
    for i in 0..n {
        for j in 0..n {
            let w = alpha[i] * alpha[j].conj() * e[(j, i)];
            if w == ComplexScalar::default() {
                continue;
            }
            for r in 0..d {
                for c in 0..d {
                    rho[(r, c)] += w * outs[i][r] * outs[j][c].conj();
                }
            }
        }
    }
    let tr = rho.trace().re;
    let rho = DenseMatrix::from_fn(d, d, |r, c| rho[(r, c)] / tr);
    Ok(DensityMatrix {
        dims: vec![spec.dim_a, spec.dim_b],
        matrix: rho,
    })
}
