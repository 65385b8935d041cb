use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::{CliError, ReportDocument, RunConfig};
use crate::catalysis::{
    classify, deletion_family_sweep, reversibility_overlap, CatalysisReport, Classification,
    DeletionFamilyPoint, NotCatalysisReason, WitnessRecord, REVERSIBILITY_TARGET,
};
use crate::numerics::{ComplexScalar, DenseMatrix};
use crate::process::{
    cloning_spec, construct_isometry, deletion_spec, environment_deviation,
    no_information_cloning_spec, Dilation, FeasibilityVerdict, InfeasibilityReason, ProcessSpec,
};
use crate::quantum::{
    apply_gate, deletion_probe_input, deletion_probe_output, fidelity, paper_states,
    phase_aligned_distance, plus_zero, pure_concurrence, GateSpec, PureState, StateSetId,
};
use crate::teleport::{
    nonlocal_cnot, teleport, Mode, ProtocolRun, ResourceLedger, NONLOCAL_CNOT_LEDGER,
    TELEPORT_LEDGER,
};

pub const SCENARIOS: [&str; 6] = [
    "cloning",
    "deletion",
    "deletion-sweep",
    "no-info-cloning",
    "teleport",
    "nonlocal-cnot",
];

/// Concurrence bound for a separable state.
const SEPARABLE: f64 = 1e-9;
/// Allowed distance of a witness concurrence from 1.
const MAXIMAL: f64 = 1e-9;
/// Allowed isometry defect.
const ISOMETRY: f64 = 1e-9;
/// Protocol and pair reproduction: fidelity ≥ 1 − EXACT.
const EXACT: f64 = 1e-12;
/// Random inputs per protocol scenario.
const PROTOCOL_INPUTS: usize = 100;
/// Overlap above which the deletion family must entangle.
const SWEEP_OVERLAP: f64 = 1e-3;
const SWEEP_ENTANGLED: f64 = 1e-6;

/// Runs a named scenario end to end. The document's exit code is 0 when
/// every assertion holds and 2 otherwise.
pub fn run_scenario(name: &str, config: &RunConfig) -> Result<ReportDocument, CliError> {
    config.validate()?;
    let mut doc = ReportDocument::new(name, config);
    let outcome = match name {
        "cloning" => cloning(&mut doc, config),
        "deletion" => deletion(&mut doc, config),
        "deletion-sweep" => deletion_sweep(&mut doc, config),
        "no-info-cloning" => no_info_cloning(&mut doc, config),
        "teleport" => teleport_scenario(&mut doc, config),
        "nonlocal-cnot" => nonlocal_cnot_scenario(&mut doc, config),
        other => return Err(CliError::UnknownScenario(other.to_string())),
    };
    if let Err(e) = outcome {
        doc.check("pipeline_completed", false, e);
    }
    doc.settle();
    Ok(doc)
}

fn show<T: std::fmt::Display>(x: Option<T>) -> String {
    x.map_or_else(|| "none".to_string(), |v| v.to_string())
}

fn complex(z: ComplexScalar) -> Value {
    json!([z.re, z.im])
}

fn state_json(s: &PureState) -> Value {
    Value::Array(s.amplitudes().iter().copied().map(complex).collect())
}

fn matrix_json(m: &DenseMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|r| Value::Array((0..m.cols()).map(|c| complex(m[(r, c)])).collect()))
            .collect(),
    )
}

fn witness_json(w: &WitnessRecord) -> Value {
    json!({
        "source": w.source.label(),
        "candidate_index": w.candidate_index,
        "input": state_json(&w.input),
        "output": state_json(&w.output),
        "coefficients": Value::Array(w.coefficients.iter().copied().map(complex).collect()),
        "concurrence_in": w.concurrence_in,
        "concurrence_out": w.concurrence_out,
    })
}

fn verdict_json(v: &FeasibilityVerdict) -> Value {
    let mut out = json!({
        "status": v.status(),
        "completed_gram": v.completed_gram().map(matrix_json),
        "certificate": v.certificate().map(|c| json!({
            "pair": [c.pair.0, c.pair.1],
            "reason": c.reason.as_str(),
            "magnitude": c.magnitude,
        })),
    });
    if let FeasibilityVerdict::Undetermined { free_entries } = v {
        out["free_entries"] = json!(free_entries);
    }
    out
}

fn classification_json(c: &Classification) -> Value {
    let reason = match c {
        Classification::NotCatalysis(r) => Some(r.label()),
        _ => None,
    };
    json!({ "label": c.label(), "reason": reason })
}

fn ledger_json(l: &ResourceLedger) -> Value {
    json!({
        "ebits_consumed": l.ebits_consumed,
        "cbits_a_to_b": l.cbits_a_to_b,
        "cbits_b_to_a": l.cbits_b_to_a,
    })
}

fn point_json(p: &DeletionFamilyPoint) -> Value {
    json!({
        "u": p.u,
        "v": p.v,
        "delta": p.delta,
        "overlap": complex(p.overlap),
        "overlap_abs": p.overlap.norm(),
        "out_concurrence": p.out_concurrence,
        "classification": p.classification,
    })
}

/// Writes the classification of `spec` into `doc`; builds the dilation
/// when the process is realizable.
pub(super) fn record_analysis(
    doc: &mut ReportDocument,
    spec: &ProcessSpec,
    report: &CatalysisReport,
    tol: f64,
) -> Result<Option<Dilation>, crate::process::ProcessError> {
    doc.insert("verdict", verdict_json(&report.verdict));
    doc.insert(
        "catalyst_intact",
        json!({
            "overall": report.catalyst.overall,
            "pairs": report.catalyst.pairs.iter().map(|p| json!({
                "pair": p.pair,
                "intact": p.intact,
                "fidelity": p.fidelity,
                "failure": p.failure,
            })).collect::<Vec<_>>(),
        }),
    );
    doc.insert("coherence_preserving", report.coherence_preserving);
    doc.insert(
        "classification",
        classification_json(&report.classification),
    );
    doc.insert("bob_alone_impossible", report.bob_alone_impossible);
    doc.insert(
        "witnesses",
        Value::Array(report.witnesses.iter().map(witness_json).collect()),
    );
    if !report.verdict.is_realizable() {
        return Ok(None);
    }
    let dilation = construct_isometry(spec, &report.verdict, tol)?;
    doc.insert(
        "isometry",
        json!({
            "env_dim": dilation.env_dim,
            "unitarity_error": dilation.unitarity_error(),
            "pair_errors": dilation.pair_errors(spec)?,
            "pair_fidelities": dilation.pair_fidelities(spec)?,
        }),
    );
    Ok(Some(dilation))
}

type Outcome = Result<(), String>;

/// Assertions shared by the two catalysis scenarios.
fn catalysis_checks(
    doc: &mut ReportDocument,
    spec: &ProcessSpec,
    tol: f64,
) -> Result<CatalysisReport, String> {
    let report = classify(spec, tol).map_err(|e| e.to_string())?;
    let dilation = record_analysis(doc, spec, &report, tol).map_err(|e| e.to_string())?;

    doc.check(
        "verdict_realizable",
        report.verdict.is_realizable(),
        format!("verdict {}", report.verdict.status()),
    );
    let deviation = report.verdict.completed_gram().map(environment_deviation);
    doc.check(
        "environment_gram_all_ones",
        deviation.is_some_and(|d| d <= tol),
        format!("max |E_ij - 1| = {}", show(deviation)),
    );
    doc.check(
        "catalyst_intact",
        report.catalyst.overall && report.catalyst.pairs.len() == spec.len(),
        format!(
            "first failing pair {}",
            show(report.catalyst.first_failure())
        ),
    );
    match dilation {
        Some(d) => {
            let err = d.unitarity_error();
            doc.check(
                "isometry_unitary",
                err <= ISOMETRY,
                format!("max |V†V - I| = {err:e}"),
            );
            let fids = d.pair_fidelities(spec).map_err(|e| e.to_string())?;
            let worst = fids.iter().copied().fold(f64::INFINITY, f64::min);
            doc.check(
                "isometry_reproduces_pairs",
                worst >= 1.0 - EXACT,
                format!("min pair fidelity {worst}"),
            );
        }
        None => doc.check("isometry_constructed", false, "process is not realizable"),
    }
    doc.check(
        "classification_quantum_catalysis",
        matches!(report.classification, Classification::QuantumCatalysis(_)),
        format!("classification {}", report.classification.label()),
    );
    Ok(report)
}

fn witness_for<'a>(report: &'a CatalysisReport, input: &PureState) -> Option<&'a WitnessRecord> {
    report
        .witnesses
        .iter()
        .find(|w| fidelity(&w.input, input).is_ok_and(|f| f >= 1.0 - EXACT))
}

fn cloning(doc: &mut ReportDocument, config: &RunConfig) -> Outcome {
    let report = catalysis_checks(doc, &cloning_spec(), config.tolerance)?;
    let w = witness_for(&report, &plus_zero());
    doc.check(
        "witness_plus_zero",
        w.is_some_and(|w| {
            w.concurrence_in <= SEPARABLE && (w.concurrence_out - 1.0).abs() <= MAXIMAL
        }),
        match w {
            Some(w) => format!("concurrence {} -> {}", w.concurrence_in, w.concurrence_out),
            None => "|+>|0> is not among the witnesses".to_string(),
        },
    );
    Ok(())
}

fn deletion(doc: &mut ReportDocument, config: &RunConfig) -> Outcome {
    let report = catalysis_checks(doc, &deletion_spec(), config.tolerance)?;
    let expected = deletion_probe_output();
    let w = witness_for(&report, &deletion_probe_input());
    let distance = w.map(|w| phase_aligned_distance(&w.output, &expected).unwrap_or(f64::INFINITY));
    doc.check(
        "witness_deletion_probe",
        w.is_some_and(|w| {
            w.concurrence_in <= SEPARABLE && (w.concurrence_out - 1.0).abs() <= MAXIMAL
        }),
        match w {
            Some(w) => format!("concurrence {} -> {}", w.concurrence_in, w.concurrence_out),
            None => "the separable probe is not among the witnesses".to_string(),
        },
    );
    doc.check(
        "witness_output_matches",
        distance.is_some_and(|d| d <= MAXIMAL),
        format!(
            "distance to (|-0> + i|+1>)/sqrt2 up to phase: {}",
            show(distance)
        ),
    );
    Ok(())
}

fn deletion_sweep(doc: &mut ReportDocument, config: &RunConfig) -> Outcome {
    let tol = config.tolerance;
    let points = deletion_family_sweep(config.steps, tol).map_err(|e| e.to_string())?;
    doc.insert(
        "sweep",
        Value::Array(points.iter().map(point_json).collect()),
    );

    doc.check(
        "point_count",
        points.len() == config.steps,
        format!("{} points", points.len()),
    );
    let mismatch = points
        .iter()
        .find(|p| (p.out_concurrence <= SEPARABLE) != (p.overlap.norm() <= SEPARABLE));
    doc.check(
        "zero_concurrence_iff_orthogonal",
        mismatch.is_none(),
        match mismatch {
            Some(p) => format!("fails at delta {}", p.delta),
            None => "holds at every point".to_string(),
        },
    );
    let weak = points
        .iter()
        .find(|p| p.overlap.norm() > SWEEP_OVERLAP && p.out_concurrence <= SWEEP_ENTANGLED);
    doc.check(
        "entangling_where_overlapping",
        weak.is_none(),
        match weak {
            Some(p) => format!("concurrence {} at delta {}", p.out_concurrence, p.delta),
            None => "holds at every point".to_string(),
        },
    );
    let worst_rev = points
        .iter()
        .flat_map(|p| [p.u, p.v])
        .map(|u| (reversibility_overlap(u).norm() - REVERSIBILITY_TARGET).abs())
        .fold(0.0, f64::max);
    doc.check(
        "reversibility_overlap",
        worst_rev <= EXACT,
        format!("max ||<phi'|+>| - 1/sqrt2| = {worst_rev:e}"),
    );
    let pi_on_grid = config.steps.is_multiple_of(2);
    if pi_on_grid {
        let p = &points[config.steps / 2];
        doc.check(
            "separable_at_delta_pi",
            p.out_concurrence <= SEPARABLE,
            format!("concurrence {} at delta {}", p.out_concurrence, p.delta),
        );
    }
    doc.insert("delta_pi_on_grid", pi_on_grid);
    Ok(())
}

fn no_info_cloning(doc: &mut ReportDocument, config: &RunConfig) -> Outcome {
    let spec = no_information_cloning_spec();
    let report = classify(&spec, config.tolerance).map_err(|e| e.to_string())?;
    record_analysis(doc, &spec, &report, config.tolerance).map_err(|e| e.to_string())?;
    let cert = report.verdict.certificate().copied();
    doc.check(
        "verdict_infeasible",
        matches!(report.verdict, FeasibilityVerdict::Infeasible { .. }),
        format!("verdict {}", report.verdict.status()),
    );
    doc.check(
        "certificate_modulus_violation",
        cert.is_some_and(|c| c.reason == InfeasibilityReason::ModulusViolation),
        show(cert.map(|c| c.reason.as_str())),
    );
    doc.check(
        "certificate_magnitude_sqrt2",
        cert.is_some_and(|c| (c.magnitude - 2f64.sqrt()).abs() <= 1e-9),
        format!("magnitude {}", show(cert.map(|c| c.magnitude))),
    );
    doc.check(
        "certificate_involves_third_state",
        cert.is_some_and(|c| c.pair.0 == 2 || c.pair.1 == 2),
        format!(
            "pair {}",
            show(cert.map(|c| format!("({}, {})", c.pair.0, c.pair.1)))
        ),
    );
    doc.check(
        "classification_not_catalysis",
        matches!(
            report.classification,
            Classification::NotCatalysis(NotCatalysisReason::Infeasible(_))
        ),
        format!("classification {}", report.classification.label()),
    );
    Ok(())
}

struct ProtocolStats {
    min_fidelity: f64,
    max_probability_error: f64,
    max_total_error: f64,
    branch_counts_ok: bool,
    ledgers_ok: bool,
}

fn protocol_stats(
    runs: &[(ProtocolRun, PureState)],
    expected_ledger: ResourceLedger,
    quarter: bool,
) -> Result<ProtocolStats, String> {
    let mut stats = ProtocolStats {
        min_fidelity: f64::INFINITY,
        max_probability_error: 0.0,
        max_total_error: 0.0,
        branch_counts_ok: true,
        ledgers_ok: true,
    };
    for (run, target) in runs {
        stats.branch_counts_ok &= run.branches.len() == 4;
        stats.ledgers_ok &= run.ledger == expected_ledger;
        let total: f64 = run.branches.iter().map(|b| b.probability).sum();
        stats.max_total_error = stats.max_total_error.max((total - 1.0).abs());
        for b in &run.branches {
            let f = fidelity(&b.post_state, target).map_err(|e| e.to_string())?;
            stats.min_fidelity = stats.min_fidelity.min(f);
            if quarter {
                stats.max_probability_error = stats
                    .max_probability_error
                    .max((b.probability - 0.25).abs());
            }
        }
    }
    Ok(stats)
}

fn record_protocol(
    doc: &mut ReportDocument,
    stats: &ProtocolStats,
    ledger: ResourceLedger,
    expected: ResourceLedger,
) {
    doc.insert("ledger", ledger_json(&ledger));
    doc.insert(
        "protocol",
        json!({
            "inputs_checked": PROTOCOL_INPUTS,
            "min_fidelity": stats.min_fidelity,
            "max_probability_error": stats.max_probability_error,
            "max_total_probability_error": stats.max_total_error,
        }),
    );
    doc.check(
        "all_branches_enumerated",
        stats.branch_counts_ok,
        "4 branches per input",
    );
    doc.check(
        "branch_fidelity",
        stats.min_fidelity >= 1.0 - EXACT,
        format!("min fidelity {}", stats.min_fidelity),
    );
    doc.check(
        "probabilities_sum_to_one",
        stats.max_total_error <= EXACT,
        format!("max |sum p - 1| = {:e}", stats.max_total_error),
    );
    doc.check(
        "ledger",
        stats.ledgers_ok && ledger == expected,
        format!(
            "{} ebit, {} cbit A->B, {} cbit B->A",
            ledger.ebits_consumed, ledger.cbits_a_to_b, ledger.cbits_b_to_a
        ),
    );
}

fn sample_json(run: &ProtocolRun, target: &PureState, seed: u64) -> Result<Value, String> {
    let b = &run.branches[0];
    Ok(json!({
        "seed": seed,
        "measurement_bits": b.measurement_bits,
        "probability": b.probability,
        "fidelity": fidelity(&b.post_state, target).map_err(|e| e.to_string())?,
    }))
}

fn teleport_scenario(doc: &mut ReportDocument, config: &RunConfig) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut runs = Vec::with_capacity(PROTOCOL_INPUTS);
    for _ in 0..PROTOCOL_INPUTS {
        let input = PureState::random(&[2], &mut rng);
        runs.push((
            teleport(&input, Mode::Enumerate).map_err(|e| e.to_string())?,
            input,
        ));
    }
    let stats = protocol_stats(&runs, TELEPORT_LEDGER, true)?;
    record_protocol(doc, &stats, runs[0].0.ledger, TELEPORT_LEDGER);
    doc.check(
        "branch_probability_quarter",
        stats.max_probability_error <= EXACT,
        format!("max |p - 1/4| = {:e}", stats.max_probability_error),
    );
    let input = &runs[0].1;
    let sampled = teleport(input, Mode::Sample { seed: config.seed }).map_err(|e| e.to_string())?;
    doc.insert("sample", sample_json(&sampled, input, config.seed)?);
    Ok(())
}

fn nonlocal_cnot_scenario(doc: &mut ReportDocument, config: &RunConfig) -> Outcome {
    let err = |e: crate::quantum::QuantumError| e.to_string();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut runs = Vec::with_capacity(PROTOCOL_INPUTS);
    for _ in 0..PROTOCOL_INPUTS {
        let input = PureState::random(&[2, 2], &mut rng);
        let target = apply_gate(&GateSpec::cnot(0, 1), &input).map_err(err)?;
        runs.push((
            nonlocal_cnot(&input, Mode::Enumerate).map_err(|e| e.to_string())?,
            target,
        ));
    }
    let stats = protocol_stats(&runs, NONLOCAL_CNOT_LEDGER, false)?;
    record_protocol(doc, &stats, runs[0].0.ledger, NONLOCAL_CNOT_LEDGER);

    let phi = paper_states(StateSetId::Phi).states;
    let psi = paper_states(StateSetId::Psi).states;
    let mut cloning_runs = Vec::with_capacity(3);
    for (p, f) in psi.iter().zip(&phi) {
        let input = p.tensor(f).map_err(err)?;
        let target = p.tensor(p).map_err(err)?;
        cloning_runs.push((
            nonlocal_cnot(&input, Mode::Enumerate).map_err(|e| e.to_string())?,
            target,
        ));
    }
    let cloning = protocol_stats(&cloning_runs, NONLOCAL_CNOT_LEDGER, false)?;
    doc.check(
        "cloning_pairs_reproduced",
        cloning.min_fidelity >= 1.0 - EXACT && cloning.branch_counts_ok,
        format!("min fidelity {}", cloning.min_fidelity),
    );

    // The catalysis witness ends maximally entangled: one ebit that local
    // operations and classical messages cannot create.
    let bell = nonlocal_cnot(&plus_zero(), Mode::Enumerate).map_err(|e| e.to_string())?;
    let mut min_c = f64::INFINITY;
    for b in &bell.branches {
        min_c = min_c.min(pure_concurrence(&b.post_state, 1).map_err(err)?);
    }
    doc.insert(
        "entanglement_created",
        json!({ "input": "|+>|0>", "min_branch_concurrence": min_c, "ebits_required": 1 }),
    );
    doc.check(
        "witness_output_maximally_entangled",
        (min_c - 1.0).abs() <= MAXIMAL,
        format!("min branch concurrence {min_c}"),
    );
    doc.check(
        "ledger_one_ebit",
        bell.ledger.ebits_consumed == 1,
        format!("{} ebit", bell.ledger.ebits_consumed),
    );

    let sampled = nonlocal_cnot(&plus_zero(), Mode::Sample { seed: config.seed })
        .map_err(|e| e.to_string())?;
    let bell_target = apply_gate(&GateSpec::cnot(0, 1), &plus_zero()).map_err(err)?;
    doc.insert("sample", sample_json(&sampled, &bell_target, config.seed)?);
    Ok(())
}
