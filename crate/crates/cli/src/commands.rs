use std::collections::BTreeSet;

use serde::Serialize;
use serde_json::{json, Map, Value};

use cheshire_core::catalog::{self, OPERATOR_NAMES};
use cheshire_core::contextuality::{
    build_context_graph, claims, claims_probabilities, depolarized_state, infer,
    inequality_sweep, search_assignments_with, violation_threshold, ClaimId, SweepPoint,
    INNER_TRIANGLE, THRESHOLD_TOLERANCE,
};
use cheshire_core::optics::{
    build_protocol, detection_probabilities, InjectionPoint, Input, Variant,
};
use cheshire_core::sampler::{
    estimate, inequality_test, outcome_probabilities, sample_counts_chunked, CountRecord,
    PRNG_NAME, UNDETECTED,
};
use cheshire_core::weakval::{decompose, transition_operator, weak_value, CoherenceTable, PrePostSelection};
use cheshire_core::{Operator, TOLERANCE};

use crate::args::*;
use crate::report::{check, check_finite, complex, input_error, Failure, Outcome, Report};
use crate::state::{parse_state, NORM_WARNING};

/// What a command writes to stdout.
pub enum Output {
    Json(Report),
    Csv(String),
}

impl Output {
    pub fn render(&self) -> String {
        match self {
            Output::Json(r) => r.to_json(),
            Output::Csv(s) => s.clone(),
        }
    }
}

pub fn run(cli: &Cli) -> Outcome<Output> {
    match &cli.command {
        Command::WeakValues(a) => weak_values(a).map(Output::Json),
        Command::Decompose(a) => decompose_cmd(a).map(Output::Json),
        Command::Claims(a) => claims_cmd(a).map(Output::Json),
        Command::Inequality(a) => inequality(a),
        Command::Contexts(a) => contexts(a).map(Output::Json),
        Command::Simulate(a) => simulate(a),
        Command::Infer(a) => infer_cmd(a).map(Output::Json),
    }
}

fn inputs(pairs: Vec<(&str, Value)>) -> Map<String, Value> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn selection(sel: &Selection) -> Outcome<PrePostSelection> {
    Ok(PrePostSelection::new(parse_state(&sel.pre)?, parse_state(&sel.post)?)?)
}

fn selection_inputs(sel: &Selection) -> Vec<(&'static str, Value)> {
    vec![("pre", json!(sel.pre)), ("post", json!(sel.post))]
}

fn check_noise(p: f64) -> Outcome<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(input_error(format!("--p {p} outside [0, 1]")))
    }
}

/// Labels every report that depends on the noise parameter.
const NOISE_MODEL: &str = "depolarizing (modelling choice): rho_p = (1 - p)|E_CC><E_CC| + p I/4 \
     on the preselected state";

const DEFAULT_OPS: [&str; 5] = ["proj(H1)", "proj(H2)", "proj(V1)", "proj(V2)", "coh(D2,A2)"];

/// Catalog operators plus `coh(X,Y)` for `|X⟩⟨Y|`.
fn resolve_operator(name: &str) -> Outcome<Operator> {
    if let Some(inner) = name.strip_prefix("coh(").and_then(|s| s.strip_suffix(')')) {
        let (ket, bra) = inner
            .split_once(',')
            .ok_or_else(|| input_error(format!("`{name}`: expected coh(KET,BRA)")))?;
        return Ok(catalog::coherence(ket.trim(), bra.trim())?);
    }
    Ok(catalog::operator(name)?)
}

fn weak_values(a: &WeakValuesArgs) -> Outcome<Report> {
    let sel = selection(&a.selection)?;
    let names: Vec<String> = if a.ops.is_empty() {
        OPERATOR_NAMES.iter().chain(DEFAULT_OPS.iter()).map(|s| s.to_string()).collect()
    } else {
        a.ops.clone()
    };
    let t = transition_operator(&sel)?;
    let trace = t.matrix().trace();
    check((trace - 1.0).norm() < TOLERANCE / sel.overlap().norm_sqr(), || {
        format!("transition operator trace {trace}")
    })?;
    let mut rows = Vec::new();
    for name in &names {
        let op = resolve_operator(name)?;
        let w = weak_value(&op, &sel)?;
        let via_trace = t.expectation(&op);
        check((w - via_trace).norm() < TOLERANCE / sel.overlap().norm(), || {
            format!("{name}: weak value {w} disagrees with Tr(O T) = {via_trace}")
        })?;
        let hermitian = op.is_hermitian();
        let (range, anomalous) = if hermitian {
            let ev = op.hermitian_eigenvalues();
            let (lo, hi) = (ev[0], ev[3]);
            let outside = w.re < lo - TOLERANCE || w.re > hi + TOLERANCE || w.im.abs() > TOLERANCE;
            (json!([lo, hi]), outside)
        } else {
            (Value::Null, false)
        };
        rows.push(json!({
            "operator": name,
            "value": complex(name, w)?,
            "hermitian": hermitian,
            "eigenvalue_range": range,
            "anomalous": anomalous,
        }));
    }
    let overlap = sel.overlap();
    let mut inp = selection_inputs(&a.selection);
    inp.push(("operators", json!(names)));
    let results = json!({
        "overlap": complex("overlap", overlap)?,
        "postselection_probability": check_finite("postselection probability", overlap.norm_sqr())?,
        "weak_values": rows,
    });
    Ok(Report::new("weak-values", inputs(inp), results)
        .tolerance("exact", TOLERANCE)
        .tolerance("input_norm_warning", NORM_WARNING))
}

const ADJOINT_NOTE: &str = "coefficients[n][m] multiplies |n><m| in T = |i><f|/<f|i>, so it equals \
     the weak value of |m><n|. The adjoint table T^dagger = |f><i|/<i|f> lists the same terms \
     with ket and bra exchanged; its nonzero positions give the conventional written expansion.";

fn table_value(table: &CoherenceTable) -> Outcome<Value> {
    let mut rows = Vec::new();
    for (n, row) in table.coefficients().iter().enumerate() {
        let mut out = Vec::new();
        for (m, z) in row.iter().enumerate() {
            out.push(complex(&format!("coefficient ({n}, {m})"), *z)?);
        }
        rows.push(out);
    }
    let mut terms = Vec::new();
    for t in table.nonzero_terms(TOLERANCE) {
        let coefficient = complex(&format!("|{}><{}|", t.ket, t.bra), t.coefficient)?;
        terms.push(json!({"ket": t.ket, "bra": t.bra, "coefficient": coefficient}));
    }
    Ok(json!({"coefficients": rows, "nonzero_terms": terms}))
}

fn decompose_cmd(a: &DecomposeArgs) -> Outcome<Report> {
    let sel = selection(&a.selection)?;
    let basis = catalog::basis(a.basis.as_str())?;
    let t = transition_operator(&sel)?;
    let table = decompose(&t, &basis);
    let adjoint = table.adjoint();
    let scale = 1.0 / sel.overlap().norm_sqr();
    let err = table
        .reconstruct()
        .distance(t.matrix())
        .ok_or_else(|| Failure::Numerical(anyhow::anyhow!("reconstruction changed basis tag")))?;
    check(err < TOLERANCE * scale, || format!("reconstruction error {err}"))?;
    let diag = table.diagonal_sum();
    check((diag - 1.0).norm() < TOLERANCE * scale, || format!("diagonal sum {diag}"))?;
    let mut inp = selection_inputs(&a.selection);
    inp.insert(0, ("basis", json!(a.basis.as_str())));
    let results = json!({
        "basis": basis.name(),
        "labels": basis.labels(),
        "convention": ADJOINT_NOTE,
        "transition": table_value(&table)?,
        "adjoint": table_value(&adjoint)?,
        "diagonal_sum": complex("diagonal sum", diag)?,
        "reconstruction_error": err,
    });
    Ok(Report::new("decompose", inputs(inp), results)
        .tolerance("exact", TOLERANCE)
        .tolerance("nonzero_term", TOLERANCE)
        .tolerance("input_norm_warning", NORM_WARNING))
}

fn claims_cmd(a: &ClaimsArgs) -> Outcome<Report> {
    let p = check_noise(a.p)?;
    let input = Input::Mixed(depolarized_state(p)?);
    let probs = claims_probabilities(&input)?;
    let mut rows = Vec::new();
    for c in claims() {
        let overlaps = c.overlaps();
        check(c.holds(), || format!("claim {}: overlaps {overlaps:?} are not zero", c.id))?;
        let (variant, detector) = c.witness;
        let rep = detection_probabilities(&build_protocol(variant), &input, InjectionPoint::Preselection)?;
        let witness_p = rep
            .probabilities
            .get(detector)
            .or_else(|| rep.inferred.get(detector))
            .copied()
            .ok_or_else(|| Failure::Numerical(anyhow::anyhow!("no `{detector}` in variant {variant}")))?;
        rows.push(json!({
            "id": c.id.number(),
            "statement": c.statement,
            "prohibited_property": c.prohibited_property,
            "hexagon_pair": c.hexagon_pair,
            "zero_overlaps": c.zero_overlaps.iter().zip(overlaps).map(|((bra, ket), x)| {
                json!({"bra": bra, "ket": ket, "magnitude": x})
            }).collect::<Vec<_>>(),
            "holds": c.holds(),
            "eliminated_product_states": c.eliminated_product_states,
            "witness": {"variant": variant, "detector": detector, "probability": check_finite(detector, witness_p)?},
        }));
    }
    let results = json!({
        "claims": rows,
        "noise_model": NOISE_MODEL,
        "probabilities": probabilities_value(&probs)?,
    });
    Ok(Report::new("claims", inputs(vec![("p", json!(p))]), results).tolerance("exact", TOLERANCE))
}

fn probabilities_value(p: &cheshire_core::contextuality::ClaimProbabilities) -> Outcome<Value> {
    Ok(json!({
        "P_D2": check_finite("P(D2)", p.d2)?,
        "P_Vplus": check_finite("P(V+)", p.v_plus)?,
        "P_Phiplus": check_finite("P(Phi+)", p.phi_plus)?,
        "P_Dplus": check_finite("P(D+)", p.d_plus)?,
    }))
}

#[derive(Serialize)]
struct SweepRow {
    p: f64,
    #[serde(rename = "P_D2")]
    d2: f64,
    #[serde(rename = "P_Vplus")]
    v_plus: f64,
    #[serde(rename = "P_Phiplus")]
    phi_plus: f64,
    #[serde(rename = "P_Dplus")]
    d_plus: f64,
    margin: f64,
}

impl From<&SweepPoint> for SweepRow {
    fn from(s: &SweepPoint) -> Self {
        Self {
            p: s.p,
            d2: s.probabilities.d2,
            v_plus: s.probabilities.v_plus,
            phi_plus: s.probabilities.phi_plus,
            d_plus: s.probabilities.d_plus,
            margin: s.margin,
        }
    }
}

fn csv_string<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Outcome<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Failure::Numerical(e.into()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Numerical(anyhow::anyhow!("{e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn inequality(a: &InequalityArgs) -> Outcome<Output> {
    let threshold = violation_threshold()?;
    check((threshold - 1.0 / 3.0).abs() < 1e-9, || format!("threshold {threshold}"))?;
    if let Some(n) = a.sweep {
        let points = inequality_sweep(n)?;
        let rows: Vec<SweepRow> = points.iter().map(SweepRow::from).collect();
        for r in &rows {
            for x in [r.p, r.d2, r.v_plus, r.phi_plus, r.d_plus, r.margin] {
                check_finite("sweep value", x)?;
            }
        }
        if a.format == Format::Csv {
            return csv_string(rows).map(Output::Csv);
        }
        let results = json!({"threshold": threshold, "noise_model": NOISE_MODEL, "points": rows});
        let report = Report::new("inequality", inputs(vec![("sweep", json!(n))]), results)
            .tolerance("exact", TOLERANCE)
            .tolerance("threshold_bisection", THRESHOLD_TOLERANCE);
        return Ok(Output::Json(report));
    }
    if a.format == Format::Csv {
        return Err(input_error("--format csv is only available with --sweep"));
    }
    let p = check_noise(a.p.unwrap_or(0.0))?;
    let probs = claims_probabilities(&Input::Mixed(depolarized_state(p)?))?;
    let margin = check_finite("margin", probs.margin())?;
    let mut results = json!({
        "p": p,
        "noise_model": NOISE_MODEL,
        "probabilities": probabilities_value(&probs)?,
        "margin": margin,
        "violated": margin < -TOLERANCE,
        "threshold": threshold,
    });
    let mut inp = vec![("p", json!(p))];
    let mut report_seed = None;
    if a.simulate {
        let seed = a.seed.expect("clap requires --seed with --simulate");
        let records = Variant::ALL
            .iter()
            .enumerate()
            .map(|(k, v)| sample_counts_chunked(*v, a.shots, p, seed.wrapping_add(k as u64), a.chunks))
            .collect::<Result<Vec<CountRecord>, _>>()?;
        let test = inequality_test(&records, a.sigma)?;
        check_finite("empirical margin", test.margin)?;
        check_finite("combined error", test.combined_error)?;
        results["monte_carlo"] = json!({"records": records, "test": test});
        inp.extend([
            ("simulate", json!(true)),
            ("shots", json!(a.shots)),
            ("seed", json!(seed)),
            ("sigma", json!(a.sigma)),
            ("chunks", json!(a.chunks)),
        ]);
        report_seed = Some(seed);
    }
    let mut report = Report::new("inequality", inputs(inp), results)
        .tolerance("exact", TOLERANCE)
        .tolerance("threshold_bisection", THRESHOLD_TOLERANCE);
    if let Some(seed) = report_seed {
        report = report.seeded(seed, PRNG_NAME);
    }
    Ok(Output::Json(report))
}

fn claim_ids(numbers: &[u8]) -> Outcome<Vec<ClaimId>> {
    let set: BTreeSet<u8> = numbers.iter().copied().collect();
    set.into_iter().map(|n| Ok(ClaimId::from_number(n)?)).collect()
}

fn contexts(a: &ContextsArgs) -> Outcome<Report> {
    let g = build_context_graph();
    check(g.contexts_are_complete(), || "a context is not a complete basis".into())?;
    let names = g.names();
    let states: Vec<Value> = names
        .iter()
        .enumerate()
        .map(|(i, n)| json!({"name": n, "inner_triangle": i < INNER_TRIANGLE}))
        .collect();
    let edges: Vec<[&str; 2]> = g.edges().iter().map(|(x, y)| [names[*x], names[*y]]).collect();
    let mut results = json!({
        "states": states,
        "edges": edges,
        "subsets_examined": g.subsets_examined(),
        "contexts": g.context_names(),
        "context_multiplicity": g.context_multiplicity(),
        "contexts_complete": true,
    });
    let mut inp = vec![("search", json!(a.search || a.forbid_claims.is_some()))];
    if a.search || a.forbid_claims.is_some() {
        let ids = claim_ids(a.forbid_claims.as_deref().unwrap_or(&[]))?;
        let found = search_assignments_with(&g, &ids);
        results["search"] = json!({
            "forbidden_claims": ids.iter().map(|c| c.number()).collect::<Vec<_>>(),
            "candidates": found.candidates,
            "forced_zero": found.forced_zero,
            "count": found.count(),
            "assignments": found.assignments,
        });
        inp.push(("forbid_claims", json!(ids.iter().map(|c| c.number()).collect::<Vec<_>>())));
    }
    Ok(Report::new("contexts", inputs(inp), results).tolerance("orthogonality", TOLERANCE))
}

#[derive(Serialize)]
struct CountRow<'a> {
    variant: Variant,
    label: &'a str,
    count: u64,
    shots: u64,
    noise_p: f64,
    seed: u64,
}

fn simulate(a: &SimulateArgs) -> Outcome<Output> {
    let p = check_noise(a.p)?;
    let rec = sample_counts_chunked(a.experiment, a.shots, p, a.seed, a.chunks)?;
    check(rec.total() == a.shots, || format!("counts sum to {} of {} shots", rec.total(), a.shots))?;
    if a.format == Format::Csv {
        let rows = rec
            .counts
            .iter()
            .map(|(l, n)| (l.as_str(), *n))
            .chain(std::iter::once((UNDETECTED, rec.undetected)))
            .map(|(label, count)| CountRow {
                variant: rec.variant,
                label,
                count,
                shots: rec.shots,
                noise_p: rec.noise_p,
                seed: rec.seed,
            });
        return csv_string(rows).map(Output::Csv);
    }
    let exact: Vec<Value> = outcome_probabilities(a.experiment, p)?
        .into_iter()
        .map(|(label, q)| json!({"label": label, "probability": q}))
        .collect();
    let results = json!({
        "record": rec,
        "noise_model": NOISE_MODEL,
        "estimates": estimate(&rec),
        "exact": exact,
    });
    let inp = inputs(vec![
        ("experiment", json!(a.experiment)),
        ("shots", json!(a.shots)),
        ("p", json!(p)),
        ("seed", json!(a.seed)),
        ("chunks", json!(a.chunks)),
    ]);
    Ok(Output::Json(
        Report::new("simulate", inp, results)
            .tolerance("exact", TOLERANCE)
            .seeded(a.seed, PRNG_NAME),
    ))
}

fn infer_cmd(a: &InferArgs) -> Outcome<Report> {
    let ids = claim_ids(&a.claims)?;
    let remaining = infer(&ids);
    let g = build_context_graph();
    let found = search_assignments_with(&g, &ids);
    // Every surviving noncontextual assignment must pick a remaining product state.
    for asg in &found.assignments {
        check(asg.true_states.iter().any(|s| remaining.contains(s)) || remaining.is_empty(), || {
            format!("assignment {:?} avoids {remaining:?}", asg.true_states)
        })?;
    }
    let eliminated: Vec<Value> = ids
        .iter()
        .map(|id| {
            let c = cheshire_core::contextuality::claim(*id);
            json!({"claim": id.number(), "eliminates": c.eliminated_product_states})
        })
        .collect();
    let numbers: Vec<u8> = ids.iter().map(|c| c.number()).collect();
    let results = json!({
        "claims": numbers,
        "eliminated": eliminated,
        "remaining": remaining,
        "contradiction": remaining.is_empty(),
        "noncontextual_assignments": found.count(),
    });
    Ok(Report::new("infer", inputs(vec![("claims", json!(numbers))]), results)
        .tolerance("orthogonality", TOLERANCE))
}
