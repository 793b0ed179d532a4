use std::collections::BTreeSet;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use cyclodesign_core::arith::binomial;
use cyclodesign_core::char_sums::{weil_sum_bruteforce, weil_sum_closed};
use cyclodesign_core::code::{
    analytic_distribution_table, weight_distribution, CodeSpec, Method, WeightDistribution,
    DEFAULT_BUDGET,
};
use cyclodesign_core::designs::{
    anchor_orbits, anchored_design_check, extract_blocks, point_incidence, reduce_design_level,
    theorem2_bound, theorem5_parameters, verify_2design, DesignParams, Theorem5Pair, VerifyMode,
};
use cyclodesign_core::invariance::{
    build_defining_set, check_affine_invariant, verify_affine_action,
};
use cyclodesign_core::{CycInt, Error};

use crate::args::{Common, MethodArg, Sampling, VerifyArg};
use crate::report::{Discrepancy, Report, SpecEcho, Table};

pub const BUDGET_ENV: &str = "CYCLODESIGN_BUDGET";

/// Codeword count up to which `designs` materialises block sets.
pub const EXTRACTION_LIMIT: u64 = 14_348_907; // 3^15

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if is_verification_failure(e) => 2,
            _ => 1,
        }
    }
}

/// Errors that refute a mathematical claim rather than reject the input.
pub fn is_verification_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::NotADesign { .. }
            | Error::MultiplicityViolation { .. }
            | Error::FormulaMismatch { .. }
            | Error::NonIntegralLambda { .. }
            | Error::InvalidDesignParameters(_)
    )
}

/// A finished report and whether any verification inside it failed.
pub struct Outcome {
    pub report: Report,
    pub failed: bool,
}

/// The flag wins over the environment, which wins over the default.
pub fn resolve_budget(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{BUDGET_ENV}={s:?} is not a count"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn build_spec(c: &Common) -> Result<CodeSpec, CliError> {
    Ok(CodeSpec::new(c.p, c.l, c.m)?)
}

fn report(
    spec: &CodeSpec,
    results: serde_json::Value,
    discrepancies: Vec<Discrepancy>,
    table: Table,
) -> Report {
    Report {
        spec: SpecEcho::of(spec),
        results,
        discrepancies,
        timing: None,
        table,
    }
}

fn unit_gcd_note(spec: &CodeSpec) -> Option<Discrepancy> {
    (!spec.regime().is_analytic()).then(|| {
        Discrepancy::new(
            "unit_gcd",
            "gcd(m, l) = 1: no closed-form table exists, results are from brute force only",
        )
    })
}

/// Dimensions stated alongside the published worked examples.
const PRINTED_DIMENSIONS: [((u32, u32, u32), u32); 3] =
    [((3, 2, 4), 7), ((3, 3, 6), 10), ((3, 2, 6), 10)];

fn dimension_note(spec: &CodeSpec, dist: &WeightDistribution) -> Option<Discrepancy> {
    let key = (spec.p(), spec.l(), spec.m());
    let printed = PRINTED_DIMENSIONS.iter().find(|(k, _)| *k == key)?.1;
    let p = spec.p() as u128;
    let derived = (0..=64).find(|&e| p.pow(e) == dist.total())?;
    (printed != derived).then(|| {
        Discrepancy::new(
            "printed_dimension",
            format!(
                "the published example states dimension {printed}, but the multiplicities sum to {}^{derived}, so the dimension is {derived}",
                spec.p()
            ),
        )
    })
}

pub fn weights(c: &Common, method: MethodArg, budget: u64) -> Result<Outcome, CliError> {
    let spec = build_spec(c)?;
    let mut notes: Vec<Discrepancy> = unit_gcd_note(&spec).into_iter().collect();
    let mut dists: Vec<(&'static str, WeightDistribution)> = Vec::new();
    let analytic = spec.regime().is_analytic();
    match method {
        MethodArg::Brute => {
            dists.push(("brute", weight_distribution(&spec, Method::Brute, budget)?))
        }
        MethodArg::Analytic => dists.push(("analytic", analytic_distribution_table(&spec)?)),
        MethodArg::Both => {
            dists.push(("brute", weight_distribution(&spec, Method::Brute, budget)?));
            if analytic {
                dists.push(("analytic", analytic_distribution_table(&spec)?));
            }
        }
        MethodArg::Transform => {
            dists.push((
                "transform",
                weight_distribution(&spec, Method::Transform, budget)?,
            ));
            if analytic {
                dists.push(("analytic", analytic_distribution_table(&spec)?));
            }
        }
    }
    let reference = &dists[0].1;
    let agree = dists.iter().all(|(_, d)| d.entries == reference.entries);
    if !agree {
        let weights: BTreeSet<u64> = dists
            .iter()
            .flat_map(|(_, d)| d.entries.keys().copied())
            .collect();
        let differing: Vec<String> = weights
            .into_iter()
            .filter(|&w| {
                dists
                    .iter()
                    .any(|(_, d)| d.multiplicity(w) != reference.multiplicity(w))
            })
            .map(|w| w.to_string())
            .collect();
        notes.push(Discrepancy::new(
            "distribution_mismatch",
            format!("methods disagree at weights {}", differing.join(", ")),
        ));
    }
    notes.extend(dimension_note(&spec, reference));
    let p = spec.p();
    let min_distance = reference.min_distance();
    let mut header = vec!["weight"];
    header.extend(dists.iter().map(|(name, _)| *name));
    let all_weights: BTreeSet<u64> = dists
        .iter()
        .flat_map(|(_, d)| d.entries.keys().copied())
        .collect();
    let rows = all_weights
        .iter()
        .map(|&w| {
            std::iter::once(w.to_string())
                .chain(dists.iter().map(|(_, d)| d.multiplicity(w).to_string()))
                .collect()
        })
        .collect();
    let distributions: serde_json::Map<String, serde_json::Value> = dists
        .iter()
        .map(|(name, d)| {
            (
                name.to_string(),
                serde_json::to_value(d).expect("serialises"),
            )
        })
        .collect();
    let results = json!({
        "distributions": distributions,
        "agree": agree,
        "sum_is_power": reference.is_consistent(p),
        "first_moment": reference.first_moment_holds(p),
        "min_distance": min_distance,
        "theorem2_bound": min_distance.map(|d| theorem2_bound(d, p as u64)),
    });
    Ok(Outcome {
        report: report(&spec, results, notes, Table { header, rows }),
        failed: !agree,
    })
}

#[derive(Serialize, Debug)]
struct DesignRow {
    weight: u64,
    verification: &'static str,
    pairs_checked: u64,
    design: Option<DesignParams>,
    /// Blocks through each point, when uniform.
    lambda_1: Option<u64>,
    multiplicity_checked: bool,
    printed_lambda: Option<u64>,
    error: Option<String>,
}

fn design_weights(spec: &CodeSpec, budget: u64) -> Result<Vec<u64>, CliError> {
    let dist = if spec.regime().is_analytic() {
        analytic_distribution_table(spec)?
    } else {
        weight_distribution(spec, Method::Brute, budget)?
    };
    Ok(dist.entries.keys().copied().collect())
}

pub fn designs(
    c: &Common,
    sampling: Sampling,
    weight: Option<u64>,
    verify: VerifyArg,
    blocks_dir: Option<&Path>,
    budget: u64,
) -> Result<Outcome, CliError> {
    let spec = build_spec(c)?;
    if sampling.samples == 0 {
        return Err(Error::SampleBudgetZero.into());
    }
    let q = spec.length();
    let mut notes: Vec<Discrepancy> = unit_gcd_note(&spec).into_iter().collect();
    let all = design_weights(&spec, budget)?;
    let weights: Vec<u64> = match weight {
        Some(w) if !all.contains(&w) || w == 0 => return Err(Error::WeightAbsent(w).into()),
        Some(w) if w == q => {
            return Err(CliError::Config(format!(
                "weight {q} is supported only by the constant codewords; its single block is degenerate"
            )))
        }
        Some(w) => vec![w],
        None => {
            notes.push(Discrepancy::new(
                "degenerate_weight",
                format!("weight {q} (the full point set, a single block) is excluded from design claims"),
            ));
            all.iter().copied().filter(|&w| w != 0 && w != q).collect()
        }
    };
    let printed: Vec<Theorem5Pair> = if spec.regime().is_analytic() {
        match theorem5_parameters(&spec) {
            Ok(t) => t,
            Err(e) => {
                notes.push(Discrepancy::new("formula_mismatch", e.to_string()));
                Vec::new()
            }
        }
    } else {
        Vec::new()
    };
    let printed_lambda = |w: u64| printed.iter().find(|t| t.weight == w).map(|t| t.lambda);
    let mut rows = Vec::new();
    if spec.pair_count() <= budget && spec.id_count() <= EXTRACTION_LIMIT {
        if let Some(dir) = blocks_dir {
            std::fs::create_dir_all(dir)?;
        }
        for &w in &weights {
            rows.push(extracted_design(
                &spec,
                w,
                verify,
                sampling,
                blocks_dir,
                budget,
                printed_lambda(w),
            )?);
        }
    } else if spec.regime().is_analytic() {
        notes.push(Discrepancy::new(
            "anchored_verification",
            format!(
                "{} codewords are too many to extract blocks (limit {EXTRACTION_LIMIT}, budget {budget} pairs); pair coverage is counted through seeded anchor orbits instead",
                spec.id_count()
            ),
        ));
        let anchors = anchor_orbits(&spec, sampling.samples, sampling.seed);
        let checks = anchored_design_check(&spec, &weights, &anchors);
        match checks {
            Ok(checks) => {
                for ch in checks {
                    let design = DesignParams {
                        t: 2,
                        v: q,
                        k: ch.weight,
                        lambda: ch.lambda,
                        b: ch.blocks,
                    };
                    let lambda_1 = reduce_design_level(2, q, ch.weight, ch.lambda, 1)?;
                    let error =
                        (lambda_1 != Ratio::from_integer(ch.incidence as u128)).then(|| {
                            format!(
                                "incidence {} differs from the reduced level {lambda_1}",
                                ch.incidence
                            )
                        });
                    rows.push(DesignRow {
                        weight: ch.weight,
                        verification: "anchored",
                        pairs_checked: ch.pairs,
                        design: Some(design),
                        lambda_1: Some(ch.incidence),
                        multiplicity_checked: false,
                        printed_lambda: printed_lambda(ch.weight),
                        error,
                    });
                }
            }
            Err(e) if is_verification_failure(&e) => {
                for &w in &weights {
                    rows.push(failed_row(w, "anchored", e.to_string()));
                }
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        return Err(Error::BudgetExceeded {
            needed: spec.pair_count(),
            budget,
        }
        .into());
    }
    for row in &mut rows {
        if let (Some(d), Some(pl)) = (row.design, row.printed_lambda) {
            if d.lambda != pl && row.error.is_none() {
                row.error = Some(format!(
                    "certified lambda {} differs from the closed form {pl}",
                    d.lambda
                ));
            }
        }
    }
    let failed = rows.iter().any(|r| r.error.is_some())
        || notes.iter().any(|n| n.kind == "formula_mismatch");
    let table = Table {
        header: vec![
            "weight",
            "verification",
            "pairs_checked",
            "v",
            "k",
            "lambda",
            "b",
            "lambda_1",
            "status",
        ],
        rows: rows
            .iter()
            .map(|r| {
                let opt = |x: Option<u64>| x.map_or(String::new(), |v| v.to_string());
                vec![
                    r.weight.to_string(),
                    r.verification.to_string(),
                    r.pairs_checked.to_string(),
                    opt(r.design.map(|d| d.v)),
                    opt(r.design.map(|d| d.k)),
                    opt(r.design.map(|d| d.lambda)),
                    opt(r.design.map(|d| d.b)),
                    opt(r.lambda_1),
                    r.error.clone().unwrap_or_else(|| "ok".into()),
                ]
            })
            .collect(),
    };
    let results = json!({ "designs": rows });
    Ok(Outcome {
        report: report(&spec, results, notes, table),
        failed,
    })
}

fn failed_row(weight: u64, verification: &'static str, error: String) -> DesignRow {
    DesignRow {
        weight,
        verification,
        pairs_checked: 0,
        design: None,
        lambda_1: None,
        multiplicity_checked: false,
        printed_lambda: None,
        error: Some(error),
    }
}

fn extracted_design(
    spec: &CodeSpec,
    w: u64,
    verify: VerifyArg,
    sampling: Sampling,
    blocks_dir: Option<&Path>,
    budget: u64,
    printed_lambda: Option<u64>,
) -> Result<DesignRow, CliError> {
    let bs = match extract_blocks(spec, w, budget) {
        Ok(bs) => bs,
        Err(e) if is_verification_failure(&e) => return Ok(failed_row(w, "none", e.to_string())),
        Err(e) => return Err(e.into()),
    };
    if let Some(dir) = blocks_dir {
        let name = format!("blocks_p{}_l{}_m{}_w{w}.txt", spec.p(), spec.l(), spec.m());
        bs.write_to(BufWriter::new(File::create(dir.join(name))?))?;
    }
    let (mode, verification) = match verify {
        VerifyArg::Full => (VerifyMode::Full, "full"),
        VerifyArg::Sampled => (
            VerifyMode::Sampled {
                samples: sampling.samples,
                seed: sampling.seed,
            },
            "sampled",
        ),
        VerifyArg::Auto => match VerifyMode::auto(&bs, sampling.samples, sampling.seed) {
            VerifyMode::Full => (VerifyMode::Full, "full"),
            m => (m, "sampled"),
        },
    };
    let pairs_checked = match mode {
        VerifyMode::Full => binomial(bs.v as u64, 2) as u64,
        VerifyMode::Sampled { samples, .. } => samples,
    };
    let design = match verify_2design(&bs, mode) {
        Ok(d) => d,
        Err(e) if is_verification_failure(&e) => {
            let mut row = failed_row(w, verification, e.to_string());
            row.pairs_checked = pairs_checked;
            row.multiplicity_checked = bs.multiplicity_checked;
            return Ok(row);
        }
        Err(e) => return Err(e.into()),
    };
    let incidence = point_incidence(&bs);
    let lambda_1 = reduce_design_level(2, design.v, design.k, design.lambda, 1)?;
    let uniform = incidence.iter().all(|&x| x == incidence[0]);
    let error = (!uniform || lambda_1 != Ratio::from_integer(incidence[0] as u128))
        .then(|| format!("point incidences do not all equal the reduced level {lambda_1}"));
    Ok(DesignRow {
        weight: w,
        verification,
        pairs_checked,
        design: Some(design),
        lambda_1: uniform.then_some(incidence[0]),
        multiplicity_checked: bs.multiplicity_checked,
        printed_lambda,
        error,
    })
}

#[derive(Serialize, Debug)]
struct SumRow {
    a: u32,
    b: u32,
    brute: Vec<i64>,
    closed: Vec<i64>,
}

fn closed_or_trivial(
    spec: &CodeSpec,
    a: cyclodesign_core::FieldElem,
    b: cyclodesign_core::FieldElem,
) -> Result<CycInt, CliError> {
    if a.is_zero() {
        let v = if b.is_zero() { spec.length() as i64 } else { 0 };
        return Ok(CycInt::from_int(spec.p(), v));
    }
    Ok(weil_sum_closed(spec.ctx(), spec.l(), a, b)?)
}

pub fn sums(c: &Common, pair: Option<(u64, u64)>, budget: u64) -> Result<Outcome, CliError> {
    let spec = build_spec(c)?;
    let ctx = spec.ctx();
    let header = vec!["a", "b", "brute", "closed", "equal"];
    let fmt = |v: &[i64]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    if let Some((ar, br)) = pair {
        let (a, b) = (ctx.elem(ar)?, ctx.elem(br)?);
        let brute = weil_sum_bruteforce(ctx, spec.l(), a, b)?;
        let closed = closed_or_trivial(&spec, a, b)?;
        let equal = brute == closed;
        let table = Table {
            header,
            rows: vec![vec![
                ar.to_string(),
                br.to_string(),
                fmt(brute.coeffs()),
                fmt(closed.coeffs()),
                equal.to_string(),
            ]],
        };
        let results = json!({
            "a": ar, "b": br,
            "brute": brute.coeffs(), "closed": closed.coeffs(),
            "equal": equal,
        });
        let notes = (!equal)
            .then(|| Discrepancy::new("sum_mismatch", format!("S({ar}, {br}) differs")))
            .into_iter()
            .collect();
        return Ok(Outcome {
            report: report(&spec, results, notes, table),
            failed: !equal,
        });
    }
    let q = spec.length();
    let needed = q * q;
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget }.into());
    }
    let per_a: Vec<Result<Vec<SumRow>, CliError>> = ctx
        .elements()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|a| {
            let g = spec.quadratic_traces(a);
            let mut bad = Vec::new();
            for b in ctx.elements() {
                let brute = CycInt::from_histogram(spec.p(), &spec.trace_histogram(&g, b));
                let closed = closed_or_trivial(&spec, a, b)?;
                if brute != closed {
                    bad.push(SumRow {
                        a: a.rep(),
                        b: b.rep(),
                        brute: brute.coeffs().to_vec(),
                        closed: closed.coeffs().to_vec(),
                    });
                }
            }
            Ok(bad)
        })
        .collect();
    let mut mismatches = Vec::new();
    for r in per_a {
        mismatches.extend(r?);
    }
    let count = mismatches.len() as u64;
    let table = Table {
        header: vec!["pairs", "equal", "mismatched"],
        rows: vec![vec![
            needed.to_string(),
            (needed - count).to_string(),
            count.to_string(),
        ]],
    };
    const SHOWN: usize = 20;
    mismatches.truncate(SHOWN);
    let results = json!({
        "pairs": needed,
        "equal": needed - count,
        "mismatched": count,
        "first_mismatches": mismatches,
    });
    let notes = (count > 0)
        .then(|| Discrepancy::new("sum_mismatch", format!("{count} of {needed} pairs differ")))
        .into_iter()
        .collect();
    Ok(Outcome {
        report: report(&spec, results, notes, table),
        failed: count > 0,
    })
}

pub fn invariance(c: &Common, sampling: Sampling) -> Result<Outcome, CliError> {
    let spec = build_spec(c)?;
    let ds = build_defining_set(&spec);
    let invariant = check_affine_invariant(&ds, spec.p() as u64, spec.m());
    let action = verify_affine_action(&spec, sampling.samples, sampling.seed)?;
    let failed = !invariant || !action.all_passed();
    let residues: Vec<String> = ds.residues.iter().map(|r| r.to_string()).collect();
    let table = Table {
        header: vec!["check", "value"],
        rows: vec![
            vec!["defining_set".into(), format!("0 {}", residues.join(" "))],
            vec!["affine_invariant".into(), invariant.to_string()],
            vec!["action_trials".into(), action.trials.to_string()],
            vec!["action_passed".into(), action.passed.to_string()],
            vec![
                "corrupted_rejected".into(),
                action.corrupted_rejected.to_string(),
            ],
        ],
    };
    let results = json!({
        "defining_set": ds,
        "affine_invariant": invariant,
        "action": action,
    });
    let notes = unit_gcd_note(&spec).into_iter().collect();
    Ok(Outcome {
        report: report(&spec, results, notes, table),
        failed,
    })
}

pub fn params(c: &Common) -> Result<Outcome, CliError> {
    let spec = build_spec(c)?;
    let q = spec.length();
    let p = spec.p() as u64;
    let table_dist = analytic_distribution_table(&spec)?;
    let pairs = match theorem5_parameters(&spec) {
        Ok(pairs) => pairs,
        Err(e) if is_verification_failure(&e) => {
            let results = json!({ "error": e.to_string() });
            let notes = vec![Discrepancy::new("formula_mismatch", e.to_string())];
            return Ok(Outcome {
                report: report(&spec, results, notes, Table::default()),
                failed: true,
            });
        }
        Err(e) => return Err(e.into()),
    };
    let min_distance = table_dist.min_distance().expect("non-zero weights exist");
    let bound = theorem2_bound(min_distance, p);
    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    for t in &pairs {
        let l1 = reduce_design_level(2, q, t.weight, t.lambda, 1)?;
        let l0 = reduce_design_level(2, q, t.weight, t.lambda, 0)?;
        rows.push(vec![
            t.weight.to_string(),
            t.blocks.to_string(),
            t.lambda.to_string(),
            l1.to_string(),
            l0.to_string(),
        ]);
        json_rows.push(json!({
            "weight": t.weight,
            "blocks": t.blocks,
            "lambda": t.lambda,
            "lambda_1": l1.to_string(),
            "lambda_0": l0.to_string(),
        }));
    }
    let results = json!({
        "designs": json_rows,
        "min_distance": min_distance,
        "theorem2_bound": bound,
        "all_weights_within_bound": pairs.iter().all(|t| t.weight <= bound),
    });
    let notes = vec![Discrepancy::new(
        "degenerate_weight",
        format!("weight {q} (the full point set, a single block) is excluded from design claims"),
    )];
    Ok(Outcome {
        report: report(
            &spec,
            results,
            notes,
            Table {
                header: vec!["weight", "blocks", "lambda", "lambda_1", "lambda_0"],
                rows,
            },
        ),
        failed: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let refuted = CliError::Core(Error::NotADesign {
            first_pair: (0, 1),
            first_count: 1,
            second_pair: (0, 2),
            second_count: 0,
        });
        assert_eq!(refuted.exit_code(), 2);
        let mismatch = CliError::Core(Error::FormulaMismatch {
            weight: 51,
            printed: "254".into(),
            derived: "255".into(),
        });
        assert_eq!(mismatch.exit_code(), 2);
        assert_eq!(CliError::Core(Error::NotPrime(4)).exit_code(), 1);
        assert_eq!(CliError::Config("x".into()).exit_code(), 1);
    }

    #[test]
    fn dimension_note_only_for_mismatching_examples() {
        let s = CodeSpec::new(3, 2, 6).unwrap();
        let d = analytic_distribution_table(&s).unwrap();
        assert!(dimension_note(&s, &d).is_some());
        let s = CodeSpec::new(3, 2, 4).unwrap();
        let d = analytic_distribution_table(&s).unwrap();
        assert!(dimension_note(&s, &d).is_none());
    }
}
