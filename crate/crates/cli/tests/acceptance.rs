//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the verdicts always reach the output.

use std::collections::BTreeMap;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_rational::Ratio;

use cyclodesign_core::char_sums::{gauss_sum, pstar, weil_sum_bruteforce, weil_sum_closed};
use cyclodesign_core::code::{
    analytic_distribution_table, sample_ids, weight_analytic, weight_bruteforce,
    weight_distribution, CodeSpec, Method, WeightDistribution, DEFAULT_BUDGET,
};
use cyclodesign_core::designs::{
    anchor_orbits, anchored_design_check, check_support_multiplicity, extract_blocks,
    point_incidence, reduce_design_level, theorem5_parameters, verify_2design, VerifyMode,
};
use cyclodesign_core::invariance::{
    build_defining_set, check_affine_invariant, verify_affine_action,
};
use cyclodesign_core::{CycInt, FieldCtx};

type Verdict = Result<String, String>;

/// Number, name, runtime bound in seconds, check.
type Criterion = (u32, &'static str, Option<u64>, fn() -> Verdict);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn map(entries: &[(u64, u64)]) -> BTreeMap<u64, u64> {
    entries.iter().copied().collect()
}

fn spec(p: u64, l: u32, m: u32) -> Result<CodeSpec, String> {
    CodeSpec::new(p, l, m).map_err(|e| e.to_string())
}

fn brute(s: &CodeSpec) -> Result<WeightDistribution, String> {
    weight_distribution(s, Method::Brute, DEFAULT_BUDGET).map_err(|e| e.to_string())
}

fn table(s: &CodeSpec) -> Result<WeightDistribution, String> {
    analytic_distribution_table(s).map_err(|e| e.to_string())
}

fn dimension_of(dist: &WeightDistribution, p: u128) -> Option<u32> {
    (0..64).find(|&e| p.pow(e) == dist.total())
}

fn example1() -> Verdict {
    let s = spec(3, 2, 4)?;
    let expected = map(&[(0, 1), (51, 1296), (54, 240), (60, 648), (81, 2)]);
    let b = brute(&s)?;
    let t = table(&s)?;
    let per_word =
        weight_distribution(&s, Method::Analytic, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    ensure(s.length() == 81 && s.dimension() == 7, || {
        "length or dimension".into()
    })?;
    ensure(dimension_of(&b, 3) == Some(7), || {
        "multiplicities do not sum to 3^7".into()
    })?;
    for (name, d) in [
        ("brute force", &b),
        ("table", &t),
        ("closed-form weights", &per_word),
    ] {
        ensure(d.entries == expected, || {
            format!("{name} gave {:?}", d.entries)
        })?;
    }
    Ok("length 81, dimension 7, brute force = table = closed-form weights".into())
}

fn example1_designs() -> Verdict {
    let s = spec(3, 2, 4)?;
    let mut found = Vec::new();
    for (w, lambda, b) in [(51, 255, 648), (54, 53, 120), (60, 177, 324)] {
        let bs = extract_blocks(&s, w, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
        let d = verify_2design(&bs, VerifyMode::Full).map_err(|e| e.to_string())?;
        ensure(
            (d.t, d.v, d.k, d.lambda, d.b) == (2, 81, w, lambda, b),
            || format!("weight {w}: got {d:?}"),
        )?;
        found.push(format!("2-({}, {}, {}) b={}", d.v, d.k, d.lambda, d.b));
    }
    Ok(found.join(", "))
}

fn example2() -> Verdict {
    let s = spec(3, 3, 6)?;
    let expected = map(&[(0, 1), (477, 37908), (486, 2184), (504, 18954), (729, 2)]);
    let b = brute(&s)?;
    ensure(b.entries == expected, || {
        format!("brute force gave {:?}", b.entries)
    })?;
    ensure(
        s.dimension() == 10 && dimension_of(&b, 3) == Some(10),
        || "dimension".into(),
    )?;
    ensure(table(&s)?.entries == expected, || "table differs".into())?;
    Ok("3^10 codewords enumerated, dimension 10".into())
}

fn example3() -> Verdict {
    let s = spec(3, 2, 6)?;
    let expected = map(&[
        (0, 1),
        (468, 265356),
        (477, 530712),
        (486, 2184),
        (495, 530712),
        (504, 265356),
        (729, 2),
    ]);
    let start = Instant::now();
    let t = table(&s)?;
    let analytic_time = start.elapsed();
    ensure(analytic_time < Duration::from_secs(1), || {
        format!("table took {analytic_time:?}")
    })?;
    ensure(t.entries == expected, || {
        format!("table gave {:?}", t.entries)
    })?;
    let b = brute(&s)?;
    ensure(b.entries == expected, || {
        format!("brute force gave {:?}", b.entries)
    })?;
    let out = Command::new(env!("CARGO_BIN_EXE_cyclodesign"))
        .args([
            "weights", "--p", "3", "--l", "2", "--m", "6", "--method", "analytic",
        ])
        .env_remove("CYCLODESIGN_BUDGET")
        .output()
        .map_err(|e| e.to_string())?;
    let report: serde_json::Value =
        serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let flagged = report["discrepancies"]
        .as_array()
        .is_some_and(|a| a.iter().any(|d| d["kind"] == "printed_dimension"));
    ensure(flagged && report["spec"]["dimension"] == 13, || {
        "dimension 10 vs 13 not flagged".into()
    })?;
    Ok(format!(
        "brute force = table (table in {:.1} ms), printed dimension 10 flagged against 13",
        analytic_time.as_secs_f64() * 1e3
    ))
}

fn weil_equivalence() -> Verdict {
    let mut total = 0;
    for (p, m, l) in [(3, 4, 2), (3, 2, 1)] {
        let ctx = FieldCtx::new(p, m, None).map_err(|e| e.to_string())?;
        for a in ctx.elements().filter(|a| !a.is_zero()) {
            for b in ctx.elements() {
                let closed = weil_sum_closed(&ctx, l, a, b).map_err(|e| e.to_string())?;
                let direct = weil_sum_bruteforce(&ctx, l, a, b).map_err(|e| e.to_string())?;
                ensure(closed == direct, || {
                    format!(
                        "GF({p}^{m}) l={l}: S({}, {}) {closed} != {direct}",
                        a.rep(),
                        b.rep()
                    )
                })?;
                total += 1;
            }
        }
    }
    Ok(format!("{total} pairs equal as cyclotomic integers"))
}

fn gauss_sums() -> Verdict {
    for p in [3, 5, 7, 11] {
        let g = gauss_sum(p);
        let sq = &g * &g;
        ensure(sq == CycInt::from_int(p, pstar(p)), || {
            format!("p = {p}: G^2 = {sq}")
        })?;
    }
    Ok("G^2 = p* for p = 3, 5, 7, 11".into())
}

fn affine_invariance() -> Verdict {
    for (p, l, m) in [(3, 2, 4), (3, 3, 6), (3, 2, 6)] {
        let s = spec(p, l, m)?;
        ensure(
            check_affine_invariant(&build_defining_set(&s), p, m),
            || format!("({p},{l},{m}) defining set is not closed under the p-adic order"),
        )?;
    }
    let s = spec(3, 2, 4)?;
    let trials = 10_000;
    let r = verify_affine_action(&s, trials, 7).map_err(|e| e.to_string())?;
    ensure(r.failed == 0 && r.passed == trials, || format!("{r:?}"))?;
    ensure(r.corrupted_rejected == trials, || {
        "a corrupted image was accepted".into()
    })?;
    Ok(format!(
        "3 defining sets invariant; {trials} action trials on (3,2,4), 0 failures"
    ))
}

fn multiplicity() -> Verdict {
    let s = spec(3, 2, 4)?;
    let dist = brute(&s)?;
    let weights: Vec<u64> = dist.entries.keys().copied().collect();
    let counts =
        check_support_multiplicity(&s, &weights, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    for c in &counts {
        ensure(
            c.codewords == dist.multiplicity(c.weight) && c.supports * 2 == c.codewords,
            || format!("{c:?}"),
        )?;
    }
    Ok(format!(
        "{} non-zero weights, every support from exactly 2 scalar multiples",
        counts.len()
    ))
}

fn theorem5() -> Verdict {
    let mut notes = Vec::new();
    for (p, l, m) in [(3, 2, 4), (3, 2, 6)] {
        let s = spec(p, l, m)?;
        let pairs = theorem5_parameters(&s).map_err(|e| e.to_string())?;
        notes.push(format!("({p},{l},{m}) {} pairs", pairs.len()));
    }
    for (p, l, m) in [(3, 3, 9), (3, 2, 8)] {
        let s = spec(p, l, m)?;
        let t = table(&s)?;
        ensure(t.is_consistent(3) && t.first_moment_holds(3), || {
            format!("({p},{l},{m}) table is not self-consistent")
        })?;
        let pairs = theorem5_parameters(&s).map_err(|e| e.to_string())?;
        let samples = 100_000;
        for id in sample_ids(&s, samples, 2024) {
            let wa = weight_analytic(&s, &id).map_err(|e| e.to_string())?;
            let wb = weight_bruteforce(&s, &id).map_err(|e| e.to_string())?;
            ensure(wa == wb, || {
                format!("({p},{l},{m}) {id:?}: closed form {wa}, brute force {wb}")
            })?;
        }
        let anchors = anchor_orbits(&s, 100_000, 2024);
        let weights: Vec<u64> = pairs.iter().map(|t| t.weight).collect();
        let checks = anchored_design_check(&s, &weights, &anchors).map_err(|e| e.to_string())?;
        for (c, t) in checks.iter().zip(&pairs) {
            ensure(c.pairs >= 100_000, || format!("only {} pairs", c.pairs))?;
            ensure(c.lambda == t.lambda && c.blocks == t.blocks, || {
                format!(
                    "({p},{l},{m}) weight {}: coverage {} in {} blocks, formula {} in {}",
                    t.weight, c.lambda, c.blocks, t.lambda, t.blocks
                )
            })?;
        }
        notes.push(format!(
            "({p},{l},{m}) {} pairs, {samples} sampled weights, {} anchored pairs",
            pairs.len(),
            checks[0].pairs
        ));
    }
    Ok(notes.join("; "))
}

fn reduction() -> Verdict {
    let l1 = reduce_design_level(2, 81, 51, 255, 1).map_err(|e| e.to_string())?;
    let l0 = reduce_design_level(2, 81, 51, 255, 0).map_err(|e| e.to_string())?;
    ensure(
        l1 == Ratio::from_integer(408) && l0 == Ratio::from_integer(648),
        || format!("lambda_1 = {l1}, lambda_0 = {l0}"),
    )?;
    let s = spec(3, 2, 4)?;
    let bs = extract_blocks(&s, 51, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    let incidence = point_incidence(&bs);
    ensure(incidence.iter().all(|&c| c == 408), || {
        "incidence is not 408 everywhere".into()
    })?;
    ensure(bs.len() == 648, || format!("{} blocks", bs.len()))?;
    Ok("lambda_1 = 408 = every point incidence, lambda_0 = 648 = block count".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (1, "example 1 weight distribution", Some(10), example1),
        (2, "example 1 designs", Some(60), example1_designs),
        (3, "example 2 weight distribution", Some(60), example2),
        (4, "example 3 weight distribution", Some(1800), example3),
        (5, "Weil sum closed form", Some(10), weil_equivalence),
        (6, "Gauss sum square", None, gauss_sums),
        (7, "affine invariance", None, affine_invariance),
        (8, "support multiplicity", None, multiplicity),
        (9, "design parameters in every regime", None, theorem5),
        (10, "design level reduction", None, reduction),
    ];
    let mut failures = 0;
    for (n, name, bound, check) in criteria {
        let start = Instant::now();
        let verdict = check();
        let secs = start.elapsed().as_secs_f64();
        let verdict = match (verdict, bound) {
            (Ok(_), Some(b)) if secs >= b as f64 => Err(format!("took {secs:.1} s, bound {b} s")),
            (v, _) => v,
        };
        match verdict {
            Ok(detail) => println!("PASS criterion {n:>2} ({name}): {detail} [{secs:.2} s]"),
            Err(why) => {
                failures += 1;
                println!("FAIL criterion {n:>2} ({name}): {why} [{secs:.2} s]");
            }
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
