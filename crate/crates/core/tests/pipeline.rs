use std::collections::BTreeMap;

use cyclodesign_core::code::{
    analytic_distribution_table, codeword_vector, weight_distribution, CodeSpec, CodewordId,
    Method, Regime, DEFAULT_BUDGET,
};
use cyclodesign_core::designs::{
    anchor_orbits, anchored_design_check, extract_blocks, theorem2_bound, theorem5_parameters,
    verify_2design, VerifyMode,
};
use cyclodesign_core::invariance::{build_defining_set, check_affine_invariant, verify_affine_action};

fn dist(pairs: &[(u64, u64)]) -> BTreeMap<u64, u64> {
    pairs.iter().copied().collect()
}

#[test]
fn gf81_code_end_to_end() {
    let spec = CodeSpec::new(3, 2, 4).unwrap();
    assert_eq!(spec.regime(), Regime::Half);

    let brute = weight_distribution(&spec, Method::Brute, DEFAULT_BUDGET).unwrap();
    let expected = dist(&[(0, 1), (51, 1296), (54, 240), (60, 648), (81, 2)]);
    assert_eq!(brute.entries, expected);
    assert_eq!(brute.dimension, 7);
    assert_eq!(analytic_distribution_table(&spec).unwrap(), brute);
    assert!(brute.first_moment_holds(3));

    let zero = spec.ctx().elem(0).unwrap();
    let word = codeword_vector(&spec, &CodewordId::new(zero, zero, 2)).unwrap();
    assert!(word.iter().all(|&s| s == 2));

    let min = brute.min_distance().unwrap();
    assert!(theorem2_bound(min, 3) > 3);

    let mut checked = Vec::new();
    for pair in theorem5_parameters(&spec).unwrap() {
        let bs = extract_blocks(&spec, pair.weight, DEFAULT_BUDGET).unwrap();
        let params = verify_2design(&bs, VerifyMode::Full).unwrap();
        assert_eq!((params.v, params.k), (81, pair.weight));
        assert_eq!((params.b, params.lambda), (pair.blocks, pair.lambda));
        checked.push(pair.weight);
    }
    assert_eq!(checked, vec![51, 54, 60]);

    assert!(check_affine_invariant(&build_defining_set(&spec), 3, 4));
    assert!(verify_affine_action(&spec, 50, 7).unwrap().all_passed());
}

#[test]
fn even_odd_code_by_transform() {
    let spec = CodeSpec::new(3, 2, 6).unwrap();
    assert_eq!(spec.regime(), Regime::EvenOdd);
    let t = weight_distribution(&spec, Method::Transform, DEFAULT_BUDGET).unwrap();
    let expected = dist(&[
        (0, 1),
        (468, 265356),
        (477, 530712),
        (486, 2184),
        (495, 530712),
        (504, 265356),
        (729, 2),
    ]);
    assert_eq!(t.entries, expected);
    assert_eq!(t.dimension, 13);
    assert_eq!(analytic_distribution_table(&spec).unwrap(), t);
}

#[test]
fn even_quotient_designs_by_anchored_coverage() {
    let spec = CodeSpec::new(3, 2, 8).unwrap();
    assert_eq!(spec.regime(), Regime::EvenQuotient);
    let table = analytic_distribution_table(&spec).unwrap();
    assert_eq!(table.total(), 3u128.pow(17));

    let pairs = theorem5_parameters(&spec).unwrap();
    let weights: Vec<u64> = pairs.iter().map(|p| p.weight).collect();
    let anchors = anchor_orbits(&spec, 10_000, 1);
    let checks = anchored_design_check(&spec, &weights, &anchors).unwrap();
    for (pair, check) in pairs.iter().zip(&checks) {
        assert_eq!(check.weight, pair.weight);
        assert_eq!((check.blocks, check.lambda), (pair.blocks, pair.lambda));
    }
}
